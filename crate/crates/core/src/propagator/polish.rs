use super::TransferPair;
use crate::error::{Error, Result};
use crate::linalg::{frob, identity, real, CMat};


const MAX_SWEEPS: usize = 4;

/// Pull a nearly Bogoliubov pair back onto the group.
///
/// Iterates `S <- S (3 - S^# S) / 2` with the pseudo-adjoint
/// `S^# = diag(1,-1) S^dagger diag(1,-1)`, which converges quadratically to
/// `S (S^# S)^(-1/2)` and keeps the block layout `[[H, B], [B*, H*]]`.
/// Changes are of the size of the structural defect, i.e. at the level of
/// the integration tolerance.
pub fn polish_symplectic(pair: &TransferPair) -> Result<TransferPair> {
    let n = pair.lattice().len();
    let eye = identity(n);
    let mut h: CMat = pair.h_hat().to_owned();
    let mut b: CMat = pair.b_hat().to_owned();
    let mut last = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let p = h.adjoint() * &h - b.transpose() * b.conjugate() - &eye;
        let q = h.adjoint() * &b - b.transpose() * h.conjugate();
        let defect = frob(p.as_ref()) + frob(q.as_ref());
        if !defect.is_finite() {
            return Err(Error::Integration { at: f64::NAN, reason: "non-finite pair during polishing".into() });
        }
        if defect >= 0.5 * last {
            break;
        }
        last = defect;
        let dh = &h * &p + &b * q.conjugate();
        let db = &h * &q + &b * p.conjugate();
        h -= &dh * real(0.5);
        b -= &db * real(0.5);
    }
    let mut meta = pair.meta.clone();
    if !meta.integrator.ends_with("+polish") {
        meta.integrator.push_str("+polish");
    }
    TransferPair::from_normalized(pair.lattice(), h, b, meta)
}
