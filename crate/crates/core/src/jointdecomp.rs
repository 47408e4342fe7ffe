//! Joint Schmidt decomposition of a transfer pair:
//! `B = sum_n sqrt(L_n) u_n psi_n^T` and `H = sum_n sqrt(L_n + 1) u_n psi_n^dagger`
//! with one shared set of output modes `u_n` and input modes `psi_n`.
//!
//! Both blocks are diagonalized by their own SVD. The left unitary of `B` is
//! shared by rotating the right unitary of `H` with `K = U_H^dagger U_B`.
//! Projected onto these two bases, `B` becomes `S G` with `G` a symmetric,
//! block-diagonal unitary; its block-wise principal square root splits it
//! evenly between the two mode families. Modes whose `B` singular value is
//! lost in rounding keep `G = I`.

use crate::error::{Error, Result};
use crate::io::{read_complex_block, read_header, write_complex_block, write_header, ContainerKind};
use crate::lattice::Lattice;
use crate::linalg::{frob, identity, rayleigh_gram, CMat};
use crate::propagator::TransferPair;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompOptions {
    /// Singular values closer than `tol * max(1, s)` share a block.
    pub degeneracy_tol: f64,
    pub reconstruction_tol: f64,
    /// Allowed symmetry / unitarity defect of the bridging unitary.
    pub structure_tol: f64,
}

impl Default for DecompOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-8, reconstruction_tol: 1e-6, structure_tol: 1e-6 }
    }
}

/// Which family of Schmidt modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeFamily {
    /// Output modes `u_n`.
    Output,
    /// Input modes `psi_n`.
    Input,
}

/// Joint Schmidt modes of one pair, sorted by decreasing gain.
#[derive(Debug, Clone)]
pub struct SchmidtBasis {
    lattice: Lattice,
    /// Weight-normalized mode columns (`sqrt(w_j) u_n(q_j)`).
    u: CMat,
    psi: CMat,
    /// Schmidt gains of `B` (`L_n`).
    pub gains: Vec<f64>,
    /// Squared singular values of `H` (`L_n + 1` for an exact pair).
    pub gains_tilde: Vec<f64>,
    pub blocks: Vec<Range<usize>>,
    pub pump_phase: Option<f64>,
    pub label: String,
    pub residuals: DecompResiduals,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompResiduals {
    pub b_reconstruction: f64,
    pub h_reconstruction: f64,
    pub bridge_asymmetry: f64,
    pub bridge_unitarity: f64,
    pub rotation_commutator: f64,
}

impl SchmidtBasis {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Normalized mode matrix (columns orthonormal in the plain inner product).
    pub fn normalized(&self, side: ModeFamily) -> &CMat {
        match side {
            ModeFamily::Output => &self.u,
            ModeFamily::Input => &self.psi,
        }
    }

    /// Mode function samples: column `n` holds `u_n(q_j)` or `psi_n(q_j)`,
    /// normalized so that `sum_j |u_n(q_j)|^2 w_j = 1`.
    pub fn modes(&self, side: ModeFamily) -> CMat {
        let m = self.normalized(side);
        let s = self.lattice.sqrt_weights();
        Mat::from_fn(m.nrows(), m.ncols(), |j, n| m[(j, n)] / s[j])
    }

    pub fn mode_function(&self, n: usize, side: ModeFamily) -> Vec<C64> {
        let m = self.normalized(side);
        let s = self.lattice.sqrt_weights();
        (0..m.nrows()).map(|j| m[(j, n)] / s[j]).collect()
    }

    pub(crate) fn from_parts(
        lattice: Lattice,
        u: CMat,
        psi: CMat,
        gains: Vec<f64>,
        gains_tilde: Vec<f64>,
        blocks: Vec<Range<usize>>,
        pump_phase: Option<f64>,
        label: String,
    ) -> Self {
        Self { lattice, u, psi, gains, gains_tilde, blocks, pump_phase, label, residuals: DecompResiduals::default() }
    }

    /// Rebuild `(H, B)` in normalized form from the modes.
    pub fn reconstruct(&self) -> (CMat, CMat) {
        let n = self.u.nrows();
        let m = self.len();
        let scaled_b = Mat::from_fn(n, m, |j, k| self.u[(j, k)] * self.gains[k].max(0.0).sqrt());
        let scaled_h = Mat::from_fn(n, m, |j, k| self.u[(j, k)] * self.gains_tilde[k].max(0.0).sqrt());
        (&scaled_h * self.psi.adjoint(), &scaled_b * self.psi.transpose())
    }

    /// Fold a pump phase into a basis of a phase-stripped pair: both mode
    /// families pick up `e^{i phi / 2}`.
    pub fn with_pump_phase(&self, phi: f64) -> Result<Self> {
        if self.pump_phase.is_some() {
            return Err(Error::PhaseMismatch(format!("basis '{}' already carries a pump phase", self.label)));
        }
        let r = C64::cis(0.5 * phi);
        let mut out = self.clone();
        out.u = Mat::from_fn(self.u.nrows(), self.u.ncols(), |i, j| self.u[(i, j)] * r);
        out.psi = Mat::from_fn(self.psi.nrows(), self.psi.ncols(), |i, j| self.psi[(i, j)] * r);
        out.pump_phase = Some(phi);
        Ok(out)
    }
}

/// Contiguous runs of (near-)equal singular values, sorted descending.
pub fn degenerate_blocks(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || (values[i - 1] - values[i]).abs() > tol * values[i - 1].abs().max(1.0);
        if split {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks
}

/// Block-wise principal square root `D` of a symmetric unitary `G` with
/// `D D^T = G`, `D` unitary and block-diagonal on `blocks`.
pub fn takagi_unitary(g: &CMat, blocks: &[Range<usize>]) -> Result<CMat> {
    let n = g.nrows();
    let asym = (0..n)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .map(|(i, j)| (g[(i, j)] - g[(j, i)]).norm())
        .fold(0.0, f64::max);
    if asym > TAKAGI_SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let mut d: CMat = Mat::zeros(n, n);
    for r in blocks {
        let m = r.len();
        let sub = Mat::from_fn(m, m, |i, j| g[(r.start + i, r.start + j)]);
        let root = symmetric_unitary_sqrt(&sub)?;
        for j in 0..m {
            for i in 0..m {
                d[(r.start + i, r.start + j)] = root[(i, j)];
            }
        }
    }
    Ok(d)
}

/// Principal square root of a symmetric unitary matrix via the joint real
/// eigenbasis of its (commuting, real symmetric) real and imaginary parts.
pub fn symmetric_unitary_sqrt(z: &CMat) -> Result<CMat> {
    let m = z.nrows();
    if m == 1 {
        let v = z[(0, 0)];
        return Ok(Mat::from_fn(1, 1, |_, _| C64::from_polar(1.0, 0.5 * v.arg())));
    }
    let re = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (z[(i, j)].re + z[(j, i)].re));
    let im = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (z[(i, j)].im + z[(j, i)].im));
    let evd = re
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("real symmetric eigensolver: {e:?}")))?;
    let mut basis = evd.U().to_owned();
    let vals: Vec<f64> = (0..m).map(|i| evd.S()[i]).collect();
    // Inside each cluster of equal real parts, diagonalize the imaginary part.
    let clusters = degenerate_blocks(&vals.iter().rev().copied().collect::<Vec<_>>(), 1e-7);
    for c in clusters {
        let (lo, hi) = (m - c.end, m - c.start);
        if hi - lo < 2 {
            continue;
        }
        let q = basis.subcols(lo, hi - lo).to_owned();
        let small = q.transpose() * &im * &q;
        let sym = Mat::<f64>::from_fn(hi - lo, hi - lo, |i, j| 0.5 * (small[(i, j)] + small[(j, i)]));
        let e2 = sym
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Factorization(format!("real symmetric eigensolver: {e:?}")))?;
        let rotated = &q * e2.U();
        basis.subcols_mut(lo, hi - lo).copy_from(&rotated);
    }
    let bc = Mat::<C64>::from_fn(m, m, |i, j| C64::new(basis[(i, j)], 0.0));
    let diag = bc.transpose() * z * &bc;
    let roots: Vec<C64> = (0..m).map(|k| C64::from_polar(1.0, 0.5 * diag[(k, k)].arg())).collect();
    let scaled = Mat::from_fn(m, m, |i, k| bc[(i, k)] * roots[k]);
    Ok(&scaled * bc.transpose())
}

/// Flip `(u_n, psi_n)` together so that `u_n` has non-negative real part at
/// its largest-modulus sample.
pub fn canonicalize_signs(basis: &mut SchmidtBasis) {
    let n = basis.u.nrows();
    let s = basis.lattice.sqrt_weights();
    for k in 0..basis.u.ncols() {
        let mut best = 0;
        let mut best_mod = -1.0;
        for j in 0..n {
            let v = basis.u[(j, k)].norm() / s[j];
            if v > best_mod * (1.0 + 1e-12) {
                best_mod = v;
                best = j;
            }
        }
        if basis.u[(best, k)].re < 0.0 {
            for j in 0..n {
                basis.u[(j, k)] = -basis.u[(j, k)];
                basis.psi[(j, k)] = -basis.psi[(j, k)];
            }
        }
    }
}

fn svd_parts(m: &CMat, what: &str) -> Result<(CMat, Vec<f64>, CMat)> {
    let svd = m.svd().map_err(|e| Error::Factorization(format!("SVD of {what}: {e:?}")))?;
    let s = (0..m.ncols()).map(|i| svd.S()[i].re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

/// Modes with singular value below this fraction of the largest one carry no
/// recoverable input-side phase information and are paired trivially.
pub const RESOLVED_FRACTION: f64 = 1e-9;

/// Singular values of `B` below this fraction of the largest singular value
/// of `H` sit at integrator accuracy (a dark fringe, a vacuum pass) and are
/// likewise paired trivially.
pub const NOISE_FRACTION: f64 = 1e-9;

/// Smallest `|B| / |H|` (Frobenius) against which the B reconstruction
/// residual is normalized.
pub const B_RESIDUAL_FLOOR: f64 = 1e-4;

/// Largest entrywise asymmetry accepted by [`takagi_unitary`].
pub const TAKAGI_SYMMETRY_TOL: f64 = 1e-10;

/// Decompose a pair into its joint Schmidt modes.
pub fn joint_decompose(pair: &TransferPair, opts: &DecompOptions) -> Result<SchmidtBasis> {
    let b = pair.b_hat().to_owned();
    let h = pair.h_hat().to_owned();
    let n = b.nrows();

    let (ub, sb, _) = svd_parts(&b, "B")?;
    let (uh, sh, vh) = svd_parts(&h, "H")?;

    // Share the left unitary of B: H = U_B S_H W^dagger with W = V_H K.
    let k = uh.adjoint() * &ub;
    let comm = Mat::from_fn(n, n, |i, j| k[(i, j)] * (sh[i] - sh[j]));
    let rotation_commutator = frob(comm.as_ref()) / sh.iter().map(|x| x * x).sum::<f64>().sqrt();
    if rotation_commutator > opts.structure_tol {
        return Err(Error::Degeneracy(format!(
            "left singular spaces of H and B disagree (commutator {rotation_commutator:.3e})"
        )));
    }
    let w = &vh * &k;

    // B = U_B S G W^T with G symmetric unitary; T = S G is what B determines.
    let t = ub.adjoint() * &b * w.conjugate();
    let floor = (RESOLVED_FRACTION * sb[0]).max(NOISE_FRACTION * sh[0]);
    let resolved = sb.iter().take_while(|&&x| x > floor && x > 0.0).count();
    let mut blocks = degenerate_blocks(&sb[..resolved], opts.degeneracy_tol);
    if resolved < n {
        blocks.push(resolved..n);
    }
    let mut owner = vec![0usize; n];
    for (bi, r) in blocks.iter().enumerate() {
        for i in r.clone() {
            owner[i] = bi;
        }
    }
    let mut g: CMat = identity(n);
    let mut leak = 0.0;
    let mut asym = 0.0;
    for j in 0..resolved {
        for i in 0..resolved {
            if owner[i] == owner[j] {
                g[(i, j)] = t[(i, j)] / sb[i];
                asym += (t[(i, j)] * sb[j] - t[(j, i)] * sb[i]).norm_sqr() / (sb[i] * sb[j]);
            } else {
                leak += t[(i, j)].norm_sqr();
            }
        }
    }
    let scale: f64 = sb.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    let bridge_asymmetry = (asym / scale).sqrt();
    let leak = (leak / scale).sqrt();
    if leak > opts.structure_tol {
        return Err(Error::Degeneracy(format!("bridging unitary leaks across blocks ({leak:.3e})")));
    }
    if bridge_asymmetry > opts.structure_tol {
        return Err(Error::NotSymmetric(bridge_asymmetry));
    }
    let gram = g.adjoint() * &g;
    let mut unit = 0.0;
    for j in 0..resolved {
        for i in 0..resolved {
            let e = gram[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            unit += e.norm_sqr() * sb[i] * sb[j];
        }
    }
    let bridge_unitarity = (unit / scale).sqrt();
    if bridge_unitarity > opts.structure_tol {
        return Err(Error::NotUnitary(bridge_unitarity));
    }
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    let d = takagi_unitary(&sym, &blocks)?;

    let u = &ub * &d;
    let psi = &w * &d;
    // Gains as Rayleigh quotients of B B^dagger and H H^dagger along the shared
    // output modes; compensated sums keep L~ - L meaningful when L >> 1.
    let cols: Vec<Vec<C64>> = (0..n).map(|m| (0..n).map(|j| u[(j, m)]).collect()).collect();
    let gains: Vec<f64> = cols.iter().map(|c| rayleigh_gram(b.as_ref(), c)).collect();
    let gains_tilde: Vec<f64> = cols.iter().map(|c| rayleigh_gram(h.as_ref(), c)).collect();
    let mut basis = SchmidtBasis::from_parts(
        pair.lattice().clone(),
        u,
        psi,
        gains,
        gains_tilde,
        blocks,
        pair.meta.pump_phase,
        pair.meta.label.clone(),
    );
    canonicalize_signs(&mut basis);

    let (hr, br) = basis.reconstruct();
    // A noise-level B (far below integrator accuracy relative to H) is
    // measured against the scale of H instead of its own.
    let b_res = frob((&br - &b).as_ref()) / frob(b.as_ref()).max(B_RESIDUAL_FLOOR * frob(h.as_ref()));
    let h_res = frob((&hr - &h).as_ref()) / frob(h.as_ref());
    basis.residuals = DecompResiduals {
        b_reconstruction: b_res,
        h_reconstruction: h_res,
        bridge_asymmetry,
        bridge_unitarity,
        rotation_commutator,
    };
    let worst = b_res.max(h_res);
    if !(worst <= opts.reconstruction_tol) {
        return Err(Error::Reconstruction { residual: worst, limit: opts.reconstruction_tol });
    }
    Ok(basis)
}

/// Schmidt gains and output modes from the Hermitian eigenproblem of `B B^dagger`
/// (independent route used for cross-checks). Gains sorted descending.
pub fn gains_from_gram(pair: &TransferPair) -> Result<(Vec<f64>, CMat)> {
    let b = pair.b_hat();
    let gram = b * b.adjoint();
    let evd = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("Hermitian eigensolver: {e:?}")))?;
    let n = gram.nrows();
    let vals: Vec<f64> = (0..n).rev().map(|i| evd.S()[i].re).collect();
    let vecs = Mat::from_fn(n, n, |j, k| evd.U()[(j, n - 1 - k)]);
    Ok((vals, vecs))
}

/// Gains `L_n` only, from the singular values of `B`.
pub fn schmidt_gains(pair: &TransferPair) -> Result<Vec<f64>> {
    let sv = pair
        .b_hat()
        .singular_values()
        .map_err(|e| Error::Factorization(format!("SVD of B: {e:?}")))?;
    Ok(sv.iter().map(|s| s * s).collect())
}


/// Write `<stem>.bin` (header + kernel-unit output modes then input modes,
/// one mode per column) and a `<stem>.json` sidecar.
pub fn write_basis(stem: &Path, basis: &SchmidtBasis) -> Result<()> {
    let lat = basis.lattice();
    let mut w = BufWriter::new(File::create(stem.with_extension("bin"))?);
    write_header(&mut w, ContainerKind::Basis, lat, 2)?;
    write_complex_block(&mut w, basis.modes(ModeFamily::Output).as_ref())?;
    write_complex_block(&mut w, basis.modes(ModeFamily::Input).as_ref())?;
    w.flush()?;
    let side = serde_json::json!({
        "kind": "schmidt-basis",
        "n": lat.len(),
        "dq": lat.dq(),
        "q0": lat.q()[0],
        "layout": "row-major complex f64 little-endian, mode functions per column: u then psi",
        "sign_convention": "u_n has nonnegative real part at its largest-modulus sample",
        "label": basis.label,
        "pump_phase": basis.pump_phase,
        "gains": basis.gains,
        "gains_tilde": basis.gains_tilde,
        "blocks": basis.blocks,
        "residuals": basis.residuals,
    });
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

pub fn read_basis(stem: &Path) -> Result<SchmidtBasis> {
    let mut r = BufReader::new(File::open(stem.with_extension("bin"))?);
    let (kind, n, dq, q0, blocks) = read_header(&mut r)?;
    if kind != ContainerKind::Basis || blocks != 2 {
        return Err(Error::Format("not a Schmidt-basis container".into()));
    }
    let lattice = Lattice::from_header(n, dq, q0)?;
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let gains: Vec<f64> = serde_json::from_value(side["gains"].clone())?;
    let m = gains.len();
    let s = lattice.sqrt_weights();
    let scale = |x: CMat| Mat::from_fn(n, m, |j, k| x[(j, k)] * s[j]);
    let u = scale(read_complex_block(&mut r, n, m)?);
    let psi = scale(read_complex_block(&mut r, n, m)?);
    let mut basis = SchmidtBasis::from_parts(
        lattice,
        u,
        psi,
        gains,
        serde_json::from_value(side["gains_tilde"].clone())?,
        serde_json::from_value(side["blocks"].clone())?,
        serde_json::from_value(side["pump_phase"].clone())?,
        serde_json::from_value(side["label"].clone())?,
    );
    basis.residuals = serde_json::from_value(side["residuals"].clone())?;
    Ok(basis)
}
