//! Transfer-function pairs and their integration through a crystal.
//!
//! Pairs are stored in weight-normalized form `W^1/2 X W^1/2`, where the
//! Bogoliubov conditions take their exact matrix shape. Kernel-unit
//! views (`H[j,k]`, `B[j,k]` on the lattice) are available on demand.

mod io;
mod kernel;
mod lie;
mod polish;
mod rk;

pub use io::{read_pair, write_pair};
pub use kernel::{ConstantCoupling, Coupling, Pass, PdcCoupling, PUMP_CUTOFF};
pub use lie::{integrate_lie_euler, LieOptions};
pub use polish::polish_symplectic;
pub use rk::{integrate_rk, RkOptions};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{frob, identity, scale_rows_cols, CMat};
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Provenance carried alongside a pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub label: String,
    pub coupling: Option<f64>,
    pub air_gap: Option<f64>,
    /// Pump phase folded into the pair; `None` for phase-stripped pairs.
    pub pump_phase: Option<f64>,
    pub integrator: String,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub steps: usize,
    pub rejected: usize,
}

/// Transfer functions `(H, B)` of one or more passes.
#[derive(Debug, Clone)]
pub struct TransferPair {
    lattice: Lattice,
    h: CMat,
    b: CMat,
    pub meta: PairMeta,
}

/// Relative Frobenius defects of the four Bogoliubov conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticResiduals {
    pub gram_rows: f64,
    pub sym_rows: f64,
    pub gram_cols: f64,
    pub sym_cols: f64,
}

impl SymplecticResiduals {
    pub fn max(&self) -> f64 {
        self.gram_rows.max(self.sym_rows).max(self.gram_cols).max(self.sym_cols)
    }
}

impl TransferPair {
    /// The pair of an empty crystal: `H = W^-1` (the discrete delta), `B = 0`.
    pub fn identity(lattice: &Lattice) -> Self {
        let n = lattice.len();
        Self {
            lattice: lattice.clone(),
            h: identity(n),
            b: Mat::zeros(n, n),
            meta: PairMeta { label: "identity".into(), ..Default::default() },
        }
    }

    pub fn from_normalized(lattice: &Lattice, h: CMat, b: CMat, meta: PairMeta) -> Result<Self> {
        let n = lattice.len();
        if h.nrows() != n || h.ncols() != n || b.nrows() != n || b.ncols() != n {
            return Err(Error::LatticeMismatch(format!(
                "pair blocks {}x{} / {}x{} on a lattice of {n}",
                h.nrows(),
                h.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { lattice: lattice.clone(), h, b, meta })
    }

    /// Build from kernel-unit samples `H[j,k]`, `B[j,k]`.
    pub fn from_kernel(lattice: &Lattice, h: MatRef<'_, C64>, b: MatRef<'_, C64>, meta: PairMeta) -> Result<Self> {
        let s = lattice.sqrt_weights();
        Self::from_normalized(lattice, scale_rows_cols(h, &s, &s), scale_rows_cols(b, &s, &s), meta)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn h_hat(&self) -> MatRef<'_, C64> {
        self.h.as_ref()
    }

    pub fn b_hat(&self) -> MatRef<'_, C64> {
        self.b.as_ref()
    }

    pub fn into_parts(self) -> (Lattice, CMat, CMat, PairMeta) {
        (self.lattice, self.h, self.b, self.meta)
    }

    /// `H[j,k]` sampled on the lattice.
    pub fn h_kernel(&self) -> CMat {
        let r: Vec<f64> = self.lattice.sqrt_weights().iter().map(|s| 1.0 / s).collect();
        scale_rows_cols(self.h.as_ref(), &r, &r)
    }

    /// `B[j,k]` sampled on the lattice.
    pub fn b_kernel(&self) -> CMat {
        let r: Vec<f64> = self.lattice.sqrt_weights().iter().map(|s| 1.0 / s).collect();
        scale_rows_cols(self.b.as_ref(), &r, &r)
    }

    /// Fold a pump phase into a phase-stripped pair: `B -> e^{i phi} B`.
    pub fn with_pump_phase(&self, phi: f64) -> Result<Self> {
        if self.meta.pump_phase.is_some() {
            return Err(Error::PhaseMismatch(format!(
                "pair '{}' already carries a pump phase",
                self.meta.label
            )));
        }
        let rot = C64::cis(phi);
        let mut meta = self.meta.clone();
        meta.pump_phase = Some(phi);
        Ok(Self { lattice: self.lattice.clone(), h: self.h.clone(), b: &self.b * faer::Scale(rot), meta })
    }

    pub fn symplectic_residuals(&self) -> SymplecticResiduals {
        symplectic_residuals(self.h.as_ref(), self.b.as_ref())
    }

    /// Photon density `N(q_j) = sum_k |B[j,k]|^2 w_k`.
    pub fn photon_number_density(&self) -> Vec<f64> {
        let n = self.lattice.len();
        (0..n)
            .map(|j| {
                let row: f64 = (0..n).map(|k| self.b[(j, k)].norm_sqr()).sum();
                row / self.lattice.weight(j)
            })
            .collect()
    }

    /// Total photon number `sum_jk |B_jk|^2 w_j w_k`.
    pub fn total_photons(&self) -> f64 {
        let f = frob(self.b.as_ref());
        f * f
    }
}

/// Residuals of normalized blocks, each divided by `||H H^dagger||_F`.
pub fn symplectic_residuals(h: MatRef<'_, C64>, b: MatRef<'_, C64>) -> SymplecticResiduals {
    let n = h.nrows();
    let eye = identity(n);
    let hh = h * h.adjoint();
    let scale = frob(hh.as_ref());
    let r1 = &hh - b * b.adjoint() - &eye;
    let r2 = h * b.transpose() - b * h.transpose();
    let r3 = h.adjoint() * h - b.transpose() * b.conjugate() - &eye;
    let r4 = h.adjoint() * b - b.transpose() * h.conjugate();
    SymplecticResiduals {
        gram_rows: frob(r1.as_ref()) / scale,
        sym_rows: frob(r2.as_ref()) / scale,
        gram_cols: frob(r3.as_ref()) / scale,
        sym_cols: frob(r4.as_ref()) / scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pair_is_discrete_delta() {
        let lat = Lattice::symmetric(9, 2.0).unwrap();
        let p = TransferPair::identity(&lat);
        let h = p.h_kernel();
        let dq = lat.dq();
        for j in 1..8 {
            assert!((h[(j, j)].re - 1.0 / dq).abs() < 1e-12 / dq);
        }
        assert_eq!(p.total_photons(), 0.0);
        assert!(p.symplectic_residuals().max() < 1e-15);
    }

    #[test]
    fn zeroed_b_flags_defect() {
        let lat = Lattice::symmetric(6, 1.0).unwrap();
        let g = 2.0f64;
        let h = Mat::from_fn(6, 6, |i, j| C64::new(if i == j { g.cosh() } else { 0.0 }, 0.0));
        let p = TransferPair::from_normalized(&lat, h, Mat::zeros(6, 6), PairMeta::default()).unwrap();
        assert!(p.symplectic_residuals().gram_rows > 0.5);
    }
}
