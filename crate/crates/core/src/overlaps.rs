//! Weighted overlap matrices between mode families.

use crate::error::{Error, Result};
use crate::jointdecomp::{ModeFamily, SchmidtBasis};
use crate::linalg::CMat;
use faer::Mat;
use num_complex::Complex64 as C64;

/// Which family is complex-conjugated in the weighted inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjugate {
    Rows,
    Cols,
}

/// `entry[l, m] = sum_j a_l(q_j)^(*) b_m(q_j) w_j` on normalized columns,
/// truncated to the first `size` modes of each family.
pub fn overlap(rows: &CMat, cols: &CMat, conj: Conjugate, size: usize) -> Result<CMat> {
    if rows.nrows() != cols.nrows() {
        return Err(Error::LatticeMismatch(format!("{} vs {} lattice points", rows.nrows(), cols.nrows())));
    }
    if size > rows.ncols() || size > cols.ncols() {
        return Err(Error::Truncation(format!("requested {size} modes, have {} / {}", rows.ncols(), cols.ncols())));
    }
    let a = rows.subcols(0, size);
    let b = cols.subcols(0, size);
    Ok(match conj {
        Conjugate::Rows => a.adjoint() * b,
        Conjugate::Cols => (b.adjoint() * a).transpose().to_owned(),
    })
}

/// `c[l, m] = integral u_l psi_m^*` within one basis (diagonal when the
/// kernel is symmetric).
pub fn c_matrix(basis: &SchmidtBasis, size: usize) -> Result<CMat> {
    overlap(basis.normalized(ModeFamily::Output), basis.normalized(ModeFamily::Input), Conjugate::Cols, size)
}

/// `g[k, m] = integral u_k^(1)* psi_m^(2)`: first-pass outputs against
/// second-pass inputs. For a phase-stripped second basis this is the
/// phase-free matrix; multiply by `e^{i phi/2}` (see [`with_half_phase`]).
pub fn g_matrix(first: &SchmidtBasis, second: &SchmidtBasis, size: usize) -> Result<CMat> {
    first.lattice().check_same(second.lattice())?;
    overlap(first.normalized(ModeFamily::Output), second.normalized(ModeFamily::Input), Conjugate::Rows, size)
}

/// `h[n, l] = integral u_n^(2)* u_l^(SU)`. Both bases must describe the same
/// pump phase.
pub fn h_matrix(second: &SchmidtBasis, su: &SchmidtBasis, size: usize) -> Result<CMat> {
    second.lattice().check_same(su.lattice())?;
    match (second.pump_phase, su.pump_phase) {
        (Some(a), Some(b)) if (a - b).abs() < 1e-12 => {}
        (a, b) => {
            return Err(Error::PhaseMismatch(format!("second pass at {a:?}, interferometer at {b:?}")));
        }
    }
    overlap(second.normalized(ModeFamily::Output), su.normalized(ModeFamily::Output), Conjugate::Rows, size)
}

/// `e^{i phi/2} m`.
pub fn with_half_phase(m: &CMat, phi: f64) -> CMat {
    let r = C64::cis(0.5 * phi);
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * r)
}

/// Entrywise modulus and phase, for plotting.
pub fn modulus_phase(m: &CMat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).collect()).collect();
    let phases = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].arg()).collect()).collect();
    (rows, phases)
}
