use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform transverse-momentum grid, symmetric about zero, with trapezoid
/// quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    q: Vec<f64>,
    dq: f64,
}

impl Lattice {
    /// `n` points spanning `[-q_max, q_max]`.
    pub fn symmetric(n: usize, q_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("lattice needs at least 2 points, got {n}")));
        }
        if !(q_max.is_finite() && q_max > 0.0) {
            return Err(Error::Domain(format!("lattice half-width must be positive, got {q_max}")));
        }
        let dq = 2.0 * q_max / (n - 1) as f64;
        let mid = (n - 1) as f64 / 2.0;
        let q = (0..n).map(|j| (j as f64 - mid) * dq).collect();
        Ok(Self { q, dq })
    }

    /// Grid covering emission angles `|theta| <= theta_max` in vacuum, refusing
    /// any point beyond `guard` (typically a fraction of the smallest wavenumber).
    pub fn from_angle(n: usize, theta_max: f64, k_vacuum: f64, guard: f64) -> Result<Self> {
        let q_max = theta_max * k_vacuum;
        if q_max >= guard {
            return Err(Error::Domain(format!(
                "lattice edge {q_max:.4e} rad/m reaches the evanescent guard {guard:.4e} rad/m"
            )));
        }
        Self::symmetric(n, q_max)
    }

    /// Rebuild a lattice from a stored `(n, dq, q0)` header.
    pub fn from_header(n: usize, dq: f64, q0: f64) -> Result<Self> {
        let lat = Self::symmetric(n, -q0)?;
        if ((lat.dq - dq) / dq).abs() > 1e-12 {
            return Err(Error::Format(format!("header dq {dq} inconsistent with q0 {q0} and n {n}")));
        }
        Ok(lat)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn q_max(&self) -> f64 {
        self.q[self.q.len() - 1]
    }

    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.q.len() {
            0.5 * self.dq
        } else {
            self.dq
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.weight(j)).collect()
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.weight(j).sqrt()).collect()
    }

    /// Indices of the point(s) closest to q = 0 (two for an even count).
    pub fn central(&self) -> Vec<usize> {
        let n = self.len();
        if n % 2 == 1 {
            vec![n / 2]
        } else {
            vec![n / 2 - 1, n / 2]
        }
    }

    /// Index of the point nearest `q`.
    pub fn nearest(&self, q: f64) -> usize {
        let mid = (self.len() - 1) as f64 / 2.0;
        ((q / self.dq + mid).round().max(0.0) as usize).min(self.len() - 1)
    }

    pub fn same_as(&self, other: &Lattice) -> bool {
        self.len() == other.len() && ((self.dq - other.dq) / self.dq).abs() < 1e-12
    }

    pub fn check_same(&self, other: &Lattice) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch(format!(
                "n = {} / dq = {:.6e} vs n = {} / dq = {:.6e}",
                self.len(),
                self.dq,
                other.len(),
                other.dq
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_about_zero() {
        for n in [2, 7, 64, 65] {
            let lat = Lattice::symmetric(n, 3.0).unwrap();
            let q = lat.q();
            for j in 0..n {
                assert!((q[j] + q[n - 1 - j]).abs() < 1e-12);
            }
            assert!((q[n - 1] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_weights() {
        let lat = Lattice::symmetric(5, 1.0).unwrap();
        assert_eq!(lat.weights(), vec![0.25, 0.5, 0.5, 0.5, 0.25]);
    }

    #[test]
    fn guard_rejects_wide_grid() {
        assert!(Lattice::from_angle(64, 0.5, 10.0, 4.0).is_err());
        assert!(Lattice::from_angle(64, 0.3, 10.0, 4.0).is_ok());
    }

    #[test]
    fn header_round_trip() {
        let lat = Lattice::symmetric(16, 2.5).unwrap();
        let back = Lattice::from_header(16, lat.dq(), lat.q()[0]).unwrap();
        assert_eq!(lat, back);
    }
}
