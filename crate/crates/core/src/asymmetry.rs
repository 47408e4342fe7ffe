//! Structure of the `B` kernel of one pass: modulus asymmetry, Schmidt
//! decomposition of `|B|`, and a separable polynomial fit of its phase.

use crate::error::{Error, Result};
use crate::interferometer::wrap_phase;
use crate::jointdecomp::SchmidtBasis;
use crate::lattice::Lattice;
use crate::linalg::CMat;
use crate::overlaps::{c_matrix, overlap, Conjugate};
use crate::propagator::TransferPair;
use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Fraction of the peak modulus that bounds the fit support.
pub const SUPPORT_FRACTION: f64 = 1e-3;

/// Polynomial terms per variable: `1, q^2, q^4, q^6`.
pub const MAX_TERMS: usize = 4;

/// `max | |B_jk| - |B_kj| | / max |B_jk|`.
pub fn asymmetry_metric(b: &CMat) -> f64 {
    let n = b.nrows().min(b.ncols());
    let mut peak = 0f64;
    let mut worst = 0f64;
    for j in 0..n {
        for k in 0..n {
            let a = b[(j, k)].norm();
            peak = peak.max(a);
            worst = worst.max((a - b[(k, j)].norm()).abs());
        }
    }
    if peak > 0.0 {
        worst / peak
    } else {
        0.0
    }
}

/// Schmidt decomposition of the modulus `|B|` (normalized form).
#[derive(Debug, Clone)]
pub struct ModulusBasis {
    lattice: Lattice,
    /// Weight-normalized real output / input modes as complex columns.
    pub u: CMat,
    pub psi: CMat,
    pub singular_values: Vec<f64>,
}

impl ModulusBasis {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `c^abs[l, m] = integral u_l^abs psi_m^abs`.
    pub fn c_matrix(&self, size: usize) -> Result<CMat> {
        overlap(&self.u, &self.psi, Conjugate::Cols, size)
    }
}

pub fn modulus_decomposition(pair: &TransferPair) -> Result<ModulusBasis> {
    let b = pair.b_hat();
    let n = b.nrows();
    let abs: Mat<f64> = Mat::from_fn(n, n, |j, k| b[(j, k)].norm());
    let svd = abs.svd().map_err(|e| Error::Factorization(format!("SVD of |B|: {e:?}")))?;
    let (su, ss, sv) = (svd.U(), svd.S(), svd.V());
    let mut u = Mat::from_fn(n, n, |j, k| C64::new(su[(j, k)], 0.0));
    let mut psi = Mat::from_fn(n, n, |j, k| C64::new(sv[(j, k)], 0.0));
    let singular_values: Vec<f64> = (0..n).map(|i| ss[i]).collect();
    for k in 0..n {
        let peak = (0..n).max_by(|&a, &c| u[(a, k)].norm().total_cmp(&u[(c, k)].norm())).unwrap_or(0);
        if u[(peak, k)].re < 0.0 {
            for j in 0..n {
                u[(j, k)] = -u[(j, k)];
                psi[(j, k)] = -psi[(j, k)];
            }
        }
    }
    Ok(ModulusBasis { lattice: pair.lattice().clone(), u, psi, singular_values })
}

/// Fitted separable phase `Phi_1(q) + Phi_2(q')` of `B(q, q')`, each a
/// polynomial in `q^2`. Coefficients are in `rad m^{2k}` for term `q^{2k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    /// RMS misfit in rad over the support.
    pub residual: f64,
    pub support_points: usize,
    pub terms: usize,
}

impl PhaseFit {
    fn eval(coeffs: &[f64], q: f64) -> f64 {
        let q2 = q * q;
        coeffs.iter().rev().fold(0.0, |acc, c| acc * q2 + c)
    }

    pub fn phase_output(&self, q: f64) -> f64 {
        Self::eval(&self.a1, q)
    }

    pub fn phase_input(&self, q: f64) -> f64 {
        Self::eval(&self.a2, q)
    }

    /// Coefficients in `pi rad um^{2k}` (wavevectors in `1/um`).
    pub fn in_pi_rad_um(&self) -> (Vec<f64>, Vec<f64>) {
        let conv = |c: &[f64]| c.iter().enumerate().map(|(k, a)| a * 1e12f64.powi(k as i32) / PI).collect();
        (conv(&self.a1), conv(&self.a2))
    }
}

/// Unwrapped phase on the support component grown from the peak of `|B|`.
/// Returns `(j, k, phase)` samples.
pub fn unwrap_support(b: &CMat) -> Result<Vec<(usize, usize, f64)>> {
    let (nr, nc) = (b.nrows(), b.ncols());
    let mut peak = (0, 0);
    let mut peak_val = 0f64;
    for j in 0..nr {
        for k in 0..nc {
            if b[(j, k)].norm() > peak_val {
                peak_val = b[(j, k)].norm();
                peak = (j, k);
            }
        }
    }
    if !(peak_val > 0.0) {
        return Err(Error::Unwrap("kernel vanishes".into()));
    }
    let cut = SUPPORT_FRACTION * peak_val;
    let in_support = |j: usize, k: usize| b[(j, k)].norm() > cut;
    let total = (0..nr).flat_map(|j| (0..nc).map(move |k| (j, k))).filter(|&(j, k)| in_support(j, k)).count();
    let mut phase = vec![f64::NAN; nr * nc];
    let mut out = Vec::with_capacity(total);
    let mut queue = VecDeque::new();
    phase[peak.0 * nc + peak.1] = b[(peak.0, peak.1)].arg();
    queue.push_back(peak);
    while let Some((j, k)) = queue.pop_front() {
        let p = phase[j * nc + k];
        out.push((j, k, p));
        let neighbours = [(j.wrapping_sub(1), k), (j + 1, k), (j, k.wrapping_sub(1)), (j, k + 1)];
        for (a, c) in neighbours {
            if a >= nr || c >= nc || !phase[a * nc + c].is_nan() || !in_support(a, c) {
                continue;
            }
            phase[a * nc + c] = p + wrap_phase(b[(a, c)].arg() - p);
            queue.push_back((a, c));
        }
    }
    if 2 * out.len() < total {
        return Err(Error::Unwrap(format!("seed component holds {} of {} support points", out.len(), total)));
    }
    Ok(out)
}

/// Least-squares fit of the unwrapped phase of `b` (kernel or normalized
/// form) with `terms` powers of `q^2` per variable. The common constant is
/// split so that `Phi_2(0)` is half its principal value.
pub fn separable_phase_fit(b: &CMat, lattice: &Lattice, terms: usize) -> Result<PhaseFit> {
    if terms == 0 || terms > MAX_TERMS {
        return Err(Error::Domain(format!("phase fit needs 1..={MAX_TERMS} terms, got {terms}")));
    }
    let samples = unwrap_support(b)?;
    let unknowns = 2 * terms - 1;
    if samples.len() < unknowns {
        return Err(Error::Unwrap(format!("{} support points for {unknowns} unknowns", samples.len())));
    }
    let q = lattice.q();
    let scale = lattice.q_max();
    let x = |j: usize| (q[j] / scale).powi(2);
    let design = Mat::from_fn(samples.len(), unknowns, |r, c| {
        let (j, k, _) = samples[r];
        match c {
            0 => 1.0,
            c if c < terms => x(j).powi(c as i32),
            c => x(k).powi((c - terms + 1) as i32),
        }
    });
    let rhs = Mat::from_fn(samples.len(), 1, |r, _| samples[r].2);
    let sol = design.qr().solve_lstsq(&rhs);
    let resid = &design * &sol - &rhs;
    let residual = (resid.squared_norm_l2() / samples.len() as f64).sqrt();
    let constant = sol[(0, 0)];
    let half = 0.5 * wrap_phase(constant);
    let mut a1 = vec![0.0; MAX_TERMS];
    let mut a2 = vec![0.0; MAX_TERMS];
    a1[0] = constant - half;
    a2[0] = half;
    for p in 1..terms {
        let unit = scale.powi(-2 * p as i32);
        a1[p] = sol[(p, 0)] * unit;
        a2[p] = sol[(terms - 1 + p, 0)] * unit;
    }
    Ok(PhaseFit { a1, a2, residual, support_points: samples.len(), terms })
}

/// Modulus modes dressed with the fitted phases, and their overlap matrix
/// next to the exact one.
#[derive(Debug, Clone)]
pub struct FitComparison {
    pub u_fit: CMat,
    pub psi_fit: CMat,
    pub c_fit: CMat,
    pub c_exact: CMat,
    /// Pearson correlation of `|c_fit|` and `|c_exact|` entries.
    pub correlation: f64,
}

pub fn fit_mode_comparison(abs: &ModulusBasis, fit: &PhaseFit, exact: &SchmidtBasis, size: usize) -> Result<FitComparison> {
    abs.lattice().check_same(exact.lattice())?;
    let q = abs.lattice().q();
    let dress = |m: &CMat, f: &dyn Fn(f64) -> f64| Mat::from_fn(m.nrows(), m.ncols(), |j, k| m[(j, k)] * C64::cis(f(q[j])));
    let u_fit = dress(&abs.u, &|x| fit.phase_output(x));
    let psi_fit = dress(&abs.psi, &|x| fit.phase_input(x));
    let c_fit = overlap(&u_fit, &psi_fit, Conjugate::Cols, size)?;
    let c_exact = c_matrix(exact, size)?;
    let correlation = pearson(&c_fit, &c_exact);
    Ok(FitComparison { u_fit, psi_fit, c_fit, c_exact, correlation })
}

fn pearson(a: &CMat, b: &CMat) -> f64 {
    let xs: Vec<f64> = (0..a.ncols()).flat_map(|k| (0..a.nrows()).map(move |j| (j, k))).map(|(j, k)| a[(j, k)].norm()).collect();
    let ys: Vec<f64> = (0..b.ncols()).flat_map(|k| (0..b.nrows()).map(move |j| (j, k))).map(|(j, k)| b[(j, k)].norm()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx > 0.0 && syy > 0.0 {
        sxy / (sxx * syy).sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(lat: &Lattice, alpha: f64, gamma: f64, c: f64) -> CMat {
        let q = lat.q();
        let s = lat.q_max();
        Mat::from_fn(q.len(), q.len(), |j, k| {
            let m = (-(q[j] / s).powi(2) * 3.0 - (q[k] / s).powi(2) * 2.0 - q[j] * q[k] / (s * s)).exp();
            C64::from_polar(m, c + alpha * q[j] * q[j] + gamma * q[k] * q[k])
        })
    }

    #[test]
    fn symmetric_modulus_has_zero_metric() {
        let lat = Lattice::symmetric(24, 1.0).unwrap();
        let b = planted(&lat, 0.0, 0.0, 0.3);
        let sym = Mat::from_fn(24, 24, |j, k| b[(j, k)] + b[(k, j)]);
        assert_eq!(asymmetry_metric(&sym), 0.0);
        let t = b.transpose().to_owned();
        assert_eq!(asymmetry_metric(&b), asymmetry_metric(&t));
        assert!(asymmetry_metric(&b) > 0.0);
    }

    #[test]
    fn planted_phase_is_recovered() {
        let lat = Lattice::symmetric(48, 2.0).unwrap();
        let b = planted(&lat, 5.0, -3.0, 0.4);
        let fit = separable_phase_fit(&b, &lat, 4).unwrap();
        assert!((fit.a1[1] - 5.0).abs() < 1e-8, "{fit:?}");
        assert!((fit.a2[1] + 3.0).abs() < 1e-8);
        assert!(fit.a1[2].abs() < 1e-8 && fit.a2[3].abs() < 1e-8);
        assert!((fit.a1[0] + fit.a2[0] - 0.4).abs() < 1e-8);
        assert!((fit.a2[0] - 0.2).abs() < 1e-8);
        assert!(fit.residual < 1e-8);
    }

    #[test]
    fn real_positive_kernel_has_flat_phase() {
        let lat = Lattice::symmetric(32, 1.0).unwrap();
        let b = planted(&lat, 0.0, 0.0, 0.0);
        let fit = separable_phase_fit(&b, &lat, 4).unwrap();
        assert!(fit.a1.iter().chain(&fit.a2).all(|c| c.abs() < 1e-10), "{fit:?}");
    }

    #[test]
    fn unit_conversion() {
        let fit = PhaseFit { a1: vec![PI, PI * 1e-12, 0.0, 0.0], a2: vec![0.0; 4], residual: 0.0, support_points: 0, terms: 4 };
        let (a1, _) = fit.in_pi_rad_um();
        assert!((a1[0] - 1.0).abs() < 1e-15 && (a1[1] - 1.0).abs() < 1e-12);
    }
}
