//! Mapping between the coupling constant and the experimental gain via the
//! collinear photon number `N0(coupling) ~ B sinh^2(A coupling)`.

use crate::error::{Error, Result};
use crate::exec::{try_map, Schedule};
use crate::model::Setup;
use crate::propagator::TransferPair;
use serde::{Deserialize, Serialize};

/// Dimensionless gain `G = A * coupling`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Gain(pub f64);

/// Coupling constant entering the transfer equations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Coupling(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub coupling: f64,
    pub collinear_photons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    /// Gain per unit coupling.
    pub slope: f64,
    pub amplitude: f64,
    /// RMS of the log-space residuals.
    pub log_rms: f64,
    pub iterations: usize,
    pub samples: Vec<CalibrationSample>,
}

impl CalibrationFit {
    pub fn gain_to_coupling(&self, gain: Gain) -> Coupling {
        Coupling(gain.0 / self.slope)
    }

    pub fn coupling_to_gain(&self, coupling: Coupling) -> Gain {
        Gain(coupling.0 * self.slope)
    }

    pub fn model(&self, coupling: f64) -> f64 {
        self.amplitude * (self.slope * coupling).sinh().powi(2)
    }
}

/// Photon density at the collinear point times the lattice spacing
/// (mean of the two central samples on an even lattice).
pub fn collinear_photons(pair: &TransferPair) -> f64 {
    let lat = pair.lattice();
    let dens = pair.photon_number_density();
    let c = lat.central();
    c.iter().map(|&i| dens[i]).sum::<f64>() / c.len() as f64 * lat.dq()
}

/// Propagate the first pass for each coupling and record `N0`.
pub fn sample_couplings(setup: &Setup, couplings: &[f64], schedule: Schedule) -> Result<Vec<CalibrationSample>> {
    try_map(schedule, couplings, |&g| {
        let pair = setup.first_pass(g)?;
        Ok(CalibrationSample { coupling: g, collinear_photons: collinear_photons(&pair) })
    })
}

/// `ln sinh(x)` for `x > 0`, stable for large `x`.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `asinh(sqrt(e^y))` without overflow.
fn asinh_sqrt_exp(y: f64) -> f64 {
    if y > 80.0 {
        0.5 * y + std::f64::consts::LN_2
    } else {
        (0.5 * y).exp().asinh()
    }
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Damped Gauss-Newton fit of `N0 = B sinh^2(A g)` on log residuals
/// `ln N0 - ln B - 2 ln sinh(A g)`, with an analytic Jacobian.
pub fn fit_sinh2(samples: &[CalibrationSample]) -> Result<CalibrationFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.coupling > 0.0 && s.collinear_photons > 0.0 && s.collinear_photons.is_finite())
        .map(|s| (s.coupling, s.collinear_photons.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Fit(format!("need at least two positive samples, got {}", pts.len())));
    }
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (g1, y1) = sorted[sorted.len() - 2];
    let (g2, y2) = sorted[sorted.len() - 1];
    if g2 <= g1 {
        return Err(Error::Fit("couplings must be distinct".into()));
    }
    // asinh(sqrt(N0)) grows with slope ~A once the gain is appreciable.
    let a0 = (asinh_sqrt_exp(y2) - asinh_sqrt_exp(y1)) / (g2 - g1);
    let mut a = if a0 > 0.0 && a0.is_finite() { a0 } else { 1.0 / g2 };
    let mut ln_b = y2 - 2.0 * ln_sinh(a * g2);

    let cost = |a: f64, ln_b: f64| -> f64 {
        pts.iter().map(|&(g, y)| (y - ln_b - 2.0 * ln_sinh(a * g)).powi(2)).sum()
    };
    let mut current = cost(a, ln_b);
    let mut damping = 1e-3;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for &(g, y) in &pts {
            let r = y - ln_b - 2.0 * ln_sinh(a * g);
            let j = [-2.0 * g * coth(a * g), -1.0];
            for p in 0..2 {
                jtr[p] += j[p] * r;
                for q in 0..2 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let m = [[jtj[0][0] * (1.0 + damping), jtj[0][1]], [jtj[1][0], jtj[1][1] * (1.0 + damping)]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 || !det.is_finite() {
                damping *= 10.0;
                continue;
            }
            let da = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
            let db = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, ln_b + db);
            if na <= 0.0 {
                damping *= 10.0;
                continue;
            }
            let c = cost(na, nb);
            if c <= current {
                let small = da.abs() <= 1e-14 * a.abs() && db.abs() <= 1e-14 * ln_b.abs().max(1.0);
                a = na;
                ln_b = nb;
                current = c;
                damping = (damping * 0.3).max(1e-12);
                accepted = true;
                if small {
                    return finish(a, ln_b, current, iterations, samples, pts.len());
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: at the minimum to rounding.
            return finish(a, ln_b, current, iterations, samples, pts.len());
        }
    }
    Err(Error::Fit(format!("no convergence after {iterations} iterations (A = {a}, ln B = {ln_b})")))
}

fn finish(a: f64, ln_b: f64, cost: f64, iterations: usize, samples: &[CalibrationSample], m: usize) -> Result<CalibrationFit> {
    if !(a.is_finite() && ln_b.is_finite()) {
        return Err(Error::Fit("non-finite parameters".into()));
    }
    Ok(CalibrationFit {
        slope: a,
        amplitude: ln_b.exp(),
        log_rms: (cost / m as f64).sqrt(),
        iterations,
        samples: samples.to_vec(),
    })
}

/// Sample the first pass on `couplings` and fit.
pub fn calibrate(setup: &Setup, couplings: &[f64], schedule: Schedule) -> Result<CalibrationFit> {
    fit_sinh2(&sample_couplings(setup, couplings, schedule)?)
}
