//! Single-crystal phase matching, pump profile and dispersion presets.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wavenumber moduli (rad/m) of the three fields in the crystal and in air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
    pub pump_air: f64,
    pub signal_air: f64,
    pub idler_air: f64,
    /// Signal wavenumber in vacuum, used to convert q to emission angle.
    pub vacuum: f64,
}

/// Ordinary refractive index of BBO from a standard Sellmeier fit (wavelength in um).
pub fn bbo_ordinary_index(lambda_um: f64) -> f64 {
    let l2 = lambda_um * lambda_um;
    (2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2).sqrt()
}

impl Dispersion {
    /// Degenerate type-I BBO at 800 nm signal / 400 nm pump, collinearly
    /// phase matched, with dispersion-free air.
    pub fn bbo_800nm() -> Self {
        let lambda = 800e-9;
        let k_vac = 2.0 * PI / lambda;
        let k_s = bbo_ordinary_index(0.8) * k_vac;
        Self {
            pump: 2.0 * k_s,
            signal: k_s,
            idler: k_s,
            pump_air: 2.0 * k_vac,
            signal_air: k_vac,
            idler_air: k_vac,
            vacuum: k_vac,
        }
    }

    /// Largest |q| accepted on a lattice before transverse components turn evanescent.
    pub fn evanescent_guard(&self) -> f64 {
        0.95 * self.signal.min(self.idler)
    }

    /// Longitudinal mismatch in the crystal (rad/m).
    pub fn delta_k(&self, qs: f64, qi: f64) -> Result<f64> {
        mismatch(self.pump, self.signal, self.idler, qs, qi)
    }

    /// Longitudinal mismatch accumulated in air between the crystals (rad/m).
    pub fn delta_k_air(&self, qs: f64, qi: f64) -> Result<f64> {
        mismatch(self.pump_air, self.signal_air, self.idler_air, qs, qi)
    }
}

fn mismatch(kp: f64, ks: f64, ki: f64, qs: f64, qi: f64) -> Result<f64> {
    let qp = qs + qi;
    let (p, s, i) = (kp * kp - qp * qp, ks * ks - qs * qs, ki * ki - qi * qi);
    if p <= 0.0 || s <= 0.0 || i <= 0.0 {
        return Err(Error::Domain(format!("evanescent component at qs = {qs:.4e}, qi = {qi:.4e}")));
    }
    Ok(p.sqrt() - s.sqrt() - i.sqrt())
}

/// Gaussian pump angular profile exp(-(qs+qi)^2 sigma^2 / 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpProfile {
    /// Intensity-profile width parameter sigma (m).
    pub sigma: f64,
}

impl PumpProfile {
    /// Beam with 1/e^2 intensity waist `waist`; sigma = waist / sqrt(2).
    pub fn from_waist(waist: f64) -> Self {
        Self { sigma: waist / 2f64.sqrt() }
    }

    pub fn kernel(&self, qs: f64, qi: f64) -> f64 {
        let s = (qs + qi) * self.sigma;
        (-0.5 * s * s).exp()
    }
}

/// Crystal length and the two-pass layout derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalGeometry {
    pub length: f64,
}

impl CrystalGeometry {
    pub fn first_span(&self) -> (f64, f64) {
        (0.0, self.length)
    }

    /// The second pass is parametrized on `[L1, 2 L1]`, mirroring the first.
    pub fn second_span(&self) -> (f64, f64) {
        (self.length, 2.0 * self.length)
    }
}

/// Phase-matching factor of the first crystal at depth `z`.
pub fn phasematch_first(delta_k: f64, z: f64) -> C64 {
    C64::cis(delta_k * z)
}

/// Phase-matching factor of the second pass at depth `z` in `[L1, 2 L1]`.
/// `pump_phase = None` gives the phase-stripped factor used to build
/// pump-phase scans.
pub fn phasematch_second(
    delta_k: f64,
    delta_k_air: f64,
    z: f64,
    crystal_length: f64,
    air_gap: f64,
    pump_phase: Option<f64>,
) -> C64 {
    let phi = pump_phase.unwrap_or(0.0);
    C64::cis(-delta_k * (z - 2.0 * crystal_length) - delta_k_air * air_gap + phi)
}

/// Emission angle (rad) of a transverse wavevector.
pub fn angle_of(q: f64, k_vacuum: f64) -> f64 {
    q / k_vacuum
}
