use crate::error::Result;
use crate::lattice::Lattice;
use crate::physics::{CrystalGeometry, Dispersion, PumpProfile};
use faer::{Mat, MatMut};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Pump amplitudes below this are treated as exact zeros.
pub const PUMP_CUTOFF: f64 = 1e-18;

/// A depth-dependent coupling on a lattice.
///
/// `fill` writes the weight-normalized generator `W^1/2 G(z) W^1/2`, where
/// `G` is the symmetric coupling, so that the transfer equations read
/// `dB/dz = G conj(H)`, `dH/dz = G conj(B)` for the normalized pair.
pub trait Coupling: Sync {
    fn lattice(&self) -> &Lattice;

    fn fill(&self, z: f64, out: MatMut<'_, C64>);

    /// Generator entry magnitude bound used for step-size heuristics.
    fn norm_bound(&self) -> f64;

    fn normalized(&self, z: f64) -> Mat<C64> {
        let n = self.lattice().len();
        let mut m = Mat::zeros(n, n);
        self.fill(z, m.as_mut());
        m
    }

    /// Kernel `K(z) = G(z) W` acting on unnormalized transfer functions.
    fn kernel(&self, z: f64) -> Mat<C64> {
        let s = self.lattice().sqrt_weights();
        let g = self.normalized(z);
        Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * (s[j] / s[i]))
    }
}

/// Which of the two crystal passes a coupling describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Pass {
    First,
    /// `pump_phase = None` omits the pump phase (applied afterwards).
    Second { air_gap: f64, pump_phase: Option<f64> },
}

/// Parametric down-conversion coupling of a Gaussian pump in a bulk crystal.
#[derive(Debug, Clone)]
pub struct PdcCoupling {
    lattice: Lattice,
    n: usize,
    /// Column-major: coupling * pump * sqrt(w_j w_k) * constant phase.
    base: Vec<C64>,
    /// Column-major: signed mismatch rate multiplying (z - origin).
    rate: Vec<f64>,
    origin: f64,
    bound: f64,
}

impl PdcCoupling {
    pub fn new(
        lattice: &Lattice,
        dispersion: &Dispersion,
        pump: &PumpProfile,
        geometry: &CrystalGeometry,
        coupling: f64,
        pass: Pass,
    ) -> Result<Self> {
        let n = lattice.len();
        let q = lattice.q();
        let s = lattice.sqrt_weights();
        let mut base = vec![C64::new(0.0, 0.0); n * n];
        let mut rate = vec![0.0; n * n];
        let mut bound = 0.0f64;
        let (sign, origin) = match pass {
            Pass::First => (1.0, 0.0),
            Pass::Second { .. } => (-1.0, 2.0 * geometry.length),
        };
        for k in 0..n {
            for j in 0..=k {
                let p = pump.kernel(q[j], q[k]);
                let dk = dispersion.delta_k(q[j], q[k])?;
                let amp = if p < PUMP_CUTOFF { 0.0 } else { coupling * p * s[j] * s[k] };
                let phase = match pass {
                    Pass::First => C64::new(1.0, 0.0),
                    Pass::Second { air_gap, pump_phase } => {
                        let dka = dispersion.delta_k_air(q[j], q[k])?;
                        C64::cis(-dka * air_gap + pump_phase.unwrap_or(0.0))
                    }
                };
                let b = phase * amp;
                bound = bound.max(amp);
                for (a, c) in [(j, k), (k, j)] {
                    base[a + c * n] = b;
                    rate[a + c * n] = sign * dk;
                }
            }
        }
        Ok(Self { lattice: lattice.clone(), n, base, rate, origin, bound })
    }
}

impl Coupling for PdcCoupling {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn fill(&self, z: f64, mut out: MatMut<'_, C64>) {
        let n = self.n;
        let dz = z - self.origin;
        for k in 0..n {
            for j in 0..=k {
                let b = self.base[j + k * n];
                let v = if b.re == 0.0 && b.im == 0.0 {
                    b
                } else {
                    b * C64::cis(self.rate[j + k * n] * dz)
                };
                out[(j, k)] = v;
                out[(k, j)] = v;
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        self.bound * self.n as f64
    }
}

/// Depth-independent coupling given directly in normalized form.
#[derive(Debug, Clone)]
pub struct ConstantCoupling {
    lattice: Lattice,
    generator: Mat<C64>,
}

impl ConstantCoupling {
    pub fn new(lattice: &Lattice, generator: Mat<C64>) -> Self {
        assert_eq!(generator.nrows(), lattice.len());
        assert_eq!(generator.ncols(), lattice.len());
        Self { lattice: lattice.clone(), generator }
    }

    /// `gamma * I`: every lattice point amplified independently.
    pub fn diagonal(lattice: &Lattice, gamma: f64) -> Self {
        let n = lattice.len();
        Self::new(lattice, Mat::from_fn(n, n, |i, j| C64::new(if i == j { gamma } else { 0.0 }, 0.0)))
    }
}

impl Coupling for ConstantCoupling {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn fill(&self, _z: f64, mut out: MatMut<'_, C64>) {
        out.copy_from(&self.generator);
    }

    fn norm_bound(&self) -> f64 {
        self.generator.norm_l2()
    }
}
