//! Adaptive Dormand-Prince 5(4) on the normalized pair.

use super::{Coupling, PairMeta, TransferPair};
use crate::error::{Error, Result};
use crate::linalg::{gemm, ONE};
use faer::{MatMut, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkOptions {
    pub rtol: f64,
    /// Absolute tolerance per real component of a normalized entry.
    pub atol: f64,
    pub max_steps: usize,
    pub first_step: Option<f64>,
    /// Restore the Bogoliubov structure of the output to rounding level.
    pub polish: bool,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_steps: 200_000, first_step: None, polish: false }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// State `[H | B]` stored as one column-major n x 2n buffer.
struct System<'a, K: Coupling + ?Sized> {
    coupling: &'a K,
    n: usize,
    gen: Vec<C64>,
    evaluations: usize,
}

impl<K: Coupling + ?Sized> System<'_, K> {
    fn eval(&mut self, z: f64, y: &[C64], dy: &mut [C64]) {
        let n = self.n;
        let nn = n * n;
        self.coupling.fill(z, MatMut::from_column_major_slice_mut(&mut self.gen, n, n));
        let g = MatRef::from_column_major_slice(&self.gen, n, n);
        let (yh, yb) = y.split_at(nn);
        let (dh, db) = dy.split_at_mut(nn);
        let h = MatRef::from_column_major_slice(yh, n, n);
        let b = MatRef::from_column_major_slice(yb, n, n);
        gemm(MatMut::from_column_major_slice_mut(dh, n, n), g, b.conjugate(), ONE, false);
        gemm(MatMut::from_column_major_slice_mut(db, n, n), g, h.conjugate(), ONE, false);
        self.evaluations += 1;
    }
}

fn rms_scaled(err: &[C64], y0: &[C64], y1: &[C64], rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y0).zip(y1) {
        let sr = atol + rtol * a.re.abs().max(b.re.abs());
        let si = atol + rtol * a.im.abs().max(b.im.abs());
        acc += (e.re / sr).powi(2) + (e.im / si).powi(2);
    }
    (acc / (2 * err.len()) as f64).sqrt()
}

fn initial_step<K: Coupling + ?Sized>(
    sys: &mut System<'_, K>,
    z0: f64,
    y0: &[C64],
    f0: &[C64],
    direction: f64,
    opts: &RkOptions,
) -> f64 {
    let zeros = vec![C64::new(0.0, 0.0); y0.len()];
    let d0 = rms_scaled(y0, y0, y0, opts.rtol, opts.atol);
    let d1 = rms_scaled(f0, y0, y0, opts.rtol, opts.atol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + f * (direction * h0)).collect();
    let mut f1 = zeros.clone();
    sys.eval(z0 + direction * h0, &y1, &mut f1);
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y0, y0, opts.rtol, opts.atol) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrate the transfer equations over `span` starting from the identity pair.
pub fn integrate_rk<K: Coupling + ?Sized>(coupling: &K, span: (f64, f64), opts: &RkOptions) -> Result<TransferPair> {
    let lattice = coupling.lattice().clone();
    let n = lattice.len();
    let nn = n * n;
    let (z0, z1) = span;
    let length = (z1 - z0).abs();
    let dir = if z1 >= z0 { 1.0 } else { -1.0 };

    let mut y = vec![C64::new(0.0, 0.0); 2 * nn];
    for j in 0..n {
        y[j + j * n] = ONE;
    }
    let mut sys = System { coupling, n, gen: vec![C64::new(0.0, 0.0); nn], evaluations: 0 };
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); 2 * nn]).collect();
    let mut stage = vec![C64::new(0.0, 0.0); 2 * nn];
    let mut err = vec![C64::new(0.0, 0.0); 2 * nn];

    let mut z = z0;
    sys.eval(z, &y, &mut k[0]);
    let mut h = match opts.first_step {
        Some(h) => h,
        None if length > 0.0 => initial_step(&mut sys, z, &y, &k[0], dir, opts),
        None => 0.0,
    }
    .min(length);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    while dir * (z1 - z) > 0.0 {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::Integration { at: z, reason: format!("step budget of {} exhausted", opts.max_steps) });
        }
        let min_step = 10.0 * f64::EPSILON * z.abs().max(length);
        if h < min_step {
            return Err(Error::Integration { at: z, reason: format!("step size underflow (h = {h:.3e})") });
        }
        let mut last = false;
        if h >= dir * (z1 - z) {
            h = dir * (z1 - z);
            last = true;
        }
        let hs = dir * h;
        for s in 1..7 {
            let (done, rest) = k.split_at_mut(s);
            stage.copy_from_slice(&y);
            for (j, kj) in done.iter().enumerate() {
                let a = A[s][j] * hs;
                if a != 0.0 {
                    for (t, v) in stage.iter_mut().zip(kj) {
                        *t += v * a;
                    }
                }
            }
            let zs = if s == 6 && last { z1 } else { z + C[s] * hs };
            sys.eval(zs, &stage, &mut rest[0]);
        }
        err.iter_mut().for_each(|e| *e = C64::new(0.0, 0.0));
        for (j, kj) in k.iter().enumerate() {
            let e = E[j] * hs;
            if e != 0.0 {
                for (t, v) in err.iter_mut().zip(kj) {
                    *t += v * e;
                }
            }
        }
        let norm = rms_scaled(&err, &y, &stage, opts.rtol, opts.atol);
        if !norm.is_finite() {
            return Err(Error::Integration { at: z, reason: "non-finite error estimate".into() });
        }
        if norm <= 1.0 {
            accepted += 1;
            z = if last { z1 } else { z + hs };
            y.copy_from_slice(&stage);
            k.swap(0, 6);
            let factor = if norm == 0.0 { MAX_FACTOR } else { (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            h *= factor;
        } else {
            rejected += 1;
            h *= (SAFETY * norm.powf(-0.2)).max(MIN_FACTOR);
        }
    }

    let hmat = MatRef::from_column_major_slice(&y[..nn], n, n).to_owned();
    let bmat = MatRef::from_column_major_slice(&y[nn..], n, n).to_owned();
    let meta = PairMeta {
        label: "rk45".into(),
        integrator: "dormand-prince-5(4)".into(),
        rtol: Some(opts.rtol),
        atol: Some(opts.atol),
        steps: accepted,
        rejected,
        ..Default::default()
    };
    let pair = TransferPair::from_normalized(&lattice, hmat, bmat, meta)?;
    if opts.polish {
        super::polish_symplectic(&pair)
    } else {
        Ok(pair)
    }
}
