//! Fixed-step exponential integrator: `S_{k+1} = exp(h A(z_k)) S_k` with
//! `A = [[0, G], [G*, 0]]`, exact on the group up to rounding.

use super::{Coupling, PairMeta, TransferPair};
use crate::error::{Error, Result};
use crate::linalg::{frob, gemm, identity, CMat, ONE, ZERO};
use num_complex::Complex64 as C64;
use faer::Mat;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieOptions {
    pub steps: usize,
    /// Evaluate the generator at step midpoints instead of left ends.
    pub midpoint: bool,
}

impl Default for LieOptions {
    fn default() -> Self {
        Self { steps: 4096, midpoint: false }
    }
}

/// Reusable buffers for [`block_exp_into`].
pub(crate) struct ExpWork {
    m: CMat,
    power: CMat,
    next: CMat,
    s: CMat,
    pub c: CMat,
    pub d: CMat,
    c2: CMat,
    d2: CMat,
}

impl ExpWork {
    pub fn new(n: usize) -> Self {
        let z = || Mat::zeros(n, n);
        Self { m: z(), power: z(), next: z(), s: z(), c: z(), d: z(), c2: z(), d2: z() }
    }
}

fn add_scaled(dst: &mut CMat, src: &CMat, alpha: f64) {
    for j in 0..dst.ncols() {
        let d = dst.col_as_slice_mut(j);
        for (x, y) in d.iter_mut().zip(src.col_as_slice(j)) {
            *x += y * alpha;
        }
    }
}

fn set_identity(dst: &mut CMat) {
    dst.fill(ZERO);
    for i in 0..dst.nrows() {
        dst[(i, i)] = ONE;
    }
}

/// Blocks `(C, D)` of `exp(t [[0, G], [G*, 0]]) = [[C, D], [D*, C*]]` for
/// symmetric `G`, left in `work.c` / `work.d`. Taylor series on
/// `M = t^2 G G*` after scaling, then block squaring.
pub(crate) fn block_exp_into(g: &CMat, t: f64, work: &mut ExpWork) -> Result<()> {
    let norm = t.abs() * frob(g.as_ref());
    if !norm.is_finite() {
        return Err(Error::MatrixExp(format!("non-finite generator norm {norm}")));
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let ts = t / 2f64.powi(squarings as i32);
    gemm(work.m.as_mut(), g.as_ref(), g.conjugate(), C64::new(ts * ts, 0.0), false);
    let m_norm = frob(work.m.as_ref());
    set_identity(&mut work.c);
    set_identity(&mut work.s);
    work.power.copy_from(&work.m);
    let mut fact_even = 2.0f64;
    let mut fact_odd = 6.0f64;
    let mut k = 1usize;
    loop {
        add_scaled(&mut work.c, &work.power, 1.0 / fact_even);
        add_scaled(&mut work.s, &work.power, 1.0 / fact_odd);
        let next_even = fact_even * ((2 * k + 1) * (2 * k + 2)) as f64;
        if frob(work.power.as_ref()) * m_norm / next_even < 1e-2 * f64::EPSILON {
            break;
        }
        k += 1;
        if k > 40 {
            return Err(Error::MatrixExp("Taylor series did not converge".into()));
        }
        gemm(work.next.as_mut(), work.power.as_ref(), work.m.as_ref(), ONE, false);
        std::mem::swap(&mut work.power, &mut work.next);
        fact_even = next_even;
        fact_odd *= ((2 * k) * (2 * k + 1)) as f64;
    }
    gemm(work.d.as_mut(), work.s.as_ref(), g.as_ref(), C64::new(ts, 0.0), false);
    for _ in 0..squarings {
        gemm(work.c2.as_mut(), work.c.as_ref(), work.c.as_ref(), ONE, false);
        gemm(work.c2.as_mut(), work.d.as_ref(), work.d.conjugate(), ONE, true);
        gemm(work.d2.as_mut(), work.c.as_ref(), work.d.as_ref(), ONE, false);
        gemm(work.d2.as_mut(), work.d.as_ref(), work.c.conjugate(), ONE, true);
        std::mem::swap(&mut work.c, &mut work.c2);
        std::mem::swap(&mut work.d, &mut work.d2);
    }
    if !frob(work.c.as_ref()).is_finite() {
        return Err(Error::MatrixExp("overflow while squaring".into()));
    }
    Ok(())
}

#[cfg(test)]
/// Allocating convenience wrapper around [`block_exp_into`].
pub(crate) fn block_exp(g: &CMat, t: f64) -> Result<(CMat, CMat)> {
    let mut work = ExpWork::new(g.nrows());
    block_exp_into(g, t, &mut work)?;
    Ok((work.c, work.d))
}

/// Integrate over `span` from the identity pair with `opts.steps` uniform steps.
pub fn integrate_lie_euler<K: Coupling + ?Sized>(
    coupling: &K,
    span: (f64, f64),
    opts: &LieOptions,
) -> Result<TransferPair> {
    if opts.steps == 0 {
        return Err(Error::Domain("Lie-Euler needs at least one step".into()));
    }
    let lattice = coupling.lattice().clone();
    let n = lattice.len();
    let step = (span.1 - span.0) / opts.steps as f64;
    let offset = if opts.midpoint { 0.5 } else { 0.0 };
    let mut h = identity(n);
    let mut b: CMat = Mat::zeros(n, n);
    let mut h_next: CMat = Mat::zeros(n, n);
    let mut b_next: CMat = Mat::zeros(n, n);
    let mut g: CMat = Mat::zeros(n, n);
    let mut work = ExpWork::new(n);
    for k in 0..opts.steps {
        let z = span.0 + (k as f64 + offset) * step;
        coupling.fill(z, g.as_mut());
        block_exp_into(&g, step, &mut work)?;
        gemm(h_next.as_mut(), work.c.as_ref(), h.as_ref(), ONE, false);
        gemm(h_next.as_mut(), work.d.as_ref(), b.conjugate(), ONE, true);
        gemm(b_next.as_mut(), work.c.as_ref(), b.as_ref(), ONE, false);
        gemm(b_next.as_mut(), work.d.as_ref(), h.conjugate(), ONE, true);
        std::mem::swap(&mut h, &mut h_next);
        std::mem::swap(&mut b, &mut b_next);
    }
    let meta = PairMeta {
        label: "lie-euler".into(),
        integrator: if opts.midpoint { "exponential-midpoint".into() } else { "lie-euler".into() },
        steps: opts.steps,
        ..Default::default()
    };
    TransferPair::from_normalized(&lattice, h, b, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_block_exp_is_cosh_sinh() {
        for t in [0.01, 0.7, 3.0, 9.0] {
            let g = Mat::from_fn(1, 1, |_, _| C64::new(1.0, 0.0));
            let (c, d) = block_exp(&g, t).unwrap();
            assert!((c[(0, 0)].re / t.cosh() - 1.0).abs() < 1e-13);
            assert!((d[(0, 0)].re / t.sinh() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_scalar_keeps_phase() {
        let g = Mat::from_fn(1, 1, |_, _| C64::cis(0.4) * 2.0);
        let (c, d) = block_exp(&g, 0.5).unwrap();
        assert!((c[(0, 0)] - C64::new(1f64.cosh(), 0.0)).norm() < 1e-13);
        assert!((d[(0, 0)] - C64::cis(0.4) * 1f64.sinh()).norm() < 1e-13);
    }
}
