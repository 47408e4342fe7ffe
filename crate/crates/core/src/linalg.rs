//! Small dense helpers on top of faer.

use faer::{Mat, MatMut, MatRef};
use num_complex::Complex64 as C64;

pub type CMat = Mat<C64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn frob(m: MatRef<'_, C64>) -> f64 {
    m.norm_l2()
}

/// ||a - b||_F / ||b||_F (absolute when b vanishes).
pub fn rel_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let d = frob((a - b).as_ref());
    let s = frob(b);
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Entrywise `m[i, j] * left[i] * right[j]`.
pub fn scale_rows_cols(m: MatRef<'_, C64>, left: &[f64], right: &[f64]) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (left[i] * right[j]))
}

/// Entrywise `m[i, j] * left[i]`.
pub fn scale_rows(m: MatRef<'_, C64>, left: &[f64]) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * left[i])
}

pub fn conj(m: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

/// ||m - m^T||_F / ||m||_F.
pub fn asymmetry(m: MatRef<'_, C64>) -> f64 {
    rel_diff(m, m.transpose())
}

/// ||m^H m - I||_F / sqrt(n).
pub fn unitarity_defect(m: MatRef<'_, C64>) -> f64 {
    let g = m.adjoint() * m;
    frob((g - identity(m.ncols())).as_ref()) / (m.ncols() as f64).sqrt()
}

/// `out = alpha * a * b + beta * out` with sequential kernels.
pub fn gemm<R: faer::traits::Conjugate<Canonical = C64>>(
    out: MatMut<'_, C64>,
    a: MatRef<'_, C64>,
    b: MatRef<'_, R>,
    alpha: C64,
    accumulate: bool,
) {
    use faer::linalg::matmul::matmul;
    use faer::{Accum, Par};
    let accum = if accumulate { Accum::Add } else { Accum::Replace };
    matmul(out, accum, a, b, alpha, Par::Seq);
}

/// Diagonal matrix with the given real entries.
pub fn diag_real(d: &[f64]) -> CMat {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
}

/// Real scale factor usable with complex faer matrices.
pub fn real(x: f64) -> faer::Scale<C64> {
    faer::Scale(C64::new(x, 0.0))
}

/// Compensated dot-product accumulator (Ogita-Rump-Oishi "Dot2"): the
/// result is as accurate as if computed in doubled precision.
#[derive(Debug, Clone, Copy, Default)]
struct Dot2 {
    sum: f64,
    err: f64,
}

impl Dot2 {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        let s = self.sum + x;
        let bp = s - self.sum;
        self.err += (self.sum - (s - bp)) + (x - bp);
        self.sum = s;
    }

    /// Dekker product with Veltkamp splitting (no reliance on hardware FMA).
    #[inline(always)]
    fn add_prod(&mut self, a: f64, b: f64) {
        const SPLIT: f64 = 134_217_729.0;
        let p = a * b;
        let ca = SPLIT * a;
        let (ah, al) = (ca - (ca - a), a - (ca - (ca - a)));
        let cb = SPLIT * b;
        let (bh, bl) = (cb - (cb - b), b - (cb - (cb - b)));
        self.err += ((ah * bh - p) + ah * bl + al * bh) + al * bl;
        self.add(p);
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// `||m^dagger v||^2` with compensated accumulation.
pub fn rayleigh_gram(m: MatRef<'_, C64>, v: &[C64]) -> f64 {
    let n = m.nrows();
    let mut total = Dot2::default();
    let mut col = vec![C64::new(0.0, 0.0); n];
    for k in 0..m.ncols() {
        for (j, c) in col.iter_mut().enumerate() {
            *c = m[(j, k)];
        }
        let mut re = Dot2::default();
        let mut im = Dot2::default();
        for (a, x) in col.iter().zip(v) {
            re.add_prod(a.re, x.re);
            re.add_prod(a.im, x.im);
            im.add_prod(a.re, x.im);
            im.add_prod(-a.im, x.re);
        }
        // |x|^2 of the doubled-precision components.
        let (r, i) = ((re.sum, re.err), (im.sum, im.err));
        total.add_prod(r.0, r.0);
        total.add_prod(i.0, i.0);
        total.add(2.0 * (r.0 * r.1 + i.0 * i.1));
    }
    total.value()
}
