#![allow(dead_code)]

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use su11::linalg::CMat;
use su11::propagator::{PairMeta, TransferPair};
use su11::Lattice;

/// Unitary from the QR factor of a seeded complex Gaussian-like matrix.
pub fn random_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = StdRng::seed_from_u64(seed);
    let m: CMat = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().compute_Q()
}

/// Normalized pair `H = U diag(sqrt(L+1)) Psi^dagger`, `B = U diag(sqrt(L)) Psi^T`.
pub fn planted_pair(gains: &[f64], u: &CMat, psi: &CMat) -> TransferPair {
    let n = gains.len();
    let lattice = Lattice::symmetric(n, 1.0).unwrap();
    let us = Mat::from_fn(n, n, |j, k| u[(j, k)] * gains[k].sqrt());
    let ut = Mat::from_fn(n, n, |j, k| u[(j, k)] * (gains[k] + 1.0).sqrt());
    let b = &us * psi.transpose();
    let h = &ut * psi.adjoint();
    TransferPair::from_normalized(&lattice, h, b, PairMeta { label: "planted".into(), ..Default::default() }).unwrap()
}

pub fn column(m: &CMat, k: usize) -> Vec<C64> {
    (0..m.nrows()).map(|j| m[(j, k)]).collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut m = 0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}
