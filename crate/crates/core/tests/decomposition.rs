mod common;

use common::{column, inner, max_abs_diff, planted_pair, random_unitary};
use faer::Mat;
use num_complex::Complex64 as C64;
use su11::jointdecomp::{
    canonicalize_signs, degenerate_blocks, gains_from_gram, joint_decompose, read_basis, symmetric_unitary_sqrt,
    takagi_unitary, write_basis, DecompOptions, ModeFamily,
};
use su11::linalg::{identity, CMat};
use su11::model::Setup;

fn planted_gains(n: usize, degenerate: bool) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|k| 6.0 * (-0.35 * k as f64).exp() + 0.01 / (k + 1) as f64).collect();
    if degenerate {
        g[2] = g[1];
    }
    g
}

fn check_planted(n: usize, degenerate: bool, seed: u64) {
    let gains = planted_gains(n, degenerate);
    let u0 = random_unitary(n, seed);
    let psi0 = random_unitary(n, seed + 1);
    let pair = planted_pair(&gains, &u0, &psi0);
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    for (k, (got, want)) in basis.gains.iter().zip(&gains).enumerate() {
        assert!((got - want).abs() < 1e-10, "n={n} mode {k}: {got} vs {want}");
    }
    for (l, lt) in basis.gains.iter().zip(&basis.gains_tilde) {
        assert!((lt - l - 1.0).abs() < 1e-8);
    }
    let u = basis.normalized(ModeFamily::Output);
    let psi = basis.normalized(ModeFamily::Input);
    for k in 0..n {
        if degenerate && (k == 1 || k == 2) {
            continue;
        }
        let ou = inner(&column(u, k), &column(&u0, k)).norm();
        let op = inner(&column(psi, k), &column(&psi0, k)).norm();
        assert!(ou > 1.0 - 1e-8, "n={n} mode {k}: |<u|u'>| = {ou}");
        assert!(op > 1.0 - 1e-8, "n={n} mode {k}: |<psi|psi'>| = {op}");
    }
    assert!(basis.residuals.b_reconstruction < 1e-10);
    assert!(basis.residuals.h_reconstruction < 1e-10);
}

#[test]
fn planted_six_mode_pair_is_recovered() {
    check_planted(6, false, 11);
}

#[test]
fn planted_six_mode_pair_with_degenerate_block_is_recovered() {
    check_planted(6, true, 13);
}

#[test]
fn planted_sixty_four_mode_pair_is_recovered() {
    check_planted(64, false, 17);
}

#[test]
fn planted_sixty_four_mode_pair_with_degenerate_block_is_recovered() {
    check_planted(64, true, 19);
}

#[test]
fn planted_modes_match_after_canonicalization() {
    // A non-degenerate joint decomposition is unique up to a joint sign per mode.
    let n = 6;
    let gains = planted_gains(n, false);
    let mut u0 = random_unitary(n, 23);
    let mut psi0 = random_unitary(n, 24);
    // The sign convention is taken at the peak of the kernel-unit mode.
    let sw = su11::Lattice::symmetric(n, 1.0).unwrap().sqrt_weights();
    let kernel = |m: &CMat, a: usize, k: usize| m[(a, k)].norm() / sw[a];
    for k in 0..n {
        let peak = (0..n).max_by(|&a, &b| kernel(&u0, a, k).total_cmp(&kernel(&u0, b, k))).unwrap();
        if u0[(peak, k)].re < 0.0 {
            for j in 0..n {
                u0[(j, k)] = -u0[(j, k)];
                psi0[(j, k)] = -psi0[(j, k)];
            }
        }
    }
    let pair = planted_pair(&gains, &u0, &psi0);
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    assert!(max_abs_diff(basis.normalized(ModeFamily::Output), &u0) < 1e-9);
    assert!(max_abs_diff(basis.normalized(ModeFamily::Input), &psi0) < 1e-9);
}

#[test]
fn diagonal_pair_gives_sinh_squared() {
    let (r, s): (f64, f64) = (0.8, 0.3);
    let gains = [r.sinh().powi(2), s.sinh().powi(2)];
    let pair = planted_pair(&gains, &identity(2), &identity(2));
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    let u = basis.normalized(ModeFamily::Output);
    let psi = basis.normalized(ModeFamily::Input);
    for k in 0..2 {
        assert!((basis.gains[k] - gains[k]).abs() < 1e-14);
        assert!((u[(k, k)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((psi[(k, k)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn identity_pair_has_zero_gains_and_exact_reconstruction() {
    let lattice = su11::Lattice::symmetric(8, 1.0).unwrap();
    let pair = su11::TransferPair::identity(&lattice);
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    assert!(basis.gains.iter().all(|&g| g.abs() < 1e-15));
    assert!(basis.residuals.h_reconstruction < 1e-14);
    assert!(basis.residuals.b_reconstruction < 1e-14);
}

#[test]
fn block_partition_examples() {
    assert_eq!(degenerate_blocks(&[3.0, 2.0, 1.0], 1e-8), vec![0..1, 1..2, 2..3]);
    assert_eq!(degenerate_blocks(&[2.0, 2.0, 1.0], 1e-8), vec![0..2, 2..3]);
    assert_eq!(degenerate_blocks(&[0.0; 5], 1e-8), vec![0..5]);
}

#[test]
fn takagi_of_identity_is_identity() {
    let d = takagi_unitary(&identity(4), &[0..4]).unwrap();
    assert!(max_abs_diff(&d, &identity(4)) < 1e-14);
}

#[test]
fn takagi_of_scalar_phase_halves_it() {
    let alpha = 2.3;
    let g: CMat = Mat::from_fn(1, 1, |_, _| C64::cis(alpha));
    let d = takagi_unitary(&g, &[0..1]).unwrap();
    assert!((d[(0, 0)] - C64::cis(alpha / 2.0)).norm() < 1e-14);
}

#[test]
fn takagi_of_random_symmetric_unitary_multiplies_back() {
    let q = random_unitary(3, 31);
    let g = &q * q.transpose();
    let d = takagi_unitary(&g, &[0..3]).unwrap();
    assert!(max_abs_diff(&(&d * d.transpose()), &g) < 1e-10);
    assert!(max_abs_diff(&(d.adjoint() * &d), &identity(3)) < 1e-10);
}

#[test]
fn takagi_rejects_non_symmetric_input() {
    let q = random_unitary(3, 37);
    assert!(takagi_unitary(&q, &[0..3]).is_err());
}

#[test]
fn unitary_square_root_singletons_and_blocks() {
    let (a, b) = (0.7, -2.9);
    let z: CMat = Mat::from_fn(2, 2, |i, j| if i != j { C64::new(0.0, 0.0) } else if i == 0 { C64::cis(a) } else { C64::cis(b) });
    let s = symmetric_unitary_sqrt(&z).unwrap();
    assert!((s[(0, 0)] - C64::cis(a / 2.0)).norm() < 1e-12);
    assert!((s[(1, 1)] - C64::cis(b / 2.0)).norm() < 1e-12);
    let q = random_unitary(2, 41);
    let block = &q * q.transpose();
    let r = symmetric_unitary_sqrt(&block).unwrap();
    assert!(max_abs_diff(&(&r * &r), &block) < 1e-12);
    assert!(max_abs_diff(&(r.adjoint() * &r), &identity(2)) < 1e-12);
    assert!(max_abs_diff(&symmetric_unitary_sqrt(&identity(3)).unwrap(), &identity(3)) < 1e-14);
}

#[test]
fn canonicalization_is_idempotent_and_keeps_reconstruction() {
    let gains = planted_gains(6, false);
    let pair = planted_pair(&gains, &random_unitary(6, 43), &random_unitary(6, 44));
    let mut basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    let (h0, b0) = basis.reconstruct();
    canonicalize_signs(&mut basis);
    let once = basis.normalized(ModeFamily::Output).clone();
    canonicalize_signs(&mut basis);
    assert!(max_abs_diff(&once, basis.normalized(ModeFamily::Output)) == 0.0);
    let (h1, b1) = basis.reconstruct();
    assert!(max_abs_diff(&h0, &h1) < 1e-14 && max_abs_diff(&b0, &b1) < 1e-14);
}

#[test]
fn propagated_pair_invariants() {
    let setup = Setup::reference(64).unwrap();
    let pair = setup.first_pass(4.0 / 142.0).unwrap();
    let opts = DecompOptions::default();
    let basis = joint_decompose(&pair, &opts).unwrap();
    for (l, lt) in basis.gains.iter().zip(&basis.gains_tilde) {
        assert!((lt - l - 1.0).abs() < 1e-8);
    }
    assert!(basis.gains.windows(2).all(|w| w[0] >= w[1]));
    assert!(basis.residuals.b_reconstruction < 1e-6 && basis.residuals.h_reconstruction < 1e-6);
    let w = setup.lattice.weights();
    for side in [ModeFamily::Output, ModeFamily::Input] {
        let m = basis.modes(side);
        let gram = Mat::from_fn(64, 64, |a, b| (0..64).map(|j| m[(j, a)].conj() * m[(j, b)] * w[j]).sum::<C64>());
        assert!(max_abs_diff(&gram, &identity(64)) < 1e-8);
    }
    // Rotation commutes with the singular values.
    assert!(basis.residuals.rotation_commutator < 1e-8);

    let again = joint_decompose(&pair, &opts).unwrap();
    let u = basis.normalized(ModeFamily::Output);
    let v = again.normalized(ModeFamily::Output);
    for r in basis.blocks.iter().filter(|r| r.len() == 1).take(20) {
        let k = r.start;
        assert!((inner(&column(u, k), &column(v, k)).norm() - 1.0).abs() < 1e-6);
    }

    let (gram_gains, _) = gains_from_gram(&pair).unwrap();
    for k in 0..10 {
        assert!(common::rel_err(gram_gains[k], basis.gains[k]) < 1e-8);
    }
}

#[test]
fn low_gain_pass_keeps_its_small_modes() {
    // Gains near 1e-14 are still well above the integrator noise of B.
    let setup = Setup::reference(128).unwrap();
    let pair = setup.first_pass(0.01 / 142.0).unwrap();
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    assert!(basis.residuals.b_reconstruction < 1e-6, "{:?}", basis.residuals);
    assert!(basis.blocks.last().unwrap().start > 30);
}

#[test]
fn basis_roundtrips_through_files() {
    let setup = Setup::reference(24).unwrap();
    let pair = setup.first_pass(0.02).unwrap();
    let basis = joint_decompose(&pair, &DecompOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("basis");
    write_basis(&stem, &basis).unwrap();
    let back = read_basis(&stem).unwrap();
    assert_eq!(back.gains, basis.gains);
    assert_eq!(back.gains_tilde, basis.gains_tilde);
    assert_eq!(back.blocks, basis.blocks);
    for side in [ModeFamily::Output, ModeFamily::Input] {
        assert!(max_abs_diff(back.normalized(side), basis.normalized(side)) < 1e-15);
    }
}
