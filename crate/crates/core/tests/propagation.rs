mod common;

use common::rel_err;
use proptest::prelude::*;
use su11::linalg::rel_diff;
use su11::model::Setup;
use su11::physics::{phasematch_first, phasematch_second, Dispersion};
use su11::propagator::{integrate_lie_euler, integrate_rk, read_pair, write_pair, ConstantCoupling, LieOptions, Pass, RkOptions};
use su11::Lattice;

#[test]
fn diagonal_toy_matches_cosh_and_sinh() {
    let lattice = Lattice::symmetric(8, 1.0).unwrap();
    let length = 3e-3;
    for gl in [0.1, 1.0, 3.0] {
        let coupling = ConstantCoupling::diagonal(&lattice, gl / length);
        let pair = integrate_rk(&coupling, (0.0, length), &RkOptions::default()).unwrap();
        let (h, b) = (pair.h_hat(), pair.b_hat());
        for j in 0..8 {
            assert!(rel_err(h[(j, j)].re, gl.cosh()) < 1e-8, "GL={gl}: H = {}", h[(j, j)]);
            assert!(rel_err(b[(j, j)].re, gl.sinh()) < 1e-8, "GL={gl}: B = {}", b[(j, j)]);
            assert!(h[(j, j)].im.abs() < 1e-12 && b[(j, j)].im.abs() < 1e-12);
        }
        assert!(pair.symplectic_residuals().max() < 1e-8);
    }
}

#[test]
fn propagated_passes_keep_bogoliubov_structure() {
    let setup = Setup::reference(48).unwrap();
    for gamma in [0.01 / 142.0, 4.0 / 142.0] {
        let first = setup.first_pass(gamma).unwrap();
        assert!(first.symplectic_residuals().max() < 1e-6, "{:?}", first.symplectic_residuals());
        let second = setup.second_pass(gamma, 5e-4).unwrap();
        assert!(second.symplectic_residuals().max() < 1e-6, "{:?}", second.symplectic_residuals());
    }
}

#[test]
fn mirrored_second_pass_has_the_same_gains() {
    let setup = Setup::reference(32).unwrap();
    let gamma = 2.0 / 142.0;
    let n1 = setup.first_pass(gamma).unwrap().total_photons();
    let n2 = setup.second_pass(gamma, 0.0).unwrap().total_photons();
    assert!(rel_err(n1, n2) < 1e-7, "{n1} vs {n2}");
}

#[test]
fn lie_euler_converges_at_first_order() {
    let setup = Setup::reference(16).unwrap();
    let coupling = setup.coupling(3.0 / 142.0, Pass::First).unwrap();
    let span = setup.geometry.first_span();
    let tight = RkOptions { rtol: 1e-12, atol: 1e-14, ..RkOptions::default() };
    let reference = integrate_rk(&coupling, span, &tight).unwrap();
    let errors: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&steps| {
            let lie = integrate_lie_euler(&coupling, span, &LieOptions { steps, midpoint: false }).unwrap();
            assert!(lie.symplectic_residuals().max() < 1e-10);
            rel_diff(lie.b_hat(), reference.b_hat())
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.8..2.2).contains(&ratio), "error ratio {ratio}: {errors:?}");
    }
}

#[test]
fn pair_roundtrips_through_files() {
    let setup = Setup::reference(12).unwrap();
    let pair = setup.second_pass(0.02, 3e-4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("pass2");
    write_pair(&stem, &pair).unwrap();
    let back = read_pair(&stem).unwrap();
    assert!(back.lattice().same_as(pair.lattice()));
    assert_eq!(back.meta, pair.meta);
    // Stored in kernel units, so the weight rescaling rounds.
    assert!(rel_diff(back.h_hat(), pair.h_hat()) < 1e-15);
    assert!(rel_diff(back.b_hat(), pair.b_hat()) < 1e-15);
}

#[test]
fn step_budget_exhaustion_is_reported() {
    let setup = Setup::reference(8).unwrap();
    let coupling = setup.coupling(0.05, Pass::First).unwrap();
    let opts = RkOptions { max_steps: 2, ..RkOptions::default() };
    let err = integrate_rk(&coupling, setup.geometry.first_span(), &opts).unwrap_err();
    assert_eq!(err.class(), su11::ErrorClass::Numeric);
}

proptest! {
    #[test]
    fn phase_matching_factors_have_unit_modulus(dk in -1e5f64..1e5, dka in -1e5f64..1e5, z in 0.0f64..6e-3, gap in 0.0f64..1e-3, phi in -3.2f64..3.2) {
        prop_assert!((phasematch_first(dk, z).norm() - 1.0).abs() < 1e-14);
        prop_assert!((phasematch_second(dk, dka, z, 3e-3, gap, Some(phi)).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mismatch_is_symmetric_under_exchange_and_mirror(qs in -3e5f64..3e5, qi in -3e5f64..3e5) {
        let d = Dispersion::bbo_800nm();
        let a = d.delta_k(qs, qi).unwrap();
        let tol = 1e-9 * a.abs().max(1.0);
        prop_assert!((a - d.delta_k(qi, qs).unwrap()).abs() <= tol);
        prop_assert!((a - d.delta_k(-qs, -qi).unwrap()).abs() <= tol);
    }

    #[test]
    fn second_pass_at_zero_gap_mirrors_first(dk in -1e5f64..1e5, z in 0.0f64..3e-3) {
        let l1 = 3e-3;
        let h1 = phasematch_first(dk, z);
        let h2 = phasematch_second(dk, 0.0, 2.0 * l1 - z, l1, 0.0, Some(0.0));
        prop_assert!((h1 - h2).norm() < 1e-9);
    }
}
