mod common;

use common::rel_err;
use std::f64::consts::PI;
use su11::exec::Schedule;
use su11::interferometer::{analyze, balanced_closed_form, compose, wrap_phase, AnalysisOptions, GapChoice, XySplit};
use su11::jointdecomp::{joint_decompose, DecompOptions};
use su11::model::Setup;
use su11::squeezing::{exact_moments, ModeMoments};

const POINTS: usize = 48;
const GAMMA: f64 = 1.0 / 142.0;

fn balanced() -> (Setup, XySplit, Vec<f64>) {
    let setup = Setup::reference(POINTS).unwrap();
    let first = setup.first_pass(GAMMA).unwrap();
    let second = setup.second_pass(GAMMA, 0.0).unwrap();
    let gains = joint_decompose(&first, &DecompOptions::default()).unwrap().gains;
    let split = XySplit::new(&first, &second).unwrap();
    (setup, split, gains)
}

#[test]
fn balanced_gains_follow_the_closed_form() {
    let (_, split, single) = balanced();
    for phi in [0.0, PI / 3.0, PI] {
        let su = joint_decompose(&split.pair_at(phi).unwrap(), &DecompOptions::default()).unwrap();
        let closed = balanced_closed_form(&single, phi);
        for k in 0..10 {
            let (got, want) = (su.gains[k], closed.gains[k]);
            if want > 1e-12 {
                assert!(rel_err(got, want) < 1e-5, "phi={phi} mode {k}: {got} vs {want}");
            } else {
                assert!(got < 1e-8 * single[0], "phi={phi} mode {k}: {got} should vanish");
            }
        }
    }
}

#[test]
fn composition_matches_the_phase_split() {
    let (setup, split, _) = balanced();
    let phi = 0.7;
    let first = setup.first_pass(GAMMA).unwrap();
    let second = setup.second_pass(GAMMA, 0.0).unwrap().with_pump_phase(phi).unwrap();
    let direct = compose(&first, &second).unwrap();
    let via_split = split.pair_at(phi).unwrap();
    assert!(su11::linalg::rel_diff(direct.b_hat(), via_split.b_hat()) < 1e-12);
    assert!(su11::linalg::rel_diff(direct.h_hat(), via_split.h_hat()) < 1e-12);
}

#[test]
fn balanced_fringe_is_perfect() {
    let (_, split, _) = balanced();
    assert!((split.visibility() - 100.0).abs() < 1e-6, "v = {}", split.visibility());
    assert!(split.fringe_offset().unwrap().abs() < 1e-8);
    let bright = split.total_intensity(split.bright_phase().unwrap());
    let dark = split.total_intensity(split.dark_phase().unwrap());
    assert!(dark < 1e-8 * bright, "dark {dark} bright {bright}");
}

fn unbalanced_analysis(truncation: usize) -> su11::interferometer::InterferometerAnalysis {
    let setup = Setup::reference(POINTS).unwrap();
    let opts = AnalysisOptions {
        coupling_first: GAMMA,
        coupling_second: 4.0 * GAMMA,
        air_gap: GapChoice::Fixed(5e-4),
        truncation,
        decomp: DecompOptions::default(),
    };
    analyze(&setup, &opts, Schedule::Sequential).unwrap()
}

#[test]
fn overlap_moduli_agree_at_both_fringes() {
    let a = unbalanced_analysis(16);
    let (gd, gb) = (&a.dark.g, &a.bright.g);
    for i in 0..gd.nrows() {
        for j in 0..gd.ncols() {
            assert!((gd[(i, j)].norm() - gb[(i, j)].norm()).abs() < 1e-8);
            // Fringes sit pi apart in pump phase; the overlaps carry half of it.
            if gd[(i, j)].norm() > 1e-6 {
                let d = wrap_phase(gb[(i, j)].arg() - gd[(i, j)].arg());
                assert!((d.abs() - PI / 2.0).abs() < 1e-8, "entry ({i},{j}): {d}");
            }
        }
    }
}

#[test]
fn first_pass_moments_do_not_depend_on_the_fringe() {
    // With every mode kept the overlap sums are complete.
    let a = unbalanced_analysis(POINTS);
    let moments = |f: &su11::interferometer::FringeData, l: usize| -> ModeMoments {
        let t = f.g.ncols();
        exact_moments(&f.g, &f.h, &f.second.gains[..t], &f.su.gains[..t], l).unwrap()
    };
    for l in 0..4 {
        let (d, b) = (moments(&a.dark, l), moments(&a.bright, l));
        assert!(rel_err(d.n_mean, b.n_mean) < 1e-8, "mode {l}: {} vs {}", d.n_mean, b.n_mean);
        assert!((d.anom.norm() - b.anom.norm()).abs() < 1e-8 * d.anom.norm().max(1e-12));
        assert!(rel_err(d.n_mean, a.first.gains[l]) < 1e-8, "mode {l}: {} vs {}", d.n_mean, a.first.gains[l]);
    }
}

#[test]
fn fringes_sit_half_a_turn_apart() {
    let a = unbalanced_analysis(16);
    assert!((wrap_phase(a.dark.phi - a.bright.phi).abs() - PI).abs() < 1e-12);
    assert!((wrap_phase(a.bright.phi + a.fringe_offset)).abs() < 1e-12);
    assert!(a.split.visibility() > 0.0 && a.split.visibility() < 100.0);
}
