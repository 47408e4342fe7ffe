//! Two-pass composition, pump-phase decomposition of the output and the
//! air-gap search that maximizes fringe visibility.

use crate::error::{Error, Result};
use crate::exec::{try_map, Schedule};
use crate::jointdecomp::{joint_decompose, DecompOptions, SchmidtBasis};
use crate::lattice::Lattice;
use crate::linalg::CMat;
use crate::model::Setup;
use crate::overlaps::{g_matrix, h_matrix};
use crate::propagator::{PairMeta, TransferPair};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Transfer pair of pass 1 followed by pass 2 (normalized products).
pub fn compose(first: &TransferPair, second: &TransferPair) -> Result<TransferPair> {
    first.lattice().check_same(second.lattice())?;
    if second.meta.pump_phase.is_none() {
        return Err(Error::PhaseMismatch("second pass has no pump phase; use an XY split".into()));
    }
    let (h1, b1) = (first.h_hat(), first.b_hat());
    let (h2, b2) = (second.h_hat(), second.b_hat());
    let h = h2 * h1 + b2 * b1.conjugate();
    let b = h2 * b1 + b2 * h1.conjugate();
    let meta = PairMeta {
        label: "su11".into(),
        coupling: second.meta.coupling,
        air_gap: second.meta.air_gap,
        pump_phase: second.meta.pump_phase,
        integrator: second.meta.integrator.clone(),
        rtol: second.meta.rtol,
        atol: second.meta.atol,
        ..Default::default()
    };
    TransferPair::from_normalized(first.lattice(), h, b, meta)
}

/// Output split by pump-phase dependence:
/// `B_SU(phi) = X + e^{i phi} Y`, `H_SU(phi) = Xh + e^{i phi} Yh`.
#[derive(Debug, Clone)]
pub struct XySplit {
    lattice: Lattice,
    x: CMat,
    y: CMat,
    xh: CMat,
    yh: CMat,
    pub air_gap: Option<f64>,
    pub coupling: Option<f64>,
}

impl XySplit {
    /// `second` must be phase-stripped.
    pub fn new(first: &TransferPair, second: &TransferPair) -> Result<Self> {
        first.lattice().check_same(second.lattice())?;
        if second.meta.pump_phase.is_some() {
            return Err(Error::PhaseMismatch("XY split needs a phase-stripped second pass".into()));
        }
        let (h1, b1) = (first.h_hat(), first.b_hat());
        let (h2, b2) = (second.h_hat(), second.b_hat());
        Ok(Self {
            lattice: first.lattice().clone(),
            x: h2 * b1,
            y: b2 * h1.conjugate(),
            xh: h2 * h1,
            yh: b2 * b1.conjugate(),
            air_gap: second.meta.air_gap,
            coupling: second.meta.coupling,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `(sum |X|^2, sum |Y|^2)` with quadrature weights.
    pub fn intensities(&self) -> (f64, f64) {
        (self.x.squared_norm_l2(), self.y.squared_norm_l2())
    }

    /// Interference term `C = sum conj(X) Y`.
    pub fn cross(&self) -> C64 {
        let mut c = C64::new(0.0, 0.0);
        for j in 0..self.x.ncols() {
            for (a, b) in self.x.col_as_slice(j).iter().zip(self.y.col_as_slice(j)) {
                c += a.conj() * b;
            }
        }
        c
    }

    /// Total photon number at pump phase `phi`.
    pub fn total_intensity(&self, phi: f64) -> f64 {
        let (a, b) = self.intensities();
        a + b + 2.0 * (self.cross() * C64::cis(phi)).re
    }

    /// Fringe offset: the total intensity peaks at `phi = -offset`.
    pub fn fringe_offset(&self) -> Result<f64> {
        let c = self.cross();
        let (a, b) = self.intensities();
        if !(c.norm() > 1e-14 * (a + b)) {
            return Err(Error::DegenerateFringe(format!("|C| = {:.3e} vanishes", c.norm())));
        }
        Ok(c.arg())
    }

    /// Fringe visibility in percent.
    pub fn visibility(&self) -> f64 {
        let (a, b) = self.intensities();
        if a + b == 0.0 {
            return 0.0;
        }
        200.0 * self.cross().norm() / (a + b)
    }

    pub fn bright_phase(&self) -> Result<f64> {
        Ok(wrap_phase(-self.fringe_offset()?))
    }

    pub fn dark_phase(&self) -> Result<f64> {
        Ok(wrap_phase(PI - self.fringe_offset()?))
    }

    /// Full interferometer pair at pump phase `phi`.
    pub fn pair_at(&self, phi: f64) -> Result<TransferPair> {
        let r = crate::linalg::real(1.0);
        let e = faer::Scale(C64::cis(phi));
        let b = &self.x * r + &self.y * e;
        let h = &self.xh * r + &self.yh * e;
        let meta = PairMeta {
            label: "su11".into(),
            coupling: self.coupling,
            air_gap: self.air_gap,
            pump_phase: Some(phi),
            integrator: "xy-split".into(),
            ..Default::default()
        };
        TransferPair::from_normalized(&self.lattice, h, b, meta)
    }
}

/// Closed forms for a balanced interferometer without air gap:
/// gains `4 cos^2(phi/2) L (L + 1)`, common phase `mu` and per-mode `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedClosedForm {
    pub gains: Vec<f64>,
    pub mu: f64,
    pub zeta: Vec<f64>,
}

pub fn balanced_closed_form(single_gains: &[f64], phi: f64) -> BalancedClosedForm {
    let e = C64::cis(phi);
    let c2 = (0.5 * phi).cos().powi(2);
    BalancedClosedForm {
        gains: single_gains.iter().map(|&l| 4.0 * c2 * l * (l + 1.0)).collect(),
        mu: (1.0 + e).arg(),
        zeta: single_gains.iter().map(|&l| (1.0 + l * (1.0 + e)).arg()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub air_gap: f64,
    pub visibility: f64,
    pub fringe_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSearch {
    pub coarse: Vec<GapSample>,
    pub refined: Vec<GapSample>,
    pub best: GapSample,
    /// The coarse maximum sits on an end of the searched range.
    pub on_boundary: bool,
}

impl GapSearch {
    /// All evaluated samples sorted by air gap.
    pub fn all_samples(&self) -> Vec<GapSample> {
        let mut v: Vec<GapSample> = self.coarse.iter().chain(&self.refined).copied().collect();
        v.sort_by(|a, b| a.air_gap.total_cmp(&b.air_gap));
        v
    }
}

fn gap_sample(setup: &Setup, gamma2: f64, first: &TransferPair, gap: f64) -> Result<GapSample> {
    let second = setup.second_pass(gamma2, gap)?;
    let split = XySplit::new(first, &second)?;
    Ok(GapSample {
        air_gap: gap,
        visibility: split.visibility(),
        fringe_offset: split.fringe_offset().unwrap_or(f64::NAN),
    })
}

/// Visibility at each air gap (independent jobs).
pub fn visibility_scan(
    setup: &Setup,
    gamma2: f64,
    first: &TransferPair,
    gaps: &[f64],
    schedule: Schedule,
) -> Result<Vec<GapSample>> {
    try_map(schedule, gaps, |&g| gap_sample(setup, gamma2, first, g))
}

/// Coarse grid of `n_samples` gaps on `range`, then golden-section refinement
/// around the best sample down to `resolution`.
pub fn optimize_air_gap(
    setup: &Setup,
    gamma2: f64,
    first: &TransferPair,
    range: (f64, f64),
    n_samples: usize,
    resolution: f64,
    schedule: Schedule,
) -> Result<GapSearch> {
    if n_samples < 3 || !(range.1 > range.0) {
        return Err(Error::Domain(format!("air-gap search needs >= 3 samples on a proper range, got {n_samples} on {range:?}")));
    }
    let step = (range.1 - range.0) / (n_samples - 1) as f64;
    let gaps: Vec<f64> = (0..n_samples).map(|i| range.0 + i as f64 * step).collect();
    let coarse = visibility_scan(setup, gamma2, first, &gaps, schedule)?;
    let k = coarse
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.visibility.total_cmp(&b.1.visibility))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut lo = gaps[k.saturating_sub(1)];
    let mut hi = gaps[(k + 1).min(n_samples - 1)];
    let mut best = coarse[k];
    let mut refined = Vec::new();
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = gap_sample(setup, gamma2, first, a)?;
    let mut fb = gap_sample(setup, gamma2, first, b)?;
    refined.push(fa);
    refined.push(fb);
    while hi - lo > resolution {
        if fa.visibility >= fb.visibility {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = gap_sample(setup, gamma2, first, a)?;
            refined.push(fa);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = gap_sample(setup, gamma2, first, b)?;
            refined.push(fb);
        }
    }
    for s in &refined {
        if s.visibility > best.visibility {
            best = *s;
        }
    }
    Ok(GapSearch { coarse, refined, best, on_boundary: k == 0 || k == n_samples - 1 })
}

/// Air-gap choice for an interferometer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GapChoice {
    Fixed(f64),
    Optimize { range: (f64, f64), samples: usize, resolution: f64 },
}

/// Modes and overlaps at one pump phase.
#[derive(Debug, Clone)]
pub struct FringeData {
    pub phi: f64,
    /// Second-pass modes with the pump phase folded in.
    pub second: SchmidtBasis,
    pub su: SchmidtBasis,
    pub g: CMat,
    pub h: CMat,
}

/// Both passes, their composition and the dark / bright fringe analyses.
#[derive(Debug, Clone)]
pub struct InterferometerAnalysis {
    pub first_pair: TransferPair,
    pub first: SchmidtBasis,
    /// Phase-stripped second-pass modes.
    pub second: SchmidtBasis,
    pub split: XySplit,
    pub air_gap: f64,
    pub search: Option<GapSearch>,
    pub fringe_offset: f64,
    pub dark: FringeData,
    pub bright: FringeData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub coupling_first: f64,
    pub coupling_second: f64,
    pub air_gap: GapChoice,
    /// Modes kept in the overlap matrices.
    pub truncation: usize,
    pub decomp: DecompOptions,
}

/// Decompose the interferometer at pump phase `phi`.
pub fn fringe_data(
    split: &XySplit,
    first: &SchmidtBasis,
    second_check: &SchmidtBasis,
    phi: f64,
    truncation: usize,
    decomp: &DecompOptions,
) -> Result<FringeData> {
    let su = joint_decompose(&split.pair_at(phi)?, decomp)?;
    let second = second_check.with_pump_phase(phi)?;
    let g = g_matrix(first, &second, truncation)?;
    let h = h_matrix(&second, &su, truncation)?;
    Ok(FringeData { phi, second, su, g, h })
}

pub fn analyze(setup: &Setup, opts: &AnalysisOptions, schedule: Schedule) -> Result<InterferometerAnalysis> {
    if opts.truncation == 0 || opts.truncation > setup.lattice.len() {
        return Err(Error::Truncation(format!("truncation {} on a {}-point lattice", opts.truncation, setup.lattice.len())));
    }
    let first_pair = setup.first_pass(opts.coupling_first)?;
    let (air_gap, search) = match opts.air_gap {
        GapChoice::Fixed(g) => (g, None),
        GapChoice::Optimize { range, samples, resolution } => {
            let s = optimize_air_gap(setup, opts.coupling_second, &first_pair, range, samples, resolution, schedule)?;
            (s.best.air_gap, Some(s))
        }
    };
    let second_pair = setup.second_pass(opts.coupling_second, air_gap)?;
    let first = joint_decompose(&first_pair, &opts.decomp)?;
    let second = joint_decompose(&second_pair, &opts.decomp)?;
    let split = XySplit::new(&first_pair, &second_pair)?;
    // With an empty first pass every phase is a fringe; pin the offset to zero.
    let fringe_offset = match split.fringe_offset() {
        Err(Error::DegenerateFringe(_)) if split.intensities().0 == 0.0 => 0.0,
        r => r?,
    };
    let phis = [wrap_phase(PI - fringe_offset), wrap_phase(-fringe_offset)];
    let mut fringes =
        try_map(schedule, &phis, |&phi| fringe_data(&split, &first, &second, phi, opts.truncation, &opts.decomp))?;
    let bright = fringes.pop().expect("two fringes");
    let dark = fringes.pop().expect("two fringes");
    Ok(InterferometerAnalysis { first_pair, first, second, split, air_gap, search, fringe_offset, dark, bright })
}
