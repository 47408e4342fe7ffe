//! Per-mode quadrature squeezing of the first-pass output, obtained three
//! ways: directly from the first-pass gains, exactly from the interferometer
//! output via the overlap matrices, and in the high-gain amplifier limit.

use crate::error::{Error, Result};
use crate::exec::{try_map, Schedule};
use crate::interferometer::{analyze, AnalysisOptions, GapChoice, InterferometerAnalysis};
use crate::jointdecomp::DecompOptions;
use crate::linalg::CMat;
use crate::model::Setup;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, PI};

/// Slack on the Gaussian physicality bound `|anom|^2 <= n (n + 1)`.
pub const PHYSICALITY_SLACK: f64 = 1e-8;

/// `<A^dagger A>` and `<A A>` of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMoments {
    pub n_mean: f64,
    pub anom: C64,
    pub mode_index: usize,
}

impl ModeMoments {
    pub fn vacuum(mode_index: usize) -> Self {
        Self { n_mean: 0.0, anom: C64::new(0.0, 0.0), mode_index }
    }

    /// Moments of a single-mode squeezed vacuum with squeeze parameter `r`.
    pub fn squeezed_vacuum(r: f64, mode_index: usize) -> Self {
        Self { n_mean: r.sinh().powi(2), anom: C64::new(r.sinh() * r.cosh(), 0.0), mode_index }
    }

    pub fn check_physical(&self) -> Result<()> {
        let bound = (self.n_mean * (self.n_mean + 1.0)).max(0.0).sqrt() + PHYSICALITY_SLACK;
        if !(self.n_mean >= -PHYSICALITY_SLACK) || !(self.anom.norm() <= bound * (1.0 + PHYSICALITY_SLACK)) {
            return Err(Error::Physicality {
                mode: self.mode_index,
                detail: format!("n = {:.6e}, |anom| = {:.6e}, bound {:.6e}", self.n_mean, self.anom.norm(), bound),
            });
        }
        Ok(())
    }
}

/// Variance of the quadrature `A e^{-i theta/2} + A^dagger e^{i theta/2}`.
pub fn quad_variance(m: &ModeMoments, theta: f64) -> f64 {
    1.0 + 2.0 * m.n_mean + 2.0 * (m.anom * C64::cis(-theta)).re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub vmin: f64,
    pub vmax: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

/// Minimum and maximum of [`quad_variance`] over the quadrature angle, with
/// both angles in `(-pi, pi]`.
pub fn extremal_variances(m: &ModeMoments) -> Extremes {
    let a = m.anom.norm();
    let theta_max = m.anom.arg();
    Extremes {
        vmin: 1.0 + 2.0 * m.n_mean - 2.0 * a,
        vmax: 1.0 + 2.0 * m.n_mean + 2.0 * a,
        theta_min: crate::interferometer::wrap_phase(theta_max + PI),
        theta_max,
    }
}

/// Squeezing and anti-squeezing in dB relative to the vacuum variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub squeezing: f64,
    pub anti_squeezing: f64,
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn levels(vmin: f64, vmax: f64) -> Result<Levels> {
    if !(vmin > 0.0) || !(vmax > 0.0) {
        return Err(Error::Physicality { mode: 0, detail: format!("nonpositive variance ({vmin:.6e}, {vmax:.6e})") });
    }
    Ok(Levels { squeezing: to_db(vmin), anti_squeezing: to_db(vmax) })
}

/// `-+ (20 / ln 10) asinh(sqrt(L))` per mode.
pub fn direct_levels(gains: &[f64]) -> Vec<Levels> {
    gains
        .iter()
        .map(|&l| {
            let r = l.max(0.0).sqrt().asinh();
            let db = 20.0 / LN_10 * r;
            Levels { squeezing: -db, anti_squeezing: db }
        })
        .collect()
}

fn check_truncation(g: &CMat, h: &CMat, second: &[f64], su: &[f64]) -> Result<usize> {
    let n = second.len();
    if g.ncols() != n || h.nrows() != n || h.ncols() != su.len() {
        return Err(Error::Truncation(format!(
            "g is {}x{}, h is {}x{}, {} amplifier and {} interferometer gains",
            g.nrows(),
            g.ncols(),
            h.nrows(),
            h.ncols(),
            n,
            su.len()
        )));
    }
    Ok(n)
}

/// Moments of first-pass output mode `l` reconstructed from the
/// interferometer output: triple sums over amplifier modes `n, n'` and
/// interferometer modes `k`.
pub fn exact_moments(g: &CMat, h: &CMat, second: &[f64], su: &[f64], l: usize) -> Result<ModeMoments> {
    let n = check_truncation(g, h, second, su)?;
    if l >= g.nrows() {
        return Err(Error::Truncation(format!("mode {l} outside the {}-row overlap matrix", g.nrows())));
    }
    let sq: Vec<f64> = second.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let sq1: Vec<f64> = second.iter().map(|&x| (x.max(0.0) + 1.0).sqrt()).collect();
    let mut anom = C64::new(0.0, 0.0);
    let mut n_mean = C64::new(0.0, 0.0);
    for (k, &lk) in su.iter().enumerate() {
        let lk = lk.max(0.0);
        let s = (lk * (lk + 1.0)).sqrt();
        for a in 0..n {
            let ga = g[(l, a)];
            let ha = h[(a, k)];
            for b in 0..n {
                let gb = g[(l, b)];
                let hb = h[(b, k)];
                anom += ga * gb
                    * (ha * hb * (sq1[a] * sq1[b] * s) + ha.conj() * hb.conj() * (sq[a] * sq[b] * s)
                        - ha * hb.conj() * (sq1[a] * sq[b] * (lk + 1.0))
                        - ha.conj() * hb * (sq[a] * sq1[b] * lk));
                n_mean += ga.conj() * gb
                    * (ha.conj() * hb * (sq1[a] * sq1[b] * lk) + ha * hb.conj() * (sq[a] * sq[b] * (lk + 1.0))
                        - ha.conj() * hb.conj() * (sq1[a] * sq[b] * s)
                        - ha * hb * (sq[a] * sq1[b] * s));
            }
        }
    }
    Ok(ModeMoments { n_mean: n_mean.re, anom, mode_index: l })
}

/// High-gain quadrature variance of mode `l` at pump phase `phi` from the
/// phase-free overlaps `g_check` and the gain ratios.
pub fn highgain_variance(g_check: &CMat, second: &[f64], su: &[f64], phi: f64, theta: f64, l: usize) -> f64 {
    (0..second.len().min(su.len()).min(g_check.ncols()))
        .map(|n| {
            let g = g_check[(l, n)];
            let x = g.arg() + 0.5 * (phi - theta);
            let ratio = su[n] / second[n];
            g.norm_sqr() * (x.cos().powi(2) * ratio + x.sin().powi(2) / ratio)
        })
        .sum()
}

/// Indices whose gains fall below `threshold` (high-gain validity flags).
pub fn low_gain_modes(gains: &[f64], threshold: f64) -> Vec<usize> {
    gains.iter().enumerate().filter(|(_, &x)| !(x >= threshold)).map(|(i, _)| i).collect()
}

/// Indices `n < count` violating `L_df^SU < L^(2) < L_bf^SU`.
pub fn ordering_violations(second: &[f64], dark: &[f64], bright: &[f64], count: usize) -> Vec<usize> {
    (0..count.min(second.len()).min(dark.len()).min(bright.len()))
        .filter(|&n| !(dark[n] < second[n] && second[n] < bright[n]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighGainLevels {
    pub dark: Levels,
    pub bright: Levels,
}

/// High-gain levels of mode `l` at the dark and bright fringes. `g` may carry
/// the pump phase; only `|g|` enters.
pub fn highgain_levels(g: &CMat, second: &[f64], su_dark: &[f64], su_bright: &[f64], l: usize) -> HighGainLevels {
    let n = g.ncols().min(second.len()).min(su_dark.len()).min(su_bright.len());
    let sum = |f: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(|m| g[(l, m)].norm_sqr() * f(m)).sum() };
    HighGainLevels {
        dark: Levels {
            squeezing: to_db(sum(&|m| su_dark[m] / second[m])),
            anti_squeezing: to_db(sum(&|m| second[m] / su_dark[m])),
        },
        bright: Levels {
            squeezing: to_db(sum(&|m| second[m] / su_bright[m])),
            anti_squeezing: to_db(sum(&|m| su_bright[m] / second[m])),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingOptions {
    pub analysis: AnalysisOptions,
    /// Rows in the report.
    pub modes: usize,
    pub validity_threshold: f64,
    /// Allowed relative weight of the last ten kept modes in a `g` row.
    pub tail_tolerance: f64,
}

impl SqueezingOptions {
    /// Ten report rows, 40 modes in the overlap sums.
    pub fn new(coupling_first: f64, coupling_second: f64, air_gap: GapChoice) -> Self {
        Self {
            analysis: AnalysisOptions {
                coupling_first,
                coupling_second,
                air_gap,
                truncation: 40,
                decomp: DecompOptions::default(),
            },
            modes: 10,
            validity_threshold: 10.0,
            tail_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRow {
    pub mode: usize,
    pub direct: Levels,
    pub exact: Levels,
    pub highgain_dark: Option<Levels>,
    pub highgain_bright: Option<Levels>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_mean: f64,
    pub anom_re: f64,
    pub anom_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub setup_hash: String,
    pub air_gap: f64,
    pub visibility: f64,
    pub fringe_offset: f64,
    pub phi_bright: f64,
    pub phi_dark: f64,
    pub truncation: usize,
    /// Interferometer modes with `L_df^SU` below the validity threshold.
    pub low_gain_dark: Vec<usize>,
    /// Amplifier modes with `L^(2)` below the validity threshold.
    pub low_gain_second: Vec<usize>,
    pub ordering_violations: Vec<usize>,
    /// Report modes whose `g` row keeps too much weight in the last ten columns.
    pub truncation_warnings: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub rows: Vec<SqueezingRow>,
    pub meta: ReportMeta,
    pub first_gains: Vec<f64>,
    pub second_gains: Vec<f64>,
    pub dark_gains: Vec<f64>,
    pub bright_gains: Vec<f64>,
}

/// 64-bit FNV-1a digest, hex encoded.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn finite_levels(l: Levels) -> Option<Levels> {
    (l.squeezing.is_finite() && l.anti_squeezing.is_finite()).then_some(l)
}

/// Relative weight of the last ten columns of each `g` row.
fn tail_weight(g: &CMat, l: usize) -> f64 {
    let n = g.ncols();
    let total: f64 = (0..n).map(|m| g[(l, m)].norm_sqr()).sum();
    let tail: f64 = (n.saturating_sub(10)..n).map(|m| g[(l, m)].norm_sqr()).sum();
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Full three-way comparison: propagate both passes, pick the air gap,
/// decompose at both fringes, and evaluate every method per mode.
pub fn build_report(setup: &Setup, opts: &SqueezingOptions, schedule: Schedule) -> Result<SqueezingReport> {
    let a = analyze(setup, &opts.analysis, schedule)?;
    let hash = digest(&serde_json::to_vec(&(setup, opts))?);
    report_from_analysis(&a, opts, hash, schedule)
}

/// Evaluate the three methods on an existing analysis.
pub fn report_from_analysis(
    a: &InterferometerAnalysis,
    opts: &SqueezingOptions,
    setup_hash: String,
    schedule: Schedule,
) -> Result<SqueezingReport> {
    let n_keep = opts.analysis.truncation;
    if opts.modes > n_keep {
        return Err(Error::Truncation(format!("{} report modes with truncation {n_keep}", opts.modes)));
    }
    let (first, second, dark, bright) = (&a.first, &a.second, &a.dark, &a.bright);
    let l2 = &second.gains[..n_keep];
    let ldf = &dark.su.gains[..n_keep];
    let lbf = &bright.su.gains[..n_keep];
    let direct = direct_levels(&first.gains[..opts.modes]);
    let modes: Vec<usize> = (0..opts.modes).collect();
    let rows = try_map(schedule, &modes, |&l| -> Result<SqueezingRow> {
        let m = exact_moments(&dark.g, &dark.h, l2, ldf, l)?;
        m.check_physical()?;
        let e = extremal_variances(&m);
        let exact = levels(e.vmin, e.vmax).map_err(|err| match err {
            Error::Physicality { detail, .. } => Error::Physicality { mode: l, detail },
            other => other,
        })?;
        let hg = highgain_levels(&dark.g, l2, ldf, lbf, l);
        Ok(SqueezingRow {
            mode: l,
            direct: direct[l],
            exact,
            highgain_dark: finite_levels(hg.dark),
            highgain_bright: finite_levels(hg.bright),
            theta_min: e.theta_min,
            theta_max: e.theta_max,
            n_mean: m.n_mean,
            anom_re: m.anom.re,
            anom_im: m.anom.im,
        })
    })?;

    let meta = ReportMeta {
        setup_hash,
        air_gap: a.air_gap,
        visibility: a.split.visibility(),
        fringe_offset: a.fringe_offset,
        phi_bright: bright.phi,
        phi_dark: dark.phi,
        truncation: n_keep,
        low_gain_dark: low_gain_modes(&ldf[..opts.modes], opts.validity_threshold),
        low_gain_second: low_gain_modes(&l2[..opts.modes], opts.validity_threshold),
        ordering_violations: ordering_violations(l2, ldf, lbf, opts.modes),
        truncation_warnings: modes.iter().copied().filter(|&l| tail_weight(&dark.g, l) > opts.tail_tolerance).collect(),
    };
    Ok(SqueezingReport {
        rows,
        meta,
        first_gains: first.gains[..n_keep].to_vec(),
        second_gains: l2.to_vec(),
        dark_gains: ldf.to_vec(),
        bright_gains: lbf.to_vec(),
    })
}
