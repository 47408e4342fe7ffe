//! Pipelines behind each subcommand.

use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use su11::asymmetry::{asymmetry_metric, fit_mode_comparison, modulus_decomposition, separable_phase_fit, SUPPORT_FRACTION};
use su11::calibration::{calibrate, CalibrationFit};
use su11::exec::Schedule;
use su11::interferometer::{analyze, visibility_scan, AnalysisOptions, GapChoice, GapSample, InterferometerAnalysis};
use su11::jointdecomp::{joint_decompose, schmidt_gains, ModeFamily};
use su11::linalg::CMat;
use su11::model::Setup;
use su11::overlaps::c_matrix;
use su11::physics::angle_of;
use su11::squeezing::{build_report, SqueezingOptions};

use crate::config::{AirGapSetting, PhaseSetting, RunConfig, SlopeChoice};
use crate::error::CliError;
use crate::output::{matrix_json, modulus, phase, Cell, OutDir, Table};
use crate::svg::{bar_chart, cell_plot, contour_plot, line_plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Calibrate,
    SingleCrystal,
    Interferometer,
    SweepDeltaz,
    Squeezing,
    Asymmetry,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Calibrate => "calibrate",
            Pipeline::SingleCrystal => "single-crystal",
            Pipeline::Interferometer => "interferometer",
            Pipeline::SweepDeltaz => "sweep-deltaz",
            Pipeline::Squeezing => "squeezing",
            Pipeline::Asymmetry => "asymmetry",
        }
    }
}

/// Gain-per-coupling slope used by a run and where it came from.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSlope {
    pub value: f64,
    pub source: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub workers: usize,
    pub config: &'a RunConfig,
    pub slope: Option<ResolvedSlope>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

/// Everything a pipeline needs besides its own settings.
pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub setup: Setup,
    pub schedule: Schedule,
    pub out: OutDir,
    pub warnings: Vec<String>,
    pub slope: Option<ResolvedSlope>,
}

impl Run<'_> {
    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    fn slope(&self) -> f64 {
        self.slope.as_ref().map_or(f64::NAN, |s| s.value)
    }

    fn calibration_fit(&self) -> Result<CalibrationFit, CliError> {
        Ok(calibrate(&self.setup, &self.config.calibration.couplings, self.schedule)?)
    }

    fn resolve_slope(&mut self, pipeline: Pipeline) -> Result<(), CliError> {
        if !self.config.needs_slope(pipeline.name()) {
            return Ok(());
        }
        self.slope = Some(match self.config.calibration.slope {
            SlopeChoice::Fixed(v) => ResolvedSlope { value: v, source: "config" },
            SlopeChoice::Calibrate => ResolvedSlope { value: self.calibration_fit()?.slope, source: "calibrated" },
        });
        Ok(())
    }

    fn theta_mrad(&self) -> Vec<f64> {
        let k = self.setup.dispersion.vacuum;
        self.setup.lattice.q().iter().map(|&q| 1e3 * angle_of(q, k)).collect()
    }
}

pub fn execute(run: &mut Run<'_>, pipeline: Pipeline) -> Result<(), CliError> {
    run.resolve_slope(pipeline)?;
    match pipeline {
        Pipeline::Calibrate => cmd_calibrate(run),
        Pipeline::SingleCrystal => cmd_single_crystal(run),
        Pipeline::Interferometer => cmd_interferometer(run, false),
        Pipeline::SweepDeltaz => cmd_interferometer(run, true),
        Pipeline::Squeezing => cmd_squeezing(run),
        Pipeline::Asymmetry => cmd_asymmetry(run),
    }
}

fn cmd_calibrate(run: &mut Run<'_>) -> Result<(), CliError> {
    let fit = run.calibration_fit()?;
    run.slope = Some(ResolvedSlope { value: fit.slope, source: "calibrated" });
    let mut t = Table::new(&["coupling", "gain", "collinear_photons", "model"]);
    for s in &fit.samples {
        t.push(vec![s.coupling.into(), (fit.slope * s.coupling).into(), s.collinear_photons.into(), fit.model(s.coupling).into()]);
    }
    run.out.csv("gain_curve.csv", &t)?;
    run.out.json("fit.json", &json!({
        "slope": fit.slope,
        "amplitude": fit.amplitude,
        "log_rms": fit.log_rms,
        "iterations": fit.iterations,
    }))?;
    let data = Series {
        name: "propagated".into(),
        points: fit.samples.iter().map(|s| (s.coupling, s.collinear_photons.ln())).collect(),
    };
    let (lo, hi) = fit.samples.iter().fold((f64::INFINITY, 0f64), |(a, b), s| (a.min(s.coupling), b.max(s.coupling)));
    let model = Series {
        name: "B sinh^2(A x)".into(),
        points: (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).map(|c| (c, fit.model(c).ln())).collect(),
    };
    run.out.text("gain_curve.svg", &line_plot("collinear photon number", "coupling", "ln N0", &[data, model]))?;
    Ok(())
}

/// Index range where any of `traces` exceeds `SUPPORT_FRACTION` of its peak.
fn support(traces: &[&[f64]]) -> (usize, usize) {
    let n = traces.first().map_or(0, |t| t.len());
    let inside = |j: usize| {
        traces.iter().any(|t| {
            let peak = t.iter().copied().fold(0.0, f64::max);
            t[j] > SUPPORT_FRACTION * peak
        })
    };
    let lo = (0..n).find(|&j| inside(j)).unwrap_or(0);
    let hi = (0..n).rev().find(|&j| inside(j)).unwrap_or(n.saturating_sub(1));
    (lo, hi)
}

fn off_diagonal_mass(c: &CMat) -> f64 {
    let mut total = 0.0;
    let mut off = 0.0;
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            let v = c[(i, j)].norm_sqr();
            total += v;
            if i != j {
                off += v;
            }
        }
    }
    if total > 0.0 {
        off / total
    } else {
        0.0
    }
}

fn cmd_single_crystal(run: &mut Run<'_>) -> Result<(), CliError> {
    let cfg = &run.config.single_crystal;
    let coupling = cfg.strength.coupling(run.slope());
    let pair = run.setup.first_pass(coupling)?;
    let basis = joint_decompose(&pair, &run.config.physics.decomp)?;
    let theta = run.theta_mrad();

    let mut modes = Table::new(&["mode", "theta_rad", "psi_abs", "psi_arg", "u_abs", "u_arg"]);
    let mut plots = Vec::new();
    for &n in &cfg.modes {
        let psi = basis.mode_function(n, ModeFamily::Input);
        let u = basis.mode_function(n, ModeFamily::Output);
        for j in 0..theta.len() {
            modes.push(vec![
                n.into(),
                (1e-3 * theta[j]).into(),
                psi[j].norm().into(),
                psi[j].arg().into(),
                u[j].norm().into(),
                u[j].arg().into(),
            ]);
        }
        let pa: Vec<f64> = psi.iter().map(|z| z.norm()).collect();
        let ua: Vec<f64> = u.iter().map(|z| z.norm()).collect();
        let (lo, hi) = support(&[&pa, &ua]);
        let pick = |f: &dyn Fn(usize) -> f64| (lo..=hi).map(|j| (theta[j], f(j))).collect::<Vec<_>>();
        let abs_plot = line_plot(
            &format!("mode {n}: modulus"),
            "theta (mrad)",
            "|mode|",
            &[Series { name: "|psi|".into(), points: pick(&|j| pa[j]) }, Series { name: "|u|".into(), points: pick(&|j| ua[j]) }],
        );
        let arg_plot = line_plot(
            &format!("mode {n}: phase"),
            "theta (mrad)",
            "arg (rad)",
            &[
                Series { name: "arg psi".into(), points: pick(&|j| psi[j].arg()) },
                Series { name: "arg u".into(), points: pick(&|j| u[j].arg()) },
            ],
        );
        plots.push((format!("mode_{n}_abs.svg"), abs_plot));
        plots.push((format!("mode_{n}_arg.svg"), arg_plot));
    }
    if !cfg.modes.is_empty() {
        run.out.csv("modes.csv", &modes)?;
    }
    let mut lambdas = Table::new(&["mode", "lambda", "lambda_tilde"]);
    for (i, (l, lt)) in basis.gains.iter().zip(&basis.gains_tilde).enumerate() {
        lambdas.push(vec![i.into(), (*l).into(), (*lt).into()]);
    }
    run.out.csv("lambdas.csv", &lambdas)?;

    let c = c_matrix(&basis, cfg.overlap_size)?;
    let diagonal: Vec<f64> = (0..c.nrows()).map(|i| c[(i, i)].norm()).collect();
    let residuals = pair.symplectic_residuals();
    run.out.json("c_matrix.json", &json!({
        "gain": coupling * run.slope(),
        "coupling": coupling,
        "size": cfg.overlap_size,
        "diagonal_modulus": diagonal,
        "off_diagonal_mass": off_diagonal_mass(&c),
        "symplectic_residuals": [residuals.gram_rows, residuals.sym_rows, residuals.gram_cols, residuals.sym_cols],
        "decomposition_residuals": basis.residuals,
        "matrix": matrix_json(&c),
    }))?;
    for (name, body) in plots {
        run.out.text(&name, &body)?;
    }
    let top: Vec<(f64, f64)> =
        basis.gains.iter().take(cfg.overlap_size).enumerate().map(|(i, l)| (i as f64, l.max(f64::MIN_POSITIVE).log10())).collect();
    run.out.text("lambdas.svg", &line_plot("Schmidt gains", "mode", "log10 lambda", &[Series { name: "lambda".into(), points: top }]))?;
    run.out.text("c_matrix.svg", &cell_plot("|c| with phase handles", &modulus(&c), Some(&phase(&c))))?;
    Ok(())
}

fn analysis_options(run: &Run<'_>, truncation: usize, sweep_mode: bool) -> Result<AnalysisOptions, CliError> {
    let it = &run.config.interferometer;
    let air_gap = if sweep_mode {
        let sw = it.sweep.as_ref().ok_or_else(|| CliError::Config("sweep-deltaz needs [interferometer.sweep]".into()))?;
        if sw.samples < 3 {
            return Err(CliError::Config("sweep-deltaz needs at least 3 sweep samples".into()));
        }
        let resolution = match it.air_gap {
            AirGapSetting::Optimize { resolution, .. } => resolution,
            AirGapSetting::Fixed(_) => 20e-6,
        };
        GapChoice::Optimize { range: (sw.from, sw.to), samples: sw.samples, resolution }
    } else {
        match it.air_gap {
            AirGapSetting::Fixed(g) => GapChoice::Fixed(g),
            AirGapSetting::Optimize { min, max, samples, resolution } => GapChoice::Optimize { range: (min, max), samples, resolution },
        }
    };
    let slope = run.slope();
    Ok(AnalysisOptions {
        coupling_first: it.first.coupling(slope),
        coupling_second: it.second.coupling(slope),
        air_gap,
        truncation,
        decomp: run.config.physics.decomp,
    })
}

fn fringe_matrices(a: &InterferometerAnalysis, pick: fn(&su11::interferometer::FringeData) -> &CMat) -> serde_json::Value {
    json!({
        "truncation": a.dark.g.nrows(),
        "dark": { "phi": a.dark.phi, "matrix": matrix_json(pick(&a.dark)) },
        "bright": { "phi": a.bright.phi, "matrix": matrix_json(pick(&a.bright)) },
    })
}

fn cmd_interferometer(run: &mut Run<'_>, sweep_mode: bool) -> Result<(), CliError> {
    let it = run.config.interferometer.clone();
    let opts = analysis_options(run, it.truncation, sweep_mode)?;
    let a = analyze(&run.setup, &opts, run.schedule)?;

    let mut samples: Vec<GapSample> = a.search.as_ref().map(|s| s.all_samples()).unwrap_or_default();
    let mut boundary = a.search.as_ref().is_some_and(|s| s.on_boundary);
    if let (false, Some(sw)) = (sweep_mode, &it.sweep) {
        let scan = visibility_scan(&run.setup, opts.coupling_second, &a.first_pair, &sw.gaps(), run.schedule)?;
        let k = scan.iter().enumerate().max_by(|x, y| x.1.visibility.total_cmp(&y.1.visibility)).map_or(0, |(i, _)| i);
        boundary |= k == 0 || k + 1 == scan.len();
        samples.extend(scan);
    }
    if samples.is_empty() {
        samples.push(GapSample { air_gap: a.air_gap, visibility: a.split.visibility(), fringe_offset: a.fringe_offset });
    }
    samples.sort_by(|x, y| x.air_gap.total_cmp(&y.air_gap));
    samples.dedup_by(|x, y| x.air_gap == y.air_gap);
    if boundary {
        run.warn("visibility maximum lies on the boundary of the air-gap range; the optimum may be outside it".into());
    }

    let mut vis = Table::new(&["air_gap_m", "visibility_percent", "fringe_offset_rad"]);
    for s in &samples {
        vis.push(vec![s.air_gap.into(), s.visibility.into(), s.fringe_offset.into()]);
    }
    run.out.csv("vis_curve.csv", &vis)?;

    let n_phi = it.phase_scan_points;
    let phis: Vec<f64> = (0..n_phi).map(|i| -PI + 2.0 * PI * i as f64 / (n_phi - 1) as f64).collect();
    let mut scan = Table::new(&["phi_rad", "total_intensity"]);
    let intensities: Vec<f64> = phis.iter().map(|&p| a.split.total_intensity(p)).collect();
    for (p, v) in phis.iter().zip(&intensities) {
        scan.push(vec![(*p).into(), (*v).into()]);
    }
    run.out.csv("phase_scan.csv", &scan)?;

    let v_max = samples.iter().map(|s| s.visibility).fold(f64::NEG_INFINITY, f64::max);
    run.out.json("fringe.json", &json!({
        "fringe_offset": a.fringe_offset,
        "fringe_offset_over_pi": a.fringe_offset / PI,
        "phi_bright": a.bright.phi,
        "phi_dark": a.dark.phi,
        "visibility": a.split.visibility(),
        "v_max": v_max,
        "air_gap": a.air_gap,
        "air_gap_on_boundary": boundary,
        "intensity_bright": a.split.total_intensity(a.bright.phi),
        "intensity_dark": a.split.total_intensity(a.dark.phi),
        "coupling_first": opts.coupling_first,
        "coupling_second": opts.coupling_second,
    }))?;
    run.out.json("g_matrix.json", &fringe_matrices(&a, |f| &f.g))?;
    run.out.json("h_matrix.json", &fringe_matrices(&a, |f| &f.h))?;

    let mut spectra = Table::new(&["mode", "lambda_first", "lambda_second", "lambda_dark", "lambda_bright"]);
    for m in 0..it.truncation {
        spectra.push(vec![
            m.into(),
            a.first.gains[m].into(),
            a.second.gains[m].into(),
            a.dark.su.gains[m].into(),
            a.bright.su.gains[m].into(),
        ]);
    }
    run.out.csv("spectra.csv", &spectra)?;
    if let PhaseSetting::List(list) = &it.phases {
        let gains = su11::exec::try_map(run.schedule, list, |&p| schmidt_gains(&a.split.pair_at(p)?))?;
        let mut t = Table::new(&["phi_rad", "mode", "lambda"]);
        for (p, g) in list.iter().zip(&gains) {
            for (m, l) in g.iter().take(it.truncation).enumerate() {
                t.push(vec![(*p).into(), m.into(), (*l).into()]);
            }
        }
        run.out.csv("phase_spectra.csv", &t)?;
    }

    let vis_points: Vec<(f64, f64)> = samples.iter().map(|s| (1e6 * s.air_gap, s.visibility)).collect();
    run.out.text("vis_curve.svg", &line_plot("fringe visibility", "air gap (um)", "visibility (%)", &[Series { name: "v".into(), points: vis_points }]))?;
    let scan_points: Vec<(f64, f64)> = phis.iter().zip(&intensities).map(|(p, v)| (*p, *v)).collect();
    run.out.text("phase_scan.svg", &line_plot("total intensity", "phi (rad)", "photons", &[Series { name: "N".into(), points: scan_points }]))?;
    for (name, f) in [("dark", &a.dark), ("bright", &a.bright)] {
        run.out.text(&format!("g_{name}.svg"), &cell_plot(&format!("|g| at the {name} fringe"), &modulus(&f.g), Some(&phase(&f.g))))?;
        run.out.text(&format!("h_{name}.svg"), &cell_plot(&format!("|h| at the {name} fringe"), &modulus(&f.h), Some(&phase(&f.h))))?;
    }
    let log_series = |name: &str, g: &[f64]| Series {
        name: name.into(),
        points: g.iter().take(it.truncation).enumerate().map(|(i, l)| (i as f64, l.max(f64::MIN_POSITIVE).log10())).collect(),
    };
    run.out.text(
        "spectra.svg",
        &line_plot(
            "Schmidt gains",
            "mode",
            "log10 lambda",
            &[
                log_series("second pass", &a.second.gains),
                log_series("dark fringe", &a.dark.su.gains),
                log_series("bright fringe", &a.bright.su.gains),
            ],
        ),
    )?;
    Ok(())
}

fn cmd_squeezing(run: &mut Run<'_>) -> Result<(), CliError> {
    let sq = run.config.squeezing.clone();
    let opts = SqueezingOptions {
        analysis: analysis_options(run, sq.truncation, false)?,
        modes: sq.modes,
        validity_threshold: sq.validity_threshold,
        tail_tolerance: sq.tail_tolerance,
    };
    let report = build_report(&run.setup, &opts, run.schedule)?;
    if !report.meta.truncation_warnings.is_empty() {
        run.warn(format!("overlap rows of modes {:?} keep weight near the truncation edge", report.meta.truncation_warnings));
    }
    let mut t = Table::new(&[
        "mode",
        "direct_s_db",
        "direct_as_db",
        "exact_s_db",
        "exact_as_db",
        "highgain_dark_s_db",
        "highgain_dark_as_db",
        "highgain_bright_s_db",
        "highgain_bright_as_db",
        "theta_min",
        "theta_max",
        "n_mean",
        "anom_re",
        "anom_im",
    ]);
    for r in &report.rows {
        let hg = |l: Option<su11::squeezing::Levels>| (l.map(|l| l.squeezing), l.map(|l| l.anti_squeezing));
        let (hds, hda) = hg(r.highgain_dark);
        let (hbs, hba) = hg(r.highgain_bright);
        t.push(vec![
            r.mode.into(),
            r.direct.squeezing.into(),
            r.direct.anti_squeezing.into(),
            r.exact.squeezing.into(),
            r.exact.anti_squeezing.into(),
            Cell::from(hds),
            Cell::from(hda),
            Cell::from(hbs),
            Cell::from(hba),
            r.theta_min.into(),
            r.theta_max.into(),
            r.n_mean.into(),
            r.anom_re.into(),
            r.anom_im.into(),
        ]);
    }
    run.out.csv("squeezing.csv", &t)?;
    run.out.json("squeezing.json", &report)?;
    let cats: Vec<String> = report.rows.iter().map(|r| r.mode.to_string()).collect();
    let col = |f: &dyn Fn(&su11::squeezing::SqueezingRow) -> f64| report.rows.iter().map(f).collect::<Vec<f64>>();
    let nan = f64::NAN;
    let groups = vec![
        ("direct S".to_string(), col(&|r| r.direct.squeezing)),
        ("exact S".to_string(), col(&|r| r.exact.squeezing)),
        ("high-gain S".to_string(), col(&|r| r.highgain_dark.map_or(nan, |l| l.squeezing))),
        ("direct AS".to_string(), col(&|r| r.direct.anti_squeezing)),
        ("exact AS".to_string(), col(&|r| r.exact.anti_squeezing)),
        ("high-gain AS".to_string(), col(&|r| r.highgain_dark.map_or(nan, |l| l.anti_squeezing))),
    ];
    run.out.text("squeezing.svg", &bar_chart("squeezing per mode (dark fringe)", "dB", &cats, &groups))?;
    Ok(())
}

fn cmd_asymmetry(run: &mut Run<'_>) -> Result<(), CliError> {
    let cfg = run.config.asymmetry.clone();
    let coupling = cfg.strength.coupling(run.slope());
    let pair = run.setup.first_pass(coupling)?;
    let b = pair.b_kernel();
    let metric = asymmetry_metric(&b);
    let fit = separable_phase_fit(&b, &run.setup.lattice, cfg.terms)?;
    let abs = modulus_decomposition(&pair)?;
    let exact = joint_decompose(&pair, &run.config.physics.decomp)?;
    let cmp = fit_mode_comparison(&abs, &fit, &exact, cfg.overlap_size)?;
    let c_abs = abs.c_matrix(cfg.overlap_size)?;

    run.out.json("asymmetry.json", &json!({
        "coupling": coupling,
        "gain": coupling * run.slope(),
        "metric": metric,
    }))?;
    let (a1, a2) = fit.in_pi_rad_um();
    run.out.json("phase_fit.json", &json!({
        "units": "pi rad um^(2(j-1))",
        "output_coefficients": a1,
        "input_coefficients": a2,
        "output_coefficients_si": fit.a1,
        "input_coefficients_si": fit.a2,
        "residual_rad": fit.residual,
        "support_points": fit.support_points,
        "terms": fit.terms,
    }))?;
    run.out.json("c_abs.json", &json!({ "size": cfg.overlap_size, "matrix": matrix_json(&c_abs) }))?;
    run.out.json("c_fit.json", &json!({
        "size": cfg.overlap_size,
        "correlation_with_exact": cmp.correlation,
        "matrix": matrix_json(&cmp.c_fit),
        "exact": matrix_json(&cmp.c_exact),
    }))?;

    let theta = run.theta_mrad();
    let peak = (0..b.nrows()).flat_map(|j| (0..b.ncols()).map(move |k| (j, k))).map(|(j, k)| b[(j, k)].norm()).fold(0.0, f64::max);
    let field: Vec<Vec<f64>> = (0..b.nrows()).map(|j| (0..b.ncols()).map(|k| b[(j, k)].norm() / peak.max(f64::MIN_POSITIVE)).collect()).collect();
    let levels = [("1/e".to_string(), (-1f64).exp()), ("1/10".to_string(), 0.1), ("1/1000".to_string(), 1e-3)];
    run.out.text("b_modulus.svg", &contour_plot("|B| contours", "theta_i (mrad)", "theta_s (mrad)", &theta, &theta, &field, &levels))?;
    run.out.text("c_abs.svg", &cell_plot("|c| of the modulus modes", &modulus(&c_abs), None))?;
    run.out.text("c_fit.svg", &cell_plot("|c| with fitted phases", &modulus(&cmp.c_fit), Some(&phase(&cmp.c_fit))))?;
    run.out.text("c_exact.svg", &cell_plot("|c| of the exact modes", &modulus(&cmp.c_exact), Some(&phase(&cmp.c_exact))))?;
    Ok(())
}
