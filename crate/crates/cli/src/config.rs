//! Run configuration: a TOML file whose physical quantities carry explicit
//! unit suffixes, resolved into SI values before any computation starts.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use su11::jointdecomp::DecompOptions;
use su11::lattice::Lattice;
use su11::model::{CouplingModel, Setup};
use su11::physics::{CrystalGeometry, Dispersion, PumpProfile};
use su11::propagator::RkOptions;

use crate::error::CliError;

/// Suffix table of one physical dimension: `(suffix, decimal exponent to SI)`.
type Units = &'static [(&'static str, i32)];

const LENGTH_UNITS: Units = &[("nm", -9), ("um", -6), ("µm", -6), ("mm", -3), ("m", 0)];
const ANGLE_UNITS: Units = &[("urad", -6), ("mrad", -3), ("rad", 0)];
const WAVENUMBER_UNITS: Units = &[("rad/um", 6), ("rad/mm", 3), ("rad/m", 0)];

/// Parse `<number><suffix>` against `units`, preferring the longest matching
/// suffix so that `mrad` is never read as `m` + `rad`.
pub fn parse_quantity(text: &str, units: Units) -> Result<f64, String> {
    let t = text.trim();
    let (suffix, exponent) = units
        .iter()
        .filter(|(s, _)| t.ends_with(s))
        .max_by_key(|(s, _)| s.len())
        .ok_or_else(|| format!("`{t}` lacks a unit suffix (expected one of {})", suffix_list(units)))?;
    let number = &t[..t.len() - suffix.len()];
    if number.is_empty() || number.ends_with(char::is_whitespace) {
        return Err(format!("`{t}`: expected a number directly followed by `{suffix}`"));
    }
    let value: f64 = number.parse().map_err(|_| format!("`{t}`: `{number}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    // Dividing by an exact power of ten keeps `70um` equal to the literal `70e-6`.
    let scale = 10f64.powi(exponent.abs());
    let si = if *exponent < 0 { value / scale } else { value * scale };
    if !si.is_finite() {
        return Err(format!("`{t}` overflows"));
    }
    Ok(si)
}

fn suffix_list(units: Units) -> String {
    units.iter().map(|(s, _)| *s).collect::<Vec<_>>().join(", ")
}

macro_rules! quantity {
    ($name:ident, $units:expr, $what:literal) => {
        /// SI value parsed from a unit-suffixed string.
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl de::Visitor<'_> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                        write!(f, "{} string with unit suffix ({})", $what, suffix_list($units))
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        parse_quantity(v, $units).map($name).map_err(E::custom)
                    }
                }
                d.deserialize_str(V)
            }
        }
    };
}

quantity!(Length, LENGTH_UNITS, "a length");
quantity!(Angle, ANGLE_UNITS, "an angle");
quantity!(Wavenumber, WAVENUMBER_UNITS, "a wavenumber");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    physics: Option<RawPhysics>,
    #[serde(default)]
    lattice: RawLattice,
    #[serde(default)]
    propagator: RawPropagator,
    #[serde(default)]
    jointdecomp: RawDecomp,
    #[serde(default)]
    calibration: RawCalibration,
    #[serde(default)]
    gains: RawGains,
    #[serde(default)]
    single_crystal: RawSingleCrystal,
    #[serde(default)]
    interferometer: RawInterferometer,
    #[serde(default)]
    squeezing: RawSqueezing,
    #[serde(default)]
    asymmetry: RawAsymmetry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    #[serde(default)]
    model: CouplingModel,
    dispersion: Option<RawDispersion>,
    sigma: Option<Length>,
    pump_waist: Option<Length>,
    crystal_length: Option<Length>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawDispersion {
    Preset(String),
    Moduli(RawModuli),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModuli {
    pump: Wavenumber,
    signal: Wavenumber,
    idler: Wavenumber,
    pump_air: Wavenumber,
    signal_air: Wavenumber,
    idler_air: Wavenumber,
    vacuum: Wavenumber,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    points: Option<usize>,
    theta_max: Option<Angle>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagator {
    rtol: Option<f64>,
    atol: Option<f64>,
    max_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecomp {
    degeneracy_tol: Option<f64>,
    reconstruction_tol: Option<f64>,
    structure_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSlope {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    slope: Option<RawSlope>,
    couplings: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    first: Option<f64>,
    second: Option<f64>,
    first_coupling: Option<f64>,
    second_coupling: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSingleCrystal {
    gain: Option<f64>,
    coupling: Option<f64>,
    modes: Option<Vec<usize>>,
    overlap_size: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPhases {
    Keyword(String),
    List(Vec<Angle>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    from: Length,
    to: Length,
    samples: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterferometer {
    air_gap: Option<String>,
    search_min: Option<Length>,
    search_max: Option<Length>,
    search_samples: Option<usize>,
    resolution: Option<Length>,
    sweep: Option<RawSweep>,
    phases: Option<RawPhases>,
    phase_scan_points: Option<usize>,
    truncation: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSqueezing {
    modes: Option<usize>,
    truncation: Option<usize>,
    validity_threshold: Option<f64>,
    tail_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAsymmetry {
    gain: Option<f64>,
    coupling: Option<f64>,
    terms: Option<usize>,
    overlap_size: Option<usize>,
}

/// How dimensionless gains map onto coupling constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeChoice {
    Fixed(f64),
    Calibrate,
}

/// A strength given either as gain (needs the slope) or as coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    Gain(f64),
    Coupling(f64),
}

impl Strength {
    pub fn coupling(self, slope: f64) -> f64 {
        match self {
            Strength::Gain(g) => g / slope,
            Strength::Coupling(c) => c,
        }
    }

    fn needs_slope(self) -> bool {
        matches!(self, Strength::Gain(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AirGapSetting {
    Fixed(f64),
    Optimize { min: f64, max: f64, samples: usize, resolution: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
}

impl Sweep {
    pub fn gaps(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.samples - 1) as f64;
        (0..self.samples).map(|i| self.from + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSetting {
    Fringes,
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicsConfig {
    pub model: CouplingModel,
    pub dispersion_preset: Option<String>,
    pub dispersion: Dispersion,
    pub sigma: f64,
    pub crystal_length: f64,
    pub lattice_points: usize,
    pub theta_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub decomp: DecompOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationConfig {
    pub slope: SlopeChoice,
    pub couplings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleCrystalConfig {
    pub strength: Strength,
    pub modes: Vec<usize>,
    pub overlap_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferometerConfig {
    pub first: Strength,
    pub second: Strength,
    pub air_gap: AirGapSetting,
    pub sweep: Option<Sweep>,
    pub phases: PhaseSetting,
    pub phase_scan_points: usize,
    pub truncation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingConfig {
    pub modes: usize,
    pub truncation: usize,
    pub validity_threshold: f64,
    pub tail_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryConfig {
    pub strength: Strength,
    pub terms: usize,
    pub overlap_size: usize,
}

/// Fully resolved configuration in SI units; echoed in every manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub physics: PhysicsConfig,
    pub calibration: CalibrationConfig,
    pub single_crystal: SingleCrystalConfig,
    pub interferometer: InterferometerConfig,
    pub squeezing: SqueezingConfig,
    pub asymmetry: AsymmetryConfig,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

fn strength(name: &str, gain: Option<f64>, coupling: Option<f64>, default: f64) -> Result<Strength, CliError> {
    let s = match (gain, coupling) {
        (Some(_), Some(_)) => return Err(bad(format!("{name}: give a gain or a coupling, not both"))),
        (Some(g), None) => Strength::Gain(g),
        (None, Some(c)) => Strength::Coupling(c),
        (None, None) => Strength::Gain(default),
    };
    let v = match s {
        Strength::Gain(v) | Strength::Coupling(v) => v,
    };
    if !(v.is_finite() && v >= 0.0) {
        return Err(bad(format!("{name} must be nonnegative and finite, got {v}")));
    }
    Ok(s)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        resolve(raw)
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let p = &self.physics;
        let lattice = Lattice::from_angle(p.lattice_points, p.theta_max, p.dispersion.vacuum, p.dispersion.evanescent_guard())
            .map_err(|e| bad(e.to_string()))?;
        Ok(Setup {
            lattice,
            dispersion: p.dispersion,
            pump: PumpProfile { sigma: p.sigma },
            geometry: CrystalGeometry { length: p.crystal_length },
            rk: RkOptions { rtol: p.rtol, atol: p.atol, max_steps: p.max_steps, ..RkOptions::default() },
            model: p.model,
        })
    }

    /// Whether any configured gain needs the gain-per-coupling slope.
    pub fn needs_slope(&self, command: &str) -> bool {
        match command {
            "single-crystal" => self.single_crystal.strength.needs_slope(),
            "asymmetry" => self.asymmetry.strength.needs_slope(),
            "interferometer" | "sweep-deltaz" | "squeezing" => {
                self.interferometer.first.needs_slope() || self.interferometer.second.needs_slope()
            }
            _ => false,
        }
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, CliError> {
    let ph = raw.physics.ok_or_else(|| bad("missing [physics] section"))?;
    let sigma = match (ph.sigma, ph.pump_waist) {
        (Some(_), Some(_)) => return Err(bad("physics: give sigma or pump_waist, not both")),
        (Some(s), None) => s.0,
        (None, Some(w)) => PumpProfile::from_waist(w.0).sigma,
        (None, None) => return Err(bad("physics: missing pump width (sigma or pump_waist)")),
    };
    positive("physics.sigma", sigma)?;
    let (dispersion_preset, dispersion) = match ph.dispersion {
        None => (Some("bbo-800nm".to_string()), Dispersion::bbo_800nm()),
        Some(RawDispersion::Preset(name)) if name == "bbo-800nm" => (Some(name), Dispersion::bbo_800nm()),
        Some(RawDispersion::Preset(name)) => return Err(bad(format!("unknown dispersion preset `{name}`"))),
        Some(RawDispersion::Moduli(m)) => {
            let d = Dispersion {
                pump: m.pump.0,
                signal: m.signal.0,
                idler: m.idler.0,
                pump_air: m.pump_air.0,
                signal_air: m.signal_air.0,
                idler_air: m.idler_air.0,
                vacuum: m.vacuum.0,
            };
            for (name, v) in [
                ("pump", d.pump),
                ("signal", d.signal),
                ("idler", d.idler),
                ("pump_air", d.pump_air),
                ("signal_air", d.signal_air),
                ("idler_air", d.idler_air),
                ("vacuum", d.vacuum),
            ] {
                positive(&format!("physics.dispersion.{name}"), v)?;
            }
            (None, d)
        }
    };
    let crystal_length = positive("physics.crystal_length", ph.crystal_length.map_or(3e-3, |l| l.0))?;
    let lattice_points = raw.lattice.points.unwrap_or(256);
    if lattice_points < 2 {
        return Err(bad(format!("lattice.points must be at least 2, got {lattice_points}")));
    }
    let theta_max = positive("lattice.theta_max", raw.lattice.theta_max.map_or(0.06, |a| a.0))?;
    let rk = RkOptions::default();
    let dd = DecompOptions::default();
    let decomp = DecompOptions {
        degeneracy_tol: positive("jointdecomp.degeneracy_tol", raw.jointdecomp.degeneracy_tol.unwrap_or(dd.degeneracy_tol))?,
        reconstruction_tol: positive(
            "jointdecomp.reconstruction_tol",
            raw.jointdecomp.reconstruction_tol.unwrap_or(dd.reconstruction_tol),
        )?,
        structure_tol: positive("jointdecomp.structure_tol", raw.jointdecomp.structure_tol.unwrap_or(dd.structure_tol))?,
    };
    let physics = PhysicsConfig {
        model: ph.model,
        dispersion_preset,
        dispersion,
        sigma,
        crystal_length,
        lattice_points,
        theta_max,
        rtol: positive("propagator.rtol", raw.propagator.rtol.unwrap_or(rk.rtol))?,
        atol: positive("propagator.atol", raw.propagator.atol.unwrap_or(rk.atol))?,
        max_steps: raw.propagator.max_steps.unwrap_or(rk.max_steps),
        decomp,
    };

    let slope = match raw.calibration.slope {
        None => SlopeChoice::Calibrate,
        Some(RawSlope::Value(v)) => SlopeChoice::Fixed(positive("calibration.slope", v)?),
        Some(RawSlope::Keyword(k)) if k == "calibrate" => SlopeChoice::Calibrate,
        Some(RawSlope::Keyword(k)) => return Err(bad(format!("calibration.slope: expected a number or \"calibrate\", got `{k}`"))),
    };
    let couplings = raw.calibration.couplings.unwrap_or_else(|| vec![0.005, 0.01, 0.02, 0.04, 0.06]);
    if couplings.len() < 2 {
        return Err(bad("calibration.couplings needs at least two values"));
    }
    for &c in &couplings {
        positive("calibration.couplings entry", c)?;
    }
    let calibration = CalibrationConfig { slope, couplings };

    let sc = raw.single_crystal;
    let single_crystal = SingleCrystalConfig {
        strength: strength("single_crystal", sc.gain, sc.coupling, 8.0)?,
        modes: sc.modes.unwrap_or_else(|| vec![0, 1, 2]),
        overlap_size: sc.overlap_size.unwrap_or(20.min(lattice_points)),
    };
    if let Some(&m) = single_crystal.modes.iter().find(|&&m| m >= lattice_points) {
        return Err(bad(format!("single_crystal.modes: mode {m} exceeds the {lattice_points}-point lattice")));
    }
    if single_crystal.overlap_size == 0 || single_crystal.overlap_size > lattice_points {
        return Err(bad("single_crystal.overlap_size must lie in 1..=lattice.points"));
    }

    let rg = raw.gains;
    let it = raw.interferometer;
    let air_gap = match it.air_gap.as_deref() {
        None | Some("optimize") => {
            let min = it.search_min.map_or(0.0, |l| l.0);
            let max = it.search_max.map_or(1e-3, |l| l.0);
            let samples = it.search_samples.unwrap_or(5);
            let resolution = positive("interferometer.resolution", it.resolution.map_or(20e-6, |l| l.0))?;
            if !(max > min) || min < 0.0 {
                return Err(bad(format!("interferometer: search range [{min}, {max}] m is not a proper nonnegative range")));
            }
            if samples < 3 {
                return Err(bad("interferometer.search_samples must be at least 3"));
            }
            AirGapSetting::Optimize { min, max, samples, resolution }
        }
        Some(text) => {
            if it.search_min.is_some() || it.search_max.is_some() || it.search_samples.is_some() || it.resolution.is_some() {
                return Err(bad("interferometer: search_* settings only apply with air_gap = \"optimize\""));
            }
            let gap = parse_quantity(text, LENGTH_UNITS).map_err(|e| bad(format!("interferometer.air_gap: {e}")))?;
            if gap < 0.0 {
                return Err(bad("interferometer.air_gap must be nonnegative"));
            }
            AirGapSetting::Fixed(gap)
        }
    };
    let sweep = match it.sweep {
        None => None,
        Some(s) => {
            if s.samples < 2 || !(s.to.0 > s.from.0) || s.from.0 < 0.0 {
                return Err(bad("interferometer.sweep needs from < to, from >= 0 and at least 2 samples"));
            }
            Some(Sweep { from: s.from.0, to: s.to.0, samples: s.samples })
        }
    };
    let phases = match it.phases {
        None => PhaseSetting::Fringes,
        Some(RawPhases::Keyword(k)) if k == "fringes" => PhaseSetting::Fringes,
        Some(RawPhases::Keyword(k)) => return Err(bad(format!("interferometer.phases: expected \"fringes\" or a list, got `{k}`"))),
        Some(RawPhases::List(l)) => PhaseSetting::List(l.into_iter().map(|a| a.0).collect()),
    };
    let truncation = it.truncation.unwrap_or(40.min(lattice_points));
    if truncation == 0 || truncation > lattice_points {
        return Err(bad("interferometer.truncation must lie in 1..=lattice.points"));
    }
    let phase_scan_points = it.phase_scan_points.unwrap_or(181);
    if phase_scan_points < 2 {
        return Err(bad("interferometer.phase_scan_points must be at least 2"));
    }
    let interferometer = InterferometerConfig {
        first: strength("gains.first", rg.first, rg.first_coupling, 1.0)?,
        second: strength("gains.second", rg.second, rg.second_coupling, 4.0)?,
        air_gap,
        sweep,
        phases,
        phase_scan_points,
        truncation,
    };

    let sq = raw.squeezing;
    let squeezing = SqueezingConfig {
        modes: sq.modes.unwrap_or(10.min(lattice_points)),
        truncation: sq.truncation.unwrap_or(40.min(lattice_points)),
        validity_threshold: sq.validity_threshold.unwrap_or(10.0),
        tail_tolerance: sq.tail_tolerance.unwrap_or(1e-4),
    };
    if squeezing.truncation == 0 || squeezing.truncation > lattice_points || squeezing.modes > squeezing.truncation {
        return Err(bad("squeezing: need modes <= truncation <= lattice.points"));
    }

    let asy = raw.asymmetry;
    let asymmetry = AsymmetryConfig {
        strength: strength("asymmetry", asy.gain, asy.coupling, 8.0)?,
        terms: asy.terms.unwrap_or(su11::asymmetry::MAX_TERMS),
        overlap_size: asy.overlap_size.unwrap_or(20.min(lattice_points)),
    };
    if asymmetry.terms == 0 || asymmetry.terms > su11::asymmetry::MAX_TERMS {
        return Err(bad(format!("asymmetry.terms must lie in 1..={}", su11::asymmetry::MAX_TERMS)));
    }
    if asymmetry.overlap_size == 0 || asymmetry.overlap_size > lattice_points {
        return Err(bad("asymmetry.overlap_size must lie in 1..=lattice.points"));
    }

    Ok(RunConfig { physics, calibration, single_crystal, interferometer, squeezing, asymmetry })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_scale_to_si() {
        assert_eq!(parse_quantity("70um", LENGTH_UNITS).unwrap(), 70e-6);
        assert_eq!(parse_quantity("3mm", LENGTH_UNITS).unwrap(), 3e-3);
        assert_eq!(parse_quantity("60mrad", ANGLE_UNITS).unwrap(), 0.06);
        assert_eq!(parse_quantity("-1.5rad", ANGLE_UNITS).unwrap(), -1.5);
        assert_eq!(parse_quantity("2rad/um", WAVENUMBER_UNITS).unwrap(), 2e6);
    }

    #[test]
    fn rejects_missing_or_foreign_suffixes() {
        assert!(parse_quantity("70", LENGTH_UNITS).is_err());
        assert!(parse_quantity("70 um", LENGTH_UNITS).is_err());
        assert!(parse_quantity("70mrad", LENGTH_UNITS).is_err());
        assert!(parse_quantity("um", LENGTH_UNITS).is_err());
        assert!(parse_quantity("1e400mm", LENGTH_UNITS).is_err());
    }

    #[test]
    fn missing_pump_width_is_a_config_error() {
        let err = RunConfig::from_toml("[physics]\ncrystal_length = \"3mm\"\n").unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("sigma")), "{err}");
    }

    #[test]
    fn waist_converts_to_sigma() {
        let c = RunConfig::from_toml("[physics]\npump_waist = \"70um\"\n").unwrap();
        assert!((c.physics.sigma - 70e-6 / 2f64.sqrt()).abs() < 1e-18);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[physics]\nsigma = \"10um\"\nwaist = \"1um\"\n").is_err());
        assert!(RunConfig::from_toml("[physics]\nsigma = \"10um\"\n[extra]\n").is_err());
    }

    #[test]
    fn explicit_moduli_and_keywords() {
        let c = RunConfig::from_toml(
            "[physics]\nsigma = \"10um\"\n[physics.dispersion]\npump = \"2rad/um\"\nsignal = \"1rad/um\"\nidler = \"1rad/um\"\n\
             pump_air = \"2rad/um\"\nsignal_air = \"1rad/um\"\nidler_air = \"1rad/um\"\nvacuum = \"1rad/um\"\n\
             [calibration]\nslope = 3.5\n[interferometer]\nair_gap = \"500um\"\nphases = [\"0rad\", \"1500mrad\"]\n",
        )
        .unwrap();
        assert_eq!(c.physics.dispersion.pump, 2e6);
        assert_eq!(c.calibration.slope, SlopeChoice::Fixed(3.5));
        assert_eq!(c.interferometer.air_gap, AirGapSetting::Fixed(500e-6));
        assert_eq!(c.interferometer.phases, PhaseSetting::List(vec![0.0, 1.5]));
    }
}
