//! Scenario configs, figure-style sweeps, and the command-line interface.
//!
//! A [`ScenarioConfig`] is a flat JSON document: physical parameters under
//! their field names (powers also accepted in dBm through `_dbm` keys,
//! ratios in dB through `_db` keys), plus optional `geometry`, `sweep`,
//! `mc`, and `output` sections. Unknown keys are rejected rather than
//! ignored, so typos cannot silently fall back to defaults.
//!
//! [`run_sweep`] evaluates one scheme bundle per axis value and
//! [`write_output`] serializes the rows as CSV or JSON. Rows are computed in
//! parallel but emitted in axis order, and every Monte Carlo column draws
//! from per-sample counter streams, so output bytes depend only on the
//! config and seed — never on the worker count.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::allocation::{
    allocate_search, optimal_alpha, optimal_reflection_with, power_regime, thresholds,
    PowerRegime,
};
use crate::capacity::{approx_capacity, approx_terms, mc_ergodic_capacity_with};
use crate::channel::{default_geometries, SubSurfaceGeometry};
use crate::params::{
    affordable_count, db_to_linear, dbm_to_watt, AlphaDbConvention, Allocation, ArrayGeometry,
    DbKind, RicianFactor, SystemParams,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

/// Sweep axis whitelist. Each axis fixes how a row's value is applied to
/// the base parameters before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Deployment budget `W_0`; full scheme comparison per value.
    Budget,
    /// Fraction of the budget spent on active elements; evaluates the fixed
    /// split `(floor(rho W_0/W_act), floor((1-rho) W_0/W_pas))`.
    Rho,
    /// Rician factor of both links, dB.
    RicianDb,
    /// Amplification power budget, dBm.
    PIrsDbm,
    /// Active/passive cost ratio; sets `W_act = value * W_pas`.
    CostRatio,
    /// Element count `N` of the fixed allocation `(N, N)`, budget ignored;
    /// approximation-vs-Monte-Carlo comparison.
    NElements,
}

impl SweepAxis {
    /// Stable axis name used in config files and output rows.
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Budget => "budget",
            SweepAxis::Rho => "rho",
            SweepAxis::RicianDb => "rician_db",
            SweepAxis::PIrsDbm => "p_irs_dbm",
            SweepAxis::CostRatio => "cost_ratio",
            SweepAxis::NElements => "n_elements",
        }
    }

    fn from_name(name: &str) -> Result<SweepAxis> {
        Ok(match name {
            "budget" => SweepAxis::Budget,
            "rho" => SweepAxis::Rho,
            "rician_db" => SweepAxis::RicianDb,
            "p_irs_dbm" => SweepAxis::PIrsDbm,
            "cost_ratio" => SweepAxis::CostRatio,
            "n_elements" => SweepAxis::NElements,
            other => {
                return Err(Error::UnknownAxis {
                    axis: other.to_string(),
                })
            }
        })
    }
}

/// Axis plus the values to sweep it over.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Which parameter the sweep varies.
    pub axis: SweepAxis,
    /// Axis values, one output row each, emitted in this order.
    pub values: Vec<f64>,
}

/// Monte Carlo settings; `n_samples = 0` disables the MC columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    /// Fading draws per sweep point.
    pub n_samples: u64,
    /// Base seed of the per-sample counter streams.
    pub seed: u64,
}

/// Output format of the sweep rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Header row plus one comma-separated line per sweep point.
    Csv,
    /// Pretty-printed JSON array of row objects.
    Json,
}

/// Where and how sweep rows are written.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Target file; standard output when absent.
    pub path: Option<PathBuf>,
    /// Serialization format.
    pub format: OutputFormat,
}

/// Optional overrides of the default sub-surface geometry (quarter-wave
/// spacing, scenario angles). Applied to both sub-surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeometryOverrides {
    /// Element spacing `d_I`, meters.
    pub elem_spacing: Option<f64>,
    /// Azimuth angle of arrival, radians in [0, pi].
    pub azimuth_aoa: Option<f64>,
    /// Elevation angle of arrival, radians in [0, pi].
    pub elevation_aoa: Option<f64>,
    /// Azimuth angle of departure, radians in [0, pi].
    pub azimuth_aod: Option<f64>,
    /// Elevation angle of departure, radians in [0, pi].
    pub elevation_aod: Option<f64>,
}

impl GeometryOverrides {
    /// Applies the overrides to one sub-surface geometry.
    pub fn apply(&self, mut geom: ArrayGeometry) -> ArrayGeometry {
        if let Some(s) = self.elem_spacing {
            geom.elem_spacing = s;
        }
        if let Some(a) = self.azimuth_aoa {
            geom.azimuth_aoa = a;
        }
        if let Some(a) = self.elevation_aoa {
            geom.elevation_aoa = a;
        }
        if let Some(a) = self.azimuth_aod {
            geom.azimuth_aod = a;
        }
        if let Some(a) = self.elevation_aod {
            geom.elevation_aod = a;
        }
        geom
    }
}

/// A fully resolved experiment description: parameters, geometry tweaks,
/// sweep, Monte Carlo settings, and output target.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Physical and cost parameters (validated).
    pub params: SystemParams,
    /// Geometry overrides for Monte Carlo channel synthesis.
    pub geometry: GeometryOverrides,
    /// The sweep to run.
    pub sweep: SweepSpec,
    /// Monte Carlo settings.
    pub mc: McSpec,
    /// Output destination and format.
    pub output: OutputSpec,
}

impl Default for ScenarioConfig {
    /// The default scenario: stock parameters, a budget sweep over
    /// 500..3000, Monte Carlo off, CSV to standard output.
    fn default() -> Self {
        ScenarioConfig {
            params: SystemParams::default_scenario(),
            geometry: GeometryOverrides::default(),
            sweep: SweepSpec {
                axis: SweepAxis::Budget,
                values: vec![500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0],
            },
            mc: McSpec {
                n_samples: 0,
                seed: 0,
            },
            output: OutputSpec {
                path: None,
                format: OutputFormat::Csv,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

type JsonMap = serde_json::Map<String, Value>;

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid(key, "expected a finite number"))
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| invalid(key, "expected a non-negative integer"))
}

fn as_object<'v>(key: &str, v: &'v Value) -> Result<&'v JsonMap> {
    v.as_object()
        .ok_or_else(|| invalid(key, "expected an object"))
}

/// Rician factor from a JSON value: a finite number or the string `"inf"`
/// for pure LoS. `db` selects the dB interpretation.
fn as_rician(key: &str, v: &Value, db: bool) -> Result<RicianFactor> {
    if let Some(s) = v.as_str() {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(RicianFactor::Infinite);
        }
        return Err(invalid(key, "expected a number or \"inf\""));
    }
    let x = as_f64(key, v)?;
    if db {
        RicianFactor::from_db(x)
    } else {
        RicianFactor::finite(x)
    }
}

/// Rejects documents that give the same quantity through more than one key.
fn reject_conflicts(obj: &JsonMap) -> Result<()> {
    let groups: [(&str, [&str; 2]); 9] = [
        ("BS transmit power", ["p_bs", "p_bs_dbm"]),
        ("amplification power budget", ["p_irs", "p_irs_dbm"]),
        ("amplification noise power", ["sigma2_amp", "sigma2_amp_dbm"]),
        ("receiver noise power", ["sigma2_rx", "sigma2_rx_dbm"]),
        ("reference channel gain", ["beta", "beta_db"]),
        ("BS-IRS Rician factor", ["k1", "k1_db"]),
        ("IRS-user Rician factor", ["k2", "k2_db"]),
        ("minimum amplification", ["alpha_min", "alpha_min_db"]),
        ("maximum amplification", ["alpha_max", "alpha_max_db"]),
    ];
    for (what, keys) in groups {
        let present: Vec<&str> = keys
            .iter()
            .copied()
            .filter(|k| obj.contains_key(*k))
            .collect();
        if present.len() > 1 {
            return Err(Error::ConflictingKeys {
                what: what.to_string(),
                keys: present.join(", "),
            });
        }
    }
    Ok(())
}

fn parse_geometry(v: &Value) -> Result<GeometryOverrides> {
    let obj = as_object("geometry", v)?;
    let mut g = GeometryOverrides::default();
    for (key, val) in obj {
        match key.as_str() {
            "elem_spacing" => {
                let s = as_f64("geometry.elem_spacing", val)?;
                if s <= 0.0 {
                    return Err(invalid("geometry.elem_spacing", "must be positive"));
                }
                g.elem_spacing = Some(s);
            }
            "azimuth_aoa" => g.azimuth_aoa = Some(as_angle("azimuth_aoa", val)?),
            "elevation_aoa" => g.elevation_aoa = Some(as_angle("elevation_aoa", val)?),
            "azimuth_aod" => g.azimuth_aod = Some(as_angle("azimuth_aod", val)?),
            "elevation_aod" => g.elevation_aod = Some(as_angle("elevation_aod", val)?),
            other => {
                return Err(Error::UnknownKey {
                    key: format!("geometry.{other}"),
                })
            }
        }
    }
    Ok(g)
}

fn as_angle(name: &'static str, v: &Value) -> Result<f64> {
    let x = as_f64(name, v)?;
    if !(0.0..=std::f64::consts::PI).contains(&x) {
        return Err(Error::AngleOutOfRange { name, value: x });
    }
    Ok(x)
}

fn parse_sweep(v: &Value) -> Result<SweepSpec> {
    let obj = as_object("sweep", v)?;
    let mut axis = None;
    let mut values: Option<Vec<f64>> = None;
    for (key, val) in obj {
        match key.as_str() {
            "axis" => {
                let name = val
                    .as_str()
                    .ok_or_else(|| invalid("sweep.axis", "expected a string"))?;
                axis = Some(SweepAxis::from_name(name)?);
            }
            "values" => {
                let arr = val
                    .as_array()
                    .ok_or_else(|| invalid("sweep.values", "expected an array of numbers"))?;
                let mut out = Vec::with_capacity(arr.len());
                for item in arr {
                    out.push(as_f64("sweep.values", item)?);
                }
                values = Some(out);
            }
            other => {
                return Err(Error::UnknownKey {
                    key: format!("sweep.{other}"),
                })
            }
        }
    }
    let axis = axis.ok_or_else(|| invalid("sweep.axis", "required when sweep is given"))?;
    let values = values.ok_or_else(|| invalid("sweep.values", "required when sweep is given"))?;
    check_axis_values(axis, &values)?;
    Ok(SweepSpec { axis, values })
}

/// Per-axis sanity checks on sweep values.
fn check_axis_values(axis: SweepAxis, values: &[f64]) -> Result<()> {
    for &v in values {
        match axis {
            SweepAxis::Budget => {
                if v < 0.0 {
                    return Err(invalid("sweep.values", "budget values must be >= 0"));
                }
            }
            SweepAxis::Rho => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid("sweep.values", "rho values must lie in [0, 1]"));
                }
            }
            SweepAxis::CostRatio => {
                if v <= 0.0 {
                    return Err(invalid("sweep.values", "cost ratios must be positive"));
                }
            }
            SweepAxis::NElements => {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(invalid(
                        "sweep.values",
                        "element counts must be non-negative integers",
                    ));
                }
            }
            SweepAxis::RicianDb | SweepAxis::PIrsDbm => {}
        }
    }
    Ok(())
}

fn parse_mc(v: &Value) -> Result<McSpec> {
    let obj = as_object("mc", v)?;
    let mut mc = McSpec {
        n_samples: 0,
        seed: 0,
    };
    for (key, val) in obj {
        match key.as_str() {
            "n_samples" => mc.n_samples = as_u64("mc.n_samples", val)?,
            "seed" => mc.seed = as_u64("mc.seed", val)?,
            other => {
                return Err(Error::UnknownKey {
                    key: format!("mc.{other}"),
                })
            }
        }
    }
    Ok(mc)
}

fn parse_output(v: &Value) -> Result<OutputSpec> {
    let obj = as_object("output", v)?;
    let mut spec = OutputSpec {
        path: None,
        format: OutputFormat::Csv,
    };
    for (key, val) in obj {
        match key.as_str() {
            "path" => {
                let p = val
                    .as_str()
                    .ok_or_else(|| invalid("output.path", "expected a string"))?;
                spec.path = Some(PathBuf::from(p));
            }
            "format" => {
                spec.format = match val.as_str() {
                    Some("csv") => OutputFormat::Csv,
                    Some("json") => OutputFormat::Json,
                    _ => return Err(invalid("output.format", "expected \"csv\" or \"json\"")),
                };
            }
            other => {
                return Err(Error::UnknownKey {
                    key: format!("output.{other}"),
                })
            }
        }
    }
    Ok(spec)
}

impl ScenarioConfig {
    /// Parses a config document. `origin` labels parse errors (a path or a
    /// preset name). An empty document yields the default scenario.
    pub fn from_json_str(text: &str, origin: &str) -> Result<ScenarioConfig> {
        if text.trim().is_empty() {
            return Ok(ScenarioConfig::default());
        }
        let value: Value = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        ScenarioConfig::from_value(&value)
    }

    /// Builds a config from a decoded JSON document, applying defaults for
    /// absent keys and validating the resulting parameters.
    pub fn from_value(value: &Value) -> Result<ScenarioConfig> {
        let obj = as_object("<document>", value)?;
        reject_conflicts(obj)?;

        // The convention must be known before any alpha dB key converts.
        let convention = match obj.get("alpha_db_convention") {
            None => AlphaDbConvention::default(),
            Some(v) => match v.as_str() {
                Some("factor10") => AlphaDbConvention::Factor10,
                Some("factor20") => AlphaDbConvention::Factor20,
                _ => {
                    return Err(invalid(
                        "alpha_db_convention",
                        "expected \"factor10\" or \"factor20\"",
                    ))
                }
            },
        };

        let mut cfg = ScenarioConfig::default();
        let p = &mut cfg.params;
        for (key, v) in obj {
            match key.as_str() {
                "p_bs" => p.p_bs = as_f64(key, v)?,
                "p_bs_dbm" => p.p_bs = dbm_to_watt(as_f64(key, v)?)?,
                "p_irs" => p.p_irs = as_f64(key, v)?,
                "p_irs_dbm" => p.p_irs = dbm_to_watt(as_f64(key, v)?)?,
                "sigma2_amp" => p.sigma2_amp = as_f64(key, v)?,
                "sigma2_amp_dbm" => p.sigma2_amp = dbm_to_watt(as_f64(key, v)?)?,
                "sigma2_rx" => p.sigma2_rx = as_f64(key, v)?,
                "sigma2_rx_dbm" => p.sigma2_rx = dbm_to_watt(as_f64(key, v)?)?,
                "beta" => p.beta = as_f64(key, v)?,
                "beta_db" => p.beta = db_to_linear(as_f64(key, v)?, DbKind::Power)?,
                "wavelength" => p.wavelength = as_f64(key, v)?,
                "d_bi" => p.d_bi = as_f64(key, v)?,
                "d_iu" => p.d_iu = as_f64(key, v)?,
                "k1" => p.k1 = as_rician(key, v, false)?,
                "k1_db" => p.k1 = as_rician(key, v, true)?,
                "k2" => p.k2 = as_rician(key, v, false)?,
                "k2_db" => p.k2 = as_rician(key, v, true)?,
                "alpha_min" => p.alpha_min = as_f64(key, v)?,
                "alpha_min_db" => p.alpha_min = convention.to_linear(as_f64(key, v)?)?,
                "alpha_max" => p.alpha_max = as_f64(key, v)?,
                "alpha_max_db" => p.alpha_max = convention.to_linear(as_f64(key, v)?)?,
                "alpha_db_convention" => {} // consumed above
                "w_act" => p.w_act = as_f64(key, v)?,
                "w_pas" => p.w_pas = as_f64(key, v)?,
                "w0" => p.w0 = as_f64(key, v)?,
                "geometry" => cfg.geometry = parse_geometry(v)?,
                "sweep" => cfg.sweep = parse_sweep(v)?,
                "mc" => cfg.mc = parse_mc(v)?,
                "output" => cfg.output = parse_output(v)?,
                other => {
                    return Err(Error::UnknownKey {
                        key: other.to_string(),
                    })
                }
            }
        }
        cfg.params = cfg.params.validate()?;
        Ok(cfg)
    }
}

/// Loads and parses a scenario config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    ScenarioConfig::from_json_str(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Built-in figure presets, embedded at compile time and also shipped as
/// files under `presets/`.
const PRESETS: [(&str, &str); 7] = [
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig5", include_str!("../presets/fig5.json")),
    ("fig6", include_str!("../presets/fig6.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig8", include_str!("../presets/fig8.json")),
    ("fig9", include_str!("../presets/fig9.json")),
];

/// Names of the built-in presets, in order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// Loads a built-in preset by name (`fig3` .. `fig9`).
pub fn preset_config(name: &str) -> Result<ScenarioConfig> {
    for (preset, text) in PRESETS {
        if preset == name {
            return ScenarioConfig::from_json_str(text, &format!("preset {preset}"));
        }
    }
    Err(invalid(
        "--preset",
        format!("unknown preset {name:?}; available: {}", preset_names().join(", ")),
    ))
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

/// One output row of a sweep. Optional cells render as `NA` in CSV and
/// `null` in JSON — used when a scheme is not applicable at that point
/// (infeasible amplification, passive-only regime, Monte Carlo disabled).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Axis name; constant within a file.
    pub axis: String,
    /// Axis value of this row.
    pub value: f64,
    /// Active elements of the evaluated design.
    pub n_act: Option<u64>,
    /// Passive elements of the evaluated design.
    pub n_pas: Option<u64>,
    /// Amplification factor of the evaluated design; absent without active
    /// elements.
    pub alpha: Option<f64>,
    /// Aggregate amplification power `n_act alpha²` of the design.
    pub a_sum: Option<f64>,
    /// Amplification power regime at this row's parameters.
    pub regime: String,
    /// Capacity of the optimized hybrid design (or the fixed design on the
    /// `rho` / `n_elements` axes), bits/s/Hz.
    pub c_hybrid_opt: Option<f64>,
    /// Benchmark: budget split 50/50 by cost between the sub-surfaces.
    pub c_hybrid_equal: Option<f64>,
    /// Benchmark: whole budget on active elements.
    pub c_all_active: Option<f64>,
    /// Benchmark: whole budget on passive elements.
    pub c_all_passive: Option<f64>,
    /// Monte Carlo ergodic capacity of the evaluated design.
    pub c_mc_mean: Option<f64>,
    /// Standard error of the Monte Carlo mean.
    pub c_mc_stderr: Option<f64>,
    /// Monte Carlo sample count.
    pub mc_samples: Option<u64>,
}

/// Capacity of a fixed allocation, with power-infeasible points reported as
/// not-applicable instead of failing the sweep.
fn feasible_capacity(params: &SystemParams, alloc: Allocation) -> Result<Option<f64>> {
    match crate::allocation::capacity_opt(params, alloc.n_act, alloc.n_pas) {
        Ok(c) => Ok(Some(c)),
        Err(Error::PowerInfeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sub-surface geometries for an allocation with the config's overrides.
fn geometries_for(
    cfg: &ScenarioConfig,
    params: &SystemParams,
    alloc: Allocation,
) -> SubSurfaceGeometry {
    let g = default_geometries(alloc, params.wavelength);
    SubSurfaceGeometry {
        active: cfg.geometry.apply(g.active),
        passive: cfg.geometry.apply(g.passive),
    }
}

/// Monte Carlo columns for a design point, when enabled and feasible.
fn monte_carlo_columns(
    cfg: &ScenarioConfig,
    params: &SystemParams,
    alloc: Allocation,
) -> Result<(Option<f64>, Option<f64>, Option<u64>)> {
    if cfg.mc.n_samples == 0 {
        return Ok((None, None, None));
    }
    let geoms = geometries_for(cfg, params, alloc);
    let reflection = match optimal_reflection_with(params, alloc, &geoms) {
        Ok((reflection, _)) => reflection,
        Err(Error::PowerInfeasible { .. }) => return Ok((None, None, None)),
        Err(e) => return Err(e),
    };
    let est = mc_ergodic_capacity_with(
        params,
        alloc,
        &geoms,
        &reflection,
        cfg.mc.n_samples,
        cfg.mc.seed,
    )?;
    Ok((Some(est.mean), Some(est.std_error), Some(est.n_samples)))
}

/// Row for the budget-comparison axes: optimized hybrid plus the three
/// benchmark schemes at the modified parameters.
fn comparison_row(
    cfg: &ScenarioConfig,
    params: &SystemParams,
    axis: SweepAxis,
    value: f64,
) -> Result<SweepRow> {
    let design = allocate_search(params)?;
    let half = params.w0 / 2.0;
    let equal = Allocation {
        n_act: affordable_count(half, params.w_act),
        n_pas: affordable_count(half, params.w_pas),
    };
    let c_hybrid_equal = feasible_capacity(params, equal)?;
    let c_all_active = if design.regime == PowerRegime::PassiveOnly {
        // No active element can be powered: mark the all-active scheme as
        // not applicable rather than reporting a zero-element "design".
        None
    } else {
        feasible_capacity(
            params,
            Allocation {
                n_act: affordable_count(params.w0, params.w_act),
                n_pas: 0,
            },
        )?
    };
    let c_all_passive = feasible_capacity(
        params,
        Allocation {
            n_act: 0,
            n_pas: affordable_count(params.w0, params.w_pas),
        },
    )?;
    let (c_mc_mean, c_mc_stderr, mc_samples) = monte_carlo_columns(cfg, params, design.alloc)?;
    Ok(SweepRow {
        axis: axis.label().to_string(),
        value,
        n_act: Some(design.alloc.n_act),
        n_pas: Some(design.alloc.n_pas),
        alpha: (design.alloc.n_act > 0).then_some(design.alpha),
        a_sum: Some(design.a_sum),
        regime: design.regime.label().to_string(),
        c_hybrid_opt: Some(design.capacity),
        c_hybrid_equal,
        c_all_active,
        c_all_passive,
        c_mc_mean,
        c_mc_stderr,
        mc_samples,
    })
}

/// Row for the `rho` axis: capacity of the fixed budget split.
fn rho_row(cfg: &ScenarioConfig, params: &SystemParams, value: f64) -> Result<SweepRow> {
    let alloc = Allocation {
        n_act: affordable_count(value * params.w0, params.w_act),
        n_pas: affordable_count((1.0 - value) * params.w0, params.w_pas),
    };
    let regime = power_regime(params).label().to_string();
    let mut row = SweepRow {
        axis: SweepAxis::Rho.label().to_string(),
        value,
        n_act: Some(alloc.n_act),
        n_pas: Some(alloc.n_pas),
        alpha: None,
        a_sum: None,
        regime,
        c_hybrid_opt: None,
        c_hybrid_equal: None,
        c_all_active: None,
        c_all_passive: None,
        c_mc_mean: None,
        c_mc_stderr: None,
        mc_samples: None,
    };
    match feasible_capacity(params, alloc)? {
        None => Ok(row), // split cannot be powered; capacities stay NA
        Some(c) => {
            let (alpha, a_sum) = if alloc.n_act > 0 {
                let choice = optimal_alpha(params, alloc.n_act)?;
                (
                    Some(choice.alpha),
                    alloc.n_act as f64 * choice.alpha * choice.alpha,
                )
            } else {
                (None, 0.0)
            };
            let (c_mc_mean, c_mc_stderr, mc_samples) = monte_carlo_columns(cfg, params, alloc)?;
            row.alpha = alpha;
            row.a_sum = Some(a_sum);
            row.c_hybrid_opt = Some(c);
            row.c_mc_mean = c_mc_mean;
            row.c_mc_stderr = c_mc_stderr;
            row.mc_samples = mc_samples;
            Ok(row)
        }
    }
}

/// Row for the `n_elements` axis: the fixed allocation `(N, N)` evaluated
/// through the full statistical-CSI approximation (and Monte Carlo when
/// enabled). The deployment budget is deliberately not applied.
fn n_elements_row(cfg: &ScenarioConfig, params: &SystemParams, value: f64) -> Result<SweepRow> {
    let n = value as u64;
    let alloc = Allocation {
        n_act: n,
        n_pas: n,
    };
    let regime = power_regime(params).label().to_string();
    let mut row = SweepRow {
        axis: SweepAxis::NElements.label().to_string(),
        value,
        n_act: Some(n),
        n_pas: Some(n),
        alpha: None,
        a_sum: None,
        regime,
        c_hybrid_opt: None,
        c_hybrid_equal: None,
        c_all_active: None,
        c_all_passive: None,
        c_mc_mean: None,
        c_mc_stderr: None,
        mc_samples: None,
    };
    let geoms = geometries_for(cfg, params, alloc);
    let (reflection, csi) = match optimal_reflection_with(params, alloc, &geoms) {
        Ok(pair) => pair,
        Err(Error::PowerInfeasible { .. }) => return Ok(row),
        Err(e) => return Err(e),
    };
    let terms = approx_terms(params, alloc, &reflection, &csi)?;
    row.alpha = reflection.alphas.first().copied();
    row.a_sum = Some(reflection.a_sum());
    row.c_hybrid_opt = Some(approx_capacity(&terms, params));
    if cfg.mc.n_samples > 0 {
        let est = mc_ergodic_capacity_with(
            params,
            alloc,
            &geoms,
            &reflection,
            cfg.mc.n_samples,
            cfg.mc.seed,
        )?;
        row.c_mc_mean = Some(est.mean);
        row.c_mc_stderr = Some(est.std_error);
        row.mc_samples = Some(est.n_samples);
    }
    Ok(row)
}

/// One sweep point: applies the axis value to the base parameters and
/// builds the row.
fn sweep_point(cfg: &ScenarioConfig, base: &SystemParams, value: f64) -> Result<SweepRow> {
    match cfg.sweep.axis {
        SweepAxis::Budget => {
            let mut p = base.clone();
            p.w0 = value;
            comparison_row(cfg, &p, SweepAxis::Budget, value)
        }
        SweepAxis::RicianDb => {
            let mut p = base.clone();
            let k = RicianFactor::from_db(value)?;
            p.k1 = k;
            p.k2 = k;
            comparison_row(cfg, &p, SweepAxis::RicianDb, value)
        }
        SweepAxis::PIrsDbm => {
            let mut p = base.clone();
            p.p_irs = dbm_to_watt(value)?;
            comparison_row(cfg, &p, SweepAxis::PIrsDbm, value)
        }
        SweepAxis::CostRatio => {
            let mut p = base.clone();
            p.w_act = value * p.w_pas;
            comparison_row(cfg, &p, SweepAxis::CostRatio, value)
        }
        SweepAxis::Rho => rho_row(cfg, base, value),
        SweepAxis::NElements => n_elements_row(cfg, base, value),
    }
}

/// Runs the configured sweep: one row per axis value, in axis order.
///
/// Points are evaluated in parallel; ordering and values are independent of
/// the worker count because rows are collected by index and all Monte Carlo
/// sampling uses per-sample counter streams.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let base = cfg.params.clone().validate()?;
    cfg.sweep
        .values
        .par_iter()
        .map(|&value| sweep_point(cfg, &base, value))
        .collect()
}

// ---------------------------------------------------------------------------
// Output serialization
// ---------------------------------------------------------------------------

/// CSV header; the column order is fixed and documented in
/// `docs/csv_columns.md`.
pub const CSV_HEADER: &str = "axis,value,n_act,n_pas,alpha,a_sum,regime,c_hybrid_opt,\
                              c_hybrid_equal,c_all_active,c_all_passive,c_mc_mean,\
                              c_mc_stderr,mc_samples";

/// Floats are rendered with 17 significant digits, enough for exact f64
/// round-trips.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_else(|| "NA".to_string())
}

fn fmt_opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "NA".to_string())
}

/// Serializes rows to the requested format. Output is a pure function of
/// the rows, so identical configs and seeds give identical bytes.
pub fn render_rows(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let fields = [
                    r.axis.clone(),
                    fmt_float(r.value),
                    fmt_opt_u64(r.n_act),
                    fmt_opt_u64(r.n_pas),
                    fmt_opt_float(r.alpha),
                    fmt_opt_float(r.a_sum),
                    r.regime.clone(),
                    fmt_opt_float(r.c_hybrid_opt),
                    fmt_opt_float(r.c_hybrid_equal),
                    fmt_opt_float(r.c_all_active),
                    fmt_opt_float(r.c_all_passive),
                    fmt_opt_float(r.c_mc_mean),
                    fmt_opt_float(r.c_mc_stderr),
                    fmt_opt_u64(r.mc_samples),
                ];
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(rows).expect("plain row data always serializes");
            out.push('\n');
            out
        }
    }
}

/// Writes rendered rows to a file.
pub fn write_output(rows: &[SweepRow], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_rows(rows, format)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Command-line interface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-irs",
    version,
    about = "Hybrid active-passive IRS capacity and allocation toolkit",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Path to a JSON scenario config.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in figure preset (fig3 .. fig9).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Override the Monte Carlo seed.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Override the Monte Carlo sample count.
    #[arg(long, value_name = "N")]
    samples: Option<u64>,

    /// Output file for sweep data (standard output when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format for sweep data.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve the optimal element allocation for a scenario.
    Solve(ScenarioArgs),
    /// Run the configured sweep and write plot data.
    Sweep(ScenarioArgs),
    /// Compare Monte Carlo and closed-form capacity at one design point.
    Capacity(ScenarioArgs),
    /// Print the LoS architecture budget thresholds.
    Thresholds(ScenarioArgs),
}

fn scenario_from_args(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let mut cfg = if let Some(name) = &args.preset {
        preset_config(name)?
    } else if let Some(path) = &args.config {
        load_config(path)?
    } else {
        ScenarioConfig::default()
    };
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.mc.n_samples = samples;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(format) = args.format {
        cfg.output.format = format.into();
    }
    Ok(cfg)
}

fn cmd_solve(cfg: &ScenarioConfig) -> Result<String> {
    let d = allocate_search(&cfg.params)?;
    Ok(format!(
        "n_act={}\nn_pas={}\nalpha={}\nalpha_clamped={}\na_sum={}\ncapacity={}\nregime={}\n",
        d.alloc.n_act,
        d.alloc.n_pas,
        fmt_float(d.alpha),
        d.alpha_clamped,
        fmt_float(d.a_sum),
        fmt_float(d.capacity),
        d.regime.label(),
    ))
}

fn cmd_sweep(cfg: &ScenarioConfig) -> Result<String> {
    let rows = run_sweep(cfg)?;
    match &cfg.output.path {
        Some(path) => {
            write_output(&rows, path, cfg.output.format)?;
            Ok(String::new())
        }
        None => Ok(render_rows(&rows, cfg.output.format)),
    }
}

fn cmd_capacity(cfg: &ScenarioConfig) -> Result<String> {
    let d = allocate_search(&cfg.params)?;
    let n_samples = if cfg.mc.n_samples == 0 {
        1000
    } else {
        cfg.mc.n_samples
    };
    let geoms = geometries_for(cfg, &cfg.params, d.alloc);
    let (reflection, _) = optimal_reflection_with(&cfg.params, d.alloc, &geoms)?;
    let est = mc_ergodic_capacity_with(
        &cfg.params,
        d.alloc,
        &geoms,
        &reflection,
        n_samples,
        cfg.mc.seed,
    )?;
    Ok(format!(
        "n_act={}\nn_pas={}\nalpha={}\nc_approx={}\nc_mc_mean={}\nc_mc_stderr={}\n\
         abs_error={}\nmc_samples={}\nseed={}\n",
        d.alloc.n_act,
        d.alloc.n_pas,
        fmt_float(d.alpha),
        fmt_float(d.capacity),
        fmt_float(est.mean),
        fmt_float(est.std_error),
        fmt_float((est.mean - d.capacity).abs()),
        est.n_samples,
        cfg.mc.seed,
    ))
}

fn cmd_thresholds(cfg: &ScenarioConfig) -> Result<String> {
    let t = thresholds(&cfg.params)?;
    Ok(format!(
        "w_ah={}\nw_ap={}\nw_hp={}\nregime={}\n",
        fmt_float(t.w_ah),
        fmt_float(t.w_ap),
        fmt_float(t.w_hp),
        power_regime(&cfg.params).label(),
    ))
}

fn run_command(cli: &Cli) -> Result<String> {
    let args = match &cli.command {
        Cmd::Solve(a) | Cmd::Sweep(a) | Cmd::Capacity(a) | Cmd::Thresholds(a) => a,
    };
    let cfg = scenario_from_args(args)?;
    match &cli.command {
        Cmd::Solve(_) => cmd_solve(&cfg),
        Cmd::Sweep(_) => cmd_sweep(&cfg),
        Cmd::Capacity(_) => cmd_capacity(&cfg),
        Cmd::Thresholds(_) => cmd_thresholds(&cfg),
    }
}

/// CLI entry point. `argv` includes the program name. Returns the process
/// exit code: 0 on success, 1 on runtime errors (with a machine-parsable
/// `error: ...` line on the error stream), 2 on usage errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; clap picks the right stream.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli) {
        Ok(text) => {
            if !text.is_empty() {
                let stdout = std::io::stdout();
                let mut w = stdout.lock();
                if w.write_all(text.as_bytes()).and_then(|()| w.flush()).is_err() {
                    return 1;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
