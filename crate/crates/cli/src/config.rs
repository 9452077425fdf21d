//! Run configuration: JSON file + preset + dotted-key overrides, merged over
//! defaults that follow the validation-point parameters of the model
//! captions (decays 0.001 GHz everywhere).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use magnon_sim_core::models::PhysicalParams;
use magnon_sim_core::sweep::{AxisName, AxisSpec, FixedParams, ModelKind};

use crate::CliError;

/// Which dynamical model `evolve` propagates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    Full,
    Rwa,
    Resonant,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairName {
    #[serde(rename = "full-rwa")]
    FullRwa,
    #[serde(rename = "rwa-effective")]
    RwaEffective,
}

fn default_axis1() -> AxisSpec {
    AxisSpec {
        name: AxisName::Delta1,
        min: -1.0,
        max: 1.0,
        count: 101,
    }
}

fn default_axis2() -> Option<AxisSpec> {
    Some(AxisSpec {
        name: AxisName::Delta2,
        min: -1.0,
        max: 1.0,
        count: 101,
    })
}

/// Grid settings for the map commands (all values cyclic GHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    pub fixed: FixedParams,
    pub model: ModelKind,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            axis1: default_axis1(),
            axis2: default_axis2(),
            fixed: FixedParams::default(),
            model: ModelKind::Rwa,
        }
    }
}

fn default_steady_tol() -> Option<f64> {
    Some(magnon_sim_core::dynamics::STEADY_DRIFT_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSection {
    /// Horizon in ns; defaults to 20/|spectral margin| of the chosen model.
    pub t_end: Option<f64>,
    /// Fixed step in ns; defaults to the drift's resolution policy.
    pub dt: Option<f64>,
    /// Record stride in steps; defaults to ~2000 records.
    pub record_every: Option<usize>,
    /// Early-stop threshold (relative Frobenius drift per ns); null disables.
    pub steady_detect_tol: Option<f64>,
    /// Add pairwise entanglement columns to `evolve` output.
    pub entanglement: bool,
}

impl Default for PropagationSection {
    fn default() -> Self {
        Self {
            t_end: None,
            dt: None,
            record_every: None,
            steady_detect_tol: default_steady_tol(),
            entanglement: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub pair: PairName,
    /// Agreement threshold on the pair's headline metric; exceeding it makes
    /// `compare` exit with the numerical-failure code.
    pub threshold: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            pair: PairName::FullRwa,
            threshold: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioSection {
    /// Beam-splitter couplings, one curve each (GHz).
    pub g2_values: Vec<f64>,
    /// Cavity decays, one curve each (GHz).
    pub kappa_values: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_count: usize,
    pub gamma_1: f64,
    pub gamma_2: f64,
}

impl Default for RatioSection {
    fn default() -> Self {
        Self {
            g2_values: vec![0.01, 0.03, 0.05],
            kappa_values: vec![0.005],
            ratio_min: 0.0,
            ratio_max: 0.99,
            ratio_count: 100,
            gamma_1: 0.001,
            gamma_2: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: PhysicalParams,
    /// Model propagated by `evolve`.
    pub model: Option<SimModel>,
    pub grid: GridSection,
    pub propagation: PropagationSection,
    pub compare: CompareSection,
    pub ratio: RatioSection,
    pub output: OutputSection,
    pub jobs: Option<usize>,
}

/// Checked-in caption parameter sets, embedded at compile time.
pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => include_str!("../presets/fig2.json"),
        "fig3a" => include_str!("../presets/fig3a.json"),
        "fig3b" => include_str!("../presets/fig3b.json"),
        "fig3c" => include_str!("../presets/fig3c.json"),
        "fig3d" => include_str!("../presets/fig3d.json"),
        "fig3e" => include_str!("../presets/fig3e.json"),
        "fig3f" => include_str!("../presets/fig3f.json"),
        "fig4" => include_str!("../presets/fig4.json"),
        "fig5a" => include_str!("../presets/fig5a.json"),
        "fig5b" => include_str!("../presets/fig5b.json"),
        "fig6" => include_str!("../presets/fig6.json"),
        "fig7a" => include_str!("../presets/fig7a.json"),
        "fig7b" => include_str!("../presets/fig7b.json"),
        _ => return None,
    })
}

pub const PRESET_NAMES: &[&str] = &[
    "fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4", "fig5a", "fig5b", "fig6",
    "fig7a", "fig7b",
];

/// Deep-merges `patch` into `base` (objects merge, everything else replaces).
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `a.b.c=value` override; the value parses as JSON when it can,
/// as a bare string otherwise.
fn apply_set(root: &mut Value, expr: &str) -> Result<(), CliError> {
    let (path, raw) = expr
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set needs key=value, got '{expr}'")))?;
    let val = serde_json::from_str::<Value>(raw).unwrap_or(Value::String(raw.to_string()));
    let mut slot = root;
    for key in path.split('.') {
        if key.is_empty() {
            return Err(CliError::Config(format!("empty key segment in '{path}'")));
        }
        let obj = slot.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "cannot descend into non-object at '{key}' in '{path}'"
            ))
        })?;
        slot = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    *slot = val;
    Ok(())
}

/// Resolves the layered configuration: defaults < preset < file < --set.
pub fn resolve(
    preset_name: Option<&str>,
    config_path: Option<&std::path::Path>,
    sets: &[String],
) -> Result<RunConfig, CliError> {
    let mut root = serde_json::to_value(RunConfig::default()).expect("defaults serialize cleanly");
    if let Some(name) = preset_name {
        let text = preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset '{name}' (available: {})",
                PRESET_NAMES.join(", ")
            ))
        })?;
        let v: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("preset '{name}': {e}")))?;
        merge(&mut root, v);
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut root, v);
    }
    for expr in sets {
        apply_set(&mut root, expr)?;
    }
    let cfg: RunConfig = serde_json::from_value(root)
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
    cfg.params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}
