//! Deterministic grid evaluation over model parameters: stability maps,
//! entanglement maps, and coupling-ratio curves.
//!
//! Cells are pure functions of their grid index, evaluated through a
//! parallel map (rayon, `parallel` feature, default) or sequentially
//! ([`run_sweep_serial`]); both produce bit-identical row-major tables.
//! Per-cell solver failures degrade to error-tagged rows; a cross-method
//! stability disagreement outside the rounding band aborts the sweep.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dynamics::steady_state;
use crate::entanglement::{pairwise_entanglement, EN_FLOOR};
use crate::gaussian::log_negativity;
use crate::models::{
    diffusion_matrix, drift_from_hamiltonian, hamiltonian_effective, hamiltonian_resonant,
    hamiltonian_rwa, params_from_detunings, PhysicalParams,
};
use crate::stability::{char_poly_closed_form, eigen_stable, routh_hurwitz_stable, BOUNDARY_BAND};
use crate::{Error, Result};

/// Which drift matrix a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Static three-mode model (6x6 drift).
    Rwa,
    /// Interaction-only three-mode model (6x6 drift, no free terms).
    Resonant,
    /// Two-magnon model after cavity elimination (4x4 drift).
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTask {
    Stability,
    Entanglement,
    Both,
}

/// Sweepable parameter axes. All values are cyclic GHz except the
/// dimensionless coupling ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "Delta_1")]
    Delta1,
    #[serde(rename = "Delta_2")]
    Delta2,
    #[serde(rename = "g1")]
    G1,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "g1_over_g2")]
    G1OverG2,
}

impl AxisName {
    pub fn label(&self) -> &'static str {
        match self {
            AxisName::Delta1 => "Delta_1",
            AxisName::Delta2 => "Delta_2",
            AxisName::G1 => "g1",
            AxisName::G2 => "g2",
            AxisName::Kappa => "kappa",
            AxisName::G1OverG2 => "g1_over_g2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::GridInvalid(format!(
                "axis {} needs count >= 2, got {}",
                self.name.label(),
                self.count
            )));
        }
        // equal endpoints are allowed: a degenerate axis repeats one value
        if !(self.min <= self.max) {
            return Err(Error::GridInvalid(format!(
                "axis {} needs min <= max, got [{}, {}]",
                self.name.label(),
                self.min,
                self.max
            )));
        }
        Ok(())
    }
}

/// Exact linear spacing, the one place grid coordinates are generated.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count - 1) as f64;
    (0..count).map(|i| min + step * i as f64).collect()
}

fn default_nu_c() -> f64 {
    10.0
}
fn default_nu_d() -> f64 {
    20.0
}
fn default_decay() -> f64 {
    0.001
}

/// Cell parameters not carried by the axes (cyclic GHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedParams {
    pub nu_c: f64,
    pub nu_d: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub g1: f64,
    pub g2: f64,
    pub kappa: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            nu_c: default_nu_c(),
            nu_d: default_nu_d(),
            delta_1: 0.0,
            delta_2: 0.0,
            g1: 0.0,
            g2: 0.0,
            kappa: default_decay(),
            gamma_1: default_decay(),
            gamma_2: default_decay(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis1: AxisSpec,
    #[serde(default)]
    pub axis2: Option<AxisSpec>,
    #[serde(default)]
    pub fixed: FixedParams,
    pub model: ModelKind,
    pub task: SweepTask,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(Error::GridInvalid(format!(
                    "both axes sweep {}",
                    a2.name.label()
                )));
            }
        }
        let names: Vec<AxisName> = std::iter::once(self.axis1.name)
            .chain(self.axis2.iter().map(|a| a.name))
            .collect();
        for n in &names {
            let ok = match self.model {
                ModelKind::Rwa => !matches!(n, AxisName::G1OverG2),
                ModelKind::Resonant => !matches!(n, AxisName::Delta1 | AxisName::Delta2),
                ModelKind::Effective => !matches!(n, AxisName::Kappa | AxisName::G1OverG2),
            };
            if !ok {
                return Err(Error::GridInvalid(format!(
                    "axis {} does not apply to the {:?} model",
                    n.label(),
                    self.model
                )));
            }
        }
        Ok(())
    }

    fn n_cells(&self) -> usize {
        self.axis1.count * self.axis2.as_ref().map_or(1, |a| a.count)
    }
}

/// One grid cell; entanglement fields are present iff the cell is stable and
/// its steady state solved cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2: Option<f64>,
    pub stable: bool,
    /// Spectral margin (rad/ns), reported for stable and unstable cells so
    /// boundaries can be contoured at zero.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_cm1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_cm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_m1m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

struct CellOutcome {
    row: SweepRow,
    cross_check_failed: bool,
}

fn apply_axis(fixed: &mut FixedParams, name: AxisName, value: f64) {
    match name {
        AxisName::Delta1 => fixed.delta_1 = value,
        AxisName::Delta2 => fixed.delta_2 = value,
        AxisName::G1 => fixed.g1 = value,
        AxisName::G2 => fixed.g2 = value,
        AxisName::Kappa => fixed.kappa = value,
        AxisName::G1OverG2 => {} // needs final g2, applied last
    }
}

fn cell_params(spec: &GridSpec, v1: f64, v2: Option<f64>) -> PhysicalParams {
    let mut fixed = spec.fixed;
    let mut ratio = None;
    for (axis, value) in std::iter::once((&spec.axis1, v1)).chain(spec.axis2.iter().zip(v2)) {
        if axis.name == AxisName::G1OverG2 {
            ratio = Some(value);
        } else {
            apply_axis(&mut fixed, axis.name, value);
        }
    }
    if let Some(r) = ratio {
        fixed.g1 = r * fixed.g2;
    }
    params_from_detunings(
        fixed.nu_c,
        fixed.nu_d,
        fixed.delta_1,
        fixed.delta_2,
        fixed.g1,
        fixed.g2,
        fixed.kappa,
        fixed.gamma_1,
        fixed.gamma_2,
    )
}

fn eval_cell(spec: &GridSpec, v1: f64, v2: Option<f64>) -> CellOutcome {
    let mut row = SweepRow {
        axis1: v1,
        axis2: v2,
        stable: false,
        margin: f64::NAN,
        e_cm1: None,
        e_cm2: None,
        e_m1m2: None,
        error: None,
    };
    let p = cell_params(spec, v1, v2);

    let built = match spec.model {
        ModelKind::Rwa => hamiltonian_rwa(&p).map(|h| (h, p.decays().to_vec())),
        ModelKind::Resonant => hamiltonian_resonant(&p).map(|h| (h, p.decays().to_vec())),
        ModelKind::Effective => hamiltonian_effective(&p).map(|h| (h, p.magnon_decays().to_vec())),
    };
    let (h, decays) = match built {
        Ok(v) => v,
        Err(e) => {
            row.error = Some(e.to_string());
            return CellOutcome {
                row,
                cross_check_failed: false,
            };
        }
    };
    let a = match drift_from_hamiltonian(&h, &decays, 0.0) {
        Ok(a) => a,
        Err(e) => {
            row.error = Some(e.to_string());
            return CellOutcome {
                row,
                cross_check_failed: false,
            };
        }
    };
    let verdict = match eigen_stable(&a) {
        Ok(v) => v,
        Err(e) => {
            row.error = Some(e.to_string());
            return CellOutcome {
                row,
                cross_check_failed: false,
            };
        }
    };
    let margin = verdict.margin.expect("eigen route carries a margin");
    row.stable = verdict.stable;
    row.margin = margin;

    // independent check against the determinant criterion; a decisive
    // disagreement outside the rounding band is fatal for the whole sweep
    let mut cross_check_failed = false;
    if spec.model == ModelKind::Rwa && margin.abs() >= BOUNDARY_BAND {
        match char_poly_closed_form(&p) {
            Ok(cp) => {
                let rh = routh_hurwitz_stable(&cp);
                if rh.decisive && rh.stable != verdict.stable {
                    cross_check_failed = true;
                }
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }

    if row.stable && spec.task != SweepTask::Stability {
        let d = diffusion_matrix(&decays);
        match steady_state(&a, &d) {
            Ok(sigma) => match spec.model {
                ModelKind::Rwa | ModelKind::Resonant => match pairwise_entanglement(&sigma) {
                    Ok(rep) => {
                        row.e_cm1 = Some(rep.e_cm1);
                        row.e_cm2 = Some(rep.e_cm2);
                        row.e_m1m2 = Some(rep.e_m1m2);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                },
                ModelKind::Effective => match log_negativity(&sigma) {
                    Ok(e) => row.e_m1m2 = Some(if e < EN_FLOOR { 0.0 } else { e }),
                    Err(e) => row.error = Some(e.to_string()),
                },
            },
            Err(e) => row.error = Some(e.to_string()),
        }
    }

    CellOutcome {
        row,
        cross_check_failed,
    }
}

fn assemble(spec: &GridSpec, outcomes: Vec<CellOutcome>) -> Result<SweepResult> {
    let n2 = spec.axis2.as_ref().map_or(1, |a| a.count);
    if let Some(pos) = outcomes.iter().position(|o| o.cross_check_failed) {
        let row = &outcomes[pos].row;
        return Err(Error::StabilityCrossCheck {
            i: pos / n2,
            j: pos % n2,
            margin: row.margin,
        });
    }
    Ok(SweepResult {
        rows: outcomes.into_iter().map(|o| o.row).collect(),
    })
}

fn cell_coords(spec: &GridSpec) -> Vec<(f64, Option<f64>)> {
    let v1 = spec.axis1.values();
    match &spec.axis2 {
        None => v1.into_iter().map(|a| (a, None)).collect(),
        Some(a2) => {
            let v2 = a2.values();
            let mut out = Vec::with_capacity(spec.n_cells());
            for a in &v1 {
                for b in &v2 {
                    out.push((*a, Some(*b)));
                }
            }
            out
        }
    }
}

/// Evaluates the grid row-major (axis1 outer, axis2 inner), in parallel when
/// the `parallel` feature is enabled.
pub fn run_sweep(spec: &GridSpec) -> Result<SweepResult> {
    spec.validate()?;
    let coords = cell_coords(spec);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<CellOutcome> = coords
        .into_par_iter()
        .map(|(v1, v2)| eval_cell(spec, v1, v2))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<CellOutcome> = coords
        .into_iter()
        .map(|(v1, v2)| eval_cell(spec, v1, v2))
        .collect();
    assemble(spec, outcomes)
}

/// Sequential evaluation of the same grid; identical output to [`run_sweep`].
pub fn run_sweep_serial(spec: &GridSpec) -> Result<SweepResult> {
    spec.validate()?;
    let coords = cell_coords(spec);
    let outcomes: Vec<CellOutcome> = coords
        .into_iter()
        .map(|(v1, v2)| eval_cell(spec, v1, v2))
        .collect();
    assemble(spec, outcomes)
}

/// One curve of steady-state magnon entanglement against the coupling ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    /// Fixed beam-splitter coupling (GHz).
    pub g2: f64,
    /// Fixed cavity decay (GHz).
    pub kappa: f64,
    pub ratios: Vec<f64>,
    /// Steady-state magnon-magnon negativity per ratio; absent where the
    /// cell is unstable or its solve failed.
    pub e_m1m2: Vec<Option<f64>>,
    /// Ratio value with the largest entanglement on this curve.
    pub argmax_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweepResult {
    pub curves: Vec<RatioCurve>,
}

/// Interaction-only model curves E(m1, m2) vs g1/g2, one per (g2, kappa)
/// combination. Ratios must lie in [0, 1).
pub fn ratio_sweep(
    g2_values: &[f64],
    ratio_axis: &AxisSpec,
    kappa_values: &[f64],
    fixed: &FixedParams,
) -> Result<RatioSweepResult> {
    if ratio_axis.name != AxisName::G1OverG2 {
        return Err(Error::GridInvalid(format!(
            "ratio axis must sweep g1_over_g2, got {}",
            ratio_axis.name.label()
        )));
    }
    ratio_axis.validate()?;
    if ratio_axis.min < 0.0 || ratio_axis.max >= 1.0 {
        return Err(Error::GridInvalid(format!(
            "coupling ratios must lie in [0, 1), got [{}, {}]",
            ratio_axis.min, ratio_axis.max
        )));
    }
    if g2_values.is_empty() || kappa_values.is_empty() {
        return Err(Error::GridInvalid(
            "ratio sweep needs at least one g2 and one kappa".into(),
        ));
    }
    let ratios = ratio_axis.values();
    let mut curves = Vec::new();
    for &g2 in g2_values {
        for &kappa in kappa_values {
            let spec = GridSpec {
                axis1: *ratio_axis,
                axis2: None,
                fixed: FixedParams {
                    g2,
                    kappa,
                    ..*fixed
                },
                model: ModelKind::Resonant,
                task: SweepTask::Both,
            };
            let result = run_sweep(&spec)?;
            let e: Vec<Option<f64>> = result.rows.iter().map(|r| r.e_m1m2).collect();
            let argmax_ratio = e
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|e| (i, e)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| ratios[i]);
            curves.push(RatioCurve {
                g2,
                kappa,
                ratios: ratios.clone(),
                e_m1m2: e,
                argmax_ratio,
            });
        }
    }
    Ok(RatioSweepResult { curves })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_stability_spec() -> GridSpec {
        GridSpec {
            axis1: AxisSpec {
                name: AxisName::G1,
                min: 0.0002,
                max: 0.003,
                count: 12,
            },
            axis2: Some(AxisSpec {
                name: AxisName::G2,
                min: 0.0002,
                max: 0.003,
                count: 12,
            }),
            fixed: FixedParams::default(),
            model: ModelKind::Rwa,
            task: SweepTask::Stability,
        }
    }

    #[test]
    fn degenerate_grid_rows_are_identical() {
        let spec = GridSpec {
            axis1: AxisSpec {
                name: AxisName::Delta1,
                min: 0.5,
                max: 0.5,
                count: 2,
            },
            axis2: Some(AxisSpec {
                name: AxisName::Delta2,
                min: 0.5,
                max: 0.5,
                count: 2,
            }),
            fixed: FixedParams {
                g1: 0.001,
                g2: 0.001,
                ..FixedParams::default()
            },
            model: ModelKind::Rwa,
            task: SweepTask::Both,
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 4);
        for r in &res.rows[1..] {
            assert_eq!(r.stable, res.rows[0].stable);
            assert_eq!(r.margin, res.rows[0].margin);
            assert_eq!(r.e_m1m2, res.rows[0].e_m1m2);
        }
    }

    #[test]
    fn repeat_runs_are_bit_identical() {
        let spec = small_stability_spec();
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn weak_equal_couplings_stable_over_the_whole_detuning_plane() {
        // at g1 = g2 = 0.5 MHz every detuning cell is stable; at 3 MHz
        // unstable pockets appear
        let detuning_map = |g: f64| GridSpec {
            axis1: AxisSpec {
                name: AxisName::Delta1,
                min: -1.0,
                max: 1.0,
                count: 25,
            },
            axis2: Some(AxisSpec {
                name: AxisName::Delta2,
                min: -1.0,
                max: 1.0,
                count: 25,
            }),
            fixed: FixedParams {
                g1: g,
                g2: g,
                ..FixedParams::default()
            },
            model: ModelKind::Rwa,
            task: SweepTask::Stability,
        };
        let weak = run_sweep(&detuning_map(0.0005)).unwrap();
        assert!(weak.rows.iter().all(|r| r.stable));
        let strong = run_sweep(&detuning_map(0.003)).unwrap();
        assert!(strong.rows.iter().any(|r| !r.stable));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let spec = small_stability_spec();
        let par = run_sweep(&spec).unwrap();
        let ser = run_sweep_serial(&spec).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn row_major_ordering() {
        let spec = GridSpec {
            axis1: AxisSpec {
                name: AxisName::G1,
                min: 0.001,
                max: 0.002,
                count: 2,
            },
            axis2: Some(AxisSpec {
                name: AxisName::G2,
                min: 0.001,
                max: 0.003,
                count: 3,
            }),
            fixed: FixedParams::default(),
            model: ModelKind::Rwa,
            task: SweepTask::Stability,
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 6);
        assert_eq!(res.rows[0].axis1, 0.001);
        assert_eq!(res.rows[0].axis2, Some(0.001));
        assert_eq!(res.rows[1].axis2, Some(0.002));
        assert_eq!(res.rows[3].axis1, 0.002);
        assert_eq!(res.rows[3].axis2, Some(0.001));
    }

    #[test]
    fn stable_cells_carry_entanglement_and_unstable_do_not() {
        let spec = GridSpec {
            axis1: AxisSpec {
                name: AxisName::G1,
                min: 0.0005,
                max: 0.002,
                count: 8,
            },
            axis2: None,
            fixed: FixedParams {
                g2: 0.001,
                ..FixedParams::default()
            },
            model: ModelKind::Rwa,
            task: SweepTask::Both,
        };
        let res = run_sweep(&spec).unwrap();
        let mut saw_stable = false;
        let mut saw_unstable = false;
        for r in &res.rows {
            if r.stable && r.error.is_none() {
                saw_stable = true;
                assert!(r.e_m1m2.is_some());
            }
            if !r.stable {
                saw_unstable = true;
                assert!(r.e_m1m2.is_none());
                assert!(r.margin >= -crate::stability::EPS_STAB);
            }
        }
        assert!(saw_stable && saw_unstable);
    }

    #[test]
    fn effective_model_zero_detuning_cell_degrades_to_error_row() {
        let spec = GridSpec {
            axis1: AxisSpec {
                name: AxisName::Delta1,
                min: -0.5,
                max: 0.5,
                count: 3, // middle value is exactly zero
            },
            axis2: None,
            fixed: FixedParams {
                delta_2: 0.9,
                g1: 0.0005,
                g2: 0.0005,
                ..FixedParams::default()
            },
            model: ModelKind::Effective,
            task: SweepTask::Both,
        };
        let res = run_sweep(&spec).unwrap();
        assert!(res.rows[1].error.is_some());
        assert!(res.rows[0].error.is_none());
    }

    #[test]
    fn axis_model_mismatch_rejected() {
        let mut spec = small_stability_spec();
        spec.model = ModelKind::Resonant;
        spec.axis1.name = AxisName::Delta1;
        assert!(matches!(run_sweep(&spec), Err(Error::GridInvalid(_))));
    }

    #[test]
    fn ratio_sweep_endpoint_and_argmax() {
        let axis = AxisSpec {
            name: AxisName::G1OverG2,
            min: 0.0,
            max: 0.99,
            count: 34,
        };
        let res = ratio_sweep(&[0.03], &axis, &[0.005], &FixedParams::default()).unwrap();
        assert_eq!(res.curves.len(), 1);
        let c = &res.curves[0];
        // ratio 0 decouples the squeezing channel entirely
        assert_eq!(c.e_m1m2[0], Some(0.0));
        let am = c.argmax_ratio.unwrap();
        assert!(am > 0.0 && am < 0.99);
    }
}
