//! Command implementations on top of the core library.

use std::path::Path;

use magnon_sim_core::dynamics::{
    compare_models, propagate, settle_time, ComparisonPair, Drift, PropagationConfig,
};
use magnon_sim_core::entanglement::pairwise_entanglement;
use magnon_sim_core::gaussian::{vacuum_cm, ModeLayout};
use magnon_sim_core::models::{
    derive_params, diffusion_matrix, hamiltonian_effective, hamiltonian_full, hamiltonian_resonant,
    hamiltonian_rwa, rwa_validity, QuadraticHamiltonian,
};
use magnon_sim_core::sweep::{ratio_sweep, run_sweep, AxisName, AxisSpec, GridSpec, SweepTask};
use magnon_sim_core::TAU;

use crate::config::{OutputFormat, PairName, RunConfig, SimModel};
use crate::output::{emit, Cell, Table};
use crate::CliError;

fn numerical(e: magnon_sim_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

/// `params`: derived-parameter report (text by default, JSON on request).
pub fn params(cfg: &RunConfig, path: Option<&Path>, format: OutputFormat) -> Result<(), CliError> {
    let p = &cfg.params;
    let d = derive_params(p).map_err(|e| CliError::Config(e.to_string()))?;
    let validity = rwa_validity(p, -10, 8).map_err(|e| CliError::Config(e.to_string()))?;

    if format == OutputFormat::Json {
        let doc = serde_json::json!({
            "config": cfg,
            "derived": {
                "xi": d.xi,
                "g1_ghz": d.g1 / TAU,
                "varpi_ghz": d.varpi / TAU,
                "delta_1_ghz": d.delta_1 / TAU,
                "delta_2_ghz": d.delta_2 / TAU,
                "omega_1_eff_ghz": d.omega_1_eff.map(|v| v / TAU),
                "omega_2_eff_ghz": d.omega_2_eff.map(|v| v / TAU),
                "g_eff_ghz": d.g_eff.map(|v| v / TAU),
                "j_eff_ghz": d.j_eff.map(|v| v / TAU),
                "r_squeeze": d.r_squeeze,
                "gamma_eff_ghz": d.gamma_eff.map(|v| v / TAU),
                "g1_rad_ns": d.g1,
                "varpi_rad_ns": d.varpi,
                "delta_1_rad_ns": d.delta_1,
                "delta_2_rad_ns": d.delta_2,
                "rwa_validity_ratio": validity,
            },
        });
        let text = format!("{}\n", serde_json::to_string_pretty(&doc).unwrap());
        return match path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        };
    }

    let cyc = |v: f64| format!("{:14.9} GHz  = {:14.9} rad/ns", v / TAU, v);
    let opt = |v: Option<f64>| match v {
        Some(v) => cyc(v),
        None => "           (not defined in this regime)".to_string(),
    };
    let mut text = String::new();
    text.push_str("derived parameters\n");
    text.push_str(&format!(
        "  xi       = {:.9}  (drive amplitude / drive frequency)\n",
        d.xi
    ));
    text.push_str(&format!("  g1       = {}\n", cyc(d.g1)));
    text.push_str(&format!("  varpi    = {}\n", cyc(d.varpi)));
    text.push_str(&format!("  Delta_1  = {}\n", cyc(d.delta_1)));
    text.push_str(&format!("  Delta_2  = {}\n", cyc(d.delta_2)));
    text.push_str(&format!("  Omega_1  = {}\n", opt(d.omega_1_eff)));
    text.push_str(&format!("  Omega_2  = {}\n", opt(d.omega_2_eff)));
    text.push_str(&format!("  G        = {}\n", opt(d.g_eff)));
    text.push_str(&format!("  J        = {}\n", opt(d.j_eff)));
    text.push_str(&format!(
        "  r        = {}\n",
        d.r_squeeze
            .map(|r| format!("{r:14.9}"))
            .unwrap_or_else(|| "           (not defined in this regime)".into())
    ));
    text.push_str(&format!("  Gamma    = {}\n", opt(d.gamma_eff)));
    text.push_str(&format!(
        "  min |delta_f| / (g1' |J_f(xi)|) over f != -1 in [-10, 8]: {}\n",
        validity
            .map(|v| format!("{v:.1}"))
            .unwrap_or_else(|| "unbounded (no non-resonant sidebands)".into())
    ));
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid_spec(cfg: &RunConfig, task: SweepTask) -> GridSpec {
    GridSpec {
        axis1: cfg.grid.axis1,
        axis2: cfg.grid.axis2,
        fixed: cfg.grid.fixed,
        model: cfg.grid.model,
        task,
    }
}

fn report_cell_errors(rows: &[magnon_sim_core::sweep::SweepRow]) {
    let n_err = rows.iter().filter(|r| r.error.is_some()).count();
    if n_err > 0 {
        let first = rows
            .iter()
            .find(|r| r.error.is_some())
            .expect("counted above");
        eprintln!(
            "warning: {n_err} grid cells failed to solve (first at axis1 = {}, axis2 = {:?}: {})",
            first.axis1,
            first.axis2,
            first.error.as_deref().unwrap_or("")
        );
    }
}

/// `stability-map`: axis1, axis2, stable (0/1), margin.
pub fn stability_map(
    cfg: &RunConfig,
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let spec = grid_spec(cfg, SweepTask::Stability);
    let result = run_sweep(&spec).map_err(numerical)?;
    report_cell_errors(&result.rows);
    let mut table = Table::new(vec!["axis1", "axis2", "stable", "margin"]);
    for row in &result.rows {
        table.push(vec![
            Cell::Float(row.axis1),
            Cell::opt(row.axis2),
            Cell::Int(row.stable as i64),
            Cell::Float(row.margin),
        ]);
    }
    emit("stability-map", cfg, &table, path, format)
}

/// `ent-map`: axis1, axis2, stable, E_c_m1, E_c_m2, E_m1_m2.
pub fn ent_map(cfg: &RunConfig, path: Option<&Path>, format: OutputFormat) -> Result<(), CliError> {
    let spec = grid_spec(cfg, SweepTask::Both);
    let result = run_sweep(&spec).map_err(numerical)?;
    report_cell_errors(&result.rows);
    let mut table = Table::new(vec![
        "axis1", "axis2", "stable", "E_c_m1", "E_c_m2", "E_m1_m2",
    ]);
    for row in &result.rows {
        table.push(vec![
            Cell::Float(row.axis1),
            Cell::opt(row.axis2),
            Cell::Int(row.stable as i64),
            Cell::opt(row.e_cm1),
            Cell::opt(row.e_cm2),
            Cell::opt(row.e_m1m2),
        ]);
    }
    emit("ent-map", cfg, &table, path, format)
}

fn build_model(
    cfg: &RunConfig,
    model: SimModel,
) -> Result<(QuadraticHamiltonian, Vec<f64>), CliError> {
    let p = &cfg.params;
    let pair = match model {
        SimModel::Full => (hamiltonian_full(p), p.decays().to_vec()),
        SimModel::Rwa => (hamiltonian_rwa(p), p.decays().to_vec()),
        SimModel::Resonant => (hamiltonian_resonant(p), p.decays().to_vec()),
        SimModel::Effective => (hamiltonian_effective(p), p.magnon_decays().to_vec()),
    };
    Ok((pair.0.map_err(|e| CliError::Config(e.to_string()))?, pair.1))
}

/// Propagation horizon: explicit, or 20/|margin| of the reference static
/// model.
fn horizon(cfg: &RunConfig, drift: &Drift) -> Result<f64, CliError> {
    if let Some(t) = cfg.propagation.t_end {
        return Ok(t);
    }
    let a = match drift {
        Drift::Constant(a) => a.clone(),
        // driven model: borrow the static reduction's margin for the horizon
        Drift::Modulated { .. } => {
            let (h, decays) = build_model(cfg, SimModel::Rwa)?;
            magnon_sim_core::models::drift_from_hamiltonian(&h, &decays, 0.0).map_err(numerical)?
        }
    };
    settle_time(&a).map_err(numerical)
}

/// `evolve`: t_ns, n_cavity, n_m1, n_m2 (+ E_N columns on request).
pub fn evolve(cfg: &RunConfig, path: Option<&Path>, format: OutputFormat) -> Result<(), CliError> {
    let model = cfg.model.unwrap_or(SimModel::Rwa);
    let (h, decays) = build_model(cfg, model)?;
    let drift = Drift::from_hamiltonian(&h, &decays).map_err(numerical)?;
    let d = diffusion_matrix(&decays);
    let t_end = horizon(cfg, &drift)?;
    let run = PropagationConfig {
        t_end,
        dt: cfg.propagation.dt,
        record_every: cfg.propagation.record_every,
        steady_detect_tol: cfg.propagation.steady_detect_tol,
    };
    let n_modes = decays.len();
    let traj =
        propagate(&drift, &d, &vacuum_cm(ModeLayout::new(n_modes)), &run).map_err(numerical)?;

    let with_en = cfg.propagation.entanglement;
    let mut columns = vec!["t_ns", "n_cavity", "n_m1", "n_m2"];
    if with_en {
        columns.extend_from_slice(&["E_c_m1", "E_c_m2", "E_m1_m2"]);
    }
    let mut table = Table::new(columns);
    for (t, cm) in traj.times.iter().zip(&traj.cms) {
        let pops = cm.populations();
        let mut row = vec![Cell::Float(*t)];
        if n_modes == 3 {
            row.extend(pops.iter().map(|p| Cell::Float(*p)));
        } else {
            // two-magnon model has no cavity column to fill
            row.push(Cell::Empty);
            row.extend(pops.iter().map(|p| Cell::Float(*p)));
        }
        if with_en {
            if n_modes == 3 {
                let rep = pairwise_entanglement(cm).map_err(numerical)?;
                row.extend([
                    Cell::Float(rep.e_cm1),
                    Cell::Float(rep.e_cm2),
                    Cell::Float(rep.e_m1m2),
                ]);
            } else {
                let e = magnon_sim_core::gaussian::log_negativity(cm).map_err(numerical)?;
                row.extend([Cell::Empty, Cell::Empty, Cell::Float(e)]);
            }
        }
        table.push(row);
    }
    emit("evolve", cfg, &table, path, format)
}

/// `compare`: paired population traces plus a divergence summary; exceeding
/// the configured threshold is a numerical failure.
pub fn compare(
    cfg: &RunConfig,
    pair_flag: Option<PairName>,
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let pair = pair_flag.unwrap_or(cfg.compare.pair);
    let core_pair = match pair {
        PairName::FullRwa => ComparisonPair::FullVsRwa,
        PairName::RwaEffective => ComparisonPair::RwaVsEffective,
    };
    // horizon from the reduced (model B) member
    let ref_model = match pair {
        PairName::FullRwa => SimModel::Rwa,
        PairName::RwaEffective => SimModel::Effective,
    };
    let (h, decays) = build_model(cfg, ref_model)?;
    let a_ref =
        magnon_sim_core::models::drift_from_hamiltonian(&h, &decays, 0.0).map_err(numerical)?;
    let t_end = match cfg.propagation.t_end {
        Some(t) => t,
        None => settle_time(&a_ref).map_err(numerical)?,
    };
    let run = PropagationConfig {
        t_end,
        dt: cfg.propagation.dt,
        record_every: cfg.propagation.record_every,
        steady_detect_tol: None,
    };
    let cmp = compare_models(&cfg.params, &run, core_pair).map_err(numerical)?;

    let (cols, ref_cols): (Vec<&'static str>, Vec<&'static str>) = match pair {
        PairName::FullRwa => (
            vec!["n_cavity", "n_m1", "n_m2"],
            vec!["n_cavity_ref", "n_m1_ref", "n_m2_ref"],
        ),
        PairName::RwaEffective => (vec!["n_m1", "n_m2"], vec!["n_m1_ref", "n_m2_ref"]),
    };
    let mut columns = vec!["t_ns"];
    columns.extend(&cols);
    columns.extend(&ref_cols);
    let mut table = Table::new(columns);
    for (i, t) in cmp.times.iter().enumerate() {
        let mut row = vec![Cell::Float(*t)];
        row.extend(cmp.series_a[i].iter().map(|v| Cell::Float(*v)));
        row.extend(cmp.series_b[i].iter().map(|v| Cell::Float(*v)));
        table.push(row);
    }
    // headline metric: settled-population agreement for the driven pair,
    // window sup-norm for the static/two-magnon pair
    let headline = match pair {
        PairName::FullRwa => cmp.tail_rel_diff.iter().cloned().fold(0.0f64, f64::max),
        PairName::RwaEffective => cmp.max_divergence,
    };
    for (k, name) in cmp.observables.iter().enumerate() {
        table.trailer.push(format!(
            "{name}: sup-norm divergence = {:.6e}, tail means {:.6e} vs {:.6e} (rel diff {:.6e})",
            cmp.divergence[k], cmp.tail_a[k], cmp.tail_b[k], cmp.tail_rel_diff[k]
        ));
    }
    table.trailer.push(format!(
        "headline divergence = {headline:.6e} (threshold {})",
        cfg.compare.threshold
    ));
    emit("compare", cfg, &table, path, format)?;
    for line in &table.trailer {
        eprintln!("{line}");
    }
    if headline > cfg.compare.threshold {
        return Err(CliError::Numerical(format!(
            "models disagree: headline divergence {headline:.3e} exceeds threshold {}",
            cfg.compare.threshold
        )));
    }
    Ok(())
}

/// `ratio-sweep`: curve_id, ratio, E_m1_m2 with per-curve argmax summary.
pub fn ratio_sweep_cmd(
    cfg: &RunConfig,
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let r = &cfg.ratio;
    let axis = AxisSpec {
        name: AxisName::G1OverG2,
        min: r.ratio_min,
        max: r.ratio_max,
        count: r.ratio_count,
    };
    let fixed = magnon_sim_core::sweep::FixedParams {
        gamma_1: r.gamma_1,
        gamma_2: r.gamma_2,
        ..Default::default()
    };
    let result = ratio_sweep(&r.g2_values, &axis, &r.kappa_values, &fixed).map_err(numerical)?;

    let single_kappa = r.kappa_values.len() == 1;
    let single_g2 = r.g2_values.len() == 1;
    let mut table = Table::new(vec!["curve_id", "ratio", "E_m1_m2"]);
    for curve in &result.curves {
        let id = if single_kappa {
            format!("g2={}", curve.g2)
        } else if single_g2 {
            format!("kappa={}", curve.kappa)
        } else {
            format!("g2={};kappa={}", curve.g2, curve.kappa)
        };
        for (ratio, e) in curve.ratios.iter().zip(&curve.e_m1m2) {
            table.push(vec![
                Cell::Text(id.clone()),
                Cell::Float(*ratio),
                Cell::opt(*e),
            ]);
        }
        table.trailer.push(format!(
            "{id}: argmax ratio = {}",
            curve
                .argmax_ratio
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "none (no stable cells)".into())
        ));
    }
    emit("ratio-sweep", cfg, &table, path, format)?;
    for line in &table.trailer {
        eprintln!("{line}");
    }
    Ok(())
}
