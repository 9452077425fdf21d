//! Covariance propagation d sigma/dt = A(t) sigma + sigma A(t)^T + D and the
//! steady-state Lyapunov equation A sigma + sigma A^T = -D.
//!
//! Propagation is classical fixed-step RK4 with the state symmetrized after
//! every step. The step size is capped at (2 pi / omega_max) / 20 with
//! omega_max the largest |entry| of A over the run. Defaults run well below
//! the cap: (2 pi / omega_max) / 160 for constant drifts (vacuum-adjacent
//! states dip below the uncertainty bound at the bare cap) and / 256 for
//! cosine-modulated drifts (coarse drive sampling makes the discrete
//! covariance map parametrically unstable long before the cap is reached).

use nalgebra::{DMatrix, DVector};

use crate::gaussian::CovarianceMatrix;
use crate::models::{DiffusionMatrix, DriftMatrix, QuadraticHamiltonian};
use crate::stability::eigen_stable;
use crate::{Error, Result};

/// Hard cap: at least this many steps per period of the fastest drift entry.
pub const DT_CAP_STEPS_PER_PERIOD: f64 = 20.0;
/// Default resolution for constant drifts. States hugging the uncertainty
/// bound (vacuum starts) tolerate ~1e-16 margin dips at this resolution;
/// at the bare cap the dip grows past 1e-5.
pub const CONSTANT_STEPS_PER_PERIOD: f64 = 160.0;
/// Default resolution for cosine-modulated drifts: drive sampling coarser
/// than ~1/64 of the fastest period makes the discrete covariance map
/// parametrically unstable, and accuracy near criticality needs more.
pub const MODULATED_STEPS_PER_PERIOD: f64 = 256.0;
/// Relative Frobenius tolerance enforced on every returned steady state.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;
/// Default steady-detection threshold: relative Frobenius drift per ns.
pub const STEADY_DRIFT_TOL: f64 = 1e-8;
/// Steady detection must hold over this many consecutive records.
pub const STEADY_DETECT_RECORDS: usize = 100;
/// Physicality floor for mid-run covariances; below this the step size has
/// failed.
pub const RUN_PHYSICALITY_FLOOR: f64 = -1e-6;

/// Drift matrix of the covariance ODE, either constant or cosine-modulated
/// A(t) = base + cos(omega t) * modulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    Constant(DriftMatrix),
    Modulated {
        base: DriftMatrix,
        modulation: DriftMatrix,
        omega: f64,
    },
}

impl Drift {
    /// Langevin drift of a (possibly modulated) quadratic form with the given
    /// per-mode decay rates.
    pub fn from_hamiltonian(h: &QuadraticHamiltonian, decays: &[f64]) -> Result<Self> {
        let base = crate::models::drift_from_hamiltonian(h, decays, 0.0)?;
        match h.modulation() {
            None => Ok(Drift::Constant(base)),
            Some(m) => {
                // the decay part lives in `base`; the modulated part is pure
                // Omega * M_mod
                let omega_s = crate::gaussian::symplectic_form(h.n_modes());
                let zero_phase = &omega_s * &m.matrix;
                let base0 = &base - &zero_phase;
                Ok(Drift::Modulated {
                    base: base0,
                    modulation: zero_phase,
                    omega: m.omega,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Drift::Constant(a) => a.nrows(),
            Drift::Modulated { base, .. } => base.nrows(),
        }
    }

    pub fn is_modulated(&self) -> bool {
        matches!(self, Drift::Modulated { .. })
    }

    /// Largest |entry| of A(t) over the run.
    pub fn max_abs_entry(&self) -> f64 {
        match self {
            Drift::Constant(a) => a.amax(),
            Drift::Modulated {
                base, modulation, ..
            } => base
                .iter()
                .zip(modulation.iter())
                .map(|(b, m)| b.abs() + m.abs())
                .fold(0.0, f64::max),
        }
    }

    /// Largest admissible fixed step, (2 pi / omega_max) / 20.
    pub fn dt_cap(&self) -> f64 {
        let wmax = self.max_abs_entry();
        if wmax == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::TAU / wmax / DT_CAP_STEPS_PER_PERIOD
        }
    }

    /// Default step, well below the cap (see module docs).
    pub fn dt_default(&self) -> f64 {
        let wmax = self.max_abs_entry();
        if wmax == 0.0 {
            return 1.0;
        }
        let steps = if self.is_modulated() {
            MODULATED_STEPS_PER_PERIOD
        } else {
            CONSTANT_STEPS_PER_PERIOD
        };
        std::f64::consts::TAU / wmax / steps
    }

    /// A(t) as a fresh dense matrix.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match self {
            Drift::Constant(a) => a.clone(),
            Drift::Modulated {
                base,
                modulation,
                omega,
            } => base + modulation * (omega * t).cos(),
        }
    }
}

/// Fixed-step propagation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    /// Integration horizon (ns).
    pub t_end: f64,
    /// Fixed step (ns); `None` selects the drift's default. Must not exceed
    /// the (2 pi / omega_max) / 20 cap.
    pub dt: Option<f64>,
    /// Record stride in steps; `None` targets ~2000 records.
    pub record_every: Option<usize>,
    /// Early-stop threshold on the relative Frobenius drift per ns,
    /// sustained over [`STEADY_DETECT_RECORDS`] records; `None` disables.
    pub steady_detect_tol: Option<f64>,
}

impl PropagationConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            dt: None,
            record_every: None,
            steady_detect_tol: Some(STEADY_DRIFT_TOL),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }
}

/// Recorded covariance history; times strictly increasing, first record at
/// t = 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub cms: Vec<CovarianceMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_cm(&self) -> &CovarianceMatrix {
        self.cms.last().expect("trajectory has at least one record")
    }

    /// Per-record mode populations, one row per record.
    pub fn population_series(&self) -> Vec<Vec<f64>> {
        self.cms.iter().map(|c| c.populations()).collect()
    }
}

/// Integrates the covariance ODE from `sigma0` with RK4.
///
/// Fails on a non-finite state, on a recorded physicality margin below
/// -1e-6 (both signal a failed step size), or on a step above the cap.
/// The hot loop is monomorphized to stack matrices for the dimensions this
/// system uses.
pub fn propagate(
    drift: &Drift,
    d: &DiffusionMatrix,
    sigma0: &CovarianceMatrix,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    let n = drift.dim();
    if d.nrows() != n || sigma0.matrix().nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sigma0.matrix().nrows(),
        });
    }
    if !sigma0.is_physical() {
        return Err(Error::Unphysical {
            margin: sigma0.physicality_margin(),
        });
    }
    if !(cfg.t_end > 0.0) {
        return Err(Error::ModelInvalid(format!(
            "t_end must be positive, got {}",
            cfg.t_end
        )));
    }
    let cap = drift.dt_cap();
    let dt = cfg.dt.unwrap_or_else(|| drift.dt_default().min(cfg.t_end));
    if !(dt > 0.0) {
        return Err(Error::ModelInvalid(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if dt > cap {
        return Err(Error::StepSizeTooLarge { dt, cap });
    }
    let n_steps = (cfg.t_end / dt).ceil() as usize;
    let stride = cfg.record_every.unwrap_or_else(|| (n_steps / 2000).max(1));
    let run = Run {
        dt,
        n_steps,
        stride,
        steady_detect_tol: cfg.steady_detect_tol,
    };
    use nalgebra::{Const, Dyn};
    match n {
        2 => propagate_impl(Const::<2>, drift, d, sigma0, run),
        4 => propagate_impl(Const::<4>, drift, d, sigma0, run),
        6 => propagate_impl(Const::<6>, drift, d, sigma0, run),
        _ => propagate_impl(Dyn(n), drift, d, sigma0, run),
    }
}

#[derive(Clone, Copy)]
struct Run {
    dt: f64,
    n_steps: usize,
    stride: usize,
    steady_detect_tol: Option<f64>,
}

fn propagate_impl<D: nalgebra::Dim>(
    dim: D,
    drift: &Drift,
    d: &DiffusionMatrix,
    sigma0: &CovarianceMatrix,
    run: Run,
) -> Result<Trajectory>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<D, D>,
{
    use nalgebra::OMatrix;
    type M<D> = OMatrix<f64, D, D>;

    let n = dim.value();
    let conv = |m: &DMatrix<f64>| M::<D>::from_fn_generic(dim, dim, |i, j| m[(i, j)]);
    let dfix = conv(d);
    let (base, modulation, omega_mod) = match drift {
        Drift::Constant(a) => (conv(a), None, 0.0),
        Drift::Modulated {
            base,
            modulation,
            omega,
        } => (conv(base), Some(conv(modulation)), *omega),
    };

    // d sigma/dt into `out`, using `tmp` for the A*sigma product
    #[inline(always)]
    fn rhs<D: nalgebra::Dim>(a: &M<D>, sigma: &M<D>, d: &M<D>, tmp: &mut M<D>, out: &mut M<D>)
    where
        nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<D, D>,
    {
        tmp.gemm(1.0, a, sigma, 0.0);
        let n = sigma.nrows();
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = tmp[(i, j)] + tmp[(j, i)] + d[(i, j)];
            }
        }
    }

    let Run {
        dt,
        n_steps,
        stride,
        steady_detect_tol,
    } = run;
    let mut sigma = conv(sigma0.matrix());
    let mut a1 = base.clone();
    let mut a2 = base.clone();
    let mut a4 = base.clone();
    let mut k1 = M::<D>::zeros_generic(dim, dim);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut x = k1.clone();
    let mut tmp = k1.clone();

    let mut times = Vec::new();
    let mut cms = Vec::new();
    let mut record = |t: f64, sigma: &M<D>| -> Result<()> {
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let dense = DMatrix::from_fn(n, n, |i, j| sigma[(i, j)]);
        let cm = CovarianceMatrix::from_matrix(dense)?;
        let margin = cm.physicality_margin();
        if margin < RUN_PHYSICALITY_FLOOR {
            return Err(Error::PhysicalityLost { t, margin });
        }
        times.push(t);
        cms.push(cm);
        Ok(())
    };
    record(0.0, &sigma)?;

    let mut steady_count = 0usize;
    let mut prev_rec: (f64, M<D>) = (0.0, sigma.clone());

    for step in 1..=n_steps {
        if let Some(md) = &modulation {
            let t = (step - 1) as f64 * dt;
            let (c1, c2, c4) = (
                (omega_mod * t).cos(),
                (omega_mod * (t + 0.5 * dt)).cos(),
                (omega_mod * (t + dt)).cos(),
            );
            a1.copy_from(&base);
            a1.zip_apply(md, |o, m| *o += c1 * m);
            a2.copy_from(&base);
            a2.zip_apply(md, |o, m| *o += c2 * m);
            a4.copy_from(&base);
            a4.zip_apply(md, |o, m| *o += c4 * m);
        }
        rhs(&a1, &sigma, &dfix, &mut tmp, &mut k1);
        x.copy_from(&sigma);
        x.zip_apply(&k1, |o, k| *o += 0.5 * dt * k);
        rhs(&a2, &x, &dfix, &mut tmp, &mut k2);
        x.copy_from(&sigma);
        x.zip_apply(&k2, |o, k| *o += 0.5 * dt * k);
        rhs(&a2, &x, &dfix, &mut tmp, &mut k3);
        x.copy_from(&sigma);
        x.zip_apply(&k3, |o, k| *o += dt * k);
        rhs(&a4, &x, &dfix, &mut tmp, &mut k4);

        // sigma += dt/6 (k1 + 2 k2 + 2 k3 + k4)
        sigma.zip_apply(&k1, |o, k| *o += dt / 6.0 * k);
        sigma.zip_apply(&k2, |o, k| *o += dt / 3.0 * k);
        sigma.zip_apply(&k3, |o, k| *o += dt / 3.0 * k);
        sigma.zip_apply(&k4, |o, k| *o += dt / 6.0 * k);

        // enforce symmetry each step
        for j in 0..n {
            for i in (j + 1)..n {
                let s = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
                sigma[(i, j)] = s;
                sigma[(j, i)] = s;
            }
        }

        if step.is_multiple_of(stride) || step == n_steps {
            let t_now = step as f64 * dt;
            record(t_now, &sigma)?;
            if let Some(tol) = steady_detect_tol {
                let (t_prev, prev) = &prev_rec;
                let dt_rec = t_now - t_prev;
                let denom = sigma.norm().max(1e-300) * dt_rec;
                let drift_rate = (&sigma - prev).norm() / denom;
                if drift_rate < tol {
                    steady_count += 1;
                    if steady_count >= STEADY_DETECT_RECORDS {
                        break;
                    }
                } else {
                    steady_count = 0;
                }
                prev_rec = (t_now, sigma.clone());
            }
        }
    }
    Ok(Trajectory { times, cms })
}

/// Steady-state covariance from the Lyapunov equation A sigma + sigma A^T =
/// -D, by LU on the n^2 x n^2 Kronecker system.
///
/// Refuses non-Hurwitz drifts and solutions whose relative residual exceeds
/// [`LYAPUNOV_RESIDUAL_TOL`] (near-marginal stability makes the system
/// effectively singular in f64).
pub fn steady_state(a: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.nrows(),
        });
    }
    let verdict = eigen_stable(a)?;
    if !verdict.stable {
        return Err(Error::NotHurwitz {
            margin: verdict.margin.unwrap_or(f64::NAN),
        });
    }
    // vec(A X + X A^T) = (I (x) A + A (x) I) vec(X), column-major vec
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(a) + a.kronecker(&id);
    let rhs = DVector::from_iterator(n * n, d.iter().map(|v| -v));
    let sol = k.lu().solve(&rhs).ok_or(Error::EigenFailed)?;
    let mut sigma = DMatrix::from_column_slice(n, n, sol.as_slice());
    // symmetrize
    for j in 0..n {
        for i in (j + 1)..n {
            let s = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = s;
            sigma[(j, i)] = s;
        }
    }
    let residual = (a * &sigma + &sigma * a.transpose() + d).norm() / d.norm().max(1e-300);
    if residual >= LYAPUNOV_RESIDUAL_TOL {
        return Err(Error::LyapunovResidual {
            residual,
            tolerance: LYAPUNOV_RESIDUAL_TOL,
        });
    }
    CovarianceMatrix::from_matrix(sigma)
}

/// Horizon after which a Hurwitz system has contracted by e^-20: 20/|margin|.
pub fn settle_time(a: &DriftMatrix) -> Result<f64> {
    let v = eigen_stable(a)?;
    if !v.stable {
        return Err(Error::NotHurwitz {
            margin: v.margin.unwrap_or(f64::NAN),
        });
    }
    Ok(20.0 / v.margin.unwrap().abs())
}

/// Which pair of models to co-propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonPair {
    /// Lab-frame driven model against the static three-mode reduction.
    FullVsRwa,
    /// Static three-mode reduction against the two-magnon model.
    RwaVsEffective,
}

/// Paired population traces on a common record grid.
#[derive(Debug, Clone)]
pub struct ModelComparison {
    pub pair: ComparisonPair,
    /// Observable names, one per column.
    pub observables: Vec<&'static str>,
    pub times: Vec<f64>,
    /// Rows aligned with `times`; columns with `observables`.
    pub series_a: Vec<Vec<f64>>,
    pub series_b: Vec<Vec<f64>>,
    /// Per-observable sup-norm divergence over the window, relative to the
    /// larger trace amplitude.
    pub divergence: Vec<f64>,
    pub max_divergence: f64,
    /// Tail means (last 10% of the window) per observable.
    pub tail_a: Vec<f64>,
    pub tail_b: Vec<f64>,
    /// |tail_a - tail_b| / |tail_b| per observable (model B is the reference
    /// reduction).
    pub tail_rel_diff: Vec<f64>,
}

/// Propagates both members of a pair from vacuum with identical decays and
/// compares mode populations, the observable invariant under the frame
/// transformations relating the models.
pub fn compare_models(
    p: &crate::models::PhysicalParams,
    cfg: &PropagationConfig,
    pair: ComparisonPair,
) -> Result<ModelComparison> {
    use crate::gaussian::{vacuum_cm, ModeLayout};
    use crate::models::{
        diffusion_matrix, hamiltonian_effective, hamiltonian_full, hamiltonian_rwa,
    };

    let (drift_a, d_a, drift_b, d_b, observables, take_a, take_b): (
        Drift,
        DiffusionMatrix,
        Drift,
        DiffusionMatrix,
        Vec<&'static str>,
        Vec<usize>,
        Vec<usize>,
    ) = match pair {
        ComparisonPair::FullVsRwa => (
            Drift::from_hamiltonian(&hamiltonian_full(p)?, &p.decays())?,
            diffusion_matrix(&p.decays()),
            Drift::from_hamiltonian(&hamiltonian_rwa(p)?, &p.decays())?,
            diffusion_matrix(&p.decays()),
            vec!["n_cavity", "n_m1", "n_m2"],
            vec![0, 1, 2],
            vec![0, 1, 2],
        ),
        ComparisonPair::RwaVsEffective => (
            Drift::from_hamiltonian(&hamiltonian_rwa(p)?, &p.decays())?,
            diffusion_matrix(&p.decays()),
            Drift::from_hamiltonian(&hamiltonian_effective(p)?, &p.magnon_decays())?,
            diffusion_matrix(&p.magnon_decays()),
            vec!["n_m1", "n_m2"],
            vec![1, 2],
            vec![0, 1],
        ),
    };

    // require the static reference model(s) stable over the window
    if let Drift::Constant(a) = &drift_b {
        let v = eigen_stable(a)?;
        if !v.stable {
            return Err(Error::NotHurwitz {
                margin: v.margin.unwrap_or(f64::NAN),
            });
        }
    }
    if let Drift::Constant(a) = &drift_a {
        let v = eigen_stable(a)?;
        if !v.stable {
            return Err(Error::NotHurwitz {
                margin: v.margin.unwrap_or(f64::NAN),
            });
        }
    }

    // common record grid: both runs record at multiples of t_end / n_rec
    let n_rec = 2000usize;
    let dt_rec = cfg.t_end / n_rec as f64;
    let run = |drift: &Drift, d: &DiffusionMatrix| -> Result<Trajectory> {
        let dt_want = cfg.dt.unwrap_or_else(|| drift.dt_default()).min(dt_rec);
        let per_rec = (dt_rec / dt_want).ceil() as usize;
        let dt = dt_rec / per_rec as f64;
        if dt > drift.dt_cap() {
            return Err(Error::StepSizeTooLarge {
                dt,
                cap: drift.dt_cap(),
            });
        }
        let n_modes = drift.dim() / 2;
        propagate(
            drift,
            d,
            &vacuum_cm(ModeLayout::new(n_modes)),
            &PropagationConfig {
                t_end: cfg.t_end,
                dt: Some(dt),
                record_every: Some(per_rec),
                steady_detect_tol: None,
            },
        )
    };
    let traj_a = run(&drift_a, &d_a)?;
    let traj_b = run(&drift_b, &d_b)?;

    let len = traj_a.len().min(traj_b.len());
    let times: Vec<f64> = traj_a.times[..len].to_vec();
    let pick = |traj: &Trajectory, take: &[usize]| -> Vec<Vec<f64>> {
        traj.cms[..len]
            .iter()
            .map(|cm| {
                let pops = cm.populations();
                take.iter().map(|&i| pops[i]).collect()
            })
            .collect()
    };
    let series_a = pick(&traj_a, &take_a);
    let series_b = pick(&traj_b, &take_b);

    let n_obs = observables.len();
    let mut divergence = vec![0.0; n_obs];
    for k in 0..n_obs {
        let mut sup_diff: f64 = 0.0;
        let mut sup_amp: f64 = 0.0;
        for r in 0..len {
            sup_diff = sup_diff.max((series_a[r][k] - series_b[r][k]).abs());
            sup_amp = sup_amp.max(series_a[r][k].abs().max(series_b[r][k].abs()));
        }
        divergence[k] = if sup_amp > 0.0 {
            sup_diff / sup_amp
        } else {
            0.0
        };
    }
    let max_divergence = divergence.iter().cloned().fold(0.0, f64::max);

    let tail_from = len - (len / 10).max(1);
    let tail_mean = |series: &[Vec<f64>]| -> Vec<f64> {
        (0..n_obs)
            .map(|k| {
                let s: f64 = series[tail_from..].iter().map(|row| row[k]).sum();
                s / (len - tail_from) as f64
            })
            .collect()
    };
    let tail_a = tail_mean(&series_a);
    let tail_b = tail_mean(&series_b);
    let tail_rel_diff = tail_a
        .iter()
        .zip(&tail_b)
        .map(|(a, b)| {
            if b.abs() > 0.0 {
                (a - b).abs() / b.abs()
            } else {
                (a - b).abs()
            }
        })
        .collect();

    Ok(ModelComparison {
        pair,
        observables,
        times,
        series_a,
        series_b,
        divergence,
        max_divergence,
        tail_a,
        tail_b,
        tail_rel_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{vacuum_cm, CovarianceMatrix, ModeLayout};
    use crate::models::{
        diffusion_matrix, drift_from_hamiltonian, hamiltonian_rwa, params_from_detunings,
    };
    use crate::TAU;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_relaxation_matches_analytic_solution() {
        // A = -(kappa/2) I, D = (kappa/2) I: sigma(t) = 0.5 + 1.5 exp(-kappa t)
        let kappa = 0.8;
        let drift = Drift::Constant(DMatrix::identity(6, 6) * (-kappa / 2.0));
        let d = DMatrix::identity(6, 6) * (kappa / 2.0);
        let sigma0 = CovarianceMatrix::from_matrix(DMatrix::identity(6, 6) * 2.0).unwrap();
        let mut cfg = PropagationConfig::new(20.0);
        cfg.steady_detect_tol = None;
        cfg.dt = Some(0.01);
        let traj = propagate(&drift, &d, &sigma0, &cfg).unwrap();
        for (t, cm) in traj.times.iter().zip(&traj.cms) {
            let want = 0.5 + 1.5 * (-kappa * t).exp();
            assert_abs_diff_eq!(cm.matrix()[(0, 0)], want, epsilon = 1e-9);
        }
        let last = traj.final_cm().matrix()[(0, 0)];
        assert_abs_diff_eq!(last, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn vacuum_invariant_under_free_rotation() {
        let w = TAU * 3.0;
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = w;
        a[(1, 0)] = -w;
        let drift = Drift::Constant(a);
        let d = DMatrix::zeros(2, 2);
        let cfg = PropagationConfig {
            t_end: 5.0,
            dt: None,
            record_every: Some(50),
            steady_detect_tol: None,
        };
        let traj = propagate(&drift, &d, &vacuum_cm(ModeLayout::new(1)), &cfg).unwrap();
        for cm in &traj.cms {
            assert_abs_diff_eq!(
                cm.matrix().clone(),
                DMatrix::identity(2, 2) * 0.5,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn step_above_cap_is_rejected() {
        let w = TAU * 3.0;
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = w;
        a[(1, 0)] = -w;
        let drift = Drift::Constant(a);
        let cap = drift.dt_cap();
        let cfg = PropagationConfig::new(1.0).with_dt(cap * 1.5);
        let err = propagate(
            &drift,
            &DMatrix::zeros(2, 2),
            &vacuum_cm(ModeLayout::new(1)),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepSizeTooLarge { .. }));
    }

    #[test]
    fn coarse_step_at_the_cap_surfaces_as_physicality_loss() {
        // a vacuum start hugs the uncertainty bound; integrating the
        // interaction-only model at the bare cap dips the margin past the
        // -1e-6 run floor within the first records
        let p = params_from_detunings(10.0, 20.0, 0.0, 0.0, 0.018, 0.03, 0.005, 0.001, 0.001);
        let a = drift_from_hamiltonian(
            &crate::models::hamiltonian_resonant(&p).unwrap(),
            &p.decays(),
            0.0,
        )
        .unwrap();
        let d = diffusion_matrix(&p.decays());
        let drift = Drift::Constant(a);
        let cfg = PropagationConfig {
            t_end: 2000.0,
            dt: Some(drift.dt_cap()),
            record_every: Some(1),
            steady_detect_tol: None,
        };
        let err = propagate(&drift, &d, &vacuum_cm(ModeLayout::new(3)), &cfg).unwrap_err();
        assert!(matches!(err, Error::PhysicalityLost { .. }), "{err:?}");
    }

    #[test]
    fn steady_state_trivial_diagonal() {
        let kappa = 0.6;
        let a = DMatrix::identity(6, 6) * (-kappa / 2.0);
        let d = DMatrix::identity(6, 6) * (kappa / 2.0);
        let sigma = steady_state(&a, &d).unwrap();
        assert_abs_diff_eq!(
            sigma.matrix().clone(),
            DMatrix::identity(6, 6) * 0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn decoupled_modes_settle_to_vacuum() {
        // distinct decays per mode, no couplings: vacuum in, vacuum out
        let p = params_from_detunings(10.0, 20.0, 0.3, -0.4, 0.0, 0.0, 0.002, 0.0007, 0.004);
        let a = drift_from_hamiltonian(&hamiltonian_rwa(&p).unwrap(), &p.decays(), 0.0).unwrap();
        let d = diffusion_matrix(&p.decays());
        let sigma = steady_state(&a, &d).unwrap();
        assert_abs_diff_eq!(
            sigma.matrix().clone(),
            DMatrix::identity(6, 6) * 0.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn steady_state_refuses_unstable_drift() {
        let a = DMatrix::identity(4, 4); // positive spectrum
        let d = DMatrix::identity(4, 4);
        assert!(matches!(
            steady_state(&a, &d),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn lyapunov_residual_is_tiny_for_well_conditioned_systems() {
        let p = params_from_detunings(10.0, 20.0, 0.9, 0.9, 0.03, 0.03, 0.001, 0.001, 0.001);
        let a = drift_from_hamiltonian(&hamiltonian_rwa(&p).unwrap(), &p.decays(), 0.0).unwrap();
        let d = diffusion_matrix(&p.decays());
        let sigma = steady_state(&a, &d).unwrap();
        let res = (&a * sigma.matrix() + sigma.matrix() * a.transpose() + &d).norm() / d.norm();
        assert!(res < LYAPUNOV_RESIDUAL_TOL, "residual {res}");
    }

    #[test]
    fn propagation_converges_to_lyapunov_solution() {
        let p = params_from_detunings(10.0, 20.0, 0.9, 0.9, 0.03, 0.03, 0.001, 0.001, 0.001);
        let a = drift_from_hamiltonian(&hamiltonian_rwa(&p).unwrap(), &p.decays(), 0.0).unwrap();
        let d = diffusion_matrix(&p.decays());
        let sigma_ss = steady_state(&a, &d).unwrap();
        let t_end = settle_time(&a).unwrap();
        let drift = Drift::Constant(a);
        let mut cfg = PropagationConfig::new(t_end);
        cfg.steady_detect_tol = None;
        let traj = propagate(&drift, &d, &vacuum_cm(ModeLayout::new(3)), &cfg).unwrap();
        let err = (traj.final_cm().matrix() - sigma_ss.matrix()).norm() / sigma_ss.matrix().norm();
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn step_halving_changes_observables_below_threshold() {
        // resolve the fastest entry well so fourth-order error sits ~1e-9
        let p = params_from_detunings(10.0, 20.0, 0.5, 0.5, 0.02, 0.03, 0.002, 0.001, 0.001);
        let a = drift_from_hamiltonian(&hamiltonian_rwa(&p).unwrap(), &p.decays(), 0.0).unwrap();
        let d = diffusion_matrix(&p.decays());
        let drift = Drift::Constant(a);
        let period = std::f64::consts::TAU / drift.max_abs_entry();
        let dt = period / 1000.0;
        let t_end = 100.0 * period;
        let run = |dt: f64, stride: usize| {
            let cfg = PropagationConfig {
                t_end,
                dt: Some(dt),
                record_every: Some(stride),
                steady_detect_tol: None,
            };
            propagate(&drift, &d, &vacuum_cm(ModeLayout::new(3)), &cfg).unwrap()
        };
        let coarse = run(dt, 200);
        let fine = run(dt / 2.0, 400);
        assert_eq!(coarse.len(), fine.len());
        for (ca, cb) in coarse.cms.iter().zip(&fine.cms) {
            for (pa, pb) in ca.populations().iter().zip(cb.populations()) {
                let rel = (pa - pb).abs() / pb.abs().max(1e-3);
                assert!(rel < 1e-8, "step-halving change {rel}");
            }
        }
    }

    #[test]
    fn steady_detection_stops_early() {
        let kappa = 2.0;
        let drift = Drift::Constant(DMatrix::identity(2, 2) * (-kappa / 2.0));
        let d = DMatrix::identity(2, 2) * (kappa / 2.0);
        let sigma0 = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * 3.0).unwrap();
        let cfg = PropagationConfig {
            t_end: 1e5,
            dt: Some(0.05),
            record_every: Some(20),
            steady_detect_tol: Some(1e-8),
        };
        let traj = propagate(&drift, &d, &sigma0, &cfg).unwrap();
        let t_last = *traj.times.last().unwrap();
        assert!(t_last < 5e4, "no early stop, ran to {t_last}");
        assert_abs_diff_eq!(traj.final_cm().matrix()[(0, 0)], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn comparison_with_no_couplings_is_identically_zero() {
        let mut p = params_from_detunings(10.0, 20.0, 0.5, 0.5, 0.0, 0.0, 0.001, 0.001, 0.001);
        p.g1_prime = 0.0;
        let cfg = PropagationConfig::new(50.0);
        let cmp = compare_models(&p, &cfg, ComparisonPair::FullVsRwa).unwrap();
        assert_eq!(cmp.max_divergence, 0.0);
        for row in cmp.series_a.iter().chain(&cmp.series_b) {
            for v in row {
                assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
            }
        }
    }
}
