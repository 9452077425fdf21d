//! Pairwise entanglement queries on the three-mode steady state, the
//! closed-form magnon-magnon negativity of the two-magnon model, and the
//! bright-mode cooling figures of merit.

use crate::gaussian::{log_negativity, CovarianceMatrix};
use crate::models::{derive_params, PhysicalParams};
use crate::{Error, Result};

/// Values below this report as exactly zero (stabilizes map rendering).
pub const EN_FLOOR: f64 = 1e-12;

fn floored(e: f64) -> f64 {
    if e < EN_FLOOR {
        0.0
    } else {
        e
    }
}

/// Logarithmic negativity of each bipartition of (cavity, magnon 1, magnon 2),
/// in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub e_cm1: f64,
    pub e_cm2: f64,
    pub e_m1m2: f64,
}

/// Reduces a physical 6x6 covariance matrix to each mode pair and computes
/// the logarithmic negativity.
pub fn pairwise_entanglement(sigma: &CovarianceMatrix) -> Result<EntanglementReport> {
    if sigma.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: 2 * sigma.n_modes(),
        });
    }
    if !sigma.is_physical() {
        return Err(Error::Unphysical {
            margin: sigma.physicality_margin(),
        });
    }
    Ok(EntanglementReport {
        e_cm1: floored(log_negativity(&sigma.reduce_two_mode(0, 1)?)?),
        e_cm2: floored(log_negativity(&sigma.reduce_two_mode(0, 2)?)?),
        e_m1m2: floored(log_negativity(&sigma.reduce_two_mode(1, 2)?)?),
    })
}

/// Steady-state magnon-magnon negativity of the two-magnon model with equal
/// magnon decays: E_N = ln(1 + 2G / sqrt((Omega_1 + Omega_2)^2 + gamma^2)).
///
/// Exact for that model (for G >= 0), and bounded by
/// ln(1 + 2G / |Omega_1 + Omega_2|), hence by ln 2 when the detunings are
/// equal.
pub fn closed_form_en(omega_1_eff: f64, omega_2_eff: f64, g_eff: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveGamma { gamma });
    }
    let s = omega_1_eff + omega_2_eff;
    let e = (1.0 + 2.0 * g_eff / (s * s + gamma * gamma).sqrt()).ln();
    Ok(floored(e.max(0.0)))
}

/// Sideband-cooling figures of merit for the resonant scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingDiagnostics {
    /// Cavity/bright-mode coupling J = sqrt(g2^2 - g1^2) (rad/ns).
    pub j_eff: f64,
    /// Squeezing amplitude r = arctanh(g1/g2).
    pub r_squeeze: f64,
    /// Bright-mode dissipation Gamma = 4 J^2 / kappa (rad/ns).
    pub gamma_eff: f64,
    /// Gamma / max(gamma_1, gamma_2); cooling requires this >> 1.
    pub gamma_ratio: f64,
}

/// Requires g1 < g2 and kappa > 0; at g1 -> g2 the cooling rate collapses
/// and steady-state entanglement dies with it.
pub fn cooling_diagnostics(p: &PhysicalParams) -> Result<CoolingDiagnostics> {
    let d = derive_params(p)?;
    let g2 = p.g2_ang();
    if !(d.g1 >= 0.0 && d.g1 < g2) {
        return Err(Error::DarkModeUndefined { g1: d.g1, g2 });
    }
    if !(p.kappa > 0.0) {
        return Err(Error::ModelInvalid(format!(
            "cooling diagnostics need kappa > 0, got {}",
            p.kappa
        )));
    }
    let j = d.j_eff.expect("defined for g1 < g2");
    let gamma_eff = d.gamma_eff.expect("defined for kappa > 0");
    let gmax = p.gamma_1_ang().max(p.gamma_2_ang());
    Ok(CoolingDiagnostics {
        j_eff: j,
        r_squeeze: d.r_squeeze.expect("defined for g1 < g2"),
        gamma_eff,
        gamma_ratio: if gmax > 0.0 {
            gamma_eff / gmax
        } else {
            f64::INFINITY
        },
    })
}
