//! Stability classification of drift matrices by two independent routes:
//! the spectrum (ground truth) and the Routh-Hurwitz determinant chain on
//! the characteristic polynomial.
//!
//! For the static three-mode model the degree-6 coefficients are also
//! available in closed form; the numeric and closed-form routes agree to
//! machine precision and cross-validate each other.

use nalgebra::DMatrix;

use crate::models::{derive_params, DriftMatrix, PhysicalParams};
use crate::{Error, Result};

/// Spectral margin below which a matrix counts as strictly Hurwitz.
/// Marginal spectra (margin in [-EPS_STAB, 0]) are classified unstable:
/// Lyapunov solves downstream require strict stability.
pub const EPS_STAB: f64 = 1e-12;

/// |margin| band inside which the eigenvalue and Routh-Hurwitz verdicts may
/// legitimately disagree from rounding.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Monic characteristic polynomial det(lambda I - A), coefficients in
/// descending powers: `coeffs[0]` = 1, `coeffs[k]` multiplies lambda^(n-k).
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

impl CharPoly {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::ModelInvalid(
                "characteristic polynomial needs degree >= 1".into(),
            ));
        }
        if coeffs[0] != 1.0 {
            return Err(Error::ModelInvalid(format!(
                "characteristic polynomial must be monic, got a0 = {}",
                coeffs[0]
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// a_k, the coefficient of lambda^(degree - k).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// How a [`StabilityVerdict`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMethod {
    Eigen,
    RouthHurwitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Max real part of the spectrum (rad/ns); only the eigenvalue route
    /// produces one.
    pub margin: Option<f64>,
    pub method: StabilityMethod,
    /// 1-based index of the first non-positive Hurwitz determinant.
    pub failed_condition: Option<usize>,
    /// False when the verdict rests on a determinant whose sign cannot be
    /// resolved at working precision (numerically singular Hurwitz matrix).
    /// Such points sit on a determinant cusp; cross-checks must skip them.
    pub decisive: bool,
}

/// Coefficients of det(lambda I - A) by the Faddeev-LeVerrier recurrence:
/// M_1 = A, c_k = -tr(A M_k)/k, M_{k+1} = A M_k + c_k I.
pub fn char_poly_numeric(a: &DriftMatrix) -> Result<CharPoly> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut m = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        m = a * m;
        let c = -m.trace() / k as f64;
        coeffs.push(c);
        for i in 0..n {
            m[(i, i)] += c;
        }
    }
    CharPoly::from_coeffs(coeffs)
}

/// Closed-form degree-6 coefficients for the static three-mode model.
///
/// Transcribed from the analytic expansion of det(lambda I - A) in
/// (omega_c, varpi, omega_2, g1, g2, kappa, gamma_1, gamma_2); agrees with
/// [`char_poly_numeric`] of the same drift matrix to ~1e-15 relative.
pub fn char_poly_closed_form(p: &PhysicalParams) -> Result<CharPoly> {
    let d = derive_params(p)?;
    let (wc, vp, w2) = (p.omega_c(), d.varpi, p.omega_2());
    let (g1, g2) = (d.g1, p.g2_ang());
    let (k, gm1, gm2) = (p.kappa_ang(), p.gamma_1_ang(), p.gamma_2_ang());
    let (g1s, g2s) = (g1 * g1, g2 * g2);
    let (wcs, vps, w2s) = (wc * wc, vp * vp, w2 * w2);

    let a1 = gm1 + gm2 + k;
    let a2 = 0.25 * (gm1 * gm1 + gm2 * gm2 + k * k) + gm1 * gm2 + gm1 * k + gm2 * k - 2.0 * g1s
        + 2.0 * g2s
        + w2s
        + wcs
        + vps;
    let a3 = 0.25
        * (gm1 * gm1 * gm2
            + gm1 * gm1 * k
            + gm1 * gm2 * gm2
            + 4.0 * gm1 * gm2 * k
            + 4.0 * wcs * (gm1 + gm2)
            + gm1 * k * k
            + 4.0 * gm1 * w2s
            + gm2 * gm2 * k
            + gm2 * k * k
            + 4.0 * gm2 * vps
            - 4.0 * g1s * (gm1 + 2.0 * gm2 + k)
            + 4.0 * g2s * (2.0 * gm1 + gm2 + k)
            + 4.0 * k * w2s
            + 4.0 * k * vps);
    let a4 = (1.0 / 16.0)
        * (16.0 * g1s * g1s
            + 16.0 * g2s * g2s
            + gm1 * gm1 * gm2 * gm2
            + 4.0 * gm1 * gm1 * gm2 * k
            + 4.0 * gm1 * gm2 * gm2 * k
            + gm1 * gm1 * k * k
            + 4.0 * gm1 * gm2 * k * k
            + gm2 * gm2 * k * k
            + 4.0 * gm2 * gm2 * vps
            + 16.0 * gm2 * k * vps
            + 4.0 * k * k * vps
            + 4.0 * gm1 * gm1 * w2s
            + 16.0 * gm1 * k * w2s
            + 4.0 * k * k * w2s
            + 16.0 * w2s * vps
            + 4.0 * wcs * (gm1 * gm1 + 4.0 * gm1 * gm2 + gm2 * gm2 + 4.0 * (w2s + vps))
            - 8.0
                * g1s
                * (4.0 * g2s
                    + 2.0 * gm1 * gm2
                    + gm2 * gm2
                    + gm1 * k
                    + 2.0 * gm2 * k
                    + 4.0 * w2s
                    + 4.0 * wc * vp)
            + 8.0
                * g2s
                * (gm1 * gm1 + gm2 * k + 2.0 * gm1 * (gm2 + k) - 4.0 * w2 * wc + 4.0 * vps));
    let a5 = (1.0 / 16.0)
        * (16.0 * g2s * g2s * gm1
            + 16.0 * g1s * g1s * gm2
            + gm2 * k * (gm1 * gm2 * k + gm1 * gm1 * (gm2 + k) + 4.0 * (gm2 + k) * vps)
            + 4.0 * w2s * k * (gm1 * (gm1 + k) + 4.0 * vps)
            + 4.0 * wcs * (gm1 * gm2 * (gm1 + gm2) + 4.0 * gm2 * vps + 4.0 * gm1 * w2s)
            - 4.0
                * g1s
                * (4.0 * g2s * (gm1 + gm2)
                    + gm2 * gm2 * k
                    + 4.0 * k * w2s
                    + gm1 * (gm2 * gm2 + 2.0 * gm2 * k + 4.0 * w2s)
                    + 8.0 * gm2 * vp * wc)
            + 4.0
                * g2s
                * (gm1 * gm1 * (gm2 + k)
                    + 4.0 * vps * (gm2 + k)
                    + 2.0 * gm1 * (gm2 * k - 4.0 * w2 * wc)));
    let a6 = (1.0 / 64.0)
        * (-8.0
            * g2s
            * (4.0 * g1s * (gm1 * gm2 - 4.0 * w2 * vp)
                - (gm1 * gm1 + 4.0 * vps) * (gm2 * k - 4.0 * w2 * wc))
            + (gm2 * gm2 + 4.0 * w2s)
                * ((gm1 * gm1 + 4.0 * vps) * (k * k + 4.0 * wcs)
                    - 8.0 * g1s * (gm1 * k + 4.0 * wc * vp))
            + 16.0 * g2s * g2s * (gm1 * gm1 + 4.0 * vps)
            + 16.0 * g1s * g1s * (gm2 * gm2 + 4.0 * w2s));

    CharPoly::from_coeffs(vec![1.0, a1, a2, a3, a4, a5, a6])
}

/// Hurwitz matrices T^k for k = 1..degree.
///
/// Entry (i, j) is a_{2i-j}, zero when 2i-j falls outside [0, degree]. The
/// zero rule is bounded by the polynomial degree, not the sub-matrix size:
/// only that reading makes the determinant chain agree with the eigenvalue
/// oracle (the size-bound variant already fails on a1*a2 > a3).
pub fn hurwitz_matrices(cp: &CharPoly) -> Vec<DMatrix<f64>> {
    let n = cp.degree();
    (1..=n)
        .map(|k| {
            DMatrix::from_fn(k, k, |i, j| {
                // matrix positions are 1-based in the entry rule
                let idx = 2 * (i as i64 + 1) - (j as i64 + 1);
                if idx >= 0 && idx <= n as i64 {
                    cp.coeff(idx as usize)
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Rescales the polynomial to the unit characteristic rate
/// s = max_k |a_k|^(1/k): a_k -> a_k / s^k. Every Hurwitz determinant picks
/// up the positive factor s^(-k(k+1)/2), so signs are preserved while the
/// wildly graded decay/frequency scales collapse to O(1) entries.
fn rate_normalized(cp: &CharPoly) -> CharPoly {
    let s = cp
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, a)| **a != 0.0)
        .map(|(k, a)| a.abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    if s == 0.0 || !s.is_finite() {
        return cp.clone();
    }
    let coeffs = cp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| a / s.powi(k as i32))
        .collect();
    CharPoly { coeffs }
}

/// Routh-Hurwitz verdict: stable iff every Hurwitz determinant is positive.
///
/// Determinants are evaluated on the rate-normalized polynomial (same
/// signs, balanced entries). A sign is only trusted when its matrix is far
/// from numerical singularity; the system has razor-thin cusps (e.g. the
/// zero-detuning coupling diagonal) where a determinant is 20+ digits
/// smaller than its constituent products and the f64 sign is meaningless.
/// Verdicts resting on such a determinant report `decisive = false`.
pub fn routh_hurwitz_stable(cp: &CharPoly) -> StabilityVerdict {
    let scaled = rate_normalized(cp);
    let mut failed = None;
    let mut decisive = true;
    for (k, m) in hurwitz_matrices(&scaled).iter().enumerate() {
        let det = m.determinant();
        let trustworthy = if k == 0 {
            true
        } else {
            match m.clone().try_inverse() {
                Some(inv) => {
                    let cond = m.norm() * inv.norm();
                    cond.is_finite() && f64::EPSILON * cond < 0.5
                }
                None => false,
            }
        };
        if det <= 0.0 {
            failed = Some(k + 1);
            decisive = trustworthy;
            break;
        }
        if !trustworthy {
            decisive = false;
        }
    }
    StabilityVerdict {
        stable: failed.is_none(),
        margin: None,
        method: StabilityMethod::RouthHurwitz,
        failed_condition: failed,
        decisive,
    }
}

/// The shortcut condition chain for degree-6 polynomials
/// (a_k > 0; a1 a2 > a3; a1 a2 a3 > a3^2 + a1^2 a4; T1 > T2; T3 > T4).
///
/// Returns (all satisfied, first failed 1-based index). Diagnostic only: the
/// chain is not equivalent to the determinant criterion away from the
/// regime it was derived for, so verdicts come from [`routh_hurwitz_stable`].
pub fn simplified_conditions(cp: &CharPoly) -> Result<(bool, Option<usize>)> {
    if cp.degree() != 6 {
        return Err(Error::ModelInvalid(format!(
            "shortcut conditions are specific to degree 6, got {}",
            cp.degree()
        )));
    }
    let a = cp.coeffs();
    let (a1, a2, a3, a4, a5, a6) = (a[1], a[2], a[3], a[4], a[5], a[6]);
    let t1 = (a1 * a4 - a5) * (a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4);
    let t2 = a1 * a5 * a5 + a5 * (a1 * a2 - a3) * (a1 * a2 - a3);
    let t3 = a1 * a1 * a6 * (2.0 * a2 * a5 + a3 * a4)
        + a3 * a3 * a3 * a6
        + a1 * a2 * a3 * a4 * a5
        + a5 * a5 * (2.0 * a1 * a4 + a2 * a3);
    let t4 = a1 * a1 * (a1 * a6 * a6 + a4 * a4 * a5)
        + a5 * a5 * a5
        + a4 * a5 * a3 * a3
        + a1 * (a2 * a6 * a3 * a3 + 3.0 * a3 * a5 * a6 + a2 * a2 * a5 * a5);
    let conds = [
        a[1..].iter().all(|c| *c > 0.0),
        a1 * a2 > a3,
        a1 * a2 * a3 > a3 * a3 + a1 * a1 * a4,
        t1 > t2,
        t3 > t4,
    ];
    let first_failed = conds.iter().position(|c| !c).map(|i| i + 1);
    Ok((first_failed.is_none(), first_failed))
}

/// Ground-truth stability from the spectrum: stable iff every eigenvalue
/// real part is below -[`EPS_STAB`].
pub fn eigen_stable(a: &DriftMatrix) -> Result<StabilityVerdict> {
    let margin = spectral_margin(a)?;
    Ok(StabilityVerdict {
        stable: margin < -EPS_STAB,
        margin: Some(margin),
        method: StabilityMethod::Eigen,
        failed_condition: None,
        decisive: true,
    })
}

/// Max real part of the spectrum of a real square matrix.
pub fn spectral_margin(a: &DriftMatrix) -> Result<f64> {
    let schur =
        nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailed)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}
