//! Physical parameters and their translation into quadratic Hamiltonians,
//! drift and diffusion matrices, and derived drive quantities.
//!
//! Four models of the same system, all as H = (1/2) R^T M R in the quadrature
//! ordering of [`crate::gaussian`]:
//!
//! - **full**: lab frame, three modes, magnon-1 frequency modulated as
//!   omega_1 + Omega_d cos(omega_d t) (the only time-dependent model);
//! - **rwa**: three modes at (omega_c, varpi, omega_2) with the drive folded
//!   into a static coupling g1 = -g1' J_{-1}(xi), xi = Omega_d / omega_d;
//! - **resonant**: the rwa interaction alone (the Delta_1 = Delta_2 = 0 frame);
//! - **effective**: two magnon modes after adiabatic elimination of the
//!   cavity, valid for g << Delta.
//!
//! Drift matrices follow from A = Omega M - (1/2) diag(decays), which
//! reproduces the explicit Langevin coefficient matrices of all three
//! time-independent models entrywise.

pub mod bessel;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::gaussian::symplectic_form;
use crate::{Error, Result, TAU};

pub use bessel::bessel_j;

/// Drift matrix of the linear Langevin dynamics, dR/dt = A R + noise.
pub type DriftMatrix = DMatrix<f64>;
/// Diffusion matrix of the covariance ODE (vacuum input noise).
pub type DiffusionMatrix = DMatrix<f64>;

fn default_nu_c() -> f64 {
    10.0
}
fn default_nu_1() -> f64 {
    10.1
}
fn default_nu_2() -> f64 {
    9.9
}
fn default_nu_d() -> f64 {
    20.0
}
fn default_omega_d() -> f64 {
    36.0
}
fn default_g1_prime() -> f64 {
    0.05
}
fn default_g2() -> f64 {
    0.03
}
fn default_decay() -> f64 {
    0.001
}

/// Laboratory parameters of the cavity-magnon system.
///
/// Every frequency is cyclic, in GHz (the number a caption reports as
/// omega/2pi); defaults reproduce the validation point of the drive scheme
/// (10 / 10.1 / 9.9 GHz modes, 20 GHz drive at 36 GHz amplitude, 50 / 30 MHz
/// couplings, 1 MHz decays).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Cavity frequency nu_c (GHz).
    #[serde(default = "default_nu_c")]
    pub nu_c: f64,
    /// Magnon-1 frequency nu_1 (GHz).
    #[serde(default = "default_nu_1")]
    pub nu_1: f64,
    /// Magnon-2 frequency nu_2 (GHz).
    #[serde(default = "default_nu_2")]
    pub nu_2: f64,
    /// Drive frequency nu_d (GHz).
    #[serde(default = "default_nu_d")]
    pub nu_d: f64,
    /// Drive amplitude Omega_d (GHz).
    #[serde(default = "default_omega_d")]
    pub omega_d: f64,
    /// Bare counter-rotating coupling g1' (GHz).
    #[serde(default = "default_g1_prime")]
    pub g1_prime: f64,
    /// Beam-splitter coupling g2 (GHz).
    #[serde(default = "default_g2")]
    pub g2: f64,
    /// Direct value for the reduced coupling g1 (GHz). When set, the Bessel
    /// reduction of (g1', drive) is bypassed; used by detuning sweeps.
    #[serde(default)]
    pub g1: Option<f64>,
    /// Cavity decay kappa (GHz).
    #[serde(default = "default_decay")]
    pub kappa: f64,
    /// Magnon-1 decay gamma_1 (GHz).
    #[serde(default = "default_decay")]
    pub gamma_1: f64,
    /// Magnon-2 decay gamma_2 (GHz).
    #[serde(default = "default_decay")]
    pub gamma_2: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            nu_c: default_nu_c(),
            nu_1: default_nu_1(),
            nu_2: default_nu_2(),
            nu_d: default_nu_d(),
            omega_d: default_omega_d(),
            g1_prime: default_g1_prime(),
            g2: default_g2(),
            g1: None,
            kappa: default_decay(),
            gamma_1: default_decay(),
            gamma_2: default_decay(),
        }
    }
}

impl PhysicalParams {
    /// Checks decay positivity and that a nonzero drive has a frequency.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma_1", self.gamma_1),
            ("gamma_2", self.gamma_2),
        ] {
            if !(v >= 0.0) {
                return Err(Error::ModelInvalid(format!(
                    "decay rate {name} must be >= 0, got {v}"
                )));
            }
        }
        if self.omega_d != 0.0 && self.nu_d == 0.0 {
            return Err(Error::ZeroDriveFrequency {
                amplitude: self.omega_d,
            });
        }
        Ok(())
    }

    // angular values, rad/ns
    pub fn omega_c(&self) -> f64 {
        TAU * self.nu_c
    }
    pub fn omega_1(&self) -> f64 {
        TAU * self.nu_1
    }
    pub fn omega_2(&self) -> f64 {
        TAU * self.nu_2
    }
    pub fn omega_drive(&self) -> f64 {
        TAU * self.nu_d
    }
    pub fn drive_amp(&self) -> f64 {
        TAU * self.omega_d
    }
    pub fn g1_prime_ang(&self) -> f64 {
        TAU * self.g1_prime
    }
    pub fn g2_ang(&self) -> f64 {
        TAU * self.g2
    }
    pub fn kappa_ang(&self) -> f64 {
        TAU * self.kappa
    }
    pub fn gamma_1_ang(&self) -> f64 {
        TAU * self.gamma_1
    }
    pub fn gamma_2_ang(&self) -> f64 {
        TAU * self.gamma_2
    }

    /// Decay list (kappa, gamma_1, gamma_2) in rad/ns.
    pub fn decays(&self) -> [f64; 3] {
        [self.kappa_ang(), self.gamma_1_ang(), self.gamma_2_ang()]
    }

    /// Magnon decay list (gamma_1, gamma_2) in rad/ns for the two-mode model.
    pub fn magnon_decays(&self) -> [f64; 2] {
        [self.gamma_1_ang(), self.gamma_2_ang()]
    }
}

/// Quantities derived from [`PhysicalParams`]; all frequencies in rad/ns.
///
/// Fields that are undefined in the given parameter regime (zero detuning,
/// g1 >= g2, ...) are `None` rather than NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    /// Modulation index xi = Omega_d / omega_d (dimensionless).
    pub xi: f64,
    /// Reduced coupling g1 = -g1' J_{-1}(xi), or the direct override.
    pub g1: f64,
    /// Rotating-frame magnon-1 frequency varpi = omega_1 - omega_d.
    pub varpi: f64,
    /// Counter-rotating detuning Delta_1 = omega_c + omega_1 - omega_d.
    pub delta_1: f64,
    /// Beam-splitter detuning Delta_2 = omega_c - omega_2.
    pub delta_2: f64,
    /// Effective magnon-1 frequency Omega_1 = -g1^2/Delta_1 + varpi.
    pub omega_1_eff: Option<f64>,
    /// Effective magnon-2 frequency Omega_2 = -g2^2/Delta_2 + omega_2.
    pub omega_2_eff: Option<f64>,
    /// Effective magnon-magnon coupling G = g1 g2 (1/Delta_1 + 1/Delta_2)/2.
    pub g_eff: Option<f64>,
    /// Cavity-bright-mode coupling J = sqrt(g2^2 - g1^2), defined for g2 >= g1.
    pub j_eff: Option<f64>,
    /// Squeezing amplitude r = arctanh(g1/g2), defined for g1 < g2.
    pub r_squeeze: Option<f64>,
    /// Bright-mode cooling rate Gamma = 4 J^2 / kappa.
    pub gamma_eff: Option<f64>,
}

/// Computes the reduced coupling, detunings, Bogoliubov data, and effective
/// two-magnon quantities from laboratory parameters.
pub fn derive_params(p: &PhysicalParams) -> Result<DerivedParams> {
    p.validate()?;
    let xi = if p.omega_d == 0.0 {
        0.0
    } else {
        p.omega_d / p.nu_d
    };
    let g1 = match p.g1 {
        Some(direct) => TAU * direct,
        // J_{-1}(xi) = -J_1(xi)
        None => p.g1_prime_ang() * bessel_j(1, xi)?,
    };
    let g2 = p.g2_ang();
    let varpi = p.omega_1() - p.omega_drive();
    let delta_1 = p.omega_c() + p.omega_1() - p.omega_drive();
    let delta_2 = p.omega_c() - p.omega_2();

    let omega_1_eff = (delta_1 != 0.0).then(|| -g1 * g1 / delta_1 + varpi);
    let omega_2_eff = (delta_2 != 0.0).then(|| -g2 * g2 / delta_2 + p.omega_2());
    let g_eff =
        (delta_1 != 0.0 && delta_2 != 0.0).then(|| g1 * g2 * (1.0 / delta_1 + 1.0 / delta_2) / 2.0);

    let j_eff = (g2 > 0.0 && g2 >= g1 && g1 >= 0.0).then(|| (g2 * g2 - g1 * g1).sqrt());
    let r_squeeze = (g2 > 0.0 && g1 < g2 && g1 >= 0.0).then(|| (g1 / g2).atanh());
    let gamma_eff = match (j_eff, p.kappa_ang()) {
        (Some(j), k) if k > 0.0 => Some(4.0 * j * j / k),
        _ => None,
    };

    Ok(DerivedParams {
        xi,
        g1,
        varpi,
        delta_1,
        delta_2,
        omega_1_eff,
        omega_2_eff,
        g_eff,
        j_eff,
        r_squeeze,
        gamma_eff,
    })
}

/// Builds the parameter set whose derived detunings are exactly the given
/// (Delta_1, Delta_2); g1 is taken directly, bypassing the Bessel reduction.
///
/// Inverts the detuning definitions: nu_1 = Delta_1 + nu_d - nu_c and
/// nu_2 = nu_c - Delta_2 (all cyclic GHz).
#[allow(clippy::too_many_arguments)]
pub fn params_from_detunings(
    nu_c: f64,
    nu_d: f64,
    delta_1: f64,
    delta_2: f64,
    g1: f64,
    g2: f64,
    kappa: f64,
    gamma_1: f64,
    gamma_2: f64,
) -> PhysicalParams {
    PhysicalParams {
        nu_c,
        nu_1: delta_1 + nu_d - nu_c,
        nu_2: nu_c - delta_2,
        nu_d,
        omega_d: 0.0,
        g1_prime: 0.0,
        g2,
        g1: Some(g1),
        kappa,
        gamma_1,
        gamma_2,
    }
}

/// Cosine modulation of a quadratic form: M(t) = base + cos(omega t) * matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineModulation {
    pub matrix: DMatrix<f64>,
    pub omega: f64,
}

/// Quadratic Hamiltonian H = (1/2) R^T M R, optionally cosine-modulated.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    base: DMatrix<f64>,
    modulation: Option<CosineModulation>,
}

const FORM_SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > FORM_SYMMETRY_TOL {
                return Err(Error::NotSymmetric {
                    asymmetry: (m[(i, j)] - m[(j, i)]).abs(),
                });
            }
        }
    }
    Ok(())
}

impl QuadraticHamiltonian {
    pub fn constant(base: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&base)?;
        Ok(Self {
            base,
            modulation: None,
        })
    }

    pub fn modulated(base: DMatrix<f64>, matrix: DMatrix<f64>, omega: f64) -> Result<Self> {
        check_symmetric(&base)?;
        check_symmetric(&matrix)?;
        if matrix.nrows() != base.nrows() {
            return Err(Error::DimensionMismatch {
                expected: base.nrows(),
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            base,
            modulation: Some(CosineModulation { matrix, omega }),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.base.nrows() / 2
    }

    pub fn is_time_dependent(&self) -> bool {
        self.modulation.is_some()
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    pub fn modulation(&self) -> Option<&CosineModulation> {
        self.modulation.as_ref()
    }

    /// M(t).
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match &self.modulation {
            None => self.base.clone(),
            Some(m) => &self.base + &m.matrix * (m.omega * t).cos(),
        }
    }
}

fn set_free(m: &mut DMatrix<f64>, mode: usize, omega: f64) {
    m[(2 * mode, 2 * mode)] = omega;
    m[(2 * mode + 1, 2 * mode + 1)] = omega;
}

/// g (a_i' a_j' + a_i a_j) = g (X_i X_j - Y_i Y_j): cross block g diag(1, -1).
fn set_two_mode_squeeze(m: &mut DMatrix<f64>, i: usize, j: usize, g: f64) {
    m[(2 * i, 2 * j)] = g;
    m[(2 * j, 2 * i)] = g;
    m[(2 * i + 1, 2 * j + 1)] = -g;
    m[(2 * j + 1, 2 * i + 1)] = -g;
}

/// g (a_i' a_j + a_i a_j') = g (X_i X_j + Y_i Y_j): cross block g I.
fn set_beam_splitter(m: &mut DMatrix<f64>, i: usize, j: usize, g: f64) {
    m[(2 * i, 2 * j)] = g;
    m[(2 * j, 2 * i)] = g;
    m[(2 * i + 1, 2 * j + 1)] = g;
    m[(2 * j + 1, 2 * i + 1)] = g;
}

/// Lab-frame driven Hamiltonian: free terms (omega_c, omega_1, omega_2),
/// counter-rotating cavity/magnon-1 coupling g1', beam-splitter cavity/
/// magnon-2 coupling g2, and the magnon-1 frequency modulation
/// Omega_d cos(omega_d t).
pub fn hamiltonian_full(p: &PhysicalParams) -> Result<QuadraticHamiltonian> {
    p.validate()?;
    let mut base = DMatrix::zeros(6, 6);
    set_free(&mut base, 0, p.omega_c());
    set_free(&mut base, 1, p.omega_1());
    set_free(&mut base, 2, p.omega_2());
    set_two_mode_squeeze(&mut base, 0, 1, p.g1_prime_ang());
    set_beam_splitter(&mut base, 0, 2, p.g2_ang());
    if p.omega_d == 0.0 {
        QuadraticHamiltonian::constant(base)
    } else {
        let mut md = DMatrix::zeros(6, 6);
        set_free(&mut md, 1, p.drive_amp());
        QuadraticHamiltonian::modulated(base, md, p.omega_drive())
    }
}

/// Static three-mode model after the drive reduction: frequencies
/// (omega_c, varpi, omega_2), squeezing coupling -g1, beam-splitter +g2.
pub fn hamiltonian_rwa(p: &PhysicalParams) -> Result<QuadraticHamiltonian> {
    let d = derive_params(p)?;
    let mut m = DMatrix::zeros(6, 6);
    set_free(&mut m, 0, p.omega_c());
    set_free(&mut m, 1, d.varpi);
    set_free(&mut m, 2, p.omega_2());
    set_two_mode_squeeze(&mut m, 0, 1, -d.g1);
    set_beam_splitter(&mut m, 0, 2, p.g2_ang());
    QuadraticHamiltonian::constant(m)
}

/// Interaction-only model (the Delta_1 = Delta_2 = 0 frame): no free terms.
pub fn hamiltonian_resonant(p: &PhysicalParams) -> Result<QuadraticHamiltonian> {
    let d = derive_params(p)?;
    let mut m = DMatrix::zeros(6, 6);
    set_two_mode_squeeze(&mut m, 0, 1, -d.g1);
    set_beam_splitter(&mut m, 0, 2, p.g2_ang());
    QuadraticHamiltonian::constant(m)
}

/// Two-magnon model after adiabatic elimination of the cavity:
/// H = Omega_1 n_1 + Omega_2 n_2 + G (m_1 m_2 + m_1' m_2').
pub fn hamiltonian_effective(p: &PhysicalParams) -> Result<QuadraticHamiltonian> {
    let d = derive_params(p)?;
    let (Some(o1), Some(o2), Some(g)) = (d.omega_1_eff, d.omega_2_eff, d.g_eff) else {
        return Err(Error::ZeroDetuning {
            delta_1: d.delta_1,
            delta_2: d.delta_2,
        });
    };
    let mut m = DMatrix::zeros(4, 4);
    set_free(&mut m, 0, o1);
    set_free(&mut m, 1, o2);
    set_two_mode_squeeze(&mut m, 0, 1, g);
    QuadraticHamiltonian::constant(m)
}

/// Langevin drift at time t: A(t) = Omega M(t) - (1/2) diag(decays per
/// quadrature), with one decay rate per mode.
pub fn drift_from_hamiltonian(
    h: &QuadraticHamiltonian,
    decays: &[f64],
    t: f64,
) -> Result<DriftMatrix> {
    if decays.len() != h.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: h.n_modes(),
            got: decays.len(),
        });
    }
    if let Some(bad) = decays.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::ModelInvalid(format!(
            "decay rates must be >= 0, got {bad}"
        )));
    }
    let m = h.eval(t);
    let mut a = symplectic_form(h.n_modes()) * m;
    for (mode, d) in decays.iter().enumerate() {
        a[(2 * mode, 2 * mode)] -= d / 2.0;
        a[(2 * mode + 1, 2 * mode + 1)] -= d / 2.0;
    }
    Ok(a)
}

/// Vacuum-noise diffusion matrix: each mode's rate halved on both quadratures.
pub fn diffusion_matrix(decays: &[f64]) -> DiffusionMatrix {
    let n = 2 * decays.len();
    let mut d = DMatrix::zeros(n, n);
    for (mode, rate) in decays.iter().enumerate() {
        d[(2 * mode, 2 * mode)] = rate / 2.0;
        d[(2 * mode + 1, 2 * mode + 1)] = rate / 2.0;
    }
    d
}

/// One scattered sideband of the drive expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiAngerTerm {
    /// Harmonic order f.
    pub order: i32,
    /// Signed amplitude g1' J_f(xi) (rad/ns).
    pub amplitude: f64,
    /// Phase frequency delta_f = omega_c + omega_1 + f omega_d (rad/ns).
    pub delta_f: f64,
}

/// Sideband amplitudes and frequencies for orders f in [f_min, f_max].
/// The f = -1 term is the resonant one retained by the static reduction;
/// its |delta_f| equals Delta_1.
pub fn jacobi_anger_terms(
    p: &PhysicalParams,
    f_min: i32,
    f_max: i32,
) -> Result<Vec<JacobiAngerTerm>> {
    if !(f_min <= -1 && -1 <= f_max) {
        return Err(Error::ModelInvalid(format!(
            "sideband range [{f_min}, {f_max}] must bracket the resonant order -1"
        )));
    }
    let d = derive_params(p)?;
    let base = p.omega_c() + p.omega_1();
    let wd = p.omega_drive();
    (f_min..=f_max)
        .map(|f| {
            Ok(JacobiAngerTerm {
                order: f,
                amplitude: p.g1_prime_ang() * bessel_j(f, d.xi)?,
                delta_f: base + f as f64 * wd,
            })
        })
        .collect()
}

/// Worst-case suppression ratio min over f != -1 of |delta_f| / (g1' |J_f(xi)|).
///
/// `None` means every non-resonant term has zero amplitude (e.g. g1' = 0),
/// i.e. the ratio is unbounded. Large values justify dropping the
/// non-resonant sidebands.
pub fn rwa_validity(p: &PhysicalParams, f_min: i32, f_max: i32) -> Result<Option<f64>> {
    let terms = jacobi_anger_terms(p, f_min, f_max)?;
    Ok(terms
        .iter()
        .filter(|t| t.order != -1 && t.amplitude != 0.0)
        .map(|t| t.delta_f.abs() / t.amplitude.abs())
        .min_by(|a, b| a.total_cmp(b)))
}

/// Symplectic matrix of the two-mode squeeze that defines the Bogoliubov
/// magnon pair: X_a = ch X_1 - sh X_2, Y_a = ch Y_1 + sh Y_2 and mirrored
/// for the second output mode.
pub fn two_mode_squeeze_symplectic(r: f64) -> DMatrix<f64> {
    let c = r.cosh();
    let s = r.sinh();
    let mut m = DMatrix::identity(4, 4) * c;
    m[(0, 2)] = -s;
    m[(2, 0)] = -s;
    m[(1, 3)] = s;
    m[(3, 1)] = s;
    m
}

/// Bogoliubov rotation of the magnon pair with r = arctanh(g1/g2).
///
/// Congruence-transforming the resonant quadratic form with this matrix
/// (identity on the cavity) decouples the dark combination and couples the
/// bright one to the cavity with strength J = sqrt(g2^2 - g1^2).
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    pub r: f64,
    pub s_matrix: DMatrix<f64>,
}

/// Requires 0 <= g1 < g2 (rad/ns); at g1 >= g2 the construction is undefined,
/// matching the resonant stability boundary.
pub fn bogoliubov_transform(g1: f64, g2: f64) -> Result<BogoliubovTransform> {
    if !(g1 >= 0.0 && g1 < g2) {
        return Err(Error::DarkModeUndefined { g1, g2 });
    }
    let r = (g1 / g2).atanh();
    Ok(BogoliubovTransform {
        r,
        s_matrix: two_mode_squeeze_symplectic(r),
    })
}
