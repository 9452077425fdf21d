//! Covariance-matrix algebra for n-mode Gaussian states.
//!
//! Quadratures are ordered (X_1, Y_1, X_2, Y_2, ...) with X = (a' + a)/sqrt(2),
//! Y = i(a' - a)/sqrt(2), so the vacuum covariance is I/2 and a state sigma is
//! physical iff sigma + (i/2) Omega >= 0 with Omega the symplectic form.
//! Entanglement of a two-mode reduction is quantified by the logarithmic
//! negativity computed from the smaller symplectic eigenvalue of the
//! partially transposed state.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Entrywise symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Physicality tolerance: min eig of sigma + (i/2) Omega may not drop below this.
pub const PHYSICALITY_TOL: f64 = -1e-9;

/// Fixed quadrature ordering for an n-mode state.
///
/// Mode k owns rows/columns 2k and 2k+1 (its X and Y quadratures). For the
/// cavity-magnon system n = 3 with order (cavity, magnon 1, magnon 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLayout {
    n_modes: usize,
}

impl ModeLayout {
    pub fn new(n_modes: usize) -> Self {
        assert!(n_modes > 0, "layout needs at least one mode");
        Self { n_modes }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Matrix dimension 2 * n_modes.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }
}

/// Symplectic form Omega: block-diagonal with [[0, 1], [-1, 0]] per mode.
///
/// Antisymmetric with Omega^2 = -I.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Real symmetric matrix of symmetrized quadrature second moments,
/// sigma_mn = <R_m R_n + R_n R_m> / 2, dimensionless (vacuum variance 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
    layout: ModeLayout,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking shape and symmetry (to 1e-12).
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        let n = data.nrows();
        if n == 0 || !n.is_multiple_of(2) || data.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n.max(2),
                got: data.ncols(),
            });
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((data[(i, j)] - data[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self {
            data,
            layout: ModeLayout::new(n / 2),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    /// Mean excitation number of one mode, (sigma_xx + sigma_yy - 1) / 2.
    pub fn mode_population(&self, mode: usize) -> Result<f64> {
        if mode >= self.n_modes() {
            return Err(Error::ModeIndexOutOfRange {
                index: mode,
                n_modes: self.n_modes(),
            });
        }
        let x = 2 * mode;
        Ok((self.data[(x, x)] + self.data[(x + 1, x + 1)] - 1.0) / 2.0)
    }

    /// Populations of all modes.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.n_modes())
            .map(|m| self.mode_population(m).expect("mode in range"))
            .collect()
    }

    /// 4x4 reduction to modes i and j, keeping their diagonal blocks and the
    /// i-j correlation block.
    pub fn reduce_two_mode(&self, i: usize, j: usize) -> Result<CovarianceMatrix> {
        let n = self.n_modes();
        if i >= n {
            return Err(Error::ModeIndexOutOfRange {
                index: i,
                n_modes: n,
            });
        }
        if j >= n || i == j {
            return Err(Error::ModeIndexOutOfRange {
                index: j,
                n_modes: n,
            });
        }
        let rows = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
        let mut out = DMatrix::zeros(4, 4);
        for (a, &ra) in rows.iter().enumerate() {
            for (b, &rb) in rows.iter().enumerate() {
                out[(a, b)] = self.data[(ra, rb)];
            }
        }
        CovarianceMatrix::from_matrix(out)
    }

    /// Minimum eigenvalue of the Hermitian matrix sigma + (i/2) Omega.
    ///
    /// Nonnegative (to tolerance) iff the state satisfies the uncertainty
    /// principle; pure Gaussian states saturate the bound at zero.
    pub fn physicality_margin(&self) -> f64 {
        let n = self.layout.dim();
        let omega = symplectic_form(self.n_modes());
        // Hermitian H = sigma + (i/2) Omega embedded as the real symmetric
        // matrix [[Re, -Im], [Im, Re]]; its spectrum is that of H, doubled.
        let mut emb = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let re = self.data[(i, j)];
                let im = 0.5 * omega[(i, j)];
                emb[(i, j)] = re;
                emb[(n + i, n + j)] = re;
                emb[(i, n + j)] = -im;
                emb[(n + i, j)] = im;
            }
        }
        emb.symmetric_eigenvalues().min()
    }

    /// True iff symmetric and the uncertainty-bound margin is >= -1e-9.
    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= PHYSICALITY_TOL
    }
}

/// Vacuum state: sigma = I/2.
pub fn vacuum_cm(layout: ModeLayout) -> CovarianceMatrix {
    CovarianceMatrix {
        data: DMatrix::identity(layout.dim(), layout.dim()) * 0.5,
        layout,
    }
}

/// Two-mode squeezed vacuum with squeezing amplitude r >= 0:
/// diagonal blocks cosh(2r)/2 I, off-diagonal block sinh(2r)/2 diag(1, -1).
/// Its logarithmic negativity is exactly 2r.
pub fn two_mode_squeezed_cm(r: f64) -> CovarianceMatrix {
    let c = (2.0 * r).cosh() / 2.0;
    let s = (2.0 * r).sinh() / 2.0;
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = c;
    m[(1, 1)] = c;
    m[(2, 2)] = c;
    m[(3, 3)] = c;
    m[(0, 2)] = s;
    m[(2, 0)] = s;
    m[(1, 3)] = -s;
    m[(3, 1)] = -s;
    CovarianceMatrix {
        data: m,
        layout: ModeLayout::new(2),
    }
}

fn det2(m: &DMatrix<f64>, r0: usize, c0: usize) -> f64 {
    m[(r0, c0)] * m[(r0 + 1, c0 + 1)] - m[(r0, c0 + 1)] * m[(r0 + 1, c0)]
}

/// Logarithmic negativity of a two-mode covariance matrix (natural log).
///
/// With sigma' = [[Phi_a, Phi_ab], [Phi_ab^T, Phi_b]] and
/// W = det Phi_a + det Phi_b - 2 det Phi_ab, the smaller symplectic
/// eigenvalue of the partial transpose is
/// eta = sqrt((W - sqrt(W^2 - 4 det sigma')) / 2) and
/// E_N = max(0, -ln(2 eta)).
pub fn log_negativity(cm4: &CovarianceMatrix) -> Result<f64> {
    if cm4.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: cm4.layout.dim(),
        });
    }
    let m = &cm4.data;
    let w = det2(m, 0, 0) + det2(m, 2, 2) - 2.0 * det2(m, 0, 2);
    let det_full = m.determinant();
    let mut disc = w * w - 4.0 * det_full;
    if disc < 0.0 {
        // Degenerate symplectic spectrum (e.g. near-uncorrelated states)
        // brushes disc = 0; genuine negativity signals an unphysical input.
        if disc < -1e-9 {
            return Err(Error::InvalidTwoModeState { discriminant: disc });
        }
        disc = 0.0;
    }
    // eta^2 = (W - sqrt(disc)) / 2, evaluated through the conjugate
    // 2 det / (W + sqrt(disc)): the direct difference loses ~4r digits to
    // cancellation for strongly squeezed states.
    let denom = w + disc.sqrt();
    if denom <= 0.0 || det_full <= 0.0 {
        return Err(Error::Unphysical {
            margin: det_full.min(denom),
        });
    }
    let inner = 2.0 * det_full / denom;
    let eta_minus = inner.sqrt();
    Ok((-(2.0 * eta_minus).ln()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_is_half_identity_and_physical() {
        let cm = vacuum_cm(ModeLayout::new(3));
        assert_eq!(cm.matrix(), &(DMatrix::identity(6, 6) * 0.5));
        assert_abs_diff_eq!(cm.physicality_margin(), 0.0, epsilon = 1e-12);
        for m in 0..3 {
            assert_abs_diff_eq!(cm.mode_population(m).unwrap(), 0.0, epsilon = 1e-15);
        }
        let cm1 = vacuum_cm(ModeLayout::new(1));
        assert_eq!(cm1.matrix(), &(DMatrix::identity(2, 2) * 0.5));
    }

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        for n in 1..=3 {
            let omega = symplectic_form(n);
            assert_eq!(&omega.transpose(), &(-&omega));
            let sq = &omega * &omega;
            assert_eq!(sq, -DMatrix::<f64>::identity(2 * n, 2 * n));
        }
    }

    #[test]
    fn sub_vacuum_variance_fails_physicality_by_its_deficit() {
        let cm = CovarianceMatrix::from_matrix(DMatrix::identity(6, 6) * 0.4).unwrap();
        assert_abs_diff_eq!(cm.physicality_margin(), -0.1, epsilon = 1e-12);
        assert!(!cm.is_physical());
    }

    #[test]
    fn tmsv_saturates_uncertainty_bound() {
        let cm = two_mode_squeezed_cm(1.0);
        assert_abs_diff_eq!(cm.physicality_margin(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn tmsv_population_is_sinh_squared() {
        // <n> = sinh^2(r) for either mode of a two-mode squeezed vacuum.
        let cm = two_mode_squeezed_cm(1.0);
        let expect = 1.0f64.sinh().powi(2);
        assert_abs_diff_eq!(cm.mode_population(0).unwrap(), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(cm.mode_population(1).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn population_formula_on_inflated_diagonal() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 0)] = 1.5;
        m[(1, 1)] = 1.5;
        let cm = CovarianceMatrix::from_matrix(m).unwrap();
        assert_abs_diff_eq!(cm.mode_population(0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn population_index_out_of_range() {
        let cm = vacuum_cm(ModeLayout::new(2));
        assert!(matches!(
            cm.mode_population(2),
            Err(Error::ModeIndexOutOfRange {
                index: 2,
                n_modes: 2
            })
        ));
    }

    #[test]
    fn tmsv_squeeze_half_diagonal() {
        let cm = two_mode_squeezed_cm(0.5);
        assert_abs_diff_eq!(cm.matrix()[(0, 0)], 1.0f64.cosh() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cm.matrix()[(0, 2)], 1.0f64.sinh() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn tmsv_at_zero_squeezing_is_vacuum() {
        let cm = two_mode_squeezed_cm(0.0);
        assert_eq!(cm.matrix(), vacuum_cm(ModeLayout::new(2)).matrix());
    }

    #[test]
    fn reduce_two_mode_of_vacuum() {
        let cm = vacuum_cm(ModeLayout::new(3));
        let red = cm.reduce_two_mode(0, 1).unwrap();
        assert_eq!(red.matrix(), &(DMatrix::identity(4, 4) * 0.5));
    }

    #[test]
    fn reduce_rejects_equal_modes() {
        let cm = vacuum_cm(ModeLayout::new(3));
        assert!(cm.reduce_two_mode(1, 1).is_err());
    }

    #[test]
    fn reduce_matches_manual_index_extraction() {
        // Build an arbitrary symmetric 6x6 and check the (1, 2) reduction
        // against direct indexing of rows/cols {2, 3, 4, 5}.
        let mut m = DMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                let v = 0.5 + 0.01 * ((i * 6 + j) as f64) + 0.01 * ((j * 6 + i) as f64);
                m[(i, j)] = v;
            }
        }
        let cm = CovarianceMatrix::from_matrix(m.clone()).unwrap();
        let red = cm.reduce_two_mode(1, 2).unwrap();
        let rows = [2usize, 3, 4, 5];
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(red.matrix()[(a, b)], m[(rows[a], rows[b])]);
            }
        }
    }

    #[test]
    fn block_diagonal_reduction_has_zero_off_block() {
        let mut m = DMatrix::identity(6, 6) * 0.5;
        m[(0, 0)] = 0.9;
        m[(1, 1)] = 0.9;
        let cm = CovarianceMatrix::from_matrix(m).unwrap();
        let red = cm.reduce_two_mode(0, 2).unwrap();
        for a in 0..2 {
            for b in 2..4 {
                assert_eq!(red.matrix()[(a, b)], 0.0);
            }
        }
    }

    #[test]
    fn vacuum_log_negativity_is_zero() {
        let cm = vacuum_cm(ModeLayout::new(2));
        assert_abs_diff_eq!(log_negativity(&cm).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tmsv_log_negativity_is_two_r() {
        // Closed form: Phi_a = Phi_b = cosh(2r)/2 I, Phi_ab = sinh(2r)/2 diag(1,-1)
        // gives eta = exp(-2r)/2, hence E_N = 2r.
        for r in [0.3, 1.0] {
            assert_abs_diff_eq!(
                log_negativity(&two_mode_squeezed_cm(r)).unwrap(),
                2.0 * r,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn separable_product_state_has_zero_negativity() {
        // Two uncorrelated thermal modes.
        let mut m = DMatrix::zeros(4, 4);
        for (idx, v) in [1.3, 1.3, 0.8, 0.8].iter().enumerate() {
            m[(idx, idx)] = *v;
        }
        let cm = CovarianceMatrix::from_matrix(m).unwrap();
        assert_eq!(log_negativity(&cm).unwrap(), 0.0);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(0, 1)] = 1e-6;
        assert!(matches!(
            CovarianceMatrix::from_matrix(m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn log_negativity_needs_two_modes() {
        let cm = vacuum_cm(ModeLayout::new(3));
        assert!(log_negativity(&cm).is_err());
    }
}
