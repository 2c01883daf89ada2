//! Gaussian states of `n` bosonic modes and the symplectic optics acting on them.
//!
//! Quadratures are ordered `(q1, p1, ..., qn, pn)` with `a = (q + i p)/sqrt(2)`, so the
//! vacuum covariance is `I/2` and a coherent amplitude `alpha` sits at mean
//! `sqrt(2) (Re alpha, Im alpha)`. Every element is described by its Heisenberg action on
//! the mode operators and converted to the real matrix acting on first and second moments.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Symplectic form `⊕ [[0, 1], [-1, 0]]` over `n_modes` modes.
pub fn omega(n_modes: usize) -> Matrix {
    let mut om = Matrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

pub(crate) fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    n_modes: usize,
    mean: Vector,
    cov: Matrix,
}

impl GaussianState {
    /// Builds a state from first moments and covariance; the covariance is symmetrized.
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        if mean.len() % 2 != 0 || mean.is_empty() {
            // nearest valid quadrature count
            return Err(Error::Dimension {
                expected: (mean.len() + 1).max(2) & !1,
                found: mean.len(),
            });
        }
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Dimension {
                expected: mean.len(),
                found: cov.nrows().max(cov.ncols()),
            });
        }
        Ok(Self {
            n_modes: mean.len() / 2,
            mean,
            cov: symmetrize(&cov),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    /// Pure iff `det(2 cov) = 1`.
    pub fn is_pure(&self, tol: f64) -> bool {
        ((&self.cov * 2.0).determinant() - 1.0).abs() < tol
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(crate::qfi::williamson(&self.cov)?.lambdas)
    }

    /// Checks that every symplectic eigenvalue is at least `1/2` (up to `1e-9`).
    pub fn check_uncertainty(&self) -> Result<()> {
        for l in self.symplectic_eigenvalues()? {
            if l < 0.5 - 1e-9 {
                return Err(Error::Uncertainty(l));
            }
        }
        Ok(())
    }

    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let (q, p) = (2 * mode, 2 * mode + 1);
        Ok(0.5
            * (self.cov[(q, q)] + self.cov[(p, p)] + self.mean[q].powi(2) + self.mean[p].powi(2)
                - 1.0))
    }

    pub fn total_photon_number(&self) -> f64 {
        (0..self.n_modes)
            .map(|k| self.mean_photon_number(k).unwrap_or(0.0))
            .sum()
    }

    /// Single-mode marginal.
    pub fn reduced(&self, mode: usize) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let r = 2 * mode;
        GaussianState::new(
            self.mean.rows(r, 2).into_owned(),
            self.cov.view((r, r), (2, 2)).into_owned(),
        )
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::InvalidMode {
                index: mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

pub fn vacuum(n_modes: usize) -> GaussianState {
    assert!(n_modes >= 1, "a state needs at least one mode");
    GaussianState {
        n_modes,
        mean: Vector::zeros(2 * n_modes),
        cov: Matrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
    }
}

/// `D(alpha) S(xi) |0>` with `S(xi) = exp[(xi a†² - xi* a²)/2]`, so a real positive `xi`
/// stretches `q` by `e^xi`.
pub fn displaced_squeezed(alpha: Complex64, xi: Complex64) -> GaussianState {
    let s = single_mode_squeezer(1, xi, 0).expect("mode 0 exists");
    let mut state = s.apply(&vacuum(1)).expect("dimensions agree");
    state.mean[0] = std::f64::consts::SQRT_2 * alpha.re;
    state.mean[1] = std::f64::consts::SQRT_2 * alpha.im;
    state
}

pub fn coherent(alpha: Complex64) -> GaussianState {
    displaced_squeezed(alpha, Complex64::new(0.0, 0.0))
}

/// Single-mode thermal state with mean occupation `n_th`.
pub fn thermal(n_th: f64) -> GaussianState {
    GaussianState {
        n_modes: 1,
        mean: Vector::zeros(2),
        cov: Matrix::identity(2, 2) * (n_th + 0.5),
    }
}

pub fn tensor(a: &GaussianState, b: &GaussianState) -> GaussianState {
    let (da, db) = (a.mean.len(), b.mean.len());
    let mut mean = Vector::zeros(da + db);
    mean.rows_mut(0, da).copy_from(&a.mean);
    mean.rows_mut(da, db).copy_from(&b.mean);
    let mut cov = Matrix::zeros(da + db, da + db);
    cov.view_mut((0, 0), (da, da)).copy_from(&a.cov);
    cov.view_mut((da, da), (db, db)).copy_from(&b.cov);
    GaussianState {
        n_modes: a.n_modes + b.n_modes,
        mean,
        cov,
    }
}

/// Affine symplectic action on moments: `mean -> M mean + d`, `cov -> M cov Mᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: Matrix,
    displacement: Vector,
}

impl SymplecticMap {
    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: Matrix::identity(2 * n_modes, 2 * n_modes),
            displacement: Vector::zeros(2 * n_modes),
        }
    }

    pub fn new(matrix: Matrix, displacement: Vector) -> Result<Self> {
        let d = displacement.len();
        if matrix.nrows() != d || matrix.ncols() != d || d % 2 != 0 {
            return Err(Error::Dimension {
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            displacement,
        })
    }

    /// Real representation of `a'_j = Σ_k A_jk a_k + B_jk a_k†`.
    pub fn from_mode_transform(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Self {
        let n = a.nrows();
        let mut m = Matrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let plus = a[(j, k)] + b[(j, k)];
                let minus = a[(j, k)] - b[(j, k)];
                m[(2 * j, 2 * k)] = plus.re;
                m[(2 * j, 2 * k + 1)] = -minus.im;
                m[(2 * j + 1, 2 * k)] = plus.im;
                m[(2 * j + 1, 2 * k + 1)] = minus.re;
            }
        }
        Self {
            matrix: m,
            displacement: Vector::zeros(2 * n),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.displacement.len() / 2
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn displacement(&self) -> &Vector {
        &self.displacement
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if state.n_modes != self.n_modes() {
            return Err(Error::Dimension {
                expected: 2 * self.n_modes(),
                found: 2 * state.n_modes,
            });
        }
        let mean = &self.matrix * &state.mean + &self.displacement;
        let cov = &self.matrix * &state.cov * self.matrix.transpose();
        GaussianState::new(mean, cov)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SymplecticMap) -> Result<SymplecticMap> {
        if next.n_modes() != self.n_modes() {
            return Err(Error::Dimension {
                expected: 2 * self.n_modes(),
                found: 2 * next.n_modes(),
            });
        }
        Ok(SymplecticMap {
            matrix: &next.matrix * &self.matrix,
            displacement: &next.matrix * &self.displacement + &next.displacement,
        })
    }

    /// Inverse through `M⁻¹ = Ω Mᵀ Ωᵀ`; valid for symplectic `M` only.
    pub fn inverse(&self) -> SymplecticMap {
        let om = omega(self.n_modes());
        let inv = &om * self.matrix.transpose() * om.transpose();
        let displacement = -(&inv * &self.displacement);
        SymplecticMap {
            matrix: inv,
            displacement,
        }
    }

    /// `max |M Ω Mᵀ - Ω|`.
    pub fn symplectic_residual(&self) -> f64 {
        let om = omega(self.n_modes());
        max_abs(&(&self.matrix * &om * self.matrix.transpose() - om))
    }
}

fn check_pair(n_modes: usize, (i, j): (usize, usize)) -> Result<()> {
    for idx in [i, j] {
        if idx >= n_modes {
            return Err(Error::InvalidMode {
                index: idx,
                n_modes,
            });
        }
    }
    if i == j {
        return Err(Error::SameMode(i));
    }
    Ok(())
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::InvalidMode {
            index: mode,
            n_modes,
        });
    }
    Ok(())
}

fn identity_transform(n_modes: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    (
        DMatrix::identity(n_modes, n_modes),
        DMatrix::zeros(n_modes, n_modes),
    )
}

/// `U = exp(ν a†b − ν* a b†)`: `a → a cos|ν| + e^{i arg ν} b sin|ν|`,
/// `b → b cos|ν| − e^{−i arg ν} a sin|ν|`. `|ν| = π/4` is balanced.
pub fn beam_splitter(n_modes: usize, nu: Complex64, modes: (usize, usize)) -> Result<SymplecticMap> {
    check_pair(n_modes, modes)?;
    let (i, j) = modes;
    let t = nu.norm();
    let phase = if t > 0.0 { nu / t } else { Complex64::new(1.0, 0.0) };
    let (mut a, b) = identity_transform(n_modes);
    let (c, s) = (t.cos(), t.sin());
    a[(i, i)] = Complex64::new(c, 0.0);
    a[(i, j)] = phase * s;
    a[(j, j)] = Complex64::new(c, 0.0);
    a[(j, i)] = -phase.conj() * s;
    Ok(SymplecticMap::from_mode_transform(&a, &b))
}

/// `U = exp(ζ a†b† − ζ* a b)`: `a → a cosh|ζ| + e^{i arg ζ} b† sinh|ζ|` and symmetrically for `b`.
pub fn two_mode_squeezer(
    n_modes: usize,
    zeta: Complex64,
    modes: (usize, usize),
) -> Result<SymplecticMap> {
    check_pair(n_modes, modes)?;
    let (i, j) = modes;
    let r = zeta.norm();
    let phase = if r > 0.0 { zeta / r } else { Complex64::new(1.0, 0.0) };
    let (mut a, mut b) = identity_transform(n_modes);
    a[(i, i)] = Complex64::new(r.cosh(), 0.0);
    a[(j, j)] = Complex64::new(r.cosh(), 0.0);
    b[(i, j)] = phase * r.sinh();
    b[(j, i)] = phase * r.sinh();
    Ok(SymplecticMap::from_mode_transform(&a, &b))
}

/// `S(ξ) = exp[(ξ a†² − ξ* a²)/2]`: `a → a cosh|ξ| + e^{i arg ξ} a† sinh|ξ|`.
pub fn single_mode_squeezer(n_modes: usize, xi: Complex64, mode: usize) -> Result<SymplecticMap> {
    check_mode(n_modes, mode)?;
    let r = xi.norm();
    let phase = if r > 0.0 { xi / r } else { Complex64::new(1.0, 0.0) };
    let (mut a, mut b) = identity_transform(n_modes);
    a[(mode, mode)] = Complex64::new(r.cosh(), 0.0);
    b[(mode, mode)] = phase * r.sinh();
    Ok(SymplecticMap::from_mode_transform(&a, &b))
}

/// `V(φ) = exp(−i φ a†a)` on `mode`: `a → a e^{−iφ}`, a clockwise rotation of `(q, p)`.
pub fn phase_shift(n_modes: usize, phi: f64, mode: usize) -> Result<SymplecticMap> {
    check_mode(n_modes, mode)?;
    let (mut a, b) = identity_transform(n_modes);
    a[(mode, mode)] = Complex64::from_polar(1.0, -phi);
    Ok(SymplecticMap::from_mode_transform(&a, &b))
}

/// Derivative of the phase-shift matrix with respect to `φ`.
pub(crate) fn phase_shift_generator(n_modes: usize, phi: f64, mode: usize) -> Matrix {
    let mut g = Matrix::zeros(2 * n_modes, 2 * n_modes);
    let (s, c) = phi.sin_cos();
    let r = 2 * mode;
    g[(r, r)] = -s;
    g[(r, r + 1)] = c;
    g[(r + 1, r)] = -c;
    g[(r + 1, r + 1)] = -s;
    g
}

pub fn displacement(n_modes: usize, alpha: Complex64, mode: usize) -> Result<SymplecticMap> {
    check_mode(n_modes, mode)?;
    let mut d = Vector::zeros(2 * n_modes);
    d[2 * mode] = std::f64::consts::SQRT_2 * alpha.re;
    d[2 * mode + 1] = std::f64::consts::SQRT_2 * alpha.im;
    SymplecticMap::new(Matrix::identity(2 * n_modes, 2 * n_modes), d)
}

/// Pure-loss channel: beam splitter of transmissivity `eta` with a vacuum ancilla,
/// ancilla traced out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    eta: f64,
    mode: usize,
}

pub fn loss_channel(eta: f64, mode: usize) -> Result<LossChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Efficiency(eta));
    }
    Ok(LossChannel { eta, mode })
}

impl LossChannel {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        check_mode(state.n_modes, self.mode)?;
        let d = 2 * state.n_modes;
        let mut x = Matrix::identity(d, d);
        let mut y = Matrix::zeros(d, d);
        let r = 2 * self.mode;
        let t = self.eta.sqrt();
        for k in r..r + 2 {
            x[(k, k)] = t;
            y[(k, k)] = 0.5 * (1.0 - self.eta);
        }
        let mean = &x * &state.mean;
        let cov = &x * &state.cov * x.transpose() + y;
        GaussianState::new(mean, cov)
    }
}

/// Weyl-ordered quadratic observable `Rᵀ A R + c`.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticForm {
    pub matrix: Matrix,
    pub offset: f64,
}

impl QuadraticForm {
    /// `a†a` on `mode`.
    pub fn number(n_modes: usize, mode: usize) -> Self {
        let mut m = Matrix::zeros(2 * n_modes, 2 * n_modes);
        m[(2 * mode, 2 * mode)] = 0.5;
        m[(2 * mode + 1, 2 * mode + 1)] = 0.5;
        Self {
            matrix: m,
            offset: -0.5,
        }
    }

    /// `a†b† + ab = q_a q_b − p_a p_b`.
    pub fn pair_quadrature(n_modes: usize, a: usize, b: usize) -> Self {
        let mut m = Matrix::zeros(2 * n_modes, 2 * n_modes);
        m[(2 * a, 2 * b)] = 0.5;
        m[(2 * b, 2 * a)] = 0.5;
        m[(2 * a + 1, 2 * b + 1)] = -0.5;
        m[(2 * b + 1, 2 * a + 1)] = -0.5;
        Self {
            matrix: m,
            offset: 0.0,
        }
    }

    pub fn expectation(&self, state: &GaussianState) -> f64 {
        (&self.matrix * &state.cov).trace() + state.mean.dot(&(&self.matrix * &state.mean))
            + self.offset
    }

    /// Symmetrized covariance `<{Q1, Q2}>/2 − <Q1><Q2>` on a Gaussian state:
    /// `2 Tr(AσBσ) + 4 μᵀAσBμ + Tr(AΩBΩ)/2`, the last term being the
    /// operator-ordering correction.
    pub fn covariance(&self, other: &QuadraticForm, state: &GaussianState) -> f64 {
        let om = omega(state.n_modes);
        let (a, b, s, mu) = (&self.matrix, &other.matrix, &state.cov, &state.mean);
        let asb = a * s * b;
        2.0 * (&asb * s).trace()
            + 4.0 * mu.dot(&(&asb * mu))
            + 0.5 * (a * &om * b * &om).trace()
    }
}

/// Photon-number statistics of a mode pair `(a, b)`, with `N_in = a†a + b†b` and
/// `X_ab = a†b† + ab`. Covariances between non-commuting observables are symmetrized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberMoments {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
    pub mean_x: f64,
    pub cov_n_x: f64,
    pub var_x: f64,
}

impl NumberMoments {
    pub fn mean_n_in(&self) -> f64 {
        self.mean_a + self.mean_b
    }

    pub fn var_n_in(&self) -> f64 {
        self.var_a + self.var_b + 2.0 * self.cov_ab
    }
}

pub fn number_moments(state: &GaussianState, modes: (usize, usize)) -> Result<NumberMoments> {
    check_pair(state.n_modes, modes)?;
    let n = state.n_modes;
    let na = QuadraticForm::number(n, modes.0);
    let nb = QuadraticForm::number(n, modes.1);
    let x = QuadraticForm::pair_quadrature(n, modes.0, modes.1);
    let n_in = QuadraticForm {
        matrix: &na.matrix + &nb.matrix,
        offset: na.offset + nb.offset,
    };
    Ok(NumberMoments {
        mean_a: na.expectation(state),
        mean_b: nb.expectation(state),
        var_a: na.covariance(&na, state),
        var_b: nb.covariance(&nb, state),
        cov_ab: na.covariance(&nb, state),
        mean_x: x.expectation(state),
        cov_n_x: n_in.covariance(&x, state),
        var_x: x.covariance(&x, state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_moments_and_purity() {
        let v1 = vacuum(1);
        assert_eq!(v1.mean().as_slice(), &[0.0, 0.0]);
        assert_eq!(v1.cov(), &(Matrix::identity(2, 2) * 0.5));
        let v2 = vacuum(2);
        assert_eq!(v2.mean().len(), 4);
        assert!(v2.is_pure(1e-9));
        assert_eq!(tensor(&vacuum(1), &vacuum(1)), v2);
    }

    #[test]
    fn displaced_squeezed_special_cases() {
        assert_eq!(displaced_squeezed(c(0.0, 0.0), c(0.0, 0.0)), vacuum(1));
        let coh = displaced_squeezed(c(1.0, 0.0), c(0.0, 0.0));
        assert!((coh.mean()[0] - SQRT_2).abs() < 1e-15);
        assert!(coh.mean()[1].abs() < 1e-15);
        let sq = displaced_squeezed(c(0.0, 0.0), c(0.5, 0.0));
        assert!((sq.mean_photon_number(0).unwrap() - 0.5_f64.sinh().powi(2)).abs() < 1e-12);
        assert!((sq.cov()[(0, 0)] - 0.5 * 1.0_f64.exp()).abs() < 1e-12);
        assert!(sq.is_pure(1e-9));
        let gen = displaced_squeezed(c(0.3, -0.7), c(0.4, 0.9));
        let expect = 0.3f64.powi(2) + 0.7f64.powi(2) + c(0.4, 0.9).norm().sinh().powi(2);
        assert!((gen.mean_photon_number(0).unwrap() - expect).abs() < 1e-12);
        assert!(gen.is_pure(1e-9));
    }

    #[test]
    fn elements_with_zero_coupling_are_identity() {
        let id = Matrix::identity(4, 4);
        for m in [
            beam_splitter(2, c(0.0, 0.0), (0, 1)).unwrap(),
            two_mode_squeezer(2, c(0.0, 0.0), (0, 1)).unwrap(),
            phase_shift(2, 0.0, 0).unwrap(),
        ] {
            assert!(max_abs(&(m.matrix() - &id)) < 1e-15);
        }
        let full_turn = phase_shift(2, 2.0 * PI, 1).unwrap();
        assert!(max_abs(&(full_turn.matrix() - &id)) < 1e-12);
    }

    #[test]
    fn invalid_indices_are_rejected() {
        assert_eq!(
            beam_splitter(2, c(0.1, 0.0), (0, 0)).unwrap_err(),
            Error::SameMode(0)
        );
        assert!(matches!(
            two_mode_squeezer(2, c(0.1, 0.0), (0, 2)),
            Err(Error::InvalidMode { index: 2, .. })
        ));
        assert!(phase_shift(1, 0.1, 1).is_err());
        assert_eq!(loss_channel(1.5, 0).unwrap_err(), Error::Efficiency(1.5));
        assert!(loss_channel(-0.1, 0).is_err());
    }

    #[test]
    fn balanced_splitter_halves_coherent_amplitude() {
        let input = tensor(&coherent(c(1.2, 0.0)), &vacuum(1));
        let out = beam_splitter(2, c(FRAC_PI_4, 0.0), (0, 1))
            .unwrap()
            .apply(&input)
            .unwrap();
        let amp = 1.2 / SQRT_2;
        assert!((out.mean()[0] - SQRT_2 * amp).abs() < 1e-14);
        assert!((out.mean()[2] + SQRT_2 * amp).abs() < 1e-14);
        assert!((out.mean_photon_number(0).unwrap() - amp * amp).abs() < 1e-13);
        assert!((out.mean_photon_number(1).unwrap() - amp * amp).abs() < 1e-13);
    }

    #[test]
    fn two_mode_squeezed_vacuum_occupations() {
        let r = 0.8;
        let out = two_mode_squeezer(2, c(r, 0.0), (0, 1))
            .unwrap()
            .apply(&vacuum(2))
            .unwrap();
        assert!((out.mean_photon_number(0).unwrap() - r.sinh().powi(2)).abs() < 1e-13);
        assert!((out.total_photon_number() - 2.0 * r.sinh().powi(2)).abs() < 1e-13);
        assert!(out.is_pure(1e-9));
    }

    #[test]
    fn phase_shift_rotates_mean_and_keeps_energy() {
        let phi = 0.7;
        let out = phase_shift(1, phi, 0).unwrap().apply(&coherent(c(1.5, 0.0))).unwrap();
        // a → a e^{−iφ}
        assert!((out.mean()[0] - SQRT_2 * 1.5 * phi.cos()).abs() < 1e-14);
        assert!((out.mean()[1] + SQRT_2 * 1.5 * phi.sin()).abs() < 1e-14);
        assert!((out.mean_photon_number(0).unwrap() - 2.25).abs() < 1e-13);
    }

    #[test]
    fn loss_channel_limits() {
        let s = displaced_squeezed(c(0.6, 0.2), c(0.3, 0.1));
        assert_eq!(loss_channel(1.0, 0).unwrap().apply(&s).unwrap(), s);
        let reset = loss_channel(0.0, 0).unwrap().apply(&s).unwrap();
        assert!(max_abs(&(reset.cov() - Matrix::identity(2, 2) * 0.5)) < 1e-15);
        assert!(reset.mean().norm() < 1e-15);
        let half = loss_channel(0.5, 0).unwrap().apply(&s).unwrap();
        assert!(
            (half.mean_photon_number(0).unwrap() - 0.5 * s.mean_photon_number(0).unwrap()).abs()
                < 1e-13
        );
    }

    #[test]
    fn loss_channel_matches_dilation() {
        // Splitter with transmissivity eta against a vacuum ancilla, ancilla traced out.
        let s = tensor(
            &displaced_squeezed(c(0.4, -0.3), c(0.5, 0.2)),
            &displaced_squeezed(c(-0.1, 0.6), c(0.2, -0.4)),
        );
        let s = two_mode_squeezer(2, c(0.3, 0.1), (0, 1)).unwrap().apply(&s).unwrap();
        for eta in [0.0f64, 0.13, 0.5, 0.92, 1.0] {
            let dil = tensor(&s, &vacuum(1));
            let bs = beam_splitter(3, c(eta.sqrt().acos(), 0.0), (1, 2)).unwrap();
            let out = bs.apply(&dil).unwrap();
            let direct = loss_channel(eta, 1).unwrap().apply(&s).unwrap();
            let cov = out.cov().view((0, 0), (4, 4)).into_owned();
            let mean = out.mean().rows(0, 4).into_owned();
            assert!(max_abs(&(cov - direct.cov())) < 1e-12);
            assert!((mean - direct.mean()).amax() < 1e-12);
        }
    }

    #[test]
    fn inverse_and_composition() {
        let a = beam_splitter(2, c(0.3, 0.4), (0, 1)).unwrap();
        let b = two_mode_squeezer(2, c(0.2, -0.5), (1, 0)).unwrap();
        let ab = a.then(&b).unwrap();
        let back = ab.then(&ab.inverse()).unwrap();
        assert!(max_abs(&(back.matrix() - Matrix::identity(4, 4))) < 1e-12);
        assert!(ab.symplectic_residual() < 1e-12);
    }

    #[test]
    fn vacuum_number_moments() {
        let m = number_moments(&vacuum(2), (0, 1)).unwrap();
        for v in [m.mean_a, m.mean_b, m.var_a, m.var_b, m.cov_ab, m.mean_x, m.cov_n_x] {
            assert!(v.abs() < 1e-15, "{m:?}");
        }
        assert!((m.var_x - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_is_poissonian() {
        let alpha = 1.3;
        let m = number_moments(&tensor(&coherent(c(alpha, 0.0)), &vacuum(1)), (0, 1)).unwrap();
        assert!((m.mean_a - alpha * alpha).abs() < 1e-13);
        assert!((m.var_a - alpha * alpha).abs() < 1e-13);
        assert!(m.cov_ab.abs() < 1e-13);
    }

    #[test]
    fn two_mode_squeezed_correlations() {
        let r = 0.6;
        let s = two_mode_squeezer(2, c(r, 0.0), (0, 1)).unwrap().apply(&vacuum(2)).unwrap();
        let m = number_moments(&s, (0, 1)).unwrap();
        assert!((m.mean_x - (2.0 * r).sinh()).abs() < 1e-13);
        assert!((m.cov_ab - (r.sinh() * r.cosh()).powi(2)).abs() < 1e-13);
    }
}
