//! Photocurrent statistics with non-unit quantum efficiency, phase sensitivity and the
//! Gaussian-approximation Fisher information.
//!
//! Each detector is an ideal photon counter behind a beam splitter of transmissivity `η`
//! whose other port carries vacuum. Only first and second moments of the photocurrents
//! are needed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    beam_splitter, number_moments, phase_shift, GaussianState, NumberMoments,
};

/// Two detectors sharing one quantum efficiency `0 < η ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPair {
    eta: f64,
}

impl DetectorPair {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Efficiency(eta));
        }
        Ok(Self { eta })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Variances below this fraction of the magnitude of their assembled terms are treated as
/// unresolved.
pub const VARIANCE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotocurrentStats {
    pub mean: f64,
    pub variance: f64,
    /// Smallest variance resolved by the floating-point assembly; below it the relative
    /// rounding error exceeds about 1e-6.
    #[serde(default)]
    pub floor: f64,
    /// Detector efficiency `η`, with `mean = efficiency * ideal_mean`.
    #[serde(default = "unit")]
    pub efficiency: f64,
    /// Mean current of ideal detectors. Slopes are taken on this so that `η` enters
    /// sensitivities exactly.
    pub ideal_mean: f64,
}

fn unit() -> f64 {
    1.0
}

impl PhotocurrentStats {
    /// Clamps rounding-level negative variances to zero. `scale` is the magnitude of the
    /// largest term entering the variance; anything below `-1e-10 * max(1, scale)` is an
    /// inconsistency.
    fn assemble(ideal_mean: f64, eta: f64, variance: f64, scale: f64) -> Result<Self> {
        let tol = 1e-10 * scale.abs().max(1.0);
        if variance < -tol {
            return Err(Error::NegativeVariance(variance));
        }
        Ok(Self {
            mean: eta * ideal_mean,
            variance: variance.max(0.0),
            floor: VARIANCE_RESOLUTION * scale.abs(),
            efficiency: eta,
            ideal_mean,
        })
    }

    /// Exact statistics with no assembly error.
    pub fn new(mean: f64, variance: f64) -> Self {
        Self {
            mean,
            variance,
            floor: 0.0,
            efficiency: 1.0,
            ideal_mean: mean,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Efficiency(eta));
    }
    Ok(())
}

fn current_from_moments(m: &NumberMoments, eta: f64, sign: f64) -> Result<PhotocurrentStats> {
    check_eta(eta)?;
    let total = m.mean_a + m.mean_b;
    let ideal_var = m.var_a + m.var_b + 2.0 * sign * m.cov_ab;
    let variance = eta * eta * ideal_var + eta * (1.0 - eta) * total;
    let scale = m.var_a.abs() + m.var_b.abs() + 2.0 * m.cov_ab.abs() + total.abs();
    PhotocurrentStats::assemble(m.mean_a + sign * m.mean_b, eta, variance, scale)
}

/// `D− = a†a − b†b` on modes `(0, 1)`.
pub fn difference_current(state: &GaussianState, eta: f64) -> Result<PhotocurrentStats> {
    current_from_moments(&number_moments(state, (0, 1))?, eta, -1.0)
}

/// `D+ = a†a + b†b` on modes `(0, 1)`.
pub fn sum_current(state: &GaussianState, eta: f64) -> Result<PhotocurrentStats> {
    current_from_moments(&number_moments(state, (0, 1))?, eta, 1.0)
}

pub fn difference_current_from_moments(m: &NumberMoments, eta: f64) -> Result<PhotocurrentStats> {
    current_from_moments(m, eta, -1.0)
}

pub fn sum_current_from_moments(m: &NumberMoments, eta: f64) -> Result<PhotocurrentStats> {
    current_from_moments(m, eta, 1.0)
}

/// Ideal sum-current mean and variance after a real two-mode squeezer of gain `r2`,
/// expressed through the moments of `N_in` and `X_ab` before it.
fn ideal_sum_after_opa(m: &NumberMoments, r2: f64) -> (f64, f64, f64) {
    let n_opa = 2.0 * r2.sinh().powi(2);
    let gain = (2.0 * r2).cosh(); // 1 + N_OPA
    let cross = (2.0 * r2).sinh(); // sqrt(N_OPA (2 + N_OPA))
    let mean = gain * m.mean_n_in() + n_opa + cross * m.mean_x;
    let var_n = m.var_n_in();
    let var = gain * gain * var_n + cross * cross * m.var_x + 2.0 * gain * cross * m.cov_n_x;
    let scale = gain * gain * var_n.abs() + cross * cross * m.var_x.abs()
        + 2.0 * (gain * cross * m.cov_n_x).abs();
    (mean, var, scale)
}

/// Sum photocurrent measured after a real two-mode squeezer `r2`, from the photon-number
/// moments of the state entering the amplifier.
pub fn sum_current_after_opa(m: &NumberMoments, r2: f64, eta: f64) -> Result<PhotocurrentStats> {
    if r2 < 0.0 {
        return Err(Error::Domain(format!("amplifier gain r2 = {r2} < 0")));
    }
    check_eta(eta)?;
    let (mean, var, scale) = ideal_sum_after_opa(m, r2);
    PhotocurrentStats::assemble(
        mean,
        eta,
        eta * eta * var + eta * (1.0 - eta) * mean,
        scale + mean.abs(),
    )
}

/// Factor `sqrt(1 + (1−η)/η · D+/ΔD+²)` relating lossy and ideal sensitivities behind the
/// amplifier; tends to 1 as the amplifier gain grows.
pub fn loss_compensation_factor(m: &NumberMoments, r2: f64, eta: f64) -> Result<f64> {
    if r2 < 0.0 {
        return Err(Error::Domain(format!("amplifier gain r2 = {r2} < 0")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Efficiency(eta));
    }
    let (mean, var, _) = ideal_sum_after_opa(m, r2);
    if var <= 0.0 {
        return Err(Error::ZeroSpread);
    }
    Ok((1.0 + (1.0 - eta) / eta * mean / var).sqrt())
}

pub const DEFAULT_STEP: f64 = 1e-5;
const SLOPE_FLOOR: f64 = 1e-12;
const RICHARDSON_TRIGGER: f64 = 1e-6;

/// Central-difference slope with a Richardson step-halving fallback.
fn slope<F>(f: &F, phi: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = (f(phi + h)? - f(phi - h)?) / (2.0 * h);
    let half = 0.5 * h;
    let fine = (f(phi + half)? - f(phi - half)?) / (2.0 * half);
    let spread = (coarse - fine).abs();
    if spread > RICHARDSON_TRIGGER * fine.abs().max(coarse.abs()) {
        Ok((4.0 * fine - coarse) / 3.0)
    } else {
        Ok(fine)
    }
}

/// `S = sqrt(ΔX²)/|∂φ X|` for an observable whose statistics depend on `φ`.
pub fn sensitivity<F>(stats_of_phi: F, phi: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<PhotocurrentStats>,
{
    let centre = stats_of_phi(phi)?;
    let mean = |x: f64| stats_of_phi(x).map(|s| s.ideal_mean);
    let d = centre.efficiency * slope(&mean, phi, h)?;
    let slope_noise = 1e3 * f64::EPSILON * centre.mean.abs() / h;
    if d.abs() <= SLOPE_FLOOR.max(slope_noise) {
        return Err(Error::VanishingSlope { phi, slope: d });
    }
    if centre.floor > 0.0 && centre.variance <= centre.floor {
        return Err(Error::UnresolvedVariance(centre.variance));
    }
    Ok(centre.std_dev() / d.abs())
}

/// Fisher information of a Gaussian outcome distribution with mean `X(φ)` and spread
/// `σ(φ)`: `F = [(∂X)² + 2(∂σ)²]/σ²`.
pub fn fisher_gaussian_approx<M, S>(mean_of_phi: M, sigma_of_phi: S, phi: f64, h: f64) -> Result<f64>
where
    M: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> Result<f64>,
{
    let sigma = sigma_of_phi(phi)?;
    if sigma <= 0.0 {
        return Err(Error::ZeroSpread);
    }
    let dx = slope(&mean_of_phi, phi, h)?;
    let ds = slope(&sigma_of_phi, phi, h)?;
    Ok((dx * dx + 2.0 * ds * ds) / (sigma * sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StageKind {
    /// Balanced beam splitter `ν = (π/4) e^{i bs_phase}`, then `D−`.
    Passive { bs_phase: f64 },
    /// Two-mode squeezer `ζ = r2 e^{−i θ2}`, then `D+`.
    Active { r2: f64, theta2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    DifferenceCurrent,
    SumCurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementStage {
    pub kind: StageKind,
    pub detectors: DetectorPair,
}

impl MeasurementStage {
    /// Passive stage whose splitter undoes a zero-phase balanced splitter.
    pub fn passive(eta: f64) -> Result<Self> {
        Ok(Self {
            kind: StageKind::Passive {
                bs_phase: std::f64::consts::PI,
            },
            detectors: DetectorPair::new(eta)?,
        })
    }

    pub fn active(r2: f64, eta: f64) -> Result<Self> {
        if r2 < 0.0 {
            return Err(Error::Domain(format!("amplifier gain r2 = {r2} < 0")));
        }
        Ok(Self {
            kind: StageKind::Active { r2, theta2: 0.0 },
            detectors: DetectorPair::new(eta)?,
        })
    }

    pub fn observable(&self) -> Observable {
        match self.kind {
            StageKind::Passive { .. } => Observable::DifferenceCurrent,
            StageKind::Active { .. } => Observable::SumCurrent,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.detectors = DetectorPair::new(eta)?;
        Ok(self)
    }

    /// Stage element as a symplectic map on two modes.
    pub fn element(&self) -> Result<crate::gaussian::SymplecticMap> {
        match self.kind {
            StageKind::Passive { bs_phase } => beam_splitter(
                2,
                Complex64::from_polar(std::f64::consts::FRAC_PI_4, bs_phase),
                (0, 1),
            ),
            StageKind::Active { r2, theta2 } => crate::gaussian::two_mode_squeezer(
                2,
                Complex64::from_polar(r2, -theta2),
                (0, 1),
            ),
        }
    }

    /// Photocurrent statistics for the two-mode state reaching the stage.
    pub fn measure(&self, state: &GaussianState) -> Result<PhotocurrentStats> {
        let eta = self.detectors.eta();
        match self.kind {
            StageKind::Passive { .. } => difference_current(&self.element()?.apply(state)?, eta),
            StageKind::Active { r2, theta2 } => {
                // ζ e^{−iθ2} = V(θ2) U(r2) V(−θ2); the trailing V(θ2) leaves D+ unchanged.
                let aligned = if theta2 == 0.0 {
                    state.clone()
                } else {
                    phase_shift(2, -theta2, 0)?.apply(state)?
                };
                sum_current_after_opa(&number_moments(&aligned, (0, 1))?, r2, eta)
            }
        }
    }
}
