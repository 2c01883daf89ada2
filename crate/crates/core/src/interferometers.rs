//! The four two-mode interferometers: a passive (balanced beam splitter) or active
//! (two-mode squeezer) first element, a phase shift on arm `a`, and a passive or active
//! measurement stage. Input states are described by energy fractions at fixed total
//! photon number `N_tot`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detection::{sensitivity, MeasurementStage, StageKind, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::gaussian::{
    beam_splitter, coherent, displaced_squeezed, phase_shift, tensor, two_mode_squeezer,
    GaussianState, SymplecticMap,
};
use crate::qfi::{qfi, DerivativeMethod, PhaseFamily};

const RANGE_TOL: f64 = 1e-12;

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("{name} = {x} must be finite and non-negative")));
    }
    Ok(())
}

/// Displaced-squeezed inputs `|α, ξ e^{−i ξ_phase}⟩ ⊗ |γ, r e^{−iθ}⟩` ahead of a balanced
/// beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassiveInputParams {
    pub n_tot: f64,
    /// Share of the coherent photons sent into arm `a`.
    pub delta: f64,
    /// Share of all photons carried by squeezing.
    pub beta_tot: f64,
    /// Share of all photons carried by the squeezing of arm `a`; at most `beta_tot`.
    pub beta: f64,
    /// Squeezing phase of arm `b`.
    pub theta: f64,
    /// Squeezing phase of arm `a`.
    #[serde(default)]
    pub xi_phase: f64,
    pub phi: f64,
}

impl PassiveInputParams {
    pub fn new(n_tot: f64, delta: f64, beta_tot: f64, beta: f64, theta: f64, phi: f64) -> Self {
        Self {
            n_tot,
            delta,
            beta_tot,
            beta,
            theta,
            xi_phase: 0.0,
            phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("N_tot", self.n_tot)?;
        unit_interval("delta", self.delta)?;
        unit_interval("beta_tot", self.beta_tot)?;
        unit_interval("beta", self.beta)?;
        if self.beta > self.beta_tot + RANGE_TOL {
            return Err(Error::Domain(format!(
                "beta = {} exceeds beta_tot = {}",
                self.beta, self.beta_tot
            )));
        }
        Ok(())
    }
}

/// Coherent inputs `|α⟩ ⊗ |γ⟩` ahead of a two-mode squeezer `ζ = r e^{−iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveInputParams {
    pub n_tot: f64,
    pub delta: f64,
    /// Share of all photons generated by the amplifier from vacuum, `2 sinh²r / N_tot`.
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
}

impl ActiveInputParams {
    pub fn new(n_tot: f64, delta: f64, beta: f64, theta: f64, phi: f64) -> Self {
        Self {
            n_tot,
            delta,
            beta,
            theta,
            phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("N_tot", self.n_tot)?;
        unit_interval("delta", self.delta)?;
        unit_interval("beta", self.beta)
    }

    /// Inverse of [`recover_physical_params`] for active inputs.
    pub fn from_physical(alpha: f64, gamma: f64, r: f64, theta: f64, phi: f64) -> Result<Self> {
        non_negative("alpha", alpha)?;
        non_negative("gamma", gamma)?;
        non_negative("r", r)?;
        let n_tot = active_photon_number(alpha, gamma, r, theta);
        let c = alpha * alpha + gamma * gamma;
        let (delta, beta) = if n_tot > 0.0 {
            (
                if c > 0.0 { alpha * alpha / c } else { 0.5 },
                2.0 * r.sinh().powi(2) / n_tot,
            )
        } else {
            (0.5, 0.0)
        };
        Ok(Self::new(n_tot, delta, beta, theta, phi))
    }
}

/// Mean photon number of `U_OPA(r e^{−iθ}) |α⟩|γ⟩` for real `α, γ`.
pub fn active_photon_number(alpha: f64, gamma: f64, r: f64, theta: f64) -> f64 {
    (alpha * alpha + gamma * gamma + 1.0) * (2.0 * r).cosh()
        + 4.0 * alpha * gamma * theta.cos() * r.sinh() * r.cosh()
        - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InputParams {
    Passive(PassiveInputParams),
    Active(ActiveInputParams),
}

impl InputParams {
    pub fn phi(&self) -> f64 {
        match self {
            InputParams::Passive(p) => p.phi,
            InputParams::Active(p) => p.phi,
        }
    }

    pub fn n_tot(&self) -> f64 {
        match self {
            InputParams::Passive(p) => p.n_tot,
            InputParams::Active(p) => p.n_tot,
        }
    }
}

/// Amplitudes and squeezing moduli of the input. For active inputs `xi = 0` and `r` is the
/// amplifier gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub gamma: f64,
    pub xi: f64,
    pub xi_phase: f64,
    pub r: f64,
    pub theta: f64,
}

pub fn recover_physical_params(params: &InputParams) -> Result<PhysicalParams> {
    match params {
        InputParams::Passive(p) => {
            p.validate()?;
            let coherent = ((1.0 - p.beta_tot) * p.n_tot).max(0.0);
            let delta = p.delta.clamp(0.0, 1.0);
            Ok(PhysicalParams {
                alpha: (delta * coherent).sqrt(),
                gamma: ((1.0 - delta) * coherent).sqrt(),
                xi: (p.beta.max(0.0) * p.n_tot).sqrt().asinh(),
                xi_phase: p.xi_phase,
                r: ((p.beta_tot - p.beta).max(0.0) * p.n_tot).sqrt().asinh(),
                theta: p.theta,
            })
        }
        InputParams::Active(p) => {
            p.validate()?;
            let beta = p.beta.clamp(0.0, 1.0);
            let delta = p.delta.clamp(0.0, 1.0);
            let r = (0.5 * beta * p.n_tot).sqrt().asinh();
            let budget = (1.0 - beta) * p.n_tot;
            let c = if budget > 0.0 {
                let per_photon = coherent_gain(delta, p.theta, r);
                if !(per_photon > 0.0) {
                    return Err(Error::InfeasibleParams(format!(
                        "no coherent amplitudes reach N_tot = {} at delta = {delta}, beta = {beta}, theta = {}",
                        p.n_tot, p.theta
                    )));
                }
                budget / per_photon
            } else {
                0.0
            };
            Ok(PhysicalParams {
                alpha: (delta * c).sqrt(),
                gamma: ((1.0 - delta) * c).sqrt(),
                xi: 0.0,
                xi_phase: 0.0,
                r,
                theta: p.theta,
            })
        }
    }
}

/// Photons per unit `α² + γ²` after the amplifier, `cosh 2r + 2√(δ(1−δ)) cos θ sinh 2r`,
/// written as `[(1+k) e^{2r} + (1−k) e^{−2r}]/2` with `1+k` free of cancellation.
fn coherent_gain(delta: f64, theta: f64, r: f64) -> f64 {
    let s = 2.0 * (delta * (1.0 - delta)).sqrt();
    let c = theta.cos();
    let one_plus_k = if c < 0.0 {
        let split = (delta.sqrt() - (1.0 - delta).sqrt()).powi(2);
        split + 2.0 * (0.5 * theta).cos().powi(2) * s
    } else {
        1.0 + c * s
    };
    0.5 * (one_plus_k * (2.0 * r).exp() + (2.0 - one_plus_k) * (-2.0 * r).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigLabel {
    PassivePassive,
    PassiveActive,
    ActivePassive,
    ActiveActive,
}

impl ConfigLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigLabel::PassivePassive => "pp",
            ConfigLabel::PassiveActive => "pa",
            ConfigLabel::ActivePassive => "ap",
            ConfigLabel::ActiveActive => "aa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub input: InputParams,
    pub stage: MeasurementStage,
}

impl Configuration {
    pub fn new(input: InputParams, stage: MeasurementStage) -> Self {
        Self { input, stage }
    }

    pub fn label(&self) -> ConfigLabel {
        match (&self.input, &self.stage.kind) {
            (InputParams::Passive(_), StageKind::Passive { .. }) => ConfigLabel::PassivePassive,
            (InputParams::Passive(_), StageKind::Active { .. }) => ConfigLabel::PassiveActive,
            (InputParams::Active(_), StageKind::Passive { .. }) => ConfigLabel::ActivePassive,
            (InputParams::Active(_), StageKind::Active { .. }) => ConfigLabel::ActiveActive,
        }
    }

    /// State leaving the first element, just before the phase shift.
    pub fn prepared_state(&self) -> Result<GaussianState> {
        let phys = recover_physical_params(&self.input)?;
        match self.input {
            InputParams::Passive(_) => {
                let a = displaced_squeezed(
                    Complex64::new(phys.alpha, 0.0),
                    Complex64::from_polar(phys.xi, -phys.xi_phase),
                );
                let b = displaced_squeezed(
                    Complex64::new(phys.gamma, 0.0),
                    Complex64::from_polar(phys.r, -phys.theta),
                );
                first_splitter()?.apply(&tensor(&a, &b))
            }
            InputParams::Active(_) => {
                let input = tensor(
                    &coherent(Complex64::new(phys.alpha, 0.0)),
                    &coherent(Complex64::new(phys.gamma, 0.0)),
                );
                two_mode_squeezer(2, Complex64::from_polar(phys.r, -phys.theta), (0, 1))?
                    .apply(&input)
            }
        }
    }

    /// State reaching the measurement stage.
    pub fn pre_measurement_state(&self, phi: f64) -> Result<GaussianState> {
        phase_shift(2, phi, 0)?.apply(&self.prepared_state()?)
    }

    /// Phase-shifted family seen by the quantum Fisher information.
    pub fn phase_family(&self) -> Result<PhaseFamily> {
        Ok(PhaseFamily::new(self.prepared_state()?, 0))
    }
}

fn first_splitter() -> Result<SymplecticMap> {
    beam_splitter(2, Complex64::new(FRAC_PI_4, 0.0), (0, 1))
}

/// Two-mode state immediately before the detectors.
pub fn build_output_state(config: &Configuration, phi: f64) -> Result<GaussianState> {
    config
        .stage
        .element()?
        .apply(&config.pre_measurement_state(phi)?)
}

/// Numeric sensitivity of the stage's photocurrent at working point `phi` with detector
/// efficiency `eta`.
pub fn sensitivity_of(config: &Configuration, phi: f64, eta: f64) -> Result<f64> {
    let stage = config.stage.with_eta(eta)?;
    let prepared = config.prepared_state()?;
    sensitivity(
        |x| stage.measure(&phase_shift(2, x, 0)?.apply(&prepared)?),
        phi,
        DEFAULT_STEP,
    )
}

/// Quantum Fisher information of the phase shift for the configuration's input.
pub fn qfi_of(input: &InputParams) -> Result<f64> {
    let stage = MeasurementStage::passive(1.0)?;
    let family = Configuration::new(*input, stage).phase_family()?;
    let phi = input.phi();
    qfi(&family.state(phi)?, &family.derivative(phi, DerivativeMethod::Analytic)?)
}

/// Ideal passive/passive sensitivity at `φ = π/2`, `θ = 0`, with all coherent light in arm
/// `b` (the arm squeezed by `(β_tot − β) N_tot`).
pub fn s1_pp_closed(n_tot: f64, beta_tot: f64, beta: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    unit_interval("beta_tot", beta_tot)?;
    unit_interval("beta", beta)?;
    if beta > beta_tot + RANGE_TOL {
        return Err(Error::Domain(format!("beta = {beta} exceeds beta_tot = {beta_tot}")));
    }
    if beta == 0.5 {
        return if beta_tot == 1.0 {
            Err(Error::IndeterminateLimit(format!(
                "beta = 1/2, beta_tot = 1 at N_tot = {n_tot}; use s1_pp_limit"
            )))
        } else {
            Err(Error::DivergentSensitivity(format!(
                "beta = 1/2 with beta_tot = {beta_tot} < 1"
            )))
        };
    }
    let x = beta * n_tot;
    let y = (beta_tot - beta).max(0.0) * n_tot;
    if beta_tot == 1.0 {
        return Ok(s1_pp_squeezed_only(n_tot, x, y));
    }
    let num = 4.0 * (1.0 - beta) * beta * n_tot * n_tot
        + 4.0 * (x * (x + 1.0)).sqrt() * ((beta_tot - 1.0) * n_tot - (y * (y + 1.0)).sqrt())
        + 2.0 * n_tot;
    let den = 2f64.sqrt() * (n_tot - 2.0 * n_tot * beta).abs();
    Ok(num.max(0.0).sqrt() / den)
}

/// Squeezed-light-only case with the removable `0/0` cancelled: the numerator equals
/// `4(x − y)²/(A + B)` and the common factor `|x − y|` drops out.
fn s1_pp_squeezed_only(n_tot: f64, x: f64, y: f64) -> f64 {
    let a = 4.0 * x * y + 2.0 * n_tot;
    let b = 4.0 * (x * (x + 1.0) * y * (y + 1.0)).sqrt();
    2f64.sqrt() / (a + b).sqrt()
}

/// Value of the passive/passive closed form at its removable singularity `β = 1/2`,
/// `β_tot = 1`.
pub fn s1_pp_limit(n_tot: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    Ok(s1_pp_squeezed_only(n_tot, 0.5 * n_tot, 0.5 * n_tot))
}

/// Symmetric-offset estimate of a removable singularity: average of `f(c ± ε)`, improved
/// by one Richardson step in `ε`.
pub fn symmetric_offset_limit<F>(f: F, centre: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let avg = |e: f64| -> Result<f64> { Ok(0.5 * (f(centre + e)? + f(centre - e)?)) };
    let coarse = avg(eps)?;
    let fine = avg(0.5 * eps)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn check_open_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Efficiency(eta));
    }
    Ok(())
}

/// Optimized lossy passive/passive sensitivity, leading order for `N_tot ≪ 1`.
pub fn s_eta_pp_low_energy(n_tot: f64, eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    let k = 0.5 / eta + 0.5 * ((1.0 - eta * eta) / (eta * eta)).sqrt();
    Ok(k.sqrt() / n_tot.sqrt())
}

/// Optimized lossy passive/passive sensitivity, leading order for `N_tot ≫ 1`.
pub fn s_eta_pp_high_energy(n_tot: f64, eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    if eta == 1.0 {
        return Err(Error::ExpansionBreakdown(
            "leading order vanishes at unit efficiency".into(),
        ));
    }
    Ok(((1.0 - eta) / eta).sqrt() / n_tot.sqrt())
}

/// Active/passive sensitivity at `δ = 1/2`, `φ = π/2`, `θ = π`.
pub fn s_eta_ap_closed(n_tot: f64, beta: f64, eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta = {beta} outside (0, 1)")));
    }
    let bn = beta * n_tot;
    let root = (bn * (bn + 2.0)).sqrt();
    let num = eta * (beta - 2.0) * beta * beta * n_tot * n_tot - eta * beta
        + bn * (eta * (beta - 3.0) - 1.0)
        + root * (eta * (1.0 - (beta - 2.0) * bn) + 1.0)
        - 1.0;
    // root − 1 − bn, rationalized
    let gap = -1.0 / (root + 1.0 + bn);
    let den = eta * (beta - 1.0).powi(2) * n_tot * gap;
    let ratio = num / den;
    if !(ratio > 0.0) {
        return Err(Error::Domain(format!(
            "closed form is not positive at N_tot = {n_tot}, beta = {beta}, eta = {eta}"
        )));
    }
    Ok(ratio.sqrt())
}

/// Ideal active/active sensitivity for vacuum input in the large-gain limit of the second
/// amplifier, as a function of `θ1 − φ`.
pub fn s1_aa_closed(n_tot: f64, theta1_minus_phi: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    let d = theta1_minus_phi;
    let s = d.sin();
    if s.abs() < 1e-12 {
        return Err(Error::SingularAngle(format!(
            "theta1 - phi = {d} is a multiple of pi"
        )));
    }
    let m = n_tot * (n_tot + 2.0);
    let num = m * (2.0 * d).cos() + 4.0 * (n_tot + 1.0) * m.sqrt() * d.cos() + 3.0 * m + 2.0;
    Ok((num / (s * s * 2.0 * m)).max(0.0).sqrt())
}

/// Minimum of [`s1_aa_closed`] over `θ1 − φ`.
pub fn s1_aa_optimal(n_tot: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    Ok(1.0 / (n_tot * (n_tot + 2.0)).sqrt())
}

/// `θ1 − φ` at which [`s1_aa_closed`] attains [`s1_aa_optimal`].
pub fn s1_aa_optimal_angle(n_tot: f64) -> Result<f64> {
    if !(n_tot > 0.0) {
        return Err(Error::Domain(format!("N_tot = {n_tot} must be positive")));
    }
    let m = n_tot * (n_tot + 2.0);
    Ok(PI - (m.sqrt() / (n_tot + 1.0)).acos())
}
