#![allow(dead_code)]

pub mod fock;

use gi_core::gaussian::{beam_splitter, displaced_squeezed, tensor, GaussianState};
use num_complex::Complex64;
use rand::Rng;

/// A product of displaced-squeezed states mixed on a beam splitter, as a Gaussian state and
/// as a truncated Fock vector.
pub fn random_pair<R: Rng>(rng: &mut R, max_alpha: f64, max_r: f64, cutoff: usize) -> (GaussianState, fock::TwoMode) {
    let mut polar = |max: f64| Complex64::from_polar(max * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>());
    let (aa, xa, ab, xb) = (polar(max_alpha), polar(max_r), polar(max_alpha), polar(max_r));
    let nu = polar(std::f64::consts::FRAC_PI_2);
    let work = cutoff + 90;
    let mut f = fock::TwoMode::product(
        &fock::displaced_squeezed(aa, xa, cutoff, work),
        &fock::displaced_squeezed(ab, xb, cutoff, work),
    );
    f.beam_splitter(nu);
    let g = beam_splitter(2, nu, (0, 1))
        .unwrap()
        .apply(&tensor(&displaced_squeezed(aa, xa), &displaced_squeezed(ab, xb)))
        .unwrap();
    (g, f)
}

/// Largest absolute difference between Gaussian and Fock number moments.
pub fn moment_gap(g: &gi_core::gaussian::NumberMoments, f: &fock::FockMoments) -> f64 {
    [
        g.mean_a - f.mean_a,
        g.mean_b - f.mean_b,
        g.var_a - f.var_a,
        g.var_b - f.var_b,
        g.cov_ab - f.cov_ab,
        g.mean_x - f.mean_x,
        g.cov_n_x - f.cov_n_x,
        g.var_x - f.var_x,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()))
}
