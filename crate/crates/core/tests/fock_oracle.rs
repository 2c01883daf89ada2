mod common;

use common::fock::{self, TwoMode};
use common::{moment_gap, random_pair};
use gi_core::detection::{difference_current, sum_current};
use gi_core::gaussian::{
    coherent, displacement, number_moments, single_mode_squeezer, tensor, thermal,
    two_mode_squeezer, vacuum,
};
use gi_core::qfi::{qfi, DerivativeMethod, PhaseFamily};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn number_moments_match_fock_space_for_moderate_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (g, f) = random_pair(&mut rng, 1.0, 0.6, 60);
        let gap = moment_gap(&number_moments(&g, (0, 1)).unwrap(), &f.moments());
        assert!(gap < 1e-6, "gap {gap}");
    }
}

#[test]
fn strongly_squeezed_states_need_a_larger_cutoff() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let (g, f) = random_pair(&mut rng, 1.0, 1.0, 110);
        let gap = moment_gap(&number_moments(&g, (0, 1)).unwrap(), &f.moments());
        assert!(gap < 1e-6, "gap {gap}");
    }
    let xi = Complex64::new(1.0, 0.0);
    let work = 200;
    let truncated = TwoMode::product(&fock::displaced_squeezed(xi * 0.0, xi, 60, work), &fock::displaced_squeezed(xi * 0.0, xi * 0.0, 60, work));
    let g = tensor(&gi_core::gaussian::displaced_squeezed(xi * 0.0, xi), &vacuum(1));
    let gap = moment_gap(&number_moments(&g, (0, 1)).unwrap(), &truncated.moments());
    assert!(gap > 1e-5 && gap < 1e-4, "truncation error at cutoff 60: {gap}");
}

#[test]
fn coherent_pair_difference_current() {
    let a = 0.9;
    let s = difference_current(&tensor(&coherent(Complex64::new(a, 0.0)), &coherent(Complex64::new(a, 0.0))), 1.0).unwrap();
    let f = TwoMode::product(
        &fock::displaced_squeezed(Complex64::new(a, 0.0), Complex64::new(0.0, 0.0), 40, 120),
        &fock::displaced_squeezed(Complex64::new(a, 0.0), Complex64::new(0.0, 0.0), 40, 120),
    )
    .moments();
    assert!((s.mean - (f.mean_a - f.mean_b)).abs() < 1e-9);
    assert!((s.variance - (f.var_a + f.var_b - 2.0 * f.cov_ab)).abs() < 1e-9);
    assert!((s.variance - 2.0 * a * a).abs() < 1e-12);
}

#[test]
fn two_mode_squeezed_vacuum_sum_current() {
    for r in [0.3, 0.7] {
        let z = Complex64::new(0.0, 0.0);
        let mut f = TwoMode::product(&fock::displaced_squeezed(z, z, 60, 60), &fock::displaced_squeezed(z, z, 60, 60));
        f.two_mode_squeezer(Complex64::from_polar(r, 0.4));
        let m = f.moments();
        let g = two_mode_squeezer(2, Complex64::from_polar(r, 0.4), (0, 1)).unwrap().apply(&vacuum(2)).unwrap();
        let s = sum_current(&g, 1.0).unwrap();
        assert!((s.mean - (m.mean_a + m.mean_b)).abs() < 1e-9);
        assert!((s.mean - 2.0 * r.sinh().powi(2)).abs() < 1e-12);
        assert!((s.variance - (m.var_a + m.var_b + 2.0 * m.cov_ab)).abs() < 1e-8);
        let gap = moment_gap(&number_moments(&g, (0, 1)).unwrap(), &m);
        assert!(gap < 1e-8, "gap {gap}");
    }
}

#[test]
fn mixed_state_qfi_matches_spectral_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let alpha = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.3));
        let xi = Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..6.3));
        let n_th = rng.gen_range(0.05..0.5);
        let rho = fock::displaced_squeezed_thermal(alpha, xi, n_th, 40, 130);
        let oracle = fock::phase_qfi(&rho);
        let state = displacement(1, alpha, 0)
            .unwrap()
            .apply(&single_mode_squeezer(1, xi, 0).unwrap().apply(&thermal(n_th)).unwrap())
            .unwrap();
        let family = PhaseFamily::new(state, 0);
        let h = qfi(&family.state(0.0).unwrap(), &family.derivative(0.0, DerivativeMethod::Analytic).unwrap()).unwrap();
        assert!(((h - oracle) / oracle).abs() < 1e-4, "{h} vs {oracle}");
    }
}
