//! Truncated Fock-space brute force for one- and two-mode states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type C = Complex64;

fn annihilation(dim: usize) -> DMatrix<C> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C::new((j as f64).sqrt(), 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// `exp(c₁ a† + c₂ a + c₃ a†² + c₄ a²) v` by substepped Taylor series in a `dim`-level space.
fn single_mode_exp(coeffs: [C; 4], v: &[C]) -> Vec<C> {
    let dim = v.len();
    let apply = |x: &[C]| -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); dim];
        for (n, &xn) in x.iter().enumerate() {
            let f = n as f64;
            if n + 1 < dim {
                out[n + 1] += coeffs[0] * (f + 1.0).sqrt() * xn;
            }
            if n >= 1 {
                out[n - 1] += coeffs[1] * f.sqrt() * xn;
            }
            if n + 2 < dim {
                out[n + 2] += coeffs[2] * ((f + 1.0) * (f + 2.0)).sqrt() * xn;
            }
            if n >= 2 {
                out[n - 2] += coeffs[3] * (f * (f - 1.0)).sqrt() * xn;
            }
        }
        out
    };
    let d = dim as f64;
    let bound = (coeffs[0].norm() + coeffs[1].norm()) * d.sqrt() + (coeffs[2].norm() + coeffs[3].norm()) * d;
    taylor_steps(bound, v.to_vec(), apply)
}

/// `exp(G) v` as a product of Taylor series over substeps with `‖G‖/steps ≤ 1/2`;
/// `apply` computes `G x` and `bound` bounds `‖G‖`.
fn taylor_steps<F>(bound: f64, v: Vec<C>, apply: F) -> Vec<C>
where
    F: Fn(&[C]) -> Vec<C>,
{
    let steps = (bound / 0.5).ceil().max(1.0) as usize;
    let mut cur = v;
    for _ in 0..steps {
        let mut term = cur.clone();
        for k in 1..80 {
            term = apply(&term);
            let inv = 1.0 / (k * steps) as f64;
            term.iter_mut().for_each(|t| *t *= inv);
            let size: f64 = term.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            cur.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            if size < 1e-18 {
                break;
            }
        }
    }
    cur
}

/// `D(α) S(ξ) |0⟩` with `S(ξ) = exp[(ξ a†² − ξ* a²)/2]`, built in a `work`-level space
/// and truncated to `cutoff` levels.
pub fn displaced_squeezed(alpha: C, xi: C, cutoff: usize, work: usize) -> DVector<C> {
    let z = C::new(0.0, 0.0);
    let mut vac = vec![z; work];
    vac[0] = C::new(1.0, 0.0);
    let sq = single_mode_exp([z, z, xi * 0.5, -xi.conj() * 0.5], &vac);
    let full = single_mode_exp([alpha, -alpha.conj(), z, z], &sq);
    let mut v = DVector::from_iterator(cutoff, full.iter().take(cutoff).copied());
    let norm = v.norm();
    v /= C::new(norm, 0.0);
    v
}

/// Density matrix `D(α) S(ξ) ρ_th S† D†`, truncated to `cutoff` levels.
pub fn displaced_squeezed_thermal(alpha: C, xi: C, n_th: f64, cutoff: usize, work: usize) -> DMatrix<C> {
    let a = annihilation(work);
    let ad = a.adjoint();
    let sq = (((&ad * &ad) * xi - (&a * &a) * xi.conj()) * C::new(0.5, 0.0)).exp();
    let disp = (&ad * alpha - &a * alpha.conj()).exp();
    let u = disp * sq;
    let thermal = DMatrix::from_fn(work, work, |i, j| {
        if i == j {
            C::new(n_th.powi(i as i32) / (n_th + 1.0).powi(i as i32 + 1), 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let rho = &u * thermal * u.adjoint();
    let mut t = rho.view((0, 0), (cutoff, cutoff)).into_owned();
    let tr = t.trace();
    t /= tr;
    t
}

/// Quantum Fisher information of `e^{−iφn} ρ e^{iφn}` from the spectral formula
/// `H = 2 Σ |⟨i|∂ρ|j⟩|² / (p_i + p_j)`.
pub fn phase_qfi(rho: &DMatrix<C>) -> f64 {
    let dim = rho.nrows();
    let n = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C::new(i as f64, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let drho = (&n * rho - rho * &n) * C::new(0.0, -1.0);
    let herm = (rho + rho.adjoint()) * C::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = v.adjoint() * drho * v;
    let mut h = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let s = eig.eigenvalues[i] + eig.eigenvalues[j];
            if s > 1e-14 {
                h += 2.0 * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    h
}

/// Two-mode pure state with amplitudes indexed `n_a * cutoff + n_b`.
#[derive(Debug, Clone)]
pub struct TwoMode {
    pub cutoff: usize,
    pub amp: Vec<C>,
}

#[derive(Debug, Clone, Copy)]
pub struct FockMoments {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
    pub mean_x: f64,
    pub cov_n_x: f64,
    pub var_x: f64,
}

impl TwoMode {
    pub fn product(a: &DVector<C>, b: &DVector<C>) -> Self {
        let cutoff = a.len();
        assert_eq!(cutoff, b.len());
        let mut amp = vec![C::new(0.0, 0.0); cutoff * cutoff];
        for i in 0..cutoff {
            for j in 0..cutoff {
                amp[i * cutoff + j] = a[i] * b[j];
            }
        }
        Self { cutoff, amp }
    }

    /// `G ψ` for `G = c₁ a†b + c₂ ab† + c₃ a†b† + c₄ ab`, truncated to the cutoff.
    fn generator(&self, coeffs: [C; 4], psi: &[C]) -> Vec<C> {
        let c = self.cutoff;
        let mut out = vec![C::new(0.0, 0.0); c * c];
        for na in 0..c {
            for nb in 0..c {
                let x = psi[na * c + nb];
                if x == C::new(0.0, 0.0) {
                    continue;
                }
                let (fa, fb) = (na as f64, nb as f64);
                if na + 1 < c && nb >= 1 {
                    out[(na + 1) * c + nb - 1] += coeffs[0] * ((fa + 1.0) * fb).sqrt() * x;
                }
                if na >= 1 && nb + 1 < c {
                    out[(na - 1) * c + nb + 1] += coeffs[1] * (fa * (fb + 1.0)).sqrt() * x;
                }
                if na + 1 < c && nb + 1 < c {
                    out[(na + 1) * c + nb + 1] += coeffs[2] * ((fa + 1.0) * (fb + 1.0)).sqrt() * x;
                }
                if na >= 1 && nb >= 1 {
                    out[(na - 1) * c + nb - 1] += coeffs[3] * (fa * fb).sqrt() * x;
                }
            }
        }
        out
    }

    fn exponentiate(&mut self, coeffs: [C; 4]) {
        let bound = coeffs.iter().map(|c| c.norm()).sum::<f64>() * self.cutoff as f64;
        let amp = std::mem::take(&mut self.amp);
        self.amp = taylor_steps(bound, amp, |x| self.generator(coeffs, x));
    }

    /// `exp(ν a†b − ν* ab†)`.
    pub fn beam_splitter(&mut self, nu: C) {
        let z = C::new(0.0, 0.0);
        self.exponentiate([nu, -nu.conj(), z, z]);
    }

    /// `exp(ζ a†b† − ζ* ab)`.
    pub fn two_mode_squeezer(&mut self, zeta: C) {
        let z = C::new(0.0, 0.0);
        self.exponentiate([z, z, zeta, -zeta.conj()]);
    }

    /// `exp(−iφ a†a)`.
    pub fn phase_shift(&mut self, phi: f64) {
        let c = self.cutoff;
        for na in 0..c {
            let f = C::from_polar(1.0, -phi * na as f64);
            for nb in 0..c {
                self.amp[na * c + nb] *= f;
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Photon-number moments, with `X = ab + a†b†` evaluated in a space one level larger so
    /// that raising the top level is not lost.
    pub fn moments(&self) -> FockMoments {
        let c = self.cutoff;
        let norm = self.norm_sqr();
        let e = c + 1;
        let mut x_psi = vec![C::new(0.0, 0.0); e * e];
        let mut n_psi = vec![C::new(0.0, 0.0); e * e];
        let (mut ma, mut mb, mut ma2, mut mb2, mut mab) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for na in 0..c {
            for nb in 0..c {
                let x = self.amp[na * c + nb] / norm.sqrt();
                let p = x.norm_sqr();
                let (fa, fb) = (na as f64, nb as f64);
                ma += fa * p;
                mb += fb * p;
                ma2 += fa * fa * p;
                mb2 += fb * fb * p;
                mab += fa * fb * p;
                n_psi[na * e + nb] += x * (fa + fb);
                x_psi[(na + 1) * e + nb + 1] += x * ((fa + 1.0) * (fb + 1.0)).sqrt();
                if na >= 1 && nb >= 1 {
                    x_psi[(na - 1) * e + nb - 1] += x * (fa * fb).sqrt();
                }
            }
        }
        let inner = |u: &[C], v: &[C]| -> C { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
        let mut psi = vec![C::new(0.0, 0.0); e * e];
        for na in 0..c {
            for nb in 0..c {
                psi[na * e + nb] = self.amp[na * c + nb] / norm.sqrt();
            }
        }
        let mean_x = inner(&psi, &x_psi).re;
        let x2 = inner(&x_psi, &x_psi).re;
        let nx = inner(&n_psi, &x_psi).re;
        FockMoments {
            mean_a: ma,
            mean_b: mb,
            var_a: ma2 - ma * ma,
            var_b: mb2 - mb * mb,
            cov_ab: mab - ma * mb,
            mean_x,
            cov_n_x: nx - (ma + mb) * mean_x,
            var_x: x2 - mean_x * mean_x,
        }
    }
}
