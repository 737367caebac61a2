//! Bohr–Sommerfeld expansion coefficients from the classical partition
//! function, and semiclassical reference chains.
//!
//! The classical heat trace `θ_cl(t) = (πt)^{-1/2} ∫₀^∞ e^{-V(q)t} dq`
//! expands for t ↓ 0 in powers `t^{-μ + w/N}` whose coefficients are finite
//! Γ-weighted sums over coefficient multi-indices; this is valid strictly
//! above O(t^μ), i.e. for w ≤ N+1, which is exactly the Bohr–Sommerfeld
//! ladder ν = μ, μ-1/N, …, capped at ν > -μ. Matching the heat trace against
//! the eigenvalue counting asymptotics converts the heat coefficients into
//! the tail coefficients b̃_ν = c̃_{-ν}/Γ(1+ν) of
//!
//! `Σ_ν b̃_ν E_k^ν ~ k + 1/2`.
//!
//! Levels beyond the explicit cutoff are frozen at the Newton roots of this
//! truncated relation; those roots also seed the chain iterations.

use crate::potential::{Potential, PotentialError};
use crate::special::gamma;
use crate::{exp_f64, Exponent, Sector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemiclassicsError {
    #[error("heat-trace depth {requested} exceeds the classical validity range (max {max})")]
    DepthExceedsClassicalRange { requested: usize, max: usize },
    #[error("Bohr-Sommerfeld coefficients require degree N >= 3, got {0}")]
    DegreeTooLow(usize),
    #[error("semiclassical Newton solve failed at k={k}, last iterate {last}")]
    Newton { k: usize, last: Complex64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Head of the classical heat-trace expansion
/// `θ_cl(t) ~ Σ c̃ t^{exponent}`, exponent = -μ + w/N.
#[derive(Debug, Clone)]
pub struct HeatTraceHead {
    /// (t-exponent, coefficient) pairs in ascending exponent order.
    pub entries: Vec<(Exponent, Complex64)>,
}

impl HeatTraceHead {
    /// The coefficient c̃₀ of t⁰ (zero when the exponent ladder skips 0).
    pub fn c_zero(&self) -> Complex64 {
        self.entries
            .iter()
            .find(|(e, _)| *e == Exponent::new(0, 1))
            .map(|(_, c)| *c)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Evaluate the partial sum Σ c̃ t^{exponent} at real t > 0.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|(e, c)| c * t.powf(exp_f64(*e)))
            .sum()
    }
}

/// Semiclassical tail: the (ν, b̃_ν) ladder of one rotated potential,
/// depth-capped at ν > -μ. `complete` marks ladders exact to all orders
/// (only the hard-coded harmonic tail).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SemiclassicalTail {
    entries: Vec<TailTerm>,
    complete: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TailTerm {
    /// exact rational exponent ν
    pub nu: [i64; 2],
    /// coefficient b̃_ν
    pub b: [f64; 2],
}

impl TailTerm {
    pub fn exponent(&self) -> Exponent {
        Exponent::new(self.nu[0], self.nu[1])
    }
    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.b[0], self.b[1])
    }
}

impl SemiclassicalTail {
    pub fn new(entries: Vec<(Exponent, Complex64)>, complete: bool) -> Self {
        SemiclassicalTail {
            entries: entries
                .into_iter()
                .map(|(nu, b)| TailTerm {
                    nu: [*nu.numer(), *nu.denom()],
                    b: [b.re, b.im],
                })
                .collect(),
            complete,
        }
    }

    /// The exact harmonic tail {ν=1, b̃=1/2}; used by determinant-module
    /// closed-form tests only, never produced by `bs_coeffs`.
    pub fn harmonic() -> Self {
        SemiclassicalTail::new(
            vec![(Exponent::new(1, 1), Complex64::new(0.5, 0.0))],
            true,
        )
    }

    pub fn terms(&self) -> &[TailTerm] {
        &self.entries
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    /// Deepest exponent present in the ladder.
    pub fn nu_min(&self) -> Exponent {
        self.entries
            .iter()
            .map(|t| t.exponent())
            .min()
            .unwrap_or_else(|| Exponent::new(0, 1))
    }

    /// b̃₀ (zero when the ladder skips ν = 0).
    pub fn b_zero(&self) -> Complex64 {
        self.entries
            .iter()
            .find(|t| t.exponent() == Exponent::new(0, 1))
            .map(|t| t.coefficient())
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// (ν as f64, b̃) pairs for numerical evaluation.
    pub fn ladder(&self) -> Vec<(f64, Complex64)> {
        self.entries
            .iter()
            .map(|t| (exp_f64(t.exponent()), t.coefficient()))
            .collect()
    }

    /// Σ b̃_ν E^ν with principal powers.
    pub fn eval(&self, e: Complex64) -> Complex64 {
        self.entries
            .iter()
            .map(|t| t.coefficient() * e.powf(exp_f64(t.exponent())))
            .sum()
    }

    /// dκ/dE = Σ ν b̃_ν E^{ν-1}.
    pub fn eval_deriv(&self, e: Complex64) -> Complex64 {
        self.entries
            .iter()
            .map(|t| {
                let nu = exp_f64(t.exponent());
                t.coefficient() * nu * e.powf(nu - 1.0)
            })
            .sum()
    }

    /// Newton solve of Σ b̃_ν E^ν = κ from the given seed.
    pub fn solve_root(&self, kappa: f64, seed: Complex64) -> Result<Complex64, Complex64> {
        let mut e = seed;
        for _ in 0..80 {
            let r = self.eval(e) - kappa;
            let d = self.eval_deriv(e);
            if d.norm() == 0.0 {
                return Err(e);
            }
            let mut de = -r / d;
            let cap = 0.7 * e.norm().max(1.0);
            if de.norm() > cap {
                de *= cap / de.norm();
            }
            e += de;
            if de.norm() < 1e-13 * e.norm().max(1.0) {
                return Ok(e);
            }
        }
        Err(e)
    }

    /// Leading-order inversion E = (κ/b̃_μ)^{1/μ} used as the top seed.
    pub fn leading_seed(&self, kappa: f64) -> Complex64 {
        let top = &self.entries[0];
        let mu = exp_f64(top.exponent());
        let bmu = top.coefficient();
        (Complex64::new(kappa, 0.0) / bmu).powf(1.0 / mu)
    }

    fn is_real(&self) -> bool {
        let scale = self
            .entries
            .iter()
            .map(|t| t.b[0].abs().max(t.b[1].abs()))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        self.entries.iter().all(|t| t.b[1].abs() <= 1e-14 * scale)
    }

    /// Solve the tail relation for the quantum numbers `ks`, proceeding
    /// top-down with continuation seeding. Rungs where no physical root
    /// exists (deep double wells at small κ) fall back to linear
    /// extrapolation from the rung above; this only affects iteration
    /// seeds, never converged output.
    pub fn solve_levels(&self, ks: &[usize]) -> Result<Vec<Complex64>, SemiclassicsError> {
        let mut out = vec![Complex64::new(0.0, 0.0); ks.len()];
        let real_ladder = self.is_real();
        let mut seed: Option<Complex64> = None;
        for i in (0..ks.len()).rev() {
            let kappa = ks[i] as f64 + 0.5;
            let s = seed.unwrap_or_else(|| self.leading_seed(kappa));
            let sol = self.solve_root(kappa, s);
            let accepted = match sol {
                Ok(e) => {
                    let physical = if real_ladder {
                        e.re > 0.0 && e.im.abs() <= 1e-9 * e.norm().max(1.0)
                    } else {
                        true
                    };
                    if physical {
                        Some(e)
                    } else {
                        None
                    }
                }
                Err(_) => None,
            };
            match accepted {
                Some(e) => {
                    out[i] = if real_ladder { Complex64::new(e.re, 0.0) } else { e };
                    // extrapolated seed for the next rung down
                    let d = self.eval_deriv(out[i]);
                    seed = Some(out[i] - 2.0 / d);
                }
                None => {
                    if i + 1 >= ks.len() {
                        return Err(SemiclassicsError::Newton {
                            k: ks[i],
                            last: sol.err().unwrap_or_default(),
                        });
                    }
                    let above = out[i + 1];
                    let d = self.eval_deriv(above);
                    out[i] = above - 2.0 / d;
                    if real_ladder {
                        out[i] = Complex64::new(out[i].re, 0.0);
                    }
                    seed = Some(out[i]);
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------

/// Enumerate multi-indices {r_j}_{j=1..jmax} with Σ j·r_j = w, calling `f`
/// with (k = Σ r_j, Π v_j^{r_j}/r_j!).
fn for_each_composition(
    w: usize,
    coeffs: &[Complex64],
    f: &mut impl FnMut(usize, Complex64),
) {
    fn rec(
        j: usize,
        rem: usize,
        k: usize,
        prod: Complex64,
        coeffs: &[Complex64],
        f: &mut impl FnMut(usize, Complex64),
    ) {
        if j > coeffs.len() {
            if rem == 0 {
                f(k, prod);
            }
            return;
        }
        let top = rem / j;
        let mut term = prod;
        for r in 0..=top {
            if r > 0 {
                term = term * coeffs[j - 1] / r as f64;
                if term.norm_sqr() == 0.0 {
                    break;
                }
            }
            rec(j + 1, rem - j * r, k + r, term, coeffs, f);
        }
    }
    rec(1, w, 0, Complex64::new(1.0, 0.0), coeffs, f);
}

/// Heat-trace coefficients c̃ of `θ_cl(t) ~ Σ_w c̃_w t^{-μ + w/N}` for
/// w = 0..depth-1. Depth beyond the classical validity range (w ≤ N+1) is
/// rejected.
pub fn heat_coeffs(p: &Potential, depth: usize) -> Result<HeatTraceHead, SemiclassicsError> {
    let n = p.degree();
    if n < 3 {
        return Err(SemiclassicsError::DegreeTooLow(n));
    }
    if depth > n + 2 {
        return Err(SemiclassicsError::DepthExceedsClassicalRange {
            requested: depth,
            max: n + 2,
        });
    }
    let mu = Exponent::new(1, 2) + Exponent::new(1, n as i64);
    let mut entries = Vec::with_capacity(depth);
    let norm = 1.0 / (PI.sqrt() * n as f64);
    for w in 0..depth {
        let mut total = Complex64::new(0.0, 0.0);
        for_each_composition(w, p.coeffs(), &mut |k, prod| {
            let g = gamma(k as f64 + (1.0 - w as f64) / n as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            total += prod * (sign * g);
        });
        let exponent = -mu + Exponent::new(w as i64, n as i64);
        entries.push((exponent, total * norm));
    }
    Ok(HeatTraceHead { entries })
}

/// Bohr–Sommerfeld tail b̃_ν = c̃_{-ν}/Γ(1+ν) over the full classical ladder
/// ν = μ - w/N, w = 0..=N+1 (all ν > -μ). For the quartic this is the 6-term
/// tail down to O(E^{-1/2}).
pub fn bs_coeffs(p: &Potential) -> Result<SemiclassicalTail, SemiclassicsError> {
    let n = p.degree();
    let heat = heat_coeffs(p, n + 2)?;
    let entries = heat
        .entries
        .into_iter()
        .map(|(texp, c)| {
            let nu = -texp;
            (nu, c / gamma(1.0 + exp_f64(nu)))
        })
        .collect();
    Ok(SemiclassicalTail::new(entries, false))
}

/// Quantum numbers of one sector up to and including k_max.
pub fn sector_indices(sector: Sector, k_max: usize) -> Vec<usize> {
    (sector.start_k()..=k_max).step_by(2).collect()
}

/// Semiclassical reference chain: Newton roots of the truncated
/// Bohr–Sommerfeld relation at each quantum number of the sector.
pub fn semiclassical_chain(
    p: &Potential,
    sector: Sector,
    k_max: usize,
) -> Result<Vec<Complex64>, SemiclassicsError> {
    let tail = bs_coeffs(p)?;
    tail.solve_levels(&sector_indices(sector, k_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{beta_minus_one, leading_bs_coefficient, rotate};

    #[test]
    fn leading_coefficient_matches_classical_action() {
        for n in [3usize, 4, 5, 6] {
            let tail = bs_coeffs(&Potential::homogeneous(n)).unwrap();
            let top = &tail.terms()[0];
            assert_eq!(
                top.exponent(),
                Exponent::new(1, 2) + Exponent::new(1, n as i64)
            );
            assert!((top.coefficient().re - leading_bs_coefficient(n)).abs() < 1e-13);
        }
        // quartic value quoted to six digits
        assert!((leading_bs_coefficient(4) - 0.556419).abs() < 2e-6);
    }

    #[test]
    fn second_coefficient_is_minus_2v1_over_pi_n() {
        for (n, v1) in [(4usize, 0.83), (5, -1.2), (6, 0.4)] {
            let mut coeffs = vec![0.0; n - 1];
            coeffs[0] = v1;
            let p = Potential::from_real(n, &coeffs).unwrap();
            let tail = bs_coeffs(&p).unwrap();
            let b1 = tail.terms()[1].coefficient();
            assert!((b1.re - (-2.0 * v1 / (PI * n as f64))).abs() < 1e-13);
            assert!(b1.im.abs() < 1e-15);
        }
    }

    #[test]
    fn quartic_tail_has_six_terms_down_to_minus_half() {
        let tail = bs_coeffs(&Potential::even_quartic(1.0)).unwrap();
        assert_eq!(tail.depth(), 6);
        assert_eq!(tail.nu_min(), Exponent::new(-1, 2));
        // even quartic: b̃₀ = 0
        assert!(tail.b_zero().norm() < 1e-15);
    }

    #[test]
    fn c_zero_equals_minus_two_beta_over_n() {
        // the identity chain b̃₀ = c̃₀ = -(2/N) β₋₁, checked coefficient-wise
        let p = Potential::from_real(4, &[0.7, -0.9, 1.3]).unwrap();
        let heat = heat_coeffs(&p, 6).unwrap();
        let beta = beta_minus_one(&p);
        assert!((heat.c_zero() - beta * (-2.0 / 4.0)).norm() < 1e-13);
        let tail = bs_coeffs(&p).unwrap();
        assert!((tail.b_zero() - beta * (-0.5)).norm() < 1e-13);
    }

    #[test]
    fn real_potentials_have_real_tails() {
        let p = Potential::from_real(6, &[0.3, -0.2, 0.9, 1.1, -0.5]).unwrap();
        let tail = bs_coeffs(&p).unwrap();
        for t in tail.terms() {
            assert_eq!(t.b[1], 0.0);
        }
    }

    #[test]
    fn heat_depth_rejected_beyond_classical_range() {
        let p = Potential::even_quartic(1.0);
        assert!(heat_coeffs(&p, 6).is_ok());
        assert!(heat_coeffs(&p, 7).is_err());
    }

    #[test]
    fn heat_partial_sum_matches_quadrature() {
        // adaptive-quadrature oracle of θ_cl at t = 1e-3
        let p = Potential::from_real(4, &[0.21, -0.17, 0.11]).unwrap();
        let t = 1e-3;
        let head = heat_coeffs(&p, 6).unwrap();
        let partial = head.eval(t).re;
        let qmax = (80.0 / t).powf(0.25) + 10.0;
        let integrand = |q: f64| (-(p.eval_real(q).re) * t).exp();
        let integral = crate::oracle::adaptive_simpson(&integrand, 0.0, qmax, 1e-12, 28);
        let exact = integral / (PI * t).sqrt();
        assert!(
            ((partial - exact) / exact).abs() < 1e-6,
            "rel err {:.2e}",
            ((partial - exact) / exact).abs()
        );
    }

    #[test]
    fn homogeneous_chain_seed_and_identity_across_rotations() {
        let p = Potential::homogeneous(4);
        let tail = bs_coeffs(&p).unwrap();
        // leading-order seed for k=0 is ~0.868 and the refined root stays close
        let seed = tail.leading_seed(0.5);
        assert!((seed.re - 0.868).abs() < 2e-3);
        let root = tail.solve_root(0.5, seed).unwrap();
        assert!((tail.eval(root).re - 0.5).abs() < 1e-12);
        // rotation acts trivially at v = 0: all chains coincide
        let base = semiclassical_chain(&p, Sector::Neumann, 24).unwrap();
        for ell in 1..6i64 {
            let c = semiclassical_chain(&rotate(&p, ell), Sector::Neumann, 24).unwrap();
            for (a, b) in base.iter().zip(&c) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn depth_increase_drift_is_small_at_high_k() {
        // dropping the deepest of the 6 quartic terms moves the k=199 root
        // by a relative amount far below the leading-order scale
        let p = Potential::even_quartic(0.7);
        let tail = bs_coeffs(&p).unwrap();
        let truncated = SemiclassicalTail::new(
            tail.terms()[..5]
                .iter()
                .map(|t| (t.exponent(), t.coefficient()))
                .collect(),
            false,
        );
        let kappa = 199.5;
        let full = tail.solve_root(kappa, tail.leading_seed(kappa)).unwrap();
        let trunc = truncated
            .solve_root(kappa, truncated.leading_seed(kappa))
            .unwrap();
        assert!(((full - trunc).norm() / full.norm()) < 1e-4);
    }

    #[test]
    fn interlacing_for_even_quartic() {
        let p = Potential::even_quartic(1.5);
        let n = semiclassical_chain(&p, Sector::Neumann, 20).unwrap();
        let d = semiclassical_chain(&p, Sector::Dirichlet, 19).unwrap();
        let mut merged: Vec<f64> = n.iter().chain(d.iter()).map(|e| e.re).collect();
        let sorted = {
            let mut s = merged.clone();
            s.sort_by(f64::total_cmp);
            s
        };
        // interlaced: E0 < E1 < E2 < ... when merged in index order
        let mut interleaved = Vec::new();
        for i in 0..merged.len() {
            let (half, idx) = (i / 2, i % 2);
            interleaved.push(if idx == 0 { n[half].re } else { d[half].re });
        }
        assert_eq!(interleaved, sorted);
        merged.sort_by(f64::total_cmp);
        for w in merged.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn double_well_seeding_falls_back_gracefully() {
        let p = Potential::even_quartic(-4.0);
        let chain = semiclassical_chain(&p, Sector::Neumann, 32).unwrap();
        // low rungs extrapolate below the well barrier; ordering preserved
        assert!(chain[0].re < chain[1].re);
        assert!(chain[0].re < 0.0);
        for w in chain.windows(2) {
            assert!(w[0].re < w[1].re);
        }
        // high rungs genuinely solve the tail relation
        let tail = bs_coeffs(&p).unwrap();
        let top = *chain.last().unwrap();
        assert!((tail.eval(top).re - 32.5).abs() < 1e-10);
    }

    #[test]
    fn harmonic_tail_is_complete() {
        let t = SemiclassicalTail::harmonic();
        assert!(t.is_complete());
        assert_eq!(t.depth(), 1);
        assert!((t.eval(Complex64::new(7.0, 0.0)).re - 3.5).abs() < 1e-15);
    }
}
