//! Polynomial potentials `V(q) = q^N + v₁ q^{N-1} + … + v_{N-1} q` and their
//! classical invariants.
//!
//! The potential is kept monic with zero constant term (any constant is
//! absorbed into the spectral parameter λ, the sign-reverse of the energy).
//! A cyclic group of complex scalings acts on the coefficients,
//! `v_j → e^{i j ℓ φ/2} v_j` with φ = 4π/(N+2); the rotated potentials are
//! the L generically-distinct partners whose spectra form the interacting
//! chains. The Laurent expansion of `(V(q)+λ)^{1/2}` at q = ∞ supplies the
//! residue invariant β₋₁ and the WKB normalization data.

use crate::special::gamma;
use crate::Exponent;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("potential degree must be >= 1, got {0}")]
    InvalidDegree(usize),
    #[error("expected {expected} coefficients (v1..v_{{N-1}}), got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("operation requires real coefficients")]
    NonRealCoefficients,
    #[error("Laurent head is fixed at exponents σ >= -1; requested depth below is rejected")]
    LaurentDepthExceeded,
    #[error("residue invariants require degree N >= 3, got {0}")]
    DegreeTooLow(usize),
    #[error("cannot parse potential: {0}")]
    Parse(String),
}

/// Monic polynomial potential of degree N with zero constant term.
///
/// `coeffs[j-1]` is the coefficient v_j of `q^{N-j}`, j = 1..N-1. Complex
/// throughout: the pipeline lives on rotated potentials, and real inputs are
/// simply coefficients with zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl Potential {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self, PotentialError> {
        if degree < 1 {
            return Err(PotentialError::InvalidDegree(degree));
        }
        if coeffs.len() != degree - 1 {
            return Err(PotentialError::CoefficientCount {
                expected: degree - 1,
                got: coeffs.len(),
            });
        }
        Ok(Potential { degree, coeffs })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(degree: usize, coeffs: &[f64]) -> Result<Self, PotentialError> {
        Self::new(degree, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The homogeneous potential q^N.
    pub fn homogeneous(degree: usize) -> Self {
        Potential {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); degree.saturating_sub(1)],
        }
    }

    /// Even quartic `q^4 + v2 q^2`.
    pub fn even_quartic(v2: f64) -> Self {
        Potential::from_real(4, &[0.0, v2, 0.0]).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Growth order μ = 1/2 + 1/N of the spectral determinants.
    pub fn growth_order(&self) -> Exponent {
        Exponent::new(1, 2) + Exponent::new(1, self.degree as i64)
    }

    /// Spectral symmetry angle φ = 4π/(N+2).
    pub fn symmetry_angle(&self) -> f64 {
        4.0 * PI / (self.degree as f64 + 2.0)
    }

    /// All odd-index coefficients vanish and N is even.
    pub fn is_even(&self) -> bool {
        self.degree % 2 == 0
            && self
                .coeffs
                .iter()
                .enumerate()
                .all(|(i, c)| (i + 1) % 2 == 0 || *c == Complex64::new(0.0, 0.0))
    }

    /// Order L of the effective symmetry group: N+2 generically, N/2+1 for an
    /// even polynomial.
    pub fn group_order(&self) -> usize {
        if self.is_even() {
            self.degree / 2 + 1
        } else {
            self.degree + 2
        }
    }

    pub fn has_real_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Evaluate V(q) for complex q.
    pub fn eval(&self, q: Complex64) -> Complex64 {
        // Horner over the full monic coefficient list (constant term 0)
        let mut acc = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc = acc * q + c;
        }
        acc * q // multiplies through the final q (constant term is zero)
    }

    /// Evaluate V(x) for real x.
    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Derivative V'(q).
    pub fn eval_deriv(&self, q: Complex64) -> Complex64 {
        let n = self.degree;
        let mut acc = Complex64::new(n as f64, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let m = (n - j - 1) as f64; // power of the v_{j+1} term
            acc = acc * q + c * m;
        }
        acc
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.degree)?;
        for (j, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let p = self.degree - j - 1;
            if c.im == 0.0 {
                write!(f, "{}{}*q{}", if c.re < 0.0 { "" } else { "+" }, c.re, p)?;
            } else {
                write!(f, "+({}{:+}i)*q{}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// rotation and shift
// ---------------------------------------------------------------------------

/// Rotation action on the coefficients: v_j → e^{i j ℓ φ/2} v_j.
///
/// ℓ is used literally in the coefficient map (chain indices are reduced mod
/// L separately); the phase j·ℓ·φ/2 is reduced mod 2π exactly through the
/// integer residue of j·ℓ mod (N+2), so composing rotations is a group action
/// to machine precision.
pub fn rotate(p: &Potential, ell: i64) -> Potential {
    let n = p.degree as i64;
    let period = n + 2;
    let coeffs = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let j = (i + 1) as i64;
            let m = (j * ell).rem_euclid(period);
            // exact on the real axis so half-turn partners stay exactly real
            if m == 0 {
                *c
            } else if 2 * m == period {
                -c
            } else {
                let angle = 2.0 * PI * m as f64 / period as f64;
                c * Complex64::new(angle.cos(), angle.sin())
            }
        })
        .collect();
    Potential {
        degree: p.degree,
        coeffs,
    }
}

/// Shifted potential V_a(q) = V(q+a) − V(a): monic of the same degree with
/// zero constant term. Only real endpoints a are supported.
pub fn shift(p: &Potential, a: f64) -> Result<Potential, PotentialError> {
    if !p.has_real_coeffs() {
        return Err(PotentialError::NonRealCoefficients);
    }
    let n = p.degree;
    // full coefficient list c[i] of q^i, i = 0..N
    let mut c = vec![0.0f64; n + 1];
    c[n] = 1.0;
    for (j, v) in p.coeffs.iter().enumerate() {
        c[n - j - 1] = v.re;
    }
    // binomial shift: c'[i] = Σ_{m>=i} c[m] C(m,i) a^{m-i}
    let mut shifted = vec![0.0f64; n + 1];
    for m in 0..=n {
        if c[m] == 0.0 {
            continue;
        }
        let mut binom = 1.0f64;
        let mut apow = 1.0f64;
        for i in (0..=m).rev() {
            shifted[i] += c[m] * binom * apow;
            if i > 0 {
                binom *= i as f64 / (m - i + 1) as f64;
                apow *= a;
            }
        }
    }
    let coeffs = (1..n).map(|j| Complex64::new(shifted[n - j], 0.0)).collect();
    Ok(Potential { degree: n, coeffs })
}

// ---------------------------------------------------------------------------
// Laurent head at q = ∞ and the residue invariants
// ---------------------------------------------------------------------------

/// Head of the Laurent expansion `(V(q)+λ)^{1/2} ~ Σ_σ β_σ q^σ` at q → +∞.
///
/// Exponents descend from σ = N/2 in integer steps (the 1/N-spaced ladder of
/// the general theory carries zero coefficients off this sub-ladder), down to
/// and including σ = -1 when that value is reached (N even); for N odd the
/// ladder stays on half-integers and β₋₁ ≡ 0.
#[derive(Debug, Clone)]
pub struct LaurentHead {
    entries: Vec<(Exponent, Complex64)>,
    lambda: Complex64,
}

impl LaurentHead {
    pub fn entries(&self) -> &[(Exponent, Complex64)] {
        &self.entries
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// β_σ for a given exponent; exponents off the ladder carry 0.
    pub fn beta(&self, sigma: Exponent) -> Complex64 {
        self.entries
            .iter()
            .find(|(s, _)| *s == sigma)
            .map(|(_, b)| *b)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// The residue coefficient β₋₁ (0 for N odd).
    pub fn beta_minus_one(&self) -> Complex64 {
        self.beta(Exponent::new(-1, 1))
    }
}

/// Power-series coefficients a_w of `(1+u)^{1/2}` where
/// `u(t) = v₁ t + v₂ t² + … + v_{N-1} t^{N-1} + λ t^N` (t = 1/q), so that
/// `(V(q)+λ)^{1/2} = Σ_w a_w q^{N/2-w}`.
pub(crate) fn sqrt_series(p: &Potential, lambda: Complex64, terms: usize) -> Vec<Complex64> {
    let n = p.degree;
    let mut u = vec![Complex64::new(0.0, 0.0); n + 1];
    for (i, c) in p.coeffs.iter().enumerate() {
        u[i + 1] = *c;
    }
    u[n] += lambda;
    // J.C.P. Miller recurrence for f = (1+u)^α, α = 1/2:
    //   w f_w = Σ_{m=1..w} (α m - (w - m)) u_m f_{w-m}
    let alpha = 0.5;
    let mut f = vec![Complex64::new(0.0, 0.0); terms];
    if terms == 0 {
        return f;
    }
    f[0] = Complex64::new(1.0, 0.0);
    for w in 1..terms {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=w.min(n) {
            let coef = alpha * m as f64 - (w - m) as f64;
            acc += u[m] * f[w - m] * coef;
        }
        f[w] = acc / w as f64;
    }
    f
}

/// Laurent head of `(V(q)+λ)^{1/2}` down to σ = -1.
///
/// The requested depth is fixed: σ ranges over `N/2 - w` for
/// `w = 0..=⌊N/2⌋+1`. β₋₁ is λ-independent for N ≥ 3.
pub fn laurent_head(p: &Potential, lambda: Complex64) -> LaurentHead {
    let n = p.degree as i64;
    // deepest w with σ = N/2 - w >= -1
    let w_max = ((n + 2) / 2) as usize;
    let a = sqrt_series(p, lambda, w_max + 1);
    let entries = a
        .into_iter()
        .enumerate()
        .map(|(w, b)| (Exponent::new(n, 2) - Exponent::new(w as i64, 1), b))
        .collect();
    LaurentHead {
        entries,
        lambda,
    }
}

/// Residue invariant R = β₋₁/N of the finite-part prescription for
/// `∫^∞ (V+λ)^{1/2}` (the s = -1/2 residue of the analytically continued
/// `∫^∞ (V+λ)^{-s}`). λ-independent; requires N ≥ 3.
pub fn residue_r(p: &Potential) -> Result<Complex64, PotentialError> {
    if p.degree < 3 {
        return Err(PotentialError::DegreeTooLow(p.degree));
    }
    let head = laurent_head(p, Complex64::new(0.0, 0.0));
    Ok(head.beta_minus_one() / p.degree as f64)
}

/// β₋₁ of the potential (shortcut through the Laurent head at λ = 0).
pub fn beta_minus_one(p: &Potential) -> Complex64 {
    laurent_head(p, Complex64::new(0.0, 0.0)).beta_minus_one()
}

// ---------------------------------------------------------------------------
// serialization: {"degree": N, "coeffs": [[re, im], ...]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PotentialRepr {
    degree: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for Potential {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PotentialRepr {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PotentialRepr::deserialize(d)?;
        Potential::new(
            repr.degree,
            repr.coeffs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// mini-language: "q4+2*q2-0.5*q1"
// ---------------------------------------------------------------------------

/// Parse a potential from term syntax like `q4+2*q2-0.5*q1`.
///
/// The leading term must be a bare `qN` (monic normalization is explicit);
/// constant terms are rejected (they belong to λ).
pub fn parse_potential(src: &str) -> Result<Potential, PotentialError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(PotentialError::Parse("empty input".into()));
    }
    // split into signed terms
    let mut terms: Vec<(f64, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign = 1.0;
    let mut started = false;
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && started && !matches!(s.as_bytes()[i - 1], b'e' | b'E') {
            terms.push((sign, cur.clone()));
            cur.clear();
            sign = if ch == '-' { -1.0 } else { 1.0 };
        } else {
            if ch == '-' && !started {
                sign = -1.0;
            } else {
                cur.push(ch);
            }
            started = true;
        }
    }
    terms.push((sign, cur));

    let mut parsed: Vec<(f64, usize)> = Vec::new(); // (coefficient, power)
    for (sign, t) in &terms {
        let (coef, qpart) = match t.find('q') {
            Some(0) => (1.0, t.as_str()),
            Some(pos) => {
                let cs = &t[..pos];
                let cs = cs.strip_suffix('*').unwrap_or(cs);
                let c: f64 = cs
                    .parse()
                    .map_err(|_| PotentialError::Parse(format!("bad coefficient `{cs}`")))?;
                (c, &t[pos..])
            }
            None => {
                return Err(PotentialError::Parse(format!(
                    "constant term `{t}` is not allowed (absorb it into the spectral parameter)"
                )))
            }
        };
        let ptxt = qpart.strip_prefix('q').unwrap().trim_start_matches('^');
        let power: usize = ptxt
            .parse()
            .map_err(|_| PotentialError::Parse(format!("bad power `{ptxt}`")))?;
        if power == 0 {
            return Err(PotentialError::Parse("q0 constant term is not allowed".into()));
        }
        parsed.push((sign * coef, power));
    }
    let n = parsed.iter().map(|&(_, p)| p).max().unwrap();
    let mut full = vec![0.0f64; n + 1];
    for (c, p) in parsed {
        full[p] += c;
    }
    if (full[n] - 1.0).abs() > 0.0 {
        return Err(PotentialError::Parse(format!(
            "leading term must be monic: got {}*q{}",
            full[n], n
        )));
    }
    let coeffs: Vec<f64> = (1..n).map(|j| full[n - j]).collect();
    Potential::from_real(n, &coeffs)
}

// ---------------------------------------------------------------------------

/// The closed-form β₋₁ for the harmonic case N=2: β₋₁ = λ/2 (λ-dependent;
/// used only by the determinant module's closed-form tests).
pub fn harmonic_beta_minus_one(lambda: Complex64) -> Complex64 {
    lambda / 2.0
}

/// b̃_μ from the leading classical action for the monic q^N well:
/// π^{-1/2} Γ(1/N) / (N Γ(3/2 + 1/N)).
pub fn leading_bs_coefficient(degree: usize) -> f64 {
    let n = degree as f64;
    gamma(1.0 / n) / (PI.sqrt() * n * gamma(1.5 + 1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotate_identity_and_zero() {
        let p = Potential::from_real(4, &[0.3, -0.2, 0.9]).unwrap();
        let r0 = rotate(&p, 0);
        assert_eq!(p, r0);
        let hom = Potential::homogeneous(5);
        assert_eq!(rotate(&hom, 3), hom);
    }

    #[test]
    fn rotate_even_quartic_is_cube_root_coupling() {
        // N=4, phi = 2π/3: v2 picks up e^{2πi/3} per rotation step
        let p = Potential::even_quartic(1.0);
        let r = rotate(&p, 1);
        let j = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((r.coeffs()[1] - j).norm() < 1e-15);
        assert_eq!(r.coeffs()[0], c(0.0, 0.0));
        assert_eq!(r.coeffs()[2], c(0.0, 0.0));
    }

    #[test]
    fn rotate_full_turn_returns_original() {
        let p = Potential::new(4, vec![c(0.1, 0.2), c(-0.4, 0.0), c(0.3, -0.1)]).unwrap();
        let r = rotate(&p, 6); // N+2 steps
        for (a, b) in p.coeffs().iter().zip(r.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
        // even polynomial: L = N/2 + 1 steps suffice
        let e = Potential::even_quartic(2.5);
        let rl = rotate(&e, 3);
        for (a, b) in e.coeffs().iter().zip(rl.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn shift_examples() {
        let p = Potential::homogeneous(4);
        let s0 = shift(&p, 0.0).unwrap();
        assert_eq!(s0, p);
        // q^4 -> q^4 + 4a q^3 + 6a^2 q^2 + 4a^3 q
        let a = 0.7;
        let s = shift(&p, a).unwrap();
        assert!((s.coeffs()[0].re - 4.0 * a).abs() < 1e-14);
        assert!((s.coeffs()[1].re - 6.0 * a * a).abs() < 1e-14);
        assert!((s.coeffs()[2].re - 4.0 * a * a * a).abs() < 1e-14);
    }

    #[test]
    fn shift_defining_identity() {
        let p = Potential::from_real(5, &[0.2, -1.0, 0.5, 2.0]).unwrap();
        let a = -0.83;
        let s = shift(&p, a).unwrap();
        for &x in &[0.17, 1.3, -2.4, 0.02, 5.1] {
            let lhs = s.eval_real(x);
            let rhs = p.eval_real(x + a) - p.eval_real(a);
            assert!((lhs - rhs).norm() < 1e-11 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn shift_rejects_complex_coeffs() {
        let p = rotate(&Potential::even_quartic(1.0), 1);
        assert!(shift(&p, 1.0).is_err());
    }

    #[test]
    fn quartic_beta_formula() {
        // β₋₁ = v3/2 − v1 v2/4 + v1³/16
        let (v1, v2, v3) = (0.7, -1.3, 0.4);
        let p = Potential::from_real(4, &[v1, v2, v3]).unwrap();
        let b = beta_minus_one(&p);
        let want = v3 / 2.0 - v1 * v2 / 4.0 + v1 * v1 * v1 / 16.0;
        assert!((b.re - want).abs() < 1e-14);
        assert!(b.im.abs() < 1e-15);
    }

    #[test]
    fn sextic_beta_formula() {
        // β₋₁ = v4/2 − v2²/8 for q^6 + v2 q^4 + v4 q^2
        let (v2, v4) = (1.7, -0.6);
        let p = Potential::from_real(6, &[0.0, v2, 0.0, v4, 0.0]).unwrap();
        let b = beta_minus_one(&p);
        assert!((b.re - (v4 / 2.0 - v2 * v2 / 8.0)).abs() < 1e-14);
    }

    #[test]
    fn beta_vanishes_odd_degree_and_homogeneous() {
        let p = Potential::from_real(5, &[0.3, 1.0, -0.4, 0.8]).unwrap();
        assert_eq!(beta_minus_one(&p), c(0.0, 0.0));
        for n in [3usize, 4, 5, 6, 8] {
            assert_eq!(beta_minus_one(&Potential::homogeneous(n)), c(0.0, 0.0));
        }
        // even polynomials with N ≡ 0 mod 4 have β₋₁ = 0
        let p8 = Potential::from_real(8, &[0.0, 1.2, 0.0, -0.7, 0.0, 0.25, 0.0]).unwrap();
        assert!(beta_minus_one(&p8).norm() < 1e-14);
        let p4 = Potential::even_quartic(3.4);
        assert!(beta_minus_one(&p4).norm() < 1e-15);
    }

    #[test]
    fn beta_lambda_independent_for_n_ge_3() {
        let p = Potential::from_real(4, &[0.9, 0.1, -0.2]).unwrap();
        let b0 = laurent_head(&p, c(0.0, 0.0)).beta_minus_one();
        for lam in [c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0), c(10.0, -10.0), c(0.3, 0.0)] {
            let b = laurent_head(&p, lam).beta_minus_one();
            assert!((b - b0).norm() < 1e-14);
        }
    }

    #[test]
    fn laurent_head_shape() {
        let p = Potential::from_real(4, &[0.5, 1.0, -0.3]).unwrap();
        let head = laurent_head(&p, c(0.7, 0.0));
        let entries = head.entries();
        assert_eq!(entries[0].0, Exponent::new(2, 1));
        assert_eq!(entries[0].1, c(1.0, 0.0)); // β_{N/2} = 1
        assert_eq!(entries.last().unwrap().0, Exponent::new(-1, 1));
        // harmonic case: β₋₁ = λ/2
        let h = Potential::homogeneous(2);
        let lam = c(0.4, -1.1);
        let hh = laurent_head(&h, lam);
        assert!((hh.beta_minus_one() - lam / 2.0).norm() < 1e-15);
    }

    #[test]
    fn residue_examples() {
        assert_eq!(residue_r(&Potential::homogeneous(4)).unwrap(), c(0.0, 0.0));
        // q^4 + q: R = (1/2)/4
        let p = Potential::from_real(4, &[0.0, 0.0, 1.0]).unwrap();
        assert!((residue_r(&p).unwrap().re - 0.125).abs() < 1e-15);
        assert!(residue_r(&Potential::homogeneous(2)).is_err());
    }

    #[test]
    fn beta_antisymmetry_under_rotation() {
        let p = Potential::from_real(4, &[0.4, -0.9, 1.1]).unwrap();
        let b = beta_minus_one(&p);
        for ell in -3i64..=5 {
            let br = beta_minus_one(&rotate(&p, ell));
            let want = if ell.rem_euclid(2) == 0 { b } else { -b };
            assert!((br - want).norm() < 1e-13);
        }
    }

    #[test]
    fn group_order_cases() {
        assert_eq!(Potential::even_quartic(1.0).group_order(), 3);
        assert_eq!(Potential::from_real(4, &[0.1, 0.0, 0.0]).unwrap().group_order(), 6);
        assert_eq!(
            Potential::from_real(6, &[0.0, 1.0, 0.0, 2.0, 0.0]).unwrap().group_order(),
            4
        );
        assert_eq!(Potential::homogeneous(3).group_order(), 5);
        // rotated even potential keeps the reduced order
        assert_eq!(rotate(&Potential::even_quartic(2.0), 1).group_order(), 3);
    }

    #[test]
    fn parse_mini_language() {
        let p = parse_potential("q4+2*q2-0.5*q1").unwrap();
        assert_eq!(p.degree(), 4);
        assert_eq!(p.coeffs()[0], c(0.0, 0.0));
        assert_eq!(p.coeffs()[1], c(2.0, 0.0));
        assert_eq!(p.coeffs()[2], c(-0.5, 0.0));
        assert!(parse_potential("2*q4+q2").is_err()); // non-monic
        assert!(parse_potential("q4+1").is_err()); // constant
        assert!(parse_potential("q4 - 4*q2").is_ok());
        assert_eq!(parse_potential("q2").unwrap().degree(), 2);
    }

    #[test]
    fn serde_roundtrip() {
        let p = Potential::new(4, vec![c(0.1, -0.2), c(1.5, 0.0), c(0.0, 2.0)]).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"degree\":4"));
        let q: Potential = serde_json::from_str(&js).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn eval_consistency() {
        let p = parse_potential("q4+2*q2-0.5*q1").unwrap();
        let x = 1.37;
        let direct = xt(x) + 2.0 * x * x - 0.5 * x;
        fn xt(x: f64) -> f64 {
            x * x * x * x
        }
        assert!((p.eval_real(x).re - direct).abs() < 1e-12);
        let d = p.eval_deriv(c(x, 0.0)).re;
        let want = 4.0 * x * x * x + 4.0 * x - 0.5;
        assert!((d - want).abs() < 1e-12);
    }
}
