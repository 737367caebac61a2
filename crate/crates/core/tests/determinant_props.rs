//! Determinant-engine invariants that need converged chains: translation
//! commutation, sector factorization, the large-λ asymptotic form, and the
//! Fredholm cross-check.

mod common;

use chainquant::determinant::{fredholm_crosscheck, log_det, log_det_checked, Chain};
use chainquant::potential::Potential;
use chainquant::quantizer::Scheme;
use chainquant::semiclassics::heat_coeffs;
use chainquant::special::gamma;
use chainquant::{exp_f64, Complex64, Sector};
use common::{converge, Lcg};
use std::sync::OnceLock;

fn q4_neumann() -> &'static chainquant::quantizer::ChainSystem {
    static SYS: OnceLock<chainquant::quantizer::ChainSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        converge(&Potential::homogeneous(4), Sector::Neumann, Scheme::A, 48, 512).0
    })
}

fn q4_dirichlet() -> &'static chainquant::quantizer::ChainSystem {
    static SYS: OnceLock<chainquant::quantizer::ChainSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        converge(&Potential::homogeneous(4), Sector::Dirichlet, Scheme::A, 48, 512).0
    })
}

#[test]
fn translation_commutes_with_the_regularization() {
    // exp(log D) over the globally translated chain {E_k + t}, evaluated at
    // λ - t, equals the untranslated value
    let chain = q4_neumann().chain(0);
    let mut rng = Lcg(0x7145);
    for _ in 0..5 {
        let t = rng.next_f64(); // |t| <= 1
        let lam = Complex64::new(1.3 * rng.next_f64(), 1.3 * rng.next_f64());
        let translated = chain.translated(t);
        let a = log_det(&translated, lam - t).unwrap().log().exp();
        let b = log_det(chain, lam).unwrap().log().exp();
        assert!(
            (a - b).norm() < 1e-8 * b.norm(),
            "t={t}: {} vs {}",
            a,
            b
        );
    }
}

#[test]
fn determinant_factorizes_over_sectors() {
    // D(λ) = D⁺(λ) D⁻(λ) through the merged full-parity chain
    let n = q4_neumann().chain(0);
    let d = q4_dirichlet().chain(0);
    let merged = Chain::merged(n, d);
    for lam in [
        Complex64::new(0.8, 0.2),
        Complex64::new(-0.4, 1.1),
        Complex64::new(2.5, -0.6),
    ] {
        let full = log_det(&merged, lam).unwrap().log();
        let split = log_det(n, lam).unwrap().log() + log_det(d, lam).unwrap().log();
        assert!(
            (full - split).norm() < 1e-8 * split.norm().max(1.0),
            "λ={lam}: {} vs {}",
            full,
            split
        );
    }
}

#[test]
fn large_lambda_asymptotics_match_heat_coefficients() {
    // log D(λ) ~ Σ c̃_{-ν} [-Γ(-ν) λ^ν] along the real axis (the log λ
    // convention only enters through c̃₀, which vanishes for even quartics)
    let p = Potential::even_quartic(1.0);
    let (nsys, _) = converge(&p, Sector::Neumann, Scheme::A, 48, 512);
    let (dsys, _) = converge(&p, Sector::Dirichlet, Scheme::A, 48, 512);
    let merged = Chain::merged(nsys.chain(0), dsys.chain(0));
    let heat = heat_coeffs(&p, 6).unwrap();
    let lam: f64 = 1000.0;
    let mut asym = 0.0;
    for (texp, c) in &heat.entries {
        let nu = -exp_f64(*texp);
        if nu.abs() < 1e-14 {
            continue; // c̃₀ = 0 here
        }
        asym += c.re * (-gamma(-nu)) * lam.powf(nu);
    }
    let got = log_det(&merged, Complex64::new(lam, 0.0)).unwrap().log().re;
    assert!(
        (got - asym).abs() < 1e-3,
        "log D({lam}) = {got}, asymptotic {asym}, diff {:.2e}",
        (got - asym).abs()
    );
}

#[test]
fn fredholm_product_converges_monotonically_for_quartic() {
    let chain = q4_neumann().chain(0);
    let lam = Complex64::new(2.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut first = 0.0;
    for (i, terms) in [200usize, 400, 800, 1600].into_iter().enumerate() {
        let dev = fredholm_crosscheck(chain, lam, terms).unwrap();
        assert!(dev < prev, "deviation must shrink: {dev} after {prev}");
        if i == 0 {
            first = dev;
        }
        prev = dev;
    }
    // order-μ product: the tail decays like T^{-1/3}, so expect a factor
    // ~2^{... } improvement over three doublings, not machine precision
    assert!(prev < 0.55 * first, "first {first}, last {prev}");
    // λ = 0 is exact on both sides
    assert_eq!(
        fredholm_crosscheck(chain, Complex64::new(0.0, 0.0), 50).unwrap(),
        0.0
    );
}

#[test]
fn k_eval_doubling_stability_on_converged_chain() {
    let chain = q4_neumann().chain(0);
    for lam in [Complex64::new(0.9, 0.4), Complex64::new(-0.5, 2.0)] {
        assert!(log_det_checked(chain, lam, 1e-9).is_ok());
    }
}

#[test]
fn zeta_values_at_zero_on_converged_chains() {
    // regularized level count is exact regardless of the explicit levels
    let zn = chainquant::determinant::zeta_value(q4_neumann().chain(0), 0.0).unwrap();
    assert!((zn.re - 0.25).abs() < 1e-10);
    let zd = chainquant::determinant::zeta_value(q4_dirichlet().chain(0), 0.0).unwrap();
    assert!((zd.re + 0.25).abs() < 1e-10);
}

#[test]
fn wronskian_residual_is_sensitive_to_level_perturbations() {
    // off the true spectrum the bilinear identity fails hard: perturbing a
    // single level lifts the residual well above the tail-bias floor
    use chainquant::quantizer::wronskian_residual;
    let n = q4_neumann();
    let d = q4_dirichlet();
    let lam = Complex64::new(1.1, -0.7);
    let baseline = wronskian_residual(n, d, lam).unwrap().norm();
    let mut perturbed = n.clone();
    let mut levels = perturbed.chains()[0].levels().to_vec();
    levels[0] += 0.05;
    let bumped = perturbed.chains()[0].replace_levels(levels);
    perturbed.replace_chain(0, bumped);
    let shifted = wronskian_residual(&perturbed, d, lam).unwrap().norm();
    assert!(
        shifted > 12.0 * baseline,
        "baseline {baseline:.3e}, perturbed {shifted:.3e}"
    );
}
