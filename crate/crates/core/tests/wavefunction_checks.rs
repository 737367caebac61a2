//! Wave-function reconstruction checks beyond the acceptance grid.

mod common;

use chainquant::determinant::log_det;
use chainquant::oracle::integrate_wave;
use chainquant::potential::Potential;
use chainquant::quantizer::Scheme;
use chainquant::wavefunction::{wave_at, wave_profile, WaveConfig};
use chainquant::{Complex64, Sector};
use common::converge;

const E0: f64 = 1.060_362_090_484_183;

#[test]
fn a_zero_reduces_to_the_parity_system() {
    // at a = 0 the shifted potential is q^4 itself (L=3); ψ(0) must equal
    // the direct Dirichlet determinant at -E0
    let p = Potential::homogeneous(4);
    let config = WaveConfig {
        iteration: chainquant::quantizer::IterationConfig {
            scheme: Scheme::A,
            k_max: 25,
            k_eval: 256,
            ..Default::default()
        },
        ..Default::default()
    };
    let sample = wave_at(&p, E0, 0.0, &config).unwrap();
    let (dsys, _) = converge(&p, Sector::Dirichlet, Scheme::A, 24, 256);
    let direct = log_det(dsys.chain(0), Complex64::new(-E0, 0.0))
        .unwrap()
        .value();
    assert!(
        (sample.psi - direct).norm() < 1e-8 * direct.norm(),
        "{} vs {}",
        sample.psi,
        direct
    );
}

#[test]
fn profile_is_positive_and_decreasing_for_the_ground_state() {
    let p = Potential::homogeneous(4);
    let grid = [0.0, 0.5, 1.0, 1.5];
    let samples = wave_profile(&p, E0, &grid, &WaveConfig::default()).unwrap();
    for w in samples.windows(2) {
        assert!(w[0].converged && w[1].converged);
        assert!(w[1].psi.re < w[0].psi.re && w[1].psi.re > 0.0);
    }
}

#[test]
fn psi_prime_and_the_local_ode_residual() {
    // ψ'' ≈ (V - E) ψ via centered differences of the reconstructed ψ; the
    // truncation is O(δ²) but the reconstruction noise is amplified by
    // 1/δ², so the tolerance is a relative few percent. The ψ' (Neumann)
    // systems of shifted potentials develop the conjugate-pair instability
    // beyond a ≈ 0.7, so this runs in the healthy range.
    let p = Potential::homogeneous(4);
    let delta = 1e-2;
    let a0 = 0.4;
    let grid = [a0 - delta, a0, a0 + delta];
    let mut config = WaveConfig::default();
    config.psi_prime = true;
    let samples = wave_profile(&p, E0, &grid, &config).unwrap();
    assert!(samples.iter().all(|s| s.converged));
    let psi_dd = (samples[2].psi - 2.0 * samples[1].psi + samples[0].psi) / (delta * delta);
    let want = (p.eval_real(a0).re - E0) * samples[1].psi.re;
    assert!(
        (psi_dd.re - want).abs() < 0.05 * want.abs().max(1.0),
        "ψ'' = {} vs (V-E)ψ = {want}",
        psi_dd.re
    );
    // ψ' from the Neumann determinants agrees with the finite difference
    let fd_prime = (samples[2].psi - samples[0].psi) / (2.0 * delta);
    let rec_prime = samples[1].psi_prime.unwrap();
    assert!(
        (fd_prime - rec_prime).norm() < 2e-3 * rec_prime.norm().max(1.0),
        "ψ' fd {} vs reconstructed {}",
        fd_prime,
        rec_prime
    );
}

#[test]
fn warm_and_cold_profiles_agree() {
    let p = Potential::homogeneous(4);
    let grid = [0.5, 1.0];
    let warm = wave_profile(&p, E0, &grid, &WaveConfig::default()).unwrap();
    let cold = wave_profile(
        &p,
        E0,
        &grid,
        &WaveConfig {
            warm_start: false,
            ..Default::default()
        },
    )
    .unwrap();
    for (w, c) in warm.iter().zip(&cold) {
        assert!(w.converged && c.converged);
        assert!((w.psi - c.psi).norm() < 1e-8 * c.psi.norm());
    }
}

#[test]
fn oracle_identity_check_at_random_spectral_points() {
    // the absolutely normalized recessive solution at the endpoint equals
    // the Dirichlet determinant: ψ_λ(0) = D⁻(λ)
    let p = Potential::homogeneous(4);
    let (dsys, _) = converge(&p, Sector::Dirichlet, Scheme::A, 256, 1024);
    for energy in [0.4, 1.9, -0.8] {
        let lam = Complex64::new(-energy, 0.0);
        let det = log_det(dsys.chain(0), lam).unwrap().value();
        let psi = integrate_wave(&p, energy, &[0.0]).unwrap().values[0];
        assert!(
            (det - psi).norm() < 1e-4 * psi.norm().max(1e-3),
            "E={energy}: D⁻ {} vs ψ(0) {}",
            det,
            psi
        );
    }
}
