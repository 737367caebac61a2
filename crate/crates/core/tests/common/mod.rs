//! Shared helpers for the integration suites.

use chainquant::potential::Potential;
use chainquant::quantizer::{
    run_scheme, ChainSystem, ConvergenceReport, IterationConfig, RunStatus, Scheme,
};
use chainquant::Sector;

/// Converge one sector system from semiclassical seeds.
pub fn converge(
    potential: &Potential,
    sector: Sector,
    scheme: Scheme,
    k_max: usize,
    k_eval: usize,
) -> (ChainSystem, ConvergenceReport) {
    let k_max = match sector {
        Sector::Neumann => k_max,
        Sector::Dirichlet => k_max + 1,
    };
    let system = ChainSystem::semiclassical(potential, sector, k_max, k_eval)
        .expect("system construction");
    let cfg = IterationConfig {
        scheme,
        k_max,
        k_eval,
        max_cycles: 250,
        ..Default::default()
    };
    let (system, report) = run_scheme(system, &cfg).expect("iteration");
    assert_eq!(report.status, RunStatus::Converged, "did not converge");
    (system, report)
}

/// Deterministic pseudo-random stream for frozen test data.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}
