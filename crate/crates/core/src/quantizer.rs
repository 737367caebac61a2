//! Fixed-point solution of the exact quantization conditions over all L
//! chains of one sector.
//!
//! Each level E_k of chain ℓ is constrained through the log-determinants of
//! its two neighbor chains:
//!
//! `Σ^{[ℓ]}(E_k) = π[k + 1/2 ± (N-2)/(2(N+2))] + (-1)^ℓ φ β₋₁`
//!
//! Newton-solving each condition in turn, with immediate updating of each
//! chain, generates discrete chain dynamics that contract geometrically
//! toward the spectrum in the tested regimes. Scheme A alternates the real
//! and complex chains of an even potential (L = 3); scheme B additionally
//! decouples complex-conjugate level pairs by slaving the mirror of the
//! unknown during its Newton solve (the a-priori symmetry constraint, which
//! leaves the fixed point intact); scheme C is the ℓ-order {0,2,3,1} used
//! for L = 6, with 1–5 and 2–4 conjugation enforced.

use crate::determinant::{
    sigma_phase, wronskian_residual_chains, Chain, DeterminantError, EvalOptions,
};
use crate::potential::{beta_minus_one, rotate, Potential, PotentialError};
use crate::semiclassics::{bs_coeffs, SemiclassicsError};
use crate::{Complex64, Sector};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantizerError {
    #[error("quantization requires polynomial degree N >= 3 (N=2 is singular), got {0}")]
    DegreeUnsupported(usize),
    #[error("scheme {scheme} requires symmetry order L = {expected}, system has L = {got}")]
    SchemeMismatch {
        scheme: String,
        expected: usize,
        got: usize,
    },
    #[error("Newton solve went unstable at cycle {cycle}, chain ℓ={ell}, k={k} (last iterate {last}, |residual| {residual:.3e})")]
    Newton {
        cycle: usize,
        ell: usize,
        k: usize,
        last: Complex64,
        residual: f64,
    },
    #[error("contraction estimate needs at least 4 displacement samples, got {0}")]
    InsufficientHistory(usize),
    #[error(transparent)]
    Determinant(#[from] DeterminantError),
    #[error(transparent)]
    Semiclassics(#[from] SemiclassicsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// Iteration scheme: which chains are recomputed, in which order, and how
/// conjugate pairs are treated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme {
    /// L=3: real chain then complex chain, conjugate mirror refreshed,
    /// pair interactions kept.
    A,
    /// L=3: as A with conjugate-pair interactions removed by slaving the
    /// mirror level to the live unknown.
    B,
    /// L=6: order {0,2,3,1}, cyclically continued, 1–5 / 2–4 symmetry
    /// enforced.
    C,
    /// Any L: explicit chain order; mirrors of solved chains refreshed by
    /// conjugation when the system is symmetric.
    Custom(Vec<usize>),
}

impl Scheme {
    pub fn order(&self, _l: usize) -> Vec<usize> {
        match self {
            Scheme::A | Scheme::B => vec![0, 1],
            Scheme::C => vec![0, 2, 3, 1],
            Scheme::Custom(v) => v.clone(),
        }
    }

    fn validate(&self, l: usize) -> Result<(), QuantizerError> {
        let need = match self {
            Scheme::A | Scheme::B => Some(3),
            Scheme::C => Some(6),
            Scheme::Custom(_) => None,
        };
        if let Some(expected) = need {
            if l != expected {
                return Err(QuantizerError::SchemeMismatch {
                    scheme: format!("{self:?}"),
                    expected,
                    got: l,
                });
            }
        }
        Ok(())
    }

    /// Default scheme for a symmetry order.
    pub fn default_for(l: usize) -> Scheme {
        match l {
            3 => Scheme::A,
            6 => Scheme::C,
            _ => Scheme::Custom((0..=l / 2).collect()),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scheme::A),
            "B" => Ok(Scheme::B),
            "C" => Ok(Scheme::C),
            other => {
                let order: Result<Vec<usize>, _> =
                    other.split(',').map(|t| t.trim().parse()).collect();
                order.map(Scheme::Custom).map_err(|_| {
                    format!(
                        "unknown scheme `{other}` (expected A, B, C or a comma-separated chain order)"
                    )
                })
            }
        }
    }
}

/// Chain-update application mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Updating {
    /// Each chain's new levels take effect before the next chain is solved
    /// (the default; what schemes A/B/C prescribe).
    Immediate,
    /// All chains are recomputed from the same snapshot and applied at the
    /// end of the cycle; no conjugation enforcement, so symmetry-breaking
    /// fluctuation modes stay visible.
    Synchronous,
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub scheme: Scheme,
    pub updating: Updating,
    /// relative tolerance on |ΔE|/|E| for Newton steps and cycle stopping
    pub newton_tol: f64,
    pub max_cycles: usize,
    pub k_max: usize,
    pub k_eval: usize,
    pub newton_max_iter: usize,
    /// consecutive cycles a level may fail its Newton solve (keeping its
    /// previous value) before the run aborts with the failure trace
    pub newton_patience: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            scheme: Scheme::A,
            updating: Updating::Immediate,
            newton_tol: 1e-10,
            max_cycles: 200,
            k_max: 48,
            k_eval: 512,
            newton_max_iter: 60,
            newton_patience: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitQuality {
    Clean,
    Noisy,
}

#[derive(Debug, Clone, Copy)]
pub struct ContractionEstimate {
    pub ratio: f64,
    pub quality: FitQuality,
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Per-run convergence diagnostics.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub displacements: Vec<f64>,
    pub status: RunStatus,
    pub cycles: usize,
    pub contraction: Option<ContractionEstimate>,
    pub reseeded_levels: usize,
    /// per-cycle count of levels solved on a 2π-shifted branch sheet (the
    /// logged winding corrections of the continuity prescription)
    pub sheet_corrections: usize,
}

/// Least-squares contraction ratio from a displacement history: the fitted
/// slope of log-displacement against cycle index over the tail window.
pub fn estimate_contraction(history: &[f64]) -> Result<ContractionEstimate, QuantizerError> {
    let finite: Vec<(f64, f64)> = history
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 1e-300)
        .map(|(i, &d)| (i as f64, d.ln()))
        .collect();
    if finite.len() < 4 {
        return Err(QuantizerError::InsufficientHistory(finite.len()));
    }
    let skip = finite.len() / 4;
    let pts = &finite[skip..];
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ContractionEstimate {
        ratio: slope.exp(),
        quality: if r_squared >= 0.95 {
            FitQuality::Clean
        } else {
            FitQuality::Noisy
        },
        r_squared,
        samples_used: pts.len(),
    })
}

// ---------------------------------------------------------------------------

/// All L chains of one sector, the conjugation pairing of real potentials,
/// and the cached residue invariant.
#[derive(Debug, Clone)]
pub struct ChainSystem {
    potential: Potential,
    sector: Sector,
    chains: Vec<Chain>,
    k_max: usize,
    k_eval: usize,
    beta: Complex64,
    symmetric: bool,
    pub cycle: usize,
}

impl ChainSystem {
    /// System initialized from the semiclassical chains of every rotation.
    pub fn semiclassical(
        potential: &Potential,
        sector: Sector,
        k_max: usize,
        k_eval: usize,
    ) -> Result<Self, QuantizerError> {
        if potential.degree() < 3 {
            return Err(QuantizerError::DegreeUnsupported(potential.degree()));
        }
        let l = potential.group_order();
        let mut chains = Vec::with_capacity(l);
        for ell in 0..l {
            let rotated = rotate(potential, ell as i64);
            let tail = bs_coeffs(&rotated)?;
            chains.push(Chain::semiclassical(ell as i64, sector, tail, k_max, k_eval)?);
        }
        let k_max = chains[0].k_max(); // normalized to the sector parity
        Ok(ChainSystem {
            beta: beta_minus_one(potential),
            symmetric: potential.has_real_coeffs(),
            potential: potential.clone(),
            sector,
            chains,
            k_max,
            k_eval,
            cycle: 0,
        })
    }

    /// System rebuilt from explicit levels (snapshot warm start). One level
    /// list per chain ℓ = 0..L-1, in sector indexing.
    pub fn from_levels(
        potential: &Potential,
        sector: Sector,
        levels: Vec<Vec<Complex64>>,
        k_eval: usize,
    ) -> Result<Self, QuantizerError> {
        if potential.degree() < 3 {
            return Err(QuantizerError::DegreeUnsupported(potential.degree()));
        }
        let l = potential.group_order();
        assert_eq!(levels.len(), l, "need one level list per chain");
        let start = sector.start_k();
        let mut chains = Vec::with_capacity(l);
        for (ell, lv) in levels.into_iter().enumerate() {
            let k_max = start + 2 * (lv.len() - 1);
            let rotated = rotate(potential, ell as i64);
            let tail = bs_coeffs(&rotated)?;
            chains.push(Chain::with_levels(ell as i64, sector, tail, lv, k_max, k_eval)?);
        }
        let k_max = chains[0].k_max();
        Ok(ChainSystem {
            beta: beta_minus_one(potential),
            symmetric: potential.has_real_coeffs(),
            potential: potential.clone(),
            sector,
            chains,
            k_max,
            k_eval,
            cycle: 0,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }
    pub fn sector(&self) -> Sector {
        self.sector
    }
    pub fn group_order(&self) -> usize {
        self.chains.len()
    }
    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }
    pub fn chain(&self, ell: usize) -> &Chain {
        &self.chains[ell % self.chains.len()]
    }
    pub fn k_max(&self) -> usize {
        self.k_max
    }
    pub fn k_eval(&self) -> usize {
        self.k_eval
    }
    pub fn beta_minus_one(&self) -> Complex64 {
        self.beta
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Display positions e^{iℓφ} E_k of one chain.
    pub fn display_positions(&self, ell: usize) -> Vec<Complex64> {
        let phi = self.potential.symmetry_angle();
        let rot = Complex64::from_polar(1.0, phi * ell as f64);
        self.chain(ell).levels().iter().map(|e| rot * e).collect()
    }

    /// Right-hand side of the quantization condition for (ℓ, k).
    pub fn rhs(&self, ell: usize, k: usize) -> Complex64 {
        let n = self.potential.degree() as f64;
        let phi = self.potential.symmetry_angle();
        let sign = self.sector.offset_sign();
        let parity = if ell % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(
            PI * (k as f64 + 0.5 + sign * (n - 2.0) / (2.0 * (n + 2.0))),
            0.0,
        ) + self.beta * (phi * parity)
    }

    /// Quantization phase Σ^{[ℓ]}(E) over the current chain snapshot.
    pub fn sigma(&self, ell: usize, e: Complex64) -> Result<Complex64, DeterminantError> {
        let l = self.chains.len();
        let plus = &self.chains[(ell + 1) % l];
        let minus = &self.chains[(ell + l - 1) % l];
        sigma_phase(
            plus,
            minus,
            self.potential.symmetry_angle(),
            e,
            EvalOptions::default(),
            EvalOptions::default(),
        )
    }

    /// Residual Σ(E_k) − rhs at the stored level (fixed-point diagnostics).
    pub fn residual(&self, ell: usize, idx: usize) -> Result<Complex64, DeterminantError> {
        let k = self.sector.start_k() + 2 * idx;
        let e = self.chain(ell).levels()[idx];
        Ok(self.sigma(ell, e)? - self.rhs(ell, k))
    }
}

/// Residual of the Wronskian identity over converged Neumann + Dirichlet
/// systems of the same potential.
pub fn wronskian_residual(
    neumann: &ChainSystem,
    dirichlet: &ChainSystem,
    lambda: Complex64,
) -> Result<Complex64, DeterminantError> {
    let l = neumann.group_order();
    wronskian_residual_chains(
        neumann.chain(0),
        neumann.chain(1 % l),
        dirichlet.chain(0),
        dirichlet.chain(1 % l),
        neumann.potential().symmetry_angle(),
        neumann.beta_minus_one(),
        lambda,
    )
}

// ---------------------------------------------------------------------------
// per-level Newton solve
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum LevelMode {
    /// self-conjugate chain of a real potential: stay on the real axis
    Real,
    /// holomorphic complex Newton
    Complex,
    /// scheme B: the mirror level in the plus-neighbor determinant is the
    /// conjugate of the live unknown (non-holomorphic, 2x2 Jacobian)
    SlavedMirror { idx: usize },
}

struct LevelProblem<'a> {
    plus: &'a Chain,
    minus: &'a Chain,
    phi: f64,
    rhs: Complex64,
    mode: LevelMode,
}

impl<'a> LevelProblem<'a> {
    fn residual(&self, e: Complex64) -> Result<Complex64, DeterminantError> {
        let (plus_opts, minus_opts) = match self.mode {
            LevelMode::SlavedMirror { idx } => (
                EvalOptions {
                    override_level: Some((idx, e.conj())),
                    ..Default::default()
                },
                EvalOptions::default(),
            ),
            _ => (EvalOptions::default(), EvalOptions::default()),
        };
        Ok(sigma_phase(self.plus, self.minus, self.phi, e, plus_opts, minus_opts)? - self.rhs)
    }
    fn solve(
        &self,
        seed: Complex64,
        tol: f64,
        max_iter: usize,
    ) -> Result<Complex64, (Complex64, f64)> {
        self.solve_on_sheet(seed, tol, max_iter, 0.0, None).map(|(e, _)| e)
    }

    /// Newton on the branch sheet `Σ = rhs + sheet_shift`, optionally with a
    /// hard cap on step length (used after a landscape rescue so the solve
    /// cannot wander back across the branch cut it just resolved).
    fn solve_on_sheet(
        &self,
        seed: Complex64,
        tol: f64,
        max_iter: usize,
        sheet_shift: f64,
        trust_cap: Option<f64>,
    ) -> Result<(Complex64, f64), (Complex64, f64)> {
        let fail = |e: Complex64, r: f64| (e, r);
        let mut e = seed;
        let mut g = match self.residual(e) {
            Ok(v) => v - sheet_shift,
            Err(_) => return Err(fail(e, f64::NAN)),
        };
        for _ in 0..max_iter {
            let h = 1e-6 * e.norm().max(1.0);
            // derivatives are shift-free (differences cancel the sheet)
            let step = match self.mode {
                LevelMode::Real | LevelMode::Complex => {
                    let gp = (self.residual(e + h).map_err(|_| fail(e, g.norm()))?
                        - self.residual(e - h).map_err(|_| fail(e, g.norm()))?)
                        / (2.0 * h);
                    if matches!(self.mode, LevelMode::Real) {
                        Complex64::new(-(g.re / gp.re), 0.0)
                    } else {
                        -g / gp
                    }
                }
                LevelMode::SlavedMirror { .. } => {
                    let ih = Complex64::new(0.0, h);
                    let gx = (self.residual(e + h).map_err(|_| fail(e, g.norm()))?
                        - self.residual(e - h).map_err(|_| fail(e, g.norm()))?)
                        / (2.0 * h);
                    let gy = (self.residual(e + ih).map_err(|_| fail(e, g.norm()))?
                        - self.residual(e - ih).map_err(|_| fail(e, g.norm()))?)
                        / (2.0 * h);
                    let det = gx.re * gy.im - gy.re * gx.im;
                    if det == 0.0 {
                        return Err(fail(e, g.norm()));
                    }
                    let dx = (-g.re * gy.im + g.im * gy.re) / det;
                    let dy = (-gx.re * g.im + gx.im * g.re) / det;
                    Complex64::new(dx, dy)
                }
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(fail(e, g.norm()));
            }
            let mut de = step;
            let cap = trust_cap.unwrap_or(0.5 * e.norm().max(1.0));
            if de.norm() > cap {
                de *= cap / de.norm();
            }
            // halve the step while the residual grows
            let mut applied = de;
            let mut accepted = false;
            for _ in 0..6 {
                match self.residual(e + applied) {
                    Ok(gn) if (gn - sheet_shift).norm() < g.norm() => {
                        e += applied;
                        g = gn - sheet_shift;
                        accepted = true;
                        break;
                    }
                    _ => applied /= 2.0,
                }
            }
            if !accepted {
                e += applied * 2.0;
                g = match self.residual(e) {
                    Ok(v) => v - sheet_shift,
                    Err(_) => return Err(fail(e, f64::NAN)),
                };
            }
            if de.norm() < tol * e.norm().max(1.0) {
                return Ok((e, sheet_shift));
            }
        }
        Err(fail(e, g.norm()))
    }

    /// Newton with branch-sheet awareness and a landscape rescue.
    ///
    /// A level that has migrated across a branch-cut shadow of the fixed
    /// evaluation path satisfies `Σ = rhs + 2πm` for an integer m (the
    /// continuity-corrected branch); such seeds are detected by their clean
    /// near-multiple residual and re-solved on their sheet. When the plain
    /// solve stalls (root far from the seed, often behind a 2π cliff), a
    /// two-stage grid scan locates the nearest sheet root and the solve
    /// restarts there with a step cap so it cannot recross the cut.
    /// Returns the root and the sheet offset in units of 2π.
    fn solve_with_rescue(
        &self,
        seed: Complex64,
        spacing: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Complex64, i64), (Complex64, f64)> {
        use std::f64::consts::TAU;
        match self.solve(seed, tol, max_iter) {
            Ok(e) => Ok((e, 0)),
            Err(first) => {
                // two-stage scan for the nearest root; candidates on the
                // adjacent branch sheets (|m| = 1) are tracked separately
                let coarse = spacing / 3.0;
                let mut best0 = (f64::INFINITY, seed); // naive sheet
                let mut best1 = (f64::INFINITY, seed, 0.0f64); // shifted sheet
                fn consider(
                    best0: &mut (f64, Complex64),
                    best1: &mut (f64, Complex64, f64),
                    e: Complex64,
                    g: Complex64,
                ) {
                    let s0 = g.norm();
                    if s0 < best0.0 {
                        *best0 = (s0, e);
                    }
                    for m in [-1.0f64, 1.0] {
                        let s = (g - std::f64::consts::TAU * m).norm();
                        if s < best1.0 {
                            *best1 = (s, e, m);
                        }
                    }
                }
                for i in -6i32..=6 {
                    for j in -6i32..=6 {
                        let e = seed + Complex64::new(i as f64 * coarse, j as f64 * coarse);
                        if let Ok(g) = self.residual(e) {
                            consider(&mut best0, &mut best1, e, g);
                        }
                    }
                }
                let fine = coarse / 4.0;
                for center in [best0.1, best1.1] {
                    for i in -3i32..=3 {
                        for j in -3i32..=3 {
                            let e = center + Complex64::new(i as f64 * fine, j as f64 * fine);
                            if let Ok(g) = self.residual(e) {
                                consider(&mut best0, &mut best1, e, g);
                            }
                        }
                    }
                }
                // prefer the naive sheet whenever it offers a plausible
                // root; cross sheets only for a near-perfect candidate with
                // no naive alternative (the migrated-level signature)
                if best0.0 < 0.5 && best0.1 != seed {
                    if let Ok((e, _)) = self.solve_on_sheet(best0.1, tol, max_iter, 0.0, Some(fine * 2.0)) {
                        return Ok((e, 0));
                    }
                }
                if best1.0 < 0.35 && best0.0 > 0.5 {
                    if let Ok((e, shift)) =
                        self.solve_on_sheet(best1.1, tol, max_iter, TAU * best1.2, Some(fine * 2.0))
                    {
                        // a migrated level stays close to its seed; reject
                        // far captures (those are other levels' roots)
                        if (e - seed).norm() <= 2.5 * spacing {
                            return Ok((e, (shift / TAU).round() as i64));
                        }
                    }
                }
                Err(first)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// chain and cycle updates
// ---------------------------------------------------------------------------

/// As `solve_chain`, but a level whose Newton solve goes unstable keeps its
/// seed value and is reported instead of aborting the whole sweep.
fn solve_chain_soft(
    system: &ChainSystem,
    ell: usize,
    config: &IterationConfig,
) -> (Chain, Vec<(usize, QuantizerError)>, usize) {
    let l = system.chains.len();
    let ell = ell % l;
    let chain = &system.chains[ell];
    let plus = &system.chains[(ell + 1) % l];
    let minus = &system.chains[(ell + l - 1) % l];
    let phi = system.potential.symmetry_angle();
    let slaving = matches!(config.scheme, Scheme::B) && l == 3 && ell == 1;
    let self_conjugate = system.symmetric && (ell == 0 || 2 * ell == l);
    let start = system.sector.start_k();
    let seeds: Vec<(usize, Complex64)> = chain.levels().iter().copied().enumerate().collect();
    let solved: Vec<Result<(Complex64, i64), QuantizerError>> = seeds
        .par_iter()
        .map(|&(idx, seed)| {
            let k = start + 2 * idx;
            let mode = if slaving {
                LevelMode::SlavedMirror { idx }
            } else if self_conjugate {
                LevelMode::Real
            } else {
                LevelMode::Complex
            };
            let problem = LevelProblem {
                plus,
                minus,
                phi,
                rhs: system.rhs(ell, k),
                mode,
            };
            let spacing = (2.0 / chain.tail().eval_deriv(seed).norm()).min(4.0 * seed.norm().max(1.0));
            problem
                .solve_with_rescue(seed, spacing, config.newton_tol, config.newton_max_iter)
                .map_err(|(last, residual)| QuantizerError::Newton {
                    cycle: system.cycle,
                    ell,
                    k,
                    last,
                    residual,
                })
                .map(|(e, sheet)| (e, sheet))
        })
        .collect();
    let outcomes = solved;
    let mut levels = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let mut sheet_corrections = 0usize;
    for (idx, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((e, sheet)) => {
                levels.push(e);
                sheet_corrections += usize::from(sheet != 0);
            }
            Err(err) => {
                failures.push((idx, err));
                levels.push(chain.levels()[idx]);
            }
        }
    }
    if self_conjugate {
        for e in &mut levels {
            *e = Complex64::new(e.re, 0.0);
        }
    }
    (chain.replace_levels(levels), failures, sheet_corrections)
}

/// Solve every level of chain ℓ against the frozen neighbor snapshot of the
/// system, returning the updated chain (current values are Newton seeds).
/// The per-k solves are independent and run in parallel.
pub fn solve_chain(
    system: &ChainSystem,
    ell: usize,
    config: &IterationConfig,
) -> Result<Chain, QuantizerError> {
    let (chain, mut failures, _) = solve_chain_soft(system, ell, config);
    match failures.pop() {
        None => Ok(chain),
        Some((_, err)) => Err(err),
    }
}

/// Detect level collisions (two levels of one chain at the same root) and
/// re-seed the later one from its semiclassical value.
fn reseed_collisions(chain: &mut Chain, scale: f64) -> usize {
    let levels = chain.levels().to_vec();
    let mut fixed = levels.clone();
    let mut reseeded = 0;
    for i in 1..levels.len() {
        for j in 0..i {
            if (levels[i] - levels[j]).norm() < 1e-8 * scale {
                let kappa = chain.indices()[i] as f64 + 0.5;
                if let Ok(e) = chain.tail().solve_root(kappa, chain.tail().leading_seed(kappa)) {
                    fixed[i] = e;
                    reseeded += 1;
                }
            }
        }
    }
    if reseeded > 0 {
        *chain = chain.replace_levels(fixed);
    }
    reseeded
}

struct CycleOutcome {
    sup: f64,
    reseeded: usize,
    /// levels solved on a shifted branch sheet this cycle
    sheet_corrections: usize,
    /// (ell, level index, error) for levels that kept their seed
    failed: Vec<(usize, usize, QuantizerError)>,
}

/// One full cycle of the scheme.
fn run_cycle(system: &mut ChainSystem, config: &IterationConfig) -> CycleOutcome {
    let l = system.chains.len();
    let scale = system.chains[0].levels()[0].norm().max(1e-12);
    let mut out = CycleOutcome {
        sup: 0.0,
        reseeded: 0,
        sheet_corrections: 0,
        failed: Vec::new(),
    };
    match config.updating {
        Updating::Immediate => {
            for ell in config.scheme.order(l) {
                let ell = ell % l;
                let (mut updated, failures, sheets) = solve_chain_soft(system, ell, config);
                out.sheet_corrections += sheets;
                out.reseeded += reseed_collisions(&mut updated, scale);
                for (idx, err) in failures {
                    out.failed.push((ell, idx, err));
                }
                for (old, new) in system.chains[ell].levels().iter().zip(updated.levels()) {
                    out.sup = out.sup.max((old - new).norm());
                }
                system.chains[ell] = updated;
                let mirror = (l - ell) % l;
                if system.symmetric && mirror != ell {
                    system.chains[mirror] = system.chains[ell].conjugated(mirror as i64);
                }
            }
        }
        Updating::Synchronous => {
            let snapshot = system.clone();
            let mut staged = Vec::with_capacity(l);
            for ell in 0..l {
                let (mut updated, failures, sheets) = solve_chain_soft(&snapshot, ell, config);
                out.sheet_corrections += sheets;
                out.reseeded += reseed_collisions(&mut updated, scale);
                for (idx, err) in failures {
                    out.failed.push((ell, idx, err));
                }
                staged.push(updated);
            }
            for (ell, updated) in staged.into_iter().enumerate() {
                for (old, new) in system.chains[ell].levels().iter().zip(updated.levels()) {
                    out.sup = out.sup.max((old - new).norm());
                }
                system.chains[ell] = updated;
            }
        }
    }
    system.cycle += 1;
    out
}

/// Iterate the scheme until the sup-displacement drops below
/// newton_tol·|E₀| or max_cycles is exhausted.
pub fn run_scheme(
    mut system: ChainSystem,
    config: &IterationConfig,
) -> Result<(ChainSystem, ConvergenceReport), QuantizerError> {
    config.scheme.validate(system.chains.len())?;
    let mut displacements = Vec::new();
    let mut reseeded = 0usize;
    let mut sheet_corrections = 0usize;
    let mut status = RunStatus::NotConverged;
    // consecutive Newton-failure counters per (chain, level)
    let mut strikes: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    for _ in 0..config.max_cycles {
        let scale = system.chains[0].levels()[0].norm().max(1e-12);
        let outcome = run_cycle(&mut system, config);
        let mut failed_now: Vec<(usize, usize)> = Vec::new();
        for (ell, idx, err) in outcome.failed {
            failed_now.push((ell, idx));
            let count = strikes.entry((ell, idx)).or_insert(0);
            *count += 1;
            if *count > config.newton_patience {
                return Err(err);
            }
        }
        strikes.retain(|key, _| failed_now.contains(key));
        displacements.push(outcome.sup);
        reseeded += outcome.reseeded;
        sheet_corrections += outcome.sheet_corrections;
        if outcome.sup < config.newton_tol * scale && failed_now.is_empty() {
            status = RunStatus::Converged;
            break;
        }
    }
    let contraction = estimate_contraction(&displacements).ok();
    let report = ConvergenceReport {
        cycles: displacements.len(),
        displacements,
        status,
        contraction,
        reseeded_levels: reseeded,
        sheet_corrections,
    };
    Ok((system, report))
}

// ---------------------------------------------------------------------------
// linearized dynamics at the fixed point
// ---------------------------------------------------------------------------

/// Spectral radius of a dense real matrix (largest eigenvalue modulus).
pub fn spectral_radius(matrix: &DMatrix<f64>) -> f64 {
    matrix
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
}

#[derive(Debug, Clone)]
pub struct LinearStability {
    pub radius: f64,
    pub dimension: usize,
}

/// Independent state coordinates of the one-cycle map: under immediate
/// updating with enforced symmetry these are the chains of the scheme order
/// (self-conjugate chains contribute real parts only); under synchronous
/// updating every chain contributes both components.
fn state_layout(system: &ChainSystem, config: &IterationConfig) -> Vec<(usize, bool)> {
    let l = system.chains.len();
    match config.updating {
        Updating::Synchronous => (0..l).map(|ell| (ell, true)).collect(),
        Updating::Immediate => {
            let mut seen: Vec<(usize, bool)> = Vec::new();
            for ell in config.scheme.order(l) {
                let ell = ell % l;
                if !seen.iter().any(|&(e, _)| e == ell) {
                    let self_conj = system.symmetric && (ell == 0 || 2 * ell == l);
                    seen.push((ell, !self_conj));
                }
            }
            seen
        }
    }
}

fn pack_state(system: &ChainSystem, layout: &[(usize, bool)]) -> Vec<f64> {
    let mut x = Vec::new();
    for &(ell, both) in layout {
        for e in system.chains[ell].levels() {
            x.push(e.re);
            if both {
                x.push(e.im);
            }
        }
    }
    x
}

fn unpack_state(system: &mut ChainSystem, layout: &[(usize, bool)], x: &[f64]) {
    let mut i = 0;
    let l = system.chains.len();
    for &(ell, both) in layout {
        let mut levels = system.chains[ell].levels().to_vec();
        for e in &mut levels {
            let re = x[i];
            i += 1;
            let im = if both {
                let v = x[i];
                i += 1;
                v
            } else {
                e.im
            };
            *e = Complex64::new(re, im);
        }
        system.chains[ell] = system.chains[ell].replace_levels(levels);
        // enforced constraint: mirrors of independent chains follow by
        // conjugation (never under the synchronous full layout)
        let mirror = (l - ell) % l;
        if system.symmetric && mirror != ell && !layout.iter().any(|&(e, _)| e == mirror) {
            system.chains[mirror] = system.chains[ell].conjugated(mirror as i64);
        }
    }
}

/// Spectral radius of the one-cycle update map's Jacobian at a converged
/// system, by forward differences in every independent level coordinate.
pub fn linearized_radius(
    system: &ChainSystem,
    config: &IterationConfig,
) -> Result<LinearStability, QuantizerError> {
    config.scheme.validate(system.chains.len())?;
    let layout = state_layout(system, config);
    let x0 = pack_state(system, &layout);
    let dim = x0.len();
    let scale = system.chains[0].levels()[0].norm().max(1e-12);
    let h = 1e-6 * scale;
    let mut base_sys = system.clone();
    let base_outcome = run_cycle(&mut base_sys, config);
    if let Some((_, _, err)) = base_outcome.failed.into_iter().next() {
        return Err(err);
    }
    let fx0 = pack_state(&base_sys, &layout);
    let columns: Result<Vec<Vec<f64>>, QuantizerError> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut x = x0.clone();
            x[j] += h;
            let mut sys = system.clone();
            unpack_state(&mut sys, &layout, &x);
            let outcome = run_cycle(&mut sys, config);
            if let Some((_, _, err)) = outcome.failed.into_iter().next() {
                return Err(err);
            }
            let fx = pack_state(&sys, &layout);
            Ok(fx.iter().zip(&fx0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect();
    let mut jac = DMatrix::zeros(dim, dim);
    for (j, col) in columns?.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    Ok(LinearStability {
        radius: spectral_radius(&jac),
        dimension: dim,
    })
}
