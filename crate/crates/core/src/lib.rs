//! Exact quantization of 1D Schrödinger operators with polynomial potentials.
//!
//! The spectral problem `-ψ'' + (V(q) + λ)ψ = 0` on the half-line, with a
//! monic polynomial potential of degree N, is reduced to a closed system of
//! quantization conditions coupling N+2 (generically) rotated copies of the
//! operator. The zeros of the zeta-regularized spectral determinants of those
//! copies form semi-infinite chains in the complex spectral plane; each chain
//! is pinned by its two neighbors through a Bohr–Sommerfeld-shaped condition
//! that is exact, and by the standard semiclassical expansion asymptotically.
//! Solving the conditions by damped Newton sweeps yields discrete chain
//! dynamics that contract geometrically toward the spectrum, and evaluating
//! the regularized determinants once more reconstructs wave-function data at
//! arbitrary real endpoints.
//!
//! Module map:
//! - [`potential`] — polynomial potentials, the cyclic rotation action,
//!   spatial shifts, and the residue invariants β₋₁ / R
//! - [`semiclassics`] — heat-trace coefficients and the Bohr–Sommerfeld tail
//! - [`determinant`] — zeta-regularized log-determinants, spectral zeta
//!   values, quantization phases, and the Wronskian residual
//! - [`quantizer`] — chain systems, iteration schemes A/B/C, contraction and
//!   linear-stability diagnostics
//! - [`wavefunction`] — absolute-normalized ψ(a) via shifted potentials
//! - [`oracle`] — independent ground truth: basis diagonalization, complex
//!   shooting, absolutely normalized ODE integration
//! - [`snapshot`] — JSON chain-system snapshots and CSV emitters

pub mod determinant;
pub mod oracle;
pub mod potential;
pub mod quantizer;
pub mod semiclassics;
pub mod snapshot;
pub mod special;
pub mod wavefunction;

pub use num_complex::Complex64;

/// Boundary condition at the finite endpoint: Neumann pairs with even
/// quantum numbers k, Dirichlet with odd ones. For even whole-line
/// potentials these are exactly the parity components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Neumann,
    Dirichlet,
}

impl Sector {
    /// Smallest quantum number of the sector.
    pub fn start_k(self) -> usize {
        match self {
            Sector::Neumann => 0,
            Sector::Dirichlet => 1,
        }
    }

    /// Sign of the (N-2)/(2(N+2)) Maslov-type offset in the quantization
    /// conditions: + for Neumann, - for Dirichlet.
    pub fn offset_sign(self) -> f64 {
        match self {
            Sector::Neumann => 1.0,
            Sector::Dirichlet => -1.0,
        }
    }
}

impl std::str::FromStr for Sector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" | "n" | "+" | "even" => Ok(Sector::Neumann),
            "dirichlet" | "d" | "-" | "odd" => Ok(Sector::Dirichlet),
            other => Err(format!("unknown sector `{other}`")),
        }
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Neumann => write!(f, "neumann"),
            Sector::Dirichlet => write!(f, "dirichlet"),
        }
    }
}

/// Exact rational exponent (multiples of 1/N and 1/2 throughout).
pub type Exponent = num_rational::Ratio<i64>;

/// Convert an exact exponent to f64 for numerical evaluation.
pub fn exp_f64(e: Exponent) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}
