//! Numerical laboratory for covariant (De Donder-Weyl) field theory and its
//! Dirac-like quantization on a finite-dimensional field space.
//!
//! The crate is split along the physics:
//!
//! * [`clifford`] builds the Γ-matrix families and the Σ tensor.
//! * [`lagrangian`] holds first-order Lagrangians, the covariant Legendre
//!   transform and the De Donder-Weyl right-hand sides.
//! * [`classical`] integrates the classical field equations on a periodic lattice.
//! * [`quantization`] turns φ and π into operators on a field-space grid.
//! * [`evolution`] time-steps `iΓ^μ ∂_μ Ψ = Ĥ Ψ` and finds ground states.
//! * [`diagnostics`] scalar products, norm drift, the H_μ residual and
//!   dispersion tables.
//! * [`picture`] checks the Heisenberg/Schrödinger picture identities on a
//!   truncated Fock space.
//! * [`pipeline`] config parsing and file-producing runs used by the CLI.

pub mod classical;
pub mod clifford;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod lagrangian;
pub mod picture;
pub mod pipeline;
pub mod quantization;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Shortest round-trip text for a float: plain notation for moderate
/// magnitudes, scientific otherwise. Negative zero prints as `0`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let x = self.0 + 0.0;
        let a = x.abs();
        if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{x}")
        } else {
            write!(f, "{x:e}")
        }
    }
}
