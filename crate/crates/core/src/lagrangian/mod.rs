//! First-order Lagrangians, the covariant Legendre transform and the
//! De Donder-Weyl (DW) equations.
//!
//! The family is
//!
//! ```text
//! L = ½ K_ab g^{μν} ∂_μφ^a ∂_νφ^b − V(φ)
//! π^μ_a = ∂L/∂(∂_μφ^a) = K_ab g^{μν} ∂_νφ^b
//! H = π^μ_a ∂_μφ^a − L = ½ (K⁻¹)^{ab} g_{μν} π^μ_a π^ν_b + V(φ)
//! ```
//!
//! with K symmetric positive-definite, so the Legendre map is a global
//! linear bijection. Momenta are stored with the spacetime index up.
//!
//! # The oscillator written as `a*(i ȧ − a)`
//!
//! With `a = (q + i p)/√2` the complex oscillator Lagrangian equals, up to
//! the total derivative `(i/4) d(q² + p²)/dt`, the phase-space form
//! `p q̇ − ½(p² + q²)`. Eliminating `p` through its own equation of motion
//! (`p = q̇`) leaves `½ q̇² − ½ q²`, i.e. K = 1, V = ½ q², dim = 1, whose
//! covariant Hamiltonian `½(p² + q²)` is exactly `a* a`. See
//! [`complex_oscillator`] and [`oscillator_amplitude`].

mod polynomial;

pub use polynomial::Polynomial;

use nalgebra::DMatrix;

use crate::clifford::MetricSignature;
use crate::{Error, Result, C64};

/// Highest total degree accepted for a potential.
pub const MAX_POTENTIAL_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    n_fields: usize,
    signature: MetricSignature,
    kinetic: DMatrix<f64>,
    kinetic_inv: DMatrix<f64>,
    potential: Polynomial,
}

/// A point of the first jet bundle: field values and their spacetime derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub phi: Vec<f64>,
    /// ∂_μφ^a stored at `a * dim + μ`.
    pub dphi: Vec<f64>,
}

/// A point of the covariant phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub phi: Vec<f64>,
    /// π^μ_a stored at `a * dim + μ`.
    pub pi: Vec<f64>,
}

impl LagrangianSpec {
    /// `kinetic` is K_ab row-major (n_fields × n_fields).
    pub fn new(n_fields: usize, dim: usize, kinetic: Vec<f64>, potential: Polynomial) -> Result<Self> {
        let mut problems = Vec::new();
        if n_fields == 0 {
            return Err(Error::Config("n_fields must be at least 1".into()));
        }
        let signature = MetricSignature::new(dim)?;
        if kinetic.len() != n_fields * n_fields {
            return Err(Error::Config(format!(
                "kinetic matrix needs {} entries, got {}",
                n_fields * n_fields,
                kinetic.len()
            )));
        }
        let k = DMatrix::from_row_slice(n_fields, n_fields, &kinetic);
        if k.iter().any(|v| !v.is_finite()) {
            problems.push("kinetic coefficients must be finite".to_string());
        }
        let scale = k.amax().max(1.0);
        if (&k - k.transpose()).amax() > 1e-12 * scale {
            problems.push("kinetic matrix K must be symmetric".to_string());
        }
        if problems.is_empty() {
            let min_eig = k.clone().symmetric_eigen().eigenvalues.min();
            if min_eig <= 0.0 {
                problems.push(format!(
                    "kinetic matrix K must be positive-definite (smallest eigenvalue {min_eig}); \
                     degenerate first-order Lagrangians such as the Dirac field need a constrained \
                     Legendre transform, which is not supported"
                ));
            }
        }
        if potential.n_fields() != n_fields {
            problems.push(format!(
                "potential is over {} fields, expected {n_fields}",
                potential.n_fields()
            ));
        }
        if !potential.is_finite() {
            problems.push("potential coefficients must be finite".to_string());
        }
        if potential.degree() > MAX_POTENTIAL_DEGREE {
            problems.push(format!(
                "potential degree {} exceeds {MAX_POTENTIAL_DEGREE}",
                potential.degree()
            ));
        }
        if !problems.is_empty() {
            return Err(if problems.len() == 1 {
                Error::Config(problems.remove(0))
            } else {
                Error::ConfigList(problems)
            });
        }
        let kinetic_inv = k
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Config("kinetic matrix K is singular".into()))?;
        Ok(Self {
            n_fields,
            signature,
            kinetic: k,
            kinetic_inv,
            potential,
        })
    }

    /// One field with K = [k] and a potential given as an expression.
    pub fn single(dim: usize, k: f64, potential: &str) -> Result<Self> {
        Self::new(1, dim, vec![k], Polynomial::parse(potential, 1)?)
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn signature(&self) -> &MetricSignature {
        &self.signature
    }

    pub fn kinetic(&self) -> &DMatrix<f64> {
        &self.kinetic
    }

    pub fn kinetic_inv(&self) -> &DMatrix<f64> {
        &self.kinetic_inv
    }

    pub fn potential(&self) -> &Polynomial {
        &self.potential
    }

    /// Returns a copy with a different potential (same fields and kinetic term).
    pub fn with_potential(&self, potential: Polynomial) -> Result<Self> {
        Self::new(
            self.n_fields,
            self.dim(),
            self.kinetic.transpose().as_slice().to_vec(),
            potential,
        )
    }

    fn check_jet(&self, j: &JetPoint) {
        debug_assert_eq!(j.phi.len(), self.n_fields);
        debug_assert_eq!(j.dphi.len(), self.n_fields * self.dim());
    }

    /// L(φ, ∂φ).
    pub fn lagrangian(&self, j: &JetPoint) -> f64 {
        self.check_jet(j);
        let d = self.dim();
        let mut kin = 0.0;
        for a in 0..self.n_fields {
            for b in 0..self.n_fields {
                let kab = self.kinetic[(a, b)];
                if kab == 0.0 {
                    continue;
                }
                for mu in 0..d {
                    kin += kab * self.signature.g(mu, mu) * j.dphi[a * d + mu] * j.dphi[b * d + mu];
                }
            }
        }
        0.5 * kin - self.potential.eval(&j.phi)
    }

    /// π^μ_a = K_ab g^{μν} ∂_νφ^b.
    pub fn covariant_momenta(&self, j: &JetPoint) -> Vec<f64> {
        self.check_jet(j);
        let d = self.dim();
        let mut pi = vec![0.0; self.n_fields * d];
        for a in 0..self.n_fields {
            for mu in 0..d {
                let g = self.signature.g(mu, mu);
                pi[a * d + mu] = (0..self.n_fields)
                    .map(|b| self.kinetic[(a, b)] * g * j.dphi[b * d + mu])
                    .sum();
            }
        }
        pi
    }

    pub fn phase_point(&self, j: &JetPoint) -> PhasePoint {
        PhasePoint {
            phi: j.phi.clone(),
            pi: self.covariant_momenta(j),
        }
    }

    /// ∂H/∂π^μ_a = (K⁻¹)^{ab} g_{μν} π^ν_b.
    fn dh_dpi(&self, p: &PhasePoint) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.n_fields * d];
        for a in 0..self.n_fields {
            for mu in 0..d {
                let g = self.signature.g(mu, mu);
                out[a * d + mu] = (0..self.n_fields)
                    .map(|b| self.kinetic_inv[(a, b)] * g * p.pi[b * d + mu])
                    .sum();
            }
        }
        out
    }

    /// Covariant Hamiltonian H(φ, π).
    pub fn covariant_hamiltonian(&self, p: &PhasePoint) -> f64 {
        let v = self.dh_dpi(p);
        let kin: f64 = v.iter().zip(&p.pi).map(|(x, y)| x * y).sum();
        0.5 * kin + self.potential.eval(&p.phi)
    }

    /// |π·∂φ − H(φ, π) − L| with π taken from the jet.
    pub fn hamiltonian_form_residual(&self, j: &JetPoint) -> f64 {
        let p = self.phase_point(j);
        let contraction: f64 = p.pi.iter().zip(&j.dphi).map(|(a, b)| a * b).sum();
        (contraction - self.covariant_hamiltonian(&p) - self.lagrangian(j)).abs()
    }

    /// Right-hand sides of the DW equations:
    /// `(∂H/∂π^μ_a, −∂H/∂φ^a)`, i.e. the values of `∂_μφ^a` and `∂_μπ^μ_a`.
    pub fn dw_rhs(&self, p: &PhasePoint) -> (Vec<f64>, Vec<f64>) {
        let dphi = self.dh_dpi(p);
        let div_pi = self.potential.gradient(&p.phi).into_iter().map(|g| -g).collect();
        (dphi, div_pi)
    }

    /// Θ^μ_ν = ∂_νφ^a π^μ_a − δ^μ_ν L, stored at `μ * dim + ν`.
    pub fn energy_momentum_tensor(&self, j: &JetPoint) -> Vec<f64> {
        let d = self.dim();
        let pi = self.covariant_momenta(j);
        let l = self.lagrangian(j);
        let mut theta = vec![0.0; d * d];
        for mu in 0..d {
            for nu in 0..d {
                let mut t: f64 = (0..self.n_fields).map(|a| j.dphi[a * d + nu] * pi[a * d + mu]).sum();
                if mu == nu {
                    t -= l;
                }
                theta[mu * d + nu] = t;
            }
        }
        theta
    }
}

/// The complex-oscillator Lagrangian recast in the real variable q:
/// K = 1, V = ½ q², dim = 1.
pub fn complex_oscillator() -> LagrangianSpec {
    LagrangianSpec::single(1, 1.0, "0.5*phi^2").expect("static spec")
}

/// a = (q + i p)/√2, so that |a|² is the oscillator Hamiltonian.
pub fn oscillator_amplitude(q: f64, p: f64) -> C64 {
    C64::new(q, p) / std::f64::consts::SQRT_2
}

/// Named Lagrangians shipped with the crate and used throughout the tests.
pub fn catalog() -> Vec<(&'static str, LagrangianSpec)> {
    let two_field = LagrangianSpec::new(
        2,
        4,
        vec![2.0, 0.5, 0.5, 1.0],
        Polynomial::parse("0.5*phi1^2 + 0.8*phi2^2 + 0.3*phi1*phi2^2 + 0.05*phi1^4*phi2^2", 2)
            .expect("static potential"),
    )
    .expect("static spec");
    vec![
        ("ho_mechanics", LagrangianSpec::single(1, 1.0, "2*phi^2").expect("static spec")),
        ("complex_oscillator", complex_oscillator()),
        ("klein_gordon_1p1", LagrangianSpec::single(2, 1.0, "0.5*phi^2").expect("static spec")),
        (
            "quartic_1p1",
            LagrangianSpec::single(2, 1.0, "0.5*phi^2 + 0.25*phi^4").expect("static spec"),
        ),
        ("two_field_3p1", two_field),
    ]
}
