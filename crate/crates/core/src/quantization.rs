//! Field-space quantization: wave functions Ψ(φ, x) on a grid, the φ̂ and
//! π̂ operators of the Dirac-like rules, the plane-wave symbol of Good's
//! π̂, and the covariant Hamiltonian operator Ĥ = H(φ̂, π̂).
//!
//! The field grid has Dirichlet-zero ghost points one step beyond each
//! end. With π̂^μ = −iΓ^μ ∂_φ the kinetic term contracts as
//! `g_{μν} π̂^μ π̂^ν = −(g_{μν}Γ^μΓ^ν) ∂²_φ = −dim · ∂²_φ` for Clifford-type
//! sets; [`KineticNormalization`] selects whether that factor of `dim` is
//! kept. Both choices give exactly `−½∂²_q + V(q)` in mechanics (dim = 1).
//! The second derivative uses the compact three-point stencil.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::classical::Lattice1D;
use crate::clifford::{GammaSet, RepName};
use crate::lagrangian::LagrangianSpec;
use crate::{Error, Result, C64};

/// Smallest admissible number of field-grid points.
pub const MIN_GRID_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGrid {
    n_q: usize,
    q_min: f64,
    q_max: f64,
}

impl FieldGrid {
    pub fn new(n_q: usize, q_min: f64, q_max: f64) -> Result<Self> {
        if n_q < MIN_GRID_POINTS {
            return Err(Error::Config(format!("field grid needs n_q ≥ {MIN_GRID_POINTS}, got {n_q}")));
        }
        if !(q_min < q_max) || !q_min.is_finite() || !q_max.is_finite() {
            return Err(Error::Config(format!("field grid needs q_min < q_max, got [{q_min}, {q_max}]")));
        }
        Ok(Self { n_q, q_min, q_max })
    }

    /// Grid whose zero ghost points sit exactly at ±`wall`.
    pub fn with_walls(n_q: usize, wall: f64) -> Result<Self> {
        let dq = 2.0 * wall / (n_q as f64 + 1.0);
        Self::new(n_q, -wall + dq, wall - dq)
    }

    /// The default box [−12, 12] in oscillator units `1/√ω`.
    pub fn oscillator_box(n_q: usize, omega: f64) -> Result<Self> {
        let half = 12.0 / omega.sqrt();
        Self::new(n_q, -half, half)
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_q - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_q).map(|i| self.q(i)).collect()
    }

    /// Trapezoid weights.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_q {
            0.5 * self.dq()
        } else {
            self.dq()
        }
    }
}

/// Ψ(spinor s, field point i, site j).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    gamma: Arc<GammaSet>,
    grid: FieldGrid,
    lattice: Option<Lattice1D>,
    values: Vec<C64>,
    pub time: f64,
}

impl WaveFunction {
    pub fn zeros(gamma: Arc<GammaSet>, grid: FieldGrid, lattice: Option<Lattice1D>) -> Self {
        let n = gamma.size() * grid.n_q() * lattice.map_or(1, |l| l.n_x);
        Self {
            gamma,
            grid,
            lattice,
            values: vec![C64::new(0.0, 0.0); n],
            time: 0.0,
        }
    }

    /// Fills every entry from `f(s, q, x)`; x is 0 without a lattice.
    pub fn from_fn(
        gamma: Arc<GammaSet>,
        grid: FieldGrid,
        lattice: Option<Lattice1D>,
        f: impl Fn(usize, f64, f64) -> C64,
    ) -> Self {
        let mut w = Self::zeros(gamma, grid, lattice);
        for s in 0..w.n_spinor() {
            for j in 0..w.n_x() {
                let x = lattice.map_or(0.0, |l| l.x(j));
                for i in 0..grid.n_q() {
                    let k = w.idx(s, i, j);
                    w.values[k] = f(s, grid.q(i), x);
                }
            }
        }
        w
    }

    /// A field-space profile on one spinor component, no lattice.
    pub fn mechanics(gamma: Arc<GammaSet>, grid: FieldGrid, profile: &[C64]) -> Result<Self> {
        if profile.len() != grid.n_q() {
            return Err(Error::Usage("profile length must equal n_q".into()));
        }
        let mut w = Self::zeros(gamma, grid, None);
        w.values[..grid.n_q()].copy_from_slice(profile);
        Ok(w)
    }

    pub fn gamma(&self) -> &Arc<GammaSet> {
        &self.gamma
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn lattice(&self) -> Option<&Lattice1D> {
        self.lattice.as_ref()
    }

    pub fn n_spinor(&self) -> usize {
        self.gamma.size()
    }

    pub fn n_q(&self) -> usize {
        self.grid.n_q()
    }

    pub fn n_x(&self) -> usize {
        self.lattice.map_or(1, |l| l.n_x)
    }

    /// Weight of one lattice site in spatial sums (1 without a lattice).
    pub fn site_weight(&self) -> f64 {
        self.lattice.map_or(1.0, |l| l.dx)
    }

    #[inline]
    pub fn idx(&self, s: usize, i: usize, j: usize) -> usize {
        (s * self.n_x() + j) * self.n_q() + i
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn get(&self, s: usize, i: usize, j: usize) -> C64 {
        self.values[self.idx(s, i, j)]
    }

    /// Field-grid line for spinor `s` at site `j`.
    pub fn line(&self, s: usize, j: usize) -> &[C64] {
        let start = self.idx(s, 0, j);
        &self.values[start..start + self.n_q()]
    }

    pub fn line_mut(&mut self, s: usize, j: usize) -> &mut [C64] {
        let start = self.idx(s, 0, j);
        let n = self.n_q();
        &mut self.values[start..start + n]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.gamma == other.gamma && self.grid == other.grid && self.lattice == other.lattice
    }

    pub fn with_values(&self, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Σ |Ψ|² · trapezoid weight · site weight.
    pub fn norm_sqr(&self) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.n_spinor() {
            for j in 0..self.n_x() {
                acc += self
                    .line(s, j)
                    .iter()
                    .enumerate()
                    .map(|(i, z)| z.norm_sqr() * self.grid.weight(i))
                    .sum::<f64>();
            }
        }
        acc * self.site_weight()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.values.iter_mut().for_each(|z| *z /= n);
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        self.with_values(self.values.iter().map(|z| z * a).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    /// Applies the spinor matrix `m` at every (i, j).
    pub fn spinor_mul(&self, m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(self.gamma.clone(), self.grid, self.lattice);
        out.time = self.time;
        let n = self.n_spinor();
        for s in 0..n {
            for t in 0..n {
                let c = m[(s, t)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..self.n_x() {
                    let src = self.idx(t, 0, j);
                    let dst = out.idx(s, 0, j);
                    for i in 0..self.n_q() {
                        out.values[dst + i] += c * self.values[src + i];
                    }
                }
            }
        }
        out
    }
}

/// Centred first derivative along the field grid with zero ghosts.
pub fn field_derivative(line: &[C64], dq: f64, out: &mut [C64]) {
    let n = line.len();
    let zero = C64::new(0.0, 0.0);
    for i in 0..n {
        let right = if i + 1 < n { line[i + 1] } else { zero };
        let left = if i > 0 { line[i - 1] } else { zero };
        out[i] = (right - left) / (2.0 * dq);
    }
}

/// φ̂^a: multiplication by the grid coordinate.
pub fn apply_phi_hat(a: usize, psi: &WaveFunction) -> Result<WaveFunction> {
    if a != 0 {
        return Err(Error::Unsupported(format!(
            "field index {a}: wave functions live on a single-field grid"
        )));
    }
    let mut out = psi.clone();
    let grid = *psi.grid();
    for s in 0..psi.n_spinor() {
        for j in 0..psi.n_x() {
            for (i, z) in out.line_mut(s, j).iter_mut().enumerate() {
                *z *= grid.q(i);
            }
        }
    }
    Ok(out)
}

/// π̂^μ = −iΓ^μ ∂/∂φ.
pub fn apply_pi_hat_dirac(mu: usize, psi: &WaveFunction) -> Result<WaveFunction> {
    if mu >= psi.gamma().dim() {
        return Err(Error::Usage(format!("μ = {mu} out of range for dim {}", psi.gamma().dim())));
    }
    let dq = psi.grid().dq();
    let mut d = psi.clone();
    let mut buf = vec![C64::new(0.0, 0.0); psi.n_q()];
    for s in 0..psi.n_spinor() {
        for j in 0..psi.n_x() {
            field_derivative(psi.line(s, j), dq, &mut buf);
            d.line_mut(s, j).copy_from_slice(&buf);
        }
    }
    let m = psi.gamma().gamma(mu) * C64::new(0.0, -1.0);
    Ok(d.spinor_mul(&m))
}

/// Symbol of Good's π̂^μ = −∂²/∂φ∂x_μ on `exp(i(kφ − ω_ν x^ν))`, which is
/// `−k ω^μ`. `omega` holds the lower components ω_ν.
pub fn good_pi_symbol(mu: usize, k: f64, omega: &[f64], g: &crate::clifford::MetricSignature) -> C64 {
    let omega_up = g.g(mu, mu) * omega[mu];
    // −(i k)(−i ω^μ)
    -(C64::new(0.0, k) * C64::new(0.0, -omega_up))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KineticNormalization {
    /// Keep `g_{μν}Γ^μΓ^ν = dim`: kinetic term `−(dim/2) K⁻¹ ∂²_φ`.
    #[default]
    CliffordContraction,
    /// Divide the contraction by dim: kinetic term `−½ K⁻¹ ∂²_φ` in every dim.
    DimIndependent,
}

impl KineticNormalization {
    pub fn as_str(self) -> &'static str {
        match self {
            KineticNormalization::CliffordContraction => "clifford_contraction",
            KineticNormalization::DimIndependent => "dim_independent",
        }
    }
}

impl FromStr for KineticNormalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clifford_contraction" => Ok(Self::CliffordContraction),
            "dim_independent" => Ok(Self::DimIndependent),
            _ => Err(Error::Config(format!(
                "unknown kinetic normalization `{s}` (clifford_contraction | dim_independent)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    DiracLike,
    MechanicalSchrodinger,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::DiracLike => "dirac_like",
            Scheme::MechanicalSchrodinger => "mechanical_schrodinger",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirac_like" => Ok(Scheme::DiracLike),
            "mechanical_schrodinger" => Ok(Scheme::MechanicalSchrodinger),
            _ => Err(Error::Config(format!(
                "unknown scheme `{s}` (dirac_like | mechanical_schrodinger)"
            ))),
        }
    }
}

/// Ĥ = −a ∂²_φ ⊗ I + V(φ) ⊗ I acting on each field-grid line.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianOperator {
    scheme: Scheme,
    grid: FieldGrid,
    n_spinor: usize,
    kinetic_coeff: f64,
    potential: Vec<f64>,
}

impl HamiltonianOperator {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn grid(&self) -> &FieldGrid {
        &self.grid
    }

    pub fn n_spinor(&self) -> usize {
        self.n_spinor
    }

    /// The `a` in `−a ∂²_φ`.
    pub fn kinetic_coeff(&self) -> f64 {
        self.kinetic_coeff
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Applies Ĥ to one field-grid line.
    pub fn apply_line(&self, line: &[C64], out: &mut [C64]) {
        let n = line.len();
        let dq = self.grid.dq();
        let c = self.kinetic_coeff / (dq * dq);
        let zero = C64::new(0.0, 0.0);
        for i in 0..n {
            let right = if i + 1 < n { line[i + 1] } else { zero };
            let left = if i > 0 { line[i - 1] } else { zero };
            out[i] = -(right - 2.0 * line[i] + left) * c + line[i] * self.potential[i];
        }
    }

    pub fn apply(&self, psi: &WaveFunction) -> WaveFunction {
        let mut out = psi.clone();
        let mut buf = vec![C64::new(0.0, 0.0); psi.n_q()];
        for s in 0..psi.n_spinor() {
            for j in 0..psi.n_x() {
                self.apply_line(psi.line(s, j), &mut buf);
                out.line_mut(s, j).copy_from_slice(&buf);
            }
        }
        out
    }

    /// Tridiagonal (diag, off-diag) of the field-space block.
    pub fn tridiagonal(&self) -> (Vec<f64>, f64) {
        let dq = self.grid.dq();
        let c = self.kinetic_coeff / (dq * dq);
        (self.potential.iter().map(|v| v + 2.0 * c).collect(), -c)
    }

    /// Real symmetric n_q × n_q field-space block.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.grid.n_q();
        let (diag, off) = self.tridiagonal();
        DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                diag[r]
            } else if r.abs_diff(c) == 1 {
                off
            } else {
                0.0
            }
        })
    }

    /// Field-space block as CSV rows (no header), for external eigensolvers.
    pub fn to_csv(&self) -> String {
        let m = self.to_dense();
        let mut s = String::new();
        for r in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|c| crate::Num(m[(r, c)]).to_string()).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Sorted eigenvalues and matching eigenvectors (columns) of the field block.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.to_dense());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    /// Largest |eigenvalue| bound (Gershgorin) of the field block.
    pub fn spectral_bound(&self) -> f64 {
        let (diag, off) = self.tridiagonal();
        diag.iter().map(|d| d.abs() + 2.0 * off.abs()).fold(0.0, f64::max)
    }
}

/// Ĥ with the default kinetic normalization.
pub fn assemble_hamiltonian(l: &LagrangianSpec, g: &GammaSet, grid: &FieldGrid) -> Result<HamiltonianOperator> {
    assemble_hamiltonian_with(l, g, grid, KineticNormalization::default())
}

pub fn assemble_hamiltonian_with(
    l: &LagrangianSpec,
    g: &GammaSet,
    grid: &FieldGrid,
    norm: KineticNormalization,
) -> Result<HamiltonianOperator> {
    if l.n_fields() != 1 {
        return Err(Error::Unsupported(format!(
            "field-grid Hamiltonian needs a single field, got {}",
            l.n_fields()
        )));
    }
    if l.dim() != g.dim() {
        return Err(Error::Config(format!(
            "Lagrangian dim {} does not match Γ set dim {}",
            l.dim(),
            g.dim()
        )));
    }
    if !g.rep().is_dirac_type() {
        return Err(Error::Unsupported(format!(
            "Ĥ assembly needs a Clifford-type Γ set, got {}",
            g.rep()
        )));
    }
    let contraction = clifford_contraction(g)?;
    let factor = match norm {
        KineticNormalization::CliffordContraction => contraction,
        KineticNormalization::DimIndependent => contraction / g.dim() as f64,
    };
    let kinetic_coeff = 0.5 * l.kinetic_inv()[(0, 0)] * factor;
    let potential = grid.points().iter().map(|&q| l.potential().eval(&[q])).collect();
    let scheme = if g.dim() == 1 && g.rep() == RepName::Scalar {
        Scheme::MechanicalSchrodinger
    } else {
        Scheme::DiracLike
    };
    Ok(HamiltonianOperator {
        scheme,
        grid: *grid,
        n_spinor: g.size(),
        kinetic_coeff,
        potential,
    })
}

/// c with `g_{μν}Γ^μΓ^ν = c·I`; errors if the contraction is not a multiple of I.
pub fn clifford_contraction(g: &GammaSet) -> Result<f64> {
    let n = g.size();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for mu in 0..g.dim() {
        acc += g.gamma(mu) * g.gamma(mu) * C64::new(g.signature().g(mu, mu), 0.0);
    }
    let c = acc[(0, 0)];
    let off = (&acc - DMatrix::<C64>::identity(n, n) * c)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if off > 1e-12 || c.im.abs() > 1e-12 {
        return Err(Error::Unsupported("g_{μν}Γ^μΓ^ν is not proportional to the identity".into()));
    }
    Ok(c.re)
}

/// max over interior points of |([φ̂, π̂⁰] − i)ψ| for a mechanics wave function.
pub fn canonical_commutator_residual(psi: &WaveFunction) -> Result<f64> {
    let a = apply_pi_hat_dirac(0, &apply_phi_hat(0, psi)?)?;
    let b = apply_phi_hat(0, &apply_pi_hat_dirac(0, psi)?)?;
    let n = psi.n_q();
    let mut worst: f64 = 0.0;
    for s in 0..psi.n_spinor() {
        for j in 0..psi.n_x() {
            for i in 1..n - 1 {
                // [φ̂, π̂]ψ = φ̂π̂ψ − π̂φ̂ψ
                let comm = b.get(s, i, j) - a.get(s, i, j);
                worst = worst.max((comm - C64::new(0.0, 1.0) * psi.get(s, i, j)).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_gamma_set;

    fn scalar() -> Arc<GammaSet> {
        Arc::new(build_gamma_set(1, RepName::Scalar).unwrap())
    }

    fn gaussian(grid: FieldGrid, center: f64, width: f64) -> WaveFunction {
        WaveFunction::from_fn(scalar(), grid, None, |_, q, _| {
            C64::new((-(q - center).powi(2) / (2.0 * width * width)).exp(), 0.0)
        })
    }

    #[test]
    fn grid_validation() {
        assert!(FieldGrid::new(7, -1.0, 1.0).is_err());
        assert!(FieldGrid::new(16, 1.0, 1.0).is_err());
        let g = FieldGrid::with_walls(99, 5.0).unwrap();
        assert!((g.q_min() - g.dq() + 5.0).abs() < 1e-14);
        assert!((g.q_max() + g.dq() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn phi_hat_gives_ramp() {
        let grid = FieldGrid::new(21, -1.0, 1.0).unwrap();
        let one = WaveFunction::from_fn(scalar(), grid, None, |_, _, _| C64::new(1.0, 0.0));
        let out = apply_phi_hat(0, &one).unwrap();
        for i in 0..21 {
            assert_eq!(out.get(0, i, 0).re, grid.q(i));
        }
        let twice = apply_phi_hat(0, &out).unwrap();
        for i in 0..21 {
            assert!((twice.get(0, i, 0).re - grid.q(i).powi(2)).abs() < 1e-15);
        }
        assert!(apply_phi_hat(1, &one).is_err());
    }

    #[test]
    fn phi_expectation_of_shifted_gaussian() {
        let grid = FieldGrid::new(256, -12.0, 12.0).unwrap();
        let mut psi = gaussian(grid, 0.5, 1.0);
        psi.normalize();
        let phi = apply_phi_hat(0, &psi).unwrap();
        let expect: f64 = (0..grid.n_q())
            .map(|i| (psi.get(0, i, 0).conj() * phi.get(0, i, 0)).re * grid.weight(i))
            .sum();
        assert!((expect - 0.5).abs() < grid.dq(), "{expect}");
    }

    #[test]
    fn pi_hat_on_plane_wave() {
        let grid = FieldGrid::new(2001, -20.0, 20.0).unwrap();
        let k = 1.3;
        let psi = WaveFunction::from_fn(scalar(), grid, None, |_, q, _| C64::new(0.0, k * q).exp());
        let out = apply_pi_hat_dirac(0, &psi).unwrap();
        let dq = grid.dq();
        for i in 1..grid.n_q() - 1 {
            let ratio = out.get(0, i, 0) / psi.get(0, i, 0);
            // centred difference gives sin(k dq)/dq exactly
            assert!((ratio.re - (k * dq).sin() / dq).abs() < 1e-10);
            assert!((ratio.re - k).abs() / k < (k * dq).powi(2));
            assert!(ratio.im.abs() < 1e-10);
        }
    }

    #[test]
    fn pi_hat_of_even_real_is_odd_imaginary() {
        let grid = FieldGrid::new(101, -5.0, 5.0).unwrap();
        let psi = gaussian(grid, 0.0, 1.0);
        let out = apply_pi_hat_dirac(0, &psi).unwrap();
        let n = grid.n_q();
        for i in 0..n {
            let z = out.get(0, i, 0);
            assert_eq!(z.re, 0.0);
            assert!((z.im + out.get(0, n - 1 - i, 0).im).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_hat_dirac_1p1_matches_explicit_product() {
        let g = Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap());
        let grid = FieldGrid::new(33, -3.0, 3.0).unwrap();
        let lat = Lattice1D::periodic(4, 1.0).unwrap();
        let psi = WaveFunction::from_fn(g.clone(), grid, Some(lat), |s, q, x| {
            C64::new((-q * q).exp() * (1.0 + s as f64), q * x)
        });
        let out = apply_pi_hat_dirac(1, &psi).unwrap();
        let dq = grid.dq();
        let mut d = vec![C64::new(0.0, 0.0); 33];
        for j in 0..4 {
            let d0 = {
                field_derivative(psi.line(0, j), dq, &mut d);
                d.clone()
            };
            let d1 = {
                field_derivative(psi.line(1, j), dq, &mut d);
                d.clone()
            };
            for i in 0..33 {
                // −iγ¹ with γ¹ = [[0, 1], [−1, 0]]
                let up = C64::new(0.0, -1.0) * d1[i];
                let down = C64::new(0.0, 1.0) * d0[i];
                assert!((out.get(0, i, j) - up).norm() < 1e-14);
                assert!((out.get(1, i, j) - down).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn good_symbol_values() {
        let sig = crate::clifford::MetricSignature::new(1).unwrap();
        assert_eq!(good_pi_symbol(0, 1.0, &[1.0], &sig), C64::new(-1.0, 0.0));
        assert_eq!(good_pi_symbol(0, 2.0, &[3.0], &sig), C64::new(-6.0, 0.0));
        let sig2 = crate::clifford::MetricSignature::new(2).unwrap();
        for mu in 0..2 {
            assert_eq!(good_pi_symbol(mu, 0.0, &[1.5, -0.5], &sig2).norm(), 0.0);
        }
    }

    #[test]
    fn canonical_commutator_is_i() {
        let grid = FieldGrid::new(256, -12.0, 12.0).unwrap();
        let psi = gaussian(grid, 0.3, 1.0);
        let r = canonical_commutator_residual(&psi).unwrap();
        assert!(r < 5.0 * grid.dq().powi(2), "{r}");
    }

    #[test]
    fn oscillator_matrix_is_symmetric_and_has_right_ground_state() {
        let l = LagrangianSpec::single(1, 1.0, "0.5*phi^2").unwrap();
        let g = build_gamma_set(1, RepName::Scalar).unwrap();
        let grid = FieldGrid::oscillator_box(256, 1.0).unwrap();
        let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
        assert_eq!(h.scheme(), Scheme::MechanicalSchrodinger);
        assert_eq!(h.kinetic_coeff(), 0.5);
        let m = h.to_dense();
        assert!((&m - m.transpose()).amax() < 1e-12);
        let (ev, _) = h.eigen();
        assert!((ev[0] - 0.5).abs() < 1e-3, "{}", ev[0]);
    }

    #[test]
    fn free_symbol_is_k_squared_over_two() {
        let l = LagrangianSpec::single(1, 1.0, "0").unwrap();
        let g = build_gamma_set(1, RepName::Scalar).unwrap();
        let grid = FieldGrid::new(4001, -40.0, 40.0).unwrap();
        let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
        let k = 0.7;
        let psi = WaveFunction::from_fn(Arc::new(g), grid, None, |_, q, _| C64::new(0.0, k * q).exp());
        let out = h.apply(&psi);
        let i = 2000;
        let ratio = out.get(0, i, 0) / psi.get(0, i, 0);
        assert!((ratio.re - k * k / 2.0).abs() < 1e-4, "{ratio}");
    }

    #[test]
    fn dirac_1p1_block_diagonal() {
        let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
        let g = Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap());
        let grid = FieldGrid::new(64, -6.0, 6.0).unwrap();
        let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
        assert_eq!(h.scheme(), Scheme::DiracLike);
        // −(dim/2)∂² with dim = 2
        assert_eq!(h.kinetic_coeff(), 1.0);
        let hd = assemble_hamiltonian_with(&l, &g, &grid, KineticNormalization::DimIndependent).unwrap();
        assert_eq!(hd.kinetic_coeff(), 0.5);
        // upper-only input stays upper-only
        let psi = WaveFunction::from_fn(g, grid, None, |s, q, _| {
            if s == 0 {
                C64::new((-q * q).exp(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let out = h.apply(&psi);
        assert!(out.line(1, 0).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn linear_in_potential() {
        let g = build_gamma_set(1, RepName::Scalar).unwrap();
        let grid = FieldGrid::new(32, -4.0, 4.0).unwrap();
        let h = |v: &str| {
            assemble_hamiltonian(&LagrangianSpec::single(1, 1.0, v).unwrap(), &g, &grid)
                .unwrap()
                .to_dense()
        };
        let lhs = h("0.5*phi^2 + 0.1*phi^4");
        let rhs = h("0.5*phi^2") + h("0.1*phi^4") - h("0");
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn rejects_multi_field_and_kemmer() {
        let g = build_gamma_set(1, RepName::Scalar).unwrap();
        let grid = FieldGrid::new(32, -4.0, 4.0).unwrap();
        let two = LagrangianSpec::new(
            2,
            1,
            vec![1.0, 0.0, 0.0, 1.0],
            crate::lagrangian::Polynomial::zero(2),
        )
        .unwrap();
        assert!(matches!(assemble_hamiltonian(&two, &g, &grid), Err(Error::Unsupported(_))));
        let k = build_gamma_set(2, RepName::KemmerSpin0).unwrap();
        let l = LagrangianSpec::single(2, 1.0, "0").unwrap();
        assert!(matches!(assemble_hamiltonian(&l, &k, &grid), Err(Error::Unsupported(_))));
    }
}
