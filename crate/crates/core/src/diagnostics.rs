//! Scalar products, norm drift, the H_μ decomposition residual and
//! plane-wave dispersion tables.
//!
//! Field-space integrals use trapezoid weights; spatial sums use weight dx
//! (1 without a lattice). The "bar" product is `∫dφ Ψ†γ⁰Φ`, indefinite for
//! Dirac-type sets; the "plus" product is `∫dφ Ψ†Φ`.
//!
//! Multiplying `iγ^ν∂_νΨ = ĤΨ` by γ_μ and using `γ_μγ^ν = δ_μ^ν − iΣ_μ^ν`
//! gives
//!
//! ```text
//! i ∂_μΨ = ( −Σ_μ^ν ∂_ν + γ_μ Ĥ ) Ψ
//! ```
//!
//! which is what [`h_mu_residual`] measures.

use std::fmt;
use std::str::FromStr;

use crate::clifford::sigma_tensor;
use crate::evolution::{spatial_derivative, EvolutionTrace};
use crate::lagrangian::LagrangianSpec;
use crate::quantization::{HamiltonianOperator, WaveFunction};
use crate::{Error, Num, Result, C64};

fn check_shapes(a: &WaveFunction, b: &WaveFunction) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Usage("wave functions differ in Γ set, field grid or lattice".into()))
    }
}

fn weighted_sum(a: &WaveFunction, b: &WaveFunction, spinor: &nalgebra::DMatrix<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let n = a.n_spinor();
    for s in 0..n {
        for t in 0..n {
            let m = spinor[(s, t)];
            if m == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..a.n_x() {
                let (la, lb) = (a.line(s, j), b.line(t, j));
                let mut line = C64::new(0.0, 0.0);
                for i in 0..a.n_q() {
                    line += la[i].conj() * lb[i] * a.grid().weight(i);
                }
                acc += m * line;
            }
        }
    }
    acc * a.site_weight()
}

/// ⟨Ψ|Φ⟩ = Σ_x dx ∫dφ Ψ†γ⁰Φ.
pub fn scalar_product(psi: &WaveFunction, phi: &WaveFunction) -> Result<C64> {
    check_shapes(psi, phi)?;
    Ok(weighted_sum(psi, phi, psi.gamma().gamma0_hermitizer()))
}

/// ∫dφ Ψ†γ⁰Φ at each lattice site (no dx weight).
pub fn scalar_product_per_site(psi: &WaveFunction, phi: &WaveFunction) -> Result<Vec<C64>> {
    check_shapes(psi, phi)?;
    let g0 = psi.gamma().gamma0_hermitizer();
    let n = psi.n_spinor();
    Ok((0..psi.n_x())
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..n {
                for t in 0..n {
                    let (la, lb) = (psi.line(s, j), phi.line(t, j));
                    let line: C64 = (0..psi.n_q()).map(|i| la[i].conj() * lb[i] * psi.grid().weight(i)).sum();
                    acc += g0[(s, t)] * line;
                }
            }
            acc
        })
        .collect())
}

/// Positive-definite product Σ_x dx ∫dφ Ψ†Φ. Shapes are assumed equal.
pub fn positive_product(psi: &WaveFunction, phi: &WaveFunction) -> C64 {
    weighted_sum(psi, phi, &psi.gamma().identity())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub t: f64,
    pub norm_plus: f64,
    pub norm_bar: f64,
    pub d_norm_plus_dt: f64,
    pub d_norm_bar_dt: f64,
}

fn derivative_series(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                // second-order one-sided
                let h = t[1] - t[0];
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if k == n - 1 {
                let h = t[n - 1] - t[n - 2];
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
            } else {
                (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1])
            }
        })
        .collect()
}

/// Norms along a trace and their time derivatives.
pub fn norm_drift(trace: &EvolutionTrace) -> Result<Vec<NormReport>> {
    let n = trace.samples.len();
    if n < 3 {
        return Err(Error::Usage(format!("norm drift needs at least 3 samples, got {n}")));
    }
    let plus: Vec<f64> = trace.samples.iter().map(|s| s.norm_plus).collect();
    let bar: Vec<f64> = trace.samples.iter().map(|s| s.norm_bar).collect();
    let dp = derivative_series(&trace.times, &plus);
    let db = derivative_series(&trace.times, &bar);
    Ok((0..n)
        .map(|k| NormReport {
            t: trace.times[k],
            norm_plus: plus[k],
            norm_bar: bar[k],
            d_norm_plus_dt: dp[k],
            d_norm_bar_dt: db[k],
        })
        .collect())
}

/// Residual of `i∂_μΨ = (−Σ_μ^ν∂_ν + γ_μĤ)Ψ` at every interior snapshot.
///
/// Snapshots must be equally spaced in time and carry a 1+1 lattice.
/// Time and space derivatives are centred differences; the first and last
/// field-grid points are left out of the norm. Returns `(t, ‖residual‖)`.
pub fn h_mu_residual(snapshots: &[WaveFunction], h: &HamiltonianOperator, mu: usize) -> Result<Vec<(f64, f64)>> {
    if snapshots.len() < 3 {
        return Err(Error::Usage(format!(
            "H_μ residual needs at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let first = &snapshots[0];
    let g = first.gamma().clone();
    let lat = *first
        .lattice()
        .ok_or_else(|| Error::Usage("H_μ residual needs snapshots with a spatial lattice".into()))?;
    if g.dim() != 2 || mu > 1 {
        return Err(Error::Unsupported("H_μ residual is implemented for 1+1 with μ ∈ {0, 1}".into()));
    }
    if snapshots.iter().any(|s| !s.same_shape(first)) {
        return Err(Error::Usage("snapshots differ in shape".into()));
    }
    let dt = snapshots[1].time - snapshots[0].time;
    if !(dt > 0.0)
        || snapshots
            .windows(2)
            .any(|w| ((w[1].time - w[0].time) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(Error::Usage("snapshots must be equally spaced in time".into()));
    }
    let sigma = sigma_tensor(&g)?;
    let sig = g.signature();
    let gamma_mu = g.gamma_lower(mu);
    let s_mu0 = sigma.mixed(sig, mu, 0);
    let s_mu1 = sigma.mixed(sig, mu, 1);
    let i = C64::new(0.0, 1.0);

    let mut out = Vec::with_capacity(snapshots.len() - 2);
    for n in 1..snapshots.len() - 1 {
        let psi = &snapshots[n];
        let d_t = snapshots[n + 1].sub(&snapshots[n - 1]).scale(C64::new(0.5 / dt, 0.0));
        let d_x = spatial_derivative(psi, lat.dx);
        let lhs = if mu == 0 { d_t.scale(i) } else { d_x.scale(i) };
        let rhs = h
            .apply(psi)
            .spinor_mul(&gamma_mu)
            .sub(&d_t.spinor_mul(&s_mu0))
            .sub(&d_x.spinor_mul(&s_mu1));
        let r = lhs.sub(&rhs);
        let mut acc = 0.0;
        for s in 0..r.n_spinor() {
            for j in 0..r.n_x() {
                let line = r.line(s, j);
                for (k, z) in line.iter().enumerate().take(r.n_q() - 1).skip(1) {
                    acc += z.norm_sqr() * r.grid().weight(k);
                }
            }
        }
        out.push((psi.time, (acc * lat.dx).sqrt()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionScheme {
    MechanicalSchrodinger,
    Good,
    DiracLike,
}

impl DispersionScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            DispersionScheme::MechanicalSchrodinger => "mechanical_schrodinger",
            DispersionScheme::Good => "good",
            DispersionScheme::DiracLike => "dirac_like",
        }
    }

    pub const ALL: [DispersionScheme; 3] = [
        DispersionScheme::MechanicalSchrodinger,
        DispersionScheme::Good,
        DispersionScheme::DiracLike,
    ];
}

impl fmt::Display for DispersionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DispersionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mechanical_schrodinger" => Ok(Self::MechanicalSchrodinger),
            "good" => Ok(Self::Good),
            "dirac_like" => Ok(Self::DiracLike),
            _ => Err(Error::Config(format!(
                "unknown dispersion scheme `{s}` (mechanical_schrodinger | good | dirac_like)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub omega: C64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionRow {
    pub k: f64,
    pub roots: Vec<Root>,
    /// The characteristic polynomial vanishes identically: every ω solves it.
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub scheme: DispersionScheme,
    pub rows: Vec<DispersionRow>,
    /// Rest energy used for the 1+1 Dirac-like reduction, if any.
    pub mu: Option<f64>,
}

/// Roots of `a ω² + b ω + c = 0` with real coefficients.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> (Vec<Root>, bool) {
    let one = |w: C64| Root {
        omega: w,
        multiplicity: 1,
    };
    if a == 0.0 {
        if b == 0.0 {
            return (Vec::new(), c == 0.0);
        }
        return (vec![one(C64::new(-c / b, 0.0))], false);
    }
    let disc = b * b - 4.0 * a * c;
    if disc == 0.0 {
        return (
            vec![Root {
                omega: C64::new(-b / (2.0 * a), 0.0),
                multiplicity: 2,
            }],
            false,
        );
    }
    let sq = C64::new(disc, 0.0).sqrt();
    let mut r = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)];
    r.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    (r.into_iter().map(one).collect(), false)
}

/// Decomposes V as c0 + c2 φ² if possible.
fn even_quadratic(v: &crate::lagrangian::Polynomial) -> Option<(f64, f64)> {
    let mut c0 = 0.0;
    let mut c2 = 0.0;
    for (e, c) in v.terms() {
        match e[0] {
            0 => c0 = c,
            2 => c2 = c,
            _ => return None,
        }
    }
    Some((c0, c2))
}

/// Plane-wave frequencies of each scheme.
///
/// In mechanics `k` is the wavenumber of `exp(i(kq − ωt))` in field space
/// and V must be constant; the kinetic coefficient is `a = ½K⁻¹`:
///
/// * mechanical_schrodinger and dirac_like: `ω = a k² + V₀`
/// * good (`−∂²_tΨ = ĤΨ` with π̂ → −kω): `(1 − a k²) ω² − V₀ = 0`
///
/// In 1+1, dirac_like uses `k` as the spatial wavenumber of a mode with
/// `ĤΨ = μΨ`: `ω² = k² + μ²`. μ is `mu` when given, otherwise V₀ for a
/// constant potential or the lowest level `V₀ + √(a c₂)` of Ĥ for
/// `V = V₀ + c₂φ²` (with the default kinetic coefficient `a = K⁻¹`).
pub fn dispersion_table(
    scheme: DispersionScheme,
    l: &LagrangianSpec,
    k_list: &[f64],
    mu: Option<f64>,
) -> Result<DispersionTable> {
    if l.n_fields() != 1 {
        return Err(Error::Config("dispersion tables are computed for a single field".into()));
    }
    let mut ks = k_list.to_vec();
    ks.sort_by(f64::total_cmp);
    let k_inv = l.kinetic_inv()[(0, 0)];
    let (rows, mu_used) = match (l.dim(), scheme) {
        (1, _) => {
            let v0 = match l.potential().degree() {
                0 => l.potential().coefficient(&[0]),
                _ => {
                    return Err(Error::Config(format!(
                        "{scheme} plane waves in mechanics need a constant potential"
                    )))
                }
            };
            let a = 0.5 * k_inv;
            let rows = ks
                .iter()
                .map(|&k| {
                    let (roots, indeterminate) = match scheme {
                        DispersionScheme::Good => quadratic_roots(1.0 - a * k * k, 0.0, -v0),
                        _ => quadratic_roots(0.0, 1.0, -(a * k * k + v0)),
                    };
                    DispersionRow { k, roots, indeterminate }
                })
                .collect();
            (rows, None)
        }
        (2, DispersionScheme::DiracLike) => {
            let mu = match mu {
                Some(m) => m,
                None => match even_quadratic(l.potential()) {
                    Some((c0, 0.0)) => c0,
                    Some((c0, c2)) if c2 > 0.0 => c0 + (k_inv * c2).sqrt(),
                    _ => {
                        return Err(Error::Config(
                            "dirac_like 1+1 dispersion needs μ or a potential of the form V₀ + c₂φ² (c₂ ≥ 0)".into(),
                        ))
                    }
                },
            };
            let rows = ks
                .iter()
                .map(|&k| {
                    let (roots, indeterminate) = quadratic_roots(1.0, 0.0, -(k * k + mu * mu));
                    DispersionRow { k, roots, indeterminate }
                })
                .collect();
            (rows, Some(mu))
        }
        (d, s) => {
            return Err(Error::Config(format!(
                "dispersion for scheme {s} is not available in dim {d}"
            )))
        }
    };
    Ok(DispersionTable {
        scheme,
        rows,
        mu: mu_used,
    })
}

/// True when the two root sets (with multiplicity) differ beyond `tol`.
pub fn root_sets_differ(a: &DispersionRow, b: &DispersionRow, tol: f64) -> bool {
    if a.indeterminate || b.indeterminate {
        return a.indeterminate != b.indeterminate;
    }
    let expand = |r: &DispersionRow| -> Vec<C64> {
        r.roots
            .iter()
            .flat_map(|x| std::iter::repeat_n(x.omega, x.multiplicity as usize))
            .collect()
    };
    let (mut xa, mut xb) = (expand(a), expand(b));
    if xa.len() != xb.len() {
        return true;
    }
    let key = |x: &C64, y: &C64| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
    xa.sort_by(key);
    xb.sort_by(key);
    xa.iter().zip(&xb).any(|(x, y)| (x - y).norm() > tol)
}

impl DispersionTable {
    /// CSV rows `scheme,k,re,im,multiplicity` (no header). An indeterminate
    /// row is written with NaN frequencies and multiplicity 0.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            if row.indeterminate {
                s.push_str(&format!("{},{},NaN,NaN,0\n", self.scheme, Num(row.k)));
            }
            for r in &row.roots {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    self.scheme,
                    Num(row.k),
                    Num(r.omega.re),
                    Num(r.omega.im),
                    r.multiplicity
                ));
            }
        }
        s
    }
}

pub const DISPERSION_CSV_HEADER: &str = "scheme,k,re_omega,im_omega,multiplicity";
