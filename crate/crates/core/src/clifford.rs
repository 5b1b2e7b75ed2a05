//! Γ-matrix families and the derived Σ tensor.
//!
//! All matrices carry upper spacetime indices, `Γ^μ`, with the metric
//! `g = diag(+1, -1, ..., -1)`. Units are ħ = c = 1.
//!
//! Pinned representations:
//!
//! | rep            | dim  | size | matrices |
//! |----------------|------|------|----------|
//! | `scalar`       | 1    | 1×1  | Γ⁰ = \[1\] |
//! | `dirac_1p1`    | 2    | 2×2  | γ⁰ = diag(1, −1), γ¹ = \[\[0, 1\], \[−1, 0\]\] |
//! | `dirac_3p1`    | 4    | 4×4  | Dirac (standard) representation, γ⁰ = diag(I, −I), γ^k = \[\[0, σ_k\], \[−σ_k, 0\]\] |
//! | `kemmer_spin0` | 2, 4 | (dim+1)² | β^μ = E_{d,μ} + g^{μμ} E_{μ,d} with d = dim |
//!
//! The Kemmer matrices satisfy the trilinear relation
//! `β^μβ^νβ^λ + β^λβ^νβ^μ = g^{μν}β^λ + g^{λν}β^μ` instead of a Clifford
//! relation; their hermitizing matrix is `η⁰ = 2(β⁰)² − 1`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

/// Residual threshold for an identity to count as satisfied.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Diagonal metric with signature (+, −, …, −).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSignature {
    diag: Vec<f64>,
}

impl MetricSignature {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(Error::Config(format!("spacetime dimension must be in 1..=4, got {dim}")));
        }
        let mut diag = vec![-1.0; dim];
        diag[0] = 1.0;
        Ok(Self { diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// g^{μν} = g_{μν} for this diagonal ±1 metric.
    pub fn g(&self, mu: usize, nu: usize) -> f64 {
        if mu == nu {
            self.diag[mu]
        } else {
            0.0
        }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepName {
    Scalar,
    Dirac1p1,
    Dirac3p1,
    KemmerSpin0,
}

impl RepName {
    pub fn as_str(self) -> &'static str {
        match self {
            RepName::Scalar => "scalar",
            RepName::Dirac1p1 => "dirac_1p1",
            RepName::Dirac3p1 => "dirac_3p1",
            RepName::KemmerSpin0 => "kemmer_spin0",
        }
    }

    /// Clifford-type representations (everything except Kemmer).
    pub fn is_dirac_type(self) -> bool {
        !matches!(self, RepName::KemmerSpin0)
    }
}

impl fmt::Display for RepName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(RepName::Scalar),
            "dirac_1p1" => Ok(RepName::Dirac1p1),
            "dirac_3p1" => Ok(RepName::Dirac3p1),
            "kemmer_spin0" => Ok(RepName::KemmerSpin0),
            other => Err(Error::Config(format!(
                "unknown representation `{other}`; expected one of scalar, dirac_1p1, dirac_3p1, kemmer_spin0"
            ))),
        }
    }
}

/// Registry of supported (dim, representation) pairs.
pub const SUPPORTED: &[(usize, RepName)] = &[
    (1, RepName::Scalar),
    (2, RepName::Dirac1p1),
    (4, RepName::Dirac3p1),
    (2, RepName::KemmerSpin0),
    (4, RepName::KemmerSpin0),
];

fn supported_list() -> String {
    SUPPORTED
        .iter()
        .map(|(d, r)| format!("({d}, {r})"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    signature: MetricSignature,
    rep: RepName,
    matrices: Vec<CMatrix>,
    gamma0_hermitizer: CMatrix,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn from_rows(n: usize, rows: &[C64]) -> CMatrix {
    DMatrix::from_row_slice(n, n, rows)
}

fn pauli() -> [CMatrix; 3] {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        from_rows(2, &[o, l, l, o]),
        from_rows(2, &[o, -i, i, o]),
        from_rows(2, &[l, o, o, -l]),
    ]
}

fn dirac_1p1() -> Vec<CMatrix> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    vec![from_rows(2, &[l, o, o, -l]), from_rows(2, &[o, l, -l, o])]
}

fn dirac_3p1() -> Vec<CMatrix> {
    let id2 = CMatrix::identity(2, 2);
    let mut g0 = CMatrix::zeros(4, 4);
    g0.view_mut((0, 0), (2, 2)).copy_from(&id2);
    g0.view_mut((2, 2), (2, 2)).copy_from(&(-id2));
    let mut out = vec![g0];
    for s in pauli() {
        let mut gk = CMatrix::zeros(4, 4);
        gk.view_mut((0, 2), (2, 2)).copy_from(&s);
        gk.view_mut((2, 0), (2, 2)).copy_from(&(-s));
        out.push(gk);
    }
    out
}

fn kemmer_spin0(sig: &MetricSignature) -> Vec<CMatrix> {
    let d = sig.dim();
    (0..d)
        .map(|mu| {
            let mut b = CMatrix::zeros(d + 1, d + 1);
            b[(d, mu)] = c(1.0, 0.0);
            b[(mu, d)] = c(sig.g(mu, mu), 0.0);
            b
        })
        .collect()
}

/// Builds one of the pinned representations.
pub fn build_gamma_set(dim: usize, rep: RepName) -> Result<GammaSet> {
    if !SUPPORTED.contains(&(dim, rep)) {
        return Err(Error::Config(format!(
            "unsupported (dim, rep) pair ({dim}, {rep}); supported: {}",
            supported_list()
        )));
    }
    let signature = MetricSignature::new(dim)?;
    let matrices = match rep {
        RepName::Scalar => vec![CMatrix::identity(1, 1)],
        RepName::Dirac1p1 => dirac_1p1(),
        RepName::Dirac3p1 => dirac_3p1(),
        RepName::KemmerSpin0 => kemmer_spin0(&signature),
    };
    let gamma0_hermitizer = match rep {
        RepName::KemmerSpin0 => {
            let b0 = &matrices[0];
            let n = b0.nrows();
            (b0 * b0) * c(2.0, 0.0) - CMatrix::identity(n, n)
        }
        _ => matrices[0].clone(),
    };
    Ok(GammaSet {
        signature,
        rep,
        matrices,
        gamma0_hermitizer,
    })
}

impl GammaSet {
    /// Assembles a set from explicit matrices, e.g. to test a candidate or
    /// corrupted representation. Shapes are checked, algebra is not.
    pub fn from_parts(rep: RepName, matrices: Vec<CMatrix>, gamma0_hermitizer: CMatrix) -> Result<Self> {
        let signature = MetricSignature::new(matrices.len())?;
        let n = gamma0_hermitizer.nrows();
        if matrices.iter().any(|m| m.nrows() != n || m.ncols() != n) || gamma0_hermitizer.ncols() != n {
            return Err(Error::Usage("all matrices must share one square size".into()));
        }
        Ok(Self {
            signature,
            rep,
            matrices,
            gamma0_hermitizer,
        })
    }

    pub fn signature(&self) -> &MetricSignature {
        &self.signature
    }

    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn rep(&self) -> RepName {
        self.rep
    }

    /// Matrix size n of each Γ^μ.
    pub fn size(&self) -> usize {
        self.gamma0_hermitizer.nrows()
    }

    pub fn gamma(&self, mu: usize) -> &CMatrix {
        &self.matrices[mu]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// The matrix used to form Ψ̄ = Ψ†γ⁰.
    pub fn gamma0_hermitizer(&self) -> &CMatrix {
        &self.gamma0_hermitizer
    }

    /// Γ with a lowered index, Γ_μ = g_{μμ} Γ^μ.
    pub fn gamma_lower(&self, mu: usize) -> CMatrix {
        &self.matrices[mu] * c(self.signature.g(mu, mu), 0.0)
    }

    /// Identity matrix of the representation size.
    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.size(), self.size())
    }

    /// Exports the representation with complex entries as `[re, im]` pairs, row-major.
    pub fn to_json(&self) -> serde_json::Value {
        fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
                .collect()
        }
        serde_json::json!({
            "rep": self.rep.as_str(),
            "dim": self.dim(),
            "size": self.size(),
            "signature": self.signature.diag(),
            "matrices": self.matrices.iter().map(rows).collect::<Vec<_>>(),
            "gamma0_hermitizer": rows(&self.gamma0_hermitizer),
        })
    }
}

/// Σ^{μν} = (i/2)[γ^μ, γ^ν], so that γ^μγ^ν = g^{μν} − iΣ^{μν}.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTensor {
    dim: usize,
    components: Vec<CMatrix>,
}

impl SigmaTensor {
    pub fn get(&self, mu: usize, nu: usize) -> &CMatrix {
        &self.components[mu * self.dim + nu]
    }

    /// Σ_μ^ν = g_{μμ} Σ^{μν}.
    pub fn mixed(&self, g: &MetricSignature, mu: usize, nu: usize) -> CMatrix {
        self.get(mu, nu) * c(g.g(mu, mu), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn sigma_tensor(g: &GammaSet) -> Result<SigmaTensor> {
    if !g.rep.is_dirac_type() {
        return Err(Error::Unsupported(format!(
            "Σ tensor requires a Clifford-type representation, got {}",
            g.rep
        )));
    }
    let d = g.dim();
    let half_i = c(0.0, 0.5);
    let mut components = Vec::with_capacity(d * d);
    for mu in 0..d {
        for nu in 0..d {
            let (a, b) = (g.gamma(mu), g.gamma(nu));
            components.push((a * b - b * a) * half_i);
        }
    }
    Ok(SigmaTensor { dim: d, components })
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rep: String,
    pub checks: Vec<IdentityCheck>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Tests the defining algebra of `g`: anticommutators and (γ⁰)² = 1 for
/// Clifford-type sets, the trilinear relation for Kemmer sets.
pub fn check_representation(g: &GammaSet) -> ValidationReport {
    let d = g.dim();
    let sig = g.signature();
    let id = g.identity();
    let mut checks = Vec::new();
    if g.rep.is_dirac_type() {
        for mu in 0..d {
            for nu in mu..d {
                let (a, b) = (g.gamma(mu), g.gamma(nu));
                let r = a * b + b * a - &id * c(2.0 * sig.g(mu, nu), 0.0);
                checks.push(IdentityCheck {
                    name: format!("{{G{mu},G{nu}}} = 2g{mu}{nu}"),
                    max_residual: max_abs(&r),
                });
            }
        }
        let h = g.gamma0_hermitizer();
        checks.push(IdentityCheck {
            name: "g0*g0 = I".into(),
            max_residual: max_abs(&(h * h - &id)),
        });
    } else {
        for mu in 0..d {
            for nu in 0..d {
                for la in 0..d {
                    let (a, b, e) = (g.gamma(mu), g.gamma(nu), g.gamma(la));
                    let lhs = a * b * e + e * b * a;
                    let rhs = e * c(sig.g(mu, nu), 0.0) + a * c(sig.g(la, nu), 0.0);
                    checks.push(IdentityCheck {
                        name: format!("kemmer({mu},{nu},{la})"),
                        max_residual: max_abs(&(lhs - rhs)),
                    });
                }
            }
        }
    }
    let max_residual = checks.iter().map(|c| c.max_residual).fold(0.0, f64::max);
    ValidationReport {
        rep: g.rep.to_string(),
        pass: checks.iter().all(|c| c.max_residual < IDENTITY_TOL),
        checks,
        max_residual,
    }
}

/// Largest ‖γ^μγ^ν + iΣ^{μν} − g^{μν}‖∞ over all index pairs.
pub fn sigma_reconstruction_residual(g: &GammaSet, sigma: &SigmaTensor) -> f64 {
    let d = g.dim();
    let id = g.identity();
    let mut worst: f64 = 0.0;
    for mu in 0..d {
        for nu in 0..d {
            let r = g.gamma(mu) * g.gamma(nu) + sigma.get(mu, nu) * c(0.0, 1.0)
                - &id * c(g.signature().g(mu, nu), 0.0);
            worst = worst.max(max_abs(&r));
        }
    }
    worst
}
