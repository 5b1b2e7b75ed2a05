//! Time stepping of `iΓ^μ ∂_μ Ψ = Ĥ Ψ` and imaginary-time ground states.
//!
//! Solving for the time derivative (Γ⁰ is invertible for every Clifford-type
//! set shipped here):
//!
//! ```text
//! ∂_tΨ = (Γ⁰)⁻¹ ( −i ĤΨ − Γ¹ ∂_xΨ )          (1+1)
//! ∂_tΨ = −i ĤΨ                               (mechanics, Γ⁰ = 1)
//! ```
//!
//! `∂_x` is the centred difference on the periodic lattice. RK4 is used for
//! both cases; Crank-Nicolson (exactly unitary) is offered for mechanics.
//! RK4 requires `dt · (‖Ĥ‖ + 1/dx) ≤ RK4_STABILITY` with the Gershgorin
//! bound for ‖Ĥ‖; the imaginary-axis stability limit of RK4 is 2√2.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::diagnostics;
use crate::quantization::{HamiltonianOperator, Scheme, WaveFunction};
use crate::{Error, Result, C64};

pub const RK4_STABILITY: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    Rk4,
    CrankNicolson,
}

impl Stepper {
    pub fn as_str(self) -> &'static str {
        match self {
            Stepper::Rk4 => "rk4",
            Stepper::CrankNicolson => "crank_nicolson",
        }
    }
}

impl fmt::Display for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stepper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Stepper::Rk4),
            "crank_nicolson" => Ok(Stepper::CrankNicolson),
            _ => Err(Error::Config(format!("unknown stepper `{s}` (rk4 | crank_nicolson)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub n_steps: usize,
    pub stepper: Stepper,
    pub output_stride: usize,
    /// Keep a copy of Ψ at every output time.
    pub store_snapshots: bool,
}

impl EvolutionConfig {
    pub fn new(scheme: Scheme, stepper: Stepper, dt: f64, n_steps: usize) -> Self {
        Self {
            scheme,
            dt,
            n_steps,
            stepper,
            output_stride: 1,
            store_snapshots: false,
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    pub fn snapshots(mut self, store: bool) -> Self {
        self.store_snapshots = store;
        self
    }
}

/// One output row of an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub norm_plus: f64,
    pub norm_bar: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub samples: Vec<TraceSample>,
    pub snapshots: Vec<WaveFunction>,
    /// Largest per-step relative change of ‖Ψ‖² seen during the run.
    pub max_step_norm_drift: f64,
}

impl EvolutionTrace {
    pub fn last_snapshot(&self) -> Option<&WaveFunction> {
        self.snapshots.last()
    }
}

struct Rhs {
    g0_inv: DMatrix<C64>,
    g1: Option<DMatrix<C64>>,
}

impl Rhs {
    fn new(psi: &WaveFunction) -> Result<Self> {
        let g = psi.gamma();
        let g0_inv = g
            .gamma(0)
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Unsupported(format!("Γ⁰ of {} is not invertible", g.rep())))?;
        let g1 = if g.dim() == 2 { Some(g.gamma(1).clone()) } else { None };
        Ok(Self { g0_inv, g1 })
    }

    fn eval(&self, h: &HamiltonianOperator, psi: &WaveFunction) -> WaveFunction {
        let minus_i = C64::new(0.0, -1.0);
        let mut acc = h.apply(psi).scale(minus_i);
        if let (Some(g1), Some(lat)) = (&self.g1, psi.lattice()) {
            let dx = spatial_derivative(psi, lat.dx);
            acc = acc.sub(&dx.spinor_mul(g1));
        }
        acc.spinor_mul(&self.g0_inv)
    }
}

/// Centred ∂_x on the periodic lattice.
pub fn spatial_derivative(psi: &WaveFunction, dx: f64) -> WaveFunction {
    let nx = psi.n_x();
    let mut out = psi.clone();
    for s in 0..psi.n_spinor() {
        for j in 0..nx {
            let (jp, jm) = ((j + 1) % nx, (j + nx - 1) % nx);
            for i in 0..psi.n_q() {
                let v = (psi.get(s, i, jp) - psi.get(s, i, jm)) / (2.0 * dx);
                let k = out.idx(s, i, j);
                out.values_mut()[k] = v;
            }
        }
    }
    out
}

/// Time derivative ∂_tΨ given by the equation of motion.
pub fn time_derivative(h: &HamiltonianOperator, psi: &WaveFunction) -> Result<WaveFunction> {
    Ok(Rhs::new(psi)?.eval(h, psi))
}

fn validate(psi: &WaveFunction, h: &HamiltonianOperator, cfg: &EvolutionConfig) -> Result<()> {
    let g = psi.gamma();
    if !g.rep().is_dirac_type() {
        return Err(Error::Unsupported(format!("evolution with the {} representation", g.rep())));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Config(format!("evolution.dt must be positive, got {}", cfg.dt)));
    }
    if cfg.output_stride == 0 {
        return Err(Error::Config("evolution.output_stride must be ≥ 1".into()));
    }
    if h.grid() != psi.grid() || h.n_spinor() != psi.n_spinor() {
        return Err(Error::Usage("Hamiltonian and wave function use different grids or spinor sizes".into()));
    }
    match g.dim() {
        1 if psi.lattice().is_none() => {}
        1 => return Err(Error::Config("mechanics wave functions carry no spatial lattice".into())),
        2 if psi.lattice().is_some() => {}
        2 => return Err(Error::Config("1+1 evolution needs a spatial lattice".into())),
        d => return Err(Error::Unsupported(format!("wave-function evolution in dim {d}"))),
    }
    if cfg.scheme == Scheme::MechanicalSchrodinger && h.scheme() != Scheme::MechanicalSchrodinger {
        return Err(Error::Unsupported(
            "mechanical_schrodinger needs dim 1 with the scalar representation".into(),
        ));
    }
    match cfg.stepper {
        Stepper::CrankNicolson if g.dim() != 1 => {
            return Err(Error::Unsupported("crank_nicolson is implemented for mechanics only".into()))
        }
        Stepper::CrankNicolson => {}
        Stepper::Rk4 => {
            let rho = h.spectral_bound() + psi.lattice().map_or(0.0, |l| 1.0 / l.dx);
            if cfg.dt * rho > RK4_STABILITY {
                return Err(Error::Config(format!(
                    "CFL violation: dt = {} exceeds {RK4_STABILITY}/(‖Ĥ‖ + 1/dx) = {}",
                    cfg.dt,
                    RK4_STABILITY / rho
                )));
            }
        }
    }
    Ok(())
}

fn axpy(y: &WaveFunction, a: f64, x: &WaveFunction) -> WaveFunction {
    y.with_values(y.values().iter().zip(x.values()).map(|(p, q)| p + q * a).collect())
}

fn rk4_step(rhs: &Rhs, h: &HamiltonianOperator, psi: &WaveFunction, dt: f64) -> WaveFunction {
    let k1 = rhs.eval(h, psi);
    let k2 = rhs.eval(h, &axpy(psi, 0.5 * dt, &k1));
    let k3 = rhs.eval(h, &axpy(psi, 0.5 * dt, &k2));
    let k4 = rhs.eval(h, &axpy(psi, dt, &k3));
    let vals = psi
        .values()
        .iter()
        .enumerate()
        .map(|(n, p)| {
            p + (k1.values()[n] + 2.0 * k2.values()[n] + 2.0 * k3.values()[n] + k4.values()[n]) * (dt / 6.0)
        })
        .collect();
    let mut out = psi.with_values(vals);
    out.time = psi.time + dt;
    out
}

/// Thomas algorithm for a constant-off-diagonal complex tridiagonal system.
fn solve_tridiagonal(diag: &[C64], off: C64, rhs: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Crank-Nicolson propagator `(1 + i dt Ĥ/2)⁻¹ (1 − i dt Ĥ/2)` on one line.
struct CrankNicolson {
    lhs_diag: Vec<C64>,
    lhs_off: C64,
    h: HamiltonianOperator,
    half: C64,
}

impl CrankNicolson {
    fn new(h: &HamiltonianOperator, dt: f64) -> Self {
        let (diag, off) = h.tridiagonal();
        let half = C64::new(0.0, 0.5 * dt);
        Self {
            lhs_diag: diag.iter().map(|d| 1.0 + half * d).collect(),
            lhs_off: half * off,
            h: h.clone(),
            half,
        }
    }

    fn step(&self, psi: &WaveFunction) -> WaveFunction {
        let mut out = psi.clone();
        let mut hl = vec![C64::new(0.0, 0.0); psi.n_q()];
        for s in 0..psi.n_spinor() {
            for j in 0..psi.n_x() {
                let line = psi.line(s, j);
                self.h.apply_line(line, &mut hl);
                let rhs: Vec<C64> = line.iter().zip(&hl).map(|(p, q)| p - self.half * q).collect();
                let next = solve_tridiagonal(&self.lhs_diag, self.lhs_off, &rhs);
                out.line_mut(s, j).copy_from_slice(&next);
            }
        }
        out.time = psi.time + 2.0 * self.half.im;
        out
    }
}

fn sample(h: &HamiltonianOperator, psi: &WaveFunction) -> TraceSample {
    let norm_plus = diagnostics::positive_product(psi, psi).re;
    let norm_bar = diagnostics::scalar_product(psi, psi).map(|z| z.re).unwrap_or(f64::NAN);
    let energy = diagnostics::positive_product(psi, &h.apply(psi)).re;
    TraceSample {
        norm_plus,
        norm_bar,
        energy,
    }
}

/// Runs the configured evolution from `psi0`, recording every
/// `output_stride` steps (and the initial state).
pub fn evolve(psi0: &WaveFunction, h: &HamiltonianOperator, cfg: &EvolutionConfig) -> Result<EvolutionTrace> {
    validate(psi0, h, cfg)?;
    let rhs = Rhs::new(psi0)?;
    let cn = (cfg.stepper == Stepper::CrankNicolson).then(|| CrankNicolson::new(h, cfg.dt));
    let mut trace = EvolutionTrace::default();
    let record = |trace: &mut EvolutionTrace, psi: &WaveFunction| {
        trace.times.push(psi.time);
        trace.samples.push(sample(h, psi));
        if cfg.store_snapshots {
            trace.snapshots.push(psi.clone());
        }
    };
    let mut psi = psi0.clone();
    record(&mut trace, &psi);
    let mut norm_prev = psi.norm_sqr();
    for n in 1..=cfg.n_steps {
        let next = match &cn {
            Some(cn) => cn.step(&psi),
            None => rk4_step(&rhs, h, &psi, cfg.dt),
        };
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: n,
                what: "non-finite wave function".into(),
            });
        }
        psi = next;
        psi.time = psi0.time + n as f64 * cfg.dt;
        let norm = psi.norm_sqr();
        if norm_prev > 0.0 {
            trace.max_step_norm_drift = trace.max_step_norm_drift.max(((norm - norm_prev) / norm_prev).abs());
        }
        norm_prev = norm;
        if n % cfg.output_stride == 0 || n == cfg.n_steps {
            record(&mut trace, &psi);
        }
    }
    if !cfg.store_snapshots {
        trace.snapshots.push(psi);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagTimeOptions {
    /// Imaginary-time step of the implicit (backward Euler) propagator.
    pub tau: f64,
    pub max_iter: usize,
}

impl Default for ImagTimeOptions {
    fn default() -> Self {
        Self {
            tau: 10.0,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub psi: WaveFunction,
    pub iterations: usize,
    /// Rayleigh quotient after each renormalized step.
    pub energy_history: Vec<f64>,
}

fn rayleigh(h: &HamiltonianOperator, line: &[C64]) -> f64 {
    let mut hl = vec![C64::new(0.0, 0.0); line.len()];
    h.apply_line(line, &mut hl);
    let num: f64 = line.iter().zip(&hl).map(|(a, b)| (a.conj() * b).re).sum();
    let den: f64 = line.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// Ground state of a mechanics Ĥ by imaginary-time propagation
/// `Ψ ← (1 + τ(Ĥ − V_min))⁻¹ Ψ`, renormalized each step, until the
/// Rayleigh quotient changes by less than `tol`.
pub fn ground_state_imaginary_time(
    h: &HamiltonianOperator,
    gamma: Arc<crate::clifford::GammaSet>,
    tol: f64,
    opts: ImagTimeOptions,
) -> Result<GroundState> {
    if h.scheme() != Scheme::MechanicalSchrodinger || h.n_spinor() != 1 {
        return Err(Error::Unsupported(
            "imaginary-time ground states are computed in mechanics (scalar representation) only".into(),
        ));
    }
    if !(tol > 0.0) || !(opts.tau > 0.0) {
        return Err(Error::Config("tolerance and τ must be positive".into()));
    }
    let grid = *h.grid();
    let shift = h.potential().iter().copied().fold(f64::INFINITY, f64::min);
    let (diag, off) = h.tridiagonal();
    let lhs: Vec<C64> = diag.iter().map(|d| C64::new(1.0 + opts.tau * (d - shift), 0.0)).collect();
    let lhs_off = C64::new(opts.tau * off, 0.0);

    let width = (grid.q_max() - grid.q_min()) / 8.0;
    let center = 0.5 * (grid.q_max() + grid.q_min()) + 0.1 * width;
    let mut line: Vec<C64> = grid
        .points()
        .iter()
        .map(|q| C64::new((-(q - center).powi(2) / (2.0 * width * width)).exp(), 0.0))
        .collect();
    let mut energy = rayleigh(h, &line);
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        line = solve_tridiagonal(&lhs, lhs_off, &line);
        let n = line.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        line.iter_mut().for_each(|z| *z /= n);
        let e = rayleigh(h, &line);
        history.push(e);
        if !e.is_finite() {
            return Err(Error::Divergence {
                step: it,
                what: "non-finite imaginary-time energy".into(),
            });
        }
        if (e - energy).abs() < tol {
            let mut psi = WaveFunction::mechanics(gamma, grid, &line)?;
            psi.normalize();
            return Ok(GroundState {
                energy: e,
                psi,
                iterations: it,
                energy_history: history,
            });
        }
        energy = e;
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        last_energy: energy,
    })
}

/// Normalized Gaussian `exp(−(q−c)²/(4σ²) + i k q)` (⟨q²⟩ − ⟨q⟩² = σ²).
pub fn gaussian_profile(grid: &crate::quantization::FieldGrid, center: f64, sigma: f64, k: f64) -> Vec<C64> {
    let mut v: Vec<C64> = grid
        .points()
        .iter()
        .map(|q| C64::from_polar((-(q - center).powi(2) / (4.0 * sigma * sigma)).exp(), k * q))
        .collect();
    let n = (0..v.len()).map(|i| v[i].norm_sqr() * grid.weight(i)).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// n-th eigenvector of the field block of Ĥ, normalized, with a positive
/// first significant entry.
pub fn eigenstate_profile(h: &HamiltonianOperator, n: usize) -> Result<(f64, Vec<C64>)> {
    let (vals, vecs) = h.eigen();
    if n >= vals.len() {
        return Err(Error::Usage(format!("eigenstate {n} out of range")));
    }
    let col = vecs.column(n);
    let pivot = col.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(1.0).signum();
    let grid = h.grid();
    let mut v: Vec<C64> = col.iter().map(|x| C64::new(x * pivot, 0.0)).collect();
    let norm = (0..v.len()).map(|i| v[i].norm_sqr() * grid.weight(i)).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    Ok((vals[n], v))
}
