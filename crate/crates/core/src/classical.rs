//! Classical De Donder-Weyl evolution of one scalar field on a periodic
//! 1D lattice (dim = 2), or of one mechanical coordinate (dim = 1).
//!
//! Time is the evolution direction. With `H = ½K⁻¹(π⁰π⁰ − π¹π¹) + V` the
//! spatial DW equation `∂_xφ = ∂H/∂π¹` fixes `π¹ = −K ∂_xφ`, so the free
//! data are `(φ, π⁰)` and
//!
//! ```text
//! ∂_tφ  = ∂H/∂π⁰ = K⁻¹ π⁰
//! ∂_tπ⁰ = −∂H/∂φ − ∂_xπ¹
//! ```
//!
//! π¹ lives on the links `j + ½` (a centred difference of φ) and its
//! divergence is the centred difference back onto the sites. The step is
//! the symmetric drift-kick-drift Störmer-Verlet splitting.

use crate::lagrangian::{JetPoint, LagrangianSpec, PhasePoint};
use crate::{Error, Result};

/// Largest allowed |dt|/dx on a spatial lattice.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice1D {
    pub n_x: usize,
    pub dx: f64,
}

impl Lattice1D {
    pub fn new(n_x: usize, dx: f64) -> Result<Self> {
        if n_x == 0 || !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Config(format!("lattice needs n_x ≥ 1 and dx > 0 (got {n_x}, {dx})")));
        }
        Ok(Self { n_x, dx })
    }

    /// `n_x` sites on a periodic box of length `length`.
    pub fn periodic(n_x: usize, length: f64) -> Result<Self> {
        Self::new(n_x, length / n_x as f64)
    }

    /// A single site, for mechanics.
    pub fn point() -> Self {
        Self { n_x: 1, dx: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.n_x as f64 * self.dx
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn next(&self, j: usize) -> usize {
        (j + 1) % self.n_x
    }

    pub fn prev(&self, j: usize) -> usize {
        (j + self.n_x - 1) % self.n_x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalFieldState {
    pub lattice: Lattice1D,
    pub phi: Vec<f64>,
    pub pi0: Vec<f64>,
    pub time: f64,
}

impl ClassicalFieldState {
    pub fn new(lattice: Lattice1D, phi: Vec<f64>, pi0: Vec<f64>) -> Result<Self> {
        if phi.len() != lattice.n_x || pi0.len() != lattice.n_x {
            return Err(Error::Usage(format!(
                "state arrays must have n_x = {} entries",
                lattice.n_x
            )));
        }
        if phi.iter().chain(&pi0).any(|v| !v.is_finite()) {
            return Err(Error::Config("initial state has non-finite entries".into()));
        }
        Ok(Self {
            lattice,
            phi,
            pi0,
            time: 0.0,
        })
    }

    /// Initial data sampled from functions of x.
    pub fn from_fn(lattice: Lattice1D, phi: impl Fn(f64) -> f64, pi0: impl Fn(f64) -> f64) -> Result<Self> {
        let xs: Vec<f64> = (0..lattice.n_x).map(|j| lattice.x(j)).collect();
        Self::new(lattice, xs.iter().map(|&x| phi(x)).collect(), xs.iter().map(|&x| pi0(x)).collect())
    }

    fn is_finite(&self) -> bool {
        self.phi.iter().chain(&self.pi0).all(|v| v.is_finite())
    }
}

fn check_model(l: &LagrangianSpec, s: &ClassicalFieldState) -> Result<()> {
    if l.n_fields() != 1 {
        return Err(Error::Unsupported("the classical integrator handles a single scalar field".into()));
    }
    match l.dim() {
        1 if s.lattice.n_x == 1 => Ok(()),
        1 => Err(Error::Config("mechanics (dim = 1) needs a single-site lattice".into())),
        2 => Ok(()),
        d => Err(Error::Unsupported(format!("classical lattice integration in dim {d}"))),
    }
}

fn check_dt(l: &LagrangianSpec, s: &ClassicalFieldState, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::Config(format!("time step must be finite and nonzero, got {dt}")));
    }
    if l.dim() == 2 && dt.abs() > CFL_LIMIT * s.lattice.dx {
        return Err(Error::Config(format!(
            "CFL violation: |dt| = {} > {CFL_LIMIT}·dx = {}",
            dt.abs(),
            CFL_LIMIT * s.lattice.dx
        )));
    }
    Ok(())
}

/// ∂_tπ⁰ at every site: −∂H/∂φ − ∂_xπ¹.
fn pi0_rate(l: &LagrangianSpec, s: &ClassicalFieldState) -> Vec<f64> {
    let lat = s.lattice;
    let n = lat.n_x;
    // π¹ on links j+½ from the spatial DW equation
    let pi1: Vec<f64> = if l.dim() == 2 {
        (0..n)
            .map(|j| {
                let dxphi = (s.phi[lat.next(j)] - s.phi[j]) / lat.dx;
                l.covariant_momenta(&JetPoint {
                    phi: vec![0.5 * (s.phi[j] + s.phi[lat.next(j)])],
                    dphi: vec![0.0, dxphi],
                })[1]
            })
            .collect()
    } else {
        vec![0.0; n]
    };
    (0..n)
        .map(|j| {
            let (_, div) = l.dw_rhs(&PhasePoint {
                phi: vec![s.phi[j]],
                pi: vec![s.pi0[j], 0.0][..l.dim()].to_vec(),
            });
            let dx_pi1 = if l.dim() == 2 {
                (pi1[j] - pi1[lat.prev(j)]) / lat.dx
            } else {
                0.0
            };
            div[0] - dx_pi1
        })
        .collect()
}

fn drift(l: &LagrangianSpec, s: &mut ClassicalFieldState, h: f64) {
    for j in 0..s.lattice.n_x {
        let mut pi = vec![0.0; l.dim()];
        pi[0] = s.pi0[j];
        let (dphi, _) = l.dw_rhs(&PhasePoint {
            phi: vec![s.phi[j]],
            pi,
        });
        s.phi[j] += h * dphi[0];
    }
}

fn step_in_place(l: &LagrangianSpec, s: &mut ClassicalFieldState, dt: f64, step: usize) -> Result<()> {
    drift(l, s, 0.5 * dt);
    let rate = pi0_rate(l, s);
    for (p, r) in s.pi0.iter_mut().zip(rate) {
        *p += dt * r;
    }
    drift(l, s, 0.5 * dt);
    s.time += dt;
    if !s.is_finite() {
        return Err(Error::Divergence {
            step,
            what: "non-finite classical field".into(),
        });
    }
    Ok(())
}

/// One drift-kick-drift step. Negative `dt` runs the step backwards.
pub fn dw_step(l: &LagrangianSpec, s: &ClassicalFieldState, dt: f64) -> Result<ClassicalFieldState> {
    check_model(l, s)?;
    check_dt(l, s, dt)?;
    let mut out = s.clone();
    step_in_place(l, &mut out, dt, 1)?;
    Ok(out)
}

/// `n_steps` DW steps; `observe` sees the state after every step.
pub fn dw_evolve(
    l: &LagrangianSpec,
    s: &ClassicalFieldState,
    dt: f64,
    n_steps: usize,
    mut observe: impl FnMut(usize, &ClassicalFieldState),
) -> Result<ClassicalFieldState> {
    check_model(l, s)?;
    check_dt(l, s, dt)?;
    let mut cur = s.clone();
    for n in 1..=n_steps {
        step_in_place(l, &mut cur, dt, n)?;
        observe(n, &cur);
    }
    Ok(cur)
}

/// Independent oracle: the second-order field equation
/// `K ∂_t²φ = K ∂_x²φ − V′(φ)` on the same lattice, stepped with the
/// two-level leapfrog `φⁿ⁺¹ = 2φⁿ − φⁿ⁻¹ + dt² a(φⁿ)` (Taylor start).
/// No momenta are used; the returned π⁰ is `K` times the centred velocity.
pub fn euler_lagrange_oracle(
    l: &LagrangianSpec,
    s: &ClassicalFieldState,
    dt: f64,
    n_steps: usize,
) -> Result<ClassicalFieldState> {
    check_model(l, s)?;
    check_dt(l, s, dt)?;
    let k = l.kinetic()[(0, 0)];
    let lat = s.lattice;
    let spatial = l.dim() == 2;
    let accel = |phi: &[f64]| -> Vec<f64> {
        (0..lat.n_x)
            .map(|j| {
                let lap = if spatial {
                    (phi[lat.next(j)] - 2.0 * phi[j] + phi[lat.prev(j)]) / (lat.dx * lat.dx)
                } else {
                    0.0
                };
                lap - l.potential().partial(0, &[phi[j]]) / k
            })
            .collect()
    };
    let v0: Vec<f64> = s.pi0.iter().map(|p| p / k).collect();
    let a0 = accel(&s.phi);
    let mut prev = s.phi.clone();
    let mut cur: Vec<f64> = (0..lat.n_x)
        .map(|j| s.phi[j] + dt * v0[j] + 0.5 * dt * dt * a0[j])
        .collect();
    if n_steps == 0 {
        return Ok(s.clone());
    }
    for n in 1..=n_steps {
        let a = accel(&cur);
        let next: Vec<f64> = (0..lat.n_x)
            .map(|j| 2.0 * cur[j] - prev[j] + dt * dt * a[j])
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: n,
                what: "non-finite field in Euler-Lagrange oracle".into(),
            });
        }
        prev = std::mem::replace(&mut cur, next);
    }
    // prev holds φ at step n_steps, cur at n_steps + 1; rebuild the step before
    let a = accel(&prev);
    let before: Vec<f64> = (0..lat.n_x)
        .map(|j| 2.0 * prev[j] - cur[j] + dt * dt * a[j])
        .collect();
    let pi0 = (0..lat.n_x)
        .map(|j| k * (cur[j] - before[j]) / (2.0 * dt))
        .collect();
    Ok(ClassicalFieldState {
        lattice: lat,
        phi: prev,
        pi0,
        time: s.time + dt * n_steps as f64,
    })
}

/// Σ_sites Θ⁰₀ · dx (weight 1 for mechanics), with ∂_xφ on the links.
pub fn classical_energy(l: &LagrangianSpec, s: &ClassicalFieldState) -> f64 {
    let lat = s.lattice;
    let k_inv = l.kinetic_inv()[(0, 0)];
    let weight = if l.dim() == 2 { lat.dx } else { 1.0 };
    (0..lat.n_x)
        .map(|j| {
            let mut dphi = vec![k_inv * s.pi0[j]];
            if l.dim() == 2 {
                dphi.push((s.phi[lat.next(j)] - s.phi[j]) / lat.dx);
            }
            l.energy_momentum_tensor(&JetPoint {
                phi: vec![s.phi[j]],
                dphi,
            })[0]
                * weight
        })
        .sum()
}

/// sqrt(Σ dx |a − b|²) over the field values.
pub fn l2_distance(a: &ClassicalFieldState, b: &ClassicalFieldState) -> f64 {
    let w = a.lattice.dx;
    a.phi
        .iter()
        .zip(&b.phi)
        .map(|(x, y)| (x - y).powi(2) * w)
        .sum::<f64>()
        .sqrt()
}

pub fn l2_norm(s: &ClassicalFieldState) -> f64 {
    s.phi.iter().map(|x| x * x * s.lattice.dx).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free(m: f64) -> LagrangianSpec {
        LagrangianSpec::single(2, 1.0, &format!("{}*phi^2", 0.5 * m * m)).unwrap()
    }

    #[test]
    fn static_minimum_unchanged() {
        let l = LagrangianSpec::single(2, 1.0, "(phi - 0.5)^2").unwrap();
        let lat = Lattice1D::periodic(32, 2.0 * PI).unwrap();
        let s = ClassicalFieldState::from_fn(lat, |_| 0.5, |_| 0.0).unwrap();
        let out = dw_evolve(&l, &s, 0.05, 100, |_, _| {}).unwrap();
        assert!(out.phi.iter().all(|p| (p - 0.5).abs() < 1e-15));
        assert!(out.pi0.iter().all(|p| p.abs() < 1e-15));
        assert_eq!(classical_energy(&l, &out), 0.0);
    }

    #[test]
    fn mechanics_oscillator_one_period() {
        let omega = 1.0;
        let l = LagrangianSpec::single(1, 1.0, "0.5*phi^2").unwrap();
        let s = ClassicalFieldState::new(Lattice1D::point(), vec![1.0], vec![0.0]).unwrap();
        let dt = 1e-4;
        let n = (2.0 * PI / omega / dt).round() as usize;
        let out = dw_evolve(&l, &s, dt, n, |_, _| {}).unwrap();
        let t = n as f64 * dt;
        assert!((out.phi[0] - (omega * t).cos()).abs() < 1e-6);
    }

    #[test]
    fn mechanics_energy_value() {
        let l = LagrangianSpec::single(1, 1.0, "2*phi^2").unwrap();
        let s = ClassicalFieldState::new(Lattice1D::point(), vec![1.0], vec![0.0]).unwrap();
        assert!((classical_energy(&l, &s) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cfl_and_dt_validation() {
        let l = free(1.0);
        let lat = Lattice1D::periodic(64, 2.0 * PI).unwrap();
        let s = ClassicalFieldState::from_fn(lat, |x| x.cos(), |_| 0.0).unwrap();
        assert!(matches!(dw_step(&l, &s, 0.6 * lat.dx), Err(Error::Config(_))));
        assert!(matches!(dw_step(&l, &s, 0.0), Err(Error::Config(_))));
        assert!(euler_lagrange_oracle(&l, &s, lat.dx, 1).is_err());
    }

    #[test]
    fn divergence_reports_step() {
        // unbounded-below potential blows up quickly
        let l = LagrangianSpec::single(1, 1.0, "-1*phi^6").unwrap();
        let s = ClassicalFieldState::new(Lattice1D::point(), vec![2.0], vec![0.0]).unwrap();
        match dw_evolve(&l, &s, 0.1, 10_000, |_, _| {}) {
            Err(Error::Divergence { step, .. }) => assert!(step > 0 && step < 10_000),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_data_stays_zero_in_oracle() {
        let l = free(1.0);
        let lat = Lattice1D::periodic(16, 2.0 * PI).unwrap();
        let s = ClassicalFieldState::from_fn(lat, |_| 0.0, |_| 0.0).unwrap();
        let out = euler_lagrange_oracle(&l, &s, 0.1, 50).unwrap();
        assert!(out.phi.iter().chain(&out.pi0).all(|v| *v == 0.0));
    }

    #[test]
    fn time_reversal() {
        let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2 + 0.25*phi^4").unwrap();
        let lat = Lattice1D::periodic(64, 2.0 * PI).unwrap();
        let s = ClassicalFieldState::from_fn(lat, |x| 0.3 * x.sin() + 0.1, |x| 0.2 * (2.0 * x).cos()).unwrap();
        let dt = lat.dx / 4.0;
        let fwd = dw_evolve(&l, &s, dt, 200, |_, _| {}).unwrap();
        let back = dw_evolve(&l, &fwd, -dt, 200, |_, _| {}).unwrap();
        let err = s
            .phi
            .iter()
            .zip(&back.phi)
            .chain(s.pi0.iter().zip(&back.pi0))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
