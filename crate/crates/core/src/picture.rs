//! Heisenberg and Schrödinger pictures on a truncated single-mode Fock space.
//!
//! The complex oscillator `L = a*(iȧ − a)` has covariant Hamiltonian
//! `H = a*a`, quantized as the number operator. With `P₀ = H` the picture
//! identities become
//!
//! ```text
//! e^{iHt} O e^{−iHt} = O_H(t),   dO_H/dt = i[H, O_H]
//! Ψ_S(t) = e^{−iHt} Ψ_H,         i ∂_t Ψ_S = H Ψ_S
//! ```
//!
//! The sign in `Ψ_S` is the one for which the Schrödinger equation holds with
//! `+H` on the right. Truncation at `n_max` only spoils `[a, a†] = 1` in the
//! last row and column, so residuals are measured on the protected block
//! `n < n_max − 2`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result, C64};

type CMat = DMatrix<C64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockTruncation {
    n_max: usize,
    a: CMat,
    h: CMat,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::Config(format!("n_max must be ≥ 2, got {n_max}")));
        }
        let n = n_max + 1;
        let a = CMat::from_fn(n, n, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let h = a.adjoint() * &a;
        Ok(Self { n_max, a, h })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn a_dagger(&self) -> CMat {
        self.a.adjoint()
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    /// `a + a†`.
    pub fn quadrature(&self) -> CMat {
        &self.a + self.a.adjoint()
    }

    /// Size of the block `n < n_max − 2` free of truncation effects.
    pub fn protected(&self) -> usize {
        self.n_max - 2
    }

    /// `e^{−iHs}` from the eigendecomposition of the (real symmetric) H.
    pub fn propagator(&self, s: f64) -> CMat {
        let eig = SymmetricEigen::new(self.h.map(|z| z.re));
        let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let d = CMat::from_diagonal(&DVector::from_iterator(
            self.dim(),
            eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * s)),
        ));
        &v * d * v.transpose()
    }

    /// ‖[a, a†] − 1‖ (Frobenius) on the protected block.
    pub fn commutator_residual(&self) -> f64 {
        let ad = self.a.adjoint();
        let c = &self.a * &ad - &ad * &self.a;
        let p = self.protected();
        block_norm(&(c - CMat::identity(self.dim(), self.dim())), p)
    }
}

fn block_norm(m: &CMat, p: usize) -> f64 {
    m.view((0, 0), (p, p)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn heisenberg_rhs(h: &CMat, o: &CMat) -> CMat {
    (h * o - o * h) * C64::new(0.0, 1.0)
}

pub const HEISENBERG_ODE_STEP: f64 = 0.1;
pub const HEISENBERG_ODE_ORDER: usize = 20;

/// Integrates `dO/dt = i[H, O]` with a truncated Taylor series of order
/// [`HEISENBERG_ODE_ORDER`] per step, each term one more commutator.
/// Accurate while `|E_m − E_n|·step` stays of order one.
pub fn heisenberg_ode(h: &CMat, o: &CMat, t: f64, step: f64) -> CMat {
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let dt = t / n as f64;
    let mut x = o.clone();
    for _ in 0..n {
        let mut term = x.clone();
        for k in 1..=HEISENBERG_ODE_ORDER {
            term = heisenberg_rhs(h, &term) * C64::new(dt / k as f64, 0.0);
            x += &term;
        }
    }
    x
}

/// ‖e^{iHt} O e^{−iHt} − O_H(t)‖ on the protected block, with `O_H` from
/// [`heisenberg_ode`].
pub fn heisenberg_translation_check(f: &FockTruncation, o: &CMat, t: f64) -> f64 {
    let u = f.propagator(t);
    let conj = u.adjoint() * o * &u;
    let ode = heisenberg_ode(f.h(), o, t, HEISENBERG_ODE_STEP);
    block_norm(&(conj - ode), f.protected())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PictureCheckReport {
    pub n_max: usize,
    pub dt: f64,
    pub t_values: Vec<f64>,
    /// Translation residual for `O = a + a†` at each time.
    pub heisenberg_residuals: Vec<f64>,
    /// ‖i D_t Ψ_S − HΨ_S‖ with the centred difference D_t of step `dt`.
    pub schrodinger_residuals: Vec<f64>,
}

fn schrodinger_state(f: &FockTruncation, psi0: &DVector<C64>, t: f64) -> DVector<C64> {
    f.propagator(t) * psi0
}

/// Builds `Ψ_S(t) = e^{−iHt}ψ₀` and measures how well it solves
/// `i∂_tΨ_S = HΨ_S` under a centred time difference of step `dt`.
pub fn schrodinger_picture_check(
    f: &FockTruncation,
    psi0: &DVector<C64>,
    t_values: &[f64],
    dt: f64,
) -> Result<PictureCheckReport> {
    if psi0.len() != f.dim() {
        return Err(Error::Usage(format!("ψ₀ has {} entries, expected {}", psi0.len(), f.dim())));
    }
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Usage(format!("ψ₀ must be normalized (‖ψ₀‖ = {norm})")));
    }
    let quad = f.quadrature();
    let mut hres = Vec::with_capacity(t_values.len());
    let mut sres = Vec::with_capacity(t_values.len());
    for &t in t_values {
        hres.push(heisenberg_translation_check(f, &quad, t));
        let plus = schrodinger_state(f, psi0, t + dt);
        let minus = schrodinger_state(f, psi0, t - dt);
        let mid = schrodinger_state(f, psi0, t);
        let dpsi = (plus - minus) * C64::new(0.0, 0.5 / dt);
        sres.push((dpsi - f.h() * mid).norm());
    }
    Ok(PictureCheckReport {
        n_max: f.n_max(),
        dt,
        t_values: t_values.to_vec(),
        heisenberg_residuals: hres,
        schrodinger_residuals: sres,
    })
}

/// Normalized `Σ c_n |n⟩` from the listed amplitudes (rest zero).
pub fn fock_state(f: &FockTruncation, amplitudes: &[C64]) -> Result<DVector<C64>> {
    if amplitudes.len() > f.dim() {
        return Err(Error::Usage("more amplitudes than Fock levels".into()));
    }
    let mut v = DVector::from_element(f.dim(), C64::new(0.0, 0.0));
    v.rows_mut(0, amplitudes.len()).copy_from_slice(amplitudes);
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::Usage("zero state".into()));
    }
    Ok(v / C64::new(n, 0.0))
}

/// Seeded random normalized state over all levels.
pub fn random_state(f: &FockTruncation, seed: u64) -> DVector<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..f.dim())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    fock_state(f, &amps).expect("random amplitudes are not all zero")
}
