use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use fdqft::classical::Lattice1D;
use fdqft::clifford::{build_gamma_set, GammaSet, RepName};
use fdqft::diagnostics::positive_product;
use fdqft::evolution::{eigenstate_profile, evolve, gaussian_profile, EvolutionConfig, Stepper};
use fdqft::lagrangian::LagrangianSpec;
use fdqft::quantization::{assemble_hamiltonian, FieldGrid, HamiltonianOperator, Scheme, WaveFunction};
use fdqft::{Error, C64};

fn mechanics(potential: &str, grid: FieldGrid) -> (Arc<GammaSet>, HamiltonianOperator) {
    let g = Arc::new(build_gamma_set(1, RepName::Scalar).unwrap());
    let l = LagrangianSpec::single(1, 1.0, potential).unwrap();
    let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
    (g, h)
}

fn distance(a: &WaveFunction, b: &WaveFunction) -> f64 {
    let d = a.sub(b);
    positive_product(&d, &d).re.sqrt()
}

#[test]
fn eigenstate_is_stationary() {
    let grid = FieldGrid::oscillator_box(256, 1.0).unwrap();
    let (g, h) = mechanics("0.5*phi^2", grid);
    let psi0 = WaveFunction::mechanics(g, grid, &eigenstate_profile(&h, 0).unwrap().1).unwrap();
    let cfg = EvolutionConfig::new(Scheme::MechanicalSchrodinger, Stepper::CrankNicolson, 0.01, 1000)
        .stride(50)
        .snapshots(true);
    let tr = evolve(&psi0, &h, &cfg).unwrap();
    assert_eq!(tr.snapshots.len(), tr.times.len());
    for psi in &tr.snapshots {
        let overlap = positive_product(psi, &psi0).norm_sqr();
        assert!(overlap >= 1.0 - 1e-6, "t = {}: {overlap}", psi.time);
    }
}

#[test]
fn free_gaussian_spreads() {
    let grid = FieldGrid::new(512, -12.0, 12.0).unwrap();
    let (g, h) = mechanics("0", grid);
    let sigma0 = 1.0;
    let psi0 = WaveFunction::mechanics(g, grid, &gaussian_profile(&grid, 0.0, sigma0, 0.0)).unwrap();
    let cfg = EvolutionConfig::new(Scheme::MechanicalSchrodinger, Stepper::CrankNicolson, 0.002, 1000)
        .stride(100)
        .snapshots(true);
    let tr = evolve(&psi0, &h, &cfg).unwrap();
    for psi in &tr.snapshots {
        let t = psi.time;
        let var: f64 = (0..grid.n_q())
            .map(|i| psi.get(0, i, 0).norm_sqr() * grid.q(i).powi(2) * grid.weight(i))
            .sum();
        let exact = sigma0 * sigma0 + t * t / (4.0 * sigma0 * sigma0);
        assert!((var / exact - 1.0).abs() < 1e-2, "t = {t}: {var} vs {exact}");
    }
}

#[test]
fn crank_nicolson_conserves_norm_and_energy() {
    let grid = FieldGrid::oscillator_box(256, 1.0).unwrap();
    let (g, h) = mechanics("0.5*phi^2 + 0.1*phi^4", grid);
    let psi0 = WaveFunction::mechanics(g, grid, &gaussian_profile(&grid, 1.0, 0.8, 0.3)).unwrap();
    let cfg = EvolutionConfig::new(Scheme::MechanicalSchrodinger, Stepper::CrankNicolson, 0.01, 500).stride(10);
    let tr = evolve(&psi0, &h, &cfg).unwrap();
    assert!(tr.max_step_norm_drift < 1e-10);
    let e0 = tr.samples[0].energy;
    let t_end = *tr.times.last().unwrap();
    for s in &tr.samples {
        assert!(((s.energy - e0) / e0).abs() < 1e-8 * t_end, "{} vs {e0}", s.energy);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let grid = FieldGrid::oscillator_box(128, 1.0).unwrap();
    let (g, h) = mechanics("0.5*phi^2", grid);
    let psi0 = WaveFunction::mechanics(g, grid, &gaussian_profile(&grid, 1.0, 0.6, 0.5)).unwrap();
    let run = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let cfg = EvolutionConfig::new(Scheme::MechanicalSchrodinger, Stepper::Rk4, dt, n);
        evolve(&psi0, &h, &cfg).unwrap().snapshots.pop().unwrap()
    };
    let reference = run(0.01 / 32.0);
    let (coarse, fine) = (run(0.01), run(0.005));
    let factor = distance(&coarse, &reference) / distance(&fine, &reference);
    assert!((12.0..=20.0).contains(&factor), "factor {factor}");
}

/// Naive DFT of a periodic profile; `sign` −1 forward, +1 inverse (unscaled).
fn dft(v: &[C64], sign: f64) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|m| {
            (0..n)
                .map(|j| v[j] * C64::from_polar(1.0, sign * TAU * (m * j) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Free 1+1 Dirac propagation of a spinor profile: each lattice mode evolves
/// under `μσ_z + k̃σ_x` with the centred-difference wavenumber `k̃ = sin(k dx)/dx`.
fn dirac_oracle(u: [Vec<C64>; 2], mu: f64, lat: &Lattice1D, t: f64) -> [Vec<C64>; 2] {
    let n = lat.n_x;
    let (up, down) = (dft(&u[0], -1.0), dft(&u[1], -1.0));
    let mut out = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
    for m in 0..n {
        let k = TAU * m as f64 / lat.length();
        let kt = (k * lat.dx).sin() / lat.dx;
        let e = (mu * mu + kt * kt).sqrt();
        let (c, s) = ((e * t).cos(), (e * t).sin() / e);
        let i = C64::new(0.0, 1.0);
        // exp(−i h t) = cos(Et) − i sin(Et) h / E
        out[0][m] = c * up[m] - i * s * (mu * up[m] + kt * down[m]);
        out[1][m] = c * down[m] - i * s * (kt * up[m] - mu * down[m]);
    }
    let scale = 1.0 / n as f64;
    [
        dft(&out[0], 1.0).into_iter().map(|z| z * scale).collect(),
        dft(&out[1], 1.0).into_iter().map(|z| z * scale).collect(),
    ]
}

#[test]
fn dirac_like_reduces_to_free_dirac() {
    let g = Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap());
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let grid = FieldGrid::new(48, -8.0, 8.0).unwrap();
    let lat = Lattice1D::periodic(64, TAU).unwrap();
    let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
    let (mu, chi) = eigenstate_profile(&h, 0).unwrap();

    let u0: [Vec<C64>; 2] = [
        (0..lat.n_x)
            .map(|j| C64::new((-(lat.x(j) - PI).powi(2) / 0.5).exp(), 0.0))
            .collect(),
        (0..lat.n_x)
            .map(|j| C64::from_polar(0.5, 2.0 * lat.x(j)) + C64::new(0.0, 0.3 * lat.x(j).cos()))
            .collect(),
    ];
    let build = |u: &[Vec<C64>; 2]| {
        let mut psi = WaveFunction::zeros(g.clone(), grid, Some(lat));
        for s in 0..2 {
            for j in 0..lat.n_x {
                for (dst, c) in psi.line_mut(s, j).iter_mut().zip(&chi) {
                    *dst = u[s][j] * c;
                }
            }
        }
        psi
    };
    let psi0 = build(&u0);
    let norm = positive_product(&psi0, &psi0).re.sqrt();
    let cfg = EvolutionConfig::new(Scheme::DiracLike, Stepper::Rk4, 0.01, 100);
    let numeric = evolve(&psi0, &h, &cfg).unwrap().snapshots.pop().unwrap();
    let exact = build(&dirac_oracle(u0, mu, &lat, 1.0));
    let err = distance(&numeric, &exact) / norm;
    assert!(err < 1e-4, "relative L2 error {err:e}");
}

#[test]
fn kemmer_and_bad_inputs_are_rejected() {
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let grid = FieldGrid::new(16, -4.0, 4.0).unwrap();
    let lat = Lattice1D::periodic(8, TAU).unwrap();
    let kemmer = Arc::new(build_gamma_set(2, RepName::KemmerSpin0).unwrap());
    let h = assemble_hamiltonian(&l, &build_gamma_set(2, RepName::Dirac1p1).unwrap(), &grid).unwrap();
    let psi = WaveFunction::zeros(kemmer, grid, Some(lat));
    let cfg = EvolutionConfig::new(Scheme::DiracLike, Stepper::Rk4, 1e-3, 1);
    assert!(matches!(evolve(&psi, &h, &cfg), Err(Error::Unsupported(_))));

    let (g, h) = mechanics("0.5*phi^2", grid);
    let mut psi = WaveFunction::mechanics(g, grid, &gaussian_profile(&grid, 0.0, 1.0, 0.0)).unwrap();
    psi.values_mut()[3] = C64::new(f64::NAN, 0.0);
    let cfg = EvolutionConfig::new(Scheme::MechanicalSchrodinger, Stepper::CrankNicolson, 1e-3, 5);
    assert!(matches!(evolve(&psi, &h, &cfg), Err(Error::Divergence { step: 1, .. })));
}
