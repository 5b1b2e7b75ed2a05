use std::f64::consts::TAU;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdqft::classical::Lattice1D;
use fdqft::clifford::{build_gamma_set, GammaSet, RepName};
use fdqft::diagnostics::{
    dispersion_table, h_mu_residual, norm_drift, positive_product, quadratic_roots, scalar_product,
    DispersionScheme,
};
use fdqft::evolution::{eigenstate_profile, evolve, EvolutionConfig, Stepper};
use fdqft::lagrangian::LagrangianSpec;
use fdqft::quantization::{assemble_hamiltonian, FieldGrid, Scheme, WaveFunction};
use fdqft::C64;

fn dirac_shape() -> (Arc<GammaSet>, FieldGrid, Lattice1D) {
    (
        Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap()),
        FieldGrid::new(8, -1.0, 1.0).unwrap(),
        Lattice1D::periodic(3, 1.5).unwrap(),
    )
}

fn field(values: &[(f64, f64)]) -> WaveFunction {
    let (g, grid, lat) = dirac_shape();
    let psi = WaveFunction::zeros(g, grid, Some(lat));
    psi.with_values(values.iter().map(|&(a, b)| C64::new(a, b)).collect())
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-10 * (1.0 + a.norm().max(b.norm()))
}

const LEN: usize = 2 * 8 * 3;

fn values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), LEN)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bar_product_is_sesquilinear_and_hermitian(
        a in values(), b in values(), c in values(),
        (xr, xi) in (-3.0..3.0f64, -3.0..3.0f64),
    ) {
        let (psi, phi, chi) = (field(&a), field(&b), field(&c));
        let x = C64::new(xr, xi);
        let lin = scalar_product(&psi, &phi.scale(x).add(&chi)).unwrap();
        prop_assert!(close(lin, x * scalar_product(&psi, &phi).unwrap() + scalar_product(&psi, &chi).unwrap()));
        let anti = scalar_product(&psi.scale(x), &phi).unwrap();
        prop_assert!(close(anti, x.conj() * scalar_product(&psi, &phi).unwrap()));
        prop_assert!(close(scalar_product(&phi, &psi).unwrap(), scalar_product(&psi, &phi).unwrap().conj()));
        // Hermitian products are real on the diagonal
        prop_assert!(scalar_product(&psi, &psi).unwrap().im.abs() < 1e-10);
        prop_assert!(positive_product(&psi, &psi).re >= 0.0);
    }
}

#[test]
fn scalar_rep_products_agree_and_levels_are_orthogonal() {
    let g = Arc::new(build_gamma_set(1, RepName::Scalar).unwrap());
    let l = LagrangianSpec::single(1, 1.0, "0.5*phi^2").unwrap();
    let grid = FieldGrid::oscillator_box(256, 1.0).unwrap();
    let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
    let psi0 = WaveFunction::mechanics(g.clone(), grid, &eigenstate_profile(&h, 0).unwrap().1).unwrap();
    let psi1 = WaveFunction::mechanics(g, grid, &eigenstate_profile(&h, 1).unwrap().1).unwrap();
    for (a, b) in [(&psi0, &psi0), (&psi0, &psi1), (&psi1, &psi1)] {
        assert!(close(scalar_product(a, b).unwrap(), positive_product(a, b)));
    }
    assert!(scalar_product(&psi0, &psi1).unwrap().norm() < 1e-10);
    assert!((scalar_product(&psi0, &psi0).unwrap().re - 1.0).abs() < 1e-10);
}

#[test]
fn mismatched_shapes_are_rejected() {
    let (g, grid, lat) = dirac_shape();
    let a = WaveFunction::zeros(g.clone(), grid, Some(lat));
    let b = WaveFunction::zeros(g, FieldGrid::new(9, -1.0, 1.0).unwrap(), Some(lat));
    assert!(scalar_product(&a, &b).is_err());
}

#[test]
fn zero_field_has_zero_drift() {
    let g = Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap());
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let grid = FieldGrid::new(16, -4.0, 4.0).unwrap();
    let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
    let psi = WaveFunction::zeros(g, grid, Some(Lattice1D::periodic(8, TAU).unwrap()));
    let cfg = EvolutionConfig::new(Scheme::DiracLike, Stepper::Rk4, 1e-3, 10);
    let tr = evolve(&psi, &h, &cfg).unwrap();
    for r in norm_drift(&tr).unwrap() {
        assert_eq!((r.norm_plus, r.norm_bar, r.d_norm_plus_dt, r.d_norm_bar_dt), (0.0, 0.0, 0.0, 0.0));
    }
}

/// Lattice plane wave `χ₀(φ) e^{i(kx − Et)} v` solving the 1+1 dirac_like
/// equation exactly with centred spatial differences.
fn plane_wave_snapshots(dt: f64, n: usize) -> (Vec<WaveFunction>, fdqft::quantization::HamiltonianOperator) {
    let g = Arc::new(build_gamma_set(2, RepName::Dirac1p1).unwrap());
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let grid = FieldGrid::new(48, -8.0, 8.0).unwrap();
    let lat = Lattice1D::periodic(32, TAU).unwrap();
    let h = assemble_hamiltonian(&l, &g, &grid).unwrap();
    let (mu, chi) = eigenstate_profile(&h, 0).unwrap();
    let k = 2.0;
    let kt = (k * lat.dx).sin() / lat.dx;
    let e = (mu * mu + kt * kt).sqrt();
    let v = [mu + e, kt];
    let snaps = (0..n)
        .map(|step| {
            let t = step as f64 * dt;
            let mut psi = WaveFunction::zeros(g.clone(), grid, Some(lat));
            psi.time = t;
            for s in 0..2 {
                for j in 0..lat.n_x {
                    let phase = C64::from_polar(v[s], k * lat.x(j) - e * t);
                    for (dst, c) in psi.line_mut(s, j).iter_mut().zip(&chi) {
                        *dst = phase * c;
                    }
                }
            }
            psi
        })
        .collect();
    (snaps, h)
}

#[test]
fn exact_plane_wave_satisfies_h_mu_decomposition() {
    let (snaps, h) = plane_wave_snapshots(1e-4, 6);
    let norm = positive_product(&snaps[0], &snaps[0]).re.sqrt();
    for mu in 0..2 {
        for (t, r) in h_mu_residual(&snaps, &h, mu).unwrap() {
            assert!(r / norm < 1e-6, "μ = {mu}, t = {t}: {r:e}");
        }
    }
    // what is left is the centred time difference, O(dt²)
    let at = |dt: f64| {
        let (snaps, h) = plane_wave_snapshots(dt, 3);
        h_mu_residual(&snaps, &h, 0).unwrap()[0].1
    };
    let ratio = at(1e-3) / at(5e-4);
    assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn random_field_violates_h_mu_decomposition() {
    let (mut snaps, h) = plane_wave_snapshots(1e-3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for psi in &mut snaps {
        for z in psi.values_mut() {
            *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let norm = positive_product(&snaps[2], &snaps[2]).re.sqrt();
    for (_, r) in h_mu_residual(&snaps, &h, 0).unwrap() {
        assert!(r / norm > 0.1, "{r} vs {norm}");
    }
}

#[test]
fn h_mu_needs_equal_spacing() {
    let (mut snaps, h) = plane_wave_snapshots(1e-3, 4);
    snaps[3].time += 5e-4;
    assert!(h_mu_residual(&snaps, &h, 0).is_err());
}

#[test]
fn dirac_like_1p1_is_relativistic() {
    for (potential, mu) in [("0.5*phi^2", None), ("0.5*phi^2", Some(1.3)), ("2", None)] {
        let l = LagrangianSpec::single(2, 1.0, potential).unwrap();
        let ks = [0.0, 0.5, 1.0, 2.0, 4.0];
        let table = dispersion_table(DispersionScheme::DiracLike, &l, &ks, mu).unwrap();
        let m = table.mu.unwrap();
        if let Some(given) = mu {
            assert_eq!(m, given);
        }
        for row in &table.rows {
            assert_eq!(row.roots.len(), 2);
            for r in &row.roots {
                let w2 = r.omega * r.omega;
                assert!((w2.re - row.k * row.k - m * m).abs() < 1e-12 && w2.im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mechanics_schemes_follow_their_relations() {
    let l = LagrangianSpec::single(1, 1.0, "0.75").unwrap();
    let ks = [0.5, 1.0, 2.0, 4.0];
    let schr = dispersion_table(DispersionScheme::MechanicalSchrodinger, &l, &ks, None).unwrap();
    let good = dispersion_table(DispersionScheme::Good, &l, &ks, None).unwrap();
    for (s, g) in schr.rows.iter().zip(&good.rows) {
        let k = s.k;
        assert_eq!(s.roots.len(), 1);
        assert!((s.roots[0].omega.re - (0.5 * k * k + 0.75)).abs() < 1e-12);
        for r in &g.roots {
            let res = (1.0 - 0.5 * k * k) * r.omega * r.omega - 0.75;
            assert!(res.norm() < 1e-12, "k = {k}: {res}");
        }
    }
    // 1 − k²/2 = 0 at k = √2 leaves no root for V₀ ≠ 0
    let at = dispersion_table(DispersionScheme::Good, &l, &[2f64.sqrt()], None).unwrap();
    assert!(at.rows[0].roots.is_empty() || at.rows[0].roots.iter().all(|r| r.omega.norm() > 1e6));
    assert!(dispersion_table(DispersionScheme::Good, &LagrangianSpec::single(1, 1.0, "phi^2").unwrap(), &ks, None).is_err());
}

#[test]
fn quadratic_roots_cover_degenerate_cases() {
    assert_eq!(quadratic_roots(0.0, 0.0, 0.0), (vec![], true));
    assert_eq!(quadratic_roots(0.0, 0.0, 1.0), (vec![], false));
    let (r, ind) = quadratic_roots(1.0, -2.0, 1.0);
    assert!(!ind && r.len() == 1 && r[0].multiplicity == 2 && (r[0].omega.re - 1.0).abs() < 1e-12);
    let (r, _) = quadratic_roots(1.0, 0.0, 4.0);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|x| x.omega.re.abs() < 1e-12 && (x.omega.im.abs() - 2.0).abs() < 1e-12));
}
