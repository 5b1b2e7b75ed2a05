use std::f64::consts::{PI, TAU};

use fdqft::classical::{classical_energy, dw_evolve, euler_lagrange_oracle, l2_norm, ClassicalFieldState, Lattice1D};
use fdqft::lagrangian::LagrangianSpec;

fn lattice() -> Lattice1D {
    Lattice1D::periodic(256, TAU).unwrap()
}

fn max_dev(a: &ClassicalFieldState, b: &ClassicalFieldState) -> f64 {
    a.phi.iter().zip(&b.phi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_pair(l: &LagrangianSpec, s: &ClassicalFieldState, dt: f64, t_end: f64) -> (ClassicalFieldState, ClassicalFieldState) {
    let n = (t_end / dt).round() as usize;
    let dt = t_end / n as f64;
    (
        dw_evolve(l, s, dt, n, |_, _| {}).unwrap(),
        euler_lagrange_oracle(l, s, dt, n).unwrap(),
    )
}

#[test]
fn klein_gordon_frequency() {
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let lat = lattice();
    let s = ClassicalFieldState::from_fn(lat, |x| x.cos(), |_| 0.0).unwrap();
    let dt = lat.dx / 4.0;
    let mut prev = (0.0, 1.0);
    let mut quarter = None;
    dw_evolve(&l, &s, dt, 2000, |_, st| {
        if quarter.is_none() && st.phi[0] <= 0.0 {
            // linear interpolation of the first zero of φ(0, t) = cos(ωt)
            quarter = Some(prev.0 + dt * prev.1 / (prev.1 - st.phi[0]));
        }
        prev = (st.time, st.phi[0]);
    })
    .unwrap();
    let omega = PI / (2.0 * quarter.unwrap());
    let exact = 2.0f64.sqrt();
    assert!((omega / exact - 1.0).abs() < 1e-2, "ω = {omega}");
}

#[test]
fn free_scalar_matches_oracle() {
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let lat = lattice();
    let s = ClassicalFieldState::from_fn(lat, |x| x.cos(), |_| 0.0).unwrap();
    let (a, b) = run_pair(&l, &s, lat.dx / 4.0, 1.0);
    assert!(fdqft::classical::l2_distance(&a, &b) < 1e-6 * l2_norm(&a));
}

#[test]
fn small_quartic_matches_oracle() {
    let l = LagrangianSpec::single(2, 1.0, "0.25*phi^4").unwrap();
    let lat = lattice();
    let s = ClassicalFieldState::from_fn(lat, |x| 0.3 * x.cos(), |_| 0.0).unwrap();
    let (a, b) = run_pair(&l, &s, lat.dx / 4.0, 1.0);
    assert!(fdqft::classical::l2_distance(&a, &b) < 1e-5);
}

#[test]
fn oracle_deviation_is_second_order() {
    let lat = lattice();
    let cases = [
        (
            LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap(),
            ClassicalFieldState::from_fn(lat, |x| x.cos(), |x| 2.0f64.sqrt() * x.sin()).unwrap(),
        ),
        (
            LagrangianSpec::single(2, 1.0, "0.5*phi^2 + 0.25*phi^4").unwrap(),
            ClassicalFieldState::from_fn(lat, |x| x.cos(), |_| 0.0).unwrap(),
        ),
        (
            LagrangianSpec::single(2, 2.0, "0.3*phi^2 + 0.1*phi^3 + 0.05*phi^4").unwrap(),
            ClassicalFieldState::from_fn(lat, |x| 0.8 * (2.0 * x).sin(), |x| 0.2 * x.cos()).unwrap(),
        ),
    ];
    for (l, s) in &cases {
        let coarse = {
            let (a, b) = run_pair(l, s, lat.dx / 4.0, 1.0);
            max_dev(&a, &b)
        };
        let fine = {
            let (a, b) = run_pair(l, s, lat.dx / 8.0, 1.0);
            max_dev(&a, &b)
        };
        let order = (coarse / fine).log2();
        assert!((1.8..=2.2).contains(&order), "order {order} ({coarse:e} → {fine:e})");
    }
}

#[test]
fn free_scalar_energy_has_no_secular_drift() {
    let l = LagrangianSpec::single(2, 1.0, "0.5*phi^2").unwrap();
    let lat = lattice();
    let s = ClassicalFieldState::from_fn(lat, |x| x.cos(), |_| 0.0).unwrap();
    let t_end = 10.0;
    let n = (t_end / (lat.dx / 4.0)).ceil() as usize;
    let dt = t_end / n as f64;
    let e0 = classical_energy(&l, &s);
    let mut energies = vec![e0];
    dw_evolve(&l, &s, dt, n, |_, st| energies.push(classical_energy(&l, st))).unwrap();

    // the on-step energy oscillates at twice the field frequency
    let window = ((PI / 2.0f64.sqrt()) / dt).round() as usize;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let start = mean(&energies[..window]);
    let end = mean(&energies[energies.len() - window..]);
    let secular = ((end - start) / start).abs();
    let on_step = energies.iter().map(|e| ((e - e0) / e0).abs()).fold(0.0, f64::max);
    assert!(secular < 1e-6 * t_end, "period-averaged drift {secular:e}");
    assert!(on_step < 1e-4, "on-step oscillation {on_step:e}");
}
