//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Each export returns a JSON string; the page parses it and draws on a
//! canvas. The `*_json` functions are the same computations as plain Rust
//! so they can be tested natively.

use std::sync::Arc;

use serde_json::json;
use wasm_bindgen::prelude::*;

use fdqft::classical::{classical_energy, dw_evolve, euler_lagrange_oracle, l2_distance, ClassicalFieldState, Lattice1D};
use fdqft::clifford::{build_gamma_set, RepName};
use fdqft::diagnostics::{dispersion_table, DispersionScheme};
use fdqft::evolution::{ground_state_imaginary_time, ImagTimeOptions};
use fdqft::lagrangian::LagrangianSpec;
use fdqft::quantization::{assemble_hamiltonian, FieldGrid};
use fdqft::{Error, Result};

fn js_err(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn check_count(name: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if (lo..=hi).contains(&n) {
        Ok(())
    } else {
        Err(Error::Usage(format!("{name} must be in [{lo}, {hi}], got {n}")))
    }
}

/// Plane-wave frequencies of the three schemes in mechanics, for
/// `n_k` wavenumbers in `[0, k_max]`. The potential must be constant.
pub fn dispersion_json(potential: &str, k_max: f64, n_k: usize) -> Result<String> {
    check_count("n_k", n_k, 2, 2000)?;
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::Usage(format!("k_max must be positive, got {k_max}")));
    }
    let l = LagrangianSpec::single(1, 1.0, potential)?;
    let ks: Vec<f64> = (0..n_k).map(|i| k_max * i as f64 / (n_k - 1) as f64).collect();
    let mut schemes = serde_json::Map::new();
    for scheme in DispersionScheme::ALL {
        let table = dispersion_table(scheme, &l, &ks, None)?;
        let rows: Vec<_> = table
            .rows
            .iter()
            .map(|r| {
                json!({
                    "k": r.k,
                    "indeterminate": r.indeterminate,
                    "roots": r.roots.iter().map(|x| [x.omega.re, x.omega.im, x.multiplicity as f64]).collect::<Vec<_>>(),
                })
            })
            .collect();
        schemes.insert(scheme.as_str().to_string(), json!(rows));
    }
    Ok(json!({ "k": ks, "schemes": schemes }).to_string())
}

/// Lowest levels and eigenfunctions of `Ĥ = −½∂² + ½ω²φ²` on the default
/// box, plus the imaginary-time ground-state energy.
pub fn oscillator_json(omega: f64, n_q: usize, n_levels: usize) -> Result<String> {
    check_count("n_q", n_q, 16, 1024)?;
    check_count("n_levels", n_levels, 1, 12)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Usage(format!("ω must be positive, got {omega}")));
    }
    let g = Arc::new(build_gamma_set(1, RepName::Scalar)?);
    let l = LagrangianSpec::single(1, 1.0, &format!("{}*phi^2", 0.5 * omega * omega))?;
    let grid = FieldGrid::oscillator_box(n_q, omega)?;
    let h = assemble_hamiltonian(&l, &g, &grid)?;
    let (vals, vecs) = h.eigen();
    let n = n_levels.min(vals.len());
    let scale = 1.0 / grid.dq().sqrt();
    let states: Vec<Vec<f64>> = (0..n).map(|k| vecs.column(k).iter().map(|v| v * scale).collect()).collect();
    let gs = ground_state_imaginary_time(&h, g, 1e-12, ImagTimeOptions::default())?;
    Ok(json!({
        "q": grid.points(),
        "potential": h.potential(),
        "levels": &vals[..n],
        "exact": (0..n).map(|k| omega * (k as f64 + 0.5)).collect::<Vec<_>>(),
        "states": states,
        "ground_state_energy": gs.energy,
        "ground_state_iterations": gs.iterations,
    })
    .to_string())
}

/// Classical 1+1 evolution of `φ = A cos(kx)` (at rest or travelling) on a
/// periodic lattice of length 2π, sampled at `n_frames` times.
pub fn classical_json(
    potential: &str,
    amplitude: f64,
    wavenumber: f64,
    travelling: bool,
    n_x: usize,
    t_end: f64,
    n_frames: usize,
) -> Result<String> {
    check_count("n_x", n_x, 8, 2048)?;
    check_count("n_frames", n_frames, 2, 400)?;
    if !(t_end > 0.0 && t_end <= 100.0) {
        return Err(Error::Usage(format!("t_end must be in (0, 100], got {t_end}")));
    }
    let l = LagrangianSpec::single(2, 1.0, potential)?;
    let lat = Lattice1D::periodic(n_x, std::f64::consts::TAU)?;
    let omega = (wavenumber * wavenumber + 2.0 * l.potential().coefficient(&[2])).max(0.0).sqrt();
    let v = if travelling { amplitude * omega } else { 0.0 };
    let s0 = ClassicalFieldState::from_fn(lat, |x| amplitude * (wavenumber * x).cos(), |x| v * (wavenumber * x).sin())?;
    let n_steps = ((t_end / (lat.dx / 4.0)).ceil() as usize).max(n_frames - 1);
    let dt = t_end / n_steps as f64;
    let stride = n_steps as f64 / (n_frames - 1) as f64;
    let mut frames = vec![json!({ "t": 0.0, "phi": s0.phi, "energy": classical_energy(&l, &s0) })];
    let mut next = 1usize;
    let last = dw_evolve(&l, &s0, dt, n_steps, |n, st| {
        if next < n_frames && n as f64 >= next as f64 * stride - 1e-9 {
            frames.push(json!({ "t": st.time, "phi": st.phi, "energy": classical_energy(&l, st) }));
            next += 1;
        }
    })?;
    let oracle = euler_lagrange_oracle(&l, &s0, dt, n_steps)?;
    Ok(json!({
        "x": (0..n_x).map(|j| lat.x(j)).collect::<Vec<_>>(),
        "dt": dt,
        "frames": frames,
        "oracle_deviation": l2_distance(&last, &oracle),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn dispersion(potential: &str, k_max: f64, n_k: usize) -> std::result::Result<String, JsValue> {
    dispersion_json(potential, k_max, n_k).map_err(js_err)
}

#[wasm_bindgen]
pub fn oscillator(omega: f64, n_q: usize, n_levels: usize) -> std::result::Result<String, JsValue> {
    oscillator_json(omega, n_q, n_levels).map_err(js_err)
}

#[wasm_bindgen]
pub fn classical(
    potential: &str,
    amplitude: f64,
    wavenumber: f64,
    travelling: bool,
    n_x: usize,
    t_end: f64,
    n_frames: usize,
) -> std::result::Result<String, JsValue> {
    classical_json(potential, amplitude, wavenumber, travelling, n_x, t_end, n_frames).map_err(js_err)
}
