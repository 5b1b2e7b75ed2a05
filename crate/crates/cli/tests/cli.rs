use std::path::PathBuf;
use std::process::{Command, Output};

fn fdqft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdqft")).args(args).output().unwrap()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gamma_dump_and_check() {
    let out = fdqft(&["gamma", "dump", "--dim", "2", "--rep", "dirac_1p1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v.is_object());

    let out = fdqft(&["gamma", "check", "--dim", "4", "--rep", "dirac_3p1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["sigma_reconstruction_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn unknown_rep_is_a_usage_error() {
    let out = fdqft(&["gamma", "dump", "--dim", "2", "--rep", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn legendre_eval_reports_zero_residual() {
    let out = fdqft(&["legendre", "eval", "--potential", "0.5*phi^2", "--dim", "2", "--phi", "0.3", "--dphi", "0.1,-0.4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["legendre_residual"].as_f64().unwrap().abs() < 1e-12);
    let out = fdqft(&["legendre", "eval", "--potential", "phi^2", "--phi", "0.3,1", "--dphi", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_are_listed_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(
        &path,
        "pipeline = \"quantum\"\n[lagrangian]\npotential = \"0.5*phi^2\"\n[gamma]\ndim = 1\nrep = \"scalar\"\n\
         [evolution]\nscheme = \"mechanical_schrodinger\"\nstepper = \"rk4\"\ndt = -1.0\nn_steps = 0\n\
         [initial]\nkind = \"gaussian\"\nsigma = 1.0\n",
    )
    .unwrap();
    let out = fdqft(&["--out", dir.path().join("o").to_str().unwrap(), "run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("evolution.dt") && err.contains("evolution.n_steps"), "{err}");
}

#[test]
fn kemmer_evolution_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kemmer.cfg");
    std::fs::write(
        &path,
        "pipeline = \"quantum\"\n[lagrangian]\npotential = \"0.5*phi^2\"\n[gamma]\ndim = 2\nrep = \"kemmer_spin0\"\n\
         [evolution]\nscheme = \"dirac_like\"\nstepper = \"rk4\"\ndt = 0.001\nn_steps = 5\n\
         [initial]\nkind = \"random\"\n",
    )
    .unwrap();
    let out = fdqft(&["--out", dir.path().join("o").to_str().unwrap(), "quantum", "evolve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_writes_manifest_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = fdqft(&["--quiet", "--out", d.to_str().unwrap(), "run", &config("ho_mechanics.cfg")]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    for f in manifest["files"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn diagnose_dispersion_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdqft(&["--out", dir.path().to_str().unwrap(), "diagnose", "dispersion", &config("free_particle.cfg")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert!(text.starts_with("scheme,k,re_omega,im_omega,multiplicity"));
}

#[test]
fn picture_check_prints_residuals() {
    let out = fdqft(&["picture", "check", "--n-max", "12", "--t", "1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["n_max"], 12);
    let h = v["heisenberg_residuals"].as_array().unwrap();
    assert_eq!(h.len(), 2);
    assert!(h.iter().all(|x| x.as_f64().unwrap() < 1e-10));
    let out = fdqft(&["--seed", "5", "picture", "check", "--n-max", "12", "--random", "--t", "1"]);
    assert!(out.status.success());
}
