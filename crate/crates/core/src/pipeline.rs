//! Config files and the file-producing pipelines behind the command line.
//!
//! A config is a small TOML document:
//!
//! ```toml
//! pipeline = "quantum"        # or "classical"
//! seed = 7
//!
//! [lagrangian]
//! n_fields = 1
//! kinetic = [1.0]             # row-major K
//! potential = "0.5*phi^2"
//!
//! [gamma]
//! dim = 1
//! rep = "scalar"
//!
//! [field_grid]                # quantum only
//! n_q = 256
//! q_min = -12.0
//! q_max = 12.0
//!
//! [lattice]                   # 1+1 only
//! n_x = 64
//! length = 6.283185307179586
//!
//! [evolution]
//! scheme = "mechanical_schrodinger"
//! stepper = "crank_nicolson"
//! dt = 0.01
//! n_steps = 1000
//! output_stride = 10
//!
//! [initial]
//! kind = "gaussian"
//! center = 1.0
//! sigma = 0.7
//!
//! [diagnostics]
//! reports = ["norms", "groundstate"]
//! ```
//!
//! Every problem found is reported, not just the first. Outputs are CSV
//! (time series) and JSON (matrices, snapshots) plus `manifest.json`.
//! Numbers are printed with the shortest round-trip representation, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::classical::{
    classical_energy, dw_evolve, euler_lagrange_oracle, l2_distance, l2_norm, ClassicalFieldState, Lattice1D,
};
use crate::clifford::{build_gamma_set, GammaSet, RepName};
use crate::diagnostics::{self, DispersionScheme, DISPERSION_CSV_HEADER};
use crate::evolution::{
    eigenstate_profile, evolve, gaussian_profile, ground_state_imaginary_time, EvolutionConfig, EvolutionTrace,
    ImagTimeOptions, Stepper,
};
use crate::lagrangian::{LagrangianSpec, Polynomial};
use crate::quantization::{assemble_hamiltonian_with, FieldGrid, HamiltonianOperator, KineticNormalization, Scheme, WaveFunction};
use crate::{Error, Num, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Report {
    Norms,
    Hmu,
    Dispersion,
    GroundState,
    Levels,
    Width,
    Hamiltonian,
    Snapshot,
    Energy,
    Oracle,
}

impl Report {
    pub fn as_str(self) -> &'static str {
        match self {
            Report::Norms => "norms",
            Report::Hmu => "hmu",
            Report::Dispersion => "dispersion",
            Report::GroundState => "groundstate",
            Report::Levels => "levels",
            Report::Width => "width",
            Report::Hamiltonian => "hamiltonian",
            Report::Snapshot => "snapshot",
            Report::Energy => "energy",
            Report::Oracle => "oracle",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        use Report::*;
        [Norms, Hmu, Dispersion, GroundState, Levels, Width, Hamiltonian, Snapshot, Energy, Oracle]
            .into_iter()
            .find(|r| r.as_str() == s)
    }

    fn pipeline(self) -> Pipeline {
        match self {
            Report::Energy | Report::Oracle => Pipeline::Classical,
            _ => Pipeline::Quantum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// n-th eigenvector of the field block of Ĥ (mechanics).
    Eigenstate { n: usize },
    /// Field-space Gaussian with ⟨Δq²⟩ = σ² and momentum k (mechanics).
    Gaussian { center: f64, sigma: f64, k: f64 },
    /// Imaginary-time ground state (mechanics).
    GroundState,
    /// Field eigenstate n times a spinor times a Gaussian envelope in x (1+1).
    Packet {
        n: usize,
        center_x: f64,
        width_x: f64,
        wavenumber: f64,
        spinor: Vec<C64>,
    },
    /// Seeded uniform noise, normalized.
    Random,
    /// Classical `φ = A cos(kx)`, at rest or travelling with `ω² = k² + 2c₂/K`.
    Wave { amplitude: f64, wavenumber: f64, travelling: bool },
    /// Classical Gaussian bump at rest.
    Bump { amplitude: f64, center: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub reports: Vec<Report>,
    pub k_values: Vec<f64>,
    pub mu: Option<f64>,
    pub ground_state_tol: f64,
    pub n_levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub seed: u64,
    pub lagrangian: LagrangianSpec,
    pub rep: Option<RepName>,
    pub normalization: KineticNormalization,
    pub field_grid: FieldGrid,
    pub lattice: Option<Lattice1D>,
    pub evolution: Option<EvolutionConfig>,
    pub initial: InitialData,
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Debug)]
enum Problem {
    Config(String),
    Unsupported(String),
}

#[derive(Default)]
struct Collector {
    problems: Vec<Problem>,
}

impl Collector {
    fn bad(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.problems.push(Problem::Config(format!("{path}: {msg}")));
    }

    fn unsupported(&mut self, msg: impl Into<String>) {
        self.problems.push(Problem::Unsupported(msg.into()));
    }

    fn table<'t>(&mut self, root: &'t Table, name: &str) -> Option<&'t Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.bad(name, "expected a [section]");
                None
            }
        }
    }

    fn known(&mut self, t: &Table, section: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                let path = if section.is_empty() { k.clone() } else { format!("{section}.{k}") };
                self.bad(&path, format!("unknown key (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn f64(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.bad(&format!("{path}.{key}"), "expected a number");
                None
            }
        }
    }

    fn int(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<i64> {
        match t?.get(key)? {
            Value::Integer(i) => Some(*i),
            _ => {
                self.bad(&format!("{path}.{key}"), "expected an integer");
                None
            }
        }
    }

    fn count(&mut self, t: Option<&Table>, path: &str, key: &str, min: i64) -> Option<usize> {
        let v = self.int(t, path, key)?;
        if v < min {
            self.bad(&format!("{path}.{key}"), format!("must be ≥ {min}, got {v}"));
            return None;
        }
        Some(v as usize)
    }

    fn str<'t>(&mut self, t: Option<&'t Table>, path: &str, key: &str) -> Option<&'t str> {
        match t?.get(key)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                self.bad(&format!("{path}.{key}"), "expected a quoted string");
                None
            }
        }
    }

    fn list<T>(
        &mut self,
        t: Option<&Table>,
        path: &str,
        key: &str,
        item: impl Fn(&Value) -> Option<T>,
        what: &str,
    ) -> Option<Vec<T>> {
        let full = format!("{path}.{key}");
        match t?.get(key)? {
            Value::Array(a) => {
                let parsed: Option<Vec<T>> = a.iter().map(item).collect();
                if parsed.is_none() {
                    self.bad(&full, format!("expected a list of {what}"));
                }
                parsed
            }
            _ => {
                self.bad(&full, format!("expected a list of {what}"));
                None
            }
        }
    }

    fn pos(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<f64> {
        let path = format!("{section}.{key}");
        match self.f64(t, section, key) {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            Some(x) => {
                self.bad(&path, format!("must be positive, got {x}"));
                None
            }
            None => None,
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn syntax_error(text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::Syntax {
        line,
        message: e.message().to_string(),
    }
}

/// Parses and validates a config, reporting every violated constraint.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = toml::from_str(text).map_err(|e| syntax_error(text, e))?;
    let mut c = Collector::default();
    c.known(
        &root,
        "",
        &[
            "pipeline", "seed", "lagrangian", "gamma", "field_grid", "lattice", "evolution", "initial", "diagnostics",
        ],
    );
    let top = Some(&root);
    let pipeline = match c.str(top, "", "pipeline") {
        Some("quantum") | None => Pipeline::Quantum,
        Some("classical") => Pipeline::Classical,
        Some(other) => {
            c.bad("pipeline", format!("unknown pipeline `{other}` (quantum | classical)"));
            Pipeline::Quantum
        }
    };
    let seed = match c.int(top, "", "seed") {
        Some(s) if s >= 0 => s as u64,
        Some(s) => {
            c.bad("seed", format!("must be non-negative, got {s}"));
            0
        }
        None => 0,
    };

    // [gamma]
    let gamma = c.table(&root, "gamma");
    if let Some(t) = gamma {
        c.known(t, "gamma", &["dim", "rep", "normalization"]);
    }
    let dim = c.count(gamma, "gamma", "dim", 1).unwrap_or(1);
    let rep = c.str(gamma, "gamma", "rep").and_then(|s| match s.parse::<RepName>() {
        Ok(r) => Some(r),
        Err(e) => {
            c.bad("gamma.rep", e);
            None
        }
    });
    let normalization = c
        .str(gamma, "gamma", "normalization")
        .and_then(|s| match s.parse::<KineticNormalization>() {
            Ok(n) => Some(n),
            Err(e) => {
                c.bad("gamma.normalization", e);
                None
            }
        })
        .unwrap_or_default();

    // [lagrangian]
    let lag = c.table(&root, "lagrangian");
    if lag.is_none() {
        c.bad("lagrangian", "missing section");
    }
    if let Some(t) = lag {
        c.known(t, "lagrangian", &["n_fields", "kinetic", "potential"]);
    }
    let n_fields = c.count(lag, "lagrangian", "n_fields", 1).unwrap_or(1);
    let kinetic = c
        .list(lag, "lagrangian", "kinetic", number, "numbers")
        .unwrap_or_else(|| identity(n_fields));
    let potential = c.str(lag, "lagrangian", "potential").unwrap_or("0");
    let lagrangian = match Polynomial::parse(potential, n_fields) {
        Ok(p) => match LagrangianSpec::new(n_fields, dim, kinetic, p) {
            Ok(l) => Some(l),
            Err(e) => {
                c.bad("lagrangian", e);
                None
            }
        },
        Err(e) => {
            c.bad("lagrangian.potential", e);
            None
        }
    };

    // [field_grid]
    let fg = c.table(&root, "field_grid");
    if let Some(t) = fg {
        c.known(t, "field_grid", &["n_q", "q_min", "q_max"]);
    }
    let n_q = c.count(fg, "field_grid", "n_q", 3).unwrap_or(256);
    let q_min = c.f64(fg, "field_grid", "q_min").unwrap_or(-12.0);
    let q_max = c.f64(fg, "field_grid", "q_max").unwrap_or(12.0);
    let field_grid = FieldGrid::new(n_q, q_min, q_max).map_err(|e| c.bad("field_grid", e)).ok();

    // [lattice]
    let lt = c.table(&root, "lattice");
    if let Some(t) = lt {
        c.known(t, "lattice", &["n_x", "length"]);
    }
    let lattice = if dim == 2 {
        let n_x = c.count(lt, "lattice", "n_x", 3).unwrap_or(64);
        let length = c
            .pos(lt, "lattice", "length")
            .unwrap_or(std::f64::consts::TAU);
        Lattice1D::periodic(n_x, length).map_err(|e| c.bad("lattice", e)).ok()
    } else {
        if lt.is_some() {
            c.bad("lattice", "only used when gamma.dim = 2");
        }
        None
    };

    // [evolution]
    let ev = c.table(&root, "evolution");
    let evolution = ev.and_then(|t| {
        let allowed: &[&str] = match pipeline {
            Pipeline::Quantum => &["scheme", "stepper", "dt", "n_steps", "output_stride"],
            Pipeline::Classical => &["dt", "n_steps", "output_stride"],
        };
        c.known(t, "evolution", allowed);
        let dt = c.pos(ev, "evolution", "dt");
        if t.get("dt").is_none() {
            c.bad("evolution.dt", "missing");
        }
        let n_steps = c.count(ev, "evolution", "n_steps", 1);
        if t.get("n_steps").is_none() {
            c.bad("evolution.n_steps", "missing");
        }
        let stride = c.count(ev, "evolution", "output_stride", 1).unwrap_or(1);
        let default_scheme = if dim == 1 && rep == Some(RepName::Scalar) {
            "mechanical_schrodinger"
        } else {
            "dirac_like"
        };
        let scheme = match c.str(ev, "evolution", "scheme").unwrap_or(default_scheme).parse::<Scheme>() {
            Ok(s) => Some(s),
            Err(e) => {
                c.bad("evolution.scheme", e);
                None
            }
        };
        let stepper = match c.str(ev, "evolution", "stepper").unwrap_or("rk4").parse::<Stepper>() {
            Ok(s) => Some(s),
            Err(e) => {
                c.bad("evolution.stepper", e);
                None
            }
        };
        Some(EvolutionConfig::new(scheme?, stepper?, dt?, n_steps?).stride(stride))
    });

    // [initial]
    let init = c.table(&root, "initial");
    let initial = parse_initial(&mut c, init, pipeline, dim);

    // [diagnostics]
    let dg = c.table(&root, "diagnostics");
    if let Some(t) = dg {
        c.known(t, "diagnostics", &["reports", "k_values", "mu", "ground_state_tol", "n_levels"]);
    }
    let names = c
        .list(dg, "diagnostics", "reports", |v| v.as_str().map(str::to_string), "strings")
        .unwrap_or_default();
    let mut reports = Vec::new();
    for name in &names {
        match Report::parse(name) {
            Some(r) if r.pipeline() != pipeline => {
                c.bad("diagnostics.reports", format!("`{name}` is not available in this pipeline"))
            }
            Some(r) => reports.push(r),
            None => c.bad("diagnostics.reports", format!("unknown report `{name}`")),
        }
    }
    reports.sort();
    reports.dedup();
    let k_values = c
        .list(dg, "diagnostics", "k_values", number, "numbers")
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]);
    let mu = c.f64(dg, "diagnostics", "mu");
    let ground_state_tol = c
        .pos(dg, "diagnostics", "ground_state_tol")
        .unwrap_or(1e-12);
    let n_levels = c.count(dg, "diagnostics", "n_levels", 1).unwrap_or(6);

    // cross-field checks
    match pipeline {
        Pipeline::Quantum => {
            if gamma.is_none() || rep.is_none() {
                c.bad("gamma.rep", "missing (the quantum pipeline needs a Γ representation)");
            }
            if let Some(r) = rep {
                if let Err(e) = build_gamma_set(dim, r) {
                    c.bad("gamma", e);
                } else if !r.is_dirac_type() && evolution.is_some() {
                    c.unsupported(format!("evolution with the {r} representation is not supported"));
                } else if !r.is_dirac_type() {
                    c.unsupported(format!("the {r} representation has no quantum pipeline"));
                }
                if dim > 2 {
                    c.unsupported(format!("wave functions in dim {dim}"));
                }
                if let Some(ev) = &evolution {
                    if ev.scheme == Scheme::MechanicalSchrodinger && !(dim == 1 && r == RepName::Scalar) {
                        c.bad(
                            "evolution.scheme",
                            "mechanical_schrodinger needs gamma.dim = 1 with rep = \"scalar\"",
                        );
                    }
                    if ev.stepper == Stepper::CrankNicolson && dim != 1 {
                        c.unsupported("crank_nicolson is implemented for mechanics only");
                    }
                }
            }
            if n_fields != 1 {
                c.unsupported("quantized wave functions are built over a single field");
            }
            if reports.contains(&Report::Hmu) && dim != 2 {
                c.bad("diagnostics.reports", "`hmu` needs gamma.dim = 2");
            }
            for r in [Report::GroundState, Report::Levels, Report::Width, Report::Hamiltonian] {
                if reports.contains(&r) && dim != 1 {
                    c.bad("diagnostics.reports", format!("`{}` needs gamma.dim = 1", r.as_str()));
                }
            }
            for r in [Report::Norms, Report::Hmu, Report::Width, Report::Snapshot] {
                if reports.contains(&r) && evolution.is_none() && ev.is_none() {
                    c.bad("diagnostics.reports", format!("`{}` needs an [evolution] section", r.as_str()));
                }
            }
        }
        Pipeline::Classical => {
            if fg.is_some() {
                c.bad("field_grid", "not used by the classical pipeline");
            }
            if rep.is_some() && rep != Some(RepName::Scalar) {
                c.bad("gamma.rep", "the classical pipeline takes no Γ representation");
            }
            if ev.is_none() {
                c.bad("evolution", "missing section");
            }
            if dim != 2 {
                c.unsupported(format!("classical lattice evolution needs gamma.dim = 2, got {dim}"));
            }
            if n_fields != 1 {
                c.unsupported("classical lattice evolution is implemented for a single field");
            }
        }
    }

    if !c.problems.is_empty() {
        let all_unsupported = c.problems.iter().all(|p| matches!(p, Problem::Unsupported(_)));
        let msgs: Vec<String> = c
            .problems
            .into_iter()
            .map(|p| match p {
                Problem::Config(m) => m,
                Problem::Unsupported(m) => format!("unsupported combination: {m}"),
            })
            .collect();
        return Err(if all_unsupported {
            Error::Unsupported(msgs.join("; "))
        } else {
            Error::ConfigList(msgs)
        });
    }
    let (Some(lagrangian), Some(field_grid), Some(initial)) = (lagrangian, field_grid, initial) else {
        unreachable!("missing values are always reported as problems");
    };
    Ok(RunConfig {
        pipeline,
        seed,
        lagrangian,
        rep,
        normalization,
        field_grid,
        lattice,
        evolution,
        initial,
        diagnostics: DiagnosticsConfig {
            reports,
            k_values,
            mu,
            ground_state_tol,
            n_levels,
        },
    })
}

fn identity(n: usize) -> Vec<f64> {
    (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect()
}

fn parse_initial(c: &mut Collector, t: Option<&Table>, pipeline: Pipeline, dim: usize) -> Option<InitialData> {
    let p = "initial";
    let default = match (pipeline, dim) {
        (Pipeline::Classical, _) => "wave",
        (Pipeline::Quantum, 1) => "eigenstate",
        _ => "packet",
    };
    let kind = c.str(t, p, "kind").unwrap_or(default);
    let allowed: &[&str] = match kind {
        "eigenstate" => &["kind", "n"],
        "gaussian" => &["kind", "center", "sigma", "k"],
        "ground_state" | "random" => &["kind"],
        "packet" => &["kind", "n", "center_x", "width_x", "wavenumber", "spinor"],
        "wave" => &["kind", "amplitude", "wavenumber", "motion"],
        "bump" => &["kind", "amplitude", "center", "width"],
        other => {
            c.bad("initial.kind", format!("unknown initial data `{other}`"));
            return None;
        }
    };
    if let Some(t) = t {
        c.known(t, p, allowed);
    }
    let quantum_1 = pipeline == Pipeline::Quantum && dim == 1;
    let quantum_2 = pipeline == Pipeline::Quantum && dim == 2;
    let classical = pipeline == Pipeline::Classical;
    let fits = match kind {
        "eigenstate" | "gaussian" | "ground_state" => quantum_1,
        "packet" => quantum_2,
        "random" => !classical,
        _ => classical,
    };
    if !fits {
        c.bad("initial.kind", format!("`{kind}` does not fit this pipeline and dimension"));
        return None;
    }
    let n = c.count(t, p, "n", 0).unwrap_or(0);
    Some(match kind {
        "eigenstate" => InitialData::Eigenstate { n },
        "gaussian" => InitialData::Gaussian {
            center: c.f64(t, p, "center").unwrap_or(0.0),
            sigma: c.pos(t, p, "sigma").unwrap_or(1.0),
            k: c.f64(t, p, "k").unwrap_or(0.0),
        },
        "ground_state" => InitialData::GroundState,
        "random" => InitialData::Random,
        "packet" => {
            let spinor = c
                .list(t, p, "spinor", number, "numbers")
                .unwrap_or_else(|| vec![1.0, 0.0, 0.0, 0.0]);
            if spinor.len() != 4 {
                c.bad("initial.spinor", "expected [re0, im0, re1, im1]");
            }
            InitialData::Packet {
                n,
                center_x: c.f64(t, p, "center_x").unwrap_or(std::f64::consts::PI),
                width_x: c.pos(t, p, "width_x").unwrap_or(0.5),
                wavenumber: c.f64(t, p, "wavenumber").unwrap_or(0.0),
                spinor: spinor.chunks(2).map(|z| C64::new(z[0], *z.get(1).unwrap_or(&0.0))).collect(),
            }
        }
        "wave" => InitialData::Wave {
            amplitude: c.f64(t, p, "amplitude").unwrap_or(1.0),
            wavenumber: c.f64(t, p, "wavenumber").unwrap_or(1.0),
            travelling: match c.str(t, p, "motion").unwrap_or("rest") {
                "rest" => false,
                "travelling" => true,
                other => {
                    c.bad("initial.motion", format!("expected \"rest\" or \"travelling\", got `{other}`"));
                    false
                }
            },
        },
        _ => InitialData::Bump {
            amplitude: c.f64(t, p, "amplitude").unwrap_or(1.0),
            center: c.f64(t, p, "center").unwrap_or(std::f64::consts::PI),
            width: c.pos(t, p, "width").unwrap_or(0.5),
        },
    })
}

/// What to compute from a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Everything the config asks for.
    Run,
    ClassicalRun,
    QuantumEvolve,
    QuantumGroundState,
    DiagnoseNorms,
    DiagnoseHmu,
    DiagnoseDispersion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub pipeline: String,
    pub task: String,
    pub reports: Vec<String>,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads, parses and executes a config file, writing into `out_dir`.
pub fn run_file(path: &Path, task: Task, out_dir: &Path, seed: Option<u64>) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    execute(&cfg, task, out_dir, &config_hash(&text))
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    execute(cfg, Task::Run, out_dir, "")
}

/// Executes `task` for a validated config and writes the manifest.
pub fn execute(cfg: &RunConfig, task: Task, out_dir: &Path, config_sha256: &str) -> Result<Manifest> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)?;
    let mut out = Out {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let mut reports = cfg.diagnostics.reports.clone();
    match (cfg.pipeline, task) {
        (Pipeline::Classical, Task::Run | Task::ClassicalRun) => run_classical(cfg, &reports, &mut out)?,
        (Pipeline::Classical, _) => {
            return Err(Error::Usage("this config describes a classical run; use `classical run`".into()))
        }
        (Pipeline::Quantum, Task::ClassicalRun) => {
            return Err(Error::Usage("this config describes a quantum run".into()))
        }
        (Pipeline::Quantum, _) => {
            reports = match task {
                Task::Run => reports,
                Task::QuantumEvolve => Vec::new(),
                Task::QuantumGroundState => vec![Report::GroundState, Report::Levels],
                Task::DiagnoseNorms => vec![Report::Norms],
                Task::DiagnoseHmu => vec![Report::Hmu],
                _ => vec![Report::Dispersion],
            };
            run_quantum(cfg, task, &reports, &mut out)?;
        }
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_sha256.to_string(),
        seed: cfg.seed,
        pipeline: match cfg.pipeline {
            Pipeline::Quantum => "quantum".into(),
            Pipeline::Classical => "classical".into(),
        },
        task: format!("{task:?}"),
        reports: reports.iter().map(|r| r.as_str().to_string()).collect(),
        files: out.files.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

fn run_classical(cfg: &RunConfig, reports: &[Report], out: &mut Out) -> Result<()> {
    let l = &cfg.lagrangian;
    let lat = cfg.lattice.expect("validated: classical runs have a lattice");
    let ev = cfg.evolution.as_ref().expect("validated: classical runs have [evolution]");
    let s0 = classical_initial(cfg, lat)?;
    let mut body = String::from("kind,t,site,x,phi,pi0,energy\n");
    let mut energy = String::from("t,energy,relative_drift\n");
    let e0 = classical_energy(l, &s0);
    let mut emit = |st: &ClassicalFieldState| {
        let e = classical_energy(l, st);
        for j in 0..lat.n_x {
            let _ = writeln!(body, "site,{},{j},{},{},{},", Num(st.time), Num(lat.x(j)), Num(st.phi[j]), Num(st.pi0[j]));
        }
        let _ = writeln!(body, "summary,{},,,,,{}", Num(st.time), Num(e));
        let drift = if e0 != 0.0 { (e - e0) / e0.abs() } else { e - e0 };
        let _ = writeln!(energy, "{},{},{}", Num(st.time), Num(e), Num(drift));
    };
    emit(&s0);
    let last = dw_evolve(l, &s0, ev.dt, ev.n_steps, |n, st| {
        if n % ev.output_stride == 0 && n != ev.n_steps {
            emit(st);
        }
    })?;
    emit(&last);
    out.write("classical.csv", &body)?;
    if reports.contains(&Report::Energy) {
        out.write("energy.csv", &energy)?;
    }
    if reports.contains(&Report::Oracle) {
        let oracle = euler_lagrange_oracle(l, &s0, ev.dt, ev.n_steps)?;
        let d = l2_distance(&last, &oracle);
        let rel = d / l2_norm(&oracle).max(f64::MIN_POSITIVE);
        out.write("oracle.csv", &format!("t,l2_deviation,relative_deviation\n{},{},{}\n", Num(last.time), Num(d), Num(rel)))?;
    }
    Ok(())
}

fn classical_initial(cfg: &RunConfig, lat: Lattice1D) -> Result<ClassicalFieldState> {
    let l = &cfg.lagrangian;
    let k_inv = l.kinetic_inv()[(0, 0)];
    let kin = l.kinetic()[(0, 0)];
    match cfg.initial {
        InitialData::Wave {
            amplitude,
            wavenumber,
            travelling,
        } => {
            let c2 = l.potential().coefficient(&[2]);
            let omega = (wavenumber * wavenumber + 2.0 * c2 * k_inv).max(0.0).sqrt();
            let v = if travelling { kin * amplitude * omega } else { 0.0 };
            ClassicalFieldState::from_fn(lat, |x| amplitude * (wavenumber * x).cos(), |x| v * (wavenumber * x).sin())
        }
        InitialData::Bump {
            amplitude,
            center,
            width,
        } => ClassicalFieldState::from_fn(
            lat,
            |x| amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
            |_| 0.0,
        ),
        _ => unreachable!("validated: classical initial data"),
    }
}

/// Γ set, Ĥ and the initial wave function described by a quantum config.
pub fn quantum_setup(cfg: &RunConfig) -> Result<(Arc<GammaSet>, HamiltonianOperator, WaveFunction)> {
    let rep = cfg.rep.ok_or_else(|| Error::Config("gamma.rep: missing".into()))?;
    let g = Arc::new(build_gamma_set(cfg.lagrangian.dim(), rep)?);
    let grid = cfg.field_grid;
    let h = assemble_hamiltonian_with(&cfg.lagrangian, &g, &grid, cfg.normalization)?;
    let psi = match &cfg.initial {
        InitialData::Eigenstate { n } => WaveFunction::mechanics(g.clone(), grid, &eigenstate_profile(&h, *n)?.1)?,
        InitialData::Gaussian { center, sigma, k } => {
            WaveFunction::mechanics(g.clone(), grid, &gaussian_profile(&grid, *center, *sigma, *k))?
        }
        InitialData::GroundState => {
            ground_state_imaginary_time(&h, g.clone(), cfg.diagnostics.ground_state_tol, ImagTimeOptions::default())?
                .psi
        }
        InitialData::Packet {
            n,
            center_x,
            width_x,
            wavenumber,
            spinor,
        } => {
            let (_, chi) = eigenstate_profile(&h, *n)?;
            if spinor.len() != g.size() {
                return Err(Error::Config(format!(
                    "initial.spinor has {} components, the representation needs {}",
                    spinor.len(),
                    g.size()
                )));
            }
            let lat = cfg.lattice;
            let mut psi = WaveFunction::zeros(g.clone(), grid, lat);
            let lat = lat.expect("validated: packets live on a lattice");
            for s in 0..g.size() {
                for j in 0..lat.n_x {
                    let x = lat.x(j);
                    let env = (-(x - center_x).powi(2) / (2.0 * width_x * width_x)).exp();
                    let f = spinor[s] * C64::from_polar(env, wavenumber * x);
                    for (dst, c) in psi.line_mut(s, j).iter_mut().zip(&chi) {
                        *dst = f * c;
                    }
                }
            }
            psi.normalize();
            psi
        }
        InitialData::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut psi = WaveFunction::zeros(g.clone(), grid, cfg.lattice);
            for v in psi.values_mut() {
                *v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            psi.normalize();
            psi
        }
        InitialData::Wave { .. } | InitialData::Bump { .. } => {
            return Err(Error::Config("classical initial data in a quantum run".into()))
        }
    };
    Ok((g, h, psi))
}

fn run_quantum(cfg: &RunConfig, task: Task, reports: &[Report], out: &mut Out) -> Result<()> {
    let (g, h, psi0) = quantum_setup(cfg)?;
    let needs_evolution = matches!(task, Task::Run | Task::QuantumEvolve | Task::DiagnoseNorms | Task::DiagnoseHmu);
    let trace = match (&cfg.evolution, needs_evolution) {
        (Some(ev), true) => {
            let ev = ev.clone().snapshots(reports.contains(&Report::Hmu));
            Some(evolve(&psi0, &h, &ev)?)
        }
        (None, true) if task != Task::Run => {
            return Err(Error::Config("evolution: missing section".into()));
        }
        _ => None,
    };
    if let Some(tr) = &trace {
        out.write("trace.csv", &trace_csv(tr))?;
    }
    for r in reports {
        match r {
            Report::Norms => {
                let tr = trace.as_ref().expect("validated");
                let mut s = String::from("t,norm_plus,norm_bar,d_norm_plus_dt,d_norm_bar_dt\n");
                for n in diagnostics::norm_drift(tr)? {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        Num(n.t),
                        Num(n.norm_plus),
                        Num(n.norm_bar),
                        Num(n.d_norm_plus_dt),
                        Num(n.d_norm_bar_dt)
                    );
                }
                out.write("norms.csv", &s)?;
            }
            Report::Hmu => {
                let tr = trace.as_ref().expect("validated");
                let mut s = String::from("t,residual\n");
                for (t, r) in diagnostics::h_mu_residual(&tr.snapshots, &h, 0)? {
                    let _ = writeln!(s, "{},{}", Num(t), Num(r));
                }
                out.write("hmu.csv", &s)?;
            }
            Report::Dispersion => {
                let mut s = format!("{DISPERSION_CSV_HEADER}\n");
                let schemes: &[DispersionScheme] = if cfg.lagrangian.dim() == 1 {
                    &DispersionScheme::ALL
                } else {
                    &[DispersionScheme::DiracLike]
                };
                for &scheme in schemes {
                    let table =
                        diagnostics::dispersion_table(scheme, &cfg.lagrangian, &cfg.diagnostics.k_values, cfg.diagnostics.mu)?;
                    s.push_str(&table.to_csv_rows());
                }
                out.write("dispersion.csv", &s)?;
            }
            Report::GroundState => {
                let gs = ground_state_imaginary_time(
                    &h,
                    g.clone(),
                    cfg.diagnostics.ground_state_tol,
                    ImagTimeOptions::default(),
                )?;
                let mut s = String::from("iteration,energy\n");
                for (i, e) in gs.energy_history.iter().enumerate() {
                    let _ = writeln!(s, "{},{}", i + 1, Num(*e));
                }
                out.write("groundstate.csv", &s)?;
                let mut p = String::from("q,psi\n");
                for i in 0..gs.psi.n_q() {
                    let _ = writeln!(p, "{},{}", Num(h.grid().q(i)), Num(gs.psi.get(0, i, 0).re));
                }
                out.write("groundstate_profile.csv", &p)?;
            }
            Report::Levels => {
                let (vals, _) = h.eigen();
                let mut s = String::from("n,energy\n");
                for (n, e) in vals.iter().take(cfg.diagnostics.n_levels).enumerate() {
                    let _ = writeln!(s, "{n},{}", Num(*e));
                }
                out.write("levels.csv", &s)?;
            }
            Report::Width => {
                let tr = trace.as_ref().expect("validated");
                out.write("width.csv", &width_csv(cfg, &h, &psi0, tr)?)?;
            }
            Report::Hamiltonian => out.write("hamiltonian.csv", &h.to_csv())?,
            Report::Snapshot => {
                let tr = trace.as_ref().expect("validated");
                let last = tr.last_snapshot().expect("evolve stores the final state");
                out.write("snapshot.json", &(serde_json::to_string(&snapshot_json(last))? + "\n"))?;
            }
            Report::Energy | Report::Oracle => unreachable!("validated: classical reports"),
        }
    }
    Ok(())
}

fn trace_csv(tr: &EvolutionTrace) -> String {
    let mut s = String::from("t,norm_plus,norm_bar,energy\n");
    for (t, x) in tr.times.iter().zip(&tr.samples) {
        let _ = writeln!(s, "{},{},{},{}", Num(*t), Num(x.norm_plus), Num(x.norm_bar), Num(x.energy));
    }
    s
}

/// ⟨q⟩ and ⟨q²⟩ − ⟨q⟩² along a mechanics run (re-evolved with snapshots).
fn width_csv(cfg: &RunConfig, h: &HamiltonianOperator, psi0: &WaveFunction, tr: &EvolutionTrace) -> Result<String> {
    let ev = cfg.evolution.clone().expect("validated").snapshots(true);
    let snaps = if tr.snapshots.len() == tr.times.len() {
        tr.snapshots.clone()
    } else {
        evolve(psi0, h, &ev)?.snapshots
    };
    let grid = h.grid();
    let mut s = String::from("t,mean_q,var_q\n");
    for psi in &snaps {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..grid.n_q() {
            let p = psi.get(0, i, 0).norm_sqr() * grid.weight(i);
            let q = grid.q(i);
            m0 += p;
            m1 += p * q;
            m2 += p * q * q;
        }
        let mean = m1 / m0;
        let _ = writeln!(s, "{},{},{}", Num(psi.time), Num(mean), Num(m2 / m0 - mean * mean));
    }
    Ok(s)
}

/// `{"t", "n_spinor", "n_q", "n_x", "values": [[re, im], ...]}` with values
/// ordered by (spinor, site, field point).
pub fn snapshot_json(psi: &WaveFunction) -> serde_json::Value {
    serde_json::json!({
        "t": psi.time,
        "n_spinor": psi.n_spinor(),
        "n_q": psi.n_q(),
        "n_x": psi.n_x(),
        "values": psi.values().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    })
}
