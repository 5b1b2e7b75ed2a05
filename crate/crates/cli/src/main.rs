use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fdqft::clifford::{build_gamma_set, check_representation, sigma_reconstruction_residual, sigma_tensor, RepName};
use fdqft::lagrangian::{JetPoint, LagrangianSpec, Polynomial};
use fdqft::picture::{fock_state, random_state, schrodinger_picture_check, FockTruncation};
use fdqft::pipeline::{run_file, Manifest, Task};
use fdqft::{Error, Result, C64};

#[derive(Parser)]
#[command(name = "fdqft", version, about = "Covariant field-space quantization toolkit")]
struct Cli {
    /// Output directory for files (config-driven commands default to ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed given in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary printed on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Γ representations.
    Gamma {
        #[command(subcommand)]
        action: GammaAction,
    },
    /// Covariant Legendre transform at one jet point.
    Legendre {
        #[command(subcommand)]
        action: LegendreAction,
    },
    /// Classical De Donder-Weyl lattice evolution.
    Classical {
        #[command(subcommand)]
        action: ClassicalAction,
    },
    /// Wave-function evolution and ground states.
    Quantum {
        #[command(subcommand)]
        action: QuantumAction,
    },
    /// Norm drift, H_μ residual and dispersion tables.
    Diagnose {
        #[command(subcommand)]
        action: DiagnoseAction,
    },
    /// Picture-change identities on a truncated Fock space.
    Picture {
        #[command(subcommand)]
        action: PictureAction,
    },
    /// Everything a config asks for.
    Run { config: PathBuf },
}

#[derive(Args)]
struct RepArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    rep: String,
}

#[derive(Subcommand)]
enum GammaAction {
    /// Print the matrices as JSON.
    Dump(RepArgs),
    /// Verify the defining algebra.
    Check(RepArgs),
}

#[derive(Subcommand)]
enum LegendreAction {
    Eval {
        /// Polynomial potential, e.g. "0.5*phi^2 + 0.25*phi^4".
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        n_fields: usize,
        /// Row-major kinetic matrix (identity by default).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        kinetic: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phi: Vec<f64>,
        /// ∂_μφ^a ordered as a*dim + μ.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dphi: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum ClassicalAction {
    Run { config: PathBuf },
}

#[derive(Subcommand)]
enum QuantumAction {
    Evolve { config: PathBuf },
    Groundstate { config: PathBuf },
}

#[derive(Subcommand)]
enum DiagnoseAction {
    Norms { config: PathBuf },
    Hmu { config: PathBuf },
    Dispersion { config: PathBuf },
}

#[derive(Subcommand)]
enum PictureAction {
    Check {
        #[arg(long, default_value_t = 32)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, std::f64::consts::FRAC_PI_2, std::f64::consts::TAU])]
        t: Vec<f64>,
        /// Real amplitudes of |0⟩, |1⟩, ... (normalized); default (|0⟩+|1⟩)/√2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
        state: Option<Vec<f64>>,
        /// Use a seeded random state over all levels instead.
        #[arg(long)]
        random: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::ConfigList(list) => {
                    eprintln!("error: invalid configuration");
                    for m in list {
                        eprintln!("  {m}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit_json(cli: &Cli, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    print!("{text}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn config_task(cli: &Cli, config: &Path, task: Task) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let manifest: Manifest = run_file(config, task, &out, cli.seed)?;
    if !cli.quiet {
        eprintln!(
            "wrote {} file(s) to {} in {:.2} s",
            manifest.files.len() + 1,
            out.display(),
            manifest.wall_time_s
        );
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gamma { action } => match action {
            GammaAction::Dump(a) => {
                let g = build_gamma_set(a.dim, a.rep.parse::<RepName>()?)?;
                emit_json(cli, "gamma.json", &g.to_json())
            }
            GammaAction::Check(a) => {
                let g = build_gamma_set(a.dim, a.rep.parse::<RepName>()?)?;
                let report = check_representation(&g);
                let sigma = match sigma_tensor(&g) {
                    Ok(s) => Some(sigma_reconstruction_residual(&g, &s)),
                    Err(_) => None,
                };
                let mut value = serde_json::to_value(&report)?;
                value["sigma_reconstruction_residual"] = json!(sigma);
                emit_json(cli, "gamma_check.json", &value)?;
                if report.pass {
                    Ok(())
                } else {
                    Err(Error::Divergence {
                        step: 0,
                        what: format!("{} fails its defining relations", report.rep),
                    })
                }
            }
        },
        Command::Legendre {
            action:
                LegendreAction::Eval {
                    potential,
                    dim,
                    n_fields,
                    kinetic,
                    phi,
                    dphi,
                },
        } => {
            let k = kinetic.clone().unwrap_or_else(|| {
                (0..n_fields * n_fields)
                    .map(|i| if i % (n_fields + 1) == 0 { 1.0 } else { 0.0 })
                    .collect()
            });
            let l = LagrangianSpec::new(*n_fields, *dim, k, Polynomial::parse(potential, *n_fields)?)?;
            if phi.len() != *n_fields || dphi.len() != n_fields * dim {
                return Err(Error::Usage(format!(
                    "expected {n_fields} field value(s) and {} derivative(s)",
                    n_fields * dim
                )));
            }
            let j = JetPoint {
                phi: phi.clone(),
                dphi: dphi.clone(),
            };
            let p = l.phase_point(&j);
            let (dh_dpi, minus_dh_dphi) = l.dw_rhs(&p);
            let value = json!({
                "lagrangian": l.lagrangian(&j),
                "momenta": p.pi,
                "hamiltonian": l.covariant_hamiltonian(&p),
                "legendre_residual": l.hamiltonian_form_residual(&j),
                "dh_dpi": dh_dpi,
                "minus_dh_dphi": minus_dh_dphi,
                "energy_momentum": l.energy_momentum_tensor(&j),
            });
            emit_json(cli, "legendre.json", &value)
        }
        Command::Classical {
            action: ClassicalAction::Run { config },
        } => config_task(cli, config, Task::ClassicalRun),
        Command::Quantum { action } => match action {
            QuantumAction::Evolve { config } => config_task(cli, config, Task::QuantumEvolve),
            QuantumAction::Groundstate { config } => config_task(cli, config, Task::QuantumGroundState),
        },
        Command::Diagnose { action } => match action {
            DiagnoseAction::Norms { config } => config_task(cli, config, Task::DiagnoseNorms),
            DiagnoseAction::Hmu { config } => config_task(cli, config, Task::DiagnoseHmu),
            DiagnoseAction::Dispersion { config } => config_task(cli, config, Task::DiagnoseDispersion),
        },
        Command::Picture {
            action:
                PictureAction::Check {
                    n_max,
                    dt,
                    t,
                    state,
                    random,
                },
        } => {
            let f = FockTruncation::new(*n_max)?;
            let psi0 = if *random {
                random_state(&f, cli.seed.unwrap_or(0))
            } else {
                let amps: Vec<C64> = state
                    .clone()
                    .unwrap_or_else(|| vec![1.0, 1.0])
                    .into_iter()
                    .map(|a| C64::new(a, 0.0))
                    .collect();
                fock_state(&f, &amps)?
            };
            let report = schrodinger_picture_check(&f, &psi0, t, *dt)?;
            emit_json(cli, "picture.json", &serde_json::to_value(&report)?)
        }
        Command::Run { config } => config_task(cli, config, Task::Run),
    }
}
