//! Command-line driver: parse a JSON run config, execute one pipeline task,
//! and write deterministic CSV datasets with a JSON metadata sidecar.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical failure, 3 truncation
//! cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use htc::model::ModelParams;
use htc::pipeline::{exit_code, run, RunConfig, RunOptions, TaskKind};
use htc::spectra::linspace;

#[derive(Parser)]
#[command(
    name = "htc-spectra",
    about = "Stationary spectra of vibronically coupled emitters in a lossy cavity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for grid and k-point evaluation.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the basis catalog listing (basis.txt).
    #[arg(long)]
    dump_basis: bool,
    /// Also write the Hamiltonian triplets (matrix.txt).
    #[arg(long)]
    dump_matrix: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Absorption spectrum from the absolute ground state.
    Absorb(RunArgs),
    /// Photoluminescence under uniform pumping below a cutoff.
    Pl(RunArgs),
    /// Hot-band absorption from a vibrationally excited population.
    Hotband(RunArgs),
    /// Eigenvalues vs in-plane wave vector with photonic weights.
    Dispersion(RunArgs),
    /// Eigenvalue table with photon weights and decay rates.
    Eigen(RunArgs),
    /// Degeneracy census and symmetry-sector weights.
    Analyze(RunArgs),
    /// Self-test against the brute-force reference implementation.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match cli.command {
        Command::Absorb(a) => (TaskKind::Absorb, a),
        Command::Pl(a) => (TaskKind::Pl, a),
        Command::Hotband(a) => (TaskKind::Hotband, a),
        Command::Dispersion(a) => (TaskKind::Dispersion, a),
        Command::Eigen(a) => (TaskKind::Eigen, a),
        Command::Analyze(a) => (TaskKind::Analyze, a),
        Command::Validate => return validate(),
    };
    match execute(task, &args) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("htc-spectra: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn execute(task: TaskKind, args: &RunArgs) -> htc::Result<String> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| htc::HtcError::BadRequest(format!("thread pool: {e}")))?;
    }
    let raw = std::fs::read(&args.config).map_err(|e| {
        htc::HtcError::BadRequest(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let text = String::from_utf8(raw.clone())
        .map_err(|e| htc::HtcError::InvalidParameter(format!("config is not UTF-8: {e}")))?;
    let cfg = RunConfig::from_json(&text)?;
    if cfg.task != task {
        return Err(htc::HtcError::InvalidParameter(format!(
            "config task '{}' does not match subcommand '{}'",
            cfg.task.name(),
            task.name()
        )));
    }
    let out_dir = args
        .output
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let opts = RunOptions {
        dump_basis: args.dump_basis,
        dump_matrix: args.dump_matrix,
        config_sha256: format!("{:x}", Sha256::digest(&raw)),
    };
    let out = run(&cfg, &out_dir, &opts)?;
    let mut summary = out.summary;
    for f in &out.files {
        summary.push_str(&format!("wrote {}\n", f.display()));
    }
    Ok(summary)
}

fn validate() -> ExitCode {
    let grid = linspace(-2.0, 3.0, 101);
    let checks: [(&str, Box<dyn Fn() -> htc::Result<f64>>, f64); 3] = [
        (
            "dimer lambda=0 vs brute force",
            Box::new(|| {
                let p = ModelParams::resonant(2, 0.8, 0.0).validated()?;
                htc::oracle::full_transition_check(&p, 3, &grid)
            }),
            1e-12,
        ),
        (
            "dimer lambda2=0.5 vs brute force",
            Box::new(|| {
                let p = ModelParams::resonant(2, 1.0, 0.5).validated()?;
                htc::oracle::full_transition_check(&p, 3, &grid)
            }),
            1e-10,
        ),
        (
            "trimer lambda2=0.5 vs brute force",
            Box::new(|| {
                let p = ModelParams::resonant(3, 1.0, 0.5).validated()?;
                htc::oracle::full_transition_check(&p, 3, &grid)
            }),
            1e-10,
        ),
    ];
    let mut failed = false;
    for (name, check, bound) in checks {
        match check() {
            Ok(dev) => {
                let ok = dev < bound;
                failed |= !ok;
                println!(
                    "{}: max deviation {dev:.3e} (bound {bound:.0e}) {}",
                    name,
                    if ok { "ok" } else { "FAIL" }
                );
            }
            Err(e) => {
                failed = true;
                println!("{name}: error: {e}");
            }
        }
    }
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
