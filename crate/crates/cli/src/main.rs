use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hs_vanish_cli::commands::{run_flow, run_ft_check, run_norm, run_sweep, run_verify};
use hs_vanish_cli::config::RunConfig;
use hs_vanish_cli::CliError;

#[derive(Debug, Parser)]
#[command(name = "hs-vanish", version, about = "Fractional Sobolev norms of annulus indicators and the flows they drive")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; missing keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// ODE tolerance for flows and drift measurements.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for randomly drawn test arguments.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity and oracle checks.
    Verify,
    /// Seminorm and length sweep over (s, delta, eps); writes CSV.
    Sweep,
    /// Endpoint maps, eps-drift ladder and product-form discrepancies.
    Flow,
    /// Closed-form, quadrature and optional grid norm of one annulus.
    Norm,
    /// Closed-form annulus transform against radial quadrature.
    FtCheck,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) {
            return Err(CliError::Config { field: "--tol".into(), msg: format!("must be positive, got {tol}") });
        }
        cfg.flow.tol = tol;
        if let Some(d) = cfg.sweep.drift.as_mut() {
            d.tol = tol;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    if cfg.workers > 0 {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    }
    match cli.command {
        Command::Verify => {
            let report = run_verify(&cfg)?;
            for c in &report.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!("{mark} {:?}: {:.3e} (tol {:.1e}) {}", c.name, c.measured, c.tolerance, c.detail);
            }
            println!("{} passed, {} failed", report.passed, report.failed);
            if report.failed > 0 {
                return Err(CliError::ChecksFailed(report.failed));
            }
        }
        Command::Sweep => {
            let out = run_sweep(&cfg)?;
            println!("{} rows ({} flagged) -> {}", out.rows, out.failed_rows, out.csv.display());
            for f in &out.summary.fits {
                println!("s = {} eps = {}: seminorm slope {:?}, length slope {:?}", f.s, f.eps, f.seminorm_slope, f.length_slope);
            }
        }
        Command::Flow => {
            let report = run_flow(&cfg)?;
            for (e, d) in report.endpoints.iter().zip(&report.drift) {
                println!("eps = {:.4e}: monotone {} drift {:?} {}", e.eps, e.monotone, d.drift, e.status);
            }
            if let Some(p) = &report.product_form {
                println!("product form: max initial {:.3e}, max terminal {:.3e}", p.max_initial, p.max_terminal);
            } else {
                println!("product form: {}", report.product_form_status);
            }
        }
        Command::Norm => {
            let report = run_norm(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::FtCheck => {
            let report = run_ft_check(&cfg)?;
            for r in &report.rows {
                println!("xi = {}: closed {:.15e} quad {:.15e} err {:.2e}", r.xi, r.closed_form, r.quadrature, r.error);
            }
            if !report.passed {
                return Err(CliError::ChecksFailed(report.rows.iter().filter(|r| !r.passed).count()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hs-vanish: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
