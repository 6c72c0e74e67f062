use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zakharov_lab::experiments::{
    emit, run_dispersion_audit, run_growth_fit, run_solve, run_theorem, Artifact, ExperimentConfig, Report, RowStatus,
    SCHEMA_VERSION,
};
use zakharov_lab::Error;

#[derive(Parser)]
#[command(version, about = "Instability experiments for the reduced Zakharov system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of the first-harmonic block for every k.
    Dispersion(Common),
    /// Fitted growth rate of the unstable mode and of the full evolution.
    Growth(Common),
    /// Instability table: initial size, terminal size and solver agreement.
    Theorem(Common),
    /// Single run for the first k with norm trace and Picard log.
    Solve(Common),
}

#[derive(Args)]
struct Common {
    /// JSON or TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces k_list (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    k: Vec<u64>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    c0: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the slower redundant cross-checks as well.
    #[arg(long)]
    oracle: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if !self.k.is_empty() {
            cfg.k_list = self.k.clone();
        }
        if let Some(s) = self.s {
            cfg.s = s;
        }
        if let Some(c0) = self.c0 {
            cfg.c0 = c0;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.oracle |= self.oracle;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Whether the run finished with every row clean.
fn run(command: &Command) -> Result<bool, Error> {
    match command {
        Command::Dispersion(c) => {
            let cfg = c.config()?;
            let audit = run_dispersion_audit(&cfg)?;
            for p in emit(&cfg.output_dir, &Artifact::Dispersion(&audit))? {
                eprintln!("wrote {}", p.display());
            }
            if let Some(slope) = audit.sigma_slope {
                println!("slope of ln σ against ln k: {slope:.4}");
            }
            Ok(audit.report.rows.iter().all(|r| r.error.is_none()))
        }
        Command::Growth(c) => {
            let cfg = c.config()?;
            let mut rows = Vec::new();
            let mut warnings = Vec::new();
            for &k in &cfg.k_list {
                match run_growth_fit(&cfg, k, cfg.e_bar) {
                    Ok(g) => {
                        println!(
                            "k = {k}: σ = {:.6}, linear γ/σ = {:.5}, nonlinear γ/σ = {}",
                            g.sigma,
                            g.linear_ratio(),
                            g.nonlinear_ratio().map_or("n/a".into(), |r| format!("{r:.5}"))
                        );
                        rows.push(g);
                    }
                    Err(e) => warnings.push(format!("k = {k}: {e}")),
                }
            }
            let clean = warnings.is_empty();
            let report = Report {
                schema_version: SCHEMA_VERSION,
                config: cfg.clone(),
                rows,
                warnings,
            };
            for p in emit(&cfg.output_dir, &Artifact::Growth(&report))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(clean)
        }
        Command::Theorem(c) => {
            let cfg = c.config()?;
            let report = run_theorem(&cfg)?;
            for r in &report.report.rows {
                println!(
                    "k = {:4}: T_k = {:.4}, initial H^s = {:.4e}, terminal |n|_L2 = {:.4e}, crosscheck = {:.2e} ({:?})",
                    r.k, r.t_k, r.initial_hs, r.terminal_l2_n, r.crosscheck, r.status
                );
            }
            for p in emit(&cfg.output_dir, &Artifact::Theorem(&report))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(report.all_verified())
        }
        Command::Solve(c) => {
            let cfg = c.config()?;
            let k = cfg.k_list[0];
            let (report, trace) = run_solve(&cfg, k)?;
            for rec in &report.picard_log {
                println!(
                    "iteration {:2}: E1 = {:.6e}, increment = {:.3e}",
                    rec.iteration, rec.e1_norm, rec.relative_increment
                );
            }
            for p in emit(&cfg.output_dir, &Artifact::Solve(&report, &trace))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(report.row.status == RowStatus::Verified)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ (Error::Config(_) | Error::Io { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
