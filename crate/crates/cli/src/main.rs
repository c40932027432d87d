//! `shadow-anneal`: MAP estimation for Strauss and Poisson point processes
//! by simulated annealing over ABC Shadow dynamics.
//!
//! Exit codes: 0 on success, 1 for usage or config errors, 2 when a run fails.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shadow_anneal::commands::{self, Overrides, RunSummary};
use shadow_anneal::io::AppConfig;
use shadow_anneal::Error;

#[derive(Debug, Parser)]
#[command(name = "shadow-anneal", version, about)]
struct Cli {
    /// TOML config; every field defaults to the Strauss experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the annealing iteration count (and the posterior sweep count).
    #[arg(long, global = true)]
    iterations: Option<u64>,

    /// Independent annealing chains for `map`.
    #[arg(long, global = true)]
    chains: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean sufficient statistics of a long MH run at the model parameter.
    Simulate,
    /// Sufficient statistics (n, s_r) of a pattern CSV.
    Stats {
        #[arg(long)]
        pattern: PathBuf,
        /// Interaction radius; defaults to the config's model.r.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Untempered shadow chain over the parameters.
    SamplePosterior,
    /// Annealed MAP estimate.
    Map,
    /// Re-draw the SVG for a trace CSV.
    Plot {
        #[arg(long)]
        trace: PathBuf,
        /// Output path; defaults to the trace path with an .svg extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<AppConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    Overrides {
        seed: cli.seed,
        iterations: cli.iterations,
        chains: cli.chains,
    }
    .apply(&mut cfg);
    Ok(cfg)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

// Write errors (closed pipe) are ignored: the files on disk are the result.
fn report(s: &RunSummary, out: &std::path::Path) {
    let mut w = std::io::stdout().lock();
    if let Some(m) = &s.mean_stats {
        let _ = writeln!(w, "mean statistics: {}", fmt_vec(m));
    }
    if let Some(t) = &s.theta_final {
        let _ = writeln!(w, "theta final: {}", fmt_vec(t));
    }
    if let Some(t) = &s.natural_final {
        let _ = writeln!(w, "exp(theta) final: {}", fmt_vec(t));
    }
    if let Some(t) = &s.theta_best {
        let _ = writeln!(w, "theta best: {}", fmt_vec(t));
    }
    if let (Some(m), Some(sd)) = (&s.posterior_mean, &s.posterior_sd) {
        let _ = writeln!(w, "posterior mean: {}  sd: {}", fmt_vec(m), fmt_vec(sd));
    }
    if let Some(a) = s.accept_rate {
        let _ = writeln!(w, "acceptance rate: {a:.4}");
    }
    let _ = writeln!(w, "wall time: {:.2}s", s.wall_time_secs);
    let _ = writeln!(w, "wrote {} to {}", s.artifacts.join(", "), out.display());
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Simulate => report(&commands::cmd_simulate(&cfg, &cli.out)?, &cli.out),
        Command::Map => report(&commands::cmd_map(&cfg, &cli.out)?, &cli.out),
        Command::SamplePosterior => {
            report(&commands::cmd_sample_posterior(&cfg, &cli.out)?, &cli.out)
        }
        Command::Stats { pattern, r } => {
            let t = commands::cmd_stats(pattern, cfg.model.window, r.unwrap_or(cfg.model.r))?;
            let _ = writeln!(
                std::io::stdout(),
                "n = {}, s_r = {}",
                t.values()[0],
                t.values()[1]
            );
        }
        Command::Plot { trace, svg } => {
            let path = commands::cmd_plot(trace, svg.as_deref())?;
            let _ = writeln!(std::io::stdout(), "wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
