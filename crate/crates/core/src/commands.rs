//! The batch commands behind the CLI. Each command computes first and
//! writes its files afterwards, always including the resolved config
//! (`config.toml`) so a run can be repeated exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::anneal::{run_sa_multi, MapEstimate};
use crate::error::{Error, Result};
use crate::io::{self, svg, AppConfig};
use crate::model::{AnyModel, ParamVector};
use crate::pattern::{suff_stats, SufficientStats, Window};
use crate::sampler::{reference_samples, RngStream};
use crate::shadow::sample_posterior;

pub const CONFIG_ECHO: &str = "config.toml";
pub const SUMMARY: &str = "summary.json";
pub const TRACE_CSV: &str = "trace.csv";
pub const TRACE_SVG: &str = "trace.svg";
pub const SAMPLES_CSV: &str = "samples.csv";
pub const STATS_CSV: &str = "stats.csv";
pub const PATTERN_CSV: &str = "pattern.csv";

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub iterations: Option<u64>,
    pub chains: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut AppConfig) {
        if let Some(s) = self.seed {
            cfg.rng.seed = s;
        }
        if let Some(n) = self.iterations {
            cfg.anneal.n_iterations = n;
            cfg.posterior.n_sweeps = n as usize;
            // Keep the trace length sensible when a run is shortened.
            cfg.anneal.keep_every = cfg.anneal.keep_every.min(n.max(1));
            cfg.posterior.discard = cfg.posterior.discard.min((n as usize).saturating_sub(1));
        }
        if let Some(c) = self.chains {
            cfg.rng.chains = c;
        }
    }
}

/// What a run reports. Wall time is printed but kept out of the summary
/// file so identical runs produce identical files.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_final: Option<Vec<f64>>,
    /// `exp(θ)` componentwise: β (and γ for Strauss).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural_final: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_best: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural_best: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accept_rate: Option<f64>,
    /// Per-chain final θ when several chains ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_finals: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_chain: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_stats: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_mean: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_sd: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Vec<f64>>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

fn natural(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| t.exp()).collect()
}

fn prepare_out(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))
}

fn finish(
    out_dir: &Path,
    resolved: &AppConfig,
    summary: &mut RunSummary,
    files: Vec<(&str, String)>,
) -> Result<()> {
    prepare_out(out_dir)?;
    io::write_file(&out_dir.join(CONFIG_ECHO), &resolved.to_toml_string())?;
    summary.artifacts.push(CONFIG_ECHO.into());
    for (name, contents) in files {
        io::write_file(&out_dir.join(name), &contents)?;
        summary.artifacts.push(name.into());
    }
    summary.artifacts.push(SUMMARY.into());
    let json = serde_json::to_string_pretty(summary).expect("summary serializes") + "\n";
    io::write_file(&out_dir.join(SUMMARY), &json)
}

fn resolve(cfg: &AppConfig) -> Result<(AppConfig, crate::io::config::Experiment)> {
    let resolved = cfg.resolved()?;
    let exp = resolved.experiment()?;
    Ok((resolved, exp))
}

fn theta_labels(model: &AnyModel) -> Vec<&'static str> {
    match model {
        AnyModel::Strauss(_) => vec!["log beta", "log gamma"],
        AnyModel::Poisson(_) => vec!["log beta"],
    }
}

/// Long-run MH reference statistics at the configured model parameter.
pub fn cmd_simulate(cfg: &AppConfig, out_dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let (resolved, exp) = resolve(cfg)?;
    let mut rng = RngStream::new(resolved.rng.seed, resolved.rng.stream).rng();
    let out = reference_samples(
        &exp.model,
        &exp.theta,
        &exp.reference,
        resolved.shadow.birth_probability,
        &mut rng,
    )?;
    let mut summary = RunSummary {
        command: "simulate".into(),
        seed: Some(resolved.rng.seed),
        mean_stats: Some(out.mean.0.clone()),
        ..RunSummary::default()
    };
    let mut files = vec![(STATS_CSV, io::stats_to_csv(&out.samples))];
    if resolved.simulate.dump_pattern {
        files.push((PATTERN_CSV, io::pattern_to_csv(&out.last_pattern)));
    }
    summary.wall_time_secs = start.elapsed().as_secs_f64();
    finish(out_dir, &resolved, &mut summary, files)?;
    Ok(summary)
}

/// `(n, s_r)` of a pattern file.
pub fn cmd_stats(pattern_file: &Path, window: Window, r: f64) -> Result<SufficientStats> {
    let pattern = io::read_pattern_csv(pattern_file, window)?;
    suff_stats(&pattern, r)
}

/// Annealed MAP estimate; writes the trace, its plot and the summary.
pub fn cmd_map(cfg: &AppConfig, out_dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let (resolved, exp) = resolve(cfg)?;
    let data = resolved.data_stats(&exp.model)?;
    let multi = run_sa_multi(
        &exp.model,
        &data,
        &exp.prior,
        &exp.shadow,
        &exp.schedule,
        &exp.run,
        &exp.initial_theta,
        RngStream::new(resolved.rng.seed, resolved.rng.stream),
        resolved.rng.chains,
    )?;
    let est: &MapEstimate = multi.best();
    let mut summary = RunSummary {
        command: "map".into(),
        seed: Some(resolved.rng.seed),
        theta_final: Some(est.theta_final.0.clone()),
        natural_final: Some(natural(est.theta_final.values())),
        theta_best: Some(est.theta_best.0.clone()),
        natural_best: Some(natural(est.theta_best.values())),
        best_score: Some(est.best_score),
        accept_rate: Some(est.accept_rate),
        ..RunSummary::default()
    };
    if multi.chains.len() > 1 {
        summary.chain_finals = Some(
            multi
                .chains
                .iter()
                .map(|c| c.theta_final.0.clone())
                .collect(),
        );
        summary.best_chain = Some(multi.best);
    }
    let labels = theta_labels(&exp.model);
    let files = vec![
        (TRACE_CSV, io::trace_to_csv(&est.trace)),
        (TRACE_SVG, svg::trace_svg(&est.trace, &labels)),
    ];
    summary.wall_time_secs = start.elapsed().as_secs_f64();
    finish(out_dir, &resolved, &mut summary, files)?;
    Ok(summary)
}

fn moments(samples: &[ParamVector]) -> (Vec<f64>, Vec<f64>) {
    let d = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; d];
    for s in samples {
        for ((acc, v), m) in var.iter_mut().zip(s.values()).zip(&mean) {
            *acc += (v - m).powi(2);
        }
    }
    let denom = (n - 1.0).max(1.0);
    (mean, var.into_iter().map(|v| (v / denom).sqrt()).collect())
}

/// Untempered shadow chain; writes every sweep's θ and the moments of the
/// sweeps after `posterior.discard`.
pub fn cmd_sample_posterior(cfg: &AppConfig, out_dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let (resolved, exp) = resolve(cfg)?;
    let data = resolved.data_stats(&exp.model)?;
    let mut rng = RngStream::new(resolved.rng.seed, resolved.rng.stream).rng();
    let run = sample_posterior(
        &exp.model,
        exp.posterior_initial_theta.clone(),
        &data,
        &exp.shadow,
        &exp.prior,
        resolved.posterior.n_sweeps,
        &mut rng,
    )?;
    let (mean, sd) = moments(&run.samples[resolved.posterior.discard..]);
    let mut summary = RunSummary {
        command: "sample-posterior".into(),
        seed: Some(resolved.rng.seed),
        theta_final: run.samples.last().map(|t| t.0.clone()),
        accept_rate: Some(run.accept_rate),
        posterior_mean: Some(mean),
        posterior_sd: Some(sd),
        ..RunSummary::default()
    };
    summary.wall_time_secs = start.elapsed().as_secs_f64();
    finish(
        out_dir,
        &resolved,
        &mut summary,
        vec![(SAMPLES_CSV, io::samples_to_csv(&run.samples))],
    )?;
    Ok(summary)
}

/// Re-plots a trace CSV. Returns the SVG path.
pub fn cmd_plot(trace_csv: &Path, svg_out: Option<&Path>) -> Result<PathBuf> {
    let trace = io::read_trace_csv(trace_csv)?;
    if trace.is_empty() {
        return Err(Error::Parse {
            path: trace_csv.to_path_buf(),
            line: 2,
            message: "trace has no records".into(),
        });
    }
    let labels: Vec<&str> = if trace[0].theta.len() == 2 {
        vec!["log beta", "log gamma"]
    } else {
        vec![]
    };
    let out = svg_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| trace_csv.with_extension("svg"));
    io::write_file(&out, &svg::trace_svg(&trace, &labels))?;
    Ok(out)
}
