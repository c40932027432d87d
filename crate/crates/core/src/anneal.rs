//! Simulated annealing over shadow sweeps.
//!
//! Sweep `n` runs at temperature `temperature_at(n)` with proposal widths
//! `delta_at(n)`. One annealing iteration is one full shadow sweep
//! (auxiliary refresh plus `m` parameter proposals).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_len, dot, GibbsModel, ParamVector, PriorBox};
use crate::pattern::{PointPattern, SufficientStats};
use crate::sampler::RngStream;
use crate::shadow::{shadow_sweep_with_delta, ShadowConfig, ShadowState};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `T_n = T₀ k_T^n`.
    #[default]
    Geometric,
    /// `T_n = T₀ / (1 + log(n + 1))`.
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub k_t: f64,
    pub k_delta: f64,
    pub t_min: f64,
    pub delta_min: Vec<f64>,
    #[serde(default)]
    pub kind: ScheduleKind,
}

impl AnnealSchedule {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad =
            |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} out of range: {v}")));
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return bad("t0", self.t0);
        }
        if !(self.k_t > 0.0 && self.k_t < 1.0) {
            return bad("k_t (must lie in (0, 1))", self.k_t);
        }
        if !(self.k_delta > 0.0 && self.k_delta < 1.0) {
            return bad("k_delta (must lie in (0, 1))", self.k_delta);
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return bad("t_min", self.t_min);
        }
        check_len("delta_min", dim, self.delta_min.len())?;
        if let Some(&d) = self
            .delta_min
            .iter()
            .find(|d| !(d.is_finite() && **d > 0.0))
        {
            return bad("delta_min component", d);
        }
        Ok(())
    }

    pub fn temperature_at(&self, n: u64) -> f64 {
        let t = match self.kind {
            ScheduleKind::Geometric => self.t0 * self.k_t.powf(n as f64),
            ScheduleKind::Logarithmic => self.t0 / (1.0 + ((n + 1) as f64).ln()),
        };
        t.max(self.t_min)
    }

    pub fn delta_at(&self, base_delta: &[f64], n: u64) -> Vec<f64> {
        let shrink = self.k_delta.powf(n as f64);
        base_delta
            .iter()
            .zip(&self.delta_min)
            .map(|(d, floor)| (d * shrink).max(*floor))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_iterations: u64,
    pub keep_every: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 || self.keep_every == 0 || self.keep_every > self.n_iterations {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= keep_every <= n_iterations, got keep_every={} n_iterations={}",
                self.keep_every, self.n_iterations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Sweeps completed when the record was taken (1-based).
    pub iter: u64,
    pub theta: Vec<f64>,
    pub temperature: f64,
    pub delta: Vec<f64>,
    pub accept_rate: f64,
    pub aux_stats: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    pub theta_final: ParamVector,
    /// Recorded θ with the largest [`proxy_score`].
    pub theta_best: ParamVector,
    pub best_score: f64,
    pub trace: Vec<TraceRecord>,
    /// Accepted / proposed over all inner steps of the run.
    pub accept_rate: f64,
}

/// `θ · t(y) + log p(θ)`: the log posterior without its intractable terms.
pub fn proxy_score(theta: &[f64], data_stats: &[f64], prior: &PriorBox) -> f64 {
    dot(theta, data_stats) + prior.log_density_at(theta)
}

/// Anneals one chain. The auxiliary chain starts from the empty pattern.
#[allow(clippy::too_many_arguments)]
pub fn run_sa<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    data_stats: &SufficientStats,
    prior: &PriorBox,
    shadow: &ShadowConfig,
    schedule: &AnnealSchedule,
    run: &RunConfig,
    initial_theta: ParamVector,
    rng: &mut R,
) -> Result<MapEstimate> {
    let d = model.dim();
    shadow.validate(d)?;
    schedule.validate(d)?;
    run.validate()?;
    check_len("data statistics", d, data_stats.len())?;

    let mut state = ShadowState::new(
        model,
        initial_theta,
        PointPattern::empty(*model.window()),
        prior,
    )?;
    let mut trace = Vec::with_capacity((run.n_iterations / run.keep_every + 1) as usize);
    let mut accepted = 0usize;
    let mut proposed = 0usize;

    for n in 0..run.n_iterations {
        let temperature = schedule.temperature_at(n);
        let delta = schedule.delta_at(&shadow.delta, n);
        let outcome = shadow_sweep_with_delta(
            model,
            &mut state,
            data_stats,
            shadow,
            &delta,
            prior,
            temperature,
            rng,
        )?;
        accepted += outcome.accepted;
        proposed += outcome.proposed;

        let done = n + 1;
        if done % run.keep_every == 0 || done == run.n_iterations {
            trace.push(TraceRecord {
                iter: done,
                theta: state.theta().values().to_vec(),
                temperature,
                delta,
                accept_rate: outcome.accept_rate(),
                aux_stats: state.aux_stats().values().to_vec(),
            });
        }
    }

    let (best_score, best) = trace
        .iter()
        .map(|r| (proxy_score(&r.theta, data_stats.values(), prior), r))
        .fold(None, |acc: Option<(f64, &TraceRecord)>, (s, r)| match acc {
            Some((bs, _)) if bs >= s => acc,
            _ => Some((s, r)),
        })
        .expect("trace always holds the final sweep");

    Ok(MapEstimate {
        theta_final: state.theta().clone(),
        theta_best: ParamVector(best.theta.clone()),
        best_score,
        trace,
        accept_rate: if proposed == 0 {
            0.0
        } else {
            accepted as f64 / proposed as f64
        },
    })
}

#[derive(Debug, Clone)]
pub struct MultiStart {
    pub chains: Vec<MapEstimate>,
    /// Index of the chain with the highest best score; ties go to the lowest index.
    pub best: usize,
}

impl MultiStart {
    pub fn best(&self) -> &MapEstimate {
        &self.chains[self.best]
    }
}

/// `n_chains` independent annealing runs on the streams
/// `base.stream_id, base.stream_id + 1, ..` of `base.seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_sa_multi<M: GibbsModel + ?Sized>(
    model: &M,
    data_stats: &SufficientStats,
    prior: &PriorBox,
    shadow: &ShadowConfig,
    schedule: &AnnealSchedule,
    run: &RunConfig,
    initial_theta: &ParamVector,
    base: RngStream,
    n_chains: usize,
) -> Result<MultiStart> {
    if n_chains == 0 {
        return Err(Error::InvalidParameter("need at least one chain".into()));
    }
    let chains = (0..n_chains as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(base.seed, base.stream_id + i).rng();
            run_sa(
                model,
                data_stats,
                prior,
                shadow,
                schedule,
                run,
                initial_theta.clone(),
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, c) in chains.iter().enumerate().skip(1) {
        if c.best_score > chains[best].best_score {
            best = i;
        }
    }
    Ok(MultiStart { chains, best })
}
