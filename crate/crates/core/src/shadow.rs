//! ABC Shadow transitions on the parameter space.
//!
//! One sweep refreshes the auxiliary pattern `x ~ p(·|θ₀)` with a short MH
//! run at the sweep's starting θ, then performs `m` local proposals whose
//! acceptance uses `t(x)` in place of the intractable normalizing constant.
//! For an exponential family the shadow ratio reduces to
//!
//! ```text
//! log ρ(θ → ψ) = (ψ − θ) · (t(y) − t(x)) + log p(ψ) − log p(θ)
//! ```
//!
//! so neither `c(θ)` nor the posterior constant ever needs evaluating.
//! Tempering raises the whole ratio to `1/T`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_len, GibbsModel, ParamVector, PriorBox};
use crate::pattern::{PointPattern, SufficientStats};
use crate::sampler::{AuxChain, MhConfig};

/// Shape of the symmetric neighbourhood the proposal is uniform on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalShape {
    /// `ψ_i ~ U[θ_i − Δ_i/2, θ_i + Δ_i/2]` independently.
    #[default]
    Box,
    /// Uniform on the ellipsoid with semi-axes `Δ_i/2`.
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowConfig {
    pub delta: Vec<f64>,
    pub m: usize,
    #[serde(default)]
    pub shape: ProposalShape,
    pub aux: MhConfig,
}

impl ShadowConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        check_len("shadow delta", dim, self.delta.len())?;
        if self.delta.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "every delta component must be positive, got {:?}",
                self.delta
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter(
                "inner step count m must be at least 1".into(),
            ));
        }
        self.aux.validate()
    }
}

/// Draws ψ uniformly on the neighbourhood of `theta` with widths `delta`.
pub fn propose<R: Rng + ?Sized>(
    theta: &[f64],
    delta: &[f64],
    shape: ProposalShape,
    rng: &mut R,
) -> ParamVector {
    let mut out = vec![0.0; theta.len()];
    propose_into(theta, delta, shape, rng, &mut out);
    ParamVector(out)
}

#[inline]
fn propose_into<R: Rng + ?Sized>(
    theta: &[f64],
    delta: &[f64],
    shape: ProposalShape,
    rng: &mut R,
    out: &mut [f64],
) {
    match shape {
        ProposalShape::Box => {
            for ((o, t), d) in out.iter_mut().zip(theta).zip(delta) {
                *o = t + d * (rng.gen::<f64>() - 0.5);
            }
        }
        ProposalShape::Ball => loop {
            let mut norm_sq = 0.0;
            for o in out.iter_mut() {
                *o = 2.0 * rng.gen::<f64>() - 1.0;
                norm_sq += *o * *o;
            }
            if norm_sq <= 1.0 {
                for ((o, t), d) in out.iter_mut().zip(theta).zip(delta) {
                    *o = t + 0.5 * d * *o;
                }
                break;
            }
        },
    }
}

#[inline]
fn log_ratio_unchecked(theta: &[f64], psi: &[f64], stat_gap: &[f64], prior: &PriorBox) -> f64 {
    let log_prior_psi = prior.log_density_at(psi);
    if log_prior_psi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let log_prior_theta = prior.log_density_at(theta);
    if log_prior_theta == f64::NEG_INFINITY {
        // Only reachable from a state outside the support: any move in is welcome.
        return f64::INFINITY;
    }
    let linear: f64 = psi
        .iter()
        .zip(theta)
        .zip(stat_gap)
        .map(|((p, t), g)| (p - t) * g)
        .sum();
    linear + log_prior_psi - log_prior_theta
}

/// Log shadow acceptance ratio for θ → ψ given observed `t(y)` and
/// auxiliary `t(x)`. `−∞` when ψ is outside the prior box.
///
/// The neighbourhood indicators of the proposal are symmetric and cancel.
pub fn shadow_log_ratio(
    theta: &ParamVector,
    psi: &ParamVector,
    data_stats: &SufficientStats,
    aux_stats: &SufficientStats,
    prior: &PriorBox,
) -> Result<f64> {
    let d = theta.len();
    check_len("psi", d, psi.len())?;
    check_len("data statistics", d, data_stats.len())?;
    check_len("auxiliary statistics", d, aux_stats.len())?;
    check_len("prior", d, prior.dim())?;
    let gap = data_stats.diff(aux_stats);
    Ok(log_ratio_unchecked(
        theta.values(),
        psi.values(),
        gap.values(),
        prior,
    ))
}

/// `min{1, exp(log_ratio / T)}`.
pub fn acceptance_probability(log_ratio: f64, temperature: f64) -> f64 {
    if log_ratio == f64::NEG_INFINITY {
        return 0.0;
    }
    (log_ratio / temperature).exp().min(1.0)
}

#[inline]
fn accept<R: Rng + ?Sized>(log_ratio: f64, temperature: f64, rng: &mut R) -> bool {
    let log_u = rng.gen::<f64>().ln();
    if log_ratio == f64::NEG_INFINITY {
        return false;
    }
    log_u < log_ratio / temperature
}

/// Current θ with its persistent auxiliary chain.
#[derive(Debug, Clone)]
pub struct ShadowState {
    theta: ParamVector,
    aux: AuxChain,
}

impl ShadowState {
    pub fn new<M: GibbsModel + ?Sized>(
        model: &M,
        theta: ParamVector,
        aux_pattern: PointPattern,
        prior: &PriorBox,
    ) -> Result<Self> {
        check_len("model dimension", model.dim(), theta.len())?;
        check_len("prior", model.dim(), prior.dim())?;
        if !prior.contains(theta.values()) {
            return Err(Error::Domain(format!(
                "initial theta {:?} lies outside the prior box",
                theta.values()
            )));
        }
        Ok(ShadowState {
            theta,
            aux: AuxChain::new(model, aux_pattern)?,
        })
    }

    pub fn theta(&self) -> &ParamVector {
        &self.theta
    }

    pub fn aux_stats(&self) -> &SufficientStats {
        self.aux.stats()
    }

    pub fn aux_pattern(&self) -> &PointPattern {
        self.aux.pattern()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOutcome {
    pub accepted: usize,
    pub proposed: usize,
}

impl SweepOutcome {
    pub fn accept_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// One shadow sweep at `temperature`, with proposal widths `delta`
/// overriding `config.delta`. Temperature 1 is the untempered dynamics.
#[allow(clippy::too_many_arguments)]
pub fn shadow_sweep_with_delta<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    state: &mut ShadowState,
    data_stats: &SufficientStats,
    config: &ShadowConfig,
    delta: &[f64],
    prior: &PriorBox,
    temperature: f64,
    rng: &mut R,
) -> Result<SweepOutcome> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let d = model.dim();
    check_len("data statistics", d, data_stats.len())?;
    check_len("delta", d, delta.len())?;

    // Step 1: x ~ p(·|θ₀), θ₀ being the state at sweep entry.
    state.aux.run(model, state.theta.values(), &config.aux, rng);
    let gap = data_stats.diff(state.aux.stats());

    Ok(parameter_moves(
        &mut state.theta.0,
        gap.values(),
        delta,
        config.shape,
        prior,
        temperature,
        config.m,
        rng,
    ))
}

/// The `m` inner proposals of a sweep for a fixed statistic gap `t(y) − t(x)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn parameter_moves<R: Rng + ?Sized>(
    theta: &mut [f64],
    stat_gap: &[f64],
    delta: &[f64],
    shape: ProposalShape,
    prior: &PriorBox,
    temperature: f64,
    m: usize,
    rng: &mut R,
) -> SweepOutcome {
    let mut psi = vec![0.0; theta.len()];
    let mut out = SweepOutcome::default();
    for _ in 0..m {
        propose_into(theta, delta, shape, rng, &mut psi);
        let lr = log_ratio_unchecked(theta, &psi, stat_gap, prior);
        out.proposed += 1;
        if accept(lr, temperature, rng) {
            theta.copy_from_slice(&psi);
            out.accepted += 1;
        }
    }
    out
}

pub fn shadow_sweep<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    state: &mut ShadowState,
    data_stats: &SufficientStats,
    config: &ShadowConfig,
    prior: &PriorBox,
    temperature: f64,
    rng: &mut R,
) -> Result<SweepOutcome> {
    config.validate(model.dim())?;
    shadow_sweep_with_delta(
        model,
        state,
        data_stats,
        config,
        &config.delta,
        prior,
        temperature,
        rng,
    )
}

#[derive(Debug, Clone)]
pub struct PosteriorRun {
    pub samples: Vec<ParamVector>,
    pub accept_rate: f64,
}

/// Untempered shadow chain from `initial_theta` (auxiliary chain starts
/// empty); one θ per sweep.
pub fn sample_posterior<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    initial_theta: ParamVector,
    data_stats: &SufficientStats,
    config: &ShadowConfig,
    prior: &PriorBox,
    n_sweeps: usize,
    rng: &mut R,
) -> Result<PosteriorRun> {
    if n_sweeps == 0 {
        return Err(Error::InvalidParameter(
            "n_sweeps must be at least 1".into(),
        ));
    }
    config.validate(model.dim())?;
    let mut state = ShadowState::new(
        model,
        initial_theta,
        PointPattern::empty(*model.window()),
        prior,
    )?;
    let mut samples = Vec::with_capacity(n_sweeps);
    let mut total = SweepOutcome::default();
    for _ in 0..n_sweeps {
        let o = shadow_sweep_with_delta(
            model,
            &mut state,
            data_stats,
            config,
            &config.delta,
            prior,
            1.0,
            rng,
        )?;
        total.accepted += o.accepted;
        total.proposed += o.proposed;
        samples.push(state.theta.clone());
    }
    Ok(PosteriorRun {
        samples,
        accept_rate: total.accept_rate(),
    })
}
