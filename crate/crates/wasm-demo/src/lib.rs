//! Browser bindings: simulate a Strauss pattern, compute its statistics and
//! anneal toward the MAP parameters for them. Arrays cross the boundary
//! flattened (`[x0, y0, x1, y1, ...]`, trace rows of `TRACE_COLUMNS`).

use shadow_anneal::anneal::{run_sa, AnnealSchedule, RunConfig, ScheduleKind};
use shadow_anneal::pattern::suff_stats;
use shadow_anneal::sampler::{reference_samples, MhConfig, ReferenceRun};
use shadow_anneal::shadow::{ProposalShape, ShadowConfig};
use shadow_anneal::{
    Point, PointPattern, PriorBox, Result, RngStream, StraussModel, SufficientStats, Window,
};
use wasm_bindgen::prelude::*;

/// `iter, log beta, log gamma, temperature`.
pub const TRACE_COLUMNS: usize = 4;

const T0: f64 = 1e4;
const T_END: f64 = 1e-2;

pub fn simulate_pattern(
    beta: f64,
    gamma: f64,
    r: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let model = StraussModel::new(r, Window::unit_square())?;
    let theta = StraussModel::theta_from_beta_gamma(beta, gamma)?;
    let run = ReferenceRun {
        burn_in: steps,
        n_samples: 1,
        spacing: 1,
    };
    let out = reference_samples(
        &model,
        &theta,
        &run,
        0.5,
        &mut RngStream::new(seed, 0).rng(),
    )?;
    Ok(out
        .last_pattern
        .points()
        .iter()
        .flat_map(|p| [p.x, p.y])
        .collect())
}

pub fn pattern_stats(coords: &[f64], r: f64) -> Result<Vec<f64>> {
    let points = coords
        .chunks_exact(2)
        .map(|c| Point::new(c[0], c[1]))
        .collect();
    let pattern = PointPattern::new(Window::unit_square(), points)?;
    Ok(suff_stats(&pattern, r)?.0)
}

/// Anneals from the prior centre. The cooling rate is chosen so the
/// temperature falls from 10⁴ to 10⁻² over `iterations` sweeps, which
/// keeps short interactive runs meaningful.
pub fn anneal_trace(
    n_obs: f64,
    s_obs: f64,
    r: f64,
    iterations: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let model = StraussModel::new(r, Window::unit_square())?;
    let prior = PriorBox::new(vec![0.0, -7.0], vec![7.0, 0.0])?;
    let iterations = iterations.max(1);
    let k_t = (T_END / T0).powf(1.0 / iterations as f64);
    let schedule = AnnealSchedule {
        t0: T0,
        k_t,
        k_delta: k_t.sqrt(),
        t_min: T_END,
        delta_min: vec![1e-3, 1e-3],
        kind: ScheduleKind::Geometric,
    };
    let shadow = ShadowConfig {
        delta: vec![0.05, 0.05],
        m: 50,
        shape: ProposalShape::Box,
        aux: MhConfig::default(),
    };
    let run = RunConfig {
        n_iterations: iterations,
        keep_every: (iterations / 200).max(1),
    };
    let data = SufficientStats::from([n_obs, s_obs]);
    let est = run_sa(
        &model,
        &data,
        &prior,
        &shadow,
        &schedule,
        &run,
        prior.center(),
        &mut RngStream::new(seed, 0).rng(),
    )?;
    Ok(est
        .trace
        .iter()
        .flat_map(|rec| [rec.iter as f64, rec.theta[0], rec.theta[1], rec.temperature])
        .collect())
}

fn js(e: shadow_anneal::Error) -> JsError {
    JsError::new(&e.to_string())
}

// JS-facing integers are u32 so callers pass plain numbers, not BigInt.
#[wasm_bindgen]
pub fn simulate(beta: f64, gamma: f64, r: f64, steps: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    simulate_pattern(beta, gamma, r, steps as usize, seed.into()).map_err(js)
}

#[wasm_bindgen]
pub fn stats(coords: &[f64], r: f64) -> Result<Vec<f64>, JsError> {
    pattern_stats(coords, r).map_err(js)
}

#[wasm_bindgen]
pub fn anneal(
    n_obs: f64,
    s_obs: f64,
    r: f64,
    iterations: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    anneal_trace(n_obs, s_obs, r, iterations.into(), seed.into()).map_err(js)
}
