//! Exponential-family Gibbs point-process models.
//!
//! A model has unnormalized density `f(y|θ) = exp(θ · t(y))` with respect to
//! the unit-rate Poisson process on its window. The normalizing constant is
//! never computed; every consumer works with ratios in which it cancels.
//! [`PoissonModel::log_normalizing`] is the one exception, kept for oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{self, IndexedPattern, Point, PointPattern, SufficientStats, Window};

/// Canonical parameter vector θ. For Strauss, `(log β, log γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parameter components must be finite, got {values:?}"
            )));
        }
        Ok(ParamVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, stats: &[f64]) -> f64 {
        dot(&self.0, stats)
    }
}

impl<const N: usize> From<[f64; N]> for ParamVector {
    fn from(v: [f64; N]) -> Self {
        ParamVector(v.to_vec())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Domain(format!(
            "{what}: expected length {expected}, got {got}"
        )));
    }
    Ok(())
}

/// A pairwise-interaction exponential-family point process.
///
/// The statistic increment of adding a point depends only on how many
/// existing points lie within the interaction radius of it. That covers
/// Strauss and Poisson and lets the samplers run on an [`IndexedPattern`].
pub trait GibbsModel: Send + Sync {
    fn window(&self) -> &Window;

    /// Length of θ and of t(y).
    fn dim(&self) -> usize;

    /// Radius used for neighbour counting. Poisson has no interaction, but
    /// still reports a radius so the grid index has a cell size.
    fn interaction_radius(&self) -> f64;

    /// Writes `t(y ∪ {u}) − t(y)` given the number of points of `y`
    /// within the interaction radius of `u`.
    fn insertion_delta(&self, neighbors: usize, out: &mut [f64]);

    fn suff_stats(&self, pattern: &PointPattern) -> Result<SufficientStats>;

    /// `θ · t(y)`, i.e. `−U(y|θ)`.
    fn log_unnormalized_density(
        &self,
        theta: &ParamVector,
        stats: &SufficientStats,
    ) -> Result<f64> {
        check_len("theta vs statistics", theta.len(), stats.len())?;
        check_len("model dimension", self.dim(), theta.len())?;
        Ok(theta.dot(stats.values()))
    }

    /// Log Papangelou intensity `log f(y ∪ {u}|θ) − log f(y|θ)`.
    fn log_conditional_intensity(
        &self,
        theta: &ParamVector,
        pattern: &PointPattern,
        candidate: &Point,
    ) -> Result<f64> {
        check_len("model dimension", self.dim(), theta.len())?;
        self.window().check_contains(candidate)?;
        let r_sq = self.interaction_radius().powi(2);
        let k = pattern
            .points()
            .iter()
            .filter(|p| p.dist_sq(candidate) <= r_sq)
            .count();
        Ok(self.log_intensity_from_neighbors(theta.values(), k))
    }

    /// Same as [`GibbsModel::log_conditional_intensity`] for a precomputed
    /// neighbour count; no validation.
    #[inline]
    fn log_intensity_from_neighbors(&self, theta: &[f64], neighbors: usize) -> f64 {
        let mut delta = [0.0; 8];
        let d = self.dim();
        self.insertion_delta(neighbors, &mut delta[..d]);
        dot(theta, &delta[..d])
    }

    /// Grid-indexed pattern for this model's radius.
    fn index(&self, pattern: PointPattern) -> Result<IndexedPattern> {
        IndexedPattern::new(pattern, self.interaction_radius())
    }
}

/// Strauss process: `f(y) ∝ β^{n(y)} γ^{s_r(y)}`, θ = (log β, log γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraussModel {
    r: f64,
    window: Window,
}

impl StraussModel {
    pub fn new(r: f64, window: Window) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Strauss interaction radius must be positive, got {r}"
            )));
        }
        Ok(StraussModel { r, window })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// θ = (log β, log γ). γ > 1 gives a non-integrable density and is
    /// rejected.
    pub fn theta_from_beta_gamma(beta: f64, gamma: f64) -> Result<ParamVector> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        ParamVector::new(vec![beta.ln(), gamma.ln()])
    }

    /// Checks that θ describes an integrable Strauss density (θ₂ ≤ 0).
    pub fn check_theta(theta: &ParamVector) -> Result<()> {
        check_len("Strauss theta", 2, theta.len())?;
        if theta.0[1] > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "log gamma must be <= 0 for an integrable Strauss density, got {}",
                theta.0[1]
            )));
        }
        Ok(())
    }
}

impl GibbsModel for StraussModel {
    fn window(&self) -> &Window {
        &self.window
    }

    fn dim(&self) -> usize {
        2
    }

    fn interaction_radius(&self) -> f64 {
        self.r
    }

    #[inline]
    fn insertion_delta(&self, neighbors: usize, out: &mut [f64]) {
        out[0] = 1.0;
        out[1] = neighbors as f64;
    }

    fn suff_stats(&self, pattern: &PointPattern) -> Result<SufficientStats> {
        pattern::suff_stats(pattern, self.r)
    }
}

/// Homogeneous Poisson process: `f(y|θ) = exp(θ n(y))`, intensity `e^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonModel {
    window: Window,
}

impl PoissonModel {
    pub fn new(window: Window) -> Self {
        PoissonModel { window }
    }

    /// Exact `log c(θ) = |W| (e^θ − 1)` relative to the unit-rate reference.
    /// Test oracles only; no sampler path uses it.
    pub fn log_normalizing(&self, theta: &ParamVector) -> Result<f64> {
        check_len("Poisson theta", 1, theta.len())?;
        Ok(self.window.area() * theta.0[0].exp_m1())
    }
}

impl GibbsModel for PoissonModel {
    fn window(&self) -> &Window {
        &self.window
    }

    fn dim(&self) -> usize {
        1
    }

    fn interaction_radius(&self) -> f64 {
        // Any cell size works since neighbours are never used.
        self.window.width().max(self.window.height())
    }

    #[inline]
    fn insertion_delta(&self, _neighbors: usize, out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn suff_stats(&self, pattern: &PointPattern) -> Result<SufficientStats> {
        Ok(SufficientStats(vec![pattern.len() as f64]))
    }
}

/// Runtime choice between the concrete models, for config-driven callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyModel {
    Strauss(StraussModel),
    Poisson(PoissonModel),
}

impl GibbsModel for AnyModel {
    fn window(&self) -> &Window {
        match self {
            AnyModel::Strauss(m) => m.window(),
            AnyModel::Poisson(m) => m.window(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            AnyModel::Strauss(m) => m.dim(),
            AnyModel::Poisson(m) => m.dim(),
        }
    }

    fn interaction_radius(&self) -> f64 {
        match self {
            AnyModel::Strauss(m) => m.interaction_radius(),
            AnyModel::Poisson(m) => m.interaction_radius(),
        }
    }

    #[inline]
    fn insertion_delta(&self, neighbors: usize, out: &mut [f64]) {
        match self {
            AnyModel::Strauss(m) => m.insertion_delta(neighbors, out),
            AnyModel::Poisson(m) => m.insertion_delta(neighbors, out),
        }
    }

    fn suff_stats(&self, pattern: &PointPattern) -> Result<SufficientStats> {
        match self {
            AnyModel::Strauss(m) => m.suff_stats(pattern),
            AnyModel::Poisson(m) => m.suff_stats(pattern),
        }
    }
}

/// Uniform prior on a closed box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    log_density: f64,
}

impl PriorBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len("prior bounds", lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidParameter(
                "prior box has no dimensions".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidParameter(format!(
                    "prior box needs finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        let log_density = -lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (u - l).ln())
            .sum::<f64>();
        Ok(PriorBox {
            lower,
            upper,
            log_density,
        })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> ParamVector {
        ParamVector(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
        )
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| *t >= *l && *t <= *u)
    }

    /// Unchecked log density on a slice of the right length.
    #[inline]
    pub(crate) fn log_density_at(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            self.log_density
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `−Σ log(upper_i − lower_i)` inside the closed box, `−∞` outside.
    pub fn log_prior(&self, theta: &ParamVector) -> Result<f64> {
        check_len("prior vs theta", self.dim(), theta.len())?;
        Ok(self.log_density_at(theta.values()))
    }
}
