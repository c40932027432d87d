//! Birth/death Metropolis–Hastings dynamics for Gibbs point processes.
//!
//! Each transition proposes, with probability `birth_probability`, a new
//! point uniform on the window, and otherwise the deletion of a uniformly
//! chosen existing point. With `q = p_b / (1 − p_b)` the acceptance ratios are
//!
//! ```text
//! birth of u into y (n points):   λ(u; y) |W| / ((n + 1) q)
//! death of ξ from y (n points):   n q / (λ(ξ; y \ ξ) |W|)
//! ```
//!
//! where λ is the Papangelou conditional intensity of the model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_len, GibbsModel, ParamVector};
use crate::pattern::{IndexedPattern, Point, PointPattern, SufficientStats};

/// Seed plus stream id. The same pair always yields the same draw sequence;
/// chains that run side by side use distinct stream ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub steps: usize,
    pub birth_probability: f64,
    /// Births that would exceed this count are rejected, which conditions
    /// the process on `n(y) <= max_points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_points: Option<usize>,
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig {
            steps: 100,
            birth_probability: 0.5,
            max_points: None,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter(
                "MH steps must be at least 1".into(),
            ));
        }
        if !(self.birth_probability > 0.0 && self.birth_probability < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "birth probability must lie in (0, 1), got {}",
                self.birth_probability
            )));
        }
        Ok(())
    }

    fn log_q_ratio(&self) -> f64 {
        (self.birth_probability / (1.0 - self.birth_probability)).ln()
    }
}

/// Log acceptance ratio for adding `candidate` to `pattern`.
pub fn birth_log_ratio<M: GibbsModel + ?Sized>(
    model: &M,
    theta: &ParamVector,
    pattern: &PointPattern,
    candidate: &Point,
    birth_probability: f64,
) -> Result<f64> {
    let log_lambda = model.log_conditional_intensity(theta, pattern, candidate)?;
    let q = birth_probability / (1.0 - birth_probability);
    Ok(log_lambda + model.window().area().ln() - ((pattern.len() + 1) as f64).ln() - q.ln())
}

/// Log acceptance ratio for deleting point `index` from `pattern`.
pub fn death_log_ratio<M: GibbsModel + ?Sized>(
    model: &M,
    theta: &ParamVector,
    pattern: &PointPattern,
    index: usize,
    birth_probability: f64,
) -> Result<f64> {
    if index >= pattern.len() {
        return Err(Error::Domain(format!(
            "point index {index} out of range for a pattern of {} points",
            pattern.len()
        )));
    }
    let mut rest = pattern.clone();
    let removed = rest.swap_remove(index)?;
    let birth = birth_log_ratio(model, theta, &rest, &removed, birth_probability)?;
    Ok(-birth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhMove {
    Birth {
        accepted: bool,
    },
    Death {
        accepted: bool,
    },
    /// Death proposed on an empty pattern.
    EmptyDeath,
}

/// A birth/death chain: the current pattern, its grid index, and its
/// sufficient statistics maintained incrementally.
#[derive(Debug, Clone)]
pub struct AuxChain {
    pattern: IndexedPattern,
    stats: SufficientStats,
}

impl AuxChain {
    pub fn new<M: GibbsModel + ?Sized>(model: &M, initial: PointPattern) -> Result<Self> {
        if initial.window() != model.window() {
            return Err(Error::Domain(
                "initial pattern window differs from the model window".into(),
            ));
        }
        let stats = model.suff_stats(&initial)?;
        Ok(AuxChain {
            pattern: model.index(initial)?,
            stats,
        })
    }

    pub fn empty<M: GibbsModel + ?Sized>(model: &M) -> Result<Self> {
        Self::new(model, PointPattern::empty(*model.window()))
    }

    pub fn pattern(&self) -> &PointPattern {
        self.pattern.pattern()
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    /// One birth-or-death transition. `theta` must have the model's length.
    pub fn step<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
        &mut self,
        model: &M,
        theta: &[f64],
        config: &MhConfig,
        rng: &mut R,
    ) -> MhMove {
        let window = model.window();
        let n = self.pattern.len();
        let log_area = window.area().ln();
        let mut delta = [0.0; 8];
        let delta = &mut delta[..model.dim()];

        if rng.gen::<f64>() < config.birth_probability {
            let u = window.sample_uniform(rng);
            let k = self.pattern.neighbors(&u, None);
            let log_ratio = model.log_intensity_from_neighbors(theta, k) + log_area
                - ((n + 1) as f64).ln()
                - config.log_q_ratio();
            let allowed = config.max_points.is_none_or(|cap| n < cap);
            let accepted = rng.gen::<f64>().ln() < log_ratio && allowed;
            if accepted {
                model.insertion_delta(k, delta);
                self.stats.add_assign(delta);
                self.pattern
                    .insert(u)
                    .expect("uniform draw lies in the window");
            }
            MhMove::Birth { accepted }
        } else {
            if n == 0 {
                return MhMove::EmptyDeath;
            }
            let index = rng.gen_range(0..n);
            let xi = self.pattern.pattern().points()[index];
            let k = self.pattern.neighbors(&xi, Some(index));
            let log_ratio = (n as f64).ln() + config.log_q_ratio()
                - model.log_intensity_from_neighbors(theta, k)
                - log_area;
            let accepted = rng.gen::<f64>().ln() < log_ratio;
            if accepted {
                model.insertion_delta(k, delta);
                self.stats.sub_assign(delta);
                self.pattern.remove(index).expect("index drawn in range");
            }
            MhMove::Death { accepted }
        }
    }

    /// `config.steps` transitions at fixed θ.
    pub fn run<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
        &mut self,
        model: &M,
        theta: &[f64],
        config: &MhConfig,
        rng: &mut R,
    ) {
        for _ in 0..config.steps {
            self.step(model, theta, config, rng);
        }
    }
}

/// One transition applied to a copy of `pattern`.
pub fn mh_step<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    theta: &ParamVector,
    pattern: &PointPattern,
    config: &MhConfig,
    rng: &mut R,
) -> Result<PointPattern> {
    config.validate()?;
    check_len("model dimension", model.dim(), theta.len())?;
    let mut chain = AuxChain::new(model, pattern.clone())?;
    chain.step(model, theta.values(), config, rng);
    Ok(chain.pattern.into_pattern())
}

/// `config.steps` transitions starting from `initial`.
pub fn sample_auxiliary<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    theta: &ParamVector,
    initial: PointPattern,
    config: &MhConfig,
    rng: &mut R,
) -> Result<PointPattern> {
    config.validate()?;
    check_len("model dimension", model.dim(), theta.len())?;
    let mut chain = AuxChain::new(model, initial)?;
    chain.run(model, theta.values(), config, rng);
    Ok(chain.pattern.into_pattern())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRun {
    pub burn_in: usize,
    pub n_samples: usize,
    pub spacing: usize,
}

impl ReferenceRun {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.n_samples == 0 || self.spacing == 0 {
            return Err(Error::InvalidParameter(
                "burn_in, n_samples and spacing must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSamples {
    pub samples: Vec<SufficientStats>,
    pub mean: SufficientStats,
    /// Pattern at the last collected sample.
    pub last_pattern: PointPattern,
}

/// Long-run MH from the empty pattern: `burn_in` steps, then a sample, then
/// `spacing` steps before each further sample.
pub fn reference_samples<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    theta: &ParamVector,
    run: &ReferenceRun,
    birth_probability: f64,
    rng: &mut R,
) -> Result<ReferenceSamples> {
    run.validate()?;
    check_len("model dimension", model.dim(), theta.len())?;
    let config = MhConfig {
        steps: 1,
        birth_probability,
        max_points: None,
    };
    config.validate()?;
    let mut chain = AuxChain::empty(model)?;
    let theta = theta.values();
    for _ in 0..run.burn_in {
        chain.step(model, theta, &config, rng);
    }
    let mut samples = Vec::with_capacity(run.n_samples);
    for i in 0..run.n_samples {
        if i > 0 {
            for _ in 0..run.spacing {
                chain.step(model, theta, &config, rng);
            }
        }
        samples.push(chain.stats.clone());
    }
    let mut mean = SufficientStats::zeros(model.dim());
    for s in &samples {
        mean.add_assign(s.values());
    }
    for v in mean.0.iter_mut() {
        *v /= run.n_samples as f64;
    }
    Ok(ReferenceSamples {
        samples,
        mean,
        last_pattern: chain.pattern.into_pattern(),
    })
}

/// Componentwise mean statistics of a long MH run.
pub fn reference_stats<M: GibbsModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    theta: &ParamVector,
    run: &ReferenceRun,
    rng: &mut R,
) -> Result<SufficientStats> {
    Ok(reference_samples(model, theta, run, 0.5, rng)?.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PoissonModel, StraussModel};
    use crate::pattern::Window;
    use approx::assert_abs_diff_eq;

    fn unit() -> Window {
        Window::unit_square()
    }

    fn spread_pattern(n: usize) -> PointPattern {
        // 10x10 lattice with spacing 0.1 + tiny offset is too tight for r=0.1,
        // so place points on a coarse lattice and only use counts here.
        let pts = (0..n)
            .map(|i| Point::new((i % 10) as f64 * 0.1 + 0.05, (i / 10) as f64 * 0.1 + 0.05))
            .collect();
        PointPattern::new(unit(), pts).unwrap()
    }

    #[test]
    fn poisson_birth_ratio_is_one_at_n_99() {
        let m = PoissonModel::new(unit());
        let theta = ParamVector::from([100f64.ln()]);
        let p = spread_pattern(99);
        let lr = birth_log_ratio(&m, &theta, &p, &Point::new(0.5, 0.5), 0.5).unwrap();
        assert_abs_diff_eq!(lr, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn strauss_isolated_birth_ratio_is_two_at_n_49() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = StraussModel::theta_from_beta_gamma(100.0, 0.5).unwrap();
        // 49 points in the lower half; candidate far from all of them.
        let pts = (0..49)
            .map(|i| Point::new((i % 7) as f64 * 0.15, (i / 7) as f64 * 0.06))
            .collect();
        let p = PointPattern::new(unit(), pts).unwrap();
        let u = Point::new(0.5, 0.9);
        assert_eq!(
            m.log_conditional_intensity(&theta, &p, &u).unwrap(),
            100f64.ln()
        );
        let lr = birth_log_ratio(&m, &theta, &p, &u, 0.5).unwrap();
        assert_abs_diff_eq!(lr, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn death_of_isolated_point_ratio() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = StraussModel::theta_from_beta_gamma(100.0, 0.5).unwrap();
        let p = PointPattern::new(unit(), vec![Point::new(0.3, 0.3)]).unwrap();
        let lr = death_log_ratio(&m, &theta, &p, 0, 0.5).unwrap();
        assert_abs_diff_eq!(lr.exp(), 0.01, epsilon = 1e-14);
        assert!(death_log_ratio(&m, &theta, &p, 1, 0.5).is_err());
    }

    #[test]
    fn empty_death_is_rejected_not_failed() {
        let m = PoissonModel::new(unit());
        let cfg = MhConfig {
            birth_probability: 1e-9,
            ..MhConfig::default()
        };
        let mut chain = AuxChain::empty(&m).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        assert_eq!(chain.step(&m, &[0.0], &cfg, &mut rng), MhMove::EmptyDeath);
        assert!(chain.pattern().is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(MhConfig {
            steps: 0,
            ..MhConfig::default()
        }
        .validate()
        .is_err());
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(MhConfig {
                birth_probability: p,
                ..MhConfig::default()
            }
            .validate()
            .is_err());
        }
        let run = ReferenceRun {
            burn_in: 0,
            n_samples: 1,
            spacing: 1,
        };
        assert!(run.validate().is_err());
    }

    #[test]
    fn single_step_run_equals_mh_step() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = ParamVector::from([4.60, -0.69]);
        let start = spread_pattern(20);
        let cfg = MhConfig {
            steps: 1,
            ..MhConfig::default()
        };
        for seed in 0..20 {
            let a = mh_step(&m, &theta, &start, &cfg, &mut RngStream::new(seed, 0).rng()).unwrap();
            let b = sample_auxiliary(
                &m,
                &theta,
                start.clone(),
                &cfg,
                &mut RngStream::new(seed, 0).rng(),
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn incremental_stats_track_the_pattern() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = ParamVector::from([4.60, -0.69]);
        let mut chain = AuxChain::empty(&m).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let cfg = MhConfig::default();
        for _ in 0..50 {
            chain.run(&m, theta.values(), &cfg, &mut rng);
            assert_eq!(chain.stats(), &m.suff_stats(chain.pattern()).unwrap());
            assert!(chain.pattern().points().iter().all(|p| unit().contains(p)));
        }
    }

    #[test]
    fn same_stream_same_pattern() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = ParamVector::from([4.60, -0.69]);
        let cfg = MhConfig {
            steps: 5000,
            ..MhConfig::default()
        };
        let run = |stream| {
            let mut rng = RngStream::new(99, stream).rng();
            sample_auxiliary(&m, &theta, PointPattern::empty(unit()), &cfg, &mut rng).unwrap()
        };
        let a = run(0);
        assert_eq!(a, run(0));
        assert_ne!(a, run(1));
    }

    #[test]
    fn single_sample_reference_is_post_burn_in_stats() {
        let m = StraussModel::new(0.1, unit()).unwrap();
        let theta = ParamVector::from([4.60, -0.69]);
        let run = ReferenceRun {
            burn_in: 2000,
            n_samples: 1,
            spacing: 10,
        };
        let out =
            reference_samples(&m, &theta, &run, 0.5, &mut RngStream::new(5, 0).rng()).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.mean, m.suff_stats(&out.last_pattern).unwrap());

        let cfg = MhConfig {
            steps: 2000,
            ..MhConfig::default()
        };
        let direct = sample_auxiliary(
            &m,
            &theta,
            PointPattern::empty(unit()),
            &cfg,
            &mut RngStream::new(5, 0).rng(),
        )
        .unwrap();
        assert_eq!(direct, out.last_pattern);
    }
}
