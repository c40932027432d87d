//! TOML run configuration.
//!
//! Every field has a default, and the defaults reproduce the Strauss
//! experiment: unit square, β = 100, γ = 0.5, r = 0.1, prior box
//! [0, 7] x [−7, 0], Δ = (0.01, 0.01), m = 200, 100 auxiliary MH steps,
//! T₀ = 10⁴, k_T = 0.9999, k_Δ = 0.99999, 10⁶ sweeps kept every 10³,
//! observed statistics (45.30, 17.99).
//!
//! Defaults whose length depends on the model dimension (prior bounds,
//! Δ, Δ floor, observed statistics) are `None` until [`AppConfig::resolved`]
//! fills them in. The resolved config is what runs echo next to their output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anneal::{AnnealSchedule, RunConfig, ScheduleKind};
use crate::error::{Error, Result};
use crate::io::read_pattern_csv;
use crate::model::{AnyModel, GibbsModel, ParamVector, PoissonModel, PriorBox, StraussModel};
use crate::pattern::{SufficientStats, Window};
use crate::sampler::{MhConfig, ReferenceRun};
use crate::shadow::{ProposalShape, ShadowConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Strauss,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    pub r: f64,
    pub window: Window,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::Strauss,
            beta: None,
            gamma: None,
            theta: None,
            r: 0.1,
            window: Window::unit_square(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    pub m: usize,
    pub aux_mh_steps: usize,
    pub birth_probability: f64,
    pub proposal: ProposalShape,
}

impl Default for ShadowSection {
    fn default() -> Self {
        ShadowSection {
            delta: None,
            m: 200,
            aux_mh_steps: 100,
            birth_probability: 0.5,
            proposal: ProposalShape::Box,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSection {
    pub t0: f64,
    pub k_t: f64,
    pub k_delta: f64,
    pub t_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<Vec<f64>>,
    pub schedule: ScheduleKind,
    pub n_iterations: u64,
    pub keep_every: u64,
    /// Starting θ; the centre of the prior box when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for AnnealSection {
    fn default() -> Self {
        AnnealSection {
            t0: 1e4,
            k_t: 0.9999,
            k_delta: 0.99999,
            t_min: 1e-6,
            delta_min: None,
            schedule: ScheduleKind::Geometric,
            n_iterations: 1_000_000,
            keep_every: 1000,
            initial_theta: None,
        }
    }
}

/// Observed data: either a statistics vector or a pattern file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub burn_in: usize,
    pub n_samples: usize,
    pub spacing: usize,
    /// Also write the last sampled pattern as a pattern CSV.
    pub dump_pattern: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            burn_in: 100_000,
            n_samples: 1000,
            spacing: 100,
            dump_pattern: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PosteriorSection {
    pub n_sweeps: usize,
    /// Leading sweeps left out of the summary moments (still written out).
    pub discard: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for PosteriorSection {
    fn default() -> Self {
        PosteriorSection {
            n_sweeps: 2500,
            discard: 500,
            initial_theta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RngSection {
    pub seed: u64,
    pub stream: u64,
    /// Independent annealing chains for `map`, on streams `stream..stream+chains`.
    pub chains: usize,
}

impl Default for RngSection {
    fn default() -> Self {
        RngSection {
            seed: 20180101,
            stream: 0,
            chains: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub model: ModelSection,
    pub prior: PriorSection,
    pub shadow: ShadowSection,
    pub anneal: AnnealSection,
    pub data: DataSection,
    pub simulate: SimulateSection,
    pub posterior: PosteriorSection,
    pub rng: RngSection,
}

/// Runtime objects built from a resolved config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: AnyModel,
    /// Model parameter used by `simulate`.
    pub theta: ParamVector,
    pub prior: PriorBox,
    pub shadow: ShadowConfig,
    pub schedule: AnnealSchedule,
    pub run: RunConfig,
    pub initial_theta: ParamVector,
    pub reference: ReferenceRun,
    pub posterior_initial_theta: ParamVector,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl AppConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    /// Loads a config file. A relative `data.pattern` is taken relative to
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => cfg_err(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(p) = cfg.data.pattern.as_mut() {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn dim(&self) -> usize {
        match self.model.kind {
            ModelKind::Strauss => 2,
            ModelKind::Poisson => 1,
        }
    }

    /// Fills every dimension-dependent default and checks the one-of rules.
    pub fn resolved(&self) -> Result<AppConfig> {
        let mut c = self.clone();
        let d = self.dim();
        match c.model.kind {
            ModelKind::Strauss => {
                if c.model.theta.is_some() {
                    if c.model.beta.is_some() || c.model.gamma.is_some() {
                        return Err(cfg_err("model: give either beta/gamma or theta, not both"));
                    }
                } else {
                    c.model.beta.get_or_insert(100.0);
                    c.model.gamma.get_or_insert(0.5);
                }
            }
            ModelKind::Poisson => {
                if c.model.gamma.is_some() {
                    return Err(cfg_err("model: the Poisson model has no gamma"));
                }
                match (&c.model.theta, c.model.beta) {
                    (Some(_), Some(_)) => {
                        return Err(cfg_err("model: give either beta or theta, not both"))
                    }
                    (None, None) => c.model.beta = Some(100.0),
                    _ => {}
                }
            }
        }

        let (lower, upper) = match c.model.kind {
            ModelKind::Strauss => (vec![0.0, -7.0], vec![7.0, 0.0]),
            ModelKind::Poisson => (vec![0.0], vec![7.0]),
        };
        c.prior.lower.get_or_insert(lower);
        c.prior.upper.get_or_insert(upper);
        c.shadow.delta.get_or_insert(vec![0.01; d]);
        c.anneal.delta_min.get_or_insert(vec![1e-4; d]);

        match (&c.data.stats, &c.data.pattern) {
            (Some(_), Some(_)) => {
                return Err(cfg_err("data: give either stats or pattern, not both"))
            }
            (None, None) => match c.model.kind {
                ModelKind::Strauss => c.data.stats = Some(vec![45.30, 17.99]),
                ModelKind::Poisson => {
                    return Err(cfg_err(
                        "data: the Poisson model needs data.stats or data.pattern",
                    ))
                }
            },
            (None, Some(p)) if !p.is_file() => {
                return Err(cfg_err(format!(
                    "data.pattern {} does not exist",
                    p.display()
                )));
            }
            _ => {}
        }

        let centre = PriorBox::new(
            c.prior.lower.clone().unwrap(),
            c.prior.upper.clone().unwrap(),
        )
        .map_err(|e| cfg_err(format!("prior: {e}")))?
        .center()
        .0;
        c.anneal.initial_theta.get_or_insert(centre.clone());
        c.posterior.initial_theta.get_or_insert(centre);
        Ok(c)
    }

    /// Builds the runtime objects. Calls [`AppConfig::resolved`] first.
    pub fn experiment(&self) -> Result<Experiment> {
        let c = self.resolved()?;
        let d = c.dim();
        let window = Window::new(
            c.model.window.x_min,
            c.model.window.x_max,
            c.model.window.y_min,
            c.model.window.y_max,
        )?;
        let (model, theta) = match c.model.kind {
            ModelKind::Strauss => {
                let model = AnyModel::Strauss(StraussModel::new(c.model.r, window)?);
                let theta = match &c.model.theta {
                    Some(t) => {
                        let t = ParamVector::new(t.clone())?;
                        StraussModel::check_theta(&t)?;
                        t
                    }
                    None => StraussModel::theta_from_beta_gamma(
                        c.model.beta.unwrap(),
                        c.model.gamma.unwrap(),
                    )?,
                };
                (model, theta)
            }
            ModelKind::Poisson => {
                let theta = match (&c.model.theta, c.model.beta) {
                    (Some(t), _) => ParamVector::new(t.clone())?,
                    (None, Some(b)) if b > 0.0 => ParamVector::new(vec![b.ln()])?,
                    (None, b) => {
                        return Err(Error::InvalidParameter(format!(
                            "beta must be positive, got {b:?}"
                        )))
                    }
                };
                (AnyModel::Poisson(PoissonModel::new(window)), theta)
            }
        };
        if theta.len() != d {
            return Err(cfg_err(format!("model.theta must have {d} components")));
        }
        let check_dim = |what: &str, v: &[f64]| {
            if v.len() != d {
                Err(cfg_err(format!(
                    "{what} must have {d} components, got {}",
                    v.len()
                )))
            } else {
                Ok(())
            }
        };

        let prior = PriorBox::new(
            c.prior.lower.clone().unwrap(),
            c.prior.upper.clone().unwrap(),
        )?;
        check_dim("prior bounds", prior.lower())?;

        let shadow = ShadowConfig {
            delta: c.shadow.delta.clone().unwrap(),
            m: c.shadow.m,
            shape: c.shadow.proposal,
            aux: MhConfig {
                steps: c.shadow.aux_mh_steps,
                birth_probability: c.shadow.birth_probability,
                max_points: None,
            },
        };
        shadow.validate(d)?;

        let schedule = AnnealSchedule {
            t0: c.anneal.t0,
            k_t: c.anneal.k_t,
            k_delta: c.anneal.k_delta,
            t_min: c.anneal.t_min,
            delta_min: c.anneal.delta_min.clone().unwrap(),
            kind: c.anneal.schedule,
        };
        schedule.validate(d)?;
        let run = RunConfig {
            n_iterations: c.anneal.n_iterations,
            keep_every: c.anneal.keep_every,
        };
        run.validate()?;

        let initial_theta = ParamVector::new(c.anneal.initial_theta.clone().unwrap())?;
        check_dim("anneal.initial_theta", initial_theta.values())?;
        let posterior_initial_theta = ParamVector::new(c.posterior.initial_theta.clone().unwrap())?;
        check_dim("posterior.initial_theta", posterior_initial_theta.values())?;
        for (what, t) in [
            ("anneal", &initial_theta),
            ("posterior", &posterior_initial_theta),
        ] {
            if !prior.contains(t.values()) {
                return Err(cfg_err(format!(
                    "{what}.initial_theta lies outside the prior box"
                )));
            }
        }

        let reference = ReferenceRun {
            burn_in: c.simulate.burn_in,
            n_samples: c.simulate.n_samples,
            spacing: c.simulate.spacing,
        };
        reference.validate()?;
        if c.posterior.n_sweeps == 0 || c.posterior.discard >= c.posterior.n_sweeps {
            return Err(cfg_err(
                "posterior: need n_sweeps >= 1 and discard < n_sweeps",
            ));
        }
        if c.rng.chains == 0 {
            return Err(cfg_err("rng.chains must be at least 1"));
        }

        Ok(Experiment {
            model,
            theta,
            prior,
            shadow,
            schedule,
            run,
            initial_theta,
            reference,
            posterior_initial_theta,
        })
    }

    /// Observed statistics: the configured vector, or those of the pattern file.
    pub fn data_stats(&self, model: &AnyModel) -> Result<SufficientStats> {
        match (&self.data.stats, &self.data.pattern) {
            (Some(s), None) => {
                if s.len() != model.dim() || s.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err(format!(
                        "data.stats must hold {} finite values, got {s:?}",
                        model.dim()
                    )));
                }
                Ok(SufficientStats(s.clone()))
            }
            (None, Some(p)) => {
                let pattern = read_pattern_csv(p, *model.window())?;
                model.suff_stats(&pattern)
            }
            _ => Err(cfg_err("data: exactly one of stats or pattern must be set")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_strauss_experiment() {
        let c = AppConfig::default().resolved().unwrap();
        assert_eq!(c.model.beta, Some(100.0));
        assert_eq!(c.model.gamma, Some(0.5));
        assert_eq!(c.prior.lower, Some(vec![0.0, -7.0]));
        assert_eq!(c.data.stats, Some(vec![45.30, 17.99]));
        let e = c.experiment().unwrap();
        assert_eq!(e.shadow.delta, vec![0.01, 0.01]);
        assert_eq!(e.shadow.m, 200);
        assert_eq!(e.shadow.aux.steps, 100);
        assert_eq!(e.schedule.t0, 1e4);
        assert_eq!(e.schedule.k_t, 0.9999);
        assert_eq!(e.schedule.k_delta, 0.99999);
        assert_eq!(e.run.n_iterations, 1_000_000);
        assert_eq!(e.run.keep_every, 1000);
        assert!((e.theta.values()[0] - 4.60).abs() < 0.01);
        assert!((e.theta.values()[1] + 0.69).abs() < 0.01);
    }

    #[test]
    fn resolved_echo_round_trips() {
        let c = AppConfig::default().resolved().unwrap();
        let back = AppConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.resolved().unwrap(), c);
    }

    #[test]
    fn one_of_rules() {
        let both = "[model]\nbeta = 10.0\ntheta = [1.0, -1.0]\n";
        assert!(AppConfig::from_toml_str(both).unwrap().resolved().is_err());
        let both_data = "[data]\nstats = [1.0, 2.0]\npattern = \"x.csv\"\n";
        assert!(AppConfig::from_toml_str(both_data)
            .unwrap()
            .resolved()
            .is_err());
        let missing = "[data]\npattern = \"/definitely/not/here.csv\"\n";
        assert!(AppConfig::from_toml_str(missing)
            .unwrap()
            .resolved()
            .is_err());
        let poisson_no_data = "[model]\nkind = \"poisson\"\n";
        assert!(AppConfig::from_toml_str(poisson_no_data)
            .unwrap()
            .resolved()
            .is_err());
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(AppConfig::from_toml_str("[model]\nbogus = 1\n").is_err());
        let repulsive = "[model]\nbeta = 100.0\ngamma = 2.0\n";
        assert!(AppConfig::from_toml_str(repulsive)
            .unwrap()
            .experiment()
            .is_err());
        let start_outside = "[anneal]\ninitial_theta = [9.0, -1.0]\n";
        assert!(AppConfig::from_toml_str(start_outside)
            .unwrap()
            .experiment()
            .is_err());
    }

    #[test]
    fn poisson_config() {
        let text = "[model]\nkind = \"poisson\"\nbeta = 100.0\n[data]\nstats = [100.0]\n";
        let c = AppConfig::from_toml_str(text).unwrap();
        let e = c.experiment().unwrap();
        assert_eq!(e.model.dim(), 1);
        assert_eq!(e.prior.upper(), &[7.0]);
        assert_eq!(
            c.resolved().unwrap().data_stats(&e.model).unwrap().values(),
            &[100.0]
        );
    }
}
