//! Maximum-a-posteriori estimation for Gibbs point processes whose
//! likelihood normalizing constant is intractable.
//!
//! The estimator is simulated annealing driven by ABC Shadow dynamics:
//! an auxiliary pattern sampled at the current parameter stands in for the
//! unknown normalizing constant, and the parameter chain is tempered by a
//! decreasing temperature until it settles on the posterior mode.
//!
//! Modules, bottom-up:
//! - [`pattern`]: windows, point patterns, Strauss statistics, grid index.
//! - [`model`]: Strauss and Poisson models, uniform box prior.
//! - [`sampler`]: birth/death MH for auxiliary and reference patterns.
//! - [`shadow`]: the shadow proposal, ratio and sweep.
//! - [`anneal`]: cooling schedules and the annealing driver.
//! - [`io`] and [`commands`]: config, CSV, SVG, and the CLI commands.

pub mod anneal;
pub mod commands;
pub mod error;
pub mod io;
pub mod model;
pub mod pattern;
pub mod sampler;
pub mod shadow;

pub use error::{Error, Result};
pub use model::{AnyModel, GibbsModel, ParamVector, PoissonModel, PriorBox, StraussModel};
pub use pattern::{Point, PointPattern, SufficientStats, Window};
pub use sampler::{MhConfig, RngStream};
pub use shadow::{ShadowConfig, ShadowState};
