//! Discrete-time simulator for adaptive load balancing among self-interested
//! agents.
//!
//! `N` agents repeatedly submit jobs to `M` shared resources. A resource
//! splits its capacity equally among the jobs it is serving, so the service an
//! agent gets depends on what everybody else chose. Agents only see the
//! outcome of their own jobs and learn from it which resources to prefer.
//!
//! - [`rules`]: the Ω family of adaptive selection rules, BCSR, and the
//!   static and load-querying benchmarks.
//! - [`environment`]: hourly load profiles and daily capacity schedules.
//! - [`society`]: heterogeneous groups and communicating neighborhoods.
//! - [`engine`]: the tick loop.
//! - [`metrics`]: time-per-token statistics.
//! - [`config`], [`presets`], [`sweep`]: scenario files, the experiment
//!   catalog and multi-seed sweeps with CSV output.
//!
//! ```
//! use adaptive_lb::{run, ScenarioConfig, SelectionRule};
//!
//! let config = ScenarioConfig::default()
//!     .homogeneous(SelectionRule::omega(0.3, 4.0))
//!     .with_weeks(0, 0);
//! let report = run(&config).unwrap();
//! assert!(report.is_empty());
//! ```

pub mod config;
pub mod engine;
pub mod environment;
pub mod error;
pub mod metrics;
pub mod presets;
pub mod rules;
pub mod society;
pub mod sweep;

pub use config::{load_config, ScenarioConfig};
pub use engine::{run, Simulation};
pub use error::{Error, Result};
pub use metrics::RunReport;
pub use presets::preset;
pub use rules::{EfficiencyEstimator, SelectionRule};
pub use sweep::{run_sweep, SweepSpec};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/estimator.md")]
    mod estimator {}
    #[doc = include_str!("../../../book/src/selection-rules.md")]
    mod selection_rules {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/society.md")]
    mod society {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
