//! Scenario configuration files.
//!
//! Configurations are TOML. Every key is optional; omitted keys take the
//! default experimental setting (100 agents, 5 resources with capacities
//! 40/20/20/10/10, job sizes 50..=150, load levels 0.1%/0.3%/1%, one warmup
//! week and four measured weeks).
//!
//! ```toml
//! name = "example"
//! seed = 7
//!
//! [load]
//! kind = "random"            # fixed | pattern | random
//! fixed_level = "hi"         # lo | hi | peak, used by kind = "fixed"
//! levels = [0.001, 0.003, 0.01]
//! peak_hours = 2             # peak hours per pattern or random week
//!
//! [capacity]
//! kind = "fixed"             # fixed | rotating
//! values = [40, 20, 20, 10, 10]
//!
//! [[groups]]
//! size = 80
//! rule = "omega(w=0.3, n=10)"
//!
//! [[groups]]
//! size = 20
//! rule = "omega(w=0.3, n=4)"
//!
//! [[neighborhoods]]
//! size = 80
//! count = 1
//! communicating = false
//!
//! [[neighborhoods]]
//! size = 10
//! count = 2
//! communicating = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::{
    CapacitySchedule, Environment, JobSizeDistribution, LoadLevel, LoadLevels, LoadProfile,
    DEFAULT_PEAK_HOURS,
};
use crate::error::{Error, Result};
use crate::rules::{static_assignment, SelectionRule};
use crate::society::{GroupSpec, NeighborhoodSpec, Society};

pub const DEFAULT_AGENTS: usize = 100;
pub const DEFAULT_CAPACITIES: [f64; 5] = [40.0, 20.0, 20.0, 10.0, 10.0];
pub const DEFAULT_WARMUP_WEEKS: u64 = 1;
pub const DEFAULT_MEASURE_WEEKS: u64 = 4;

pub fn default_rule() -> SelectionRule {
    SelectionRule::omega(0.3, 4.0)
}

/// A fully specified simulation scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub agents: usize,
    pub resources: usize,
    pub capacity: CapacitySchedule,
    pub load: LoadProfile,
    pub levels: LoadLevels,
    /// Peak hours per pattern or random week.
    pub peak_hours: usize,
    pub job_size: JobSizeDistribution,
    pub groups: Vec<GroupSpec>,
    /// Empty means every agent decides alone.
    pub neighborhoods: Vec<NeighborhoodSpec>,
    pub seed: u64,
    pub warmup_weeks: u64,
    pub measure_weeks: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "default".to_string(),
            agents: DEFAULT_AGENTS,
            resources: DEFAULT_CAPACITIES.len(),
            capacity: CapacitySchedule::Fixed(DEFAULT_CAPACITIES.to_vec()),
            load: LoadProfile::Fixed(LoadLevel::Hi),
            levels: LoadLevels::default(),
            peak_hours: DEFAULT_PEAK_HOURS,
            job_size: JobSizeDistribution::default(),
            groups: vec![GroupSpec::new(DEFAULT_AGENTS, default_rule())],
            neighborhoods: Vec::new(),
            seed: 1,
            warmup_weeks: DEFAULT_WARMUP_WEEKS,
            measure_weeks: DEFAULT_MEASURE_WEEKS,
        }
    }
}

impl ScenarioConfig {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_load(mut self, load: LoadProfile) -> Self {
        self.load = load;
        self
    }

    pub fn with_capacity(mut self, capacity: CapacitySchedule) -> Self {
        self.resources = capacity.base().len();
        self.capacity = capacity;
        self
    }

    pub fn with_groups(mut self, groups: Vec<GroupSpec>) -> Self {
        self.groups = groups;
        self
    }

    pub fn with_neighborhoods(mut self, neighborhoods: Vec<NeighborhoodSpec>) -> Self {
        self.neighborhoods = neighborhoods;
        self
    }

    /// All agents share one rule.
    pub fn homogeneous(self, rule: SelectionRule) -> Self {
        let agents = self.agents;
        self.with_groups(vec![GroupSpec::new(agents, rule)])
    }

    /// Static configuration vector: `configuration[r]` agents always use
    /// resource `r`. Empty entries produce no group.
    pub fn with_static_configuration(self, configuration: &[usize]) -> Result<Self> {
        if configuration.len() != self.resources {
            return Err(Error::validation(
                "configuration",
                format!("{} entries given for {} resources", configuration.len(), self.resources),
            ));
        }
        static_assignment(configuration, self.agents)?;
        let groups = configuration
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| GroupSpec::named(format!("r{r}"), c, SelectionRule::Static(r)))
            .collect();
        Ok(self.with_groups(groups))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_weeks(mut self, warmup: u64, measure: u64) -> Self {
        self.warmup_weeks = warmup;
        self.measure_weeks = measure;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::validation("agents", "need at least one agent"));
        }
        if self.resources == 0 {
            return Err(Error::validation("resources", "need at least one resource"));
        }
        self.capacity.validate(self.resources)?;
        self.levels.validate()?;
        self.job_size.validate()?;
        self.environment()?;
        self.society()?;
        Ok(())
    }

    pub fn environment(&self) -> Result<Environment> {
        Environment::new(self.load, self.levels, self.capacity.clone(), self.job_size)?
            .with_peak_hours(self.peak_hours)
    }

    pub fn society(&self) -> Result<Society> {
        Society::new(self.agents, self.resources, &self.groups, &self.neighborhoods)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_config()
    }

    pub fn to_toml_string(&self) -> String {
        let (kind, fixed_level) = match self.load {
            LoadProfile::Fixed(level) => (LoadKind::Fixed, Some(level)),
            LoadProfile::PatternWeek => (LoadKind::Pattern, None),
            LoadProfile::RandomWeek => (LoadKind::Random, None),
        };
        let raw = RawConfig {
            name: Some(self.name.clone()),
            agents: Some(self.agents),
            resources: Some(self.resources),
            seed: Some(self.seed),
            warmup_weeks: Some(self.warmup_weeks),
            measure_weeks: Some(self.measure_weeks),
            load: Some(RawLoad {
                kind: Some(kind),
                fixed_level,
                levels: Some([self.levels.lo, self.levels.hi, self.levels.peak]),
                peak_hours: Some(self.peak_hours),
            }),
            capacity: Some(RawCapacity {
                kind: Some(match self.capacity {
                    CapacitySchedule::Fixed(_) => CapacityKind::Fixed,
                    CapacitySchedule::RotatingDaily { .. } => CapacityKind::Rotating,
                }),
                values: Some(self.capacity.base().to_vec()),
            }),
            job_size: Some(self.job_size),
            groups: Some(self.groups.clone()),
            neighborhoods: (!self.neighborhoods.is_empty()).then(|| self.neighborhoods.clone()),
            configuration: None,
        };
        toml::to_string(&raw).expect("configuration serializes")
    }
}

/// Reads and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.name.is_none() {
        raw.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    raw.into_config()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LoadKind {
    Fixed,
    Pattern,
    Random,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CapacityKind {
    Fixed,
    Rotating,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    kind: Option<LoadKind>,
    fixed_level: Option<LoadLevel>,
    levels: Option<[f64; 3]>,
    peak_hours: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCapacity {
    kind: Option<CapacityKind>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agents: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    resources: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warmup_weeks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure_weeks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    load: Option<RawLoad>,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity: Option<RawCapacity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    job_size: Option<JobSizeDistribution>,
    /// Shorthand for static groups; excludes `groups`.
    #[serde(skip_serializing_if = "Option::is_none")]
    configuration: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<GroupSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    neighborhoods: Option<Vec<NeighborhoodSpec>>,
}

impl RawConfig {
    fn into_config(self) -> Result<ScenarioConfig> {
        let defaults = ScenarioConfig::default();
        let agents = self.agents.unwrap_or(defaults.agents);

        let capacity_raw = self.capacity.unwrap_or_default();
        let values = match (capacity_raw.values, self.resources) {
            (Some(v), _) => v,
            (None, None) => DEFAULT_CAPACITIES.to_vec(),
            (None, Some(m)) if m == DEFAULT_CAPACITIES.len() => DEFAULT_CAPACITIES.to_vec(),
            (None, Some(m)) => {
                return Err(Error::validation(
                    "capacity.values",
                    format!("required when resources = {m}"),
                ))
            }
        };
        let resources = self.resources.unwrap_or(values.len());
        let capacity = match capacity_raw.kind.unwrap_or(CapacityKind::Fixed) {
            CapacityKind::Fixed => CapacitySchedule::Fixed(values),
            CapacityKind::Rotating => CapacitySchedule::RotatingDaily { base: values },
        };

        let load_raw = self.load.unwrap_or_default();
        let load = match load_raw.kind.unwrap_or(LoadKind::Fixed) {
            LoadKind::Fixed => LoadProfile::Fixed(load_raw.fixed_level.unwrap_or(LoadLevel::Hi)),
            LoadKind::Pattern => LoadProfile::PatternWeek,
            LoadKind::Random => LoadProfile::RandomWeek,
        };
        let levels = load_raw
            .levels
            .map(|[lo, hi, peak]| LoadLevels { lo, hi, peak })
            .unwrap_or_default();

        let mut config = ScenarioConfig {
            name: self.name.unwrap_or(defaults.name),
            agents,
            resources,
            capacity,
            load,
            levels,
            peak_hours: load_raw.peak_hours.unwrap_or(DEFAULT_PEAK_HOURS),
            job_size: self.job_size.unwrap_or_default(),
            groups: vec![GroupSpec::new(agents, default_rule())],
            neighborhoods: self.neighborhoods.unwrap_or_default(),
            seed: self.seed.unwrap_or(defaults.seed),
            warmup_weeks: self.warmup_weeks.unwrap_or(defaults.warmup_weeks),
            measure_weeks: self.measure_weeks.unwrap_or(defaults.measure_weeks),
        };
        match (self.groups, self.configuration) {
            (Some(_), Some(_)) => {
                return Err(Error::validation("configuration", "cannot be combined with `groups`"))
            }
            (Some(groups), None) => config.groups = groups,
            (None, Some(configuration)) => config = config.with_static_configuration(&configuration)?,
            (None, None) => {}
        }
        config.validate()?;
        Ok(config)
    }
}
