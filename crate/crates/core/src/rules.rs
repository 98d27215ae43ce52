//! Resource-selection rules.
//!
//! The adaptive rules keep an [`EfficiencyEstimator`] per agent: an estimate
//! of the time-per-token each resource delivers, plus the number of completed
//! jobs that estimate is built from. The Ω family samples a resource with
//! probability proportional to `ee(R)^-n`; BCSR always takes the current best.
//! The two benchmark rules ignore history: a static rule always uses the same
//! resource, and the load-querying rule picks the resource that is least
//! crowded relative to its capacity.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ResourceId = usize;

/// History weight used by rules that don't learn, so every completion still
/// updates the owner's estimator.
pub const DEFAULT_HISTORY_WEIGHT: f64 = 0.3;

/// Initial estimate for resources an agent has never used. Never read by the
/// selection functions, which treat `jd == 0` entries as untried.
const UNTRIED_EE: f64 = 1.0;

/// Feedback delivered to an agent when one of its jobs completes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feedback {
    pub resource: ResourceId,
    pub t_start: u64,
    pub t_stop: u64,
    pub size: f64,
}

impl Feedback {
    /// Observed time-per-token of the job.
    pub fn time_per_token(&self) -> f64 {
        (self.t_stop - self.t_start) as f64 / self.size
    }
}

/// Per-agent learning state: estimated time-per-token (`ee`) and completed
/// job count (`jd`) for each resource.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEstimator {
    ee: Vec<f64>,
    jd: Vec<u64>,
}

impl EfficiencyEstimator {
    pub fn new(resources: usize) -> Self {
        EfficiencyEstimator {
            ee: vec![UNTRIED_EE; resources],
            jd: vec![0; resources],
        }
    }

    /// Builds an estimator from raw vectors. Entries with `jd > 0` must have
    /// positive `ee`.
    pub fn from_parts(ee: Vec<f64>, jd: Vec<u64>) -> Result<Self> {
        if ee.len() != jd.len() {
            return Err(Error::contract(format!(
                "ee has {} entries but jd has {}",
                ee.len(),
                jd.len()
            )));
        }
        if let Some(r) = (0..ee.len()).find(|&r| jd[r] > 0 && !(ee[r] > 0.0 && ee[r].is_finite())) {
            return Err(Error::contract(format!(
                "ee({r}) = {} is not a positive finite value",
                ee[r]
            )));
        }
        Ok(EfficiencyEstimator { ee, jd })
    }

    pub fn resources(&self) -> usize {
        self.ee.len()
    }

    pub fn ee(&self) -> &[f64] {
        &self.ee
    }

    pub fn jd(&self) -> &[u64] {
        &self.jd
    }

    pub fn is_tried(&self, resource: ResourceId) -> bool {
        self.jd[resource] > 0
    }

    pub fn any_tried(&self) -> bool {
        self.jd.iter().any(|&c| c > 0)
    }

    /// Arithmetic mean of `ee` over tried resources.
    pub fn mean_tried(&self) -> Option<f64> {
        let (sum, count) = self
            .ee
            .iter()
            .zip(&self.jd)
            .filter(|(_, &jd)| jd > 0)
            .fold((0.0, 0usize), |(s, c), (&ee, _)| (s + ee, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    /// Folds one completed job into the estimate for its resource.
    ///
    /// `jd(R)` is incremented first, then `W = w + (1 - w) / jd(R)` and
    /// `ee(R) := W·T + (1 - W)·ee(R)`. The first feedback on a resource
    /// therefore has `W = 1` and overwrites the estimate.
    pub fn update(&mut self, feedback: &Feedback, w: f64) -> Result<()> {
        let r = feedback.resource;
        if r >= self.ee.len() {
            return Err(Error::contract(format!("feedback for unknown resource {r}")));
        }
        if !(feedback.size > 0.0) {
            return Err(Error::contract(format!(
                "job size must be positive, got {}",
                feedback.size
            )));
        }
        if feedback.t_stop <= feedback.t_start {
            return Err(Error::contract(format!(
                "job duration must be positive (t_start {}, t_stop {})",
                feedback.t_start, feedback.t_stop
            )));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::contract(format!("history weight {w} outside [0, 1]")));
        }
        let t = feedback.time_per_token();
        self.jd[r] += 1;
        let weight = w + (1.0 - w) / self.jd[r] as f64;
        self.ee[r] = if self.jd[r] == 1 {
            t
        } else {
            weight * t + (1.0 - weight) * self.ee[r]
        };
        Ok(())
    }
}

/// Parameters of an Ω rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaParams {
    /// History weight in `[0, 1]`.
    pub w: f64,
    /// Selection-bias exponent, positive.
    pub n: f64,
}

impl OmegaParams {
    pub fn new(w: f64, n: f64) -> Result<Self> {
        let params = OmegaParams { w, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::validation("rule.w", format!("{} is outside [0, 1]", self.w)));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::validation("rule.n", format!("{} is not a positive number", self.n)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectionRule {
    Omega(OmegaParams),
    /// Best Choice: always the resource with the lowest estimate. `w` only
    /// drives the estimator update.
    Bcsr { w: f64 },
    Static(ResourceId),
    LoadQuerying,
}

impl SelectionRule {
    pub fn omega(w: f64, n: f64) -> Self {
        SelectionRule::Omega(OmegaParams { w, n })
    }

    pub fn bcsr() -> Self {
        SelectionRule::Bcsr {
            w: DEFAULT_HISTORY_WEIGHT,
        }
    }

    /// Weight used when folding feedback into the owner's estimator.
    pub fn history_weight(&self) -> f64 {
        match *self {
            SelectionRule::Omega(p) => p.w,
            SelectionRule::Bcsr { w } => w,
            SelectionRule::Static(_) | SelectionRule::LoadQuerying => DEFAULT_HISTORY_WEIGHT,
        }
    }

    /// Whether the rule reads an efficiency estimator when choosing.
    pub fn uses_estimator(&self) -> bool {
        matches!(self, SelectionRule::Omega(_) | SelectionRule::Bcsr { .. })
    }

    pub fn validate(&self, resources: usize) -> Result<()> {
        match *self {
            SelectionRule::Omega(p) => p.validate(),
            SelectionRule::Bcsr { w } if !(0.0..=1.0).contains(&w) => {
                Err(Error::validation("rule.w", format!("{w} is outside [0, 1]")))
            }
            SelectionRule::Static(r) if r >= resources => Err(Error::validation(
                "rule",
                format!("static resource {r} out of range for {resources} resources"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::Omega(p) => write!(f, "omega(w={}, n={})", p.w, p.n),
            SelectionRule::Bcsr { w } if *w == DEFAULT_HISTORY_WEIGHT => f.write_str("bcsr"),
            SelectionRule::Bcsr { w } => write!(f, "bcsr(w={w})"),
            SelectionRule::Static(r) => write!(f, "static({r})"),
            SelectionRule::LoadQuerying => f.write_str("load_querying"),
        }
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::validation("rule", format!("`{s}`: {msg}"));
        let text = s.trim();
        let (name, args) = match text.find('(') {
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad("missing closing parenthesis"))?;
                (text[..open].trim(), Some(inner))
            }
            None => (text, None),
        };
        let keyed = |args: &str| -> Result<Vec<(String, f64)>> {
            args.split(',')
                .filter(|a| !a.trim().is_empty())
                .map(|a| {
                    let (k, v) = a.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    let v: f64 = v.trim().parse().map_err(|_| bad("not a number"))?;
                    Ok((k.trim().to_string(), v))
                })
                .collect()
        };
        match (name, args) {
            ("omega", Some(args)) => {
                let (mut w, mut n) = (None, None);
                for (k, v) in keyed(args)? {
                    match k.as_str() {
                        "w" => w = Some(v),
                        "n" => n = Some(v),
                        _ => return Err(bad("omega takes only `w` and `n`")),
                    }
                }
                let params = OmegaParams {
                    w: w.ok_or_else(|| bad("missing `w`"))?,
                    n: n.ok_or_else(|| bad("missing `n`"))?,
                };
                params.validate()?;
                Ok(SelectionRule::Omega(params))
            }
            ("bcsr", None) => Ok(SelectionRule::bcsr()),
            ("bcsr", Some(args)) => {
                let mut w = DEFAULT_HISTORY_WEIGHT;
                for (k, v) in keyed(args)? {
                    if k != "w" {
                        return Err(bad("bcsr takes only `w`"));
                    }
                    w = v;
                }
                let rule = SelectionRule::Bcsr { w };
                rule.validate(usize::MAX)?;
                Ok(rule)
            }
            ("static", Some(arg)) => arg
                .trim()
                .parse()
                .map(SelectionRule::Static)
                .map_err(|_| bad("expected a resource index")),
            ("load_querying", None) => Ok(SelectionRule::LoadQuerying),
            _ => Err(bad(
                "expected omega(w=<real>, n=<real>), bcsr, static(<index>) or load_querying",
            )),
        }
    }
}

impl Serialize for SelectionRule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SelectionRule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Applies one feedback tuple, returning the updated estimator.
pub fn update_estimator(
    est: &EfficiencyEstimator,
    feedback: &Feedback,
    w: f64,
) -> Result<EfficiencyEstimator> {
    let mut next = est.clone();
    next.update(feedback, w)?;
    Ok(next)
}

/// Writes the Ω selection distribution into `out`.
///
/// Weights are `ee(R)^-n` for tried resources and `E[ee]^-n` for untried
/// ones, computed in log space and normalised to sum to one.
fn omega_weights_into(est: &EfficiencyEstimator, n: f64, out: &mut [f64]) -> Result<()> {
    debug_assert_eq!(out.len(), est.resources());
    for (r, (&ee, &jd)) in est.ee.iter().zip(&est.jd).enumerate() {
        if jd > 0 && !(ee > 0.0 && ee.is_finite()) {
            return Err(Error::contract(format!("ee({r}) = {ee} must be positive")));
        }
    }
    let mean = est
        .mean_tried()
        .ok_or_else(|| Error::contract("omega weights need at least one tried resource"))?;
    let log_mean = mean.ln();
    let mut max = f64::NEG_INFINITY;
    for (slot, (&ee, &jd)) in out.iter_mut().zip(est.ee.iter().zip(&est.jd)) {
        let log_value = if jd > 0 { ee.ln() } else { log_mean };
        *slot = -n * log_value;
        max = max.max(*slot);
    }
    let mut sigma = 0.0;
    for slot in out.iter_mut() {
        *slot = (*slot - max).exp();
        sigma += *slot;
    }
    for slot in out.iter_mut() {
        *slot /= sigma;
    }
    Ok(())
}

/// Ω selection probabilities over resources.
pub fn omega_weights(est: &EfficiencyEstimator, n: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; est.resources()];
    omega_weights_into(est, n, &mut out)?;
    Ok(out)
}

/// Samples a resource from the Ω distribution, or uniformly when nothing has
/// been tried yet.
pub fn omega_select<R: Rng + ?Sized>(est: &EfficiencyEstimator, n: f64, rng: &mut R) -> Result<ResourceId> {
    let m = est.resources();
    if !est.any_tried() {
        return Ok(rng.random_range(0..m));
    }
    let mut buf = [0.0; 16];
    let mut heap;
    let weights: &mut [f64] = if m <= buf.len() {
        &mut buf[..m]
    } else {
        heap = vec![0.0; m];
        &mut heap
    };
    omega_weights_into(est, n, weights)?;
    Ok(sample_index(weights, rng))
}

/// Index drawn with probability proportional to `weights`.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Uniformly random index among the minima of `values`.
fn argmin_random_tie<R: Rng + ?Sized, T: PartialOrd + Copy>(values: impl Iterator<Item = T> + Clone, rng: &mut R) -> usize {
    let mut best: Option<T> = None;
    let mut ties = 0usize;
    for v in values.clone() {
        match best {
            Some(b) if v > b => {}
            Some(b) if v == b => ties += 1,
            _ => {
                best = Some(v);
                ties = 1;
            }
        }
    }
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .enumerate()
        .filter(|&(_, v)| Some(v) == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("non-empty input")
}

/// The resource with the lowest estimate; untried resources count as `E[ee]`.
pub fn bcsr_select<R: Rng + ?Sized>(est: &EfficiencyEstimator, rng: &mut R) -> ResourceId {
    let Some(mean) = est.mean_tried() else {
        return rng.random_range(0..est.resources());
    };
    let values = est
        .ee
        .iter()
        .zip(&est.jd)
        .map(move |(&ee, &jd)| if jd > 0 { ee } else { mean });
    argmin_random_tie(values, rng)
}

/// The resource where a new job would get the largest share right now,
/// i.e. the lowest `(active + 1) / capacity`, ties broken uniformly. With
/// equal capacities this is the resource with the fewest active jobs.
pub fn load_query_select<R: Rng + ?Sized>(active_jobs: &[usize], capacities: &[f64], rng: &mut R) -> ResourceId {
    debug_assert_eq!(active_jobs.len(), capacities.len());
    let crowding = active_jobs
        .iter()
        .zip(capacities)
        .map(|(&k, &c)| (k + 1) as f64 / c);
    argmin_random_tie(crowding, rng)
}

/// Expands a configuration vector into a per-agent resource assignment:
/// the first `c[0]` agents use resource 0, the next `c[1]` resource 1, and so on.
pub fn static_assignment(configuration: &[usize], agents: usize) -> Result<Vec<ResourceId>> {
    let total: usize = configuration.iter().sum();
    if total != agents {
        return Err(Error::validation(
            "configuration",
            format!("entries sum to {total}, expected {agents}"),
        ));
    }
    Ok(configuration
        .iter()
        .enumerate()
        .flat_map(|(r, &count)| std::iter::repeat_n(r, count))
        .collect())
}
