//! Time-per-token statistics.
//!
//! Every completed job contributes `T = (t_stop - t_start) / S`. Reports give
//! the mean and population standard deviation of `T` scaled to 1000 tokens,
//! per group and over the whole population.

use serde::Serialize;

use crate::error::{Error, Result};

/// Group label of the whole-population row.
pub const GLOBAL_GROUP: &str = "__global__";

/// Reports express time-per-token per this many tokens.
pub const REPORT_SCALE: f64 = 1000.0;

pub fn time_per_token(duration: u64, size: f64) -> Result<f64> {
    if duration == 0 || !(size > 0.0) {
        return Err(Error::contract(format!(
            "time-per-token needs a positive duration and size (got {duration}, {size})"
        )));
    }
    Ok(duration as f64 / size)
}

/// Count, sum and sum of squares of a stream of observations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &RunningStats) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> Option<f64> {
        let mean = self.mean()?;
        Some((self.sum_sq / self.count as f64 - mean * mean).max(0.0).sqrt())
    }
}

/// Per-group and per-agent statistics of jobs completing after the warmup.
#[derive(Clone, Debug)]
pub struct MetricsAccumulator {
    warmup_cutoff: u64,
    groups: Vec<RunningStats>,
    agents: Vec<RunningStats>,
}

impl MetricsAccumulator {
    pub fn new(groups: usize, agents: usize, warmup_cutoff: u64) -> Self {
        MetricsAccumulator {
            warmup_cutoff,
            groups: vec![RunningStats::default(); groups],
            agents: vec![RunningStats::default(); agents],
        }
    }

    pub fn warmup_cutoff(&self) -> u64 {
        self.warmup_cutoff
    }

    /// Records one completion; returns whether it was past the warmup.
    pub fn record(&mut self, agent: usize, group: usize, t_stop: u64, time_per_token: f64) -> bool {
        if t_stop <= self.warmup_cutoff {
            return false;
        }
        self.groups[group].push(time_per_token);
        self.agents[agent].push(time_per_token);
        true
    }

    pub fn group_stats(&self) -> &[RunningStats] {
        &self.groups
    }

    pub fn agent_stats(&self) -> &[RunningStats] {
        &self.agents
    }

    pub fn global_stats(&self) -> RunningStats {
        self.groups.iter().fold(RunningStats::default(), |mut acc, g| {
            acc.merge(g);
            acc
        })
    }

    /// Builds a report. `groups` gives each group's name, rule label and
    /// member agents, in group order.
    pub fn report<'a>(
        &self,
        scenario: &str,
        seed: u64,
        groups: impl IntoIterator<Item = (&'a str, String, std::ops::Range<usize>)>,
    ) -> RunReport {
        let mut rows = Vec::new();
        let mut all_agents = Vec::new();
        let mut rules: Vec<String> = Vec::new();
        for (i, (name, rule, members)) in groups.into_iter().enumerate() {
            let agents = &self.agents[members];
            all_agents.extend_from_slice(agents);
            if !rules.contains(&rule) {
                rules.push(rule.clone());
            }
            rows.push(GroupReport::new(name, rule, &self.groups[i], agents));
        }
        let global_rule = match rules.as_slice() {
            [only] => only.clone(),
            _ => "mixed".to_string(),
        };
        RunReport {
            scenario: scenario.to_string(),
            seed,
            global: GroupReport::new(GLOBAL_GROUP, global_rule, &self.global_stats(), &all_agents),
            groups: rows,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    pub group: String,
    pub rule: String,
    pub jobs_completed: u64,
    pub mean_tpt_x1000: Option<f64>,
    pub std_tpt_x1000: Option<f64>,
    /// Mean over agents of each agent's own mean time-per-token.
    pub agent_mean_tpt_x1000: Option<f64>,
    /// Standard deviation across agents of their mean time-per-token.
    pub agent_std_tpt_x1000: Option<f64>,
}

impl GroupReport {
    fn new(name: &str, rule: String, jobs: &RunningStats, agents: &[RunningStats]) -> Self {
        let mut per_agent = RunningStats::default();
        for mean in agents.iter().filter_map(RunningStats::mean) {
            per_agent.push(mean);
        }
        let scale = |v: Option<f64>| v.map(|x| x * REPORT_SCALE);
        GroupReport {
            group: name.to_string(),
            rule,
            jobs_completed: jobs.count,
            mean_tpt_x1000: scale(jobs.mean()),
            std_tpt_x1000: scale(jobs.std_dev()),
            agent_mean_tpt_x1000: scale(per_agent.mean()),
            agent_std_tpt_x1000: scale(per_agent.std_dev()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.jobs_completed == 0
    }
}

/// Outcome of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub groups: Vec<GroupReport>,
    pub global: GroupReport,
}

impl RunReport {
    /// True when no job completed inside the measurement window.
    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Group rows followed by the global row.
    pub fn rows(&self) -> impl Iterator<Item = &GroupReport> {
        self.groups.iter().chain(std::iter::once(&self.global))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn acc_with(values: &[(usize, usize, f64)], groups: usize, agents: usize) -> MetricsAccumulator {
        let mut acc = MetricsAccumulator::new(groups, agents, 0);
        for &(agent, group, t) in values {
            acc.record(agent, group, 1, t);
        }
        acc
    }

    #[test]
    fn time_per_token_values() {
        assert_eq!(time_per_token(2, 80.0).unwrap(), 0.025);
        assert_eq!(time_per_token(3, 100.0).unwrap(), 0.03);
        assert_eq!(time_per_token(7, 7000.0).unwrap(), 0.001);
        assert!(time_per_token(0, 10.0).is_err());
        assert!(time_per_token(1, 0.0).is_err());
    }

    #[test]
    fn two_point_statistics() {
        let acc = acc_with(&[(0, 0, 0.02), (1, 0, 0.04)], 1, 2);
        let report = acc.report("t", 1, [("g0", "static(0)".to_string(), 0..2)]);
        assert!((report.global.mean_tpt_x1000.unwrap() - 30.0).abs() < 1e-12);
        assert!((report.global.std_tpt_x1000.unwrap() - 10.0).abs() < 1e-9);
        // single group: global row mirrors it
        let g = &report.groups[0];
        assert_eq!(g.mean_tpt_x1000, report.global.mean_tpt_x1000);
        assert_eq!(g.std_tpt_x1000, report.global.std_tpt_x1000);
        assert_eq!(g.jobs_completed, report.global.jobs_completed);
        assert_eq!(report.global.rule, "static(0)");
    }

    #[test]
    fn warmup_filter_keys_on_stop_time() {
        let mut acc = MetricsAccumulator::new(1, 1, 100);
        assert!(!acc.record(0, 0, 100, 0.1));
        assert!(acc.record(0, 0, 101, 0.1));
        assert_eq!(acc.global_stats().count, 1);
    }

    #[test]
    fn empty_report_has_no_means() {
        let acc = MetricsAccumulator::new(2, 4, 0);
        let report = acc.report("e", 0, [("a", "bcsr".into(), 0..2), ("b", "load_querying".into(), 2..4)]);
        assert!(report.is_empty());
        assert!(report.rows().all(|r| r.mean_tpt_x1000.is_none() && r.std_tpt_x1000.is_none()));
        assert_eq!(report.global.rule, "mixed");
    }

    #[test]
    fn per_agent_columns() {
        let acc = acc_with(&[(0, 0, 0.01), (0, 0, 0.03), (1, 0, 0.06)], 1, 3);
        let g = &acc.report("p", 0, [("g", "x".into(), 0..3)]).groups[0];
        // agent means 0.02 and 0.06; agent 2 has no jobs
        assert!((g.agent_mean_tpt_x1000.unwrap() - 40.0).abs() < 1e-9);
        assert!((g.agent_std_tpt_x1000.unwrap() - 20.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn global_mean_is_count_weighted(values in prop::collection::vec((0usize..3, 0.001f64..0.5), 1..200)) {
            let records: Vec<_> = values.iter().enumerate().map(|(i, &(g, t))| (i, g, t)).collect();
            let acc = acc_with(&records, 3, values.len());
            let report = acc.report("w", 0, (0..3).map(|g| ("g", g.to_string(), 0..0)));
            let (mut num, mut den) = (0.0, 0.0);
            for row in &report.groups {
                if let Some(mean) = row.mean_tpt_x1000 {
                    num += mean * row.jobs_completed as f64;
                    den += row.jobs_completed as f64;
                }
            }
            prop_assert!((report.global.mean_tpt_x1000.unwrap() - num / den).abs() < 1e-9);
        }

        #[test]
        fn streaming_matches_two_pass(values in prop::collection::vec(0.005f64..0.4, 2..500)) {
            let mut stats = RunningStats::default();
            values.iter().for_each(|&v| stats.push(v));
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(((stats.mean().unwrap() - mean) / mean).abs() < 1e-6);
            let std = var.sqrt();
            // near-constant samples leave the deviation at rounding noise
            prop_assert!((stats.std_dev().unwrap() - std).abs() <= 1e-6 * std.max(mean));
        }
    }
}
