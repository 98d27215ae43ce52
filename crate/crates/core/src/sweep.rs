//! Multi-run experiments and CSV output.
//!
//! A sweep is a list of cells (scenarios) crossed with a list of seeds. Runs
//! are independent and may execute in parallel; results are always assembled
//! in (cell, seed) order so the CSV bytes depend only on the spec.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::engine::run;
use crate::error::{Error, Result};
use crate::metrics::{GroupReport, RunReport};
use crate::rules::SelectionRule;

/// Default number of seeds for seed-averaged results.
pub const DEFAULT_SEEDS: usize = 5;

/// Seed label of the per-cell average rows.
pub const SUMMARY_SEED: &str = "mean";

pub const CSV_HEADER: [&str; 7] = [
    "scenario",
    "seed",
    "group",
    "rule",
    "jobs_completed",
    "mean_tpt_x1000",
    "std_tpt_x1000",
];

/// Seeds `1..=k`.
pub fn seed_list(k: usize) -> Vec<u64> {
    (1..=k as u64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub label: String,
    pub config: ScenarioConfig,
}

impl SweepCell {
    pub fn new(label: impl Into<String>, config: ScenarioConfig) -> Self {
        let label = label.into();
        SweepCell {
            config: config.named(label.clone()),
            label,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    W,
    N,
}

/// Values of one Ω parameter, applied to one group or to every group whose
/// rule has that parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub group: Option<usize>,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: Param, values: impl Into<Vec<f64>>) -> Self {
        Axis {
            param,
            group: None,
            values: values.into(),
        }
    }

    pub fn for_group(mut self, group: usize) -> Self {
        self.group = Some(group);
        self
    }

    fn apply(&self, config: &mut ScenarioConfig, value: f64) -> Result<()> {
        let mut touched = false;
        for (g, spec) in config.groups.iter_mut().enumerate() {
            if self.group.is_some_and(|target| target != g) {
                continue;
            }
            match (&mut spec.rule, self.param) {
                (SelectionRule::Omega(p), Param::W) => p.w = value,
                (SelectionRule::Omega(p), Param::N) => p.n = value,
                (SelectionRule::Bcsr { w }, Param::W) => *w = value,
                _ if self.group.is_some() => {
                    return Err(Error::validation(
                        "axis",
                        format!("group {g} rule {} has no parameter {}", spec.rule, self.name()),
                    ))
                }
                _ => continue,
            }
            touched = true;
        }
        if !touched {
            return Err(Error::validation(
                "axis",
                format!("no group has parameter {}", self.name()),
            ));
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        match self.param {
            Param::W => "w",
            Param::N => "n",
        }
    }

    fn label(&self, value: f64) -> String {
        match self.group {
            Some(g) => format!("{}@{g}={value}", self.name()),
            None => format!("{}={value}", self.name()),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `w=0.1,0.3,0.5`, `n=2..10` (inclusive integer range) or `n@1=2,3,4`
    /// to target group 1 only.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::validation("axis", format!("`{s}`: {msg}"));
        let (key, list) = s.split_once('=').ok_or_else(|| bad("expected <param>=<values>"))?;
        let (param, group) = match key.trim().split_once('@') {
            Some((p, g)) => (p, Some(g.parse::<usize>().map_err(|_| bad("bad group index"))?)),
            None => (key.trim(), None),
        };
        let param = match param {
            "w" => Param::W,
            "n" => Param::N,
            _ => return Err(bad("parameter must be `w` or `n`")),
        };
        let values = if let Some((lo, hi)) = list.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| bad("bad range start"))?;
            let hi: i64 = hi.trim().parse().map_err(|_| bad("bad range end"))?;
            (lo..=hi).map(|v| v as f64).collect()
        } else {
            list.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<Vec<_>>>()?
        };
        if values.is_empty() {
            return Err(bad("no values"));
        }
        Ok(Axis { param, group, values })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub cells: Vec<SweepCell>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn new(name: impl Into<String>, cells: Vec<SweepCell>, seeds: Vec<u64>) -> Self {
        SweepSpec {
            name: name.into(),
            cells,
            seeds,
        }
    }

    /// One cell, labelled with the config's own name.
    pub fn single(config: ScenarioConfig, seeds: Vec<u64>) -> Self {
        let name = config.name.clone();
        SweepSpec::new(name.clone(), vec![SweepCell::new(name, config)], seeds)
    }

    /// Cross product of `axes` over `base`, first axis outermost.
    pub fn from_axes(base: &ScenarioConfig, axes: &[Axis], seeds: Vec<u64>) -> Result<Self> {
        let mut cells = vec![(Vec::<String>::new(), base.clone())];
        for axis in axes {
            let mut next = Vec::with_capacity(cells.len() * axis.values.len());
            for (labels, config) in &cells {
                for &value in &axis.values {
                    let mut config = config.clone();
                    axis.apply(&mut config, value)?;
                    let mut labels = labels.clone();
                    labels.push(axis.label(value));
                    next.push((labels, config));
                }
            }
            cells = next;
        }
        let cells = cells
            .into_iter()
            .map(|(labels, config)| {
                let label = if labels.is_empty() {
                    base.name.clone()
                } else {
                    format!("{}[{}]", base.name, labels.join(","))
                };
                SweepCell::new(label, config)
            })
            .collect();
        let spec = SweepSpec::new(base.name.clone(), cells, seeds);
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds", "at least one seed is required"));
        }
        for cell in &self.cells {
            cell.config.validate().map_err(|e| Error::Cell {
                cell: cell.label.clone(),
                seed: self.seeds[0],
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    pub fn runs(&self) -> usize {
        self.cells.len() * self.seeds.len()
    }

    pub fn cell(&self, label: &str) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.label == label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub label: String,
    /// One report per seed, in seed order.
    pub reports: Vec<RunReport>,
}

/// Seed average of one group row.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub group: String,
    pub rule: String,
    pub jobs_completed: u64,
    /// Mean over seeds of the per-run means.
    pub mean_tpt_x1000: Option<f64>,
    /// Mean over seeds of the per-run standard deviations.
    pub std_tpt_x1000: Option<f64>,
    pub agent_mean_tpt_x1000: Option<f64>,
    pub agent_std_tpt_x1000: Option<f64>,
}

impl CellResult {
    /// Seed-averaged rows, groups first and the global row last.
    pub fn summary(&self) -> Vec<GroupSummary> {
        let Some(first) = self.reports.first() else {
            return Vec::new();
        };
        let rows = first.groups.len() + 1;
        (0..rows)
            .map(|i| {
                let reports: Vec<&GroupReport> = self
                    .reports
                    .iter()
                    .map(|r| r.rows().nth(i).expect("runs of a cell share a layout"))
                    .collect();
                let avg = |f: fn(&GroupReport) -> Option<f64>| {
                    let vals: Vec<f64> = reports.iter().filter_map(|r| f(r)).collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                };
                GroupSummary {
                    group: reports[0].group.clone(),
                    rule: reports[0].rule.clone(),
                    jobs_completed: reports.iter().map(|r| r.jobs_completed).sum(),
                    mean_tpt_x1000: avg(|r| r.mean_tpt_x1000),
                    std_tpt_x1000: avg(|r| r.std_tpt_x1000),
                    agent_mean_tpt_x1000: avg(|r| r.agent_mean_tpt_x1000),
                    agent_std_tpt_x1000: avg(|r| r.agent_std_tpt_x1000),
                }
            })
            .collect()
    }

    /// Seed-averaged global mean time-per-1000-tokens.
    pub fn global_mean(&self) -> Option<f64> {
        self.summary().last().and_then(|s| s.mean_tpt_x1000)
    }

    /// Seed-averaged mean of the named group.
    pub fn group_mean(&self, group: &str) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.group == group)
            .and_then(|s| s.mean_tpt_x1000)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub cells: Vec<CellResult>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// Append per-agent mean/deviation columns.
    pub agent_stats: bool,
    /// Emit seed-averaged rows after each cell's detail rows.
    pub summaries: bool,
}

impl CsvOptions {
    pub fn standard() -> Self {
        CsvOptions {
            agent_stats: false,
            summaries: true,
        }
    }
}

fn fmt3(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_default()
}

impl SweepResult {
    pub fn cell(&self, label: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.label == label)
    }

    pub fn detail_rows(&self) -> usize {
        self.cells
            .iter()
            .flat_map(|c| &c.reports)
            .map(|r| r.groups.len() + 1)
            .sum()
    }

    pub fn write_csv<W: Write>(&self, out: W, options: CsvOptions) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        if options.agent_stats {
            header.extend(["agent_mean_tpt_x1000", "agent_std_tpt_x1000"]);
        }
        writer.write_record(&header)?;
        for cell in &self.cells {
            for report in &cell.reports {
                let seed = report.seed.to_string();
                for row in report.rows() {
                    let mut record = vec![
                        report.scenario.clone(),
                        seed.clone(),
                        row.group.clone(),
                        row.rule.clone(),
                        row.jobs_completed.to_string(),
                        fmt3(row.mean_tpt_x1000),
                        fmt3(row.std_tpt_x1000),
                    ];
                    if options.agent_stats {
                        record.push(fmt3(row.agent_mean_tpt_x1000));
                        record.push(fmt3(row.agent_std_tpt_x1000));
                    }
                    writer.write_record(&record)?;
                }
            }
            if options.summaries {
                for row in cell.summary() {
                    let mut record = vec![
                        cell.label.clone(),
                        SUMMARY_SEED.to_string(),
                        row.group,
                        row.rule,
                        row.jobs_completed.to_string(),
                        fmt3(row.mean_tpt_x1000),
                        fmt3(row.std_tpt_x1000),
                    ];
                    if options.agent_stats {
                        record.push(fmt3(row.agent_mean_tpt_x1000));
                        record.push(fmt3(row.agent_std_tpt_x1000));
                    }
                    writer.write_record(&record)?;
                }
            }
        }
        writer.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv(&self, options: CsvOptions) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, options)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// One line per cell with the seed-averaged global mean.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            let _ = writeln!(out, "{:<60} {:>10}", cell.label, fmt3(cell.global_mean()));
        }
        out
    }
}

/// Runs every (cell, seed) pair.
pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(usize, u64)> = (0..spec.cells.len())
        .flat_map(|c| spec.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let one = |&(c, seed): &(usize, u64)| {
        let cell = &spec.cells[c];
        run(&cell.config.clone().with_seed(seed)).map_err(|e| Error::Cell {
            cell: cell.label.clone(),
            seed,
            source: Box::new(e),
        })
    };
    let outcomes: Vec<Result<RunReport>> = match execution {
        Execution::Sequential => jobs.iter().map(one).collect(),
        Execution::Parallel => jobs.par_iter().map(one).collect(),
    };
    let mut cells: Vec<CellResult> = spec
        .cells
        .iter()
        .map(|c| CellResult {
            label: c.label.clone(),
            reports: Vec::with_capacity(spec.seeds.len()),
        })
        .collect();
    for ((c, _), outcome) in jobs.iter().zip(outcomes) {
        cells[*c].reports.push(outcome?);
    }
    Ok(SweepResult {
        name: spec.name.clone(),
        cells,
    })
}
