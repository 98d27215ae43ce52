//! The tick loop.
//!
//! Each tick runs, in order:
//!
//! 1. refresh capacities and the submission probability (new week, new hour);
//! 2. every idle agent, in index order, submits with the current probability,
//!    draws a size and picks a resource;
//! 3. every resource splits its capacity equally among its active jobs,
//!    including the ones submitted this tick;
//! 4. jobs with nothing left complete with `t_stop = tick + 1`; the owner
//!    becomes idle (from the next tick), learns from the feedback and the
//!    job is recorded;
//! 5. the clock advances.
//!
//! All randomness comes from one seeded stream consumed in that order, so a
//! configuration and seed determine the whole trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::environment::{Environment, TICKS_PER_HOUR, TICKS_PER_WEEK};
use crate::error::Result;
use crate::metrics::{MetricsAccumulator, RunReport};
use crate::rules::{EfficiencyEstimator, Feedback, ResourceId};
use crate::society::{select_for_agent, Society};

/// Remaining sizes at or below this count as fully served; absorbs rounding
/// in shares like `40 / 3`.
pub const COMPLETION_EPSILON: f64 = 1e-9;

pub type SimRng = ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub agent: usize,
    pub resource: ResourceId,
    pub size: f64,
    pub remaining: f64,
    pub t_start: u64,
    pub t_stop: Option<u64>,
}

impl Job {
    pub fn duration(&self) -> Option<u64> {
        self.t_stop.map(|stop| stop - self.t_start)
    }

    pub fn time_per_token(&self) -> Option<f64> {
        self.duration().map(|d| d as f64 / self.size)
    }

    pub fn feedback(&self) -> Option<Feedback> {
        Some(Feedback {
            resource: self.resource,
            t_start: self.t_start,
            t_stop: self.t_stop?,
            size: self.size,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentStatus {
    Idle,
    Engaged,
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub current_job: Option<Job>,
    pub estimator: EfficiencyEstimator,
    pub group_id: usize,
    pub neighborhood_id: usize,
}

impl AgentState {
    pub fn status(&self) -> AgentStatus {
        if self.current_job.is_some() {
            AgentStatus::Engaged
        } else {
            AgentStatus::Idle
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResourceState {
    pub capacity: f64,
    /// Agents whose jobs are being served here.
    pub active_jobs: Vec<usize>,
}

/// Hooks into the tick loop, for tracing and invariant checks.
pub trait Observer {
    fn on_submission(&mut self, _job: &Job) {}

    /// `delivered` is the total decrease of remaining sizes on `resource`
    /// during this tick's service step.
    fn on_service(&mut self, _tick: u64, _resource: ResourceId, _capacity: f64, _jobs: usize, _delivered: f64) {}

    fn on_completion(&mut self, _job: &Job) {}
}

impl Observer for () {}

/// Records every completed job.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JobTrace {
    pub completed: Vec<Job>,
}

impl Observer for JobTrace {
    fn on_completion(&mut self, job: &Job) {
        self.completed.push(job.clone());
    }
}

pub struct Simulation {
    scenario: String,
    seed: u64,
    tick: u64,
    agents: Vec<AgentState>,
    resources: Vec<ResourceState>,
    rng: SimRng,
    metrics: MetricsAccumulator,
    env: Environment,
    society: Society,
    submit_probability: f64,
    active_counts: Vec<usize>,
    capacities: Vec<f64>,
    completed: Vec<usize>,
}

impl Simulation {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let env = config.environment()?;
        let society = config.society()?;
        Ok(Simulation::from_parts(
            &config.name,
            env,
            society,
            config.seed,
            config.warmup_weeks * TICKS_PER_WEEK,
        ))
    }

    pub fn from_parts(scenario: &str, env: Environment, society: Society, seed: u64, warmup_cutoff: u64) -> Self {
        let m = env.resources();
        let agents = (0..society.agents())
            .map(|a| AgentState {
                current_job: None,
                estimator: EfficiencyEstimator::new(m),
                group_id: society.group_of(a),
                neighborhood_id: society.neighborhood_of(a).id,
            })
            .collect();
        let resources = (0..m)
            .map(|_| ResourceState {
                capacity: 0.0,
                active_jobs: Vec::new(),
            })
            .collect();
        Simulation {
            scenario: scenario.to_string(),
            seed,
            tick: 0,
            metrics: MetricsAccumulator::new(society.groups().len(), society.agents(), warmup_cutoff),
            agents,
            resources,
            rng: SimRng::seed_from_u64(seed),
            env,
            society,
            submit_probability: 0.0,
            active_counts: vec![0; m],
            capacities: vec![0.0; m],
            completed: Vec::new(),
        }
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn resources(&self) -> &[ResourceState] {
        &self.resources
    }

    pub fn society(&self) -> &Society {
        &self.society
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn tick(&mut self) -> Result<()> {
        self.tick_observed(&mut ())
    }

    pub fn tick_observed<O: Observer + ?Sized>(&mut self, observer: &mut O) -> Result<()> {
        let now = self.tick;
        self.refresh_environment(now);
        self.submit_jobs(now, observer)?;
        self.serve(now, observer);
        self.complete_jobs(now, observer)?;
        self.tick += 1;
        Ok(())
    }

    pub fn run_for<O: Observer + ?Sized>(&mut self, ticks: u64, observer: &mut O) -> Result<()> {
        for _ in 0..ticks {
            self.tick_observed(observer)?;
        }
        Ok(())
    }

    fn refresh_environment(&mut self, now: u64) {
        if !self.env.is_materialized_for(now) {
            self.env.materialize_week(now / TICKS_PER_WEEK, &mut self.rng);
        }
        if now % TICKS_PER_HOUR == 0 {
            for (r, res) in self.resources.iter_mut().enumerate() {
                res.capacity = self.env.capacity_at(r, now);
                self.capacities[r] = res.capacity;
            }
            self.submit_probability = self.env.load_at(now);
        }
    }

    fn submit_jobs<O: Observer + ?Sized>(&mut self, now: u64, observer: &mut O) -> Result<()> {
        let p = self.submit_probability;
        for a in 0..self.agents.len() {
            if self.agents[a].current_job.is_some() {
                continue;
            }
            if self.rng.random::<f64>() >= p {
                continue;
            }
            let size = self.env.job_sizes().sample(&mut self.rng);
            for (count, res) in self.active_counts.iter_mut().zip(&self.resources) {
                *count = res.active_jobs.len();
            }
            let agents = &self.agents;
            let resource = select_for_agent(
                a,
                &self.society,
                |i| &agents[i].estimator,
                &self.active_counts,
                &self.capacities,
                &mut self.rng,
            )?;
            let job = Job {
                agent: a,
                resource,
                size,
                remaining: size,
                t_start: now,
                t_stop: None,
            };
            observer.on_submission(&job);
            self.agents[a].current_job = Some(job);
            self.resources[resource].active_jobs.push(a);
        }
        Ok(())
    }

    fn serve<O: Observer + ?Sized>(&mut self, now: u64, observer: &mut O) {
        self.completed.clear();
        for (r, res) in self.resources.iter().enumerate() {
            let k = res.active_jobs.len();
            if k == 0 {
                continue;
            }
            let share = res.capacity / k as f64;
            let mut delivered = 0.0;
            for &a in &res.active_jobs {
                let job = self.agents[a].current_job.as_mut().expect("active job has an owner");
                let before = job.remaining;
                job.remaining -= share;
                delivered += before - job.remaining;
                if job.remaining <= COMPLETION_EPSILON {
                    self.completed.push(a);
                }
            }
            observer.on_service(now, r, res.capacity, k, delivered);
        }
    }

    fn complete_jobs<O: Observer + ?Sized>(&mut self, now: u64, observer: &mut O) -> Result<()> {
        self.completed.sort_unstable();
        for i in 0..self.completed.len() {
            let a = self.completed[i];
            let agent = &mut self.agents[a];
            let mut job = agent.current_job.take().expect("completed job has an owner");
            job.t_stop = Some(now + 1);
            let active = &mut self.resources[job.resource].active_jobs;
            let pos = active.iter().position(|&x| x == a).expect("job is active on its resource");
            active.swap_remove(pos);

            let feedback = job.feedback().expect("t_stop set");
            let rule = self.society.rule_of(a);
            agent.estimator.update(&feedback, rule.history_weight())?;
            self.metrics
                .record(a, agent.group_id, now + 1, feedback.time_per_token());
            observer.on_completion(&job);
        }
        Ok(())
    }

    pub fn report(&self) -> RunReport {
        self.metrics.report(
            &self.scenario,
            self.seed,
            self.society
                .groups()
                .iter()
                .map(|g| (g.name.as_str(), g.rule.to_string(), g.members.clone())),
        )
    }
}

/// Total ticks of a run: warmup plus measurement weeks.
pub fn run_length(config: &ScenarioConfig) -> u64 {
    (config.warmup_weeks + config.measure_weeks) * TICKS_PER_WEEK
}

/// Runs a scenario to completion.
pub fn run(config: &ScenarioConfig) -> Result<RunReport> {
    run_observed(config, &mut ())
}

pub fn run_observed<O: Observer + ?Sized>(config: &ScenarioConfig, observer: &mut O) -> Result<RunReport> {
    let mut sim = Simulation::new(config)?;
    sim.run_for(run_length(config), observer)?;
    Ok(sim.report())
}
