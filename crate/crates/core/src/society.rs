//! Population structure: rule-sharing groups and neighborhoods.
//!
//! Groups and neighborhoods are both contiguous blocks of agent indices.
//! Each neighborhood lies inside one group, so all of its members share a
//! rule. Members of a communicating neighborhood (CN) choose resources from
//! the average of their estimators; members of a non-communicating one (NCN)
//! use their own. Feedback always updates only the owner's estimator.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{
    bcsr_select, load_query_select, omega_select, EfficiencyEstimator, ResourceId, SelectionRule,
};

/// A group entry as written in a scenario configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub size: usize,
    pub rule: SelectionRule,
}

impl GroupSpec {
    pub fn new(size: usize, rule: SelectionRule) -> Self {
        GroupSpec { name: None, size, rule }
    }

    pub fn named(name: impl Into<String>, size: usize, rule: SelectionRule) -> Self {
        GroupSpec {
            name: Some(name.into()),
            size,
            rule,
        }
    }
}

/// `count` consecutive neighborhoods of `size` agents each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub size: usize,
    pub count: usize,
    pub communicating: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationGroup {
    pub id: usize,
    pub name: String,
    pub members: Range<usize>,
    pub rule: SelectionRule,
}

impl PopulationGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub id: usize,
    pub members: Range<usize>,
    pub communicating: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Society {
    groups: Vec<PopulationGroup>,
    neighborhoods: Vec<Neighborhood>,
    agent_group: Vec<usize>,
    agent_neighborhood: Vec<usize>,
}

impl Society {
    /// Lays out groups and neighborhoods over `agents` agents. With no
    /// neighborhood specs every agent forms its own NCN.
    pub fn new(
        agents: usize,
        resources: usize,
        groups: &[GroupSpec],
        neighborhoods: &[NeighborhoodSpec],
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::validation("groups", "at least one group is required"));
        }
        let total: usize = groups.iter().map(|g| g.size).sum();
        if total != agents {
            return Err(Error::validation(
                "groups",
                format!("group sizes sum to {total}, expected {agents} agents"),
            ));
        }
        if groups.iter().any(|g| g.size == 0) {
            return Err(Error::validation("groups", "group sizes must be positive"));
        }
        let mut layout = Vec::with_capacity(groups.len());
        let mut agent_group = Vec::with_capacity(agents);
        let mut start = 0;
        for (id, spec) in groups.iter().enumerate() {
            spec.rule.validate(resources).map_err(|e| match e {
                Error::Validation { message, .. } => {
                    Error::validation(format!("groups[{id}].rule"), message)
                }
                other => other,
            })?;
            let members = start..start + spec.size;
            agent_group.extend(std::iter::repeat_n(id, spec.size));
            layout.push(PopulationGroup {
                id,
                name: spec.name.clone().unwrap_or_else(|| format!("g{id}")),
                members: members.clone(),
                rule: spec.rule,
            });
            start = members.end;
        }

        let mut hoods = Vec::new();
        if neighborhoods.is_empty() {
            hoods.extend((0..agents).map(|a| Neighborhood {
                id: a,
                members: a..a + 1,
                communicating: false,
            }));
        } else {
            let mut start = 0;
            for spec in neighborhoods {
                if spec.size == 0 {
                    return Err(Error::validation("neighborhoods", "neighborhood sizes must be positive"));
                }
                for _ in 0..spec.count {
                    let members = start..start + spec.size;
                    if members.end > agents {
                        break;
                    }
                    if agent_group[members.start] != agent_group[members.end - 1] {
                        return Err(Error::validation(
                            "neighborhoods",
                            format!("neighborhood of agents {members:?} spans two groups"),
                        ));
                    }
                    hoods.push(Neighborhood {
                        id: hoods.len(),
                        members: members.clone(),
                        communicating: spec.communicating,
                    });
                    start = members.end;
                }
            }
            let covered: usize = neighborhoods.iter().map(|n| n.size * n.count).sum();
            if covered != agents {
                return Err(Error::validation(
                    "neighborhoods",
                    format!("neighborhoods cover {covered} agents, expected {agents}"),
                ));
            }
        }
        let mut agent_neighborhood = vec![0; agents];
        for hood in &hoods {
            agent_neighborhood[hood.members.clone()].fill(hood.id);
        }
        Ok(Society {
            groups: layout,
            neighborhoods: hoods,
            agent_group,
            agent_neighborhood,
        })
    }

    /// Every agent uses `rule` and decides alone.
    pub fn homogeneous(agents: usize, resources: usize, rule: SelectionRule) -> Result<Self> {
        Society::new(agents, resources, &[GroupSpec::new(agents, rule)], &[])
    }

    pub fn agents(&self) -> usize {
        self.agent_group.len()
    }

    pub fn groups(&self) -> &[PopulationGroup] {
        &self.groups
    }

    pub fn neighborhoods(&self) -> &[Neighborhood] {
        &self.neighborhoods
    }

    pub fn group_of(&self, agent: usize) -> usize {
        self.agent_group[agent]
    }

    pub fn neighborhood_of(&self, agent: usize) -> &Neighborhood {
        &self.neighborhoods[self.agent_neighborhood[agent]]
    }

    pub fn rule_of(&self, agent: usize) -> SelectionRule {
        self.groups[self.agent_group[agent]].rule
    }
}

/// Average of member estimators, recomputed on every call.
///
/// For each resource the view's `ee` is the mean over members that have
/// tried it and its `jd` the sum of member counts; a resource nobody tried
/// stays untried.
pub fn neighborhood_estimator<'a>(
    members: impl IntoIterator<Item = &'a EfficiencyEstimator>,
) -> EfficiencyEstimator {
    let mut members = members.into_iter().peekable();
    let m = members.peek().map_or(0, |e| e.resources());
    let mut sum = vec![0.0; m];
    let mut tried_by = vec![0usize; m];
    let mut jd = vec![0u64; m];
    for est in members {
        for r in 0..m {
            if est.jd()[r] > 0 {
                sum[r] += est.ee()[r];
                tried_by[r] += 1;
                jd[r] += est.jd()[r];
            }
        }
    }
    let ee = sum
        .iter()
        .zip(&tried_by)
        .map(|(&s, &k)| if k > 0 { s / k as f64 } else { 1.0 })
        .collect();
    EfficiencyEstimator::from_parts(ee, jd).expect("member estimates are positive")
}

/// Chooses a resource for a new job of `agent`.
///
/// Estimator-based rules in a CN read the neighborhood view; everything else
/// reads the agent's own estimator or ignores history altogether.
pub fn select_for_agent<'a, R: Rng + ?Sized>(
    agent: usize,
    society: &Society,
    estimator_of: impl Fn(usize) -> &'a EfficiencyEstimator,
    active_jobs: &[usize],
    capacities: &[f64],
    rng: &mut R,
) -> Result<ResourceId> {
    let rule = society.rule_of(agent);
    let hood = society.neighborhood_of(agent);
    let shared;
    let est = if rule.uses_estimator() && hood.communicating && hood.members.len() > 1 {
        shared = neighborhood_estimator(hood.members.clone().map(&estimator_of));
        &shared
    } else {
        estimator_of(agent)
    };
    match rule {
        SelectionRule::Omega(p) => omega_select(est, p.n, rng),
        SelectionRule::Bcsr { .. } => Ok(bcsr_select(est, rng)),
        SelectionRule::Static(r) => Ok(r),
        SelectionRule::LoadQuerying => Ok(load_query_select(active_jobs, capacities, rng)),
    }
}
