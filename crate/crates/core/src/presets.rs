//! Catalog of the published experiments, one sweep per figure.

use crate::config::ScenarioConfig;
use crate::environment::{CapacitySchedule, LoadLevel, LoadProfile};
use crate::error::{Error, Result};
use crate::rules::SelectionRule;
use crate::society::{GroupSpec, NeighborhoodSpec};
use crate::sweep::{seed_list, Axis, Param, SweepCell, SweepSpec, DEFAULT_SEEDS};

/// History weights of the Ω grid.
pub const GRID_W: [f64; 3] = [0.1, 0.3, 0.5];
/// Bias exponents of the Ω grid.
pub const GRID_N: [f64; 9] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
/// History weights tried by the second population of the w experiment.
pub const HETERO_W: [f64; 10] = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// Neighborhood sizes of the all-CN experiment.
pub const CN_SIZES: [usize; 5] = [2, 4, 5, 10, 20];

pub const BEST_STATIC_LO: [usize; 5] = [100, 0, 0, 0, 0];
pub const BEST_STATIC_HI: [usize; 5] = [66, 16, 16, 1, 1];
pub const BEST_STATIC_PEAK: [usize; 5] = [40, 20, 20, 10, 10];
pub const BEST_STATIC_RANDOM: [usize; 5] = [52, 22, 22, 2, 2];
pub const BEST_STATIC_ROTATING: [usize; 5] = [20, 20, 20, 20, 20];

pub const CATALOG: [(&str, &str); 10] = [
    ("fig1-static", "best static configurations under fixed lo, hi and peak load"),
    ("fig2-fixed-load", "Ω grid (w x n) under fixed hi load, with the best static benchmark"),
    ("fig3-random-load", "Ω grid under the random weekly load, with static and load-querying benchmarks"),
    ("fig4-rotating-capacity", "Ω grid with daily capacity rotation and random load, with benchmarks"),
    ("fig5-hetero-50-50", "50/50 populations, w = 0.3, n1 = 4, n2 swept"),
    ("fig6-hetero-90-10", "90/10 populations, w = 0.3, n1 = 4, n2 swept"),
    ("fig7-hetero-w", "50/50 populations, n = 4, w1 = 0.3, w2 swept"),
    ("fig8-minority-rules", "90 agents Ω(0.3, 4) against four 10-agent minorities"),
    ("fig9-cn-sizes", "all-communicating populations by neighborhood size, w = 0.3, n swept"),
    ("fig10-cn-vs-ncn", "an 80-agent NCN against 20 agents in equal-size CNs"),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(name, _)| *name)
}

fn random_load() -> ScenarioConfig {
    ScenarioConfig::default().with_load(LoadProfile::RandomWeek)
}

fn static_cell(name: &str, base: &ScenarioConfig, configuration: &[usize]) -> Result<SweepCell> {
    Ok(SweepCell::new(
        static_label(name, configuration),
        base.clone().with_static_configuration(configuration)?,
    ))
}

fn load_querying_cell(name: &str, base: &ScenarioConfig) -> SweepCell {
    SweepCell::new(load_querying_label(name), base.clone().homogeneous(SelectionRule::LoadQuerying))
}

fn omega_grid(name: &str, base: ScenarioConfig) -> Result<Vec<SweepCell>> {
    let base = base.named(name).homogeneous(SelectionRule::omega(0.3, 4.0));
    let axes = [Axis::new(Param::W, GRID_W.to_vec()), Axis::new(Param::N, GRID_N.to_vec())];
    Ok(SweepSpec::from_axes(&base, &axes, vec![1])?.cells)
}

fn two_populations(size1: usize, rule1: SelectionRule, rule2: SelectionRule) -> Vec<GroupSpec> {
    vec![
        GroupSpec::named("pop1", size1, rule1),
        GroupSpec::named("pop2", 100 - size1, rule2),
    ]
}

fn fmt_short(rule: &SelectionRule) -> String {
    match rule {
        SelectionRule::Omega(p) => format!("({},{})", p.w, p.n),
        other => other.to_string(),
    }
}

/// Label of a cell in the Ω grid presets.
pub fn grid_label(preset: &str, w: f64, n: f64) -> String {
    format!("{preset}[w={w},n={n}]")
}

/// Label of a static benchmark cell.
pub fn static_label(preset: &str, configuration: &[usize]) -> String {
    format!(
        "{preset}[static={{{}}}]",
        configuration.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    )
}

pub fn load_querying_label(preset: &str) -> String {
    format!("{preset}[load_querying]")
}

/// The sweep reproducing experiment `name`, with the default seeds.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let seeds = seed_list(DEFAULT_SEEDS);
    let cells = match name {
        "fig1-static" => {
            let fixed = |level| ScenarioConfig::default().with_load(LoadProfile::Fixed(level));
            vec![
                static_cell("fig1-static/lo", &fixed(LoadLevel::Lo), &BEST_STATIC_LO)?,
                static_cell("fig1-static/hi", &fixed(LoadLevel::Hi), &BEST_STATIC_HI)?,
                static_cell("fig1-static/peak", &fixed(LoadLevel::Peak), &BEST_STATIC_PEAK)?,
            ]
        }
        "fig2-fixed-load" => {
            let base = ScenarioConfig::default().with_load(LoadProfile::Fixed(LoadLevel::Hi));
            let mut cells = vec![static_cell(name, &base, &BEST_STATIC_HI)?];
            cells.extend(omega_grid(name, base)?);
            cells
        }
        "fig3-random-load" => {
            let base = random_load();
            let mut cells = vec![
                static_cell(name, &base, &BEST_STATIC_RANDOM)?,
                load_querying_cell(name, &base),
            ];
            cells.extend(omega_grid(name, base)?);
            cells
        }
        "fig4-rotating-capacity" => {
            let base = random_load().with_capacity(CapacitySchedule::RotatingDaily {
                base: crate::config::DEFAULT_CAPACITIES.to_vec(),
            });
            let mut cells = vec![
                static_cell(name, &base, &BEST_STATIC_ROTATING)?,
                load_querying_cell(name, &base),
            ];
            cells.extend(omega_grid(name, base)?);
            cells
        }
        "fig5-hetero-50-50" | "fig6-hetero-90-10" => {
            let size1 = if name == "fig5-hetero-50-50" { 50 } else { 90 };
            GRID_N
                .iter()
                .map(|&n2| {
                    let groups = two_populations(size1, SelectionRule::omega(0.3, 4.0), SelectionRule::omega(0.3, n2));
                    SweepCell::new(format!("{name}[n2={n2}]"), random_load().with_groups(groups))
                })
                .collect()
        }
        "fig7-hetero-w" => HETERO_W
            .iter()
            .map(|&w2| {
                let groups = two_populations(50, SelectionRule::omega(0.3, 4.0), SelectionRule::omega(w2, 4.0));
                SweepCell::new(format!("{name}[w2={w2}]"), random_load().with_groups(groups))
            })
            .collect(),
        "fig8-minority-rules" => fig8_minorities()
            .iter()
            .map(|minority| {
                let groups = two_populations(90, SelectionRule::omega(0.3, 4.0), *minority);
                SweepCell::new(fig8_label(minority), random_load().with_groups(groups))
            })
            .collect(),
        "fig9-cn-sizes" => {
            let mut cells = Vec::new();
            for &n in &GRID_N {
                let rule = SelectionRule::omega(0.3, n);
                cells.push(SweepCell::new(fig9_label(None, n), random_load().homogeneous(rule)));
                for &size in &CN_SIZES {
                    let hoods = vec![NeighborhoodSpec {
                        size,
                        count: 100 / size,
                        communicating: true,
                    }];
                    cells.push(SweepCell::new(
                        fig9_label(Some(size), n),
                        random_load().homogeneous(rule).with_neighborhoods(hoods),
                    ));
                }
            }
            cells
        }
        "fig10-cn-vs-ncn" => fig10_rows()
            .iter()
            .map(|&(ncn_n, cns)| {
                let cn_rule = SelectionRule::omega(0.3, 4.0);
                let groups = vec![
                    GroupSpec::named("ncn", 80, SelectionRule::omega(0.3, ncn_n)),
                    GroupSpec::named("cn", 20, cn_rule),
                ];
                let hoods = vec![
                    NeighborhoodSpec { size: 80, count: 1, communicating: false },
                    NeighborhoodSpec { size: 20 / cns, count: cns, communicating: true },
                ];
                SweepCell::new(
                    fig10_label(ncn_n, cns),
                    random_load().with_groups(groups).with_neighborhoods(hoods),
                )
            })
            .collect(),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: preset_names().collect::<Vec<_>>().join(", "),
            })
        }
    };
    let spec = SweepSpec::new(name, cells, seeds);
    spec.validate()?;
    Ok(spec)
}

/// Rules of the four 10-agent minorities: best-choice-like Ω, conservative
/// history, load-querying, and everything on resource 0.
pub fn fig8_minorities() -> [SelectionRule; 4] {
    [
        SelectionRule::omega(0.3, 20.0),
        SelectionRule::omega(0.1, 4.0),
        SelectionRule::LoadQuerying,
        SelectionRule::Static(0),
    ]
}

pub fn fig8_label(minority: &SelectionRule) -> String {
    format!("fig8-minority-rules[minority={}]", fmt_short(minority))
}

/// `None` is the non-communicating baseline.
pub fn fig9_label(cn_size: Option<usize>, n: f64) -> String {
    match cn_size {
        Some(size) => format!("fig9-cn-sizes[cn={size},n={n}]"),
        None => format!("fig9-cn-sizes[ncn,n={n}]"),
    }
}

/// (n of the 80-agent NCN, number of CNs among the other 20 agents).
pub fn fig10_rows() -> [(f64, usize); 8] {
    [(4.0, 1), (4.0, 2), (4.0, 5), (4.0, 10), (10.0, 1), (10.0, 2), (10.0, 5), (10.0, 10)]
}

pub fn fig10_label(ncn_n: f64, cns: usize) -> String {
    format!("fig10-cn-vs-ncn[ncn=(0.3,{ncn_n}),cns={cns}]")
}
