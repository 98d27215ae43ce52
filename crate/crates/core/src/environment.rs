//! Load and capacity schedules.
//!
//! Time is counted in ticks of one second. Load (the per-tick probability
//! that an idle agent submits a job) changes only at hour boundaries and
//! capacities only at day boundaries. Days 0-4 of each week are weekdays,
//! days 5-6 the weekend. Randomised schedules are redrawn at the start of
//! every simulated week.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::ResourceId;

pub const TICKS_PER_HOUR: u64 = 3_600;
pub const TICKS_PER_DAY: u64 = 24 * TICKS_PER_HOUR;
pub const TICKS_PER_WEEK: u64 = 7 * TICKS_PER_DAY;
pub const HOURS_PER_WEEK: usize = 168;
pub const DAYS_PER_WEEK: usize = 7;
pub const WEEKDAYS: usize = 5;

/// Weekday hours `[BUSY_START, BUSY_END)` carry high load in the pattern week.
pub const BUSY_START: usize = 8;
pub const BUSY_END: usize = 18;
/// Busy hours per week: ten on each weekday.
pub const BUSY_HOURS: usize = WEEKDAYS * (BUSY_END - BUSY_START);
/// Peak hours per week, drawn among the busy hours.
pub const DEFAULT_PEAK_HOURS: usize = 2;

/// Hour composition (lo, hi, peak) shared by the pattern and random weeks.
pub fn week_composition(peak_hours: usize) -> (usize, usize, usize) {
    (HOURS_PER_WEEK - BUSY_HOURS, BUSY_HOURS - peak_hours, peak_hours)
}

fn check_peak_hours(peak_hours: usize) -> Result<()> {
    if peak_hours > BUSY_HOURS {
        return Err(Error::validation(
            "load.peak_hours",
            format!("{peak_hours} peak hours do not fit in {BUSY_HOURS} busy hours"),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadLevel {
    Lo,
    Hi,
    Peak,
}

/// Submission probabilities for the three load levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadLevels {
    pub lo: f64,
    pub hi: f64,
    pub peak: f64,
}

impl Default for LoadLevels {
    fn default() -> Self {
        LoadLevels {
            lo: 0.001,
            hi: 0.003,
            peak: 0.01,
        }
    }
}

impl LoadLevels {
    pub fn probability(&self, level: LoadLevel) -> f64 {
        match level {
            LoadLevel::Lo => self.lo,
            LoadLevel::Hi => self.hi,
            LoadLevel::Peak => self.peak,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lo, self.hi, self.peak];
        if all.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::validation("load.levels", "probabilities must lie in [0, 1]"));
        }
        if !(self.lo < self.hi && self.hi < self.peak) {
            return Err(Error::validation("load.levels", "levels must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadProfile {
    Fixed(LoadLevel),
    PatternWeek,
    RandomWeek,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CapacitySchedule {
    Fixed(Vec<f64>),
    /// Weekday capacities are a fresh Latin-square rotation of `base` each
    /// week; weekends use `base` as listed.
    RotatingDaily { base: Vec<f64> },
}

impl CapacitySchedule {
    pub fn base(&self) -> &[f64] {
        match self {
            CapacitySchedule::Fixed(v) => v,
            CapacitySchedule::RotatingDaily { base } => base,
        }
    }

    pub fn validate(&self, resources: usize) -> Result<()> {
        let base = self.base();
        if base.len() != resources {
            return Err(Error::validation(
                "capacity.values",
                format!("{} values given for {resources} resources", base.len()),
            ));
        }
        if base.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::validation("capacity.values", "capacities must be positive"));
        }
        if matches!(self, CapacitySchedule::RotatingDaily { .. }) && resources != WEEKDAYS {
            return Err(Error::validation(
                "capacity.kind",
                format!("rotation needs exactly {WEEKDAYS} resources, got {resources}"),
            ));
        }
        Ok(())
    }
}

/// Uniform distribution over the integers in `[low, high]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSizeDistribution {
    pub low: u32,
    pub high: u32,
}

impl Default for JobSizeDistribution {
    fn default() -> Self {
        JobSizeDistribution { low: 50, high: 150 }
    }
}

impl JobSizeDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.low == 0 || self.low > self.high {
            return Err(Error::validation("job_size", "need 0 < low <= high"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.low..=self.high) as f64
    }
}

/// High load for ten consecutive hours on each weekday and low load
/// otherwise, with `peak_hours` of the busy hours raised to peak.
pub fn gen_pattern_week<R: Rng + ?Sized>(rng: &mut R, peak_hours: usize) -> Result<Vec<LoadLevel>> {
    check_peak_hours(peak_hours)?;
    let mut week = vec![LoadLevel::Lo; HOURS_PER_WEEK];
    let busy: Vec<usize> = (0..WEEKDAYS)
        .flat_map(|day| day * 24 + BUSY_START..day * 24 + BUSY_END)
        .collect();
    for &hour in &busy {
        week[hour] = LoadLevel::Hi;
    }
    for i in rand::seq::index::sample(rng, busy.len(), peak_hours) {
        week[busy[i]] = LoadLevel::Peak;
    }
    Ok(week)
}

/// The pattern week's hour composition shuffled uniformly over the week.
pub fn gen_random_week<R: Rng + ?Sized>(rng: &mut R, peak_hours: usize) -> Result<Vec<LoadLevel>> {
    check_peak_hours(peak_hours)?;
    let (lo, hi, peak) = week_composition(peak_hours);
    let mut week: Vec<LoadLevel> = std::iter::repeat_n(LoadLevel::Lo, lo)
        .chain(std::iter::repeat_n(LoadLevel::Hi, hi))
        .chain(std::iter::repeat_n(LoadLevel::Peak, peak))
        .collect();
    week.shuffle(rng);
    Ok(week)
}

/// All reduced Latin squares of order 5 (first row and column `0..5`).
pub fn reduced_latin_squares() -> &'static [[[u8; 5]; 5]] {
    static SQUARES: OnceLock<Vec<[[u8; 5]; 5]>> = OnceLock::new();
    SQUARES.get_or_init(|| {
        let mut grid = [[0u8; 5]; 5];
        for i in 0..5 {
            grid[0][i] = i as u8;
            grid[i][0] = i as u8;
        }
        let mut out = Vec::new();
        fill_latin(&mut grid, 1, 1, &mut out);
        out
    })
}

fn fill_latin(grid: &mut [[u8; 5]; 5], row: usize, col: usize, out: &mut Vec<[[u8; 5]; 5]>) {
    if row == 5 {
        out.push(*grid);
        return;
    }
    let (next_row, next_col) = if col == 4 { (row + 1, 1) } else { (row, col + 1) };
    for symbol in 0..5u8 {
        let clash = (0..col).any(|c| grid[row][c] == symbol) || (0..row).any(|r| grid[r][col] == symbol);
        if !clash {
            grid[row][col] = symbol;
            fill_latin(grid, next_row, next_col, out);
        }
    }
}

/// Uniformly random 5x5 Latin square over symbols `0..5`.
///
/// Every Latin square is exactly one reduced square with its columns
/// permuted and then its last four rows permuted, so sampling the three
/// parts independently is uniform.
pub fn random_latin_square<R: Rng + ?Sized>(rng: &mut R) -> [[u8; 5]; 5] {
    let squares = reduced_latin_squares();
    let reduced = &squares[rng.random_range(0..squares.len())];
    let mut columns = [0usize, 1, 2, 3, 4];
    columns.shuffle(rng);
    let mut rows = [1usize, 2, 3, 4];
    rows.shuffle(rng);
    let row_order = [0, rows[0], rows[1], rows[2], rows[3]];
    let mut out = [[0u8; 5]; 5];
    for (i, &src_row) in row_order.iter().enumerate() {
        for (j, &src_col) in columns.iter().enumerate() {
            out[i][j] = reduced[src_row][src_col];
        }
    }
    out
}

/// Weekday capacity matrix (`[day][resource]`) for one week of rotation.
///
/// Each base entry is a distinct symbol of a random Latin square, so every
/// day is a permutation of `base` and every resource sees each base value
/// once across the five weekdays.
pub fn gen_capacity_rotation<R: Rng + ?Sized>(base: &[f64], rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if base.len() != WEEKDAYS {
        return Err(Error::validation(
            "capacity.kind",
            format!("rotation needs exactly {WEEKDAYS} resources, got {}", base.len()),
        ));
    }
    let square = random_latin_square(rng);
    Ok(square
        .iter()
        .map(|row| row.iter().map(|&s| base[s as usize]).collect())
        .collect())
}

/// Load and capacity schedules materialised one week at a time.
#[derive(Clone, Debug)]
pub struct Environment {
    profile: LoadProfile,
    levels: LoadLevels,
    schedule: CapacitySchedule,
    job_sizes: JobSizeDistribution,
    peak_hours: usize,
    week: Option<u64>,
    hourly: Vec<LoadLevel>,
    daily: Vec<Vec<f64>>,
}

impl Environment {
    pub fn new(
        profile: LoadProfile,
        levels: LoadLevels,
        schedule: CapacitySchedule,
        job_sizes: JobSizeDistribution,
    ) -> Result<Self> {
        levels.validate()?;
        job_sizes.validate()?;
        schedule.validate(schedule.base().len())?;
        Ok(Environment {
            profile,
            levels,
            schedule,
            job_sizes,
            peak_hours: DEFAULT_PEAK_HOURS,
            week: None,
            hourly: Vec::new(),
            daily: Vec::new(),
        })
    }

    /// Peak hours per pattern or random week.
    pub fn with_peak_hours(mut self, peak_hours: usize) -> Result<Self> {
        check_peak_hours(peak_hours)?;
        self.peak_hours = peak_hours;
        Ok(self)
    }

    pub fn peak_hours(&self) -> usize {
        self.peak_hours
    }

    pub fn resources(&self) -> usize {
        self.schedule.base().len()
    }

    pub fn job_sizes(&self) -> &JobSizeDistribution {
        &self.job_sizes
    }

    pub fn levels(&self) -> &LoadLevels {
        &self.levels
    }

    /// Redraws the schedules for `week`. Fixed schedules consume no randomness.
    pub fn materialize_week<R: Rng + ?Sized>(&mut self, week: u64, rng: &mut R) {
        self.hourly = match self.profile {
            LoadProfile::Fixed(level) => vec![level; HOURS_PER_WEEK],
            LoadProfile::PatternWeek => gen_pattern_week(rng, self.peak_hours).expect("validated peak hours"),
            LoadProfile::RandomWeek => gen_random_week(rng, self.peak_hours).expect("validated peak hours"),
        };
        let base = self.schedule.base().to_vec();
        self.daily = match &self.schedule {
            CapacitySchedule::Fixed(_) => vec![base; DAYS_PER_WEEK],
            CapacitySchedule::RotatingDaily { .. } => {
                let mut days = gen_capacity_rotation(&base, rng).expect("validated at construction");
                days.extend(std::iter::repeat_n(base, DAYS_PER_WEEK - WEEKDAYS));
                days
            }
        };
        self.week = Some(week);
    }

    pub fn is_materialized_for(&self, tick: u64) -> bool {
        self.week == Some(tick / TICKS_PER_WEEK)
    }

    /// Hourly load labels of the current week.
    pub fn week_labels(&self) -> &[LoadLevel] {
        &self.hourly
    }

    pub fn level_at(&self, tick: u64) -> LoadLevel {
        debug_assert!(self.is_materialized_for(tick), "week not materialized for tick {tick}");
        self.hourly[((tick % TICKS_PER_WEEK) / TICKS_PER_HOUR) as usize]
    }

    /// Submission probability in force at `tick`.
    pub fn load_at(&self, tick: u64) -> f64 {
        self.levels.probability(self.level_at(tick))
    }

    /// Capacity of `resource` at `tick`, in tokens per tick.
    pub fn capacity_at(&self, resource: ResourceId, tick: u64) -> f64 {
        debug_assert!(self.is_materialized_for(tick), "week not materialized for tick {tick}");
        self.daily[((tick % TICKS_PER_WEEK) / TICKS_PER_DAY) as usize][resource]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    const BASE: [f64; 5] = [40.0, 20.0, 20.0, 10.0, 10.0];

    fn composition(week: &[LoadLevel]) -> (usize, usize, usize) {
        let count = |l| week.iter().filter(|&&x| x == l).count();
        (count(LoadLevel::Lo), count(LoadLevel::Hi), count(LoadLevel::Peak))
    }

    fn env(profile: LoadProfile, schedule: CapacitySchedule) -> Environment {
        Environment::new(profile, LoadLevels::default(), schedule, JobSizeDistribution::default()).unwrap()
    }

    #[test]
    fn fixed_load_everywhere() {
        let mut e = env(LoadProfile::Fixed(LoadLevel::Hi), CapacitySchedule::Fixed(BASE.to_vec()));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        e.materialize_week(3, &mut rng);
        for tick in [3 * TICKS_PER_WEEK, 3 * TICKS_PER_WEEK + 12_345, 4 * TICKS_PER_WEEK - 1] {
            assert_eq!(e.load_at(tick), 0.003);
            assert_eq!(e.capacity_at(0, tick), 40.0);
        }
    }

    #[test]
    fn pattern_week_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..200 {
            let peaks = [DEFAULT_PEAK_HOURS, 10][i % 2];
            let week = gen_pattern_week(&mut rng, peaks).unwrap();
            assert_eq!(composition(&week), week_composition(peaks));
            for (hour, level) in week.iter().enumerate() {
                let (day, h) = (hour / 24, hour % 24);
                let busy = day < WEEKDAYS && (BUSY_START..BUSY_END).contains(&h);
                assert_eq!(*level != LoadLevel::Lo, busy, "hour {hour}");
            }
            // Saturday 03:00
            assert_eq!(week[5 * 24 + 3], LoadLevel::Lo);
        }
    }

    #[test]
    fn random_week_composition_and_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut e = env(LoadProfile::RandomWeek, CapacitySchedule::Fixed(BASE.to_vec()));
        for week in 0..50 {
            e.materialize_week(week, &mut rng);
            assert_eq!(composition(e.week_labels()), (118, 48, 2));
            let total: f64 = (0..HOURS_PER_WEEK as u64)
                .map(|h| e.load_at(week * TICKS_PER_WEEK + h * TICKS_PER_HOUR))
                .sum();
            assert!((total - (118.0 * 0.001 + 48.0 * 0.003 + 2.0 * 0.01)).abs() < 1e-12);
        }
    }

    #[test]
    fn peak_hours_are_configurable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut e = env(LoadProfile::RandomWeek, CapacitySchedule::Fixed(BASE.to_vec()))
            .with_peak_hours(10)
            .unwrap();
        e.materialize_week(0, &mut rng);
        assert_eq!(composition(e.week_labels()), (118, 40, 10));
        assert_eq!(week_composition(0), (118, 50, 0));
        let err = env(LoadProfile::PatternWeek, CapacitySchedule::Fixed(BASE.to_vec())).with_peak_hours(51);
        assert!(matches!(err, Err(Error::Validation { field, .. }) if field == "load.peak_hours"));
        assert!(gen_random_week(&mut rng, 51).is_err());
    }

    #[test]
    fn random_week_peaks_uniform_over_slots() {
        // chi-square over 168 slots, 10^4 weeks; 167 dof, p=0.001 critical ~ 226
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let weeks = 10_000;
        let mut counts = [0usize; HOURS_PER_WEEK];
        for _ in 0..weeks {
            for (h, l) in gen_random_week(&mut rng, 10).unwrap().iter().enumerate() {
                if *l == LoadLevel::Peak {
                    counts[h] += 1;
                }
            }
        }
        let expected = (weeks * 10) as f64 / HOURS_PER_WEEK as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 226.0, "chi2 = {chi2}");
    }

    #[test]
    fn generation_is_seeded() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (gen_pattern_week(&mut rng, 2).unwrap(), gen_random_week(&mut rng, 2).unwrap(), gen_capacity_rotation(&BASE, &mut rng).unwrap())
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn there_are_56_reduced_squares() {
        assert_eq!(reduced_latin_squares().len(), 56);
    }

    #[test]
    fn latin_square_decomposition_is_a_bijection() {
        // 56 reduced squares x 5! column orders x 4! row orders = 161280, the
        // number of 5x5 Latin squares; check every combination is distinct.
        let mut seen = HashSet::new();
        let perms5 = permutations(&[0, 1, 2, 3, 4]);
        let perms4 = permutations(&[1, 2, 3, 4]);
        for reduced in reduced_latin_squares() {
            for cols in &perms5 {
                for rows in &perms4 {
                    let order = [0, rows[0], rows[1], rows[2], rows[3]];
                    let mut sq = [[0u8; 5]; 5];
                    for i in 0..5 {
                        for j in 0..5 {
                            sq[i][j] = reduced[order[i]][cols[j]];
                        }
                    }
                    assert!(seen.insert(sq));
                }
            }
        }
        assert_eq!(seen.len(), 161_280);
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, head);
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn rotation_rows_and_columns_hold_the_base_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let want = sorted(BASE.to_vec());
        for _ in 0..500 {
            let m = gen_capacity_rotation(&BASE, &mut rng).unwrap();
            assert_eq!(m.len(), WEEKDAYS);
            for day in &m {
                assert_eq!(sorted(day.clone()), want);
                assert_eq!(day.iter().sum::<f64>(), 100.0);
            }
            for r in 0..5 {
                let column: Vec<f64> = m.iter().map(|d| d[r]).collect();
                assert_eq!(sorted(column), want);
            }
        }
    }

    #[test]
    fn rotation_needs_five_resources() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gen_capacity_rotation(&[40.0, 20.0], &mut rng).is_err());
        let schedule = CapacitySchedule::RotatingDaily { base: vec![10.0; 4] };
        assert!(schedule.validate(4).is_err());
    }

    #[test]
    fn rotating_capacity_is_day_constant_and_conserved() {
        let mut e = env(LoadProfile::RandomWeek, CapacitySchedule::RotatingDaily { base: BASE.to_vec() });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        e.materialize_week(0, &mut rng);
        for day in 0..DAYS_PER_WEEK as u64 {
            let start = day * TICKS_PER_DAY;
            for r in 0..5 {
                assert_eq!(e.capacity_at(r, start), e.capacity_at(r, start + TICKS_PER_DAY - 1));
            }
            for tick in [start, start + 50_000] {
                assert_eq!((0..5).map(|r| e.capacity_at(r, tick)).sum::<f64>(), 100.0);
            }
        }
        // weekend keeps the listed assignment
        for r in 0..5 {
            assert_eq!(e.capacity_at(r, 6 * TICKS_PER_DAY), BASE[r]);
        }
    }

    #[test]
    fn load_is_hour_constant() {
        let mut e = env(LoadProfile::PatternWeek, CapacitySchedule::Fixed(BASE.to_vec()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        e.materialize_week(0, &mut rng);
        for hour in 0..HOURS_PER_WEEK as u64 {
            let start = hour * TICKS_PER_HOUR;
            assert_eq!(e.load_at(start), e.load_at(start + TICKS_PER_HOUR - 1));
        }
    }

    #[test]
    fn job_sizes_are_integers_in_range() {
        let d = JobSizeDistribution::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = HashSet::new();
        for _ in 0..20_000 {
            let s = d.sample(&mut rng);
            assert_eq!(s.fract(), 0.0);
            assert!((50.0..=150.0).contains(&s));
            seen.insert(s as u32);
        }
        assert_eq!(seen.len(), 101);
        assert!(JobSizeDistribution { low: 10, high: 5 }.validate().is_err());
    }

    #[test]
    fn level_validation() {
        assert!(LoadLevels { lo: 0.003, hi: 0.003, peak: 0.01 }.validate().is_err());
        assert!(LoadLevels { lo: 0.1, hi: 0.3, peak: 1.5 }.validate().is_err());
        assert!(LoadLevels::default().validate().is_ok());
    }
}
