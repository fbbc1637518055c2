use serde::{Deserialize, Serialize};

use super::{simulate, DefenderPolicy, Scenario, SimOutcome};
use crate::error::{Error, Result};

/// Grid shape for both best responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Contiguous minute blocks a schedule allocates over.
    pub blocks: u32,
    /// Bullets per allocation unit.
    pub granularity: u32,
    /// Largest officer count tried; stands in for an unbounded force.
    pub officer_cap: u32,
    pub weapon_levels: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            blocks: 4,
            granularity: 6,
            officer_cap: 32,
            weapon_levels: vec![0.5, 1.0, 2.0],
        }
    }
}

fn block_bounds(horizon: u32, blocks: u32) -> Vec<(u32, u32)> {
    let (q, r) = (horizon / blocks, horizon % blocks);
    let mut out = Vec::with_capacity(blocks as usize);
    let mut start = 0;
    for b in 0..blocks {
        let len = q + u32::from(b < r);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Expands per-block units into a per-minute schedule; each block's bullets
/// are spread evenly, earliest minutes taking the remainder.
pub fn schedule_from_units(
    scenario: &Scenario,
    spec: &GridSpec,
    units: &[u32],
) -> Result<Vec<u32>> {
    if units.len() != spec.blocks as usize {
        return Err(Error::LengthMismatch {
            left: units.len(),
            right: spec.blocks as usize,
        });
    }
    let mut s = vec![0; scenario.horizon_min as usize];
    for (&(a, b), &u) in block_bounds(scenario.horizon_min, spec.blocks)
        .iter()
        .zip(units)
    {
        let bullets = u * spec.granularity;
        if b == a {
            if bullets > 0 {
                return Err(Error::invalid("bullets allocated to an empty block"));
            }
            continue;
        }
        let len = b - a;
        let (q, r) = (bullets / len, bullets % len);
        for k in 0..len {
            s[(a + k) as usize] = q + u32::from(k < r);
        }
    }
    Ok(s)
}

fn compositions(blocks: usize, max_units: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, blocks: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == blocks {
            out.push(prefix.clone());
            return;
        }
        for u in 0..=left {
            prefix.push(u);
            rec(prefix, blocks, left - u, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(blocks), blocks, max_units, &mut out);
    out
}

/// Every allocation of at most ⌊budget / granularity⌋ units over the blocks,
/// in lexicographic order of the unit vectors. A larger budget yields a
/// superset of schedules.
pub fn schedule_grid(scenario: &Scenario, spec: &GridSpec) -> Result<Vec<Vec<u32>>> {
    scenario.check()?;
    if spec.blocks == 0 || spec.blocks > scenario.horizon_min || spec.granularity == 0 {
        return Err(Error::invalid(
            "blocks must lie in 1..=horizon and granularity be positive",
        ));
    }
    let units = scenario.bullet_budget / spec.granularity;
    compositions(spec.blocks as usize, units)
        .iter()
        .map(|u| schedule_from_units(scenario, spec, u))
        .collect()
}

/// Officer counts from the cap down, each with every weapon level, so ties
/// resolve toward the larger force.
pub fn policy_grid(base: &DefenderPolicy, spec: &GridSpec) -> Vec<DefenderPolicy> {
    let mut out = Vec::new();
    for officers in (1..=spec.officer_cap).rev() {
        for &w in &spec.weapon_levels {
            out.push(DefenderPolicy {
                officers,
                weapon_level: w,
                ..*base
            });
        }
    }
    out
}

fn evaluate<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShooterChoice {
    pub index: usize,
    pub schedule: Vec<u32>,
    pub bullets: u32,
    pub outcome: SimOutcome,
}

/// True when (obj_a, bullets_a) beats (obj_b, bullets_b): larger loss, then
/// fewer bullets.
pub(crate) fn shooter_prefers(obj_a: f64, bullets_a: u32, obj_b: f64, bullets_b: u32) -> bool {
    obj_a > obj_b || (obj_a == obj_b && bullets_a < bullets_b)
}

/// Exhaustive search maximising loss_v + loss_m, then minimising bullets;
/// remaining ties go to the earliest grid index.
pub fn shooter_best_response(
    scenario: &Scenario,
    policy: &DefenderPolicy,
    grid: &[Vec<u32>],
) -> Result<ShooterChoice> {
    if grid.is_empty() {
        return Err(Error::invalid("empty schedule grid"));
    }
    let outcomes = evaluate(grid, |s| simulate(scenario, s, policy))?;
    let bullets: Vec<u32> = grid.iter().map(|s| s.iter().sum()).collect();
    let mut best = 0;
    for k in 1..grid.len() {
        if shooter_prefers(
            outcomes[k].objective(),
            bullets[k],
            outcomes[best].objective(),
            bullets[best],
        ) {
            best = k;
        }
    }
    Ok(ShooterChoice {
        index: best,
        schedule: grid[best].clone(),
        bullets: bullets[best],
        outcome: outcomes[best].clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefenderChoice {
    pub index: usize,
    pub policy: DefenderPolicy,
    pub outcome: SimOutcome,
}

/// Exhaustive search maximising the defender payoff; ties go to the
/// earliest grid index.
pub fn defender_best_response(
    scenario: &Scenario,
    schedule: &[u32],
    grid: &[DefenderPolicy],
) -> Result<DefenderChoice> {
    if grid.is_empty() {
        return Err(Error::invalid("empty policy grid"));
    }
    let outcomes = evaluate(grid, |p| simulate(scenario, schedule, p))?;
    let mut best = 0;
    for k in 1..grid.len() {
        if outcomes[k].defender_payoff > outcomes[best].defender_payoff {
            best = k;
        }
    }
    Ok(DefenderChoice {
        index: best,
        policy: grid[best],
        outcome: outcomes[best].clone(),
    })
}

fn stop_cell(o: &SimOutcome) -> String {
    o.stop_time
        .map_or_else(|| "horizon".to_string(), |t| t.to_string())
}

/// One row per schedule: index, schedule, bullets, losses, objective, stop.
pub fn shooter_sweep_csv(
    scenario: &Scenario,
    policy: &DefenderPolicy,
    grid: &[Vec<u32>],
) -> Result<String> {
    let outcomes = evaluate(grid, |s| simulate(scenario, s, policy))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "schedule",
        "bullets",
        "loss_v",
        "loss_m",
        "objective",
        "stop_time",
    ])?;
    for (k, (s, o)) in grid.iter().zip(&outcomes).enumerate() {
        let sched = s.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        w.write_record([
            k.to_string(),
            sched,
            s.iter().sum::<u32>().to_string(),
            o.loss_v.to_string(),
            o.loss_m.to_string(),
            o.objective().to_string(),
            stop_cell(o),
        ])?;
    }
    into_string(w)
}

/// One row per policy: index, officers, weapon level, payoff, stop.
pub fn defender_sweep_csv(
    scenario: &Scenario,
    schedule: &[u32],
    grid: &[DefenderPolicy],
) -> Result<String> {
    let outcomes = evaluate(grid, |p| simulate(scenario, schedule, p))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "officers",
        "weapon_level",
        "defender_payoff",
        "loss_v",
        "stop_time",
    ])?;
    for (k, (p, o)) in grid.iter().zip(&outcomes).enumerate() {
        w.write_record([
            k.to_string(),
            p.officers.to_string(),
            p.weapon_level.to_string(),
            o.defender_payoff.to_string(),
            o.loss_v.to_string(),
            stop_cell(o),
        ])?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}
