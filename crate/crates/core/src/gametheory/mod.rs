//! Discrete-time shooter/defender game. Minutes are indexed 0..horizon.
//! Within a minute the shooter fires first, then the defender's stop check
//! runs if the minute is at or after police arrival.

mod grid;
mod scenario_file;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{
    defender_best_response, defender_sweep_csv, policy_grid, schedule_from_units, schedule_grid,
    shooter_best_response, shooter_sweep_csv, DefenderChoice, GridSpec, ShooterChoice,
};
pub use scenario_file::{parse_scenario_file, ScenarioFile, KEYS as SCENARIO_KEYS};

/// Piecewise injury scale: zero before the attack, `i_high` until police
/// arrive, then geometric decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MillerCurve {
    pub i_high: f64,
    pub i_low_decay: f64,
}

impl MillerCurve {
    pub fn new(i_high: f64, i_low_decay: f64) -> Result<Self> {
        let m = MillerCurve {
            i_high,
            i_low_decay,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if !(self.i_high > 0.0) || !self.i_high.is_finite() {
            return Err(Error::invalid("i_high must be positive"));
        }
        if !(self.i_low_decay > 0.0 && self.i_low_decay < 1.0) {
            return Err(Error::invalid("i_low_decay must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl Default for MillerCurve {
    fn default() -> Self {
        MillerCurve {
            i_high: 1.0,
            i_low_decay: 0.5,
        }
    }
}

/// Per-minute injury scale.
pub trait InjuryModel {
    fn injury(&self, t: u32, t_attack: u32, t_cop: u32) -> f64;
}

impl InjuryModel for MillerCurve {
    fn injury(&self, t: u32, t_attack: u32, t_cop: u32) -> f64 {
        if t < t_attack {
            0.0
        } else if t < t_cop {
            self.i_high
        } else {
            self.i_high * self.i_low_decay.powi((t - t_cop) as i32)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenderPolicy {
    pub officers: u32,
    pub weapon_level: f64,
    /// Stop probability contributed by one officer per minute at unit weapon level.
    pub stop_rate: f64,
    /// Unexpected-cost charge per officer per expected engagement minute.
    pub unexpected_cost_rate: f64,
}

impl Default for DefenderPolicy {
    fn default() -> Self {
        DefenderPolicy {
            officers: 1,
            weapon_level: 1.0,
            stop_rate: 0.0285,
            unexpected_cost_rate: 0.0,
        }
    }
}

impl DefenderPolicy {
    pub fn check(&self) -> Result<()> {
        if self.officers == 0 {
            return Err(Error::invalid("officers must be positive"));
        }
        if !(self.weapon_level > 0.0) || !self.weapon_level.is_finite() {
            return Err(Error::invalid("weapon_level must be positive"));
        }
        if !(self.stop_rate > 0.0 && self.stop_rate <= 1.0) {
            return Err(Error::invalid("stop_rate must lie in (0, 1]"));
        }
        if !(self.unexpected_cost_rate >= 0.0) || !self.unexpected_cost_rate.is_finite() {
            return Err(Error::invalid("unexpected_cost_rate must be non-negative"));
        }
        Ok(())
    }
}

/// Per-minute probability that the defender ends the attack.
pub trait StopModel {
    fn stop_probability(&self, policy: &DefenderPolicy) -> f64;
}

/// Officers act independently: 1 − (1 − stop_rate·w)^officers, clamped to [0, 1].
#[derive(Debug, Clone, Copy, Default)]
pub struct IndependentOfficers;

impl StopModel for IndependentOfficers {
    fn stop_probability(&self, policy: &DefenderPolicy) -> f64 {
        let single = (policy.stop_rate * policy.weapon_level).clamp(0.0, 1.0);
        (1.0 - (1.0 - single).powi(policy.officers as i32)).clamp(0.0, 1.0)
    }
}

/// Material damage and unexpected defender costs.
pub trait CostModel {
    fn material(&self, scenario: &Scenario, active_minutes: u32) -> f64;
    fn unexpected(&self, scenario: &Scenario, policy: &DefenderPolicy, engaged_minutes: f64)
        -> f64;
}

/// Costs linear in minutes, summed over identical shooters.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearCosts;

impl CostModel for LinearCosts {
    fn material(&self, scenario: &Scenario, active_minutes: u32) -> f64 {
        scenario.material_cost_per_min * f64::from(active_minutes) * f64::from(scenario.n_shooters)
    }

    fn unexpected(
        &self,
        scenario: &Scenario,
        policy: &DefenderPolicy,
        engaged_minutes: f64,
    ) -> f64 {
        policy.unexpected_cost_rate
            * f64::from(policy.officers)
            * f64::from(scenario.n_shooters)
            * engaged_minutes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_shooters: u32,
    pub bullet_budget: u32,
    pub horizon_min: u32,
    pub t_attack: u32,
    pub t_cop: u32,
    pub victims: Vec<f64>,
    pub material_cost_per_min: f64,
    pub miller: MillerCurve,
    /// Cumulative stop probability at which the attack halts.
    pub stop_threshold: f64,
}

impl Default for Scenario {
    /// A 31-minute crime window with police on scene at minute 7 and 78
    /// bullets, the averages of the timeline table.
    fn default() -> Self {
        Scenario {
            n_shooters: 1,
            bullet_budget: 78,
            horizon_min: 31,
            t_attack: 0,
            t_cop: 7,
            victims: vec![1.0; 20],
            material_cost_per_min: 0.0,
            miller: MillerCurve::default(),
            stop_threshold: 0.5,
        }
    }
}

impl Scenario {
    pub fn check(&self) -> Result<()> {
        if self.n_shooters == 0 || self.bullet_budget == 0 || self.horizon_min == 0 {
            return Err(Error::invalid(
                "n_shooters, bullet_budget and horizon_min must be positive",
            ));
        }
        if !(self.t_attack <= self.t_cop && self.t_cop <= self.horizon_min) {
            return Err(Error::invalid("need t_attack ≤ t_cop ≤ horizon_min"));
        }
        if self.victims.is_empty() || self.victims.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "victim values must be finite, non-negative and non-empty",
            ));
        }
        if !(self.material_cost_per_min >= 0.0) || !self.material_cost_per_min.is_finite() {
            return Err(Error::invalid("material_cost_per_min must be non-negative"));
        }
        if !(self.stop_threshold > 0.0 && self.stop_threshold <= 1.0) {
            return Err(Error::invalid("stop_threshold must lie in (0, 1]"));
        }
        self.miller.check()
    }

    pub fn mean_victim_value(&self) -> f64 {
        self.victims.iter().sum::<f64>() / self.victims.len() as f64
    }

    /// `bullet_budget` spread over [t_attack, horizon), earliest minutes
    /// taking the remainder.
    pub fn uniform_schedule(&self) -> Vec<u32> {
        let mut s = vec![0; self.horizon_min as usize];
        let window = (self.horizon_min - self.t_attack).max(1);
        let (q, r) = (self.bullet_budget / window, self.bullet_budget % window);
        for k in 0..window.min(self.horizon_min - self.t_attack) {
            s[(self.t_attack + k) as usize] = q + u32::from(k < r);
        }
        s
    }
}

pub fn injury_scale(t: u32, scenario: &Scenario) -> f64 {
    scenario.miller.injury(t, scenario.t_attack, scenario.t_cop)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Halt when the cumulative stop probability reaches the threshold.
    Expectation,
    /// Draw each engaged minute's stop from a seeded generator.
    MonteCarlo { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub loss_v: f64,
    pub loss_m: f64,
    pub defender_payoff: f64,
    /// Minute in which the attack was stopped; `None` means it ran to the horizon.
    pub stop_time: Option<u32>,
    /// Minutes from t_attack through the stop minute or horizon end.
    pub active_minutes: u32,
    /// Accumulated loss_v after each minute.
    pub casualty_trajectory: Vec<f64>,
}

impl SimOutcome {
    pub fn objective(&self) -> f64 {
        self.loss_v + self.loss_m
    }
}

/// Pluggable model set; `Default` gives the Miller curve from the scenario,
/// independent officers and linear costs.
#[derive(Clone, Copy)]
pub struct Models<'a> {
    pub injury: Option<&'a (dyn InjuryModel + Sync)>,
    pub stop: &'a (dyn StopModel + Sync),
    pub cost: &'a (dyn CostModel + Sync),
}

impl Default for Models<'_> {
    fn default() -> Self {
        Models {
            injury: None,
            stop: &IndependentOfficers,
            cost: &LinearCosts,
        }
    }
}

pub fn simulate(
    scenario: &Scenario,
    bullets_per_min: &[u32],
    policy: &DefenderPolicy,
) -> Result<SimOutcome> {
    simulate_with(
        scenario,
        bullets_per_min,
        policy,
        Models::default(),
        Mode::Expectation,
    )
}

pub fn simulate_with(
    scenario: &Scenario,
    bullets_per_min: &[u32],
    policy: &DefenderPolicy,
    models: Models<'_>,
    mode: Mode,
) -> Result<SimOutcome> {
    scenario.check()?;
    policy.check()?;
    if bullets_per_min.len() != scenario.horizon_min as usize {
        return Err(Error::LengthMismatch {
            left: bullets_per_min.len(),
            right: scenario.horizon_min as usize,
        });
    }
    let total: u64 = bullets_per_min.iter().map(|&b| u64::from(b)).sum();
    if total > u64::from(scenario.bullet_budget) {
        return Err(Error::invalid(format!(
            "schedule fires {total} bullets, budget is {}",
            scenario.bullet_budget
        )));
    }
    let injury: &dyn InjuryModel = match models.injury {
        Some(m) => m,
        None => &scenario.miller,
    };
    let p = models.stop.stop_probability(policy);
    let per_bullet = scenario.mean_victim_value() * f64::from(scenario.n_shooters);
    let mut rng = match mode {
        Mode::MonteCarlo { seed } => Some(rand_chacha::ChaCha8Rng::seed_from_u64(seed)),
        Mode::Expectation => None,
    };

    let mut loss_v = 0.0;
    let mut trajectory = Vec::with_capacity(bullets_per_min.len());
    let mut stop_time = None;
    let mut survive = 1.0;
    for (t, &b) in bullets_per_min.iter().enumerate() {
        let t = t as u32;
        if stop_time.is_none() {
            loss_v +=
                f64::from(b) * injury.injury(t, scenario.t_attack, scenario.t_cop) * per_bullet;
            if t >= scenario.t_cop {
                survive *= 1.0 - p;
                let stopped = match rng.as_mut() {
                    None => 1.0 - survive >= scenario.stop_threshold,
                    Some(r) => r.random::<f64>() < p,
                };
                if stopped {
                    stop_time = Some(t);
                }
            }
        }
        trajectory.push(loss_v);
    }

    let end = stop_time.map_or(scenario.horizon_min, |s| s + 1);
    let active_minutes = end.saturating_sub(scenario.t_attack);
    let loss_m = models.cost.material(scenario, active_minutes);

    // Expected stop mass and engagement time over the engaged window.
    let window = scenario.horizon_min - scenario.t_cop;
    let n = f64::from(scenario.n_shooters);
    let (mut stop_mass, mut engaged) = (0.0, 0.0);
    let mut still = 1.0;
    for _ in 0..window {
        engaged += still;
        still *= 1.0 - p;
        stop_mass += 1.0 - still;
    }
    let defender_payoff = n * stop_mass - models.cost.unexpected(scenario, policy, engaged);

    Ok(SimOutcome {
        loss_v,
        loss_m,
        defender_payoff,
        stop_time,
        active_minutes,
        casualty_trajectory: trajectory,
    })
}

/// Simulated casualties per active minute.
pub fn casualty_rate(
    scenario: &Scenario,
    schedule: &[u32],
    policy: &DefenderPolicy,
) -> Result<f64> {
    let out = simulate(scenario, schedule, policy)?;
    if out.active_minutes == 0 {
        return Err(Error::Degenerate("no active minutes".into()));
    }
    Ok(out.loss_v / f64::from(out.active_minutes))
}

pub const CALIBRATE_BRACKET: (f64, f64) = (1e-9, 1e6);

/// Bisection on i_high so the simulated casualty rate matches `target_rate`.
/// The rate is increasing in i_high for any schedule that fires at all.
pub fn calibrate(
    template: &Scenario,
    schedule: &[u32],
    policy: &DefenderPolicy,
    target_rate: f64,
) -> Result<MillerCurve> {
    if !(target_rate > 0.0) || !target_rate.is_finite() {
        return Err(Error::invalid("target rate must be positive"));
    }
    let rate_at = |i_high: f64| -> Result<f64> {
        let mut s = template.clone();
        s.miller.i_high = i_high;
        casualty_rate(&s, schedule, policy)
    };
    let (mut lo, mut hi) = CALIBRATE_BRACKET;
    let (r_lo, r_hi) = (rate_at(lo)?, rate_at(hi)?);
    if !(r_lo <= target_rate && target_rate <= r_hi) {
        return Err(Error::Degenerate(format!(
            "target {target_rate} outside reachable rates [{r_lo}, {r_hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate_at(mid)? < target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i_high = if (rate_at(lo)? - target_rate).abs() <= (rate_at(hi)? - target_rate).abs() {
        lo
    } else {
        hi
    };
    MillerCurve::new(i_high, template.miller.i_low_decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scenario(horizon: u32, t_attack: u32, t_cop: u32, budget: u32) -> Scenario {
        Scenario {
            horizon_min: horizon,
            t_attack,
            t_cop,
            bullet_budget: budget,
            victims: vec![1.0],
            ..Scenario::default()
        }
    }

    #[test]
    fn miller_pieces() {
        let mut s = scenario(20, 3, 6, 10);
        s.miller = MillerCurve::new(5.0, 0.5).unwrap();
        assert_eq!(injury_scale(2, &s), 0.0);
        assert_eq!(injury_scale(3, &s), 5.0);
        assert_eq!(injury_scale(5, &s), 5.0);
        assert_eq!(injury_scale(6, &s), 5.0);
        assert_eq!(injury_scale(8, &s), 1.25);
        assert!(MillerCurve::new(0.0, 0.5).is_err());
        assert!(MillerCurve::new(1.0, 1.0).is_err());
    }

    #[test]
    fn zero_schedule_no_loss() {
        let s = Scenario::default();
        let out = simulate(&s, &[0; 31], &DefenderPolicy::default()).unwrap();
        assert_eq!(out.loss_v, 0.0);
        assert!(out.casualty_trajectory.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn immediate_stop_flattens() {
        let s = scenario(10, 2, 2, 100);
        let policy = DefenderPolicy {
            stop_rate: 1.0,
            ..DefenderPolicy::default()
        };
        let out = simulate(&s, &[5; 10], &policy).unwrap();
        assert_eq!(out.stop_time, Some(2));
        let after = &out.casualty_trajectory[2..];
        assert!(after.iter().all(|&c| c == after[0]));
        assert_eq!(out.loss_v, 5.0);
    }

    #[test]
    fn plateau_sum_is_bullet_count() {
        // t_cop = horizon: no decay and no stop.
        for k in 1..=12u32 {
            let s = scenario(12, 0, 12, 12);
            let sched: Vec<u32> = (0..12).map(|t| u32::from(t < k)).collect();
            let out = simulate(&s, &sched, &DefenderPolicy::default()).unwrap();
            assert_eq!(out.loss_v, f64::from(k));
            assert_eq!(out.stop_time, None);
        }
    }

    #[test]
    fn schedule_errors() {
        let s = scenario(5, 0, 2, 3);
        let p = DefenderPolicy::default();
        assert!(simulate(&s, &[1, 1, 1, 1, 0], &p).is_err());
        assert!(matches!(
            simulate(&s, &[1, 1], &p),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn default_template_window() {
        let s = Scenario::default();
        let sched = s.uniform_schedule();
        assert_eq!(sched.iter().sum::<u32>(), 78);
        let out = simulate(&s, &sched, &DefenderPolicy::default()).unwrap();
        assert_eq!(out.stop_time, Some(30));
        assert_eq!(out.active_minutes, 31);
    }

    #[test]
    fn calibrate_hits_target() {
        let s = Scenario::default();
        let sched = s.uniform_schedule();
        let policy = DefenderPolicy::default();
        let m = calibrate(&s, &sched, &policy, 0.639).unwrap();
        let mut fitted = s.clone();
        fitted.miller = m;
        assert!((casualty_rate(&fitted, &sched, &policy).unwrap() - 0.639).abs() < 1e-6);

        let unit = casualty_rate(&s, &sched, &policy).unwrap();
        let m = calibrate(&s, &sched, &policy, unit).unwrap();
        assert!((m.i_high - 1.0).abs() < 1e-6);
        assert!(calibrate(&s, &sched, &policy, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let s = Scenario::default();
        let sched = s.uniform_schedule();
        let p = DefenderPolicy::default();
        let run = |seed| {
            simulate_with(&s, &sched, &p, Models::default(), Mode::MonteCarlo { seed }).unwrap()
        };
        assert_eq!(run(7), run(7));
        let stops: std::collections::BTreeSet<_> = (0..50).map(|k| run(k).stop_time).collect();
        assert!(stops.len() > 1);
    }

    #[test]
    fn payoff_monotone_without_cost() {
        let s = Scenario::default();
        let sched = s.uniform_schedule();
        let mut last = f64::NEG_INFINITY;
        for officers in 1..=32 {
            let p = DefenderPolicy {
                officers,
                ..DefenderPolicy::default()
            };
            let pay = simulate(&s, &sched, &p).unwrap().defender_payoff;
            assert!(pay >= last);
            last = pay;
        }
    }

    proptest! {
        #[test]
        fn earlier_police_never_worse(
            horizon in 2u32..40,
            a in 0u32..40,
            c1 in 0u32..40,
            c2 in 0u32..40,
            decay in 0.05f64..0.95,
            sched_seed in any::<u64>(),
        ) {
            let t_attack = a % horizon;
            let lo = t_attack + c1 % (horizon - t_attack + 1);
            let hi = t_attack + c2 % (horizon - t_attack + 1);
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sched_seed);
            let sched: Vec<u32> = (0..horizon).map(|_| rand::Rng::random_range(&mut rng, 0..5)).collect();
            let budget = sched.iter().sum::<u32>().max(1);
            let mut s = scenario(horizon, t_attack, hi, budget);
            s.miller.i_low_decay = decay;
            let late = simulate(&s, &sched, &DefenderPolicy::default()).unwrap();
            s.t_cop = lo;
            let early = simulate(&s, &sched, &DefenderPolicy::default()).unwrap();
            prop_assert!(early.loss_v <= late.loss_v);
            prop_assert!(late.casualty_trajectory.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(*late.casualty_trajectory.last().unwrap(), late.loss_v);
        }
    }
}
