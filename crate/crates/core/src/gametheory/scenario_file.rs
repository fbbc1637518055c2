//! Flat `key = value` scenario files. Blank lines and `#` comments are
//! ignored; list values are comma-separated.

use std::str::FromStr;

use serde::Serialize;

use super::{DefenderPolicy, GridSpec, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub policy: DefenderPolicy,
    pub grid: GridSpec,
    /// Explicit per-minute schedule; absent means the uniform schedule.
    pub schedule: Option<Vec<u32>>,
}

impl ScenarioFile {
    pub fn schedule(&self) -> Vec<u32> {
        self.schedule
            .clone()
            .unwrap_or_else(|| self.scenario.uniform_schedule())
    }
}

pub const KEYS: [&str; 19] = [
    "n_shooters",
    "bullet_budget",
    "horizon_min",
    "t_attack",
    "t_cop",
    "victims",
    "material_cost_per_min",
    "i_high",
    "i_low_decay",
    "stop_threshold",
    "officers",
    "weapon_level",
    "stop_rate",
    "unexpected_cost_rate",
    "schedule",
    "blocks",
    "granularity",
    "officer_cap",
    "weapon_levels",
];

fn one<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        row: line,
        column: key.to_string(),
        message: format!("bad value `{v}`"),
    })
}

fn list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| one(line, key, s.trim())).collect()
}

/// Parses a scenario file over the defaults; unknown keys are errors. The
/// result is validated.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    let mut f = ScenarioFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                row: line,
                column: content.to_string(),
                message: "expected key = value".into(),
            });
        };
        let (key, v) = (key.trim(), value.trim());
        let s = &mut f.scenario;
        let p = &mut f.policy;
        let g = &mut f.grid;
        match key {
            "n_shooters" => s.n_shooters = one(line, key, v)?,
            "bullet_budget" => s.bullet_budget = one(line, key, v)?,
            "horizon_min" => s.horizon_min = one(line, key, v)?,
            "t_attack" => s.t_attack = one(line, key, v)?,
            "t_cop" => s.t_cop = one(line, key, v)?,
            "victims" => s.victims = list(line, key, v)?,
            "material_cost_per_min" => s.material_cost_per_min = one(line, key, v)?,
            "i_high" => s.miller.i_high = one(line, key, v)?,
            "i_low_decay" => s.miller.i_low_decay = one(line, key, v)?,
            "stop_threshold" => s.stop_threshold = one(line, key, v)?,
            "officers" => p.officers = one(line, key, v)?,
            "weapon_level" => p.weapon_level = one(line, key, v)?,
            "stop_rate" => p.stop_rate = one(line, key, v)?,
            "unexpected_cost_rate" => p.unexpected_cost_rate = one(line, key, v)?,
            "schedule" => f.schedule = Some(list(line, key, v)?),
            "blocks" => g.blocks = one(line, key, v)?,
            "granularity" => g.granularity = one(line, key, v)?,
            "officer_cap" => g.officer_cap = one(line, key, v)?,
            "weapon_levels" => g.weapon_levels = list(line, key, v)?,
            other => {
                return Err(Error::Parse {
                    row: line,
                    column: other.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
    }
    f.scenario.check()?;
    f.policy.check()?;
    if let Some(s) = &f.schedule {
        if s.len() != f.scenario.horizon_min as usize {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: f.scenario.horizon_min as usize,
            });
        }
    }
    Ok(f)
}
