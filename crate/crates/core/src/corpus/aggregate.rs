use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Incident, Location, FIRST_YEAR, LAST_YEAR, STATE_CODES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesLabel {
    Events,
    Killed,
    Injured,
    Casualty,
}

impl SeriesLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesLabel::Events => "events",
            SeriesLabel::Killed => "killed",
            SeriesLabel::Injured => "injured",
            SeriesLabel::Casualty => "casualty",
        }
    }

    fn value(&self, inc: &Incident) -> f64 {
        f64::from(match self {
            SeriesLabel::Events => 1,
            SeriesLabel::Killed => inc.killed,
            SeriesLabel::Injured => inc.injured,
            SeriesLabel::Casualty => inc.casualty(),
        })
    }
}

impl FromStr for SeriesLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "events" => Ok(SeriesLabel::Events),
            "killed" => Ok(SeriesLabel::Killed),
            "injured" => Ok(SeriesLabel::Injured),
            "casualty" | "casualties" => Ok(SeriesLabel::Casualty),
            other => Err(format!("unknown series `{other}`")),
        }
    }
}

impl fmt::Display for SeriesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gap-free yearly values starting at `start_year`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlySeries {
    pub start_year: i32,
    pub values: Vec<f64>,
    pub label: SeriesLabel,
}

impl YearlySeries {
    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        let idx = usize::try_from(year - self.start_year).ok()?;
        self.values.get(idx).copied()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Per-year sums over 1999–2024; years without incidents are zero and
/// incidents outside the range are ignored.
pub fn yearly_series(incidents: &[Incident], label: SeriesLabel) -> YearlySeries {
    let mut values = vec![0.0; (LAST_YEAR - FIRST_YEAR + 1) as usize];
    for inc in incidents {
        if let Ok(idx) = usize::try_from(inc.year() - FIRST_YEAR) {
            if let Some(slot) = values.get_mut(idx) {
                *slot += label.value(inc);
            }
        }
    }
    YearlySeries {
        start_year: FIRST_YEAR,
        values,
        label,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationBin {
    /// `None` is the unknown-location bucket.
    pub location: Option<Location>,
    pub count: usize,
    /// Share of all incidents, percent, rounded to 2 decimals.
    pub percent: f64,
}

impl LocationBin {
    pub fn name(&self) -> &'static str {
        self.location.map_or("unknown", |l| l.as_str())
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Incident counts by location, most frequent first. Unknown locations get
/// their own bucket and stay in the denominator.
pub fn location_histogram(incidents: &[Incident]) -> Vec<LocationBin> {
    let total = incidents.len();
    let mut counts: BTreeMap<Option<Location>, usize> = BTreeMap::new();
    for inc in incidents {
        *counts.entry(inc.location).or_default() += 1;
    }
    let mut bins: Vec<LocationBin> = counts
        .into_iter()
        .map(|(location, count)| LocationBin {
            location,
            count,
            percent: round2(100.0 * count as f64 / total as f64),
        })
        .collect();
    // Unknown sorts last among equals; known locations keep declaration order.
    bins.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.location.is_none().cmp(&b.location.is_none()))
            .then_with(|| a.location.cmp(&b.location))
    });
    bins
}

/// Incident counts keyed by state code; absent states read as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCounts(pub BTreeMap<String, usize>);

impl StateCounts {
    pub fn get(&self, state: &str) -> usize {
        self.0.get(state).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dense vector over every state code (50 states + DC), in code order.
    pub fn dense(&self) -> Vec<(&'static str, usize)> {
        STATE_CODES.iter().map(|&s| (s, self.get(s))).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,count\n");
        for (s, n) in self.dense() {
            out.push_str(&format!("{s},{n}\n"));
        }
        out
    }
}

pub fn state_counts(incidents: &[Incident]) -> StateCounts {
    let mut map = BTreeMap::new();
    for inc in incidents {
        *map.entry(inc.state.clone()).or_default() += 1;
    }
    StateCounts(map)
}

/// Reads an external `state,count` CSV (e.g. per-state counts of all school
/// shootings).
pub fn parse_state_counts(text: &str) -> Result<StateCounts> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut map = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let fail = |column: &str, message: String| Error::Parse {
            row,
            column: column.into(),
            message,
        };
        let state = rec.get(0).unwrap_or("").trim().to_string();
        if !STATE_CODES.contains(&state.as_str()) {
            return Err(fail("state", format!("unknown state code `{state}`")));
        }
        let raw = rec.get(1).unwrap_or("").trim();
        let n: usize = raw
            .parse()
            .map_err(|_| fail("count", format!("`{raw}` is not a count")))?;
        if map.insert(state.clone(), n).is_some() {
            return Err(fail("state", format!("duplicate state `{state}`")));
        }
    }
    Ok(StateCounts(map))
}
