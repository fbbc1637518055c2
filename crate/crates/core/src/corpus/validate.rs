use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{yearly_series, ClockTime, Incident, SeriesLabel, FIRST_YEAR, LAST_YEAR};
use crate::published::TABLE_I;

/// Minimum victims shot for an incident to count as a mass shooting.
pub const MASS_SHOOTING_MIN_VICTIMS: u32 = 4;

/// One validation finding, tied to a record when one is responsible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub id: Option<u32>,
    pub field: String,
    pub message: String,
}

impl Finding {
    fn new(id: Option<u32>, field: &str, message: impl Into<String>) -> Self {
        Self {
            id,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearTotals {
    pub events: u32,
    pub killed: u32,
    pub injured: u32,
    pub casualty: u32,
}

/// A per-year mismatch between the published yearly table and the totals
/// recomputed from records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossTableDiff {
    pub year: i32,
    pub published: YearTotals,
    pub recomputed: YearTotals,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
    pub cross_table_diffs: Vec<CrossTableDiff>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// A bundled value that deliberately differs from the record-level source
/// table, with the reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CuratedOverride {
    pub id: u32,
    pub field: &'static str,
    pub source_value: &'static str,
    pub bundled_value: &'static str,
    pub note: &'static str,
}

pub const CURATED_OVERRIDES: [CuratedOverride; 4] = [
    CuratedOverride {
        id: 10,
        field: "killed",
        source_value: "27",
        bundled_value: "26",
        note: "2012 yearly total prints 36 killed; 26 victims were killed at the school",
    },
    CuratedOverride {
        id: 13,
        field: "t_stop",
        source_value: "9:51 PM",
        bundled_value: "9:51 AM",
        note: "published crime time of 11 minutes from a 9:40 AM first shot forces AM",
    },
    CuratedOverride {
        id: 14,
        field: "injured",
        source_value: "6",
        bundled_value: "5",
        note: "2006 yearly total prints 5 injured",
    },
    CuratedOverride {
        id: 24,
        field: "killed/injured",
        source_value: "1/5",
        bundled_value: "0/6",
        note: "2022 yearly totals print 26 killed and 36 injured; six people were wounded and none killed",
    },
];

fn bundled_value_of(inc: &Incident, field: &str) -> Option<String> {
    Some(match field {
        "killed" => inc.killed.to_string(),
        "injured" => inc.injured.to_string(),
        "killed/injured" => format!("{}/{}", inc.killed, inc.injured),
        "t_stop" => inc.times.stop?.to_string(),
        _ => return None,
    })
}

fn check_chain(inc: &Incident, chain: &[(&str, Option<ClockTime>)], warnings: &mut Vec<Finding>) {
    let present: Vec<(&str, ClockTime)> = chain
        .iter()
        .filter_map(|(name, t)| t.map(|t| (*name, t)))
        .collect();
    for pair in present.windows(2) {
        let (a_name, a) = pair[0];
        let (b_name, b) = pair[1];
        if b < a {
            warnings.push(Finding::new(
                Some(inc.id),
                b_name,
                format!("{b_name} ({b}) precedes {a_name} ({a})"),
            ));
        }
    }
}

fn totals_of(incidents: &[Incident]) -> BTreeMap<i32, YearTotals> {
    let series = |label| yearly_series(incidents, label);
    let (ev, k, inj, cas) = (
        series(SeriesLabel::Events),
        series(SeriesLabel::Killed),
        series(SeriesLabel::Injured),
        series(SeriesLabel::Casualty),
    );
    (FIRST_YEAR..=LAST_YEAR)
        .enumerate()
        .map(|(i, year)| {
            (
                year,
                YearTotals {
                    events: ev.values[i] as u32,
                    killed: k.values[i] as u32,
                    injured: inj.values[i] as u32,
                    casualty: cas.values[i] as u32,
                },
            )
        })
        .collect()
}

/// Checks record invariants, timestamp ordering, and per-year totals against
/// the published yearly table. Never fails; everything lands in the report.
pub fn validate(incidents: &[Incident]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let first = chrono::NaiveDate::from_ymd_opt(FIRST_YEAR, 1, 1).unwrap();
    let last = chrono::NaiveDate::from_ymd_opt(LAST_YEAR, 12, 31).unwrap();

    let mut seen = BTreeSet::new();
    for inc in incidents {
        if !seen.insert(inc.id) {
            report
                .errors
                .push(Finding::new(Some(inc.id), "id", "duplicate id"));
        }
        if inc.casualty() < MASS_SHOOTING_MIN_VICTIMS {
            report.errors.push(Finding::new(
                Some(inc.id),
                "killed+injured",
                format!(
                    "{} victims shot; a mass shooting needs at least {MASS_SHOOTING_MIN_VICTIMS}",
                    inc.casualty()
                ),
            ));
        }
        if inc.date < first || inc.date > last {
            report.errors.push(Finding::new(
                Some(inc.id),
                "date",
                format!("{} outside {first}..{last}", inc.date),
            ));
        }

        // Phase order; consecutive present timestamps must not run backwards.
        let t = &inc.times;
        check_chain(
            inc,
            &[
                ("t_arrived", t.arrived),
                ("t_fired", t.fired),
                ("t_911", t.call_911),
                ("t_police", t.police),
                ("t_stop", t.stop),
            ],
            &mut report.warnings,
        );

        if inc.location.is_none() {
            report
                .warnings
                .push(Finding::new(Some(inc.id), "location", "location unknown"));
        }
    }

    for ov in CURATED_OVERRIDES {
        if let Some(inc) = incidents.iter().find(|i| i.id == ov.id) {
            if bundled_value_of(inc, ov.field).as_deref() == Some(ov.bundled_value) {
                report.warnings.push(Finding::new(
                    Some(ov.id),
                    ov.field,
                    format!(
                        "curated: source record prints {}, bundled {} ({})",
                        ov.source_value, ov.bundled_value, ov.note
                    ),
                ));
            }
        }
    }

    let recomputed = totals_of(incidents);
    for (year, events, injured, killed, casualty) in TABLE_I {
        let published = YearTotals {
            events,
            killed,
            injured,
            casualty,
        };
        let got = recomputed[&year];
        if got != published {
            report.cross_table_diffs.push(CrossTableDiff {
                year,
                published,
                recomputed: got,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_incidents;
    use chrono::NaiveDate;

    #[test]
    fn bundled_corpus_is_clean_against_yearly_table() {
        let report = validate(&bundled_incidents());
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert!(
            report.cross_table_diffs.is_empty(),
            "{:?}",
            report.cross_table_diffs
        );
    }

    #[test]
    fn west_nickel_mines_call_before_first_shot_is_a_warning() {
        let report = validate(&bundled_incidents());
        assert!(report
            .warnings
            .iter()
            .any(|w| w.id == Some(14) && w.message.contains("precedes")));
        assert!(report.errors.iter().all(|e| e.id != Some(14)));
    }

    #[test]
    fn moving_a_record_between_years_flags_both_years() {
        let mut incs = bundled_incidents();
        let moved = incs.iter_mut().find(|i| i.year() == 2023).unwrap();
        moved.date = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
        let report = validate(&incs);
        let years: Vec<i32> = report.cross_table_diffs.iter().map(|d| d.year).collect();
        assert_eq!(years, vec![2023, 2024]);
        assert_eq!(report.cross_table_diffs[0].recomputed.events, 5);
        assert_eq!(report.cross_table_diffs[1].recomputed.events, 3);
    }

    #[test]
    fn invariant_violations_are_errors() {
        let mut incs = bundled_incidents();
        incs[0].killed = 1;
        incs[0].injured = 2;
        incs[1].date = NaiveDate::from_ymd_opt(2025, 1, 2).unwrap();
        incs[2].id = incs[3].id;
        let report = validate(&incs);
        let fields: Vec<&str> = report.errors.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"killed+injured"));
        assert!(fields.contains(&"date"));
        assert!(fields.contains(&"id"));
        assert!(!report.is_ok());
    }

    #[test]
    fn curated_overrides_are_reported() {
        let report = validate(&bundled_incidents());
        for ov in CURATED_OVERRIDES {
            assert!(
                report
                    .warnings
                    .iter()
                    .any(|w| w.id == Some(ov.id) && w.message.starts_with("curated")),
                "missing curation note for {}",
                ov.id
            );
        }
    }
}
