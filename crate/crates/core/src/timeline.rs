//! Four-phase attack timelines: KIV (arrival to first shot), VA (first shot
//! to first 911 call), POM (call to police arrival) and Shootout (police
//! arrival to stop).

use serde::Serialize;

use crate::corpus::{ClockTime, Incident};
use crate::error::{Error, Result};
use crate::published::PublishedTimelineRow;
use crate::stats::{Factor, FactorObservation};

pub const ANOMALY_FIRE_BEFORE_ARRIVAL: &str = "first shot preceded arrival";
pub const ANOMALY_CALL_BEFORE_FIRE: &str = "911 preceded first shot";
pub const ANOMALY_POLICE_BEFORE_CALL: &str = "police arrived before 911 call";
pub const ANOMALY_STOP_BEFORE_POLICE: &str = "stop preceded police arrival";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineBreakdown {
    pub incident_id: u32,
    pub kiv_min: f64,
    pub va_min: f64,
    pub pom_min: f64,
    pub shootout_min: f64,
    /// VA + POM + Shootout.
    pub crime_time_min: f64,
    pub anomalies: Vec<String>,
}

impl TimelineBreakdown {
    pub fn from_published(row: &PublishedTimelineRow) -> Self {
        Self {
            incident_id: row.id,
            kiv_min: row.kiv_min,
            va_min: row.va_min,
            pom_min: row.pom_min,
            shootout_min: row.shootout_min,
            crime_time_min: row.crime_time_min,
            anomalies: Vec::new(),
        }
    }

    pub fn phases(&self) -> [f64; 4] {
        [self.kiv_min, self.va_min, self.pom_min, self.shootout_min]
    }
}

fn need(t: Option<ClockTime>, id: u32, field: &'static str) -> Result<ClockTime> {
    t.ok_or(Error::MissingField { id, field })
}

/// Splits an incident into its four phases. Negative gaps clamp to zero and
/// are flagged; every timestamp must be present.
pub fn derive_phases(incident: &Incident) -> Result<TimelineBreakdown> {
    let id = incident.id;
    let t = &incident.times;
    let arrived = need(t.arrived, id, "t_arrived")?;
    let fired = need(t.fired, id, "t_fired")?;
    let call = need(t.call_911, id, "t_911")?;
    let police = need(t.police, id, "t_police")?;
    let stop = need(t.stop, id, "t_stop")?;

    let mut anomalies = Vec::new();
    let mut gap = |later: ClockTime, earlier: ClockTime, flag: &str| {
        let d = later.minutes_since(&earlier);
        if d < 0 {
            anomalies.push(flag.to_string());
            0.0
        } else {
            d as f64
        }
    };
    let kiv_min = gap(fired, arrived, ANOMALY_FIRE_BEFORE_ARRIVAL);
    let va_min = gap(call, fired, ANOMALY_CALL_BEFORE_FIRE);
    let pom_min = gap(police, call, ANOMALY_POLICE_BEFORE_CALL);
    let shootout_min = gap(stop, police, ANOMALY_STOP_BEFORE_POLICE);

    Ok(TimelineBreakdown {
        incident_id: id,
        kiv_min,
        va_min,
        pom_min,
        shootout_min,
        crime_time_min: va_min + pom_min + shootout_min,
        anomalies,
    })
}

/// Incidents carrying every timeline-table column: five timestamps, bullet
/// count and both distances. Corpus order.
pub fn timeline_subset(incidents: &[Incident]) -> Vec<&Incident> {
    incidents
        .iter()
        .filter(|i| {
            i.times.is_complete()
                && i.bullets_fired.is_some()
                && i.dist_police_km.is_some()
                && i.dist_hospital_km.is_some()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseAverages {
    pub mean_kiv: f64,
    pub mean_va: f64,
    pub mean_pom: f64,
    pub mean_shootout: f64,
    pub mean_crime_time: f64,
    pub mean_casualty: f64,
    pub casualties_per_minute: f64,
    pub n: usize,
}

pub fn phase_averages(
    breakdowns: &[TimelineBreakdown],
    casualties: &[f64],
) -> Result<PhaseAverages> {
    if breakdowns.len() != casualties.len() {
        return Err(Error::LengthMismatch {
            left: breakdowns.len(),
            right: casualties.len(),
        });
    }
    if breakdowns.is_empty() {
        return Err(Error::invalid("phase averages need at least one breakdown"));
    }
    let n = breakdowns.len();
    let mean = |f: fn(&TimelineBreakdown) -> f64| breakdowns.iter().map(f).sum::<f64>() / n as f64;
    let mean_crime_time = mean(|b| b.crime_time_min);
    let mean_casualty = casualties.iter().sum::<f64>() / n as f64;
    Ok(PhaseAverages {
        mean_kiv: mean(|b| b.kiv_min),
        mean_va: mean(|b| b.va_min),
        mean_pom: mean(|b| b.pom_min),
        mean_shootout: mean(|b| b.shootout_min),
        mean_crime_time,
        mean_casualty,
        casualties_per_minute: mean_casualty / mean_crime_time,
        n,
    })
}

/// Averages over the published timeline columns, casualties included.
pub fn published_phase_averages(rows: &[PublishedTimelineRow]) -> Result<PhaseAverages> {
    let breakdowns: Vec<_> = rows.iter().map(TimelineBreakdown::from_published).collect();
    let casualties: Vec<f64> = rows.iter().map(|r| f64::from(r.casualty)).collect();
    phase_averages(&breakdowns, &casualties)
}

/// Derived breakdowns for the timeline subset, paired with record casualties.
pub fn derived_breakdowns(incidents: &[Incident]) -> Result<(Vec<TimelineBreakdown>, Vec<f64>)> {
    let subset = timeline_subset(incidents);
    let breakdowns = subset
        .iter()
        .map(|i| derive_phases(i))
        .collect::<Result<Vec<_>>>()?;
    let casualties = subset.iter().map(|i| f64::from(i.casualty())).collect();
    Ok((breakdowns, casualties))
}

/// A cell where the published timeline table and the value recomputed from
/// records disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineDiff {
    pub id: u32,
    pub field: &'static str,
    pub published: f64,
    pub recomputed: f64,
}

/// Compares published rows against timestamp-derived phases and record
/// counts. Rows without a matching record are skipped.
pub fn compare_with_published(
    incidents: &[Incident],
    published: &[PublishedTimelineRow],
) -> Vec<TimelineDiff> {
    let mut diffs = Vec::new();
    for row in published {
        let Some(inc) = incidents.iter().find(|i| i.id == row.id) else {
            continue;
        };
        let mut push = |field, published: f64, recomputed: Option<f64>| {
            if let Some(recomputed) = recomputed {
                if (published - recomputed).abs() > 1e-9 {
                    diffs.push(TimelineDiff {
                        id: row.id,
                        field,
                        published,
                        recomputed,
                    });
                }
            }
        };
        push(
            "casualty",
            f64::from(row.casualty),
            Some(f64::from(inc.casualty())),
        );
        push(
            "bullets",
            f64::from(row.bullets),
            inc.bullets_fired.map(f64::from),
        );
        if let Ok(b) = derive_phases(inc) {
            push("kiv_min", row.kiv_min, Some(b.kiv_min));
            push("va_min", row.va_min, Some(b.va_min));
            push("pom_min", row.pom_min, Some(b.pom_min));
            push("shootout_min", row.shootout_min, Some(b.shootout_min));
            push("crime_time_min", row.crime_time_min, Some(b.crime_time_min));
        }
    }
    diffs
}

fn distances(incidents: &[Incident], id: u32) -> (Option<f64>, Option<f64>) {
    incidents
        .iter()
        .find(|i| i.id == id)
        .map_or((None, None), |i| (i.dist_police_km, i.dist_hospital_km))
}

/// Factor observations from the published timeline columns; distances come
/// from the incident records.
pub fn published_factor_observations(
    rows: &[PublishedTimelineRow],
    incidents: &[Incident],
) -> Vec<FactorObservation> {
    rows.iter()
        .map(|r| {
            let (police, hospital) = distances(incidents, r.id);
            let mut factors = [None; 8];
            factors[Factor::Bullets.index()] = Some(f64::from(r.bullets));
            factors[Factor::Kiv.index()] = Some(r.kiv_min);
            factors[Factor::Va.index()] = Some(r.va_min);
            factors[Factor::Pom.index()] = Some(r.pom_min);
            factors[Factor::Shootout.index()] = Some(r.shootout_min);
            factors[Factor::DistPolice.index()] = police;
            factors[Factor::DistHospital.index()] = hospital;
            factors[Factor::CrimeTime.index()] = Some(r.crime_time_min);
            FactorObservation {
                id: r.id,
                casualty: f64::from(r.casualty),
                factors,
            }
        })
        .collect()
}

/// Factor observations recomputed from the records of the timeline subset.
pub fn derived_factor_observations(incidents: &[Incident]) -> Result<Vec<FactorObservation>> {
    timeline_subset(incidents)
        .into_iter()
        .map(|inc| {
            let b = derive_phases(inc)?;
            let mut factors = [None; 8];
            factors[Factor::Bullets.index()] = inc.bullets_fired.map(f64::from);
            factors[Factor::Kiv.index()] = Some(b.kiv_min);
            factors[Factor::Va.index()] = Some(b.va_min);
            factors[Factor::Pom.index()] = Some(b.pom_min);
            factors[Factor::Shootout.index()] = Some(b.shootout_min);
            factors[Factor::DistPolice.index()] = inc.dist_police_km;
            factors[Factor::DistHospital.index()] = inc.dist_hospital_km;
            factors[Factor::CrimeTime.index()] = Some(b.crime_time_min);
            Ok(FactorObservation {
                id: inc.id,
                casualty: f64::from(inc.casualty()),
                factors,
            })
        })
        .collect()
}
