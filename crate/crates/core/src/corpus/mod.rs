//! Incident records, the bundled corpus, and aggregates derived from it.

mod aggregate;
mod clock;
mod validate;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use aggregate::{
    location_histogram, parse_state_counts, state_counts, yearly_series, LocationBin, SeriesLabel,
    StateCounts, YearlySeries,
};
pub use clock::{ClockParseError, ClockTime};
pub use validate::{
    validate, CrossTableDiff, CuratedOverride, Finding, ValidationReport, YearTotals,
    CURATED_OVERRIDES,
};

/// First and last calendar year covered by the bundled corpus.
pub const FIRST_YEAR: i32 = 1999;
pub const LAST_YEAR: i32 = 2024;

pub const INCIDENTS_HEADER: [&str; 18] = [
    "id",
    "school_name",
    "city",
    "state",
    "school_type",
    "date",
    "killed",
    "injured",
    "bullets",
    "t_arrived",
    "t_fired",
    "t_911",
    "t_police",
    "t_stop",
    "weapon",
    "location",
    "dist_police_km",
    "dist_hospital_km",
];

pub const BUNDLED_INCIDENTS_CSV: &str = include_str!("../../data/incidents.csv");

/// Postal codes of the 50 states plus DC.
pub const STATE_CODES: [&str; 51] = [
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA", "HI", "IA", "ID", "IL", "IN",
    "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ",
    "NM", "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VA", "VT", "WA",
    "WI", "WV", "WY",
];

pub const KM_PER_MILE: f64 = 1.609344;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchoolType {
    Public,
    Private,
}

impl SchoolType {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchoolType::Public => "public",
            SchoolType::Private => "private",
        }
    }
}

impl FromStr for SchoolType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "public" => Ok(SchoolType::Public),
            "private" => Ok(SchoolType::Private),
            other => Err(format!("unknown school type `{other}`")),
        }
    }
}

/// Where on campus the shooting took place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Classroom,
    Hallway,
    Outside,
    ParkingLot,
    EntryDoor,
    Cafeteria,
    Gym,
    Office,
    Field,
    Library,
    Bathroom,
    Bus,
    Other,
}

impl Location {
    pub const ALL: [Location; 13] = [
        Location::Classroom,
        Location::Hallway,
        Location::Outside,
        Location::ParkingLot,
        Location::EntryDoor,
        Location::Cafeteria,
        Location::Gym,
        Location::Office,
        Location::Field,
        Location::Library,
        Location::Bathroom,
        Location::Bus,
        Location::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Location::Classroom => "classroom",
            Location::Hallway => "hallway",
            Location::Outside => "outside",
            Location::ParkingLot => "parking_lot",
            Location::EntryDoor => "entry_door",
            Location::Cafeteria => "cafeteria",
            Location::Gym => "gym",
            Location::Office => "office",
            Location::Field => "field",
            Location::Library => "library",
            Location::Bathroom => "bathroom",
            Location::Bus => "bus",
            Location::Other => "other",
        }
    }
}

impl FromStr for Location {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Location::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown location `{s}`"))
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five event timestamps of an attack. Any may be unknown.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub arrived: Option<ClockTime>,
    pub fired: Option<ClockTime>,
    pub call_911: Option<ClockTime>,
    pub police: Option<ClockTime>,
    pub stop: Option<ClockTime>,
}

impl Timestamps {
    pub fn is_complete(&self) -> bool {
        self.arrived.is_some()
            && self.fired.is_some()
            && self.call_911.is_some()
            && self.police.is_some()
            && self.stop.is_some()
    }

    /// Moves every present timestamp by the same offset.
    pub fn shifted(&self, minutes: i64) -> Option<Self> {
        let shift = |t: Option<ClockTime>| match t {
            None => Some(None),
            Some(c) => c.shifted(minutes).map(Some),
        };
        Some(Self {
            arrived: shift(self.arrived)?,
            fired: shift(self.fired)?,
            call_911: shift(self.call_911)?,
            police: shift(self.police)?,
            stop: shift(self.stop)?,
        })
    }
}

/// One mass school shooting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub id: u32,
    pub school_name: String,
    pub city: String,
    pub state: String,
    pub school_type: SchoolType,
    pub date: NaiveDate,
    pub killed: u32,
    pub injured: u32,
    pub bullets_fired: Option<u32>,
    pub times: Timestamps,
    pub weapon: Option<String>,
    pub location: Option<Location>,
    pub dist_police_km: Option<f64>,
    pub dist_hospital_km: Option<f64>,
}

impl Incident {
    /// Innocents shot: killed plus injured.
    pub fn casualty(&self) -> u32 {
        self.killed + self.injured
    }

    pub fn year(&self) -> i32 {
        chrono::Datelike::year(&self.date)
    }

    pub fn dist_police_miles(&self) -> Option<f64> {
        self.dist_police_km.map(|km| km / KM_PER_MILE)
    }

    pub fn dist_hospital_miles(&self) -> Option<f64> {
        self.dist_hospital_km.map(|km| km / KM_PER_MILE)
    }
}

/// Parses the bundled corpus. Panics only if the embedded file is corrupt,
/// which the test suite rules out.
pub fn bundled_incidents() -> Vec<Incident> {
    parse_incidents(BUNDLED_INCIDENTS_CSV).expect("bundled incidents.csv is well-formed")
}

fn is_absent(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "-"
}

struct Row<'a> {
    row: usize,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    fn cell(&self, col: usize) -> &'a str {
        self.record.get(col).unwrap_or("").trim()
    }

    fn fail(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            row: self.row,
            column: INCIDENTS_HEADER[col].to_string(),
            message: message.into(),
        }
    }

    fn required(&self, col: usize) -> Result<&'a str> {
        let v = self.cell(col);
        if is_absent(v) {
            Err(self.fail(col, "required value is empty"))
        } else {
            Ok(v)
        }
    }

    fn count(&self, col: usize) -> Result<u32> {
        let v = self.required(col)?;
        parse_count(v).map_err(|m| self.fail(col, m))
    }

    fn opt_count(&self, col: usize) -> Result<Option<u32>> {
        let v = self.cell(col);
        if is_absent(v) {
            return Ok(None);
        }
        parse_count(v).map(Some).map_err(|m| self.fail(col, m))
    }

    fn opt_clock(&self, col: usize) -> Result<Option<ClockTime>> {
        let v = self.cell(col);
        if is_absent(v) {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|e: ClockParseError| self.fail(col, e.to_string()))
    }

    fn opt_distance(&self, col: usize) -> Result<Option<f64>> {
        let v = self.cell(col);
        if is_absent(v) {
            return Ok(None);
        }
        let d: f64 = v
            .parse()
            .map_err(|_| self.fail(col, format!("`{v}` is not a number")))?;
        if !d.is_finite() || d < 0.0 {
            return Err(self.fail(
                col,
                format!("distance must be finite and non-negative, got {v}"),
            ));
        }
        Ok(Some(d))
    }
}

fn parse_count(v: &str) -> std::result::Result<u32, String> {
    match v.parse::<i64>() {
        Ok(n) if n < 0 => Err(format!("negative count {n}")),
        Ok(n) => u32::try_from(n).map_err(|_| format!("count {n} out of range")),
        Err(_) => Err(format!("`{v}` is not an integer")),
    }
}

/// Parses `incidents.csv` text. Rows are numbered from 1 (first data row).
pub fn parse_incidents(csv_text: &str) -> Result<Vec<Incident>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(csv_text.as_bytes());

    let headers = reader.headers()?.clone();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != INCIDENTS_HEADER {
        return Err(Error::Parse {
            row: 0,
            column: "header".into(),
            message: format!("expected `{}`", INCIDENTS_HEADER.join(",")),
        });
    }

    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let record = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: "*".into(),
            message: e.to_string(),
        })?;
        let row = Row {
            row: i + 1,
            record: &record,
        };

        let id = row.count(0)?;
        if id == 0 {
            return Err(row.fail(0, "id must be positive"));
        }
        let state = row.required(3)?.to_string();
        if !STATE_CODES.contains(&state.as_str()) {
            return Err(row.fail(3, format!("unknown state code `{state}`")));
        }
        let school_type = row
            .required(4)?
            .parse()
            .map_err(|m: String| row.fail(4, m))?;
        let date_text = row.required(5)?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
            .map_err(|_| row.fail(5, format!("`{date_text}` is not YYYY-MM-DD")))?;
        let location = if is_absent(row.cell(15)) {
            None
        } else {
            Some(row.cell(15).parse().map_err(|m: String| row.fail(15, m))?)
        };
        let weapon = Some(row.cell(14))
            .filter(|w| !is_absent(w))
            .map(str::to_string);

        out.push(Incident {
            id,
            school_name: row.required(1)?.to_string(),
            city: row.required(2)?.to_string(),
            state,
            school_type,
            date,
            killed: row.count(6)?,
            injured: row.count(7)?,
            bullets_fired: row.opt_count(8)?,
            times: Timestamps {
                arrived: row.opt_clock(9)?,
                fired: row.opt_clock(10)?,
                call_911: row.opt_clock(11)?,
                police: row.opt_clock(12)?,
                stop: row.opt_clock(13)?,
            },
            weapon,
            location,
            dist_police_km: row.opt_distance(16)?,
            dist_hospital_km: row.opt_distance(17)?,
        });
    }
    Ok(out)
}

/// Writes incidents back out in the `incidents.csv` layout.
pub fn serialize_incidents(incidents: &[Incident]) -> Result<String> {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map(T::to_string).unwrap_or_default()
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(INCIDENTS_HEADER)?;
    for inc in incidents {
        w.write_record([
            inc.id.to_string(),
            inc.school_name.clone(),
            inc.city.clone(),
            inc.state.clone(),
            inc.school_type.as_str().to_string(),
            inc.date.format("%Y-%m-%d").to_string(),
            inc.killed.to_string(),
            inc.injured.to_string(),
            opt(&inc.bullets_fired),
            opt(&inc.times.arrived),
            opt(&inc.times.fired),
            opt(&inc.times.call_911),
            opt(&inc.times.police),
            opt(&inc.times.stop),
            inc.weapon.clone().unwrap_or_default(),
            inc.location
                .map(|l| l.as_str().to_string())
                .unwrap_or_default(),
            opt(&inc.dist_police_km),
            opt(&inc.dist_hospital_km),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        INCIDENTS_HEADER.join(",")
    }

    #[test]
    fn covenant_row() {
        let incs = bundled_incidents();
        let cov = incs
            .iter()
            .find(|i| i.school_name == "The Covenant School")
            .unwrap();
        assert_eq!(cov.killed, 6);
        assert_eq!(cov.injured, 1);
        assert_eq!(cov.casualty(), 7);
        assert_eq!(cov.bullets_fired, Some(150));
        assert_eq!(cov.times.arrived.unwrap().to_string(), "9:54 AM");
        assert_eq!(cov.times.stop.unwrap().to_string(), "10:27 AM");
        assert_eq!(cov.school_type, SchoolType::Private);
        assert_eq!(cov.state, "TN");
    }

    #[test]
    fn dash_and_empty_mean_absent() {
        let text = format!(
            "{}\n1,A,B,CA,public,2020-01-01,1,3,-,,-,,,,-,,-,\n",
            header()
        );
        let incs = parse_incidents(&text).unwrap();
        assert_eq!(incs[0].bullets_fired, None);
        assert_eq!(incs[0].times, Timestamps::default());
        assert_eq!(incs[0].weapon, None);
        assert_eq!(incs[0].dist_police_km, None);
    }

    #[test]
    fn negative_count_names_row_and_column() {
        let text = format!(
            "{}\n1,A,B,CA,public,2020-01-01,1,3,,,,,,,,,,\n2,A,B,CA,public,2020-01-01,-1,5,,,,,,,,,,\n",
            header()
        );
        match parse_incidents(&text) {
            Err(Error::Parse {
                row,
                column,
                message,
            }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "killed");
                assert!(message.contains("negative"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_state_rejected() {
        let text = format!("{}\n1,A,B,XX,public,2020-01-01,1,3,,,,,,,,,,\n", header());
        assert!(matches!(
            parse_incidents(&text),
            Err(Error::Parse { ref column, .. }) if column == "state"
        ));
    }

    #[test]
    fn bad_header_rejected() {
        let text = "id,name\n1,A\n";
        assert!(matches!(
            parse_incidents(text),
            Err(Error::Parse { row: 0, .. })
        ));
    }

    #[test]
    fn malformed_time_and_date() {
        let t = format!(
            "{}\n1,A,B,CA,public,2020-01-01,1,3,,25:00 AM,,,,,,,,\n",
            header()
        );
        assert!(
            matches!(parse_incidents(&t), Err(Error::Parse { ref column, .. }) if column == "t_arrived")
        );
        let d = format!("{}\n1,A,B,CA,public,01/01/2020,1,3,,,,,,,,,,\n", header());
        assert!(
            matches!(parse_incidents(&d), Err(Error::Parse { ref column, .. }) if column == "date")
        );
    }

    #[test]
    fn bundled_corpus_round_trips() {
        let incs = bundled_incidents();
        assert_eq!(incs.len(), 43);
        let text = serialize_incidents(&incs).unwrap();
        assert_eq!(parse_incidents(&text).unwrap(), incs);
    }

    #[test]
    fn miles_derived_from_km() {
        let incs = bundled_incidents();
        let apalachee = &incs[0];
        // Table lists 9.2 km (5.7 mi).
        assert!((apalachee.dist_police_miles().unwrap() - 5.7).abs() < 0.05);
    }
}
