//! Assembles every reproduced table and figure series into one bundle with
//! per-table discrepancy lists, and renders it as markdown, CSV or JSON.
//! Rendering formats numbers only; all values come from the analysis modules.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::corpus::{
    location_histogram, state_counts, yearly_series, Incident, SeriesLabel, StateCounts,
};
use crate::error::{Error, Result};
use crate::forecast::{
    run_harness, HarnessConfig, HarnessOutput, Target, TargetForecast, FORECAST_YEARS,
};
use crate::published::{self, PublishedForecast, PublishedTimelineRow};
use crate::stats::{correlation_table, state_correlation, Factor, FactorCorrelation};
use crate::timeline::{
    compare_with_published, derived_breakdowns, derived_factor_observations, phase_averages,
    published_factor_observations, published_phase_averages, PhaseAverages,
};

pub const TABLE_NAMES: [&str; 9] = [
    "table1",
    "table2",
    "table3",
    "table4",
    "table6",
    "fig5_histogram",
    "fig1_state_counts",
    "fig6_series",
    "fig7_series",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Value with its display precision.
    Num(f64, usize),
    Text(String),
    Empty,
}

impl Cell {
    pub fn num(v: f64, places: usize) -> Self {
        Cell::Num(v, places)
    }

    pub fn opt(v: Option<f64>, places: usize) -> Self {
        v.map_or(Cell::Empty, |v| Cell::Num(v, places))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v, p) => format!("{v:.p$}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Num(v, _) => s.serialize_f64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(i64::from(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", self.columns.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(self.columns.len()));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }
}

/// A cell whose recomputed value differs from the published one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diff {
    pub cell: String,
    pub computed: Cell,
    pub published: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
    pub tables: BTreeMap<String, Table>,
    pub diffs: BTreeMap<String, Vec<Diff>>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub forecast: HarnessConfig,
    /// Per-state counts of all school shootings, for the state correlation.
    pub state_shootings: Option<StateCounts>,
    /// Published timeline columns; defaults to the bundled transcription.
    pub published_timeline: Option<Vec<PublishedTimelineRow>>,
    pub stamp: Option<String>,
}

fn differs(computed: f64, published: f64, places: usize) -> bool {
    (computed - published).abs() >= 0.5 * 10f64.powi(-(places as i32))
}

fn table1(incidents: &[Incident], diffs: &mut Vec<Diff>) -> Table {
    let mut t = Table::new(
        "Historical incidents and casualties",
        &["Year", "Events", "Injured", "Killed", "Total Casualty"],
    );
    let series = [
        SeriesLabel::Events,
        SeriesLabel::Injured,
        SeriesLabel::Killed,
        SeriesLabel::Casualty,
    ]
    .map(|l| yearly_series(incidents, l));
    for (k, &(year, ev, inj, kil, cas)) in published::TABLE_I.iter().enumerate() {
        let vals: Vec<u32> = series.iter().map(|s| s.values[k] as u32).collect();
        for ((name, v), p) in t.columns[1..].iter().zip(&vals).zip([ev, inj, kil, cas]) {
            if *v != p {
                diffs.push(Diff {
                    cell: format!("{year}/{name}"),
                    computed: (*v).into(),
                    published: p.into(),
                });
            }
        }
        let mut row = vec![Cell::from(year)];
        row.extend(vals.into_iter().map(Cell::from));
        t.push(row);
    }
    let mut total = vec![Cell::text("Total")];
    total.extend(series.iter().map(|s| Cell::from(s.total() as u32)));
    t.push(total);
    t
}

fn forecast_table(
    title: &str,
    tf: &TargetForecast,
    published: &[PublishedForecast],
    diffs: &mut Vec<Diff>,
) -> Table {
    let mut cols = vec!["ID", "Model"];
    let years: Vec<String> = FORECAST_YEARS.iter().map(|y| y.to_string()).collect();
    cols.extend(years.iter().map(String::as_str));
    cols.extend(["MSE", "MAE", "MAPE", "Training Data"]);
    let mut t = Table::new(title, &cols);
    for r in &tf.rows {
        let mut row = vec![Cell::text(&r.model_id), Cell::text(r.model_name)];
        row.extend(r.predictions.iter().map(|&p| Cell::num(p, 2)));
        row.extend([
            Cell::num(r.mse, 2),
            Cell::num(r.mae, 2),
            Cell::opt(r.mape, 4),
            Cell::text(&r.training_data),
        ]);
        t.push(row);
        let Some(p) = published.iter().find(|p| p.model_id == r.model_id) else {
            continue;
        };
        for ((year, &c), &pv) in FORECAST_YEARS
            .iter()
            .zip(&r.predictions)
            .zip(&p.predictions)
        {
            if differs(c, pv, 2) {
                diffs.push(Diff {
                    cell: format!("{}/{year}", r.model_id),
                    computed: Cell::num(c, 2),
                    published: Cell::num(pv, 2),
                });
            }
        }
        for (name, c, pv) in [("MSE", r.mse, p.mse), ("MAE", r.mae, p.mae)] {
            if differs(c, pv, 2) {
                diffs.push(Diff {
                    cell: format!("{}/{name}", r.model_id),
                    computed: Cell::num(c, 2),
                    published: Cell::num(pv, 2),
                });
            }
        }
        if r.training_data != p.training_data {
            diffs.push(Diff {
                cell: format!("{}/Training Data", r.model_id),
                computed: Cell::text(&r.training_data),
                published: Cell::text(p.training_data),
            });
        }
    }
    let mut avg = vec![Cell::text("Average"), Cell::Empty];
    avg.extend(tf.average.iter().map(|&a| Cell::num(a, 2)));
    avg.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
    t.push(avg);
    t
}

fn average_row(label: &str, a: &PhaseAverages, bullets: f64) -> Vec<Cell> {
    vec![
        Cell::text(label),
        Cell::num(a.mean_casualty, 2),
        Cell::num(bullets, 2),
        Cell::num(a.mean_kiv, 2),
        Cell::num(a.mean_va, 2),
        Cell::num(a.mean_pom, 2),
        Cell::num(a.mean_shootout, 2),
        Cell::num(a.mean_crime_time, 2),
        Cell::Empty,
        Cell::Empty,
    ]
}

fn table4(
    incidents: &[Incident],
    published_rows: &[PublishedTimelineRow],
    diffs: &mut Vec<Diff>,
) -> Result<Table> {
    let mut t = Table::new(
        "Timeline of the attack phases (minutes, recomputed from records)",
        &[
            "ID",
            "Casualty",
            "Bullets",
            "KIV",
            "VA",
            "POM",
            "Shootout",
            "Crime Time",
            "Dist Police (mi)",
            "Dist Hospital (mi)",
        ],
    );
    let (breakdowns, casualties) = derived_breakdowns(incidents)?;
    let mut bullets = Vec::new();
    for (b, &cas) in breakdowns.iter().zip(&casualties) {
        let inc = incidents
            .iter()
            .find(|i| i.id == b.incident_id)
            .expect("breakdown comes from an incident");
        bullets.push(inc.bullets_fired.map(f64::from));
        t.push(vec![
            b.incident_id.into(),
            Cell::num(cas, 0),
            inc.bullets_fired.map_or(Cell::Empty, Cell::from),
            Cell::num(b.kiv_min, 0),
            Cell::num(b.va_min, 0),
            Cell::num(b.pom_min, 0),
            Cell::num(b.shootout_min, 0),
            Cell::num(b.crime_time_min, 0),
            Cell::opt(inc.dist_police_miles(), 1),
            Cell::opt(inc.dist_hospital_miles(), 1),
        ]);
    }
    let known: Vec<f64> = bullets.iter().flatten().copied().collect();
    let mean_bullets = known.iter().sum::<f64>() / known.len().max(1) as f64;
    t.push(average_row(
        "Average (records)",
        &phase_averages(&breakdowns, &casualties)?,
        mean_bullets,
    ));
    let pub_bullets = published_rows
        .iter()
        .map(|r| f64::from(r.bullets))
        .sum::<f64>()
        / published_rows.len().max(1) as f64;
    t.push(average_row(
        "Average (published columns)",
        &published_phase_averages(published_rows)?,
        pub_bullets,
    ));
    for d in compare_with_published(incidents, published_rows) {
        diffs.push(Diff {
            cell: format!("{}/{}", d.id, d.field),
            computed: Cell::num(d.recomputed, 0),
            published: Cell::num(d.published, 0),
        });
    }
    Ok(t)
}

fn table6(
    incidents: &[Incident],
    published_rows: &[PublishedTimelineRow],
    diffs: &mut Vec<Diff>,
) -> Result<Table> {
    let mut t = Table::new(
        "Correlation of casualty with seven factors",
        &[
            "Factor",
            "r",
            "p",
            "n",
            "r (records)",
            "p (records)",
            "n (records)",
        ],
    );
    let from_columns =
        correlation_table(&published_factor_observations(published_rows, incidents))?;
    let from_records = correlation_table(&derived_factor_observations(incidents)?)?;
    let by =
        |v: &[FactorCorrelation], f: Factor| v.iter().find(|c| c.factor == f).map(|c| c.result);
    for (k, f) in Factor::ALL.iter().enumerate() {
        let a = by(&from_columns, *f).expect("every factor computed");
        let b = by(&from_records, *f).expect("every factor computed");
        t.push(vec![
            Cell::text(f.as_str()),
            Cell::num(a.r, 3),
            Cell::num(a.p_two_tailed, 4),
            a.n.into(),
            Cell::num(b.r, 3),
            Cell::num(b.p_two_tailed, 4),
            b.n.into(),
        ]);
        let pr = published::TABLE_VI_R[k];
        if differs(a.r, pr, 3) {
            diffs.push(Diff {
                cell: format!("{}/r", f.as_str()),
                computed: Cell::num(a.r, 3),
                published: Cell::num(pr, 3),
            });
        }
    }
    Ok(t)
}

fn fig5(incidents: &[Incident], diffs: &mut Vec<Diff>) -> Table {
    let mut t = Table::new("Incident locations", &["Location", "Count", "Percent"]);
    let bins = location_histogram(incidents);
    for b in &bins {
        t.push(vec![
            Cell::text(b.name()),
            b.count.into(),
            Cell::num(b.percent, 2),
        ]);
    }
    for &(name, count, pct) in &published::LOCATION_SHARES {
        let got = bins.iter().find(|b| b.name() == name);
        let (c, p) = got.map_or((0, 0.0), |b| (b.count, b.percent));
        if c != count || differs(p, pct, 2) {
            diffs.push(Diff {
                cell: name.into(),
                computed: Cell::num(p, 2),
                published: Cell::num(pct, 2),
            });
        }
    }
    t
}

fn fig1(
    incidents: &[Incident],
    external: Option<&StateCounts>,
    diffs: &mut Vec<Diff>,
) -> Result<Table> {
    let mass = state_counts(incidents);
    let mut cols = vec!["State", "Mass School Shootings"];
    if external.is_some() {
        cols.push("School Shootings");
    }
    let mut t = Table::new("Shootings by state", &cols);
    for (s, n) in mass.dense() {
        let mut row = vec![Cell::text(s), n.into()];
        if let Some(ext) = external {
            row.push(ext.get(s).into());
        }
        t.push(row);
    }
    if let Some(ext) = external {
        let c = state_correlation(&mass, ext)?;
        if differs(c.r, published::STATE_R, 3) {
            diffs.push(Diff {
                cell: "state_r".into(),
                computed: Cell::num(c.r, 3),
                published: Cell::num(published::STATE_R, 3),
            });
        }
    }
    Ok(t)
}

fn series_table(title: &str, tf: &TargetForecast) -> Table {
    let mut cols = vec!["Year".to_string(), "Observed".to_string()];
    cols.extend(tf.rows.iter().map(|r| r.model_id.clone()));
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(title, &refs);
    for p in &tf.series {
        let mut row = vec![Cell::from(p.year), Cell::opt(p.observed, 0)];
        row.extend(p.predicted.iter().map(|&v| Cell::num(v, 4)));
        t.push(row);
    }
    t
}

fn target(h: &HarnessOutput, t: Target) -> Result<&TargetForecast> {
    h.target(t)
        .ok_or_else(|| Error::invalid(format!("harness produced no {t} forecast")))
}

pub fn build_report(incidents: &[Incident], opts: &ReportOptions) -> Result<ReportBundle> {
    let published_rows = opts
        .published_timeline
        .clone()
        .unwrap_or_else(published::published_timeline);
    let harness = run_harness(incidents, &opts.forecast)?;
    let mut tables = BTreeMap::new();
    let mut diffs: BTreeMap<String, Vec<Diff>> = TABLE_NAMES
        .iter()
        .map(|n| (n.to_string(), Vec::new()))
        .collect();
    fn slot<'a>(d: &'a mut BTreeMap<String, Vec<Diff>>, name: &str) -> &'a mut Vec<Diff> {
        d.get_mut(name).expect("key seeded")
    }

    tables.insert(
        "table1".into(),
        table1(incidents, slot(&mut diffs, "table1")),
    );
    let events = target(&harness, Target::Events)?;
    let casualties = target(&harness, Target::Casualties)?;
    tables.insert(
        "table2".into(),
        forecast_table(
            "Predicted incidents 2025-2030",
            events,
            &published::TABLE_II,
            slot(&mut diffs, "table2"),
        ),
    );
    tables.insert(
        "table3".into(),
        forecast_table(
            "Predicted casualties 2025-2030",
            casualties,
            &published::TABLE_III,
            slot(&mut diffs, "table3"),
        ),
    );
    tables.insert(
        "table4".into(),
        table4(incidents, &published_rows, slot(&mut diffs, "table4"))?,
    );
    tables.insert(
        "table6".into(),
        table6(incidents, &published_rows, slot(&mut diffs, "table6"))?,
    );
    tables.insert(
        "fig5_histogram".into(),
        fig5(incidents, slot(&mut diffs, "fig5_histogram")),
    );
    tables.insert(
        "fig1_state_counts".into(),
        fig1(
            incidents,
            opts.state_shootings.as_ref(),
            slot(&mut diffs, "fig1_state_counts"),
        )?,
    );
    tables.insert(
        "fig6_series".into(),
        series_table("Observed and forecast incidents", events),
    );
    tables.insert(
        "fig7_series".into(),
        series_table("Observed and forecast casualties", casualties),
    );

    Ok(ReportBundle {
        stamp: opts.stamp.clone(),
        tables,
        diffs,
    })
}

impl ReportBundle {
    fn ordered(&self) -> impl Iterator<Item = (&'static str, &Table)> {
        TABLE_NAMES
            .iter()
            .filter_map(|&n| self.tables.get(n).map(|t| (n, t)))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Report\n\n");
        if let Some(s) = &self.stamp {
            let _ = writeln!(out, "Generated: {s}\n");
        }
        for (name, t) in self.ordered() {
            let _ = writeln!(out, "## {name}: {}\n", t.title);
            out.push_str(&t.to_markdown());
            out.push('\n');
        }
        out.push_str("## Diffs against published values\n\n");
        for (name, _) in self.ordered() {
            let list = &self.diffs[name];
            let _ = writeln!(out, "### {name} ({} differences)\n", list.len());
            if list.is_empty() {
                continue;
            }
            out.push_str("| Cell | Computed | Published |\n|---|---|---|\n");
            for d in list {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} |",
                    d.cell,
                    d.computed.render(),
                    d.published.render()
                );
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn diffs_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["table", "cell", "computed", "published"])?;
        for (name, _) in self.ordered() {
            for d in &self.diffs[name] {
                w.write_record([
                    name,
                    d.cell.as_str(),
                    &d.computed.render(),
                    &d.published.render(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }

    /// File name → CSV content, one file per table plus `diffs.csv`.
    pub fn to_csv_files(&self) -> Result<Vec<(String, String)>> {
        let mut files = Vec::new();
        for (name, t) in self.ordered() {
            files.push((format!("{name}.csv"), t.to_csv()?));
        }
        files.push(("diffs.csv".into(), self.diffs_csv()?));
        Ok(files)
    }

    /// All CSV files concatenated, each preceded by a `# name` line.
    pub fn to_csv_stream(&self) -> Result<String> {
        let mut out = String::new();
        if let Some(s) = &self.stamp {
            let _ = writeln!(out, "# generated {s}");
        }
        for (name, body) in self.to_csv_files()? {
            let _ = writeln!(out, "# {name}");
            out.push_str(&body);
        }
        Ok(out)
    }
}
