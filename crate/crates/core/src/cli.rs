//! Command-line front end. Exit codes: 0 success, 1 validation or runtime
//! failure, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{
    bundled_incidents, location_histogram, parse_incidents, parse_state_counts, state_counts,
    validate, Incident, StateCounts, ValidationReport,
};
use crate::error::{Error, Result};
use crate::forecast::{
    run_target_set, CovidYears, HarnessConfig, InflationLink, SvrOptions, Target, Variant,
    ZipOptions, FORECAST_YEARS,
};
use crate::gametheory::{
    calibrate, casualty_rate, defender_best_response, defender_sweep_csv, parse_scenario_file,
    policy_grid, schedule_grid, shooter_best_response, shooter_sweep_csv, simulate, ScenarioFile,
};
use crate::published;
use crate::report::{build_report, Cell, ReportOptions, Table};
use crate::stats::{correlation_table, per_school_probability, state_correlation, OneInN};
use crate::timeline::{
    compare_with_published, derived_breakdowns, derived_factor_observations, phase_averages,
    published_factor_observations, published_phase_averages,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Parser)]
#[command(
    name = "schoolsafety",
    version,
    about = "Mass school shooting incident analyses"
)]
pub struct Cli {
    /// Incident corpus CSV; defaults to the bundled corpus.
    #[arg(long, global = true, env = "INCIDENT_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "md")]
    pub format: Format,
    /// Write output files into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add a generation timestamp to the output.
    #[arg(long, global = true)]
    pub stamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check corpus invariants, timestamp order and yearly totals.
    Validate,
    /// Probability arithmetic, factor correlations and state counts.
    Stats(StatsArgs),
    /// Four-phase attack timelines.
    Timeline,
    /// 2025–2030 forecasts from the four models.
    Forecast(ForecastArgs),
    /// Shooter/defender game simulation and best responses.
    Simulate(SimulateArgs),
    /// Every table and figure series with diffs against published values.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// External per-state school shooting counts (state,count CSV).
    #[arg(long)]
    pub state_shootings: Option<PathBuf>,
    /// Years of exposure for the lifetime probability.
    #[arg(long, default_value_t = published::EDUCATION_YEARS)]
    pub exposure_years: u32,
    /// Non-mass school shooting count over the study period.
    #[arg(long, default_value_t = published::SCHOOL_SHOOTINGS)]
    pub school_shootings: u64,
    #[arg(long, default_value_t = published::US_SCHOOLS)]
    pub schools: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Events,
    Casualties,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum VariantArg {
    WithCovid,
    WithoutCovid,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Constant,
    Linear,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Years dropped by the without-COVID variant, e.g. 2020-2023.
    #[arg(long, default_value = "2020-2023")]
    pub covid_years: CovidYears,
    /// Percent of each series held out from the end for scoring; 0 scores in-sample.
    #[arg(long, default_value_t = 20)]
    pub holdout_percent: u32,
    #[arg(long, default_value_t = 1.0)]
    pub svr_c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub svr_epsilon: f64,
    /// RBF width; defaults to 1 / var(training years).
    #[arg(long)]
    pub svr_gamma: Option<f64>,
    /// Inflation link of the zero-inflated Poisson model.
    #[arg(long, value_enum, default_value = "constant")]
    pub zip_inflation: LinkArg,
}

impl ModelArgs {
    fn config(&self) -> HarnessConfig {
        HarnessConfig {
            covid: self.covid_years,
            test_percent: self.holdout_percent,
            zip: ZipOptions {
                inflation: match self.zip_inflation {
                    LinkArg::Constant => InflationLink::Constant,
                    LinkArg::Linear => InflationLink::Linear,
                },
                ..ZipOptions::default()
            },
            svr: SvrOptions {
                c: self.svr_c,
                epsilon: self.svr_epsilon,
                ..SvrOptions::default()
            },
            gamma: self.svr_gamma,
        }
    }
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub target: TargetArg,
    #[arg(long, value_enum, default_value = "all")]
    pub variant: VariantArg,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Shooter,
    Defender,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file of `key = value` lines; defaults apply otherwise.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Fit i_high so the simulated casualty rate matches this value.
    #[arg(long)]
    pub calibrate: Option<f64>,
    /// Emit one CSV row per grid point instead of the summary.
    #[arg(long, value_enum)]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub state_shootings: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// What a subcommand produced: named tables for md/csv and a value for json.
struct Output {
    name: &'static str,
    tables: Vec<(String, Table)>,
    json: serde_json::Value,
    /// Pre-rendered markdown overriding the table rendering.
    markdown: Option<String>,
    /// Pre-rendered CSV overriding the table rendering.
    csv: Option<String>,
}

impl Output {
    fn new(name: &'static str, json: impl Serialize) -> Result<Self> {
        Ok(Output {
            name,
            tables: Vec::new(),
            json: serde_json::to_value(json).map_err(|e| Error::invalid(e.to_string()))?,
            markdown: None,
            csv: None,
        })
    }

    fn table(mut self, name: &str, t: Table) -> Self {
        self.tables.push((name.to_string(), t));
        self
    }
}

fn stamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn emit(out: Output, cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let stamp = cli.stamp.then(stamp_now);
    let mut files: Vec<(String, String)> = Vec::new();
    match cli.format {
        Format::Json => {
            let mut value = out.json;
            if let (Some(s), serde_json::Value::Object(map)) = (&stamp, &mut value) {
                map.insert("stamp".into(), serde_json::Value::String(s.clone()));
            }
            let text = serde_json::to_string_pretty(&value)
                .map_err(|e| Error::invalid(e.to_string()))?
                + "\n";
            files.push((format!("{}.json", out.name), text));
        }
        Format::Md => {
            let mut text = String::new();
            if let Some(s) = &stamp {
                text.push_str(&format!("Generated: {s}\n\n"));
            }
            match out.markdown {
                Some(md) => text.push_str(&md),
                None => {
                    for (name, t) in &out.tables {
                        text.push_str(&format!("## {name}: {}\n\n{}\n", t.title, t.to_markdown()));
                    }
                }
            }
            files.push((format!("{}.md", out.name), text));
        }
        Format::Csv => {
            if let Some(csv) = out.csv {
                files.push((format!("{}.csv", out.name), csv));
            } else if cli.out.is_some() {
                for (name, t) in &out.tables {
                    files.push((format!("{name}.csv"), t.to_csv()?));
                }
            } else {
                let mut text = String::new();
                if let Some(s) = &stamp {
                    text.push_str(&format!("# generated {s}\n"));
                }
                let multi = out.tables.len() > 1;
                for (name, t) in &out.tables {
                    if multi {
                        text.push_str(&format!("# {name}\n"));
                    }
                    text.push_str(&t.to_csv()?);
                }
                files.push((format!("{}.csv", out.name), text));
            }
        }
    }
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (name, body) in files {
                std::fs::write(dir.join(name), body)?;
            }
        }
        None => {
            for (_, body) in files {
                stdout.write_all(body.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn load_corpus(path: Option<&Path>) -> Result<Vec<Incident>> {
    match path {
        None => Ok(bundled_incidents()),
        Some(p) => parse_incidents(&std::fs::read_to_string(p)?),
    }
}

fn read_states(path: Option<&PathBuf>) -> Result<Option<StateCounts>> {
    path.map(|p| parse_state_counts(&std::fs::read_to_string(p)?))
        .transpose()
}

fn findings_table(report: &ValidationReport) -> Table {
    let mut t = Table::new(
        "Validation findings",
        &["Severity", "Incident", "Field", "Message"],
    );
    for (sev, list) in [("error", &report.errors), ("warning", &report.warnings)] {
        for f in list {
            t.push(vec![
                Cell::text(sev),
                f.id.map_or(Cell::Empty, Cell::from),
                Cell::text(&f.field),
                Cell::text(&f.message),
            ]);
        }
    }
    t
}

fn cross_table(report: &ValidationReport) -> Table {
    let mut t = Table::new(
        "Yearly totals differing from the published table",
        &[
            "Year",
            "Events",
            "Events (published)",
            "Casualty",
            "Casualty (published)",
        ],
    );
    for d in &report.cross_table_diffs {
        t.push(vec![
            d.year.into(),
            d.recomputed.events.into(),
            d.published.events.into(),
            d.recomputed.casualty.into(),
            d.published.casualty.into(),
        ]);
    }
    t
}

fn cmd_validate(report: &ValidationReport) -> Result<Output> {
    Ok(Output::new("validate", report)?
        .table("findings", findings_table(report))
        .table("cross_table_diffs", cross_table(report)))
}

fn one_in(o: &OneInN) -> Cell {
    o.rounded()
        .map_or(Cell::text("infinite"), |n| Cell::Int(n as i64))
}

fn cmd_stats(incidents: &[Incident], args: &StatsArgs) -> Result<Output> {
    let mass_events = incidents.len() as u64;
    let school =
        per_school_probability(args.school_shootings, published::STUDY_YEARS, args.schools)?
            .with_exposure(args.exposure_years)?;
    let mass = per_school_probability(mass_events, published::STUDY_YEARS, args.schools)?
        .with_exposure(args.exposure_years)?;
    let mut prob = Table::new(
        "Per-school probabilities",
        &[
            "Case",
            "Events",
            "Annual Rate",
            "Per School Annual",
            "One In",
            "Exposure Years",
            "Lifetime",
            "Lifetime One In",
        ],
    );
    for (name, p) in [
        ("school shootings", &school),
        ("mass school shootings", &mass),
    ] {
        prob.push(vec![
            Cell::text(name),
            Cell::Int(p.events as i64),
            Cell::num(p.annual_rate, 4),
            Cell::Text(format!("{:.3e}", p.per_school_annual)),
            one_in(&p.per_school_one_in),
            p.exposure_years.into(),
            Cell::Text(format!("{:.3e}", p.lifetime)),
            one_in(&p.lifetime_one_in),
        ]);
    }

    let columns = correlation_table(&published_factor_observations(
        &published::published_timeline(),
        incidents,
    ))?;
    let records = correlation_table(&derived_factor_observations(incidents)?)?;
    let mut corr = Table::new(
        "Factor correlations with casualty",
        &["Source", "Factor", "r", "t", "p", "n"],
    );
    for (src, list) in [("published columns", &columns), ("records", &records)] {
        for c in list.iter() {
            corr.push(vec![
                Cell::text(src),
                Cell::text(c.factor.as_str()),
                Cell::num(c.result.r, 4),
                Cell::num(c.result.t_stat, 4),
                Cell::num(c.result.p_two_tailed, 6),
                c.result.n.into(),
            ]);
        }
    }

    let mass_states = state_counts(incidents);
    let external = read_states(args.state_shootings.as_ref())?;
    let state_r = external
        .as_ref()
        .map(|e| state_correlation(&mass_states, e))
        .transpose()?;
    let mut states = Table::new("Mass school shootings by state", &["State", "Count"]);
    for (s, n) in mass_states.dense() {
        states.push(vec![Cell::text(s), n.into()]);
    }
    let mut out = Output::new(
        "stats",
        serde_json::json!({
            "probability": { "school": school, "mass": mass },
            "correlations": { "published_columns": columns, "records": records },
            "state_counts": mass_states,
            "state_correlation": state_r,
            "locations": location_histogram(incidents),
        }),
    )?
    .table("probability", prob)
    .table("correlations", corr);
    if let Some(r) = state_r {
        let mut t = Table::new("State-level correlation", &["r", "t", "p", "n"]);
        t.push(vec![
            Cell::num(r.r, 4),
            Cell::num(r.t_stat, 4),
            Cell::Text(format!("{:.3e}", r.p_two_tailed)),
            r.n.into(),
        ]);
        out = out.table("state_correlation", t);
    }
    Ok(out.table("state_counts", states))
}

fn cmd_timeline(incidents: &[Incident]) -> Result<Output> {
    let (breakdowns, casualties) = derived_breakdowns(incidents)?;
    let published_rows = published::published_timeline();
    let derived_avg = phase_averages(&breakdowns, &casualties)?;
    let published_avg = published_phase_averages(&published_rows)?;
    let diffs = compare_with_published(incidents, &published_rows);

    let mut t = Table::new(
        "Phase durations (minutes)",
        &[
            "ID",
            "Casualty",
            "KIV",
            "VA",
            "POM",
            "Shootout",
            "Crime Time",
            "Anomalies",
        ],
    );
    for (b, c) in breakdowns.iter().zip(&casualties) {
        t.push(vec![
            b.incident_id.into(),
            Cell::num(*c, 0),
            Cell::num(b.kiv_min, 0),
            Cell::num(b.va_min, 0),
            Cell::num(b.pom_min, 0),
            Cell::num(b.shootout_min, 0),
            Cell::num(b.crime_time_min, 0),
            Cell::text(b.anomalies.join("; ")),
        ]);
    }
    let mut a = Table::new(
        "Phase averages",
        &[
            "Source",
            "n",
            "Casualty",
            "KIV",
            "VA",
            "POM",
            "Shootout",
            "Crime Time",
            "Casualties per Minute",
        ],
    );
    for (src, v) in [
        ("records", &derived_avg),
        ("published columns", &published_avg),
    ] {
        a.push(vec![
            Cell::text(src),
            v.n.into(),
            Cell::num(v.mean_casualty, 4),
            Cell::num(v.mean_kiv, 4),
            Cell::num(v.mean_va, 4),
            Cell::num(v.mean_pom, 4),
            Cell::num(v.mean_shootout, 4),
            Cell::num(v.mean_crime_time, 4),
            Cell::num(v.casualties_per_minute, 4),
        ]);
    }
    let mut d = Table::new(
        "Differences from the published timeline",
        &["ID", "Field", "Recomputed", "Published"],
    );
    for x in &diffs {
        d.push(vec![
            x.id.into(),
            Cell::text(x.field),
            Cell::num(x.recomputed, 0),
            Cell::num(x.published, 0),
        ]);
    }
    Ok(Output::new(
        "timeline",
        serde_json::json!({
            "breakdowns": breakdowns,
            "averages": { "records": derived_avg, "published_columns": published_avg },
            "diffs": diffs,
        }),
    )?
    .table("phases", t)
    .table("averages", a)
    .table("diffs", d))
}

fn cmd_forecast(incidents: &[Incident], args: &ForecastArgs) -> Result<Output> {
    let targets: Vec<Target> = match args.target {
        TargetArg::Events => vec![Target::Events],
        TargetArg::Casualties => vec![Target::Casualties],
        TargetArg::All => Target::ALL.to_vec(),
    };
    let keep = |v: Variant| match args.variant {
        VariantArg::WithCovid => v == Variant::WithCovid,
        VariantArg::WithoutCovid => v == Variant::WithoutCovid,
        VariantArg::All => true,
    };
    let h = run_target_set(incidents, &targets, &args.model.config())?;
    let mut cols = vec!["model_id".to_string(), "model_name".to_string()];
    cols.extend(FORECAST_YEARS.iter().map(|y| format!("y{y}")));
    cols.extend(["mse", "mae", "mape", "training_data"].map(String::from));
    if targets.len() > 1 {
        cols.insert(0, "target".into());
    }
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("Forecasts", &refs);
    let rows: Vec<_> = h.rows().filter(|r| keep(r.variant)).collect();
    for r in &rows {
        let mut row = Vec::new();
        if targets.len() > 1 {
            row.push(Cell::text(r.target.as_str()));
        }
        row.extend([Cell::text(&r.model_id), Cell::text(r.model_name)]);
        row.extend(r.predictions.iter().map(|&p| Cell::num(p, 6)));
        row.extend([
            Cell::num(r.mse, 6),
            Cell::num(r.mae, 6),
            Cell::opt(r.mape, 6),
            Cell::text(&r.training_data),
        ]);
        t.push(row);
    }
    let averages: Vec<_> = h
        .targets
        .iter()
        .map(|t| serde_json::json!({ "target": t.target, "average": t.average }))
        .collect();
    Ok(Output::new(
        "forecast",
        serde_json::json!({ "config": h.config, "rows": rows, "averages": averages }),
    )?
    .table("forecast", t))
}

fn outcome_row(label: &str, o: &crate::gametheory::SimOutcome) -> Vec<Cell> {
    vec![
        Cell::text(label),
        Cell::num(o.loss_v, 6),
        Cell::num(o.loss_m, 6),
        Cell::num(o.defender_payoff, 6),
        o.stop_time.map_or(Cell::text("horizon"), Cell::from),
        o.active_minutes.into(),
    ]
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Output> {
    let file = match &args.scenario {
        Some(p) => parse_scenario_file(&std::fs::read_to_string(p)?)?,
        None => ScenarioFile::default(),
    };
    let mut scenario = file.scenario.clone();
    let schedule = file.schedule();
    let policy = file.policy;

    if let Some(sweep) = args.sweep {
        let csv = match sweep {
            Sweep::Shooter => {
                shooter_sweep_csv(&scenario, &policy, &schedule_grid(&scenario, &file.grid)?)?
            }
            Sweep::Defender => {
                defender_sweep_csv(&scenario, &schedule, &policy_grid(&policy, &file.grid))?
            }
        };
        let mut out = Output::new("sweep", serde_json::json!({ "csv": csv }))?;
        out.markdown = Some(format!("```csv\n{csv}```\n"));
        out.csv = Some(csv);
        return Ok(out);
    }

    let calibrated = match args.calibrate {
        Some(rate) => {
            let m = calibrate(&scenario, &schedule, &policy, rate)?;
            scenario.miller = m;
            Some(m)
        }
        None => None,
    };
    let base = simulate(&scenario, &schedule, &policy)?;
    let rate = casualty_rate(&scenario, &schedule, &policy)?;
    let grid = schedule_grid(&scenario, &file.grid)?;
    let shooter = shooter_best_response(&scenario, &policy, &grid)?;
    let defender = defender_best_response(
        &scenario,
        &shooter.schedule,
        &policy_grid(&policy, &file.grid),
    )?;

    let mut t = Table::new(
        "Simulation outcomes",
        &[
            "Run",
            "Loss V",
            "Loss M",
            "Defender Payoff",
            "Stop Minute",
            "Active Minutes",
        ],
    );
    t.push(outcome_row("given schedule", &base));
    t.push(outcome_row("shooter best response", &shooter.outcome));
    t.push(outcome_row("defender best response", &defender.outcome));
    let mut s = Table::new("Choices", &["Item", "Value"]);
    s.push(vec![
        Cell::text("casualties per minute"),
        Cell::num(rate, 6),
    ]);
    if let Some(m) = calibrated {
        s.push(vec![
            Cell::text("calibrated i_high"),
            Cell::num(m.i_high, 9),
        ]);
    }
    s.push(vec![Cell::text("schedule grid size"), grid.len().into()]);
    s.push(vec![
        Cell::text("shooter schedule"),
        Cell::text(
            shooter
                .schedule
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        ),
    ]);
    s.push(vec![
        Cell::text("defender officers"),
        defender.policy.officers.into(),
    ]);
    s.push(vec![
        Cell::text("defender weapon level"),
        Cell::num(defender.policy.weapon_level, 3),
    ]);
    Ok(Output::new(
        "simulate",
        serde_json::json!({
            "scenario": scenario,
            "policy": policy,
            "schedule": schedule,
            "calibrated": calibrated,
            "casualties_per_minute": rate,
            "outcome": base,
            "shooter_best_response": shooter,
            "defender_best_response": defender,
        }),
    )?
    .table("outcomes", t)
    .table("choices", s))
}

fn cmd_report(incidents: &[Incident], args: &ReportArgs, cli: &Cli) -> Result<Output> {
    let opts = ReportOptions {
        forecast: args.model.config(),
        state_shootings: read_states(args.state_shootings.as_ref())?,
        published_timeline: None,
        stamp: None,
    };
    let bundle = build_report(incidents, &opts)?;
    let mut out = Output::new("report", &bundle)?;
    for (name, t) in &bundle.tables {
        out.tables.push((name.clone(), t.clone()));
    }
    out.markdown = Some(
        bundle
            .to_markdown()
            .trim_start_matches("# Report\n\n")
            .to_string(),
    );
    if cli.format == Format::Csv {
        out.csv = Some(bundle.to_csv_stream()?);
    }
    Ok(out)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    if let Command::Simulate(args) = &cli.command {
        emit(cmd_simulate(args)?, cli, stdout)?;
        return Ok(EXIT_OK);
    }
    let incidents = load_corpus(cli.corpus.as_deref())?;
    let report = validate(&incidents);
    if let Command::Validate = cli.command {
        emit(cmd_validate(&report)?, cli, stdout)?;
        return Ok(if report.is_ok() {
            EXIT_OK
        } else {
            EXIT_FAILURE
        });
    }
    if !report.is_ok() {
        for e in &report.errors {
            let _ = writeln!(
                stderr,
                "error: incident {:?} {}: {}",
                e.id, e.field, e.message
            );
        }
        return Err(Error::Validation(report.errors.len()));
    }
    let out = match &cli.command {
        Command::Stats(a) => cmd_stats(&incidents, a)?,
        Command::Timeline => cmd_timeline(&incidents)?,
        Command::Forecast(a) => cmd_forecast(&incidents, a)?,
        Command::Report(a) => {
            if cli.format == Format::Csv {
                if let Some(dir) = &cli.out {
                    let opts = ReportOptions {
                        forecast: a.model.config(),
                        state_shootings: read_states(a.state_shootings.as_ref())?,
                        published_timeline: None,
                        stamp: cli.stamp.then(stamp_now),
                    };
                    let bundle = build_report(&incidents, &opts)?;
                    std::fs::create_dir_all(dir)?;
                    for (name, body) in bundle.to_csv_files()? {
                        std::fs::write(dir.join(name), body)?;
                    }
                    return Ok(EXIT_OK);
                }
            }
            cmd_report(&incidents, a, cli)?
        }
        Command::Validate | Command::Simulate(_) => unreachable!("handled above"),
    };
    emit(out, cli, stdout)?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// results to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}
