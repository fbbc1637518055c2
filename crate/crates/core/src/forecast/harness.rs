use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{
    default_gamma, fit_ols, fit_svr, fit_zip, metrics, predict, CovidYears, FittedModel, Kernel,
    Metrics, RegressionDataset, SvrOptions, Variant, ZipOptions,
};
use crate::corpus::{yearly_series, Incident, SeriesLabel};
use crate::error::{Error, Result};

pub const FORECAST_YEARS: [i32; 6] = [2025, 2026, 2027, 2028, 2029, 2030];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Events,
    Casualties,
}

impl Target {
    pub const ALL: [Target; 2] = [Target::Events, Target::Casualties];

    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Events => "events",
            Target::Casualties => "casualties",
        }
    }

    pub fn series_label(&self) -> SeriesLabel {
        match self {
            Target::Events => SeriesLabel::Events,
            Target::Casualties => SeriesLabel::Casualty,
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "events" => Ok(Target::Events),
            "casualties" | "casualty" => Ok(Target::Casualties),
            other => Err(format!("unknown target `{other}`")),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Zip,
    Ols,
    SvrLinear,
    SvrRbf,
}

impl ModelKind {
    /// Table order.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Zip,
        ModelKind::Ols,
        ModelKind::SvrLinear,
        ModelKind::SvrRbf,
    ];

    pub fn number(&self) -> u8 {
        match self {
            ModelKind::Zip => 1,
            ModelKind::Ols => 2,
            ModelKind::SvrLinear => 3,
            ModelKind::SvrRbf => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Zip => "Zero-Inflated Poisson",
            ModelKind::Ols => "Linear Regression",
            ModelKind::SvrLinear => "SVR Linear",
            ModelKind::SvrRbf => "SVR RBF",
        }
    }

    pub fn id(&self, variant: Variant) -> String {
        format!("{}{}", self.number(), variant.suffix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnessConfig {
    pub covid: CovidYears,
    /// Percent of each series held out, taken from the end. Zero fits and
    /// scores on every point.
    pub test_percent: u32,
    pub zip: ZipOptions,
    pub svr: SvrOptions,
    /// RBF width; `None` means 1 / var(training x).
    pub gamma: Option<f64>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            covid: CovidYears::default(),
            test_percent: 20,
            zip: ZipOptions::default(),
            svr: SvrOptions::default(),
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRow {
    pub model_id: String,
    pub model_name: &'static str,
    pub model: ModelKind,
    pub target: Target,
    pub variant: Variant,
    pub training_data: String,
    /// Raw predictions for `FORECAST_YEARS`.
    pub predictions: [f64; 6],
    pub predictions_clamped: [f64; 6],
    pub mse: f64,
    pub mae: f64,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    /// Scored points: the hold-out tail, or every point when nothing is held out.
    pub evaluated_years: Vec<i32>,
    pub in_sample: Metrics,
    pub fitted: FittedModel,
}

/// One year of the observed-vs-predicted figure data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub year: i32,
    pub observed: Option<f64>,
    /// Raw model output per row, in row order.
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetForecast {
    pub target: Target,
    pub rows: Vec<ForecastRow>,
    /// Mean of the rows' raw predictions per forecast year.
    pub average: [f64; 6],
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessOutput {
    pub config: HarnessConfig,
    pub targets: Vec<TargetForecast>,
}

impl HarnessOutput {
    pub fn rows(&self) -> impl Iterator<Item = &ForecastRow> {
        self.targets.iter().flat_map(|t| t.rows.iter())
    }

    pub fn target(&self, target: Target) -> Option<&TargetForecast> {
        self.targets.iter().find(|t| t.target == target)
    }

    pub fn row(&self, target: Target, model_id: &str) -> Option<&ForecastRow> {
        self.target(target)?
            .rows
            .iter()
            .find(|r| r.model_id == model_id)
    }
}

fn fit(kind: ModelKind, train: &RegressionDataset, cfg: &HarnessConfig) -> Result<FittedModel> {
    Ok(match kind {
        ModelKind::Zip => FittedModel::Zip(fit_zip(train, &cfg.zip)?),
        ModelKind::Ols => FittedModel::Ols(fit_ols(train)?),
        ModelKind::SvrLinear => FittedModel::Svr(fit_svr(train, Kernel::Linear, &cfg.svr)?),
        ModelKind::SvrRbf => {
            let gamma = match cfg.gamma {
                Some(g) => g,
                None => default_gamma(&train.xs)?,
            };
            FittedModel::Svr(fit_svr(train, Kernel::Rbf { gamma }, &cfg.svr)?)
        }
    })
}

fn run_one(
    kind: ModelKind,
    target: Target,
    data: &RegressionDataset,
    cfg: &HarnessConfig,
) -> Result<ForecastRow> {
    let (train, test) = if cfg.test_percent == 0 {
        (data.clone(), data.clone())
    } else {
        data.holdout_split(cfg.test_percent)?
    };
    let model = fit(kind, &train, cfg)?;
    let on = |d: &RegressionDataset| -> Result<Metrics> {
        let pred: Vec<f64> = d.xs.iter().map(|&x| model.predict_x(x)).collect();
        metrics(&d.ys, &pred)
    };
    let scored = on(&test)?;
    let in_sample = on(&train)?;
    let forecast = predict(&model, &FORECAST_YEARS)?;
    let mut predictions = [0.0; 6];
    let mut predictions_clamped = [0.0; 6];
    for (k, p) in forecast.iter().enumerate() {
        predictions[k] = p.raw;
        predictions_clamped[k] = p.clamped;
    }
    Ok(ForecastRow {
        model_id: kind.id(data.variant),
        model_name: kind.name(),
        model: kind,
        target,
        variant: data.variant,
        training_data: data.training_label(),
        predictions,
        predictions_clamped,
        mse: scored.mse,
        mae: scored.mae,
        mape: scored.mape,
        mape_excluded: scored.mape_excluded,
        evaluated_years: test.years.clone(),
        in_sample,
        fitted: model,
    })
}

type Job = (ModelKind, Target, Variant);

fn jobs(targets: &[Target]) -> Vec<Job> {
    let mut out = Vec::new();
    for &t in targets {
        for kind in ModelKind::ALL {
            for v in Variant::ALL {
                out.push((kind, t, v));
            }
        }
    }
    out
}

fn execute(
    jobs: &[Job],
    data: &[(Target, Variant, RegressionDataset)],
    cfg: &HarnessConfig,
) -> Vec<Result<ForecastRow>> {
    let find = |t: Target, v: Variant| {
        &data
            .iter()
            .find(|(dt, dv, _)| *dt == t && *dv == v)
            .expect("dataset built for every job")
            .2
    };
    let work = |&(kind, t, v): &Job| run_one(kind, t, find(t, v), cfg);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(work).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(work).collect()
    }
}

/// Fits the four models on both variants for each requested target.
/// Rows follow table order (1a, 1b, 2a, …, 4b); fits may run in parallel
/// but each is deterministic, so output does not depend on scheduling.
pub fn run_target_set(
    incidents: &[Incident],
    targets: &[Target],
    cfg: &HarnessConfig,
) -> Result<HarnessOutput> {
    let mut data = Vec::new();
    let mut observed = Vec::new();
    for &t in targets {
        let series = yearly_series(incidents, t.series_label());
        for v in Variant::ALL {
            data.push((t, v, RegressionDataset::from_series(&series, v, cfg.covid)?));
        }
        observed.push(series);
    }
    let jobs = jobs(targets);
    let mut results = execute(&jobs, &data, cfg).into_iter();
    let mut out = Vec::new();
    for (&target, series) in targets.iter().zip(&observed) {
        let rows = results.by_ref().take(8).collect::<Result<Vec<_>>>()?;
        let mut average = [0.0; 6];
        for (k, avg) in average.iter_mut().enumerate() {
            *avg = rows.iter().map(|r| r.predictions[k]).sum::<f64>() / rows.len() as f64;
        }
        let last = *FORECAST_YEARS.last().expect("non-empty");
        let series_points = (series.start_year..=last)
            .map(|year| SeriesPoint {
                year,
                observed: series.get(year),
                predicted: rows
                    .iter()
                    .map(|r| r.fitted.predict_x(super::year_to_x(year)))
                    .collect(),
            })
            .collect();
        out.push(TargetForecast {
            target,
            rows,
            average,
            series: series_points,
        });
    }
    Ok(HarnessOutput {
        config: *cfg,
        targets: out,
    })
}

/// Both targets, 16 rows.
pub fn run_harness(incidents: &[Incident], cfg: &HarnessConfig) -> Result<HarnessOutput> {
    run_target_set(incidents, &Target::ALL, cfg)
}

pub fn run_target(
    incidents: &[Incident],
    target: Target,
    cfg: &HarnessConfig,
) -> Result<TargetForecast> {
    run_target_set(incidents, &[target], cfg)?
        .targets
        .pop()
        .ok_or_else(|| Error::invalid("no target produced"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_incidents;
    use crate::published::{TABLE_II, TABLE_III};

    fn harness() -> HarnessOutput {
        run_harness(&bundled_incidents(), &HarnessConfig::default()).unwrap()
    }

    #[test]
    fn structure() {
        let h = harness();
        assert_eq!(h.rows().count(), 16);
        let ids: Vec<&str> = h
            .target(Target::Events)
            .unwrap()
            .rows
            .iter()
            .map(|r| r.model_id.as_str())
            .collect();
        assert_eq!(ids, ["1a", "1b", "2a", "2b", "3a", "3b", "4a", "4b"]);
        let r = h.row(Target::Events, "2a").unwrap();
        assert_eq!(r.model_name, "Linear Regression");
        assert_eq!(r.variant, Variant::WithCovid);
        assert_eq!(r.training_data, "1999-2024");
        assert_eq!(
            h.row(Target::Events, "2b").unwrap().training_data,
            "1999-2019 and 2024"
        );
        for r in h.rows() {
            assert!(r.mse >= 0.0 && r.mae >= 0.0);
        }
        let s = &h.target(Target::Events).unwrap().series;
        assert_eq!(s.first().unwrap().year, 1999);
        assert_eq!(s.last().unwrap().year, 2030);
        assert_eq!(s.last().unwrap().observed, None);
    }

    #[test]
    fn event_rows_against_table() {
        let h = harness();
        let mut report = Vec::new();
        for published in TABLE_II {
            let r = h.row(Target::Events, published.model_id).unwrap();
            let worst = r
                .predictions
                .iter()
                .zip(published.predictions)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            report.push((published.model_id, worst));
        }
        for (id, worst) in &report {
            assert!(*worst < 0.02, "{id}: {worst} ({report:?})");
        }
    }

    #[test]
    fn casualty_ols_rows_against_table() {
        let h = harness();
        for id in ["2a", "2b"] {
            let published = TABLE_III.iter().find(|p| p.model_id == id).unwrap();
            let r = h.row(Target::Casualties, id).unwrap();
            for (a, b) in r.predictions.iter().zip(published.predictions) {
                assert!((a - b).abs() < 0.02, "{id}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sequential_equals_parallel() {
        let incs = bundled_incidents();
        let cfg = HarnessConfig::default();
        let once = run_harness(&incs, &cfg).unwrap();
        let per_target: Vec<TargetForecast> = Target::ALL
            .iter()
            .map(|&t| run_target(&incs, t, &cfg).unwrap())
            .collect();
        assert_eq!(once.targets, per_target);
    }

    #[test]
    fn in_sample_mode_uses_all_points() {
        let cfg = HarnessConfig {
            test_percent: 0,
            ..HarnessConfig::default()
        };
        let h = run_harness(&bundled_incidents(), &cfg).unwrap();
        let r = h.row(Target::Events, "2a").unwrap();
        assert_eq!(r.evaluated_years.len(), 26);
        assert_eq!(r.mse, r.in_sample.mse);
    }
}
