//! Yearly count forecasting: OLS, zero-inflated Poisson and epsilon-SVR
//! models over a centered year covariate, with a chronological hold-out
//! harness producing the 2025–2030 tables.

mod harness;
mod ols;
mod svr;
mod zip;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::YearlySeries;
use crate::error::{Error, Result};

pub use harness::{
    run_harness, run_target, run_target_set, ForecastRow, HarnessConfig, HarnessOutput, ModelKind,
    SeriesPoint, Target, TargetForecast, FORECAST_YEARS,
};
pub use ols::{fit_ols, OlsModel};
pub use svr::{default_gamma, fit_svr, Kernel, SvrModel, SvrOptions};
pub use zip::{fit_zip, Inflation, InflationLink, ZipModel, ZipOptions};

/// Covariate origin: x = year − YEAR_CENTER.
pub const YEAR_CENTER: f64 = 2011.5;
/// Extra divisor applied to x inside the exponential links of the ZIP model.
pub const ZIP_X_SCALE: f64 = 10.0;
/// Years accepted by `predict`.
pub const PREDICT_RANGE: (i32, i32) = (1999, 2050);

pub fn year_to_x(year: i32) -> f64 {
    f64::from(year) - YEAR_CENTER
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    WithCovid,
    WithoutCovid,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::WithCovid, Variant::WithoutCovid];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::WithCovid => "with_covid",
            Variant::WithoutCovid => "without_covid",
        }
    }

    /// Row-id suffix in the published tables.
    pub fn suffix(&self) -> char {
        match self {
            Variant::WithCovid => 'a',
            Variant::WithoutCovid => 'b',
        }
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "with_covid" | "a" => Ok(Variant::WithCovid),
            "without_covid" | "b" => Ok(Variant::WithoutCovid),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive year range dropped by the without-COVID variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovidYears {
    pub first: i32,
    pub last: i32,
}

impl Default for CovidYears {
    fn default() -> Self {
        CovidYears {
            first: 2020,
            last: 2023,
        }
    }
}

impl CovidYears {
    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }
}

impl FromStr for CovidYears {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('-').unwrap_or((s, s));
        let first: i32 = a.trim().parse().map_err(|_| format!("bad year `{a}`"))?;
        let last: i32 = b.trim().parse().map_err(|_| format!("bad year `{b}`"))?;
        if first > last {
            return Err(format!("empty range `{s}`"));
        }
        Ok(CovidYears { first, last })
    }
}

impl fmt::Display for CovidYears {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.last)
    }
}

/// Training points for one target. `xs` are centered years, strictly
/// increasing; `ys` are non-negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionDataset {
    pub years: Vec<i32>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub variant: Variant,
}

impl RegressionDataset {
    pub fn new(years: Vec<i32>, ys: Vec<f64>, variant: Variant) -> Result<Self> {
        if years.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: years.len(),
                right: ys.len(),
            });
        }
        if years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("years must be strictly increasing"));
        }
        if ys.iter().any(|y| !y.is_finite() || *y < 0.0) {
            return Err(Error::invalid("targets must be finite and non-negative"));
        }
        let xs = years.iter().map(|&y| year_to_x(y)).collect();
        Ok(Self {
            years,
            xs,
            ys,
            variant,
        })
    }

    /// Builds a variant from a gap-free yearly series.
    pub fn from_series(series: &YearlySeries, variant: Variant, covid: CovidYears) -> Result<Self> {
        let (years, ys) = series
            .years()
            .zip(series.values.iter().copied())
            .filter(|(y, _)| variant == Variant::WithCovid || !covid.contains(*y))
            .unzip();
        Self::new(years, ys, variant)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Human-readable year coverage, e.g. "1999-2019 and 2024".
    pub fn training_label(&self) -> String {
        let mut runs: Vec<(i32, i32)> = Vec::new();
        for &y in &self.years {
            match runs.last_mut() {
                Some((_, end)) if *end + 1 == y => *end = y,
                _ => runs.push((y, y)),
            }
        }
        runs.iter()
            .map(|&(a, b)| {
                if a == b {
                    a.to_string()
                } else {
                    format!("{a}-{b}")
                }
            })
            .collect::<Vec<_>>()
            .join(" and ")
    }

    fn subset(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            years: self.years[range.clone()].to_vec(),
            xs: self.xs[range.clone()].to_vec(),
            ys: self.ys[range].to_vec(),
            variant: self.variant,
        }
    }

    /// Chronological split: the last ceil(percent/100 · n) points form the
    /// test tail, the rest the training head.
    pub fn holdout_split(&self, test_percent: u32) -> Result<(Self, Self)> {
        let n = self.len();
        let test = (n * test_percent as usize).div_ceil(100);
        if test == 0 || test >= n {
            return Err(Error::invalid(format!(
                "hold-out of {test_percent}% leaves no train or test points"
            )));
        }
        Ok((self.subset(0..n - test), self.subset(n - test..n)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Ols(OlsModel),
    Zip(ZipModel),
    Svr(SvrModel),
}

impl FittedModel {
    /// Mean prediction at centered covariate `x`.
    pub fn predict_x(&self, x: f64) -> f64 {
        match self {
            FittedModel::Ols(m) => m.predict_x(x),
            FittedModel::Zip(m) => m.predict_x(x),
            FittedModel::Svr(m) => m.predict_x(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub year: i32,
    pub raw: f64,
    /// `raw` floored at zero.
    pub clamped: f64,
}

pub fn predict(model: &FittedModel, years: &[i32]) -> Result<Vec<Prediction>> {
    years
        .iter()
        .map(|&year| {
            if !(PREDICT_RANGE.0..=PREDICT_RANGE.1).contains(&year) {
                return Err(Error::invalid(format!(
                    "year {year} outside prediction range"
                )));
            }
            let raw = model.predict_x(year_to_x(year));
            Ok(Prediction {
                year,
                raw,
                clamped: raw.max(0.0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mse: f64,
    pub mae: f64,
    /// Mean |a−p|/|a| over non-zero actuals; absent when every actual is zero.
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    pub n: usize,
}

pub fn metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::invalid("metrics need at least one point"));
    }
    let n = actual.len() as f64;
    let mut se = 0.0;
    let mut ae = 0.0;
    let mut pe = 0.0;
    let mut kept = 0usize;
    for (&a, &p) in actual.iter().zip(predicted) {
        se += (a - p) * (a - p);
        ae += (a - p).abs();
        if a != 0.0 {
            pe += (a - p).abs() / a.abs();
            kept += 1;
        }
    }
    Ok(Metrics {
        mse: se / n,
        mae: ae / n,
        mape: (kept > 0).then(|| pe / kept as f64),
        mape_excluded: actual.len() - kept,
        n: actual.len(),
    })
}

/// Solves the symmetric 2×2 system [[a, b], [b, d]]·v = r.
pub(crate) fn solve2(a: f64, b: f64, d: f64, r: [f64; 2]) -> Option<[f64; 2]> {
    let det = a * d - b * b;
    if !det.is_finite() || det.abs() <= f64::EPSILON * (a * d).abs().max(f64::MIN_POSITIVE) {
        return None;
    }
    Some([(d * r[0] - b * r[1]) / det, (a * r[1] - b * r[0]) / det])
}
