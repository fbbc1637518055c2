use std::fmt;

use serde::Serialize;

use super::special::regularized_incomplete_beta;
use crate::corpus::StateCounts;
use crate::error::{Error, Result};

/// Sample Pearson correlation coefficient.
///
/// Fails on unequal lengths, fewer than three points, non-finite input or a
/// constant vector; never returns NaN.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "pearson needs at least 3 points, got {n}"
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("pearson input contains non-finite values"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "correlation undefined for a constant vector".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-tailed p-value of H0: ρ = 0 given sample r over n points.
///
/// With t = r·sqrt((n-2)/(1-r²)) and ν = n - 2, ν/(ν + t²) reduces to 1 - r²,
/// so p = I_{1-r²}(ν/2, 1/2).
pub fn p_value_two_tailed(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("p-value needs n >= 3, got {n}")));
    }
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(Error::invalid(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let df = (n - 2) as f64;
    let p = regularized_incomplete_beta(1.0 - r * r, 0.5 * df, 0.5);
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub t_stat: f64,
    pub p_two_tailed: f64,
}

impl CorrelationResult {
    pub fn from_r(r: f64, n: usize) -> Result<Self> {
        let p_two_tailed = p_value_two_tailed(r, n)?;
        let t_stat = if r.abs() < 1.0 {
            r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt()
        } else {
            r.signum() * f64::INFINITY
        };
        Ok(Self {
            r,
            n,
            t_stat,
            p_two_tailed,
        })
    }

    pub fn compute(x: &[f64], y: &[f64]) -> Result<Self> {
        Self::from_r(pearson(x, y)?, x.len())
    }

    pub fn significant_at(&self, alpha: f64) -> bool {
        self.p_two_tailed < alpha
    }
}

/// Candidate explanatory factors for casualties in the timeline subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Bullets,
    Kiv,
    Va,
    Pom,
    Shootout,
    DistPolice,
    DistHospital,
    CrimeTime,
}

impl Factor {
    pub const ALL: [Factor; 8] = [
        Factor::Bullets,
        Factor::Kiv,
        Factor::Va,
        Factor::Pom,
        Factor::Shootout,
        Factor::DistPolice,
        Factor::DistHospital,
        Factor::CrimeTime,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Factor::Bullets => "bullets",
            Factor::Kiv => "kiv",
            Factor::Va => "va",
            Factor::Pom => "pom",
            Factor::Shootout => "shootout",
            Factor::DistPolice => "dist_police",
            Factor::DistHospital => "dist_hospital",
            Factor::CrimeTime => "crime_time",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Casualty count and factor values for one incident; `None` where unknown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorObservation {
    pub id: u32,
    pub casualty: f64,
    pub factors: [Option<f64>; 8],
}

impl FactorObservation {
    pub fn get(&self, factor: Factor) -> Option<f64> {
        self.factors[factor.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorCorrelation {
    pub factor: Factor,
    #[serde(flatten)]
    pub result: CorrelationResult,
}

/// Correlates every factor with casualty. Observations missing a factor are
/// dropped for that factor only, so each result carries its own n.
pub fn correlation_table(observations: &[FactorObservation]) -> Result<Vec<FactorCorrelation>> {
    Factor::ALL
        .iter()
        .map(|&factor| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = observations
                .iter()
                .filter_map(|o| o.get(factor).map(|v| (v, o.casualty)))
                .unzip();
            let result = CorrelationResult::compute(&xs, &ys)
                .map_err(|e| Error::invalid(format!("factor {factor}: {e}")))?;
            Ok(FactorCorrelation { factor, result })
        })
        .collect()
}

/// Correlates per-state mass-shooting counts with an external per-state
/// count table. The external table defines which states (and so n) enter.
pub fn state_correlation(mass: &StateCounts, external: &StateCounts) -> Result<CorrelationResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = external
        .0
        .iter()
        .map(|(state, &n)| (n as f64, mass.get(state) as f64))
        .unzip();
    CorrelationResult::compute(&xs, &ys)
}
