use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// "One in N" form of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OneInN {
    Finite { exact: f64, rounded: u64 },
    Infinite,
}

impl OneInN {
    pub fn of(p: f64) -> Self {
        if p <= 0.0 {
            OneInN::Infinite
        } else {
            let exact = 1.0 / p;
            OneInN::Finite {
                exact,
                rounded: exact.round() as u64,
            }
        }
    }

    pub fn rounded(&self) -> Option<u64> {
        match self {
            OneInN::Finite { rounded, .. } => Some(*rounded),
            OneInN::Infinite => None,
        }
    }
}

impl fmt::Display for OneInN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OneInN::Finite { exact, rounded } => write!(f, "one in {rounded} ({exact:.1})"),
            OneInN::Infinite => f.write_str("one in ∞"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityResult {
    pub events: u64,
    pub years: u32,
    pub schools: u64,
    /// Events per year, nationally.
    pub annual_rate: f64,
    /// Chance that a given school sees an event in a given year.
    pub per_school_annual: f64,
    pub per_school_one_in: OneInN,
    pub exposure_years: u32,
    /// Chance of at least one event over `exposure_years` at one school.
    pub lifetime: f64,
    pub lifetime_one_in: OneInN,
}

impl ProbabilityResult {
    pub fn with_exposure(mut self, exposure_years: u32) -> Result<Self> {
        self.lifetime = lifetime_exposure(self.per_school_annual, exposure_years)?;
        self.lifetime_one_in = OneInN::of(self.lifetime);
        self.exposure_years = exposure_years;
        Ok(self)
    }
}

/// Uniform per-school annual rate: events / (years · schools).
///
/// The returned value has a one-year exposure; use
/// [`ProbabilityResult::with_exposure`] for longer spans.
pub fn per_school_probability(events: u64, years: u32, schools: u64) -> Result<ProbabilityResult> {
    if years == 0 || schools == 0 {
        return Err(Error::invalid("years and schools must be positive"));
    }
    let annual_rate = events as f64 / f64::from(years);
    let per_school_annual = annual_rate / schools as f64;
    if per_school_annual > 1.0 {
        return Err(Error::invalid(format!(
            "{events} events over {years} years exceed one per school-year"
        )));
    }
    Ok(ProbabilityResult {
        events,
        years,
        schools,
        annual_rate,
        per_school_annual,
        per_school_one_in: OneInN::of(per_school_annual),
        exposure_years: 1,
        lifetime: per_school_annual,
        lifetime_one_in: OneInN::of(per_school_annual),
    })
}

/// 1 - (1 - p)^k, evaluated as -expm1(k·ln(1-p)) to keep precision at small p.
pub fn lifetime_exposure(per_school_annual: f64, exposure_years: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&per_school_annual) {
        return Err(Error::invalid(format!(
            "probability {per_school_annual} outside [0, 1]"
        )));
    }
    if exposure_years == 0 {
        return Err(Error::invalid("exposure_years must be at least 1"));
    }
    if per_school_annual == 1.0 {
        return Ok(1.0);
    }
    let v = -(f64::from(exposure_years) * (-per_school_annual).ln_1p()).exp_m1();
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn school_shootings_rate() {
        let r = per_school_probability(510, 26, 134_960).unwrap();
        assert_relative_eq!(r.annual_rate, 19.615_384_6, max_relative = 1e-8);
        assert_relative_eq!(r.per_school_annual, 1.4534e-4, max_relative = 1e-4);
        // 26 · 134960 / 510 = 6880.31
        assert_eq!(r.per_school_one_in.rounded(), Some(6880));
    }

    #[test]
    fn mass_school_shootings_rate() {
        let r = per_school_probability(43, 26, 134_960).unwrap();
        assert_relative_eq!(r.per_school_annual, 1.2254e-5, max_relative = 1e-4);
        assert_eq!(r.per_school_one_in.rounded(), Some(81_604));
    }

    #[test]
    fn zero_events_is_one_in_infinity() {
        let r = per_school_probability(0, 26, 134_960).unwrap();
        assert_eq!(r.per_school_annual, 0.0);
        assert_eq!(r.per_school_one_in, OneInN::Infinite);
        assert_eq!(r.per_school_one_in.to_string(), "one in ∞");
    }

    #[test]
    fn bad_denominators() {
        assert!(per_school_probability(1, 0, 10).is_err());
        assert!(per_school_probability(1, 10, 0).is_err());
        assert!(lifetime_exposure(0.1, 0).is_err());
        assert!(lifetime_exposure(1.1, 3).is_err());
    }

    #[test]
    fn seventeen_year_exposure() {
        assert_eq!(lifetime_exposure(0.0, 17).unwrap(), 0.0);
        let mass = lifetime_exposure(43.0 / (26.0 * 134_960.0), 17).unwrap();
        assert_relative_eq!(mass, 2.0830e-4, max_relative = 1e-4);
        let school = lifetime_exposure(510.0 / (26.0 * 134_960.0), 17).unwrap();
        assert_relative_eq!(school, 2.4679e-3, max_relative = 1e-4);
        let r = per_school_probability(43, 26, 134_960)
            .unwrap()
            .with_exposure(17)
            .unwrap();
        assert_eq!(r.lifetime_one_in.rounded(), Some(4801));
    }

    proptest! {
        #[test]
        fn union_bound(p in 0.0f64..=1.0, k in 1u32..200) {
            let v = lifetime_exposure(p, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= f64::from(k) * p + 1e-15);
            if k >= 2 && p > 1e-6 {
                prop_assert!(v < f64::from(k) * p);
            }
        }
    }
}
