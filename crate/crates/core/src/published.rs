//! Reference values as printed in the source tables. Used only for
//! cross-checks and diffs; nothing downstream computes from them except
//! where a function explicitly takes a published table as input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Yearly totals 1999–2024: (year, events, injured, killed, casualty).
pub const TABLE_I: [(i32, u32, u32, u32, u32); 26] = [
    (1999, 3, 35, 13, 48),
    (2000, 0, 0, 0, 0),
    (2001, 2, 18, 2, 20),
    (2002, 0, 0, 0, 0),
    (2003, 1, 4, 1, 5),
    (2004, 0, 0, 0, 0),
    (2005, 1, 5, 9, 14),
    (2006, 1, 5, 5, 10),
    (2007, 2, 36, 32, 68),
    (2008, 1, 16, 5, 21),
    (2009, 0, 0, 0, 0),
    (2010, 0, 0, 0, 0),
    (2011, 0, 0, 0, 0),
    (2012, 3, 6, 36, 42),
    (2013, 1, 3, 5, 8),
    (2014, 2, 17, 10, 27),
    (2015, 1, 7, 9, 16),
    (2016, 2, 8, 0, 8),
    (2017, 1, 3, 1, 4),
    (2018, 4, 53, 29, 82),
    (2019, 4, 31, 3, 34),
    (2020, 0, 0, 0, 0),
    (2021, 1, 7, 4, 11),
    (2022, 5, 36, 26, 62),
    (2023, 6, 20, 17, 37),
    (2024, 2, 13, 4, 17),
];

/// Total row of the yearly table: events, injured, killed, casualty.
pub const TABLE_I_TOTALS: (u32, u32, u32, u32) = (43, 323, 211, 534);

/// One published forecast row: id, model, 2025..2030, MSE, MAE, training label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedForecast {
    pub model_id: &'static str,
    pub model_name: &'static str,
    pub predictions: [f64; 6],
    pub mse: f64,
    pub mae: f64,
    pub training_data: &'static str,
}

const fn row(
    model_id: &'static str,
    model_name: &'static str,
    predictions: [f64; 6],
    mse: f64,
    mae: f64,
    training_data: &'static str,
) -> PublishedForecast {
    PublishedForecast {
        model_id,
        model_name,
        predictions,
        mse,
        mae,
        training_data,
    }
}

const ALL_YEARS: &str = "1999-2024";
const TABLE_LABEL_NO_COVID: &str = "1999-2021 and 2024";

/// Predicted incidents per year.
pub const TABLE_II: [PublishedForecast; 8] = [
    row(
        "1a",
        "Zero-Inflated Poisson",
        [2.47, 2.58, 2.70, 2.82, 2.94, 3.07],
        5.07,
        1.85,
        ALL_YEARS,
    ),
    row(
        "1b",
        "Zero-Inflated Poisson",
        [1.09, 1.09, 1.09, 1.09, 1.09, 1.10],
        3.82,
        1.59,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "2a",
        "Linear Regression",
        [2.13, 2.18, 2.24, 2.29, 2.34, 2.40],
        5.54,
        1.87,
        ALL_YEARS,
    ),
    row(
        "2b",
        "Linear Regression",
        [1.10, 1.11, 1.11, 1.11, 1.11, 1.12],
        3.80,
        1.58,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "3a",
        "SVR Linear",
        [1.40, 1.43, 1.45, 1.48, 1.50, 1.52],
        7.53,
        2.28,
        ALL_YEARS,
    ),
    row(
        "3b",
        "SVR Linear",
        [0.90, 0.90, 0.90, 0.90, 0.90, 0.90],
        4.25,
        1.66,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "4a",
        "SVR RBF",
        [1.46, 1.41, 1.37, 1.34, 1.33, 1.32],
        6.42,
        2.06,
        ALL_YEARS,
    ),
    row(
        "4b",
        "SVR RBF",
        [1.01, 1.01, 1.01, 1.01, 1.02, 1.02],
        3.86,
        1.58,
        TABLE_LABEL_NO_COVID,
    ),
];

pub const TABLE_II_AVERAGE: [f64; 6] = [1.44, 1.46, 1.48, 1.50, 1.53, 1.56];

/// Predicted casualties per year.
pub const TABLE_III: [PublishedForecast; 8] = [
    row(
        "1a",
        "Zero-Inflated Poisson",
        [24.18, 24.70, 25.25, 25.82, 26.42, 27.05],
        157.51,
        10.53,
        ALL_YEARS,
    ),
    row(
        "1b",
        "Zero-Inflated Poisson",
        [18.25, 18.78, 19.34, 19.95, 20.60, 21.30],
        389.01,
        14.38,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "2a",
        "Linear Regression",
        [30.77, 31.50, 32.24, 32.98, 33.71, 34.44],
        135.80,
        10.10,
        ALL_YEARS,
    ),
    row(
        "2b",
        "Linear Regression",
        [17.91, 18.00, 18.08, 18.17, 18.25, 18.32],
        401.67,
        14.88,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "3a",
        "SVR Linear",
        [17.53, 18.04, 18.53, 19.03, 19.54, 20.03],
        168.51,
        10.20,
        ALL_YEARS,
    ),
    row(
        "3b",
        "SVR Linear",
        [23.60, 24.40, 25.19, 25.99, 26.78, 27.57],
        341.69,
        13.89,
        TABLE_LABEL_NO_COVID,
    ),
    row(
        "4a",
        "SVR RBF",
        [10.03, 9.93, 9.86, 9.81, 9.78, 9.77],
        200.27,
        10.47,
        ALL_YEARS,
    ),
    row(
        "4b",
        "SVR RBF",
        [9.54, 9.52, 9.51, 9.50, 9.50, 9.50],
        350.21,
        12.29,
        TABLE_LABEL_NO_COVID,
    ),
];

pub const TABLE_III_AVERAGE: [f64; 6] = [18.98, 19.36, 19.75, 20.16, 20.57, 21.00];

/// Printed averages of the 16-incident timeline table: casualty, bullets,
/// KIV, VA, POM, Shootout, crime time.
pub const TABLE_IV_AVERAGE: [f64; 7] = [19.8, 78.3, 15.3, 3.2, 3.6, 24.2, 31.0];

pub const PUBLISHED_TIMELINE_CSV: &str = include_str!("../data/timeline_published.csv");

/// One row of the published 16-incident timeline table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedTimelineRow {
    pub id: u32,
    pub casualty: u32,
    pub bullets: u32,
    pub kiv_min: f64,
    pub va_min: f64,
    pub pom_min: f64,
    pub shootout_min: f64,
    pub crime_time_min: f64,
}

pub fn published_timeline() -> Vec<PublishedTimelineRow> {
    parse_published_timeline(PUBLISHED_TIMELINE_CSV)
        .expect("bundled timeline_published.csv is well-formed")
}

pub fn parse_published_timeline(text: &str) -> Result<Vec<PublishedTimelineRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize().enumerate() {
        let r: PublishedTimelineRow = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: "*".into(),
            message: e.to_string(),
        })?;
        rows.push(r);
    }
    Ok(rows)
}

/// Factor order of the published correlation table.
pub const TABLE_VI_FACTORS: [&str; 8] = [
    "bullets",
    "kiv",
    "va",
    "pom",
    "shootout",
    "dist_police",
    "dist_hospital",
    "crime_time",
];

/// Printed Pearson r against casualty, same order as [`TABLE_VI_FACTORS`].
pub const TABLE_VI_R: [f64; 8] = [0.592, -0.341, 0.041, -0.354, -0.148, -0.342, -0.162, -0.162];

/// National school count used for per-school rates.
pub const US_SCHOOLS: u64 = 134_960;
pub const STUDY_YEARS: u32 = 26;
pub const SCHOOL_SHOOTINGS: u64 = 510;
pub const MASS_SCHOOL_SHOOTINGS: u64 = 43;
pub const EDUCATION_YEARS: u32 = 17;

/// Printed per-school annual probabilities and "one in N" figures.
pub const SCHOOL_ANNUAL_P: f64 = 1.45e-4;
pub const SCHOOL_ONE_IN: u64 = 6880;
pub const MASS_ANNUAL_P: f64 = 1.23e-5;
pub const MASS_ONE_IN: u64 = 81_604;

/// Printed 17-year exposure, as fractions (0.245 % and 0.021 %).
pub const SCHOOL_LIFETIME_P: f64 = 0.00245;
pub const SCHOOL_LIFETIME_ONE_IN: u64 = 408;
pub const MASS_LIFETIME_P: f64 = 0.00021;
pub const MASS_LIFETIME_ONE_IN: u64 = 4801;

/// Printed state-level correlation between school shootings and mass school
/// shootings.
pub const STATE_R: f64 = 0.754;
pub const STATE_P: f64 = 4.48e-7;

/// Printed casualty rate over the average crime window.
pub const CASUALTIES_PER_MINUTE: f64 = 0.639;

/// Location shares quoted in the text: (location, count, percent).
pub const LOCATION_SHARES: [(&str, usize, f64); 3] = [
    ("classroom", 13, 30.23),
    ("hallway", 9, 20.93),
    ("outside", 6, 13.95),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_i_rows_sum_to_totals() {
        let (mut e, mut i, mut k, mut c) = (0, 0, 0, 0);
        for (_, ev, inj, kil, cas) in TABLE_I {
            assert_eq!(inj + kil, cas);
            e += ev;
            i += inj;
            k += kil;
            c += cas;
        }
        assert_eq!((e, i, k, c), TABLE_I_TOTALS);
    }

    #[test]
    fn published_timeline_has_sixteen_rows() {
        let rows = published_timeline();
        assert_eq!(rows.len(), 16);
        let mean_crime: f64 = rows.iter().map(|r| r.crime_time_min).sum::<f64>() / 16.0;
        assert!((mean_crime - TABLE_IV_AVERAGE[6]).abs() < 0.05);
    }
}
