use serde::Serialize;

use super::RegressionDataset;
use crate::error::{Error, Result};

/// y = intercept + slope · x, with x the centered year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OlsModel {
    pub slope: f64,
    pub intercept: f64,
}

impl OlsModel {
    pub fn predict_x(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Closed-form least squares on mean-centered sums.
pub fn fit_ols(data: &RegressionDataset) -> Result<OlsModel> {
    fit_xy(&data.xs, &data.ys)
}

pub(crate) fn fit_xy(xs: &[f64], ys: &[f64]) -> Result<OlsModel> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid("OLS needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(OlsModel {
        slope,
        intercept: my - slope * mx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::solve2;
    use crate::forecast::{year_to_x, Variant};
    use proptest::prelude::*;

    /// Independent oracle: raw normal equations.
    fn fit_normal_equations(xs: &[f64], ys: &[f64]) -> Option<OlsModel> {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        solve2(n, sx, sxx, [sy, sxy]).map(|[intercept, slope]| OlsModel { slope, intercept })
    }

    fn ds(years: Vec<i32>, ys: Vec<f64>) -> RegressionDataset {
        RegressionDataset::new(years, ys, Variant::WithCovid).unwrap()
    }

    #[test]
    fn constant_target() {
        let m = fit_ols(&ds((2000..2010).collect(), vec![4.0; 10])).unwrap();
        assert_eq!(m.slope, 0.0);
        assert_eq!(m.intercept, 4.0);
    }

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let m = fit_xy(&xs, &ys).unwrap();
        assert!((m.slope - 2.0).abs() < 1e-10);
        assert!((m.intercept - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_x_is_degenerate() {
        assert!(fit_xy(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_xy(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn predictions_linear_in_year() {
        let m = fit_ols(&ds(
            (2000..2020).collect(),
            (0..20).map(|i| f64::from(i % 5)).collect(),
        ))
        .unwrap();
        let p: Vec<f64> = (2025..=2030).map(|y| m.predict_x(year_to_x(y))).collect();
        let d: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|s| (s - d[0]).abs() < 1e-12 && *s > 0.0));
    }

    proptest! {
        #[test]
        fn residuals_orthogonal(ys in prop::collection::vec(0.0f64..100.0, 3..30)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| year_to_x(1999 + i as i32)).collect();
            let m = fit_xy(&xs, &ys).unwrap();
            let r: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - m.predict_x(*x)).collect();
            let scale: f64 = ys.iter().map(|y| y.abs()).sum::<f64>() + 1.0;
            prop_assert!(r.iter().sum::<f64>().abs() < 1e-10 * scale);
            prop_assert!(r.iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>().abs() < 1e-10 * scale * 15.0);
            let ne = fit_normal_equations(&xs, &ys).unwrap();
            prop_assert!((ne.slope - m.slope).abs() < 1e-9 * (1.0 + m.slope.abs()));
        }
    }
}
