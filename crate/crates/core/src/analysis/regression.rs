use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

/// Least-squares line through (x, y) points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    /// Zero when fitted through the origin.
    pub intercept: f64,
    /// Standard error of the slope; `None` with zero residual degrees of freedom.
    pub slope_stderr: Option<f64>,
    pub through_origin: bool,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_linear(points: &[(f64, f64)], through_origin: bool) -> Result<LinearFit, AnalysisError> {
    let n = points.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let (slope, intercept, sxx, dof) = if through_origin {
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        if sxx == 0.0 {
            return Err(AnalysisError::RankDeficient("all x are zero"));
        }
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        (sxy / sxx, 0.0, sxx, n - 1)
    } else {
        let mx = points.iter().map(|(x, _)| x).sum::<f64>() / nf;
        let my = points.iter().map(|(_, y)| y).sum::<f64>() / nf;
        let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(AnalysisError::RankDeficient("all x are equal"));
        }
        let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        (slope, my - slope * mx, sxx, n - 2)
    };
    let rss: f64 = points
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let slope_stderr = (dof > 0).then(|| (rss / dof as f64 / sxx).sqrt());
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        through_origin,
        points: points.to_vec(),
    })
}
