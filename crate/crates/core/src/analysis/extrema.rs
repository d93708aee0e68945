use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

/// A located feature. For extrema `value` is the interpolated signal value;
/// for zero crossings it is the local slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub position: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtremaReport {
    pub maxima: Vec<Feature>,
    pub minima: Vec<Feature>,
    pub zero_crossings: Vec<Feature>,
    pub principal_max: Option<Feature>,
    pub principal_min: Option<Feature>,
    /// Separation of the principal maximum and minimum, in grid units.
    pub delta_mm: Option<f64>,
}

/// Locates interior extrema (refined by a three-point parabola) and zero
/// crossings (linear interpolation) of a sampled signal.
pub fn find_extrema(signal: &[f64], grid: &[f64]) -> Result<ExtremaReport, AnalysisError> {
    if signal.len() != grid.len() {
        return Err(AnalysisError::LengthMismatch {
            signal: signal.len(),
            grid: grid.len(),
        });
    }
    if signal.len() < 5 {
        return Err(AnalysisError::TooFewPoints {
            needed: 5,
            got: signal.len(),
        });
    }

    let mut report = ExtremaReport::default();
    for i in 1..signal.len() - 1 {
        let (prev, here, next) = (signal[i - 1], signal[i], signal[i + 1]);
        if here > prev && here >= next {
            report.maxima.push(refine(grid, signal, i));
        } else if here < prev && here <= next {
            report.minima.push(refine(grid, signal, i));
        }
    }
    report.zero_crossings = zero_crossings(signal, grid);

    report.principal_max = report
        .maxima
        .iter()
        .copied()
        .max_by(|a, b| a.value.total_cmp(&b.value));
    report.principal_min = report
        .minima
        .iter()
        .copied()
        .min_by(|a, b| a.value.total_cmp(&b.value));
    if let (Some(hi), Some(lo)) = (report.principal_max, report.principal_min) {
        report.delta_mm = Some((hi.position - lo.position).abs());
    }
    Ok(report)
}

fn refine(grid: &[f64], signal: &[f64], i: usize) -> Feature {
    let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
    let (y0, y1, y2) = (signal[i - 1], signal[i], signal[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 || !curvature.is_finite() {
        return Feature {
            position: x1,
            value: y1,
        };
    }
    let x = (0.5 * (x0 + x1) - d01 / (2.0 * curvature)).clamp(x0, x2);
    Feature {
        position: x,
        value: y0 + d01 * (x - x0) + curvature * (x - x0) * (x - x1),
    }
}

fn zero_crossings(signal: &[f64], grid: &[f64]) -> Vec<Feature> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &y) in signal.iter().enumerate() {
        if y == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if signal[j].signum() != y.signum() {
                let slope = (y - signal[j]) / (grid[i] - grid[j]);
                let position = if i == j + 1 {
                    grid[j] - signal[j] / slope
                } else {
                    0.5 * (grid[j + 1] + grid[i - 1])
                };
                out.push(Feature {
                    position,
                    value: slope,
                });
            }
        }
        last = Some(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn lorentzian_derivative_extrema_separation() {
        // d/dx w²/(x²+w²) has its extrema at ±w/√3.
        let w = 7.0;
        let g = grid(401, -60.0, 60.0);
        let s: Vec<f64> = g
            .iter()
            .map(|&x| -2.0 * x * w * w / (x * x + w * w).powi(2))
            .collect();
        let r = find_extrema(&s, &g).unwrap();
        let expected = 2.0 * w / 3f64.sqrt();
        assert!((r.delta_mm.unwrap() / expected - 1.0).abs() < 1e-2);
        assert_eq!(r.maxima.len(), 1);
        assert_eq!(r.minima.len(), 1);
        assert_eq!(r.zero_crossings.len(), 1);
        assert!(r.zero_crossings[0].position.abs() < 1e-12);
    }

    #[test]
    fn parabola_refinement_is_exact_for_quadratics() {
        let g = vec![0.0, 0.7, 1.5, 2.0, 3.1, 4.0];
        let s: Vec<f64> = g.iter().map(|&x| 5.0 - (x - 1.8f64).powi(2)).collect();
        let r = find_extrema(&s, &g).unwrap();
        assert_eq!(r.maxima.len(), 1);
        assert!((r.maxima[0].position - 1.8).abs() < 1e-12);
        assert!((r.maxima[0].value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ramp_has_no_extrema() {
        let g = grid(20, 0.0, 1.0);
        let r = find_extrema(&g, &g).unwrap();
        assert!(r.maxima.is_empty() && r.minima.is_empty());
        assert!(r.delta_mm.is_none());
    }

    #[test]
    fn constant_has_nothing() {
        let g = grid(20, 0.0, 1.0);
        let r = find_extrema(&[1.0; 20], &g).unwrap();
        assert_eq!(r, ExtremaReport::default());
    }

    #[test]
    fn exact_zero_sample_counts_once() {
        let g = grid(7, -3.0, 3.0);
        let s = vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        let r = find_extrema(&s, &g).unwrap();
        assert_eq!(r.zero_crossings.len(), 1);
        assert_eq!(r.zero_crossings[0].position, 0.0);
        assert!((r.zero_crossings[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let g = grid(4, 0.0, 1.0);
        assert!(matches!(
            find_extrema(&g, &g),
            Err(AnalysisError::TooFewPoints { needed: 5, got: 4 })
        ));
        assert!(find_extrema(&[1.0; 6], &g).is_err());
    }
}
