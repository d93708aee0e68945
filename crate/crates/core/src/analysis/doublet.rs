use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use super::extrema::find_extrema;
use crate::error::AnalysisError;

/// Derivative of a unit Lorentzian, d/dx [w²/(x²+w²)].
pub fn derivative_lorentzian(x: f64, w: f64) -> f64 {
    let q = x * x + w * w;
    -2.0 * x * w * w / (q * q)
}

/// ∂D/∂x
fn d_dx(x: f64, w: f64) -> f64 {
    let q = x * x + w * w;
    -2.0 * w * w * (w * w - 3.0 * x * x) / (q * q * q)
}

/// ∂D/∂w
fn d_dw(x: f64, w: f64) -> f64 {
    let q = x * x + w * w;
    -4.0 * x * w * (x * x - w * w) / (q * q * q)
}

/// Relative cost change below which the line search compares gradients.
const COST_ROUNDING: f64 = 1e-13;

/// A component weaker than this fraction of the other counts as absent.
pub const ONE_LINE_RATIO: f64 = 0.05;

/// Starting point for the doublet fit; `half_width` is w (HWHM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletInit {
    pub amplitudes: [f64; 2],
    pub center: f64,
    pub splitting: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            step_tol: 1e-8,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubletFit {
    /// |s|, GHz.
    pub splitting: f64,
    /// Full width 2w, GHz.
    pub width: f64,
    pub center: f64,
    /// Amplitudes of the lower (c − s/2) and upper (c + s/2) components.
    pub amplitudes: [f64; 2],
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Gradient of the normalized least-squares objective at the returned iterate.
    pub gradient_norm: f64,
    /// Collapsed to a single line: s ≈ 0, one amplitude ≈ 0, or a cancelling
    /// opposite-sign pair.
    pub degenerate: bool,
    /// RMS residual per iteration (normalized signal).
    pub residual_trace: Vec<f64>,
}

impl DoubletFit {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }
}

/// Evaluates A₁·D(ν−c+s/2; w) + A₂·D(ν−c−s/2; w).
pub fn doublet_model(init: &DoubletInit, nu: f64) -> f64 {
    let half = 0.5 * init.splitting;
    init.amplitudes[0] * derivative_lorentzian(nu - init.center + half, init.half_width)
        + init.amplitudes[1] * derivative_lorentzian(nu - init.center - half, init.half_width)
}

pub fn fit_doublet(
    signal: &[f64],
    grid: &[f64],
    init: Option<DoubletInit>,
) -> Result<DoubletFit, AnalysisError> {
    fit_doublet_with(signal, grid, init, &FitOptions::default())
}

/// Preferred starting point, see [`initial_guesses`].
pub fn initial_guess(signal: &[f64], grid: &[f64]) -> Result<DoubletInit, AnalysisError> {
    Ok(initial_guesses(signal, grid)?.remove(0))
}

/// Starting points derived from the zero crossings, most plausible first.
///
/// - Outermost crossing pair → centre and splitting, half their distance → w.
/// - Crossings split at their widest gap into two clusters → cluster centroids
///   give centre and splitting, the intra-cluster spread gives w. An FM trace
///   of a dispersive line crosses zero twice, so when both clusters hold at
///   least two crossings this candidate goes first.
///
/// Amplitudes come from linear least squares at fixed (c, s, w).
pub fn initial_guesses(signal: &[f64], grid: &[f64]) -> Result<Vec<DoubletInit>, AnalysisError> {
    let report = find_extrema(signal, grid)?;
    let step = min_step(grid);
    let mut crossings: Vec<f64> = Vec::new();
    for z in &report.zero_crossings {
        match crossings.last() {
            Some(&last) if z.position - last < 2.0 * step => {}
            _ => crossings.push(z.position),
        }
    }
    if crossings.len() < 2 {
        return Err(AnalysisError::NoDoubletSignature);
    }
    let lo = crossings[0];
    let hi = crossings[crossings.len() - 1];
    let mut shapes = vec![(0.5 * (lo + hi), hi - lo, 0.5 * (hi - lo))];
    if crossings.len() >= 3 {
        let split = (1..crossings.len())
            .max_by(|&i, &j| (crossings[i] - crossings[i - 1]).total_cmp(&(crossings[j] - crossings[j - 1])))
            .expect("at least two gaps");
        let (left, right) = crossings.split_at(split);
        let centroid = |c: &[f64]| c.iter().sum::<f64>() / c.len() as f64;
        let spread = |c: &[f64]| c[c.len() - 1] - c[0];
        let (cl, cr) = (centroid(left), centroid(right));
        let half = 0.25 * (spread(left) + spread(right));
        let w = if half > 0.0 { half } else { 0.25 * (cr - cl) };
        let clustered = (0.5 * (cl + cr), cr - cl, w);
        if left.len() >= 2 && right.len() >= 2 {
            shapes.insert(0, clustered);
        } else {
            shapes.push(clustered);
        }
    }
    Ok(shapes
        .into_iter()
        .map(|(center, splitting, w)| {
            let half_width = w.max(2.0 * step);
            let amplitudes =
                linear_amplitudes(signal, grid, center, splitting, half_width).unwrap_or([1.0, 1.0]);
            DoubletInit {
                amplitudes,
                center,
                splitting,
                half_width,
            }
        })
        .collect())
}

fn min_step(grid: &[f64]) -> f64 {
    grid.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

fn linear_amplitudes(signal: &[f64], grid: &[f64], c: f64, s: f64, w: f64) -> Option<[f64; 2]> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&nu, &y) in grid.iter().zip(signal) {
        let f1 = derivative_lorentzian(nu - c + 0.5 * s, w);
        let f2 = derivative_lorentzian(nu - c - 0.5 * s, w);
        a11 += f1 * f1;
        a12 += f1 * f2;
        a22 += f2 * f2;
        b1 += f1 * y;
        b2 += f2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-12 * (a11 * a22).max(f64::MIN_POSITIVE) {
        return None;
    }
    Some([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det])
}

// Parameter vector layout: [A₁, A₂, c, s, w].
fn to_vec(p: &DoubletInit) -> Vector5<f64> {
    Vector5::new(
        p.amplitudes[0],
        p.amplitudes[1],
        p.center,
        p.splitting,
        p.half_width,
    )
}

fn from_vec(v: &Vector5<f64>) -> DoubletInit {
    DoubletInit {
        amplitudes: [v[0], v[1]],
        center: v[2],
        splitting: v[3],
        half_width: v[4],
    }
}

fn cost(y: &[f64], grid: &[f64], p: &Vector5<f64>) -> f64 {
    let model = from_vec(p);
    grid.iter()
        .zip(y)
        .map(|(&nu, &yi)| (doublet_model(&model, nu) - yi).powi(2))
        .sum::<f64>()
}

/// Normal equations JᵀJ and gradient Jᵀr. The positional columns are
/// multiplied by w so the gradient is dimensionless.
fn normal_equations(y: &[f64], grid: &[f64], p: &Vector5<f64>) -> (Matrix5<f64>, Vector5<f64>) {
    let (a1, a2, c, s, w) = (p[0], p[1], p[2], p[3], p[4]);
    let mut jtj = Matrix5::zeros();
    let mut jtr = Vector5::zeros();
    for (&nu, &yi) in grid.iter().zip(y) {
        let x1 = nu - c + 0.5 * s;
        let x2 = nu - c - 0.5 * s;
        let (g1, g2) = (derivative_lorentzian(x1, w), derivative_lorentzian(x2, w));
        let (p1, p2) = (d_dx(x1, w), d_dx(x2, w));
        let r = a1 * g1 + a2 * g2 - yi;
        let j = Vector5::new(
            g1,
            g2,
            -(a1 * p1 + a2 * p2),
            0.5 * (a1 * p1 - a2 * p2),
            a1 * d_dw(x1, w) + a2 * d_dw(x2, w),
        );
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}

fn scaled_gradient(jtr: &Vector5<f64>, p: &Vector5<f64>, n: usize) -> f64 {
    let w = p[4].abs();
    let scaled = Vector5::new(jtr[0], jtr[1], jtr[2] * w, jtr[3] * w, jtr[4] * w);
    scaled.norm() / n as f64
}

pub fn fit_doublet_with(
    signal: &[f64],
    grid: &[f64],
    init: Option<DoubletInit>,
    opts: &FitOptions,
) -> Result<DoubletFit, AnalysisError> {
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
    let scale = signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(AnalysisError::ZeroAmplitudes);
    }
    let y: Vec<f64> = signal.iter().map(|v| v / scale).collect();

    let starts = match init {
        Some(mut p) => {
            if !(p.half_width != 0.0 && p.half_width.is_finite()) {
                return Err(AnalysisError::NonPositive(p.half_width));
            }
            p.amplitudes = [p.amplitudes[0] / scale, p.amplitudes[1] / scale];
            vec![p]
        }
        None => initial_guesses(&y, grid)?,
    };
    // First acceptable fit in order of preference; otherwise the best residual.
    let mut fallback: Option<DoubletFit> = None;
    let mut chosen = None;
    for start in starts {
        let fit = gauss_newton(&y, grid, start, opts);
        if fit.converged && !fit.degenerate {
            chosen = Some(fit);
            break;
        }
        if fallback
            .as_ref()
            .is_none_or(|f| fit.residual_rms < f.residual_rms)
        {
            fallback = Some(fit);
        }
    }
    let best = chosen.or(fallback).expect("at least one start");
    Ok(DoubletFit {
        amplitudes: [best.amplitudes[0] * scale, best.amplitudes[1] * scale],
        residual_rms: best.residual_rms * scale,
        ..best
    })
}

/// Damped Gauss-Newton on the unit-peak signal `y`.
fn gauss_newton(y: &[f64], grid: &[f64], start: DoubletInit, opts: &FitOptions) -> DoubletFit {
    let n = y.len();
    let mut p = to_vec(&start);
    let mut f = cost(y, grid, &p);
    let mut trace = vec![(f / n as f64).sqrt()];
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient_norm;
    loop {
        let (jtj, jtr) = normal_equations(y, grid, &p);
        gradient_norm = scaled_gradient(&jtr, &p, n);
        if gradient_norm < opts.grad_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let Some(delta) = solve(&jtj, &jtr) else { break };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = p - delta * t;
            if trial[4] != 0.0 {
                let ft = cost(y, grid, &trial);
                if ft.is_finite() && ft <= f {
                    accepted = Some((trial, ft));
                    break;
                }
                // Close to the optimum the cost decrease of a step drops below
                // the rounding error of the cost itself, while the gradient is
                // still resolved; let the gradient decide there.
                if ft.is_finite() && ft <= f * (1.0 + COST_ROUNDING) {
                    let (_, jtr_trial) = normal_equations(y, grid, &trial);
                    if scaled_gradient(&jtr_trial, &trial, n) < gradient_norm {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            // No descent along the Gauss-Newton direction: at the numerical
            // optimum unless the gradient says otherwise.
            let (_, jtr) = normal_equations(y, grid, &p);
            gradient_norm = scaled_gradient(&jtr, &p, n);
            converged = gradient_norm < opts.grad_tol;
            break;
        };
        let step = next - p;
        let amp = p[0].abs().max(p[1].abs());
        let w = p[4].abs();
        let typical = [amp, amp, w, w, w];
        let small_step = (0..5).all(|i| step[i].abs() <= opts.step_tol * (p[i].abs() + typical[i]));
        p = next;
        f = fnext;
        trace.push((f / n as f64).sqrt());
        if small_step {
            // A stalled step only counts once the gradient test agrees;
            // otherwise keep polishing.
            let (_, jtr) = normal_equations(y, grid, &p);
            gradient_norm = scaled_gradient(&jtr, &p, n);
            if gradient_norm < opts.grad_tol {
                converged = true;
                break;
            }
        }
    }

    let mut fit = from_vec(&p);
    fit.half_width = fit.half_width.abs();
    if fit.splitting < 0.0 {
        fit.splitting = -fit.splitting;
        fit.amplitudes.swap(0, 1);
    }
    let amp_max = fit.amplitudes[0].abs().max(fit.amplitudes[1].abs());
    let amp_min = fit.amplitudes[0].abs().min(fit.amplitudes[1].abs());
    let one_line = amp_min <= ONE_LINE_RATIO * amp_max;
    // Opposite-sign components much closer than their width cancel into a
    // single second-derivative line; the optimum then sits at s → 0 with
    // diverging amplitudes.
    let cancelling = fit.amplitudes[0] * fit.amplitudes[1] < 0.0 && fit.splitting < 0.25 * fit.half_width;
    let degenerate = one_line || cancelling || fit.splitting < 0.05 * fit.half_width || amp_max == 0.0;
    if one_line && amp_max > 0.0 {
        let half = 0.5 * fit.splitting;
        fit.center += if fit.amplitudes[0].abs() >= fit.amplitudes[1].abs() {
            -half
        } else {
            half
        };
        fit.splitting = 0.0;
    }

    DoubletFit {
        splitting: fit.splitting,
        width: 2.0 * fit.half_width,
        center: fit.center,
        amplitudes: fit.amplitudes,
        residual_rms: (f / n as f64).sqrt(),
        converged,
        iterations,
        gradient_norm,
        degenerate,
        residual_trace: trace,
    }
}

fn solve(jtj: &Matrix5<f64>, jtr: &Vector5<f64>) -> Option<Vector5<f64>> {
    let direct = jtj.lu().solve(jtr).filter(|d| d.iter().all(|v| v.is_finite()));
    if direct.is_some() {
        return direct;
    }
    // Rank-deficient normal matrix (degenerate doublet): small ridge.
    let ridge = 1e-10 * jtj.trace().max(f64::MIN_POSITIVE);
    let damped = jtj + Matrix5::identity() * ridge;
    damped.lu().solve(jtr).filter(|d| d.iter().all(|v| v.is_finite()))
}

/// (|A₁| − |A₂|)/(|A₁| + |A₂|).
pub fn asymmetry(fit: &DoubletFit) -> Result<f64, AnalysisError> {
    let (a, b) = (fit.amplitudes[0].abs(), fit.amplitudes[1].abs());
    if a + b == 0.0 {
        return Err(AnalysisError::ZeroAmplitudes);
    }
    Ok((a - b) / (a + b))
}
