//! Scaling extraction from measured series: least-squares slopes,
//! truncation-dimension curves, and saturation detection.

use crate::error::{Error, Result};
use crate::mps::BondSpectrum;

/// A measured series with strictly increasing abscissa.
#[derive(Debug, Clone)]
pub struct Series {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Free-form provenance tag (model, Rényi index, bond, rank policy).
    pub label: String,
}

impl Series {
    pub fn new(x: Vec<f64>, y: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Data("x and y lengths differ".into()));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data("x must be strictly increasing".into()));
        }
        Ok(Self { x, y, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Log-log transform of a positive series.
    pub fn log_log(&self) -> Result<Series> {
        if self.x.iter().chain(self.y.iter()).any(|&v| v <= 0.0) {
            return Err(Error::Data("log-log transform needs positive data".into()));
        }
        Series::new(
            self.x.iter().map(|v| v.ln()).collect(),
            self.y.iter().map(|v| v.ln()).collect(),
            format!("loglog({})", self.label),
        )
    }
}

/// Least-squares line over a fit window.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub point_count: usize,
}

/// Ordinary least squares on the points inside `window` (inclusive).
///
/// Requires at least 4 points in the window.
pub fn fit_line(series: &Series, window: (f64, f64)) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = series
        .x
        .iter()
        .zip(&series.y)
        .filter(|(&x, _)| x >= window.0 - 1e-12 && x <= window.1 + 1e-12)
        .map(|(&x, &y)| (x, y))
        .collect();
    let n = pts.len();
    if n < 4 {
        return Err(Error::Data(format!("only {n} points in fit window, need at least 4")));
    }
    let nf = n as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let mx = sx / nf;
    let my = sy / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Data("degenerate abscissa in fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    Ok(ScalingFit {
        slope,
        intercept,
        window,
        residual_rms: (ss / nf).sqrt(),
        point_count: n,
    })
}

/// Smallest rank with tail weight at most `eps` for one spectrum.
pub fn d_epsilon(spectrum: &BondSpectrum, eps: f64) -> Result<usize> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Parameter(format!("eps {eps} outside (0, 1)")));
    }
    let mut tail: f64 = spectrum.weights.iter().sum();
    for (k, w) in spectrum.weights.iter().enumerate() {
        tail -= w;
        if tail <= eps {
            return Ok(k + 1);
        }
    }
    Ok(spectrum.weights.len())
}

/// Truncation-dimension series `D_eps(beta)` from per-beta spectra at one
/// bond.
pub fn extract_d_epsilon(spectra: &[(f64, BondSpectrum)], eps: f64) -> Result<Series> {
    let mut x = Vec::with_capacity(spectra.len());
    let mut y = Vec::with_capacity(spectra.len());
    for (beta, s) in spectra {
        x.push(*beta);
        y.push(d_epsilon(s, eps)? as f64);
    }
    Series::new(x, y, format!("D_eps(eps={eps})"))
}

/// Saturation verdict for an entropy-versus-beta series.
#[derive(Debug, Clone, Copy)]
pub struct Saturation {
    pub saturated: bool,
    pub plateau: f64,
}

/// Flags saturation when the last third of the series has total variation
/// at most `tolerance`; the plateau is that segment's mean.
///
/// Requires at least 6 points.
pub fn detect_saturation(series: &Series, tolerance: f64) -> Result<Saturation> {
    let n = series.len();
    if n < 6 {
        return Err(Error::Data(format!("need at least 6 points, got {n}")));
    }
    let start = n - n.div_ceil(3);
    let seg = &series.y[start..];
    let tv: f64 = seg.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let plateau = seg.iter().sum::<f64>() / seg.len() as f64;
    Ok(Saturation { saturated: tv <= tolerance, plateau })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(x: Vec<f64>, y: Vec<f64>) -> Series {
        Series::new(x, y, "test").unwrap()
    }

    #[test]
    fn exact_line_recovered() {
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        let fit = fit_line(&series(x, y), (0.0, 7.0)).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        assert_eq!(fit.point_count, 8);
    }

    #[test]
    fn synthetic_log_slope() {
        let betas = [8.0, 16.0, 32.0, 64.0];
        let x: Vec<f64> = betas.iter().map(|b: &f64| b.ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| v / 3.0).collect();
        let fit = fit_line(&series(x.clone(), y), (x[0], x[3])).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_rejected() {
        let x = vec![1.0, 2.0, 3.0];
        let y = vec![1.0, 2.0, 3.0];
        assert!(fit_line(&series(x, y), (0.0, 4.0)).is_err());
    }

    #[test]
    fn window_filters_points() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v < 5.0 { 0.0 } else { *v }).collect();
        let fit = fit_line(&series(x, y), (5.0, 9.0)).unwrap();
        assert_eq!(fit.point_count, 5);
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_equivariance() {
        let x: Vec<f64> = (0..6).map(|i| 0.5 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 0.3).collect();
        let base = fit_line(&series(x.clone(), y.clone()), (0.0, 3.0)).unwrap();
        let shifted = fit_line(
            &series(x.clone(), y.iter().map(|v| v + 5.0).collect()),
            (0.0, 3.0),
        )
        .unwrap();
        assert!((shifted.slope - base.slope).abs() < 1e-12);
        assert!((shifted.intercept - base.intercept - 5.0).abs() < 1e-12);
        let scaled = fit_line(
            &series(x, y.iter().map(|v| 2.5 * v).collect()),
            (0.0, 3.0),
        )
        .unwrap();
        assert!((scaled.slope - 2.5 * base.slope).abs() < 1e-12);
        assert!((scaled.intercept - 2.5 * base.intercept).abs() < 1e-12);
    }

    #[test]
    fn d_epsilon_values() {
        let trivial = BondSpectrum { bond: 1, weights: vec![1.0] };
        assert_eq!(d_epsilon(&trivial, 1e-6).unwrap(), 1);
        let uniform = BondSpectrum { bond: 1, weights: vec![0.125; 8] };
        assert_eq!(d_epsilon(&uniform, 0.25).unwrap(), 6);
        assert!(d_epsilon(&uniform, 1.0).is_err());
    }

    #[test]
    fn d_epsilon_monotone_in_eps() {
        let w = vec![0.5, 0.3, 0.1, 0.05, 0.03, 0.02];
        let s = BondSpectrum { bond: 1, weights: w };
        let mut prev = usize::MAX;
        for eps in [0.3, 0.1, 0.05, 0.01] {
            let d = d_epsilon(&s, eps).unwrap();
            assert!(d <= prev.max(d));
            assert!(prev == usize::MAX || d >= prev);
            prev = d;
        }
    }

    #[test]
    fn saturation_on_constant_series() {
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let y = vec![1.5; 9];
        let s = detect_saturation(&series(x, y), 0.01).unwrap();
        assert!(s.saturated);
        assert!((s.plateau - 1.5).abs() < 1e-12);
    }

    #[test]
    fn no_saturation_on_linear_series() {
        let x: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.1 * v).collect();
        let s = detect_saturation(&series(x, y), 0.02).unwrap();
        assert!(!s.saturated);
    }

    #[test]
    fn increasing_increments_above_tolerance_not_saturated() {
        // strictly increasing with increments > tolerance/6 on a series
        // long enough that the last third accumulates more than tolerance
        let tol = 0.3;
        let step = tol / 6.0 * 1.01;
        let x: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..24).map(|i| step * i as f64).collect();
        let s = detect_saturation(&series(x, y), tol).unwrap();
        assert!(!s.saturated);
    }

    #[test]
    fn too_few_points_for_saturation() {
        let x: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let y = vec![0.0; 5];
        assert!(detect_saturation(&series(x, y), 0.1).is_err());
    }
}
