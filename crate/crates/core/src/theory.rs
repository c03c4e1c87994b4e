//! Closed-form scaling predictions and rigorous approximation bounds.
//!
//! Pure functions relating Rényi entropies, truncation errors, and bond
//! dimensions: the conformal and gapped entropy asymptotics, the two-norm
//! error bound from accumulated truncation errors, the bond-dimension
//! bound from a single Rényi entropy, the Rényi index minimizing that
//! bound, and the majorizing spectrum behind the entropy lower bound.
//! Entropies are in nats and all logarithms natural, so conformal slopes
//! read `(c/6)(1 + 1/alpha)` directly.

use crate::error::{Error, Result};

/// Conformal prediction for critical chains: entanglement of the
/// purification grows logarithmically in inverse temperature,
/// `(c/6)(1 + 1/alpha)·ln(beta/pi) + c_alpha`.
pub fn cft_entropy_prediction(central_charge: f64, alpha: f64, beta: f64, c_alpha: f64) -> f64 {
    assert!(beta > 0.0 && alpha > 0.0 && central_charge > 0.0);
    cft_slope(central_charge, alpha) * (beta / std::f64::consts::PI).ln() + c_alpha
}

/// Slope of the conformal prediction in `ln beta`.
pub fn cft_slope(central_charge: f64, alpha: f64) -> f64 {
    central_charge / 6.0 * (1.0 + 1.0 / alpha)
}

/// Gapped prediction: the entropy saturates, `(c/6)(1 + 1/alpha)·ln(xi) +
/// 2 c_alpha`, independent of beta.
pub fn gapped_entropy_prediction(central_charge: f64, alpha: f64, xi: f64, c_alpha: f64) -> f64 {
    assert!(xi > 0.0);
    cft_slope(central_charge, alpha) * xi.ln() + 2.0 * c_alpha
}

/// Thermal correlation length `beta / (pi * Delta)` for a primary of
/// scaling dimension `Delta`.
pub fn thermal_correlation_length(scaling_dimension: f64, beta: f64) -> f64 {
    assert!(scaling_dimension > 0.0);
    beta / (std::f64::consts::PI * scaling_dimension)
}

/// Two-norm error bound from per-bond truncation errors:
/// `sqrt(2 * sum_l eps_l)`.
pub fn mps_error_bound(eps_per_bond: &[f64]) -> Result<f64> {
    for &e in eps_per_bond {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Domain(format!("truncation error {e} outside [0, 1]")));
        }
    }
    Ok((2.0 * eps_per_bond.iter().sum::<f64>()).sqrt())
}

/// Bond dimension at which the entropy bound saturates:
/// `D = 1 + exp(S_alpha + alpha/(1-alpha)·ln(1/eps))`, valid for
/// `alpha` strictly inside `(0, 1)`.
///
/// At `alpha >= 1` the second term diverges: knowledge of the von Neumann
/// entropy alone does not bound the bond dimension.
pub fn bond_dimension_bound(s_alpha: f64, alpha: f64, eps: f64) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    Ok(1.0 + (s_alpha + alpha / (1.0 - alpha) * (1.0 / eps).ln()).exp())
}

/// Rényi index minimizing the bond-dimension bound when the entropy scales
/// as `(c/6)(1 + 1/alpha)·ln(y)`.
///
/// With `r = (6/c)·ln(1/eps)/ln(y)` the minimizer is
/// `alpha* = (1 - sqrt(r)) / (1 - r)`, which lies in `(0, 1)` for `r > 1`;
/// the regime `r <= 1` is outside the formula's derivation and reports a
/// domain error rather than extrapolating.
pub fn optimal_alpha(central_charge: f64, eps: f64, y: f64) -> Result<f64> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    if y <= 1.0 {
        return Err(Error::Domain(format!("scale y {y} must exceed 1")));
    }
    if central_charge <= 0.0 {
        return Err(Error::Domain("central charge must be positive".into()));
    }
    let r = 6.0 / central_charge * (1.0 / eps).ln() / y.ln();
    if r <= 1.0 {
        return Err(Error::Domain(format!(
            "(6/c)·ln(1/eps)/ln(y) = {r:.6} <= 1: minimizer leaves (0,1); \
             increase the accuracy demand or decrease y"
        )));
    }
    Ok((1.0 - r.sqrt()) / (1.0 - r))
}

/// Bond-dimension scaling exponent `lambda = (c/6)(1 + 1/alpha)`.
pub fn d_scaling_exponent(central_charge: f64, alpha: f64) -> f64 {
    assert!(central_charge > 0.0 && alpha > 0.0);
    cft_slope(central_charge, alpha)
}

/// A lower bound together with a vacuity flag.
///
/// Negative bounds are mathematically valid but carry no information for
/// nonnegative entropies; they are flagged rather than clamped so the
/// formula itself stays testable.
#[derive(Debug, Clone, Copy)]
pub struct EntropyBound {
    pub value: f64,
    pub vacuous: bool,
}

/// Validity range of the entropy lower bound:
/// `1 > alpha >= eps·D/(D - 1 - eps)`.
pub fn entropy_bound_alpha_range(eps: f64, rank: usize) -> Result<(f64, f64)> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    if rank < 2 {
        return Err(Error::Domain("rank must be at least 2".into()));
    }
    let d = rank as f64;
    let lo = eps * d / (d - 1.0 - eps);
    if lo >= 1.0 {
        return Err(Error::Domain("validity window is empty for these (eps, D)".into()));
    }
    Ok((lo, 1.0))
}

/// Entropy lower bound from a truncation error:
/// `S_alpha >= (1/(1-alpha))·ln[(D-1)^{1-alpha} eps^alpha]`
/// within the validity range above. This is the weaker of the two forms;
/// see [`entropy_lower_bound_sharp`] for the sharper one.
pub fn entropy_lower_bound_from_truncation(eps: f64, rank: usize, alpha: f64) -> Result<EntropyBound> {
    let (lo, hi) = entropy_bound_alpha_range(eps, rank)?;
    if !(alpha >= lo && alpha < hi) {
        return Err(Error::Domain(format!(
            "alpha {alpha} outside validity range [{lo:.3e}, 1)"
        )));
    }
    let d = rank as f64;
    let value = ((1.0 - alpha) * (d - 1.0).ln() + alpha * eps.ln()) / (1.0 - alpha);
    Ok(EntropyBound { value, vacuous: value < 0.0 })
}

/// Sharper form of the entropy lower bound, dividing out
/// `alpha^alpha (1-alpha)^{1-alpha}`.
pub fn entropy_lower_bound_sharp(eps: f64, rank: usize, alpha: f64) -> Result<EntropyBound> {
    let weak = entropy_lower_bound_from_truncation(eps, rank, alpha)?;
    let correction = (alpha * alpha.ln() + (1.0 - alpha) * (1.0 - alpha).ln()) / (1.0 - alpha);
    let value = weak.value - correction;
    Ok(EntropyBound { value, vacuous: value < 0.0 })
}

/// The step height minimizing the analytic lower-bound expression,
/// `h* = ((1-alpha)/alpha)·eps/(D-1)`.
pub fn optimal_step_height(eps: f64, rank: usize, alpha: f64) -> f64 {
    (1.0 - alpha) / alpha * eps / (rank as f64 - 1.0)
}

/// The distribution that majorizes every spectrum with truncation error
/// `eps` at rank `D` and `D`-th weight `h`.
///
/// `w_1 = 1 - eps - (D-1)h`, then `K = floor(eps/h)` additional entries of
/// `h` beyond rank `D`, a fractional entry `gamma·h` with
/// `gamma = eps/h - K`, and zeros. Sums to one by construction.
pub fn majorizing_distribution(eps: f64, rank: usize, h: f64) -> Result<Vec<f64>> {
    if rank < 2 {
        return Err(Error::Parameter("rank must be at least 2".into()));
    }
    if !(h > 0.0) || !(0.0 < eps && eps < 1.0) {
        return Err(Error::Parameter("need h > 0 and eps in (0, 1)".into()));
    }
    let d = rank as f64;
    let w1 = 1.0 - eps - (d - 1.0) * h;
    if w1 < h - 1e-15 {
        return Err(Error::Parameter(format!(
            "largest entry 1 - eps - (D-1)h = {w1:.3e} smaller than h = {h:.3e}"
        )));
    }
    let k = (eps / h).floor() as usize;
    let gamma = eps / h - k as f64;
    let mut w = Vec::with_capacity(rank + k + 1);
    w.push(w1);
    // entries 2..=D+K equal h
    for _ in 1..rank + k {
        w.push(h);
    }
    if gamma > 0.0 {
        w.push(gamma * h);
    }
    Ok(w)
}

/// Partial-sum dominance: does `a` majorize `b`?
pub fn majorizes(a: &[f64], b: &[f64], slack: f64) -> bool {
    let n = a.len().max(b.len());
    let mut sa = 0.0;
    let mut sb = 0.0;
    for k in 0..n {
        sa += a.get(k).copied().unwrap_or(0.0);
        sb += b.get(k).copied().unwrap_or(0.0);
        if sa + slack < sb {
            return false;
        }
    }
    true
}
