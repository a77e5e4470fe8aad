//! Lower-tail Spearman's rho: the population functional and its two plug-in
//! estimators.
//!
//! For a threshold `p ∈ (0,1]`,
//! `ρ(p) = (∫_{[0,p]²} C − p⁴/4) / D(p)` with `D(p) = p³/3 − p⁴/4`, so that
//! independence scores 0 and the upper Fréchet bound scores 1.

use crate::copula::{copula_grid, Copula, PseudoSample};
use crate::error::{check_threshold, Result};
use crate::quad::{tensor_doubling, TensorRule};
use crate::special::TailWeights;

/// `D(p) = p³/3 − p⁴/4`, the integral of `M − Π` over `[0,p]²`.
pub fn normalizer(p: f64) -> Result<f64> {
    check_threshold(p)?;
    Ok(normalizer_unchecked(p))
}

pub(crate) fn normalizer_unchecked(p: f64) -> f64 {
    let p3 = p * p * p;
    p3 / 3.0 - p3 * p / 4.0
}

fn standardize(integral: f64, p: f64) -> f64 {
    let p2 = p * p;
    (integral - 0.25 * p2 * p2) / normalizer_unchecked(p)
}

/// Lower bound of the tail rho over all copulas, reached when `∫ C = 0`.
pub fn lower_bound(p: f64) -> f64 {
    -3.0 * p / (4.0 - 3.0 * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Empirical,
    Bernstein { degree: usize },
}

/// Estimated tail rho with the raw `∫_{[0,p]²} Ĉ` it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRhoResult {
    pub p: f64,
    pub method: Method,
    pub integral: f64,
    pub value: f64,
}

impl TailRhoResult {
    pub fn degree(&self) -> Option<usize> {
        match self.method {
            Method::Empirical => None,
            Method::Bernstein { degree } => Some(degree),
        }
    }
}

/// Population `ρ(p)` of a copula, integrating `C` by tensor Gauss–Legendre
/// with panel doubling until successive estimates agree to `tol`.
pub fn rho_tail_population(c: &impl Copula, p: f64, tol: f64) -> Result<f64> {
    check_threshold(p)?;
    let rule = TensorRule {
        tol,
        ..TensorRule::default()
    };
    let integral = tensor_doubling(|u, v| c.cdf(u, v), p, rule)?;
    Ok(standardize(integral, p))
}

/// Empirical-copula estimator. `∫_{[0,p]²} C_n` has the exact closed form
/// `n⁻¹ Σ (p − U_i)₊ (p − V_i)₊`.
pub fn rho_hat_empirical(ps: &PseudoSample, p: f64) -> Result<TailRhoResult> {
    check_threshold(p)?;
    let integral = ps
        .pairs()
        .map(|(u, v)| (p - u).max(0.0) * (p - v).max(0.0))
        .sum::<f64>()
        / ps.len() as f64;
    Ok(TailRhoResult {
        p,
        method: Method::Empirical,
        integral,
        value: standardize(integral, p),
    })
}

/// Bernstein-smoothed estimator of degree `m`: `∫_{[0,p]²} C_{m,n} = wᵀ G w`.
pub fn rho_hat_bernstein(ps: &PseudoSample, p: f64, m: usize) -> Result<TailRhoResult> {
    let weights = TailWeights::new(p, m)?;
    rho_hat_bernstein_with(ps, &weights)
}

/// As [`rho_hat_bernstein`], reusing precomputed weights.
pub fn rho_hat_bernstein_with(ps: &PseudoSample, weights: &TailWeights) -> Result<TailRhoResult> {
    let grid = copula_grid(ps, weights.degree())?;
    let w = weights.as_slice();
    let integral = grid.bilinear(w, w);
    let p = weights.p();
    Ok(TailRhoResult {
        p,
        method: Method::Bernstein {
            degree: weights.degree(),
        },
        integral,
        value: standardize(integral, p),
    })
}

/// Rule-of-thumb degree `⌊n^{2/3}⌋`, found as the largest `m` with `m³ ≤ n²`.
pub fn rule_of_thumb_degree(n: usize) -> usize {
    let n2 = (n as u128) * (n as u128);
    let mut m = (n as f64).powf(2.0 / 3.0).floor() as u128;
    while m * m * m > n2 {
        m -= 1;
    }
    while (m + 1) * (m + 1) * (m + 1) <= n2 {
        m += 1;
    }
    m as usize
}
