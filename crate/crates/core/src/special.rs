//! Binomial kernels, the unnormalized incomplete beta function and the
//! tail-integration weights used by the Bernstein estimator.

use crate::error::{check_degree, check_threshold, check_unit, Error, Result};

/// `ln C(m, k)`, accumulated as a sum of logarithms so that it stays finite
/// for degrees well beyond where `C(m, k)` overflows.
fn ln_binomial(m: usize, k: usize) -> f64 {
    let k = k.min(m - k);
    (1..=k).map(|i| ((m - k + i) as f64 / i as f64).ln()).sum()
}

/// Binomial kernel `P_{k,m}(w) = C(m,k) w^k (1-w)^(m-k)`.
pub fn binomial_kernel(k: usize, m: usize, w: f64) -> Result<f64> {
    if k > m {
        return Err(Error::Domain {
            name: "k",
            value: k as f64,
            expected: "0 <= k <= m",
        });
    }
    check_unit("w", w)?;
    if w == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if w == 1.0 {
        return Ok(if k == m { 1.0 } else { 0.0 });
    }
    let log = ln_binomial(m, k) + k as f64 * w.ln() + (m - k) as f64 * (-w).ln_1p();
    Ok(log.exp())
}

/// All kernels `P_{0,m}(w), ..., P_{m,m}(w)` at once, i.e. the Binomial(m, w) pmf.
pub fn binomial_kernels(m: usize, w: f64) -> Result<Vec<f64>> {
    check_unit("w", w)?;
    Ok(binomial_pmf(m, w))
}

/// Binomial(m, w) pmf in log space; `w` must already lie in `[0, 1]`.
pub(crate) fn binomial_pmf(m: usize, w: f64) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    if w == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if w == 1.0 {
        out[m] = 1.0;
        return out;
    }
    let ln_w = w.ln();
    let ln_1mw = (-w).ln_1p();
    let mut ln_c = 0.0;
    for (j, slot) in out.iter_mut().enumerate() {
        if j > 0 {
            ln_c += ((m - j + 1) as f64 / j as f64).ln();
        }
        *slot = (ln_c + j as f64 * ln_w + (m - j) as f64 * ln_1mw).exp();
    }
    out
}

/// Unnormalized incomplete beta function `∫_0^x t^(a-1) (1-t)^(b-1) dt`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_unit("x", x)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain {
            name: "a",
            value: a,
            expected: "a > 0",
        });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain {
            name: "b",
            value: b,
            expected: "b > 0",
        });
    }
    statrs::function::beta::checked_beta_inc(a, b, x).map_err(|_| Error::Domain {
        name: "x",
        value: x,
        expected: "[0, 1]",
    })
}

/// Integration weights `w_k = C(m,k) β(p, k+1, m-k+1)`, `k = 0..=m`.
///
/// With `v` fixed, `∫_0^p P_{k,m}(u) du = w_k`, so the double integral of a
/// Bernstein surface over `[0,p]²` is the quadratic form `wᵀ G w`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailWeights {
    p: f64,
    weights: Vec<f64>,
}

impl TailWeights {
    pub fn new(p: f64, m: usize) -> Result<Self> {
        check_threshold(p)?;
        check_degree(m)?;
        // C(m,k) β(p,k+1,m-k+1) = P[Bin(m+1, p) >= k+1] / (m+1)
        let pmf = binomial_pmf(m + 1, p);
        let scale = 1.0 / (m + 1) as f64;
        let mut weights = vec![0.0; m + 1];
        let mut survival = 0.0;
        for k in (0..=m).rev() {
            survival += pmf[k + 1];
            weights[k] = survival.min(1.0) * scale;
        }
        Ok(Self { p, weights })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// Shorthand for [`TailWeights::new`].
pub fn tail_weights(p: f64, m: usize) -> Result<TailWeights> {
    TailWeights::new(p, m)
}
