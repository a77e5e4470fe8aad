//! First-order bias and variance expansions of the Bernstein estimator and
//! the degree that balances them.
//!
//! For a copula `C` with partial derivatives, the pointwise Bernstein bias is
//! `b(u,v)/m` and the variance gain over the empirical copula is
//! `V(u,v)/(n√m)`. Integrating both over `[0,p]²` with the operator
//! `T_p(f) = D(p)⁻¹ ∫_{[0,p]²} f` gives the MSE trade-off of the tail rho
//! estimator, minimized at `m_opt = {4 T_p(b)² n / T_p(V)}^{2/3}`.

use std::f64::consts::PI;

use crate::copula::CopulaPartials;
use crate::error::{check_threshold, check_unit, Error, Result};
use crate::estimators::{normalizer_unchecked, rule_of_thumb_degree};
use crate::quad::adaptive_square;

/// Default absolute tolerance for [`t_p`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Below this magnitude `T_p(b)` is treated as zero.
pub const DEGENERATE_BIAS: f64 = 1e-12;

fn check_point(u: f64, v: f64) -> Result<()> {
    check_unit("u", u)?;
    check_unit("v", v)
}

/// `b(u,v) = ½{u(1−u) C_uu + v(1−v) C_vv}`.
pub fn bias_coeff(c: &impl CopulaPartials, u: f64, v: f64) -> Result<f64> {
    check_point(u, v)?;
    let d = c.partials(u, v);
    Ok(0.5 * (u * (1.0 - u) * d.c_uu + v * (1.0 - v) * d.c_vv))
}

/// `V(u,v) = C_u(1−C_u)√(u(1−u)/π) + C_v(1−C_v)√(v(1−v)/π)`.
pub fn var_gain(c: &impl CopulaPartials, u: f64, v: f64) -> Result<f64> {
    check_point(u, v)?;
    let d = c.partials(u, v);
    let su = (u * (1.0 - u) / PI).sqrt();
    let sv = (v * (1.0 - v) / PI).sqrt();
    Ok(d.c_u * (1.0 - d.c_u) * su + d.c_v * (1.0 - d.c_v) * sv)
}

/// Asymptotic variance of `√n C_n(u,v)`.
pub fn sigma2_pointwise(c: &impl CopulaPartials, u: f64, v: f64) -> Result<f64> {
    check_point(u, v)?;
    let cv = c.cdf(u, v);
    let d = c.partials(u, v);
    Ok(
        cv * (1.0 - cv) + u * (1.0 - u) * d.c_u * d.c_u + v * (1.0 - v) * d.c_v * d.c_v
            - 2.0 * (1.0 - u) * cv * d.c_u
            - 2.0 * (1.0 - v) * cv * d.c_v
            + 2.0 * d.c_u * d.c_v * (cv - u * v),
    )
}

/// `T_p(f) = D(p)⁻¹ ∫_{[0,p]²} f`, with `tol` an absolute target on the result.
pub fn t_p(f: impl Fn(f64, f64) -> f64, p: f64, tol: f64) -> Result<f64> {
    check_threshold(p)?;
    let d = normalizer_unchecked(p);
    Ok(adaptive_square(f, p, tol * d)? / d)
}

fn integrated_coeffs(c: &impl CopulaPartials, p: f64) -> Result<(f64, f64)> {
    let t_b = t_p(
        |u, v| bias_coeff(c, u, v).unwrap_or(f64::NAN),
        p,
        DEFAULT_TOL,
    )?;
    let t_v = t_p(|u, v| var_gain(c, u, v).unwrap_or(f64::NAN), p, DEFAULT_TOL)?;
    Ok((t_b, t_v))
}

fn m_opt_from(t_b: f64, t_v: f64, n: usize) -> Result<f64> {
    if t_b.abs() < DEGENERATE_BIAS || t_v <= 0.0 {
        return Err(Error::DegenerateBias { t_b });
    }
    Ok((4.0 * t_b * t_b / t_v * n as f64).powf(2.0 / 3.0))
}

/// Real-valued MSE-optimal degree; callers floor it. Fails with
/// [`Error::DegenerateBias`] when `T_p(b)` vanishes.
pub fn optimal_degree(c: &impl CopulaPartials, p: f64, n: usize) -> Result<f64> {
    check_threshold(p)?;
    check_n(n)?;
    let (t_b, t_v) = integrated_coeffs(c, p)?;
    m_opt_from(t_b, t_v, n)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::TooFewObservations { min: 1, got: 0 });
    }
    Ok(())
}

/// First-order MSE of both estimators at degree `m`.
///
/// `difference` is always available; the absolute levels need `σ_p²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseExpansion {
    pub difference: f64,
    pub bernstein: Option<f64>,
    pub empirical: Option<f64>,
}

pub fn mse_expansion_from(
    t_b: f64,
    t_v: f64,
    n: usize,
    m: usize,
    sigma_p2: Option<f64>,
) -> MseExpansion {
    let (nf, mf) = (n as f64, m as f64);
    let difference = -t_v / (nf * mf.sqrt()) + (t_b / mf).powi(2);
    let empirical = sigma_p2.map(|s| s / nf);
    MseExpansion {
        difference,
        bernstein: empirical.map(|e| e + difference),
        empirical,
    }
}

pub fn mse_expansions(
    c: &impl CopulaPartials,
    p: f64,
    n: usize,
    m: usize,
    sigma_p2: Option<f64>,
) -> Result<MseExpansion> {
    check_threshold(p)?;
    check_n(n)?;
    crate::error::check_degree(m)?;
    let (t_b, t_v) = integrated_coeffs(c, p)?;
    Ok(mse_expansion_from(t_b, t_v, n, m, sigma_p2))
}

/// All asymptotic quantities for one `(C, p, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub p: f64,
    pub n: usize,
    pub t_p_b: f64,
    pub t_p_v: f64,
    /// `None` when the bias term is degenerate.
    pub m_opt: Option<f64>,
    pub rule_of_thumb: usize,
    pub mse_at_rule_of_thumb: MseExpansion,
    /// Expansion at `max(1, ⌊m_opt⌋)`.
    pub mse_at_optimal: Option<(usize, MseExpansion)>,
    pub sigma_p2_mc: Option<f64>,
}

impl AsymptoticReport {
    pub fn new(
        c: &impl CopulaPartials,
        p: f64,
        n: usize,
        sigma_p2_mc: Option<f64>,
    ) -> Result<Self> {
        check_threshold(p)?;
        check_n(n)?;
        let (t_p_b, t_p_v) = integrated_coeffs(c, p)?;
        let m_opt = m_opt_from(t_p_b, t_p_v, n).ok();
        let rule_of_thumb = rule_of_thumb_degree(n);
        let mse_at_optimal = m_opt.map(|m| {
            let m = (m.floor() as usize).max(1);
            (m, mse_expansion_from(t_p_b, t_p_v, n, m, sigma_p2_mc))
        });
        Ok(Self {
            p,
            n,
            t_p_b,
            t_p_v,
            m_opt,
            rule_of_thumb,
            mse_at_rule_of_thumb: mse_expansion_from(t_p_b, t_p_v, n, rule_of_thumb, sigma_p2_mc),
            mse_at_optimal,
            sigma_p2_mc,
        })
    }

    /// Degree to use in practice: `⌊m_opt⌋`, or the rule of thumb when the
    /// bias term is degenerate.
    pub fn degree(&self) -> usize {
        self.mse_at_optimal
            .map(|(m, _)| m)
            .unwrap_or(self.rule_of_thumb)
    }
}
