//! Farlie–Gumbel–Morgenstern copula `C_θ(u,v) = uv{1 + θ(1−u)(1−v)}`.

use rand::Rng;

use crate::copula::{Copula, CopulaPartials, Partials, Sample};
use crate::error::{check_threshold, check_unit, Error, Result};
use crate::estimators::normalizer_unchecked;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fgm {
    theta: f64,
}

impl Fgm {
    pub fn new(theta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::Domain {
                name: "theta",
                value: theta,
                expected: "[-1, 1]",
            });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn checked_cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.cdf(u, v))
    }

    pub fn checked_partials(&self, u: f64, v: f64) -> Result<Partials> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.partials(u, v))
    }

    pub fn density(&self, u: f64, v: f64) -> f64 {
        1.0 + self.theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)
    }

    /// Conditional inversion: solves `C_u(u, v) = t` for `v`, where
    /// `C_u(u, v) = v + a v (1 − v)` with `a = θ(1 − 2u)`.
    pub fn invert_conditional(&self, u: f64, t: f64) -> f64 {
        let a = self.theta * (1.0 - 2.0 * u);
        if a.abs() < 1e-12 {
            return t;
        }
        // smaller root of a v² − (1+a) v + t = 0, rationalized
        let b = 1.0 + a;
        let disc = (b * b - 4.0 * a * t).max(0.0);
        (2.0 * t / (b + disc.sqrt())).clamp(0.0, 1.0)
    }

    /// Draws `n` i.i.d. pairs with copula `C_θ`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<(f64, f64)> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let t: f64 = rng.random();
                (u, self.invert_conditional(u, t))
            })
            .collect()
    }

    pub fn sample_data<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample> {
        Sample::from_pairs(&self.sample(n, rng))
    }

    /// `ρ(p) = θ (p²/2 − p³/3)² / D(p)`.
    pub fn rho_tail_analytic(&self, p: f64) -> Result<f64> {
        check_threshold(p)?;
        Ok(self.theta * margin_moment(p).powi(2) / normalizer_unchecked(p))
    }

    /// `T_p(b) = −2θ (p²/2 − p³/3)² / D(p)`, the integrated bias coefficient.
    pub fn integrated_bias_coeff(&self, p: f64) -> Result<f64> {
        check_threshold(p)?;
        Ok(-2.0 * self.theta * margin_moment(p).powi(2) / normalizer_unchecked(p))
    }
}

/// `∫_0^p u(1 − u) du`.
fn margin_moment(p: f64) -> f64 {
    p * p / 2.0 - p * p * p / 3.0
}

impl Copula for Fgm {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v * (1.0 + self.theta * (1.0 - u) * (1.0 - v))
    }
}

impl CopulaPartials for Fgm {
    fn partials(&self, u: f64, v: f64) -> Partials {
        let th = self.theta;
        Partials {
            c_u: v + th * v * (1.0 - v) * (1.0 - 2.0 * u),
            c_v: u + th * u * (1.0 - u) * (1.0 - 2.0 * v),
            c_uu: -2.0 * th * v * (1.0 - v),
            c_vv: -2.0 * th * u * (1.0 - u),
        }
    }
}
