//! Gauss–Legendre quadrature over `[0,p]²`.
//!
//! Two drivers are provided: a tensor-product rule with panel doubling for
//! smooth integrands, and an iterated adaptive rule (bisection in each axis)
//! for integrands with square-root behaviour at the edges of the square.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and its derivative
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule mapped to `[a, b]`, yielding `(abscissa, weight)` pairs.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Tuning for [`tensor_doubling`].
#[derive(Debug, Clone, Copy)]
pub struct TensorRule {
    pub nodes: usize,
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for TensorRule {
    fn default() -> Self {
        Self {
            nodes: 64,
            tol: 1e-10,
            max_panels: 64,
        }
    }
}

fn tensor_panels(rule: &GaussLegendre, f: &impl Fn(f64, f64) -> f64, p: f64, panels: usize) -> f64 {
    let h = p / panels as f64;
    let points: Vec<(f64, f64)> = (0..panels)
        .flat_map(|j| {
            rule.mapped(j as f64 * h, (j + 1) as f64 * h)
                .collect::<Vec<_>>()
        })
        .collect();
    points
        .iter()
        .map(|&(u, wu)| wu * points.iter().map(|&(v, wv)| wv * f(u, v)).sum::<f64>())
        .sum()
}

/// `∫_{[0,p]²} f` by tensor Gauss–Legendre panels, doubling the panel count
/// per axis until successive estimates differ by less than `rule.tol`.
pub fn tensor_doubling(f: impl Fn(f64, f64) -> f64, p: f64, rule: TensorRule) -> Result<f64> {
    let gl = GaussLegendre::new(rule.nodes);
    let mut panels = 1;
    let mut prev = tensor_panels(&gl, &f, p, panels);
    let mut change = f64::INFINITY;
    while panels < rule.max_panels {
        panels *= 2;
        let next = tensor_panels(&gl, &f, p, panels);
        change = (next - prev).abs();
        if change < rule.tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        tol: rule.tol,
        last_change: change,
    })
}

const ADAPTIVE_NODES: usize = 20;
const MAX_INTERVALS: usize = 20_000;
// relative error treated as converged regardless of the absolute target
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

struct Interval {
    a: f64,
    b: f64,
    fine: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

struct Adaptive {
    rule: GaussLegendre,
}

impl Adaptive {
    fn interval(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, coarse: f64) -> Interval {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, mid);
        let right = self.rule.integrate(f, mid, b);
        let fine = left + right;
        Interval {
            a,
            b,
            fine,
            err: (fine - coarse).abs(),
        }
    }

    /// Globally adaptive bisection: always splits the interval with the
    /// largest error estimate until the summed estimate meets `tol`.
    fn integrate(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        let coarse = self.rule.integrate(f, a, b);
        let mut heap = std::collections::BinaryHeap::new();
        heap.push(self.interval(f, a, b, coarse));
        loop {
            let (total, err) = heap.iter().fold((0.0, 0.0), |(s, e), iv: &Interval| {
                (s + iv.fine, e + iv.err)
            });
            if err <= tol || err <= ROUNDOFF * total.abs() {
                return Ok(total);
            }
            if heap.len() >= MAX_INTERVALS || !err.is_finite() {
                return Err(Error::NonConvergence {
                    tol,
                    last_change: err,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            let left = self.rule.integrate(f, worst.a, mid);
            let right = self.rule.integrate(f, mid, worst.b);
            heap.push(self.interval(f, worst.a, mid, left));
            heap.push(self.interval(f, mid, worst.b, right));
        }
    }
}

/// `∫_{[0,p]²} f` as an iterated integral, each axis integrated by adaptive
/// bisection with a 20-point Gauss–Legendre rule. `tol` is an absolute
/// target on the final value. Abscissae are always interior to the square.
pub fn adaptive_square(f: impl Fn(f64, f64) -> f64, p: f64, tol: f64) -> Result<f64> {
    let engine = Adaptive {
        rule: GaussLegendre::new(ADAPTIVE_NODES),
    };
    let inner_tol = 0.25 * tol / p.max(1e-300);
    let mut failure = None;
    // the inner axis is split on the diagonal, where copula functionals
    // built from min(u, v) have a kink
    let mut outer = |u: f64| {
        let lower = engine.integrate(&mut |v| f(u, v), 0.0, u, 0.5 * inner_tol);
        let upper = engine.integrate(&mut |v| f(u, v), u, p, 0.5 * inner_tol);
        match lower.and_then(|a| upper.map(|b| a + b)) {
            Ok(x) => x,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let value = engine.integrate(&mut outer, 0.0, p, 0.5 * tol);
    if let Some(e) = failure {
        return Err(e);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 20, 64] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            let e = 2 * n - 2;
            let exact = 2.0 / (e + 1) as f64;
            let got = gl.integrate(&mut |x| x.powi(e as i32) + x.powi(e as i32 + 1), -1.0, 1.0);
            assert!((got - exact).abs() < 1e-13, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_interior() {
        let gl = GaussLegendre::new(64);
        assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(gl.nodes().iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn tensor_rule_on_polynomial() {
        let got = tensor_doubling(|u, v| u * v * v, 0.5, TensorRule::default()).unwrap();
        let exact = 0.125 * (0.125 / 3.0);
        assert!((got - exact).abs() < 1e-15);
    }

    #[test]
    fn tensor_rule_reports_nonconvergence() {
        let rule = TensorRule {
            nodes: 2,
            tol: 1e-15,
            max_panels: 4,
        };
        let err = tensor_doubling(|u, v| (u * v).sqrt(), 1.0, rule).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn adaptive_handles_sqrt_edges() {
        let f = |u: f64, v: f64| (u * (1.0 - u)).sqrt() + (v * (1.0 - v)).sqrt();
        let got = adaptive_square(f, 1.0, 1e-11).unwrap();
        let exact = 2.0 * std::f64::consts::PI / 8.0;
        assert!((got - exact).abs() < 1e-11, "{got} vs {exact}");
    }
}
