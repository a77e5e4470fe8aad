//! Rank transformation, the empirical copula and its Bernstein smoothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_degree, check_unit, Error, Margin, Result};
use crate::special::binomial_pmf;

/// A bivariate copula that can be evaluated pointwise.
pub trait Copula {
    fn cdf(&self, u: f64, v: f64) -> f64;
}

/// First and second partial derivatives of a copula at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub c_u: f64,
    pub c_v: f64,
    pub c_uu: f64,
    pub c_vv: f64,
}

/// A copula with analytic partial derivatives.
pub trait CopulaPartials: Copula {
    fn partials(&self, u: f64, v: f64) -> Partials;
}

/// Independence copula `Π(u,v) = uv`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Independence;

impl Copula for Independence {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v
    }
}

impl CopulaPartials for Independence {
    fn partials(&self, u: f64, v: f64) -> Partials {
        Partials {
            c_u: v,
            c_v: u,
            c_uu: 0.0,
            c_vv: 0.0,
        }
    }
}

/// Fréchet–Hoeffding upper bound `M(u,v) = min(u,v)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpperBound;

impl Copula for UpperBound {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u.min(v)
    }
}

/// Raw bivariate observations `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Sample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Config(format!(
                "margins differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::TooFewObservations { min: 1, got: 0 });
        }
        if let Some(index) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { xs, ys })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Self::new(xs, ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Breaks ties by adding seeded noise in `[0, g/2)` to every value of a
    /// tied margin, `g` being that margin's smallest nonzero gap. Distinct
    /// values keep their order; margins without ties are returned unchanged.
    pub fn jittered(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = jitter_margin(&self.xs, &mut rng);
        let ys = jitter_margin(&self.ys, &mut rng);
        Self { xs, ys }
    }
}

fn jitter_margin(values: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut has_ties = false;
    let mut gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if d == 0.0 {
            has_ties = true;
        } else {
            gap = gap.min(d);
        }
    }
    if !has_ties {
        return values.to_vec();
    }
    if !gap.is_finite() {
        // every value identical
        gap = sorted[0].abs().max(1.0) * 1e-9;
    }
    let amplitude = 0.5 * gap;
    values
        .iter()
        .map(|&x| x + amplitude * rng.random::<f64>())
        .collect()
}

/// Denominator used to map ranks into the unit interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Scaling {
    /// `U_i = R_i / n`, the empirical distribution function at the data.
    #[default]
    N,
    /// `U_i = R_i / (n + 1)`, which keeps every `U_i` inside `(0, 1)` and
    /// makes `E[U_i] = 1/2` exactly.
    NPlusOne,
}

/// Rank-transformed sample: `U_i = R_i / d`, `V_i = S_i / d` with `d = n`
/// or `n + 1` according to its [`Scaling`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoSample {
    x_ranks: Vec<u32>,
    y_ranks: Vec<u32>,
    scaling: Scaling,
}

fn ranks(values: &[f64], margin: Margin) -> Result<Vec<u32>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    if order.windows(2).any(|w| values[w[0]] == values[w[1]]) {
        return Err(Error::Ties { margin });
    }
    let mut out = vec![0u32; values.len()];
    for (r, &i) in order.iter().enumerate() {
        out[i] = r as u32 + 1;
    }
    Ok(out)
}

impl PseudoSample {
    /// Builds from 1-based ranks; each margin must be a permutation of `1..=n`.
    pub fn from_ranks(x_ranks: Vec<u32>, y_ranks: Vec<u32>) -> Result<Self> {
        let n = x_ranks.len();
        if n != y_ranks.len() {
            return Err(Error::Config("rank vectors differ in length".into()));
        }
        if n == 0 {
            return Err(Error::TooFewObservations { min: 1, got: 0 });
        }
        for (margin, r) in [(Margin::X, &x_ranks), (Margin::Y, &y_ranks)] {
            let mut seen = vec![false; n];
            for &k in r.iter() {
                let k = k as usize;
                if k == 0 || k > n || seen[k - 1] {
                    return Err(Error::Ties { margin });
                }
                seen[k - 1] = true;
            }
        }
        Ok(Self {
            x_ranks,
            y_ranks,
            scaling: Scaling::N,
        })
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    /// `n` or `n + 1`.
    pub fn denominator(&self) -> usize {
        match self.scaling {
            Scaling::N => self.len(),
            Scaling::NPlusOne => self.len() + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.x_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_ranks.is_empty()
    }

    pub fn x_ranks(&self) -> &[u32] {
        &self.x_ranks
    }

    pub fn y_ranks(&self) -> &[u32] {
        &self.y_ranks
    }

    /// Iterator over `(U_i, V_i)`.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let d = self.denominator() as f64;
        self.x_ranks
            .iter()
            .zip(&self.y_ranks)
            .map(move |(&r, &s)| (r as f64 / d, s as f64 / d))
    }
}

/// Rank transform of both margins with `U_i = R_i / n`. Ties are rejected
/// rather than averaged.
pub fn pseudo_observations(sample: &Sample) -> Result<PseudoSample> {
    pseudo_observations_scaled(sample, Scaling::N)
}

pub fn pseudo_observations_scaled(sample: &Sample, scaling: Scaling) -> Result<PseudoSample> {
    Ok(PseudoSample {
        x_ranks: ranks(sample.xs(), Margin::X)?,
        y_ranks: ranks(sample.ys(), Margin::Y)?,
        scaling,
    })
}

/// `C_n(u,v) = n⁻¹ #{i : U_i ≤ u, V_i ≤ v}`.
pub fn empirical_copula(ps: &PseudoSample, u: f64, v: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("v", v)?;
    let count = ps.pairs().filter(|&(a, b)| a <= u && b <= v).count();
    Ok(count as f64 / ps.len() as f64)
}

/// `(m+1) × (m+1)` table of copula values at the lattice `(k/m, ℓ/m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaGrid {
    m: usize,
    values: Vec<f64>,
}

impl CopulaGrid {
    /// Empirical copula on the lattice, by counting each observation into the
    /// first lattice cell that contains it and taking 2-D prefix sums.
    pub fn empirical(ps: &PseudoSample, m: usize) -> Result<Self> {
        check_degree(m)?;
        let n = ps.len();
        let side = m + 1;
        let mut counts = vec![0u32; side * side];
        // R/d <= k/m  <=>  R*m <= k*d, so the first admissible k is ceil(R*m/d)
        let d = ps.denominator();
        let bucket = |r: u32| (r as usize * m).div_ceil(d);
        for (&r, &s) in ps.x_ranks().iter().zip(ps.y_ranks()) {
            counts[bucket(r) * side + bucket(s)] += 1;
        }
        for k in 0..side {
            for l in 1..side {
                counts[k * side + l] += counts[k * side + l - 1];
            }
        }
        for k in 1..side {
            for l in 0..side {
                counts[k * side + l] += counts[(k - 1) * side + l];
            }
        }
        let nf = n as f64;
        Ok(Self {
            m,
            values: counts.into_iter().map(|c| c as f64 / nf).collect(),
        })
    }

    /// Lattice values of an arbitrary copula.
    pub fn from_copula(c: &impl Copula, m: usize) -> Result<Self> {
        check_degree(m)?;
        let mf = m as f64;
        let mut values = Vec::with_capacity((m + 1) * (m + 1));
        for k in 0..=m {
            for l in 0..=m {
                values.push(c.cdf(k as f64 / mf, l as f64 / mf));
            }
        }
        Ok(Self { m, values })
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * (self.m + 1) + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let side = self.m + 1;
        &self.values[k * side..(k + 1) * side]
    }

    /// Quadratic form `Σ_{k,ℓ} G[k][ℓ] a_k b_ℓ`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.m + 1);
        debug_assert_eq!(b.len(), self.m + 1);
        a.iter()
            .enumerate()
            .map(|(k, &ak)| {
                if ak == 0.0 {
                    return 0.0;
                }
                ak * self.row(k).iter().zip(b).map(|(g, bl)| g * bl).sum::<f64>()
            })
            .sum()
    }
}

/// Shorthand for [`CopulaGrid::empirical`].
pub fn copula_grid(ps: &PseudoSample, m: usize) -> Result<CopulaGrid> {
    CopulaGrid::empirical(ps, m)
}

/// Bernstein smoothing `Σ_k Σ_ℓ G[k][ℓ] P_{k,m}(u) P_{ℓ,m}(v)`.
pub fn bernstein_copula(grid: &CopulaGrid, u: f64, v: f64) -> Result<f64> {
    check_unit("u", u)?;
    check_unit("v", v)?;
    let pu = binomial_pmf(grid.degree(), u);
    let pv = binomial_pmf(grid.degree(), v);
    Ok(grid.bilinear(&pu, &pv))
}

/// A grid viewed as a smooth copula through Bernstein interpolation.
#[derive(Debug, Clone)]
pub struct BernsteinCopula<'a>(pub &'a CopulaGrid);

impl Copula for BernsteinCopula<'_> {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let pu = binomial_pmf(self.0.degree(), u.clamp(0.0, 1.0));
        let pv = binomial_pmf(self.0.degree(), v.clamp(0.0, 1.0));
        self.0.bilinear(&pu, &pv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(pairs: &[(f64, f64)]) -> PseudoSample {
        pseudo_observations(&Sample::from_pairs(pairs).unwrap()).unwrap()
    }

    fn random_ps(n: usize, rng: &mut ChaCha8Rng) -> PseudoSample {
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x: f64 = rng.random();
                (x, 0.5 * x + rng.random::<f64>())
            })
            .collect();
        ps(&pairs)
    }

    #[test]
    fn ranks_of_small_samples() {
        let p = ps(&[(1.0, 1.0), (2.0, 2.0)]);
        let got: Vec<_> = p.pairs().collect();
        assert_eq!(got, vec![(0.5, 0.5), (1.0, 1.0)]);

        let p = ps(&[(3.0, 9.0), (1.0, 7.0), (2.0, 8.0)]);
        assert_eq!(p.x_ranks(), &[3, 1, 2]);
        assert_eq!(p.y_ranks(), &[3, 1, 2]);
        let u: Vec<f64> = p.pairs().map(|(u, _)| u).collect();
        assert_eq!(u, vec![1.0, 1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn ties_are_rejected() {
        let s = Sample::from_pairs(&[(1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(
            pseudo_observations(&s).unwrap_err(),
            Error::Ties { margin: Margin::X }
        );
        let s = Sample::from_pairs(&[(1.0, 5.0), (2.0, 5.0)]).unwrap();
        assert_eq!(
            pseudo_observations(&s).unwrap_err(),
            Error::Ties { margin: Margin::Y }
        );
    }

    #[test]
    fn sample_validation() {
        assert!(Sample::new(vec![], vec![]).is_err());
        assert!(Sample::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert_eq!(
            Sample::from_pairs(&[(1.0, 2.0), (f64::NAN, 1.0)]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
        assert!(PseudoSample::from_ranks(vec![1, 1], vec![1, 2]).is_err());
        assert!(PseudoSample::from_ranks(vec![1, 3], vec![1, 2]).is_err());
    }

    #[test]
    fn jitter_breaks_ties_and_keeps_order() {
        let s = Sample::from_pairs(&[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0), (1.5, 4.0)]).unwrap();
        let j = s.jittered(7);
        assert_eq!(j.ys(), s.ys());
        let p = pseudo_observations(&j).unwrap();
        // 2.0 stays the largest, 1.5 second largest
        assert_eq!(p.x_ranks()[2], 4);
        assert_eq!(p.x_ranks()[3], 3);
        assert_eq!(j, s.jittered(7));

        let flat = Sample::from_pairs(&[(3.0, 1.0), (3.0, 2.0), (3.0, 0.0)]).unwrap();
        assert!(pseudo_observations(&flat.jittered(1)).is_ok());
    }

    #[test]
    fn empirical_copula_examples() {
        let p = ps(&[(1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(empirical_copula(&p, 0.5, 0.5).unwrap(), 0.5);
        assert_eq!(empirical_copula(&p, 0.0, 0.7).unwrap(), 0.0);
        assert_eq!(empirical_copula(&p, 1.0, 1.0).unwrap(), 1.0);
        assert!(empirical_copula(&p, 1.2, 0.5).is_err());
        assert!(empirical_copula(&p, 0.2, -0.5).is_err());
    }

    #[test]
    fn grid_examples() {
        let p = ps(&[(1.0, 1.0), (2.0, 2.0)]);
        let g = copula_grid(&p, 2).unwrap();
        assert_eq!(g.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(g.row(1), &[0.0, 0.5, 0.5]);
        assert_eq!(g.row(2), &[0.0, 0.5, 1.0]);

        let p = ps(&[(0.3, 2.0), (0.1, 5.0), (0.7, 1.0)]);
        let g = copula_grid(&p, 1).unwrap();
        assert_eq!(g.row(0), &[0.0, 0.0]);
        assert_eq!(g.row(1), &[0.0, 1.0]);
        assert!(copula_grid(&p, 0).is_err());
    }

    #[test]
    fn grid_matches_pointwise_and_is_a_copula_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..200 {
            let n = 25;
            let m = 13;
            let scaling = if i % 2 == 0 {
                Scaling::N
            } else {
                Scaling::NPlusOne
            };
            let p = random_ps(n, &mut rng).with_scaling(scaling);
            let g = copula_grid(&p, m).unwrap();
            for k in 0..=m {
                for l in 0..=m {
                    let direct =
                        empirical_copula(&p, k as f64 / m as f64, l as f64 / m as f64).unwrap();
                    assert_eq!(g.get(k, l), direct);
                    let scaled = g.get(k, l) * n as f64;
                    assert!((scaled - scaled.round()).abs() < 1e-9);
                    if k < m && l < m {
                        let vol =
                            g.get(k + 1, l + 1) - g.get(k + 1, l) - g.get(k, l + 1) + g.get(k, l);
                        assert!(vol >= -1e-15);
                    }
                }
            }
            assert_eq!(g.get(m, m), 1.0);
            if scaling == Scaling::NPlusOne {
                // no pseudo-observation reaches 1
                assert_eq!(
                    g.get(m - 1, m),
                    empirical_copula(&p, (m - 1) as f64 / m as f64, 0.999).unwrap()
                );
            }
            assert!((0..=m).all(|i| g.get(0, i) == 0.0 && g.get(i, 0) == 0.0));
        }
    }

    #[test]
    fn grid_counts_exact_lattice_boundaries() {
        // n = 6, m = 3: ranks 2, 4, 6 sit exactly on k/m
        let p = PseudoSample::from_ranks(vec![1, 2, 3, 4, 5, 6], vec![6, 5, 4, 3, 2, 1]).unwrap();
        for m in [1, 2, 3, 6, 12] {
            let g = copula_grid(&p, m).unwrap();
            for k in 0..=m {
                for l in 0..=m {
                    let direct =
                        empirical_copula(&p, k as f64 / m as f64, l as f64 / m as f64).unwrap();
                    assert_eq!(g.get(k, l), direct, "m={m} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn scaling_plus_one() {
        let s = Sample::from_pairs(&[(1.0, 1.0), (2.0, 2.0)]).unwrap();
        let p = pseudo_observations_scaled(&s, Scaling::NPlusOne).unwrap();
        assert_eq!(p.denominator(), 3);
        let got: Vec<_> = p.pairs().collect();
        assert_eq!(got, vec![(1.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0)]);
        assert_eq!(
            pseudo_observations(&s)
                .unwrap()
                .with_scaling(Scaling::NPlusOne),
            p
        );

        // n = 5, d = 6, m = 3: ranks 2 and 4 sit exactly on k/m
        let p = PseudoSample::from_ranks(vec![1, 2, 3, 4, 5], vec![5, 4, 3, 2, 1])
            .unwrap()
            .with_scaling(Scaling::NPlusOne);
        for m in [1, 2, 3, 6, 12] {
            let g = copula_grid(&p, m).unwrap();
            for k in 0..=m {
                for l in 0..=m {
                    let direct =
                        empirical_copula(&p, k as f64 / m as f64, l as f64 / m as f64).unwrap();
                    assert_eq!(g.get(k, l), direct, "m={m} k={k} l={l}");
                }
            }
        }
    }

    fn brute_bernstein(g: &CopulaGrid, u: f64, v: f64) -> f64 {
        let m = g.degree();
        let binom = |k: usize| (0..k).fold(1.0, |a, i| a * (m - i) as f64 / (i + 1) as f64);
        let mut s = 0.0;
        for k in 0..=m {
            for l in 0..=m {
                let pk = binom(k) * u.powi(k as i32) * (1.0 - u).powi((m - k) as i32);
                let pl = binom(l) * v.powi(l as i32) * (1.0 - v).powi((m - l) as i32);
                s += g.get(k, l) * pk * pl;
            }
        }
        s
    }

    #[test]
    fn bernstein_examples() {
        let p = ps(&[(1.0, 1.0), (2.0, 2.0)]);
        let g = copula_grid(&p, 2).unwrap();
        assert_eq!(bernstein_copula(&g, 0.0, 0.4).unwrap(), 0.0);
        assert!((bernstein_copula(&g, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let got = bernstein_copula(&g, 0.5, 0.5).unwrap();
        // P_1 = 0.5, P_2 = 0.25 at w = 0.5: 0.5*(0.25+0.125+0.125) + 1*0.0625
        assert!((got - 0.3125).abs() < 1e-14);
        assert!((got - brute_bernstein(&g, 0.5, 0.5)).abs() < 1e-14);
        assert!(bernstein_copula(&g, -0.1, 0.5).is_err());
    }

    #[test]
    fn bernstein_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = random_ps(30, &mut rng);
            let g = copula_grid(&p, 9).unwrap();
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            let got = bernstein_copula(&g, u, v).unwrap();
            assert!((got - brute_bernstein(&g, u, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn bernstein_dominated_by_smoothed_upper_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let p = random_ps(40, &mut rng);
            let m = 11;
            let g = copula_grid(&p, m).unwrap();
            let gm = CopulaGrid::from_copula(&UpperBound, m).unwrap();
            for i in 0..=100 {
                for j in 0..=100 {
                    let (u, v) = (i as f64 / 100.0, j as f64 / 100.0);
                    let c = bernstein_copula(&g, u, v).unwrap();
                    let bm = bernstein_copula(&gm, u, v).unwrap();
                    assert!(c <= bm + 1e-14);
                    assert!(bm <= u.min(v) + 1e-14);
                    assert!((-1e-15..=1.0 + 1e-15).contains(&c));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bernstein_monotone_in_u(seed in 0u64..1000, m in 1usize..25,
                                       v in 0.0f64..=1.0, u0 in 0.0f64..=1.0, du in 0.0f64..0.5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = random_ps(20, &mut rng);
                let g = copula_grid(&p, m).unwrap();
                let u1 = (u0 + du).min(1.0);
                let a = bernstein_copula(&g, u0, v).unwrap();
                let b = bernstein_copula(&g, u1, v).unwrap();
                prop_assert!(a <= b + 1e-14);
            }

            #[test]
            fn ranks_are_permutations(values in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..60)) {
                let s = Sample::from_pairs(&values).unwrap();
                if let Ok(p) = pseudo_observations(&s) {
                    let mut r = p.x_ranks().to_vec();
                    r.sort_unstable();
                    prop_assert_eq!(r, (1..=values.len() as u32).collect::<Vec<_>>());
                    prop_assert!(p.pairs().all(|(u, v)| u > 0.0 && u <= 1.0 && v > 0.0 && v <= 1.0));
                }
            }
        }
    }
}
