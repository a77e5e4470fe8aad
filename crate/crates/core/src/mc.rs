//! Monte Carlo comparison of the empirical and Bernstein tail rho estimators
//! under the FGM model.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! `(seed, cell, replicate)`, and per-replicate results are reduced in index
//! order, so summaries are bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::copula::{pseudo_observations_scaled, PseudoSample, Sample, Scaling};
use crate::error::{check_degree, check_threshold, Error, Result};
use crate::estimators::{rho_hat_bernstein_with, rho_hat_empirical, rule_of_thumb_degree};
use crate::fgm::Fgm;
use crate::special::TailWeights;

/// Default replicate count.
pub const DEFAULT_REPS: usize = 10_000;
/// Default master seed.
pub const DEFAULT_SEED: u64 = 42;

/// Rank scaling used for simulated samples. With `R/(n+1)` the empirical
/// estimator is unbiased at `p = 1` under independence; `R/n` carries an
/// `O(1/n)` bias there that dominates small-sample comparisons.
pub const SIMULATION_SCALING: Scaling = Scaling::NPlusOne;

/// RNG for one replicate of one cell.
pub fn replicate_rng(seed: u64, cell: u64, replicate: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&cell.to_le_bytes());
    key[16..24].copy_from_slice(&replicate.to_le_bytes());
    key[24..].copy_from_slice(b"tailrho\0");
    ChaCha8Rng::from_seed(key)
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    xs.for_each(|x| acc.add(x));
    acc.total()
}

/// Bias, variance and MSE of a set of replicate estimates against a truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub mean: f64,
    pub abs_bias: f64,
    /// Sample variance with the `K − 1` divisor; `None` when `K = 1`.
    pub variance: Option<f64>,
    /// Mean squared deviation from the truth, `1/K` divisor.
    pub mse: f64,
    /// Monte Carlo standard error of `mse`; `None` when `K = 1`.
    pub mse_se: Option<f64>,
}

impl ErrorSummary {
    pub fn new(estimates: &[f64], truth: f64) -> Self {
        let k = estimates.len();
        assert!(k >= 1, "at least one replicate is required");
        let kf = k as f64;
        let mean = compensated_sum(estimates.iter().copied()) / kf;
        let mse = compensated_sum(estimates.iter().map(|x| (x - truth).powi(2))) / kf;
        let (variance, mse_se) = if k > 1 {
            let ss = compensated_sum(estimates.iter().map(|x| (x - mean).powi(2)));
            let sq_dev = compensated_sum(
                estimates
                    .iter()
                    .map(|x| ((x - truth).powi(2) - mse).powi(2)),
            );
            (
                Some(ss / (kf - 1.0)),
                Some((sq_dev / (kf - 1.0) / kf).sqrt()),
            )
        } else {
            (None, None)
        };
        Self {
            mean,
            abs_bias: (mean - truth).abs(),
            variance,
            mse,
            mse_se,
        }
    }
}

/// One `(θ, n, p, m)` configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub theta: f64,
    pub n: usize,
    pub p: f64,
    pub m: usize,
}

impl CellSpec {
    fn validate(&self) -> Result<()> {
        Fgm::new(self.theta)?;
        check_threshold(self.p)?;
        check_degree(self.m)?;
        if self.n < 2 {
            return Err(Error::TooFewObservations {
                min: 2,
                got: self.n,
            });
        }
        Ok(())
    }
}

/// Per-cell Monte Carlo summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub theta: f64,
    pub n: usize,
    pub p: f64,
    pub m: usize,
    pub reps: usize,
    /// `ρ(p)` of the generating model.
    pub truth: f64,
    pub empirical: ErrorSummary,
    pub bernstein: ErrorSummary,
}

impl CellSummary {
    pub fn abs_bias_emp(&self) -> f64 {
        self.empirical.abs_bias
    }

    pub fn abs_bias_bern(&self) -> f64 {
        self.bernstein.abs_bias
    }

    pub fn var_emp(&self) -> Option<f64> {
        self.empirical.variance
    }

    pub fn var_bern(&self) -> Option<f64> {
        self.bernstein.variance
    }

    pub fn mse_emp(&self) -> f64 {
        self.empirical.mse
    }

    pub fn mse_bern(&self) -> f64 {
        self.bernstein.mse
    }

    /// `100 (1 − MSE_bern / MSE_emp)`, undefined when `MSE_emp = 0`.
    pub fn mse_reduction_pct(&self) -> Option<f64> {
        (self.mse_emp() > 0.0).then(|| 100.0 * (1.0 - self.mse_bern() / self.mse_emp()))
    }
}

/// Raw replicate estimates of one cell, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    pub spec: CellSpec,
    pub truth: f64,
    pub empirical: Vec<f64>,
    pub bernstein: Vec<f64>,
}

impl Replicates {
    pub fn summarize(&self) -> CellSummary {
        CellSummary {
            theta: self.spec.theta,
            n: self.spec.n,
            p: self.spec.p,
            m: self.spec.m,
            reps: self.empirical.len(),
            truth: self.truth,
            empirical: ErrorSummary::new(&self.empirical, self.truth),
            bernstein: ErrorSummary::new(&self.bernstein, self.truth),
        }
    }
}

fn draw_pseudo_sample(
    model: &Fgm,
    n: usize,
    seed: u64,
    cell: u64,
    rep: u64,
) -> Result<PseudoSample> {
    let mut rng = replicate_rng(seed, cell, rep);
    let (xs, ys) = model.sample(n, &mut rng).into_iter().unzip();
    pseudo_observations_scaled(&Sample::new(xs, ys)?, SIMULATION_SCALING)
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    Ok(())
}

/// Replicate estimates for one cell; `cell` selects the RNG stream family.
pub fn run_cell_replicates(
    spec: CellSpec,
    reps: usize,
    seed: u64,
    cell: u64,
) -> Result<Replicates> {
    spec.validate()?;
    check_reps(reps)?;
    let model = Fgm::new(spec.theta)?;
    let weights = TailWeights::new(spec.p, spec.m)?;
    let pairs = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let ps = draw_pseudo_sample(&model, spec.n, seed, cell, rep)?;
            let emp = rho_hat_empirical(&ps, spec.p)?.value;
            let bern = rho_hat_bernstein_with(&ps, &weights)?.value;
            Ok((emp, bern))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (empirical, bernstein) = pairs.into_iter().unzip();
    Ok(Replicates {
        spec,
        truth: model.rho_tail_analytic(spec.p)?,
        empirical,
        bernstein,
    })
}

/// Summary of one cell.
pub fn run_cell(spec: CellSpec, reps: usize, seed: u64, cell: u64) -> Result<CellSummary> {
    Ok(run_cell_replicates(spec, reps, seed, cell)?.summarize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeRule {
    /// `m = ⌊n^{2/3}⌋`.
    RuleOfThumb,
    Fixed(usize),
    /// Every `m` in `min..=max`, one row each.
    Sweep {
        min: usize,
        max: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub thetas: Vec<f64>,
    pub ns: Vec<usize>,
    pub ps: Vec<f64>,
    pub degree_rule: DegreeRule,
    pub reps: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// The FGM design grid: θ ∈ {−1, −0.5, 0, 0.5, 1}, n ∈ {50, 200},
    /// p ∈ {0.1, 0.5, 1}, rule-of-thumb degree.
    pub fn reference_grid(reps: usize, seed: u64) -> Self {
        Self {
            thetas: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            ns: vec![50, 200],
            ps: vec![0.1, 0.5, 1.0],
            degree_rule: DegreeRule::RuleOfThumb,
            reps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.ns.is_empty() || self.ps.is_empty() {
            return Err(Error::Config(
                "theta, n and p lists must be nonempty".into(),
            ));
        }
        check_reps(self.reps)?;
        for &theta in &self.thetas {
            Fgm::new(theta)?;
        }
        for &p in &self.ps {
            check_threshold(p)?;
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 2) {
            return Err(Error::TooFewObservations { min: 2, got: n });
        }
        match self.degree_rule {
            DegreeRule::Fixed(m) => check_degree(m)?,
            DegreeRule::Sweep { min, max } => {
                check_degree(min)?;
                if max < min {
                    return Err(Error::Config(format!("empty degree range {min}..={max}")));
                }
            }
            DegreeRule::RuleOfThumb => {}
        }
        Ok(())
    }

    /// `(θ, n, p)` triples in θ-major, then n, then p order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.thetas.iter().flat_map(move |&theta| {
            self.ns
                .iter()
                .flat_map(move |&n| self.ps.iter().map(move |&p| (theta, n, p)))
        })
    }
}

/// One summary per grid cell (per degree under a sweep rule), in grid order.
pub fn run_table(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    config.validate()?;
    let mut out = Vec::new();
    for (index, (theta, n, p)) in config.cells().enumerate() {
        let cell = index as u64;
        let rows = match config.degree_rule {
            DegreeRule::RuleOfThumb => {
                let spec = CellSpec {
                    theta,
                    n,
                    p,
                    m: rule_of_thumb_degree(n),
                };
                run_cell(spec, config.reps, config.seed, cell).map(|s| vec![s])
            }
            DegreeRule::Fixed(m) => {
                run_cell(CellSpec { theta, n, p, m }, config.reps, config.seed, cell)
                    .map(|s| vec![s])
            }
            DegreeRule::Sweep { min, max } => {
                degree_sweep_in(theta, n, p, min, max, config.reps, config.seed, cell)
            }
        };
        let rows = rows.map_err(|e| Error::Cell {
            theta,
            n,
            p,
            source: Box::new(e),
        })?;
        out.extend(rows);
    }
    Ok(out)
}

/// Summaries for `m = m_min..=m_max` from a single set of samples (common
/// random numbers), so the curves vary only through the degree.
pub fn degree_sweep(
    theta: f64,
    n: usize,
    p: f64,
    m_min: usize,
    m_max: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<CellSummary>> {
    degree_sweep_in(theta, n, p, m_min, m_max, reps, seed, 0)
}

#[allow(clippy::too_many_arguments)]
fn degree_sweep_in(
    theta: f64,
    n: usize,
    p: f64,
    m_min: usize,
    m_max: usize,
    reps: usize,
    seed: u64,
    cell: u64,
) -> Result<Vec<CellSummary>> {
    check_degree(m_min)?;
    if m_max < m_min {
        return Err(Error::Config(format!(
            "empty degree range {m_min}..={m_max}"
        )));
    }
    CellSpec {
        theta,
        n,
        p,
        m: m_min,
    }
    .validate()?;
    check_reps(reps)?;
    let model = Fgm::new(theta)?;
    let weights = (m_min..=m_max)
        .map(|m| TailWeights::new(p, m))
        .collect::<Result<Vec<_>>>()?;
    let per_rep = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let ps = draw_pseudo_sample(&model, n, seed, cell, rep)?;
            let emp = rho_hat_empirical(&ps, p)?.value;
            let bern = weights
                .iter()
                .map(|w| rho_hat_bernstein_with(&ps, w).map(|r| r.value))
                .collect::<Result<Vec<f64>>>()?;
            Ok((emp, bern))
        })
        .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;
    let truth = model.rho_tail_analytic(p)?;
    let empirical: Vec<f64> = per_rep.iter().map(|(e, _)| *e).collect();
    let emp_summary = ErrorSummary::new(&empirical, truth);
    Ok((m_min..=m_max)
        .enumerate()
        .map(|(j, m)| {
            let bern: Vec<f64> = per_rep.iter().map(|(_, b)| b[j]).collect();
            CellSummary {
                theta,
                n,
                p,
                m,
                reps,
                truth,
                empirical: emp_summary,
                bernstein: ErrorSummary::new(&bern, truth),
            }
        })
        .collect())
}

/// Replicates of the empirical estimator alone.
pub fn empirical_replicates(
    theta: f64,
    p: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    CellSpec { theta, n, p, m: 1 }.validate()?;
    check_reps(reps)?;
    let model = Fgm::new(theta)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let ps = draw_pseudo_sample(&model, n, seed, u64::MAX, rep)?;
            Ok(rho_hat_empirical(&ps, p)?.value)
        })
        .collect()
}

/// `σ_p²` proxy: `n` times the sample variance of the empirical estimator.
pub fn estimate_sigma_p2(theta: f64, p: f64, n: usize, reps: usize, seed: u64) -> Result<f64> {
    if reps < 2 {
        return Err(Error::Config(
            "sigma_p^2 estimation needs at least 2 reps".into(),
        ));
    }
    let reps = empirical_replicates(theta, p, n, reps, seed)?;
    let truth = Fgm::new(theta)?.rho_tail_analytic(p)?;
    let var = ErrorSummary::new(&reps, truth).variance.unwrap_or(f64::NAN);
    Ok(n as f64 * var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(f)
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let a: u64 = replicate_rng(1, 2, 3).random();
        let b: u64 = replicate_rng(1, 2, 3).random();
        let c: u64 = replicate_rng(1, 3, 2).random();
        let d: u64 = replicate_rng(2, 2, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn summary_decomposition() {
        let xs = [0.1, 0.4, -0.2, 0.3, 0.25];
        let s = ErrorSummary::new(&xs, 0.05);
        let k = xs.len() as f64;
        let lhs = s.mse;
        let rhs = s.variance.unwrap() * (k - 1.0) / k + s.abs_bias.powi(2);
        assert!((lhs - rhs).abs() < 1e-15);
        let one = ErrorSummary::new(&[0.3], 0.1);
        assert!(one.variance.is_none());
        assert!((one.mse - 0.04).abs() < 1e-15);
    }

    #[test]
    fn cell_is_deterministic_across_thread_counts() {
        let spec = CellSpec {
            theta: 0.5,
            n: 30,
            p: 0.5,
            m: 9,
        };
        let a = with_threads(1, || run_cell(spec, 300, 7, 4).unwrap());
        let b = with_threads(4, || run_cell(spec, 300, 7, 4).unwrap());
        assert_eq!(a, b);
        let c = with_threads(4, || run_cell(spec, 300, 8, 4).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn singleton_table_equals_cell() {
        let config = ExperimentConfig {
            thetas: vec![-0.5],
            ns: vec![40],
            ps: vec![0.5],
            degree_rule: DegreeRule::RuleOfThumb,
            reps: 200,
            seed: 9,
        };
        let rows = run_table(&config).unwrap();
        assert_eq!(rows.len(), 1);
        let spec = CellSpec {
            theta: -0.5,
            n: 40,
            p: 0.5,
            m: rule_of_thumb_degree(40),
        };
        assert_eq!(rows[0], run_cell(spec, 200, 9, 0).unwrap());
    }

    #[test]
    fn table_order_and_shape() {
        let config = ExperimentConfig {
            reps: 5,
            ..ExperimentConfig::reference_grid(5, 1)
        };
        let rows = run_table(&config).unwrap();
        assert_eq!(rows.len(), 30);
        assert_eq!(
            (rows[0].theta, rows[0].n, rows[0].p, rows[0].m),
            (-1.0, 50, 0.1, 13)
        );
        assert_eq!(
            (rows[3].theta, rows[3].n, rows[3].p, rows[3].m),
            (-1.0, 200, 0.1, 34)
        );
        assert_eq!((rows[29].theta, rows[29].n, rows[29].p), (1.0, 200, 1.0));
    }

    #[test]
    fn sweep_rule_in_table() {
        let config = ExperimentConfig {
            thetas: vec![0.0, 1.0],
            ns: vec![20],
            ps: vec![0.5],
            degree_rule: DegreeRule::Sweep { min: 2, max: 4 },
            reps: 20,
            seed: 3,
        };
        let rows = run_table(&config).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.m).collect::<Vec<_>>(),
            vec![2, 3, 4, 2, 3, 4]
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = ExperimentConfig::reference_grid(10, 1);
        config.thetas.clear();
        assert!(run_table(&config).is_err());
        let mut config = ExperimentConfig::reference_grid(0, 1);
        assert!(config.validate().is_err());
        config.reps = 10;
        config.ps = vec![1.5];
        assert!(config.validate().is_err());
        config.ps = vec![0.5];
        config.degree_rule = DegreeRule::Sweep { min: 5, max: 4 };
        assert!(config.validate().is_err());
        assert!(run_cell(
            CellSpec {
                theta: 2.0,
                n: 10,
                p: 0.5,
                m: 3
            },
            10,
            0,
            0
        )
        .is_err());
        assert!(degree_sweep(0.0, 10, 0.5, 0, 3, 10, 0).is_err());
    }

    #[test]
    fn sweep_shares_empirical_summary_and_matches_cells() {
        let rows = degree_sweep(0.0, 30, 1.0, 1, 6, 150, 5).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.empirical == rows[0].empirical));
        // same stream family as run_cell with cell 0
        for r in &rows {
            let spec = CellSpec {
                theta: 0.0,
                n: 30,
                p: 1.0,
                m: r.m,
            };
            assert_eq!(*r, run_cell(spec, 150, 5, 0).unwrap());
        }
    }

    #[test]
    fn single_replicate_has_no_variance() {
        let s = run_cell(
            CellSpec {
                theta: 1.0,
                n: 10,
                p: 1.0,
                m: 3,
            },
            1,
            0,
            0,
        )
        .unwrap();
        assert!(s.var_emp().is_none() && s.var_bern().is_none());
        assert!(s.mse_emp().is_finite());
    }

    #[test]
    fn sigma_p2_needs_two_reps() {
        assert!(estimate_sigma_p2(0.0, 1.0, 50, 1, 0).is_err());
        let s = estimate_sigma_p2(0.0, 1.0, 50, 500, 0).unwrap();
        assert!(s > 0.0 && s.is_finite());
    }
}
