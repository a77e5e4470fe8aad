//! Lower-tail Spearman's rho estimation with empirical and Bernstein-smoothed
//! copulas.
//!
//! The tail rho at threshold `p ∈ (0,1]` compares the mass a copula puts on
//! `[0,p]²` with the independence and comonotone extremes. This crate
//! provides the empirical-copula estimator, its Bernstein-polynomial
//! smoothing, the first-order bias/variance expansions that guide the choice
//! of Bernstein degree, and a seeded parallel Monte Carlo engine built on the
//! FGM copula.
//!
//! ```
//! use tailrho::{pseudo_observations, rho_hat_bernstein, rho_hat_empirical, Sample};
//!
//! let sample = Sample::from_pairs(&[(0.3, 1.2), (1.7, 0.4), (0.9, 2.5), (2.2, 2.0)]).unwrap();
//! let ps = pseudo_observations(&sample).unwrap();
//! let emp = rho_hat_empirical(&ps, 0.5).unwrap();
//! let bern = rho_hat_bernstein(&ps, 0.5, 3).unwrap();
//! assert!(emp.value.is_finite() && bern.value.is_finite());
//! ```

pub mod asympt;
pub mod copula;
pub mod error;
pub mod estimators;
pub mod fgm;
pub mod mc;
pub mod quad;
pub mod special;

pub use asympt::{AsymptoticReport, MseExpansion};
pub use copula::{
    bernstein_copula, copula_grid, empirical_copula, pseudo_observations,
    pseudo_observations_scaled, BernsteinCopula, Copula, CopulaGrid, CopulaPartials, Independence,
    Partials, PseudoSample, Sample, Scaling, UpperBound,
};
pub use error::{Error, Margin, Result};
pub use estimators::{
    normalizer, rho_hat_bernstein, rho_hat_bernstein_with, rho_hat_empirical, rho_tail_population,
    rule_of_thumb_degree, Method, TailRhoResult,
};
pub use fgm::Fgm;
pub use mc::{CellSpec, CellSummary, DegreeRule, ExperimentConfig};
pub use special::{binomial_kernel, incomplete_beta, tail_weights, TailWeights};
