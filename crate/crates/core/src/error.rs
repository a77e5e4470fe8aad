use thiserror::Error;

/// Errors raised by the estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A margin of the sample contains duplicate values.
    #[error("the {margin} margin contains tied values; ranks are undefined under continuous margins (consider jittering)")]
    Ties { margin: Margin },

    #[error("sample must contain at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },

    #[error("observation {index} is not finite")]
    NonFinite { index: usize },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed to reach tolerance {tol:e} (last change {last_change:e})")]
    NonConvergence { tol: f64, last_change: f64 },

    /// The integrated bias coefficient vanishes, so the optimal degree is undefined.
    #[error("integrated bias coefficient is zero (|T_p(b)| = {t_b:e}); optimal degree undefined")]
    DegenerateBias { t_b: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cell (theta = {theta}, n = {n}, p = {p}): {source}")]
    Cell {
        theta: f64,
        n: usize,
        p: f64,
        #[source]
        source: Box<Error>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    X,
    Y,
}

impl std::fmt::Display for Margin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Margin::X => f.write_str("first"),
            Margin::Y => f.write_str("second"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

/// Smallest admissible tail threshold.
pub const MIN_THRESHOLD: f64 = 1e-6;

pub(crate) fn check_threshold(p: f64) -> Result<()> {
    if p > MIN_THRESHOLD && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "p",
            value: p,
            expected: "(1e-6, 1]",
        })
    }
}

pub(crate) fn check_degree(m: usize) -> Result<()> {
    if m >= 1 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "m",
            value: m as f64,
            expected: "m >= 1",
        })
    }
}
