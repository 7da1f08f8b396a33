//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate arity {arity} does not match {got} site indices")]
    ArityMismatch { arity: usize, got: usize },

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("multi-site gate acting on repeated site index {site}")]
    RepeatedSite { site: usize },

    #[error("matrix is not unitary (max deviation {max_dev:.3e})")]
    NotUnitary { max_dev: f64 },

    #[error("state norm deviates from 1 by {dev:.3e}")]
    NotNormalized { dev: f64 },

    #[error("contraction produced a zero-norm state")]
    ZeroNorm,

    #[error("probability {0} outside valid range")]
    BadProbability(f64),

    #[error(
        "ground space is degenerate (gap {gap:.3e}); perturb the quartic coefficient \
         (epsilon > 0) to select a unique ground state"
    )]
    DegenerateGroundState { gap: f64 },

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    EigenNoConvergence { residual: f64 },

    #[error("bond dimension {needed} exceeds cap {max_bond} with truncation tolerance unmet")]
    BondOverflow { needed: usize, max_bond: usize },

    #[error("no CNOT structure with at most {budget} CNOTs reached tolerance; best cost {best_cost:.3e}")]
    SearchExhausted { budget: usize, best_cost: f64 },

    #[error("pulse decomposition did not converge (residual {residual:.3e})")]
    DecompositionResidual { residual: f64 },

    #[error("gauge vector orthogonal to a state after {redraws} redraws")]
    OrthogonalGauge { redraws: usize },

    #[error("overlap magnitude {magnitude:.3e} at partition link {link} below threshold; partition is ill-conditioned")]
    IllConditionedOverlap { link: usize, magnitude: f64 },

    #[error("reconstructed probability {value:.3e} negative beyond sampling tolerance")]
    NegativeProbability { value: f64 },

    #[error("invalid specification: {0}")]
    BadSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
