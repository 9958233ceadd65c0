//! Monte Carlo experiments: α estimation, CLT replicate studies, the
//! binomial/Poisson variance relation, expectation convergence,
//! de-Poissonization and radius tails.

mod alpha;
mod clt;
mod harness;
mod relation;
pub mod stats;
mod tails;

pub use alpha::{alpha_sample, estimate_alpha, min_alpha_window, AlphaEstimate, AlphaSample};
pub use clt::{betti_vector, run_clt, sample_scaled, CltBlock, CltConfig, CltResult, ProcessKind, ScoreRow, MIN_CLT_REPLICATES};
pub use harness::{check_censoring, replicate, with_threads, MAX_CENSORED_FRACTION};
pub use relation::{
    depoissonization_check, expectation_convergence, variance_relation_check, DepoConfig, DepoReport, ExpectationConfig,
    ExpectationRow, RelationEntry, RelationReport,
};
pub use stats::{normality_score, NormalityScores, AD_CRITICAL_1PCT};
pub use tails::{radius_tail_experiment, RadiusKind, TailConfig, TailRow, TailTable};
