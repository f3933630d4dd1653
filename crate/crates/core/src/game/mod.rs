//! The zero-sum matrix game between the two players.

pub mod deviation;
pub mod nash;
pub mod outcome;
pub mod payoff;
pub mod qre;

/// Dense row-major matrix.
pub type Matrix = Vec<Vec<f64>>;

pub use deviation::{deviation_experiment, expected_factual_prob, total_variation, DeviationReport, ForcedPlay};
pub use nash::{nash_oracle_small, NashEquilibrium};
pub use outcome::{sample_play, MeanSe, PlayRecord, PlaySummary};
pub use payoff::{estimate_payoff_matrix, AntisymmetryReport, PayoffMatrix, PayoffMetadata};
pub use qre::{best_response, entropy, qre_residual, qre_solve, qre_solve_from, softmax, EquilibriumResult, SolverParams};
