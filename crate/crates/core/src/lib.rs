//! Numerical core for discriminating collapsed from uncollapsed quantum states.

pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod rng;

pub use discrimination::{helstrom, optimal_known_psi, DiscriminationResult, Effect};
pub use error::{Error, Result};
pub use linalg::{hermitian_eig, ComplexMatrix, HermitianEigen, C64};
pub use model::{
    apply_collapse_channel, collapse_pair_from_density, density_from_ensemble, sample_collapse, sample_uniform_state,
    sample_unitary, CollapseBasis, CollapsePair, CollapseSampleOutcome, CollapseSampler, CollapseScenario,
    CollapseStructure, DensityMatrix, StateVector,
};
pub use montecarlo::{conjecture_scan, estimate_lambda, simulate_reliability};
pub use rng::RngStream;
