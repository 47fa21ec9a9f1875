//! Haar sampling, twirls, moment states and Haar reference Choi states.

pub mod choi;
pub mod sample;
pub mod seed;
pub mod twirl;

pub use choi::{
    haar_choi, haar_choi_structured, haar_isometry_choi, pairs_to_blocks, permutation_approx_choi_structured,
    state_moment_structured, PermSumOperator,
};
pub use sample::{haar_state_with, haar_unitary_matrix, haar_unitary_with, sample_haar_state, sample_haar_unitary};
pub use seed::SeedPath;
pub use twirl::{
    ensemble_twirl, ensemble_twirl_matrix, state_moment_exact, state_moment_matrix, state_moment_mc, twirl_exact,
    twirl_exact_matrix, twirl_mc, twirl_mc_matrix, twirl_permutation_approx, twirl_permutation_approx_matrix,
    TwirlSource, TwirlSpec,
};
