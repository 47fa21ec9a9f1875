//! Desk-scale simulation testbench for oracle separations between
//! pseudorandom unitaries, pseudorandom isometries and pseudorandom
//! function-like state generators.
//!
//! The crate is organized by concern:
//!
//! * [`linalg`]: dense complex linear algebra, norms and channel distances.
//! * [`haar`]: seeded Haar sampling, twirls and Haar reference Choi states.
//! * [`oracle`]: swap and isometry oracles, oracle circuits and candidates.
//! * [`blockenc`]: block encodings and singular-value discrimination.
//! * [`tomography`]: exact and finite-shot process tomography.
//! * [`adversary`]: the surrogate-circuit attacks and their bookkeeping.
//! * [`harness`]: lemma dispatch, experiments, configuration and reports.

pub mod adversary;
pub mod blockenc;
pub mod budget;
pub mod error;
pub mod haar;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod tomography;

pub use budget::Budget;
pub use error::{QsepError, Result};
pub use linalg::{ChannelRep, ComplexMatrix, ComplexVector, DensityMatrix, PureState, UnitaryMatrix, C64};
