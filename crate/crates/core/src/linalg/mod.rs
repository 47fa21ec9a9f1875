//! Dense complex linear algebra used by every other module.

pub mod lowrank;
pub mod ops;
pub mod perm;
pub mod random;
pub mod sim;
pub mod types;

pub use lowrank::{projected_mass, LowRankEigen, LowRankState, QuadForm};
pub use ops::*;
pub use perm::*;
pub use types::*;
