//! Exact equilibrium computation for security games with set-function utilities.
//!
//! An attacker picks a set of targets `A`, a defender a set `D`; the attacker
//! gains `B(A \ D) - C_a(A)` and the defender loses `B(A \ D) + C_d(D)`, where
//! `B`, `C_a` and `C_d` are arbitrary set functions. The game is strategically
//! zero-sum, and its payoff is bilinear in "compact" coordinates indexed by
//! the support of the common utilities (Möbius transforms) of those set
//! functions. [`solver::solve_compact`] runs a double-oracle loop over those
//! coordinates; [`solver::solve_bruteforce`] solves the full normal form and
//! serves as the reference.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod model;
pub mod netsec;
pub mod oracles;
pub mod scalar;
pub mod setfn;
pub mod solver;

pub use error::{NasgError, Result};
pub use geometry::{CompactGame, CompactVertex, SupportSet};
pub use model::{GameSpec, MixedStrategy};
pub use setfn::{CommonUtility, GroundSet, SetFunction, Subset};
pub use solver::{EquilibriumReport, SolverConfig};
