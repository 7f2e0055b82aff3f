//! Anisotropic Bernoulli bond percolation on `Z^d`.
//!
//! * [`lattice`]: vertices, directions, canonical edges, parameters.
//! * [`randomness`]: stateless, replayable per-edge randomness.
//! * [`explore`]: cluster exploration and Monte Carlo estimators.
//! * [`coupling`]: the susceptible-infected coupling that embeds a cluster on
//!   `Z^d` (last two directions merged) into the origin's cluster on `Z^{d+1}`.
//! * [`partition`]: the `q(p) = -log(1 - p)` calculus, greedy partitions and
//!   the sufficient conditions for percolation built from them.

pub mod coupling;
pub mod error;
pub mod explore;
pub mod lattice;
pub mod par;
pub mod partition;
pub mod randomness;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{BoxLimits, Direction, EdgeId, Params, Sign, Vertex};
pub use par::Exec;
pub use randomness::{EdgeOracle, Seed};
