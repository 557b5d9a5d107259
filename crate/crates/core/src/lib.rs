//! Numerical toolkit for the positive-solution structure of Kirchhoff-type
//! equations -(a |grad u|_2^2 + b) Lap u + u = f(x) |u|^(p-2) u on R^N.
//!
//! The library is organized around three computational pillars:
//!
//! * autonomous ground states of the unit-coefficient limit problem and the
//!   algebraic branch equation their dilations satisfy ([`ground_state`],
//!   [`branches`]),
//! * the fibering map of the energy along rays, its critical points, and the
//!   constants and thresholds that organize the (a, p, N) parameter landscape
//!   ([`fibering`], [`constants`]),
//! * operational probes that certify boundedness, nonexistence, and sign
//!   classifications by direct computation, plus a one-dimensional
//!   nonautonomous grid solver ([`probes`], [`nonauto1d`]).
//!
//! Heavy sweeps run data-parallel through [`exec`] when the `parallel`
//! feature (default) is enabled and fall back to sequential iteration
//! otherwise; results are identical either way.

pub mod branches;
pub mod constants;
pub mod error;
pub mod exec;
pub mod fibering;
pub mod ground_state;
pub mod nonauto1d;
pub mod params;
pub mod probes;
pub mod report;

pub use error::{Error, Result};
pub use fibering::FunctionData;
pub use ground_state::{find_ground_state, GroundState};
pub use params::ProblemParams;
