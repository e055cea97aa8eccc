//! Conservative Camassa-Holm solutions in pseudo-inverse coordinates.
//!
//! The crate builds conservative peakon-antipeakon solutions through wave
//! breaking, transforms Eulerian snapshots to the monotone coordinate
//! triple (Y, U, P^{1/2}) indexed by cumulative energy, rescales the triple
//! to the unit interval, and evaluates a Lipschitz metric on the rescaled
//! states. Evolution is available both in Lagrangian variables and directly
//! for the rescaled system, with residual and stability experiments wired
//! into the `chmetric` binary.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod grid;
pub mod lagrangian;
pub mod metric;
pub mod peakon;
pub mod tol;
pub mod transform;

pub use error::{Error, Result};
pub use fields::EulerianSnapshot;
pub use peakon::PeakonParams;
pub use transform::{ScaledSnapshot, TransformedSnapshot};
