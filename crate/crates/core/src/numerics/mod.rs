//! Numerical building blocks shared by the solvers.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod tridiag;

pub use ode::{integrate, Direction, Event, OdeError, OdeOptions, Solution, Stop};
pub use quad::adaptive_simpson;
pub use roots::{bisect, golden_max, RootError};
