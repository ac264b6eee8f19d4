//! Numerical laboratory for a Stefan-type free-boundary reaction–diffusion
//! model in which growth is monostable inside a protection zone and subject
//! to a strong Allee effect outside it.
//!
//! * [`model`]: nonlinearities, zone layouts, initial data, hypothesis checks.
//! * [`spectral`]: principal eigenvalues and the critical lengths and radii.
//! * [`phaseplane`]: ground states, bump solutions and the largest zone
//!   length that still carries a ground state.
//! * [`semiwave`]: bistable wave speed and the semi-wave fixing the
//!   asymptotic spreading speed.
//! * [`pde`]: front-fixing IMEX solver for the moving-boundary problem.
//! * [`classify`]: long-time outcome classification and σ-threshold search.

pub mod classify;
pub mod model;
pub mod numerics;
pub mod pde;
pub mod phaseplane;
pub mod semiwave;
pub mod spectral;

pub use model::{make_cubic_pair, InitialData, LayoutKind, ReactionPair, ZoneLayout};
