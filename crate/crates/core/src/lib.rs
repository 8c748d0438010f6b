//! Solver and verification harness for isothermal thin-fiber drawing.
//!
//! The cross-section area `A(t, x)` of a fiber pulled between an inlet at
//! `x = 0` and a take-up wheel at `x = L` obeys
//!
//! ```text
//! A_t + (v A)_x = 0,      (A v_x)_x = 0,
//! A(0, x) = S1(x),  A(t, 0) = S0(t),  v(t, 0) = v_in(t),  v(t, L) = v_L(t).
//! ```
//!
//! The second equation says the draw force `Q(t) = A v_x` is constant in
//! space, so the velocity is recovered from the area by one quadrature and
//! the area then solves a transport equation `A_t + v A_x = -Q`.
//!
//! Modules follow that split: [`velocity`] recovers `v` and `Q`,
//! [`transport`] advances `A` along characteristics, [`evolution`] couples
//! them (time marching and the short-time fixed-point construction),
//! [`monitors`] checks every a priori bound at runtime and [`analysis`]
//! hosts the oracles and experiments.

pub mod analysis;
pub mod cli;
pub mod evolution;
pub mod model;
pub mod monitors;
pub mod profile;
pub mod quadrature;
pub mod transport;
pub mod velocity;

pub use evolution::{picard_iterate, run, EvolutionError, RunOptions, Trajectory};
pub use model::{BoundaryData, DataBounds, DataError, FiberState, Grid, Problem, RegularizationPlan};
pub use profile::Profile;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/velocity.md")]
    mod velocity {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/monitors.md")]
    mod monitors {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
