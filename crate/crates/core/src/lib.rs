//! Conforming C1 finite elements for streamfunction formulations of
//! wind-driven ocean circulation.
//!
//! The discretization uses the 21-DOF quintic Argyris triangle on
//! structured right-isosceles triangulations of rectangles. Four models are
//! provided: the biharmonic equation, the linear Stommel and Stommel-Munk
//! models, and the stationary one-layer quasi-geostrophic equations, the
//! last solved by Newton's method.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod argyris;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod format;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
