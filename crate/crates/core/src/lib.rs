//! Exact Euclidean 2-center solver for point sets in three dimensions.
//!
//! Given points `P`, find two congruent balls of minimum radius `r*` whose
//! union covers `P`. The crate provides the decision procedures (a
//! dual-arrangement sweep and a faster variant for well-separated centers),
//! the intersection engine for families of congruent balls, randomized
//! optimization drivers and brute-force reference oracles.

pub mod arrangement;
pub mod ball_intersection;
pub mod cli;
pub mod error;
pub mod geom;
pub mod lifespan;
pub mod miniball;
pub mod solver;
pub mod surface_map;

pub use error::{Error, Result};
pub use geom::{Ball, Circle3, Direction, Plane, Point3, Tolerance};
