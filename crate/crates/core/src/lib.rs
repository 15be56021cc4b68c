//! Shape-space reduction of the planar three-body problem with zero
//! angular momentum: configuration space, moduli cone and shape sphere.

pub mod collision;
pub mod error;
pub mod jet;
pub mod local_series;
pub mod ode;
pub mod cli;
pub mod newton_dynamics;
pub mod potential;
pub mod reduced_dynamics;
pub mod shape_analysis;
pub mod shape_geometry;

pub use error::{Error, Result};
