//! Finite-element laboratory for weighted Korn and Hardy-type inequalities
//! on thin rectangles.

pub mod config;
pub mod constraints;
pub mod error;
pub mod experiments;
pub mod field;
pub mod forms;
pub mod geometry;
pub mod grid;
pub mod quadrature;
pub mod report;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
