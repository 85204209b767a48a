//! Reach analysis for serial body-and-hinge chains in `R^d`.

pub mod chain;
pub mod critical;
pub mod geom;
pub mod io;
pub mod panel;
pub mod reach;
pub mod report;

pub use chain::{ChainError, ChainSpec, Configuration};
pub use geom::{AffineSubspace, Hinge, Point, Vector};
