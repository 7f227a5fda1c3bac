//! Symbolic billiard dynamics on labeled polygonal tables.
//!
//! Tables are traced, unfolded along words and queried for the realizability
//! of words through corridor feasibility. On top of that sit the inverse
//! procedures that recover adjacency and vertex angles from language data
//! alone, and the persistence radii showing that finitely many words never pin
//! a table down.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod language;
pub mod perturbation;
pub mod reconstruction;
pub mod sturmian;
pub mod svg;
pub mod unfolding;

pub use error::{Error, Result};
pub use geometry::{EdgeLabel, Isometry2, LabeledPolygon, Point2};
