//! Simulation and analysis of two-branch differential inclusions
//! ẋ ∈ {f₁(x), f₂(x)} on the plane: switching solutions, the solution-space
//! metric, chaos indicators over finite ensembles, the path-richness /
//! concatenation condition checkers, and the shipped model instances.
//!
//! Every chaos indicator is computed relative to a finite ensemble of
//! windowed solutions standing in for the full solution set; reports carry
//! the truncation and discretization bounds that quantify the gap.

pub mod chaos;
pub mod conditions;
pub mod error;
pub mod geom;
pub mod inclusion;
pub mod integrate;
pub mod metric;
pub mod models;
pub mod path;
pub mod report;
pub mod solution;
pub mod svg;

pub use error::{Error, Result};
pub use geom::{Arc, Point, Region, RegionKind, Vec2};
pub use inclusion::{BranchField, BranchLabel, Inclusion, Tolerances};
pub use solution::{Ensemble, SolutionWindow, TimeWindow};
