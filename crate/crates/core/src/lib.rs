//! Spatial and topological descriptors of multi-class cell layouts.
//!
//! The crate computes cross K-functions, hole-level persistence diagrams of
//! the distance transform enriched with local K-functions and multi-scale
//! densities, matching-based distances between such diagrams, and a
//! simulated-annealing synthesizer that produces new layouts sharing a
//! reference layout's configuration.

pub mod defaults;
pub mod error;
pub mod hungarian;
pub mod io;
pub mod layout;
pub mod matching;
pub mod spatial;
pub mod synthesis;
pub mod topology;

pub use error::{Error, Result};
pub use layout::{
    normalize_to_unit, BandwidthSet, Cell, CellLayout, ClassFilter, Domain, Point2, RadiusGrid,
    UnitTransform,
};
