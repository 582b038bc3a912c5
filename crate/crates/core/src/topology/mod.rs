//! Distance-transform filtration, hole detection and enriched diagrams.

pub mod diagram;
pub mod edt;
pub mod persistence;

pub use diagram::{
    class_holes, enrich_diagram, per_class_diagrams, union_diagram, vectorize_diagram,
    DensityScope, DiagramConfig, DiagramFeature, EnrichedHole, EnrichedPersistenceDiagram,
    PersistenceBuckets,
};
pub use edt::{distance_transform, distance_transform_sites, DistanceField, GridGeometry};
pub use persistence::{persistence_h1, PersistencePoint};
