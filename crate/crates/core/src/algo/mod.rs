//! Structural analytics over a frozen graph.

mod components;
mod degree;
mod louvain;
mod modularity;

pub use components::{
    size_cdf, strongly_connected_components, wcc_cdf, weakly_connected_components, ComponentMode, ComponentSet,
};
pub use degree::{degree_distribution, DegreeHistogram};
pub use louvain::{louvain, LouvainConfig, Partition, MIN_GAIN};
pub use modularity::{modularity, modularity_of_labels, UndirectedProjection};
