pub mod complex;
pub mod error;
pub mod net;
pub mod pipeline;
pub mod sphere;
pub mod topo;
