//! Shared domain types, seeded randomness, grids and quadrature.

pub mod density;
pub mod grid;
pub mod pmf;
pub mod quadrature;
pub mod rate;
pub mod rng;
pub mod types;

pub use density::{Component, Density};
pub use grid::GridDensity;
pub use pmf::SymmetricPmf;
pub use quadrature::gauss_quadrature;
pub use rate::{loglog_fit, RateReport};
pub use rng::LabRng;
pub use types::{make_empirical, Configuration, DiscreteMeasure};
