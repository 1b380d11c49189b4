//! Spectral toolkit for Jacobi trigonometric expansions.

pub mod error;
pub mod exec;
pub mod expansion;
pub mod fractional;
pub mod grid;
pub mod integrate;
pub mod jacobi;
pub mod kernels;
pub mod lemma36;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod schrodinger;
pub mod spaces;
pub mod spectral;
pub mod suite;
pub mod timequad;

pub use error::{Error, Result};
pub use expansion::{Expansion, ExpansionSampler};
pub use params::{ExponentRange, ParameterPair};
pub use quadrature::{Measure, QuadratureRule};
pub use exec::Execution;
pub use fractional::SquareFunction;
pub use timequad::TimeQuadrature;
