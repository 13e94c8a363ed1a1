//! Twisted toroidal grid diagrams for links in lens spaces, grid moves, and
//! a skein-theoretic evaluation of a HOMFLY-type polynomial.

pub mod diagram;
pub mod gallery;
pub mod laurent;
pub mod moves;

pub use diagram::{Cell, DiagramError, GridDiagram, MarkKind, Marking};
pub use laurent::LaurentPoly;
pub mod engine;
pub mod metrics;
pub mod trivial;
