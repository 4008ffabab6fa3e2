//! Numerical toolkit for quasiconformal geometry on the unit disk: Beltrami
//! fields and their group structure, a measurable-Riemann-mapping solver,
//! Schwarzian derivatives and the weighted norm hierarchy of the Bers
//! projection, barycentric and Ahlfors-Weill extensions, affine-coset
//! diagnostics, and hyperbolic germ linearization.

pub mod beltrami;
pub mod bers;
pub mod circle;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod extensions;
pub mod fixtures;
pub mod foliation;
pub mod grid;
pub mod holder;
pub mod laurent;
pub mod mobius;
pub mod solver;
pub mod suite;

mod transforms;

pub use config::Config;
pub use error::{Error, Result};
