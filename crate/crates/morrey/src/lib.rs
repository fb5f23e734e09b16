//! Numerical toolkit for generalized Morrey and Hardy-Morrey function spaces
//! on dyadic grids.
//!
//! The crate realizes, at desk scale, the machinery these spaces are built
//! from: radial weight classes and their admissibility conditions, strong and
//! weak Morrey norms, heat and grand maximal functions, weighted Hardy and
//! supremal operators with sharp constants, Whitney and Calderon-Zygmund
//! decompositions with atomic synthesis, fractional and convolution
//! integrals, and a Littlewood-Paley square function. Functions are modeled
//! as step functions on `[0, 2^L)^n` (`n` in `{1, 2}`) with cells of side
//! `2^-K`, so every inequality can be exercised against brute-force oracles.
//!
//! Start with the runnable examples (`cargo run --example norms_tour`) or the
//! `morrey` binary, which exposes each subsystem as a subcommand.

pub mod atomic;
pub mod calderon;
pub mod error;
pub mod experiment;
pub mod fourier;
pub mod generate;
pub mod grid;
pub mod hardy;
pub mod maxops;
pub mod norms;
pub mod shapes;

pub use error::{Error, Result};
pub use grid::{Boundary, CubeFamily, CubeMode, DyadicCube, GridFunction, Window};
pub use norms::{HeatScales, NormReport, VectorGridFunction};
pub use shapes::{RadiusGrid, ShapeFunction, SpacePair};
