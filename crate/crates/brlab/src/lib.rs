//! Numerical laboratory for Bochner–Riesz means over rough convex planar domains.
//!
//! The crate builds convex polygons (disks, squares, Cantor-type and arithmetic-progression
//! domains), decomposes their boundaries at scale δ, measures additive energy of the resulting
//! interval families, and evaluates multipliers and maximal operators on FFT grids.

pub mod constructions;
pub mod decomposition;
pub mod directions;
pub mod energy;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod intervals;
pub mod khinchine;
pub mod maximal;
pub mod multiplier;

pub use error::{Error, Result};
