//! Computational tools around flat `GL⁺(2,ℝ)` bundles over surfaces, spectral
//! sequences of filtered complexes, affine connections and Euler
//! characteristics of the spaces that come up for affine manifolds.

pub mod euler;
pub mod exact;
pub mod geometry;
pub mod liftgroup;
pub mod milnor;
pub mod spectral;
