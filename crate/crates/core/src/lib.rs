//! Numerical laboratory for the entire functions
//! `f(z) = lambda * sum_{k=0}^{p-1} exp(w^k z)`, where `w = exp(2*pi*i/p)`.
//!
//! The crate provides overflow-safe evaluation of `f`, its derivative and
//! power-series form, the maximum modulus `M(r) = max_{|z|=r} |f(z)|` and its
//! iterated ladder, the polygon/strip/sector partition of the plane, location
//! of zeros and critical points on the symmetry rays, orbit classification
//! against the ladder (escaping / fast escaping / bounded / attracted), ring
//! and strip-crossing detection on classified grids, and deterministic
//! tile-parallel rasterization with PGM/PPM encoding.

pub mod error;
pub mod family;
pub mod geometry;
pub mod gridfile;
pub mod maxmod;
pub mod orbit;
pub mod render;
pub mod rings;
pub mod scaled;
pub mod singular;

pub use error::{Error, Result};
pub use family::FamilyParams;
pub use geometry::{EstimatedConstants, PartitionConfig, Region};
pub use maxmod::MaxModLadder;
pub use orbit::{OrbitClass, OrbitRecord, RealFixedPoint};
pub use render::{GridSpec, RasterImage};
pub use rings::RingReport;
pub use scaled::ScaledComplex;
pub use singular::{OrbitVerdict, PostsingularOrbit, RealScaled, SingularData};

/// Natural-log threshold beyond which a value can no longer be fed back into
/// evaluation as a native float (`exp(700)` is near the f64 ceiling).
pub const LOG_SATURATION: f64 = 700.0;

/// Natural log of the escape radius `1e6` used by orbit classification.
pub const LOG_ESCAPE: f64 = 13.815510557964274;
