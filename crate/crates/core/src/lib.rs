//! Exact capacitary harmonic analysis on dyadic grids.
//!
//! The crate computes, for cellwise-constant functions on a dyadic base
//! cube, the dyadic Hausdorff content `H^β_∞`, Choquet integrals against it,
//! uncentered fractional and β-dimensional maximal functions, and the
//! mean-oscillation norms built from Choquet averages (`BMO^β`, `BLO^β`,
//! their `p`-variants and the oscillation modulus). The [`verify`] module
//! turns the boundedness, John–Nirenberg and VMO-preservation statements for
//! these objects into measured experiments.

pub mod choquet;
pub mod cli;
pub mod content;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod io;
pub mod maximal;
pub mod oscillation;
pub mod verify;

pub use choquet::{choquet_integral, choquet_lp_norm, packing_check, GridFunction, Integrator, Region};
pub use content::{content, content_brute, CellSet, ContentParams, ContentResult, ContentTree};
pub use error::{Error, Result};
pub use geometry::{
    comparison_cube, enumerate_windows, join_cube, BaseDomain, CellBox, DyadicCube, FamilyMember, Window,
    WindowFamily,
};
pub use maximal::{beta_maximal, fractional_maximal, local_global_split, MaximalField, MaximalParams};
pub use oscillation::{
    blo_norm, bmo_norm, choquet_average, essinf_beta, mean_oscillation, oscillation_modulus, NormReport,
    OscillationParams,
};
