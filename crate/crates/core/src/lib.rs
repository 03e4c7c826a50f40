//! Cabin seat maps, high-dimensional fare regressions with post-double-selection
//! LASSO, and a seeded synthetic airline market with a known pricing process.

pub mod cabin;
pub mod data;
pub mod fixtures;
pub mod lasso;
pub mod pds;
pub mod regress;
pub mod study;
pub mod synth;
