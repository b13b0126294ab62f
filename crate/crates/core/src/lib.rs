//! A steady-state multi-objective evolutionary engine built from
//! interchangeable parts: a generator that proposes candidates, an archive
//! that keeps the elite, and a feedback link from the archive back to the
//! population.
//!
//! Three archivers implement the same [`archive::Archive`] contract:
//!
//! | kind | schema | per-insertion comparisons |
//! |------|--------|---------------------------|
//! | [`archive::RnArchive`] | global dominance + clustering truncation | grows with archive size |
//! | [`archive::GridArchive`] | adaptive grid, nondominated store | grows with archive size (dominance scan) |
//! | [`archive::GpsArchive`] | one incumbent per ray, local comparison | at most one |
//!
//! ```
//! use moea_core::archive::{ArchiveConfig, ArchiveKind};
//! use moea_core::engine::{run, RunConfig};
//!
//! let config = RunConfig::new("sch", ArchiveConfig::default_for(ArchiveKind::Grid), 20, 2_000, 7);
//! let result = run(&config).unwrap();
//! assert!(!result.front.is_empty());
//! assert!(result.summary.metrics["gd"] < 0.5);
//! ```
//!
//! The guide in `book/` walks through each component; its code listings
//! are compiled and run as doctests of this crate.

pub mod archive;
pub mod dominance;
pub mod engine;
pub mod error;
pub mod generator;
pub mod metrics;
pub mod problems;

pub use dominance::{
    compare, deterioration_check, nondominated_filter, Counters, Dominance, ObjectiveVector, Solution,
};
pub use error::{MoeaError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dominance.md")]
    mod dominance {}
    #[doc = include_str!("../../../book/src/archive-contract.md")]
    mod archive_contract {}
    #[doc = include_str!("../../../book/src/ranking-niching.md")]
    mod ranking_niching {}
    #[doc = include_str!("../../../book/src/adaptive-grid.md")]
    mod adaptive_grid {}
    #[doc = include_str!("../../../book/src/rays.md")]
    mod rays {}
    #[doc = include_str!("../../../book/src/generator.md")]
    mod generator {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/measuring.md")]
    mod measuring {}
}
