//! The archive contract shared by all archivers: insertion with an outcome
//! report, a feedback signal for the population update, and a post-loop
//! `finalize` that returns the reported Pareto set.

mod gps;
mod grid;
mod rn;

pub use gps::{GpsArchive, RayIndex, RaySpec};
pub use grid::{CellIndex, GridArchive, GridSpec, OutOfBounds, DEFAULT_DIVISIONS, DEFAULT_INFLATION};
pub use rn::{strength_fitness, RnArchive};

use serde::{Deserialize, Serialize};

use crate::dominance::{Counters, Solution};
use crate::error::{MoeaError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InsertStatus {
    AcceptedNew,
    /// Ids of the members that left the archive during this call.
    AcceptedReplacing(Vec<u64>),
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertOutcome {
    pub status: InsertStatus,
    /// Dominance (or, for the ray archiver, distance) comparisons spent on this call.
    pub comparisons: u64,
}

impl InsertOutcome {
    pub fn accepted(&self) -> bool {
        !matches!(self.status, InsertStatus::Rejected)
    }

    pub fn evicted_ids(&self) -> &[u64] {
        match &self.status {
            InsertStatus::AcceptedReplacing(ids) => ids,
            _ => &[],
        }
    }
}

/// What the archive tells the population updater (and the parent selector)
/// after an insertion attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSignal {
    pub accepted: bool,
    /// Density near the candidate, on a scale each archiver defines.
    pub crowding_hint: f64,
    /// Member count after the attempt.
    pub archive_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchiveKind {
    Rn,
    Grid,
    Gps,
}

impl ArchiveKind {
    pub const ALL: [ArchiveKind; 3] = [ArchiveKind::Rn, ArchiveKind::Grid, ArchiveKind::Gps];

    pub fn name(self) -> &'static str {
        match self {
            ArchiveKind::Rn => "rn",
            ArchiveKind::Grid => "grid",
            ArchiveKind::Gps => "gps",
        }
    }

    /// Whether the archiver follows the sampling schema (local dominance).
    pub fn is_sampling(self) -> bool {
        !matches!(self, ArchiveKind::Rn)
    }
}

impl std::str::FromStr for ArchiveKind {
    type Err = MoeaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rn" => Ok(ArchiveKind::Rn),
            "grid" => Ok(ArchiveKind::Grid),
            "gps" => Ok(ArchiveKind::Gps),
            other => Err(MoeaError::Config(format!("unknown archiver kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for ArchiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub trait Archive: Send {
    fn kind(&self) -> ArchiveKind;

    /// Objective-space dimension M every candidate must match.
    fn dim(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper bound on `len()`: the capacity, or the total ray count.
    fn max_len(&self) -> usize;

    fn try_insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)>;

    /// Snapshot of the current members, ordered by id.
    fn members(&self) -> Vec<Solution>;

    /// The reported Pareto set: the nondominated members.
    fn finalize(&self) -> Vec<Solution>;

    /// Every solution that has left the archive, in eviction order.
    fn evicted(&self) -> &[Solution];

    /// Per-ray replacements that moved away from the reference point; only
    /// meaningful for the ray archiver.
    fn monotonicity_violations(&self) -> Option<usize> {
        None
    }
}

pub(crate) fn check_candidate(candidate: &Solution, dim: usize) -> Result<()> {
    let found = candidate.objectives()?.dim();
    if found != dim {
        return Err(MoeaError::DimensionMismatch { expected: dim, found });
    }
    Ok(())
}

fn default_divisions() -> usize {
    DEFAULT_DIVISIONS
}

fn default_inflation() -> f64 {
    DEFAULT_INFLATION
}

fn default_rays() -> usize {
    64
}

/// Archiver selection and parameters as they appear in run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArchiveConfig {
    Rn {
        capacity: usize,
    },
    Grid {
        capacity: usize,
        #[serde(default = "default_divisions")]
        divisions: usize,
        #[serde(default = "default_inflation")]
        inflation: f64,
        /// Initial grid bounds; learned from the first insertions when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<f64>>,
    },
    Gps {
        #[serde(default = "default_rays")]
        rays_per_axis: usize,
        /// Defaults to the problem's objective lower bound.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<Vec<f64>>,
    },
}

impl ArchiveConfig {
    pub fn kind(&self) -> ArchiveKind {
        match self {
            ArchiveConfig::Rn { .. } => ArchiveKind::Rn,
            ArchiveConfig::Grid { .. } => ArchiveKind::Grid,
            ArchiveConfig::Gps { .. } => ArchiveKind::Gps,
        }
    }

    /// Default parameters for a kind: capacity 100, 32 divisions, 64 rays.
    pub fn default_for(kind: ArchiveKind) -> Self {
        match kind {
            ArchiveKind::Rn => ArchiveConfig::Rn { capacity: 100 },
            ArchiveKind::Grid => ArchiveConfig::Grid {
                capacity: 100,
                divisions: DEFAULT_DIVISIONS,
                inflation: DEFAULT_INFLATION,
                lower: None,
                upper: None,
            },
            ArchiveKind::Gps => ArchiveConfig::Gps {
                rays_per_axis: default_rays(),
                reference: None,
            },
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(MoeaError::Config(msg));
        match self {
            ArchiveConfig::Rn { capacity } | ArchiveConfig::Grid { capacity, .. } if *capacity == 0 => {
                bad("archive capacity must be at least 1".into())
            }
            ArchiveConfig::Grid {
                divisions,
                inflation,
                lower,
                upper,
                ..
            } => {
                if *divisions == 0 {
                    return bad("grid divisions must be at least 1".into());
                }
                if !(inflation.is_finite() && *inflation >= 0.0) {
                    return bad("grid inflation must be a non-negative number".into());
                }
                match (lower, upper) {
                    (None, None) => Ok(()),
                    (Some(l), Some(u)) => GridSpec::new(l.clone(), u.clone(), *divisions)
                        .and_then(|s| {
                            if s.dim() == dim {
                                Ok(())
                            } else {
                                Err(MoeaError::Config(format!(
                                    "grid bounds have dimension {}, run has {dim}",
                                    s.dim()
                                )))
                            }
                        })
                        .map_err(|e| MoeaError::Config(e.to_string())),
                    _ => bad("grid bounds need both `lower` and `upper`".into()),
                }
            }
            ArchiveConfig::Gps {
                rays_per_axis,
                reference,
            } => {
                if *rays_per_axis == 0 {
                    return bad("rays_per_axis must be at least 1".into());
                }
                if let Some(r) = reference {
                    if r.len() != dim || r.iter().any(|v| !v.is_finite()) {
                        return bad(format!("gps reference must have {dim} finite entries"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Instantiates the archiver for an M-objective run. `default_reference`
    /// is used by the ray archiver when no reference is configured.
    pub fn build(&self, dim: usize, default_reference: &[f64]) -> Result<Box<dyn Archive>> {
        self.validate(dim)?;
        Ok(match self {
            ArchiveConfig::Rn { capacity } => Box::new(RnArchive::new(dim, *capacity)),
            ArchiveConfig::Grid {
                capacity,
                divisions,
                inflation,
                lower,
                upper,
            } => {
                let spec = match (lower, upper) {
                    (Some(l), Some(u)) => Some(GridSpec::new(l.clone(), u.clone(), *divisions)?),
                    _ => None,
                };
                Box::new(GridArchive::new(dim, *capacity, *divisions, spec)?.with_inflation(*inflation))
            }
            ArchiveConfig::Gps {
                rays_per_axis,
                reference,
            } => {
                let r = reference.clone().unwrap_or_else(|| default_reference.to_vec());
                if r.len() != dim {
                    return Err(MoeaError::Config(format!("gps reference must have {dim} entries")));
                }
                Box::new(GpsArchive::new(RaySpec::new(r, *rays_per_axis)?))
            }
        })
    }
}
