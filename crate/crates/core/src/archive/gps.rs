//! Sampling-schema archiver over angular rays from a reference point.
//!
//! Each ray keeps a single incumbent: the closest point to the reference
//! seen so far on that ray. A candidate is only ever compared with the
//! incumbent of its own ray, so dominated incumbents can survive the main
//! loop; `finalize` filters them out.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::archive::{check_candidate, Archive, ArchiveKind, FeedbackSignal, InsertOutcome, InsertStatus};
use crate::dominance::{euclidean, nondominated_filter, Counters, ObjectiveVector, Solution};
use crate::error::{MoeaError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    reference: Vec<f64>,
    rays_per_axis: usize,
}

/// Angular bin of a direction: M−1 coordinates, each in `[0, K)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RayIndex(pub Vec<usize>);

impl RaySpec {
    pub fn new(reference: Vec<f64>, rays_per_axis: usize) -> Result<Self> {
        if reference.len() < 2 {
            return Err(MoeaError::TooFewObjectives(reference.len()));
        }
        if rays_per_axis == 0 {
            return Err(MoeaError::Config("rays_per_axis must be at least 1".into()));
        }
        if let Some((index, &value)) = reference.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(MoeaError::NonFinite { index, value });
        }
        Ok(Self {
            reference,
            rays_per_axis,
        })
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn rays_per_axis(&self) -> usize {
        self.rays_per_axis
    }

    pub fn dim(&self) -> usize {
        self.reference.len()
    }

    /// `K^(M-1)`, saturating.
    pub fn total_rays(&self) -> usize {
        (0..self.dim() - 1).fold(1usize, |acc, _| acc.saturating_mul(self.rays_per_axis))
    }

    /// Bins the hyperspherical angles of `v - reference`. Angle `k` is
    /// `atan2(|w[k+1..]|, w[k])`, which lies in `[0, π/2]` for a
    /// non-negative offset `w`; `π/2` folds into the last bin.
    pub fn ray_of(&self, v: &ObjectiveVector, counters: &mut Counters) -> Result<RayIndex> {
        if v.dim() != self.dim() {
            return Err(MoeaError::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        counters.cell_lookups += 1;
        let w: Vec<f64> = v.values().iter().zip(&self.reference).map(|(x, r)| x - r).collect();
        if w.iter().any(|&x| x < 0.0) {
            return Err(MoeaError::BelowReference);
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(MoeaError::DegenerateDirection);
        }
        let k = self.rays_per_axis;
        let mut tail_sq: f64 = w.iter().map(|x| x * x).sum();
        let mut coords = Vec::with_capacity(w.len() - 1);
        for x in &w[..w.len() - 1] {
            tail_sq -= x * x;
            let angle = tail_sq.max(0.0).sqrt().atan2(*x);
            let bin = (angle / FRAC_PI_2 * k as f64).floor() as usize;
            coords.push(bin.min(k - 1));
        }
        Ok(RayIndex(coords))
    }

    pub fn distance(&self, v: &ObjectiveVector) -> f64 {
        euclidean(v.values(), &self.reference)
    }
}

#[derive(Debug, Clone)]
pub struct GpsArchive {
    spec: RaySpec,
    incumbents: BTreeMap<RayIndex, Solution>,
    evicted_log: Vec<Solution>,
    /// `(evicted id, replacer id)` for every replacement, in order.
    replacements: Vec<(u64, u64)>,
}

impl GpsArchive {
    pub fn new(spec: RaySpec) -> Self {
        Self {
            spec,
            incumbents: BTreeMap::new(),
            evicted_log: Vec::new(),
            replacements: Vec::new(),
        }
    }

    pub fn spec(&self) -> &RaySpec {
        &self.spec
    }

    pub fn incumbents(&self) -> &BTreeMap<RayIndex, Solution> {
        &self.incumbents
    }

    pub fn occupied_rays(&self) -> usize {
        self.incumbents.len()
    }

    pub fn insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)> {
        check_candidate(&candidate, self.spec.dim())?;
        let ray = self.spec.ray_of(candidate.obj(), counters)?;
        let (status, comparisons, occupied) = match self.incumbents.get(&ray) {
            None => {
                self.incumbents.insert(ray, candidate);
                (InsertStatus::AcceptedNew, 0, false)
            }
            Some(incumbent) => {
                counters.dominance_comparisons += 1;
                if self.spec.distance(candidate.obj()) < self.spec.distance(incumbent.obj()) {
                    let replacer = candidate.id;
                    let old = self.incumbents.insert(ray, candidate).expect("occupied ray");
                    self.replacements.push((old.id, replacer));
                    let status = InsertStatus::AcceptedReplacing(vec![old.id]);
                    self.evicted_log.push(old);
                    (status, 1, true)
                } else {
                    (InsertStatus::Rejected, 1, true)
                }
            }
        };
        let accepted = !matches!(status, InsertStatus::Rejected);
        Ok((
            InsertOutcome { status, comparisons },
            FeedbackSignal {
                accepted,
                crowding_hint: if occupied { 1.0 } else { 0.0 },
                archive_size: self.incumbents.len(),
            },
        ))
    }

    /// Replacements where the evicted solution was strictly closer to the
    /// reference than its replacer. Recomputed from the logged solutions.
    pub fn ray_monotonicity_violations(&self) -> usize {
        let by_id: HashMap<u64, &Solution> = self
            .incumbents
            .values()
            .chain(&self.evicted_log)
            .map(|s| (s.id, s))
            .collect();
        self.replacements
            .iter()
            .filter(|(old, new)| {
                let d_old = self.spec.distance(by_id[old].obj());
                let d_new = self.spec.distance(by_id[new].obj());
                d_old < d_new
            })
            .count()
    }
}

impl Archive for GpsArchive {
    fn kind(&self) -> ArchiveKind {
        ArchiveKind::Gps
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn len(&self) -> usize {
        self.incumbents.len()
    }

    fn max_len(&self) -> usize {
        self.spec.total_rays()
    }

    fn try_insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)> {
        self.insert(candidate, counters)
    }

    fn members(&self) -> Vec<Solution> {
        let mut out: Vec<Solution> = self.incumbents.values().cloned().collect();
        out.sort_by_key(|s| s.id);
        out
    }

    fn finalize(&self) -> Vec<Solution> {
        nondominated_filter(&self.members()).expect("incumbents share the archive dimension")
    }

    fn evicted(&self) -> &[Solution] {
        &self.evicted_log
    }

    fn monotonicity_violations(&self) -> Option<usize> {
        Some(self.ray_monotonicity_violations())
    }
}
