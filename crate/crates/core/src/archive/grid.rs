//! Sampling-schema archiver over an adaptive hyper-grid.
//!
//! The archive only holds nondominated members. When full, a candidate may
//! displace a member of the most crowded cell if its own cell is strictly
//! less crowded. Bounds follow the members: a candidate that escapes the
//! grid triggers a re-fit to the envelope of the members plus the
//! candidate, padded by `inflation` of each range, and every member is
//! re-binned.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::archive::{check_candidate, Archive, ArchiveKind, FeedbackSignal, InsertOutcome, InsertStatus};
use crate::dominance::{compare, Counters, Dominance, ObjectiveVector, Solution};
use crate::error::{MoeaError, Result};

pub const DEFAULT_DIVISIONS: usize = 32;
pub const DEFAULT_INFLATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    divisions: usize,
}

/// Grid coordinates, one bin per objective, each in `[0, divisions)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex(pub Vec<usize>);

/// The vector lies outside the current grid bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfBounds;

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, divisions: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(MoeaError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if divisions == 0 {
            return Err(MoeaError::Config("grid divisions must be at least 1".into()));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u))
        {
            return Err(MoeaError::Config(
                "grid bounds need lower < upper in every objective".into(),
            ));
        }
        Ok(Self {
            lower,
            upper,
            divisions,
        })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, v: &ObjectiveVector) -> bool {
        v.values()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| l <= x && x <= u)
    }

    /// Bin of `v`: `floor((v - lower) / (upper - lower) * d)` per objective,
    /// with the upper face folded into the last bin. One lookup counted,
    /// whether or not `v` is inside.
    pub fn cell_of(&self, v: &ObjectiveVector, counters: &mut Counters) -> Result<CellIndex, OutOfBounds> {
        counters.cell_lookups += 1;
        if v.dim() != self.dim() || !self.contains(v) {
            return Err(OutOfBounds);
        }
        let d = self.divisions;
        let coords = v
            .values()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (l, u))| {
                let bin = ((x - l) / (u - l) * d as f64).floor() as usize;
                bin.min(d - 1)
            })
            .collect();
        Ok(CellIndex(coords))
    }
}

#[derive(Debug, Clone)]
pub struct GridArchive {
    dim: usize,
    capacity: usize,
    divisions: usize,
    inflation: f64,
    spec: Option<GridSpec>,
    members: BTreeMap<u64, Solution>,
    cells: BTreeMap<u64, CellIndex>,
    occupancy: BTreeMap<CellIndex, Vec<u64>>,
    evicted_log: Vec<Solution>,
}

impl GridArchive {
    /// With `spec == None` the first insertion fixes the bounds.
    pub fn new(dim: usize, capacity: usize, divisions: usize, spec: Option<GridSpec>) -> Result<Self> {
        if capacity == 0 {
            return Err(MoeaError::Config("archive capacity must be at least 1".into()));
        }
        if divisions == 0 {
            return Err(MoeaError::Config("grid divisions must be at least 1".into()));
        }
        if let Some(s) = &spec {
            if s.dim() != dim {
                return Err(MoeaError::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            capacity,
            divisions,
            inflation: DEFAULT_INFLATION,
            spec,
            members: BTreeMap::new(),
            cells: BTreeMap::new(),
            occupancy: BTreeMap::new(),
            evicted_log: Vec::new(),
        })
    }

    pub fn with_inflation(mut self, inflation: f64) -> Self {
        self.inflation = inflation;
        self
    }

    pub fn spec(&self) -> Option<&GridSpec> {
        self.spec.as_ref()
    }

    pub fn occupancy(&self) -> &BTreeMap<CellIndex, Vec<u64>> {
        &self.occupancy
    }

    pub fn cell_of_member(&self, id: u64) -> Option<&CellIndex> {
        self.cells.get(&id)
    }

    /// Re-fits the bounds so they cover every member and `v`. A no-op when
    /// `v` is already inside.
    pub fn adapt_bounds(&mut self, v: &ObjectiveVector, counters: &mut Counters) {
        if self.spec.as_ref().is_some_and(|s| s.contains(v)) {
            return;
        }
        let mut lo = v.values().to_vec();
        let mut hi = lo.clone();
        for m in self.members.values() {
            for (k, x) in m.obj().values().iter().enumerate() {
                lo[k] = lo[k].min(*x);
                hi[k] = hi[k].max(*x);
            }
        }
        for k in 0..self.dim {
            let range = hi[k] - lo[k];
            let base = if range > 0.0 { range } else { lo[k].abs().max(1.0) };
            let mut pad = self.inflation * base;
            if range + 2.0 * pad <= 0.0 {
                pad = 0.5 * base;
            }
            lo[k] -= pad;
            hi[k] += pad;
        }
        self.spec = Some(GridSpec::new(lo, hi, self.divisions).expect("padded envelope is non-degenerate"));
        self.rebin(counters);
    }

    fn rebin(&mut self, counters: &mut Counters) {
        let spec = self.spec.as_ref().expect("bounds set before re-binning");
        self.occupancy.clear();
        self.cells.clear();
        for (id, m) in &self.members {
            let cell = spec
                .cell_of(m.obj(), counters)
                .expect("members lie inside the fitted envelope");
            self.occupancy.entry(cell.clone()).or_default().push(*id);
            self.cells.insert(*id, cell);
        }
    }

    fn locate(&mut self, v: &ObjectiveVector, counters: &mut Counters) -> CellIndex {
        if let Some(spec) = &self.spec {
            if let Ok(cell) = spec.cell_of(v, counters) {
                return cell;
            }
        }
        self.adapt_bounds(v, counters);
        self.spec
            .as_ref()
            .expect("bounds set")
            .cell_of(v, counters)
            .expect("adapted bounds contain the escaping vector")
    }

    fn occupancy_at(&self, cell: &CellIndex) -> usize {
        self.occupancy.get(cell).map_or(0, Vec::len)
    }

    fn remove_member(&mut self, id: u64) -> Solution {
        let s = self.members.remove(&id).expect("member present");
        let cell = self.cells.remove(&id).expect("member binned");
        let slot = self.occupancy.get_mut(&cell).expect("occupied cell");
        slot.retain(|&x| x != id);
        if slot.is_empty() {
            self.occupancy.remove(&cell);
        }
        s
    }

    fn add_member(&mut self, s: Solution, cell: CellIndex) {
        let slot = self.occupancy.entry(cell.clone()).or_default();
        let at = slot.partition_point(|&x| x < s.id);
        slot.insert(at, s.id);
        self.cells.insert(s.id, cell);
        self.members.insert(s.id, s);
    }

    /// The most occupied cell; ties go to the smallest cell index.
    fn most_crowded(&self) -> Option<(&CellIndex, &Vec<u64>)> {
        self.occupancy
            .iter()
            .fold(None, |best: Option<(&CellIndex, &Vec<u64>)>, (c, ids)| match best {
                Some((_, b)) if b.len() >= ids.len() => best,
                _ => Some((c, ids)),
            })
    }

    pub fn insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)> {
        check_candidate(&candidate, self.dim)?;
        let mut comparisons = 0;
        let mut dominated = Vec::new();
        for (id, m) in &self.members {
            comparisons += 1;
            match compare(candidate.obj(), m.obj(), counters)? {
                Dominance::DominatedBy | Dominance::Equal => {
                    let hint = match &self.spec {
                        Some(spec) => spec
                            .cell_of(candidate.obj(), counters)
                            .map_or(0, |c| self.occupancy_at(&c)),
                        None => 0,
                    };
                    return Ok(self.reject(comparisons, hint));
                }
                Dominance::Dominates => dominated.push(*id),
                Dominance::Incomparable => {}
            }
        }

        let mut evicted = Vec::new();
        for id in dominated {
            let s = self.remove_member(id);
            evicted.push(s.id);
            self.evicted_log.push(s);
        }

        let cell = self.locate(candidate.obj(), counters);
        if self.members.len() >= self.capacity {
            let (crowded_len, victim) = self
                .most_crowded()
                .map(|(_, ids)| (ids.len(), ids[0]))
                .expect("full archive has occupied cells");
            let here = self.occupancy_at(&cell);
            if here >= crowded_len {
                return Ok(self.reject(comparisons, here));
            }
            let s = self.remove_member(victim);
            evicted.push(s.id);
            self.evicted_log.push(s);
        }
        self.add_member(candidate, cell.clone());

        evicted.sort_unstable();
        let status = if evicted.is_empty() {
            InsertStatus::AcceptedNew
        } else {
            InsertStatus::AcceptedReplacing(evicted)
        };
        Ok((
            InsertOutcome { status, comparisons },
            FeedbackSignal {
                accepted: true,
                crowding_hint: self.occupancy_at(&cell) as f64,
                archive_size: self.members.len(),
            },
        ))
    }

    fn reject(&self, comparisons: u64, occupancy: usize) -> (InsertOutcome, FeedbackSignal) {
        (
            InsertOutcome {
                status: InsertStatus::Rejected,
                comparisons,
            },
            FeedbackSignal {
                accepted: false,
                crowding_hint: occupancy as f64,
                archive_size: self.members.len(),
            },
        )
    }
}

impl Archive for GridArchive {
    fn kind(&self) -> ArchiveKind {
        ArchiveKind::Grid
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn max_len(&self) -> usize {
        self.capacity
    }

    fn try_insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)> {
        self.insert(candidate, counters)
    }

    fn members(&self) -> Vec<Solution> {
        self.members.values().cloned().collect()
    }

    fn finalize(&self) -> Vec<Solution> {
        self.members()
    }

    fn evicted(&self) -> &[Solution] {
        &self.evicted_log
    }
}
