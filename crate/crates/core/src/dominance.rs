//! Objective-space primitives: vectors, solutions, Pareto dominance and the
//! counters every archiver reports into.
//!
//! All objectives are minimized. A problem that maximizes negates its
//! objectives before they reach this layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MoeaError, Result};

/// A point in M-dimensional objective space, M ≥ 2, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(MoeaError::TooFewObjectives(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(MoeaError::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &ObjectiveVector) -> f64 {
        euclidean(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = MoeaError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ObjectiveVector> for Vec<f64> {
    fn from(v: ObjectiveVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A decision vector together with its evaluated objectives.
///
/// `id` is a creation counter, unique within a run; every tie-break in the
/// archivers prefers the lower id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub id: u64,
    pub genome: Vec<f64>,
    pub objectives: Option<ObjectiveVector>,
}

impl Solution {
    pub fn unevaluated(id: u64, genome: Vec<f64>) -> Self {
        Self {
            id,
            genome,
            objectives: None,
        }
    }

    pub fn evaluated(id: u64, genome: Vec<f64>, objectives: ObjectiveVector) -> Self {
        Self {
            id,
            genome,
            objectives: Some(objectives),
        }
    }

    /// A solution with an empty genome, for feeding archivers raw points.
    pub fn from_objectives(id: u64, values: Vec<f64>) -> Result<Self> {
        Ok(Self::evaluated(id, Vec::new(), ObjectiveVector::new(values)?))
    }

    pub fn objectives(&self) -> Result<&ObjectiveVector> {
        self.objectives.as_ref().ok_or(MoeaError::NotEvaluated(self.id))
    }

    /// Objectives of a solution known to be evaluated (archive members).
    pub(crate) fn obj(&self) -> &ObjectiveVector {
        self.objectives
            .as_ref()
            .expect("archived solutions are always evaluated")
    }
}

/// Outcome of comparing `a` against `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dominance {
    Dominates,
    DominatedBy,
    Incomparable,
    Equal,
}

impl Dominance {
    pub fn flip(self) -> Self {
        match self {
            Dominance::Dominates => Dominance::DominatedBy,
            Dominance::DominatedBy => Dominance::Dominates,
            other => other,
        }
    }
}

/// Tallies that make the per-insertion cost of each archiver observable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub dominance_comparisons: u64,
    pub cell_lookups: u64,
    pub evaluations: u64,
}

/// Pareto comparison of two vectors, counted.
pub fn compare(a: &ObjectiveVector, b: &ObjectiveVector, counters: &mut Counters) -> Result<Dominance> {
    if a.dim() != b.dim() {
        return Err(MoeaError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    counters.dominance_comparisons += 1;
    Ok(relation(a.values(), b.values()))
}

/// Uncounted comparison on raw slices of equal length.
pub(crate) fn relation(a: &[f64], b: &[f64]) -> Dominance {
    let mut a_better = false;
    let mut b_better = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            a_better = true;
        } else if y < x {
            b_better = true;
        }
        if a_better && b_better {
            return Dominance::Incomparable;
        }
    }
    match (a_better, b_better) {
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (false, false) => Dominance::Equal,
        (true, true) => Dominance::Incomparable,
    }
}

pub(crate) fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    relation(a.values(), b.values()) == Dominance::Dominates
}

fn check_dims<'a>(points: impl IntoIterator<Item = &'a Solution>) -> Result<()> {
    let mut dim = None;
    for s in points {
        let d = s.objectives()?.dim();
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => return Err(MoeaError::DimensionMismatch { expected, found: d }),
            _ => {}
        }
    }
    Ok(())
}

/// Members of `points` that no other member dominates.
///
/// Equal duplicates are all kept. Output preserves input order.
pub fn nondominated_filter(points: &[Solution]) -> Result<Vec<Solution>> {
    check_dims(points)?;
    let keep: Vec<Solution> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q.obj(), p.obj())))
        .cloned()
        .collect();
    Ok(keep)
}

/// Number of `current` members dominated by at least one solution in
/// `history` (solutions previously evicted from an archive).
pub fn deterioration_check(history: &[Solution], current: &[Solution]) -> usize {
    current
        .iter()
        .filter(|c| {
            let Some(cv) = c.objectives.as_ref() else {
                return false;
            };
            history.iter().any(|h| {
                h.objectives
                    .as_ref()
                    .is_some_and(|hv| hv.dim() == cv.dim() && dominates(hv, cv))
            })
        })
        .count()
}
