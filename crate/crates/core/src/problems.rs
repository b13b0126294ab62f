//! Benchmark problems: SCH, ZDT1, ZDT2 with analytic fronts, and LATTICE, a
//! seeded discrete table small enough to enumerate exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dominance::{dominates, ObjectiveVector};
use crate::error::{MoeaError, Result};

/// Decision dimension of the ZDT problems.
pub const ZDT_DIM: usize = 30;

/// Largest table `brute_force_front` accepts (`k² ≤ 10⁴`).
pub const LATTICE_ORACLE_LIMIT: usize = 10_000;

const LATTICE_MAX_K: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Sch,
    Zdt1 { n: usize },
    Zdt2 { n: usize },
    Lattice(Lattice),
}

/// A `k × k` grid of integer decisions whose objectives come from a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    k: usize,
    seed: u64,
    table: Vec<[f64; 2]>,
}

impl Lattice {
    /// Table entries drawn uniformly from `[0, 1)²`, row-major over `(i, j)`.
    pub fn seeded(k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > LATTICE_MAX_K {
            return Err(MoeaError::Config(format!(
                "lattice size k must be in 1..={LATTICE_MAX_K}, got {k}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = (0..k * k).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        Ok(Self { k, seed, table })
    }

    /// A lattice with an explicit row-major table of `k²` entries.
    pub fn from_table(k: usize, table: Vec<[f64; 2]>) -> Result<Self> {
        if k == 0 || table.len() != k * k {
            return Err(MoeaError::Config(format!(
                "lattice table must have k² = {} entries",
                k * k
            )));
        }
        if table.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MoeaError::Config("lattice table entries must be finite".into()));
        }
        Ok(Self { k, seed: 0, table })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn value(&self, i: usize, j: usize) -> ObjectiveVector {
        ObjectiveVector::new(self.table[i * self.k + j].to_vec()).expect("finite table entry")
    }

    /// Every `(genome, objectives)` pair in row-major order.
    pub fn all_points(&self) -> Vec<(Vec<f64>, ObjectiveVector)> {
        let mut out = Vec::with_capacity(self.k * self.k);
        for i in 0..self.k {
            for j in 0..self.k {
                out.push((vec![i as f64, j as f64], self.value(i, j)));
            }
        }
        out
    }
}

impl Problem {
    /// Parses `sch`, `zdt1`, `zdt2` or `lattice:<k>:<seed>`.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "sch" => Ok(Problem::Sch),
            "zdt1" => Ok(Problem::Zdt1 { n: ZDT_DIM }),
            "zdt2" => Ok(Problem::Zdt2 { n: ZDT_DIM }),
            _ => {
                let parts: Vec<&str> = id.split(':').collect();
                match parts.as_slice() {
                    ["lattice", k, seed] => {
                        let k = k
                            .parse()
                            .map_err(|_| MoeaError::Config(format!("bad lattice size in `{id}`")))?;
                        let seed = seed
                            .parse()
                            .map_err(|_| MoeaError::Config(format!("bad lattice seed in `{id}`")))?;
                        Ok(Problem::Lattice(Lattice::seeded(k, seed)?))
                    }
                    _ => Err(MoeaError::Config(format!("unknown problem id `{id}`"))),
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Problem::Sch => "sch".into(),
            Problem::Zdt1 { .. } => "zdt1".into(),
            Problem::Zdt2 { .. } => "zdt2".into(),
            Problem::Lattice(l) => format!("lattice:{}:{}", l.k, l.seed),
        }
    }

    pub fn num_objectives(&self) -> usize {
        2
    }

    pub fn decision_dim(&self) -> usize {
        match self {
            Problem::Sch => 1,
            Problem::Zdt1 { n } | Problem::Zdt2 { n } => *n,
            Problem::Lattice(_) => 2,
        }
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Problem::Sch => vec![(-3.0, 5.0)],
            Problem::Zdt1 { n } | Problem::Zdt2 { n } => vec![(0.0, 1.0); *n],
            Problem::Lattice(l) => vec![(0.0, (l.k - 1) as f64); 2],
        }
    }

    /// Componentwise lower bound of the attainable objectives.
    pub fn objective_lower_bound(&self) -> Vec<f64> {
        vec![0.0; self.num_objectives()]
    }

    pub fn evaluate(&self, genome: &[f64]) -> Result<ObjectiveVector> {
        let bounds = self.bounds();
        if genome.len() != bounds.len() {
            return Err(MoeaError::DimensionMismatch {
                expected: bounds.len(),
                found: genome.len(),
            });
        }
        for (index, (&value, &(lower, upper))) in genome.iter().zip(&bounds).enumerate() {
            if !(lower <= value && value <= upper) {
                return Err(MoeaError::GenomeOutOfBounds {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        let values = match self {
            Problem::Sch => {
                let x = genome[0];
                vec![x * x, (x - 2.0) * (x - 2.0)]
            }
            Problem::Zdt1 { n } | Problem::Zdt2 { n } => {
                let f1 = genome[0];
                let g = 1.0 + 9.0 * genome[1..].iter().sum::<f64>() / (*n as f64 - 1.0);
                let h = if matches!(self, Problem::Zdt1 { .. }) {
                    1.0 - (f1 / g).sqrt()
                } else {
                    1.0 - (f1 / g).powi(2)
                };
                vec![f1, g * h]
            }
            Problem::Lattice(l) => {
                let i = genome[0].round() as usize;
                let j = genome[1].round() as usize;
                return Ok(l.value(i, j));
            }
        };
        ObjectiveVector::new(values)
    }

    pub fn has_known_front(&self) -> bool {
        !matches!(self, Problem::Lattice(_))
    }

    /// `count` evenly spaced points on the analytic Pareto front.
    pub fn true_front_sample(&self, count: usize) -> Result<Vec<ObjectiveVector>> {
        if !self.has_known_front() {
            return Err(MoeaError::UnsupportedFront(self.id()));
        }
        let t = |i: usize| if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
        (0..count)
            .map(|i| {
                let values = match self {
                    Problem::Sch => {
                        let x = 2.0 * t(i);
                        vec![x * x, (x - 2.0) * (x - 2.0)]
                    }
                    Problem::Zdt1 { .. } => vec![t(i), 1.0 - t(i).sqrt()],
                    Problem::Zdt2 { .. } => vec![t(i), 1.0 - t(i) * t(i)],
                    Problem::Lattice(_) => unreachable!("checked above"),
                };
                ObjectiveVector::new(values)
            })
            .collect()
    }
}

/// Exact Pareto set of a lattice table by all-pairs comparison.
pub fn brute_force_front(lattice: &Lattice) -> Result<Vec<ObjectiveVector>> {
    let n = lattice.k * lattice.k;
    if n > LATTICE_ORACLE_LIMIT {
        return Err(MoeaError::SizeGuard(format!(
            "lattice k = {} has {n} points, oracle limit is {LATTICE_ORACLE_LIMIT}",
            lattice.k
        )));
    }
    let points: Vec<ObjectiveVector> = lattice.all_points().into_iter().map(|(_, v)| v).collect();
    Ok(points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect())
}
