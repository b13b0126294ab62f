//! Convergence and diversity indicators, plus the complexity sweep that
//! measures per-insertion comparison cost against archive size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::archive::{ArchiveConfig, ArchiveKind, DEFAULT_DIVISIONS, DEFAULT_INFLATION};
use crate::dominance::{relation, Counters, Dominance, ObjectiveVector, Solution};
use crate::error::{MoeaError, Result};

/// Stable metric names used in stats and summary output.
pub const GD: &str = "gd";
pub const SPACING: &str = "spacing";
pub const COVERAGE: &str = "coverage";
pub const CMP_SLOPE: &str = "cmp_slope";

/// Mean Euclidean distance from each front point to its nearest reference point.
pub fn generational_distance(front: &[ObjectiveVector], reference: &[ObjectiveVector]) -> Result<f64> {
    if front.is_empty() || reference.is_empty() {
        return Err(MoeaError::EmptyInput(
            "generational distance needs non-empty front and reference",
        ));
    }
    let total: f64 = front
        .iter()
        .map(|p| reference.iter().map(|r| p.distance(r)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(total / front.len() as f64)
}

/// Sample standard deviation (n − 1) of each point's distance to its
/// nearest neighbour in the front.
pub fn spacing(front: &[ObjectiveVector]) -> Result<f64> {
    if front.len() < 2 {
        return Err(MoeaError::EmptyInput("spacing needs at least two points"));
    }
    let nearest: Vec<f64> = front
        .iter()
        .enumerate()
        .map(|(i, p)| {
            front
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| p.distance(q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = nearest.len() as f64;
    let mean = nearest.iter().sum::<f64>() / n;
    let var = nearest.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Fraction of `b` weakly dominated by at least one member of `a`.
pub fn coverage(a: &[ObjectiveVector], b: &[ObjectiveVector]) -> Result<f64> {
    if b.is_empty() {
        return Err(MoeaError::EmptyInput("coverage needs a non-empty second set"));
    }
    let covered = b
        .iter()
        .filter(|y| {
            a.iter().any(|x| {
                x.dim() == y.dim()
                    && matches!(
                        relation(x.values(), y.values()),
                        Dominance::Dominates | Dominance::Equal
                    )
            })
        })
        .count();
    Ok(covered as f64 / b.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub size: usize,
    pub mean_comparisons: f64,
    pub mean_cell_lookups: f64,
    pub measured_insertions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub archiver: ArchiveKind,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of ln(mean comparisons) against ln(size).
    pub slope: f64,
    /// 95% interval for the slope; absent with only two sizes.
    pub slope_ci: Option<[f64; 2]>,
}

/// Insertions measured per size, after the warm-up.
pub const SWEEP_MEASURED: usize = 4000;

/// Points scattered just above the linear front `f1 + f2 = 1`; most pairs
/// are mutually nondominated.
pub fn incomparable_rich_stream(seed: u64) -> impl Iterator<Item = Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || {
        let t: f64 = rng.gen();
        let a: f64 = rng.gen_range(0.0..1e-4);
        let b: f64 = rng.gen_range(0.0..1e-4);
        vec![t + a + 1e-9, 1.0 - t + b + 1e-9]
    })
}

fn sweep_archive(kind: ArchiveKind, size: usize) -> ArchiveConfig {
    match kind {
        ArchiveKind::Rn => ArchiveConfig::Rn { capacity: size },
        ArchiveKind::Grid => ArchiveConfig::Grid {
            capacity: size,
            divisions: DEFAULT_DIVISIONS,
            inflation: DEFAULT_INFLATION,
            lower: None,
            upper: None,
        },
        ArchiveKind::Gps => ArchiveConfig::Gps {
            rays_per_axis: size,
            reference: Some(vec![0.0, 0.0]),
        },
    }
}

/// For each size N, feeds the seeded stream into a capacity-N archive (N
/// rays for the ray archiver), skips the first N insertions, and averages
/// the comparisons of the next [`SWEEP_MEASURED`].
pub fn complexity_sweep(kind: ArchiveKind, sizes: &[usize], seed: u64) -> Result<ComplexityReport> {
    if sizes.len() < 2 {
        return Err(MoeaError::Config("a complexity sweep needs at least two sizes".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] < 2 {
        return Err(MoeaError::Config(
            "sweep sizes must be strictly increasing and at least 2".into(),
        ));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut archive = sweep_archive(kind, size).build(2, &[0.0, 0.0])?;
        let mut counters = Counters::default();
        let mut stream = incomparable_rich_stream(seed);
        let mut next_id = 0u64;
        let mut feed = |archive: &mut Box<dyn crate::archive::Archive>, counters: &mut Counters| -> Result<()> {
            let v = stream.next().expect("endless stream");
            let s = Solution::from_objectives(next_id, v)?;
            next_id += 1;
            archive.try_insert(s, counters)?;
            Ok(())
        };
        for _ in 0..size {
            feed(&mut archive, &mut counters)?;
        }
        let before = counters;
        for _ in 0..SWEEP_MEASURED {
            feed(&mut archive, &mut counters)?;
        }
        let m = SWEEP_MEASURED as f64;
        points.push(SweepPoint {
            size,
            mean_comparisons: (counters.dominance_comparisons - before.dominance_comparisons) as f64 / m,
            mean_cell_lookups: (counters.cell_lookups - before.cell_lookups) as f64 / m,
            measured_insertions: SWEEP_MEASURED,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.size as f64).ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.mean_comparisons.max(f64::MIN_POSITIVE).ln())
        .collect();
    let (slope, slope_ci) = fit_slope(&xs, &ys);
    Ok(ComplexityReport {
        archiver: kind,
        seed,
        points,
        slope,
        slope_ci,
    })
}

/// Ordinary least-squares slope with a 95% Student-t interval.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, Option<[f64; 2]>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() < 3 {
        return (slope, None);
    }
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = n - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (slope, Some([slope - t * se, slope + t * se]))
}
