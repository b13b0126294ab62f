//! Ranking-alike + niching-alike archiver: global dominance filtering first,
//! then average-linkage clustering truncation when the archive overflows.

use crate::archive::{check_candidate, Archive, ArchiveKind, FeedbackSignal, InsertOutcome, InsertStatus};
use crate::dominance::{compare, dominates, relation, Counters, Dominance, Solution};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct RnArchive {
    dim: usize,
    capacity: usize,
    members: Vec<Solution>,
    evicted_log: Vec<Solution>,
}

impl RnArchive {
    pub fn new(dim: usize, capacity: usize) -> Self {
        assert!(capacity >= 1, "capacity must be at least 1");
        Self {
            dim,
            capacity,
            members: Vec::new(),
            evicted_log: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, candidate: Solution, counters: &mut Counters) -> Result<(InsertOutcome, FeedbackSignal)> {
        check_candidate(&candidate, self.dim)?;
        let mut comparisons = 0;
        let mut dominated = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            comparisons += 1;
            match compare(candidate.obj(), m.obj(), counters)? {
                Dominance::DominatedBy | Dominance::Equal => {
                    let hint = self.crowding_hint(&candidate);
                    return Ok(self.reject(comparisons, hint));
                }
                Dominance::Dominates => dominated.push(i),
                Dominance::Incomparable => {}
            }
        }

        let mut evicted_ids = Vec::with_capacity(dominated.len());
        for &i in dominated.iter().rev() {
            let gone = self.members.remove(i);
            evicted_ids.push(gone.id);
            self.evicted_log.push(gone);
        }
        let candidate_id = candidate.id;
        self.members.push(candidate);

        if self.members.len() > self.capacity {
            let removed = self.truncate_to(self.capacity);
            if removed.iter().any(|s| s.id == candidate_id) {
                // Overflow only happens when nothing was dominated, so the
                // archive is back to its state before the call.
                debug_assert!(evicted_ids.is_empty() && removed.len() == 1);
                let hint = removed.first().map(|c| self.crowding_hint(c)).unwrap_or(0.0);
                return Ok(self.reject(comparisons, hint));
            }
            for s in removed {
                evicted_ids.push(s.id);
                self.evicted_log.push(s);
            }
        }

        evicted_ids.sort_unstable();
        let status = if evicted_ids.is_empty() {
            InsertStatus::AcceptedNew
        } else {
            InsertStatus::AcceptedReplacing(evicted_ids)
        };
        let hint = self
            .members
            .iter()
            .find(|m| m.id == candidate_id)
            .map(|c| self.crowding_hint(c))
            .unwrap_or(0.0);
        Ok((
            InsertOutcome { status, comparisons },
            FeedbackSignal {
                accepted: true,
                crowding_hint: hint,
                archive_size: self.members.len(),
            },
        ))
    }

    fn reject(&self, comparisons: u64, crowding_hint: f64) -> (InsertOutcome, FeedbackSignal) {
        (
            InsertOutcome {
                status: InsertStatus::Rejected,
                comparisons,
            },
            FeedbackSignal {
                accepted: false,
                crowding_hint,
                archive_size: self.members.len(),
            },
        )
    }

    /// `1 / (1 + d)` with `d` the distance from `s` to its nearest other
    /// member; 0 when there is no other member.
    fn crowding_hint(&self, s: &Solution) -> f64 {
        self.members
            .iter()
            .filter(|m| m.id != s.id)
            .map(|m| m.obj().distance(s.obj()))
            .min_by(f64::total_cmp)
            .map_or(0.0, |d| 1.0 / (1.0 + d))
    }

    /// Reduces the archive to `target` members by average-linkage clustering,
    /// keeping one representative per cluster. Evicted members are logged and
    /// returned.
    pub fn cluster_truncate(&mut self, target: usize) -> Vec<Solution> {
        let removed = self.truncate_to(target);
        self.evicted_log.extend(removed.iter().cloned());
        removed
    }

    fn truncate_to(&mut self, target: usize) -> Vec<Solution> {
        let target = target.max(1);
        if self.members.len() <= target {
            return Vec::new();
        }
        let points: Vec<&[f64]> = self.members.iter().map(|m| m.obj().values()).collect();
        let ids: Vec<u64> = self.members.iter().map(|m| m.id).collect();
        let keep = average_linkage_representatives(&points, &ids, target);

        let mut removed = Vec::new();
        let mut kept = Vec::with_capacity(target);
        for (i, m) in std::mem::take(&mut self.members).into_iter().enumerate() {
            if keep[i] {
                kept.push(m);
            } else {
                removed.push(m);
            }
        }
        self.members = kept;
        removed
    }
}

/// Marks one representative per cluster after agglomerating `points` into
/// `target` clusters.
///
/// Merge order: smallest average-linkage distance, then lowest pair of
/// cluster keys (a cluster's key is its lowest member id). Representative:
/// the member with the smallest mean distance to its cluster mates, then
/// lowest id.
fn average_linkage_representatives(points: &[&[f64]], ids: &[u64], target: usize) -> Vec<bool> {
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = crate::dominance::euclidean(points[i], points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    // Cluster `c` lives in slot `c`; `linkage` is the inter-cluster matrix.
    let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut keys: Vec<u64> = ids.to_vec();
    let mut linkage = dist.clone();
    let mut active = n;

    while active > target {
        let mut best: Option<(f64, u64, u64, usize, usize)> = None;
        for a in 0..n {
            if clusters[a].is_none() {
                continue;
            }
            for b in a + 1..n {
                if clusters[b].is_none() {
                    continue;
                }
                let d = linkage[a * n + b];
                let (lo, hi) = if keys[a] < keys[b] {
                    (keys[a], keys[b])
                } else {
                    (keys[b], keys[a])
                };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => d.total_cmp(&bd).then((lo, hi).cmp(&(blo, bhi))).is_lt(),
                };
                if better {
                    best = Some((d, lo, hi, a, b));
                }
            }
        }
        let (_, _, _, a, b) = best.expect("at least two active clusters");
        let mut merged_b = clusters[b].take().expect("active");
        let size_a = clusters[a].as_ref().expect("active").len() as f64;
        let size_b = merged_b.len() as f64;
        for k in 0..n {
            if k == a || clusters[k].is_none() {
                continue;
            }
            let d = (size_a * linkage[k * n + a] + size_b * linkage[k * n + b]) / (size_a + size_b);
            linkage[k * n + a] = d;
            linkage[a * n + k] = d;
        }
        clusters[a].as_mut().expect("active").append(&mut merged_b);
        keys[a] = keys[a].min(keys[b]);
        active -= 1;
    }

    let mut keep = vec![false; n];
    for mut cluster in clusters.into_iter().flatten() {
        cluster.sort_unstable();
        let rep = cluster
            .iter()
            .map(|&i| {
                let total: f64 = cluster.iter().filter(|&&j| j != i).map(|&j| dist[i * n + j]).sum();
                let mean = if cluster.len() > 1 {
                    total / (cluster.len() - 1) as f64
                } else {
                    0.0
                };
                (mean, ids[i], i)
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, _, i)| i)
            .expect("clusters are non-empty");
        keep[rep] = true;
    }
    keep
}

impl Archive for RnArchive {
    fn kind(&self) -> ArchiveKind {
        ArchiveKind::Rn
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
        let mut out = self.members.clone();
        out.sort_by_key(|s| s.id);
        out
    }

    fn finalize(&self) -> Vec<Solution> {
        self.members()
    }

    fn evicted(&self) -> &[Solution] {
        &self.evicted_log
    }
}

/// SPEA-style fitness, lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthFitness {
    /// Strength of each archive member, in input order.
    pub archive: Vec<f64>,
    /// Fitness of each population member, in input order.
    pub population: Vec<f64>,
}

/// Strength of archive member `e` is the share of the population it weakly
/// dominates, `count / (|population| + 1)`. A population member scores one
/// plus the strengths of the archive members that dominate it.
pub fn strength_fitness(archive: &[Solution], population: &[Solution]) -> Result<StrengthFitness> {
    for s in archive.iter().chain(population) {
        s.objectives()?;
    }
    let denom = population.len() as f64 + 1.0;
    let strengths: Vec<f64> = archive
        .iter()
        .map(|e| {
            let covered = population
                .iter()
                .filter(|p| {
                    matches!(
                        relation(e.obj().values(), p.obj().values()),
                        Dominance::Dominates | Dominance::Equal
                    )
                })
                .count();
            covered as f64 / denom
        })
        .collect();
    let population_fitness = population
        .iter()
        .map(|p| {
            1.0 + archive
                .iter()
                .zip(&strengths)
                .filter(|(e, _)| dominates(e.obj(), p.obj()))
                .map(|(_, s)| s)
                .sum::<f64>()
        })
        .collect();
    Ok(StrengthFitness {
        archive: strengths,
        population: population_fitness,
    })
}
