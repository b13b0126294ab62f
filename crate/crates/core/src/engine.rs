//! The steady-state main loop: initialize and evaluate a population, then
//! repeatedly generate one candidate, evaluate it, offer it to the archive,
//! and let the archive's feedback decide whether it enters the population.
//!
//! `replacement_count` candidates are produced per generation, so 1 gives
//! the steady-state scheme and `population_size` a generational one.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{strength_fitness, Archive, ArchiveConfig, ArchiveKind, FeedbackSignal, InsertOutcome};
use crate::dominance::{dominates, relation, Counters, Dominance, ObjectiveVector, Solution};
use crate::error::{MoeaError, Result};
use crate::generator::{generate, local_search, select_parents, LocalSearchConfig, VariationConfig};
use crate::metrics;
use crate::problems::{brute_force_front, Problem};

/// Algorithm classes expressible as configurations of the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Pareto ranking inside the population only; the archive records but
    /// never feeds selection.
    Class2,
    /// Ranking/niching archive with mixed population/archive mating.
    Class3,
    /// Sampling-schema archive (grid or rays).
    Class4,
}

impl Preset {
    pub fn default_for(kind: ArchiveKind) -> Self {
        if kind.is_sampling() {
            Preset::Class4
        } else {
            Preset::Class3
        }
    }
}

fn default_objectives() -> usize {
    2
}

fn default_replacement() -> usize {
    1
}

fn default_checkpoint() -> u64 {
    1000
}

fn default_front_size() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `sch`, `zdt1`, `zdt2` or `lattice:<k>:<seed>`.
    pub problem: String,
    #[serde(default = "default_objectives")]
    pub objectives: usize,
    pub population_size: usize,
    pub archive: ArchiveConfig,
    #[serde(default)]
    pub variation: VariationConfig,
    #[serde(default)]
    pub local_search: LocalSearchConfig,
    pub seed: u64,
    pub max_evaluations: u64,
    /// Candidates generated per generation (the generation gap).
    #[serde(default = "default_replacement")]
    pub replacement_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Evaluations between metric snapshots in the stats stream.
    #[serde(default = "default_checkpoint")]
    pub checkpoint_interval: u64,
    /// Points sampled on the analytic front for generational distance;
    /// lattice problems small enough for the oracle use their exact front.
    #[serde(default = "default_front_size")]
    pub reference_front_size: usize,
}

impl RunConfig {
    /// A steady-state configuration with default variation settings.
    pub fn new(problem: &str, archive: ArchiveConfig, population_size: usize, max_evaluations: u64, seed: u64) -> Self {
        Self {
            problem: problem.to_string(),
            objectives: 2,
            population_size,
            archive,
            variation: VariationConfig::default(),
            local_search: LocalSearchConfig::default(),
            seed,
            max_evaluations,
            replacement_count: 1,
            preset: None,
            checkpoint_interval: default_checkpoint(),
            reference_front_size: default_front_size(),
        }
    }

    pub fn preset(&self) -> Preset {
        self.preset.unwrap_or_else(|| Preset::default_for(self.archive.kind()))
    }

    /// Checks every field and returns the parsed problem.
    pub fn validate(&self) -> Result<Problem> {
        let bad = |m: String| Err(MoeaError::Config(m));
        let problem = Problem::from_id(&self.problem)?;
        if self.objectives != problem.num_objectives() {
            return bad(format!(
                "problem `{}` has {} objectives, config says {}",
                self.problem,
                problem.num_objectives(),
                self.objectives
            ));
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2".into());
        }
        if self.max_evaluations < self.population_size as u64 {
            return bad("max_evaluations must be at least population_size".into());
        }
        if self.replacement_count == 0 || self.replacement_count > self.population_size {
            return bad("replacement_count must lie in [1, population_size]".into());
        }
        if self.checkpoint_interval == 0 {
            return bad("checkpoint_interval must be positive".into());
        }
        self.archive.validate(self.objectives)?;
        self.variation.validate()?;
        self.local_search.validate()?;
        match (self.preset(), self.archive.kind().is_sampling()) {
            (Preset::Class2 | Preset::Class3, true) => {
                return bad("presets class2 and class3 need the rn archiver".into())
            }
            (Preset::Class4, false) => return bad("preset class4 needs a grid or gps archiver".into()),
            _ => {}
        }
        Ok(problem)
    }
}

/// One line of the per-generation stats stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub evaluations_done: u64,
    pub archive_size: usize,
    pub accepted_count: usize,
    pub deterioration_events: usize,
    /// Filled at checkpoints only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

/// Incrementally tracks how many current archive members are dominated by
/// some solution the archive has evicted.
#[derive(Debug, Default, Clone)]
struct DeteriorationMonitor {
    /// Nondominated subset of everything evicted so far.
    evicted_front: Vec<ObjectiveVector>,
    flagged: BTreeSet<u64>,
    cursor: usize,
}

impl DeteriorationMonitor {
    fn observe(&mut self, archive: &dyn Archive, outcome: &InsertOutcome, candidate: &Solution) {
        let fresh = &archive.evicted()[self.cursor..];
        if !fresh.is_empty() {
            let members = archive.members();
            for e in fresh {
                self.flagged.remove(&e.id);
                let ev = e.obj();
                for m in &members {
                    if dominates(ev, m.obj()) {
                        self.flagged.insert(m.id);
                    }
                }
                if !self.evicted_front.iter().any(|f| {
                    matches!(
                        relation(f.values(), ev.values()),
                        Dominance::Dominates | Dominance::Equal
                    )
                }) {
                    self.evicted_front.retain(|f| !dominates(ev, f));
                    self.evicted_front.push(ev.clone());
                }
            }
            self.cursor = archive.evicted().len();
        }
        if outcome.accepted() {
            let c = candidate.obj();
            if self.evicted_front.iter().any(|f| dominates(f, c)) {
                self.flagged.insert(candidate.id);
            }
        }
    }

    fn count(&self) -> usize {
        self.flagged.len()
    }
}

enum FitnessMode {
    Strength,
    PopulationRank,
    Uniform,
}

pub struct RunState {
    pub problem: Problem,
    pub population: Vec<Solution>,
    pub archive: Box<dyn Archive>,
    pub counters: Counters,
    pub evaluations_done: u64,
    pub generation: u64,
    rng: ChaCha8Rng,
    next_id: u64,
    last_feedback: Option<FeedbackSignal>,
    monitor: DeteriorationMonitor,
    reference_front: Option<Vec<ObjectiveVector>>,
    next_checkpoint: u64,
}

impl RunState {
    pub fn deterioration_events(&self) -> usize {
        self.monitor.count()
    }

    pub fn last_feedback(&self) -> Option<&FeedbackSignal> {
        self.last_feedback.as_ref()
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn offer(&mut self, candidate: &Solution) -> Result<(InsertOutcome, FeedbackSignal)> {
        let (outcome, feedback) = self.archive.try_insert(candidate.clone(), &mut self.counters)?;
        self.monitor.observe(self.archive.as_ref(), &outcome, candidate);
        self.last_feedback = Some(feedback);
        Ok((outcome, feedback))
    }

    fn evaluate(&mut self, mut s: Solution) -> Result<Solution> {
        s.objectives = Some(self.problem.evaluate(&s.genome)?);
        self.counters.evaluations += 1;
        self.evaluations_done += 1;
        Ok(s)
    }

    /// Gd and spacing of the finalized archive.
    pub fn snapshot_metrics(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let front: Vec<ObjectiveVector> = self.archive.finalize().iter().map(|s| s.obj().clone()).collect();
        if let Some(reference) = &self.reference_front {
            if let Ok(gd) = metrics::generational_distance(&front, reference) {
                out.insert(metrics::GD.to_string(), gd);
            }
        }
        if let Ok(sp) = metrics::spacing(&front) {
            out.insert(metrics::SPACING.to_string(), sp);
        }
        out
    }

    fn stats(&mut self, accepted_count: usize, interval: u64, force_metrics: bool) -> GenerationStats {
        let mut crossed = false;
        while self.evaluations_done >= self.next_checkpoint {
            crossed = true;
            self.next_checkpoint += interval;
        }
        GenerationStats {
            generation: self.generation,
            evaluations_done: self.evaluations_done,
            archive_size: self.archive.len(),
            accepted_count,
            deterioration_events: self.monitor.count(),
            metrics: if crossed || force_metrics {
                self.snapshot_metrics()
            } else {
                BTreeMap::new()
            },
        }
    }
}

/// Samples and evaluates the initial population, offering every member to
/// the archive.
pub fn initialize(config: &RunConfig) -> Result<RunState> {
    let problem = config.validate()?;
    let archive = config
        .archive
        .build(config.objectives, &problem.objective_lower_bound())?;
    let reference_front = match &problem {
        Problem::Lattice(lattice) => brute_force_front(lattice).ok(),
        _ if config.reference_front_size > 0 => Some(problem.true_front_sample(config.reference_front_size)?),
        _ => None,
    };
    let mut state = RunState {
        problem,
        population: Vec::with_capacity(config.population_size),
        archive,
        counters: Counters::default(),
        evaluations_done: 0,
        generation: 0,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        next_id: 0,
        last_feedback: None,
        monitor: DeteriorationMonitor::default(),
        reference_front,
        next_checkpoint: config.checkpoint_interval,
    };
    let bounds = state.problem.bounds();
    for _ in 0..config.population_size {
        let genome: Vec<f64> = bounds.iter().map(|&(lo, hi)| state.rng.gen_range(lo..=hi)).collect();
        let id = state.fresh_id();
        let s = state.evaluate(Solution::unevaluated(id, genome))?;
        state.offer(&s)?;
        state.population.push(s);
    }
    Ok(state)
}

/// Places an evaluated child into the population according to the
/// archive's verdict. Accepted: replaces the first member it dominates, or
/// a random member. Rejected: replaces a random member only if it
/// dominates it.
pub fn update_population<R: Rng + ?Sized>(
    population: &mut [Solution],
    child: Solution,
    feedback: &FeedbackSignal,
    rng: &mut R,
) -> Result<Option<usize>> {
    let c = child.objectives()?.clone();
    for m in population.iter() {
        m.objectives()?;
    }
    let slot = if feedback.accepted {
        Some(
            population
                .iter()
                .position(|m| dominates(&c, m.obj()))
                .unwrap_or_else(|| rng.gen_range(0..population.len())),
        )
    } else {
        let i = rng.gen_range(0..population.len());
        dominates(&c, population[i].obj()).then_some(i)
    };
    if let Some(i) = slot {
        population[i] = child;
    }
    Ok(slot)
}

fn fitness_mode(config: &RunConfig) -> FitnessMode {
    match config.preset() {
        Preset::Class2 => FitnessMode::PopulationRank,
        Preset::Class3 => FitnessMode::Strength,
        Preset::Class4 => FitnessMode::Uniform,
    }
}

/// Number of population members dominating each member.
fn population_rank(population: &[Solution]) -> Vec<f64> {
    population
        .iter()
        .map(|p| population.iter().filter(|q| dominates(q.obj(), p.obj())).count() as f64)
        .collect()
}

/// One generation: `replacement_count` rounds of select, generate,
/// (local search), evaluate, archive update and population update.
pub fn step(state: &mut RunState, config: &RunConfig) -> Result<GenerationStats> {
    let archive_prob = match config.preset() {
        Preset::Class2 => 0.0,
        _ => config.variation.archive_parent_prob,
    };
    let mode = fitness_mode(config);
    let archive_members = match mode {
        FitnessMode::PopulationRank => Vec::new(),
        _ => state.archive.members(),
    };
    let fitness = match mode {
        FitnessMode::Strength => Some(strength_fitness(&archive_members, &state.population)?.population),
        FitnessMode::PopulationRank => Some(population_rank(&state.population)),
        FitnessMode::Uniform => None,
    };
    let bounds = state.problem.bounds();
    let mut accepted = 0;
    for _ in 0..config.replacement_count {
        if state.evaluations_done >= config.max_evaluations {
            break;
        }
        let id = state.fresh_id();
        let (p1, p2) = select_parents(
            &state.population,
            &archive_members,
            state.last_feedback.as_ref(),
            fitness.as_deref(),
            archive_prob,
            &mut state.rng,
        )?;
        let child = generate((p1, p2), &config.variation, &bounds, id, &mut state.rng)?;
        let mut child = state.evaluate(child)?;
        let remaining = config.max_evaluations - state.evaluations_done;
        if config.local_search.enabled && remaining > 0 {
            let before = state.counters.evaluations;
            child = local_search(
                &child,
                &state.problem,
                &config.local_search,
                remaining,
                &mut state.rng,
                &mut state.counters,
            )?;
            state.evaluations_done += state.counters.evaluations - before;
        }
        let (outcome, feedback) = state.offer(&child)?;
        if outcome.accepted() {
            accepted += 1;
        }
        update_population(&mut state.population, child, &feedback, &mut state.rng)?;
    }
    state.generation += 1;
    let done = state.evaluations_done >= config.max_evaluations;
    Ok(state.stats(accepted, config.checkpoint_interval, done))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub archiver: ArchiveKind,
    pub preset: Preset,
    pub seed: u64,
    pub generations: u64,
    pub evaluations: u64,
    pub archive_size: usize,
    pub front_size: usize,
    pub evicted: usize,
    pub deterioration_events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity_violations: Option<usize>,
    pub counters: Counters,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// The finalized archive: the reported Pareto set.
    pub front: Vec<Solution>,
    pub stats: Vec<GenerationStats>,
    pub counters: Counters,
    pub summary: RunSummary,
}

/// Runs until the evaluation budget is spent, then finalizes the archive.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    let mut state = initialize(config)?;
    let mut stats = vec![state.stats(state.archive.len(), config.checkpoint_interval, false)];
    while state.evaluations_done < config.max_evaluations {
        stats.push(step(&mut state, config)?);
    }
    if let Some(last) = stats.last_mut() {
        if last.metrics.is_empty() {
            last.metrics = state.snapshot_metrics();
        }
    }
    let front = state.archive.finalize();
    let summary = RunSummary {
        problem: state.problem.id(),
        archiver: state.archive.kind(),
        preset: config.preset(),
        seed: config.seed,
        generations: state.generation,
        evaluations: state.evaluations_done,
        archive_size: state.archive.len(),
        front_size: front.len(),
        evicted: state.archive.evicted().len(),
        deterioration_events: state.monitor.count(),
        monotonicity_violations: state.archive.monotonicity_violations(),
        counters: state.counters,
        metrics: state.snapshot_metrics(),
    };
    Ok(RunResult {
        front,
        stats,
        counters: state.counters,
        summary,
    })
}
