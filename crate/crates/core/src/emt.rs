//! Multifactorial evolutionary multitasking over an (expensive, auxiliary)
//! task pair.
//!
//! Every individual lives in a unified search space of `D` jobs and carries
//! a skill factor naming the one task it is evaluated on. Parents of
//! different skills cross over only with probability `rmp` (implicit
//! transfer). With [`TransferMode::Recursive`], the best auxiliary solutions
//! are additionally completed by recursive insertion and injected as
//! expensive-task offspring every `transfer_period` generations.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::auxiliary::{build_eat, EatSpec, ImportanceMeasure};
use crate::error::{Error, Result};
use crate::instance::{Instance, Job, JobPermutation, ProblemMatrix};
use crate::search::insert_local_search;
use crate::transfer::{default_keys, patch, perm_to_vector, project, rov_decode, PatchStrategy};

/// Task identifier used as skill factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Skill {
    Exp = 0,
    Eat = 1,
}

impl Skill {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Skill::Exp => "EXP",
            Skill::Eat => "EAT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Random keys in `[0, 1]^D` decoded by ranked order value.
    RealKey,
    /// Job permutations with ordered crossover and swap mutation.
    Permutation,
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "realkey" | "real" | "mfea-i" => Ok(Encoding::RealKey),
            "perm" | "permutation" | "p-mfea" => Ok(Encoding::Permutation),
            _ => Err(Error::Parameter(format!("unknown encoding `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferMode {
    /// Assortative mating only.
    Implicit,
    /// Assortative mating plus periodic injection of patched auxiliary solutions.
    Recursive,
}

impl FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ik" => Ok(TransferMode::Implicit),
            "ri" => Ok(TransferMode::Recursive),
            _ => Err(Error::Parameter(format!("unknown transfer mode `{s}`"))),
        }
    }
}

/// How the auxiliary task is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Pairing {
    /// Auxiliary task sampled from the primary by job importance.
    Importance { measure: ImportanceMeasure, ratio: u32 },
    /// Unrelated instance with the same job count.
    RndTsk1(Instance),
    /// Unrelated instance with fewer jobs.
    RndTsk2(Instance),
    /// Unrelated instance with more jobs.
    RndTsk3(Instance),
}

impl Pairing {
    pub fn label(&self) -> String {
        match self {
            Pairing::Importance { measure, ratio } => format!("{measure}-{ratio}"),
            Pairing::RndTsk1(_) => "RndTsk1".into(),
            Pairing::RndTsk2(_) => "RndTsk2".into(),
            Pairing::RndTsk3(_) => "RndTsk3".into(),
        }
    }
}

/// The auxiliary side of a task pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Auxiliary {
    Eat(EatSpec),
    Instance(Instance),
}

/// One optimization task viewed from the unified job space.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    /// Rows are indexed by unified job ids.
    pub matrix: ProblemMatrix,
    /// Unified ids that belong to the task; `None` means all of them.
    pub mask: Option<Vec<bool>>,
}

impl Task {
    /// The task's own schedule inside a unified permutation.
    pub fn view(&self, unified: &[Job]) -> Vec<Job> {
        match &self.mask {
            Some(mask) => project(unified, mask),
            None => unified.to_vec(),
        }
    }

    pub fn evaluate(&self, unified: &[Job]) -> u64 {
        match &self.mask {
            Some(mask) => self.matrix.makespan_of(&project(unified, mask)),
            None => self.matrix.makespan_of(unified),
        }
    }
}

fn prefix_mask(len: usize, dim: usize) -> Option<Vec<bool>> {
    (len < dim).then(|| (0..dim).map(|j| j < len).collect())
}

/// The expensive task together with its auxiliary task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskPair {
    pub exp: Instance,
    pub aux: Auxiliary,
    pub label: String,
    /// Unified dimension `D`.
    pub dim: usize,
    pub tasks: [Task; 2],
}

impl TaskPair {
    pub fn build<R: Rng + ?Sized>(exp: Instance, pairing: Pairing, rng: &mut R) -> Result<Self> {
        let label = pairing.label();
        let n = exp.jobs();
        let m = exp.machines();
        match pairing {
            Pairing::Importance { measure, ratio } => {
                let eat = build_eat(&exp.matrix, measure, ratio, rng)?;
                let tasks = [
                    Task {
                        matrix: exp.matrix.clone(),
                        mask: None,
                    },
                    Task {
                        matrix: exp.matrix.clone(),
                        mask: Some(eat.mask()),
                    },
                ];
                Ok(Self {
                    exp,
                    aux: Auxiliary::Eat(eat),
                    label,
                    dim: n,
                    tasks,
                })
            }
            Pairing::RndTsk1(aux) | Pairing::RndTsk2(aux) | Pairing::RndTsk3(aux) => {
                if aux.machines() != m {
                    return Err(Error::Config(format!(
                        "{label} auxiliary has {} machines, primary has {m}",
                        aux.machines()
                    )));
                }
                let k = aux.jobs();
                let ok = match label.as_str() {
                    "RndTsk1" => k == n,
                    "RndTsk2" => k < n,
                    _ => k > n,
                };
                if !ok {
                    return Err(Error::Config(format!(
                        "{label} auxiliary has {k} jobs against {n} primary jobs"
                    )));
                }
                let dim = n.max(k);
                let tasks = [
                    Task {
                        matrix: exp.matrix.clone(),
                        mask: prefix_mask(n, dim),
                    },
                    Task {
                        matrix: aux.matrix.clone(),
                        mask: prefix_mask(k, dim),
                    },
                ];
                Ok(Self {
                    exp,
                    aux: Auxiliary::Instance(aux),
                    label,
                    dim,
                    tasks,
                })
            }
        }
    }

    pub fn task(&self, skill: Skill) -> &Task {
        &self.tasks[skill.index()]
    }

    pub fn eat(&self) -> Option<&EatSpec> {
        match &self.aux {
            Auxiliary::Eat(e) => Some(e),
            Auxiliary::Instance(_) => None,
        }
    }
}

/// Engine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Population size `N` (even).
    pub population: usize,
    /// Random mating probability.
    pub rmp: f64,
    /// Explicit transfer every `transfer_period` generations.
    pub transfer_period: usize,
    /// Number of auxiliary individuals patched per transfer.
    pub transfer_count: usize,
    /// Local-search iterations per offspring.
    pub ls_intensity: usize,
    /// SBX distribution index.
    pub sbx_eta: f64,
    /// Standard deviation of Gaussian key mutation.
    pub mut_sigma: f64,
    /// Per-gene mutation probability; `None` means `1/D`.
    pub mut_prob: Option<f64>,
    pub encoding: Encoding,
    pub transfer_mode: TransferMode,
    /// Wall-clock budget in seconds, checked between generations.
    pub time_budget: Option<f64>,
    /// Generation cap; the deterministic termination mode.
    pub max_generations: Option<usize>,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            population: 100,
            rmp: 0.3,
            transfer_period: 5,
            transfer_count: 5,
            ls_intensity: 50,
            sbx_eta: 2.0,
            mut_sigma: 0.05,
            mut_prob: None,
            encoding: Encoding::RealKey,
            transfer_mode: TransferMode::Implicit,
            time_budget: None,
            max_generations: Some(100),
            seed: 1,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "population must be even and at least 2, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.rmp) {
            return Err(Error::Config(format!("rmp {} outside [0, 1]", self.rmp)));
        }
        if self.transfer_period == 0 {
            return Err(Error::Config("transfer period must be at least 1".into()));
        }
        if self.transfer_count == 0 || self.transfer_count > self.population {
            return Err(Error::Config(format!(
                "transfer count {} outside 1..={}",
                self.transfer_count, self.population
            )));
        }
        if self.sbx_eta < 0.0 || self.mut_sigma < 0.0 {
            return Err(Error::Config("operator parameters must be nonnegative".into()));
        }
        if let Some(p) = self.mut_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("mutation probability {p} outside [0, 1]")));
            }
        }
        if self.time_budget.is_none() && self.max_generations.is_none() {
            return Err(Error::Config("no termination criterion".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Genotype {
    Keys(Vec<f64>),
    Perm(Vec<Job>),
}

impl Genotype {
    /// Unified permutation of all `D` jobs.
    pub fn decode(&self) -> JobPermutation {
        match self {
            Genotype::Keys(x) => rov_decode(x),
            Genotype::Perm(p) => JobPermutation::from_vec_unchecked(p.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub skill: Skill,
    /// Makespan on the skill task.
    pub objective: u64,
    /// Factorial rank per task; `None` when not evaluated on that task.
    pub ranks: [Option<usize>; 2],
    /// Scalar fitness `1 / min rank`.
    pub fitness: f64,
    /// Creation index; lower is older.
    pub id: u64,
}

impl Individual {
    fn best_rank(&self) -> usize {
        self.ranks.iter().flatten().copied().min().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub elapsed_s: f64,
    pub generation: usize,
    pub best_makespan: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Best schedule found for the expensive task.
    pub best: JobPermutation,
    pub best_makespan: u64,
    pub trace: Vec<TracePoint>,
    pub generations: usize,
    /// Number of individuals injected by explicit transfer.
    pub transferred: usize,
}

/// Output of one mating event.
#[derive(Debug, Clone, PartialEq)]
pub struct Mating {
    pub children: [(Genotype, Skill); 2],
    pub crossed: bool,
}

/// The multitasking engine. Owns the population and its random source.
pub struct Engine<'a> {
    pair: &'a TaskPair,
    config: EngineConfig,
    rng: ChaCha8Rng,
    population: Vec<Individual>,
    next_id: u64,
    best: Option<(u64, Vec<Job>)>,
    generation: usize,
    transferred: usize,
}

impl<'a> Engine<'a> {
    pub fn new(pair: &'a TaskPair, config: EngineConfig) -> Result<Self> {
        config.validate()?;
        if config.transfer_mode == TransferMode::Recursive && pair.eat().is_none() {
            return Err(Error::Config(format!(
                "recursive-insertion transfer needs an auxiliary task whose jobs are a subset of the primary's; {} is not",
                pair.label
            )));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            pair,
            config,
            rng,
            population: Vec::new(),
            next_id: 0,
            best: None,
            generation: 0,
            transferred: 0,
        })
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn best_makespan(&self) -> Option<u64> {
        self.best.as_ref().map(|b| b.0)
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id - 1
    }

    fn record_exp(&mut self, objective: u64, unified: &[Job]) {
        if self.best.as_ref().is_none_or(|b| objective < b.0) {
            let view = self.pair.task(Skill::Exp).view(unified);
            self.best = Some((objective, view));
        }
    }

    fn random_genotype(&mut self) -> Genotype {
        let dim = self.pair.dim;
        match self.config.encoding {
            Encoding::RealKey => Genotype::Keys((0..dim).map(|_| self.rng.gen::<f64>()).collect()),
            Encoding::Permutation => {
                let mut p: Vec<Job> = (0..dim).collect();
                p.shuffle(&mut self.rng);
                Genotype::Perm(p)
            }
        }
    }

    /// Random population evaluated on both tasks; each individual keeps the
    /// task on which its factorial rank is better (expensive task on ties).
    pub fn initialize(&mut self) {
        let n = self.config.population;
        let mut genotypes = Vec::with_capacity(n);
        let mut objectives = Vec::with_capacity(n);
        for _ in 0..n {
            let g = self.random_genotype();
            let perm = g.decode();
            let exp = self.pair.task(Skill::Exp).evaluate(&perm);
            let aux = self.pair.task(Skill::Eat).evaluate(&perm);
            self.record_exp(exp, &perm);
            genotypes.push(g);
            objectives.push([exp, aux]);
        }
        let ids: Vec<u64> = (0..n).map(|_| self.fresh_id()).collect();
        let mut ranks = [vec![0usize; n], vec![0usize; n]];
        for (t, rank) in ranks.iter_mut().enumerate() {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| objectives[a][t].cmp(&objectives[b][t]).then(ids[a].cmp(&ids[b])));
            for (r, &i) in order.iter().enumerate() {
                rank[i] = r + 1;
            }
        }
        self.population = genotypes
            .into_iter()
            .enumerate()
            .map(|(i, genotype)| {
                let skill = if ranks[0][i] <= ranks[1][i] {
                    Skill::Exp
                } else {
                    Skill::Eat
                };
                let mut r = [None, None];
                r[skill.index()] = Some(ranks[skill.index()][i]);
                Individual {
                    genotype,
                    skill,
                    objective: objectives[i][skill.index()],
                    ranks: r,
                    fitness: 1.0 / ranks[skill.index()][i] as f64,
                    id: ids[i],
                }
            })
            .collect();
        self.generation = 1;
    }

    /// Local search on the individual's own task, then realignment of the
    /// genotype so that it decodes to the improved schedule. Updates the
    /// objective.
    pub fn improve(&mut self, genotype: Genotype, skill: Skill) -> (Genotype, u64) {
        let task = self.pair.task(skill);
        let perm = genotype.decode();
        let improved = insert_local_search(
            &task.matrix,
            &perm,
            self.config.ls_intensity,
            task.mask.as_deref(),
            &mut self.rng,
        );
        let objective = task.evaluate(&improved);
        let genotype = match genotype {
            Genotype::Keys(x) if improved != perm => {
                Genotype::Keys(perm_to_vector(&x, &improved).expect("same dimension"))
            }
            Genotype::Perm(_) => Genotype::Perm(improved.into_vec()),
            keep => keep,
        };
        (genotype, objective)
    }

    /// Patched auxiliary solutions to inject this generation, if any.
    pub fn explicit_transfer(&mut self) -> Vec<Individual> {
        if self.config.transfer_mode != TransferMode::Recursive
            || !self.generation.is_multiple_of(self.config.transfer_period)
        {
            return Vec::new();
        }
        let pair = self.pair;
        let Some(eat) = pair.eat() else {
            return Vec::new();
        };
        let mut donors: Vec<&Individual> = self
            .population
            .iter()
            .filter(|i| i.skill == Skill::Eat)
            .collect();
        donors.sort_by(|a, b| a.objective.cmp(&b.objective).then(a.id.cmp(&b.id)));
        donors.truncate(self.config.transfer_count);
        let partials: Vec<Vec<Job>> = donors
            .iter()
            .map(|d| pair.task(Skill::Eat).view(&d.genotype.decode()))
            .collect();
        let exp = pair.task(Skill::Exp);
        let mut out = Vec::with_capacity(partials.len());
        for partial in partials {
            let full = patch(
                PatchStrategy::Recursive,
                &partial,
                eat.remaining(),
                &exp.matrix,
                &mut self.rng,
            )
            .expect("auxiliary and remaining jobs partition the primary");
            let objective = exp.evaluate(&full);
            self.record_exp(objective, &full);
            let genotype = match self.config.encoding {
                Encoding::RealKey => Genotype::Keys(
                    perm_to_vector(&default_keys(self.pair.dim), &full).expect("same dimension"),
                ),
                Encoding::Permutation => Genotype::Perm(full.into_vec()),
            };
            let id = self.fresh_id();
            out.push(Individual {
                genotype,
                skill: Skill::Exp,
                objective,
                ranks: [None, None],
                fitness: 0.0,
                id,
            });
        }
        self.transferred += out.len();
        out
    }

    /// Runs one generation: mating, improvement, optional transfer, selection.
    pub fn step(&mut self) -> Result<()> {
        let n = self.config.population;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let mut offspring = Vec::with_capacity(n + self.config.transfer_count);
        for pair in order.chunks_exact(2) {
            let (a, b) = (&self.population[pair[0]], &self.population[pair[1]]);
            let (pa, pb) = ((a.genotype.clone(), a.skill), (b.genotype.clone(), b.skill));
            let mating = mate(pa, pb, &self.config, &mut self.rng);
            for (genotype, skill) in mating.children {
                let (genotype, objective) = self.improve(genotype, skill);
                if skill == Skill::Exp {
                    let perm = genotype.decode();
                    self.record_exp(objective, &perm);
                }
                let id = self.fresh_id();
                offspring.push(Individual {
                    genotype,
                    skill,
                    objective,
                    ranks: [None, None],
                    fitness: 0.0,
                    id,
                });
            }
        }
        offspring.extend(self.explicit_transfer());
        let mut pool = std::mem::take(&mut self.population);
        pool.extend(offspring);
        self.population = select(pool, n)?;
        self.generation += 1;
        Ok(())
    }

    /// Runs until the termination criterion holds, timing from `start`.
    pub fn run_from(mut self, start: Instant) -> Result<RunResult> {
        self.initialize();
        let mut trace = Vec::new();
        let mut completed = 0usize;
        loop {
            let elapsed = start.elapsed().as_secs_f64();
            trace.push(TracePoint {
                elapsed_s: elapsed,
                generation: completed,
                best_makespan: self.best_makespan().expect("initialized"),
            });
            let out_of_time = self.config.time_budget.is_some_and(|t| elapsed >= t);
            let out_of_generations = self.config.max_generations.is_some_and(|g| completed >= g);
            if out_of_time || out_of_generations {
                break;
            }
            self.step()?;
            completed += 1;
        }
        let (best_makespan, best) = self.best.take().expect("initialized");
        Ok(RunResult {
            best: JobPermutation::from_vec_unchecked(best),
            best_makespan,
            trace,
            generations: completed,
            transferred: self.transferred,
        })
    }
}

/// Runs the engine on a prepared pair.
pub fn run(pair: &TaskPair, config: EngineConfig) -> Result<RunResult> {
    Engine::new(pair, config)?.run_from(Instant::now())
}

/// Builds the task pair and runs the engine; pair construction counts
/// against the time budget.
pub fn solve(exp: Instance, pairing: Pairing, config: EngineConfig) -> Result<(TaskPair, RunResult)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x0005_eed0_fea7);
    let pair = TaskPair::build(exp, pairing, &mut rng)?;
    let result = Engine::new(&pair, config)?.run_from(start)?;
    Ok((pair, result))
}

/// Assortative mating with skill-factor inheritance.
pub fn mate<R: Rng + ?Sized>(
    a: (Genotype, Skill),
    b: (Genotype, Skill),
    config: &EngineConfig,
    rng: &mut R,
) -> Mating {
    let same = a.1 == b.1;
    if same || rng.gen::<f64>() < config.rmp {
        let (c1, c2) = match (&a.0, &b.0) {
            (Genotype::Keys(x), Genotype::Keys(y)) => {
                let (u, v) = sbx(x, y, config.sbx_eta, rng);
                (Genotype::Keys(u), Genotype::Keys(v))
            }
            (Genotype::Perm(x), Genotype::Perm(y)) => {
                let (u, v) = ordered_crossover(x, y, rng);
                (Genotype::Perm(u), Genotype::Perm(v))
            }
            _ => panic!("parents use different encodings"),
        };
        let mut inherit = || {
            if same || rng.gen_bool(0.5) {
                a.1
            } else {
                b.1
            }
        };
        let s1 = inherit();
        let s2 = inherit();
        Mating {
            children: [(c1, s1), (c2, s2)],
            crossed: true,
        }
    } else {
        let m1 = mutate(&a.0, config, rng);
        let m2 = mutate(&b.0, config, rng);
        Mating {
            children: [(m1, a.1), (m2, b.1)],
            crossed: false,
        }
    }
}

/// Simulated binary crossover, children clipped to `[0, 1]`.
pub fn sbx<R: Rng + ?Sized>(x: &[f64], y: &[f64], eta: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(x.len());
    let mut c2 = Vec::with_capacity(x.len());
    for (&p, &q) in x.iter().zip(y) {
        let u: f64 = rng.gen();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
        };
        c1.push((0.5 * ((1.0 + beta) * p + (1.0 - beta) * q)).clamp(0.0, 1.0));
        c2.push((0.5 * ((1.0 - beta) * p + (1.0 + beta) * q)).clamp(0.0, 1.0));
    }
    (c1, c2)
}

/// Ordered crossover: each child keeps a slice of one parent and fills the
/// rest in the other parent's order, starting after the slice.
pub fn ordered_crossover<R: Rng + ?Sized>(x: &[Job], y: &[Job], rng: &mut R) -> (Vec<Job>, Vec<Job>) {
    let n = x.len();
    if n < 2 {
        return (x.to_vec(), y.to_vec());
    }
    let mut a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let child = |keep: &[Job], fill: &[Job]| {
        let mut out = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for i in a..=b {
            out[i] = keep[i];
            used[keep[i]] = true;
        }
        let mut slot = (b + 1) % n;
        for k in 0..n {
            let job = fill[(b + 1 + k) % n];
            if !used[job] {
                out[slot] = job;
                used[job] = true;
                slot = (slot + 1) % n;
            }
        }
        out
    };
    (child(x, y), child(y, x))
}

fn mutate<R: Rng + ?Sized>(g: &Genotype, config: &EngineConfig, rng: &mut R) -> Genotype {
    match g {
        Genotype::Keys(x) => {
            let prob = config.mut_prob.unwrap_or(1.0 / x.len() as f64);
            let normal = Normal::new(0.0, config.mut_sigma).expect("sigma validated");
            let mut y = x.clone();
            for v in &mut y {
                if rng.gen::<f64>() < prob {
                    *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
                }
            }
            Genotype::Keys(y)
        }
        Genotype::Perm(p) => {
            let mut q = p.clone();
            if q.len() >= 2 {
                let i = rng.gen_range(0..q.len());
                let mut j = rng.gen_range(0..q.len() - 1);
                if j >= i {
                    j += 1;
                }
                q.swap(i, j);
            }
            Genotype::Perm(q)
        }
    }
}

/// Per-task factorial ranks over the individuals evaluated on each task.
pub fn assign_ranks(pool: &mut [Individual]) {
    for skill in [Skill::Exp, Skill::Eat] {
        let mut members: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].skill == skill).collect();
        members.sort_by(|&a, &b| {
            pool[a]
                .objective
                .cmp(&pool[b].objective)
                .then(pool[a].id.cmp(&pool[b].id))
        });
        for (r, &i) in members.iter().enumerate() {
            pool[i].ranks = [None, None];
            pool[i].ranks[skill.index()] = Some(r + 1);
        }
    }
    for ind in pool.iter_mut() {
        ind.fitness = 1.0 / ind.best_rank() as f64;
    }
}

/// Elitist `μ + λ` truncation by scalar fitness.
pub fn select(mut pool: Vec<Individual>, keep: usize) -> Result<Vec<Individual>> {
    if pool.len() < keep {
        return Err(Error::Underfull {
            pool: pool.len(),
            needed: keep,
        });
    }
    assign_ranks(&mut pool);
    pool.sort_by(|a, b| {
        b.fitness
            .partial_cmp(&a.fitness)
            .unwrap_or(Ordering::Equal)
            .then(a.objective.cmp(&b.objective))
            .then(a.id.cmp(&b.id))
    });
    pool.truncate(keep);
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_taillard;

    fn ind(skill: Skill, objective: u64, id: u64) -> Individual {
        Individual {
            genotype: Genotype::Perm(vec![0]),
            skill,
            objective,
            ranks: [None, None],
            fitness: 0.0,
            id,
        }
    }

    #[test]
    fn fitness_is_inverse_best_rank() {
        let mut pool = vec![ind(Skill::Eat, 5, 0), ind(Skill::Exp, 9, 1), ind(Skill::Exp, 7, 2)];
        assign_ranks(&mut pool);
        assert_eq!(pool[0].ranks, [None, Some(1)]);
        assert_eq!(pool[0].fitness, 1.0);
        assert_eq!(pool[1].ranks, [Some(2), None]);
        assert_eq!(pool[1].fitness, 0.5);
    }

    #[test]
    fn ties_rank_older_first() {
        let mut pool = vec![ind(Skill::Exp, 7, 4), ind(Skill::Exp, 7, 2)];
        assign_ranks(&mut pool);
        assert_eq!(pool[1].ranks[0], Some(1));
        assert_eq!(pool[0].ranks[0], Some(2));
    }

    #[test]
    fn underfull_pool() {
        assert!(matches!(
            select(vec![ind(Skill::Exp, 1, 0)], 2),
            Err(Error::Underfull { pool: 1, needed: 2 })
        ));
    }

    #[test]
    fn config_validation() {
        let ok = EngineConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            EngineConfig { population: 3, ..ok.clone() },
            EngineConfig { rmp: 1.5, ..ok.clone() },
            EngineConfig { transfer_period: 0, ..ok.clone() },
            EngineConfig { transfer_count: 0, ..ok.clone() },
            EngineConfig { time_budget: None, max_generations: None, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn ri_requires_importance_pairing() {
        let exp = generate_taillard(10, 3, 5).unwrap();
        let aux = generate_taillard(6, 3, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pair = TaskPair::build(exp, Pairing::RndTsk2(aux), &mut rng).unwrap();
        let cfg = EngineConfig {
            transfer_mode: TransferMode::Recursive,
            ..EngineConfig::default()
        };
        assert!(matches!(Engine::new(&pair, cfg), Err(Error::Config(_))));
    }

    #[test]
    fn rndtsk_shape_rules() {
        let exp = generate_taillard(10, 3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let wrong_m = generate_taillard(10, 4, 6).unwrap();
        assert!(TaskPair::build(exp.clone(), Pairing::RndTsk1(wrong_m), &mut rng).is_err());
        let smaller = generate_taillard(6, 3, 6).unwrap();
        assert!(TaskPair::build(exp.clone(), Pairing::RndTsk3(smaller.clone()), &mut rng).is_err());
        assert!(TaskPair::build(exp.clone(), Pairing::RndTsk1(smaller), &mut rng).is_err());
        let larger = generate_taillard(14, 3, 7).unwrap();
        let pair = TaskPair::build(exp, Pairing::RndTsk3(larger), &mut rng).unwrap();
        assert_eq!(pair.dim, 14);
        let unified: Vec<Job> = (0..14).rev().collect();
        assert_eq!(pair.task(Skill::Exp).view(&unified), (0..10).rev().collect::<Vec<_>>());
    }

    #[test]
    fn ordered_crossover_yields_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Job> = (0..9).collect();
        let y: Vec<Job> = (0..9).rev().collect();
        for _ in 0..50 {
            let (a, b) = ordered_crossover(&x, &y, &mut rng);
            for c in [a, b] {
                let mut s = c.clone();
                s.sort_unstable();
                assert_eq!(s, x);
            }
        }
    }

    #[test]
    fn sbx_stays_in_unit_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = vec![0.0, 0.5, 1.0, 0.99];
        let y = vec![1.0, 0.4, 0.0, 0.01];
        for _ in 0..200 {
            let (a, b) = sbx(&x, &y, 2.0, &mut rng);
            assert!(a.iter().chain(&b).all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
