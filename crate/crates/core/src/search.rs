//! Constructive and improvement procedures: the NEH family, insertion local
//! search and simulated annealing for auxiliary tasks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{check_distinct, Job, JobPermutation, ProblemMatrix};

/// Effort settings shared by the search procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Iterations per insertion local-search call.
    pub ls_intensity: usize,
    /// Simulated-annealing iterations when solving an auxiliary task.
    pub sa_iterations: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            ls_intensity: 50,
            sa_iterations: 10_000,
            seed: 1,
        }
    }
}

/// Jobs in descending order of total processing time, ties by index.
pub fn lst_priority(matrix: &ProblemMatrix) -> Vec<Job> {
    let sums: Vec<u64> = matrix
        .rows()
        .map(|r| r.iter().map(|&t| u64::from(t)).sum())
        .collect();
    let mut order: Vec<Job> = (0..matrix.jobs()).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]).then(a.cmp(&b)));
    order
}

/// Inserts the jobs one at a time in `priority` order, each at the position
/// giving the smallest partial makespan (earliest position on ties).
pub fn neh(matrix: &ProblemMatrix, priority: &[Job]) -> Result<JobPermutation> {
    if priority.len() != matrix.jobs() {
        return Err(Error::InvalidOrder(format!(
            "{} jobs listed for a {}-job matrix",
            priority.len(),
            matrix.jobs()
        )));
    }
    check_distinct(priority, matrix.jobs()).map_err(|e| Error::InvalidOrder(e.to_string()))?;
    let mut seq = Vec::with_capacity(priority.len());
    for &job in priority {
        let (pos, _) = matrix.best_insertion(&seq, job);
        seq.insert(pos, job);
    }
    Ok(JobPermutation::from_vec_unchecked(seq))
}

/// Insertion local search.
///
/// Each iteration picks two distinct jobs, removes the one positioned later
/// and reinserts it just before the other. Moves that do not worsen the
/// makespan are kept, so the returned permutation is the best one visited.
///
/// With `restrict`, only jobs flagged `true` are moved and the makespan is
/// taken over those jobs alone; the other jobs keep their positions.
pub fn insert_local_search<R: Rng + ?Sized>(
    matrix: &ProblemMatrix,
    perm: &[Job],
    iterations: usize,
    restrict: Option<&[bool]>,
    rng: &mut R,
) -> JobPermutation {
    let slots: Vec<usize> = match restrict {
        Some(mask) => (0..perm.len()).filter(|&i| mask[perm[i]]).collect(),
        None => (0..perm.len()).collect(),
    };
    if iterations == 0 || slots.len() < 2 {
        return JobPermutation::from_vec_unchecked(perm.to_vec());
    }
    let mut current: Vec<Job> = slots.iter().map(|&i| perm[i]).collect();
    let mut span = matrix.makespan_of(&current);
    let mut candidate = current.clone();
    for _ in 0..iterations {
        let a = rng.gen_range(0..current.len());
        let mut b = rng.gen_range(0..current.len() - 1);
        if b >= a {
            b += 1;
        }
        let (front, back) = if a < b { (a, b) } else { (b, a) };
        candidate.copy_from_slice(&current);
        let job = candidate.remove(back);
        candidate.insert(front, job);
        let s = matrix.makespan_of(&candidate);
        if s <= span {
            span = s;
            std::mem::swap(&mut current, &mut candidate);
        }
    }
    let mut out = perm.to_vec();
    for (&slot, &job) in slots.iter().zip(&current) {
        out[slot] = job;
    }
    JobPermutation::from_vec_unchecked(out)
}

/// Annealing temperature schedule: geometric cooling from `m × mean / 10`
/// down to one hundredth of that over the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cooling {
    pub initial: f64,
    pub factor: f64,
}

impl Cooling {
    pub fn for_matrix(matrix: &ProblemMatrix, iterations: usize) -> Self {
        let cells = (matrix.jobs() * matrix.machines()) as f64;
        let mean = matrix.total() as f64 / cells;
        let initial = (matrix.machines() as f64 * mean / 10.0).max(f64::MIN_POSITIVE);
        let factor = if iterations > 1 {
            0.01f64.powf(1.0 / (iterations - 1) as f64)
        } else {
            1.0
        };
        Self { initial, factor }
    }
}

/// Solves a small auxiliary matrix: NEH start, then simulated annealing
/// with random insertion moves. Returns the best permutation seen, over the
/// submatrix's own row indices.
pub fn solve_eat<R: Rng + ?Sized>(
    submatrix: &ProblemMatrix,
    sa_iterations: usize,
    rng: &mut R,
) -> JobPermutation {
    let seed = neh(submatrix, &lst_priority(submatrix)).expect("priority covers all jobs");
    let n = seed.len();
    if sa_iterations == 0 || n < 2 {
        return seed;
    }
    let cooling = Cooling::for_matrix(submatrix, sa_iterations);
    let mut temperature = cooling.initial;
    let mut current = seed.into_vec();
    let mut span = submatrix.makespan_of(&current);
    let mut best = current.clone();
    let mut best_span = span;
    let mut candidate = current.clone();
    for _ in 0..sa_iterations {
        let from = rng.gen_range(0..n);
        let mut to = rng.gen_range(0..n - 1);
        if to >= from {
            to += 1;
        }
        candidate.copy_from_slice(&current);
        let job = candidate.remove(from);
        candidate.insert(to, job);
        let s = submatrix.makespan_of(&candidate);
        let delta = s as f64 - span as f64;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
            std::mem::swap(&mut current, &mut candidate);
            span = s;
            if span < best_span {
                best_span = span;
                best.copy_from_slice(&current);
            }
        }
        temperature *= cooling.factor;
    }
    JobPermutation::from_vec_unchecked(best)
}
