//! Moving solutions between encodings and tasks: random-key decoding,
//! projection onto auxiliary jobs, and patching partial auxiliary solutions
//! into complete schedules.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{check_distinct, Job, JobPermutation, ProblemMatrix};

/// Ranked-order-value decoding: element `l` of the result is the ascending
/// rank of `keys[l]`, read as the job processed `l`-th. Equal keys rank by
/// index.
pub fn rov_decode(keys: &[f64]) -> JobPermutation {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut perm = vec![0; keys.len()];
    for (rank, &idx) in order.iter().enumerate() {
        perm[idx] = rank;
    }
    JobPermutation::from_vec_unchecked(perm)
}

/// Keeps the jobs flagged in `mask`, in their current order.
pub fn project(perm: &[Job], mask: &[bool]) -> Vec<Job> {
    perm.iter()
        .copied()
        .filter(|&j| mask.get(j).copied().unwrap_or(false))
        .collect()
}

/// Subsequence of `perm` restricted to the jobs in `critical`.
pub fn project_to_eat(perm: &[Job], critical: &[Job]) -> JobPermutation {
    let size = perm.iter().chain(critical).max().map_or(0, |&j| j + 1);
    let mut mask = vec![false; size];
    for &j in critical {
        mask[j] = true;
    }
    JobPermutation::from_vec_unchecked(project(perm, &mask))
}

/// Where each remaining job goes while completing a partial solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchStrategy {
    /// Best position by partial makespan (earliest on ties).
    Recursive,
    /// Always at the end.
    End,
    /// At the end when the current length is odd, else at the front.
    OddEven,
    /// Uniformly random position.
    Arbitrary,
}

impl PatchStrategy {
    pub const ALL: [PatchStrategy; 4] = [Self::Recursive, Self::End, Self::OddEven, Self::Arbitrary];

    pub fn name(self) -> &'static str {
        match self {
            Self::Recursive => "RI",
            Self::End => "EI",
            Self::OddEven => "OI",
            Self::Arbitrary => "AI",
        }
    }
}

impl fmt::Display for PatchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown patch strategy `{s}`")))
    }
}

/// Inserts one job into `seq` according to `strategy`; returns the position used.
pub fn insert_next<R: Rng + ?Sized>(
    strategy: PatchStrategy,
    seq: &mut Vec<Job>,
    job: Job,
    matrix: &ProblemMatrix,
    rng: &mut R,
) -> usize {
    let pos = match strategy {
        PatchStrategy::Recursive => matrix.best_insertion(seq, job).0,
        PatchStrategy::End => seq.len(),
        PatchStrategy::OddEven => {
            if seq.len() % 2 == 1 {
                seq.len()
            } else {
                0
            }
        }
        PatchStrategy::Arbitrary => rng.gen_range(0..=seq.len()),
    };
    seq.insert(pos, job);
    pos
}

/// Completes the partial solution `partial` by inserting the jobs of
/// `remaining` in order. Together they must cover every job of `matrix`
/// exactly once.
pub fn patch<R: Rng + ?Sized>(
    strategy: PatchStrategy,
    partial: &[Job],
    remaining: &[Job],
    matrix: &ProblemMatrix,
    rng: &mut R,
) -> Result<JobPermutation> {
    let n = matrix.jobs();
    let mut seen = vec![false; n];
    for &j in partial.iter().chain(remaining) {
        if j >= n {
            return Err(Error::Partition(format!("job {} out of range", j + 1)));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::Partition(format!("job {} listed twice", j + 1)));
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Partition(format!("job {} missing", missing + 1)));
    }
    let mut seq = Vec::with_capacity(n);
    seq.extend_from_slice(partial);
    for &job in remaining {
        insert_next(strategy, &mut seq, job, matrix, rng);
    }
    Ok(JobPermutation::from_vec_unchecked(seq))
}

/// `D` evenly spaced interior keys `1/(D+1), …, D/(D+1)`.
pub fn default_keys(dim: usize) -> Vec<f64> {
    (1..=dim).map(|i| i as f64 / (dim + 1) as f64).collect()
}

/// Rearranges `values` so that [`rov_decode`] yields `target`: position `l`
/// receives the `target[l]`-th smallest value.
pub fn perm_to_vector(values: &[f64], target: &[Job]) -> Result<Vec<f64>> {
    if values.len() != target.len() {
        return Err(Error::Shape(format!(
            "{} key values for a {}-job permutation",
            values.len(),
            target.len()
        )));
    }
    check_distinct(target, values.len())?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(target.iter().map(|&rank| sorted[rank]).collect())
}
