//! Job-importance measures and construction of the economical auxiliary
//! task (EAT): the submatrix of the most important jobs' rows.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Job, ProblemMatrix};
use crate::search::neh;

/// How job importance is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ImportanceMeasure {
    /// Sum of squared processing times.
    Lsp,
    /// Sum of processing times.
    Lst,
    /// Kalczynski-Kamburowski machine-weighted sums.
    Kk1,
    /// Kalczynski-Kamburowski front/back balance.
    Kk2,
    /// Position in the NEH sequence.
    Sr0,
    /// Position in the NEHKK1 sequence.
    Sr1,
    /// Position in the NEHKK2 sequence.
    Sr2,
    /// Position in a random permutation.
    Rnd,
}

impl ImportanceMeasure {
    pub const ALL: [ImportanceMeasure; 8] = [
        Self::Lsp,
        Self::Lst,
        Self::Kk1,
        Self::Kk2,
        Self::Sr0,
        Self::Sr1,
        Self::Sr2,
        Self::Rnd,
    ];

    /// `true` for measures whose score grows with importance; `false` for
    /// the position-based ones.
    pub fn larger_is_important(self) -> bool {
        matches!(self, Self::Lsp | Self::Lst | Self::Kk1 | Self::Kk2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lsp => "LSP",
            Self::Lst => "LST",
            Self::Kk1 => "KK1",
            Self::Kk2 => "KK2",
            Self::Sr0 => "SR0",
            Self::Sr1 => "SR1",
            Self::Sr2 => "SR2",
            Self::Rnd => "RND",
        }
    }
}

impl fmt::Display for ImportanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImportanceMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown importance measure `{s}`")))
    }
}

/// Per-job scores and the induced importance ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Importance {
    pub measure: ImportanceMeasure,
    /// Raw score per job. For position-based measures this is the 1-based
    /// position, so smaller is more important.
    pub scores: Vec<f64>,
    /// All jobs, most important first.
    pub ranking: Vec<Job>,
}

fn lsp(row: &[u32]) -> f64 {
    row.iter().map(|&t| f64::from(t) * f64::from(t)).sum()
}

fn lst(row: &[u32]) -> f64 {
    row.iter().map(|&t| f64::from(t)).sum()
}

fn kk1(row: &[u32]) -> f64 {
    let m = row.len() as f64;
    let base = (m - 1.0) * (m - 2.0) / 2.0;
    let (mut a, mut b) = (0.0, 0.0);
    for (j, &p) in row.iter().enumerate() {
        let j = (j + 1) as f64;
        a += (base + m - j) * f64::from(p);
        b += (base + j - 1.0) * f64::from(p);
    }
    a.min(b)
}

fn kk2(row: &[u32]) -> f64 {
    let m = row.len();
    let half = m / 2;
    let upper = m.div_ceil(2);
    let total = lst(row);
    let mut u = 0.0;
    for j in 1..=half {
        let w = (j as f64 - 0.75) / (half as f64 - 0.75);
        u += w * (f64::from(row[half - j]) - f64::from(row[upper + j - 1]));
    }
    (total + u).min(total - u)
}

fn rank_descending(scores: &[f64]) -> Vec<Job> {
    let mut order: Vec<Job> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

fn positions(seq: &[Job]) -> Vec<f64> {
    let mut pos = vec![0.0; seq.len()];
    for (i, &j) in seq.iter().enumerate() {
        pos[j] = (i + 1) as f64;
    }
    pos
}

fn score_rows(matrix: &ProblemMatrix, f: fn(&[u32]) -> f64) -> Vec<f64> {
    matrix.rows().map(f).collect()
}

/// Scores every job under `measure`. `rng` is consumed (one shuffle) only by
/// [`ImportanceMeasure::Rnd`].
pub fn importance_scores<R: Rng + ?Sized>(
    matrix: &ProblemMatrix,
    measure: ImportanceMeasure,
    rng: &mut R,
) -> Importance {
    use ImportanceMeasure::*;
    let scores = match measure {
        Lsp => score_rows(matrix, lsp),
        Lst => score_rows(matrix, lst),
        Kk1 => score_rows(matrix, kk1),
        Kk2 => score_rows(matrix, kk2),
        Sr0 | Sr1 | Sr2 => {
            let key = match measure {
                Sr0 => lst,
                Sr1 => kk1,
                _ => kk2,
            };
            let priority = rank_descending(&score_rows(matrix, key));
            let seq = neh(matrix, &priority).expect("ranking covers every job");
            positions(&seq)
        }
        Rnd => {
            let mut seq: Vec<Job> = (0..matrix.jobs()).collect();
            seq.shuffle(rng);
            positions(&seq)
        }
    };
    let ranking = if measure.larger_is_important() {
        rank_descending(&scores)
    } else {
        let mut order: Vec<Job> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        order
    };
    Importance {
        measure,
        scores,
        ranking,
    }
}

/// An economical auxiliary task.
#[derive(Debug, Clone, PartialEq)]
pub struct EatSpec {
    pub measure: ImportanceMeasure,
    /// Sampling ratio in percent.
    pub ratio: u32,
    /// Critical jobs in ascending index order; row `k` of `submatrix` is job
    /// `critical[k]`.
    pub critical: Vec<Job>,
    /// All jobs of the source instance, most important first.
    pub ranking: Vec<Job>,
    pub submatrix: ProblemMatrix,
    /// Job count of the source instance.
    pub source_jobs: usize,
}

impl EatSpec {
    /// Number of critical jobs.
    pub fn size(&self) -> usize {
        self.critical.len()
    }

    /// Non-critical jobs, most important first.
    pub fn remaining(&self) -> &[Job] {
        &self.ranking[self.size()..]
    }

    /// Membership mask over the source instance's jobs.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.source_jobs];
        for &j in &self.critical {
            mask[j] = true;
        }
        mask
    }

    /// Maps a permutation over submatrix rows to source job indices.
    pub fn to_source(&self, local: &[Job]) -> Vec<Job> {
        local.iter().map(|&k| self.critical[k]).collect()
    }
}

/// Number of critical jobs for `jobs` jobs at `ratio` percent (floored).
pub fn eat_size(jobs: usize, ratio: u32) -> usize {
    jobs * ratio as usize / 100
}

/// Keeps the top `⌊n·ratio/100⌋` jobs under `measure`.
pub fn build_eat<R: Rng + ?Sized>(
    matrix: &ProblemMatrix,
    measure: ImportanceMeasure,
    ratio: u32,
    rng: &mut R,
) -> Result<EatSpec> {
    if !(1..=99).contains(&ratio) {
        return Err(Error::Parameter(format!(
            "sampling ratio {ratio}% outside 1..=99"
        )));
    }
    let n = matrix.jobs();
    let g = eat_size(n, ratio);
    if g == 0 {
        return Err(Error::EatTooSmall { jobs: n, ratio });
    }
    if g >= n {
        return Err(Error::EatNotEconomical { jobs: n, ratio });
    }
    let importance = importance_scores(matrix, measure, rng);
    from_ranking(matrix, measure, ratio, importance.ranking)
}

/// Builds the auxiliary task from an explicit ranking.
pub fn from_ranking(
    matrix: &ProblemMatrix,
    measure: ImportanceMeasure,
    ratio: u32,
    ranking: Vec<Job>,
) -> Result<EatSpec> {
    let n = matrix.jobs();
    let g = eat_size(n, ratio);
    if g == 0 {
        return Err(Error::EatTooSmall { jobs: n, ratio });
    }
    if g >= n {
        return Err(Error::EatNotEconomical { jobs: n, ratio });
    }
    if ranking.len() != n {
        return Err(Error::InvalidOrder(format!(
            "ranking lists {} of {n} jobs",
            ranking.len()
        )));
    }
    crate::instance::check_distinct(&ranking, n)?;
    let mut critical = ranking[..g].to_vec();
    critical.sort_unstable();
    let submatrix = matrix.select_rows(&critical)?;
    Ok(EatSpec {
        measure,
        ratio,
        critical,
        ranking,
        submatrix,
        source_jobs: n,
    })
}
