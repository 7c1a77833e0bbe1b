//! Normalized inter-task distance between flowshop instances.
//!
//! The distance from `Q` to `P` is the residual of the best fit of `Q` by
//! the family `t·P + b·E` (`t ≥ 0`), normalized to `[0, 1]` through the angle
//! between the mean-centered matrices. Scaling and shifting a matrix leaves
//! every makespan ranking unchanged, so distance 0 means the two instances
//! order all schedules identically.

use crate::auxiliary::EatSpec;
use crate::error::{Error, Result};
use crate::instance::{Job, ProblemMatrix};

/// A matrix with its grand mean removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub frobenius: f64,
}

impl CenteredMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn dot(&self, other: &CenteredMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Subtracts the grand mean from a row-major `rows × cols` matrix.
pub fn center(rows: usize, cols: usize, values: &[f64]) -> Result<CenteredMatrix> {
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(Error::Shape(format!(
            "{rows}x{cols} matrix with {} entries",
            values.len()
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let values: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let frobenius = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(CenteredMatrix {
        rows,
        cols,
        values,
        frobenius,
    })
}

pub fn center_problem(matrix: &ProblemMatrix) -> CenteredMatrix {
    let values: Vec<f64> = matrix.as_slice().iter().map(|&t| f64::from(t)).collect();
    center(matrix.jobs(), matrix.machines(), &values).expect("problem matrices are non-empty")
}

/// Outcome of [`itdm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    /// Normalized distance in `[0, 1]`.
    pub distance: f64,
    /// Optimal scale `t* ≥ 0`.
    pub scale: f64,
    /// Optimal shift `b*`.
    pub shift: f64,
    /// Cosine of the angle between the centered matrices.
    pub cos_theta: f64,
}

fn same_shape(q: &ProblemMatrix, p: &ProblemMatrix) -> Result<()> {
    if q.jobs() != p.jobs() || q.machines() != p.machines() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}; pad the smaller task first",
            q.jobs(),
            q.machines(),
            p.jobs(),
            p.machines()
        )));
    }
    Ok(())
}

/// Least-squares `(t*, b*)` minimizing `‖Q − t·P − b·E‖_F` over `t ≥ 0`.
///
/// The fitted matrix is `P`, so the denominator is `P`'s centered second
/// moment. Fails when `P` is constant.
pub fn optimal_scale_shift(q: &ProblemMatrix, p: &ProblemMatrix) -> Result<(f64, f64)> {
    same_shape(q, p)?;
    let cells = (p.jobs() * p.machines()) as f64;
    let (mut sq, mut sp, mut spp, mut sqp) = (0.0, 0.0, 0.0, 0.0);
    for (&qv, &pv) in q.as_slice().iter().zip(p.as_slice()) {
        let (qv, pv) = (f64::from(qv), f64::from(pv));
        sq += qv;
        sp += pv;
        spp += pv * pv;
        sqp += qv * pv;
    }
    let denominator = cells * spp - sp * sp;
    if denominator <= 0.0 {
        return Err(Error::Degenerate(
            "fitted matrix is constant; scale is undetermined".into(),
        ));
    }
    let t0 = (cells * sqp - sq * sp) / denominator;
    let t = t0.max(0.0);
    let b = (sq - t * sp) / cells;
    Ok((t, b))
}

/// Distance from the task `q` to the order-isomorphic family of `p`.
///
/// Directional: `itdm(q, p)` measures how well `p` (scaled and shifted)
/// explains `q`.
pub fn itdm(q: &ProblemMatrix, p: &ProblemMatrix) -> Result<DistanceResult> {
    same_shape(q, p)?;
    let qc = center_problem(q);
    let pc = center_problem(p);
    let cells = (p.jobs() * p.machines()) as f64;
    let mean_q = q.total() as f64 / cells;
    let mean_p = p.total() as f64 / cells;

    if qc.frobenius == 0.0 || pc.frobenius == 0.0 {
        return Ok(DistanceResult {
            distance: 1.0,
            scale: 0.0,
            shift: mean_q,
            cos_theta: 0.0,
        });
    }
    let cos_theta = (qc.dot(&pc) / (qc.frobenius * pc.frobenius)).clamp(-1.0, 1.0);
    if cos_theta <= 0.0 {
        return Ok(DistanceResult {
            distance: 1.0,
            scale: 0.0,
            shift: mean_q,
            cos_theta,
        });
    }
    let scale = cos_theta * qc.frobenius / pc.frobenius;
    // 2/(1+cos) - 1 with 1 - cos taken from the normalized difference,
    // which stays exact when the two directions coincide
    let gap: f64 = qc
        .values
        .iter()
        .zip(&pc.values)
        .map(|(a, b)| (a / qc.frobenius - b / pc.frobenius).powi(2))
        .sum::<f64>()
        / 2.0;
    let distance = (gap / (2.0 - gap)).max(0.0).sqrt().min(1.0);
    Ok(DistanceResult {
        distance,
        scale,
        shift: mean_q - scale * mean_p,
        cos_theta,
    })
}

/// Expands an auxiliary task back to `jobs` rows: rows of the critical jobs
/// keep their processing times, every other row is zero.
pub fn zero_pad(eat: &EatSpec, jobs: usize) -> Result<ProblemMatrix> {
    zero_pad_rows(&eat.submatrix, &eat.critical, jobs)
}

/// Places row `k` of `submatrix` at row `critical[k]` of a `jobs`-row zero matrix.
pub fn zero_pad_rows(
    submatrix: &ProblemMatrix,
    critical: &[Job],
    jobs: usize,
) -> Result<ProblemMatrix> {
    if !critical.is_empty() && critical.len() != submatrix.jobs() {
        return Err(Error::Shape(format!(
            "{} critical jobs for a {}-row submatrix",
            critical.len(),
            submatrix.jobs()
        )));
    }
    crate::instance::check_distinct(critical, jobs)?;
    let m = submatrix.machines();
    let mut times = vec![0; jobs * m];
    for (k, &job) in critical.iter().enumerate() {
        times[job * m..(job + 1) * m].copy_from_slice(submatrix.row(k));
    }
    ProblemMatrix::new(jobs, m, times)
}

/// Guaranteed floor on `cos θ` between the zero-padded auxiliary task built
/// from `critical` and the full matrix:
/// `m / (2(nm − 1)) · (n‖Q‖² / ‖P‖² − g)`.
///
/// The floor only holds while it is non-negative, which is always the case
/// for the LSP top-`g` rows; a negative value for another subset is not a
/// valid bound.
pub fn cos_theta_lower_bound(p: &ProblemMatrix, critical: &[Job]) -> Result<f64> {
    let (n, m) = (p.jobs(), p.machines());
    if n * m == 1 {
        return Err(Error::Degenerate("bound undefined for a 1x1 matrix".into()));
    }
    if critical.is_empty() {
        return Err(Error::Parameter("critical job set is empty".into()));
    }
    crate::instance::check_distinct(critical, n)?;
    let p_sq = p.frobenius_sq() as f64;
    if p_sq == 0.0 {
        return Err(Error::Degenerate("matrix is all zero".into()));
    }
    let q_sq: u64 = critical
        .iter()
        .flat_map(|&j| p.row(j))
        .map(|&t| u64::from(t) * u64::from(t))
        .sum();
    let (n, m, g) = (n as f64, m as f64, critical.len() as f64);
    Ok(m / (2.0 * (n * m - 1.0)) * (n * q_sq as f64 / p_sq - g))
}
