//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use flowmt::instance::{read_instance, ProblemMatrix};
use flowmt::Instance;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn sample() -> Instance {
    read_instance(data("sample10x5.txt")).unwrap()
}

pub fn ta001() -> Instance {
    read_instance(data("ta001.txt")).unwrap()
}

pub fn random_matrix<R: Rng>(jobs: usize, machines: usize, rng: &mut R) -> ProblemMatrix {
    let times = (0..jobs * machines).map(|_| rng.gen_range(1..=99)).collect();
    ProblemMatrix::new(jobs, machines, times).unwrap()
}

/// Completion-time table filled cell by cell, without any shared code.
pub fn dp_makespan(p: &ProblemMatrix, seq: &[usize]) -> u64 {
    if seq.is_empty() {
        return 0;
    }
    let m = p.machines();
    let mut c = vec![vec![0u64; m]; seq.len()];
    for (k, &job) in seq.iter().enumerate() {
        for j in 0..m {
            let above = if k > 0 { c[k - 1][j] } else { 0 };
            let left = if j > 0 { c[k][j - 1] } else { 0 };
            c[k][j] = above.max(left) + u64::from(p.get(job, j));
        }
    }
    c[seq.len() - 1][m - 1]
}

/// Heap's algorithm over all orders.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

pub fn brute_force_optimum(p: &ProblemMatrix) -> u64 {
    all_permutations(p.jobs())
        .iter()
        .map(|s| dp_makespan(p, s))
        .min()
        .unwrap()
}

pub fn subsets(n: usize, g: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, g: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == g {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, g, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, g, &mut Vec::new(), &mut out);
    out
}

fn residual(q: &[f64], p: &[f64], t: f64, b: f64) -> f64 {
    q.iter().zip(p).map(|(x, y)| (x - t * y - b).powi(2)).sum()
}

/// Minimizes ‖Q − tP − bE‖² over t ≥ 0 and b by a coarse grid followed by
/// shrinking pattern search; no closed form involved.
pub fn numeric_scale_shift(q: &ProblemMatrix, p: &ProblemMatrix) -> (f64, f64) {
    let q: Vec<f64> = q.as_slice().iter().map(|&v| f64::from(v)).collect();
    let p: Vec<f64> = p.as_slice().iter().map(|&v| f64::from(v)).collect();
    let (mut t, mut b) = (0.0, 0.0);
    let mut best = f64::INFINITY;
    for ti in 0..=200 {
        for bi in -100..=100 {
            let (tt, bb) = (ti as f64 * 0.05, bi as f64 * 2.0);
            let r = residual(&q, &p, tt, bb);
            if r < best {
                (best, t, b) = (r, tt, bb);
            }
        }
    }
    let (mut st, mut sb) = (0.05, 2.0);
    while st > 1e-9 || sb > 1e-7 {
        let mut moved = false;
        for (dt, db) in [(st, 0.0), (-st, 0.0), (0.0, sb), (0.0, -sb), (st, sb), (-st, -sb), (st, -sb), (-st, sb)] {
            let (tt, bb) = ((t + dt).max(0.0), b + db);
            let r = residual(&q, &p, tt, bb);
            if r < best - 1e-15 {
                (best, t, b) = (r, tt, bb);
                moved = true;
            }
        }
        if !moved {
            st *= 0.5;
            sb *= 0.5;
        }
    }
    (t, b)
}
