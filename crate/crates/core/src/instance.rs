//! Flowshop instances, makespan evaluation and benchmark file handling.
//!
//! Jobs and machines are 0-based everywhere in the library. Text formats and
//! the CLI present jobs 1-based.

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use crate::error::{Error, Result};

/// Processing time of one operation.
pub type Time = u32;

/// Job index (0-based row of a [`ProblemMatrix`]).
pub type Job = usize;

/// Dense `jobs × machines` processing-time matrix, stored job-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProblemMatrix {
    jobs: usize,
    machines: usize,
    times: Vec<Time>,
}

impl ProblemMatrix {
    pub fn new(jobs: usize, machines: usize, times: Vec<Time>) -> Result<Self> {
        if jobs == 0 || machines == 0 {
            return Err(Error::Shape(format!(
                "matrix needs at least one job and one machine, got {jobs}x{machines}"
            )));
        }
        if times.len() != jobs * machines {
            return Err(Error::Shape(format!(
                "{jobs}x{machines} matrix needs {} entries, got {}",
                jobs * machines,
                times.len()
            )));
        }
        Ok(Self {
            jobs,
            machines,
            times,
        })
    }

    pub fn from_rows<R: AsRef<[Time]>>(rows: &[R]) -> Result<Self> {
        let machines = rows.first().map_or(0, |r| r.as_ref().len());
        let mut times = Vec::with_capacity(rows.len() * machines);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != machines {
                return Err(Error::Shape(format!(
                    "row {} has {} entries, expected {machines}",
                    i + 1,
                    row.len()
                )));
            }
            times.extend_from_slice(row);
        }
        Self::new(rows.len(), machines, times)
    }

    /// All-zero matrix.
    pub fn zeros(jobs: usize, machines: usize) -> Result<Self> {
        Self::new(jobs, machines, vec![0; jobs * machines])
    }

    #[inline]
    pub fn jobs(&self) -> usize {
        self.jobs
    }

    #[inline]
    pub fn machines(&self) -> usize {
        self.machines
    }

    #[inline]
    pub fn get(&self, job: Job, machine: usize) -> Time {
        self.times[job * self.machines + machine]
    }

    #[inline]
    pub fn row(&self, job: Job) -> &[Time] {
        &self.times[job * self.machines..(job + 1) * self.machines]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Time]> + '_ {
        self.times.chunks_exact(self.machines)
    }

    pub fn as_slice(&self) -> &[Time] {
        &self.times
    }

    pub fn total(&self) -> u64 {
        self.times.iter().map(|&t| u64::from(t)).sum()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> u64 {
        self.times.iter().map(|&t| u64::from(t) * u64::from(t)).sum()
    }

    /// Matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: Time) -> Self {
        Self {
            times: self.times.iter().map(|&t| t * factor).collect(),
            ..self.clone()
        }
    }

    /// Matrix with `offset` added to every entry.
    pub fn shifted(&self, offset: Time) -> Self {
        Self {
            times: self.times.iter().map(|&t| t + offset).collect(),
            ..self.clone()
        }
    }

    /// Matrix made of the given rows, in the given order.
    pub fn select_rows(&self, jobs: &[Job]) -> Result<Self> {
        let mut times = Vec::with_capacity(jobs.len() * self.machines);
        for &job in jobs {
            self.check_job(job)?;
            times.extend_from_slice(self.row(job));
        }
        Self::new(jobs.len(), self.machines, times)
    }

    pub(crate) fn check_job(&self, job: Job) -> Result<()> {
        if job >= self.jobs {
            Err(Error::JobOutOfRange {
                job,
                jobs: self.jobs,
            })
        } else {
            Ok(())
        }
    }

    /// Completion time of the last job on the last machine when the listed
    /// jobs are processed in order. Jobs not listed are not scheduled.
    ///
    /// No validation is done; an empty sequence yields 0 and an out-of-range
    /// job panics. Use [`makespan`] for the checked form.
    pub fn makespan_of(&self, seq: &[Job]) -> u64 {
        let mut completion = vec![0u64; self.machines];
        for &job in seq {
            let row = self.row(job);
            let mut prev = 0u64;
            for (c, &p) in completion.iter_mut().zip(row) {
                prev = prev.max(*c) + u64::from(p);
                *c = prev;
            }
        }
        completion[self.machines - 1]
    }

    /// Best position for inserting `job` into the partial sequence `seq`,
    /// evaluated over all `seq.len() + 1` positions at once with the
    /// head/tail decomposition. Ties resolve to the earliest position.
    ///
    /// Returns `(position, makespan)`.
    pub fn best_insertion(&self, seq: &[Job], job: Job) -> (usize, u64) {
        let m = self.machines;
        let k = seq.len();
        // heads[i * m + j]: completion of the i-th scheduled job (1-based) on machine j
        let mut heads = vec![0u64; (k + 1) * m];
        for (i, &s) in seq.iter().enumerate() {
            let row = self.row(s);
            let (done, rest) = heads.split_at_mut((i + 1) * m);
            let above = &done[i * m..];
            let cur = &mut rest[..m];
            let mut left = 0u64;
            for j in 0..m {
                left = left.max(above[j]) + u64::from(row[j]);
                cur[j] = left;
            }
        }
        // tails[i * m + j]: longest path from the i-th job (0-based) on machine j to the end
        let mut tails = vec![0u64; (k + 1) * m];
        for i in (0..k).rev() {
            let row = self.row(seq[i]);
            let (cur, below) = tails.split_at_mut((i + 1) * m);
            let cur = &mut cur[i * m..];
            let below = &below[..m];
            let mut right = 0u64;
            for j in (0..m).rev() {
                right = right.max(below[j]) + u64::from(row[j]);
                cur[j] = right;
            }
        }
        let row = self.row(job);
        let mut best = (0, u64::MAX);
        for pos in 0..=k {
            let above = &heads[pos * m..(pos + 1) * m];
            let tail = &tails[pos * m..(pos + 1) * m];
            let mut f = 0u64;
            let mut span = 0u64;
            for j in 0..m {
                f = f.max(above[j]) + u64::from(row[j]);
                span = span.max(f + tail[j]);
            }
            if span < best.1 {
                best = (pos, span);
            }
        }
        best
    }
}

impl fmt::Display for ProblemMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.jobs, self.machines)?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(Time::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// An ordered, duplicate-free sequence of jobs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct JobPermutation(Vec<Job>);

impl JobPermutation {
    /// Validates that all jobs are distinct and below `universe`.
    pub fn new(seq: Vec<Job>, universe: usize) -> Result<Self> {
        check_distinct(&seq, universe)?;
        Ok(Self(seq))
    }

    /// Wraps a sequence that is already known to be valid.
    pub fn from_vec_unchecked(seq: Vec<Job>) -> Self {
        Self(seq)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Builds a permutation from 1-based job numbers.
    pub fn from_one_based(seq: &[usize], universe: usize) -> Result<Self> {
        let seq = seq
            .iter()
            .map(|&j| {
                j.checked_sub(1).ok_or(Error::JobOutOfRange {
                    job: 0,
                    jobs: universe,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(seq, universe)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }

    pub fn as_slice(&self) -> &[Job] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Job> {
        self.0
    }
}

impl Deref for JobPermutation {
    type Target = [Job];

    fn deref(&self) -> &[Job] {
        &self.0
    }
}

impl fmt::Display for JobPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| (j + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

pub(crate) fn check_distinct(seq: &[Job], universe: usize) -> Result<()> {
    let mut seen = vec![false; universe];
    for &job in seq {
        if job >= universe {
            return Err(Error::JobOutOfRange {
                job,
                jobs: universe,
            });
        }
        if std::mem::replace(&mut seen[job], true) {
            return Err(Error::DuplicateJob { job });
        }
    }
    Ok(())
}

/// Checked makespan of a (possibly partial) permutation.
pub fn makespan(matrix: &ProblemMatrix, seq: &[Job]) -> Result<u64> {
    if seq.is_empty() {
        return Err(Error::EmptySchedule);
    }
    check_distinct(seq, matrix.jobs())?;
    Ok(matrix.makespan_of(seq))
}

/// max(largest job row sum, largest machine column sum); never above the
/// optimal makespan.
pub fn lower_bound(matrix: &ProblemMatrix) -> u64 {
    let row_max = matrix
        .rows()
        .map(|r| r.iter().map(|&t| u64::from(t)).sum::<u64>())
        .max()
        .unwrap_or(0);
    let col_max = (0..matrix.machines())
        .map(|j| {
            (0..matrix.jobs())
                .map(|i| u64::from(matrix.get(i, j)))
                .sum::<u64>()
        })
        .max()
        .unwrap_or(0);
    row_max.max(col_max)
}

/// A named problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub matrix: ProblemMatrix,
    pub best_known: Option<u64>,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(name: impl Into<String>, matrix: ProblemMatrix) -> Self {
        Self {
            name: name.into(),
            matrix,
            best_known: None,
            seed: None,
        }
    }

    pub fn jobs(&self) -> usize {
        self.matrix.jobs()
    }

    pub fn machines(&self) -> usize {
        self.matrix.machines()
    }
}

/// On-disk instance layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `n m` header, then `n` job rows of `m` times.
    Canonical,
    /// `n m seed upper lower` header, then `m` machine rows of `n` times.
    Taillard,
}

impl Format {
    /// Canonical when the header has exactly two tokens, Taillard otherwise.
    pub fn detect(text: &str) -> Format {
        let header = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if header.split_whitespace().count() > 2 {
            Format::Taillard
        } else {
            Format::Canonical
        }
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokens(text: &str) -> impl Iterator<Item = Token<'_>> {
    text.lines().enumerate().flat_map(|(ln, line)| {
        let base = line.as_ptr() as usize;
        line.split_whitespace().map(move |t| Token {
            text: t,
            line: ln + 1,
            column: t.as_ptr() as usize - base + 1,
        })
    })
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_number(tok: &Token<'_>, what: &str) -> Result<u64> {
    if tok.text.starts_with('-') {
        return Err(parse_err(
            tok.line,
            tok.column,
            format!("negative {what} `{}`", tok.text),
        ));
    }
    tok.text.parse::<u64>().map_err(|_| {
        parse_err(
            tok.line,
            tok.column,
            format!("expected {what}, found `{}`", tok.text),
        )
    })
}

/// Parses instance text. The instance is named `instance`; use
/// [`read_instance`] to name it after the file.
pub fn parse_instance(text: &str, format: Format) -> Result<Instance> {
    let lines: Vec<&str> = text.lines().collect();
    let Some(header_idx) = lines.iter().position(|l| !l.trim().is_empty()) else {
        return Err(parse_err(1, 1, "missing header"));
    };
    let header: Vec<Token<'_>> = tokens(lines[header_idx])
        .map(|t| Token {
            line: header_idx + 1,
            ..t
        })
        .collect();
    if header.len() < 2 {
        return Err(parse_err(header_idx + 1, 1, "header needs `n m`"));
    }
    let n = parse_number(&header[0], "job count")? as usize;
    let m = parse_number(&header[1], "machine count")? as usize;
    if n == 0 || m == 0 {
        return Err(parse_err(header_idx + 1, 1, "job and machine counts must be positive"));
    }
    let (seed, best_known) = match format {
        Format::Canonical => {
            if header.len() != 2 {
                return Err(parse_err(
                    header[2].line,
                    header[2].column,
                    "canonical header has exactly two tokens",
                ));
            }
            (None, None)
        }
        Format::Taillard => {
            let seed = header.get(2).map(|t| parse_number(t, "seed")).transpose()?;
            let upper = header
                .get(3)
                .map(|t| parse_number(t, "upper bound"))
                .transpose()?;
            (seed, upper)
        }
    };

    let (outer, inner) = match format {
        Format::Canonical => (n, m),
        Format::Taillard => (m, n),
    };
    let mut rows: Vec<Vec<Time>> = Vec::with_capacity(outer);
    let mut last_line = header_idx + 1;
    for (idx, line) in lines.iter().enumerate().skip(header_idx + 1) {
        if line.trim().is_empty() {
            continue;
        }
        last_line = idx + 1;
        let toks: Vec<Token<'_>> = tokens(line)
            .map(|t| Token {
                line: idx + 1,
                ..t
            })
            .collect();
        if rows.len() == outer {
            return Err(parse_err(idx + 1, toks[0].column, "unexpected extra row"));
        }
        if toks.len() != inner {
            return Err(parse_err(
                idx + 1,
                1,
                format!("expected {inner} values, found {}", toks.len()),
            ));
        }
        let row = toks
            .iter()
            .map(|t| {
                let v = parse_number(t, "processing time")?;
                Time::try_from(v).map_err(|_| parse_err(t.line, t.column, "processing time too large"))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.len() != outer {
        return Err(parse_err(
            last_line + 1,
            1,
            format!("expected {outer} rows, found {}", rows.len()),
        ));
    }

    let matrix = match format {
        Format::Canonical => ProblemMatrix::from_rows(&rows)?,
        Format::Taillard => {
            let mut times = Vec::with_capacity(n * m);
            for i in 0..n {
                times.extend(rows.iter().map(|r| r[i]));
            }
            ProblemMatrix::new(n, m, times)?
        }
    };
    Ok(Instance {
        name: "instance".to_string(),
        matrix,
        best_known,
        seed,
    })
}

/// Reads an instance file, detecting its format from the header.
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut inst = parse_instance(&text, Format::detect(&text)).map_err(|e| match e {
        Error::Parse { .. } => Error::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => other,
    })?;
    inst.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string());
    Ok(inst)
}

/// Canonical text form.
pub fn write_instance(instance: &Instance) -> String {
    instance.matrix.to_string()
}

const LCG_MODULUS: i64 = 2_147_483_647;

/// Taillard's portable uniform generator (Schrage's method for 16807·x mod 2^31−1).
struct TaillardRng(i64);

impl TaillardRng {
    fn next_in(&mut self, low: i64, high: i64) -> i64 {
        const A: i64 = 16_807;
        const Q: i64 = 127_773;
        const R: i64 = 2_836;
        let k = self.0 / Q;
        self.0 = A * (self.0 % Q) - k * R;
        if self.0 < 0 {
            self.0 += LCG_MODULUS;
        }
        let u = self.0 as f64 / LCG_MODULUS as f64;
        low + (u * (high - low + 1) as f64) as i64
    }
}

/// Regenerates a Taillard instance from its published time seed.
pub fn generate_taillard(jobs: usize, machines: usize, seed: u64) -> Result<Instance> {
    if seed == 0 || seed > (LCG_MODULUS - 1) as u64 {
        return Err(Error::Parameter(format!(
            "seed {seed} outside [1, {}]",
            LCG_MODULUS - 1
        )));
    }
    if jobs == 0 || machines == 0 {
        return Err(Error::Parameter("job and machine counts must be positive".into()));
    }
    let mut rng = TaillardRng(seed as i64);
    let mut times = vec![0; jobs * machines];
    for j in 0..machines {
        for i in 0..jobs {
            times[i * machines + j] = rng.next_in(1, 99) as Time;
        }
    }
    Ok(Instance {
        name: format!("taillard_{jobs}x{machines}_{seed}"),
        matrix: ProblemMatrix::new(jobs, machines, times)?,
        best_known: None,
        seed: Some(seed),
    })
}
