//! Experiment campaigns: algorithm × instance × run grids, relative-error
//! metrics and CSV output.
//!
//! Campaign and sweep configurations are flat `key=value` text, one entry
//! per line, `#` starting a comment. Repeated keys (`instance`, `algorithm`,
//! `measure`, `ratio`) accumulate.
//!
//! ```text
//! instance=data/ta001.txt
//! instance=taillard:20x10:12345
//! algorithm=MFEA-I/LSP-20/RI
//! algorithm=P-MFEA/RndTsk2/IK
//! runs=5
//! budget_factor=0.003
//! base_seed=1
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::auxiliary::{build_eat, ImportanceMeasure};
use crate::distance::{cos_theta_lower_bound, itdm, zero_pad};
use crate::emt::{solve, Encoding, EngineConfig, Pairing, RunResult, TransferMode};
use crate::error::{Error, Result};
use crate::instance::{generate_taillard, lower_bound, read_instance, Instance};

/// `100 · (c − c*) / c*`.
pub fn relative_error(makespan: u64, reference: u64) -> Result<f64> {
    if reference == 0 {
        return Err(Error::Parameter("reference makespan must be positive".into()));
    }
    Ok(100.0 * (makespan as f64 - reference as f64) / reference as f64)
}

/// Auxiliary-task recipe named in an algorithm triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairingKind {
    Importance { measure: ImportanceMeasure, ratio: u32 },
    /// Random unrelated instance: 1 same size, 2 fewer jobs, 3 more jobs.
    RndTsk(u8),
}

impl fmt::Display for PairingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingKind::Importance { measure, ratio } => write!(f, "{measure}-{ratio}"),
            PairingKind::RndTsk(k) => write!(f, "RndTsk{k}"),
        }
    }
}

impl FromStr for PairingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(k) = lower.strip_prefix("rndtsk") {
            return match k {
                "1" => Ok(PairingKind::RndTsk(1)),
                "2" => Ok(PairingKind::RndTsk(2)),
                "3" => Ok(PairingKind::RndTsk(3)),
                _ => Err(Error::Config(format!("unknown pairing `{s}`"))),
            };
        }
        let (measure, ratio) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("pairing `{s}` is not MEASURE-RATIO")))?;
        let measure = measure.parse().map_err(|_| Error::Config(format!("unknown measure in `{s}`")))?;
        let ratio: u32 = ratio
            .parse()
            .map_err(|_| Error::Config(format!("bad ratio in `{s}`")))?;
        if !(1..=99).contains(&ratio) {
            return Err(Error::Config(format!("ratio {ratio} outside 1..=99")));
        }
        Ok(PairingKind::Importance { measure, ratio })
    }
}

/// An `EMT/TaskPair/Transfer` algorithm name such as `MFEA-I/LSP-20/RI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Algorithm {
    pub encoding: EncodingName,
    pub pairing: PairingKind,
    pub transfer: TransferName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncodingName {
    MfeaI,
    PMfea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferName {
    Ik,
    Ri,
}

impl Algorithm {
    pub fn encoding(&self) -> Encoding {
        match self.encoding {
            EncodingName::MfeaI => Encoding::RealKey,
            EncodingName::PMfea => Encoding::Permutation,
        }
    }

    pub fn transfer_mode(&self) -> TransferMode {
        match self.transfer {
            TransferName::Ik => TransferMode::Implicit,
            TransferName::Ri => TransferMode::Recursive,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let emt = match self.encoding {
            EncodingName::MfeaI => "MFEA-I",
            EncodingName::PMfea => "P-MFEA",
        };
        let transfer = match self.transfer {
            TransferName::Ik => "IK",
            TransferName::Ri => "RI",
        };
        write!(f, "{emt}/{}/{transfer}", self.pairing)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('/').collect();
        let [emt, pairing, transfer] = parts[..] else {
            return Err(Error::Config(format!("algorithm `{s}` is not EMT/PAIRING/TRANSFER")));
        };
        let encoding = match emt.to_ascii_uppercase().as_str() {
            "MFEA-I" | "MFEA" => EncodingName::MfeaI,
            "P-MFEA" => EncodingName::PMfea,
            _ => return Err(Error::Config(format!("unsupported EMT `{emt}` in `{s}`"))),
        };
        let transfer = match transfer.to_ascii_uppercase().as_str() {
            "IK" => TransferName::Ik,
            "RI" => TransferName::Ri,
            _ => return Err(Error::Config(format!("unknown transfer `{transfer}` in `{s}`"))),
        };
        let pairing: PairingKind = pairing.parse()?;
        if transfer == TransferName::Ri && matches!(pairing, PairingKind::RndTsk(_)) {
            return Err(Error::Config(format!(
                "`{s}`: recursive insertion needs an importance-sampled auxiliary task"
            )));
        }
        Ok(Algorithm {
            encoding,
            pairing,
            transfer,
        })
    }
}

/// Instance source in a configuration: a file path or
/// `taillard:<n>x<m>:<seed>`.
pub fn load_instance_spec(source: &str, base: &Path) -> Result<Instance> {
    if let Some(rest) = source.strip_prefix("taillard:") {
        let bad = || Error::Config(format!("bad generator source `{source}`, want taillard:NxM:SEED"));
        let (dims, seed) = rest.split_once(':').ok_or_else(bad)?;
        let (n, m) = dims.split_once('x').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        let m: usize = m.parse().map_err(|_| bad())?;
        let seed: u64 = seed.parse().map_err(|_| bad())?;
        let mut inst = generate_taillard(n, m, seed)?;
        inst.name = format!("ta_{n}x{m}_{seed}");
        return Ok(inst);
    }
    let path = Path::new(source);
    let path = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    };
    read_instance(path)
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Unrelated auxiliary instance for the random pairings, regenerated from a
/// seed derived from the primary's name: same machines, and `n`, `⌈n/2⌉` or
/// `2n` jobs.
pub fn random_auxiliary(exp: &Instance, kind: u8) -> Result<Instance> {
    let n = exp.jobs();
    let jobs = match kind {
        1 => n,
        2 => n.div_ceil(2).min(n.saturating_sub(1)).max(1),
        3 => 2 * n,
        _ => return Err(Error::Config(format!("RndTsk{kind} does not exist"))),
    };
    let seed = 1 + (fnv1a(&exp.name) ^ u64::from(kind)) % 2_147_483_646;
    let mut aux = generate_taillard(jobs, exp.machines(), seed)?;
    aux.name = format!("{}_rndtsk{kind}", exp.name);
    Ok(aux)
}

pub fn pairing_for(kind: PairingKind, exp: &Instance) -> Result<Pairing> {
    Ok(match kind {
        PairingKind::Importance { measure, ratio } => Pairing::Importance { measure, ratio },
        PairingKind::RndTsk(1) => Pairing::RndTsk1(random_auxiliary(exp, 1)?),
        PairingKind::RndTsk(2) => Pairing::RndTsk2(random_auxiliary(exp, 2)?),
        PairingKind::RndTsk(k) => Pairing::RndTsk3(random_auxiliary(exp, k)?),
    })
}

/// One finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: String,
    pub instance: String,
    pub run: usize,
    pub seed: u64,
    pub makespan: u64,
    /// Reference makespan the relative error is measured against.
    pub reference: Option<u64>,
    /// `true` when the reference is the campaign's best observed value
    /// rather than a published best-known makespan.
    pub reference_observed: bool,
    pub re: Option<f64>,
    /// `None` under generation-count termination.
    pub elapsed_s: Option<f64>,
    pub generations: usize,
    pub trace: String,
}

const RECORD_HEADER: &str =
    "algorithm,instance,run,seed,makespan,reference,reference_source,re,elapsed_s,generations,trace";

impl RunRecord {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.instance,
            self.run,
            self.seed,
            self.makespan,
            self.reference.map(|r| r.to_string()).unwrap_or_default(),
            match (self.reference, self.reference_observed) {
                (None, _) => "",
                (Some(_), true) => "observed",
                (Some(_), false) => "best_known",
            },
            self.re.map(|r| format!("{r:.6}")).unwrap_or_default(),
            self.elapsed_s.map(|e| format!("{e:.6}")).unwrap_or_default(),
            self.generations,
            self.trace
        )
    }

    fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::Config(format!("malformed record row `{line}`")));
        }
        let num = |s: &str, what: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Config(format!("bad {what} `{s}` in record row")))
        };
        let opt_f64 = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("bad number `{s}` in record row")))
            }
        };
        Ok(RunRecord {
            algorithm: f[0].to_string(),
            instance: f[1].to_string(),
            run: num(f[2], "run")? as usize,
            seed: num(f[3], "seed")?,
            makespan: num(f[4], "makespan")?,
            reference: if f[5].is_empty() {
                None
            } else {
                Some(num(f[5], "reference")?)
            },
            reference_observed: f[6] == "observed",
            re: opt_f64(f[7])?,
            elapsed_s: opt_f64(f[8])?,
            generations: num(f[9], "generations")? as usize,
            trace: f[10].to_string(),
        })
    }
}

/// Reads a records CSV written by [`run_campaign`].
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(RunRecord::from_csv)
        .collect()
}

/// ARE / BRE / WRE over the runs of one (algorithm, instance) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub algorithm: String,
    pub instance: String,
    pub runs: usize,
    pub are: f64,
    pub bre: f64,
    pub wre: f64,
}

pub fn aggregate(records: &[RunRecord]) -> Result<MetricsRow> {
    let first = records.first().ok_or(Error::EmptyAggregate)?;
    if records
        .iter()
        .any(|r| r.algorithm != first.algorithm || r.instance != first.instance)
    {
        return Err(Error::Parameter("records mix algorithms or instances".into()));
    }
    let res = records
        .iter()
        .map(|r| {
            r.re.ok_or_else(|| Error::Parameter(format!("run {} has no relative error", r.run)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MetricsRow {
        algorithm: first.algorithm.clone(),
        instance: first.instance.clone(),
        runs: res.len(),
        are: res.iter().sum::<f64>() / res.len() as f64,
        bre: res.iter().copied().fold(f64::INFINITY, f64::min),
        wre: res.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Metrics per (algorithm, instance), sorted by that key.
pub fn metrics_table(records: &[RunRecord]) -> Result<Vec<MetricsRow>> {
    let mut cells: BTreeMap<(String, String), Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.algorithm.clone(), r.instance.clone()))
            .or_default()
            .push(r.clone());
    }
    cells.values().map(|v| aggregate(v)).collect()
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("algorithm,instance,runs,are,bre,wre\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6}\n",
            r.algorithm, r.instance, r.runs, r.are, r.bre, r.wre
        ));
    }
    out
}

/// Parsed campaign configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub instances: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    /// Time budget is `budget_factor · n · m` seconds.
    pub budget_factor: f64,
    /// When set, runs stop after this many generations and ignore the clock.
    pub max_generations: Option<usize>,
    pub base_seed: u64,
    pub population: usize,
    pub ls_intensity: usize,
    pub parallelism: usize,
    /// Directory for CSV output, relative to the config file.
    pub output: PathBuf,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let engine = EngineConfig::default();
        Self {
            instances: Vec::new(),
            algorithms: Vec::new(),
            runs: 20,
            budget_factor: 0.03,
            max_generations: None,
            base_seed: 1,
            population: engine.population,
            ls_intensity: engine.ls_intensity,
            parallelism: 1,
            output: PathBuf::from("results"),
            base_dir: PathBuf::from("."),
        }
    }
}

fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        out.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: bad value `{value}` for `{key}`")))
}

impl CampaignConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = CampaignConfig {
            base_dir: base_dir.to_path_buf(),
            ..Default::default()
        };
        for (line, key, value) in key_values(text)? {
            match key.as_str() {
                "instance" => cfg.instances.push(value),
                "algorithm" => cfg.algorithms.push(
                    value
                        .parse()
                        .map_err(|e| Error::Config(format!("line {line}: {e}")))?,
                ),
                "runs" => cfg.runs = parse_value(line, &key, &value)?,
                "budget_factor" => cfg.budget_factor = parse_value(line, &key, &value)?,
                "max_generations" => cfg.max_generations = Some(parse_value(line, &key, &value)?),
                "base_seed" => cfg.base_seed = parse_value(line, &key, &value)?,
                "population" => cfg.population = parse_value(line, &key, &value)?,
                "ls_intensity" => cfg.ls_intensity = parse_value(line, &key, &value)?,
                "parallelism" => cfg.parallelism = parse_value(line, &key, &value)?,
                "output" => cfg.output = PathBuf::from(value),
                _ => return Err(Error::Config(format!("line {line}: unknown key `{key}`"))),
            }
        }
        if cfg.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if cfg.budget_factor <= 0.0 && cfg.max_generations.is_none() {
            return Err(Error::Config("budget_factor must be positive".into()));
        }
        if let Ok(p) = std::env::var("FLOWMT_PARALLELISM") {
            cfg.parallelism = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("FLOWMT_PARALLELISM=`{p}` is not a count")))?;
        }
        cfg.parallelism = cfg.parallelism.max(1);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn output_dir(&self) -> PathBuf {
        if self.output.is_absolute() {
            self.output.clone()
        } else {
            self.base_dir.join(&self.output)
        }
    }

    pub fn engine_config(&self, algorithm: &Algorithm, instance: &Instance, seed: u64) -> EngineConfig {
        let deterministic = self.max_generations.is_some();
        EngineConfig {
            population: self.population,
            ls_intensity: self.ls_intensity,
            encoding: algorithm.encoding(),
            transfer_mode: algorithm.transfer_mode(),
            time_budget: (!deterministic)
                .then(|| self.budget_factor * (instance.jobs() * instance.machines()) as f64),
            max_generations: self.max_generations,
            seed,
            ..EngineConfig::default()
        }
    }
}

/// Files written by a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub records: Vec<RunRecord>,
    pub metrics: Vec<MetricsRow>,
    pub records_path: PathBuf,
    pub metrics_path: PathBuf,
    /// Number of cells executed in this invocation (the rest were resumed).
    pub executed: usize,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn trace_csv(result: &RunResult, timed: bool) -> String {
    let mut out = String::from("elapsed_s,generation,best_makespan\n");
    for p in &result.trace {
        let elapsed = if timed { format!("{:.6}", p.elapsed_s) } else { String::new() };
        out.push_str(&format!("{elapsed},{},{}\n", p.generation, p.best_makespan));
    }
    out
}

struct Cell {
    order: usize,
    algorithm: Algorithm,
    instance: usize,
    run: usize,
}

/// Executes every (algorithm, instance, run) cell not already present in
/// the output records, then rewrites the records and metrics CSVs.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    let instances = cfg
        .instances
        .iter()
        .map(|s| load_instance_spec(s, &cfg.base_dir))
        .collect::<Result<Vec<_>>>()?;
    let mut names = HashSet::new();
    for inst in &instances {
        if !names.insert(inst.name.clone()) {
            return Err(Error::Config(format!("duplicate instance name `{}`", inst.name)));
        }
    }
    let out_dir = cfg.output_dir();
    let trace_dir = out_dir.join("traces");
    fs::create_dir_all(&trace_dir).map_err(|e| Error::io(&trace_dir, e))?;
    let records_path = out_dir.join("records.csv");
    let metrics_path = out_dir.join("metrics.csv");

    let mut done: HashMap<(String, String, usize), RunRecord> = HashMap::new();
    if records_path.exists() {
        for r in read_records(&records_path)? {
            done.insert((r.algorithm.clone(), r.instance.clone(), r.run), r);
        }
    }

    let mut cells = Vec::new();
    for i in 0..instances.len() {
        for alg in &cfg.algorithms {
            for run in 0..cfg.runs {
                cells.push(Cell {
                    order: cells.len(),
                    algorithm: *alg,
                    instance: i,
                    run,
                });
            }
        }
    }
    let pending: Vec<&Cell> = cells
        .iter()
        .filter(|c| {
            !done.contains_key(&(
                c.algorithm.to_string(),
                instances[c.instance].name.clone(),
                c.run,
            ))
        })
        .collect();

    // progress rows are appended as cells finish; the file is rewritten at the end
    let mut appender = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&records_path)
        .map_err(|e| Error::io(&records_path, e))?;
    if fs::metadata(&records_path).map(|m| m.len()).unwrap_or(0) == 0 {
        writeln!(appender, "{RECORD_HEADER}").map_err(|e| Error::io(&records_path, e))?;
    }

    let timed = cfg.max_generations.is_none();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Result<RunRecord>>();
    let workers = cfg.parallelism.min(pending.len()).max(1);
    let executed = pending.len();
    let mut first_error = None;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending, instances, trace_dir) = (&next, &pending, &instances, &trace_dir);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = pending.get(i) else { break };
                let record = execute_cell(cfg, cell, &instances[cell.instance], trace_dir, timed);
                if tx.send(record).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for record in rx {
            match record {
                Ok(r) => {
                    if let Err(e) = writeln!(appender, "{}", r.to_csv()) {
                        first_error.get_or_insert(Error::io(&records_path, e));
                    }
                    done.insert((r.algorithm.clone(), r.instance.clone(), r.run), r);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }

    // reference per instance: published best-known, else best observed
    let mut references: HashMap<String, (u64, bool)> = HashMap::new();
    for inst in &instances {
        if let Some(bk) = inst.best_known {
            references.insert(inst.name.clone(), (bk, false));
        }
    }
    for r in done.values() {
        if let Some(inst) = instances.iter().find(|i| i.name == r.instance) {
            if inst.best_known.is_none() {
                let e = references.entry(inst.name.clone()).or_insert((r.makespan, true));
                e.0 = e.0.min(r.makespan);
            }
        }
    }
    let mut records = Vec::with_capacity(cells.len());
    for c in &cells {
        let key = (
            c.algorithm.to_string(),
            instances[c.instance].name.clone(),
            c.run,
        );
        let mut r = done.remove(&key).expect("every cell has a record");
        let (reference, observed) = references[&key.1];
        r.reference = Some(reference);
        r.reference_observed = observed;
        r.re = Some(relative_error(r.makespan, reference)?);
        records.push(r);
        debug_assert_eq!(records.len(), c.order + 1);
    }
    let mut text = String::from(RECORD_HEADER);
    text.push('\n');
    for r in &records {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    fs::write(&records_path, text).map_err(|e| Error::io(&records_path, e))?;
    let metrics = metrics_table(&records)?;
    fs::write(&metrics_path, metrics_csv(&metrics)).map_err(|e| Error::io(&metrics_path, e))?;
    Ok(CampaignOutput {
        records,
        metrics,
        records_path,
        metrics_path,
        executed,
    })
}

fn execute_cell(
    cfg: &CampaignConfig,
    cell: &Cell,
    instance: &Instance,
    trace_dir: &Path,
    timed: bool,
) -> Result<RunRecord> {
    let seed = cfg.base_seed + cell.run as u64;
    let engine = cfg.engine_config(&cell.algorithm, instance, seed);
    let pairing = pairing_for(cell.algorithm.pairing, instance)?;
    let (_, result) = solve(instance.clone(), pairing, engine)?;
    debug_assert!(result.best_makespan >= lower_bound(&instance.matrix));
    let trace_name = format!(
        "{}__{}__{}.csv",
        sanitize(&cell.algorithm.to_string()),
        sanitize(&instance.name),
        cell.run
    );
    let trace_path = trace_dir.join(&trace_name);
    fs::write(&trace_path, trace_csv(&result, timed)).map_err(|e| Error::io(&trace_path, e))?;
    Ok(RunRecord {
        algorithm: cell.algorithm.to_string(),
        instance: instance.name.clone(),
        run: cell.run,
        seed,
        makespan: result.best_makespan,
        reference: instance.best_known,
        reference_observed: false,
        re: instance
            .best_known
            .map(|bk| relative_error(result.best_makespan, bk))
            .transpose()?,
        elapsed_s: timed.then(|| result.trace.last().map_or(0.0, |p| p.elapsed_s)),
        generations: result.generations,
        trace: format!("traces/{trace_name}"),
    })
}

/// Configuration of a distance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub instances: Vec<String>,
    pub measures: Vec<ImportanceMeasure>,
    pub ratios: Vec<u32>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub base_dir: PathBuf,
}

impl SweepConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = SweepConfig {
            instances: Vec::new(),
            measures: Vec::new(),
            ratios: Vec::new(),
            seed: 1,
            output: None,
            base_dir: base_dir.to_path_buf(),
        };
        for (line, key, value) in key_values(text)? {
            match key.as_str() {
                "instance" => cfg.instances.push(value),
                "measure" | "measures" => {
                    for v in value.split(',') {
                        cfg.measures
                            .push(v.trim().parse().map_err(|e| Error::Config(format!("line {line}: {e}")))?);
                    }
                }
                "ratio" | "ratios" => {
                    for v in value.split(',') {
                        cfg.ratios.push(parse_value(line, &key, v.trim())?);
                    }
                }
                "seed" => cfg.seed = parse_value(line, &key, &value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                _ => return Err(Error::Config(format!("line {line}: unknown key `{key}`"))),
            }
        }
        if cfg.measures.is_empty() {
            cfg.measures = ImportanceMeasure::ALL.to_vec();
        }
        if cfg.ratios.is_empty() {
            cfg.ratios = (1..=9).map(|k| k * 10).collect();
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Distance between one auxiliary task and its source instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub measure: ImportanceMeasure,
    pub ratio: u32,
    pub size: usize,
    pub seed: u64,
    pub distance: f64,
    pub cos_theta: f64,
    pub bound: Option<f64>,
}

/// `itdm(zero_pad(EAT), P)` for every (instance, measure, ratio). Ratios that
/// give an empty or full auxiliary task are skipped.
pub fn distance_sweep(
    instances: &[Instance],
    measures: &[ImportanceMeasure],
    ratios: &[u32],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for inst in instances {
        for &measure in measures {
            for &ratio in ratios {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let eat = match build_eat(&inst.matrix, measure, ratio, &mut rng) {
                    Ok(e) => e,
                    Err(Error::EatTooSmall { .. } | Error::EatNotEconomical { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let padded = zero_pad(&eat, inst.jobs())?;
                let d = itdm(&padded, &inst.matrix)?;
                rows.push(SweepRow {
                    instance: inst.name.clone(),
                    measure,
                    ratio,
                    size: eat.size(),
                    seed,
                    distance: d.distance,
                    cos_theta: d.cos_theta,
                    bound: cos_theta_lower_bound(&inst.matrix, &eat.critical).ok(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("instance,measure,ratio,g,seed,distance,cos_theta,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.9},{:.9},{}\n",
            r.instance,
            r.measure,
            r.ratio,
            r.size,
            r.seed,
            r.distance,
            r.cos_theta,
            r.bound.map(|b| format!("{b:.9}")).unwrap_or_default()
        ));
    }
    out
}
