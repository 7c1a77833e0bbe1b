use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flowmt::auxiliary::{build_eat, ImportanceMeasure};
use flowmt::distance::itdm;
use flowmt::emt::{solve, Encoding, EngineConfig, Pairing, TransferMode};
use flowmt::harness::{
    distance_sweep, load_instance_spec, metrics_csv, metrics_table, read_records, relative_error,
    run_campaign, sweep_csv, trace_csv, CampaignConfig, SweepConfig,
};
use flowmt::instance::{read_instance, write_instance, JobPermutation};
use flowmt::search::solve_eat;
use flowmt::transfer::{patch, PatchStrategy};
use flowmt::{Error, Instance, Result};

#[derive(Parser)]
#[command(name = "flowmt", version, about = "Flowshop scheduling with economical auxiliary tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance from instance A to the scale/shift family of instance B.
    Distance { a: PathBuf, b: PathBuf },
    /// Build an auxiliary task from the most important jobs.
    BuildEat {
        instance: PathBuf,
        #[arg(long, default_value = "lsp")]
        measure: ImportanceMeasure,
        #[arg(long, default_value_t = 20)]
        ratio: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the submatrix here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve a small instance with NEH plus simulated annealing.
    SolveEat {
        eat: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        sa_iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Complete an auxiliary-task permutation into a full schedule.
    Patch {
        instance: PathBuf,
        #[arg(long, default_value = "ri")]
        strategy: PatchStrategy,
        /// Comma-separated 1-based job numbers of the source instance.
        #[arg(long)]
        eat_perm: String,
        #[arg(long, default_value = "lsp")]
        measure: ImportanceMeasure,
        #[arg(long, default_value_t = 20)]
        ratio: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the multitasking engine on one instance.
    Solve {
        instance: PathBuf,
        /// MEASURE-RATIO (e.g. lsp-20) or rndtskK:FILE.
        #[arg(long, default_value = "lsp-20")]
        pairing: String,
        #[arg(long, default_value = "ri")]
        transfer: TransferMode,
        #[arg(long, default_value = "realkey")]
        encoding: Encoding,
        /// Time budget is this factor times n times m, in seconds.
        #[arg(long, default_value_t = 0.03)]
        budget_factor: f64,
        /// Stop after this many generations instead of on the clock.
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long, default_value_t = 100)]
        population: usize,
        #[arg(long, default_value_t = 50)]
        ls_intensity: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Convergence trace CSV.
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
    },
    /// Run a campaign described by a key=value config file.
    Experiment { config: PathBuf },
    /// Tabulate auxiliary-task distances described by a config file.
    DistanceSweep { config: PathBuf },
    /// Recompute ARE/BRE/WRE from a records CSV.
    Metrics { records: PathBuf },
}

fn parse_pairing(text: &str, base: &Path) -> Result<Pairing> {
    let lower = text.to_ascii_lowercase();
    if lower.starts_with("rndtsk") {
        let (kind, file) = text
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("`{text}` needs an instance file: rndtskK:FILE")))?;
        let aux = load_instance_spec(file, base)?;
        return match kind.to_ascii_lowercase().as_str() {
            "rndtsk1" => Ok(Pairing::RndTsk1(aux)),
            "rndtsk2" => Ok(Pairing::RndTsk2(aux)),
            "rndtsk3" => Ok(Pairing::RndTsk3(aux)),
            _ => Err(Error::Config(format!("unknown pairing `{text}`"))),
        };
    }
    let (measure, ratio) = lower
        .split_once('-')
        .ok_or_else(|| Error::Config(format!("pairing `{text}` is not MEASURE-RATIO")))?;
    Ok(Pairing::Importance {
        measure: measure.parse()?,
        ratio: ratio
            .parse()
            .map_err(|_| Error::Config(format!("bad ratio in `{text}`")))?,
    })
}

fn load(path: &Path) -> Result<Instance> {
    load_instance_spec(&path.to_string_lossy(), Path::new("."))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Distance { a, b } => {
            let (q, p) = (load(&a)?, load(&b)?);
            let d = itdm(&q.matrix, &p.matrix)?;
            println!("d: {:.9}", d.distance);
            println!("t*: {:.9}", d.scale);
            println!("b*: {:.9}", d.shift);
            println!("cos_theta: {:.9}", d.cos_theta);
        }
        Command::BuildEat {
            instance,
            measure,
            ratio,
            seed,
            output,
        } => {
            let inst = load(&instance)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let eat = build_eat(&inst.matrix, measure, ratio, &mut rng)?;
            let critical = JobPermutation::from_vec_unchecked(eat.critical.clone());
            println!("S: {critical}");
            println!("g: {}", eat.size());
            let sub = Instance::new(format!("{}_{}_{}", inst.name, measure, ratio), eat.submatrix);
            match output {
                Some(path) => write_file(&path, &write_instance(&sub))?,
                None => print!("{}", write_instance(&sub)),
            }
        }
        Command::SolveEat { eat, sa_iters, seed } => {
            let inst = read_instance(&eat)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perm = solve_eat(&inst.matrix, sa_iters, &mut rng);
            println!("permutation: {perm}");
            println!("makespan: {}", inst.matrix.makespan_of(&perm));
        }
        Command::Patch {
            instance,
            strategy,
            eat_perm,
            measure,
            ratio,
            seed,
        } => {
            let inst = load(&instance)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let eat = build_eat(&inst.matrix, measure, ratio, &mut rng)?;
            let numbers = eat_perm
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parameter(format!("bad job number `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let partial = JobPermutation::from_one_based(&numbers, inst.jobs())?;
            let mut sorted = partial.to_vec();
            sorted.sort_unstable();
            if sorted != eat.critical {
                return Err(Error::Partition(format!(
                    "--eat-perm must list exactly the critical jobs {}",
                    JobPermutation::from_vec_unchecked(eat.critical.clone())
                )));
            }
            let full = patch(strategy, &partial, eat.remaining(), &inst.matrix, &mut rng)?;
            println!("permutation: {full}");
            println!("makespan: {}", inst.matrix.makespan_of(&full));
        }
        Command::Solve {
            instance,
            pairing,
            transfer,
            encoding,
            budget_factor,
            generations,
            population,
            ls_intensity,
            seed,
            trace,
        } => {
            let inst = load(&instance)?;
            let base = instance.parent().unwrap_or(Path::new("."));
            let pairing = parse_pairing(&pairing, base)?;
            let timed = generations.is_none();
            let config = EngineConfig {
                population,
                ls_intensity,
                encoding,
                transfer_mode: transfer,
                time_budget: timed.then(|| budget_factor * (inst.jobs() * inst.machines()) as f64),
                max_generations: generations,
                seed,
                ..EngineConfig::default()
            };
            let best_known = inst.best_known;
            let (pair, result) = solve(inst, pairing, config)?;
            println!("pairing: {}", pair.label);
            println!("permutation: {}", result.best);
            println!("makespan: {}", result.best_makespan);
            if let Some(bk) = best_known {
                println!("re: {:.4}", relative_error(result.best_makespan, bk)?);
            }
            println!("generations: {}", result.generations);
            write_file(&trace, &trace_csv(&result, timed))?;
        }
        Command::Experiment { config } => {
            let cfg = CampaignConfig::load(&config)?;
            let out = run_campaign(&cfg)?;
            println!(
                "{} records ({} executed), {} metric rows",
                out.records.len(),
                out.executed,
                out.metrics.len()
            );
            println!("records: {}", out.records_path.display());
            println!("metrics: {}", out.metrics_path.display());
        }
        Command::DistanceSweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let instances = cfg
                .instances
                .iter()
                .map(|s| load_instance_spec(s, &cfg.base_dir))
                .collect::<Result<Vec<_>>>()?;
            let rows = distance_sweep(&instances, &cfg.measures, &cfg.ratios, cfg.seed)?;
            let text = sweep_csv(&rows);
            match &cfg.output {
                Some(path) => write_file(&cfg.base_dir.join(path), &text)?,
                None => print!("{text}"),
            }
        }
        Command::Metrics { records } => {
            let rows = metrics_table(&read_records(&records)?)?;
            print!("{}", metrics_csv(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flowmt: {e}");
            ExitCode::from(2)
        }
    }
}
