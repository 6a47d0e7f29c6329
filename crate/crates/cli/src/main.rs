use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use dynsub::hard::{
    traverse_stream, verify_instance, BipartiteDescriptor, BipartiteInstance, BipartiteShape, InstanceDescriptor,
    ShuffledTreeInstance, SymGapParams, TreeDescriptor, VerifyOptions, DEFAULT_STREAM_CAP,
};
use dynsub::harness::{emit_report, run_stream, sidecar_path, sidecar_text, to_csv, ConfigMap, ReportFormat, RunOutput};

const EXIT_USAGE: u8 = 1;
const EXIT_INVARIANT: u8 = 2;

#[derive(Parser)]
#[command(name = "dynsub", version, about = "Dynamic submodular maximization runs, hard-instance generators and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream against one algorithm and report per-round metrics.
    Run(RunArgs),
    /// Generate a hard stream plus its JSON instance descriptor.
    GenStream(GenArgs),
    /// Run the invariant suite on an instance descriptor.
    VerifyHard(VerifyArgs),
    /// Run one configuration for several values of a parameter, in parallel.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set k=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// card | ladder | matroid-half | matroid-amplified | offline-greedy.
    #[arg(long)]
    algorithm: Option<String>,
    /// Cardinality bound.
    #[arg(long)]
    k: Option<usize>,
    /// Accuracy parameter in (0, 1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Known optimum or `auto`.
    #[arg(long)]
    opt: Option<String>,
    /// coverage-file:PATH | coverage-random | modular:W,.. | hard:PATH.
    #[arg(long)]
    objective: Option<String>,
    /// none | uniform:K | file:PATH | round-robin:BLOCKS,CAP.
    #[arg(long)]
    matroid: Option<String>,
    /// sequential | shuffled:SEED | file:PATH.
    #[arg(long)]
    stream: Option<String>,
    /// every-round | every:N | at-end.
    #[arg(long)]
    checkpoint: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ConfigMap> {
        let mut map = match &self.config {
            Some(p) => ConfigMap::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => ConfigMap::default(),
        };
        let flags = [
            ("algorithm", self.algorithm.clone()),
            ("k", self.k.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("opt", self.opt.clone()),
            ("objective", self.objective.clone()),
            ("matroid", self.matroid.clone()),
            ("stream", self.stream.clone()),
            ("checkpoint", self.checkpoint.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.set(key, &v)?;
            }
        }
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
            map.set(k.trim(), v.trim())?;
        }
        Ok(map)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Report path; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct GenArgs {
    /// bipartite | tree.
    #[arg(long)]
    family: String,
    /// Seed for colorings, bijections and tree shufflings.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream file to write.
    #[arg(long)]
    out: PathBuf,
    /// Descriptor path; defaults to `<out>.instance.json`.
    #[arg(long)]
    descriptor: Option<PathBuf>,
    /// Bipartite block count.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Solution size the instance is built around.
    #[arg(long, default_value_t = 25)]
    k: usize,
    /// Bipartite color count.
    #[arg(long, default_value_t = 2)]
    w: usize,
    /// Fraction of k per color class on the A side.
    #[arg(long, default_value_t = 0.56)]
    alpha: f64,
    /// Fraction of k per color class on the B side.
    #[arg(long, default_value_t = 0.42)]
    beta: f64,
    /// Bipartite gap parameter.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Use the asymptotic smoothing parameters instead of the desk-scale ones.
    #[arg(long)]
    asymptotic_params: bool,
    /// Tree child counts `m_1,..,m_L` (last must be 1).
    #[arg(long, value_delimiter = ',')]
    arities: Vec<usize>,
    /// Children explored per tree node.
    #[arg(long)]
    explore: Option<usize>,
    /// Build the tree from a target stream length `n` with `--levels`.
    #[arg(long)]
    preset_n: Option<usize>,
    /// Tree depth used with `--preset-n`.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Refuse tree streams longer than this.
    #[arg(long, default_value_t = DEFAULT_STREAM_CAP)]
    max_len: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON instance descriptor.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Submodularity and monotonicity triples.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Monte-Carlo samples for the tree objective.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// `KEY=v1,v2,...`
    #[arg(long)]
    sweep: String,
    /// Directory receiving one report and sidecar per value.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// csv | json, for files under `--out-dir`.
    #[arg(long, default_value = "csv")]
    format: String,
}

enum Outcome {
    Ok,
    InvariantFailed,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::GenStream(a) => cmd_gen(a),
        Command::VerifyHard(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::InvariantFailed) => ExitCode::from(EXIT_INVARIANT),
        Err(e) => {
            eprintln!("error: {e:#}");
            let invariant = e.downcast_ref::<dynsub::Error>().is_some_and(dynsub::Error::is_invariant_violation);
            ExitCode::from(if invariant { EXIT_INVARIANT } else { EXIT_USAGE })
        }
    }
}

fn write_report(out: &RunOutput, cfg_text: &str, format: ReportFormat, path: &Path) -> Result<()> {
    emit_report(&out.records, format, path)?;
    std::fs::write(sidecar_path(path), cfg_text)?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<Outcome> {
    let format: ReportFormat = args.format.parse()?;
    let cfg = args.config.load()?.resolve()?;
    info!("running {}", cfg.algorithm.name());
    let out = run_stream(&cfg)?;
    let sidecar = sidecar_text(&cfg, &out);
    match &args.out {
        Some(path) => {
            write_report(&out, &sidecar, format, path)?;
            if let Some(last) = out.records.last() {
                eprintln!(
                    "{} rounds, final value {}, ratio {}, queries {}",
                    last.t, last.value, last.ratio, last.q_total
                );
            }
        }
        None => match format {
            ReportFormat::Csv => print!("{}", to_csv(&out.records)),
            ReportFormat::Json => println!("{}", dynsub::harness::to_json(&out.records)?),
        },
    }
    Ok(Outcome::Ok)
}

fn cmd_gen(args: GenArgs) -> Result<Outcome> {
    let descriptor_path = args.descriptor.clone().unwrap_or_else(|| {
        let mut s = args.out.as_os_str().to_owned();
        s.push(".instance.json");
        PathBuf::from(s)
    });
    let (stream, desc) = match args.family.as_str() {
        "bipartite" => {
            let params = if args.asymptotic_params {
                SymGapParams::asymptotic(args.w, args.eps)?
            } else {
                SymGapParams::test_friendly(args.w, args.eps)?
            };
            let shape = BipartiteShape { m: args.m, k: args.k, part_alpha: args.alpha, beta: args.beta, params };
            let inst = BipartiteInstance::random(shape, args.seed)?;
            let stream = inst.stream()?;
            (stream, InstanceDescriptor::Bipartite(BipartiteDescriptor::from_instance(&inst, Some(args.seed))))
        }
        "tree" => {
            let (mut inst, explore) = match args.preset_n {
                Some(n) => {
                    let (inst, info) = ShuffledTreeInstance::<f64>::preset(n, args.k, args.levels)?;
                    (inst, args.explore.unwrap_or(info.explore))
                }
                None => {
                    if args.arities.is_empty() {
                        bail!("tree family needs --arities or --preset-n");
                    }
                    let inst = ShuffledTreeInstance::<f64>::new(args.arities.clone(), args.k)?;
                    let explore = args.explore.unwrap_or(1);
                    (inst, explore)
                }
            };
            inst.randomize_shuffle(args.seed)?;
            let ts = traverse_stream(&inst, explore, args.max_len)?;
            (ts.stream, InstanceDescriptor::Tree(TreeDescriptor::from_instance(&inst, explore, Some(args.seed))))
        }
        other => bail!("unknown family '{other}' (expected bipartite or tree)"),
    };
    std::fs::write(&args.out, stream.to_text()).with_context(|| format!("writing {}", args.out.display()))?;
    desc.write(&descriptor_path)?;
    eprintln!("{} ops -> {}, descriptor -> {}", stream.len(), args.out.display(), descriptor_path.display());
    Ok(Outcome::Ok)
}

fn cmd_verify(args: VerifyArgs) -> Result<Outcome> {
    let desc = InstanceDescriptor::read(&args.instance)?;
    let opts = VerifyOptions {
        seed: args.seed,
        property_trials: args.trials,
        monte_carlo_samples: args.samples,
        ..VerifyOptions::default()
    };
    let checks = verify_instance(&desc, &opts)?;
    let mut all = true;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    Ok(if all { Outcome::Ok } else { Outcome::InvariantFailed })
}

fn cmd_bench(args: BenchArgs) -> Result<Outcome> {
    let format: ReportFormat = args.format.parse()?;
    let (key, values) = args.sweep.split_once('=').context("--sweep expects KEY=v1,v2,...")?;
    let key = key.trim();
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        bail!("--sweep needs at least one value");
    }
    let base = args.config.load()?;
    let configs = values
        .iter()
        .map(|v| {
            let mut map = base.clone();
            map.set(key, v)?;
            Ok(map.resolve()?)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let outputs: Vec<dynsub::Result<RunOutput>> = configs.par_iter().map(run_stream).collect();
    println!("{key},rounds,value,min_ratio,q_total,q_per_round");
    for ((value, cfg), out) in values.iter().zip(&configs).zip(outputs) {
        let out = out?;
        let last = out.records.last();
        let min_ratio = out.records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let (t, v, q) = last.map_or((0, 0.0, 0), |r| (r.t, r.value, r.q_total));
        let per = if t > 0 { q as f64 / t as f64 } else { 0.0 };
        println!("{value},{t},{v},{},{q},{per}", if min_ratio.is_finite() { min_ratio } else { 1.0 });
        if let Some(dir) = &args.out_dir {
            let ext = match format {
                ReportFormat::Csv => "csv",
                ReportFormat::Json => "json",
            };
            let path = dir.join(format!("{key}={value}.{ext}"));
            write_report(&out, &sidecar_text(cfg, &out), format, &path)?;
        }
    }
    info!("swept {key} over {} values", values.len());
    Ok(Outcome::Ok)
}
