//! Stream replay with per-round metrics.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cardinality::{CardinalityState, GuessLadder};
use crate::dynamic_matroid::{amplified_guided, AmplifierConfig, BranchParams, CombinatorialHalf, HalfMode};
use crate::error::{Error, Result};
use crate::hard::InstanceDescriptor;
use crate::harness::baseline::{offline_greedy, opt_for_round, ratio};
use crate::harness::config::{
    AlgorithmKind, HalfModeSpec, MatroidSpec, ObjectiveSpec, OptValue, RunConfig, StreamSpec,
    AUTO_OPT_BUDGET,
};
use crate::harness::report::RoundRecord;
use crate::matroid::{swap_round, MatroidHandle};
use crate::objectives::{CoverageFunction, ModularFunction};
use crate::oracle::{brute_force_opt, Constraint, CountedOracle, Element, SetFunction};
use crate::stream::{Stream, StreamOp};

/// Boxed `f64` objective.
pub type Objective = Box<dyn SetFunction<f64>>;

/// Records plus run-level accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<RoundRecord>,
    /// Rounds whose `opt` column is a greedy upper-bound proxy.
    pub bounded_rounds: Vec<usize>,
    pub algorithm_queries: u64,
    pub probe_queries: u64,
    /// `OPT` handed to the algorithm, when it needs one.
    pub algorithm_opt: Option<f64>,
}

pub fn build_objective(spec: &ObjectiveSpec) -> Result<Objective> {
    Ok(match spec {
        ObjectiveSpec::CoverageFile(p) => Box::new(CoverageFunction::<f64>::parse(&std::fs::read_to_string(p)?)?),
        ObjectiveSpec::CoverageRandom { n, items, density, max_weight, seed } => {
            Box::new(CoverageFunction::<f64>::random(*n, *items, *density, *max_weight, *seed))
        }
        ObjectiveSpec::Modular(ws) => Box::new(ModularFunction::try_new(ws.clone())?),
        ObjectiveSpec::Hard(p) => match InstanceDescriptor::read(p)? {
            InstanceDescriptor::Bipartite(b) => Box::new(b.instance()?),
            InstanceDescriptor::Tree(t) => Box::new(t.instance()?),
        },
    })
}

pub fn build_matroid(spec: &MatroidSpec, ground: usize) -> Result<MatroidHandle> {
    let m = match spec {
        MatroidSpec::Uniform(k) => MatroidHandle::uniform(*k, ground),
        MatroidSpec::File(p) => MatroidHandle::parse(&std::fs::read_to_string(p)?)?,
        MatroidSpec::RoundRobin { blocks, cap } => {
            MatroidHandle::partition((0..ground).map(|e| e % blocks).collect(), vec![*cap; *blocks])?
        }
    };
    if m.ground_size() != ground {
        return Err(Error::param(format!(
            "matroid ground size {} does not match the objective's {ground}",
            m.ground_size()
        )));
    }
    Ok(m)
}

pub fn build_stream(spec: &StreamSpec, ground: usize) -> Result<Stream> {
    let stream = match spec {
        StreamSpec::Sequential => Stream::insertions(0..ground)?,
        StreamSpec::Shuffled(seed) => {
            let mut ids: Vec<Element> = (0..ground).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            Stream::insertions(ids)?
        }
        StreamSpec::File(p) => Stream::parse(&std::fs::read_to_string(p)?)?,
    };
    if stream.ground_size() > ground {
        return Err(Error::param(format!(
            "stream references {} elements but the objective has {ground}",
            stream.ground_size()
        )));
    }
    Ok(stream)
}

/// Builds every component from `cfg` and replays its stream.
pub fn run_stream(cfg: &RunConfig) -> Result<RunOutput> {
    let objective = build_objective(&cfg.objective)?;
    let ground = objective.ground_size();
    let matroid = cfg.matroid.as_ref().map(|m| build_matroid(m, ground)).transpose()?;
    let stream = build_stream(&cfg.stream, ground)?;
    run_with(cfg, &objective, matroid.as_ref(), &stream)
}

trait Runner {
    fn apply(&mut self, op: StreamOp) -> Result<()>;
    fn solution(&mut self) -> Result<Vec<Element>>;
    fn queries(&self) -> u64;
}

fn insertion_only(kind: AlgorithmKind, op: StreamOp) -> Result<Element> {
    match op {
        StreamOp::Insert(e) => Ok(e),
        StreamOp::Delete(e) => {
            Err(Error::UnsupportedOp(format!("{} is insertion-only but the stream deletes {e}", kind.name())))
        }
    }
}

struct ThresholdRunner<'a, F> {
    oracle: &'a CountedOracle<F, f64>,
    state: CardinalityState<f64>,
}

impl<F: SetFunction<f64>> Runner for ThresholdRunner<'_, F> {
    fn apply(&mut self, op: StreamOp) -> Result<()> {
        let e = insertion_only(AlgorithmKind::Threshold, op)?;
        self.state.insert(self.oracle, e)
    }
    fn solution(&mut self) -> Result<Vec<Element>> {
        Ok(self.state.solution().to_vec())
    }
    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

struct LadderRunner<'a, F> {
    oracle: &'a CountedOracle<F, f64>,
    ladder: GuessLadder<f64>,
}

impl<F: SetFunction<f64>> Runner for LadderRunner<'_, F> {
    fn apply(&mut self, op: StreamOp) -> Result<()> {
        let e = insertion_only(AlgorithmKind::Ladder, op)?;
        self.ladder.insert(self.oracle, e)
    }
    fn solution(&mut self) -> Result<Vec<Element>> {
        Ok(self.ladder.solution().0)
    }
    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

struct HalfRunner<'a, F> {
    oracle: &'a CountedOracle<F, f64>,
    half: CombinatorialHalf<'a, F, f64>,
}

impl<F: SetFunction<f64>> Runner for HalfRunner<'_, F> {
    fn apply(&mut self, op: StreamOp) -> Result<()> {
        let e = insertion_only(AlgorithmKind::MatroidHalf, op)?;
        self.half.insert(e)
    }
    fn solution(&mut self) -> Result<Vec<Element>> {
        Ok(self.half.solution().0.to_vec())
    }
    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

/// Guided amplifier recomputed on every prefix; the rounded set is drawn
/// with a fixed seed.
struct AmplifiedRunner<'a, F> {
    base: &'a F,
    matroid: &'a MatroidHandle,
    config: AmplifierConfig<f64>,
    prefix: Vec<Element>,
    rounded: Vec<Element>,
    queries: u64,
    seed: u64,
}

impl<F: SetFunction<f64>> Runner for AmplifiedRunner<'_, F> {
    fn apply(&mut self, op: StreamOp) -> Result<()> {
        let e = insertion_only(AlgorithmKind::MatroidAmplified, op)?;
        if self.prefix.contains(&e) {
            return Err(Error::DuplicateInsert(e));
        }
        self.prefix.push(e);
        let out = amplified_guided(self.base, self.matroid, &self.prefix, &self.config, AUTO_OPT_BUDGET)?;
        self.queries += out.queries;
        self.rounded = swap_round(self.matroid, &out.combo(self.config.stages)?, self.seed)?;
        Ok(())
    }
    fn solution(&mut self) -> Result<Vec<Element>> {
        Ok(self.rounded.clone())
    }
    fn queries(&self) -> u64 {
        self.queries
    }
}

struct GreedyRunner<'a, F> {
    oracle: &'a CountedOracle<F, f64>,
    constraint: Constraint<'a>,
    live: BTreeSet<Element>,
    current: Vec<Element>,
}

impl<F: SetFunction<f64>> Runner for GreedyRunner<'_, F> {
    fn apply(&mut self, op: StreamOp) -> Result<()> {
        match op {
            StreamOp::Insert(e) => self.live.insert(e),
            StreamOp::Delete(e) => self.live.remove(&e),
        };
        let live: Vec<Element> = self.live.iter().copied().collect();
        self.current = offline_greedy(self.oracle, self.constraint, &live)?.0;
        Ok(())
    }
    fn solution(&mut self) -> Result<Vec<Element>> {
        Ok(self.current.clone())
    }
    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

/// Replays `stream` against already-built components.
///
/// The algorithm and the metric probes use separate counters, so
/// `q_round`/`q_total` never include the harness's own evaluations.
pub fn run_with<F: SetFunction<f64>>(
    cfg: &RunConfig,
    objective: &F,
    matroid: Option<&MatroidHandle>,
    stream: &Stream,
) -> Result<RunOutput> {
    let constraint = match (matroid, cfg.k) {
        (Some(m), _) => Constraint::Matroid(m),
        (None, Some(k)) => Constraint::Cardinality(k),
        (None, None) => return Err(Error::param("run needs k or a matroid")),
    };
    if !cfg.algorithm.accepts_deletions() && !stream.is_insertion_only() {
        let first = stream.ops().iter().find(|op| !op.is_insert()).map_or(0, |op| op.element());
        return Err(Error::UnsupportedOp(format!(
            "{} is insertion-only but the stream deletes {first}",
            cfg.algorithm.name()
        )));
    }
    let probe = CountedOracle::new(objective);
    let oracle = CountedOracle::new(objective);

    let algorithm_opt = match cfg.opt {
        Some(OptValue::Known(v)) => Some(v),
        Some(OptValue::Auto) => {
            let mut all: Vec<Element> = stream.ops().iter().map(|op| op.element()).collect();
            all.sort_unstable();
            all.dedup();
            let (_, v) = brute_force_opt(&probe, constraint, &all, AUTO_OPT_BUDGET)?;
            if v <= 0.0 {
                return Err(Error::param("optimum is zero; nothing to maximize"));
            }
            Some(v)
        }
        None => None,
    };
    let need_opt = || algorithm_opt.ok_or_else(|| Error::param(format!("{} needs opt", cfg.algorithm.name())));
    let need_matroid = || matroid.ok_or_else(|| Error::param(format!("{} needs a matroid", cfg.algorithm.name())));

    let mut runner: Box<dyn Runner + '_> = match cfg.algorithm {
        AlgorithmKind::Threshold => {
            let k = cfg.k.ok_or_else(|| Error::param("card needs k"))?;
            match algorithm_opt {
                Some(opt) => Box::new(ThresholdRunner { oracle: &oracle, state: CardinalityState::new(k, cfg.epsilon, opt)? }),
                None => Box::new(LadderRunner { oracle: &oracle, ladder: GuessLadder::new(k, cfg.epsilon)? }),
            }
        }
        AlgorithmKind::Ladder => {
            let k = cfg.k.ok_or_else(|| Error::param("ladder needs k"))?;
            Box::new(LadderRunner { oracle: &oracle, ladder: GuessLadder::new(k, cfg.epsilon)? })
        }
        AlgorithmKind::MatroidHalf => {
            let m = need_matroid()?;
            let opt = need_opt()?;
            let params = match cfg.levels {
                Some((l, r)) => BranchParams::with_overrides(cfg.epsilon, opt, l, r)?,
                None => BranchParams::new(m.rank_bound(), cfg.epsilon, opt)?,
            };
            let mode = match cfg.mode {
                HalfModeSpec::Guided => HalfMode::Guided,
                HalfModeSpec::Exhaustive => HalfMode::Exhaustive { budget: cfg.branch_budget },
            };
            Box::new(HalfRunner { oracle: &oracle, half: CombinatorialHalf::new(&oracle, m, params, mode)? })
        }
        AlgorithmKind::MatroidAmplified => {
            let m = need_matroid()?;
            let mut config = AmplifierConfig::new(cfg.epsilon, need_opt()?, m.rank_bound())?;
            if let Some(s) = cfg.stages {
                config = config.with_stages(s);
            }
            if let Some((l, r)) = cfg.levels {
                config = config.with_levels(l, r);
            }
            Box::new(AmplifiedRunner {
                base: objective,
                matroid: m,
                config,
                prefix: Vec::new(),
                rounded: Vec::new(),
                queries: 0,
                seed: cfg.rounding_seed,
            })
        }
        AlgorithmKind::OfflineGreedy => {
            Box::new(GreedyRunner { oracle: &oracle, constraint, live: BTreeSet::new(), current: Vec::new() })
        }
    };

    let mut live: BTreeSet<Element> = BTreeSet::new();
    let mut records = Vec::new();
    let mut bounded_rounds = Vec::new();
    let last = stream.len();
    let mut q_before = 0;
    for (i, &op) in stream.ops().iter().enumerate() {
        let t = i + 1;
        runner.apply(op)?;
        match op {
            StreamOp::Insert(e) => live.insert(e),
            StreamOp::Delete(e) => live.remove(&e),
        };
        let q_total = runner.queries();
        let q_round = q_total - q_before;
        q_before = q_total;
        if !cfg.checkpoint.includes(t, last) {
            continue;
        }
        let solution = runner.solution()?;
        let value = probe.eval(&solution)?;
        let live_vec: Vec<Element> = live.iter().copied().collect();
        let opt = opt_for_round(&probe, constraint, &live_vec, cfg.opt_mode)?;
        if !opt.exact {
            bounded_rounds.push(t);
        }
        records.push(RoundRecord {
            t,
            op: op.tag().to_string(),
            ground: live.len(),
            value,
            opt: opt.value,
            ratio: ratio(value, opt.value)?,
            q_round,
            q_total,
        });
    }
    Ok(RunOutput {
        records,
        bounded_rounds,
        algorithm_queries: runner.queries(),
        probe_queries: probe.queries(),
        algorithm_opt,
    })
}

/// Provenance text written next to a report: the effective configuration
/// followed by run-level accounting.
pub fn sidecar_text(cfg: &RunConfig, out: &RunOutput) -> String {
    let mut text = cfg.to_text();
    text.push_str(&format!("# algorithm_queries = {}\n", out.algorithm_queries));
    text.push_str(&format!("# probe_queries = {}\n", out.probe_queries));
    if let Some(opt) = out.algorithm_opt {
        text.push_str(&format!("# algorithm_opt = {opt}\n"));
    }
    if !out.bounded_rounds.is_empty() {
        let list: Vec<String> = out.bounded_rounds.iter().map(usize::to_string).collect();
        text.push_str(&format!("# opt_upper_bound_rounds = {}\n", list.join(",")));
    }
    text
}
