//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dynsub::cardinality::{CardinalityState, GuessLadder};
use dynsub::dynamic_matroid::{
    amplified_guided, reference_lpass, AmplifierConfig, BranchParams, CombinatorialHalf, HalfMode, PruneGreedyState,
};
use dynsub::hard::{
    analytic_q, random_sparse_point, traverse_length, traverse_stream, verify_bipartite, BipartiteInstance,
    BipartiteShape, ShuffledTreeInstance, SymGapParams, VerifyOptions, WeightSequence, DEFAULT_STREAM_CAP,
};
use dynsub::matroid::swap_round;
use dynsub::objectives::{multilinear_exact, CoverageFunction};
use dynsub::oracle::{brute_force_opt, Constraint};
use dynsub::{CountedOracle, Element, MatroidHandle, Result, SetFunction};

const INV_E: f64 = 0.36787944117144233;
const ENUM_BUDGET: u128 = 1 << 24;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict { passed, detail: detail.into() }
    }
}

struct CardinalityCase {
    f: CoverageFunction<f64>,
    k: usize,
    order: Vec<Element>,
    opt_trace: Vec<f64>,
}

struct MatroidCase {
    f: CoverageFunction<f64>,
    m: MatroidHandle,
    order: Vec<Element>,
    opt: f64,
}

/// Per-round optimum of an insertion-only stream under a cardinality or matroid constraint.
fn opt_trace(f: &CoverageFunction<f64>, constraint: Constraint<'_>, order: &[Element]) -> Result<Vec<f64>> {
    fn extend(
        f: &CoverageFunction<f64>,
        constraint: Constraint<'_>,
        pool: &[Element],
        chosen: &mut Vec<Element>,
        best: &mut f64,
    ) -> Result<()> {
        let feasible = match constraint {
            Constraint::Cardinality(k) => chosen.len() <= k,
            Constraint::Matroid(m) => m.is_independent(chosen)?,
        };
        if !feasible {
            return Ok(());
        }
        *best = best.max(f.value(chosen));
        for (i, &e) in pool.iter().enumerate() {
            chosen.push(e);
            extend(f, constraint, &pool[i + 1..], chosen, best)?;
            chosen.pop();
        }
        Ok(())
    }
    let mut trace = Vec::with_capacity(order.len());
    let mut best = 0.0;
    for t in 0..order.len() {
        let mut chosen = vec![order[t]];
        extend(f, constraint, &order[..t], &mut chosen, &mut best)?;
        trace.push(best);
    }
    Ok(trace)
}

fn cardinality_cases() -> Result<Vec<CardinalityCase>> {
    (0..30u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let n = rng.gen_range(10..=30);
            let k = rng.gen_range(1..=4);
            let items = rng.gen_range(n..=2 * n);
            let f = CoverageFunction::random(n, items, rng.gen_range(0.05..0.3), 5, seed);
            let mut order: Vec<Element> = (0..n).collect();
            order.shuffle(&mut rng);
            let opt_trace = opt_trace(&f, Constraint::Cardinality(k), &order)?;
            Ok(CardinalityCase { f, k, order, opt_trace })
        })
        .collect()
}

fn matroid_cases() -> Result<Vec<MatroidCase>> {
    (0..50u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let n = rng.gen_range(6..=20);
            let blocks = rng.gen_range(1..=4usize);
            let mut caps = vec![1; blocks];
            while caps.iter().sum::<usize>() < 4 && rng.gen_bool(0.5) {
                caps[rng.gen_range(0..blocks)] += 1;
            }
            let block_of = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
            let m = MatroidHandle::partition(block_of, caps)?;
            let f = CoverageFunction::random(n, rng.gen_range(n..=2 * n), rng.gen_range(0.1..0.35), 4, seed);
            let mut order: Vec<Element> = (0..n).collect();
            order.shuffle(&mut rng);
            let probe = CountedOracle::new(&f);
            let (_, opt) = brute_force_opt(&probe, Constraint::Matroid(&m), &order, ENUM_BUDGET)?;
            Ok(MatroidCase { f, m, order, opt })
        })
        .collect()
}

fn cardinality_approximation(cases: &[CardinalityCase]) -> Result<Verdict> {
    let start = Instant::now();
    let eps = 0.25;
    let mut worst = f64::INFINITY;
    let mut trace_ok = true;
    for c in cases {
        let probe = CountedOracle::new(&c.f);
        let (_, opt) = brute_force_opt(&probe, Constraint::Cardinality(c.k), &c.order, ENUM_BUDGET)?;
        trace_ok &= c.opt_trace.last() == Some(&opt);
        let oracle = CountedOracle::new(&c.f);
        let mut state = CardinalityState::new(c.k, eps, opt)?;
        for (t, &e) in c.order.iter().enumerate() {
            state.insert(&oracle, e)?;
            if c.opt_trace[t] >= opt {
                let margin = state.value() - (1.0 - INV_E - eps) * opt;
                worst = worst.min(margin);
                break;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Verdict::new(
        trace_ok && worst >= -1e-9 && secs < 10.0,
        format!("30 instances, min f(S_t) - (1-1/e-eps)OPT = {worst:.4}, {secs:.2}s"),
    ))
}

fn cardinality_budget(cases: &[CardinalityCase]) -> Result<Verdict> {
    let eps = 0.25;
    let per = 2 * ((1.0_f64 / eps).floor() as u64 + 2);
    let mut max_fraction = 0f64;
    let mut ok = true;
    for c in cases {
        let opt = *c.opt_trace.last().unwrap_or(&0.0);
        let oracle = CountedOracle::new(&c.f);
        let mut state = CardinalityState::new(c.k, eps, opt)?;
        for &e in &c.order {
            state.insert(&oracle, e)?;
        }
        let bound = per * c.order.len() as u64;
        let used = state.charged_queries().max(oracle.queries());
        ok &= used <= bound;
        max_fraction = max_fraction.max(used as f64 / bound as f64);
    }
    Ok(Verdict::new(ok, format!("max queries / budget = {max_fraction:.3}")))
}

fn ladder_approximation(cases: &[CardinalityCase]) -> Result<Verdict> {
    let eps = 0.25;
    let floor = 1.0 - INV_E - 2.0 * eps;
    let mut worst = f64::INFINITY;
    let mut rounds = 0;
    for c in cases {
        let oracle = CountedOracle::new(&c.f);
        let mut ladder = GuessLadder::new(c.k, eps)?;
        for (t, &e) in c.order.iter().enumerate() {
            ladder.insert(&oracle, e)?;
            let (_, value) = ladder.solution();
            let ratio = if c.opt_trace[t] > 0.0 { value / c.opt_trace[t] } else { 1.0 };
            worst = worst.min(ratio);
            rounds += 1;
        }
    }
    Ok(Verdict::new(worst >= floor - 1e-9, format!("{rounds} rounds, min ratio {worst:.4} vs {floor:.4}")))
}

fn prune_greedy_matches_reference(cases: &[MatroidCase]) -> Result<Verdict> {
    let mut mismatches = 0;
    for c in cases {
        let rank = c.m.rank_bound();
        let params = BranchParams::new(rank, 0.33, c.opt)?;
        let oracle = CountedOracle::new(&c.f);
        let cert = reference_lpass(&c.order, &params, &oracle, &c.m)?;
        let mut state = PruneGreedyState::new(params, cert.branch.clone())?;
        for &e in &c.order {
            state.insert(&oracle, &c.m, e)?;
        }
        if !state.is_terminated() || state.solution() != cert.union().as_slice() {
            mismatches += 1;
        }
    }
    Ok(Verdict::new(mismatches == 0, format!("{mismatches}/{} mismatches", cases.len())))
}

fn combinatorial_half(cases: &[MatroidCase]) -> Result<Verdict> {
    let eps = 0.33;
    let mut worst = f64::INFINITY;
    let mut dominance_failures = 0;
    for c in cases {
        let oracle = CountedOracle::new(&c.f);
        let params = BranchParams::new(c.m.rank_bound(), eps, c.opt)?;
        let mut guided = CombinatorialHalf::new(&oracle, &c.m, params, HalfMode::Guided)?;
        for &e in &c.order {
            guided.insert(e)?;
        }
        worst = worst.min(guided.solution().1 - (0.5 - 12.0 * eps) * c.opt);
        for levels in 1..=2 {
            for budget_total in 1..=3 {
                let p = BranchParams::with_overrides(eps, c.opt, levels, budget_total)?;
                let mut g = CombinatorialHalf::new(&oracle, &c.m, p, HalfMode::Guided)?;
                let mut full = CombinatorialHalf::new(&oracle, &c.m, p, HalfMode::Exhaustive { budget: 1 << 16 })?;
                for &e in &c.order {
                    g.insert(e)?;
                    full.insert(e)?;
                    if full.solution().1 < g.solution().1 - 1e-12 {
                        dominance_failures += 1;
                    }
                }
            }
        }
    }
    Ok(Verdict::new(
        worst >= -1e-9 && dominance_failures == 0,
        format!("min f(S) - (1/2-12eps)OPT = {worst:.4}, exhaustive below guided in {dominance_failures} rounds"),
    ))
}

fn amplification() -> Result<Verdict> {
    let eps = 0.25;
    let trials = 2000;
    let mut worst_margin = f64::INFINITY;
    let mut worst_z = f64::NEG_INFINITY;
    let mut dependent = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let n = rng.gen_range(7..=10);
        let blocks = 3;
        let m = MatroidHandle::partition((0..n).map(|e| e % blocks).collect(), vec![1; blocks])?;
        let f = CoverageFunction::<f64>::random(n, 12, 0.3, 3, 3000 + seed);
        let mut prefix: Vec<Element> = (0..n).collect();
        prefix.shuffle(&mut rng);
        let probe = CountedOracle::new(&f);
        let (_, opt) = brute_force_opt(&probe, Constraint::Matroid(&m), &prefix, ENUM_BUDGET)?;
        let cfg = AmplifierConfig::new(eps, opt, m.rank_bound())?.with_stages(4);
        let out = amplified_guided(&f, &m, &prefix, &cfg, ENUM_BUDGET)?;
        let fx = multilinear_exact(&f, &out.point)?;
        worst_margin = worst_margin.min(fx - (1.0 - INV_E - 2.0 * eps) * opt);
        let combo = out.combo(4)?;
        let values = (0..trials as u64)
            .map(|s| {
                let set = swap_round(&m, &combo, s)?;
                if !m.is_independent(&set)? {
                    dependent += 1;
                }
                Ok(f.value(&set))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = values.iter().sum::<f64>() / trials as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
        let se = (var / trials as f64).sqrt();
        let z = if se > 0.0 { (fx - mean) / se } else if mean >= fx - 1e-12 { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
    }
    Ok(Verdict::new(
        worst_margin >= -1e-9 && dependent == 0 && worst_z <= 3.0,
        format!(
            "min F(x) - (1-1/e-2eps)OPT = {worst_margin:.4}, {dependent} dependent roundings, max shortfall {worst_z:.2} SE"
        ),
    ))
}

fn bipartite_shape(m: usize) -> Result<BipartiteShape<f64>> {
    Ok(BipartiteShape { m, k: 25, part_alpha: 0.56, beta: 0.42, params: SymGapParams::test_friendly(2, 0.5)? })
}

fn bipartite_construction() -> Result<Verdict> {
    let opts = VerifyOptions { random_sets: 100, property_trials: 10_000, ..VerifyOptions::default() };
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let inst = BipartiteInstance::random(bipartite_shape(1 + (seed as usize % 8))?, seed)?;
        for check in verify_bipartite(&inst, &VerifyOptions { seed, ..opts })? {
            if !check.passed {
                failures.push(format!("seed {seed} {}: {}", check.name, check.detail));
            }
        }
    }
    let detail = if failures.is_empty() {
        "20 instances, m = 1..8, all checks clean".to_string()
    } else {
        failures.join("; ")
    };
    Ok(Verdict::new(failures.is_empty(), detail))
}

fn analytic_gap() -> Result<Verdict> {
    let (q, lambda) = analytic_q(0.56, 0.42);
    let (naive, _) = analytic_q(0.5, 0.5);
    Ok(Verdict::new(
        q < 0.5839 && naive > q,
        format!("Q(0.56,0.42) = {q:.9} at lambda {lambda:.4}, Q(0.5,0.5) = {naive:.9}"),
    ))
}

fn tiny_arities() -> Vec<Vec<usize>> {
    let mut out = vec![vec![1]];
    for a in 1..=4 {
        out.push(vec![a, 1]);
        for b in 1..=4 {
            out.push(vec![a, b, 1]);
        }
    }
    out
}

fn tree_construction() -> Result<Verdict> {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut worst = 0f64;
    for l in 1..=10 {
        let s = WeightSequence::<f64>::new(l)?;
        worst = worst.max((s.weight.iter().sum::<f64>() - 1.0).abs());
        for j in 1..=l {
            let prod: f64 = (1..j).map(|i| 1.0 - s.mass[i] / s.tail[i]).product();
            worst = worst.max((s.mass[j] * prod - 1.0).abs());
        }
    }
    let two = WeightSequence::<f64>::new(2)?;
    let hand = (two.weight[1] - 0.381966).abs().max((two.weight[2] - 0.618034).abs());
    ok &= worst <= 1e-9 && hand <= 1e-6;
    notes.push(format!("identity err {worst:.1e}, L=2 err {hand:.1e}"));

    let mut inst = ShuffledTreeInstance::<f64>::new(vec![3, 3, 1], 3)?;
    inst.randomize_shuffle(7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut gap = 0f64;
    for trial in 0..20u64 {
        let x = random_sparse_point(&inst, &mut rng, 6);
        gap = gap.max((inst.g_exact(&x) - inst.g_monte_carlo(&x, 100_000, trial)?).abs());
    }
    ok &= gap <= 0.01;
    notes.push(format!("exact vs sampled gap {gap:.4}"));

    let mut leaves_checked = 0;
    let mut path_fail = 0;
    let mut streams = 0;
    let mut stream_fail = 0;
    for arities in tiny_arities() {
        let l = arities.len();
        for k in [l, 2 * l] {
            for seed in 0..3u64 {
                let mut t = ShuffledTreeInstance::<f64>::new(arities.clone(), k)?;
                t.randomize_shuffle(seed)?;
                for leaf in t.leaves()? {
                    leaves_checked += 1;
                    let s = t.path_set(&leaf)?;
                    path_fail += usize::from(s.len() != k || t.eval(&s) != 1.0);
                }
                let max_explore = arities[..l - 1].iter().copied().min().unwrap_or(1);
                for explore in 1..=max_explore {
                    streams += 1;
                    let ts = traverse_stream(&t, explore, DEFAULT_STREAM_CAP)?;
                    let expect = traverse_length(&arities, explore, t.per_node());
                    let mut good = expect == Some(ts.stream.len() as u128);
                    let mut live = BTreeSet::new();
                    let mut applied = 0;
                    for (leaf, at) in &ts.leaf_visits {
                        for op in &ts.stream.ops()[applied..*at] {
                            if op.is_insert() {
                                live.insert(op.element());
                            } else {
                                live.remove(&op.element());
                            }
                        }
                        applied = *at;
                        good &= live.iter().copied().eq(t.w_set(leaf)?);
                    }
                    stream_fail += usize::from(!good);
                }
            }
        }
    }
    ok &= path_fail == 0 && stream_fail == 0;
    notes.push(format!("{leaves_checked} leaves ({path_fail} off), {streams} streams ({stream_fail} off)"));
    Ok(Verdict::new(ok, notes.join(", ")))
}

fn indistinguishability() -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut identical = 0;
    let mut disagreeing = 0;
    let triples = 1000;
    let instances: Vec<_> = (0..10u64)
        .map(|s| BipartiteInstance::random(bipartite_shape(2 + s as usize % 5)?, 100 + s))
        .collect::<Result<_>>()?;
    for i in 0..triples {
        let inst = &instances[i % instances.len()];
        let n = inst.ground();
        let mut ids: Vec<Element> = (0..n).collect();
        ids.shuffle(&mut rng);
        ids.truncate(rng.gen_range(0..=n.min(60)));
        let other = inst.sample_agreeing_pi(&ids, &mut rng);
        disagreeing += usize::from(!inst.agreement_holds(&ids, &other));
        let twin = inst.with_pi(other)?;
        identical += usize::from(inst.eval_symmetric(&ids).to_bits() == twin.eval_symmetric(&ids).to_bits());
    }
    Ok(Verdict::new(
        identical == triples && disagreeing == 0,
        format!("{identical}/{triples} bit-identical"),
    ))
}

type Outcome = std::result::Result<Verdict, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn over<C>(cases: &std::result::Result<Vec<C>, String>, check: fn(&[C]) -> Result<Verdict>) -> Outcome {
    check(cases.as_ref().map_err(Clone::clone)?).map_err(|e| e.to_string())
}

fn plain(check: fn() -> Result<Verdict>) -> Outcome {
    check().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cards = cardinality_cases().map_err(|e| e.to_string());
    let mats = matroid_cases().map_err(|e| e.to_string());
    let criteria: Vec<Criterion> = vec![
        ("cardinality approximation", Box::new(|| over(&cards, cardinality_approximation))),
        ("cardinality query budget", Box::new(|| over(&cards, cardinality_budget))),
        ("guess ladder approximation", Box::new(|| over(&cards, ladder_approximation))),
        ("pruned greedy equals reference", Box::new(|| over(&mats, prune_greedy_matches_reference))),
        ("combinatorial matroid guarantee", Box::new(|| over(&mats, combinatorial_half))),
        ("amplification and rounding", Box::new(|| plain(amplification))),
        ("bipartite construction", Box::new(|| plain(bipartite_construction))),
        ("analytic gap constant", Box::new(|| plain(analytic_gap))),
        ("tree construction", Box::new(|| plain(tree_construction))),
        ("indistinguishability", Box::new(|| plain(indistinguishability))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        failed += usize::from(!verdict.passed);
        println!(
            "{} {:>2} {name}: {} [{:.2}s]",
            if verdict.passed { "PASS" } else { "FAIL" },
            i + 1,
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
