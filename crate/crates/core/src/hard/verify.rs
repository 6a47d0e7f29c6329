//! Invariant suite run against a single hard instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hard::bipartite::{BipartiteInstance, SymmetricView, BRUTE_FORCE_MAX_BLOCKS};
use crate::hard::descriptor::InstanceDescriptor;
use crate::hard::traverse::{traverse_stream, DEFAULT_STREAM_CAP};
use crate::hard::tree::{NodePath, ShuffledTreeInstance, WeightSequence, FULL_WALK_NODE_LIMIT};
use crate::oracle::{check_submodular_monotone, CountedOracle, Element};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { name, passed, detail: detail.into() }
    }
}

/// Sample sizes for [`verify_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub random_sets: usize,
    pub property_trials: usize,
    pub monte_carlo_samples: usize,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, random_sets: 200, property_trials: 10_000, monte_carlo_samples: 100_000, tol: 1e-7 }
    }
}

pub fn verify_instance(desc: &InstanceDescriptor, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    match desc {
        InstanceDescriptor::Bipartite(b) => verify_bipartite(&b.instance()?, opts),
        InstanceDescriptor::Tree(t) => verify_tree(&t.instance()?, t.explore, opts),
    }
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Vec<Element> {
    let mut ids: Vec<Element> = (0..n).collect();
    ids.shuffle(rng);
    ids.truncate(rng.gen_range(0..=max.min(n)));
    ids
}

pub fn verify_bipartite(inst: &BipartiteInstance<f64>, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let shape = *inst.shape();
    let n = inst.ground();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let span = (2 * shape.k).min(n);

    if shape.m <= BRUTE_FORCE_MAX_BLOCKS {
        let mut worst = 0f64;
        for _ in 0..opts.random_sets {
            let s = random_subset(&mut rng, n, span);
            worst = worst.max((inst.eval(&s) - inst.eval_bruteforce(&s)?).abs());
        }
        out.push(CheckOutcome::new("factorization", worst <= 1e-9, format!("max diff {worst:.3e}")));
    }

    let eps = shape.params.eps;
    let mut matched_min = f64::INFINITY;
    for i in 0..shape.m {
        for c in 0..shape.params.w as u32 {
            let mut s = inst.a_color_class(inst.pi()[i], c);
            s.extend(inst.b_color_class(i, c));
            matched_min = matched_min.min(inst.eval(&s));
        }
    }
    out.push(CheckOutcome::new(
        "matched-pair-value",
        inst.eval(&[]) == 0.0 && matched_min >= 1.0 - eps,
        format!("min value {matched_min:.6} vs 1-eps = {:.6}", 1.0 - eps),
    ));

    let big = ((shape.k as f64 / eps).ceil() as usize).min(n);
    let mut saturated = true;
    for _ in 0..opts.random_sets.min(50) {
        let mut ids: Vec<Element> = (0..n).collect();
        ids.shuffle(&mut rng);
        ids.truncate(big);
        saturated &= (ids.len() as f64) < shape.k as f64 / eps || inst.eval(&ids) == 1.0;
    }
    out.push(CheckOutcome::new("large-sets-saturate", saturated, format!("|S| = {big}")));

    let oracle = CountedOracle::new(inst);
    let report = check_submodular_monotone(&oracle, opts.property_trials, opts.seed, opts.tol)?;
    out.push(CheckOutcome::new(
        "submodular-monotone",
        report.is_clean(),
        format!("{} violations in {} trials", report.violations.len(), report.trials),
    ));
    let sym = CountedOracle::new(SymmetricView(inst));
    let report = check_submodular_monotone(&sym, opts.property_trials / 4, opts.seed + 1, opts.tol)?;
    out.push(CheckOutcome::new(
        "symmetric-submodular-monotone",
        report.is_clean(),
        format!("{} violations", report.violations.len()),
    ));

    let mut identical = 0;
    for _ in 0..opts.random_sets {
        let s = random_subset(&mut rng, n, span);
        let other = inst.sample_agreeing_pi(&s, &mut rng);
        let twin = inst.with_pi(other)?;
        identical += usize::from(inst.eval_symmetric(&s).to_bits() == twin.eval_symmetric(&s).to_bits());
    }
    out.push(CheckOutcome::new(
        "indistinguishability",
        identical == opts.random_sets,
        format!("{identical}/{} bit-identical", opts.random_sets),
    ));

    let stream = inst.stream()?;
    let expect = n + shape.m * inst.b_per_color() * shape.params.w;
    out.push(CheckOutcome::new(
        "stream-length",
        stream.len() == expect,
        format!("{} ops, expected {expect}", stream.len()),
    ));
    Ok(out)
}

pub fn verify_tree(inst: &ShuffledTreeInstance<f64>, explore: usize, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let l = inst.levels();
    let seq = WeightSequence::<f64>::new(l)?;
    let mut worst = 0f64;
    for j in 1..=l {
        let prod: f64 = (1..j).map(|i| 1.0 - seq.mass[i] / seq.tail[i]).product();
        worst = worst.max((seq.mass[j] * prod - 1.0).abs());
    }
    let sum_ok = (seq.weight.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
    out.push(CheckOutcome::new("weight-sequence", worst <= 1e-9 && sum_ok, format!("max identity error {worst:.3e}")));

    let walkable = inst.node_count() as u128 <= FULL_WALK_NODE_LIMIT;
    if walkable {
        let leaves = inst.leaves()?;
        let mut all_one = true;
        for leaf in &leaves {
            let s = inst.path_set(leaf)?;
            all_one &= s.len() == inst.k() && inst.eval(&s) == 1.0;
        }
        out.push(CheckOutcome::new("hidden-path-value", all_one, format!("{} leaves", leaves.len())));

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst = 0f64;
        for trial in 0..4u64 {
            let x = random_sparse_point(inst, &mut rng, 6);
            let mc = inst.g_monte_carlo(&x, opts.monte_carlo_samples / 4, opts.seed ^ trial)?;
            worst = worst.max((inst.g_exact(&x) - mc).abs());
        }
        out.push(CheckOutcome::new("exact-vs-sampled", worst <= 0.02, format!("max gap {worst:.4}")));
    }

    let oracle = CountedOracle::new(inst);
    let report = check_submodular_monotone(&oracle, opts.property_trials, opts.seed, opts.tol)?;
    out.push(CheckOutcome::new(
        "submodular-monotone",
        report.is_clean(),
        format!("{} violations in {} trials", report.violations.len(), report.trials),
    ));

    match traverse_stream(inst, explore, DEFAULT_STREAM_CAP) {
        Ok(ts) => {
            let mut live = std::collections::BTreeSet::new();
            let mut applied = 0;
            let mut matches = true;
            for (leaf, at) in &ts.leaf_visits {
                for op in &ts.stream.ops()[applied..*at] {
                    if op.is_insert() {
                        live.insert(op.element());
                    } else {
                        live.remove(&op.element());
                    }
                }
                applied = *at;
                matches &= live.iter().copied().eq(inst.w_set(leaf)?);
            }
            out.push(CheckOutcome::new(
                "traverse-snapshots",
                matches,
                format!("{} ops, {} leaf visits", ts.stream.len(), ts.leaf_visits.len()),
            ));
        }
        Err(e) => out.push(CheckOutcome::new("traverse-snapshots", false, e.to_string())),
    }
    Ok(out)
}

/// Random sparse point on the unshuffled tree with up to `nodes` support nodes.
pub fn random_sparse_point(
    inst: &ShuffledTreeInstance<f64>,
    rng: &mut impl Rng,
    nodes: usize,
) -> std::collections::BTreeMap<NodePath, f64> {
    let mut x = std::collections::BTreeMap::new();
    for _ in 0..rng.gen_range(1..=nodes.max(1)) {
        let depth = rng.gen_range(1..=inst.levels());
        let node: NodePath = inst.arities()[..depth].iter().map(|&m| rng.gen_range(0..m as u32)).collect();
        x.insert(node, rng.gen::<f64>());
    }
    x
}
