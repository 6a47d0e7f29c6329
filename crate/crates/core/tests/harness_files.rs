//! File-driven replays and interface round trips.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dynsub::hard::{
    BipartiteDescriptor, BipartiteInstance, BipartiteShape, InstanceDescriptor, ShuffledTreeInstance, SymGapParams,
    TreeDescriptor,
};
use dynsub::harness::{parse_csv, run_stream, sidecar_text, to_csv, RunConfig, CSV_HEADER};
use dynsub::objectives::CoverageFunction;
use dynsub::{Element, Error, MatroidHandle, SetFunction, Stream, StreamOp};

fn write_fixtures(dir: &Path) -> (String, String, String) {
    let f = CoverageFunction::<f64>::random(10, 16, 0.25, 4, 5);
    let cov = dir.join("objective.cov");
    std::fs::write(&cov, f.to_text()).unwrap();
    let m = MatroidHandle::partition((0..10).map(|e| e % 3).collect(), vec![1, 1, 2]).unwrap();
    let mat = dir.join("matroid.txt");
    std::fs::write(&mat, m.to_text()).unwrap();
    let mut order: Vec<Element> = (0..10).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
    let st = dir.join("stream.txt");
    std::fs::write(&st, Stream::insertions(order).unwrap().to_text()).unwrap();
    let s = |p: &Path| p.display().to_string();
    (s(&cov), s(&mat), s(&st))
}

fn check_accounting(cfg: &RunConfig) -> dynsub::harness::RunOutput {
    let out = run_stream(cfg).unwrap();
    let mut total = 0;
    for (i, r) in out.records.iter().enumerate() {
        total += r.q_round;
        assert_eq!(r.t, i + 1);
        assert_eq!(r.q_total, total);
        assert_eq!(r.ground, r.t);
        assert!(r.ratio <= 1.0 + 1e-9, "round {} ratio {}", r.t, r.ratio);
        assert!(r.value <= r.opt + 1e-9);
    }
    assert_eq!(parse_csv(&to_csv(&out.records)).unwrap(), out.records);
    out
}

#[test]
fn every_algorithm_replays_file_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (cov, mat, st) = write_fixtures(dir.path());
    let base = format!("objective = coverage-file:{cov}\nstream = file:{st}\nepsilon = 0.25\n");
    let runs = [
        "algorithm = card\nk = 3\nopt = auto\n".to_string(),
        "algorithm = ladder\nk = 3\n".to_string(),
        "algorithm = offline-greedy\nk = 3\n".to_string(),
        format!("algorithm = matroid-half\nmatroid = file:{mat}\nopt = auto\nepsilon = 0.33\n"),
        format!("algorithm = matroid-amplified\nmatroid = file:{mat}\nopt = auto\nstages = 2\nlevels = 2,3\n"),
    ];
    for extra in runs {
        let cfg = RunConfig::parse(&format!("{base}{extra}")).unwrap();
        let out = check_accounting(&cfg);
        assert_eq!(out.records.len(), 10, "{extra}");
        assert!(out.bounded_rounds.is_empty());
        let sidecar = sidecar_text(&cfg, &out);
        assert!(sidecar.contains(&format!("algorithm = {}", cfg.algorithm.name())));
        assert_eq!(RunConfig::parse(&sidecar).unwrap(), cfg);
    }
}

#[test]
fn greedy_bound_rounds_are_flagged() {
    let cfg = RunConfig::parse(
        "algorithm = ladder\nk = 3\nobjective = coverage-random\nobjective_n = 12\nobjective_items = 20\nopt_mode = greedy-bound\n",
    )
    .unwrap();
    let out = run_stream(&cfg).unwrap();
    assert_eq!(out.bounded_rounds, (1..=12).collect::<Vec<_>>());
    assert!(sidecar_text(&cfg, &out).contains("# opt_upper_bound_rounds = 1,2,3"));
    assert!(to_csv(&out.records).starts_with(CSV_HEADER));
}

#[test]
fn at_end_checkpoint_reports_last_round_only() {
    let cfg = RunConfig::parse("algorithm = card\nk = 2\nopt = auto\nobjective = modular:3,1,2,5\ncheckpoint = at-end\n").unwrap();
    let out = run_stream(&cfg).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.records[0].t, 4);
    assert_eq!(out.records[0].opt, 8.0);
}

#[test]
fn hard_stream_requires_a_deleting_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let shape = BipartiteShape { m: 1, k: 25, part_alpha: 0.56, beta: 0.42, params: SymGapParams::test_friendly(2, 0.5).unwrap() };
    let inst = BipartiteInstance::random(shape, 4).unwrap();
    let desc = dir.path().join("inst.json");
    InstanceDescriptor::Bipartite(BipartiteDescriptor::from_instance(&inst, Some(4))).write(&desc).unwrap();
    let st = dir.path().join("hard.txt");
    std::fs::write(&st, inst.stream().unwrap().to_text()).unwrap();
    let base = format!("objective = hard:{}\nstream = file:{}\nk = 25\n", desc.display(), st.display());

    let err = run_stream(&RunConfig::parse(&format!("{base}algorithm = ladder\n")).unwrap()).unwrap_err();
    assert!(matches!(err, Error::UnsupportedOp { .. }), "{err}");

    let cfg = RunConfig::parse(&format!("{base}algorithm = offline-greedy\nopt_mode = greedy-bound\ncheckpoint = every:24\n")).unwrap();
    let out = run_stream(&cfg).unwrap();
    assert_eq!(out.records.last().unwrap().t, inst.stream().unwrap().len());
    assert!(out.records.iter().all(|r| (0.0..=1.0).contains(&r.value)));
}

#[test]
fn descriptors_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = BipartiteShape { m: 3, k: 25, part_alpha: 0.56, beta: 0.42, params: SymGapParams::test_friendly(2, 0.5).unwrap() };
    let inst = BipartiteInstance::random(shape, 8).unwrap();
    let desc = InstanceDescriptor::Bipartite(BipartiteDescriptor::from_instance(&inst, Some(8)));
    let back = match InstanceDescriptor::from_json(&desc.to_json().unwrap()).unwrap() {
        InstanceDescriptor::Bipartite(b) => b.instance().unwrap(),
        _ => panic!("family changed"),
    };
    for _ in 0..50 {
        let s: Vec<Element> = (0..inst.ground()).filter(|_| rng.gen_bool(0.2)).collect();
        assert_eq!(back.eval(&s).to_bits(), inst.eval(&s).to_bits());
    }

    let mut tree = ShuffledTreeInstance::<f64>::new(vec![3, 2, 1], 3).unwrap();
    tree.randomize_shuffle(5).unwrap();
    let desc = InstanceDescriptor::Tree(TreeDescriptor::from_instance(&tree, 2, Some(5)));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.json");
    desc.write(&path).unwrap();
    let back = match InstanceDescriptor::read(&path).unwrap() {
        InstanceDescriptor::Tree(t) => {
            assert_eq!(t.explore, 2);
            t.instance().unwrap()
        }
        _ => panic!("family changed"),
    };
    for _ in 0..50 {
        let s: Vec<Element> = (0..tree.ground()).filter(|_| rng.gen_bool(0.3)).collect();
        assert_eq!(back.value(&s).to_bits(), tree.value(&s).to_bits());
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(matches!(Stream::parse("stream v2\nI 0\n"), Err(Error::Parse { .. })));
    assert!(Stream::parse("stream v1\nD 0\n").is_err());
    assert!(Stream::parse("stream v1\nI 0\nI 0\n").is_err());
    assert!(RunConfig::parse("algorithm = card\nbogus = 1\n").is_err());
    assert!(RunConfig::parse("algorithm = nope\n").is_err());
    assert!(MatroidHandle::parse("partition\ne 0 block 1\nb 0 cap 1\n").is_err());
    let ok = Stream::parse("stream v1\n# comment\n\nI 3\nD 3\n").unwrap();
    assert_eq!(ok.ops(), &[StreamOp::Insert(3), StreamOp::Delete(3)]);
}
