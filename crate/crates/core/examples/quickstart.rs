//! Streams a random coverage instance through the guess ladder and the matroid runner.

use dynsub::dynamic_matroid::{BranchParams, CombinatorialHalf, HalfMode};
use dynsub::oracle::{brute_force_opt, Constraint};
use dynsub::{Coverage, CountedOracle, Ladder, MatroidHandle};

fn main() -> dynsub::Result<()> {
    let f = Coverage::random(20, 30, 0.2, 5, 42);
    let oracle = CountedOracle::new(&f);

    let mut ladder = Ladder::new(3, 0.25)?;
    for e in 0..20 {
        ladder.insert(&oracle, e)?;
    }
    let (set, value) = ladder.solution();
    println!("ladder: {set:?} value {value} after {} queries", oracle.queries());

    let matroid = MatroidHandle::partition((0..20).map(|e| e % 4).collect(), vec![1; 4])?;
    let ground: Vec<usize> = (0..20).collect();
    let (_, opt) = brute_force_opt(&CountedOracle::new(&f), Constraint::Matroid(&matroid), &ground, 1 << 20)?;
    let params = BranchParams::new(matroid.rank_bound(), 0.25, opt)?;
    let oracle = CountedOracle::new(&f);
    let mut half = CombinatorialHalf::new(&oracle, &matroid, params, HalfMode::Guided)?;
    for e in 0..20 {
        half.insert(e)?;
    }
    let (set, value) = half.solution();
    println!("matroid: {set:?} value {value} of optimum {opt}");
    Ok(())
}
