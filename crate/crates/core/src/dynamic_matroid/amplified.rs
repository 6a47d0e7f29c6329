use crate::dynamic_matroid::{
    branch_count, enumerate_branches, reference_lpass, BranchParams, PruneGreedyState,
};
use crate::error::{Error, Result};
use crate::matroid::{ConvexCombo, MatroidHandle};
use crate::objectives::{multilinear_exact, plus_direction, FractionalPoint, ResidualMode, ResidualMultilinear};
use crate::oracle::{brute_force_opt, Constraint, CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Guess grid `{OPT·(1+ε)^{−j} : 0 ≤ j ≤ ⌈4·ln(1/ε)/ε⌉} ∪ {0}`, descending.
pub fn guess_grid<T: Scalar>(opt: T, epsilon: f64) -> Vec<T> {
    let top = (4.0 * (1.0 / epsilon).ln() / epsilon).ceil() as i32;
    let mut grid: Vec<T> = (0..=top).map(|j| opt * T::lit((1.0 + epsilon).powi(-j))).collect();
    grid.push(T::zero());
    grid
}

/// Settings shared by every stage of the amplifier.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierConfig<T> {
    pub stages: usize,
    pub epsilon: f64,
    pub opt: T,
    pub rank: usize,
    pub residual: ResidualMode,
    /// Explicit `(L, R)` for every stage's pruned greedy.
    pub level_override: Option<(usize, usize)>,
}

impl<T: Scalar> AmplifierConfig<T> {
    /// `m = ⌈1/ε⌉` stages with exact residuals.
    pub fn new(epsilon: f64, opt: T, rank: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("epsilon {epsilon} outside (0,1)")));
        }
        Ok(Self {
            stages: (1.0 / epsilon).ceil() as usize,
            epsilon,
            opt,
            rank,
            residual: ResidualMode::Exact,
            level_override: None,
        })
    }

    pub fn with_stages(mut self, stages: usize) -> Self {
        self.stages = stages;
        self
    }

    pub fn with_levels(mut self, levels: usize, budget_total: usize) -> Self {
        self.level_override = Some((levels, budget_total));
        self
    }

    pub fn with_residual(mut self, residual: ResidualMode) -> Self {
        self.residual = residual;
        self
    }

    pub fn grid(&self) -> Vec<T> {
        guess_grid(self.opt, self.epsilon)
    }

    /// Branch parameters of a stage run with OPT guess `guess`.
    pub fn stage_params(&self, guess: T) -> Result<BranchParams<T>> {
        match self.level_override {
            Some((l, r)) => BranchParams::with_overrides(self.epsilon, guess, l, r),
            None => BranchParams::new(self.rank.max(1), self.epsilon, guess),
        }
    }

    fn step(&self) -> T {
        T::one() / T::from_usize_lossy(self.stages)
    }

    fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::param("the amplifier needs at least one stage"));
        }
        Ok(())
    }
}

/// Guess and branch tuple for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan<T> {
    pub guess: T,
    pub branch: Vec<u32>,
}

/// Result of an amplifier run: the fractional point and its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifiedOutcome<T> {
    pub point: FractionalPoint<T>,
    pub parts: Vec<Vec<Element>>,
    pub plans: Vec<StagePlan<T>>,
    /// `F(x)` of the final point.
    pub value: T,
    /// Residual-oracle queries issued by the stage algorithms.
    pub queries: u64,
}

impl<T: Scalar> AmplifiedOutcome<T> {
    /// `{(1/m, S_τ)}` padded with mass on `∅` for stages that never finished.
    pub fn combo(&self, stages: usize) -> Result<ConvexCombo<T>> {
        let step = T::one() / T::from_usize_lossy(stages);
        let mut parts: Vec<(T, Vec<Element>)> = self.parts.iter().map(|s| (step, s.clone())).collect();
        if self.parts.len() < stages {
            let rest = T::one() - step * T::from_usize_lossy(self.parts.len());
            parts.push((rest, Vec::new()));
        }
        ConvexCombo::new(parts)
    }
}

type StageOracle<'a, F, T> = CountedOracle<ResidualMultilinear<&'a F, T>, T>;

/// Streaming amplifier for a fixed plan of `(d_τ, a_τ)` per stage.
///
/// A stage that terminates contributes `S_τ/m` to `x`; the next stage replays
/// the whole history before consuming live insertions.
pub struct AmplifiedBranch<'a, F, T> {
    base: &'a F,
    matroid: &'a MatroidHandle,
    config: AmplifierConfig<T>,
    plans: Vec<StagePlan<T>>,
    point: FractionalPoint<T>,
    parts: Vec<Vec<Element>>,
    history: Vec<Element>,
    active: Option<(StageOracle<'a, F, T>, PruneGreedyState<T>)>,
    finished_queries: u64,
}

impl<'a, F: SetFunction<T>, T: Scalar> AmplifiedBranch<'a, F, T> {
    pub fn new(
        base: &'a F,
        matroid: &'a MatroidHandle,
        config: AmplifierConfig<T>,
        plans: Vec<StagePlan<T>>,
    ) -> Result<Self> {
        config.validate()?;
        if plans.len() != config.stages {
            return Err(Error::param(format!("{} stage plans for {} stages", plans.len(), config.stages)));
        }
        let mut run = Self {
            base,
            matroid,
            config,
            plans,
            point: FractionalPoint::zero(),
            parts: Vec::new(),
            history: Vec::new(),
            active: None,
            finished_queries: 0,
        };
        run.advance()?;
        Ok(run)
    }

    pub fn insert(&mut self, e: Element) -> Result<()> {
        self.history.push(e);
        if let Some((oracle, state)) = &mut self.active {
            state.insert(oracle, self.matroid, e)?;
            if state.is_terminated() {
                self.advance()?;
            }
        }
        Ok(())
    }

    /// Closes terminated stages and opens the next ones until one is waiting for input.
    fn advance(&mut self) -> Result<()> {
        loop {
            if let Some((oracle, state)) = self.active.take() {
                self.finished_queries += oracle.queries();
                let s = state.solution().to_vec();
                self.point = plus_direction(&self.point, &s, self.config.step())?;
                self.parts.push(s);
            }
            let stage = self.parts.len();
            if stage == self.config.stages {
                return Ok(());
            }
            let plan = &self.plans[stage];
            if plan.guess <= T::zero() {
                self.parts.push(Vec::new());
                continue;
            }
            let g = ResidualMultilinear::new(self.base, self.point.clone(), self.config.step(), self.config.residual)?;
            let oracle = CountedOracle::new(g);
            let mut state = PruneGreedyState::new(self.config.stage_params(plan.guess)?, plan.branch.clone())?;
            for &x in &self.history {
                state.insert(&oracle, self.matroid, x)?;
                if state.is_terminated() {
                    break;
                }
            }
            let done = state.is_terminated();
            self.active = Some((oracle, state));
            if !done {
                return Ok(());
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        self.parts.len() == self.config.stages
    }

    pub fn point(&self) -> &FractionalPoint<T> {
        &self.point
    }

    pub fn parts(&self) -> &[Vec<Element>] {
        &self.parts
    }

    pub fn queries(&self) -> u64 {
        self.finished_queries + self.active.as_ref().map_or(0, |(o, _)| o.queries())
    }

    pub fn outcome(&self) -> Result<AmplifiedOutcome<T>> {
        Ok(AmplifiedOutcome {
            point: self.point.clone(),
            parts: self.parts.clone(),
            plans: self.plans.clone(),
            value: multilinear_exact(self.base, &self.point)?,
            queries: self.queries(),
        })
    }
}

/// Largest grid value not above `target`, or zero when `target` is below the grid.
fn bracket<T: Scalar>(grid: &[T], target: T) -> T {
    grid.iter().copied().find(|&d| d <= target).unwrap_or_else(T::zero)
}

/// Amplifier on a fixed prefix with each stage's guess bracketed against the
/// exact residual optimum and its branch certified by the L-pass greedy.
///
/// The residual optimum is found by a separate probe oracle, so `queries`
/// counts only what the stage algorithms spend.
pub fn amplified_guided<F: SetFunction<T>, T: Scalar>(
    base: &F,
    matroid: &MatroidHandle,
    prefix: &[Element],
    config: &AmplifierConfig<T>,
    enumeration_budget: u128,
) -> Result<AmplifiedOutcome<T>> {
    config.validate()?;
    let grid = config.grid();
    let step = config.step();
    let mut point = FractionalPoint::zero();
    let mut parts = Vec::new();
    let mut plans = Vec::new();
    let mut queries = 0;
    for _ in 0..config.stages {
        let residual = ResidualMultilinear::new(base, point.clone(), step, config.residual)?;
        let probe = CountedOracle::new(&residual);
        let (_, best) = brute_force_opt(&probe, Constraint::Matroid(matroid), prefix, enumeration_budget)?;
        let guess = bracket(&grid, best);
        if guess <= T::zero() {
            parts.push(Vec::new());
            plans.push(StagePlan { guess, branch: Vec::new() });
            continue;
        }
        let params = config.stage_params(guess)?;
        let oracle = CountedOracle::new(&residual);
        let cert = reference_lpass(prefix, &params, &oracle, matroid)?;
        let mut state = PruneGreedyState::new(params, cert.branch.clone())?;
        for &x in prefix {
            state.insert(&oracle, matroid, x)?;
        }
        if state.solution() != cert.union().as_slice() {
            return Err(Error::invariant("pruned greedy diverged from its L-pass certificate"));
        }
        queries += oracle.queries();
        let s = state.solution().to_vec();
        point = plus_direction(&point, &s, step)?;
        parts.push(s);
        plans.push(StagePlan { guess, branch: cert.branch });
    }
    let value = multilinear_exact(base, &point)?;
    Ok(AmplifiedOutcome { point, parts, plans, value, queries })
}

/// Best streaming amplifier over every plan in `(D × 𝒜)^m`; refuses above `budget` plans.
pub fn amplified_exhaustive<F: SetFunction<T>, T: Scalar>(
    base: &F,
    matroid: &MatroidHandle,
    stream: &[Element],
    config: &AmplifierConfig<T>,
    budget: u128,
) -> Result<AmplifiedOutcome<T>> {
    config.validate()?;
    let grid = config.grid();
    let shape = config.stage_params(config.opt)?;
    let branches = enumerate_branches(shape.levels, shape.budget_total, budget)?;
    let per_stage = grid.len() as u128 * branch_count(shape.levels, shape.budget_total);
    let needed = (0..config.stages).try_fold(1u128, |acc, _| acc.checked_mul(per_stage)).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget, hint: " (use guided mode)" });
    }
    let options: Vec<StagePlan<T>> = grid
        .iter()
        .flat_map(|&d| branches.iter().map(move |a| StagePlan { guess: d, branch: a.clone() }))
        .collect();
    let mut index = vec![0usize; config.stages];
    let mut best: Option<AmplifiedOutcome<T>> = None;
    loop {
        let plans: Vec<StagePlan<T>> = index.iter().map(|&i| options[i].clone()).collect();
        let mut run = AmplifiedBranch::new(base, matroid, config.clone(), plans)?;
        for &e in stream {
            run.insert(e)?;
        }
        let out = run.outcome()?;
        if best.as_ref().is_none_or(|b| out.value > b.value) {
            best = Some(out);
        }
        let mut pos = 0;
        loop {
            if pos == index.len() {
                return Ok(best.expect("at least one plan"));
            }
            index[pos] += 1;
            if index[pos] < options.len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}
