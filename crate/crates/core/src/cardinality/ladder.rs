use std::collections::{BTreeMap, HashSet};

use crate::cardinality::CardinalityState;
use crate::error::{Error, Result};
use crate::oracle::{CountedOracle, Element, SetFunction};
use crate::scalar::Scalar;

/// Parallel threshold states guessing OPT on the grid `(1+ε)^i`.
///
/// Only guesses in the window `[i_t, i_t + W]` with `i_t = ⌊log_{1+ε} v_max⌋`
/// are alive; a guess entering the window starts empty.
#[derive(Debug, Clone)]
pub struct GuessLadder<T> {
    k: usize,
    epsilon: f64,
    window: usize,
    v_max: T,
    threads: BTreeMap<i64, CardinalityState<T>>,
    seen: HashSet<Element>,
    singleton_queries: u64,
    retired_tests: u64,
}

impl<T: Scalar> GuessLadder<T> {
    pub fn new(k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 || !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("invalid ladder parameters k={k} epsilon={epsilon}")));
        }
        let window = ((k as f64 / epsilon).ln() / epsilon).ceil() as usize + 1;
        Ok(Self {
            k,
            epsilon,
            window,
            v_max: T::zero(),
            threads: BTreeMap::new(),
            seen: HashSet::new(),
            singleton_queries: 0,
            retired_tests: 0,
        })
    }

    /// Overrides the window length `W` (number of guesses above `i_t`).
    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn window_len(&self) -> usize {
        self.window
    }

    pub fn v_max(&self) -> T {
        self.v_max
    }

    /// Lowest live guess exponent `i_t`, once some element has positive value.
    pub fn base_index(&self) -> Option<i64> {
        (self.v_max > T::zero()).then(|| {
            let i = self.v_max.as_f64().ln() / self.epsilon.ln_1p();
            i.floor() as i64
        })
    }

    pub fn threads(&self) -> impl Iterator<Item = (i64, &CardinalityState<T>)> {
        self.threads.iter().map(|(&i, s)| (i, s))
    }

    /// Singleton evaluations plus every thread's marginal tests.
    pub fn raw_queries(&self) -> u64 {
        self.singleton_queries + self.retired_tests + self.threads.values().map(|s| s.marginal_tests()).sum::<u64>()
    }

    pub fn insert<F: SetFunction<T>>(&mut self, oracle: &CountedOracle<F, T>, e: Element) -> Result<()> {
        if !self.seen.insert(e) {
            return Err(Error::DuplicateInsert(e));
        }
        let single = oracle.eval(&[e])?;
        self.singleton_queries += 1;
        if single > self.v_max {
            self.v_max = single;
        }
        let Some(low) = self.base_index() else {
            return Ok(());
        };
        let high = low + self.window as i64;
        let live = self.threads.split_off(&low);
        self.retired_tests += self.threads.values().map(|s| s.marginal_tests()).sum::<u64>();
        self.threads = live;
        for i in low..=high {
            if !self.threads.contains_key(&i) {
                let guess = T::lit((1.0 + self.epsilon).powi(i as i32));
                self.threads.insert(i, CardinalityState::new(self.k, self.epsilon, guess)?);
            }
        }
        for state in self.threads.values_mut() {
            state.insert(oracle, e)?;
        }
        Ok(())
    }

    /// Best live thread's solution and cached value; ties go to the lowest guess.
    pub fn solution(&self) -> (Vec<Element>, T) {
        let mut best: (Vec<Element>, T) = (Vec::new(), T::zero());
        for state in self.threads.values() {
            if state.value() > best.1 {
                best = (state.solution().to_vec(), state.value());
            }
        }
        best
    }
}
