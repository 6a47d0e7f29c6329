//! Flat `key = value` run configuration.
//!
//! ```text
//! # threshold algorithm on a random coverage instance
//! algorithm = card
//! k = 3
//! epsilon = 0.25
//! opt = auto
//! objective = coverage-random
//! objective_n = 20
//! stream = shuffled:7
//! checkpoint = every-round
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::DEFAULT_ENUMERATION_BUDGET;

/// Default subset-count threshold below which `OPT_t` is brute-forced.
pub const DEFAULT_OPT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    /// Fixed-OPT threshold engine.
    Threshold,
    /// Threshold engine wrapped in the OPT-guess ladder.
    Ladder,
    /// Combinatorial `(1/2 − ε)` matroid algorithm.
    MatroidHalf,
    /// Multilinear amplifier with swap rounding.
    MatroidAmplified,
    /// Greedy recomputed from scratch on the live set; accepts deletions.
    OfflineGreedy,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Threshold => "card",
            AlgorithmKind::Ladder => "ladder",
            AlgorithmKind::MatroidHalf => "matroid-half",
            AlgorithmKind::MatroidAmplified => "matroid-amplified",
            AlgorithmKind::OfflineGreedy => "offline-greedy",
        }
    }

    pub fn accepts_deletions(self) -> bool {
        self == AlgorithmKind::OfflineGreedy
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "card" => AlgorithmKind::Threshold,
            "ladder" => AlgorithmKind::Ladder,
            "matroid-half" => AlgorithmKind::MatroidHalf,
            "matroid-amplified" => AlgorithmKind::MatroidAmplified,
            "offline-greedy" => AlgorithmKind::OfflineGreedy,
            _ => return Err(Error::param(format!("unknown algorithm '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptValue {
    Known(f64),
    /// Brute-forced over every element the stream inserts.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfModeSpec {
    Guided,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    CoverageFile(PathBuf),
    CoverageRandom { n: usize, items: usize, density: f64, max_weight: u32, seed: u64 },
    Modular(Vec<f64>),
    /// Bipartite or tree instance from a JSON descriptor.
    Hard(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatroidSpec {
    Uniform(usize),
    File(PathBuf),
    /// Element `e` in block `e mod blocks`, every block capped at `cap`.
    RoundRobin { blocks: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamSpec {
    Sequential,
    Shuffled(u64),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptMode {
    /// Brute force within `budget` candidate subsets, else the greedy bound.
    Auto { budget: u128 },
    BruteForce { budget: u128 },
    GreedyBound,
    Known(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checkpoint {
    EveryRound,
    Every(usize),
    AtEnd,
}

impl Checkpoint {
    pub fn includes(self, t: usize, last: usize) -> bool {
        match self {
            Checkpoint::EveryRound => true,
            Checkpoint::Every(n) => t.is_multiple_of(n) || t == last,
            Checkpoint::AtEnd => t == last,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub k: Option<usize>,
    pub epsilon: f64,
    pub opt: Option<OptValue>,
    pub mode: HalfModeSpec,
    pub branch_budget: u128,
    pub levels: Option<(usize, usize)>,
    pub stages: Option<usize>,
    pub rounding_seed: u64,
    pub objective: ObjectiveSpec,
    pub matroid: Option<MatroidSpec>,
    pub stream: StreamSpec,
    pub opt_mode: OptMode,
    pub checkpoint: Checkpoint,
}

const KEYS: &[&str] = &[
    "algorithm",
    "k",
    "epsilon",
    "opt",
    "mode",
    "branch_budget",
    "levels",
    "stages",
    "rounding_seed",
    "objective",
    "objective_n",
    "objective_items",
    "objective_density",
    "objective_max_weight",
    "objective_seed",
    "matroid",
    "stream",
    "opt_mode",
    "opt_budget",
    "checkpoint",
];

/// Raw key/value pairs in file order of precedence: later `set` calls win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::parse(i + 1, format!("expected 'key = value', got '{line}'")))?;
            map.set(key.trim(), value.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::param(format!("unknown config key '{key}'")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        self.get(key)
            .map(|v| v.parse::<V>().map_err(|_| Error::param(format!("cannot parse {key} = '{v}'"))))
            .transpose()
    }

    fn parsed_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let algorithm: AlgorithmKind =
            self.get("algorithm").ok_or_else(|| Error::param("missing key 'algorithm'"))?.parse()?;
        let epsilon = self.parsed_or("epsilon", 0.25)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("epsilon {epsilon} outside (0,1)")));
        }
        let opt = match self.get("opt") {
            None => None,
            Some("auto") => Some(OptValue::Auto),
            Some(v) => Some(OptValue::Known(v.parse().map_err(|_| Error::param(format!("cannot parse opt = '{v}'")))?)),
        };
        let mode = match self.get("mode").unwrap_or("guided") {
            "guided" => HalfModeSpec::Guided,
            "exhaustive" => HalfModeSpec::Exhaustive,
            other => return Err(Error::param(format!("unknown mode '{other}'"))),
        };
        let levels = match self.get("levels") {
            None => None,
            Some(v) => {
                let (l, r) = v.split_once(',').ok_or_else(|| Error::param("levels must be 'L,R'"))?;
                let l = l.trim().parse().map_err(|_| Error::param("levels: bad L"))?;
                let r = r.trim().parse().map_err(|_| Error::param("levels: bad R"))?;
                Some((l, r))
            }
        };
        let objective = self.objective()?;
        let matroid = match self.get("matroid").unwrap_or("none") {
            "none" => None,
            v => Some(parse_matroid(v)?),
        };
        let stream = match self.get("stream").unwrap_or("sequential") {
            "sequential" => StreamSpec::Sequential,
            v => match v.split_once(':') {
                Some(("shuffled", seed)) => {
                    StreamSpec::Shuffled(seed.parse().map_err(|_| Error::param("stream: bad seed"))?)
                }
                Some(("file", path)) => StreamSpec::File(PathBuf::from(path)),
                _ => return Err(Error::param(format!("unknown stream '{v}'"))),
            },
        };
        let budget = self.parsed_or("opt_budget", DEFAULT_OPT_BUDGET)?;
        let opt_mode = match self.get("opt_mode").unwrap_or("auto") {
            "auto" => OptMode::Auto { budget },
            "brute-force" => OptMode::BruteForce { budget },
            "greedy-bound" => OptMode::GreedyBound,
            v => match v.strip_prefix("known:") {
                Some(x) => OptMode::Known(x.parse().map_err(|_| Error::param("opt_mode: bad value"))?),
                None => return Err(Error::param(format!("unknown opt_mode '{v}'"))),
            },
        };
        let checkpoint = match self.get("checkpoint").unwrap_or("every-round") {
            "every-round" => Checkpoint::EveryRound,
            "at-end" => Checkpoint::AtEnd,
            v => match v.strip_prefix("every:").map(str::parse::<usize>) {
                Some(Ok(n)) if n > 0 => Checkpoint::Every(n),
                _ => return Err(Error::param(format!("unknown checkpoint '{v}'"))),
            },
        };
        let cfg = RunConfig {
            algorithm,
            k: self.parsed("k")?,
            epsilon,
            opt,
            mode,
            branch_budget: self.parsed_or("branch_budget", crate::dynamic_matroid::DEFAULT_BRANCH_BUDGET)?,
            levels,
            stages: self.parsed("stages")?,
            rounding_seed: self.parsed_or("rounding_seed", 0)?,
            objective,
            matroid,
            stream,
            opt_mode,
            checkpoint,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn objective(&self) -> Result<ObjectiveSpec> {
        let v = self.get("objective").ok_or_else(|| Error::param("missing key 'objective'"))?;
        if v == "coverage-random" {
            let n = self.parsed_or("objective_n", 20)?;
            return Ok(ObjectiveSpec::CoverageRandom {
                n,
                items: self.parsed_or("objective_items", 2 * n)?,
                density: self.parsed_or("objective_density", 0.2)?,
                max_weight: self.parsed_or("objective_max_weight", 5)?,
                seed: self.parsed_or("objective_seed", 0)?,
            });
        }
        match v.split_once(':') {
            Some(("coverage-file", p)) => Ok(ObjectiveSpec::CoverageFile(PathBuf::from(p))),
            Some(("hard", p)) => Ok(ObjectiveSpec::Hard(PathBuf::from(p))),
            Some(("modular", ws)) => ws
                .split(',')
                .map(|w| w.trim().parse::<f64>().map_err(|_| Error::param(format!("bad modular weight '{w}'"))))
                .collect::<Result<Vec<_>>>()
                .map(ObjectiveSpec::Modular),
            _ => Err(Error::param(format!("unknown objective '{v}'"))),
        }
    }
}

fn parse_matroid(v: &str) -> Result<MatroidSpec> {
    match v.split_once(':') {
        Some(("uniform", k)) => Ok(MatroidSpec::Uniform(k.parse().map_err(|_| Error::param("matroid: bad rank"))?)),
        Some(("file", p)) => Ok(MatroidSpec::File(PathBuf::from(p))),
        Some(("round-robin", spec)) => {
            let (b, c) = spec.split_once(',').ok_or_else(|| Error::param("round-robin needs 'BLOCKS,CAP'"))?;
            Ok(MatroidSpec::RoundRobin {
                blocks: b.trim().parse().map_err(|_| Error::param("round-robin: bad block count"))?,
                cap: c.trim().parse().map_err(|_| Error::param("round-robin: bad cap"))?,
            })
        }
        _ => Err(Error::param(format!("unknown matroid '{v}'"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        ConfigMap::parse(text)?.resolve()
    }

    fn validate(&self) -> Result<()> {
        use AlgorithmKind::*;
        match self.algorithm {
            Threshold | Ladder if self.k.is_none() => {
                return Err(Error::param(format!("{} needs k", self.algorithm.name())))
            }
            MatroidHalf | MatroidAmplified if self.matroid.is_none() => {
                return Err(Error::param(format!("{} needs a matroid", self.algorithm.name())))
            }
            MatroidHalf | MatroidAmplified if self.opt.is_none() => {
                return Err(Error::param(format!("{} needs opt (a value or 'auto')", self.algorithm.name())))
            }
            OfflineGreedy if self.k.is_none() && self.matroid.is_none() => {
                return Err(Error::param("offline-greedy needs k or a matroid"))
            }
            _ => {}
        }
        if let Some(OptValue::Known(v)) = self.opt {
            if !(v > 0.0) {
                return Err(Error::param("opt must be positive"));
            }
        }
        if let Some(MatroidSpec::RoundRobin { blocks: 0, .. }) = self.matroid {
            return Err(Error::param("round-robin needs at least one block"));
        }
        Ok(())
    }

    /// Effective configuration, one `key = value` per line in key order.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut kv: Vec<(&str, String)> = vec![
            ("algorithm", self.algorithm.name().to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("mode", match self.mode { HalfModeSpec::Guided => "guided", HalfModeSpec::Exhaustive => "exhaustive" }.into()),
            ("branch_budget", self.branch_budget.to_string()),
            ("rounding_seed", self.rounding_seed.to_string()),
        ];
        if let Some(k) = self.k {
            kv.push(("k", k.to_string()));
        }
        match self.opt {
            Some(OptValue::Known(v)) => kv.push(("opt", v.to_string())),
            Some(OptValue::Auto) => kv.push(("opt", "auto".into())),
            None => {}
        }
        if let Some((l, r)) = self.levels {
            kv.push(("levels", format!("{l},{r}")));
        }
        if let Some(s) = self.stages {
            kv.push(("stages", s.to_string()));
        }
        match &self.objective {
            ObjectiveSpec::CoverageFile(p) => kv.push(("objective", format!("coverage-file:{}", p.display()))),
            ObjectiveSpec::Hard(p) => kv.push(("objective", format!("hard:{}", p.display()))),
            ObjectiveSpec::Modular(ws) => kv.push((
                "objective",
                format!("modular:{}", ws.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
            )),
            ObjectiveSpec::CoverageRandom { n, items, density, max_weight, seed } => {
                kv.push(("objective", "coverage-random".into()));
                kv.push(("objective_n", n.to_string()));
                kv.push(("objective_items", items.to_string()));
                kv.push(("objective_density", density.to_string()));
                kv.push(("objective_max_weight", max_weight.to_string()));
                kv.push(("objective_seed", seed.to_string()));
            }
        }
        kv.push((
            "matroid",
            match &self.matroid {
                None => "none".into(),
                Some(MatroidSpec::Uniform(k)) => format!("uniform:{k}"),
                Some(MatroidSpec::File(p)) => format!("file:{}", p.display()),
                Some(MatroidSpec::RoundRobin { blocks, cap }) => format!("round-robin:{blocks},{cap}"),
            },
        ));
        kv.push((
            "stream",
            match &self.stream {
                StreamSpec::Sequential => "sequential".into(),
                StreamSpec::Shuffled(s) => format!("shuffled:{s}"),
                StreamSpec::File(p) => format!("file:{}", p.display()),
            },
        ));
        let (mode, budget) = match self.opt_mode {
            OptMode::Auto { budget } => ("auto".to_string(), Some(budget)),
            OptMode::BruteForce { budget } => ("brute-force".to_string(), Some(budget)),
            OptMode::GreedyBound => ("greedy-bound".to_string(), None),
            OptMode::Known(v) => (format!("known:{v}"), None),
        };
        kv.push(("opt_mode", mode));
        if let Some(b) = budget {
            kv.push(("opt_budget", b.to_string()));
        }
        kv.push((
            "checkpoint",
            match self.checkpoint {
                Checkpoint::EveryRound => "every-round".into(),
                Checkpoint::AtEnd => "at-end".into(),
                Checkpoint::Every(n) => format!("every:{n}"),
            },
        ));
        kv.sort_by(|a, b| a.0.cmp(b.0));
        for (k, v) in kv {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Budget used when a run's own `opt = auto` is brute-forced.
pub const AUTO_OPT_BUDGET: u128 = DEFAULT_ENUMERATION_BUDGET;
