//! Insert/delete event streams over element ids and their text format.
//!
//! ```text
//! stream v1
//! I 0
//! I 3
//! D 0
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamOp {
    Insert(Element),
    Delete(Element),
}

impl StreamOp {
    pub fn element(self) -> Element {
        match self {
            StreamOp::Insert(e) | StreamOp::Delete(e) => e,
        }
    }

    pub fn is_insert(self) -> bool {
        matches!(self, StreamOp::Insert(_))
    }

    /// Single-letter tag used by the text format and reports.
    pub fn tag(self) -> &'static str {
        match self {
            StreamOp::Insert(_) => "I",
            StreamOp::Delete(_) => "D",
        }
    }
}

/// Validated stream: every delete matches a live insert and ids are never reused.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Stream {
    ops: Vec<StreamOp>,
    ground_hint: Option<usize>,
}

impl Stream {
    pub fn new(ops: Vec<StreamOp>, ground_hint: Option<usize>) -> Result<Self> {
        let mut live = HashSet::new();
        let mut seen = HashSet::new();
        for (t, op) in ops.iter().enumerate() {
            match *op {
                StreamOp::Insert(e) => {
                    if !seen.insert(e) {
                        return Err(Error::param(format!("op {t}: element {e} inserted twice")));
                    }
                    live.insert(e);
                }
                StreamOp::Delete(e) => {
                    if !live.remove(&e) {
                        return Err(Error::param(format!("op {t}: delete of element {e} that is not live")));
                    }
                }
            }
            if let Some(n) = ground_hint {
                if op.element() >= n {
                    return Err(Error::UnknownElement { element: op.element(), ground: n });
                }
            }
        }
        Ok(Self { ops, ground_hint })
    }

    pub fn insertions(elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        Self::new(elements.into_iter().map(StreamOp::Insert).collect(), None)
    }

    pub fn ops(&self) -> &[StreamOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ground_hint(&self) -> Option<usize> {
        self.ground_hint
    }

    pub fn with_ground_hint(mut self, n: usize) -> Result<Self> {
        if let Some(&op) = self.ops.iter().find(|op| op.element() >= n) {
            return Err(Error::UnknownElement { element: op.element(), ground: n });
        }
        self.ground_hint = Some(n);
        Ok(self)
    }

    /// One past the largest id referenced, or the declared hint if larger.
    pub fn ground_size(&self) -> usize {
        let used = self.ops.iter().map(|op| op.element() + 1).max().unwrap_or(0);
        used.max(self.ground_hint.unwrap_or(0))
    }

    pub fn is_insertion_only(&self) -> bool {
        self.ops.iter().all(|op| op.is_insert())
    }

    /// Inserted elements in order; fails if the stream contains a delete.
    pub fn insertion_order(&self) -> Result<Vec<Element>> {
        self.ops
            .iter()
            .enumerate()
            .map(|(t, op)| match *op {
                StreamOp::Insert(e) => Ok(e),
                StreamOp::Delete(e) => {
                    Err(Error::UnsupportedOp(format!("op {t}: delete of {e} in an insertion-only run")))
                }
            })
            .collect()
    }

    /// Live set after each op, in insertion order of the survivors.
    pub fn live_sets(&self) -> Vec<Vec<Element>> {
        let mut live: Vec<Element> = Vec::new();
        self.ops
            .iter()
            .map(|op| {
                match *op {
                    StreamOp::Insert(e) => live.push(e),
                    StreamOp::Delete(e) => live.retain(|&x| x != e),
                }
                live.clone()
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("stream v1\n");
        for op in &self.ops {
            let _ = writeln!(out, "{} {}", op.tag(), op.element());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        });
        match lines.next() {
            Some((_, l)) if l.trim() == "stream v1" => {}
            Some((i, _)) => return Err(Error::parse(i + 1, "expected header `stream v1`")),
            None => return Err(Error::parse(1, "empty stream file")),
        }
        let mut ops = Vec::new();
        for (i, line) in lines {
            let mut it = line.split_whitespace();
            let kind = it.next().unwrap_or_default();
            let id: Element = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(i + 1, "expected an element id"))?;
            if it.next().is_some() {
                return Err(Error::parse(i + 1, "trailing tokens"));
            }
            ops.push(match kind {
                "I" => StreamOp::Insert(id),
                "D" => StreamOp::Delete(id),
                other => return Err(Error::parse(i + 1, format!("unknown op `{other}`"))),
            });
        }
        Self::new(ops, None)
    }
}
