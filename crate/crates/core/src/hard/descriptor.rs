//! JSON descriptors that make generated hard instances replayable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hard::bipartite::{BipartiteInstance, BipartiteShape};
use crate::hard::symgap::SymGapParams;
use crate::hard::tree::{NodePath, ShuffledTreeInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteDescriptor {
    pub m: usize,
    pub k: usize,
    pub w: usize,
    pub part_alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub phi_alpha: f64,
    pub gamma: f64,
    pub seed: Option<u64>,
    pub coloring: Vec<u32>,
    pub pi: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleEntry {
    pub parent: NodePath,
    pub perm: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDescriptor {
    pub arities: Vec<usize>,
    pub k: usize,
    pub explore: usize,
    pub seed: Option<u64>,
    pub shuffle: Vec<ShuffleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum InstanceDescriptor {
    Bipartite(BipartiteDescriptor),
    Tree(TreeDescriptor),
}

impl BipartiteDescriptor {
    pub fn from_instance(inst: &BipartiteInstance<f64>, seed: Option<u64>) -> Self {
        let s = inst.shape();
        let p = s.params;
        BipartiteDescriptor {
            m: s.m,
            k: s.k,
            w: p.w,
            part_alpha: s.part_alpha,
            beta: s.beta,
            eps: p.eps,
            eps1: p.eps1,
            eps2: p.eps2,
            phi_alpha: p.phi_alpha,
            gamma: p.gamma,
            seed,
            coloring: inst.coloring().to_vec(),
            pi: inst.pi().to_vec(),
        }
    }

    pub fn instance(&self) -> Result<BipartiteInstance<f64>> {
        let params = SymGapParams::with_overrides(self.w, self.eps, self.eps1, self.eps2, self.phi_alpha, self.gamma)?;
        let shape = BipartiteShape { m: self.m, k: self.k, part_alpha: self.part_alpha, beta: self.beta, params };
        BipartiteInstance::new(shape, self.coloring.clone(), self.pi.clone())
    }
}

impl TreeDescriptor {
    pub fn from_instance(inst: &ShuffledTreeInstance<f64>, explore: usize, seed: Option<u64>) -> Self {
        let mut shuffle: Vec<ShuffleEntry> = inst
            .shufflings()
            .iter()
            .map(|(parent, perm)| ShuffleEntry { parent: parent.clone(), perm: perm.clone() })
            .collect();
        shuffle.sort_by(|a, b| a.parent.cmp(&b.parent));
        TreeDescriptor { arities: inst.arities().to_vec(), k: inst.k(), explore, seed, shuffle }
    }

    pub fn instance(&self) -> Result<ShuffledTreeInstance<f64>> {
        let mut inst = ShuffledTreeInstance::new(self.arities.clone(), self.k)?;
        for entry in &self.shuffle {
            inst.set_shuffle(&entry.parent, entry.perm.clone())?;
        }
        Ok(inst)
    }
}

impl InstanceDescriptor {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_round_trip() {
        let shape = BipartiteShape { m: 2, k: 25, part_alpha: 0.56, beta: 0.42, params: SymGapParams::test_friendly(2, 0.5).unwrap() };
        let inst = BipartiteInstance::random(shape, 3).unwrap();
        let desc = InstanceDescriptor::Bipartite(BipartiteDescriptor::from_instance(&inst, Some(3)));
        let text = desc.to_json().unwrap();
        assert!(text.contains("\"family\": \"bipartite\""));
        let back = InstanceDescriptor::from_json(&text).unwrap();
        assert_eq!(back, desc);
        let InstanceDescriptor::Bipartite(b) = back else { panic!("family changed") };
        let again = b.instance().unwrap();
        let s: Vec<usize> = (0..40).step_by(3).collect();
        assert_eq!(again.eval(&s).to_bits(), inst.eval(&s).to_bits());
    }

    #[test]
    fn tree_round_trip() {
        let mut inst = ShuffledTreeInstance::<f64>::new(vec![3, 2, 1], 3).unwrap();
        inst.randomize_shuffle(7).unwrap();
        let desc = InstanceDescriptor::Tree(TreeDescriptor::from_instance(&inst, 2, Some(7)));
        let back = InstanceDescriptor::from_json(&desc.to_json().unwrap()).unwrap();
        let InstanceDescriptor::Tree(t) = back else { panic!("family changed") };
        let again = t.instance().unwrap();
        let s = vec![0, 4, 7, 12];
        assert_eq!(again.eval(&s).to_bits(), inst.eval(&s).to_bits());
        assert!(InstanceDescriptor::from_json("{\"family\":\"ring\"}").is_err());
    }
}
