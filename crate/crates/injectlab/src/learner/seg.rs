//! Closed-form potential engine for root segments of a tree order.
//!
//! With no positives yet the potential is just the history size; once a
//! positive exists it is one plus the number of negatives below the deepest
//! positive. Deltas follow from comparing the candidate point against the
//! deepest positive, and forced labels delegate to the class (which owns the
//! empty-segment subtlety).

use std::collections::HashMap;

use crate::classes::{ConceptClass, NodeId, TreeOrderClass};
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};
use crate::scores::ScoreSpec;

use super::PotentialEngine;

pub struct SegEngine {
    class: TreeOrderClass,
    seen: HashMap<NodeId, Label>,
    history: Vec<LabeledExample<NodeId>>,
    negatives: Vec<NodeId>,
    deepest_pos: Option<NodeId>,
    rho: i128,
}

impl SegEngine {
    pub fn new(class: TreeOrderClass) -> Self {
        SegEngine {
            class,
            seen: HashMap::new(),
            history: Vec::new(),
            negatives: Vec::new(),
            deepest_pos: None,
            rho: 0,
        }
    }

    fn below(&self, top: NodeId) -> Result<i128> {
        let tree = self.class.tree().borrow();
        let mut n = 0;
        for &z in &self.negatives {
            if tree.is_ancestor(top, z)? {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Potential after adding (x, +1), already known to keep the history
    /// realizable.
    fn rho_with_positive(&self, x: NodeId) -> Result<i128> {
        let top = match self.deepest_pos {
            None => x,
            Some(dp) => {
                let tree = self.class.tree().borrow();
                if tree.is_ancestor(dp, x)? {
                    x
                } else {
                    dp
                }
            }
        };
        Ok(1 + self.below(top)?)
    }
}

impl PotentialEngine<NodeId> for SegEngine {
    fn spec(&self) -> ScoreSpec {
        ScoreSpec { k: 1, m: 3, c: 1 }
    }

    fn forced(&mut self, x: &NodeId) -> Result<Option<Label>> {
        if let Some(&y) = self.seen.get(x) {
            return Ok(Some(y));
        }
        self.class.forced_label(&self.history, x)
    }

    fn deltas(&mut self, x: &NodeId) -> Result<(i128, i128)> {
        if self.forced(x)?.is_some() {
            return Err(Error::Precondition("deltas needs an unforced point".into()));
        }
        let d_minus = match self.deepest_pos {
            None => -1,
            Some(dp) => {
                if self.class.tree().borrow().is_ancestor(dp, *x)? {
                    -1
                } else {
                    0
                }
            }
        };
        let d_plus = self.rho - self.rho_with_positive(*x)?;
        Ok((d_plus, d_minus))
    }

    fn apply(&mut self, x: &NodeId, y: Label) -> Result<()> {
        if let Some(&prev) = self.seen.get(x) {
            if prev == y {
                return Ok(());
            }
            return Err(Error::CleanLabelViolation);
        }
        match self.class.forced_label(&self.history, x)? {
            Some(f) if f != y => return Err(Error::CleanLabelViolation),
            _ => {}
        }
        match y {
            Label::Minus => {
                let counted = match self.deepest_pos {
                    None => true,
                    Some(dp) => self.class.tree().borrow().is_ancestor(dp, *x)?,
                };
                if counted {
                    self.rho += 1;
                }
                self.negatives.push(*x);
            }
            Label::Plus => {
                self.rho = self.rho_with_positive(*x)?;
                let deeper = match self.deepest_pos {
                    None => true,
                    Some(dp) => self.class.tree().borrow().is_ancestor(dp, *x)?,
                };
                if deeper {
                    self.deepest_pos = Some(*x);
                }
            }
        }
        self.seen.insert(*x, y);
        self.history.push(LabeledExample::new(*x, y));
        Ok(())
    }

    fn potential(&self) -> i128 {
        self.rho
    }

    fn len(&self) -> usize {
        self.history.len()
    }

    fn reset(&mut self) {
        self.seen.clear();
        self.history.clear();
        self.negatives.clear();
        self.deepest_pos = None;
        self.rho = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::tree::uniform_tree;
    use crate::classes::Tree;
    use crate::learner::GenericEngine;
    use crate::scores::SegScore;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn hand_worked_potentials() {
        let tree = Tree::shared();
        let (a, b, c) = {
            let mut t = tree.borrow_mut();
            let a = t.add_child(crate::classes::tree::ROOT).unwrap();
            let b = t.add_child(crate::classes::tree::ROOT).unwrap();
            let c = t.add_child(a).unwrap();
            (a, b, c)
        };
        let mut engine = SegEngine::new(TreeOrderClass::new(tree, true));
        engine.apply(&a, Label::Plus).unwrap();
        assert_eq!(engine.potential(), 1);
        // b is not below a, so it adds nothing.
        engine.apply(&b, Label::Minus).unwrap();
        assert_eq!(engine.potential(), 1);
        // c is below a.
        assert_eq!(engine.deltas(&c).unwrap(), (0, -1));
        engine.apply(&c, Label::Minus).unwrap();
        assert_eq!(engine.potential(), 2);
    }

    #[test]
    fn no_positive_potential_is_history_size() {
        let tree = uniform_tree(2, 3);
        let nodes: Vec<NodeId> = {
            let t = tree.borrow();
            (1..t.len() as u32).map(NodeId).collect()
        };
        let mut engine = SegEngine::new(TreeOrderClass::new(tree, true));
        for (i, &v) in nodes.iter().take(5).enumerate() {
            engine.apply(&v, Label::Minus).unwrap();
            assert_eq!(engine.potential(), i as i128 + 1);
        }
    }

    #[test]
    fn agrees_with_generic_engine() {
        let mut rng = ChaCha12Rng::seed_from_u64(4242);
        for includes_empty in [true, false] {
            let tree = uniform_tree(2, 3);
            let class = TreeOrderClass::new(tree.clone(), includes_empty);
            let n = tree.borrow().len() as u32;
            for _ in 0..30 {
                let segment_end = if includes_empty && rng.gen_bool(0.25) {
                    None
                } else {
                    Some(NodeId(rng.gen_range(0..n)))
                };
                let mut order: Vec<NodeId> = (0..n).map(NodeId).collect();
                order.shuffle(&mut rng);
                let mut fast = SegEngine::new(class.clone());
                let mut slow = GenericEngine::new(class.clone(), SegScore::new(class.clone()));
                for &x in order.iter().take(8) {
                    let forced = fast.forced(&x).unwrap();
                    assert_eq!(forced, slow.forced(&x).unwrap());
                    if forced.is_none() {
                        assert_eq!(fast.deltas(&x).unwrap(), slow.deltas(&x).unwrap());
                    }
                    let y =
                        TreeOrderClass::label_of(&tree.borrow(), segment_end, x).unwrap();
                    fast.apply(&x, y).unwrap();
                    slow.apply(&x, y).unwrap();
                    assert_eq!(fast.potential(), slow.potential());
                }
            }
        }
    }

    #[test]
    fn label_contradicting_version_space_is_rejected() {
        let tree = uniform_tree(2, 2);
        // First child of the root.
        let child = NodeId(1);
        let grandchild = {
            let t = tree.borrow();
            let mut found = None;
            for v in 0..t.len() as u32 {
                if t.parent(NodeId(v)).unwrap() == Some(child) {
                    found = Some(NodeId(v));
                    break;
                }
            }
            found.unwrap()
        };
        let mut engine = SegEngine::new(TreeOrderClass::new(tree, false));
        engine.apply(&grandchild, Label::Plus).unwrap();
        // Everything above a positive is forced positive.
        assert!(matches!(engine.apply(&child, Label::Minus), Err(Error::CleanLabelViolation)));
        assert!(matches!(engine.deltas(&child), Err(Error::Precondition(_))));
    }

    #[test]
    fn root_is_forced_without_empty_segment() {
        let tree = uniform_tree(1, 2);
        let mut with_empty = SegEngine::new(TreeOrderClass::new(tree.clone(), true));
        let mut without = SegEngine::new(TreeOrderClass::new(tree, false));
        let root = crate::classes::tree::ROOT;
        assert_eq!(with_empty.forced(&root).unwrap(), None);
        assert_eq!(without.forced(&root).unwrap(), Some(Label::Plus));
    }
}
