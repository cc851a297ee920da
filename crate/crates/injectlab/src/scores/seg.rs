//! Leave-one-out score for initial segments of a tree order, and its
//! transport to relabeled VC-dimension-1 classes.
//!
//! f({(x, y)}; V(rest)) = 1 when every forced-positive node lies on the
//! root-to-x path, else 0. The forced positives of a realizable rest are
//! exactly the path to its deepest positive example (the root alone never
//! binds: it lies on every path), so the score collapses to one ancestor
//! test and never depends on y or on whether the class includes the empty
//! segment.

use super::{check_subset_size, ScoreFunction, ScoreSpec};
use crate::classes::{ConceptClass, NodeId, RelabeledVc1Class, TreeOrderClass};
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};

pub struct SegScore {
    class: TreeOrderClass,
}

impl SegScore {
    pub fn new(class: TreeOrderClass) -> Self {
        SegScore { class }
    }

    pub fn class(&self) -> &TreeOrderClass {
        &self.class
    }
}

impl ScoreFunction<NodeId> for SegScore {
    fn spec(&self) -> ScoreSpec {
        ScoreSpec { k: 1, m: 3, c: 1 }
    }

    fn eval(&self, u: &[LabeledExample<NodeId>], rest: &[LabeledExample<NodeId>]) -> Result<u32> {
        check_subset_size(u, 1)?;
        if !self.class.realizable(rest)? {
            return Err(Error::Precondition(
                "segment score needs a realizable rest".into(),
            ));
        }
        let tree = self.class.tree().borrow();
        let x = u[0].point;
        if !tree.contains(x) {
            return Err(Error::Domain(format!("unknown node {}", x.0)));
        }
        let mut deepest: Option<(NodeId, u32)> = None;
        for e in rest.iter().filter(|e| e.label == Label::Plus) {
            let d = tree.depth(e.point)?;
            if deepest.map_or(true, |(_, dd)| d > dd) {
                deepest = Some((e.point, d));
            }
        }
        match deepest {
            None => Ok(1),
            Some((dp, _)) => Ok(if tree.is_ancestor(dp, x)? { 1 } else { 0 }),
        }
    }
}

/// The same score pushed through a VC-dimension-1 relabeling: examples are
/// mapped to disagreement-with-reference labels and handed to the segment
/// score over the underlying order.
pub struct RelabeledSegScore {
    class: RelabeledVc1Class,
    inner: SegScore,
}

impl RelabeledSegScore {
    pub fn new(class: RelabeledVc1Class) -> Self {
        let inner = SegScore::new(class.order().clone());
        RelabeledSegScore { class, inner }
    }
}

impl ScoreFunction<NodeId> for RelabeledSegScore {
    fn spec(&self) -> ScoreSpec {
        self.inner.spec()
    }

    fn eval(&self, u: &[LabeledExample<NodeId>], rest: &[LabeledExample<NodeId>]) -> Result<u32> {
        check_subset_size(u, 1)?;
        let u2: Vec<_> = u.iter().map(|e| self.class.relabel(e)).collect();
        let rest2: Vec<_> = rest.iter().map(|e| self.class.relabel(e)).collect();
        self.inner.eval(&u2, &rest2)
    }
}
