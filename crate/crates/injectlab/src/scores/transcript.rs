//! Transcript-counting score for planar halfspaces.
//!
//! The transcript of a hypothesis on a point tuple records, exactly, every
//! sign bit (is each point labeled positive) and every comparison bit (the
//! order type of each pair of dot products). Counting the distinct
//! transcripts realizable over a version space is equivalent to counting the
//! feasible (weak ordering of dot products, prefix split into positives)
//! pairs: each weak ordering is an ordered set partition of the points, and
//! for g groups there are g + 1 splits. Each candidate pair costs one exact
//! feasibility query; four distinct points give at most 308 candidates.


use itertools::Itertools;

use super::{check_subset_size, distinct_points, ScoreFunction, ScoreSpec};
use crate::classes::Halfspace2DClass;
use crate::error::{Error, Result};
use crate::geometry::{feasible, lex_order, LinearConstraint, Point2, Rel};
use crate::protocol::LabeledExample;
use crate::rational::Q;
use num_traits::Zero;

pub struct TranscriptScore {
    class: Halfspace2DClass,
}

/// All ordered set partitions of 0..n: every set partition in every group
/// order. Groups are ordered most-positive-dot first when used as a weak
/// ordering template.
fn ordered_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    // Restricted growth strings enumerate unordered partitions canonically.
    let mut unordered: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut assign = vec![0usize; n];
    loop {
        let groups = assign.iter().max().map_or(0, |m| m + 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for (i, &g) in assign.iter().enumerate() {
            blocks[g].push(i);
        }
        unordered.push(blocks);
        // Next restricted growth string.
        let mut i = n;
        loop {
            if i == 1 {
                i = 0;
                break;
            }
            i -= 1;
            let cap = 1 + assign[..i].iter().copied().max().unwrap_or(0);
            if assign[i] < cap {
                assign[i] += 1;
                for a in assign.iter_mut().skip(i + 1) {
                    *a = 0;
                }
                break;
            }
        }
        if i == 0 {
            break;
        }
    }
    let mut ordered = Vec::new();
    for blocks in &unordered {
        let g = blocks.len();
        for perm in (0..g).permutations(g) {
            ordered.push(perm.into_iter().map(|i| blocks[i].clone()).collect());
        }
    }
    ordered
}

impl TranscriptScore {
    pub fn new(class: Halfspace2DClass) -> Self {
        TranscriptScore { class }
    }

    pub fn class(&self) -> &Halfspace2DClass {
        &self.class
    }

    /// Number of distinct transcripts on `points` over hypotheses consistent
    /// with `rest`. Points must be pairwise distinct.
    pub fn count_transcripts(
        &self,
        points: &[Point2],
        rest: &[LabeledExample<Point2>],
    ) -> Result<u32> {
        let base = self.class.constraints(rest);
        if !feasible(&base) {
            return Err(Error::Precondition(
                "transcript score needs a realizable rest".into(),
            ));
        }
        let mut sorted: Vec<&Point2> = points.iter().collect();
        sorted.sort_by(|a, b| lex_order(a, b));
        let mut count = 0u32;
        for partition in ordered_partitions(sorted.len()) {
            let g = partition.len();
            let mut shape = base.clone();
            // Equal dots within a group, strictly descending between groups.
            for group in &partition {
                for pair in group.windows(2) {
                    let (a, b) = (sorted[pair[0]], sorted[pair[1]]);
                    shape.push(LinearConstraint::new(
                        [a.xq() - b.xq(), a.yq() - b.yq(), Q::zero()],
                        Rel::Eq,
                    ));
                }
            }
            for pair in partition.windows(2) {
                let (a, b) = (sorted[pair[0][0]], sorted[pair[1][0]]);
                shape.push(LinearConstraint::new(
                    [a.xq() - b.xq(), a.yq() - b.yq(), Q::zero()],
                    Rel::Gt,
                ));
            }
            for split in 0..=g {
                let mut rows = shape.clone();
                if split >= 1 {
                    let rep = sorted[partition[split - 1][0]];
                    rows.push(Halfspace2DClass::constraint_for(rep, crate::protocol::Label::Plus));
                }
                if split < g {
                    let rep = sorted[partition[split][0]];
                    rows.push(Halfspace2DClass::constraint_for(rep, crate::protocol::Label::Minus));
                }
                if feasible(&rows) {
                    count += 1;
                }
            }
        }
        Ok(count)
    }
}

impl ScoreFunction<Point2> for TranscriptScore {
    /// Planar halfspaces have inference dimension 5; the score counts
    /// transcripts on subsets one smaller, with range 2^4 * 5! trajectories.
    fn spec(&self) -> ScoreSpec {
        ScoreSpec { k: 4, m: 5, c: 1920 }
    }

    fn floor(&self) -> u32 {
        1
    }

    fn eval(&self, u: &[LabeledExample<Point2>], rest: &[LabeledExample<Point2>]) -> Result<u32> {
        check_subset_size(u, self.spec().k)?;
        if !distinct_points(u) {
            return Ok(self.spec().c);
        }
        let points: Vec<Point2> = u.iter().map(|e| e.point.clone()).collect();
        self.count_transcripts(&points, rest)
    }
}
