//! Leave-one-out score for axis-aligned rectangles anchored at the origin.
//!
//! f({(x, y)}; V(rest)) counts the coordinate directions i whose axis
//! projection delta_i(x) (zero everywhere except coordinate i) could still
//! be labeled negative after committing (x, y). Positives score 0. For a
//! negative x the count collapses to #{i : x_i > v*_i} where v* is the
//! coordinatewise maximum of the positive examples in rest (the all-zero
//! point when there are none): v* is the minimal consistent threshold, and
//! (delta_i(x), -1) stays realizable exactly when x_i can exceed the
//! threshold in coordinate i.

use super::{check_subset_size, ScoreFunction, ScoreSpec};
use crate::classes::{ConceptClass, RectangleClass};
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};
use crate::rational::Q;

pub struct RectScore {
    class: RectangleClass,
}

impl RectScore {
    pub fn new(class: RectangleClass) -> Self {
        RectScore { class }
    }

    pub fn class(&self) -> &RectangleClass {
        &self.class
    }
}

impl ScoreFunction<Vec<Q>> for RectScore {
    fn spec(&self) -> ScoreSpec {
        let d = self.class.dim();
        ScoreSpec { k: 1, m: 2 * d + 1, c: d as u32 }
    }

    fn eval(&self, u: &[LabeledExample<Vec<Q>>], rest: &[LabeledExample<Vec<Q>>]) -> Result<u32> {
        check_subset_size(u, 1)?;
        let mut all: Vec<LabeledExample<Vec<Q>>> = rest.to_vec();
        all.push(u[0].clone());
        if !self.class.realizable(&all)? {
            return Err(Error::Precondition(
                "rectangle score needs rest and the subset jointly realizable".into(),
            ));
        }
        if u[0].label == Label::Plus {
            return Ok(0);
        }
        let vstar = self.class.min_threshold(rest)?;
        Ok(u[0].point.iter().zip(&vstar).filter(|(xi, vi)| xi > vi).count() as u32)
    }
}
