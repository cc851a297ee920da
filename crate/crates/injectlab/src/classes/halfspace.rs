//! Halfspaces in the plane: h(x) = +1 iff w1 x + w2 y >= b.
//!
//! Realizability reduces to feasibility of a linear system over (w1, w2, b),
//! decided exactly by Fourier-Motzkin elimination over the rationals. An
//! optional pinned pair (s_plus, s_minus) adds the constraints
//! w . s_plus >= b > w . s_minus to every query, which behaves exactly like
//! two permanent labeled examples.

use num_traits::One;

use super::ConceptClass;
use crate::error::{Error, Result};
use crate::geometry::{feasible, LinearConstraint, Point2, Rel};
use crate::protocol::{Label, LabeledExample};
use crate::rational::Q;

#[derive(Clone, Debug, Default)]
pub struct Halfspace2DClass {
    pin: Option<(Point2, Point2)>,
}

impl Halfspace2DClass {
    pub fn new() -> Self {
        Halfspace2DClass { pin: None }
    }

    /// Pins (s_plus, s_minus): every hypothesis must satisfy
    /// w . s_plus >= b and w . s_minus < b.
    pub fn pinned(s_plus: Point2, s_minus: Point2) -> Result<Self> {
        if s_plus == s_minus {
            return Err(Error::DegeneratePair);
        }
        Ok(Halfspace2DClass { pin: Some((s_plus, s_minus)) })
    }

    pub fn pin(&self) -> Option<&(Point2, Point2)> {
        self.pin.as_ref()
    }

    /// The constraint on (w1, w2, b) asserting h(x) = label.
    /// Positive: w . x - b >= 0. Negative: -(w . x) + b > 0.
    pub fn constraint_for(x: &Point2, label: Label) -> LinearConstraint {
        match label {
            Label::Plus => {
                LinearConstraint::new([x.xq().clone(), x.yq().clone(), -Q::one()], Rel::Ge)
            }
            Label::Minus => {
                LinearConstraint::new([-x.xq(), -x.yq(), Q::one()], Rel::Gt)
            }
        }
    }

    /// All constraints for a query: the examples plus the pin, if any.
    pub fn constraints(&self, examples: &[LabeledExample<Point2>]) -> Vec<LinearConstraint> {
        let mut rows: Vec<LinearConstraint> =
            examples.iter().map(|e| Self::constraint_for(&e.point, e.label)).collect();
        if let Some((sp, sm)) = &self.pin {
            rows.push(Self::constraint_for(sp, Label::Plus));
            rows.push(Self::constraint_for(sm, Label::Minus));
        }
        rows
    }

    /// Evaluate a concrete hypothesis; the boundary labels positive.
    pub fn label_of(w1: &Q, w2: &Q, b: &Q, x: &Point2) -> Label {
        if w1 * x.xq() + w2 * x.yq() >= *b {
            Label::Plus
        } else {
            Label::Minus
        }
    }
}

impl ConceptClass<Point2> for Halfspace2DClass {
    fn realizable(&self, examples: &[LabeledExample<Point2>]) -> Result<bool> {
        Ok(feasible(&self.constraints(examples)))
    }
}
