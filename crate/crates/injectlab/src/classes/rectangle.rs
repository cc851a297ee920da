//! Origin-anchored axis-aligned rectangles in d dimensions.
//!
//! A hypothesis is a threshold vector v >= 0 labeling x positive iff x <= v
//! coordinatewise. The coordinatewise maximum of the positive examples is the
//! minimal consistent threshold, so realizability reduces to checking that
//! every negative example exceeds it in some coordinate.

use num_traits::Signed;

use super::ConceptClass;
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};
use crate::rational::Q;

pub type RectPoint = Vec<Q>;

#[derive(Debug, Clone)]
pub struct RectangleClass {
    dim: usize,
}

impl RectangleClass {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("rectangle dimension must be positive".into()));
        }
        Ok(RectangleClass { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check_point(&self, x: &[Q]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "point has dimension {}, class expects {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|c| c.is_negative()) {
            return Err(Error::Domain("rectangle points have nonnegative coordinates".into()));
        }
        Ok(())
    }

    pub fn label_of(v: &[Q], x: &[Q]) -> Label {
        if x.iter().zip(v).all(|(xi, vi)| xi <= vi) {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    /// Coordinatewise maximum of the positive examples (zero vector if none):
    /// the minimal threshold consistent with the positives.
    pub fn min_threshold(&self, examples: &[LabeledExample<RectPoint>]) -> Result<Vec<Q>> {
        let mut v = vec![Q::from_integer(0.into()); self.dim];
        for ex in examples {
            self.check_point(&ex.point)?;
            if ex.label == Label::Plus {
                for (vi, xi) in v.iter_mut().zip(&ex.point) {
                    if xi > vi {
                        *vi = xi.clone();
                    }
                }
            }
        }
        Ok(v)
    }
}

impl ConceptClass<RectPoint> for RectangleClass {
    fn realizable(&self, examples: &[LabeledExample<RectPoint>]) -> Result<bool> {
        let v = self.min_threshold(examples)?;
        for ex in examples {
            if ex.label == Label::Minus && !ex.point.iter().zip(&v).any(|(xi, vi)| xi > vi) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
