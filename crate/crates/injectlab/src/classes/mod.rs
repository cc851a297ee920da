//! Concept classes with exact version-space queries.
//!
//! A class answers two questions about a labeled set: is it realizable by
//! some hypothesis, and does a fresh point already have a forced label. Both
//! are exact; every learner and score builds on them.

pub mod finite;
pub mod halfspace;
pub mod rectangle;
pub mod tree;

pub use finite::FiniteClass;
pub use halfspace::Halfspace2DClass;
pub use rectangle::{RectPoint, RectangleClass};
pub use tree::{HardTreePathClass, NamedTree, NodeId, RelabeledVc1Class, SharedTree, Tree, TreeOrderClass};

use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample, Point};

pub trait ConceptClass<P: Point> {
    /// Is some hypothesis consistent with every example?
    fn realizable(&self, examples: &[LabeledExample<P>]) -> Result<bool>;

    /// The label of `x` common to every consistent hypothesis, if any.
    ///
    /// Precondition: `examples` is realizable.
    fn forced_label(&self, examples: &[LabeledExample<P>], x: &P) -> Result<Option<Label>> {
        if !self.realizable(examples)? {
            return Err(Error::Precondition("forced_label needs a realizable history".into()));
        }
        let mut with_plus = examples.to_vec();
        with_plus.push(LabeledExample::new(x.clone(), Label::Plus));
        let plus_ok = self.realizable(&with_plus)?;
        let mut with_minus = examples.to_vec();
        with_minus.push(LabeledExample::new(x.clone(), Label::Minus));
        let minus_ok = self.realizable(&with_minus)?;
        match (plus_ok, minus_ok) {
            (true, true) => Ok(None),
            (true, false) => Ok(Some(Label::Plus)),
            (false, true) => Ok(Some(Label::Minus)),
            (false, false) => Err(Error::Structure(
                "both labels unrealizable after a realizable history".into(),
            )),
        }
    }
}
