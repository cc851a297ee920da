//! Halfspace learner without a pinned pair.
//!
//! The certificate engine needs one positive and one negative anchor. Until
//! both labels have appeared this learner just commits to the only label it
//! has seen (defaulting to +1 on a blank history); the first opposite-label
//! pair becomes the pin of a fresh certificate-engine learner run on the
//! remaining rounds. Same-label examples from the bootstrap phase are
//! dropped: the potential argument only needs the pin, and the handful of
//! bootstrap rounds is absorbed by the error accounting.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::classes::Halfspace2DClass;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::protocol::{Label, Prediction};
use crate::rational::Q;

use super::{AlphaRule, CertArcEngine, Learner, PotentialLearner};

pub struct BootstrapHalfspaceLearner {
    rule: AlphaRule,
    horizon: usize,
    observed: usize,
    first_plus: Option<Point2>,
    first_minus: Option<Point2>,
    rng: Option<ChaCha12Rng>,
    inner: Option<PotentialLearner<Point2, CertArcEngine>>,
}

impl BootstrapHalfspaceLearner {
    pub fn new(rule: AlphaRule) -> Result<Self> {
        if let AlphaRule::Fixed(a) = &rule {
            if a < &Q::from_integer(0.into()) {
                return Err(Error::Config("alpha must be nonnegative".into()));
            }
        }
        Ok(BootstrapHalfspaceLearner {
            rule,
            horizon: 0,
            observed: 0,
            first_plus: None,
            first_minus: None,
            rng: None,
            inner: None,
        })
    }

    /// The pinned learner, once both labels have been observed.
    pub fn inner(&self) -> Option<&PotentialLearner<Point2, CertArcEngine>> {
        self.inner.as_ref()
    }

    pub fn pin(&self) -> Option<(&Point2, &Point2)> {
        self.inner.as_ref()?;
        Some((self.first_plus.as_ref()?, self.first_minus.as_ref()?))
    }

    /// Rounds consumed before the pinned learner took over (its begin
    /// horizon is the remainder, floored at 2 for threshold tuning).
    pub fn bootstrap_rounds(&self) -> usize {
        self.observed.min(self.horizon)
    }

    fn switch(&mut self) -> Result<()> {
        let sp = self.first_plus.clone().expect("switch needs both labels");
        let sm = self.first_minus.clone().expect("switch needs both labels");
        let class = Halfspace2DClass::pinned(sp, sm)?;
        let engine = CertArcEngine::new(class)?;
        let mut learner = PotentialLearner::new(engine, self.rule.clone())?;
        let rng = match self.rng.take() {
            Some(mut r) => ChaCha12Rng::seed_from_u64(r.next_u64()),
            None => ChaCha12Rng::seed_from_u64(0),
        };
        let remaining = self.horizon.saturating_sub(self.observed).max(2);
        learner.begin(remaining, rng)?;
        self.inner = Some(learner);
        Ok(())
    }
}

impl Learner<Point2> for BootstrapHalfspaceLearner {
    fn begin(&mut self, horizon: usize, rng: ChaCha12Rng) -> Result<()> {
        self.horizon = horizon;
        self.observed = 0;
        self.first_plus = None;
        self.first_minus = None;
        self.rng = Some(rng);
        self.inner = None;
        Ok(())
    }

    fn predict(&mut self, x: &Point2) -> Result<Prediction> {
        if let Some(inner) = &mut self.inner {
            return inner.predict(x);
        }
        if self.first_minus.is_some() {
            return Ok(Prediction::from_label(Label::Minus));
        }
        Ok(Prediction::from_label(Label::Plus))
    }

    fn observe(&mut self, x: &Point2, y: Label) -> Result<()> {
        if let Some(inner) = &mut self.inner {
            return inner.observe(x, y);
        }
        self.observed += 1;
        match y {
            Label::Plus => {
                if self.first_plus.is_none() {
                    self.first_plus = Some(x.clone());
                }
            }
            Label::Minus => {
                if self.first_minus.is_none() {
                    self.first_minus = Some(x.clone());
                }
            }
        }
        if self.first_plus.is_some() && self.first_minus.is_some() {
            self.switch()?;
        }
        Ok(())
    }
}
