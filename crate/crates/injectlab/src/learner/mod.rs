//! Learners: the potential-driven predict-or-abstain rule, its incremental
//! engines, and trivial baselines.
//!
//! The core rule, given a score with parameters (m, c, k) and a threshold
//! alpha: on a fresh point x, commit to a forced label when the version
//! space leaves no choice; otherwise compute the potential drop
//! Delta_b = rho(S) - rho(S + (x, b)) for both labels and commit to the
//! opposite of the label with the larger drop when that drop reaches alpha,
//! else abstain. Ties break toward b = +1, so a tied commitment predicts -1.
//! Drops are exact integers and alpha an exact rational, so thresholding
//! never sees rounding error.

pub mod bootstrap;
pub mod cert_arc;
pub mod generic;
pub mod rect;
pub mod seg;

pub use bootstrap::BootstrapHalfspaceLearner;
pub use cert_arc::CertArcEngine;
pub use generic::GenericEngine;
pub use rect::RectEngine;
pub use seg::SegEngine;

use num_bigint::BigInt;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::protocol::{Label, Point, Prediction};
use crate::rational::{q_from_f64, Q};
use crate::scores::ScoreSpec;

pub trait Learner<P: Point> {
    fn begin(&mut self, horizon: usize, rng: ChaCha12Rng) -> Result<()>;
    fn predict(&mut self, x: &P) -> Result<Prediction>;
    fn observe(&mut self, x: &P, y: Label) -> Result<()>;
}

/// Baseline: abstains everywhere.
pub struct AlwaysAbstain;

impl<P: Point> Learner<P> for AlwaysAbstain {
    fn begin(&mut self, _horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
        Ok(())
    }

    fn predict(&mut self, _x: &P) -> Result<Prediction> {
        Ok(Prediction::Abstain)
    }

    fn observe(&mut self, _x: &P, _y: Label) -> Result<()> {
        Ok(())
    }
}

/// Baseline: commits to one fixed label everywhere.
pub struct AlwaysLabel {
    label: Label,
}

impl AlwaysLabel {
    pub fn new(label: Label) -> Self {
        AlwaysLabel { label }
    }
}

impl<P: Point> Learner<P> for AlwaysLabel {
    fn begin(&mut self, _horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
        Ok(())
    }

    fn predict(&mut self, _x: &P) -> Result<Prediction> {
        Ok(Prediction::from_label(self.label))
    }

    fn observe(&mut self, _x: &P, _y: Label) -> Result<()> {
        Ok(())
    }
}

/// Stateless learner from a closure; handy for tests and omniscient
/// baselines.
pub struct ClosureLearner<F> {
    f: F,
}

impl<F> ClosureLearner<F> {
    pub fn new(f: F) -> Self {
        ClosureLearner { f }
    }
}

impl<P: Point, F: FnMut(&P) -> Prediction> Learner<P> for ClosureLearner<F> {
    fn begin(&mut self, _horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
        Ok(())
    }

    fn predict(&mut self, x: &P) -> Result<Prediction> {
        Ok((self.f)(x))
    }

    fn observe(&mut self, _x: &P, _y: Label) -> Result<()> {
        Ok(())
    }
}

/// The horizon-tuned threshold alpha = ((c T^k) / (k! m ln T))^(k/(k+1)),
/// balancing the mistake and abstention bounds. Needs T >= 2 (ln T must be
/// positive).
pub fn auto_alpha(spec: ScoreSpec, horizon: usize) -> Result<Q> {
    if horizon < 2 {
        return Err(Error::Domain(format!(
            "auto alpha needs a horizon of at least 2, got {horizon}"
        )));
    }
    let t = horizon as f64;
    let k = spec.k as f64;
    let k_fact: f64 = (1..=spec.k).map(|i| i as f64).product();
    let numerator = spec.c as f64 * t.powf(k);
    let denominator = k_fact * spec.m as f64 * t.ln();
    let alpha = (numerator / denominator).powf(k / (k + 1.0));
    if !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "auto alpha overflowed for spec {spec:?} at horizon {horizon}"
        )));
    }
    q_from_f64(alpha)
}

/// Incremental leave-k-out potential over a deduplicated history.
///
/// `forced` and `deltas` may mutate internal memos; `deltas` has the
/// precondition that neither label of x is forced (engines surface
/// `Error::Precondition` otherwise). Potentials and drops are exact i128
/// integers (scores are bounded integers and subset counts stay far below
/// the i128 range for reachable histories).
pub trait PotentialEngine<P: Point> {
    fn spec(&self) -> ScoreSpec;

    /// Version-space forced label of x under the current history, if any.
    fn forced(&mut self, x: &P) -> Result<Option<Label>>;

    /// (rho(S) - rho(S + (x, +1)), rho(S) - rho(S + (x, -1))).
    fn deltas(&mut self, x: &P) -> Result<(i128, i128)>;

    /// Commit (x, y). Exact duplicates are no-ops; a contradicting label is
    /// a clean-label violation.
    fn apply(&mut self, x: &P, y: Label) -> Result<()>;

    fn potential(&self) -> i128;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drop all state, ready for a fresh episode.
    fn reset(&mut self);
}

/// How the threshold is chosen at episode start.
#[derive(Debug, Clone)]
pub enum AlphaRule {
    /// Horizon-tuned via `auto_alpha`.
    Auto,
    /// A fixed nonnegative rational.
    Fixed(Q),
}

/// The predict-or-abstain learner over any potential engine.
pub struct PotentialLearner<P: Point, E: PotentialEngine<P>> {
    engine: E,
    rule: AlphaRule,
    alpha: Option<Q>,
    _points: std::marker::PhantomData<P>,
}

impl<P: Point, E: PotentialEngine<P>> PotentialLearner<P, E> {
    pub fn new(engine: E, rule: AlphaRule) -> Result<Self> {
        let alpha = match &rule {
            AlphaRule::Auto => None,
            AlphaRule::Fixed(a) => {
                if a < &Q::from_integer(0.into()) {
                    return Err(Error::Config("alpha must be nonnegative".into()));
                }
                Some(a.clone())
            }
        };
        Ok(PotentialLearner { engine, rule, alpha, _points: std::marker::PhantomData })
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn alpha(&self) -> Option<&Q> {
        self.alpha.as_ref()
    }

    /// The decision on x without observing anything: forced labels commit,
    /// then the larger drop commits to the opposite label when it reaches
    /// alpha (ties pick b = +1, hence predict -1), else abstain.
    pub fn decide(&mut self, x: &P) -> Result<Prediction> {
        if let Some(l) = self.engine.forced(x)? {
            return Ok(Prediction::from_label(l));
        }
        let alpha = self.alpha.clone().ok_or_else(|| {
            Error::Precondition("auto alpha is set by begin(); call it first".into())
        })?;
        let (d_plus, d_minus) = self.engine.deltas(x)?;
        let (best, b_star) =
            if d_plus >= d_minus { (d_plus, Label::Plus) } else { (d_minus, Label::Minus) };
        if Q::from_integer(BigInt::from(best)) >= alpha {
            Ok(Prediction::from_label(b_star.flip()))
        } else {
            Ok(Prediction::Abstain)
        }
    }
}

impl<P: Point, E: PotentialEngine<P>> Learner<P> for PotentialLearner<P, E> {
    fn begin(&mut self, horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
        self.engine.reset();
        if let AlphaRule::Auto = self.rule {
            self.alpha = Some(auto_alpha(self.engine.spec(), horizon)?);
        }
        Ok(())
    }

    fn predict(&mut self, x: &P) -> Result<Prediction> {
        self.decide(x)
    }

    fn observe(&mut self, x: &P, y: Label) -> Result<()> {
        self.engine.apply(x, y)
    }
}
