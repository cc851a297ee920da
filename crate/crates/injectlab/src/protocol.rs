//! The injection game: hidden i.i.d.-or-injected rounds, clean labels, and
//! the combined error tally.
//!
//! Each round the adversary either lets the engine draw from the declared
//! distribution (hidden bit 0) or injects a point of its choice (hidden bit
//! 1). The learner commits to `+1`, `-1`, or abstains before the label is
//! revealed; the label always comes from the fixed target concept.
//! Committed mistakes are charged on every round; abstentions are charged
//! only on i.i.d. rounds.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{Adversary, Choice};
use crate::classes::ConceptClass;
use crate::error::{Error, Result};
use crate::learner::Learner;

/// Marker bound for stream points.
pub trait Point: Clone + Eq + Hash + fmt::Debug {}
impl<T: Clone + Eq + Hash + fmt::Debug> Point for T {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::Plus => Label::Minus,
            Label::Minus => Label::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Plus => 1,
            Label::Minus => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Label> {
        match v {
            1 => Ok(Label::Plus),
            -1 => Ok(Label::Minus),
            other => Err(Error::Domain(format!("label must be +1 or -1, got {other}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Plus => write!(f, "+1"),
            Label::Minus => write!(f, "-1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prediction {
    Plus,
    Minus,
    Abstain,
}

impl Prediction {
    pub fn from_label(l: Label) -> Prediction {
        match l {
            Label::Plus => Prediction::Plus,
            Label::Minus => Prediction::Minus,
        }
    }

    pub fn is_abstain(self) -> bool {
        self == Prediction::Abstain
    }

    /// True when this is a committed prediction that disagrees with `y`.
    pub fn is_mistake_against(self, y: Label) -> bool {
        match self {
            Prediction::Abstain => false,
            Prediction::Plus => y == Label::Minus,
            Prediction::Minus => y == Label::Plus,
        }
    }
}

impl From<Label> for Prediction {
    fn from(l: Label) -> Prediction {
        Prediction::from_label(l)
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Plus => write!(f, "+1"),
            Prediction::Minus => write!(f, "-1"),
            Prediction::Abstain => write!(f, "_|_"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledExample<P> {
    pub point: P,
    pub label: Label,
}

impl<P> LabeledExample<P> {
    pub fn new(point: P, label: Label) -> Self {
        LabeledExample { point, label }
    }
}

/// Insertion-ordered set of labeled examples; one label per point.
#[derive(Debug, Clone)]
pub struct History<P> {
    examples: Vec<LabeledExample<P>>,
    index: HashMap<P, Label>,
}

impl<P: Point> Default for History<P> {
    fn default() -> Self {
        History::new()
    }
}

impl<P: Point> History<P> {
    pub fn new() -> Self {
        History { examples: Vec::new(), index: HashMap::new() }
    }

    /// Inserts unless the exact example is already present; a point arriving
    /// with the opposite label is a clean-label violation.
    ///
    /// Returns whether the history changed.
    pub fn dedup_insert(&mut self, ex: LabeledExample<P>) -> Result<bool> {
        match self.index.get(&ex.point) {
            Some(&l) if l == ex.label => Ok(false),
            Some(_) => Err(Error::CleanLabelViolation),
            None => {
                self.index.insert(ex.point.clone(), ex.label);
                self.examples.push(ex);
                Ok(true)
            }
        }
    }

    pub fn label_of(&self, point: &P) -> Option<Label> {
        self.index.get(point).copied()
    }

    pub fn contains(&self, ex: &LabeledExample<P>) -> bool {
        self.index.get(&ex.point) == Some(&ex.label)
    }

    pub fn examples(&self) -> &[LabeledExample<P>] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// One protocol round as recorded by the engine. `injected` is the hidden
/// bit: the learner never sees it, but transcripts keep it for scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord<P> {
    pub t: usize,
    pub injected: bool,
    pub x: P,
    pub prediction: Prediction,
    pub y: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript<P> {
    pub horizon: usize,
    pub seed: u64,
    pub rounds: Vec<RoundRecord<P>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorTally {
    /// Committed predictions that disagree with the label (any round).
    pub err_mis: usize,
    /// Abstentions on i.i.d. rounds only.
    pub err_abs: usize,
}

impl ErrorTally {
    pub fn combined(&self) -> usize {
        self.err_mis + self.err_abs
    }
}

pub fn tally<P>(transcript: &Transcript<P>) -> ErrorTally {
    let mut t = ErrorTally::default();
    for r in &transcript.rounds {
        if r.prediction.is_mistake_against(r.y) {
            t.err_mis += 1;
        } else if r.prediction.is_abstain() && !r.injected {
            t.err_abs += 1;
        }
    }
    t
}

/// Plays one episode.
///
/// One RNG per episode, split into independent sub-streams for engine draws,
/// adversary randomness, and learner randomness, so e.g. adding learner
/// randomness cannot perturb the sample path. The engine, not the adversary,
/// draws the i.i.d. point whenever the adversary declines to inject.
///
/// When `class` is given, the running history is asserted realizable after
/// every round; a violation means the adversary's labels do not come from a
/// single concept in the class.
pub fn run_episode<P: Point>(
    adversary: &mut dyn Adversary<P>,
    learner: &mut dyn Learner<P>,
    class: Option<&dyn ConceptClass<P>>,
    horizon: usize,
    seed: u64,
) -> Result<Transcript<P>> {
    let mut master = ChaCha12Rng::seed_from_u64(seed);
    let mut engine_rng = ChaCha12Rng::seed_from_u64(master.next_u64());
    let adversary_rng = ChaCha12Rng::seed_from_u64(master.next_u64());
    let learner_rng = ChaCha12Rng::seed_from_u64(master.next_u64());

    adversary.begin(horizon, adversary_rng)?;
    learner.begin(horizon, learner_rng)?;

    let mut history: History<P> = History::new();
    let mut rounds: Vec<RoundRecord<P>> = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let (injected, x) = match adversary.choose(t, &rounds) {
            Choice::Iid => (false, adversary.distribution().sample(&mut engine_rng)),
            Choice::Inject(x) => (true, x),
        };
        let prediction = learner.predict(&x)?;
        let y = adversary.label_of(&x)?;
        history
            .dedup_insert(LabeledExample::new(x.clone(), y))
            .map_err(|_| Error::ProtocolViolation(format!("round {t}: label contradicts an earlier round")))?;
        if let Some(c) = class {
            if !c.realizable(history.examples())? {
                return Err(Error::ProtocolViolation(format!(
                    "round {t}: history no longer realizable in the declared class"
                )));
            }
        }
        learner.observe(&x, y)?;
        rounds.push(RoundRecord { t, injected, x, prediction, y });
    }
    Ok(Transcript { horizon, seed, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::WeightedPoints;
    use crate::learner::{AlwaysAbstain, AlwaysLabel, ClosureLearner};

    /// Adversary over `u32` points labeled by parity (even = +1).
    struct ParityIid {
        dist: WeightedPoints<u32>,
    }

    impl ParityIid {
        fn new(points: Vec<u32>) -> Self {
            let dist = WeightedPoints::uniform(points).unwrap();
            ParityIid { dist }
        }
    }

    impl Adversary<u32> for ParityIid {
        fn begin(&mut self, _horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
            Ok(())
        }
        fn distribution(&self) -> &WeightedPoints<u32> {
            &self.dist
        }
        fn label_of(&self, x: &u32) -> Result<Label> {
            Ok(if x % 2 == 0 { Label::Plus } else { Label::Minus })
        }
        fn choose(&mut self, _t: usize, _past: &[RoundRecord<u32>]) -> Choice<u32> {
            Choice::Iid
        }
    }

    /// Flips its label for the same point across rounds.
    struct ContradictingAdversary {
        dist: WeightedPoints<u32>,
        calls: std::cell::Cell<usize>,
    }

    impl Adversary<u32> for ContradictingAdversary {
        fn begin(&mut self, _horizon: usize, _rng: ChaCha12Rng) -> Result<()> {
            Ok(())
        }
        fn distribution(&self) -> &WeightedPoints<u32> {
            &self.dist
        }
        fn label_of(&self, _x: &u32) -> Result<Label> {
            let n = self.calls.get();
            self.calls.set(n + 1);
            Ok(if n == 0 { Label::Plus } else { Label::Minus })
        }
        fn choose(&mut self, _t: usize, _past: &[RoundRecord<u32>]) -> Choice<u32> {
            Choice::Inject(7)
        }
    }

    #[test]
    fn zero_horizon_gives_empty_transcript() {
        let mut adv = ParityIid::new(vec![0, 1, 2, 3]);
        let mut learner = AlwaysAbstain;
        let tr = run_episode(&mut adv, &mut learner, None, 0, 1).unwrap();
        assert!(tr.rounds.is_empty());
        assert_eq!(tally(&tr), ErrorTally { err_mis: 0, err_abs: 0 });
    }

    #[test]
    fn omniscient_learner_has_zero_error() {
        let mut adv = ParityIid::new(vec![0, 1, 2, 3]);
        let mut learner =
            ClosureLearner::new(|x: &u32| if x % 2 == 0 { Prediction::Plus } else { Prediction::Minus });
        let tr = run_episode(&mut adv, &mut learner, None, 50, 9).unwrap();
        assert_eq!(tally(&tr).combined(), 0);
    }

    #[test]
    fn always_abstain_is_charged_only_on_iid_rounds() {
        let mut adv = ParityIid::new(vec![0, 1, 2, 3]);
        let mut learner = AlwaysAbstain;
        let tr = run_episode(&mut adv, &mut learner, None, 30, 5).unwrap();
        let t = tally(&tr);
        assert_eq!(t.err_mis, 0);
        assert_eq!(t.err_abs, 30);
    }

    #[test]
    fn always_minus_pays_on_positive_rounds() {
        let mut adv = ParityIid::new(vec![0, 1]);
        let mut learner = AlwaysLabel::new(Label::Minus);
        let tr = run_episode(&mut adv, &mut learner, None, 40, 11).unwrap();
        let t = tally(&tr);
        let positives = tr.rounds.iter().filter(|r| r.y == Label::Plus).count();
        assert_eq!(t.err_mis, positives);
        assert_eq!(t.err_abs, 0);
    }

    #[test]
    fn tally_charges_each_round_at_most_once() {
        let mut adv = ParityIid::new(vec![0, 1, 2, 3, 4, 5]);
        let mut learner =
            ClosureLearner::new(|x: &u32| if *x < 2 { Prediction::Abstain } else { Prediction::Plus });
        let tr = run_episode(&mut adv, &mut learner, None, 64, 3).unwrap();
        let t = tally(&tr);
        assert!(t.err_mis + t.err_abs <= tr.horizon);
    }

    #[test]
    fn identical_seeds_give_identical_transcripts() {
        let run = |seed| {
            let mut adv = ParityIid::new(vec![0, 1, 2, 3]);
            let mut learner = AlwaysLabel::new(Label::Plus);
            run_episode(&mut adv, &mut learner, None, 25, seed).unwrap()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42).rounds, run(43).rounds);
    }

    #[test]
    fn contradicting_labels_abort_with_protocol_violation() {
        let mut adv = ContradictingAdversary {
            dist: WeightedPoints::uniform(vec![7]).unwrap(),
            calls: std::cell::Cell::new(0),
        };
        let mut learner = AlwaysAbstain;
        let err = run_episode(&mut adv, &mut learner, None, 5, 2).unwrap_err();
        assert!(matches!(err, Error::ProtocolViolation(_)));
    }

    #[test]
    fn dedup_insert_rejects_contradictions_and_skips_duplicates() {
        let mut h: History<u32> = History::new();
        assert!(h.dedup_insert(LabeledExample::new(1, Label::Plus)).unwrap());
        assert!(!h.dedup_insert(LabeledExample::new(1, Label::Plus)).unwrap());
        assert!(matches!(
            h.dedup_insert(LabeledExample::new(1, Label::Minus)),
            Err(Error::CleanLabelViolation)
        ));
        assert_eq!(h.len(), 1);
        assert_eq!(h.label_of(&1), Some(Label::Plus));
    }
}
