//! Certificate-counting potential engine for pinned planar halfspaces,
//! replacing per-letter feasibility queries with exact direction-cone
//! arithmetic.
//!
//! With a pinned pair every consistent hypothesis direction w satisfies
//! w . (p - n) > 0 for each positive-negative example pair, so the direction
//! part of the version space is an open angular sector. A pair's score is
//! how many of the three order types its sorted difference direction attains
//! over that sector, queried in O(1) integer cross products. Pairs at the
//! floor of 1 stay there forever (the sector only shrinks), so only live
//! pairs are re-examined, each against the sector of the history minus the
//! pair.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::classes::Halfspace2DClass;
use crate::error::{Error, Result};
use crate::geometry::cone::{Cone, Dir};
use crate::geometry::{lex_order, Point2};
use crate::protocol::{Label, LabeledExample};
use crate::scores::ScoreSpec;

use super::PotentialEngine;

/// Where a constraint endpoint comes from: a history example or the pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Src {
    Hist(u32),
    Pin,
}

impl Src {
    fn excluded_by(&self, skip: &[u32]) -> bool {
        match self {
            Src::Hist(i) => skip.contains(i),
            Src::Pin => false,
        }
    }
}

struct LivePair {
    f: u32,
    dir: Dir,
}

struct CertPlan {
    label: Label,
    // Dirs the new example contributes, tagged with the opposite-label
    // history index (None for the pin).
    xdirs: Vec<(Option<u32>, Dir)>,
    updates: Vec<((u32, u32), u32)>,
    rho_after: i128,
}

struct NewPairs {
    // (existing index, letter count, sorted difference direction).
    pairs: Vec<(u32, u32, Dir)>,
    rho_gain: i128,
}

struct Pending {
    x: Point2,
    new_pairs: NewPairs,
    plus: CertPlan,
    minus: CertPlan,
}

pub struct CertArcEngine {
    class: Halfspace2DClass,
    pin_plus: Point2,
    pin_minus: Point2,
    seen: HashMap<Point2, Label>,
    history: Vec<LabeledExample<Point2>>,
    // All positive-negative constraint pairs accumulated so far, pin first.
    constraints: Vec<(Src, Src, Dir)>,
    cone_all: Cone,
    live: HashMap<(u32, u32), LivePair>,
    rho: i128,
    pending: Option<Pending>,
}

fn count_letters(cone: &Cone, d: &Dir) -> u32 {
    let mut f = 0;
    if cone.meets_dot_gt(d) {
        f += 1;
    }
    if cone.meets_dot_eq(d) {
        f += 1;
    }
    if cone.meets_dot_lt(d) {
        f += 1;
    }
    f
}

/// Direction of (lex-smaller - lex-larger), matching the certificate's sigma
/// orientation.
fn pair_dir(a: &Point2, b: &Point2) -> Result<Dir> {
    let (p, q) = if lex_order(a, b) == Ordering::Less { (a, b) } else { (b, a) };
    Dir::from_diff(p, q).ok_or(Error::DegeneratePair)
}

fn sep_dir(pos: &Point2, neg: &Point2) -> Result<Dir> {
    Dir::from_diff(pos, neg)
        .ok_or_else(|| Error::Structure("coincident points with opposite labels".into()))
}

impl CertArcEngine {
    pub fn new(class: Halfspace2DClass) -> Result<Self> {
        let (pin_plus, pin_minus) = class
            .pin()
            .cloned()
            .ok_or_else(|| Error::Config("certificate arc engine needs a pinned class".into()))?;
        let pin_dir = sep_dir(&pin_plus, &pin_minus)?;
        let cone_all = Cone::All.intersect_dot_gt(&pin_dir);
        Ok(CertArcEngine {
            class,
            pin_plus,
            pin_minus,
            seen: HashMap::new(),
            history: Vec::new(),
            constraints: vec![(Src::Pin, Src::Pin, pin_dir)],
            cone_all,
            live: HashMap::new(),
            rho: 0,
            pending: None,
        })
    }

    pub fn class(&self) -> &Halfspace2DClass {
        &self.class
    }

    /// Direction sector of hypotheses consistent with the history minus the
    /// given indices (the pin always applies).
    fn cone_excluding(&self, skip: &[u32]) -> Cone {
        let mut c = Cone::All;
        for (pos, neg, d) in &self.constraints {
            if pos.excluded_by(skip) || neg.excluded_by(skip) {
                continue;
            }
            c = c.intersect_dot_gt(d);
        }
        c
    }

    /// Constraint dirs a fresh (x, label) adds: one per opposite-label
    /// example plus one for the opposite pin.
    fn x_dirs(&self, x: &Point2, label: Label) -> Result<Vec<(Option<u32>, Dir)>> {
        let mut dirs = Vec::new();
        for (i, ex) in self.history.iter().enumerate() {
            if ex.label != label {
                let d = match label {
                    Label::Plus => sep_dir(x, &ex.point)?,
                    Label::Minus => sep_dir(&ex.point, x)?,
                };
                dirs.push((Some(i as u32), d));
            }
        }
        let pin = match label {
            Label::Plus => sep_dir(x, &self.pin_minus)?,
            Label::Minus => sep_dir(&self.pin_plus, x)?,
        };
        dirs.push((None, pin));
        Ok(dirs)
    }

    /// Letter counts of the pairs {existing, x}; their rest excludes x, so
    /// the result is the same for both candidate labels.
    fn new_pairs(&self, x: &Point2) -> Result<NewPairs> {
        let mut pairs = Vec::with_capacity(self.history.len());
        let mut rho_gain = 0i128;
        for i in 0..self.history.len() as u32 {
            let cone = self.cone_excluding(&[i]);
            let d = pair_dir(x, &self.history[i as usize].point)?;
            let f = count_letters(&cone, &d);
            debug_assert!(f >= 1, "realizable rest keeps a letter alive");
            rho_gain += i128::from(f);
            pairs.push((i, f, d));
        }
        Ok(NewPairs { pairs, rho_gain })
    }

    fn plan_for(&self, x: &Point2, label: Label, new_rho: i128) -> Result<CertPlan> {
        let xdirs = self.x_dirs(x, label)?;
        let mut updates = Vec::new();
        let mut rho_after = self.rho + new_rho;
        for (&(i, j), pair) in &self.live {
            let mut cone = self.cone_excluding(&[i, j]);
            for (src, d) in &xdirs {
                if let Some(s) = src {
                    if *s == i || *s == j {
                        continue;
                    }
                }
                cone = cone.intersect_dot_gt(d);
            }
            let f2 = count_letters(&cone, &pair.dir);
            debug_assert!(f2 >= 1 && f2 <= pair.f, "letter counts shrink toward the floor");
            if f2 != pair.f {
                rho_after += i128::from(f2) - i128::from(pair.f);
                updates.push(((i, j), f2));
            }
        }
        Ok(CertPlan { label, xdirs, updates, rho_after })
    }

    fn commit(&mut self, x: &Point2, plan: CertPlan, new_pairs: NewPairs) {
        let t = self.history.len() as u32;
        for (key, f2) in plan.updates {
            if f2 <= 1 {
                self.live.remove(&key);
            } else if let Some(p) = self.live.get_mut(&key) {
                p.f = f2;
            }
        }
        for (i, f, dir) in new_pairs.pairs {
            if f >= 2 {
                self.live.insert((i, t), LivePair { f, dir });
            }
        }
        for (src, d) in plan.xdirs {
            self.cone_all = self.cone_all.intersect_dot_gt(&d);
            let (pos, neg) = match plan.label {
                Label::Plus => (Src::Hist(t), src.map_or(Src::Pin, Src::Hist)),
                Label::Minus => (src.map_or(Src::Pin, Src::Hist), Src::Hist(t)),
            };
            self.constraints.push((pos, neg, d));
        }
        self.rho = plan.rho_after;
        self.seen.insert(x.clone(), plan.label);
        self.history.push(LabeledExample::new(x.clone(), plan.label));
    }

    fn fold_label_cone(&self, x: &Point2, label: Label) -> Cone {
        let mut c = self.cone_all.clone();
        for ex in &self.history {
            if ex.label != label {
                let d = match label {
                    Label::Plus => Dir::from_diff(x, &ex.point),
                    Label::Minus => Dir::from_diff(&ex.point, x),
                };
                match d {
                    Some(d) => c = c.intersect_dot_gt(&d),
                    None => return Cone::Empty,
                }
            }
        }
        let pin = match label {
            Label::Plus => Dir::from_diff(x, &self.pin_minus),
            Label::Minus => Dir::from_diff(&self.pin_plus, x),
        };
        match pin {
            Some(d) => c.intersect_dot_gt(&d),
            None => Cone::Empty,
        }
    }
}

impl PotentialEngine<Point2> for CertArcEngine {
    fn spec(&self) -> ScoreSpec {
        ScoreSpec { k: 2, m: 7, c: 3 }
    }

    fn forced(&mut self, x: &Point2) -> Result<Option<Label>> {
        if let Some(&y) = self.seen.get(x) {
            return Ok(Some(y));
        }
        let plus_ok = !self.fold_label_cone(x, Label::Plus).is_empty();
        let minus_ok = !self.fold_label_cone(x, Label::Minus).is_empty();
        match (plus_ok, minus_ok) {
            (true, true) => Ok(None),
            (true, false) => Ok(Some(Label::Plus)),
            (false, true) => Ok(Some(Label::Minus)),
            (false, false) => Err(Error::Structure(
                "both labels unrealizable after a realizable history".into(),
            )),
        }
    }

    fn deltas(&mut self, x: &Point2) -> Result<(i128, i128)> {
        if self.forced(x)?.is_some() {
            return Err(Error::Precondition("deltas needs an unforced point".into()));
        }
        let new_pairs = self.new_pairs(x)?;
        let plus = self.plan_for(x, Label::Plus, new_pairs.rho_gain)?;
        let minus = self.plan_for(x, Label::Minus, new_pairs.rho_gain)?;
        let d = (self.rho - plus.rho_after, self.rho - minus.rho_after);
        self.pending = Some(Pending { x: x.clone(), new_pairs, plus, minus });
        Ok(d)
    }

    fn apply(&mut self, x: &Point2, y: Label) -> Result<()> {
        if let Some(&prev) = self.seen.get(x) {
            if prev == y {
                return Ok(());
            }
            return Err(Error::CleanLabelViolation);
        }
        match self.forced(x)? {
            Some(f) if f != y => return Err(Error::CleanLabelViolation),
            _ => {}
        }
        let (plan, new_pairs) = match self.pending.take() {
            Some(p) if p.x == *x => {
                let plan = if y == Label::Plus { p.plus } else { p.minus };
                (plan, p.new_pairs)
            }
            _ => {
                let new_pairs = self.new_pairs(x)?;
                let plan = self.plan_for(x, y, new_pairs.rho_gain)?;
                (plan, new_pairs)
            }
        };
        self.commit(x, plan, new_pairs);
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
        self.live.clear();
        self.rho = 0;
        self.pending = None;
        let pin_dir = sep_dir(&self.pin_plus, &self.pin_minus).expect("pins are distinct");
        self.cone_all = Cone::All.intersect_dot_gt(&pin_dir);
        self.constraints = vec![(Src::Pin, Src::Pin, pin_dir)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::ConceptClass;
    use crate::learner::GenericEngine;
    use crate::rational::q_int;
    use crate::scores::{CertScore, ScoreFunction};
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn p(x: i64, y: i64) -> Point2 {
        Point2::from_ints(x, y)
    }

    fn pinned() -> Halfspace2DClass {
        Halfspace2DClass::pinned(p(0, 3), p(0, -3)).unwrap()
    }

    #[test]
    fn requires_a_pin() {
        assert!(matches!(CertArcEngine::new(Halfspace2DClass::new()), Err(Error::Config(_))));
    }

    #[test]
    fn hand_worked_first_pair() {
        let class = Halfspace2DClass::pinned(p(0, 1), p(0, -1)).unwrap();
        let mut engine = CertArcEngine::new(class).unwrap();
        // No pairs yet: both deltas are zero.
        assert_eq!(engine.deltas(&p(1, 0)).unwrap(), (0, 0));
        engine.apply(&p(1, 0), Label::Minus).unwrap();
        assert_eq!(engine.potential(), 0);
        // The pair {(1,0), (2,3)} over the pin-only sector w2 > 0 attains
        // all three letters.
        assert_eq!(engine.deltas(&p(2, 3)).unwrap(), (-3, -3));
        engine.apply(&p(2, 3), Label::Plus).unwrap();
        assert_eq!(engine.potential(), 3);
    }

    fn random_consistent_stream(
        rng: &mut ChaCha12Rng,
        n: usize,
    ) -> Vec<LabeledExample<Point2>> {
        // Hypothesis w = (a, 1), b in (-3, 3] stays consistent with the
        // (0,3)/(0,-3) pin.
        let a = q_int(rng.gen_range(-2..=2));
        let w2 = q_int(1);
        let b = q_int(rng.gen_range(-2..=3));
        let mut out: Vec<LabeledExample<Point2>> = Vec::new();
        while out.len() < n {
            let x = p(rng.gen_range(-4..=4), rng.gen_range(-4..=4));
            if out.iter().any(|e| e.point == x) {
                continue;
            }
            let y = Halfspace2DClass::label_of(&a, &w2, &b, &x);
            out.push(LabeledExample::new(x, y));
        }
        out
    }

    #[test]
    fn agrees_with_generic_engine_and_class_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(2718);
        let class = pinned();
        for _ in 0..8 {
            let stream = random_consistent_stream(&mut rng, 8);
            let mut fast = CertArcEngine::new(class.clone()).unwrap();
            let mut slow = GenericEngine::new(class.clone(), CertScore::halfspace(class.clone()));
            let mut history: Vec<LabeledExample<Point2>> = Vec::new();
            for ex in stream {
                let forced = fast.forced(&ex.point).unwrap();
                assert_eq!(forced, slow.forced(&ex.point).unwrap());
                assert_eq!(forced, class.forced_label(&history, &ex.point).unwrap());
                if forced.is_none() {
                    assert_eq!(fast.deltas(&ex.point).unwrap(), slow.deltas(&ex.point).unwrap());
                }
                fast.apply(&ex.point, ex.label).unwrap();
                slow.apply(&ex.point, ex.label).unwrap();
                history.push(ex);
                assert_eq!(fast.potential(), slow.potential());
                assert_eq!(fast.len(), slow.len());
            }
        }
    }

    #[test]
    fn potential_matches_per_pair_score_sums() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let class = pinned();
        let score = CertScore::halfspace(class.clone());
        for _ in 0..5 {
            let stream = random_consistent_stream(&mut rng, 7);
            let mut engine = CertArcEngine::new(class.clone()).unwrap();
            for ex in &stream {
                engine.apply(&ex.point, ex.label).unwrap();
            }
            let brute: i128 = (0..stream.len())
                .combinations(2)
                .map(|idx| {
                    let u = [stream[idx[0]].clone(), stream[idx[1]].clone()];
                    let rest: Vec<_> = stream
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !idx.contains(i))
                        .map(|(_, e)| e.clone())
                        .collect();
                    i128::from(score.eval(&u, &rest).unwrap())
                })
                .sum();
            assert_eq!(engine.potential(), brute);
        }
    }

    #[test]
    fn pin_locations_are_forced() {
        let mut engine = CertArcEngine::new(pinned()).unwrap();
        assert_eq!(engine.forced(&p(0, 3)).unwrap(), Some(Label::Plus));
        assert_eq!(engine.forced(&p(0, -3)).unwrap(), Some(Label::Minus));
        assert!(matches!(engine.apply(&p(0, -3), Label::Plus), Err(Error::CleanLabelViolation)));
        assert!(matches!(engine.deltas(&p(0, 3)), Err(Error::Precondition(_))));
    }

    #[test]
    fn duplicate_and_flip_handling() {
        let mut engine = CertArcEngine::new(pinned()).unwrap();
        engine.apply(&p(1, 1), Label::Plus).unwrap();
        let rho = engine.potential();
        engine.apply(&p(1, 1), Label::Plus).unwrap();
        assert_eq!(engine.len(), 1);
        assert_eq!(engine.potential(), rho);
        assert!(matches!(engine.apply(&p(1, 1), Label::Minus), Err(Error::CleanLabelViolation)));
    }

    #[test]
    fn reset_restores_the_pin_sector() {
        let mut engine = CertArcEngine::new(pinned()).unwrap();
        engine.apply(&p(1, 1), Label::Plus).unwrap();
        engine.apply(&p(2, -2), Label::Minus).unwrap();
        engine.reset();
        assert!(engine.is_empty());
        assert_eq!(engine.potential(), 0);
        assert_eq!(engine.forced(&p(1, 1)).unwrap(), None);
    }
}
