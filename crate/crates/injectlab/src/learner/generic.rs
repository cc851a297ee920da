//! Reference potential engine: incremental, but score-agnostic.
//!
//! Keeps the score of every k-subset of the deduplicated history in a map.
//! Adding (x, b) touches two groups: existing subsets get their rest
//! extended by (x, b) (re-evaluated unless already at the score floor, which
//! monotonicity pins), and each (k-1)-subset of the old history spawns a new
//! subset containing (x, b). Both labels' plans are computed in `deltas` and
//! the chosen one is replayed by `apply`, so each round pays for the subset
//! evaluations once.

use std::collections::HashMap;

use itertools::Itertools;

use crate::classes::ConceptClass;
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample, Point};
use crate::scores::{ScoreFunction, ScoreSpec};

use super::PotentialEngine;

struct Plan {
    updates: Vec<(Vec<u32>, u32)>,
    inserts: Vec<(Vec<u32>, u32)>,
    rho_after: i128,
}

struct PendingPlans<P> {
    x: P,
    plus: Plan,
    minus: Plan,
}

pub struct GenericEngine<P: Point, C: ConceptClass<P>, F: ScoreFunction<P>> {
    class: C,
    score: F,
    history: Vec<LabeledExample<P>>,
    seen: HashMap<P, Label>,
    // Sorted history indices of each k-subset, mapped to its current score.
    cur: HashMap<Vec<u32>, u32>,
    rho: i128,
    pending: Option<PendingPlans<P>>,
}

impl<P: Point, C: ConceptClass<P>, F: ScoreFunction<P>> GenericEngine<P, C, F> {
    pub fn new(class: C, score: F) -> Self {
        GenericEngine {
            class,
            score,
            history: Vec::new(),
            seen: HashMap::new(),
            cur: HashMap::new(),
            rho: 0,
            pending: None,
        }
    }

    pub fn history(&self) -> &[LabeledExample<P>] {
        &self.history
    }

    fn compute_plan(&self, x: &P, b: Label) -> Result<Plan> {
        let xb = LabeledExample::new(x.clone(), b);
        let k = self.score.spec().k;
        let floor = self.score.floor();
        let t = self.history.len();
        let mut rho_after = self.rho;
        let mut updates = Vec::new();
        for (key, &val) in &self.cur {
            if val == floor {
                continue;
            }
            let u: Vec<_> = key.iter().map(|&i| self.history[i as usize].clone()).collect();
            let mut rest: Vec<_> = Vec::with_capacity(t - k + 1);
            for (i, ex) in self.history.iter().enumerate() {
                if !key.contains(&(i as u32)) {
                    rest.push(ex.clone());
                }
            }
            rest.push(xb.clone());
            let new_val = self.score.eval(&u, &rest)?;
            debug_assert!(new_val <= val, "score rose under extension");
            if new_val != val {
                rho_after += i128::from(new_val) - i128::from(val);
                updates.push((key.clone(), new_val));
            }
        }
        let mut inserts = Vec::new();
        for base in (0..t as u32).combinations(k - 1) {
            let mut u: Vec<_> = base.iter().map(|&i| self.history[i as usize].clone()).collect();
            u.push(xb.clone());
            let rest: Vec<_> = self
                .history
                .iter()
                .enumerate()
                .filter(|(i, _)| !base.contains(&(*i as u32)))
                .map(|(_, ex)| ex.clone())
                .collect();
            let val = self.score.eval(&u, &rest)?;
            rho_after += i128::from(val);
            let mut key = base;
            key.push(t as u32);
            inserts.push((key, val));
        }
        Ok(Plan { updates, inserts, rho_after })
    }

    fn commit(&mut self, x: &P, y: Label, plan: Plan) {
        for (key, val) in plan.updates {
            self.cur.insert(key, val);
        }
        for (key, val) in plan.inserts {
            self.cur.insert(key, val);
        }
        self.rho = plan.rho_after;
        self.seen.insert(x.clone(), y);
        self.history.push(LabeledExample::new(x.clone(), y));
    }
}

impl<P: Point, C: ConceptClass<P>, F: ScoreFunction<P>> PotentialEngine<P>
    for GenericEngine<P, C, F>
{
    fn spec(&self) -> ScoreSpec {
        self.score.spec()
    }

    fn forced(&mut self, x: &P) -> Result<Option<Label>> {
        if let Some(&y) = self.seen.get(x) {
            return Ok(Some(y));
        }
        self.class.forced_label(&self.history, x)
    }

    fn deltas(&mut self, x: &P) -> Result<(i128, i128)> {
        if self.forced(x)?.is_some() {
            return Err(Error::Precondition("deltas needs an unforced point".into()));
        }
        let plus = self.compute_plan(x, Label::Plus)?;
        let minus = self.compute_plan(x, Label::Minus)?;
        let d = (self.rho - plus.rho_after, self.rho - minus.rho_after);
        self.pending = Some(PendingPlans { x: x.clone(), plus, minus });
        Ok(d)
    }

    fn apply(&mut self, x: &P, y: Label) -> Result<()> {
        if let Some(&prev) = self.seen.get(x) {
            if prev == y {
                return Ok(());
            }
            return Err(Error::CleanLabelViolation);
        }
        // A label contradicting the forced one would leave the history
        // unrealizable, which every later query treats as corruption.
        if let Some(f) = self.class.forced_label(&self.history, x)? {
            if f != y {
                return Err(Error::CleanLabelViolation);
            }
        }
        let plan = match self.pending.take() {
            Some(p) if p.x == *x => match y {
                Label::Plus => p.plus,
                Label::Minus => p.minus,
            },
            _ => self.compute_plan(x, y)?,
        };
        self.commit(x, y, plan);
        Ok(())
    }

    fn potential(&self) -> i128 {
        self.rho
    }

    fn len(&self) -> usize {
        self.history.len()
    }

    fn reset(&mut self) {
        self.history.clear();
        self.seen.clear();
        self.cur.clear();
        self.rho = 0;
        self.pending = None;
    }
}
