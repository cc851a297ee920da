//! Closed-form potential engine for origin-anchored rectangles.
//!
//! The potential is the sum over negative examples of how many coordinates
//! exceed the minimal consistent threshold (the coordinatewise maximum of
//! the positives). A new negative adds its own excess count; a new positive
//! raises the threshold and can only shrink the other negatives' counts, so
//! both deltas come out in one pass over the negatives.

use std::collections::HashMap;

use crate::classes::{RectPoint, RectangleClass};
use crate::error::{Error, Result};
use crate::protocol::Label;
use crate::rational::Q;
use crate::scores::ScoreSpec;

use super::PotentialEngine;

pub struct RectEngine {
    class: RectangleClass,
    spec: ScoreSpec,
    seen: HashMap<RectPoint, Label>,
    vstar: Vec<Q>,
    // Each negative with its current excess count #{i : z_i > vstar_i}.
    negatives: Vec<(RectPoint, u32)>,
    positives: usize,
    rho: i128,
}

impl RectEngine {
    pub fn new(class: RectangleClass) -> Self {
        let d = class.dim();
        let vstar = vec![Q::from_integer(0.into()); d];
        let spec = ScoreSpec { k: 1, m: 2 * d + 1, c: d as u32 };
        RectEngine { class, spec, seen: HashMap::new(), vstar, negatives: Vec::new(), positives: 0, rho: 0 }
    }

    fn excess(&self, x: &[Q]) -> u32 {
        x.iter().zip(&self.vstar).filter(|(xi, vi)| xi > vi).count() as u32
    }

    /// How much z's excess count drops when the threshold rises to w.
    fn drop_under(&self, z: &[Q], w: &[Q]) -> u32 {
        z.iter()
            .zip(self.vstar.iter().zip(w))
            .filter(|(zi, (vi, wi))| *zi > *vi && *zi <= *wi)
            .count() as u32
    }

    fn raised(&self, x: &[Q]) -> Vec<Q> {
        self.vstar
            .iter()
            .zip(x)
            .map(|(vi, xi)| if xi > vi { xi.clone() } else { vi.clone() })
            .collect()
    }
}

impl PotentialEngine<RectPoint> for RectEngine {
    fn spec(&self) -> ScoreSpec {
        self.spec
    }

    fn forced(&mut self, x: &RectPoint) -> Result<Option<Label>> {
        self.class.check_point(x)?;
        if let Some(&y) = self.seen.get(x) {
            return Ok(Some(y));
        }
        if self.excess(x) == 0 {
            // Inside every consistent box.
            return Ok(Some(Label::Plus));
        }
        let w = self.raised(x);
        if self.negatives.iter().any(|(z, n)| *n == self.drop_under(z, &w)) {
            // A positive label would trap some negative inside the box.
            return Ok(Some(Label::Minus));
        }
        Ok(None)
    }

    fn deltas(&mut self, x: &RectPoint) -> Result<(i128, i128)> {
        if self.forced(x)?.is_some() {
            return Err(Error::Precondition("deltas needs an unforced point".into()));
        }
        let d_minus = -i128::from(self.excess(x));
        let w = self.raised(x);
        let d_plus: i128 =
            self.negatives.iter().map(|(z, _)| i128::from(self.drop_under(z, &w))).sum();
        Ok((d_plus, d_minus))
    }

    fn apply(&mut self, x: &RectPoint, y: Label) -> Result<()> {
        self.class.check_point(x)?;
        if let Some(&prev) = self.seen.get(x) {
            if prev == y {
                return Ok(());
            }
            return Err(Error::CleanLabelViolation);
        }
        match y {
            Label::Minus => {
                let n = self.excess(x);
                if n == 0 {
                    return Err(Error::CleanLabelViolation);
                }
                self.rho += i128::from(n);
                self.negatives.push((x.clone(), n));
            }
            Label::Plus => {
                let w = self.raised(x);
                // Check for trapped negatives before mutating anything.
                let drops: Vec<u32> =
                    self.negatives.iter().map(|(z, _)| self.drop_under(z, &w)).collect();
                if self.negatives.iter().zip(&drops).any(|((_, n), drop)| drop == n) {
                    return Err(Error::CleanLabelViolation);
                }
                for ((_, n), drop) in self.negatives.iter_mut().zip(&drops) {
                    *n -= drop;
                    self.rho -= i128::from(*drop);
                }
                self.vstar = w;
                self.positives += 1;
            }
        }
        self.seen.insert(x.clone(), y);
        Ok(())
    }

    fn potential(&self) -> i128 {
        self.rho
    }

    fn len(&self) -> usize {
        self.positives + self.negatives.len()
    }

    fn reset(&mut self) {
        self.seen.clear();
        self.negatives.clear();
        for v in &mut self.vstar {
            *v = Q::from_integer(0.into());
        }
        self.positives = 0;
        self.rho = 0;
    }
}
