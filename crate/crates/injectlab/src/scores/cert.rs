//! Certificate-counting score: f(U; V(rest)) is the number of distinct
//! values a finite-alphabet statistic sigma(h, points(U)) attains over the
//! version space. Restricting the version space can only drop values, so the
//! count is monotone with floor 1 (a realizable rest keeps at least one
//! hypothesis alive).
//!
//! For planar halfspaces the statistic on a lex-sorted pair (a, b) is the
//! order type of w . a versus w . b (0 greater, 1 equal, 2 less), alphabet
//! size 3. Which value is attainable is one exact feasibility query per
//! letter.

use std::cmp::Ordering;
use std::marker::PhantomData;

use super::{check_subset_size, distinct_points, ScoreFunction, ScoreSpec};
use crate::classes::Halfspace2DClass;
use crate::error::{Error, Result};
use crate::geometry::{feasible, lex_order, LinearConstraint, Point2, Rel};
use crate::protocol::{LabeledExample, Point};
use crate::rational::Q;
use num_traits::Zero;

/// A finite-alphabet statistic of (hypothesis, point tuple) pairs, together
/// with the exact query "which letters appear over the version space".
pub trait Certificate<P: Point> {
    fn alphabet(&self) -> u32;

    /// Distinct sigma values over hypotheses consistent with `rest`, sorted.
    /// Errors with `Precondition` when rest is unrealizable.
    fn realizable_values(&self, points: &[P], rest: &[LabeledExample<P>]) -> Result<Vec<u32>>;
}

pub struct HalfspaceCertificate {
    class: Halfspace2DClass,
}

impl HalfspaceCertificate {
    pub fn new(class: Halfspace2DClass) -> Self {
        HalfspaceCertificate { class }
    }

    pub fn class(&self) -> &Halfspace2DClass {
        &self.class
    }

    /// sigma of a concrete hypothesis on a pair; identical points are
    /// degenerate.
    pub fn sigma(w1: &Q, w2: &Q, a: &Point2, b: &Point2) -> Result<u32> {
        if a == b {
            return Err(Error::DegeneratePair);
        }
        let (p, q) = if lex_order(a, b) == Ordering::Less { (a, b) } else { (b, a) };
        let dp = w1 * p.xq() + w2 * p.yq();
        let dq = w1 * q.xq() + w2 * q.yq();
        Ok(match dp.cmp(&dq) {
            Ordering::Greater => 0,
            Ordering::Equal => 1,
            Ordering::Less => 2,
        })
    }

    /// The linear constraint on (w1, w2, b) asserting sigma = value on the
    /// (already lex-sorted) pair difference e = p - q.
    pub(crate) fn sigma_row(e: (Q, Q), value: u32) -> LinearConstraint {
        let (ex, ey) = e;
        match value {
            0 => LinearConstraint::new([ex, ey, Q::zero()], Rel::Gt),
            1 => LinearConstraint::new([ex, ey, Q::zero()], Rel::Eq),
            _ => LinearConstraint::new([-ex, -ey, Q::zero()], Rel::Gt),
        }
    }
}

impl Certificate<Point2> for HalfspaceCertificate {
    fn alphabet(&self) -> u32 {
        3
    }

    fn realizable_values(
        &self,
        points: &[Point2],
        rest: &[LabeledExample<Point2>],
    ) -> Result<Vec<u32>> {
        if points.len() != 2 {
            return Err(Error::Precondition(format!(
                "halfspace certificate takes point pairs, got {}",
                points.len()
            )));
        }
        if points[0] == points[1] {
            return Err(Error::DegeneratePair);
        }
        let base = self.class.constraints(rest);
        if !feasible(&base) {
            return Err(Error::Precondition(
                "certificate score needs a realizable rest".into(),
            ));
        }
        let (p, q) = if lex_order(&points[0], &points[1]) == Ordering::Less {
            (&points[0], &points[1])
        } else {
            (&points[1], &points[0])
        };
        let e = (p.xq() - q.xq(), p.yq() - q.yq());
        let mut values = Vec::new();
        for v in 0..3 {
            let mut rows = base.clone();
            rows.push(Self::sigma_row(e.clone(), v));
            if feasible(&rows) {
                values.push(v);
            }
        }
        Ok(values)
    }
}

/// The counting score over any certificate scheme.
pub struct CertScore<P: Point, C: Certificate<P>> {
    cert: C,
    spec: ScoreSpec,
    _points: PhantomData<P>,
}

impl<P: Point, C: Certificate<P>> CertScore<P, C> {
    /// The range bound is the alphabet size: a count of distinct letters.
    pub fn new(cert: C, k: usize, m: usize) -> Result<Self> {
        let spec = ScoreSpec::new(k, m, cert.alphabet())?;
        Ok(CertScore { cert, spec, _points: PhantomData })
    }

    pub fn certificate(&self) -> &C {
        &self.cert
    }
}

impl CertScore<Point2, HalfspaceCertificate> {
    /// Planar halfspaces have certificate dimension 3 with window 7; the
    /// score takes pairs (subsets of size k = 3 - 1 = 2).
    pub fn halfspace(class: Halfspace2DClass) -> Self {
        CertScore::new(HalfspaceCertificate::new(class), 2, 7).expect("static parameters")
    }
}

impl<P: Point, C: Certificate<P>> ScoreFunction<P> for CertScore<P, C> {
    fn spec(&self) -> ScoreSpec {
        self.spec
    }

    fn floor(&self) -> u32 {
        1
    }

    fn eval(&self, u: &[LabeledExample<P>], rest: &[LabeledExample<P>]) -> Result<u32> {
        check_subset_size(u, self.spec.k)?;
        if !distinct_points(u) {
            // Collapsed subsets never arise from deduplicated histories;
            // scoring them at the range bound keeps the potential monotone
            // for arbitrary probes.
            return Ok(self.spec.c);
        }
        let points: Vec<P> = u.iter().map(|e| e.point.clone()).collect();
        let values = self.cert.realizable_values(&points, rest)?;
        Ok(values.len() as u32)
    }
}
