//! Exact rational linear feasibility over (w1, w2, b).
//!
//! Everything here is exact: no floating point, ever. Feasibility is decided
//! by Fourier-Motzkin elimination with strictness propagation (combining a
//! strict with a non-strict inequality yields a strict one) and equality
//! pivoting; a feasible system always back-substitutes to a verifiable
//! rational witness.

pub mod cone;

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{Q, Rat};

pub const VARS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

/// `coeffs . (w1, w2, b) + constant REL 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: [Q; VARS],
    pub constant: Q,
    pub rel: Rel,
}

impl LinearConstraint {
    pub fn new(coeffs: [Q; VARS], rel: Rel) -> Self {
        LinearConstraint { coeffs, constant: Q::zero(), rel }
    }

    pub fn with_constant(coeffs: [Q; VARS], constant: Q, rel: Rel) -> Self {
        LinearConstraint { coeffs, constant, rel }
    }

    pub fn eval(&self, v: &[Q; VARS]) -> Q {
        let mut acc = self.constant.clone();
        for i in 0..VARS {
            acc += &self.coeffs[i] * &v[i];
        }
        acc
    }

    pub fn satisfied_by(&self, v: &[Q; VARS]) -> bool {
        let val = self.eval(v);
        match self.rel {
            Rel::Ge => !val.is_negative(),
            Rel::Gt => val.is_positive(),
            Rel::Eq => val.is_zero(),
        }
    }
}

/// Planar point with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point2 {
    pub x: Rat,
    pub y: Rat,
}

impl Point2 {
    pub fn new(x: Q, y: Q) -> Self {
        Point2 { x: Rat(x), y: Rat(y) }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point2::new(crate::rational::q_int(x), crate::rational::q_int(y))
    }

    pub fn xq(&self) -> &Q {
        &self.x.0
    }

    pub fn yq(&self) -> &Q {
        &self.y.0
    }
}

impl std::fmt::Display for Point2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Lexicographic order: first coordinate, then second.
pub fn lex_order(a: &Point2, b: &Point2) -> Ordering {
    a.xq().cmp(b.xq()).then_with(|| a.yq().cmp(b.yq()))
}

#[derive(Debug, Clone)]
struct Row {
    a: Vec<Q>,
    c: Q,
    rel: Rel,
}

impl Row {
    fn from_constraint(lc: &LinearConstraint) -> Self {
        Row { a: lc.coeffs.to_vec(), c: lc.constant.clone(), rel: lc.rel }
    }

    fn is_constant(&self) -> bool {
        self.a.iter().all(|q| q.is_zero())
    }

    fn constant_holds(&self) -> bool {
        match self.rel {
            Rel::Ge => !self.c.is_negative(),
            Rel::Gt => self.c.is_positive(),
            Rel::Eq => self.c.is_zero(),
        }
    }

    /// Scales by a positive rational so all entries are coprime integers.
    fn primitive_key(&self) -> (Vec<BigInt>, BigInt) {
        let mut denom_lcm = BigInt::from(1);
        for q in self.a.iter().chain(std::iter::once(&self.c)) {
            denom_lcm = denom_lcm.lcm(q.denom());
        }
        let scaled: Vec<BigInt> = self
            .a
            .iter()
            .chain(std::iter::once(&self.c))
            .map(|q| q.numer() * (&denom_lcm / q.denom()))
            .collect();
        let mut g = BigInt::zero();
        for v in &scaled {
            g = g.gcd(v);
        }
        if g.is_zero() {
            g = BigInt::from(1);
        }
        let mut out: Vec<BigInt> = scaled.iter().map(|v| v / &g).collect();
        let c = out.pop().expect("row has a constant");
        (out, c)
    }
}

fn combine(lo: &Row, up: &Row, var: usize) -> Row {
    // lo has a[var] > 0, up has a[var] < 0; both multipliers positive.
    let m_lo = -up.a[var].clone();
    let m_up = lo.a[var].clone();
    let a = (0..lo.a.len()).map(|i| &lo.a[i] * &m_lo + &up.a[i] * &m_up).collect();
    let c = &lo.c * &m_lo + &up.c * &m_up;
    let rel = if lo.rel == Rel::Gt || up.rel == Rel::Gt { Rel::Gt } else { Rel::Ge };
    Row { a, c, rel }
}

/// Substitutes the pivot equality into `row`, zeroing `row.a[var]`.
fn substitute(row: &Row, pivot: &Row, var: usize) -> Row {
    let factor = &row.a[var] / &pivot.a[var];
    let a = (0..row.a.len()).map(|i| &row.a[i] - &factor * &pivot.a[i]).collect();
    let c = &row.c - &factor * &pivot.c;
    Row { a, c, rel: row.rel }
}

/// Drops satisfied constant rows, detects contradictions, and deduplicates
/// parallel rows keeping the strictest inequality.
fn simplify(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut seen: HashMap<(Vec<BigInt>, BigInt, bool), usize> = HashMap::new();
    let mut out: Vec<Row> = Vec::new();
    for row in rows {
        if row.is_constant() {
            if row.constant_holds() {
                continue;
            }
            return None;
        }
        let (a, c) = row.primitive_key();
        let key = (a, c, row.rel == Rel::Eq);
        match seen.get(&key) {
            Some(&idx) => {
                if row.rel == Rel::Gt {
                    out[idx].rel = Rel::Gt;
                }
            }
            None => {
                seen.insert(key, out.len());
                out.push(row);
            }
        }
    }
    Some(out)
}

enum Level {
    Pivot { var: usize, pivot: Row },
    Bounds { var: usize, lowers: Vec<Row>, uppers: Vec<Row> },
}

/// Eliminates b first, then w2, then w1; returns the per-level records for
/// back-substitution, or None when a contradiction surfaces.
fn eliminate(constraints: &[LinearConstraint]) -> Option<Vec<Level>> {
    let mut rows: Vec<Row> = constraints.iter().map(Row::from_constraint).collect();
    rows = simplify(rows)?;
    let mut levels = Vec::with_capacity(VARS);
    for var in (0..VARS).rev() {
        if let Some(pos) = rows.iter().position(|r| r.rel == Rel::Eq && !r.a[var].is_zero()) {
            let pivot = rows.remove(pos);
            rows = rows
                .into_iter()
                .map(|r| if r.a[var].is_zero() { r } else { substitute(&r, &pivot, var) })
                .collect();
            rows = simplify(rows)?;
            levels.push(Level::Pivot { var, pivot });
            continue;
        }
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        let mut rest = Vec::new();
        for r in rows {
            match r.a[var].cmp(&Q::zero()) {
                Ordering::Greater => lowers.push(r),
                Ordering::Less => uppers.push(r),
                Ordering::Equal => rest.push(r),
            }
        }
        for lo in &lowers {
            for up in &uppers {
                rest.push(combine(lo, up, var));
            }
        }
        rows = simplify(rest)?;
        levels.push(Level::Bounds { var, lowers, uppers });
    }
    debug_assert!(rows.is_empty(), "all rows reduce to constants after full elimination");
    Some(levels)
}

/// Evaluates the non-`var` part of `row` at the partially known assignment.
fn partial_eval(row: &Row, var: usize, values: &[Option<Q>; VARS]) -> Q {
    let mut acc = row.c.clone();
    for i in 0..VARS {
        if i == var || row.a[i].is_zero() {
            continue;
        }
        let v = values[i].as_ref().expect("later-eliminated variables are already valued");
        acc += &row.a[i] * v;
    }
    acc
}

/// Feasibility with an explicit rational witness.
pub fn witness(constraints: &[LinearConstraint]) -> Option<[Q; VARS]> {
    let levels = eliminate(constraints)?;
    let mut values: [Option<Q>; VARS] = [None, None, None];
    for level in levels.iter().rev() {
        match level {
            Level::Pivot { var, pivot } => {
                let rest = partial_eval(pivot, *var, &values);
                values[*var] = Some(-rest / &pivot.a[*var]);
            }
            Level::Bounds { var, lowers, uppers } => {
                // row: a[var] * v + rest REL 0  =>  v REL' -rest / a[var].
                let mut best_lo: Option<(Q, bool)> = None;
                for r in lowers {
                    let bound = -partial_eval(r, *var, &values) / &r.a[*var];
                    let strict = r.rel == Rel::Gt;
                    best_lo = Some(match best_lo {
                        None => (bound, strict),
                        Some((b, s)) => match bound.cmp(&b) {
                            Ordering::Greater => (bound, strict),
                            Ordering::Equal => (b, s || strict),
                            Ordering::Less => (b, s),
                        },
                    });
                }
                let mut best_up: Option<(Q, bool)> = None;
                for r in uppers {
                    let bound = -partial_eval(r, *var, &values) / &r.a[*var];
                    let strict = r.rel == Rel::Gt;
                    best_up = Some(match best_up {
                        None => (bound, strict),
                        Some((b, s)) => match bound.cmp(&b) {
                            Ordering::Less => (bound, strict),
                            Ordering::Equal => (b, s || strict),
                            Ordering::Greater => (b, s),
                        },
                    });
                }
                let v = match (best_lo, best_up) {
                    (None, None) => Q::zero(),
                    (Some((l, _)), None) => l + Q::one(),
                    (None, Some((u, _))) => u - Q::one(),
                    (Some((l, ls)), Some((u, us))) => match l.cmp(&u) {
                        Ordering::Less => (&l + &u) / crate::rational::q_int(2),
                        Ordering::Equal => {
                            debug_assert!(!ls && !us, "strict pinch survives elimination");
                            l
                        }
                        Ordering::Greater => unreachable!("elimination certified feasibility"),
                    },
                };
                values[*var] = Some(v);
            }
        }
    }
    let out = [
        values[0].clone().unwrap(),
        values[1].clone().unwrap(),
        values[2].clone().unwrap(),
    ];
    debug_assert!(constraints.iter().all(|c| c.satisfied_by(&out)));
    Some(out)
}

pub fn feasible(constraints: &[LinearConstraint]) -> bool {
    witness(constraints).is_some()
}
