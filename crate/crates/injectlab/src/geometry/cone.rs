//! Exact direction cones in the plane.
//!
//! A conjunction of strict homogeneous constraints `w . d_i > 0` carves an
//! open convex cone out of direction space; as a set of directions it is an
//! open angular sector of width at most pi. Representing the sector by its
//! two boundary rays (primitive integer vectors) makes emptiness, membership,
//! and sign queries O(1) exact integer cross-product tests. Avoid division at
//! all costs.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::Point2;
use crate::rational::Q;

/// Primitive (gcd-reduced) nonzero integer direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dir {
    x: BigInt,
    y: BigInt,
}

impl Dir {
    pub fn new(x: BigInt, y: BigInt) -> Option<Dir> {
        if x.is_zero() && y.is_zero() {
            return None;
        }
        let g = x.gcd(&y);
        Some(Dir { x: x / &g, y: y / &g })
    }

    pub fn from_ints(x: i64, y: i64) -> Option<Dir> {
        Dir::new(BigInt::from(x), BigInt::from(y))
    }

    /// Direction of `p - n`, or None when the points coincide.
    pub fn from_diff(p: &Point2, n: &Point2) -> Option<Dir> {
        let dx: Q = p.xq() - n.xq();
        let dy: Q = p.yq() - n.yq();
        // Clear denominators with a positive factor; sign is preserved.
        let nx = dx.numer() * dy.denom();
        let ny = dy.numer() * dx.denom();
        Dir::new(nx, ny)
    }

    pub fn cross(&self, other: &Dir) -> BigInt {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn dot(&self, other: &Dir) -> BigInt {
        &self.x * &other.x + &self.y * &other.y
    }

    pub fn neg(&self) -> Dir {
        Dir { x: -self.x.clone(), y: -self.y.clone() }
    }

    /// Rotation by -90 degrees: boundary ray of `{w : w . self > 0}`.
    pub fn rot_cw(&self) -> Dir {
        Dir { x: self.y.clone(), y: -self.x.clone() }
    }

    /// Rotation by +90 degrees.
    pub fn rot_ccw(&self) -> Dir {
        Dir { x: -self.y.clone(), y: self.x.clone() }
    }
}

/// Open angular sector of directions, invariant width in (0, pi].
///
/// `Sector { lo, hi }` is `{w : cross(lo, w) > 0 and cross(w, hi) > 0}`,
/// the open arc running counterclockwise from `lo` to `hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cone {
    All,
    Empty,
    Sector { lo: Dir, hi: Dir },
}

impl Cone {
    pub fn is_empty(&self) -> bool {
        matches!(self, Cone::Empty)
    }

    pub fn contains(&self, v: &Dir) -> bool {
        match self {
            Cone::All => true,
            Cone::Empty => false,
            Cone::Sector { lo, hi } => lo.cross(v).is_positive() && v.cross(hi).is_positive(),
        }
    }

    /// Intersection with the open semicircle `{w : cross(a, w) > 0}`.
    pub fn intersect_cross_gt(&self, a: &Dir) -> Cone {
        match self {
            Cone::Empty => Cone::Empty,
            Cone::All => Cone::Sector { lo: a.clone(), hi: a.neg() },
            Cone::Sector { lo, hi } => {
                let c_lo = a.cross(lo);
                let c_hi = a.cross(hi);
                if c_lo.is_zero() {
                    // lo parallel to the boundary: aligned keeps the sector
                    // (width <= pi puts the interior strictly inside),
                    // anti-aligned puts the interior strictly outside.
                    return if a.dot(lo).is_positive() { self.clone() } else { Cone::Empty };
                }
                if c_hi.is_zero() {
                    return if a.dot(hi).is_positive() {
                        // hi parallel to a: interior approaches a from the
                        // outside of the semicircle.
                        Cone::Empty
                    } else {
                        // hi == -a: the semicircle's far boundary.
                        if c_lo.is_positive() { self.clone() } else { Cone::Empty }
                    };
                }
                match (c_lo.is_positive(), c_hi.is_positive()) {
                    (true, true) => self.clone(),
                    (true, false) => Cone::Sector { lo: lo.clone(), hi: a.neg() },
                    (false, true) => Cone::Sector { lo: a.clone(), hi: hi.clone() },
                    (false, false) => Cone::Empty,
                }
            }
        }
    }

    /// Intersection with `{w : w . d > 0}`.
    pub fn intersect_dot_gt(&self, d: &Dir) -> Cone {
        self.intersect_cross_gt(&d.rot_cw())
    }

    /// Does some direction in the cone satisfy `w . d > 0`?
    pub fn meets_dot_gt(&self, d: &Dir) -> bool {
        !self.intersect_dot_gt(d).is_empty()
    }

    /// Does some direction in the cone satisfy `w . d = 0`?
    pub fn meets_dot_eq(&self, d: &Dir) -> bool {
        self.contains(&d.rot_ccw()) || self.contains(&d.rot_cw())
    }

    /// Does some direction in the cone satisfy `w . d < 0`?
    pub fn meets_dot_lt(&self, d: &Dir) -> bool {
        self.meets_dot_gt(&d.neg())
    }

    /// A direction strictly inside the cone, when one exists.
    pub fn sample_dir(&self) -> Option<Dir> {
        match self {
            Cone::Empty => None,
            Cone::All => Dir::from_ints(1, 0),
            Cone::Sector { lo, hi } => {
                // lo + hi bisects sectors of width < pi; for width exactly pi
                // (hi == -lo) the sum vanishes and the perpendicular works.
                let sum = Dir::new(&lo.x + &hi.x, &lo.y + &hi.y);
                let cand = sum.unwrap_or_else(|| lo.rot_ccw());
                debug_assert!(self.contains(&cand));
                Some(cand)
            }
        }
    }
}

/// Orientation of the triple (a, b, c): Greater for counterclockwise.
pub fn orient(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    let abx: Q = b.xq() - a.xq();
    let aby: Q = b.yq() - a.yq();
    let acx: Q = c.xq() - a.xq();
    let acy: Q = c.yq() - a.yq();
    (&abx * &acy).cmp(&(&aby * &acx))
}

/// Monotone-chain convex hull over lex-sorted distinct points; returns
/// counterclockwise indices into the input, excluding interior collinear
/// points.
pub fn convex_hull_indices(sorted: &[Point2]) -> Vec<u32> {
    let n = sorted.len();
    debug_assert!(
        sorted.windows(2).all(|w| super::lex_order(&w[0], &w[1]) == Ordering::Less),
        "points must be lex-sorted and distinct"
    );
    if n <= 2 {
        return (0..n as u32).collect();
    }
    let mut lower: Vec<u32> = Vec::new();
    for i in 0..n {
        while lower.len() >= 2 {
            let a = &sorted[lower[lower.len() - 2] as usize];
            let b = &sorted[lower[lower.len() - 1] as usize];
            if orient(a, b, &sorted[i]) == Ordering::Greater {
                break;
            }
            lower.pop();
        }
        lower.push(i as u32);
    }
    let mut upper: Vec<u32> = Vec::new();
    for i in (0..n).rev() {
        while upper.len() >= 2 {
            let a = &sorted[upper[upper.len() - 2] as usize];
            let b = &sorted[upper[upper.len() - 1] as usize];
            if orient(a, b, &sorted[i]) == Ordering::Greater {
                break;
            }
            upper.pop();
        }
        upper.push(i as u32);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
