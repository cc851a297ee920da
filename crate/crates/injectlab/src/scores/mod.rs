//! Leave-k-out score functions.
//!
//! A score assigns a small nonnegative integer f(U; V(rest)) to a k-subset U
//! of labeled examples given the version space of the remaining history. The
//! learner sums scores over all k-subsets into a potential whose drop under
//! a candidate label drives the predict-or-abstain rule. Each score declares
//! the (m, c, k) parameters it is good for; the verification oracle checks
//! goodness exhaustively on small instances.

pub mod cert;
pub mod rect;
pub mod seg;
pub mod transcript;

pub use cert::{CertScore, Certificate, HalfspaceCertificate};
pub use rect::RectScore;
pub use seg::{RelabeledSegScore, SegScore};
pub use transcript::TranscriptScore;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{LabeledExample, Point};

/// Goodness parameters: the score takes subsets of size `k`, values in
/// 0..=c, and is m-robust on windows of size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSpec {
    pub k: usize,
    pub m: usize,
    pub c: u32,
}

impl ScoreSpec {
    pub fn new(k: usize, m: usize, c: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("subset size k must be at least 1".into()));
        }
        if m < k {
            return Err(Error::Config(format!("window m = {m} smaller than subset size k = {k}")));
        }
        Ok(ScoreSpec { k, m, c })
    }
}

pub trait ScoreFunction<P: Point> {
    fn spec(&self) -> ScoreSpec;

    /// The smallest value `eval` can return; scores that count nonempty sets
    /// of realizable values have floor 1, counting scores have floor 0.
    fn floor(&self) -> u32 {
        0
    }

    /// f(u; V(rest)). `u` must hold exactly `spec().k` examples and the
    /// score-specific realizability precondition must hold, else
    /// `Error::Precondition`.
    fn eval(&self, u: &[LabeledExample<P>], rest: &[LabeledExample<P>]) -> Result<u32>;
}

pub(crate) fn check_subset_size<P: Point>(u: &[LabeledExample<P>], k: usize) -> Result<()> {
    if u.len() != k {
        return Err(Error::Precondition(format!(
            "score takes subsets of size {k}, got {}",
            u.len()
        )));
    }
    Ok(())
}

/// Whether the subset's points are pairwise distinct. Histories are
/// deduplicated so engines never build collapsed subsets, but oracle probes
/// may; counting scores return the full range bound on them.
pub(crate) fn distinct_points<P: Point>(u: &[LabeledExample<P>]) -> bool {
    u.iter()
        .enumerate()
        .all(|(i, a)| u[i + 1..].iter().all(|b| a.point != b.point))
}
