//! Independent verification: brute-force potentials, exhaustive goodness
//! checks over finite domains, certificate-witness search for halfspaces,
//! attackability counts, and the closed-form error bounds.
//!
//! Everything here recomputes from definitions and shares no state with the
//! incremental engines it cross-checks. The goodness checks quantify over
//! version spaces, not example sequences: a score is a function of
//! (subset, version space), so extension sets inducing the same hypothesis
//! set are equivalent and the infinite quantifier collapses to a BFS over
//! distinct version-space states. That makes the checks exhaustive over
//! extensions of every size on the given domain, with a state-count guard
//! recorded in the report.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{ConceptClass, Halfspace2DClass};
use crate::error::{Error, Result};
use crate::geometry::{feasible, lex_order, Point2};
use crate::learner::{PotentialEngine, PotentialLearner};
use crate::protocol::{ErrorTally, Label, LabeledExample, Point};
use crate::rational::{q_to_f64, Q};
use crate::scores::cert::HalfspaceCertificate;
use crate::scores::{ScoreFunction, ScoreSpec};

/// Hypothesis enumeration walks all 2^n labelings.
const MAX_ENUM_POINTS: usize = 24;

/// Version spaces are bitmasks over the enumerated hypotheses.
type Mask = u128;
const MAX_MASK_HYPOTHESES: usize = 128;

/// Outcome of one exhaustive property check, with enough detail to replay
/// the first failure by hand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: String,
    pub instance: String,
    pub verified: bool,
    /// Score evaluations performed.
    pub checked: u64,
    pub counterexample: Option<String>,
    /// The per-candidate state guard the check ran under.
    pub cap: usize,
}

impl VerificationReport {
    pub fn line(&self) -> String {
        let verdict = if self.verified { "VERIFIED" } else { "VIOLATED" };
        let mut s = format!(
            "{} [{}]: {verdict} ({} checks, state cap {})",
            self.property, self.instance, self.checked, self.cap
        );
        if let Some(cex) = &self.counterexample {
            s.push_str(": ");
            s.push_str(cex);
        }
        s
    }
}

fn summarize(
    property: &str,
    instance: &str,
    cap: usize,
    outcomes: Vec<(u64, Option<String>)>,
) -> VerificationReport {
    let checked = outcomes.iter().map(|(c, _)| c).sum();
    let counterexample = outcomes.into_iter().find_map(|(_, cex)| cex);
    VerificationReport {
        property: property.into(),
        instance: instance.into(),
        verified: counterexample.is_none(),
        checked,
        counterexample,
        cap,
    }
}

/// Every distinct labeling of `domain` induced by some concept in the
/// class, as label rows aligned with `domain`.
pub fn enumerate_hypotheses<P: Point, C: ConceptClass<P>>(
    class: &C,
    domain: &[P],
) -> Result<Vec<Vec<Label>>> {
    let n = domain.len();
    if n > MAX_ENUM_POINTS {
        return Err(Error::Domain(format!(
            "hypothesis enumeration over {n} points exceeds the cap of {MAX_ENUM_POINTS}"
        )));
    }
    for (i, p) in domain.iter().enumerate() {
        if domain[i + 1..].contains(p) {
            return Err(Error::Domain(format!("domain point {p:?} repeats")));
        }
    }
    let mut rows = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let labeled: Vec<LabeledExample<P>> = domain
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let label = if mask >> i & 1 == 1 { Label::Plus } else { Label::Minus };
                LabeledExample::new(p.clone(), label)
            })
            .collect();
        if class.realizable(&labeled)? {
            rows.push(labeled.into_iter().map(|e| e.label).collect());
        }
    }
    Ok(rows)
}

/// Leave-k-out potential computed from the definition: the sum of
/// f(U; V(S minus U)) over all k-subsets U of the history.
pub fn brute_potential<P: Point, F: ScoreFunction<P>>(
    score: &F,
    history: &[LabeledExample<P>],
) -> Result<i128> {
    let k = score.spec().k;
    if history.len() < k {
        return Ok(0);
    }
    let mut rho: i128 = 0;
    for idx in (0..history.len()).combinations(k) {
        let u: Vec<LabeledExample<P>> = idx.iter().map(|&i| history[i].clone()).collect();
        let rest: Vec<LabeledExample<P>> = history
            .iter()
            .enumerate()
            .filter(|(i, _)| !idx.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        rho += i128::from(score.eval(&u, &rest)?);
    }
    Ok(rho)
}

/// Potential drops for both candidate labels of `x`, from scratch. The
/// caller must pass an unforced `x` absent from `history`, matching the
/// engines' precondition.
pub fn brute_deltas<P: Point, F: ScoreFunction<P>>(
    score: &F,
    history: &[LabeledExample<P>],
    x: &P,
) -> Result<(i128, i128)> {
    let base = brute_potential(score, history)?;
    let mut drops = [0i128; 2];
    for (slot, label) in [Label::Plus, Label::Minus].into_iter().enumerate() {
        let mut extended = history.to_vec();
        extended.push(LabeledExample::new(x.clone(), label));
        drops[slot] = base - brute_potential(score, &extended)?;
    }
    Ok((drops[0], drops[1]))
}

fn slot(label: Label) -> usize {
    match label {
        Label::Plus => 0,
        Label::Minus => 1,
    }
}

/// label_masks[i][slot(y)] = hypotheses labeling domain[i] with y.
fn label_masks(hyps: &[Vec<Label>], n: usize) -> Result<Vec<[Mask; 2]>> {
    if hyps.len() > MAX_MASK_HYPOTHESES {
        return Err(Error::Domain(format!(
            "{} hypotheses exceed the mask width of {MAX_MASK_HYPOTHESES}",
            hyps.len()
        )));
    }
    let mut masks = vec![[0 as Mask; 2]; n];
    for (r, h) in hyps.iter().enumerate() {
        for (i, &l) in h.iter().enumerate() {
            masks[i][slot(l)] |= 1 << r;
        }
    }
    Ok(masks)
}

fn full_mask(hyps: usize) -> Mask {
    if hyps == MAX_MASK_HYPOTHESES { !0 } else { (1 << hyps) - 1 }
}

fn labeled_candidates(n: usize, k: usize) -> Vec<(Vec<usize>, Vec<Label>)> {
    let mut out = Vec::new();
    for idx in (0..n).combinations(k) {
        for bits in 0..(1u32 << k) {
            let labels: Vec<Label> = (0..k)
                .map(|j| if bits >> j & 1 == 1 { Label::Plus } else { Label::Minus })
                .collect();
            out.push((idx.clone(), labels));
        }
    }
    out
}

/// Exhaustive monotonicity and range check on a finite domain. For every
/// realizable labeled k-subset U and every version space V reachable from
/// labeled subsets of the domain and consistent with U, and every (x, y)
/// realizable with U in V, the score must satisfy
/// floor() <= f(U; V_(x->y)) <= f(U; V) <= c. Version spaces are deduplicated
/// as hypothesis bitmasks, so the walk covers extension sets of every size.
pub fn check_monotonicity<P, C, F>(
    class: &C,
    score: &F,
    domain: &[P],
    state_cap: usize,
    instance: &str,
) -> Result<VerificationReport>
where
    P: Point,
    C: ConceptClass<P>,
    F: ScoreFunction<P>,
{
    let hyps = enumerate_hypotheses(class, domain)?;
    let masks = label_masks(&hyps, domain.len())?;
    let outcomes: Result<Vec<_>> = labeled_candidates(domain.len(), score.spec().k)
        .iter()
        .map(|(idx, labels)| check_monotone_for(score, domain, &hyps, &masks, idx, labels, state_cap))
        .collect();
    Ok(summarize("monotonicity", instance, state_cap, outcomes?))
}

/// `check_monotonicity` fanned out over worker threads. Needs a shareable
/// score; the tree-backed ones are not and take the sequential path.
pub fn check_monotonicity_par<P, C, F>(
    class: &C,
    score: &F,
    domain: &[P],
    state_cap: usize,
    instance: &str,
) -> Result<VerificationReport>
where
    P: Point + Sync,
    C: ConceptClass<P>,
    F: ScoreFunction<P> + Sync,
{
    let hyps = enumerate_hypotheses(class, domain)?;
    let masks = label_masks(&hyps, domain.len())?;
    let outcomes: Result<Vec<_>> = labeled_candidates(domain.len(), score.spec().k)
        .par_iter()
        .map(|(idx, labels)| check_monotone_for(score, domain, &hyps, &masks, idx, labels, state_cap))
        .collect();
    Ok(summarize("monotonicity", instance, state_cap, outcomes?))
}

fn describe<P: Point>(examples: &[LabeledExample<P>]) -> String {
    let parts: Vec<String> =
        examples.iter().map(|e| format!("({:?}, {})", e.point, e.label)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn check_monotone_for<P: Point, F: ScoreFunction<P>>(
    score: &F,
    domain: &[P],
    hyps: &[Vec<Label>],
    masks: &[[Mask; 2]],
    u_idx: &[usize],
    u_labels: &[Label],
    state_cap: usize,
) -> Result<(u64, Option<String>)> {
    let spec = score.spec();
    let floor = score.floor();
    let full = full_mask(hyps.len());
    let u_mask =
        u_idx.iter().zip(u_labels).fold(full, |m, (&i, &l)| m & masks[i][slot(l)]);
    let mut checked = 0u64;
    if u_mask == 0 {
        return Ok((checked, None));
    }
    let u: Vec<LabeledExample<P>> = u_idx
        .iter()
        .zip(u_labels)
        .map(|(&i, &l)| LabeledExample::new(domain[i].clone(), l))
        .collect();
    let range_cex = |val: u32, rest: &[LabeledExample<P>]| {
        format!(
            "f(U; rest) = {val} outside {floor}..={} for U = {}, rest = {}",
            spec.c,
            describe(&u),
            describe(rest)
        )
    };

    let mut visited: HashSet<Mask> = HashSet::from([full]);
    let mut queue: VecDeque<(Mask, Vec<(usize, Label)>, u32)> = VecDeque::new();
    let f0 = score.eval(&u, &[])?;
    checked += 1;
    if f0 < floor || f0 > spec.c {
        return Ok((checked, Some(range_cex(f0, &[]))));
    }
    queue.push_back((full, Vec::new(), f0));

    let mut rest_buf: Vec<LabeledExample<P>> = Vec::new();
    while let Some((m, rest_rep, f_here)) = queue.pop_front() {
        for x_i in 0..domain.len() {
            if u_idx.contains(&x_i) || rest_rep.iter().any(|(i, _)| *i == x_i) {
                continue;
            }
            for y in [Label::Plus, Label::Minus] {
                let m_ext = m & masks[x_i][slot(y)];
                if m_ext & u_mask == 0 {
                    continue;
                }
                rest_buf.clear();
                rest_buf.extend(
                    rest_rep.iter().map(|&(i, l)| LabeledExample::new(domain[i].clone(), l)),
                );
                rest_buf.push(LabeledExample::new(domain[x_i].clone(), y));
                let f_ext = score.eval(&u, &rest_buf)?;
                checked += 1;
                if f_ext > f_here {
                    return Ok((
                        checked,
                        Some(format!(
                            "f rose {f_here} -> {f_ext} for U = {} when rest = {} gained ({:?}, {y})",
                            describe(&u),
                            describe(&rest_buf[..rest_buf.len() - 1]),
                            domain[x_i]
                        )),
                    ));
                }
                if f_ext < floor || f_ext > spec.c {
                    return Ok((checked, Some(range_cex(f_ext, &rest_buf))));
                }
                if visited.insert(m_ext) {
                    if visited.len() > state_cap {
                        return Err(Error::Domain(format!(
                            "monotonicity walk exceeded the state cap of {state_cap}"
                        )));
                    }
                    let mut rep = rest_rep.clone();
                    rep.push((x_i, y));
                    queue.push_back((m_ext, rep, f_ext));
                }
            }
        }
    }
    Ok((checked, None))
}

/// Exhaustive m-robustness check on a finite domain. Every window of m
/// examples labeled by an enumerated hypothesis h must contain a k-subset U
/// and a witness (x, y) such that for every h-labeled extension A of the
/// remaining window drawn from the domain, either f(U; A) drops by at least
/// one when the witness label flips, or U is unrealizable alongside the
/// flip. Extensions are deduplicated by their version-space mask and
/// flip-inconsistent states are pruned (their extensions stay inconsistent),
/// so the walk covers extensions of every size.
pub fn check_robustness<P, C, F>(
    class: &C,
    score: &F,
    domain: &[P],
    state_cap: usize,
    instance: &str,
) -> Result<VerificationReport>
where
    P: Point,
    C: ConceptClass<P>,
    F: ScoreFunction<P>,
{
    let spec = score.spec();
    let hyps = enumerate_hypotheses(class, domain)?;
    let masks = label_masks(&hyps, domain.len())?;
    let windows: Vec<Vec<usize>> = (0..domain.len()).combinations(spec.m).collect();
    let mut outcomes = Vec::with_capacity(hyps.len() * windows.len());
    for hi in 0..hyps.len() {
        for window in &windows {
            outcomes.push(check_window(score, domain, &hyps, &masks, hi, window, state_cap)?);
        }
    }
    Ok(summarize("robustness", instance, state_cap, outcomes))
}

/// `check_robustness` fanned out over worker threads; same shareability
/// caveat as `check_monotonicity_par`.
pub fn check_robustness_par<P, C, F>(
    class: &C,
    score: &F,
    domain: &[P],
    state_cap: usize,
    instance: &str,
) -> Result<VerificationReport>
where
    P: Point + Sync,
    C: ConceptClass<P>,
    F: ScoreFunction<P> + Sync,
{
    let spec = score.spec();
    let hyps = enumerate_hypotheses(class, domain)?;
    let masks = label_masks(&hyps, domain.len())?;
    let windows: Vec<Vec<usize>> = (0..domain.len()).combinations(spec.m).collect();
    let tasks: Vec<(usize, &Vec<usize>)> = (0..hyps.len()).cartesian_product(&windows).collect();
    let outcomes: Result<Vec<_>> = tasks
        .par_iter()
        .map(|&(hi, window)| check_window(score, domain, &hyps, &masks, hi, window, state_cap))
        .collect();
    Ok(summarize("robustness", instance, state_cap, outcomes?))
}

fn check_window<P: Point, F: ScoreFunction<P>>(
    score: &F,
    domain: &[P],
    hyps: &[Vec<Label>],
    masks: &[[Mask; 2]],
    hi: usize,
    window: &[usize],
    state_cap: usize,
) -> Result<(u64, Option<String>)> {
    let spec = score.spec();
    let h = &hyps[hi];
    let full = full_mask(hyps.len());
    let mut checked = 0u64;
    let example = |i: usize| LabeledExample::new(domain[i].clone(), h[i]);
    for u_pos in (0..window.len()).combinations(spec.k) {
        let u_idx: Vec<usize> = u_pos.iter().map(|&p| window[p]).collect();
        let u: Vec<LabeledExample<P>> = u_idx.iter().map(|&i| example(i)).collect();
        let u_mask = u_idx.iter().fold(full, |m, &i| m & masks[i][slot(h[i])]);
        'witness: for wit_pos in (0..window.len()).filter(|p| !u_pos.contains(p)) {
            let wit_i = window[wit_pos];
            let flipped = LabeledExample::new(domain[wit_i].clone(), h[wit_i].flip());
            let flip_mask = masks[wit_i][slot(h[wit_i].flip())];
            let base: Vec<usize> = (0..window.len())
                .filter(|p| !u_pos.contains(p) && *p != wit_pos)
                .map(|p| window[p])
                .collect();
            let m0 = base.iter().fold(full, |m, &j| m & masks[j][slot(h[j])]);
            // Masks only shrink under extension: once the flip contradicts
            // base + U, every extension passes vacuously.
            if m0 & u_mask & flip_mask == 0 {
                return Ok((checked, None));
            }
            let base_examples: Vec<LabeledExample<P>> =
                base.iter().map(|&j| example(j)).collect();
            let pool: Vec<usize> = (0..domain.len())
                .filter(|j| !base.contains(j) && *j != wit_i)
                .collect();
            let mut visited: HashSet<Mask> = HashSet::from([m0]);
            let mut queue: VecDeque<(Mask, Vec<usize>)> = VecDeque::new();
            queue.push_back((m0, Vec::new()));
            let mut a: Vec<LabeledExample<P>> = Vec::new();
            while let Some((m, pad)) = queue.pop_front() {
                a.clear();
                a.extend(base_examples.iter().cloned());
                a.extend(pad.iter().map(|&j| example(j)));
                let fa = i64::from(score.eval(&u, &a)?);
                a.push(flipped.clone());
                let fb = i64::from(score.eval(&u, &a)?);
                checked += 2;
                if fa - fb < 1 {
                    continue 'witness;
                }
                for &j in &pool {
                    let m_ext = m & masks[j][slot(h[j])];
                    if m_ext == m || !visited.insert(m_ext) {
                        continue;
                    }
                    if visited.len() > state_cap {
                        return Err(Error::Domain(format!(
                            "robustness walk exceeded the state cap of {state_cap}"
                        )));
                    }
                    if m_ext & u_mask & flip_mask == 0 {
                        continue; // vacuous from here on; extensions stay so
                    }
                    let mut ext = pad.clone();
                    ext.push(j);
                    queue.push_back((m_ext, ext));
                }
            }
            return Ok((checked, None));
        }
    }
    let labeled_window: Vec<LabeledExample<P>> = window.iter().map(|&i| example(i)).collect();
    Ok((
        checked,
        Some(format!(
            "no robust witness in window {} under hypothesis {h:?}",
            describe(&labeled_window)
        )),
    ))
}

/// Certificate witness for pinned planar halfspaces: is there a pair
/// {p, q} and a witness (x, y) inside `m_set` such that no hypothesis
/// consistent with the pin and with m_set minus the witness both realizes
/// the true pair letter and labels x with -y? `w_true` is the normal of
/// the concept that labeled `m_set`; it fixes each pair's true letter.
pub fn certifying_pair_exists(
    class: &Halfspace2DClass,
    w_true: (&Q, &Q),
    m_set: &[LabeledExample<Point2>],
) -> Result<bool> {
    for wit in 0..m_set.len() {
        let witness = &m_set[wit];
        let rest: Vec<LabeledExample<Point2>> = m_set
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != wit)
            .map(|(_, e)| e.clone())
            .collect();
        for pair in (0..rest.len()).combinations(2) {
            let (a, b) = (&rest[pair[0]].point, &rest[pair[1]].point);
            if a == b {
                continue;
            }
            let letter = HalfspaceCertificate::sigma(w_true.0, w_true.1, a, b)?;
            let (p, q) = if lex_order(a, b) == Ordering::Less { (a, b) } else { (b, a) };
            let mut rows = class.constraints(&rest);
            rows.push(HalfspaceCertificate::sigma_row(
                (p.xq() - q.xq(), p.yq() - q.yq()),
                letter,
            ));
            rows.push(Halfspace2DClass::constraint_for(&witness.point, witness.label.flip()));
            if !feasible(&rows) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// How many domain points the learner would abstain on in its current
/// state. Seen and forced points commit, so only genuinely uncertain
/// points count; this is the set a targeted adversary can still attack.
pub fn count_attackable<P: Point, E: PotentialEngine<P>>(
    learner: &mut PotentialLearner<P, E>,
    domain: &[P],
) -> Result<usize> {
    let mut n = 0;
    for x in domain {
        if learner.decide(x)?.is_abstain() {
            n += 1;
        }
    }
    Ok(n)
}

/// Worst-case committed mistakes over a horizon: c T^k / (k! alpha), exact.
pub fn mistake_bound(spec: ScoreSpec, alpha: &Q, horizon: usize) -> Result<Q> {
    if alpha <= &Q::zero() {
        return Err(Error::Domain("the mistake bound needs alpha > 0".into()));
    }
    let mut k_fact = BigInt::one();
    for i in 2..=spec.k {
        k_fact *= BigInt::from(i);
    }
    let numer = BigInt::from(spec.c) * BigInt::from(horizon).pow(spec.k as u32);
    Ok(Q::from_integer(numer) / (Q::from_integer(k_fact) * alpha))
}

fn attack_term(spec: ScoreSpec, alpha: &Q, rounds: usize) -> f64 {
    let inner = q_to_f64(alpha) + f64::from(spec.c) * (rounds as f64).powi(spec.k as i32 - 1);
    inner.powf(1.0 / spec.k as f64)
}

/// Expected i.i.d.-round abstentions: e m (alpha + c T^(k-1))^(1/k) ln T.
pub fn abstention_bound(spec: ScoreSpec, alpha: &Q, horizon: usize) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::Domain(
            "the abstention bound needs a horizon of at least 2".into(),
        ));
    }
    Ok(std::f64::consts::E
        * spec.m as f64
        * attack_term(spec, alpha, horizon)
        * (horizon as f64).ln())
}

/// Strict cap on simultaneously attackable points when histories hold at
/// most `cap` examples: e m (alpha + c cap^(k-1))^(1/k).
pub fn attackable_bound(spec: ScoreSpec, alpha: &Q, cap: usize) -> Result<f64> {
    if cap == 0 {
        return Err(Error::Domain("the attackable bound needs at least one round".into()));
    }
    Ok(std::f64::consts::E * spec.m as f64 * attack_term(spec, alpha, cap))
}

/// Whether an episode's committed mistakes respect the exact bound.
pub fn within_mistake_bound(
    tally: &ErrorTally,
    spec: ScoreSpec,
    alpha: &Q,
    horizon: usize,
) -> Result<bool> {
    Ok(Q::from_integer(BigInt::from(tally.err_mis)) <= mistake_bound(spec, alpha, horizon)?)
}
