//! The acceptance battery and the re-runnable verification suite.
//!
//! Ten criteria, each reporting one pass/fail line: exact mistake ceilings
//! across a battery of small sweeps, exhaustive goodness checks for the
//! rectangle and segment scores, certificate search over seeded halfspace
//! windows, engine-versus-enumeration potential agreement, the hard-tree
//! lower bound, two scaling sweeps, the abstention ceiling, and attackable
//! point counts. Everything is seeded, so reruns reproduce the verdicts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use itertools::Itertools;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{PoolPolicy, Schedule};
use crate::classes::tree::uniform_tree;
use crate::classes::{
    ConceptClass, Halfspace2DClass, NodeId, RectPoint, RectangleClass, TreeOrderClass,
};
use crate::error::Result;
use crate::geometry::Point2;
use crate::learner::{
    AlphaRule, CertArcEngine, Learner, PotentialEngine, PotentialLearner, RectEngine, SegEngine,
};
use crate::oracle::{
    abstention_bound, attackable_bound, brute_deltas, brute_potential, certifying_pair_exists,
    check_monotonicity, check_monotonicity_par, check_robustness, check_robustness_par,
    count_attackable, within_mistake_bound, VerificationReport,
};
use crate::protocol::{ErrorTally, Label, LabeledExample, Point};
use crate::rational::{parse_q, q, q_int, Rat, Q};
use crate::scores::{CertScore, RectScore, ScoreFunction, ScoreSpec, SegScore};

use super::{
    fit_scaling, hard_tree_lower_bound, mean_ci, rect_point, run_sweep, summarize_rows,
    AlphaConfig, ExperimentConfig, HalfspaceLearnerKind, HalfspaceSetup, HardTreeSetup,
    InjectionConfig, LearnerKind, RectSetup, Setup, TreeSetup,
};

/// One acceptance criterion's verdict.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[accept] C{} {}: {} ({}, {:.1}s)",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.details,
            self.seconds
        )
    }
}

fn timed(
    id: usize,
    name: &'static str,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let (passed, details) = body()?;
    Ok(CriterionOutcome { id, name, passed, details, seconds: started.elapsed().as_secs_f64() })
}

/// Run the whole battery in order, printing each line as it lands.
pub fn run_all() -> Result<Vec<CriterionOutcome>> {
    let battery: [fn() -> Result<CriterionOutcome>; 10] = [
        criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7,
        criterion8, criterion9, criterion10,
    ];
    let mut outcomes = Vec::with_capacity(battery.len());
    for run in battery {
        let outcome = run()?;
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// C1: every episode in a battery of small sweeps (both geometries, both
/// injection modes, all potential learners) stays within the exact mistake
/// ceiling c T^k / (k! alpha). Zero tolerance.
pub fn criterion1() -> Result<CriterionOutcome> {
    timed(1, "mistake ceiling", || {
        let mut episodes = 0usize;
        for config in mistake_battery() {
            let spec = config.score_spec().expect("battery learners all carry a spec");
            let rows = run_sweep(&config, false)?;
            for row in &rows {
                episodes += 1;
                let alpha = parse_q(&row.alpha)?;
                let t = ErrorTally { err_mis: row.err_mis, err_abs: row.err_abs };
                if !within_mistake_bound(&t, spec, &alpha, row.horizon)? {
                    return Ok((
                        false,
                        format!(
                            "{}: T={} trial {} committed {} mistakes, over the ceiling",
                            config.name, row.horizon, row.trial, row.err_mis
                        ),
                    ));
                }
            }
        }
        Ok((
            true,
            format!("{episodes} episodes, every committed-mistake count within the ceiling"),
        ))
    })
}

/// C2: the rectangle score is good (monotone and robust) over the full
/// half-integer 4x4 grid in d=2, quantifying over every extension set.
pub fn criterion2() -> Result<CriterionOutcome> {
    timed(2, "rectangle score goodness", || {
        let (mono, robust) = rect_goodness(2, &half_integer_axis(), 200_000)?;
        goodness_verdict(&mono, &robust)
    })
}

/// C3: the segment score is good on a three-level branching-3 tree,
/// again over every extension set.
pub fn criterion3() -> Result<CriterionOutcome> {
    timed(3, "segment score goodness", || {
        let (mono, robust) = seg_goodness(2, 3, true, 200_000)?;
        goodness_verdict(&mono, &robust)
    })
}

/// C4: every seeded halfspace window admits a certifying pair.
pub fn criterion4() -> Result<CriterionOutcome> {
    timed(4, "halfspace certificates", || {
        let (done, total, failure) = halfspace_certificates(200, 0xC4)?;
        match failure {
            Some(f) => Ok((false, f)),
            None => Ok((true, format!("{done}/{total} seeded windows admit a certifying pair"))),
        }
    })
}

/// C5: incremental engines agree exactly with leave-k-out enumeration on
/// every history prefix and on label drops at an unforced probe point.
pub fn criterion5() -> Result<CriterionOutcome> {
    timed(5, "engine/enumeration agreement", || {
        let (histories, comparisons, mismatch) = potential_equality(150, 150, 100, 100, 0xC5)?;
        match mismatch {
            Some(m) => Ok((false, m)),
            None => Ok((
                true,
                format!("{histories} histories, {comparisons} exact prefix and delta comparisons"),
            )),
        }
    })
}

/// C6: on the hard tree instance every learner, including the potential
/// one, pays at least 0.1 sqrt(T) combined errors on average.
pub fn criterion6() -> Result<CriterionOutcome> {
    timed(6, "hard-tree lower bound", || {
        let outcomes = hard_tree_lower_bound(400, 200, 0xC6)?;
        let passed = outcomes.iter().all(|o| o.forced);
        let details = outcomes
            .iter()
            .map(|o| {
                format!("{} mean {:.2} (threshold {:.2})", o.learner, o.mean_combined, o.threshold)
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok((passed, details))
    })
}

/// C7: rectangle sweeps over T in {256..2048} respect both ceilings at
/// every horizon and the combined error grows no faster than T^0.7,
/// with and without scheduled injections.
pub fn criterion7() -> Result<CriterionOutcome> {
    timed(7, "rectangle scaling", || {
        let (iid_ok, iid_note) = scaling_check(&rect_scaling_config(false), 0.7)?;
        let (inj_ok, inj_note) = scaling_check(&rect_scaling_config(true), 0.7)?;
        Ok((iid_ok && inj_ok, format!("iid {iid_note}; injected {inj_note}")))
    })
}

/// C8: the bootstrapped halfspace learner respects its k=2 ceilings and its
/// combined error grows no faster than T^0.85.
pub fn criterion8() -> Result<CriterionOutcome> {
    timed(8, "halfspace scaling", || scaling_check(&halfspace_scaling_config(), 0.85))
}

/// C9: mean abstentions on a 121-node tree at alpha = 32, T = 1024 stay
/// under the expected-abstention ceiling, confidence interval included.
pub fn criterion9() -> Result<CriterionOutcome> {
    timed(9, "abstention ceiling", || {
        let rows = run_sweep(&tree_abstention_config(), false)?;
        let values: Vec<f64> = rows.iter().map(|r| r.err_abs as f64).collect();
        let (mean, ci) = mean_ci(&values);
        let bound = abstention_bound(ScoreSpec { k: 1, m: 3, c: 1 }, &q_int(32), 1024)?;
        let passed = mean <= bound && ci.1 < bound;
        Ok((
            passed,
            format!("mean abstentions {mean:.2}, ci95 upper {:.2}, ceiling {bound:.2}", ci.1),
        ))
    })
}

/// C10: for every frozen learner state in the bundled suite, the number of
/// attackable points respects e m (alpha + c n^(k-1))^(1/k).
pub fn criterion10() -> Result<CriterionOutcome> {
    timed(10, "attackability ceiling", || {
        let suite = load_suite(&bundled_suite_path())?;
        let mut notes = Vec::new();
        let mut all = true;
        for check in &suite.checks {
            if let VerifyCheck::Attackable { instances } = check {
                for inst in instances {
                    let (name, count, bound, ok) = run_attackable(inst)?;
                    all &= ok;
                    notes.push(format!(
                        "{name}: {count} <= {bound:.2}{}",
                        if ok { "" } else { " VIOLATED" }
                    ));
                }
            }
        }
        if notes.is_empty() {
            return Ok((false, "the bundled suite has no attackability instances".into()));
        }
        Ok((all, notes.join("; ")))
    })
}

/// The C1 sweep battery: small horizons, mixed geometries, learners, and
/// injection patterns.
fn mistake_battery() -> Vec<ExperimentConfig> {
    vec![
        ExperimentConfig {
            name: "rect1-iid".into(),
            horizons: vec![16, 64, 256],
            trials: 20,
            seed: 0xC101,
            out: None,
            setup: Setup::Rectangle(RectSetup {
                dim: 1,
                threshold: vec![Rat::from(q(7, 2))],
                support: (1..=6).map(|i| vec![Rat::from(q_int(i))]).collect(),
                weights: None,
                alpha: AlphaConfig::Fixed { value: Rat::from(q_int(2)) },
                injection: InjectionConfig::Iid,
            }),
        },
        ExperimentConfig {
            name: "rect2-injected".into(),
            horizons: vec![16, 64, 256],
            trials: 20,
            seed: 0xC102,
            out: None,
            setup: Setup::Rectangle(RectSetup {
                dim: 2,
                threshold: vec![Rat::from(q(5, 2)), Rat::from(q(7, 2))],
                support: (1..=4)
                    .flat_map(|i| {
                        (1..=4).map(move |j| vec![Rat::from(q_int(i)), Rat::from(q_int(j))])
                    })
                    .collect(),
                weights: None,
                alpha: AlphaConfig::Auto,
                injection: InjectionConfig::Schedule {
                    schedule: Schedule::Alternating,
                    pool: vec![
                        vec![Rat::from(q_int(2)), Rat::from(q_int(3))],
                        vec![Rat::from(q_int(3)), Rat::from(q_int(4))],
                    ],
                    policy: PoolPolicy::Cycle,
                },
            }),
        },
        ExperimentConfig {
            name: "tree-seg-iid".into(),
            horizons: vec![16, 64],
            trials: 20,
            seed: 0xC103,
            out: None,
            setup: Setup::Tree(TreeSetup {
                levels: 2,
                branching: 3,
                includes_empty: true,
                segment_end: Some(4),
                support: None,
                weights: None,
                learner: LearnerKind::Potential,
                alpha: AlphaConfig::Fixed { value: Rat::from(q_int(3)) },
                injection: InjectionConfig::Iid,
            }),
        },
        ExperimentConfig {
            name: "tree-seg-injected".into(),
            horizons: vec![64, 128],
            trials: 20,
            seed: 0xC104,
            out: None,
            setup: Setup::Tree(TreeSetup {
                levels: 2,
                branching: 3,
                includes_empty: true,
                segment_end: None,
                support: None,
                weights: None,
                learner: LearnerKind::Potential,
                alpha: AlphaConfig::Auto,
                injection: InjectionConfig::Schedule {
                    schedule: Schedule::EveryKth { k: 3 },
                    pool: vec![0, 4, 12],
                    policy: PoolPolicy::Cycle,
                },
            }),
        },
        ExperimentConfig {
            name: "halfspace-bootstrap".into(),
            horizons: vec![16, 64],
            trials: 10,
            seed: 0xC105,
            out: None,
            setup: Setup::Halfspace(HalfspaceSetup {
                pin: None,
                concept: (Rat::from(q_int(1)), Rat::from(q_int(1)), Rat::from(q_int(0))),
                support: small_halfspace_support(),
                weights: None,
                learner: HalfspaceLearnerKind::Bootstrap,
                alpha: AlphaConfig::Auto,
                injection: InjectionConfig::Iid,
            }),
        },
        ExperimentConfig {
            name: "halfspace-cert-arc".into(),
            horizons: vec![16, 64],
            trials: 10,
            seed: 0xC106,
            out: None,
            setup: Setup::Halfspace(HalfspaceSetup {
                pin: Some((Point2::from_ints(2, 2), Point2::from_ints(-3, -3))),
                concept: (Rat::from(q_int(1)), Rat::from(q_int(1)), Rat::from(q_int(0))),
                support: small_halfspace_support(),
                weights: None,
                learner: HalfspaceLearnerKind::CertArc,
                alpha: AlphaConfig::Fixed { value: Rat::from(q_int(5)) },
                injection: InjectionConfig::Iid,
            }),
        },
        ExperimentConfig {
            name: "hard-tree-potential".into(),
            horizons: vec![100],
            trials: 20,
            seed: 0xC107,
            out: None,
            setup: Setup::HardTree(HardTreeSetup {
                learner: LearnerKind::Potential,
                alpha: AlphaConfig::Auto,
            }),
        },
    ]
}

fn small_halfspace_support() -> Vec<Point2> {
    [(2, 1), (1, 3), (-1, 2), (3, -1), (-2, -1), (1, -2), (-3, 1), (0, 2), (2, -3), (-1, -1), (4, 1), (-2, 3)]
        .into_iter()
        .map(|(x, y)| Point2::from_ints(x, y))
        .collect()
}

fn half_integer_axis() -> Vec<Rat> {
    (0..4).map(|i| Rat::from(q(2 * i + 1, 2))).collect()
}

fn rect_domain(dim: usize, axis: &[Rat]) -> Vec<RectPoint> {
    (0..dim)
        .map(|_| axis.iter().map(|r| r.as_q().clone()))
        .multi_cartesian_product()
        .collect()
}

/// Exhaustive goodness of the rectangle score over a coordinate grid.
pub fn rect_goodness(
    dim: usize,
    axis: &[Rat],
    state_cap: usize,
) -> Result<(VerificationReport, VerificationReport)> {
    let class = RectangleClass::new(dim)?;
    let score = RectScore::new(class.clone());
    let domain = rect_domain(dim, axis);
    let instance = format!("rectangles d={dim} on {} grid points", domain.len());
    let mono = check_monotonicity_par(&class, &score, &domain, state_cap, &instance)?;
    let robust = check_robustness_par(&class, &score, &domain, state_cap, &instance)?;
    Ok((mono, robust))
}

/// Exhaustive goodness of the segment score on a uniform tree. Sequential:
/// the tree is shared through `Rc`.
pub fn seg_goodness(
    levels: u32,
    branching: u32,
    includes_empty: bool,
    state_cap: usize,
) -> Result<(VerificationReport, VerificationReport)> {
    let tree = uniform_tree(levels, branching);
    let n = tree.borrow().len();
    let class = TreeOrderClass::new(tree, includes_empty);
    let score = SegScore::new(class.clone());
    let domain: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
    let instance = format!("segments of a branching-{branching} tree on {n} nodes");
    let mono = check_monotonicity(&class, &score, &domain, state_cap, &instance)?;
    let robust = check_robustness(&class, &score, &domain, state_cap, &instance)?;
    Ok((mono, robust))
}

fn goodness_verdict(
    mono: &VerificationReport,
    robust: &VerificationReport,
) -> Result<(bool, String)> {
    let passed = mono.verified && robust.verified;
    let details = if passed {
        format!(
            "monotonicity {} checks and robustness {} checks over every extension set",
            mono.checked, robust.checked
        )
    } else {
        format!("{}; {}", mono.line(), robust.line())
    };
    Ok((passed, details))
}

/// Search seeded halfspace instances (random concept, boundary pin, seven
/// labeled points) for certifying pairs. Returns (successes, total, first
/// failure).
pub fn halfspace_certificates(
    instances: usize,
    seed: u64,
) -> Result<(usize, usize, Option<String>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut done = 0;
    for i in 0..instances {
        let (w1, w2, b) = random_halfspace_concept(&mut rng);
        let (plus, minus) = boundary_pin(&w1, &w2, &b);
        let class = Halfspace2DClass::pinned(plus, minus)?;
        let m_set: Vec<LabeledExample<Point2>> = random_points(&mut rng, 7, -8, 8)
            .into_iter()
            .map(|p| {
                let y = Halfspace2DClass::label_of(&w1, &w2, &b, &p);
                LabeledExample::new(p, y)
            })
            .collect();
        if !certifying_pair_exists(&class, (&w1, &w2), &m_set)? {
            return Ok((
                done,
                instances,
                Some(format!("window {i}: no certifying pair for concept ({w1}, {w2}, {b})")),
            ));
        }
        done += 1;
    }
    Ok((done, instances, None))
}

fn rand_q(rng: &mut ChaCha12Rng, lo: i64, hi: i64) -> Q {
    let den = *[1i64, 2, 4].choose(rng).expect("nonempty");
    q(rng.gen_range(lo * den..=hi * den), den)
}

fn random_halfspace_concept(rng: &mut ChaCha12Rng) -> (Q, Q, Q) {
    loop {
        let w1 = rand_q(rng, -5, 5);
        let w2 = rand_q(rng, -5, 5);
        if w1.is_zero() && w2.is_zero() {
            continue;
        }
        let b = rand_q(rng, -4, 4);
        return (w1, w2, b);
    }
}

/// A pin one normal-length on either side of a boundary point of the
/// concept: both dot products land strictly off the threshold.
fn boundary_pin(w1: &Q, w2: &Q, b: &Q) -> (Point2, Point2) {
    let x0 = if !w1.is_zero() { (b / w1, Q::zero()) } else { (Q::zero(), b / w2) };
    let plus = Point2::new(&x0.0 + w1, &x0.1 + w2);
    let minus = Point2::new(&x0.0 - w1, &x0.1 - w2);
    (plus, minus)
}

fn random_points(rng: &mut ChaCha12Rng, n: usize, lo: i64, hi: i64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point2::new(rand_q(rng, lo, hi), rand_q(rng, lo, hi));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

/// Compare an engine against enumeration on every prefix of a history, then
/// on the label drops at an unforced probe point.
fn compare_engine<P, E, F>(
    engine: &mut E,
    score: &F,
    history: &[LabeledExample<P>],
    probe: Option<&P>,
) -> Result<(u64, Option<String>)>
where
    P: Point,
    E: PotentialEngine<P>,
    F: ScoreFunction<P>,
{
    let mut comparisons = 0u64;
    for (i, e) in history.iter().enumerate() {
        engine.apply(&e.point, e.label)?;
        let brute = brute_potential(score, &history[..=i])?;
        comparisons += 1;
        if engine.potential() != brute {
            return Ok((
                comparisons,
                Some(format!(
                    "potential diverged after {} examples: engine {}, enumeration {}",
                    i + 1,
                    engine.potential(),
                    brute
                )),
            ));
        }
    }
    if let Some(x) = probe {
        let fast = engine.deltas(x)?;
        let slow = brute_deltas(score, history, x)?;
        comparisons += 1;
        if fast != slow {
            return Ok((
                comparisons,
                Some(format!("deltas diverged at {x:?}: engine {fast:?}, enumeration {slow:?}")),
            ));
        }
    }
    Ok((comparisons, None))
}

/// First candidate that is absent from the history and unforced there.
fn unforced_probe<P: Point, C: ConceptClass<P>>(
    class: &C,
    history: &[LabeledExample<P>],
    candidates: Vec<P>,
) -> Result<Option<P>> {
    for x in candidates {
        if history.iter().any(|e| e.point == x) {
            continue;
        }
        if class.forced_label(history, &x)?.is_none() {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Engine-versus-enumeration agreement across all four engines. Returns
/// (histories, comparisons, first mismatch).
pub fn potential_equality(
    rect1: usize,
    rect2: usize,
    seg: usize,
    cert: usize,
    seed: u64,
) -> Result<(usize, u64, Option<String>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut comparisons = 0u64;
    let mut histories = 0usize;
    for (dim, count) in [(1usize, rect1), (2usize, rect2)] {
        let (c, mismatch) = rect_equality(&mut rng, dim, count)?;
        comparisons += c;
        histories += count;
        if mismatch.is_some() {
            return Ok((histories, comparisons, mismatch));
        }
    }
    let (c, mismatch) = seg_equality(&mut rng, seg)?;
    comparisons += c;
    histories += seg;
    if mismatch.is_some() {
        return Ok((histories, comparisons, mismatch));
    }
    let (c, mismatch) = cert_equality(&mut rng, cert)?;
    comparisons += c;
    histories += cert;
    if mismatch.is_some() {
        return Ok((histories, comparisons, mismatch));
    }
    Ok((histories, comparisons, None))
}

fn rect_equality(rng: &mut ChaCha12Rng, dim: usize, count: usize) -> Result<(u64, Option<String>)> {
    let class = RectangleClass::new(dim)?;
    let mut total = 0u64;
    for i in 0..count {
        let threshold: Vec<Q> = (0..dim).map(|_| rand_q(rng, 0, 12)).collect();
        let size = rng.gen_range(0..=12usize);
        let mut points: Vec<RectPoint> = Vec::with_capacity(size);
        while points.len() < size {
            let p: RectPoint = (0..dim).map(|_| rand_q(rng, 0, 12)).collect();
            if !points.contains(&p) {
                points.push(p);
            }
        }
        let history: Vec<LabeledExample<RectPoint>> = points
            .iter()
            .map(|p| LabeledExample::new(p.clone(), RectangleClass::label_of(&threshold, p)))
            .collect();
        let candidates: Vec<RectPoint> =
            (0..40).map(|_| (0..dim).map(|_| rand_q(rng, 0, 12)).collect()).collect();
        let probe = unforced_probe(&class, &history, candidates)?;
        let mut engine = RectEngine::new(class.clone());
        let score = RectScore::new(class.clone());
        let (c, mismatch) = compare_engine(&mut engine, &score, &history, probe.as_ref())?;
        total += c;
        if let Some(m) = mismatch {
            return Ok((total, Some(format!("rectangles d={dim}, history {i}: {m}"))));
        }
    }
    Ok((total, None))
}

fn seg_equality(rng: &mut ChaCha12Rng, count: usize) -> Result<(u64, Option<String>)> {
    let tree = uniform_tree(2, 3);
    let n = tree.borrow().len() as u32;
    let class = TreeOrderClass::new(tree.clone(), true);
    let mut total = 0u64;
    for i in 0..count {
        // Concept: the empty segment or the root segment ending at a node.
        let end = match rng.gen_range(0..=n) {
            v if v == n => None,
            v => Some(NodeId(v)),
        };
        let size = rng.gen_range(0..=10usize);
        let mut nodes: Vec<NodeId> = (0..n).map(NodeId).collect();
        nodes.shuffle(rng);
        let history: Vec<LabeledExample<NodeId>> = nodes[..size]
            .iter()
            .map(|&x| {
                TreeOrderClass::label_of(&tree.borrow(), end, x)
                    .map(|y| LabeledExample::new(x, y))
            })
            .collect::<Result<_>>()?;
        let probe = unforced_probe(&class, &history, nodes[size..].to_vec())?;
        let mut engine = SegEngine::new(class.clone());
        let score = SegScore::new(class.clone());
        let (c, mismatch) = compare_engine(&mut engine, &score, &history, probe.as_ref())?;
        total += c;
        if let Some(m) = mismatch {
            return Ok((total, Some(format!("tree segments, history {i}: {m}"))));
        }
    }
    Ok((total, None))
}

fn cert_equality(rng: &mut ChaCha12Rng, count: usize) -> Result<(u64, Option<String>)> {
    let mut total = 0u64;
    for i in 0..count {
        let (w1, w2, b) = random_halfspace_concept(rng);
        let (plus, minus) = boundary_pin(&w1, &w2, &b);
        let class = Halfspace2DClass::pinned(plus, minus)?;
        let size = rng.gen_range(0..=10usize);
        let history: Vec<LabeledExample<Point2>> = random_points(rng, size, -8, 8)
            .into_iter()
            .map(|p| {
                let y = Halfspace2DClass::label_of(&w1, &w2, &b, &p);
                LabeledExample::new(p, y)
            })
            .collect();
        let candidates = random_points(rng, 25, -8, 8);
        let probe = unforced_probe(&class, &history, candidates)?;
        let mut engine = CertArcEngine::new(class.clone())?;
        let score = CertScore::halfspace(class.clone());
        let (c, mismatch) = compare_engine(&mut engine, &score, &history, probe.as_ref())?;
        total += c;
        if let Some(m) = mismatch {
            return Ok((total, Some(format!("halfspace certificates, history {i}: {m}"))));
        }
    }
    Ok((total, None))
}

/// Run a sweep, require both ceilings at every horizon, and fit the growth
/// exponent of the combined error.
fn scaling_check(config: &ExperimentConfig, max_exponent: f64) -> Result<(bool, String)> {
    let rows = run_sweep(config, false)?;
    let summaries = summarize_rows(&rows, config.score_spec())?;
    let bounds_ok = summaries
        .iter()
        .all(|s| s.mistakes_ok != Some(false) && s.bound_ok != Some(false));
    let fit = fit_scaling(&rows)?;
    let ok = bounds_ok && fit.exponent <= max_exponent;
    Ok((
        ok,
        format!(
            "exponent {:.3} (cap {max_exponent}), bounds {}",
            fit.exponent,
            if bounds_ok { "respected" } else { "violated" }
        ),
    ))
}

/// The C7 sweep: a 32x32 grid threshold class, iid or with a scheduled
/// pool that straddles the threshold corner.
pub fn rect_scaling_config(inject: bool) -> ExperimentConfig {
    let support: Vec<Vec<Rat>> = (1..=32)
        .flat_map(|i| (1..=32).map(move |j| vec![Rat::from(q_int(i)), Rat::from(q_int(j))]))
        .collect();
    let injection = if inject {
        InjectionConfig::Schedule {
            schedule: Schedule::Alternating,
            pool: vec![
                vec![Rat::from(q_int(16)), Rat::from(q_int(16))],
                vec![Rat::from(q_int(17)), Rat::from(q_int(17))],
                vec![Rat::from(q_int(16)), Rat::from(q_int(17))],
                vec![Rat::from(q_int(17)), Rat::from(q_int(16))],
            ],
            policy: PoolPolicy::Cycle,
        }
    } else {
        InjectionConfig::Iid
    };
    ExperimentConfig {
        name: if inject { "rect-scaling-injected" } else { "rect-scaling-iid" }.into(),
        horizons: vec![256, 512, 1024, 2048],
        trials: 100,
        seed: if inject { 0xC7B } else { 0xC7A },
        out: None,
        setup: Setup::Rectangle(RectSetup {
            dim: 2,
            threshold: vec![Rat::from(q(33, 2)), Rat::from(q(33, 2))],
            support,
            weights: None,
            alpha: AlphaConfig::Auto,
            injection,
        }),
    }
}

/// The C8 sweep: the bootstrapped halfspace learner over a finite weighted
/// pool (repeats dedup out of the history, keeping realizability cheap).
pub fn halfspace_scaling_config() -> ExperimentConfig {
    let mut support: Vec<Point2> =
        (-3i64..=3).flat_map(|i| (-2i64..=2).map(move |j| Point2::from_ints(i, j))).collect();
    support.truncate(28);
    let weights: Vec<f64> = (0..support.len()).map(|w| 1.0 + (w % 3) as f64).collect();
    ExperimentConfig {
        name: "halfspace-scaling".into(),
        horizons: vec![128, 256, 512, 1024],
        trials: 50,
        seed: 0xC8,
        out: None,
        setup: Setup::Halfspace(HalfspaceSetup {
            pin: None,
            concept: (Rat::from(q_int(1)), Rat::from(q_int(2)), Rat::from(q_int(-1))),
            support,
            weights: Some(weights),
            learner: HalfspaceLearnerKind::Bootstrap,
            alpha: AlphaConfig::Auto,
            injection: InjectionConfig::Iid,
        }),
    }
}

/// The C9 sweep: a 121-node tree at a fixed threshold.
pub fn tree_abstention_config() -> ExperimentConfig {
    ExperimentConfig {
        name: "tree-abstention".into(),
        horizons: vec![1024],
        trials: 500,
        seed: 0xC9,
        out: None,
        setup: Setup::Tree(TreeSetup {
            levels: 4,
            branching: 3,
            includes_empty: true,
            segment_end: Some(7),
            support: None,
            weights: None,
            learner: LearnerKind::Potential,
            alpha: AlphaConfig::Fixed { value: Rat::from(q_int(32)) },
            injection: InjectionConfig::Iid,
        }),
    }
}

/// The re-runnable verification suite: a JSON list of checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySuite {
    pub checks: Vec<VerifyCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum VerifyCheck {
    RectGoodness { dim: usize, axis: Vec<Rat>, state_cap: usize },
    SegGoodness { levels: u32, branching: u32, includes_empty: bool, state_cap: usize },
    HalfspaceCertificates { instances: usize, seed: u64 },
    PotentialEquality { rect1: usize, rect2: usize, seg: usize, cert: usize, seed: u64 },
    Attackable { instances: Vec<AttackableInstance> },
}

/// A frozen learner state whose attackable-point count must respect
/// e m (alpha + c n^(k-1))^(1/k), n being the number of observed examples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackableInstance {
    Rect { dim: usize, history: Vec<(Vec<Rat>, i8)>, domain: Vec<Vec<Rat>>, alpha: Rat },
    Tree { levels: u32, branching: u32, includes_empty: bool, history: Vec<(u32, i8)>, alpha: Rat },
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[verify] {}: {} ({})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.details
        )
    }
}

pub fn bundled_suite_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/verify_suite.json")
}

pub fn load_suite(path: &Path) -> Result<VerifySuite> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn run_check(check: &VerifyCheck) -> Result<CheckOutcome> {
    match check {
        VerifyCheck::RectGoodness { dim, axis, state_cap } => {
            let (mono, robust) = rect_goodness(*dim, axis, *state_cap)?;
            let (passed, details) = goodness_verdict(&mono, &robust)?;
            Ok(CheckOutcome { name: format!("rect-goodness-d{dim}"), passed, details })
        }
        VerifyCheck::SegGoodness { levels, branching, includes_empty, state_cap } => {
            let (mono, robust) = seg_goodness(*levels, *branching, *includes_empty, *state_cap)?;
            let (passed, details) = goodness_verdict(&mono, &robust)?;
            Ok(CheckOutcome { name: format!("seg-goodness-{levels}x{branching}"), passed, details })
        }
        VerifyCheck::HalfspaceCertificates { instances, seed } => {
            let (done, total, failure) = halfspace_certificates(*instances, *seed)?;
            Ok(CheckOutcome {
                name: "halfspace-certificates".into(),
                passed: failure.is_none(),
                details: failure.unwrap_or_else(|| format!("{done}/{total} windows certified")),
            })
        }
        VerifyCheck::PotentialEquality { rect1, rect2, seg, cert, seed } => {
            let (histories, comparisons, mismatch) =
                potential_equality(*rect1, *rect2, *seg, *cert, *seed)?;
            Ok(CheckOutcome {
                name: "potential-equality".into(),
                passed: mismatch.is_none(),
                details: mismatch
                    .unwrap_or_else(|| format!("{histories} histories, {comparisons} comparisons")),
            })
        }
        VerifyCheck::Attackable { instances } => {
            let mut all = true;
            let mut notes = Vec::new();
            for inst in instances {
                let (name, count, bound, ok) = run_attackable(inst)?;
                all &= ok;
                notes.push(format!("{name}: {count} <= {bound:.2}{}", if ok { "" } else { " VIOLATED" }));
            }
            Ok(CheckOutcome { name: "attackable-count".into(), passed: all, details: notes.join("; ") })
        }
    }
}

/// Feed an instance's history to a fresh potential learner, count the
/// domain points it abstains on, and compare against the ceiling.
pub fn run_attackable(instance: &AttackableInstance) -> Result<(String, usize, f64, bool)> {
    match instance {
        AttackableInstance::Rect { dim, history, domain, alpha } => {
            let class = RectangleClass::new(*dim)?;
            let mut learner = PotentialLearner::new(
                RectEngine::new(class),
                AlphaRule::Fixed(alpha.as_q().clone()),
            )?;
            for (coords, y) in history {
                learner.observe(&rect_point(coords), Label::from_i8(*y)?)?;
            }
            let domain_pts: Vec<RectPoint> = domain.iter().map(|c| rect_point(c)).collect();
            let count = count_attackable(&mut learner, &domain_pts)?;
            let spec = ScoreSpec { k: 1, m: 2 * dim + 1, c: *dim as u32 };
            let bound = attackable_bound(spec, alpha.as_q(), history.len().max(1))?;
            Ok((format!("rectangles d={dim}"), count, bound, (count as f64) <= bound))
        }
        AttackableInstance::Tree { levels, branching, includes_empty, history, alpha } => {
            let tree = uniform_tree(*levels, *branching);
            let nodes = tree.borrow().len() as u32;
            let class = TreeOrderClass::new(tree, *includes_empty);
            let mut learner = PotentialLearner::new(
                SegEngine::new(class),
                AlphaRule::Fixed(alpha.as_q().clone()),
            )?;
            for (id, y) in history {
                learner.observe(&NodeId(*id), Label::from_i8(*y)?)?;
            }
            let domain_pts: Vec<NodeId> = (0..nodes).map(NodeId).collect();
            let count = count_attackable(&mut learner, &domain_pts)?;
            let bound =
                attackable_bound(ScoreSpec { k: 1, m: 3, c: 1 }, alpha.as_q(), history.len().max(1))?;
            Ok((format!("tree segments {levels}x{branching}"), count, bound, (count as f64) <= bound))
        }
    }
}
