//! Experiment configs, deterministic sweeps, CSV emission, scaling fits,
//! and summary reports.
//!
//! A sweep runs one episode per (horizon, trial) pair. Episode seeds are
//! mixed from the base seed and the pair, so any row can be replayed alone
//! and reruns of the same config produce identical results. Trials run in
//! parallel; each worker builds its own adversary/learner stack because the
//! tree-backed ones share interior state through `Rc`.

pub mod accept;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    Adversary, HardTreeAdversary, IidAdversary, PoolPolicy, Schedule, ScheduleAdversary, Target,
    WeightedPoints,
};
use crate::classes::{
    ConceptClass, HardTreePathClass, Halfspace2DClass, NodeId, RectPoint, RectangleClass,
    TreeOrderClass,
};
use crate::classes::tree::uniform_tree;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::learner::{
    auto_alpha, AlphaRule, AlwaysAbstain, AlwaysLabel, BootstrapHalfspaceLearner, CertArcEngine,
    GenericEngine, Learner, PotentialLearner, RectEngine, SegEngine,
};
use crate::oracle::{abstention_bound, mistake_bound, within_mistake_bound};
use crate::protocol::{run_episode, tally, ErrorTally, Label, Point};
use crate::rational::{format_q, parse_q, q_to_f64, Rat, Q};
use crate::scores::{ScoreSpec, TranscriptScore};

/// Fixed CSV schema; the column order is part of the output contract.
pub const CSV_HEADER: &str = "T,trial,seed,alpha,err_mis,err_abs,combined,runtime_ms";

/// One sweep: a learner/adversary pairing swept over horizons and trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// Strictly increasing.
    pub horizons: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Default CSV destination; the CLI flag overrides it.
    #[serde(default)]
    pub out: Option<String>,
    pub setup: Setup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case")]
pub enum Setup {
    Rectangle(RectSetup),
    Tree(TreeSetup),
    HardTree(HardTreeSetup),
    Halfspace(HalfspaceSetup),
}

/// Axis-aligned rectangle stream: the potential learner over the rectangle
/// score against an i.i.d. or scheduled-injection source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RectSetup {
    pub dim: usize,
    /// The hidden concept's corner.
    pub threshold: Vec<Rat>,
    pub support: Vec<Vec<Rat>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: AlphaConfig,
    #[serde(default)]
    pub injection: InjectionConfig<Vec<Rat>>,
}

/// Segment stream over a uniform tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSetup {
    pub levels: u32,
    pub branching: u32,
    #[serde(default = "default_true")]
    pub includes_empty: bool,
    /// Deepest node of the hidden segment; absent means the empty concept.
    pub segment_end: Option<u32>,
    /// Node ids of the source support; absent means every node.
    #[serde(default)]
    pub support: Option<Vec<u32>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub learner: LearnerKind,
    #[serde(default)]
    pub alpha: AlphaConfig,
    #[serde(default)]
    pub injection: InjectionConfig<u32>,
}

fn default_true() -> bool {
    true
}

/// The lower-bound stream: the adversary owns the tree, the distribution,
/// and the hidden path; only the learner varies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardTreeSetup {
    #[serde(default)]
    pub learner: LearnerKind,
    #[serde(default)]
    pub alpha: AlphaConfig,
}

/// Planar halfspace stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceSetup {
    /// One guaranteed-positive and one guaranteed-negative point.
    #[serde(default)]
    pub pin: Option<(Point2, Point2)>,
    /// Hidden concept (w1, w2, b): sign of w1 x + w2 y - b, ties positive.
    pub concept: (Rat, Rat, Rat),
    pub support: Vec<Point2>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub learner: HalfspaceLearnerKind,
    #[serde(default)]
    pub alpha: AlphaConfig,
    #[serde(default)]
    pub injection: InjectionConfig<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    #[default]
    Potential,
    AlwaysAbstain,
    AlwaysPlus,
    AlwaysMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HalfspaceLearnerKind {
    /// Hypothesis-free warmup, then the pinned certificate engine.
    #[default]
    Bootstrap,
    /// Pinned certificate engine from round one; needs `pin`.
    CertArc,
    /// Transcript-counting score; expensive, gated behind the CLI flag.
    Transcript,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AlphaConfig {
    #[default]
    Auto,
    Fixed {
        value: Rat,
    },
}

impl AlphaConfig {
    pub fn rule(&self) -> AlphaRule {
        match self {
            AlphaConfig::Auto => AlphaRule::Auto,
            AlphaConfig::Fixed { value } => AlphaRule::Fixed(value.as_q().clone()),
        }
    }

    /// The threshold a potential learner with this rule uses at `horizon`.
    pub fn resolve(&self, spec: ScoreSpec, horizon: usize) -> Result<Q> {
        match self {
            AlphaConfig::Auto => auto_alpha(spec, horizon),
            AlphaConfig::Fixed { value } => Ok(value.as_q().clone()),
        }
    }
}

/// When and what the adversary injects. `Iid` never injects, so the stream
/// degenerates to the plain source.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InjectionConfig<PT> {
    #[default]
    Iid,
    Schedule {
        schedule: Schedule,
        pool: Vec<PT>,
        policy: PoolPolicy,
    },
}

/// One episode's outcome within a sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRow {
    pub horizon: usize,
    pub trial: usize,
    pub seed: u64,
    /// The commit threshold in force, or "-" for threshold-free learners.
    pub alpha: String,
    pub err_mis: usize,
    pub err_abs: usize,
    pub combined: usize,
    pub runtime_ms: u64,
}

struct Stack<P: Point> {
    adversary: Box<dyn Adversary<P>>,
    learner: Box<dyn Learner<P>>,
    class: Box<dyn ConceptClass<P>>,
}

/// Deterministic per-episode seed: a splitmix64 finish over the base seed
/// and the (horizon, trial) pair.
pub fn episode_seed(base: u64, horizon: usize, trial: usize) -> u64 {
    let mut z = base
        ^ (horizon as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        Ok(config)
    }

    /// Cross-field checks that the constructors cannot see. `expensive`
    /// mirrors the CLI flag gating the transcript score.
    pub fn validate(&self, expensive: bool) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("horizons must not be empty".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("horizons must be strictly increasing".into()));
        }
        let needs_auto_horizons = |alpha: &AlphaConfig| -> Result<()> {
            if matches!(alpha, AlphaConfig::Auto) && self.horizons[0] < 2 {
                return Err(Error::Config(
                    "the automatic threshold needs horizons of at least 2".into(),
                ));
            }
            Ok(())
        };
        let check_fixed = |alpha: &AlphaConfig| -> Result<()> {
            if let AlphaConfig::Fixed { value } = alpha {
                if value.as_q() < &Q::from_integer(0.into()) {
                    return Err(Error::Config("alpha must be nonnegative".into()));
                }
            }
            Ok(())
        };
        match &self.setup {
            Setup::Rectangle(s) => {
                if s.dim == 0 {
                    return Err(Error::Config("dimension must be at least 1".into()));
                }
                if s.threshold.len() != s.dim {
                    return Err(Error::Config(format!(
                        "threshold has {} coordinates, expected {}",
                        s.threshold.len(),
                        s.dim
                    )));
                }
                if s.support.is_empty() {
                    return Err(Error::Config("support must not be empty".into()));
                }
                for p in &s.support {
                    if p.len() != s.dim {
                        return Err(Error::Config(format!(
                            "support point {p:?} has {} coordinates, expected {}",
                            p.len(),
                            s.dim
                        )));
                    }
                }
                if let Some(w) = &s.weights {
                    if w.len() != s.support.len() {
                        return Err(Error::Config("one weight per support point".into()));
                    }
                }
                if let InjectionConfig::Schedule { pool, .. } = &s.injection {
                    for p in pool {
                        if p.len() != s.dim {
                            return Err(Error::Config(format!(
                                "pool point {p:?} has {} coordinates, expected {}",
                                p.len(),
                                s.dim
                            )));
                        }
                    }
                }
                check_fixed(&s.alpha)?;
                needs_auto_horizons(&s.alpha)
            }
            Setup::Tree(s) => {
                let nodes = uniform_tree(s.levels, s.branching).borrow().len() as u32;
                let in_range = |id: u32, what: &str| -> Result<()> {
                    if id >= nodes {
                        return Err(Error::Config(format!(
                            "{what} node {id} is outside the {nodes}-node tree"
                        )));
                    }
                    Ok(())
                };
                if let Some(end) = s.segment_end {
                    in_range(end, "segment end")?;
                }
                if let Some(support) = &s.support {
                    if support.is_empty() {
                        return Err(Error::Config("support must not be empty".into()));
                    }
                    for &id in support {
                        in_range(id, "support")?;
                    }
                    if let Some(w) = &s.weights {
                        if w.len() != support.len() {
                            return Err(Error::Config("one weight per support node".into()));
                        }
                    }
                } else if let Some(w) = &s.weights {
                    if w.len() != nodes as usize {
                        return Err(Error::Config("one weight per tree node".into()));
                    }
                }
                if let InjectionConfig::Schedule { pool, .. } = &s.injection {
                    for &id in pool {
                        in_range(id, "pool")?;
                    }
                }
                check_fixed(&s.alpha)?;
                if s.learner == LearnerKind::Potential {
                    needs_auto_horizons(&s.alpha)?;
                }
                Ok(())
            }
            Setup::HardTree(s) => {
                check_fixed(&s.alpha)?;
                if s.learner == LearnerKind::Potential {
                    needs_auto_horizons(&s.alpha)?;
                }
                Ok(())
            }
            Setup::Halfspace(s) => {
                if s.support.is_empty() {
                    return Err(Error::Config("support must not be empty".into()));
                }
                if let Some(w) = &s.weights {
                    if w.len() != s.support.len() {
                        return Err(Error::Config("one weight per support point".into()));
                    }
                }
                if s.learner == HalfspaceLearnerKind::CertArc && s.pin.is_none() {
                    return Err(Error::Config(
                        "the certificate-arc learner needs a pinned pair".into(),
                    ));
                }
                if s.learner == HalfspaceLearnerKind::Transcript {
                    if !expensive {
                        return Err(Error::Config(
                            "the transcript score is gated behind --expensive".into(),
                        ));
                    }
                    if self.horizons.iter().any(|&t| t > 256) {
                        return Err(Error::Config(
                            "the transcript score refuses horizons above 256".into(),
                        ));
                    }
                }
                check_fixed(&s.alpha)?;
                needs_auto_horizons(&s.alpha)
            }
        }
    }

    /// The learner's score parameters, when it has any.
    pub fn score_spec(&self) -> Option<ScoreSpec> {
        match &self.setup {
            Setup::Rectangle(s) => {
                Some(ScoreSpec { k: 1, m: 2 * s.dim + 1, c: s.dim as u32 })
            }
            Setup::Tree(s) => {
                (s.learner == LearnerKind::Potential).then_some(ScoreSpec { k: 1, m: 3, c: 1 })
            }
            Setup::HardTree(s) => {
                (s.learner == LearnerKind::Potential).then_some(ScoreSpec { k: 1, m: 3, c: 1 })
            }
            Setup::Halfspace(s) => Some(match s.learner {
                HalfspaceLearnerKind::Transcript => ScoreSpec { k: 4, m: 5, c: 1920 },
                _ => ScoreSpec { k: 2, m: 7, c: 3 },
            }),
        }
    }

    fn alpha_config(&self) -> Option<&AlphaConfig> {
        match &self.setup {
            Setup::Rectangle(s) => Some(&s.alpha),
            Setup::Tree(s) => (s.learner == LearnerKind::Potential).then_some(&s.alpha),
            Setup::HardTree(s) => (s.learner == LearnerKind::Potential).then_some(&s.alpha),
            Setup::Halfspace(s) => Some(&s.alpha),
        }
    }

    /// The commit threshold the sweep's learner uses at `horizon`, when it
    /// has one.
    pub fn alpha_for(&self, horizon: usize) -> Result<Option<Q>> {
        match (self.alpha_config(), self.score_spec()) {
            (Some(cfg), Some(spec)) => Ok(Some(cfg.resolve(spec, horizon)?)),
            _ => Ok(None),
        }
    }

    /// Replace the setup's threshold rule (the CLI's `--alpha` override).
    pub fn set_alpha(&mut self, alpha: AlphaConfig) {
        match &mut self.setup {
            Setup::Rectangle(s) => s.alpha = alpha,
            Setup::Tree(s) => s.alpha = alpha,
            Setup::HardTree(s) => s.alpha = alpha,
            Setup::Halfspace(s) => s.alpha = alpha,
        }
    }
}

pub(crate) fn rect_point(coords: &[Rat]) -> RectPoint {
    coords.iter().map(|r| r.as_q().clone()).collect()
}

fn source<P: Point>(points: Vec<P>, weights: Option<&Vec<f64>>) -> Result<WeightedPoints<P>> {
    match weights {
        Some(w) => WeightedPoints::weighted(points, w),
        None => WeightedPoints::uniform(points),
    }
}

fn baseline_learner<P: Point>(kind: LearnerKind) -> Option<Box<dyn Learner<P>>> {
    match kind {
        LearnerKind::Potential => None,
        LearnerKind::AlwaysAbstain => Some(Box::new(AlwaysAbstain)),
        LearnerKind::AlwaysPlus => Some(Box::new(AlwaysLabel::new(Label::Plus))),
        LearnerKind::AlwaysMinus => Some(Box::new(AlwaysLabel::new(Label::Minus))),
    }
}

impl RectSetup {
    fn build(&self) -> Result<Stack<RectPoint>> {
        let class = RectangleClass::new(self.dim)?;
        let threshold: Vec<Q> = self.threshold.iter().map(|r| r.as_q().clone()).collect();
        let target = Target::new(move |x: &RectPoint| Ok(RectangleClass::label_of(&threshold, x)));
        let dist = source(self.support.iter().map(|p| rect_point(p)).collect(), self.weights.as_ref())?;
        let adversary: Box<dyn Adversary<RectPoint>> = match &self.injection {
            InjectionConfig::Iid => Box::new(IidAdversary::new(dist, target, None)?),
            InjectionConfig::Schedule { schedule, pool, policy } => {
                let pool = pool.iter().map(|p| rect_point(p)).collect();
                Box::new(ScheduleAdversary::new(dist, target, *schedule, pool, *policy))
            }
        };
        let learner = PotentialLearner::new(RectEngine::new(class.clone()), self.alpha.rule())?;
        Ok(Stack { adversary, learner: Box::new(learner), class: Box::new(class) })
    }
}

impl TreeSetup {
    fn build(&self) -> Result<Stack<NodeId>> {
        let tree = uniform_tree(self.levels, self.branching);
        let nodes = tree.borrow().len() as u32;
        let class = TreeOrderClass::new(tree.clone(), self.includes_empty);
        let end = self.segment_end.map(NodeId);
        let label_tree = tree.clone();
        let target =
            Target::new(move |x: &NodeId| TreeOrderClass::label_of(&label_tree.borrow(), end, *x));
        let support: Vec<NodeId> = match &self.support {
            Some(ids) => ids.iter().map(|&id| NodeId(id)).collect(),
            None => (0..nodes).map(NodeId).collect(),
        };
        let dist = source(support, self.weights.as_ref())?;
        let adversary: Box<dyn Adversary<NodeId>> = match &self.injection {
            InjectionConfig::Iid => Box::new(IidAdversary::new(dist, target, None)?),
            InjectionConfig::Schedule { schedule, pool, policy } => {
                let pool = pool.iter().map(|&id| NodeId(id)).collect();
                Box::new(ScheduleAdversary::new(dist, target, *schedule, pool, *policy))
            }
        };
        let learner: Box<dyn Learner<NodeId>> = match baseline_learner(self.learner) {
            Some(b) => b,
            None => Box::new(PotentialLearner::new(
                SegEngine::new(class.clone()),
                self.alpha.rule(),
            )?),
        };
        Ok(Stack { adversary, learner, class: Box::new(class) })
    }
}

impl HardTreeSetup {
    fn build(&self) -> Result<Stack<NodeId>> {
        let tree = crate::classes::Tree::shared();
        let adversary = HardTreeAdversary::new(tree.clone());
        let class = HardTreePathClass::new(tree.clone());
        let learner: Box<dyn Learner<NodeId>> = match baseline_learner(self.learner) {
            Some(b) => b,
            None => Box::new(PotentialLearner::new(
                SegEngine::new(TreeOrderClass::new(tree, true)),
                self.alpha.rule(),
            )?),
        };
        Ok(Stack { adversary: Box::new(adversary), learner, class: Box::new(class) })
    }
}

impl HalfspaceSetup {
    fn class(&self) -> Result<Halfspace2DClass> {
        match &self.pin {
            Some((plus, minus)) => Halfspace2DClass::pinned(plus.clone(), minus.clone()),
            None => Ok(Halfspace2DClass::new()),
        }
    }

    fn build(&self) -> Result<Stack<Point2>> {
        let class = self.class()?;
        let (w1, w2, b) =
            (self.concept.0.as_q().clone(), self.concept.1.as_q().clone(), self.concept.2.as_q().clone());
        let target =
            Target::new(move |x: &Point2| Ok(Halfspace2DClass::label_of(&w1, &w2, &b, x)));
        let dist = source(self.support.clone(), self.weights.as_ref())?;
        let adversary: Box<dyn Adversary<Point2>> = match &self.injection {
            InjectionConfig::Iid => Box::new(IidAdversary::new(dist, target, None)?),
            InjectionConfig::Schedule { schedule, pool, policy } => {
                Box::new(ScheduleAdversary::new(dist, target, *schedule, pool.clone(), *policy))
            }
        };
        let learner: Box<dyn Learner<Point2>> = match self.learner {
            HalfspaceLearnerKind::Bootstrap => {
                Box::new(BootstrapHalfspaceLearner::new(self.alpha.rule())?)
            }
            HalfspaceLearnerKind::CertArc => Box::new(PotentialLearner::new(
                CertArcEngine::new(class.clone())?,
                self.alpha.rule(),
            )?),
            HalfspaceLearnerKind::Transcript => Box::new(PotentialLearner::new(
                GenericEngine::new(class.clone(), TranscriptScore::new(class.clone())),
                self.alpha.rule(),
            )?),
        };
        Ok(Stack { adversary, learner, class: Box::new(class) })
    }
}

/// Run every (horizon, trial) episode of the sweep. Rows come back ordered
/// by (horizon, trial) regardless of scheduling.
pub fn run_sweep(config: &ExperimentConfig, expensive: bool) -> Result<Vec<ResultRow>> {
    config.validate(expensive)?;
    match &config.setup {
        Setup::Rectangle(s) => sweep(config, || s.build()),
        Setup::Tree(s) => sweep(config, || s.build()),
        Setup::HardTree(s) => sweep(config, || s.build()),
        Setup::Halfspace(s) => sweep(config, || s.build()),
    }
}

fn sweep<P, B>(config: &ExperimentConfig, build: B) -> Result<Vec<ResultRow>>
where
    P: Point,
    B: Fn() -> Result<Stack<P>> + Sync,
{
    let mut jobs = Vec::with_capacity(config.horizons.len() * config.trials);
    for &horizon in &config.horizons {
        for trial in 0..config.trials {
            jobs.push((horizon, trial));
        }
    }
    jobs.par_iter()
        .map(|&(horizon, trial)| {
            let alpha = config.alpha_for(horizon)?;
            let mut stack = build()?;
            let seed = episode_seed(config.seed, horizon, trial);
            let started = Instant::now();
            let transcript = run_episode(
                stack.adversary.as_mut(),
                stack.learner.as_mut(),
                Some(stack.class.as_ref()),
                horizon,
                seed,
            )
            .map_err(|e| match e {
                Error::ProtocolViolation(msg) => Error::ProtocolViolation(format!(
                    "seed {seed} (T={horizon}, trial {trial}): {msg}"
                )),
                other => other,
            })?;
            let t = tally(&transcript);
            Ok(ResultRow {
                horizon,
                trial,
                seed,
                alpha: alpha.map(|a| format_q(&a)).unwrap_or_else(|| "-".into()),
                err_mis: t.err_mis,
                err_abs: t.err_abs,
                combined: t.combined(),
                runtime_ms: started.elapsed().as_millis() as u64,
            })
        })
        .collect()
}

/// Run a single episode (the first horizon, trial 0, unless overridden) and
/// return printable round lines, the error tally, and the threshold text.
pub fn run_single(
    config: &ExperimentConfig,
    horizon_override: Option<usize>,
    seed_override: Option<u64>,
    expensive: bool,
) -> Result<(Vec<String>, ErrorTally, String)> {
    config.validate(expensive)?;
    let horizon = horizon_override.unwrap_or(config.horizons[0]);
    let seed = seed_override.unwrap_or_else(|| episode_seed(config.seed, horizon, 0));
    let alpha = config
        .alpha_for(horizon)?
        .map(|a| format_q(&a))
        .unwrap_or_else(|| "-".into());
    let (lines, t) = match &config.setup {
        Setup::Rectangle(s) => single(s.build()?, horizon, seed)?,
        Setup::Tree(s) => single(s.build()?, horizon, seed)?,
        Setup::HardTree(s) => single(s.build()?, horizon, seed)?,
        Setup::Halfspace(s) => single(s.build()?, horizon, seed)?,
    };
    Ok((lines, t, alpha))
}

fn single<P: Point>(
    mut stack: Stack<P>,
    horizon: usize,
    seed: u64,
) -> Result<(Vec<String>, ErrorTally)> {
    let transcript = run_episode(
        stack.adversary.as_mut(),
        stack.learner.as_mut(),
        Some(stack.class.as_ref()),
        horizon,
        seed,
    )?;
    let lines = transcript
        .rounds
        .iter()
        .map(|r| {
            format!(
                "t={:<4} {} x={:?} predicted={} label={}",
                r.t,
                if r.injected { "injected" } else { "iid     " },
                r.x,
                r.prediction,
                r.y
            )
        })
        .collect();
    Ok((lines, tally(&transcript)))
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.horizon, r.trial, r.seed, r.alpha, r.err_mis, r.err_abs, r.combined, r.runtime_ms
        ));
    }
    s
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows))?;
    Ok(())
}

/// Log-log least-squares fit of mean combined error against the horizon.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub exponent: f64,
    /// (horizon, mean combined error) pairs the fit used.
    pub points: Vec<(usize, f64)>,
    /// Horizons dropped for a zero mean, which has no logarithm.
    pub excluded: Vec<usize>,
}

fn mean_by_horizon(rows: &[ResultRow]) -> BTreeMap<usize, Vec<f64>> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.horizon).or_default().push(r.combined as f64);
    }
    groups
}

pub fn fit_scaling(rows: &[ResultRow]) -> Result<ScalingFit> {
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (horizon, values) in mean_by_horizon(rows) {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if mean > 0.0 {
            points.push((horizon, mean));
        } else {
            excluded.push(horizon);
        }
    }
    if points.len() < 3 {
        return Err(Error::Precondition(format!(
            "a scaling fit needs at least 3 horizons with positive mean error, got {}",
            points.len()
        )));
    }
    let logs: Vec<(f64, f64)> =
        points.iter().map(|&(t, m)| ((t as f64).ln(), m.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(ScalingFit { exponent: sxy / sxx, points, excluded })
}

/// Per-horizon aggregation with the closed-form ceilings when the sweep's
/// learner has score parameters to compute them from.
#[derive(Debug, Clone, Serialize)]
pub struct HorizonSummary {
    pub horizon: usize,
    pub n: usize,
    /// Threshold shared by the horizon's rows, if the learner had one.
    pub alpha: Option<String>,
    pub mean_mis: f64,
    pub mean_abs: f64,
    pub mean_combined: f64,
    /// Normal-approximation 95% interval around the combined mean.
    pub ci95: (f64, f64),
    /// Mistake ceiling plus expected-abstention ceiling.
    pub bound: Option<f64>,
    pub bound_ok: Option<bool>,
    /// Whether every row respects the exact mistake ceiling.
    pub mistakes_ok: Option<bool>,
}

pub(crate) fn mean_ci(values: &[f64]) -> (f64, (f64, f64)) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, (mean, mean));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * (var / n).sqrt();
    (mean, (mean - half, mean + half))
}

pub fn summarize_rows(rows: &[ResultRow], spec: Option<ScoreSpec>) -> Result<Vec<HorizonSummary>> {
    let mut groups: BTreeMap<usize, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.horizon).or_default().push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (horizon, group) in groups {
        let combined: Vec<f64> = group.iter().map(|r| r.combined as f64).collect();
        let (mean_combined, ci95) = mean_ci(&combined);
        let mean_mis =
            group.iter().map(|r| r.err_mis as f64).sum::<f64>() / group.len() as f64;
        let mean_abs =
            group.iter().map(|r| r.err_abs as f64).sum::<f64>() / group.len() as f64;
        let alpha_text = group[0].alpha.clone();
        let alpha = (alpha_text != "-").then(|| parse_q(&alpha_text)).transpose()?;
        let (mut bound, mut bound_ok, mut mistakes_ok) = (None, None, None);
        if let (Some(spec), Some(alpha)) = (spec, &alpha) {
            let mistakes = mistake_bound(spec, alpha, horizon)?;
            if horizon >= 2 {
                let b = q_to_f64(&mistakes) + abstention_bound(spec, alpha, horizon)?;
                bound = Some(b);
                bound_ok = Some(mean_combined <= b);
            }
            let mut all_ok = true;
            for r in &group {
                let t = ErrorTally { err_mis: r.err_mis, err_abs: r.err_abs };
                all_ok &= within_mistake_bound(&t, spec, alpha, horizon)?;
            }
            mistakes_ok = Some(all_ok);
        }
        out.push(HorizonSummary {
            horizon,
            n: group.len(),
            alpha: (alpha_text != "-").then_some(alpha_text),
            mean_mis,
            mean_abs,
            mean_combined,
            ci95,
            bound,
            bound_ok,
            mistakes_ok,
        });
    }
    Ok(out)
}

/// Human-readable sweep summary: one line per horizon, the scaling fit when
/// enough horizons support one, and a verdict when ceilings were in play.
pub fn emit_report(rows: &[ResultRow], spec: Option<ScoreSpec>) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Precondition("no rows to report on".into()));
    }
    let summaries = summarize_rows(rows, spec)?;
    let mut lines = Vec::new();
    let mut failed = false;
    for s in &summaries {
        let mut line = format!(
            "T={} n={} alpha={} mean_mis={:.3} mean_abs={:.3} combined={:.3} ci95=[{:.3}, {:.3}]",
            s.horizon,
            s.n,
            s.alpha.as_deref().unwrap_or("-"),
            s.mean_mis,
            s.mean_abs,
            s.mean_combined,
            s.ci95.0,
            s.ci95.1,
        );
        if let Some(b) = s.bound {
            line.push_str(&format!(" bound={b:.3}"));
        }
        match (s.bound_ok, s.mistakes_ok) {
            (_, Some(false)) => {
                line.push_str(" MISTAKE-BOUND-VIOLATION");
                failed = true;
            }
            (Some(false), _) => {
                line.push_str(" ABOVE-BOUND");
                failed = true;
            }
            (Some(true), Some(true)) => line.push_str(" ok"),
            _ => {}
        }
        lines.push(line);
    }
    match fit_scaling(rows) {
        Ok(fit) => {
            if !fit.excluded.is_empty() {
                lines.push(format!(
                    "scaling fit excluded zero-mean horizons: {:?}",
                    fit.excluded
                ));
            }
            lines.push(format!("fitted exponent: {:.4}", fit.exponent));
        }
        Err(Error::Precondition(why)) => lines.push(format!("scaling fit skipped: {why}")),
        Err(e) => return Err(e),
    }
    if spec.is_some() {
        lines.push(format!("verdict: {}", if failed { "FAIL" } else { "PASS" }));
    }
    Ok(lines.join("\n"))
}

/// Aggregate outcome of one learner against the hard-tree stream.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundOutcome {
    pub learner: String,
    pub horizon: usize,
    pub trials: usize,
    pub mean_combined: f64,
    pub ci95: (f64, f64),
    /// The floor the stream is designed to force, 0.1 sqrt(T).
    pub threshold: f64,
    /// Whether the mean stayed at or above the floor.
    pub forced: bool,
}

/// Run the hard-tree stream against the abstain-always, predict-minus, and
/// segment-potential learners. Every learner shares the same per-trial
/// seeds, so the comparison is paired.
pub fn hard_tree_lower_bound(
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<LowerBoundOutcome>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let kinds = [
        ("always_abstain", LearnerKind::AlwaysAbstain),
        ("always_minus", LearnerKind::AlwaysMinus),
        ("segment_potential", LearnerKind::Potential),
    ];
    let threshold = 0.1 * (horizon as f64).sqrt();
    let mut out = Vec::with_capacity(kinds.len());
    for (name, kind) in kinds {
        let setup = HardTreeSetup { learner: kind, alpha: AlphaConfig::Auto };
        let combined: Result<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut stack = setup.build()?;
                let transcript = run_episode(
                    stack.adversary.as_mut(),
                    stack.learner.as_mut(),
                    Some(stack.class.as_ref()),
                    horizon,
                    episode_seed(seed, horizon, trial),
                )?;
                Ok(tally(&transcript).combined() as f64)
            })
            .collect();
        let combined = combined?;
        let (mean_combined, ci95) = mean_ci(&combined);
        out.push(LowerBoundOutcome {
            learner: name.into(),
            horizon,
            trials,
            mean_combined,
            ci95,
            threshold,
            forced: mean_combined >= threshold,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;

    fn rat(n: i64) -> Rat {
        Rat::from(q_int(n))
    }

    fn tiny_rect_config() -> ExperimentConfig {
        ExperimentConfig {
            name: "tiny".into(),
            horizons: vec![4, 8],
            trials: 2,
            seed: 7,
            out: None,
            setup: Setup::Rectangle(RectSetup {
                dim: 1,
                threshold: vec![rat(3)],
                support: (1..=6).map(|v| vec![rat(v)]).collect(),
                weights: None,
                alpha: AlphaConfig::Fixed { value: rat(2) },
                injection: InjectionConfig::Iid,
            }),
        }
    }

    #[test]
    fn sweeps_emit_one_ordered_row_per_horizon_and_trial() {
        let config = tiny_rect_config();
        let rows = run_sweep(&config, false).unwrap();
        let keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.horizon, r.trial)).collect();
        assert_eq!(keys, vec![(4, 0), (4, 1), (8, 0), (8, 1)]);
        assert!(rows.iter().all(|r| r.alpha == "2"));
        assert!(rows.iter().all(|r| r.combined == r.err_mis + r.err_abs));
    }

    #[test]
    fn reruns_are_identical_apart_from_wall_time() {
        let config = tiny_rect_config();
        let mask = |rows: &[ResultRow]| {
            let mut rows = rows.to_vec();
            for r in &mut rows {
                r.runtime_ms = 0;
            }
            csv_string(&rows)
        };
        let a = run_sweep(&config, false).unwrap();
        let b = run_sweep(&config, false).unwrap();
        assert_eq!(mask(&a), mask(&b));
        assert!(csv_string(&a).starts_with("T,trial,seed,alpha,err_mis,err_abs,combined,runtime_ms\n"));
    }

    #[test]
    fn scheduled_injections_run_and_stay_clean() {
        let mut config = tiny_rect_config();
        if let Setup::Rectangle(s) = &mut config.setup {
            s.injection = InjectionConfig::Schedule {
                schedule: Schedule::Alternating,
                pool: vec![vec![rat(1)], vec![rat(6)]],
                policy: PoolPolicy::Cycle,
            };
        }
        // run_episode asserts realizability against the class every round.
        let rows = run_sweep(&config, false).unwrap();
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn configs_round_trip_through_json() {
        let text = r#"{
            "name": "json",
            "horizons": [16],
            "trials": 1,
            "seed": 3,
            "setup": {
                "geometry": "rectangle",
                "dim": 1,
                "threshold": ["5/2"],
                "support": [["1"], ["2"], ["3"], ["4"]],
                "alpha": {"rule": "fixed", "value": "1/2"},
                "injection": {"mode": "iid"}
            }
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        config.validate(false).unwrap();
        let rows = run_sweep(&config, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].alpha, "1/2");
        assert!(matches!(
            ExperimentConfig::from_json("{\"name\":"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut c = tiny_rect_config();
        c.trials = 0;
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
        let mut c = tiny_rect_config();
        c.horizons = vec![8, 8];
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
        let mut c = tiny_rect_config();
        c.horizons = vec![];
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
        let mut c = tiny_rect_config();
        if let Setup::Rectangle(s) = &mut c.setup {
            s.threshold = vec![rat(1), rat(2)];
        }
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
        let mut c = tiny_rect_config();
        if let Setup::Rectangle(s) = &mut c.setup {
            s.support.clear();
        }
        assert!(matches!(c.validate(false), Err(Error::Config(_))));
    }

    #[test]
    fn transcript_runs_need_the_expensive_flag_and_short_horizons() {
        let mut config = ExperimentConfig {
            name: "hs".into(),
            horizons: vec![16],
            trials: 1,
            seed: 1,
            out: None,
            setup: Setup::Halfspace(HalfspaceSetup {
                pin: None,
                concept: (rat(0), rat(1), rat(0)),
                support: vec![Point2::from_ints(1, 1), Point2::from_ints(2, -1)],
                weights: None,
                learner: HalfspaceLearnerKind::Transcript,
                alpha: AlphaConfig::Fixed { value: rat(1) },
                injection: InjectionConfig::Iid,
            }),
        };
        assert!(matches!(config.validate(false), Err(Error::Config(_))));
        config.validate(true).unwrap();
        config.horizons = vec![512];
        assert!(matches!(config.validate(true), Err(Error::Config(_))));
    }

    fn synthetic_rows(values: &[(usize, usize)]) -> Vec<ResultRow> {
        values
            .iter()
            .map(|&(horizon, combined)| ResultRow {
                horizon,
                trial: 0,
                seed: 0,
                alpha: "-".into(),
                err_mis: 0,
                err_abs: combined,
                combined,
                runtime_ms: 0,
            })
            .collect()
    }

    #[test]
    fn scaling_fit_recovers_linear_growth() {
        let rows = synthetic_rows(&[(10, 10), (100, 100), (1000, 1000)]);
        let fit = fit_scaling(&rows).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-9, "got {}", fit.exponent);
    }

    #[test]
    fn scaling_fit_recovers_square_root_growth() {
        let rows = synthetic_rows(&[(4, 2), (16, 4), (64, 8), (256, 16)]);
        let fit = fit_scaling(&rows).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-9, "got {}", fit.exponent);
    }

    #[test]
    fn scaling_fit_drops_zero_means_and_wants_three_horizons() {
        let rows = synthetic_rows(&[(4, 0), (16, 4), (64, 8), (256, 16)]);
        let fit = fit_scaling(&rows).unwrap();
        assert_eq!(fit.excluded, vec![4]);
        assert_eq!(fit.points.len(), 3);
        let rows = synthetic_rows(&[(4, 2), (16, 4)]);
        assert!(matches!(fit_scaling(&rows), Err(Error::Precondition(_))));
    }

    #[test]
    fn reports_carry_bounds_and_flag_violations() {
        let spec = ScoreSpec { k: 1, m: 3, c: 1 };
        let mut rows = synthetic_rows(&[(16, 3), (32, 4), (64, 5)]);
        for r in &mut rows {
            r.alpha = "2".into();
        }
        let report = emit_report(&rows, Some(spec)).unwrap();
        assert!(report.contains("bound="), "{report}");
        assert!(report.contains("verdict: PASS"), "{report}");
        assert!(report.contains("fitted exponent"), "{report}");

        // err_mis 9 at T=16 breaks the exact ceiling 16/2 = 8.
        rows[0].err_mis = 9;
        rows[0].combined = 12;
        let report = emit_report(&rows, Some(spec)).unwrap();
        assert!(report.contains("MISTAKE-BOUND-VIOLATION"), "{report}");
        assert!(report.contains("verdict: FAIL"), "{report}");

        let plain = emit_report(&rows, None).unwrap();
        assert!(!plain.contains("bound="), "{plain}");
        assert!(!plain.contains("verdict"), "{plain}");
    }

    #[test]
    fn episode_seeds_differ_across_the_grid() {
        let mut seen = std::collections::HashSet::new();
        for t in [4usize, 8, 16] {
            for trial in 0..50 {
                assert!(seen.insert(episode_seed(42, t, trial)));
            }
        }
    }

    #[test]
    fn hard_tree_rows_flow_through_the_sweep() {
        let config = ExperimentConfig {
            name: "hard".into(),
            horizons: vec![36],
            trials: 3,
            seed: 11,
            out: None,
            setup: Setup::HardTree(HardTreeSetup {
                learner: LearnerKind::AlwaysAbstain,
                alpha: AlphaConfig::Auto,
            }),
        };
        let rows = run_sweep(&config, false).unwrap();
        assert_eq!(rows.len(), 3);
        // Abstaining is never a mistake; every i.i.d. round is an abstention.
        assert!(rows.iter().all(|r| r.err_mis == 0));
        assert!(rows.iter().all(|r| r.alpha == "-"));
    }
}
