//! Initial segments of a rooted tree order, and the relabeling wrapper that
//! turns any VC-dimension-1 class into one.
//!
//! A hypothesis is a root-to-node path I(v) (optionally the empty segment)
//! labeling exactly the nodes on the path positive. A labeled set is
//! realizable iff the positives form a chain and no negative is an ancestor
//! of the deepest positive. Trees grow by materializing children on demand,
//! which is how the lower-bound stream builds its lazily-infinite tree.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{ConceptClass, FiniteClass};
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone)]
pub struct Tree {
    parents: Vec<Option<u32>>,
    depths: Vec<u32>,
}

pub type SharedTree = Rc<RefCell<Tree>>;

pub const ROOT: NodeId = NodeId(0);

impl Default for Tree {
    fn default() -> Self {
        Tree::new()
    }
}

impl Tree {
    /// A tree with just the root (node 0).
    pub fn new() -> Self {
        Tree { parents: vec![None], depths: vec![0] }
    }

    pub fn shared() -> SharedTree {
        Rc::new(RefCell::new(Tree::new()))
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a tree always has its root
    }

    pub fn contains(&self, v: NodeId) -> bool {
        (v.0 as usize) < self.parents.len()
    }

    pub fn add_child(&mut self, parent: NodeId) -> Result<NodeId> {
        if !self.contains(parent) {
            return Err(Error::Domain(format!("unknown node {}", parent.0)));
        }
        let id = self.parents.len() as u32;
        self.parents.push(Some(parent.0));
        self.depths.push(self.depths[parent.0 as usize] + 1);
        Ok(NodeId(id))
    }

    pub fn parent(&self, v: NodeId) -> Result<Option<NodeId>> {
        self.check(v)?;
        Ok(self.parents[v.0 as usize].map(NodeId))
    }

    pub fn depth(&self, v: NodeId) -> Result<u32> {
        self.check(v)?;
        Ok(self.depths[v.0 as usize])
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("unknown node {}", v.0)))
        }
    }

    /// Is `a` an ancestor of `b` (including a == b)?
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        let target = self.depths[a.0 as usize];
        let mut cur = b.0;
        while self.depths[cur as usize] > target {
            cur = self.parents[cur as usize].expect("non-root nodes have parents");
        }
        Ok(cur == a.0)
    }

    /// Root-to-node path, root first.
    pub fn path_to(&self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check(v)?;
        let mut path = Vec::with_capacity(self.depths[v.0 as usize] as usize + 1);
        let mut cur = Some(v.0);
        while let Some(c) = cur {
            path.push(NodeId(c));
            cur = self.parents[c as usize];
        }
        path.reverse();
        Ok(path)
    }
}

/// Realizability of a labeled set by initial segments of `tree`.
///
/// `includes_empty` decides whether the all-negative hypothesis (the empty
/// segment) is in the class; without it, the root is positive under every
/// hypothesis.
fn segment_realizable(
    tree: &Tree,
    examples: &[LabeledExample<NodeId>],
    includes_empty: bool,
) -> Result<bool> {
    let mut deepest: Option<NodeId> = None;
    for ex in examples {
        tree.check(ex.point)?;
        if ex.label == Label::Plus {
            deepest = Some(match deepest {
                None => ex.point,
                Some(d) => {
                    if tree.depth(ex.point)? > tree.depth(d)? {
                        ex.point
                    } else {
                        d
                    }
                }
            });
        }
    }
    match deepest {
        None => {
            if includes_empty {
                Ok(true)
            } else {
                // Some segment I(v) must avoid every negative; I(root) works
                // exactly when the root is unlabeled or positive.
                Ok(!examples.iter().any(|e| e.label == Label::Minus && e.point == ROOT))
            }
        }
        Some(d) => {
            for ex in examples {
                match ex.label {
                    Label::Plus => {
                        if !tree.is_ancestor(ex.point, d)? {
                            return Ok(false);
                        }
                    }
                    Label::Minus => {
                        if tree.is_ancestor(ex.point, d)? {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

#[derive(Clone)]
pub struct TreeOrderClass {
    tree: SharedTree,
    includes_empty: bool,
}

impl TreeOrderClass {
    pub fn new(tree: SharedTree, includes_empty: bool) -> Self {
        TreeOrderClass { tree, includes_empty }
    }

    pub fn tree(&self) -> &SharedTree {
        &self.tree
    }

    pub fn includes_empty(&self) -> bool {
        self.includes_empty
    }

    /// The label of node `x` under the segment ending at `v` (None = empty
    /// segment).
    pub fn label_of(tree: &Tree, segment_end: Option<NodeId>, x: NodeId) -> Result<Label> {
        match segment_end {
            None => Ok(Label::Minus),
            Some(v) => Ok(if tree.is_ancestor(x, v)? { Label::Plus } else { Label::Minus }),
        }
    }
}

impl ConceptClass<NodeId> for TreeOrderClass {
    fn realizable(&self, examples: &[LabeledExample<NodeId>]) -> Result<bool> {
        segment_realizable(&self.tree.borrow(), examples, self.includes_empty)
    }
}

/// Root-to-leaf path concepts on a lazily extendable tree: every node
/// conceptually has unseen children, so hypotheses never run out of room
/// below the deepest positive. Equivalent to tree segments without the empty
/// segment; in particular the root is forced positive.
#[derive(Clone)]
pub struct HardTreePathClass {
    tree: SharedTree,
}

impl HardTreePathClass {
    pub fn new(tree: SharedTree) -> Self {
        HardTreePathClass { tree }
    }

    pub fn tree(&self) -> &SharedTree {
        &self.tree
    }
}

impl ConceptClass<NodeId> for HardTreePathClass {
    fn realizable(&self, examples: &[LabeledExample<NodeId>]) -> Result<bool> {
        segment_realizable(&self.tree.borrow(), examples, false)
    }
}

/// Any class of VC dimension 1 is a relabeled tree order: a reference
/// labeling r plus a tree order on the domain. The wrapper maps (x, y) to
/// (x, +1 iff y != r(x)) and delegates realizability.
#[derive(Clone)]
pub struct RelabeledVc1Class {
    order: TreeOrderClass,
    reference: Vec<Label>,
}

impl RelabeledVc1Class {
    /// `reference[i]` is r evaluated at node i.
    pub fn new(order: TreeOrderClass, reference: Vec<Label>) -> Result<Self> {
        if reference.len() != order.tree.borrow().len() {
            return Err(Error::Structure(
                "reference labeling must cover every tree node".into(),
            ));
        }
        Ok(RelabeledVc1Class { order, reference })
    }

    pub fn order(&self) -> &TreeOrderClass {
        &self.order
    }

    pub fn relabel(&self, ex: &LabeledExample<NodeId>) -> LabeledExample<NodeId> {
        let flipped = if ex.label != self.reference[ex.point.0 as usize] {
            Label::Plus
        } else {
            Label::Minus
        };
        LabeledExample::new(ex.point, flipped)
    }

    /// Cross-checks the wrapper against direct enumeration on a finite class
    /// whose point i is node i. A mismatch means the supplied (r, order) pair
    /// does not represent the class.
    pub fn validate_against(&self, direct: &FiniteClass, max_size: usize) -> Result<()> {
        let n = direct.n_points();
        let mut stack: Vec<Vec<LabeledExample<usize>>> = vec![Vec::new()];
        while let Some(set) = stack.pop() {
            let mapped: Vec<LabeledExample<NodeId>> = set
                .iter()
                .map(|e| LabeledExample::new(NodeId(e.point as u32), e.label))
                .collect();
            if self.realizable(&mapped)? != direct.realizable(&set)? {
                return Err(Error::Structure(format!(
                    "wrapper disagrees with direct enumeration on {set:?}"
                )));
            }
            if set.len() < max_size {
                let start = set.last().map_or(0, |e| e.point + 1);
                for p in start..n {
                    for label in [Label::Plus, Label::Minus] {
                        let mut next = set.clone();
                        next.push(LabeledExample::new(p, label));
                        stack.push(next);
                    }
                }
            }
        }
        Ok(())
    }
}

impl ConceptClass<NodeId> for RelabeledVc1Class {
    fn realizable(&self, examples: &[LabeledExample<NodeId>]) -> Result<bool> {
        for ex in examples {
            if !self.order.tree.borrow().contains(ex.point) {
                return Err(Error::Domain(format!("unknown node {}", ex.point.0)));
            }
        }
        let relabeled: Vec<_> = examples.iter().map(|e| self.relabel(e)).collect();
        self.order.realizable(&relabeled)
    }
}

/// JSON shape for explicit trees: node names plus a child -> parent map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSpec {
    pub nodes: Vec<String>,
    pub parents: HashMap<String, String>,
}

/// An explicit tree with its name table.
#[derive(Clone)]
pub struct NamedTree {
    pub tree: SharedTree,
    pub names: Vec<String>,
    pub index: HashMap<String, NodeId>,
}

impl NamedTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<NamedTree> {
        if spec.nodes.is_empty() {
            return Err(Error::Structure("tree needs at least a root node".into()));
        }
        let mut name_pos: HashMap<&str, usize> = HashMap::new();
        for (i, n) in spec.nodes.iter().enumerate() {
            if name_pos.insert(n, i).is_some() {
                return Err(Error::Structure(format!("duplicate node name {n:?}")));
            }
        }
        for (child, parent) in &spec.parents {
            if !name_pos.contains_key(child.as_str()) {
                return Err(Error::Structure(format!("parent map mentions unknown node {child:?}")));
            }
            if !name_pos.contains_key(parent.as_str()) {
                return Err(Error::Structure(format!("parent map mentions unknown node {parent:?}")));
            }
        }
        let roots: Vec<&String> =
            spec.nodes.iter().filter(|n| !spec.parents.contains_key(*n)).collect();
        if roots.len() != 1 {
            return Err(Error::Structure(format!(
                "tree must have exactly one root, found {}",
                roots.len()
            )));
        }
        // Build top-down from the root; anything unreached sits on a cycle.
        let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
        for (child, parent) in &spec.parents {
            children.entry(parent).or_default().push(child);
        }
        for list in children.values_mut() {
            list.sort(); // deterministic node numbering
        }
        let tree = Tree::shared();
        let mut names = vec![roots[0].clone()];
        let mut index = HashMap::new();
        index.insert(roots[0].clone(), ROOT);
        let mut queue = vec![(roots[0].as_str(), ROOT)];
        while let Some((name, id)) = queue.pop() {
            if let Some(kids) = children.get(name) {
                for kid in kids {
                    let kid_id = tree.borrow_mut().add_child(id)?;
                    names.push((*kid).to_string());
                    index.insert((*kid).to_string(), kid_id);
                    queue.push((kid, kid_id));
                }
            }
        }
        if names.len() != spec.nodes.len() {
            return Err(Error::Structure("parent map contains a cycle".into()));
        }
        Ok(NamedTree { tree, names, index })
    }

    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Structure(format!("unknown node name {name:?}")))
    }
}

/// A uniform tree with `levels` node levels below none (level 0 is the root)
/// and `branching` children per internal node.
pub fn uniform_tree(levels: u32, branching: u32) -> SharedTree {
    let tree = Tree::shared();
    let mut frontier = vec![ROOT];
    for _ in 0..levels {
        let mut next = Vec::new();
        for node in frontier {
            for _ in 0..branching {
                next.push(tree.borrow_mut().add_child(node).unwrap());
            }
        }
        frontier = next;
    }
    tree
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn ex(v: NodeId, label: Label) -> LabeledExample<NodeId> {
        LabeledExample::new(v, label)
    }

    /// Enumeration oracle: all initial segments (path ends plus optionally
    /// the empty segment) checked directly.
    pub fn enumerated_realizable(
        tree: &Tree,
        examples: &[LabeledExample<NodeId>],
        includes_empty: bool,
    ) -> bool {
        let mut ends: Vec<Option<NodeId>> =
            (0..tree.len() as u32).map(|i| Some(NodeId(i))).collect();
        if includes_empty {
            ends.push(None);
        }
        ends.into_iter().any(|end| {
            examples
                .iter()
                .all(|e| TreeOrderClass::label_of(tree, end, e.point).unwrap() == e.label)
        })
    }

    fn chain_and_fork() -> (SharedTree, NodeId, NodeId, NodeId) {
        // root -> a -> b, root -> c
        let tree = Tree::shared();
        let a = tree.borrow_mut().add_child(ROOT).unwrap();
        let b = tree.borrow_mut().add_child(a).unwrap();
        let c = tree.borrow_mut().add_child(ROOT).unwrap();
        (tree, a, b, c)
    }

    #[test]
    fn chained_positives_with_outside_negative_are_realizable() {
        let (tree, a, b, c) = chain_and_fork();
        let class = TreeOrderClass::new(tree.clone(), true);
        let s = [ex(ROOT, Label::Plus), ex(a, Label::Plus), ex(c, Label::Minus)];
        assert!(class.realizable(&s).unwrap());
        assert!(enumerated_realizable(&tree.borrow(), &s, true));
        let bad = [ex(a, Label::Plus), ex(b, Label::Plus), ex(ROOT, Label::Minus)];
        assert!(!class.realizable(&bad).unwrap());
        assert!(!enumerated_realizable(&tree.borrow(), &bad, true));
    }

    #[test]
    fn incomparable_positives_are_unrealizable() {
        let (tree, a, _b, c) = chain_and_fork();
        let class = TreeOrderClass::new(tree.clone(), true);
        let s = [ex(a, Label::Plus), ex(c, Label::Plus)];
        assert!(!class.realizable(&s).unwrap());
        assert!(!enumerated_realizable(&tree.borrow(), &s, true));
    }

    #[test]
    fn empty_segment_flag_decides_all_negative_histories() {
        let (tree, a, _b, _c) = chain_and_fork();
        let with_empty = TreeOrderClass::new(tree.clone(), false);
        let s = [ex(ROOT, Label::Minus)];
        assert!(!with_empty.realizable(&s).unwrap());
        assert!(!enumerated_realizable(&tree.borrow(), &s, false));
        let including = TreeOrderClass::new(tree.clone(), true);
        assert!(including.realizable(&s).unwrap());
        assert!(enumerated_realizable(&tree.borrow(), &s, true));
        // A non-root negative alone never binds.
        let s2 = [ex(a, Label::Minus)];
        assert!(with_empty.realizable(&s2).unwrap());
        assert!(including.realizable(&s2).unwrap());
    }

    #[test]
    fn root_is_forced_positive_without_the_empty_segment() {
        let (tree, a, _b, _c) = chain_and_fork();
        let class = TreeOrderClass::new(tree.clone(), false);
        assert_eq!(class.forced_label(&[], &ROOT).unwrap(), Some(Label::Plus));
        let class_with_empty = TreeOrderClass::new(tree.clone(), true);
        assert_eq!(class_with_empty.forced_label(&[], &ROOT).unwrap(), None);
        // Ancestors of a positive are forced positive either way.
        let s = [ex(a, Label::Plus)];
        assert_eq!(class_with_empty.forced_label(&s, &ROOT).unwrap(), Some(Label::Plus));
    }

    #[test]
    fn hard_tree_paths_match_segments_without_empty() {
        let tree = uniform_tree(2, 2);
        let class = HardTreePathClass::new(tree.clone());
        let n = tree.borrow().len() as u32;
        let mut sets = vec![vec![]];
        for v in 0..n.min(4) {
            for label in [Label::Plus, Label::Minus] {
                let mut extra: Vec<Vec<LabeledExample<NodeId>>> = Vec::new();
                for s in &sets {
                    let mut t = s.clone();
                    t.push(ex(NodeId(v), label));
                    extra.push(t);
                }
                sets.extend(extra);
            }
        }
        for s in &sets {
            if s.iter().map(|e| e.point).collect::<std::collections::HashSet<_>>().len() < s.len() {
                continue; // duplicate-point sets are not histories
            }
            assert_eq!(
                class.realizable(s).unwrap(),
                enumerated_realizable(&tree.borrow(), s, false),
                "set {s:?}"
            );
        }
    }

    #[test]
    fn relabel_with_all_minus_reference_is_the_identity() {
        let (tree, a, b, c) = chain_and_fork();
        let order = TreeOrderClass::new(tree.clone(), true);
        let reference = vec![Label::Minus; tree.borrow().len()];
        let wrapper = RelabeledVc1Class::new(order.clone(), reference).unwrap();
        for s in [
            vec![ex(ROOT, Label::Plus), ex(a, Label::Plus)],
            vec![ex(a, Label::Plus), ex(c, Label::Plus)],
            vec![ex(b, Label::Minus), ex(ROOT, Label::Minus)],
        ] {
            assert_eq!(wrapper.realizable(&s).unwrap(), order.realizable(&s).unwrap());
        }
    }

    #[test]
    fn relabel_wrapper_matches_finite_enumeration() {
        // Class over 3 nodes (root, a, b with b under a): hypotheses are the
        // complements of initial segments; r = all-plus flips them back.
        let tree = Tree::shared();
        let a = tree.borrow_mut().add_child(ROOT).unwrap();
        let _b = tree.borrow_mut().add_child(a).unwrap();
        let order = TreeOrderClass::new(tree.clone(), true);
        let wrapper =
            RelabeledVc1Class::new(order, vec![Label::Plus, Label::Plus, Label::Plus]).unwrap();
        // Direct table: complement of each segment {∅, {root}, {root,a}, {root,a,b}}.
        let rows = vec![
            vec![Label::Plus, Label::Plus, Label::Plus],
            vec![Label::Minus, Label::Plus, Label::Plus],
            vec![Label::Minus, Label::Minus, Label::Plus],
            vec![Label::Minus, Label::Minus, Label::Minus],
        ];
        let direct = FiniteClass::from_rows(rows).unwrap();
        wrapper.validate_against(&direct, 4).unwrap();
    }

    #[test]
    fn relabel_wrapper_detects_wrong_structure() {
        let tree = Tree::shared();
        let _a = tree.borrow_mut().add_child(ROOT).unwrap();
        let order = TreeOrderClass::new(tree.clone(), true);
        let wrapper = RelabeledVc1Class::new(order, vec![Label::Minus, Label::Minus]).unwrap();
        // A table the wrapper cannot produce: both nodes always disagree.
        let rows = vec![
            vec![Label::Plus, Label::Minus],
            vec![Label::Minus, Label::Plus],
        ];
        let direct = FiniteClass::from_rows(rows).unwrap();
        assert!(matches!(wrapper.validate_against(&direct, 2), Err(Error::Structure(_))));
    }

    #[test]
    fn tree_spec_loads_and_rejects_cycles() {
        let spec: TreeSpec = serde_json::from_str(
            r#"{"nodes": ["r", "a", "b"], "parents": {"a": "r", "b": "a"}}"#,
        )
        .unwrap();
        let named = NamedTree::from_spec(&spec).unwrap();
        assert_eq!(named.names.len(), 3);
        let r = named.node("r").unwrap();
        let b = named.node("b").unwrap();
        assert!(named.tree.borrow().is_ancestor(r, b).unwrap());

        let cyclic: TreeSpec = serde_json::from_str(
            r#"{"nodes": ["r", "a", "b"], "parents": {"a": "b", "b": "a"}}"#,
        )
        .unwrap();
        assert!(matches!(NamedTree::from_spec(&cyclic), Err(Error::Structure(_))));

        let two_roots: TreeSpec =
            serde_json::from_str(r#"{"nodes": ["r", "a"], "parents": {}}"#).unwrap();
        assert!(matches!(NamedTree::from_spec(&two_roots), Err(Error::Structure(_))));
    }

    #[test]
    fn unknown_nodes_are_domain_errors() {
        let (tree, _a, _b, _c) = chain_and_fork();
        let class = TreeOrderClass::new(tree, true);
        let s = [ex(NodeId(99), Label::Plus)];
        assert!(matches!(class.realizable(&s), Err(Error::Domain(_))));
    }
}
