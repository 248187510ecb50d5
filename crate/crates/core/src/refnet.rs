//! Hierarchical reference net: a leveled metric index whose nodes may have several parents.
//!
//! Level `i` carries radius `base * 2^i`. Each object is stored once, at the highest level it
//! occupies (its `top`), and is implicitly present at every level below. A node keeps one child
//! list per level `i <= top`; the list at level `i` holds objects whose top is `i - 1` and that
//! lie within `base * 2^i` of the node. The structure maintains:
//!
//! - cover: every non-root node has between 1 and `num_max` parents, each within the radius of
//!   the list that holds it;
//! - separation: two objects present at the same level `i` are farther apart than
//!   `base * 2^i`.
//!
//! Any descendant of a list at level `i` lies within `base * 2^(i+1)` of the list owner, which
//! is what lets a range query accept or discard whole subtrees from one distance evaluation.
//!
//! Objects at distance zero from an existing node cannot be separated from it at any level, so
//! they are kept in a twin bucket on that node and reported together with it.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::distance::{DistanceError, DistanceKind, DistanceSpec};
use crate::sequence::{Element, Point};

pub type ObjectId = u32;

const FORMAT_HEADER: &str = "refnet 1";

#[derive(Debug, Error)]
pub enum NetError {
    #[error("{0} is not a metric and cannot back a reference net")]
    NotMetric(DistanceKind),
    #[error("invalid net configuration: {0}")]
    Config(String),
    #[error("object {0} is already indexed")]
    Duplicate(ObjectId),
    #[error("object {0} is not indexed")]
    Missing(ObjectId),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("index line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("index failed validation: {0}")]
    Invalid(NetReport),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Base radius and parent cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetConfig {
    base_radius: f64,
    num_max: Option<usize>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { base_radius: 1.0, num_max: Some(5) }
    }
}

impl NetConfig {
    /// `num_max = None` leaves the number of parents unlimited.
    pub fn new(base_radius: f64, num_max: Option<usize>) -> Result<Self, NetError> {
        if !(base_radius.is_finite() && base_radius > 0.0) {
            return Err(NetError::Config(format!("base radius must be positive, got {base_radius}")));
        }
        if num_max == Some(0) {
            return Err(NetError::Config("num_max must be at least 1".into()));
        }
        Ok(NetConfig { base_radius, num_max })
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn num_max(&self) -> Option<usize> {
        self.num_max
    }

    pub fn radius(&self, level: i32) -> f64 {
        self.base_radius * 2f64.powi(level)
    }
}

#[derive(Clone, Debug)]
struct Node {
    id: ObjectId,
    payload: Vec<Element>,
    top: i32,
    /// `(level, members)` with levels strictly decreasing; members are slots.
    lists: Vec<(i32, Vec<u32>)>,
    parents: Vec<u32>,
    twins: Vec<ObjectId>,
}

impl Node {
    fn new(id: ObjectId, payload: Vec<Element>, top: i32) -> Self {
        Node { id, payload, top, lists: Vec::new(), parents: Vec::new(), twins: Vec::new() }
    }

    fn list(&self, level: i32) -> &[u32] {
        self.lists.iter().find(|(l, _)| *l == level).map_or(&[], |(_, m)| m.as_slice())
    }

    fn list_mut(&mut self, level: i32) -> &mut Vec<u32> {
        let pos = match self.lists.iter().position(|(l, _)| *l <= level) {
            Some(p) if self.lists[p].0 == level => p,
            Some(p) => {
                self.lists.insert(p, (level, Vec::new()));
                p
            }
            None => {
                self.lists.push((level, Vec::new()));
                self.lists.len() - 1
            }
        };
        &mut self.lists[pos].1
    }

    fn remove_member(&mut self, level: i32, member: u32) {
        if let Some(p) = self.lists.iter().position(|(l, _)| *l == level) {
            self.lists[p].1.retain(|&m| m != member);
            if self.lists[p].1.is_empty() {
                self.lists.remove(p);
            }
        }
    }

    fn members(&self) -> impl Iterator<Item = u32> + '_ {
        self.lists.iter().flat_map(|(_, m)| m.iter().copied())
    }
}

#[derive(Clone, Debug)]
struct Twin {
    owner: ObjectId,
    payload: Vec<Element>,
}

/// One object returned by a range query. `distance` is `None` when the object was accepted
/// through a covering bound without being evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub id: ObjectId,
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct RangeResult {
    /// Matches sorted by id.
    pub hits: Vec<Hit>,
    /// Objects excluded by a bound or by evaluation, sorted by id.
    pub pruned: Vec<ObjectId>,
    /// Distance evaluations spent on this query.
    pub computations: u64,
}

impl RangeResult {
    pub fn ids(&self) -> Vec<ObjectId> {
        self.hits.iter().map(|h| h.id).collect()
    }
}

/// Size figures for space-overhead reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NetStats {
    /// Levels spanned, counting from `min(0, lowest top)` up to the root's top.
    pub levels: usize,
    /// Indexed objects, twins included.
    pub nodes: usize,
    pub twins: usize,
    /// Non-empty child lists.
    pub lists: usize,
    /// Total list memberships (parent links).
    pub entries: usize,
    /// `entries` divided by the number of nodes that need a parent.
    pub avg_parents: f64,
    pub avg_list_size: f64,
    /// Rough in-memory footprint of the structure, payloads excluded.
    pub estimated_bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetViolation {
    /// A list member lies outside its list radius.
    CoverRadius { parent: ObjectId, child: ObjectId, level: i32, distance: f64, radius: f64 },
    /// A non-root node without parents.
    Orphan { node: ObjectId },
    /// Two objects present at the same level are within that level's radius.
    Separation { a: ObjectId, b: ObjectId, level: i32, distance: f64 },
    ParentCap { node: ObjectId, parents: usize, cap: usize },
    /// A list member whose top does not sit directly below the list level, or a member stored
    /// at more than one level.
    Level { node: ObjectId, detail: String },
    /// Parent and child links disagree.
    Link { parent: ObjectId, child: ObjectId },
    Unreachable { node: ObjectId },
    Root { detail: String },
    Twin { owner: ObjectId, twin: ObjectId, detail: String },
}

/// Outcome of [`ReferenceNet::validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetReport {
    pub violations: Vec<NetViolation>,
}

impl NetReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&NetViolation) -> bool) -> usize {
        self.violations.iter().filter(|v| pred(v)).count()
    }
}

impl fmt::Display for NetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return write!(f, "clean");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "; {v:?}")?;
        }
        Ok(())
    }
}

enum Placement {
    Twin(u32),
    At { level: i32, parents: Vec<(u32, f64)> },
}

#[derive(Clone, Debug)]
pub struct ReferenceNet {
    config: NetConfig,
    distance: DistanceSpec,
    slots: Vec<Option<Node>>,
    free: Vec<u32>,
    slot_of: HashMap<ObjectId, u32>,
    twins: HashMap<ObjectId, Twin>,
    root: Option<u32>,
    build_computations: u64,
}

impl ReferenceNet {
    pub fn new(distance: DistanceSpec, config: NetConfig) -> Result<Self, NetError> {
        if !distance.declared_metric() {
            return Err(NetError::NotMetric(distance.kind()));
        }
        Ok(ReferenceNet {
            config,
            distance,
            slots: Vec::new(),
            free: Vec::new(),
            slot_of: HashMap::new(),
            twins: HashMap::new(),
            root: None,
            build_computations: 0,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn distance(&self) -> &DistanceSpec {
        &self.distance
    }

    /// Indexed objects, twins included.
    pub fn len(&self) -> usize {
        self.slot_of.len() + self.twins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.slot_of.contains_key(&id) || self.twins.contains_key(&id)
    }

    pub fn root_id(&self) -> Option<ObjectId> {
        self.root.map(|s| self.node(s).id)
    }

    /// Level of the top of the hierarchy, if any.
    pub fn top_level(&self) -> Option<i32> {
        self.root.map(|s| self.node(s).top)
    }

    /// Highest level an object occupies; twins report their owner's.
    pub fn level_of(&self, id: ObjectId) -> Option<i32> {
        let owner = self.twins.get(&id).map_or(id, |t| t.owner);
        self.slot_of.get(&owner).map(|&s| self.node(s).top)
    }

    pub fn payload(&self, id: ObjectId) -> Option<&[Element]> {
        if let Some(&s) = self.slot_of.get(&id) {
            return Some(&self.node(s).payload);
        }
        self.twins.get(&id).map(|t| t.payload.as_slice())
    }

    /// Ids of every indexed object, ascending.
    pub fn ids(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self.slot_of.keys().chain(self.twins.keys()).copied().collect();
        ids.sort_unstable();
        ids
    }

    /// Parents of an object, ascending by id.
    pub fn parents_of(&self, id: ObjectId) -> Vec<ObjectId> {
        let mut out: Vec<ObjectId> = self
            .slot_of
            .get(&id)
            .map(|&s| self.node(s).parents.iter().map(|&p| self.node(p).id).collect())
            .unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// Distance evaluations spent by insertions and deletions so far.
    pub fn build_computations(&self) -> u64 {
        self.build_computations
    }

    fn node(&self, slot: u32) -> &Node {
        self.slots[slot as usize].as_ref().expect("live slot")
    }

    fn node_mut(&mut self, slot: u32) -> &mut Node {
        self.slots[slot as usize].as_mut().expect("live slot")
    }

    fn alloc(&mut self, node: Node) -> u32 {
        let id = node.id;
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = Some(node);
                s
            }
            None => {
                self.slots.push(Some(node));
                (self.slots.len() - 1) as u32
            }
        };
        self.slot_of.insert(id, slot);
        slot
    }

    fn release(&mut self, slot: u32) -> Node {
        let node = self.slots[slot as usize].take().expect("live slot");
        self.slot_of.remove(&node.id);
        self.free.push(slot);
        node
    }

    fn measure(&mut self, slot: u32, payload: &[Element]) -> f64 {
        self.build_computations += 1;
        self.distance.eval_unchecked(&self.node(slot).payload, payload)
    }

    fn radius(&self, level: i32) -> f64 {
        self.config.radius(level)
    }

    fn sort_and_cap(&self, parents: &mut Vec<(u32, f64)>) {
        parents.sort_by(|a, b| {
            a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(self.node(a.0).id.cmp(&self.node(b.0).id))
        });
        if let Some(cap) = self.config.num_max {
            parents.truncate(cap);
        }
    }

    /// Inserts an object. The first object becomes the root at level 0; later objects descend
    /// from the root, growing the root's level first when the object lies beyond its radius.
    pub fn insert(&mut self, id: ObjectId, payload: Vec<Element>) -> Result<(), NetError> {
        if self.contains(id) {
            return Err(NetError::Duplicate(id));
        }
        let Some(root) = self.root else {
            self.distance.check(&payload, &payload)?;
            let slot = self.alloc(Node::new(id, payload, 0));
            self.root = Some(slot);
            return Ok(());
        };
        self.distance.check(&self.node(root).payload, &payload)?;
        let d_root = self.measure(root, &payload);
        if d_root == 0.0 {
            self.add_twin(root, id, payload);
            return Ok(());
        }
        while d_root > self.radius(self.node(root).top) {
            self.node_mut(root).top += 1;
        }
        match self.descend(root, d_root, &payload) {
            Placement::Twin(owner) => self.add_twin(owner, id, payload),
            Placement::At { level, parents } => {
                let slot = self.alloc(Node::new(id, payload, level));
                self.link(slot, level, parents);
            }
        }
        Ok(())
    }

    fn add_twin(&mut self, owner: u32, id: ObjectId, payload: Vec<Element>) {
        let owner_id = self.node(owner).id;
        self.node_mut(owner).twins.push(id);
        self.twins.insert(id, Twin { owner: owner_id, payload });
    }

    fn link(&mut self, slot: u32, level: i32, parents: Vec<(u32, f64)>) {
        for &(p, _) in &parents {
            self.node_mut(p).list_mut(level + 1).push(slot);
        }
        let node = self.node_mut(slot);
        node.top = level;
        node.parents = parents.into_iter().map(|(p, _)| p).collect();
    }

    /// Top-down search for the lowest level at which `payload` is separated from every object,
    /// with the parents that cover it one level up.
    fn descend(&mut self, root: u32, d_root: f64, payload: &[Element]) -> Placement {
        let mut level = self.node(root).top;
        // Objects present at `level` within radius(level + 1) of the payload.
        let mut cover = vec![(root, d_root)];
        let mut frames: Vec<(i32, Vec<(u32, f64)>)> = Vec::new();
        let mut seen: HashSet<u32> = HashSet::from([root]);
        loop {
            let mut cand = cover.clone();
            for i in 0..cover.len() {
                let owner = cover[i].0;
                for k in 0..self.node(owner).list(level).len() {
                    let c = self.node(owner).list(level)[k];
                    if seen.insert(c) {
                        let d = self.measure(c, payload);
                        if d == 0.0 {
                            return Placement::Twin(c);
                        }
                        cand.push((c, d));
                    }
                }
            }
            let r = self.radius(level);
            if cand.iter().all(|&(_, d)| d > r) {
                break;
            }
            cand.retain(|&(_, d)| d <= r);
            frames.push((level, std::mem::replace(&mut cover, cand)));
            level -= 1;
        }
        while let Some((level, frame)) = frames.pop() {
            let r = self.radius(level);
            let mut parents: Vec<(u32, f64)> = frame.into_iter().filter(|&(_, d)| d <= r).collect();
            if !parents.is_empty() {
                self.sort_and_cap(&mut parents);
                return Placement::At { level: level - 1, parents };
            }
        }
        unreachable!("the root frame always covers the payload")
    }

    /// Every object present at `level` within `radius(level)` of `payload`, excluding `skip`.
    /// Requires `level <= root top` and every reachable node to have a parent.
    fn search_level(&mut self, payload: &[Element], level: i32, skip: u32) -> Vec<(u32, f64)> {
        let root = self.root.expect("non-empty net");
        let mut current = self.node(root).top;
        let d_root = self.measure(root, payload);
        if d_root > self.radius(current + 1) {
            return Vec::new();
        }
        let mut cover = vec![(root, d_root)];
        let mut seen: HashSet<u32> = HashSet::from([root, skip]);
        while current > level {
            let mut cand = cover.clone();
            for i in 0..cover.len() {
                let owner = cover[i].0;
                for k in 0..self.node(owner).list(current).len() {
                    let c = self.node(owner).list(current)[k];
                    if seen.insert(c) {
                        let d = self.measure(c, payload);
                        cand.push((c, d));
                    }
                }
            }
            let r = self.radius(current);
            cand.retain(|&(_, d)| d <= r);
            cover = cand;
            current -= 1;
        }
        let r = self.radius(level);
        cover.retain(|&(_, d)| d <= r);
        cover
    }

    /// Removes an object. Children left without any parent are re-attached: at their current
    /// level when a covering parent exists, otherwise promoted level by level until one does.
    pub fn delete(&mut self, id: ObjectId) -> Result<(), NetError> {
        if let Some(twin) = self.twins.remove(&id) {
            let owner = self.slot_of[&twin.owner];
            self.node_mut(owner).twins.retain(|&t| t != id);
            return Ok(());
        }
        let slot = *self.slot_of.get(&id).ok_or(NetError::Missing(id))?;

        if !self.node(slot).twins.is_empty() {
            // A twin sits at distance zero, so it can take the node's place unchanged.
            let heir = self.node_mut(slot).twins.remove(0);
            let twin = self.twins.remove(&heir).expect("twin entry");
            let rest = self.node(slot).twins.clone();
            for t in rest {
                self.twins.get_mut(&t).expect("twin entry").owner = heir;
            }
            let node = self.node_mut(slot);
            node.id = heir;
            node.payload = twin.payload;
            self.slot_of.remove(&id);
            self.slot_of.insert(heir, slot);
            return Ok(());
        }

        let top = self.node(slot).top;
        for p in self.node(slot).parents.clone() {
            self.node_mut(p).remove_member(top + 1, slot);
        }
        let node = self.release(slot);
        let mut orphans = Vec::new();
        for m in node.members() {
            let child = self.node_mut(m);
            child.parents.retain(|&p| p != slot);
            if child.parents.is_empty() {
                orphans.push(m);
            }
        }

        if self.root == Some(slot) {
            match node.lists.first() {
                None => {
                    self.root = None;
                    return Ok(());
                }
                Some((level, members)) => {
                    let heir = self.pick_new_root(members);
                    self.node_mut(heir).top = *level;
                    self.root = Some(heir);
                    orphans.retain(|&o| o != heir);
                }
            }
        }

        orphans.sort_by_key(|&o| (Reverse(self.node(o).top), self.node(o).id));
        for o in orphans {
            self.reattach(o);
        }
        Ok(())
    }

    /// Member with the largest median distance to the other members; ties go to the smaller id.
    fn pick_new_root(&mut self, members: &[u32]) -> u32 {
        if members.len() == 1 {
            return members[0];
        }
        let mut best: Option<(f64, ObjectId, u32)> = None;
        for &m in members {
            let payload = self.node(m).payload.clone();
            let mut ds: Vec<f64> =
                members.iter().filter(|&&o| o != m).map(|&o| self.measure(o, &payload)).collect();
            ds.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            let median = ds[(ds.len() - 1) / 2];
            let id = self.node(m).id;
            let better = match best {
                None => true,
                Some((bm, bid, _)) => median > bm || (median == bm && id < bid),
            };
            if better {
                best = Some((median, id, m));
            }
        }
        best.expect("at least one member").2
    }

    fn reattach(&mut self, slot: u32) {
        let payload = self.node(slot).payload.clone();
        let root = self.root.expect("non-empty net");
        loop {
            let target = self.node(slot).top + 1;
            if target > self.node(root).top {
                self.node_mut(root).top = target;
            }
            let mut parents = self.search_level(&payload, target, slot);
            if !parents.is_empty() {
                self.sort_and_cap(&mut parents);
                let level = target - 1;
                self.link(slot, level, parents);
                return;
            }
            // Nothing at `target` lies within its radius, so the node is separated there.
            self.node_mut(slot).top = target;
        }
    }

    /// All objects within `eps` of `query`.
    ///
    /// Nodes are visited top-down. A node whose status is still open is evaluated; for each of
    /// its lists at level `i`, members are accepted (or discarded) together with their whole
    /// subtrees when `d + r(i+1) <= eps` (or `d - r(i+1) > eps`), and only the members themselves
    /// when the test passes with `r(i)`. A member decided by the narrower test is not evaluated
    /// but inherits the interval `[d - r(i), d + r(i)]`, which its own lists then use in place
    /// of an exact distance.
    pub fn range_query(&self, query: &[Element], eps: f64) -> RangeResult {
        const OPEN: u8 = 0;
        const SELF_IN: u8 = 1;
        const SELF_OUT: u8 = 2;
        const SUB_IN: u8 = 3;
        const SUB_OUT: u8 = 4;
        const EVAL_IN: u8 = 5;
        const EVAL_OUT: u8 = 6;

        let Some(root) = self.root else {
            return RangeResult::default();
        };
        let slack = 1e-9 * eps.abs().max(1.0);
        let mut state = vec![OPEN; self.slots.len()];
        let mut queued = vec![false; self.slots.len()];
        let mut evaluated: Vec<(u32, f64)> = Vec::new();
        let mut computations = 0u64;
        let mut heap = BinaryHeap::new();
        heap.push((self.node(root).top, Reverse(self.node(root).id), root));
        queued[root as usize] = true;

        let mark_subtree = |state: &mut Vec<u8>, start: u32, mark: u8| {
            let mut stack = vec![start];
            while let Some(s) = stack.pop() {
                if matches!(state[s as usize], SUB_IN | SUB_OUT) {
                    continue;
                }
                debug_assert!(
                    !matches!((state[s as usize], mark), (SELF_IN | EVAL_IN, SUB_OUT) | (SELF_OUT | EVAL_OUT, SUB_IN)),
                    "contradictory classification"
                );
                state[s as usize] = mark;
                stack.extend(self.node(s).members());
            }
        };

        // Bounds on d(query, node) inherited from ancestors; exact once evaluated.
        let mut lower = vec![0.0f64; self.slots.len()];
        let mut upper = vec![f64::INFINITY; self.slots.len()];
        while let Some((_, _, s)) = heap.pop() {
            let node = self.node(s);
            let si = s as usize;
            if matches!(state[si], SUB_IN | SUB_OUT) {
                continue;
            }
            if state[si] == OPEN {
                let d = self.distance.eval_unchecked(query, &node.payload);
                computations += 1;
                state[si] = if d <= eps { EVAL_IN } else { EVAL_OUT };
                if d <= eps {
                    evaluated.push((s, d));
                }
                (lower[si], upper[si]) = (d, d);
            }
            let (lo, hi) = (lower[si], upper[si]);
            for (level, members) in &node.lists {
                let (narrow, wide) = (self.radius(*level), self.radius(*level + 1));
                for &m in members {
                    let mi = m as usize;
                    if hi + wide <= eps - slack {
                        mark_subtree(&mut state, m, SUB_IN);
                    } else if lo - wide > eps + slack {
                        mark_subtree(&mut state, m, SUB_OUT);
                    } else {
                        lower[mi] = lower[mi].max(lo - narrow);
                        upper[mi] = upper[mi].min(hi + narrow);
                        if state[mi] == OPEN {
                            if upper[mi] <= eps - slack {
                                state[mi] = SELF_IN;
                            } else if lower[mi] > eps + slack {
                                state[mi] = SELF_OUT;
                            }
                        }
                    }
                }
            }
            for m in node.members() {
                if !queued[m as usize] && !matches!(state[m as usize], SUB_IN | SUB_OUT) {
                    queued[m as usize] = true;
                    let child = self.node(m);
                    heap.push((child.top, Reverse(child.id), m));
                }
            }
        }

        let exact: HashMap<u32, f64> = evaluated.into_iter().collect();
        let mut hits = Vec::new();
        let mut pruned = Vec::new();
        for (s, st) in state.iter().enumerate() {
            let Some(node) = self.slots[s].as_ref() else { continue };
            match *st {
                SELF_IN | SUB_IN | EVAL_IN => {
                    let distance = exact.get(&(s as u32)).copied();
                    hits.push(Hit { id: node.id, distance });
                    hits.extend(node.twins.iter().map(|&t| Hit { id: t, distance }));
                }
                SELF_OUT | SUB_OUT | EVAL_OUT => {
                    pruned.push(node.id);
                    pruned.extend(node.twins.iter().copied());
                }
                _ => debug_assert!(false, "node {} left unclassified", node.id),
            }
        }
        hits.sort_by_key(|h| h.id);
        pruned.sort_unstable();
        RangeResult { hits, pruned, computations }
    }

    /// Exhaustive structural check. Costs one distance per pair of stored nodes.
    pub fn validate(&self) -> NetReport {
        let mut v = Vec::new();
        let live: Vec<u32> = (0..self.slots.len() as u32).filter(|&s| self.slots[s as usize].is_some()).collect();
        let Some(root) = self.root else {
            if !live.is_empty() || !self.twins.is_empty() {
                v.push(NetViolation::Root { detail: "objects stored without a root".into() });
            }
            return NetReport { violations: v };
        };
        let root_node = self.node(root);
        if !root_node.parents.is_empty() {
            v.push(NetViolation::Root { detail: "root has parents".into() });
        }
        let cap = self.config.num_max;

        for &s in &live {
            let node = self.node(s);
            if s != root {
                if node.parents.is_empty() {
                    v.push(NetViolation::Orphan { node: node.id });
                }
                if node.top >= root_node.top {
                    v.push(NetViolation::Root {
                        detail: format!("node {} at level {} not below the root", node.id, node.top),
                    });
                }
            }
            if let Some(cap) = cap {
                if node.parents.len() > cap {
                    v.push(NetViolation::ParentCap { node: node.id, parents: node.parents.len(), cap });
                }
            }
            for &p in &node.parents {
                match self.slots.get(p as usize).and_then(Option::as_ref) {
                    Some(parent) if parent.list(node.top + 1).contains(&s) => {}
                    Some(parent) => v.push(NetViolation::Link { parent: parent.id, child: node.id }),
                    None => v.push(NetViolation::Link { parent: u32::MAX, child: node.id }),
                }
            }
            let mut prev_level = i32::MAX;
            for (level, members) in &node.lists {
                if *level >= prev_level || *level > node.top {
                    v.push(NetViolation::Level {
                        node: node.id,
                        detail: format!("list at level {level} out of order or above top {}", node.top),
                    });
                }
                prev_level = *level;
                let r = self.radius(*level);
                for &m in members {
                    let Some(child) = self.slots.get(m as usize).and_then(Option::as_ref) else {
                        v.push(NetViolation::Link { parent: node.id, child: u32::MAX });
                        continue;
                    };
                    if child.top != level - 1 {
                        v.push(NetViolation::Level {
                            node: child.id,
                            detail: format!("top {} listed at level {level} of {}", child.top, node.id),
                        });
                    }
                    if !child.parents.contains(&s) {
                        v.push(NetViolation::Link { parent: node.id, child: child.id });
                    }
                    let d = self.distance.eval_unchecked(&node.payload, &child.payload);
                    if d > r {
                        v.push(NetViolation::CoverRadius {
                            parent: node.id,
                            child: child.id,
                            level: *level,
                            distance: d,
                            radius: r,
                        });
                    }
                }
            }
            for &t in &node.twins {
                match self.twins.get(&t) {
                    Some(tw) if tw.owner == node.id => {
                        let d = self.distance.eval_unchecked(&node.payload, &tw.payload);
                        if d != 0.0 {
                            v.push(NetViolation::Twin { owner: node.id, twin: t, detail: format!("distance {d}") });
                        }
                    }
                    _ => v.push(NetViolation::Twin { owner: node.id, twin: t, detail: "missing entry".into() }),
                }
            }
        }
        for (&t, tw) in &self.twins {
            let listed = self.slot_of.get(&tw.owner).is_some_and(|&s| self.node(s).twins.contains(&t));
            if !listed {
                v.push(NetViolation::Twin { owner: tw.owner, twin: t, detail: "owner does not list twin".into() });
            }
        }

        for (i, &a) in live.iter().enumerate() {
            for &b in &live[i + 1..] {
                let (na, nb) = (self.node(a), self.node(b));
                let level = na.top.min(nb.top);
                let d = self.distance.eval_unchecked(&na.payload, &nb.payload);
                if d <= self.radius(level) {
                    v.push(NetViolation::Separation { a: na.id.min(nb.id), b: na.id.max(nb.id), level, distance: d });
                }
            }
        }

        let mut reached = vec![false; self.slots.len()];
        let mut stack = vec![root];
        reached[root as usize] = true;
        while let Some(s) = stack.pop() {
            for m in self.node(s).members() {
                if (m as usize) < reached.len() && !reached[m as usize] && self.slots[m as usize].is_some() {
                    reached[m as usize] = true;
                    stack.push(m);
                }
            }
        }
        for &s in &live {
            if !reached[s as usize] {
                v.push(NetViolation::Unreachable { node: self.node(s).id });
            }
        }
        NetReport { violations: v }
    }

    pub fn stats(&self) -> NetStats {
        let Some(root) = self.root else {
            return NetStats::default();
        };
        let mut lists = 0;
        let mut entries = 0;
        let mut lowest = i32::MAX;
        for node in self.slots.iter().flatten() {
            lists += node.lists.len();
            entries += node.lists.iter().map(|(_, m)| m.len()).sum::<usize>();
            lowest = lowest.min(node.top);
        }
        let structural = self.slot_of.len();
        let top = self.node(root).top;
        let levels = (top - lowest.min(0) + 1) as usize;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        NetStats {
            levels,
            nodes: self.len(),
            twins: self.twins.len(),
            lists,
            entries,
            avg_parents: ratio(entries, structural - 1),
            avg_list_size: ratio(entries, lists),
            // id + top + two vec headers per node, level + vec header per list, 4 bytes per link
            // in each direction
            estimated_bytes: structural * (4 + 4 + 24 + 24) + lists * (4 + 24) + entries * 8 + self.twins.len() * 8,
        }
    }

    /// Writes the line-oriented index format. Payloads are not written when
    /// `payload_ref` is given; the reader must then supply them.
    pub fn write_to<W: Write>(&self, out: &mut W, payload_ref: Option<&str>) -> Result<(), NetError> {
        writeln!(out, "{FORMAT_HEADER}")?;
        writeln!(out, "base_radius {}", self.config.base_radius)?;
        match self.config.num_max {
            Some(n) => writeln!(out, "num_max {n}")?,
            None => writeln!(out, "num_max unlimited")?,
        }
        writeln!(out, "levels {}", self.stats().levels)?;
        writeln!(out, "distance {}", self.distance.kind())?;
        writeln!(out, "gap {}", encode_element(&self.distance.gap()))?;
        match self.root_id() {
            Some(r) => writeln!(out, "root {r}")?,
            None => writeln!(out, "root none")?,
        }
        let mut slots: Vec<u32> = self.slot_of.values().copied().collect();
        slots.sort_by_key(|&s| self.node(s).id);
        writeln!(out, "nodes {}", slots.len())?;
        let ids = |members: &[u32]| -> String {
            members.iter().map(|&m| self.node(m).id.to_string()).collect::<Vec<_>>().join(",")
        };
        for &s in &slots {
            let n = self.node(s);
            let lists: Vec<String> = n.lists.iter().map(|(l, m)| format!("{l}:{}", ids(m))).collect();
            let twins: Vec<String> = n.twins.iter().map(|t| t.to_string()).collect();
            writeln!(
                out,
                "node {} {} parents={} children={} twins={}",
                n.id,
                n.top,
                ids(&n.parents),
                lists.join(";"),
                twins.join(",")
            )?;
        }
        match payload_ref {
            Some(r) => writeln!(out, "payload external {r}")?,
            None => {
                writeln!(out, "payload inline")?;
                for id in self.ids() {
                    let p = self.payload(id).expect("indexed payload");
                    let enc: Vec<String> = p.iter().map(encode_element).collect();
                    writeln!(out, "p {id} {}", enc.join(" "))?;
                }
            }
        }
        Ok(())
    }

    /// Reads the format produced by [`ReferenceNet::write_to`] and validates the result.
    ///
    /// `external` supplies payloads when the file references an external store. Returns the net
    /// and the external reference, if any.
    pub fn read_from(
        text: &str,
        external: Option<&dyn Fn(ObjectId) -> Option<Vec<Element>>>,
    ) -> Result<(ReferenceNet, Option<String>), NetError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).peekable();
        let fail = |line: usize, message: &str| NetError::Format { line, message: message.to_string() };
        let mut field = |key: &str| -> Result<(usize, String), NetError> {
            let (no, line) = lines.next().ok_or_else(|| fail(0, &format!("missing {key}")))?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| fail(no, &format!("expected `{key}`")))?;
            Ok((no, rest.to_string()))
        };

        let (no, header) = field("refnet")?;
        if format!("refnet {header}") != FORMAT_HEADER {
            return Err(fail(no, "unsupported format version"));
        }
        let (no, base) = field("base_radius")?;
        let base: f64 = base.parse().map_err(|_| fail(no, "bad base radius"))?;
        let (no, nm) = field("num_max")?;
        let num_max = if nm == "unlimited" {
            None
        } else {
            Some(nm.parse::<usize>().map_err(|_| fail(no, "bad num_max"))?)
        };
        let config = NetConfig::new(base, num_max)?;
        let (_, _levels) = field("levels")?;
        let (no, kind) = field("distance")?;
        let kind: DistanceKind = kind.parse().map_err(|_| fail(no, "unknown distance"))?;
        let (no, gap) = field("gap")?;
        let gap = decode_element(&gap).ok_or_else(|| fail(no, "bad gap element"))?;
        let distance = DistanceSpec::new(kind, gap.alphabet()).with_gap(gap);
        let (no, root) = field("root")?;
        let root_id: Option<ObjectId> = if root == "none" {
            None
        } else {
            Some(root.parse().map_err(|_| fail(no, "bad root id"))?)
        };
        let (no, count) = field("nodes")?;
        let count: usize = count.parse().map_err(|_| fail(no, "bad node count"))?;

        struct Raw {
            line: usize,
            id: ObjectId,
            top: i32,
            parents: Vec<ObjectId>,
            lists: Vec<(i32, Vec<ObjectId>)>,
            twins: Vec<ObjectId>,
        }
        let parse_ids = |s: &str| -> Option<Vec<ObjectId>> {
            if s.is_empty() {
                return Some(Vec::new());
            }
            s.split(',').map(|t| t.parse().ok()).collect()
        };
        let mut raws = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, rest) = field("node")?;
            let parts: Vec<&str> = rest.split(' ').collect();
            let bad = || fail(no, "malformed node line");
            if parts.len() != 5 {
                return Err(bad());
            }
            let id = parts[0].parse().map_err(|_| bad())?;
            let top = parts[1].parse().map_err(|_| bad())?;
            let parents = parts[2].strip_prefix("parents=").and_then(parse_ids).ok_or_else(bad)?;
            let children = parts[3].strip_prefix("children=").ok_or_else(bad)?;
            let mut lists = Vec::new();
            if !children.is_empty() {
                for chunk in children.split(';') {
                    let (l, m) = chunk.split_once(':').ok_or_else(bad)?;
                    lists.push((l.parse().map_err(|_| bad())?, parse_ids(m).ok_or_else(bad)?));
                }
            }
            let twins = parts[4].strip_prefix("twins=").and_then(parse_ids).ok_or_else(bad)?;
            raws.push(Raw { line: no, id, top, parents, lists, twins });
        }

        let (no, mode) = field("payload")?;
        let mut inline: HashMap<ObjectId, Vec<Element>> = HashMap::new();
        let external_ref = if mode == "inline" {
            for (no, line) in lines.by_ref() {
                if line.is_empty() {
                    continue;
                }
                let rest = line.strip_prefix("p ").ok_or_else(|| fail(no, "expected payload line"))?;
                let (id, body) = rest.split_once(' ').unwrap_or((rest, ""));
                let id: ObjectId = id.parse().map_err(|_| fail(no, "bad payload id"))?;
                let elements: Option<Vec<Element>> = body.split_whitespace().map(decode_element).collect();
                inline.insert(id, elements.ok_or_else(|| fail(no, "bad payload element"))?);
            }
            None
        } else if let Some(r) = mode.strip_prefix("external ") {
            Some(r.to_string())
        } else {
            return Err(fail(no, "unknown payload mode"));
        };
        let lookup = |id: ObjectId, line: usize| -> Result<Vec<Element>, NetError> {
            let found = match &external_ref {
                None => inline.get(&id).cloned(),
                Some(_) => external.and_then(|f| f(id)),
            };
            found.ok_or_else(|| fail(line, &format!("no payload for object {id}")))
        };

        let mut net = ReferenceNet::new(distance, config)?;
        for raw in &raws {
            if net.slot_of.contains_key(&raw.id) {
                return Err(fail(raw.line, "duplicate node id"));
            }
            let payload = lookup(raw.id, raw.line)?;
            net.alloc(Node::new(raw.id, payload, raw.top));
        }
        let slot = |id: ObjectId, line: usize| -> Result<u32, NetError> {
            net.slot_of.get(&id).copied().ok_or_else(|| fail(line, &format!("unknown node {id}")))
        };
        let mut wired = Vec::with_capacity(raws.len());
        for raw in &raws {
            let parents = raw.parents.iter().map(|&p| slot(p, raw.line)).collect::<Result<Vec<_>, _>>()?;
            let mut lists = Vec::new();
            for (l, members) in &raw.lists {
                let m = members.iter().map(|&c| slot(c, raw.line)).collect::<Result<Vec<_>, _>>()?;
                lists.push((*l, m));
            }
            wired.push((slot(raw.id, raw.line)?, parents, lists));
        }
        for (s, parents, lists) in wired {
            let node = net.node_mut(s);
            node.parents = parents;
            node.lists = lists;
        }
        for raw in &raws {
            for &t in &raw.twins {
                if net.contains(t) {
                    return Err(fail(raw.line, "duplicate twin id"));
                }
                let payload = lookup(t, raw.line)?;
                let owner = net.slot_of[&raw.id];
                net.add_twin(owner, t, payload);
            }
        }
        net.root = match root_id {
            Some(r) => Some(*net.slot_of.get(&r).ok_or_else(|| fail(0, "root is not a node"))?),
            None => None,
        };
        for p in net.slots.iter().flatten() {
            if let Err(e) = net.distance.check(&p.payload, &p.payload) {
                return Err(e.into());
            }
        }
        let report = net.validate();
        if !report.is_clean() {
            return Err(NetError::Invalid(report));
        }
        Ok((net, external_ref))
    }
}

/// `s:<hex code point>` for symbols, `v:<c1>,<c2>,...` for vectors.
pub fn encode_element(e: &Element) -> String {
    match e {
        Element::Symbol(c) => format!("s:{:x}", *c as u32),
        Element::Vector(p) => {
            let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
            format!("v:{}", coords.join(","))
        }
    }
}

pub fn decode_element(s: &str) -> Option<Element> {
    if let Some(hex) = s.strip_prefix("s:") {
        return char::from_u32(u32::from_str_radix(hex, 16).ok()?).map(Element::Symbol);
    }
    let coords: Vec<f64> = s.strip_prefix("v:")?.split(',').map(|c| c.parse().ok()).collect::<Option<_>>()?;
    Point::new(&coords).ok().map(Element::Vector)
}
