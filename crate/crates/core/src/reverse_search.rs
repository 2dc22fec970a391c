//! Lazy reverse search that computes the adaptive cost-to-go heuristic.
//!
//! A Lifelong Planning A* from the goals towards the start over the sampled
//! graph, with edges weighted by the admissible cost estimate and no
//! collision checking. When the forward search discovers an invalid edge the
//! labels are repaired incrementally instead of recomputed.

use std::cmp::Ordering;
use crate::graph::{Graph, StateId};
use crate::heap::IndexedHeap;

/// Per-state label pair.
///
/// `connected` is the cost-to-go when the state was last connected to the
/// reverse tree, `expanded` the cost-to-go when it was last expanded. A
/// state is consistent when both agree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReverseLabel {
    pub connected: f64,
    pub expanded: f64,
}

impl ReverseLabel {
    pub const UNREACHED: ReverseLabel = ReverseLabel {
        connected: f64::INFINITY,
        expanded: f64::INFINITY,
    };

    pub fn is_consistent(&self) -> bool {
        self.connected == self.expanded
    }
}

/// Lexicographic vertex key `(min(h_con, h_exp) + ĝ, min(h_con, h_exp))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReverseVertexKey(pub f64, pub f64);

impl Eq for ReverseVertexKey {}

impl PartialOrd for ReverseVertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ReverseVertexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| self.1.total_cmp(&other.1))
    }
}

/// When the reverse search loop stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Termination {
    /// Stop as soon as the start is settled and no queued forward edge
    /// touches an inconsistent state.
    #[default]
    Lazy,
    /// Run until the vertex queue is empty.
    Quiescence,
}

/// Vertex queue ordered by key, then identifier.
#[derive(Clone, Debug, Default)]
struct VertexQueue {
    heap: IndexedHeap<ReverseVertexKey>,
}

impl VertexQueue {
    fn contains(&self, x: StateId) -> bool {
        self.heap.contains(x.index())
    }

    /// Inserts or rekeys. Returns true if `x` was not queued before.
    fn upsert(&mut self, x: StateId, key: ReverseVertexKey) -> bool {
        self.heap.push(x.index(), key)
    }

    fn remove(&mut self, x: StateId) -> bool {
        self.heap.remove(x.index()).is_some()
    }

    fn peek(&self) -> Option<(ReverseVertexKey, StateId)> {
        self.heap.peek().map(|(k, i)| (k, StateId(i as u32)))
    }

    fn pop(&mut self) -> Option<StateId> {
        self.heap.pop().map(|(_, i)| StateId(i as u32))
    }

    fn clear(&mut self) {
        self.heap.clear();
    }

    fn len(&self) -> usize {
        self.heap.len()
    }

    /// Queued states in heap order.
    fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.heap.iter().map(|(_, i)| StateId(i as u32))
    }

    fn sorted(&self) -> Vec<StateId> {
        let mut v: Vec<_> = self.heap.iter().collect();
        v.sort_unstable();
        v.into_iter().map(|(_, i)| StateId(i as u32)).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReverseSearch {
    labels: Vec<ReverseLabel>,
    queue: VertexQueue,
    changed: Vec<StateId>,
    expansions: u64,
    /// Queued states that touch a queued forward edge, for the current call.
    pending: usize,
    scratch: Vec<(StateId, f64)>,
}

impl ReverseSearch {
    pub fn new() -> Self {
        Self::default()
    }

    fn grow(&mut self, n: usize) {
        if self.labels.len() < n {
            self.labels.resize(n, ReverseLabel::UNREACHED);
        }
    }

    pub fn label(&self, x: StateId) -> ReverseLabel {
        self.labels
            .get(x.index())
            .copied()
            .unwrap_or(ReverseLabel::UNREACHED)
    }

    /// The adaptive cost-to-go heuristic, `h_con`.
    pub fn cost_to_go(&self, x: StateId) -> f64 {
        self.label(x).connected
    }

    pub fn key(&self, graph: &Graph, x: StateId) -> ReverseVertexKey {
        let l = self.label(x);
        let m = l.connected.min(l.expanded);
        ReverseVertexKey(m + graph.g_hat(x), m)
    }

    pub fn is_queued(&self, x: StateId) -> bool {
        self.queue.contains(x)
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Queued states in key order.
    pub fn queued(&self) -> Vec<StateId> {
        self.queue.sorted()
    }

    /// Total number of states popped from the vertex queue.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    /// States whose `h_con` changed since the last call, possibly repeated.
    pub fn take_changed(&mut self) -> Vec<StateId> {
        std::mem::take(&mut self.changed)
    }

    /// In the queue or inconsistent.
    pub fn is_unprocessed(&self, x: StateId) -> bool {
        self.is_queued(x) || !self.label(x).is_consistent()
    }

    /// Resets every label, clears the reverse tree and seeds the queue with
    /// the goals at zero cost-to-go.
    pub fn restart(&mut self, graph: &mut Graph) {
        self.grow(graph.capacity());
        self.labels.iter_mut().for_each(|l| *l = ReverseLabel::UNREACHED);
        self.queue.clear();
        self.changed.clear();
        graph.clear_reverse_tree();
        for &goal in graph.goals() {
            self.labels[goal.index()].connected = 0.0;
            let key = self.key(graph, goal);
            self.queue.upsert(goal, key);
        }
    }

    fn set_connected(&mut self, x: StateId, value: f64) {
        let l = &mut self.labels[x.index()];
        if l.connected != value {
            l.connected = value;
            self.changed.push(x);
        }
    }

    fn enqueue<F: Fn(StateId) -> bool>(&mut self, graph: &Graph, x: StateId, touches_forward: &F) {
        let key = self.key(graph, x);
        if self.queue.upsert(x, key) && touches_forward(x) {
            self.pending += 1;
        }
    }

    fn dequeue<F: Fn(StateId) -> bool>(&mut self, x: StateId, touches_forward: &F) {
        if self.queue.remove(x) && touches_forward(x) {
            self.pending -= 1;
        }
    }

    /// Reconnects `x` to its best neighbor and requeues it if inconsistent.
    /// Goals keep their zero cost-to-go.
    pub fn update_state(&mut self, graph: &mut Graph, x: StateId) {
        self.update_state_with(graph, x, &|_| false);
    }

    fn update_state_with<F: Fn(StateId) -> bool>(&mut self, graph: &mut Graph, x: StateId, touches_forward: &F) {
        self.grow(graph.capacity());
        if graph.is_goal(x) {
            return;
        }
        let mut best = f64::INFINITY;
        let mut parent = None;
        let labels = &self.labels;
        graph.for_each_neighbor(x, |y, c| {
            let v = labels[y.index()].expanded + c;
            if v < best || (v == best && v.is_finite() && parent.is_some_and(|p| y < p)) {
                best = v;
                parent = Some(y);
            }
        });
        graph.set_reverse_parent(x, parent);
        self.set_connected(x, best);
        if self.labels[x.index()].is_consistent() {
            self.dequeue(x, touches_forward);
        } else {
            self.enqueue(graph, x, touches_forward);
        }
    }

    /// Restarts and searches until the termination rule holds.
    ///
    /// `touches_forward(x)` reports whether a queued forward edge has `x`
    /// as an endpoint.
    pub fn recompute<F: Fn(StateId) -> bool>(&mut self, graph: &mut Graph, termination: Termination, touches_forward: F) {
        self.restart(graph);
        self.run(graph, termination, &touches_forward);
    }

    /// Registers the invalid edge, reconnects both endpoints and repairs the
    /// labels until the termination rule holds.
    pub fn repair<F: Fn(StateId) -> bool>(
        &mut self,
        graph: &mut Graph,
        edge: (StateId, StateId),
        termination: Termination,
        touches_forward: F,
    ) {
        graph.invalidate(edge.0, edge.1);
        self.edge_removed(graph, edge, termination, touches_forward);
    }

    /// Reconnects both endpoints of an edge that left the graph and repairs
    /// the labels until the termination rule holds.
    pub fn edge_removed<F: Fn(StateId) -> bool>(
        &mut self,
        graph: &mut Graph,
        edge: (StateId, StateId),
        termination: Termination,
        touches_forward: F,
    ) {
        self.grow(graph.capacity());
        self.recount_pending(&touches_forward);
        self.update_state_with(graph, edge.0, &touches_forward);
        self.update_state_with(graph, edge.1, &touches_forward);
        self.run(graph, termination, &touches_forward);
    }

    /// Expands until the queue is empty.
    pub fn settle(&mut self, graph: &mut Graph) {
        self.run(graph, Termination::Quiescence, &|_| false);
    }

    fn recount_pending<F: Fn(StateId) -> bool>(&mut self, touches_forward: &F) {
        self.pending = self.queue.iter().filter(|x| touches_forward(*x)).count();
    }

    fn should_continue(&self, graph: &Graph, termination: Termination) -> bool {
        let Some((top, _)) = self.queue.peek() else {
            return false;
        };
        if termination == Termination::Quiescence {
            return true;
        }
        let start = graph.start();
        let l = self.label(start);
        top < self.key(graph, start) || l.expanded < l.connected || self.pending > 0
    }

    fn run<F: Fn(StateId) -> bool>(&mut self, graph: &mut Graph, termination: Termination, touches_forward: &F) {
        self.grow(graph.capacity());
        self.recount_pending(touches_forward);
        while self.should_continue(graph, termination) {
            let x = self.queue.pop().expect("queue is non-empty");
            if touches_forward(x) {
                self.pending -= 1;
            }
            self.expansions += 1;
            let l = self.labels[x.index()];
            let mut edges = std::mem::take(&mut self.scratch);
            edges.clear();
            graph.for_each_neighbor(x, |y, c| edges.push((y, c)));
            if l.connected < l.expanded {
                // only the term through x decreased
                self.labels[x.index()].expanded = l.connected;
                for &(y, c) in &edges {
                    self.offer_parent(graph, y, x, l.connected + c, touches_forward);
                }
            } else {
                self.labels[x.index()].expanded = f64::INFINITY;
                self.update_state_with(graph, x, touches_forward);
                for &(y, _) in &edges {
                    if graph.reverse().parent(y) == Some(x) {
                        self.update_state_with(graph, y, touches_forward);
                    }
                }
            }
            self.scratch = edges;
        }
    }

    /// Connects `y` through `x` if that beats its current connection, with
    /// the same tie rule as [`Self::update_state`].
    fn offer_parent<F: Fn(StateId) -> bool>(
        &mut self,
        graph: &mut Graph,
        y: StateId,
        x: StateId,
        value: f64,
        touches_forward: &F,
    ) {
        if graph.is_goal(y) || !value.is_finite() {
            return;
        }
        let current = self.labels[y.index()].connected;
        let parent = graph.reverse().parent(y);
        if value < current || (value == current && parent.is_some_and(|p| x < p)) {
            graph.set_reverse_parent(y, Some(x));
            self.set_connected(y, value);
            if self.labels[y.index()].is_consistent() {
                self.dequeue(y, touches_forward);
            } else {
                self.enqueue(graph, y, touches_forward);
            }
        }
    }

    /// Whether the queue holds exactly the inconsistent stored states.
    pub fn queue_matches_inconsistent(&self, graph: &Graph) -> bool {
        graph
            .ids()
            .all(|x| self.is_queued(x) == !self.label(x).is_consistent())
    }

    /// Drops labels of states no longer stored in the graph.
    pub fn forget_removed(&mut self, graph: &Graph) {
        self.grow(graph.capacity());
        for i in 0..graph.capacity() {
            let x = StateId(i as u32);
            if !graph.is_alive(x) {
                self.labels[i] = ReverseLabel::UNREACHED;
                self.queue.remove(x);
            }
        }
    }
}
