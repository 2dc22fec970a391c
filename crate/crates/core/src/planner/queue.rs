use std::cmp::Ordering;
use crate::graph::StateId;
use crate::heap::IndexedHeap;

/// Lexicographic edge key `(g_T(p) + ĉ + ĥ(c), g_T(p) + ĉ, g_T(p))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardEdgeKey(pub f64, pub f64, pub f64);

impl Eq for ForwardEdgeKey {}

impl PartialOrd for ForwardEdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ForwardEdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| self.1.total_cmp(&other.1))
            .then_with(|| self.2.total_cmp(&other.2))
    }
}

/// Indexed edge queue. Ties are broken by (parent, child).
///
/// Keeps per-state lists of queued edges so that keys can be refreshed
/// when a parent's cost-to-come or a child's heuristic changes.
#[derive(Clone, Debug, Default)]
pub struct EdgeQueue {
    heap: IndexedHeap<(ForwardEdgeKey, StateId, StateId)>,
    free: Vec<usize>,
    slots: usize,
    /// `(child, slot)` of queued edges per parent.
    by_parent: Vec<Vec<(StateId, usize)>>,
    /// `(parent, slot)` of queued edges per child.
    by_child: Vec<Vec<(StateId, usize)>>,
}

impl EdgeQueue {
    pub fn new() -> Self {
        Self::default()
    }

    fn grow(&mut self, n: usize) {
        if self.by_parent.len() < n {
            self.by_parent.resize(n, Vec::new());
            self.by_child.resize(n, Vec::new());
        }
    }

    fn slot(&self, parent: StateId, child: StateId) -> Option<usize> {
        self.by_parent
            .get(parent.index())?
            .iter()
            .find(|(c, _)| *c == child)
            .map(|(_, slot)| *slot)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, parent: StateId, child: StateId) -> bool {
        self.slot(parent, child).is_some()
    }

    pub fn key(&self, parent: StateId, child: StateId) -> Option<ForwardEdgeKey> {
        self.heap.key(self.slot(parent, child)?).map(|k| k.0)
    }

    /// Whether a queued edge has `x` as an endpoint.
    pub fn touches(&self, x: StateId) -> bool {
        let i = x.index();
        self.by_parent.get(i).is_some_and(|v| !v.is_empty()) || self.by_child.get(i).is_some_and(|v| !v.is_empty())
    }

    /// Inserts the edge, or updates its key if already queued.
    pub fn insert(&mut self, parent: StateId, child: StateId, key: ForwardEdgeKey) {
        if let Some(slot) = self.slot(parent, child) {
            self.heap.push(slot, (key, parent, child));
            return;
        }
        self.grow(parent.index().max(child.index()) + 1);
        let slot = self.free.pop().unwrap_or_else(|| {
            self.slots += 1;
            self.slots - 1
        });
        self.heap.push(slot, (key, parent, child));
        self.by_parent[parent.index()].push((child, slot));
        self.by_child[child.index()].push((parent, slot));
    }

    /// Updates the key of a queued edge; no-op if absent.
    pub fn rekey(&mut self, parent: StateId, child: StateId, key: ForwardEdgeKey) {
        if let Some(slot) = self.slot(parent, child) {
            self.heap.push(slot, (key, parent, child));
        }
    }

    fn unlink(&mut self, parent: StateId, child: StateId, slot: usize) {
        let out = &mut self.by_parent[parent.index()];
        out.swap_remove(out.iter().position(|e| e.1 == slot).expect("linked edge"));
        let inc = &mut self.by_child[child.index()];
        inc.swap_remove(inc.iter().position(|e| e.1 == slot).expect("linked edge"));
        self.free.push(slot);
    }

    pub fn remove(&mut self, parent: StateId, child: StateId) -> bool {
        match self.slot(parent, child) {
            Some(slot) => {
                self.heap.remove(slot);
                self.unlink(parent, child, slot);
                true
            }
            None => false,
        }
    }

    pub fn peek(&self) -> Option<(ForwardEdgeKey, StateId, StateId)> {
        self.heap.peek().map(|(k, _)| k)
    }

    pub fn pop(&mut self) -> Option<(ForwardEdgeKey, StateId, StateId)> {
        let ((key, p, c), slot) = self.heap.pop()?;
        self.unlink(p, c, slot);
        Some((key, p, c))
    }

    /// Number of queued edges leaving `parent`.
    pub fn out_degree(&self, parent: StateId) -> usize {
        self.by_parent.get(parent.index()).map_or(0, Vec::len)
    }

    /// Number of queued edges entering `child`.
    pub fn in_degree(&self, child: StateId) -> usize {
        self.by_child.get(child.index()).map_or(0, Vec::len)
    }

    /// Child of the `k`-th queued edge leaving `parent`.
    pub fn child_at(&self, parent: StateId, k: usize) -> StateId {
        self.by_parent[parent.index()][k].0
    }

    /// Parent of the `k`-th queued edge entering `child`.
    pub fn parent_at(&self, child: StateId, k: usize) -> StateId {
        self.by_child[child.index()][k].0
    }

    /// Rekeys the `k`-th queued edge entering `child`.
    pub fn rekey_parent_at(&mut self, child: StateId, k: usize, key: ForwardEdgeKey) {
        let (parent, slot) = self.by_child[child.index()][k];
        self.heap.push(slot, (key, parent, child));
    }

    /// Rekeys the `k`-th queued edge leaving `parent`.
    pub fn rekey_child_at(&mut self, parent: StateId, k: usize, key: ForwardEdgeKey) {
        let (child, slot) = self.by_parent[parent.index()][k];
        self.heap.push(slot, (key, parent, child));
    }

    /// Children of queued edges leaving `parent`, in no particular order.
    pub fn children_of(&self, parent: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.by_parent.get(parent.index()).into_iter().flatten().map(|e| e.0)
    }

    /// Parents of queued edges entering `child`, in no particular order.
    pub fn parents_of(&self, child: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.by_child.get(child.index()).into_iter().flatten().map(|e| e.0)
    }

    /// Queued edges in no particular order.
    pub fn edges(&self) -> Vec<(StateId, StateId)> {
        self.heap.iter().map(|((_, p, c), _)| (p, c)).collect()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
        self.free.clear();
        self.slots = 0;
        self.by_parent.iter_mut().for_each(Vec::clear);
        self.by_child.iter_mut().for_each(Vec::clear);
    }
}
