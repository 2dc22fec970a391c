//! The sampled approximation shared by the forward and reverse searches.
//!
//! Holds the samples and their radius index, the registry of edges known to
//! be invalid, and both search trees. Neighborhoods are the radius
//! neighbors plus every state adjacent in either tree, minus blacklisted
//! connections.

use std::io::{self, Write};

use crate::kdtree::KdTree;
use crate::scenarios::ValidityOracle;
use crate::space::{distance, distance_squared, rgg_radius, ProblemInstance, State};

/// Stable identifier of a stored sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Unordered pairs of states whose connection failed a motion check,
/// stored as per-state adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct InvalidEdgeRegistry {
    adjacent: Vec<Vec<StateId>>,
    len: usize,
}

impl InvalidEdgeRegistry {
    fn list(&self, x: StateId) -> &[StateId] {
        self.adjacent.get(x.index()).map_or(&[], Vec::as_slice)
    }

    /// Returns false if the pair was already registered.
    pub fn insert(&mut self, a: StateId, b: StateId) -> bool {
        if self.contains(a, b) {
            return false;
        }
        let n = a.index().max(b.index()) + 1;
        if self.adjacent.len() < n {
            self.adjacent.resize(n, Vec::new());
        }
        self.adjacent[a.index()].push(b);
        if a != b {
            self.adjacent[b.index()].push(a);
        }
        self.len += 1;
        true
    }

    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.list(a).contains(&b)
    }

    /// States whose connection to `x` is registered.
    pub fn invalid_neighbors(&self, x: StateId) -> &[StateId] {
        self.list(x)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sorted pairs, smaller identifier first.
    pub fn sorted(&self) -> Vec<(StateId, StateId)> {
        let mut v: Vec<_> = self
            .adjacent
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                let a = StateId(i as u32);
                list.iter().filter(move |b| a <= **b).map(move |b| (a, *b))
            })
            .collect();
        v.sort_unstable();
        v
    }

    fn retain_alive(&mut self, alive: &[bool]) {
        for (i, list) in self.adjacent.iter_mut().enumerate() {
            if alive[i] {
                list.retain(|b| alive[b.index()]);
            } else {
                list.clear();
            }
        }
        self.len = self.sorted().len();
    }
}

/// Forward search tree rooted at the start. Edges are valid and carry their
/// true cost; `cost` is the cost-to-come through the tree.
#[derive(Clone, Debug, Default)]
pub struct ForwardTree {
    parent: Vec<Option<StateId>>,
    children: Vec<Vec<StateId>>,
    cost: Vec<f64>,
    edge_cost: Vec<f64>,
    member: Vec<bool>,
}

impl ForwardTree {
    fn push(&mut self) {
        self.parent.push(None);
        self.children.push(Vec::new());
        self.cost.push(f64::INFINITY);
        self.edge_cost.push(f64::INFINITY);
        self.member.push(false);
    }

    pub fn contains(&self, x: StateId) -> bool {
        self.member[x.index()]
    }

    /// Cost-to-come through the tree; infinite outside it.
    pub fn cost(&self, x: StateId) -> f64 {
        self.cost[x.index()]
    }

    pub fn parent(&self, x: StateId) -> Option<StateId> {
        self.parent[x.index()]
    }

    pub fn children(&self, x: StateId) -> &[StateId] {
        &self.children[x.index()]
    }

    /// True cost of the edge from the parent into `x`.
    pub fn edge_cost(&self, x: StateId) -> f64 {
        self.edge_cost[x.index()]
    }

    pub fn contains_edge(&self, parent: StateId, child: StateId) -> bool {
        self.parent[child.index()] == Some(parent)
    }

    /// Vertices of the subtree rooted at `root`, root first, depth first.
    pub fn subtree(&self, root: StateId) -> Vec<StateId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.children[x.index()].iter().rev().copied());
        }
        out
    }

    fn detach(&mut self, x: StateId) {
        if let Some(p) = self.parent[x.index()].take() {
            self.children[p.index()].retain(|c| *c != x);
        }
    }

    fn set_root(&mut self, root: StateId) {
        self.member[root.index()] = true;
        self.cost[root.index()] = 0.0;
        self.edge_cost[root.index()] = 0.0;
    }

    /// Adds or rewires `child` under `parent` and refreshes the cost-to-come
    /// of the whole subtree below `child`. Returns that subtree.
    fn connect(&mut self, parent: StateId, child: StateId, edge_cost: f64) -> Vec<StateId> {
        debug_assert!(self.member[parent.index()]);
        self.detach(child);
        self.parent[child.index()] = Some(parent);
        self.children[parent.index()].push(child);
        self.member[child.index()] = true;
        self.edge_cost[child.index()] = edge_cost;
        let subtree = self.subtree(child);
        for &x in &subtree {
            let p = self.parent[x.index()].expect("non-root subtree vertex has a parent");
            self.cost[x.index()] = self.cost[p.index()] + self.edge_cost[x.index()];
        }
        subtree
    }

    /// Removes the subtree rooted at `root` from the tree. Returns it.
    fn remove_subtree(&mut self, root: StateId) -> Vec<StateId> {
        self.detach(root);
        let subtree = self.subtree(root);
        for &x in &subtree {
            let i = x.index();
            self.parent[i] = None;
            self.children[i].clear();
            self.member[i] = false;
            self.cost[i] = f64::INFINITY;
            self.edge_cost[i] = f64::INFINITY;
        }
        subtree
    }
}

/// Reverse search tree rooted at the goals. Edges may cross invalid space.
#[derive(Clone, Debug, Default)]
pub struct ReverseTree {
    parent: Vec<Option<StateId>>,
    children: Vec<Vec<StateId>>,
}

impl ReverseTree {
    fn push(&mut self) {
        self.parent.push(None);
        self.children.push(Vec::new());
    }

    pub fn parent(&self, x: StateId) -> Option<StateId> {
        self.parent[x.index()]
    }

    pub fn children(&self, x: StateId) -> &[StateId] {
        &self.children[x.index()]
    }

    fn set_parent(&mut self, x: StateId, parent: Option<StateId>) {
        let old = self.parent[x.index()];
        if old == parent {
            return;
        }
        if let Some(p) = old {
            self.children[p.index()].retain(|c| *c != x);
        }
        if let Some(p) = parent {
            self.children[p.index()].push(x);
        }
        self.parent[x.index()] = parent;
    }

    fn clear(&mut self) {
        self.parent.iter_mut().for_each(|p| *p = None);
        self.children.iter_mut().for_each(Vec::clear);
    }
}

/// Cached radius neighbors of one state and their distances.
#[derive(Clone, Debug, Default)]
struct NeighborList {
    ids: Vec<StateId>,
    distances: Vec<f64>,
    radius: f64,
    /// Number of stored identifiers when the list was last refreshed.
    through: usize,
}

/// Stale lists missing at most this many new states are refreshed by a
/// linear scan instead of a tree query.
const INCREMENTAL_REFRESH_LIMIT: usize = 1024;

/// Samples, radius index, blacklist and both trees.
#[derive(Clone, Debug)]
pub struct Graph {
    problem: ProblemInstance,
    eta: f64,
    states: Vec<State>,
    alive: Vec<bool>,
    is_goal: Vec<bool>,
    g_hat: Vec<f64>,
    h_apriori: Vec<f64>,
    start: StateId,
    goals: Vec<StateId>,
    index: KdTree<StateId>,
    radius: f64,
    informed_count: usize,
    radius_cache: Vec<Option<NeighborList>>,
    invalid: InvalidEdgeRegistry,
    forward: ForwardTree,
    reverse: ReverseTree,
}

impl Graph {
    /// A graph holding the start (identifier 0) and the goals (1..).
    ///
    /// The radius starts at the value for `q = |goals| + 1` over the whole
    /// state space.
    pub fn new(problem: &ProblemInstance, eta: f64) -> Self {
        let n = problem.dimension();
        let mut g = Graph {
            problem: problem.clone(),
            eta,
            states: Vec::new(),
            alive: Vec::new(),
            is_goal: Vec::new(),
            g_hat: Vec::new(),
            h_apriori: Vec::new(),
            start: StateId(0),
            goals: Vec::new(),
            index: KdTree::new(n),
            radius: f64::INFINITY,
            informed_count: 0,
            radius_cache: Vec::new(),
            invalid: InvalidEdgeRegistry::default(),
            forward: ForwardTree::default(),
            reverse: ReverseTree::default(),
        };
        g.start = g.push_state(problem.start().clone(), false);
        for goal in problem.goals() {
            let id = g.push_state(goal.clone(), true);
            g.goals.push(id);
        }
        g.forward.set_root(g.start);
        g.update_radius(f64::INFINITY);
        g
    }

    fn push_state(&mut self, s: State, goal: bool) -> StateId {
        let id = StateId(self.states.len() as u32);
        self.g_hat.push(self.problem.g_hat(&s));
        self.h_apriori.push(self.problem.h_hat_apriori(&s));
        self.index.insert(&s, id);
        self.states.push(s);
        self.alive.push(true);
        self.is_goal.push(goal);
        self.radius_cache.push(None);
        self.forward.push();
        self.reverse.push();
        id
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn goals(&self) -> &[StateId] {
        &self.goals
    }

    pub fn is_goal(&self, x: StateId) -> bool {
        self.is_goal[x.index()]
    }

    pub fn state(&self, x: StateId) -> &State {
        &self.states[x.index()]
    }

    pub fn is_alive(&self, x: StateId) -> bool {
        self.alive[x.index()]
    }

    /// One past the largest identifier ever issued.
    pub fn capacity(&self) -> usize {
        self.states.len()
    }

    /// Number of stored samples, including start and goals.
    pub fn len(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Identifiers of stored samples in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32)
            .map(StateId)
            .filter(move |x| self.alive[x.index()])
    }

    pub fn index_len(&self) -> usize {
        self.index.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Samples counted by the last radius update.
    pub fn informed_count(&self) -> usize {
        self.informed_count
    }

    pub fn g_hat(&self, x: StateId) -> f64 {
        self.g_hat[x.index()]
    }

    pub fn h_hat_apriori(&self, x: StateId) -> f64 {
        self.h_apriori[x.index()]
    }

    pub fn f_hat(&self, x: StateId) -> f64 {
        self.g_hat[x.index()] + self.h_apriori[x.index()]
    }

    /// Whether the pair is joined by a radius edge, ignoring the blacklist.
    pub fn within_radius(&self, a: StateId, b: StateId) -> bool {
        distance_squared(&self.states[a.index()], &self.states[b.index()]) <= self.radius * self.radius
    }

    pub fn c_hat(&self, a: StateId, b: StateId) -> f64 {
        distance(self.state(a), self.state(b))
    }

    pub fn invalid_edges(&self) -> &InvalidEdgeRegistry {
        &self.invalid
    }

    pub fn forward(&self) -> &ForwardTree {
        &self.forward
    }

    pub fn reverse(&self) -> &ReverseTree {
        &self.reverse
    }

    /// Validity-filters `states` and stores the valid ones.
    pub fn add_samples(&mut self, states: Vec<State>, oracle: &mut ValidityOracle) -> Vec<StateId> {
        let mut ids = Vec::with_capacity(states.len());
        for s in states {
            if self.problem.space().contains(&s) && oracle.is_valid_state(&s) {
                ids.push(self.push_state(s, false));
            }
        }
        if !ids.is_empty() {
            self.rebuild_index();
        }
        ids
    }


    /// Recounts the informed samples for `cost` and recomputes the radius.
    pub fn update_radius(&mut self, cost: f64) {
        let q = self
            .ids()
            .filter(|x| cost.is_infinite() || self.f_hat(*x) <= cost)
            .count()
            .max(2);
        self.informed_count = q;
        let measure = self.problem.informed_measure(cost);
        self.radius = rgg_radius(self.problem.dimension(), q, measure, self.eta);
    }

    /// Overrides the connection radius. Intended for fixtures and tests.
    pub fn set_radius(&mut self, radius: f64) {
        self.radius = radius;
    }

    fn ensure_radius_neighbors(&mut self, x: StateId) {
        let i = x.index();
        let (radius, len) = (self.radius, self.states.len());
        let r2 = radius * radius;
        match self.radius_cache[i].as_mut() {
            Some(c) if c.radius == radius && c.through == len => {}
            Some(c) if c.radius >= radius && len - c.through <= INCREMENTAL_REFRESH_LIMIT => {
                let (states, alive) = (&self.states, &self.alive);
                let mut k = 0;
                for j in 0..c.ids.len() {
                    let y = c.ids[j];
                    if alive[y.index()] && distance_squared(&states[i], &states[y.index()]) <= r2 {
                        c.ids[k] = y;
                        c.distances[k] = c.distances[j];
                        k += 1;
                    }
                }
                c.ids.truncate(k);
                c.distances.truncate(k);
                for j in c.through..len {
                    if alive[j] && distance_squared(&states[i], &states[j]) <= r2 {
                        c.ids.push(StateId(j as u32));
                        c.distances.push(distance(&states[i], &states[j]));
                    }
                }
                c.radius = radius;
                c.through = len;
            }
            _ => {
                let mut ids = Vec::new();
                self.index.for_each_within(&self.states[i], r2, |id, _| {
                    if id != x {
                        ids.push(id);
                    }
                });
                ids.sort_unstable();
                let distances = ids
                    .iter()
                    .map(|y| distance(&self.states[i], &self.states[y.index()]))
                    .collect();
                self.radius_cache[i] = Some(NeighborList {
                    ids,
                    distances,
                    radius,
                    through: len,
                });
            }
        }
    }

    /// Stored samples within the radius of `x`, excluding `x`, sorted.
    pub fn radius_neighbors(&mut self, x: StateId) -> &[StateId] {
        self.ensure_radius_neighbors(x);
        self.radius_cache[x.index()].as_ref().map_or(&[], |c| c.ids.as_slice())
    }

    /// Calls `f(y, ĉ(x, y))` for every neighbor `y` of `x`: radius neighbors
    /// in identifier order, then forward-tree neighbors beyond the radius.
    pub fn for_each_neighbor<F: FnMut(StateId, f64)>(&mut self, x: StateId, mut f: F) {
        self.ensure_radius_neighbors(x);
        let i = x.index();
        let invalid = self.invalid.invalid_neighbors(x);
        let cached = self.radius_cache[i].as_ref().expect("cached");
        for (y, d) in cached.ids.iter().zip(&cached.distances) {
            if invalid.is_empty() || !invalid.contains(y) {
                f(*y, *d);
            }
        }
        let r2 = self.radius * self.radius;
        let tree_adjacent = self.forward.parent[i]
            .iter()
            .chain(&self.forward.children[i]);
        for &y in tree_adjacent {
            if y == x || !self.alive[y.index()] {
                continue;
            }
            let d2 = distance_squared(&self.states[i], &self.states[y.index()]);
            if d2 > r2 && !invalid.contains(&y) {
                f(y, d2.sqrt());
            }
        }
    }

    /// Radius neighbors plus forward tree neighbors, minus `x`
    /// and minus blacklisted connections. Sorted by identifier.
    pub fn neighbors(&mut self, x: StateId) -> Vec<StateId> {
        let mut out = Vec::new();
        self.neighbors_into(x, &mut out);
        out
    }

    /// [`Graph::neighbors`] into a reused buffer.
    pub fn neighbors_into(&mut self, x: StateId, out: &mut Vec<StateId>) {
        out.clear();
        self.for_each_neighbor(x, |y, _| out.push(y));
        if !out.is_sorted() {
            out.sort_unstable();
        }
        out.dedup();
    }

    /// Outgoing directed edges `(x, y)` for every neighbor `y`.
    pub fn expand(&mut self, x: StateId) -> Vec<(StateId, StateId)> {
        self.neighbors(x).into_iter().map(|y| (x, y)).collect()
    }

    /// Blacklists the connection between `a` and `b`.
    pub fn invalidate(&mut self, a: StateId, b: StateId) -> bool {
        self.invalid.insert(a, b)
    }

    /// Adds or rewires a forward edge with true cost `edge_cost`. Returns the
    /// subtree whose cost-to-come changed.
    pub fn connect_forward(&mut self, parent: StateId, child: StateId, edge_cost: f64) -> Vec<StateId> {
        debug_assert!(child != self.start);
        self.forward.connect(parent, child, edge_cost)
    }

    pub fn set_reverse_parent(&mut self, x: StateId, parent: Option<StateId>) {
        self.reverse.set_parent(x, parent);
    }

    pub fn clear_reverse_tree(&mut self) {
        self.reverse.clear();
    }

    /// Lowest-cost goal in the forward tree and its cost-to-come.
    pub fn best_goal(&self) -> Option<(StateId, f64)> {
        self.goals
            .iter()
            .map(|g| (*g, self.forward.cost(*g)))
            .filter(|(_, c)| c.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// States from the start to `goal` along the forward tree.
    pub fn forward_path(&self, goal: StateId) -> Vec<StateId> {
        let mut path = vec![goal];
        let mut cur = goal;
        while let Some(p) = self.forward.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Drops samples that cannot improve a solution of cost `cost`.
    ///
    /// Forward-tree vertices outside the informed set are cut from the tree
    /// with their subtrees; descendants still inside the informed set are
    /// kept as unconnected samples. Start and goals are never removed.
    /// Returns the number of samples removed.
    pub fn prune(&mut self, cost: f64) -> usize {
        if cost.is_infinite() {
            return 0;
        }
        let outside = |g: &Graph, x: StateId| g.f_hat(x) > cost && x != g.start && !g.is_goal(x);
        let tree_roots: Vec<StateId> = self
            .ids()
            .filter(|x| self.forward.contains(*x) && outside(self, *x))
            .collect();
        for root in tree_roots {
            if self.forward.contains(root) {
                self.forward.remove_subtree(root);
            }
        }
        let doomed: Vec<StateId> = self
            .ids()
            .filter(|x| !self.forward.contains(*x) && outside(self, *x))
            .collect();
        for &x in &doomed {
            self.alive[x.index()] = false;
            self.reverse.set_parent(x, None);
            for c in std::mem::take(&mut self.reverse.children[x.index()]) {
                self.reverse.parent[c.index()] = None;
            }
        }
        if !doomed.is_empty() {
            self.invalid.retain_alive(&self.alive);
            self.rebuild_index();
        }
        doomed.len()
    }

    fn rebuild_index(&mut self) {
        let states = &self.states;
        self.index = KdTree::balanced(
            self.problem.dimension(),
            self.ids().map(|x| (&states[x.index()][..], x)),
        );
    }

    /// Writes a line-oriented dump of the graph:
    ///
    /// ```text
    /// radius <r>
    /// state <id> <start|goal|sample> <x0> <x1> ...
    /// forward <parent> <child> <cost-to-come of child>
    /// reverse <parent> <child>
    /// invalid <a> <b>
    /// ```
    pub fn dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "radius {}", self.radius)?;
        for x in self.ids() {
            let kind = if x == self.start {
                "start"
            } else if self.is_goal(x) {
                "goal"
            } else {
                "sample"
            };
            write!(w, "state {} {}", x.0, kind)?;
            for v in self.state(x).iter() {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        for x in self.ids() {
            if let Some(p) = self.forward.parent(x) {
                writeln!(w, "forward {} {} {}", p.0, x.0, self.forward.cost(x))?;
            }
        }
        for x in self.ids() {
            if let Some(p) = self.reverse.parent(x) {
                writeln!(w, "reverse {} {}", p.0, x.0)?;
            }
        }
        for (a, b) in self.invalid.sorted() {
            writeln!(w, "invalid {} {}", a.0, b.0)?;
        }
        Ok(())
    }
}
