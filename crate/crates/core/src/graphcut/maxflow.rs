//! Max-flow / min-cut by augmenting paths on two search trees that are kept
//! between augmentations (Boykov and Kolmogorov, 2004). Source and sink are
//! implicit: every node carries one residual terminal capacity, positive
//! towards the source and negative towards the sink.

use std::collections::VecDeque;
use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};

use num_traits::Zero;

/// Edge capacity: any signed ordered number, `i64` for exact oracles.
pub trait Capacity:
    Copy + Debug + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
}

impl<C> Capacity for C where C: Copy + Debug + PartialOrd + Zero + Add<Output = C> + Sub<Output = C> + Neg<Output = C> {}

const NONE: usize = usize::MAX;
const TERMINAL: usize = usize::MAX - 1;
const ORPHAN: usize = usize::MAX - 2;

#[derive(Debug, Clone)]
struct Node<C> {
    first: usize,
    /// Arc towards the parent, or one of the markers above.
    parent: usize,
    is_sink: bool,
    active: bool,
    ts: u64,
    dist: u32,
    tr_cap: C,
}

#[derive(Debug, Clone)]
struct Arc<C> {
    head: usize,
    next: usize,
    r_cap: C,
}

#[derive(Debug, Clone)]
pub struct Graph<C> {
    nodes: Vec<Node<C>>,
    arcs: Vec<Arc<C>>,
    flow: C,
    queue: VecDeque<usize>,
    orphans: VecDeque<usize>,
    time: u64,
    solved: bool,
}

#[inline]
fn min<C: PartialOrd>(a: C, b: C) -> C {
    if b < a {
        b
    } else {
        a
    }
}

impl<C: Capacity> Graph<C> {
    pub fn new(node_count: usize) -> Self {
        let mut g = Graph {
            nodes: Vec::new(),
            arcs: Vec::new(),
            flow: C::zero(),
            queue: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            solved: false,
        };
        g.reset(node_count);
        g
    }

    /// Empties the graph, keeping its allocations.
    pub fn reset(&mut self, node_count: usize) {
        self.nodes.clear();
        self.nodes.resize(
            node_count,
            Node {
                first: NONE,
                parent: NONE,
                is_sink: false,
                active: false,
                ts: 0,
                dist: 0,
                tr_cap: C::zero(),
            },
        );
        self.arcs.clear();
        self.flow = C::zero();
        self.queue.clear();
        self.orphans.clear();
        self.time = 0;
        self.solved = false;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Adds terminal capacities; negative values are folded into the
    /// opposite terminal and a constant flow.
    pub fn add_tweights(&mut self, i: usize, cap_source: C, cap_sink: C) {
        let (mut s, mut t) = (cap_source, cap_sink);
        let delta = self.nodes[i].tr_cap;
        if delta > C::zero() {
            s = s + delta;
        } else {
            t = t - delta;
        }
        self.flow = self.flow + min(s, t);
        self.nodes[i].tr_cap = s - t;
    }

    /// Edge `i -> j` with capacity `cap` and `j -> i` with `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: C, rev_cap: C) {
        assert!(i != j, "self loop");
        let a = self.arcs.len();
        self.arcs.push(Arc {
            head: j,
            next: self.nodes[i].first,
            r_cap: cap,
        });
        self.arcs.push(Arc {
            head: i,
            next: self.nodes[j].first,
            r_cap: rev_cap,
        });
        self.nodes[i].first = a;
        self.nodes[j].first = a + 1;
    }

    /// Flow so far; after `maxflow` this is the min-cut capacity plus the
    /// constants folded in by `add_tweights`.
    pub fn flow(&self) -> C {
        self.flow
    }

    /// After `maxflow`: whether node `i` is on the source side of the cut
    /// (reachable from the source in the residual graph).
    pub fn is_source_side(&self, i: usize) -> bool {
        debug_assert!(self.solved);
        let n = &self.nodes[i];
        n.parent != NONE && !n.is_sink
    }

    fn activate(&mut self, i: usize) {
        if !self.nodes[i].active {
            self.nodes[i].active = true;
            self.queue.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<usize> {
        while let Some(i) = self.queue.pop_front() {
            self.nodes[i].active = false;
            if self.nodes[i].parent != NONE {
                return Some(i);
            }
        }
        None
    }

    pub fn maxflow(&mut self) -> C {
        let zero = C::zero();
        for i in 0..self.nodes.len() {
            let n = &mut self.nodes[i];
            n.parent = NONE;
            n.active = false;
            if n.tr_cap != zero {
                n.is_sink = n.tr_cap < zero;
                n.parent = TERMINAL;
                n.ts = 0;
                n.dist = 1;
                self.activate(i);
            }
        }
        while let Some(i) = self.next_active() {
            if let Some(mid) = self.grow(i) {
                self.time += 1;
                self.augment(mid);
                self.adopt();
                // Node `i` may have more arcs to offer.
                if self.nodes[i].parent != NONE && !self.nodes[i].active {
                    self.nodes[i].active = true;
                    self.queue.push_front(i);
                }
            } else {
                self.time += 1;
            }
        }
        self.solved = true;
        self.flow
    }

    /// Extends the tree of `i` by one layer; returns an arc joining the two
    /// trees, oriented from the source tree to the sink tree.
    fn grow(&mut self, i: usize) -> Option<usize> {
        let zero = C::zero();
        let sink = self.nodes[i].is_sink;
        let mut a = self.nodes[i].first;
        while a != NONE {
            let cap = if sink {
                self.arcs[a ^ 1].r_cap
            } else {
                self.arcs[a].r_cap
            };
            if cap > zero {
                let j = self.arcs[a].head;
                if self.nodes[j].parent == NONE {
                    let (ts, dist) = (self.nodes[i].ts, self.nodes[i].dist);
                    let nj = &mut self.nodes[j];
                    nj.is_sink = sink;
                    nj.parent = a ^ 1;
                    nj.ts = ts;
                    nj.dist = dist + 1;
                    self.activate(j);
                } else if self.nodes[j].is_sink != sink {
                    return Some(if sink { a ^ 1 } else { a });
                } else if self.nodes[j].ts <= self.nodes[i].ts && self.nodes[j].dist > self.nodes[i].dist {
                    // Shorter path through `i`.
                    self.nodes[j].parent = a ^ 1;
                    self.nodes[j].ts = self.nodes[i].ts;
                    self.nodes[j].dist = self.nodes[i].dist + 1;
                }
            }
            a = self.arcs[a].next;
        }
        None
    }

    fn augment(&mut self, mid: usize) {
        let zero = C::zero();
        let mut b = self.arcs[mid].r_cap;
        // Source half: flow runs parent -> child.
        let mut i = self.arcs[mid ^ 1].head;
        loop {
            let p = self.nodes[i].parent;
            if p == TERMINAL {
                break;
            }
            b = min(b, self.arcs[p ^ 1].r_cap);
            i = self.arcs[p].head;
        }
        b = min(b, self.nodes[i].tr_cap);
        // Sink half: flow runs child -> parent.
        let mut i = self.arcs[mid].head;
        loop {
            let p = self.nodes[i].parent;
            if p == TERMINAL {
                break;
            }
            b = min(b, self.arcs[p].r_cap);
            i = self.arcs[p].head;
        }
        b = min(b, -self.nodes[i].tr_cap);

        self.arcs[mid ^ 1].r_cap = self.arcs[mid ^ 1].r_cap + b;
        self.arcs[mid].r_cap = self.arcs[mid].r_cap - b;
        let mut i = self.arcs[mid ^ 1].head;
        loop {
            let p = self.nodes[i].parent;
            if p == TERMINAL {
                break;
            }
            self.arcs[p].r_cap = self.arcs[p].r_cap + b;
            self.arcs[p ^ 1].r_cap = self.arcs[p ^ 1].r_cap - b;
            if self.arcs[p ^ 1].r_cap <= zero {
                self.make_orphan(i);
            }
            i = self.arcs[p].head;
        }
        self.nodes[i].tr_cap = self.nodes[i].tr_cap - b;
        if self.nodes[i].tr_cap <= zero {
            self.make_orphan(i);
        }
        let mut i = self.arcs[mid].head;
        loop {
            let p = self.nodes[i].parent;
            if p == TERMINAL {
                break;
            }
            self.arcs[p ^ 1].r_cap = self.arcs[p ^ 1].r_cap + b;
            self.arcs[p].r_cap = self.arcs[p].r_cap - b;
            if self.arcs[p].r_cap <= zero {
                self.make_orphan(i);
            }
            i = self.arcs[p].head;
        }
        self.nodes[i].tr_cap = self.nodes[i].tr_cap + b;
        if self.nodes[i].tr_cap >= zero {
            self.make_orphan(i);
        }
        self.flow = self.flow + b;
    }

    fn make_orphan(&mut self, i: usize) {
        self.nodes[i].parent = ORPHAN;
        self.orphans.push_back(i);
    }

    /// Distance from `j` to its terminal through valid parents, or `None`
    /// if the path runs into an orphan. Caches distances along the way.
    fn origin_distance(&mut self, j0: usize) -> Option<u32> {
        let mut d = 0u32;
        let mut j = j0;
        loop {
            if self.nodes[j].ts == self.time {
                d += self.nodes[j].dist;
                break;
            }
            let p = self.nodes[j].parent;
            d += 1;
            if p == TERMINAL {
                self.nodes[j].ts = self.time;
                self.nodes[j].dist = 1;
                break;
            }
            if p == ORPHAN || p == NONE {
                return None;
            }
            j = self.arcs[p].head;
        }
        let mut dd = d;
        let mut j = j0;
        while self.nodes[j].ts != self.time {
            self.nodes[j].ts = self.time;
            self.nodes[j].dist = dd;
            dd -= 1;
            j = self.arcs[self.nodes[j].parent].head;
        }
        Some(d)
    }

    fn adopt(&mut self) {
        let zero = C::zero();
        while let Some(i) = self.orphans.pop_front() {
            let sink = self.nodes[i].is_sink;
            let mut best: Option<(usize, u32)> = None;
            let mut a = self.nodes[i].first;
            while a != NONE {
                // Residual capacity along the tree direction.
                let cap = if sink {
                    self.arcs[a].r_cap
                } else {
                    self.arcs[a ^ 1].r_cap
                };
                let j = self.arcs[a].head;
                if cap > zero && self.nodes[j].is_sink == sink && self.nodes[j].parent != NONE {
                    if let Some(d) = self.origin_distance(j) {
                        if best.map_or(true, |(_, bd)| d < bd) {
                            best = Some((a, d));
                        }
                    }
                }
                a = self.arcs[a].next;
            }
            if let Some((a, d)) = best {
                let n = &mut self.nodes[i];
                n.parent = a;
                n.ts = self.time;
                n.dist = d + 1;
                continue;
            }
            self.nodes[i].parent = NONE;
            let mut a = self.nodes[i].first;
            while a != NONE {
                let j = self.arcs[a].head;
                let p = self.nodes[j].parent;
                if self.nodes[j].is_sink == sink && p != NONE {
                    let cap = if sink {
                        self.arcs[a].r_cap
                    } else {
                        self.arcs[a ^ 1].r_cap
                    };
                    if cap > zero {
                        self.activate(j);
                    }
                    if p != TERMINAL && p != ORPHAN && self.arcs[p].head == i {
                        self.make_orphan(j);
                    }
                }
                a = self.arcs[a].next;
            }
        }
    }
}

/// Directed capacitated graph with explicit source and sink, for callers
/// that think in edges rather than terminal weights.
#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    pub node_count: usize,
    pub edges: Vec<(usize, usize, C)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut<C> {
    pub flow: C,
    /// `true` for nodes on the source side.
    pub source_side: Vec<bool>,
}

impl<C: Capacity> FlowNetwork<C> {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork {
            node_count,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: C) {
        self.edges.push((from, to, cap));
    }

    /// Capacity of the edges leaving the `side == true` set.
    pub fn cut_capacity(&self, side: &[bool]) -> C {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .fold(C::zero(), |acc, &(_, _, c)| acc + c)
    }

    /// Minimum cut by enumerating every partition; exponential, for checks
    /// on small graphs only.
    pub fn brute_force_min_cut(&self, source: usize, sink: usize) -> C {
        let others: Vec<usize> = (0..self.node_count).filter(|&i| i != source && i != sink).collect();
        assert!(others.len() < 24, "too many nodes to enumerate");
        let mut side = vec![false; self.node_count];
        side[source] = true;
        let mut best: Option<C> = None;
        for mask in 0u32..(1 << others.len()) {
            for (b, &i) in others.iter().enumerate() {
                side[i] = mask >> b & 1 == 1;
            }
            let c = self.cut_capacity(&side);
            if best.map_or(true, |b| c < b) {
                best = Some(c);
            }
        }
        best.unwrap_or_else(C::zero)
    }

    pub fn max_flow(&self, source: usize, sink: usize) -> MinCut<C> {
        assert!(source != sink && source < self.node_count && sink < self.node_count);
        for &(_, _, c) in &self.edges {
            assert!(c >= C::zero(), "negative capacity");
        }
        let mut g = Graph::new(self.node_count);
        let mut direct = C::zero();
        for &(u, v, c) in &self.edges {
            if u == v || u == sink || v == source {
                continue;
            }
            match (u == source, v == sink) {
                (true, true) => direct = direct + c,
                (true, false) => g.add_tweights(v, c, C::zero()),
                (false, true) => g.add_tweights(u, C::zero(), c),
                (false, false) => g.add_edge(u, v, c, C::zero()),
            }
        }
        let flow = g.maxflow() + direct;
        let source_side = (0..self.node_count)
            .map(|i| i == source || (i != sink && g.is_source_side(i)))
            .collect();
        MinCut { flow, source_side }
    }
}
