//! Rooted binary tree shapes grown by the Ford alpha-process.
//!
//! A shape is a rooted binary tree whose root has degree 1; every other
//! vertex is a leaf or has exactly two children. Leaf labels are not stored:
//! cherry and pitchfork counts are label-invariant, so the process on shapes
//! carries all the information these statistics need.
//!
//! Growth works by subdividing a randomly chosen edge: pendant edges carry
//! weight `1 - alpha`, internal edges (including the root edge) weight
//! `alpha`, and one growth step takes a shape with `n` leaves to one with
//! `n + 1` leaves.

use rand::Rng;
use serde::Serialize;

use crate::{Alpha, Error};

/// Edge classes of the six-colour urn coupling.
///
/// Pendant colours:
/// 1. pendant edge of a cherry contained in a pitchfork,
/// 2. pendant edge of an essential cherry,
/// 3. pendant edge in a pitchfork but not in a cherry,
/// 4. pendant edge in neither a cherry nor a pitchfork.
///
/// Internal colours:
/// 5. the internal edge of an essential cherry,
/// 6. every other internal edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeColor {
    PitchforkCherryPendant,
    EssentialCherryPendant,
    PitchforkOtherPendant,
    FreePendant,
    EssentialCherryInternal,
    OtherInternal,
}

impl EdgeColor {
    /// The numeric code 1..=6 of the colour scheme.
    pub fn code(self) -> u8 {
        self.index() as u8 + 1
    }

    /// Zero-based slot used to index 6-vectors of colour counts.
    pub fn index(self) -> usize {
        match self {
            EdgeColor::PitchforkCherryPendant => 0,
            EdgeColor::EssentialCherryPendant => 1,
            EdgeColor::PitchforkOtherPendant => 2,
            EdgeColor::FreePendant => 3,
            EdgeColor::EssentialCherryInternal => 4,
            EdgeColor::OtherInternal => 5,
        }
    }

    pub fn is_pendant(self) -> bool {
        self.index() < 4
    }
}

/// Pitchfork and cherry counts of a tree shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PairCounts {
    /// Number of pitchforks (fringe subtrees with three leaves).
    pub pitchforks: u64,
    /// Number of cherries (fringe subtrees with two leaves).
    pub cherries: u64,
}

impl PairCounts {
    /// Support constraints for a tree with `n >= 3` leaves:
    /// `1 <= c`, `a <= c`, `a + 2c <= n` (which implies `a <= n/3` and
    /// `c <= n/2`).
    pub fn in_support(self, n_leaves: u64) -> bool {
        let (a, c) = (self.pitchforks, self.cherries);
        c >= 1 && a <= c && a + 2 * c <= n_leaves
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Root { child: u32 },
    Leaf { parent: u32 },
    Internal { parent: u32, left: u32, right: u32 },
}

/// A rooted binary tree shape. Vertex 0 is the degree-1 root; an edge is
/// named by its child vertex, so edge ids are the vertex ids `1..=2n-1`.
///
/// Values are immutable from the caller's perspective; growth operations
/// return new shapes. Vertex ids are stable across growth (subdivision
/// assigns fresh ids to the new vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    nodes: Vec<Node>,
    pendant_edges: Vec<u32>,
    internal_edges: Vec<u32>,
    n_leaves: u64,
}

/// The unique 2-leaf shape: one cherry hanging off the root edge.
pub fn initial_tree() -> TreeShape {
    TreeShape {
        nodes: vec![
            Node::Root { child: 1 },
            Node::Internal {
                parent: 0,
                left: 2,
                right: 3,
            },
            Node::Leaf { parent: 1 },
            Node::Leaf { parent: 1 },
        ],
        pendant_edges: vec![2, 3],
        internal_edges: vec![1],
        n_leaves: 2,
    }
}

/// Grows a fresh copy of `tree` by one leaf.
///
/// The subdivided edge is chosen with probability `weight / (n - alpha)`
/// where the weight is `1 - alpha` for pendant and `alpha` for internal
/// edges.
pub fn grow_step(tree: &TreeShape, alpha: Alpha, rng: &mut impl Rng) -> TreeShape {
    let mut t = tree.clone();
    t.grow_in_place(alpha, rng);
    t
}

/// Runs the Ford process from the 2-leaf shape up to `n` leaves.
pub fn simulate_ford(n: u64, alpha: Alpha, rng: &mut impl Rng) -> TreeShape {
    assert!(n >= 2, "the Ford process starts from two leaves");
    let mut t = initial_tree();
    t.reserve_for_leaves(n);
    while t.n_leaves < n {
        t.grow_in_place(alpha, rng);
    }
    t
}

impl TreeShape {
    pub fn n_leaves(&self) -> u64 {
        self.n_leaves
    }

    /// Total number of edges, `2n - 1`.
    pub fn edge_count(&self) -> u64 {
        2 * self.n_leaves - 1
    }

    /// All edge ids (child-vertex ids), pendant and internal.
    pub fn edges(&self) -> impl Iterator<Item = u32> + '_ {
        1..self.nodes.len() as u32
    }

    fn is_leaf(&self, v: u32) -> bool {
        matches!(self.nodes[v as usize], Node::Leaf { .. })
    }

    fn parent(&self, v: u32) -> u32 {
        match self.nodes[v as usize] {
            Node::Leaf { parent } | Node::Internal { parent, .. } => parent,
            Node::Root { .. } => panic!("root has no parent"),
        }
    }

    fn children(&self, v: u32) -> Option<(u32, u32)> {
        match self.nodes[v as usize] {
            Node::Internal { left, right, .. } => Some((left, right)),
            _ => None,
        }
    }

    /// A cherry vertex: internal with two leaf children. The fringe subtree
    /// of the edge above it is the cherry.
    fn is_cherry(&self, v: u32) -> bool {
        self.children(v)
            .is_some_and(|(l, r)| self.is_leaf(l) && self.is_leaf(r))
    }

    /// A pitchfork vertex: internal with one leaf child and one cherry child.
    fn is_pitchfork(&self, v: u32) -> bool {
        self.children(v).is_some_and(|(l, r)| {
            (self.is_leaf(l) && self.is_cherry(r)) || (self.is_cherry(l) && self.is_leaf(r))
        })
    }

    /// A cherry is contained in a pitchfork exactly when its parent vertex is
    /// a pitchfork vertex; the root (whose fringe is the whole tree) never is.
    fn cherry_in_pitchfork(&self, cherry: u32) -> bool {
        let p = self.parent(cherry);
        p != 0 && self.is_pitchfork(p)
    }

    /// Weight of `edge` under the Ford process: `1 - alpha` if pendant,
    /// `alpha` if internal (the root edge is internal).
    pub fn edge_weight(&self, edge: u32, alpha: Alpha) -> Result<f64, Error> {
        if edge == 0 || edge as usize >= self.nodes.len() {
            return Err(Error::UnknownEdge(edge));
        }
        Ok(if self.is_leaf(edge) {
            alpha.beta()
        } else {
            alpha.value()
        })
    }

    /// Classifies `edge` into its colour.
    pub fn edge_color(&self, edge: u32) -> Result<EdgeColor, Error> {
        if edge == 0 || edge as usize >= self.nodes.len() {
            return Err(Error::UnknownEdge(edge));
        }
        Ok(if self.is_leaf(edge) {
            let p = self.parent(edge);
            if self.is_cherry(p) {
                if self.cherry_in_pitchfork(p) {
                    EdgeColor::PitchforkCherryPendant
                } else {
                    EdgeColor::EssentialCherryPendant
                }
            } else if self.is_pitchfork(p) {
                EdgeColor::PitchforkOtherPendant
            } else {
                EdgeColor::FreePendant
            }
        } else if self.is_cherry(edge) && !self.cherry_in_pitchfork(edge) {
            EdgeColor::EssentialCherryInternal
        } else {
            EdgeColor::OtherInternal
        })
    }

    /// Counts edges per colour; entry `i` holds colour `i + 1`.
    ///
    /// Components sum to `2n - 1`; the pendant colours sum to `n` and the
    /// internal colours to `n - 1`.
    pub fn classify_edges(&self) -> [u64; 6] {
        let mut counts = [0u64; 6];
        for e in self.edges() {
            counts[self.edge_color(e).expect("edge exists").index()] += 1;
        }
        counts
    }

    /// Exact pitchfork and cherry counts by scanning fringe subtrees.
    pub fn count_stats(&self) -> PairCounts {
        let mut a = 0;
        let mut c = 0;
        for v in 1..self.nodes.len() as u32 {
            if self.is_cherry(v) {
                c += 1;
            } else if self.is_pitchfork(v) {
                a += 1;
            }
        }
        PairCounts {
            pitchforks: a,
            cherries: c,
        }
    }

    fn reserve_for_leaves(&mut self, n: u64) {
        let vertices = 2 * n as usize;
        self.nodes
            .reserve(vertices.saturating_sub(self.nodes.len()));
        self.pendant_edges.reserve(n as usize);
        self.internal_edges.reserve(n as usize);
    }

    pub(crate) fn grow_in_place(&mut self, alpha: Alpha, rng: &mut impl Rng) {
        let edge = self.select_edge(alpha, rng);
        self.insert_leaf_at(edge);
    }

    fn select_edge(&self, alpha: Alpha, rng: &mut impl Rng) -> u32 {
        let n = self.n_leaves as f64;
        let pendant_mass = n * alpha.beta();
        let total = n - alpha.value();
        assert!(total > 0.0, "total edge weight must be positive");
        if rng.random::<f64>() * total < pendant_mass {
            self.pendant_edges[rng.random_range(0..self.pendant_edges.len())]
        } else {
            self.internal_edges[rng.random_range(0..self.internal_edges.len())]
        }
    }

    /// Subdivides `edge = (u, v)` with a fresh vertex `w` and hangs a fresh
    /// leaf `x` off `w`. The edge named `v` keeps its pendant/internal
    /// status; `w` becomes an internal edge and `x` a pendant edge.
    fn insert_leaf_at(&mut self, edge: u32) {
        let v = edge;
        let u = self.parent(v);
        let w = self.nodes.len() as u32;
        let x = w + 1;
        self.nodes.push(Node::Internal {
            parent: u,
            left: v,
            right: x,
        });
        self.nodes.push(Node::Leaf { parent: w });
        match &mut self.nodes[v as usize] {
            Node::Leaf { parent } | Node::Internal { parent, .. } => *parent = w,
            Node::Root { .. } => unreachable!("edge 0 is never selected"),
        }
        match &mut self.nodes[u as usize] {
            Node::Root { child } => *child = w,
            Node::Internal { left, right, .. } => {
                if *left == v {
                    *left = w;
                } else {
                    debug_assert_eq!(*right, v);
                    *right = w;
                }
            }
            Node::Leaf { .. } => unreachable!("a parent is never a leaf"),
        }
        self.internal_edges.push(w);
        self.pendant_edges.push(x);
        self.n_leaves += 1;
    }

    /// Nested-parenthesis shape serialization, e.g. `((,),)` for the 3-leaf
    /// pitchfork. Children are emitted in canonical order (larger subtree
    /// first), so equal strings mean equal shapes. Debug aid, not a
    /// compatibility surface.
    pub fn to_newick(&self) -> String {
        // Post-order over an explicit stack; no recursion so deep
        // caterpillars cannot overflow.
        let root_child = match self.nodes[0] {
            Node::Root { child } => child,
            _ => unreachable!(),
        };
        let mut encoding: Vec<Option<(u64, String)>> = vec![None; self.nodes.len()];
        let mut stack = vec![(root_child, false)];
        while let Some((v, expanded)) = stack.pop() {
            match self.nodes[v as usize] {
                Node::Leaf { .. } => encoding[v as usize] = Some((1, String::new())),
                Node::Internal { left, right, .. } => {
                    if expanded {
                        let l = encoding[left as usize].take().expect("child encoded");
                        let r = encoding[right as usize].take().expect("child encoded");
                        let (big, small) = if (l.0, &l.1) >= (r.0, &r.1) {
                            (l, r)
                        } else {
                            (r, l)
                        };
                        encoding[v as usize] =
                            Some((big.0 + small.0, format!("({},{})", big.1, small.1)));
                    } else {
                        stack.push((v, true));
                        stack.push((left, false));
                        stack.push((right, false));
                    }
                }
                Node::Root { .. } => unreachable!(),
            }
        }
        encoding[root_child as usize]
            .take()
            .expect("root child encoded")
            .1
    }
}
