//! Λ with edge provenance.
//!
//! Every term is an ordered graph: each vertex holds a list of external legs
//! (positions into the argument's generator list) and internal edges are
//! kept as vertex pairs instead of being expanded into R. Splitting a vertex
//! distributes both kinds of legs, so the recursion is the same as on
//! algebra elements while the topology stays readable.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::canon::canonical_form;
use super::propagator::{r_between, PropagatorMatrix};
use super::TreeError;
use crate::algebra::{make_monomial, signed, LabelId, LabelRegistry, TensorElement};
use crate::coalgebra::Truncation;
use crate::scalar::Scalar;

/// An ordered graph term: per-vertex external legs and sorted edges `(a, b)`, `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedGraph {
    legs: Vec<Vec<u16>>,
    edges: Vec<(u16, u16)>,
}

impl OrderedGraph {
    /// Builds a graph term; edge endpoints are normalized and sorted.
    pub fn new(legs: Vec<Vec<u16>>, edges: impl IntoIterator<Item = (u16, u16)>) -> Self {
        let mut edges: Vec<(u16, u16)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        Self { legs, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.legs.len()
    }

    pub fn legs(&self) -> &[Vec<u16>] {
        &self.legs
    }

    pub fn edges(&self) -> &[(u16, u16)] {
        &self.edges
    }

    fn degree(&self, v: u16) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Linear combination of ordered graphs over a fixed list of external legs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTensor {
    reg: Arc<LabelRegistry>,
    externals: Vec<LabelId>,
    rank: usize,
    terms: BTreeMap<OrderedGraph, Scalar>,
}

impl GraphTensor {
    /// The single-vertex graph carrying all of `externals`, i.e. Λ⁰ of their product.
    pub fn single_vertex(reg: Arc<LabelRegistry>, externals: &[LabelId]) -> Result<Self, TreeError> {
        for &id in externals {
            reg.check(id)?;
        }
        if externals.len() > u16::MAX as usize {
            return Err(TreeError::TooLarge("external legs"));
        }
        let mut terms = BTreeMap::new();
        terms.insert(OrderedGraph::new(vec![(0..externals.len() as u16).collect()], []), Scalar::one());
        Ok(Self { reg, externals: externals.to_vec(), rank: 1, terms })
    }

    /// An empty combination of rank-`rank` graphs.
    pub fn zero(reg: Arc<LabelRegistry>, externals: &[LabelId], rank: usize) -> Self {
        Self { reg, externals: externals.to_vec(), rank, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, graph: OrderedGraph, coeff: Scalar) {
        assert_eq!(graph.vertex_count(), self.rank, "graph has wrong vertex count");
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(graph).or_insert_with(Scalar::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn externals(&self) -> &[LabelId] {
        &self.externals
    }

    pub fn registry(&self) -> &Arc<LabelRegistry> {
        &self.reg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OrderedGraph, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Q at vertex `v` (0-based) of every term, with the ½ factor.
    fn q_at(&self, v: usize, trunc: Truncation, out: &mut BTreeMap<OrderedGraph, Scalar>, factor: &Scalar) {
        let v = v as u16;
        for (g, c) in &self.terms {
            let legs = &g.legs[v as usize];
            let incident: Vec<usize> = (0..g.edges.len())
                .filter(|&e| g.edges[e].0 == v || g.edges[e].1 == v)
                .collect();
            let n_legs = legs.len();
            let n_inc = incident.len();
            for leg_mask in 0u32..(1 << n_legs) {
                // bit set = goes to the right-hand vertex v + 1
                let right_legs = leg_mask.count_ones() as usize;
                let mut inversions = 0usize;
                let mut odd_right_so_far = 0usize;
                for (pos, &leg) in legs.iter().enumerate() {
                    if !self.reg.is_odd(self.externals[leg as usize]) {
                        continue;
                    }
                    if leg_mask >> pos & 1 == 1 {
                        odd_right_so_far += 1;
                    } else {
                        inversions += odd_right_so_far;
                    }
                }
                for edge_mask in 0u32..(1 << n_inc) {
                    let right = right_legs + edge_mask.count_ones() as usize;
                    let left = n_legs + n_inc - right;
                    if left < trunc.0 || right < trunc.0 {
                        continue;
                    }
                    let graph = split_graph(g, v, leg_mask, &incident, edge_mask);
                    let mut w = c * factor;
                    if inversions % 2 == 1 {
                        w = -w;
                    }
                    let entry = out.entry(graph).or_insert_with(Scalar::zero);
                    *entry += w;
                }
            }
        }
    }

    /// One Λ step: (1/k) Σ_v Q_v.
    pub fn step(&self, trunc: Truncation) -> Result<GraphTensor, TreeError> {
        let k = self.rank;
        if k + 1 > u16::MAX as usize {
            return Err(TreeError::TooLarge("vertices"));
        }
        let factor = Scalar::new(1.into(), (2 * k as i64).into());
        let mut terms = BTreeMap::new();
        for v in 0..k {
            self.q_at(v, trunc, &mut terms, &factor);
        }
        terms.retain(|_, c: &mut Scalar| !c.is_zero());
        Ok(GraphTensor { reg: self.reg.clone(), externals: self.externals.clone(), rank: k + 1, terms })
    }

    /// Expands every edge into R_{a,b} and the legs into generators, giving
    /// the plain tensor this combination stands for.
    pub fn to_tensor(&self, p: &PropagatorMatrix) -> Result<TensorElement, TreeError> {
        let mut out = TensorElement::zero(self.reg.clone(), self.rank);
        for (g, c) in &self.terms {
            let mut slots = Vec::with_capacity(self.rank);
            let mut coeff = c.clone();
            for legs in &g.legs {
                let labels: Vec<LabelId> = legs.iter().map(|&l| self.externals[l as usize]).collect();
                let (m, s) = make_monomial(&self.reg, &labels)?;
                if s == 0 {
                    coeff = Scalar::zero();
                    break;
                }
                coeff = signed(s, coeff);
                slots.push(m);
            }
            if coeff.is_zero() {
                continue;
            }
            let mut t = TensorElement::pure(self.reg.clone(), slots, coeff);
            for &(a, b) in &g.edges {
                let r = r_between(p, self.rank, a as usize + 1, b as usize + 1);
                t = r.multiply(&t)?;
            }
            out.add_assign_unchecked(&t);
        }
        Ok(out)
    }
}

fn split_graph(g: &OrderedGraph, v: u16, leg_mask: u32, incident: &[usize], edge_mask: u32) -> OrderedGraph {
    let mut legs = Vec::with_capacity(g.legs.len() + 1);
    legs.extend_from_slice(&g.legs[..v as usize]);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (pos, &leg) in g.legs[v as usize].iter().enumerate() {
        if leg_mask >> pos & 1 == 1 {
            right.push(leg);
        } else {
            left.push(leg);
        }
    }
    legs.push(left);
    legs.push(right);
    legs.extend_from_slice(&g.legs[v as usize + 1..]);

    let shift = |x: u16| if x > v { x + 1 } else { x };
    let mut edges = Vec::with_capacity(g.edges.len() + 1);
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        match incident.iter().position(|&i| i == e) {
            Some(bit) => {
                let end = if edge_mask >> bit & 1 == 1 { v + 1 } else { v };
                let other = if a == v { b } else { a };
                edges.push((shift(other), end));
            }
            None => edges.push((shift(a), shift(b))),
        }
    }
    edges.push((v, v + 1));
    OrderedGraph::new(legs, edges)
}

/// Λ^k applied to the product of `externals`, with edge provenance.
pub fn lambda_graphs(
    reg: Arc<LabelRegistry>,
    externals: &[LabelId],
    k: usize,
    trunc: Truncation,
) -> Result<GraphTensor, TreeError> {
    let mut t = GraphTensor::single_vertex(reg, externals)?;
    for _ in 0..k {
        t = t.step(trunc)?;
    }
    Ok(t)
}

/// An unordered tree with per-vertex external legs and a weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeGraph {
    /// External leg labels at each vertex, sorted.
    pub vertices: Vec<Vec<LabelId>>,
    /// Internal edges as `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub weight: Scalar,
}

impl TreeGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// External legs plus incident internal edges.
    pub fn valence(&self, v: usize) -> usize {
        self.vertices[v].len() + self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn min_valence(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.valence(v)).min().unwrap_or(0)
    }

    /// Connected with exactly `k - 1` edges.
    pub fn is_tree(&self) -> bool {
        let n = self.vertex_count();
        n > 0 && self.edges.len() == n - 1 && connected(n, self.edges.iter().copied())
    }

    /// Canonical code of the decorated tree; equal codes mean isomorphic trees.
    pub fn canonical_code(&self) -> String {
        canonical_form(&self.decorations(), &self.edges).0
    }

    fn decorations(&self) -> Vec<String> {
        self.vertices.iter().map(|legs| decoration(legs)).collect()
    }

    /// Relabels the vertices into canonical traversal order.
    pub fn canonicalized(&self) -> TreeGraph {
        let (_, order) = canonical_form(&self.decorations(), &self.edges);
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let vertices = order.iter().map(|&old| self.vertices[old].clone()).collect();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (new_index[a], new_index[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        TreeGraph { vertices, edges, weight: self.weight.clone() }
    }
}

fn decoration(legs: &[LabelId]) -> String {
    let mut s = String::from("[");
    for (i, id) in legs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&id.0.to_string());
    }
    s.push(']');
    s
}

fn connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for (a, b) in edges {
        if a >= n || b >= n {
            return false;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components == 1
}

/// Groups the ordered graphs of `t` into unordered trees and sums their
/// weights, each taken in the canonical vertex order (Koszul sign of the
/// reordering from the external legs). Output is sorted by canonical code; zero-weight classes are dropped.
pub fn extract_trees(t: &GraphTensor) -> Result<Vec<TreeGraph>, TreeError> {
    let mut classes: BTreeMap<String, TreeGraph> = BTreeMap::new();
    for (g, c) in t.terms() {
        let n = g.vertex_count();
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (a as usize, b as usize)).collect();
        if edges.len() + 1 != n || !connected(n, edges.iter().copied()) {
            return Err(TreeError::NotATree { vertices: n, edges: edges.len() });
        }
        let vertices = g
            .legs
            .iter()
            .map(|legs| {
                let mut ids: Vec<LabelId> = legs.iter().map(|&l| t.externals[l as usize]).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        let tree = TreeGraph { vertices, edges, weight: Scalar::zero() };
        let (code, order) = canonical_form(&tree.decorations(), &tree.edges);
        // slots reordered into canonical order pick up the Koszul sign of
        // their external legs, so both orderings of a graph add up
        let odd: Vec<bool> = tree
            .vertices
            .iter()
            .map(|legs| legs.iter().filter(|&&id| t.reg.is_odd(id)).count() % 2 == 1)
            .collect();
        let mut swaps = 0;
        for x in 0..order.len() {
            for y in x + 1..order.len() {
                if order[x] > order[y] && odd[order[x]] && odd[order[y]] {
                    swaps += 1;
                }
            }
        }
        let entry = classes.entry(code).or_insert_with(|| TreeGraph { weight: Scalar::zero(), ..tree.canonicalized() });
        if swaps % 2 == 0 {
            entry.weight += c;
        } else {
            entry.weight -= c;
        }
    }
    Ok(classes.into_values().filter(|tree| !tree.weight.is_zero()).collect())
}

/// Degree of vertex `v` in an ordered graph; exposed for valence checks.
pub fn ordered_valence(g: &OrderedGraph, v: usize) -> usize {
    g.legs[v].len() + g.degree(v as u16)
}
