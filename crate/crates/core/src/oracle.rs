//! Brute-force reference computations.
//!
//! Nothing here touches the tree recursion: trees are generated by attaching
//! vertices one at a time and deduplicated by trying vertex permutations,
//! symmetry factors count permutations directly, and the partition sum walks
//! restricted growth strings. Everything is exponential and capped at 8
//! vertices and 8 external legs.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{make_monomial, AlgebraError, LabelId, LabelRegistry, Monomial, TensorElement};
use crate::functional::{Functional, FunctionalError};
use crate::scalar::Scalar;
use crate::tree::{PropagatorMatrix, TreeGraph};

pub const MAX_VERTICES: usize = 8;
pub const MAX_LEGS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the oracle cap of {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("oracle needs at least one vertex")]
    NoVertices,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

fn check_caps(k: usize, n: usize) -> Result<(), OracleError> {
    if k == 0 {
        return Err(OracleError::NoVertices);
    }
    if k > MAX_VERTICES {
        return Err(OracleError::CapExceeded { what: "vertices", value: k, cap: MAX_VERTICES });
    }
    if n > MAX_LEGS {
        return Err(OracleError::CapExceeded { what: "external legs", value: n, cap: MAX_LEGS });
    }
    Ok(())
}

/// A tree whose external legs are identified by position `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegTree {
    pub legs: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl LegTree {
    fn valence(&self, v: usize) -> usize {
        self.legs[v].len() + self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// Every unlabeled tree shape on `k` vertices, each at least once.
fn attachment_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut parents = vec![0usize; k];
    fn rec(j: usize, k: usize, parents: &mut Vec<usize>, out: &mut Vec<Vec<(usize, usize)>>) {
        if j == k {
            out.push((1..k).map(|v| (parents[v], v)).collect());
            return;
        }
        for p in 0..j {
            parents[j] = p;
            rec(j + 1, k, parents, out);
        }
    }
    rec(1, k, &mut parents, &mut out);
    out
}

/// Isomorphism key: the smallest relabeled edge list over all vertex
/// permutations that keep the (degree, decoration) order intact.
fn brute_key<D: Ord + Clone>(decor: &[D], edges: &[(usize, usize)]) -> (Vec<(usize, D)>, Vec<(usize, usize)>) {
    let n = decor.len();
    let mut degree = vec![0usize; n];
    for &(a, b) in edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| (degree[a], &decor[a]).cmp(&(degree[b], &decor[b])));
    let invariants: Vec<(usize, D)> = idx.iter().map(|&v| (degree[v], decor[v].clone())).collect();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || invariants[i] != invariants[start] {
            blocks.push((start, i));
            start = i;
        }
    }
    let mut best: Option<Vec<(usize, usize)>> = None;
    let mut slots = idx.clone();
    permute_blocks(&blocks, 0, &mut slots, &mut |order| {
        let mut pos = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (pos[a].min(pos[b]), pos[a].max(pos[b])))
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
    });
    (invariants, best.unwrap_or_default())
}

fn permute_blocks(blocks: &[(usize, usize)], b: usize, order: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if b == blocks.len() {
        visit(order);
        return;
    }
    let (lo, hi) = blocks[b];
    heap_permute(order, lo, hi - lo, &mut |o| permute_blocks(blocks, b + 1, o, visit));
}

fn heap_permute(v: &mut Vec<usize>, lo: usize, size: usize, visit: &mut dyn FnMut(&mut Vec<usize>)) {
    if size <= 1 {
        visit(v);
        return;
    }
    for i in 0..size {
        heap_permute(v, lo, size - 1, visit);
        if size % 2 == 0 {
            v.swap(lo + i, lo + size - 1);
        } else {
            v.swap(lo, lo + size - 1);
        }
    }
}

/// Distinct trees with `k` vertices and `n` distinguishable legs whose
/// vertices all have valence ≥ `min_valence`.
pub fn enumerate_leg_trees(k: usize, n: usize, min_valence: usize) -> Result<Vec<LegTree>, OracleError> {
    check_caps(k, n)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for edges in attachment_trees(k) {
        let mut assign = vec![0usize; n];
        loop {
            let mut legs = vec![Vec::new(); k];
            for (leg, &v) in assign.iter().enumerate() {
                legs[v].push(leg);
            }
            let tree = LegTree { legs, edges: edges.clone() };
            if (0..k).all(|v| tree.valence(v) >= min_valence) && seen.insert(brute_key(&tree.legs, &tree.edges)) {
                out.push(tree);
            }
            // next assignment of legs to vertices, odometer style
            let mut i = 0;
            while i < n {
                assign[i] += 1;
                if assign[i] < k {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(out)
}

/// Distinct decorated trees with `k` vertices carrying `externals`.
///
/// Legs are generated as distinguishable and then identified by label, so a
/// repeated label yields each label-decorated tree once. The weight field is
/// left at zero.
pub fn enumerate_trees(k: usize, externals: &[LabelId], min_valence: usize) -> Result<Vec<TreeGraph>, OracleError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in enumerate_leg_trees(k, externals.len(), min_valence)? {
        let vertices: Vec<Vec<LabelId>> = t
            .legs
            .iter()
            .map(|legs| {
                let mut ids: Vec<LabelId> = legs.iter().map(|&l| externals[l]).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        if seen.insert(brute_key(&vertices, &t.edges)) {
            out.push(TreeGraph { vertices, edges: t.edges, weight: Scalar::zero() });
        }
    }
    Ok(out)
}

/// Isomorphism key for a decorated tree, computed by permutation search.
pub fn isomorphism_key(t: &TreeGraph) -> (Vec<(usize, Vec<LabelId>)>, Vec<(usize, usize)>) {
    brute_key(&t.vertices, &t.edges)
}

fn count_automorphisms<D: PartialEq>(decor: &[D], edges: &[(usize, usize)]) -> u64 {
    let n = decor.len();
    let edge_set: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0u64;
    heap_permute(&mut perm, 0, n, &mut |p| {
        if (0..n).all(|v| decor[p[v]] == decor[v])
            && edges.iter().all(|&(a, b)| edge_set.contains(&(p[a].min(p[b]), p[a].max(p[b]))))
        {
            count += 1;
        }
    });
    count
}

/// Number of vertex permutations preserving edges and leg decorations.
pub fn symmetry_factor(t: &TreeGraph) -> Result<u64, OracleError> {
    check_caps(t.vertex_count(), 0)?;
    Ok(count_automorphisms(&t.vertices, &t.edges))
}

/// Symmetry factor with legs told apart by position.
pub fn leg_symmetry_factor(t: &LegTree) -> Result<u64, OracleError> {
    check_caps(t.legs.len(), 0)?;
    Ok(count_automorphisms(&t.legs, &t.edges))
}

/// The value of the ordered product `φ(l₁)⋯φ(lₙ)` under exp_⋆σ, computed as
/// Σ over unordered set partitions of Π σ(block), with the graded sign of
/// regrouping the generators block by block.
pub fn partition_sum(sigma: &Functional, labels: &[LabelId]) -> Result<Scalar, OracleError> {
    check_caps(1, labels.len())?;
    let reg = sigma.registry().clone();
    for &id in labels {
        reg.check(id)?;
    }
    let n = labels.len();
    if n == 0 {
        return Ok(sigma_unit_exp(sigma));
    }
    let mut total = Scalar::zero();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().map_or(0, |m| m + 1);
        // positions in block order; the sign counts odd pairs that swap
        let mut regrouped: Vec<usize> = Vec::with_capacity(n);
        for b in 0..blocks {
            regrouped.extend((0..n).filter(|&i| rgs[i] == b));
        }
        let mut swaps = 0usize;
        for x in 0..n {
            for y in x + 1..n {
                let (p, q) = (regrouped[x], regrouped[y]);
                if p > q && reg.is_odd(labels[p]) && reg.is_odd(labels[q]) {
                    swaps += 1;
                }
            }
        }
        let mut term = if swaps % 2 == 0 { Scalar::one() } else { -Scalar::one() };
        for b in 0..blocks {
            let block: Vec<LabelId> = (0..n).filter(|&i| rgs[i] == b).map(|i| labels[i]).collect();
            let (m, s) = make_monomial(&reg, &block)?;
            let v = if s == 0 { Scalar::zero() } else { sigma.evaluate_monomial(&m)? };
            if s < 0 {
                term = -term;
            }
            term *= v;
            if term.is_zero() {
                break;
            }
        }
        total += term;
        if !next_rgs(&mut rgs) {
            break;
        }
    }
    Ok(total)
}

fn sigma_unit_exp(sigma: &Functional) -> Scalar {
    // exp of a functional vanishing on 1 is 1 on 1
    if sigma.unit_value().is_zero() {
        Scalar::one()
    } else {
        Scalar::zero()
    }
}

/// Advances a restricted growth string; false when exhausted.
fn next_rgs(a: &mut [usize]) -> bool {
    let n = a.len();
    for i in (1..n).rev() {
        let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] <= max_prefix {
            a[i] += 1;
            for x in a[i + 1..].iter_mut() {
                *x = 0;
            }
            return true;
        }
    }
    false
}

/// σ^k on the product of `externals`, summed over brute-force trees: every
/// vertex contributes τ of its legs, every edge a P⁻¹ entry, every tree 1/s.
///
/// The legs and edge ends are assembled as the tensor
/// `Π_edges (φ(x) at a, φ(y) at b) · (legs placed at their vertices)` so that
/// fermionic signs follow the algebra's conventions.
pub fn tree_sum(
    tau: &Functional,
    p: &PropagatorMatrix,
    externals: &[LabelId],
    k: usize,
) -> Result<Scalar, OracleError> {
    let reg = tau.registry().clone();
    let mut total = Scalar::zero();
    for tree in enumerate_leg_trees(k, externals.len(), 0)? {
        let s = leg_symmetry_factor(&tree)?;
        let value = tree_value(tau, p, &reg, externals, &tree)?;
        total += value / Scalar::from_integer(s.into());
    }
    Ok(total)
}

fn tree_value(
    tau: &Functional,
    p: &PropagatorMatrix,
    reg: &std::sync::Arc<LabelRegistry>,
    externals: &[LabelId],
    tree: &LegTree,
) -> Result<Scalar, OracleError> {
    let k = tree.legs.len();
    // legs regrouped vertex by vertex, with the sign of the regrouping
    let regrouped: Vec<usize> = tree.legs.iter().flatten().copied().collect();
    let mut swaps = 0usize;
    for x in 0..regrouped.len() {
        for y in x + 1..regrouped.len() {
            let (a, b) = (regrouped[x], regrouped[y]);
            if a > b && reg.is_odd(externals[a]) && reg.is_odd(externals[b]) {
                swaps += 1;
            }
        }
    }
    let mut coeff = if swaps % 2 == 0 { Scalar::one() } else { -Scalar::one() };
    let mut slots = Vec::with_capacity(k);
    for legs in &tree.legs {
        let labels: Vec<LabelId> = legs.iter().map(|&l| externals[l]).collect();
        let (m, s) = make_monomial(reg, &labels)?;
        if s == 0 {
            return Ok(Scalar::zero());
        }
        if s < 0 {
            coeff = -coeff;
        }
        slots.push(m);
    }
    let placed = TensorElement::pure(reg.clone(), slots, coeff);
    let pairs: Vec<(LabelId, LabelId, Scalar)> = p.inverse_pairs().map(|(x, y, v)| (x, y, v.clone())).collect();
    let mut total = Scalar::zero();
    assign_edges(tau, reg, &tree.edges, &pairs, 0, TensorElement::unit(reg.clone(), k), &placed, &mut total)?;
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn assign_edges(
    tau: &Functional,
    reg: &std::sync::Arc<LabelRegistry>,
    edges: &[(usize, usize)],
    pairs: &[(LabelId, LabelId, Scalar)],
    e: usize,
    acc: TensorElement,
    placed: &TensorElement,
    total: &mut Scalar,
) -> Result<(), OracleError> {
    if e == edges.len() {
        let t = acc.multiply(placed)?;
        *total += tau.evaluate_tensor_power(&t)?;
        return Ok(());
    }
    let (a, b) = edges[e];
    let k = acc.rank();
    for (x, y, v) in pairs {
        let mut slots = vec![Monomial::unit(); k];
        slots[a] = Monomial::generator(*x);
        slots[b] = Monomial::generator(*y);
        let r = TensorElement::pure(reg.clone(), slots, v.clone());
        let next = acc.multiply(&r)?;
        if next.is_zero() {
            continue;
        }
        assign_edges(tau, reg, edges, pairs, e + 1, next, placed, total)?;
    }
    Ok(())
}

/// Number of vertex-labeled trees on `k` vertices.
pub fn cayley(k: usize) -> u64 {
    if k <= 2 {
        1
    } else {
        (k as u64).pow(k as u32 - 2)
    }
}
