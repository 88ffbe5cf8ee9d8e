//! Canonical codes for vertex-decorated free trees.
//!
//! The tree is rooted at its centroid (trying both centroids when there are
//! two) and encoded bottom-up with children sorted by their codes; the
//! smallest encoding wins. Decorations enter each vertex code verbatim.

/// Returns the canonical code and the vertex order of the canonical
/// traversal (`order[new] = old`).
pub(crate) fn canonical_form(decorations: &[String], edges: &[(usize, usize)]) -> (String, Vec<usize>) {
    let n = decorations.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    centroids(&adj)
        .into_iter()
        .map(|root| {
            let (code, order) = encode(root, usize::MAX, &adj, decorations);
            (code, order)
        })
        .min()
        .expect("a non-empty tree has a centroid")
}

fn encode(v: usize, parent: usize, adj: &[Vec<usize>], dec: &[String]) -> (String, Vec<usize>) {
    let mut children: Vec<(String, Vec<usize>)> = adj[v]
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| encode(c, v, adj, dec))
        .collect();
    children.sort();
    let mut code = String::from("(");
    code.push_str(&dec[v]);
    let mut order = vec![v];
    for (c, o) in children {
        code.push_str(&c);
        order.extend(o);
    }
    code.push(')');
    (code, order)
}

fn centroids(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n == 1 {
        return vec![0];
    }
    // iterative DFS order from vertex 0
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &c in &adj[v] {
            if !seen[c] {
                seen[c] = true;
                parent[c] = v;
                stack.push(c);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &v in order.iter().rev() {
        if parent[v] != usize::MAX {
            size[parent[v]] += size[v];
        }
    }
    let mut out = Vec::new();
    for v in 0..n {
        let mut largest = n - size[v];
        for &c in &adj[v] {
            if c != parent[v] {
                largest = largest.max(size[c]);
            }
        }
        if 2 * largest <= n {
            out.push(v);
        }
    }
    out
}
