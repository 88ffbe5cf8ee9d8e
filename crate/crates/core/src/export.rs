//! JSON and DOT renderings of weighted trees.

use serde_json::{json, Value};

use crate::algebra::LabelRegistry;
use crate::scalar::format_scalar;
use crate::tree::TreeGraph;

/// One tree as JSON: vertices `v1..vk` with their external legs, edges as
/// vertex-name pairs, the flattened external legs and the exact weight.
pub fn tree_json(reg: &LabelRegistry, t: &TreeGraph) -> Value {
    let vertices: Vec<Value> = t
        .vertices
        .iter()
        .enumerate()
        .map(|(i, legs)| {
            json!({
                "id": format!("v{}", i + 1),
                "legs": legs.iter().map(|&id| reg.name(id)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Value> = t
        .edges
        .iter()
        .map(|&(a, b)| json!([format!("v{}", a + 1), format!("v{}", b + 1)]))
        .collect();
    let externals: Vec<&str> = t.vertices.iter().flatten().map(|&id| reg.name(id)).collect();
    json!({
        "vertices": vertices,
        "edges": edges,
        "externals": externals,
        "weight": { "num": t.weight.numer().to_string(), "den": t.weight.denom().to_string() },
    })
}

/// The whole list as a JSON document.
pub fn trees_json(reg: &LabelRegistry, trees: &[TreeGraph]) -> String {
    let doc = json!({ "trees": trees.iter().map(|t| tree_json(reg, t)).collect::<Vec<_>>() });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// One DOT graph per tree. Vertices are `v1..vk`, external legs are plain
/// text nodes named after their labels, the weight is the graph label.
pub fn tree_dot(reg: &LabelRegistry, t: &TreeGraph, index: usize) -> String {
    let mut s = format!("graph tree{index} {{\n");
    s.push_str(&format!("  label={};\n", quote(&format_scalar(&t.weight))));
    for i in 0..t.vertex_count() {
        s.push_str(&format!("  v{} [shape=circle];\n", i + 1));
    }
    for &(a, b) in &t.edges {
        s.push_str(&format!("  v{} -- v{};\n", a + 1, b + 1));
    }
    let mut leg = 0;
    for (v, legs) in t.vertices.iter().enumerate() {
        for &id in legs {
            leg += 1;
            s.push_str(&format!("  e{leg} [shape=plaintext, label={}];\n", quote(reg.name(id))));
            s.push_str(&format!("  v{} -- e{leg};\n", v + 1));
        }
    }
    s.push_str("}\n");
    s
}

pub fn trees_dot(reg: &LabelRegistry, trees: &[TreeGraph]) -> String {
    trees.iter().enumerate().map(|(i, t)| tree_dot(reg, t, i + 1)).collect()
}
