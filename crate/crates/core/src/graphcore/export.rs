use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::FiniteGraph;

/// JSON graph schema: sorted edge list with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub label: Option<String>,
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

pub fn to_json(g: &FiniteGraph) -> GraphJson {
    GraphJson {
        label: g.label().map(str::to_owned),
        n_vertices: g.vertex_count(),
        edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
    }
}

pub fn to_dot(g: &FiniteGraph) -> String {
    let name: String = g
        .label()
        .unwrap_or("G")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let mut s = format!("graph {name} {{\n");
    for v in 0..g.vertex_count() {
        match g.word(v) {
            Some(w) => {
                let m = g.bitstrings().map(|(m, _)| m).unwrap_or(0);
                writeln!(s, "  {v} [label=\"{w:0m$b}\"];").unwrap();
            }
            None => writeln!(s, "  {v};").unwrap(),
        }
    }
    for (u, v) in g.edges() {
        writeln!(s, "  {u} -- {v};").unwrap();
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::build_hypercube;

    #[test]
    fn json_edges_sorted() {
        let g = build_hypercube(2).unwrap();
        let j = to_json(&g);
        assert_eq!(j.n_vertices, 4);
        assert_eq!(j.edges, vec![[0, 1], [0, 2], [1, 3], [2, 3]]);
        assert_eq!(j.label.as_deref(), Some("H_2"));
    }

    #[test]
    fn dot_lists_every_edge() {
        let g = build_hypercube(3).unwrap();
        let d = to_dot(&g);
        assert!(d.starts_with("graph H_3 {"));
        assert_eq!(d.matches(" -- ").count(), 12);
        assert!(d.contains("label=\"101\""));
    }
}
