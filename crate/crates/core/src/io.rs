//! Text formats for graph input.
//!
//! Edge list: one `u v` pair of node ids per line. Node weights: one
//! `node population` pair per line, every node exactly once. In both, blank
//! lines and anything after `#` are ignored and fields are separated by
//! whitespace or a comma.

use crate::error::{Error, Result};
use crate::partition::WeightedGraph;

/// Largest node id accepted from text input.
pub const MAX_NODE_ID: usize = 1 << 20;

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Non-empty lines with comments removed, paired with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn node_id(field: &str, line: usize) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(v) if v <= MAX_NODE_ID => Ok(v),
        Ok(v) => parse_err(line, format!("node id {v} exceeds {MAX_NODE_ID}")),
        Err(_) => parse_err(line, format!("`{field}` is not a node id")),
    }
}

/// Edges as written; the node count is one more than the largest id.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (line, fields) in records(text) {
        if fields.len() != 2 {
            return parse_err(line, format!("expected 2 fields, found {}", fields.len()));
        }
        let u = node_id(fields[0], line)?;
        let v = node_id(fields[1], line)?;
        if u == v {
            return parse_err(line, format!("self-loop at node {u}"));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    Ok((n, edges))
}

/// Populations indexed by node id; ids must cover `0..n` exactly once.
pub fn parse_node_weights(text: &str) -> Result<Vec<u64>> {
    let mut entries = Vec::new();
    for (line, fields) in records(text) {
        if fields.len() != 2 {
            return parse_err(line, format!("expected 2 fields, found {}", fields.len()));
        }
        let v = node_id(fields[0], line)?;
        let pop = match fields[1].parse::<u64>() {
            Ok(0) => return parse_err(line, "population must be positive"),
            Ok(p) => p,
            Err(_) => return parse_err(line, format!("`{}` is not a population", fields[1])),
        };
        entries.push((line, v, pop));
    }
    let n = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    let mut pops = vec![0u64; n];
    for &(line, v, pop) in &entries {
        if pops[v] != 0 {
            return parse_err(line, format!("node {v} listed twice"));
        }
        pops[v] = pop;
    }
    if let Some(missing) = pops.iter().position(|&p| p == 0) {
        return parse_err(entries.len(), format!("node {missing} has no population"));
    }
    Ok(pops)
}

/// Connected graph from an edge list and optional node weights (unit
/// populations otherwise).
pub fn load_graph(edge_text: &str, weight_text: Option<&str>) -> Result<WeightedGraph> {
    let (n_edges, edges) = parse_edge_list(edge_text)?;
    let pops = match weight_text {
        Some(t) => parse_node_weights(t)?,
        None => vec![1; n_edges],
    };
    if pops.len() < n_edges {
        return Err(Error::Domain(format!(
            "edge list mentions {n_edges} nodes but only {} have weights",
            pops.len()
        )));
    }
    WeightedGraph::new(pops.len(), &edges, pops)?.require_connected()
}

/// Parses `RxC` (for example `6x6`) into grid dimensions.
pub fn parse_grid_spec(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::Domain(format!("`{spec}` is not a grid size like 6x6"));
    let (r, c) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 || r.saturating_mul(c) > MAX_NODE_ID {
        return Err(bad());
    }
    Ok((r, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let text = "# square\n0 1\n1,2\n\n2 3  # last side\n3 0\n";
        let (n, edges) = parse_edge_list(text).unwrap();
        assert_eq!(n, 4);
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        let g = load_graph(text, None).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.total_population(), 4);
    }

    #[test]
    fn weights_are_attached() {
        let g = load_graph("0 1\n1 2\n", Some("2 7\n0 1\n1 3\n")).unwrap();
        assert_eq!(g.populations(), &[1, 3, 7]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line = |r: Result<_>| match r {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line(parse_edge_list("0 1\n1 x\n").map(|_| ())), 2);
        assert_eq!(line(parse_edge_list("0 1 2\n").map(|_| ())), 1);
        assert_eq!(line(parse_edge_list("\n\n3 3\n").map(|_| ())), 3);
        assert_eq!(line(parse_edge_list("0 99999999999\n").map(|_| ())), 1);
        assert_eq!(line(parse_node_weights("0 1\n0 2\n").map(|_| ())), 2);
        assert_eq!(line(parse_node_weights("0 0\n").map(|_| ())), 1);
        assert!(parse_node_weights("1 4\n").is_err());
    }

    #[test]
    fn graph_level_errors() {
        assert!(load_graph("0 1\n2 3\n", None).is_err());
        assert!(load_graph("0 1\n1 0\n", None).is_err());
        assert!(load_graph("0 1\n1 2\n", Some("0 1\n1 1\n")).is_err());
        assert!(load_graph("", None).is_err());
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid_spec("6x6").unwrap(), (6, 6));
        assert_eq!(parse_grid_spec("3X4").unwrap(), (3, 4));
        for bad in ["6", "0x3", "ax2", "2x", "100000x100000"] {
            assert!(parse_grid_spec(bad).is_err(), "{bad}");
        }
    }
}
