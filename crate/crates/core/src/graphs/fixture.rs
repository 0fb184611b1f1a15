//! Graph fixtures in the relation-term JSON dialect, extended to V vertices:
//! each vertex lists its input and output slots; a positive entry is a leg
//! label, a negative entry `-k` is internal edge `k` (the vertex listing
//! `-k` among its outputs is the source).

use super::{GraphError, Port, RigidGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Serialize, Deserialize)]
struct RawVertex {
    gen: usize,
    #[serde(default)]
    basis: usize,
    #[serde(rename = "in")]
    ins: Vec<i64>,
    #[serde(rename = "out")]
    outs: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertices: Vec<RawVertex>,
}

pub fn graph_from_json(src: &str) -> Result<RigidGraph, GraphError> {
    let raw: RawGraph = serde_json::from_str(src).map_err(|e| GraphError::Invalid(e.to_string()))?;
    let mut src_of: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    let mut dst_of: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for (v, rv) in raw.vertices.iter().enumerate() {
        for (s, &x) in rv.outs.iter().enumerate() {
            if x < 0 && src_of.insert(x, (v, s)).is_some() {
                return Err(GraphError::Invalid(format!("edge {} has two sources", -x)));
            }
        }
        for (s, &x) in rv.ins.iter().enumerate() {
            if x < 0 && dst_of.insert(x, (v, s)).is_some() {
                return Err(GraphError::Invalid(format!("edge {} has two targets", -x)));
            }
        }
    }
    let port = |x: i64, other: &BTreeMap<i64, (usize, usize)>| -> Result<Port, GraphError> {
        if x > 0 {
            Ok(Port::Leg(x as usize))
        } else if x < 0 {
            let (v, s) = other.get(&x).ok_or_else(|| GraphError::Invalid(format!("dangling edge {}", -x)))?;
            Ok(Port::Slot(*v, *s))
        } else {
            Err(GraphError::Invalid("slot entry 0 is not allowed".into()))
        }
    };
    let mut g = RigidGraph { gens: vec![], basis: vec![], ins: vec![], outs: vec![] };
    for rv in &raw.vertices {
        g.gens.push(rv.gen);
        g.basis.push(rv.basis);
        g.ins.push(rv.ins.iter().map(|&x| port(x, &src_of)).collect::<Result<_, _>>()?);
        g.outs.push(rv.outs.iter().map(|&x| port(x, &dst_of)).collect::<Result<_, _>>()?);
    }
    g.validate()?;
    Ok(g)
}

pub fn graph_to_json(g: &RigidGraph) -> String {
    let mut edge_id = BTreeMap::new();
    for (k, e) in g.edges().iter().enumerate() {
        edge_id.insert((e.src, e.src_slot), -(k as i64 + 1));
    }
    let vertices = (0..g.num_vertices())
        .map(|v| RawVertex {
            gen: g.gens[v],
            basis: g.basis[v],
            ins: g.ins[v]
                .iter()
                .map(|p| match *p {
                    Port::Leg(l) => l as i64,
                    Port::Slot(u, t) => edge_id[&(u, t)],
                })
                .collect(),
            outs: g.outs[v]
                .iter()
                .enumerate()
                .map(|(s, p)| match *p {
                    Port::Leg(l) => l as i64,
                    Port::Slot(..) => edge_id[&(v, s)],
                })
                .collect(),
        })
        .collect();
    serde_json::to_string(&RawGraph { vertices }).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = r#"{"vertices": [{"gen": 0, "in": [1, 2], "out": [-1, 1]},
                                  {"gen": 0, "in": [-1, 3], "out": [2, 3]}]}"#;
        let g = graph_from_json(src).unwrap();
        assert_eq!(g.genus(), 0);
        assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);
    }
}
