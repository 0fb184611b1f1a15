//! Connected directed acyclic graphs with labelled legs and ordered slots:
//! validation, canonical forms, enumeration and surgery.

mod canon;
mod enumerate;
mod fixture;

pub use canon::{canonicalize, default_word, Canon, Relabel, Symbol};
pub use enumerate::{automorphism_count, enumerate, enumerate_shapes, nested_shapes, rigid_orbit, Enumerated, VertexType};
pub use fixture::{graph_from_json, graph_to_json};

use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("contraction creates a directed cycle")]
    CreatesCycle,
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

/// Where a slot is attached. For an input slot: `Leg(l)` is input leg `l`,
/// `Slot(u, t)` is output slot `t` of vertex `u`. For an output slot: `Leg(l)`
/// is output leg `l`, `Slot(w, t)` is input slot `t` of vertex `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    Leg(usize),
    Slot(usize, usize),
}

/// Vertices are numbered from 0 and carry (generator index, basis index);
/// leg labels are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RigidGraph {
    pub gens: Vec<usize>,
    pub basis: Vec<usize>,
    pub ins: Vec<Vec<Port>>,
    pub outs: Vec<Vec<Port>>,
}

/// An internal edge: output slot `src_slot` of `src` feeds input slot `dst_slot` of `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub src_slot: usize,
    pub dst: usize,
    pub dst_slot: usize,
}

impl RigidGraph {
    /// A single corolla with legs labelled in slot order.
    pub fn corolla(gen: usize, basis: usize, inputs: usize, outputs: usize) -> Self {
        RigidGraph {
            gens: vec![gen],
            basis: vec![basis],
            ins: vec![(1..=inputs).map(Port::Leg).collect()],
            outs: vec![(1..=outputs).map(Port::Leg).collect()],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.gens.len()
    }

    /// Edges ordered by (source vertex, source slot).
    pub fn edges(&self) -> Vec<Edge> {
        let mut v = Vec::new();
        for (u, outs) in self.outs.iter().enumerate() {
            for (s, p) in outs.iter().enumerate() {
                if let Port::Slot(w, t) = *p {
                    v.push(Edge { src: u, src_slot: s, dst: w, dst_slot: t });
                }
            }
        }
        v
    }

    pub fn num_inputs(&self) -> usize {
        self.ins.iter().flatten().filter(|p| matches!(p, Port::Leg(_))).count()
    }

    pub fn num_outputs(&self) -> usize {
        self.outs.iter().flatten().filter(|p| matches!(p, Port::Leg(_))).count()
    }

    pub fn genus(&self) -> isize {
        self.edges().len() as isize - self.num_vertices() as isize + 1
    }

    /// Directed successor lists (with multiplicity).
    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.outs
            .iter()
            .map(|o| o.iter().filter_map(|p| if let Port::Slot(w, _) = p { Some(*w) } else { None }).collect())
            .collect()
    }

    /// Kahn topological order, or None when there is a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.num_vertices();
        let succ = self.successors();
        let mut indeg = vec![0usize; n];
        for s in &succ {
            for &w in s {
                indeg[w] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let nb = self.ins[v].iter().chain(&self.outs[v]).filter_map(|p| match p {
                Port::Slot(w, _) => Some(*w),
                Port::Leg(_) => None,
            });
            for w in nb {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Checks slot consistency, label coverage, connectivity and acyclicity.
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |s: String| Err(GraphError::Invalid(s));
        let n = self.num_vertices();
        if self.basis.len() != n || self.ins.len() != n || self.outs.len() != n {
            return bad("per-vertex arrays differ in length".into());
        }
        let mut in_labels = Vec::new();
        let mut out_labels = Vec::new();
        for v in 0..n {
            for (s, p) in self.ins[v].iter().enumerate() {
                match *p {
                    Port::Leg(l) => in_labels.push(l),
                    Port::Slot(u, t) => {
                        if u >= n || self.outs[u].get(t) != Some(&Port::Slot(v, s)) {
                            return bad(format!("input slot {s} of vertex {v} is not matched"));
                        }
                        if u == v {
                            return bad(format!("self-loop at vertex {v}"));
                        }
                    }
                }
            }
            for (s, p) in self.outs[v].iter().enumerate() {
                match *p {
                    Port::Leg(l) => out_labels.push(l),
                    Port::Slot(w, t) => {
                        if w >= n || self.ins[w].get(t) != Some(&Port::Slot(v, s)) {
                            return bad(format!("output slot {s} of vertex {v} is not matched"));
                        }
                    }
                }
            }
        }
        in_labels.sort_unstable();
        out_labels.sort_unstable();
        if in_labels != (1..=in_labels.len()).collect::<Vec<_>>() {
            return bad("input labels are not 1..m".into());
        }
        if out_labels != (1..=out_labels.len()).collect::<Vec<_>>() {
            return bad("output labels are not 1..n".into());
        }
        if !self.is_connected() {
            return bad("graph is not connected".into());
        }
        if self.topological_order().is_none() {
            return bad("graph has a directed cycle".into());
        }
        Ok(())
    }

    /// Vertices reachable by a directed path from input leg `label`.
    pub fn reachable_set(&self, label: usize) -> BTreeSet<usize> {
        let succ = self.successors();
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = (0..self.num_vertices())
            .filter(|&v| self.ins[v].contains(&Port::Leg(label)))
            .collect();
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(succ[v].iter().copied());
            }
        }
        out
    }

    /// Relabels input legs by `fin` and output legs by `fout` (old label l
    /// becomes `f[l-1]`).
    pub fn relabel_legs(&self, fin: &[usize], fout: &[usize]) -> RigidGraph {
        let mut g = self.clone();
        for p in g.ins.iter_mut().flatten() {
            if let Port::Leg(l) = p {
                *l = fin[*l - 1];
            }
        }
        for p in g.outs.iter_mut().flatten() {
            if let Port::Leg(l) = p {
                *l = fout[*l - 1];
            }
        }
        g
    }

    /// Contracts one internal edge, merging its endpoints into a single
    /// vertex placed at the source's index (the target is removed).
    pub fn contract(&self, e: Edge) -> Result<Skeleton, GraphError> {
        let (u, v) = (e.src, e.dst);
        if self.outs[u].get(e.src_slot) != Some(&Port::Slot(v, e.dst_slot)) {
            return Err(GraphError::Invalid("not an edge of the graph".into()));
        }
        // another directed path u -> ... -> v closes a cycle after merging
        let succ = self.successors();
        let mut seen = vec![false; self.num_vertices()];
        let mut stack: Vec<usize> = succ[u].iter().copied().filter(|&w| w != v).collect();
        while let Some(w) = stack.pop() {
            if w == v {
                return Err(GraphError::CreatesCycle);
            }
            if !seen[w] {
                seen[w] = true;
                stack.extend(succ[w].iter().copied());
            }
        }
        // new vertex index map: v removed, u keeps its index (shifted)
        let idx = |w: usize| if w == v { u } else { w };
        let newi = |w: usize| {
            let w = idx(w);
            if w > v {
                w - 1
            } else {
                w
            }
        };
        // merged slot lists: lower (u) slots first, then upper (v) slots
        let mut in_map = vec![None; self.ins[v].len()];
        let mut out_map = vec![None; self.outs[u].len()];
        let mut merged_ins = Vec::new();
        let mut merged_outs = Vec::new();
        let mut in_origin = Vec::new();
        let mut out_origin = Vec::new();
        for (s, p) in self.ins[u].iter().enumerate() {
            merged_ins.push(*p);
            in_origin.push((u, s));
        }
        for (s, p) in self.ins[v].iter().enumerate() {
            if s != e.dst_slot {
                in_map[s] = Some(merged_ins.len());
                merged_ins.push(*p);
                in_origin.push((v, s));
            }
        }
        for (s, p) in self.outs[u].iter().enumerate() {
            if s != e.src_slot {
                out_map[s] = Some(merged_outs.len());
                merged_outs.push(*p);
                out_origin.push((u, s));
            }
        }
        let u_outs_kept = merged_outs.len();
        let mut v_out_map = vec![0; self.outs[v].len()];
        for (s, p) in self.outs[v].iter().enumerate() {
            v_out_map[s] = merged_outs.len();
            merged_outs.push(*p);
            out_origin.push((v, s));
        }
        let u_in_count = self.ins[u].len();
        let in_slot = |w: usize, t: usize| -> usize {
            if w == u {
                t
            } else if w == v {
                in_map[t].expect("internal slot")
            } else {
                t
            }
        };
        let out_slot = |w: usize, t: usize| -> usize {
            if w == u {
                out_map[t].expect("internal slot")
            } else if w == v {
                v_out_map[t]
            } else {
                t
            }
        };
        let _ = (u_outs_kept, u_in_count);
        let n = self.num_vertices();
        let mut ins = Vec::with_capacity(n - 1);
        let mut outs = Vec::with_capacity(n - 1);
        let mut kinds = Vec::with_capacity(n - 1);
        for w in 0..n {
            if w == v {
                continue;
            }
            let (wi, wo) = if w == u { (merged_ins.clone(), merged_outs.clone()) } else { (self.ins[w].clone(), self.outs[w].clone()) };
            let fix_in = |p: Port| match p {
                Port::Leg(l) => Port::Leg(l),
                Port::Slot(x, t) => Port::Slot(newi(x), out_slot(x, t)),
            };
            let fix_out = |p: Port| match p {
                Port::Leg(l) => Port::Leg(l),
                Port::Slot(x, t) => Port::Slot(newi(x), in_slot(x, t)),
            };
            ins.push(wi.into_iter().map(fix_in).collect::<Vec<_>>());
            outs.push(wo.into_iter().map(fix_out).collect::<Vec<_>>());
            kinds.push(if w == u { None } else { Some((self.gens[w], self.basis[w])) });
        }
        let merged = newi(u);
        let self_pairs = outs[merged]
            .iter()
            .enumerate()
            .filter_map(|(s, p)| match p {
                Port::Slot(x, t) if *x == merged => Some((s, *t)),
                _ => None,
            })
            .collect();
        Ok(Skeleton { vertices: kinds, ins, outs, merged, in_origin, out_origin, self_pairs })
    }
}

/// Result of an edge contraction: the merged vertex has no decoration yet.
/// `self_pairs` lists (output slot, input slot) pairs of the merged vertex
/// joined to itself, left over from parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub vertices: Vec<Option<(usize, usize)>>,
    pub ins: Vec<Vec<Port>>,
    pub outs: Vec<Vec<Port>>,
    pub merged: usize,
    /// origin (old vertex, old slot) of each merged input slot
    pub in_origin: Vec<(usize, usize)>,
    pub out_origin: Vec<(usize, usize)>,
    pub self_pairs: Vec<(usize, usize)>,
}

impl Skeleton {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn merged_arity(&self) -> (usize, usize) {
        (self.ins[self.merged].len(), self.outs[self.merged].len())
    }

    pub fn genus(&self) -> isize {
        let e = self.outs.iter().flatten().filter(|p| matches!(p, Port::Slot(..))).count();
        e as isize - self.num_vertices() as isize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_vertex(lower_ins: &[usize], lower_outs: &[usize], upper_ins: &[usize], upper_outs: &[usize]) -> RigidGraph {
        // 0 marks the internal slot
        let li = lower_ins.iter().map(|&l| Port::Leg(l)).collect();
        let ui_int = upper_ins.iter().position(|&x| x == 0).unwrap();
        let lo_int = lower_outs.iter().position(|&x| x == 0).unwrap();
        let lo = lower_outs.iter().map(|&l| if l == 0 { Port::Slot(1, ui_int) } else { Port::Leg(l) }).collect();
        let ui = upper_ins.iter().map(|&l| if l == 0 { Port::Slot(0, lo_int) } else { Port::Leg(l) }).collect();
        let uo = upper_outs.iter().map(|&l| Port::Leg(l)).collect();
        RigidGraph { gens: vec![0, 0], basis: vec![0, 0], ins: vec![li, ui], outs: vec![lo, uo] }
    }

    #[test]
    fn contract_tree() {
        let g = two_vertex(&[1, 2], &[0, 1], &[0, 3], &[2, 3]);
        g.validate().unwrap();
        let e = g.edges()[0];
        let s = g.contract(e).unwrap();
        assert_eq!(s.num_vertices(), 1);
        assert_eq!(s.merged_arity(), (3, 3));
        assert_eq!(s.ins[0], vec![Port::Leg(1), Port::Leg(2), Port::Leg(3)]);
        assert_eq!(s.outs[0], vec![Port::Leg(1), Port::Leg(2), Port::Leg(3)]);
        assert_eq!(s.genus(), g.genus());
    }

    #[test]
    fn contract_double_edge() {
        let g = RigidGraph {
            gens: vec![0, 0],
            basis: vec![0, 0],
            ins: vec![vec![Port::Leg(1), Port::Leg(2)], vec![Port::Slot(0, 0), Port::Slot(0, 1)]],
            outs: vec![vec![Port::Slot(1, 0), Port::Slot(1, 1)], vec![Port::Leg(1), Port::Leg(2)]],
        };
        g.validate().unwrap();
        assert_eq!(g.genus(), 1);
        for e in g.edges() {
            let s = g.contract(e).unwrap();
            assert_eq!(s.self_pairs.len(), 1);
            assert_eq!(s.genus(), 1);
        }
    }

    #[test]
    fn contract_cycle() {
        // 0 -> 1 -> 2 and 0 -> 2: contracting 0->2 closes a cycle through 1
        let g = RigidGraph {
            gens: vec![0, 0, 0],
            basis: vec![0, 0, 0],
            ins: vec![
                vec![Port::Leg(1), Port::Leg(2)],
                vec![Port::Slot(0, 0), Port::Leg(3)],
                vec![Port::Slot(0, 1), Port::Slot(1, 0)],
            ],
            outs: vec![
                vec![Port::Slot(1, 0), Port::Slot(2, 0)],
                vec![Port::Slot(2, 1), Port::Leg(1)],
                vec![Port::Leg(2), Port::Leg(3)],
            ],
        };
        g.validate().unwrap();
        let e = Edge { src: 0, src_slot: 1, dst: 2, dst_slot: 0 };
        assert_eq!(g.contract(e), Err(GraphError::CreatesCycle));
        let ok = Edge { src: 0, src_slot: 0, dst: 1, dst_slot: 0 };
        let s = g.contract(ok).unwrap();
        assert_eq!(s.genus(), g.genus());
    }

    #[test]
    fn reachability() {
        let c = RigidGraph::corolla(0, 0, 2, 2);
        assert_eq!(c.reachable_set(1), BTreeSet::from([0]));
        // fork: input 1 enters vertex 0 only; vertex 1 is fed by input 2
        let g = two_vertex(&[1, 2], &[0, 1], &[0, 3], &[2, 3]);
        assert_eq!(g.reachable_set(3), BTreeSet::from([1]));
        assert_eq!(g.reachable_set(1), BTreeSet::from([0, 1]));
    }
}
