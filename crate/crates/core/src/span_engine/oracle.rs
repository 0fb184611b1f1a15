//! Baseline dimensions from fully rigid spans: every rigid decorated graph
//! is a column; rows are adjacent slot transpositions, adjacent vertex
//! renumberings, and every relabelling of every relation inserted across
//! every contractible edge. Slow but independent of canonical forms.

use super::{term_graph, BlockKey, SpanError};
use crate::exact_linalg::{Echelon, Rational};
use crate::graphs::{enumerate_shapes, rigid_orbit, Edge, Port, RigidGraph, VertexType};
use crate::presentations::Presentation;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RigidDims {
    pub rigid: usize,
    pub free: usize,
    pub ideal: usize,
    pub quotient: usize,
}

fn swap_in(g: &RigidGraph, v: usize, i: usize) -> RigidGraph {
    let mut h = g.clone();
    h.ins[v].swap(i, i + 1);
    for s in [i, i + 1] {
        if let Port::Slot(w, t) = h.ins[v][s] {
            h.outs[w][t] = Port::Slot(v, s);
        }
    }
    h
}

fn swap_out(g: &RigidGraph, v: usize, i: usize) -> RigidGraph {
    let mut h = g.clone();
    h.outs[v].swap(i, i + 1);
    for s in [i, i + 1] {
        if let Port::Slot(w, t) = h.outs[v][s] {
            h.ins[w][t] = Port::Slot(v, s);
        }
    }
    h
}

fn swap_vertices(g: &RigidGraph, k: usize) -> RigidGraph {
    let r = |w: usize| if w == k { k + 1 } else if w == k + 1 { k } else { w };
    let fix = |p: &Port| match *p {
        Port::Slot(w, t) => Port::Slot(r(w), t),
        l => l,
    };
    let n = g.num_vertices();
    let old = |i: usize| r(i);
    RigidGraph {
        gens: (0..n).map(|i| g.gens[old(i)]).collect(),
        basis: (0..n).map(|i| g.basis[old(i)]).collect(),
        ins: (0..n).map(|i| g.ins[old(i)].iter().map(fix).collect()).collect(),
        outs: (0..n).map(|i| g.outs[old(i)].iter().map(fix).collect()).collect(),
    }
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Rigid-span dimensions of a plain block.
pub fn rigid_dims(p: &Presentation, gen_odd: &[bool], key: BlockKey, cap: usize) -> Result<RigidDims, SpanError> {
    let types: Vec<VertexType> =
        p.generators.iter().enumerate().map(|(i, g)| VertexType { gen: i, inputs: g.inputs, outputs: g.outputs }).collect();
    let shapes = enumerate_shapes(key.m, key.n, &types, key.weight, &[key.genus], None, cap)?;
    let mut cols: Vec<RigidGraph> = Vec::new();
    for s in &shapes {
        for g in rigid_orbit(s, cap)? {
            let dims: Vec<usize> = g.gens.iter().map(|&x| p.generators[x].dim).collect();
            let total: usize = dims.iter().product();
            for idx in 0..total {
                let mut h = g.clone();
                let mut r = idx;
                for v in (0..dims.len()).rev() {
                    h.basis[v] = r % dims[v];
                    r /= dims[v];
                }
                cols.push(h);
            }
            if cols.len() > cap {
                return Err(crate::graphs::GraphError::ResourceLimit(format!("rigid span exceeds {cap}")).into());
            }
        }
    }
    let index: HashMap<RigidGraph, usize> = cols.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    let col = |g: &RigidGraph| index.get(g).copied().ok_or(SpanError::ShapeMissing);
    let odd = |g: usize| gen_odd.get(g).copied().unwrap_or(false);
    let mut sym = Echelon::new(cols.len());
    for (c, g) in cols.iter().enumerate() {
        for v in 0..g.num_vertices() {
            let gs = &p.generators[g.gens[v]];
            for (i, t) in gs.in_transpositions.iter().enumerate() {
                let h = swap_in(g, v, i);
                let mut row = BTreeMap::from([(c, Rational::one())]);
                for (b, row_t) in t.iter().enumerate() {
                    let x = &row_t[g.basis[v]];
                    if !x.is_zero() {
                        let mut hb = h.clone();
                        hb.basis[v] = b;
                        *row.entry(col(&hb)?).or_insert_with(Rational::zero) -= x;
                    }
                }
                sym.insert(row);
            }
            for (i, t) in gs.out_transpositions.iter().enumerate() {
                let h = swap_out(g, v, i);
                let mut row = BTreeMap::from([(c, Rational::one())]);
                for (b, row_t) in t.iter().enumerate() {
                    let x = &row_t[g.basis[v]];
                    if !x.is_zero() {
                        let mut hb = h.clone();
                        hb.basis[v] = b;
                        *row.entry(col(&hb)?).or_insert_with(Rational::zero) -= x;
                    }
                }
                sym.insert(row);
            }
        }
        for k in 0..g.num_vertices().saturating_sub(1) {
            let h = swap_vertices(g, k);
            let eps = if odd(g.gens[k]) && odd(g.gens[k + 1]) { 1 } else { -1 };
            let j = col(&h)?;
            let mut row = BTreeMap::new();
            *row.entry(c).or_insert_with(Rational::zero) += Rational::one();
            *row.entry(j).or_insert_with(Rational::zero) += Rational::from_integer(eps.into());
            row.retain(|_, x: &mut Rational| !x.is_zero());
            sym.insert(row);
        }
    }
    let sym_rank = sym.rank();
    let mut all = sym;
    let relations: Vec<(usize, usize, Vec<(Rational, RigidGraph)>)> = p
        .relations
        .iter()
        .filter_map(|r| {
            let (a, b) = r.arity()?;
            Some((a, b, r.terms.iter().map(|t| (t.coeff.clone(), term_graph(t))).collect()))
        })
        .collect();
    let mut seen = HashSet::new();
    for g in &cols {
        for e in g.edges() {
            let Edge { src: u, dst: v, .. } = e;
            if g.edges().iter().filter(|f| f.src == u && f.dst == v).count() != 1 || g.contract(e).is_err() {
                continue;
            }
            // boundary partners of the pair, sorted
            let mut bin: Vec<Port> = Vec::new();
            let mut bout: Vec<Port> = Vec::new();
            for w in [u, v] {
                bin.extend(g.ins[w].iter().filter(|p| !matches!(p, Port::Slot(x, _) if *x == u || *x == v)));
                bout.extend(g.outs[w].iter().filter(|p| !matches!(p, Port::Slot(x, _) if *x == u || *x == v)));
            }
            bin.sort();
            bout.sort();
            let mut ctx = g.clone();
            for w in [u, v] {
                ctx.gens[w] = usize::MAX;
                ctx.basis[w] = 0;
                ctx.ins[w].clear();
                ctx.outs[w].clear();
            }
            for x in 0..ctx.num_vertices() {
                for p in ctx.ins[x].iter_mut().chain(ctx.outs[x].iter_mut()) {
                    if matches!(p, Port::Slot(y, _) if *y == u || *y == v) {
                        *p = Port::Slot(usize::MAX, 0);
                    }
                }
            }
            if !seen.insert((u, v, ctx.clone(), bin.clone(), bout.clone())) {
                continue;
            }
            for (a, b, terms) in &relations {
                if *a != bin.len() || *b != bout.len() {
                    continue;
                }
                for s in perms(*a) {
                    for t in perms(*b) {
                        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                        for (coef, two) in terms {
                            let mut h = ctx.clone();
                            let place = [u, v];
                            for k in 0..2 {
                                let w = place[k];
                                h.gens[w] = two.gens[k];
                                h.basis[w] = two.basis[k];
                                h.ins[w] = two.ins[k]
                                    .iter()
                                    .map(|p| match *p {
                                        Port::Leg(l) => bin[s[l - 1]],
                                        Port::Slot(x, q) => Port::Slot(place[x], q),
                                    })
                                    .collect();
                                h.outs[w] = two.outs[k]
                                    .iter()
                                    .map(|p| match *p {
                                        Port::Leg(l) => bout[t[l - 1]],
                                        Port::Slot(x, q) => Port::Slot(place[x], q),
                                    })
                                    .collect();
                            }
                            for w in [u, v] {
                                for q in 0..h.ins[w].len() {
                                    if let Port::Slot(x, r) = h.ins[w][q] {
                                        if x != u && x != v {
                                            h.outs[x][r] = Port::Slot(w, q);
                                        }
                                    }
                                }
                                for q in 0..h.outs[w].len() {
                                    if let Port::Slot(x, r) = h.outs[w][q] {
                                        if x != u && x != v {
                                            h.ins[x][r] = Port::Slot(w, q);
                                        }
                                    }
                                }
                            }
                            let mut c = coef.clone();
                            if u > v && odd(two.gens[0]) && odd(two.gens[1]) {
                                c = -c;
                            }
                            *row.entry(col(&h)?).or_insert_with(Rational::zero) += c;
                        }
                        row.retain(|_, x| !x.is_zero());
                        all.insert(row);
                    }
                }
            }
        }
    }
    let all_rank = all.rank();
    Ok(RigidDims { rigid: cols.len(), free: cols.len() - sym_rank, ideal: all_rank - sym_rank, quotient: cols.len() - all_rank })
}
