//! Canonical forms of (optionally clustered) rigid graphs.
//!
//! Vertices are first sorted by an isomorphism-invariant signature (generator,
//! attached leg labels, edge counts); only vertices with equal signatures are
//! permuted. Vertices carrying a leg always have a unique signature, so the
//! search is tiny in practice. The canonical form is the lexicographically
//! smallest serialization among those orders; every order attaining it is
//! returned so callers can read off automorphisms.

use super::{Port, RigidGraph};

/// A letter of an orientation word, in terms of the input graph's numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Cluster(usize),
    Vertex(usize),
}

/// How the input graph maps onto the canonical graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabel {
    /// canonical vertex i is input vertex `order[i]`
    pub order: Vec<usize>,
    /// canonical slot j of canonical vertex i is input slot `in_perm[i][j]`
    pub in_perm: Vec<Vec<usize>>,
    pub out_perm: Vec<Vec<usize>>,
    /// sign of the reordering of odd orientation symbols
    pub sign: i64,
}

#[derive(Clone, Debug)]
pub struct Canon {
    pub key: Vec<u32>,
    pub graph: RigidGraph,
    /// canonical cluster id of each canonical vertex (numbered by first appearance)
    pub clusters: Vec<usize>,
    pub relabels: Vec<Relabel>,
    /// adjacent parallel edges of the canonical graph: (src, out slot k, dst, in slot j)
    /// means slots k, k+1 of src feed slots j, j+1 of dst
    pub bundles: Vec<(usize, usize, usize, usize)>,
}

fn first_appearance(clusters: &[usize], order: &[usize]) -> Vec<usize> {
    // cluster id (input numbering) -> new id
    let maxc = clusters.iter().copied().max().map_or(0, |c| c + 1);
    let mut map = vec![usize::MAX; maxc];
    let mut next = 0;
    for &u in order {
        let c = clusters[u];
        if map[c] == usize::MAX {
            map[c] = next;
            next += 1;
        }
    }
    map
}

/// Default orientation word: clusters by first appearance in vertex order,
/// each followed by its vertices in increasing order.
pub fn default_word(clusters: &[usize]) -> Vec<Symbol> {
    let order: Vec<usize> = (0..clusters.len()).collect();
    word_for_order(clusters, &order)
}

fn word_for_order(clusters: &[usize], order: &[usize]) -> Vec<Symbol> {
    let map = first_appearance(clusters, order);
    let ncl = map.iter().filter(|&&c| c != usize::MAX).count();
    let mut by_new: Vec<Vec<usize>> = vec![Vec::new(); ncl];
    let mut cid = vec![0; ncl];
    for &u in order {
        let c = clusters[u];
        by_new[map[c]].push(u);
        cid[map[c]] = c;
    }
    let mut w = Vec::with_capacity(order.len() + ncl);
    for (k, vs) in by_new.into_iter().enumerate() {
        w.push(Symbol::Cluster(cid[k]));
        w.extend(vs.into_iter().map(Symbol::Vertex));
    }
    w
}

/// Sign of the permutation taking `from` to `to`, restricted to odd symbols.
pub fn word_sign(from: &[Symbol], to: &[Symbol], odd: impl Fn(&Symbol) -> bool) -> i64 {
    let idx: Vec<usize> = to
        .iter()
        .filter(|s| odd(s))
        .map(|s| from.iter().position(|t| t == s).expect("symbol missing from word"))
        .collect();
    let mut inv = 0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] > idx[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn port_key(p: &Port, pos: &[usize]) -> u32 {
    match *p {
        Port::Leg(l) => 2 * l as u32,
        Port::Slot(w, _) => 2 * pos[w] as u32 + 1,
    }
}

fn serialize(g: &RigidGraph, clusters: &[usize], order: &[usize], pos: &[usize]) -> Vec<u32> {
    let cmap = first_appearance(clusters, order);
    let mut key = Vec::with_capacity(order.len() * 8);
    for &u in order {
        key.push(g.gens[u] as u32);
        key.push(cmap[clusters[u]] as u32);
        for side in [&g.ins[u], &g.outs[u]] {
            let mut ks: Vec<u32> = side.iter().map(|p| port_key(p, pos)).collect();
            ks.sort_unstable();
            key.push(ks.len() as u32);
            key.extend(ks);
        }
    }
    key
}

/// Candidate vertex orders: signature-sorted, permuting only equal signatures.
fn candidate_orders(g: &RigidGraph) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let sig = |u: usize| {
        let mut li: Vec<usize> = g.ins[u].iter().filter_map(|p| if let Port::Leg(l) = p { Some(*l) } else { None }).collect();
        let mut lo: Vec<usize> = g.outs[u].iter().filter_map(|p| if let Port::Leg(l) = p { Some(*l) } else { None }).collect();
        li.sort_unstable();
        lo.sort_unstable();
        // vertices with legs first, ordered by their smallest labels
        let has_legs = !(li.is_empty() && lo.is_empty());
        (!has_legs, li, lo, g.gens[u], g.ins[u].len(), g.outs[u].len())
    };
    let mut verts: Vec<usize> = (0..n).collect();
    let sigs: Vec<_> = (0..n).map(sig).collect();
    verts.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &v in &verts {
        match groups.last_mut() {
            Some(gr) if sigs[gr[0]] == sigs[v] => gr.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let mut out = vec![Vec::with_capacity(n)];
    for gr in groups {
        let perms = permutations(&gr);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for prefix in &out {
            for p in &perms {
                let mut o = prefix.clone();
                o.extend_from_slice(p);
                next.push(o);
            }
        }
        out = next;
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn relabel_for(g: &RigidGraph, order: &[usize], pos: &[usize]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = g.num_vertices();
    let mut out_perm = vec![Vec::new(); n];
    let mut out_inv = vec![Vec::new(); n];
    for (i, &u) in order.iter().enumerate() {
        let mut slots: Vec<usize> = (0..g.outs[u].len()).collect();
        slots.sort_by_key(|&s| (port_key(&g.outs[u][s], pos), s));
        let mut inv = vec![0; slots.len()];
        for (j, &s) in slots.iter().enumerate() {
            inv[s] = j;
        }
        out_perm[i] = slots;
        out_inv[u] = inv;
    }
    let mut in_perm = vec![Vec::new(); n];
    for (i, &u) in order.iter().enumerate() {
        let mut slots: Vec<usize> = (0..g.ins[u].len()).collect();
        let tie = |s: usize| match g.ins[u][s] {
            Port::Slot(w, t) => out_inv[w][t],
            Port::Leg(_) => 0,
        };
        slots.sort_by_key(|&s| (port_key(&g.ins[u][s], pos), tie(s)));
        in_perm[i] = slots;
    }
    (in_perm, out_perm)
}

/// Canonical form of `g` with vertex clusters `clusters` (use all zeros for
/// an unclustered graph). `word` is the orientation word of the input
/// (default word when `None`); signs count only symbols declared odd.
pub fn canonicalize(
    g: &RigidGraph,
    clusters: &[usize],
    odd_vertex: &dyn Fn(usize) -> bool,
    odd_cluster: bool,
    word: Option<&[Symbol]>,
) -> Canon {
    let n = g.num_vertices();
    let mut best: Option<Vec<u32>> = None;
    let mut best_orders: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for order in candidate_orders(g) {
        let mut pos = vec![0; n];
        for (i, &u) in order.iter().enumerate() {
            pos[u] = i;
        }
        let key = serialize(g, clusters, &order, &pos);
        match &best {
            Some(b) if key > *b => {}
            Some(b) if key == *b => best_orders.push((order, pos)),
            _ => {
                best = Some(key);
                best_orders.clear();
                best_orders.push((order, pos));
            }
        }
    }
    let key = best.expect("graph has at least one vertex");
    let default;
    let input_word = match word {
        Some(w) => w,
        None => {
            default = default_word(clusters);
            &default
        }
    };
    let odd = |s: &Symbol| match *s {
        Symbol::Cluster(_) => odd_cluster,
        Symbol::Vertex(v) => odd_vertex(g.gens[v]),
    };
    let mut relabels = Vec::with_capacity(best_orders.len());
    for (order, pos) in &best_orders {
        let (in_perm, out_perm) = relabel_for(g, order, pos);
        let target = word_for_order(clusters, order);
        let sign = word_sign(input_word, &target, odd);
        relabels.push(Relabel { order: order.clone(), in_perm, out_perm, sign });
    }
    let r = &relabels[0];
    let (order, pos) = &best_orders[0];
    let mut in_inv = vec![Vec::new(); n];
    let mut out_inv = vec![Vec::new(); n];
    for (i, &u) in order.iter().enumerate() {
        in_inv[u] = vec![0; r.in_perm[i].len()];
        for (j, &s) in r.in_perm[i].iter().enumerate() {
            in_inv[u][s] = j;
        }
        out_inv[u] = vec![0; r.out_perm[i].len()];
        for (j, &s) in r.out_perm[i].iter().enumerate() {
            out_inv[u][s] = j;
        }
    }
    let mut graph = RigidGraph {
        gens: order.iter().map(|&u| g.gens[u]).collect(),
        basis: order.iter().map(|&u| g.basis[u]).collect(),
        ins: Vec::with_capacity(n),
        outs: Vec::with_capacity(n),
    };
    for (i, &u) in order.iter().enumerate() {
        graph.ins.push(
            r.in_perm[i]
                .iter()
                .map(|&s| match g.ins[u][s] {
                    Port::Leg(l) => Port::Leg(l),
                    Port::Slot(w, t) => Port::Slot(pos[w], out_inv[w][t]),
                })
                .collect(),
        );
        graph.outs.push(
            r.out_perm[i]
                .iter()
                .map(|&s| match g.outs[u][s] {
                    Port::Leg(l) => Port::Leg(l),
                    Port::Slot(x, t) => Port::Slot(pos[x], in_inv[x][t]),
                })
                .collect(),
        );
    }
    let cmap = first_appearance(clusters, order);
    let new_clusters = order.iter().map(|&u| cmap[clusters[u]]).collect();
    let mut bundles = Vec::new();
    for (u, outs) in graph.outs.iter().enumerate() {
        for k in 0..outs.len().saturating_sub(1) {
            if let (Port::Slot(v, j), Port::Slot(v2, j2)) = (outs[k], outs[k + 1]) {
                if v == v2 {
                    debug_assert_eq!(j2, j + 1);
                    bundles.push((u, k, v, j));
                }
            }
        }
    }
    Canon { key, graph, clusters: new_clusters, relabels, bundles }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn even(_: usize) -> bool {
        false
    }

    fn sample() -> RigidGraph {
        RigidGraph {
            gens: vec![0, 0],
            basis: vec![0, 0],
            ins: vec![vec![Port::Leg(3), Port::Leg(1)], vec![Port::Leg(2), Port::Slot(0, 1)]],
            outs: vec![vec![Port::Leg(2), Port::Slot(1, 1)], vec![Port::Leg(3), Port::Leg(1)]],
        }
    }

    #[test]
    fn idempotent() {
        let g = sample();
        g.validate().unwrap();
        let c = canonicalize(&g, &[0, 0], &even, false, None);
        let c2 = canonicalize(&c.graph, &c.clusters, &even, false, None);
        assert_eq!(c.key, c2.key);
        assert_eq!(c.graph, c2.graph);
        c.graph.validate().unwrap();
        assert_eq!(c.relabels.len(), 1);
    }

    #[test]
    fn invariant_under_renumbering() {
        let g = sample();
        // swap the vertex numbering
        let sw = |p: Port| match p {
            Port::Slot(w, t) => Port::Slot(1 - w, t),
            l => l,
        };
        let h = RigidGraph {
            gens: vec![0, 0],
            basis: vec![0, 0],
            ins: vec![g.ins[1].iter().map(|&p| sw(p)).collect(), g.ins[0].iter().map(|&p| sw(p)).collect()],
            outs: vec![g.outs[1].iter().map(|&p| sw(p)).collect(), g.outs[0].iter().map(|&p| sw(p)).collect()],
        };
        h.validate().unwrap();
        let a = canonicalize(&g, &[0, 0], &even, false, None);
        let b = canonicalize(&h, &[0, 0], &even, false, None);
        assert_eq!(a.graph, b.graph);
        // odd vertices: the two numberings differ by a transposition
        let odd = |_: usize| true;
        let a = canonicalize(&g, &[0, 0], &odd, false, None);
        let b = canonicalize(&h, &[0, 0], &odd, false, None);
        assert_eq!(a.relabels[0].sign, -b.relabels[0].sign);
    }

    #[test]
    fn double_edge_bundle() {
        let g = RigidGraph {
            gens: vec![0, 0],
            basis: vec![0, 0],
            ins: vec![vec![Port::Leg(1), Port::Leg(2)], vec![Port::Slot(0, 1), Port::Slot(0, 0)]],
            outs: vec![vec![Port::Slot(1, 1), Port::Slot(1, 0)], vec![Port::Leg(1), Port::Leg(2)]],
        };
        g.validate().unwrap();
        let c = canonicalize(&g, &[0, 0], &even, false, None);
        assert_eq!(c.bundles.len(), 1);
        c.graph.validate().unwrap();
    }
}
