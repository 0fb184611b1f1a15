//! Exhaustive enumeration of connected DAGs with labelled legs.

use super::canon::{canonicalize, Canon};
use super::{GraphError, Port, RigidGraph};
use std::collections::{BTreeMap, HashSet};

/// A kind of vertex: generator index plus arity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexType {
    pub gen: usize,
    pub inputs: usize,
    pub outputs: usize,
}

fn no_odd(_: usize) -> bool {
    false
}

/// Nondecreasing sequences of type indices of length `w`.
fn multisets(ntypes: usize, w: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, ntypes: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for t in start..ntypes {
            cur.push(t);
            rec(t, ntypes, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, ntypes, w, &mut Vec::new(), &mut out);
    out
}

fn distinct_permutations(ms: &[usize]) -> Vec<Vec<usize>> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in ms {
        *counts.entry(x).or_default() += 1;
    }
    fn rec(counts: &mut BTreeMap<usize, usize>, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<usize> = counts.iter().filter(|(_, c)| **c > 0).map(|(k, _)| *k).collect();
        for k in keys {
            *counts.get_mut(&k).unwrap() -= 1;
            cur.push(k);
            rec(counts, left - 1, cur, out);
            cur.pop();
            *counts.get_mut(&k).unwrap() += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut counts, ms.len(), &mut Vec::new(), &mut out);
    out
}

/// k-subsets of `items`, each in increasing order.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Ways to hand out labels 1..=total to groups of the given sizes (labels
/// within a group increasing).
fn distributions(sizes: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let total: usize = sizes.iter().sum();
    let mut out = Vec::new();
    fn rec(sizes: &[usize], i: usize, left: Vec<usize>, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == sizes.len() {
            out.push(cur.clone());
            return;
        }
        for s in subsets(&left, sizes[i]) {
            let rest: Vec<usize> = left.iter().copied().filter(|x| !s.contains(x)).collect();
            cur.push(s);
            rec(sizes, i + 1, rest, cur, out);
            cur.pop();
        }
    }
    rec(sizes, 0, (1..=total).collect(), &mut Vec::new(), &mut out);
    out
}

/// For each vertex in sequence, how many of its input slots are fed by each
/// earlier vertex (the rest are input legs).
fn wirings(seq: &[VertexType], edges: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    let w = seq.len();
    let mut out = Vec::new();
    struct St<'a> {
        seq: &'a [VertexType],
        edges: usize,
        m: usize,
        free_out: Vec<usize>,
        used_edges: usize,
        legs: usize,
        cur: Vec<Vec<usize>>,
    }
    fn rec(st: &mut St, t: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if t == st.seq.len() {
            if st.used_edges == st.edges && st.legs == st.m {
                out.push(st.cur.clone());
            }
            return;
        }
        let need = st.seq[t].inputs;
        // distribute up to `need` incoming edges among vertices 0..t
        let mut counts = vec![0usize; t];
        fn choose(st: &mut St, t: usize, u: usize, left: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
            if u == t {
                let used: usize = counts.iter().sum();
                let legs = st.seq[t].inputs - used;
                if st.used_edges + used > st.edges || st.legs + legs > st.m {
                    return;
                }
                for (v, &c) in counts.iter().enumerate() {
                    st.free_out[v] -= c;
                }
                st.used_edges += used;
                st.legs += legs;
                st.free_out.push(st.seq[t].outputs);
                st.cur.push(counts.clone());
                rec(st, t + 1, out);
                st.cur.pop();
                st.free_out.pop();
                st.legs -= legs;
                st.used_edges -= used;
                for (v, &c) in counts.iter().enumerate() {
                    st.free_out[v] += c;
                }
                return;
            }
            let maxc = left.min(st.free_out[u]);
            for c in 0..=maxc {
                counts[u] = c;
                choose(st, t, u + 1, left - c, counts, out);
            }
            counts[u] = 0;
        }
        choose(st, t, 0, need, &mut counts, out);
    }
    let mut st = St { seq, edges, m, free_out: Vec::with_capacity(w), used_edges: 0, legs: 0, cur: Vec::new() };
    rec(&mut st, 0, &mut out);
    out
}

/// Builds the unlabelled skeleton for a wiring: (ins, outs) with `Leg(0)`
/// placeholders for legs.
fn skeleton(seq: &[VertexType], wiring: &[Vec<usize>]) -> (Vec<Vec<Port>>, Vec<Vec<Port>>) {
    let w = seq.len();
    let mut ins: Vec<Vec<Port>> = Vec::with_capacity(w);
    let mut outs: Vec<Vec<Port>> = seq.iter().map(|t| vec![Port::Leg(0); t.outputs]).collect();
    let mut next_out = vec![0usize; w];
    for t in 0..w {
        let mut vi = Vec::with_capacity(seq[t].inputs);
        for (u, &c) in wiring[t].iter().enumerate() {
            for _ in 0..c {
                let s = next_out[u];
                next_out[u] += 1;
                outs[u][s] = Port::Slot(t, vi.len());
                vi.push(Port::Slot(u, s));
            }
        }
        while vi.len() < seq[t].inputs {
            vi.push(Port::Leg(0));
        }
        ins.push(vi);
    }
    (ins, outs)
}

/// Canonical representatives (unclustered) of all connected graphs with the
/// given leg counts, built from `weight` vertices of the given types, whose
/// genus lies in `genera`. When `required` is set, that type occurs exactly
/// once. Results are sorted by canonical key.
pub fn enumerate_shapes(
    m: usize,
    n: usize,
    types: &[VertexType],
    weight: usize,
    genera: &[usize],
    required: Option<usize>,
    cap: usize,
) -> Result<Vec<RigidGraph>, GraphError> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut found: Vec<(Vec<u32>, RigidGraph)> = Vec::new();
    let mut rigid_count = 0usize;
    for ms in multisets(types.len(), weight) {
        if let Some(r) = required {
            if ms.iter().filter(|&&t| t == r).count() != 1 {
                continue;
            }
        }
        let sin: usize = ms.iter().map(|&t| types[t].inputs).sum();
        let sout: usize = ms.iter().map(|&t| types[t].outputs).sum();
        if sin < m || sout < n || sin - m != sout - n {
            continue;
        }
        let edges = sin - m;
        if edges + 1 < weight {
            continue;
        }
        let genus = edges + 1 - weight;
        if !genera.contains(&genus) {
            continue;
        }
        for seq_idx in distinct_permutations(&ms) {
            let seq: Vec<VertexType> = seq_idx.iter().map(|&t| types[t]).collect();
            for wiring in wirings(&seq, edges, m) {
                let (ins, outs) = skeleton(&seq, &wiring);
                let probe = RigidGraph { gens: seq.iter().map(|t| t.gen).collect(), basis: vec![0; weight], ins, outs };
                if !probe.is_connected() {
                    continue;
                }
                let in_sizes: Vec<usize> =
                    probe.ins.iter().map(|v| v.iter().filter(|p| matches!(p, Port::Leg(_))).count()).collect();
                let out_sizes: Vec<usize> =
                    probe.outs.iter().map(|v| v.iter().filter(|p| matches!(p, Port::Leg(_))).count()).collect();
                let din = distributions(&in_sizes);
                let dout = distributions(&out_sizes);
                rigid_count += din.len() * dout.len();
                if rigid_count > cap {
                    return Err(GraphError::ResourceLimit(format!(
                        "more than {cap} candidate graphs for block ({m},{n}) weight {weight}"
                    )));
                }
                for a in &din {
                    for b in &dout {
                        let mut g = probe.clone();
                        for (v, labels) in a.iter().enumerate() {
                            let mut it = labels.iter();
                            for p in g.ins[v].iter_mut() {
                                if let Port::Leg(l) = p {
                                    *l = *it.next().unwrap();
                                }
                            }
                        }
                        for (v, labels) in b.iter().enumerate() {
                            let mut it = labels.iter();
                            for p in g.outs[v].iter_mut() {
                                if let Port::Leg(l) = p {
                                    *l = *it.next().unwrap();
                                }
                            }
                        }
                        let c = canonicalize(&g, &vec![0; weight], &no_odd, false, None);
                        if seen.insert(c.key.clone()) {
                            found.push((c.key, c.graph));
                        }
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found.into_iter().map(|x| x.1).collect())
}

/// All clusterings of the given shapes into tree-shaped clusters such that
/// the quotient graph of clusters has no loops and no directed cycles.
/// Returns canonical (graph, cluster ids) pairs, deduplicated and sorted,
/// together with their number of clusters.
pub fn nested_shapes(shapes: &[RigidGraph]) -> Vec<(RigidGraph, Vec<usize>, usize)> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out: Vec<(Vec<u32>, RigidGraph, Vec<usize>, usize)> = Vec::new();
    for g in shapes {
        let edges = g.edges();
        let nv = g.num_vertices();
        for mask in 0u64..(1u64 << edges.len()) {
            // union-find over inner edges; reject cycles inside clusters
            let mut parent: Vec<usize> = (0..nv).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                let mut y = x;
                while p[y] != r {
                    let nx = p[y];
                    p[y] = r;
                    y = nx;
                }
                r
            }
            let mut ok = true;
            for (k, e) in edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    let (a, b) = (find(&mut parent, e.src), find(&mut parent, e.dst));
                    if a == b {
                        ok = false;
                        break;
                    }
                    parent[a] = b;
                }
            }
            if !ok {
                continue;
            }
            let roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, v)).collect();
            let mut ids: Vec<usize> = Vec::new();
            let clusters: Vec<usize> = roots
                .iter()
                .map(|r| match ids.iter().position(|x| x == r) {
                    Some(i) => i,
                    None => {
                        ids.push(*r);
                        ids.len() - 1
                    }
                })
                .collect();
            let nc = ids.len();
            // cut edges must join different clusters
            let mut succ = vec![Vec::new(); nc];
            for (k, e) in edges.iter().enumerate() {
                if mask >> k & 1 == 0 {
                    let (a, b) = (clusters[e.src], clusters[e.dst]);
                    if a == b {
                        ok = false;
                        break;
                    }
                    succ[a].push(b);
                }
            }
            if !ok || !acyclic(&succ) {
                continue;
            }
            let c: Canon = canonicalize(g, &clusters, &no_odd, false, None);
            if seen.insert(c.key.clone()) {
                out.push((c.key, c.graph, c.clusters, nc));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, g, c, k)| (g, c, k)).collect()
}

pub(crate) fn acyclic(succ: &[Vec<usize>]) -> bool {
    let n = succ.len();
    let mut indeg = vec![0; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut count = 0;
    while let Some(v) = stack.pop() {
        count += 1;
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    count == n
}

/// Result of [`enumerate`].
#[derive(Clone, Debug)]
pub enum Enumerated {
    Rigid(Vec<RigidGraph>),
    /// canonical representative with its automorphism count
    Classes(Vec<(RigidGraph, usize)>),
}

impl Enumerated {
    pub fn len(&self) -> usize {
        match self {
            Enumerated::Rigid(v) => v.len(),
            Enumerated::Classes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// Automorphism count of a canonical graph (vertex orders times
/// permutations of parallel edges).
pub fn automorphism_count(c: &Canon) -> usize {
    let mut bundle_sizes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in c.graph.edges() {
        *bundle_sizes.entry((e.src, e.dst)).or_default() += 1;
    }
    c.relabels.len() * bundle_sizes.values().map(|&k| factorial(k)).product::<usize>()
}

/// All slot orderings and vertex numberings of a graph (exact duplicates removed).
pub fn rigid_orbit(g: &RigidGraph, cap: usize) -> Result<Vec<RigidGraph>, GraphError> {
    let nv = g.num_vertices();
    let mut size = factorial(nv);
    for v in 0..nv {
        size = size.saturating_mul(factorial(g.ins[v].len())).saturating_mul(factorial(g.outs[v].len()));
    }
    if size > cap {
        return Err(GraphError::ResourceLimit(format!("rigid orbit of size {size} exceeds cap {cap}")));
    }
    let mut out = HashSet::new();
    let vperms = all_perms(nv);
    // slot permutations per vertex
    let in_perms: Vec<Vec<Vec<usize>>> = (0..nv).map(|v| all_perms(g.ins[v].len())).collect();
    let out_perms: Vec<Vec<Vec<usize>>> = (0..nv).map(|v| all_perms(g.outs[v].len())).collect();
    let mut choice_in = vec![0usize; nv];
    let mut choice_out = vec![0usize; nv];
    loop {
        for vp in &vperms {
            // new vertex i is old vertex vp[i]
            let mut pos = vec![0; nv];
            for (i, &u) in vp.iter().enumerate() {
                pos[u] = i;
            }
            let pin: Vec<&Vec<usize>> = (0..nv).map(|u| &in_perms[u][choice_in[u]]).collect();
            let pout: Vec<&Vec<usize>> = (0..nv).map(|u| &out_perms[u][choice_out[u]]).collect();
            let inv = |p: &Vec<usize>| {
                let mut r = vec![0; p.len()];
                for (j, &s) in p.iter().enumerate() {
                    r[s] = j;
                }
                r
            };
            let in_inv: Vec<Vec<usize>> = pin.iter().map(|p| inv(p)).collect();
            let out_inv: Vec<Vec<usize>> = pout.iter().map(|p| inv(p)).collect();
            let mut h = RigidGraph { gens: vec![], basis: vec![], ins: vec![], outs: vec![] };
            for &u in vp {
                h.gens.push(g.gens[u]);
                h.basis.push(g.basis[u]);
                h.ins.push(
                    pin[u]
                        .iter()
                        .map(|&s| match g.ins[u][s] {
                            Port::Slot(w, t) => Port::Slot(pos[w], out_inv[w][t]),
                            l => l,
                        })
                        .collect(),
                );
                h.outs.push(
                    pout[u]
                        .iter()
                        .map(|&s| match g.outs[u][s] {
                            Port::Slot(x, t) => Port::Slot(pos[x], in_inv[x][t]),
                            l => l,
                        })
                        .collect(),
                );
            }
            out.insert(h);
        }
        // odometer over slot permutation choices
        let mut k = 0;
        loop {
            if k == 2 * nv {
                let mut v: Vec<RigidGraph> = out.into_iter().collect();
                v.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
                return Ok(v);
            }
            let (arr, lim) = if k < nv {
                (&mut choice_in[k], in_perms[k].len())
            } else {
                (&mut choice_out[k - nv], out_perms[k - nv].len())
            };
            *arr += 1;
            if *arr < lim {
                break;
            }
            *arr = 0;
            k += 1;
        }
    }
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Graphs with `m` inputs and `n` outputs whose vertices have exactly the
/// listed arities (one vertex per entry) and genus ≤ `max_genus`.
/// With `dedupe`, one canonical representative per isomorphism class with
/// its automorphism count; otherwise every rigid graph (all vertex
/// numberings and slot orders).
pub fn enumerate(
    m: usize,
    n: usize,
    arities: &[(usize, usize)],
    max_genus: usize,
    dedupe: bool,
    cap: usize,
) -> Result<Enumerated, GraphError> {
    // one vertex type per distinct arity; require the exact multiset
    let mut kinds: Vec<(usize, usize)> = arities.to_vec();
    kinds.sort_unstable();
    kinds.dedup();
    let types: Vec<VertexType> =
        kinds.iter().enumerate().map(|(i, &(a, b))| VertexType { gen: i, inputs: a, outputs: b }).collect();
    let mut wanted: Vec<usize> = arities.iter().map(|a| kinds.iter().position(|k| k == a).unwrap()).collect();
    wanted.sort_unstable();
    let genera: Vec<usize> = (0..=max_genus).collect();
    let shapes = enumerate_shapes(m, n, &types, arities.len(), &genera, None, cap)?;
    let shapes: Vec<RigidGraph> = shapes
        .into_iter()
        .filter(|g| {
            let mut gs = g.gens.clone();
            gs.sort_unstable();
            gs == wanted
        })
        .collect();
    if dedupe {
        Ok(Enumerated::Classes(
            shapes
                .into_iter()
                .map(|g| {
                    let c = canonicalize(&g, &vec![0; g.num_vertices()], &no_odd, false, None);
                    let a = automorphism_count(&c);
                    (c.graph, a)
                })
                .collect(),
        ))
    } else {
        let mut all = Vec::new();
        for g in &shapes {
            let orbit = rigid_orbit(g, cap)?;
            if all.len() + orbit.len() > cap {
                return Err(GraphError::ResourceLimit(format!("more than {cap} rigid graphs")));
            }
            all.extend(orbit);
        }
        Ok(Enumerated::Rigid(all))
    }
}
