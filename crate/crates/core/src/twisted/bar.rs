use super::{Piece, TwistedAlgebra, TwistedError, TwistedRightModule};
use crate::exact_linalg::{homology, HomologyProfile, LinalgError, Rational, SparseMatrix};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Arity (m, n), total weight and whether module coefficients are used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwBlockKey {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub coefficients: bool,
}

impl TwBlockKey {
    /// The block of weight N whose homology tests Koszulness: N inputs and
    /// N outputs, or N−1 inputs and N outputs with module coefficients (the
    /// module lives on n = m + 1).
    pub fn koszul(n: usize, coefficients: bool) -> Self {
        let m = if coefficients { n.saturating_sub(1) } else { n };
        TwBlockKey { m, n, weight: n, coefficients }
    }
}

/// A bar complex graded by the number of pieces k; the differential merges
/// two adjacent pieces (k → k−1).
#[derive(Clone, Debug)]
pub struct TwComplex {
    pub key: TwBlockKey,
    pub bases: BTreeMap<usize, Vec<Vec<Piece>>>,
    pub differentials: BTreeMap<usize, SparseMatrix>,
}

/// Homology of `C_1 ← C_2 ← … ← C_K` indexed by k.
fn homology_from_one(dims: &BTreeMap<usize, usize>, ds: &BTreeMap<usize, SparseMatrix>) -> Result<HomologyProfile, LinalgError> {
    let top = dims.keys().copied().max().unwrap_or(0);
    if top == 0 {
        return Ok(HomologyProfile::default());
    }
    let dim = |k: usize| dims.get(&k).copied().unwrap_or(0);
    let list: Vec<SparseMatrix> =
        (2..=top).map(|k| ds.get(&k).cloned().unwrap_or_else(|| SparseMatrix::new(dim(k - 1), dim(k)))).collect();
    let h = if list.is_empty() {
        HomologyProfile { dims: BTreeMap::from([(0, dim(1))]) }
    } else {
        homology(&list)?
    };
    Ok(HomologyProfile { dims: h.dims.into_iter().map(|(j, d)| (j + 1, d)).collect() })
}

impl TwComplex {
    pub fn dim(&self, k: usize) -> usize {
        self.bases.get(&k).map_or(0, Vec::len)
    }

    pub fn dims(&self) -> BTreeMap<usize, usize> {
        self.bases.iter().map(|(&k, b)| (k, b.len())).collect()
    }

    /// Homology indexed by the number of pieces.
    pub fn homology_by_length(&self) -> Result<HomologyProfile, LinalgError> {
        homology_from_one(&self.dims(), &self.differentials)
    }

    /// Homology indexed by syzygy degree (weight − pieces).
    pub fn homology(&self) -> Result<HomologyProfile, LinalgError> {
        let h = self.homology_by_length()?;
        Ok(HomologyProfile { dims: h.dims.into_iter().map(|(k, d)| (self.key.weight - k, d)).collect() })
    }
}

/// All ways to pick `k` of `items` (kept in order), with the rest.
fn subsets(items: &[usize], k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    if k == 0 {
        return vec![(Vec::new(), items.to_vec())];
    }
    if items.len() < k {
        return Vec::new();
    }
    let (x, rest) = (items[0], &items[1..]);
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = subsets(rest, k - 1)
        .into_iter()
        .map(|(mut c, r)| {
            c.insert(0, x);
            (c, r)
        })
        .collect();
    out.extend(subsets(rest, k).into_iter().map(|(c, mut r)| {
        r.insert(0, x);
        (c, r)
    }));
    out
}

struct Enumerator<'a> {
    dim: &'a dyn Fn(bool, usize, usize, usize) -> Result<usize, TwistedError>,
    out: BTreeMap<usize, Vec<Vec<Piece>>>,
}

impl Enumerator<'_> {
    fn go(&mut self, prefix: &mut Vec<Piece>, ins: &[usize], outs: &[usize], weight: usize, module: bool) -> Result<(), TwistedError> {
        if weight == 0 {
            if ins.is_empty() && outs.is_empty() && !prefix.is_empty() {
                self.out.entry(prefix.len()).or_default().push(prefix.clone());
            }
            return Ok(());
        }
        for w in 1..=weight {
            for a in 0..=ins.len() {
                for b in 0..=outs.len() {
                    let d = (self.dim)(module, a, b, w)?;
                    if d == 0 {
                        continue;
                    }
                    for (si, ri) in subsets(ins, a) {
                        for (so, ro) in subsets(outs, b) {
                            for q in 0..d {
                                prefix.push(Piece { ins: si.clone(), outs: so.clone(), weight: w, basis: q });
                                self.go(prefix, &ri, &ro, weight - w, false)?;
                                prefix.pop();
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn index_of(bases: &BTreeMap<usize, Vec<Vec<Piece>>>) -> BTreeMap<usize, HashMap<Vec<Piece>, usize>> {
    bases.iter().map(|(&k, b)| (k, b.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())).collect()
}

/// Sign of merging pieces l, l+1: the differential passes the suspended
/// pieces before l, then meets piece l. The module piece counts as
/// suspended too; without that shift the action term and the inner merges
/// fail to cancel.
fn merge_sign(odd: &[bool], l: usize) -> i64 {
    let mut parity = usize::from(odd[l]);
    for &o in odd.iter().take(l) {
        parity += usize::from(o) + 1;
    }
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Bar complex of `a` in one block, with coefficients in `module` if given
/// (the module piece comes first).
pub fn bar_tw(a: &TwistedAlgebra, key: TwBlockKey, module: Option<&TwistedRightModule>) -> Result<TwComplex, TwistedError> {
    let with_module = key.coefficients;
    if with_module != module.is_some() {
        return Err(TwistedError::Coefficients);
    }
    let dim = |is_module: bool, m: usize, n: usize, w: usize| -> Result<usize, TwistedError> {
        match (is_module, module) {
            (true, Some(md)) => md.dim(m, n, w),
            _ => a.dim(m, n, w),
        }
    };
    let mut e = Enumerator { dim: &dim, out: BTreeMap::new() };
    let ins: Vec<usize> = (1..=key.m).collect();
    let outs: Vec<usize> = (1..=key.n).collect();
    e.go(&mut Vec::new(), &ins, &outs, key.weight, with_module)?;
    let bases = e.out;
    let index = index_of(&bases);
    let mut differentials = BTreeMap::new();
    for (&k, basis) in &bases {
        if k < 2 {
            continue;
        }
        let empty = HashMap::new();
        let target = index.get(&(k - 1)).unwrap_or(&empty);
        let mut d = SparseMatrix::new(target.len(), basis.len());
        for (c, s) in basis.iter().enumerate() {
            let odd: Vec<bool> = s
                .iter()
                .enumerate()
                .map(|(i, p)| if with_module && i == 0 { module.unwrap().is_odd(p) } else { a.is_odd(p) })
                .collect::<Result<_, _>>()?;
            for l in 0..k - 1 {
                let prod = if with_module && l == 0 { module.unwrap().act(&s[0], &s[1])? } else { a.product(&s[l], &s[l + 1])? };
                let sign = Rational::from_integer(merge_sign(&odd, l).into());
                for (p, x) in prod {
                    let mut t = s[..l].to_vec();
                    t.push(p);
                    t.extend_from_slice(&s[l + 2..]);
                    let r = *target.get(&t).ok_or(TwistedError::Span(crate::span_engine::SpanError::ShapeMissing))?;
                    d.add_to(r, c, &(&sign * x));
                }
            }
        }
        differentials.insert(k, d);
    }
    let cx = TwComplex { key, bases, differentials };
    check_square_zero(&cx.differentials)?;
    Ok(cx)
}

fn check_square_zero(ds: &BTreeMap<usize, SparseMatrix>) -> Result<(), LinalgError> {
    for (&k, d) in ds {
        if let Some(e) = ds.get(&(k - 1)) {
            if !e.mul(d).is_zero() {
                return Err(LinalgError::CompositionNotZero(k - 1, k));
            }
        }
    }
    Ok(())
}

/// Ordered pair of set partitions with matching block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionPair {
    pub ins: Vec<Vec<usize>>,
    pub outs: Vec<Vec<usize>>,
}

impl PartitionPair {
    pub fn new(ins: Vec<Vec<usize>>, outs: Vec<Vec<usize>>) -> Result<Self, TwistedError> {
        let bad = |s: &str| Err(TwistedError::Partition(s.to_string()));
        if ins.len() != outs.len() {
            return bad("different numbers of blocks");
        }
        if ins.iter().zip(&outs).any(|(i, o)| i.len() != o.len() || i.is_empty()) {
            return bad("blocks must be nonempty with matching sizes");
        }
        let n: usize = ins.iter().map(Vec::len).sum();
        for side in [&ins, &outs] {
            let mut all: Vec<usize> = side.iter().flatten().copied().collect();
            all.sort_unstable();
            if all != (1..=n).collect::<Vec<_>>() {
                return bad("blocks must cover 1..=N exactly once");
            }
        }
        let sort = |v: Vec<Vec<usize>>| {
            v.into_iter()
                .map(|mut b| {
                    b.sort_unstable();
                    b
                })
                .collect()
        };
        Ok(PartitionPair { ins: sort(ins), outs: sort(outs) })
    }

    pub fn of_pieces(s: &[Piece]) -> Self {
        PartitionPair { ins: s.iter().map(|p| p.ins.clone()).collect(), outs: s.iter().map(|p| p.outs.clone()).collect() }
    }

    pub fn len(&self) -> usize {
        self.ins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ins.is_empty()
    }
}

fn cross_inversions(blocks: &[Vec<usize>]) -> usize {
    let mut c = 0;
    for s in 0..blocks.len() {
        for t in 0..s {
            c += blocks[s].iter().map(|&i| blocks[t].iter().filter(|&&j| j > i).count()).sum::<usize>();
        }
    }
    c
}

/// Input inversions plus output inversions: pairs i < i' with i in a later
/// block than i'.
pub fn inversion_degree(pp: &PartitionPair) -> usize {
    cross_inversions(&pp.ins) + cross_inversions(&pp.outs)
}

impl TwistedAlgebra {
    /// Sign by which the transposition of unfrozen inputs 1, 2 (or outputs)
    /// acts on a one-dimensional component.
    fn character(&self, m: usize, inputs: bool) -> Result<Rational, TwistedError> {
        if m < 2 {
            return Ok(Rational::one());
        }
        let b = self.core.engine.block(super::Core::block_key(1, m, m, m))?;
        let (g, _) = b.representative(0);
        let k = if inputs { g.num_inputs() } else { g.num_outputs() };
        let mut perm: Vec<usize> = (1..=k).collect();
        perm.swap(0, 1);
        let id: Vec<usize> = (1..=if inputs { g.num_outputs() } else { g.num_inputs() }).collect();
        let h = if inputs { g.relabel_legs(&perm, &id) } else { g.relabel_legs(&id, &perm) };
        let v = b.class_of(&[(Rational::one(), h)])?;
        Ok(v.get(&0).cloned().unwrap_or_else(Rational::zero))
    }
}

/// Bar complex of a twisted algebra whose components are one-dimensional
/// on the diagonal (`A(m, m)` in weight m, nothing else), on the basis of
/// partition pairs of {1..N}. Structure constants: planar products, then
/// the shuffle characters.
pub fn bar_tw_partitions(a: &TwistedAlgebra, n: usize) -> Result<TwComplex, TwistedError> {
    for m in 0..=n {
        for k in 0..=n {
            for w in 1..=n {
                let d = a.dim(m, k, w)?;
                if d != usize::from(m == k && k == w) {
                    return Err(TwistedError::NotDiagonal(format!("A({m},{k}) in weight {w} has dimension {d}")));
                }
            }
        }
    }
    let chi_in: Vec<Rational> = (0..=n).map(|m| a.character(m, true)).collect::<Result<_, _>>()?;
    let chi_out: Vec<Rational> = (0..=n).map(|m| a.character(m, false)).collect::<Result<_, _>>()?;
    let planar = |p: usize, q: usize| -> Result<Rational, TwistedError> {
        let x = Piece { ins: (1..=p).collect(), outs: (1..=p).collect(), weight: p, basis: 0 };
        let y = Piece { ins: (p + 1..=p + q).collect(), outs: (p + 1..=p + q).collect(), weight: q, basis: 0 };
        Ok(a.product(&x, &y)?.first().map_or_else(Rational::zero, |t| t.1.clone()))
    };
    let mut kappa: HashMap<(usize, usize), Rational> = HashMap::new();
    for p in 1..n {
        for q in 1..=n - p {
            kappa.insert((p, q), planar(p, q)?);
        }
    }
    let odd: Vec<bool> = (0..=n)
        .map(|m| if m == 0 { Ok(false) } else { a.is_odd(&Piece { ins: (1..=m).collect(), outs: (1..=m).collect(), weight: m, basis: 0 }) })
        .collect::<Result<_, _>>()?;
    let mut bases: BTreeMap<usize, Vec<Vec<Piece>>> = BTreeMap::new();
    for pp in partition_pairs(n) {
        let s: Vec<Piece> = pp
            .ins
            .iter()
            .zip(&pp.outs)
            .map(|(i, o)| Piece { ins: i.clone(), outs: o.clone(), weight: i.len(), basis: 0 })
            .collect();
        bases.entry(s.len()).or_default().push(s);
    }
    let index = index_of(&bases);
    let mut differentials = BTreeMap::new();
    for (&k, basis) in &bases {
        if k < 2 {
            continue;
        }
        let target = &index[&(k - 1)];
        let mut d = SparseMatrix::new(target.len(), basis.len());
        for (c, s) in basis.iter().enumerate() {
            let par: Vec<bool> = s.iter().map(|p| odd[p.weight]).collect();
            for l in 0..k - 1 {
                let (x, y) = (&s[l], &s[l + 1]);
                let merged = x.weight + y.weight;
                let inv_in = cross_inversions(&[x.ins.clone(), y.ins.clone()]);
                let inv_out = cross_inversions(&[x.outs.clone(), y.outs.clone()]);
                let mut coef = kappa[&(x.weight, y.weight)].clone() * Rational::from_integer(merge_sign(&par, l).into());
                if inv_in % 2 == 1 {
                    coef *= &chi_in[merged];
                }
                if inv_out % 2 == 1 {
                    coef *= &chi_out[merged];
                }
                let mut ins: Vec<usize> = x.ins.iter().chain(&y.ins).copied().collect();
                let mut outs: Vec<usize> = x.outs.iter().chain(&y.outs).copied().collect();
                ins.sort_unstable();
                outs.sort_unstable();
                let mut t = s[..l].to_vec();
                t.push(Piece { ins, outs, weight: merged, basis: 0 });
                t.extend_from_slice(&s[l + 2..]);
                d.add_to(target[&t], c, &coef);
            }
        }
        differentials.insert(k, d);
    }
    let cx = TwComplex { key: TwBlockKey { m: n, n, weight: n, coefficients: false }, bases, differentials };
    check_square_zero(&cx.differentials)?;
    Ok(cx)
}

fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 1..=items.len() {
        for (first, rest) in subsets(items, k) {
            for mut tail in ordered_partitions(&rest) {
                tail.insert(0, first.clone());
                out.push(tail);
            }
        }
    }
    out
}

/// All partition pairs of {1..n}, ordered by the sequence of block sizes.
pub fn partition_pairs(n: usize) -> Vec<PartitionPair> {
    let items: Vec<usize> = (1..=n).collect();
    let parts = ordered_partitions(&items);
    let mut by_sizes: BTreeMap<Vec<usize>, Vec<&Vec<Vec<usize>>>> = BTreeMap::new();
    for p in &parts {
        by_sizes.entry(p.iter().map(Vec::len).collect()).or_default().push(p);
    }
    let mut out = Vec::new();
    for group in by_sizes.values() {
        for i in group {
            for o in group {
                out.push(PartitionPair { ins: (*i).clone(), outs: (*o).clone() });
            }
        }
    }
    out
}

/// Bar complex of the polynomial algebra in one variable, weight N:
/// compositions (m_1|…|m_k) of N in degree k.
#[derive(Clone, Debug)]
pub struct PlanarComplex {
    pub n: usize,
    pub bases: BTreeMap<usize, Vec<Vec<usize>>>,
    pub differentials: BTreeMap<usize, SparseMatrix>,
}

impl PlanarComplex {
    pub fn dims(&self) -> BTreeMap<usize, usize> {
        self.bases.iter().map(|(&k, b)| (k, b.len())).collect()
    }

    /// Homology indexed by the number of parts.
    pub fn homology(&self) -> Result<HomologyProfile, LinalgError> {
        homology_from_one(&self.dims(), &self.differentials)
    }
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn planar_subcomplex(n: usize) -> PlanarComplex {
    let mut bases: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for c in compositions(n) {
        bases.entry(c.len()).or_default().push(c);
    }
    let index: BTreeMap<usize, HashMap<Vec<usize>, usize>> =
        bases.iter().map(|(&k, b)| (k, b.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect())).collect();
    let mut differentials = BTreeMap::new();
    for (&k, basis) in &bases {
        if k < 2 {
            continue;
        }
        let mut d = SparseMatrix::new(bases[&(k - 1)].len(), basis.len());
        for (c, comp) in basis.iter().enumerate() {
            for l in 0..k - 1 {
                let mut t = comp.clone();
                let merged = t[l] + t[l + 1];
                t.splice(l..l + 2, [merged]);
                let sign = if l % 2 == 0 { 1 } else { -1 };
                d.add_to(index[&(k - 1)][&t], c, &Rational::from_integer(sign.into()));
            }
        }
        differentials.insert(k, d);
    }
    PlanarComplex { n, bases, differentials }
}

/// Outcome of a twisted concentration check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "status")]
pub enum TwVerdict {
    Pass,
    Fail { degree: usize },
}

impl TwComplex {
    /// Pass iff the homology lives in syzygy degree 0 only.
    pub fn verdict(&self) -> Result<TwVerdict, LinalgError> {
        Ok(match self.homology()?.support().into_iter().find(|&k| k > 0) {
            Some(degree) => TwVerdict::Fail { degree },
            None => TwVerdict::Pass,
        })
    }

    /// Report in the shape shared with the complexes layer; the block is
    /// keyed by the number of labels N and the coefficient flag.
    pub fn to_json(&self, presentation: &str) -> Result<serde_json::Value, LinalgError> {
        let h = self.homology()?;
        Ok(serde_json::json!({
            "presentation": presentation,
            "block": { "N": self.key.n, "coefficients": self.key.coefficients },
            "dims_by_syzygy": h.dims,
            "verdict": self.verdict()?,
        }))
    }
}
