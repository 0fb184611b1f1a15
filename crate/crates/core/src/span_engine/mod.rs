//! Weight-graded components of free and quotient dioperads/properads.
//!
//! A block (m, n, weight, genus) of the free object is spanned by isomorphism
//! classes of decorated graphs; [`space::ShapeSpace`] gives it coordinates.
//! The ideal is spanned by graphs with one relation inserted: we enumerate
//! "hole contexts" (graphs of one weight less with a marked vertex of the
//! relation's arity) and substitute every relation of the symmetric closure.
//! [`oracle`] recomputes the same dimensions from fully rigid spans.

mod cache;
pub mod oracle;
pub mod space;

pub use space::{Orientation, ShapeSpace};

use crate::exact_linalg::{Echelon, Rational};
use crate::graphs::{enumerate_shapes, nested_shapes, GraphError, Port, RigidGraph, VertexType};
use crate::presentations::{GeneratorSpace, Presentation, TwoVertexTerm, VertexSpec};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpanError {
    #[error("graph class missing from enumerated block")]
    ShapeMissing,
    #[error("block {0} not available")]
    BlockMissing(BlockKey),
    #[error("result genus {0} exceeds bound {1}")]
    GenusOverflow(usize, usize),
    #[error("invalid gluing: {0}")]
    BadGluing(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// (inputs, outputs, weight, genus)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockKey {
    pub m: usize,
    pub n: usize,
    pub weight: usize,
    pub genus: usize,
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{}) weight {} genus {}", self.m, self.n, self.weight, self.genus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Free,
    Ideal,
    Quotient,
}

/// A block of the free object with its ideal and a quotient basis.
#[derive(Debug)]
pub struct SpanBasis {
    pub key: BlockKey,
    /// number of clusters for nested spaces
    pub clusters: Option<usize>,
    pub space: ShapeSpace,
    ideal: Echelon,
    /// free coordinates forming a basis of the quotient
    pub pivots: Vec<usize>,
    pivot_index: HashMap<usize, usize>,
}

impl SpanBasis {
    fn new(key: BlockKey, clusters: Option<usize>, space: ShapeSpace, mut ideal: Echelon) -> Self {
        ideal.reduce();
        let pivots = ideal.free_cols();
        let pivot_index = pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        SpanBasis { key, clusters, space, ideal, pivots, pivot_index }
    }

    pub fn free_dim(&self) -> usize {
        self.space.dim()
    }

    pub fn ideal_dim(&self) -> usize {
        self.ideal.rank()
    }

    pub fn quotient_dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::Free => self.free_dim(),
            Mode::Ideal => self.ideal_dim(),
            Mode::Quotient => self.quotient_dim(),
        }
    }

    /// Reduces a vector of free coordinates to quotient coordinates.
    pub fn project(&self, v: &BTreeMap<usize, Rational>) -> BTreeMap<usize, Rational> {
        self.ideal.project(v).into_iter().map(|(c, x)| (self.pivot_index[&c], x)).collect()
    }

    /// Quotient coordinates of a combination of rigid graphs (single cluster).
    pub fn class_of(&self, terms: &[(Rational, RigidGraph)]) -> Result<BTreeMap<usize, Rational>, SpanError> {
        let mut v = BTreeMap::new();
        for (c, g) in terms {
            self.space.add_rigid(g, &vec![0; g.num_vertices()], None, c, &mut v)?;
        }
        Ok(self.project(&v))
    }

    /// Rigid representative of a quotient basis element with its clusters.
    pub fn representative(&self, q: usize) -> (RigidGraph, Vec<usize>) {
        let (shape, g) = self.space.representative(self.pivots[q]);
        (g, shape.clusters.clone())
    }

    fn ideal_rows(&self) -> Vec<BTreeMap<usize, Rational>> {
        self.ideal.clone().rref_rows().into_iter().map(|(_, r)| r).collect()
    }
}

/// An element of a quotient block.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassVector {
    pub key: BlockKey,
    pub coeffs: BTreeMap<usize, Rational>,
}

impl ClassVector {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The formal unit in (1,1), weight 0.
    pub fn unit() -> Self {
        ClassVector { key: BlockKey { m: 1, n: 1, weight: 0, genus: 0 }, coeffs: BTreeMap::from([(0, Rational::one())]) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    A,
    B,
}

/// Leg matching for `compose(a, b, ..)`: outputs of `b` are plugged into
/// inputs of `a`. `inputs[i]` names the operand leg becoming input i+1 of
/// the result, likewise `outputs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub pairs: Vec<(usize, usize)>,
    pub inputs: Vec<(Operand, usize)>,
    pub outputs: Vec<(Operand, usize)>,
}

impl Gluing {
    /// Plugs the listed (b output, a input) pairs; result inputs are b's
    /// inputs followed by a's free inputs, outputs are b's free outputs
    /// followed by a's outputs.
    pub fn standard(a: (usize, usize), b: (usize, usize), pairs: &[(usize, usize)]) -> Self {
        let inputs = (1..=b.0)
            .map(|l| (Operand::B, l))
            .chain((1..=a.0).filter(|l| !pairs.iter().any(|p| p.1 == *l)).map(|l| (Operand::A, l)))
            .collect();
        let outputs = (1..=b.1)
            .filter(|l| !pairs.iter().any(|p| p.0 == *l))
            .map(|l| (Operand::B, l))
            .chain((1..=a.1).map(|l| (Operand::A, l)))
            .collect();
        Gluing { pairs: pairs.to_vec(), inputs, outputs }
    }

    fn check(&self, a: (usize, usize), b: (usize, usize)) -> Result<(), SpanError> {
        let bad = |s: &str| Err(SpanError::BadGluing(s.into()));
        if self.pairs.is_empty() {
            return bad("no legs glued");
        }
        let mut used_b: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        let mut used_a: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        used_a.sort_unstable();
        used_b.sort_unstable();
        if used_a.windows(2).any(|w| w[0] == w[1]) || used_b.windows(2).any(|w| w[0] == w[1]) {
            return bad("leg glued twice");
        }
        if used_b.iter().any(|&l| l == 0 || l > b.1) || used_a.iter().any(|&l| l == 0 || l > a.0) {
            return bad("glued leg out of range");
        }
        let mut ins: Vec<(Operand, usize)> = self.inputs.clone();
        ins.sort_by_key(|x| (x.0 == Operand::B, x.1));
        let mut want: Vec<(Operand, usize)> = (1..=a.0)
            .filter(|l| !used_a.contains(l))
            .map(|l| (Operand::A, l))
            .chain((1..=b.0).map(|l| (Operand::B, l)))
            .collect();
        want.sort_by_key(|x| (x.0 == Operand::B, x.1));
        if ins != want {
            return bad("result inputs must list every free input once");
        }
        let mut outs = self.outputs.clone();
        outs.sort_by_key(|x| (x.0 == Operand::B, x.1));
        let mut want: Vec<(Operand, usize)> = (1..=a.1)
            .map(|l| (Operand::A, l))
            .chain((1..=b.1).filter(|l| !used_b.contains(l)).map(|l| (Operand::B, l)))
            .collect();
        want.sort_by_key(|x| (x.0 == Operand::B, x.1));
        if outs != want {
            return bad("result outputs must list every free output once");
        }
        Ok(())
    }
}

/// Grafts rigid graphs: vertices of `b` come first, then those of `a`.
pub fn glue(a: &RigidGraph, b: &RigidGraph, gl: &Gluing) -> RigidGraph {
    let nb = b.num_vertices();
    let new_in = |op: Operand, l: usize| gl.inputs.iter().position(|&x| x == (op, l)).map(|i| i + 1);
    let new_out = |op: Operand, l: usize| gl.outputs.iter().position(|&x| x == (op, l)).map(|i| i + 1);
    let mut g = RigidGraph {
        gens: b.gens.iter().chain(&a.gens).copied().collect(),
        basis: b.basis.iter().chain(&a.basis).copied().collect(),
        ins: Vec::new(),
        outs: Vec::new(),
    };
    // b output label -> (vertex, slot)
    let mut b_out_slot = HashMap::new();
    for (v, outs) in b.outs.iter().enumerate() {
        for (t, p) in outs.iter().enumerate() {
            if let Port::Leg(l) = p {
                b_out_slot.insert(*l, (v, t));
            }
        }
    }
    let mut a_in_slot = HashMap::new();
    for (v, ins) in a.ins.iter().enumerate() {
        for (t, p) in ins.iter().enumerate() {
            if let Port::Leg(l) = p {
                a_in_slot.insert(*l, (v, t));
            }
        }
    }
    for v in 0..nb {
        g.ins.push(b.ins[v].iter().map(|p| match *p {
            Port::Leg(l) => Port::Leg(new_in(Operand::B, l).unwrap()),
            s => s,
        }).collect());
        g.outs.push(b.outs[v].iter().map(|p| match *p {
            Port::Leg(l) => match gl.pairs.iter().find(|q| q.0 == l) {
                Some(&(_, al)) => {
                    let (w, t) = a_in_slot[&al];
                    Port::Slot(nb + w, t)
                }
                None => Port::Leg(new_out(Operand::B, l).unwrap()),
            },
            s => s,
        }).collect());
    }
    for v in 0..a.num_vertices() {
        g.ins.push(a.ins[v].iter().map(|p| match *p {
            Port::Leg(l) => match gl.pairs.iter().find(|q| q.1 == l) {
                Some(&(bl, _)) => {
                    let (w, t) = b_out_slot[&bl];
                    Port::Slot(w, t)
                }
                None => Port::Leg(new_in(Operand::A, l).unwrap()),
            },
            Port::Slot(w, t) => Port::Slot(nb + w, t),
        }).collect());
        g.outs.push(a.outs[v].iter().map(|p| match *p {
            Port::Leg(l) => Port::Leg(new_out(Operand::A, l).unwrap()),
            Port::Slot(w, t) => Port::Slot(nb + w, t),
        }).collect());
    }
    g
}

/// A relation in the symmetric closure, as a combination of rigid
/// two-vertex graphs (vertex 0 lower, vertex 1 upper).
type Combo = Vec<(Rational, RigidGraph)>;

/// Rigid two-vertex graph of a relation term.
pub fn term_graph(t: &TwoVertexTerm) -> RigidGraph {
    let port_in = |v: &VertexSpec, partner: Port| -> Vec<Port> {
        v.ins.iter().map(|&l| if l == 0 { partner } else { Port::Leg(l) }).collect()
    };
    let lower_out_slot = t.lower.outs.iter().position(|&l| l == 0).expect("internal output");
    let upper_in_slot = t.upper.ins.iter().position(|&l| l == 0).expect("internal input");
    RigidGraph {
        gens: vec![t.lower.gen, t.upper.gen],
        basis: vec![t.lower.basis, t.upper.basis],
        ins: vec![port_in(&t.lower, Port::Leg(0)), port_in(&t.upper, Port::Slot(0, lower_out_slot))],
        outs: vec![
            t.lower.outs.iter().map(|&l| if l == 0 { Port::Slot(1, upper_in_slot) } else { Port::Leg(l) }).collect(),
            t.upper.outs.iter().map(|&l| Port::Leg(l)).collect(),
        ],
    }
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Substitutes a two-vertex graph for the hole vertex `h` of a context;
/// the lower vertex takes index h, the upper h+1. Leg label l of the
/// two-vertex graph stands for hole slot l-1.
fn expand_hole(ctx: &RigidGraph, h: usize, two: &RigidGraph) -> RigidGraph {
    let shift = |w: usize| if w > h { w + 1 } else { w };
    // hole slot -> (new vertex, slot)
    let mut hin = vec![(0, 0); ctx.ins[h].len()];
    let mut hout = vec![(0, 0); ctx.outs[h].len()];
    for k in 0..2 {
        for (s, p) in two.ins[k].iter().enumerate() {
            if let Port::Leg(l) = p {
                hin[l - 1] = (h + k, s);
            }
        }
        for (s, p) in two.outs[k].iter().enumerate() {
            if let Port::Leg(l) = p {
                hout[l - 1] = (h + k, s);
            }
        }
    }
    let mut g = RigidGraph { gens: Vec::new(), basis: Vec::new(), ins: Vec::new(), outs: Vec::new() };
    for v in 0..ctx.num_vertices() {
        if v == h {
            for k in 0..2 {
                g.gens.push(two.gens[k]);
                g.basis.push(two.basis[k]);
                g.ins.push(two.ins[k].iter().map(|p| match *p {
                    Port::Leg(l) => fix_out_partner(&ctx.ins[h][l - 1], h, &hout, shift),
                    Port::Slot(w, t) => Port::Slot(h + w, t),
                }).collect());
                g.outs.push(two.outs[k].iter().map(|p| match *p {
                    Port::Leg(l) => fix_in_partner(&ctx.outs[h][l - 1], h, &hin, shift),
                    Port::Slot(w, t) => Port::Slot(h + w, t),
                }).collect());
            }
        } else {
            g.gens.push(ctx.gens[v]);
            g.basis.push(ctx.basis[v]);
            g.ins.push(ctx.ins[v].iter().map(|p| fix_out_partner(p, h, &hout, shift)).collect());
            g.outs.push(ctx.outs[v].iter().map(|p| fix_in_partner(p, h, &hin, shift)).collect());
        }
    }
    g
}

// What a hole input slot was attached to, in the new numbering.
fn fix_out_partner(p: &Port, h: usize, hout: &[(usize, usize)], shift: impl Fn(usize) -> usize) -> Port {
    match *p {
        Port::Leg(l) => Port::Leg(l),
        Port::Slot(w, t) if w == h => Port::Slot(hout[t].0, hout[t].1),
        Port::Slot(w, t) => Port::Slot(shift(w), t),
    }
}

fn fix_in_partner(p: &Port, h: usize, hin: &[(usize, usize)], shift: impl Fn(usize) -> usize) -> Port {
    match *p {
        Port::Leg(l) => Port::Leg(l),
        Port::Slot(w, t) if w == h => Port::Slot(hin[t].0, hin[t].1),
        Port::Slot(w, t) => Port::Slot(shift(w), t),
    }
}

type Slot<T> = Arc<Mutex<Option<T>>>;

/// Computes and caches blocks for one presentation and orientation.
pub struct SpanEngine {
    pub pres: Presentation,
    gens: Arc<Vec<GeneratorSpace>>,
    orient: Orientation,
    pub cap: usize,
    /// largest genus `compose` may produce
    pub max_genus: usize,
    /// when false, `compose` only uses blocks that were already built
    pub lazy: bool,
    cache_dir: Option<PathBuf>,
    closures: Mutex<HashMap<(usize, usize), Arc<Vec<Combo>>>>,
    blocks: Mutex<HashMap<BlockKey, Slot<Arc<SpanBasis>>>>,
    nested: Mutex<HashMap<BlockKey, Slot<Arc<BTreeMap<usize, SpanBasis>>>>>,
}

pub const DEFAULT_CAP: usize = 5_000_000;

impl SpanEngine {
    pub fn new(p: &Presentation) -> Self {
        let odd: Vec<bool> = p.generators.iter().map(|g| g.is_odd()).collect();
        Self::with_parity(p, odd)
    }

    /// Engine whose orientation signs use the given generator parities.
    pub fn with_parity(p: &Presentation, gen_odd: Vec<bool>) -> Self {
        SpanEngine {
            pres: p.clone(),
            gens: Arc::new(p.generators.clone()),
            orient: Orientation { gen_odd, cluster_odd: false },
            cap: DEFAULT_CAP,
            max_genus: usize::MAX,
            lazy: true,
            cache_dir: None,
            closures: Mutex::new(HashMap::new()),
            blocks: Mutex::new(HashMap::new()),
            nested: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_cache(mut self, dir: Option<PathBuf>) -> Self {
        self.cache_dir = dir;
        self
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orient
    }

    fn types(&self) -> Vec<VertexType> {
        self.gens.iter().enumerate().map(|(i, g)| VertexType { gen: i, inputs: g.inputs, outputs: g.outputs }).collect()
    }

    /// Genus of a block built from `weight` vertices, if consistent.
    pub fn plain_shapes(&self, key: BlockKey) -> Result<Vec<RigidGraph>, SpanError> {
        if key.weight == 0 {
            return Ok(Vec::new());
        }
        Ok(enumerate_shapes(key.m, key.n, &self.types(), key.weight, &[key.genus], None, self.cap)?)
    }

    fn relation_arities(&self) -> Vec<(usize, usize)> {
        let mut a: Vec<(usize, usize)> = self.pres.relations.iter().filter_map(|r| r.arity()).collect();
        a.sort_unstable();
        a.dedup();
        a
    }

    /// The free weight-2 genus-0 space of the given arity.
    pub fn two_vertex_space(&self, arity: (usize, usize)) -> Result<ShapeSpace, SpanError> {
        let key = BlockKey { m: arity.0, n: arity.1, weight: 2, genus: 0 };
        let items = self.plain_shapes(key)?.into_iter().map(|g| {
            let nv = g.num_vertices();
            (g, vec![0; nv], 1)
        });
        Ok(ShapeSpace::build(self.gens.clone(), self.orient.clone(), items.collect()))
    }

    /// Coordinates of the relation span at one arity, in `two_vertex_space`.
    pub fn relation_rows(&self, arity: (usize, usize)) -> Result<Vec<BTreeMap<usize, Rational>>, SpanError> {
        let space = self.two_vertex_space(arity)?;
        let mut rows = Vec::new();
        for combo in self.closure(arity)?.iter() {
            let mut v = BTreeMap::new();
            for (c, g) in combo {
                space.add_rigid(g, &[0, 0], None, c, &mut v)?;
            }
            rows.push(v);
        }
        Ok(rows)
    }

    /// Relations of arity (a, b), closed under relabelling of legs, reduced
    /// to a linearly independent family.
    pub fn closure(&self, arity: (usize, usize)) -> Result<Arc<Vec<Combo>>, SpanError> {
        if let Some(c) = self.closures.lock().unwrap().get(&arity) {
            return Ok(c.clone());
        }
        let space = self.two_vertex_space(arity)?;
        let mut ech = Echelon::new(space.dim());
        let mut out = Vec::new();
        let perms_in = all_perms(arity.0);
        let perms_out = all_perms(arity.1);
        for r in self.pres.relations.iter().filter(|r| r.arity() == Some(arity)) {
            let graphs: Vec<(Rational, RigidGraph)> = r.terms.iter().map(|t| (t.coeff.clone(), term_graph(t))).collect();
            for s in &perms_in {
                for t in &perms_out {
                    let fin: Vec<usize> = s.iter().map(|x| x + 1).collect();
                    let fout: Vec<usize> = t.iter().map(|x| x + 1).collect();
                    let combo: Combo = graphs.iter().map(|(c, g)| (c.clone(), g.relabel_legs(&fin, &fout))).collect();
                    let mut v = BTreeMap::new();
                    for (c, g) in &combo {
                        space.add_rigid(g, &[0, 0], None, c, &mut v)?;
                    }
                    if ech.insert(v) {
                        out.push(combo);
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.closures.lock().unwrap().insert(arity, out.clone());
        Ok(out)
    }

    /// Adds the ideal rows coming from hole contexts (already clustered) to `ech`.
    fn insert_ideal(
        &self,
        space: &ShapeSpace,
        contexts: &[(RigidGraph, Vec<usize>, usize)],
        hole_arity: &[(usize, usize)],
        ech: &mut Echelon,
    ) -> Result<(), SpanError> {
        let ng = self.gens.len();
        for (ctx, clusters, _) in contexts {
            let h = ctx.gens.iter().position(|&g| g >= ng).expect("context has a hole");
            let arity = hole_arity[ctx.gens[h] - ng];
            let closure = self.closure(arity)?;
            let mut cl = clusters.clone();
            cl.insert(h + 1, clusters[h]);
            let dims: Vec<usize> = (0..ctx.num_vertices()).map(|v| if v == h { 1 } else { self.gens[ctx.gens[v]].dim }).collect();
            let total: usize = dims.iter().product();
            for idx in 0..total {
                let mut c = ctx.clone();
                let mut r = idx;
                for v in (0..dims.len()).rev() {
                    c.basis[v] = r % dims[v];
                    r /= dims[v];
                }
                for combo in closure.iter() {
                    let mut row = BTreeMap::new();
                    for (coef, two) in combo {
                        let g = expand_hole(&c, h, two);
                        space.add_rigid(&g, &cl, None, coef, &mut row)?;
                    }
                    ech.insert(row);
                }
            }
        }
        Ok(())
    }

    fn hole_types(&self) -> (Vec<VertexType>, Vec<(usize, usize)>) {
        let ar = self.relation_arities();
        let ng = self.gens.len();
        let mut types = self.types();
        for (k, &(a, b)) in ar.iter().enumerate() {
            types.push(VertexType { gen: ng + k, inputs: a, outputs: b });
        }
        (types, ar)
    }

    fn contexts(&self, key: BlockKey) -> Result<Vec<RigidGraph>, SpanError> {
        if key.weight < 2 {
            return Ok(Vec::new());
        }
        let (types, ar) = self.hole_types();
        let ng = self.gens.len();
        let mut out = Vec::new();
        for k in 0..ar.len() {
            let mut t = types[..ng].to_vec();
            t.push(types[ng + k]);
            out.extend(enumerate_shapes(key.m, key.n, &t, key.weight - 1, &[key.genus], Some(ng), self.cap)?);
        }
        Ok(out)
    }

    fn build_plain(&self, key: BlockKey) -> Result<SpanBasis, SpanError> {
        let items: Vec<_> = self.plain_shapes(key)?.into_iter().map(|g| {
            let nv = g.num_vertices();
            (g, vec![0; nv], 1)
        }).collect();
        let space = ShapeSpace::build(self.gens.clone(), self.orient.clone(), items);
        let mut ech = Echelon::new(space.dim());
        if let Some(rows) = self.cache_load(key, None, space.dim()) {
            for r in rows {
                ech.insert(r);
            }
        } else {
            let ctx: Vec<_> = self.contexts(key)?.into_iter().map(|g| {
                let nv = g.num_vertices();
                (g, vec![0; nv], 1)
            }).collect();
            let (_, ar) = self.hole_types();
            self.insert_ideal(&space, &ctx, &ar, &mut ech)?;
        }
        let b = SpanBasis::new(key, None, space, ech);
        self.cache_store(key, None, &b);
        Ok(b)
    }

    /// Block of the free/quotient object (single cluster).
    pub fn block(&self, key: BlockKey) -> Result<Arc<SpanBasis>, SpanError> {
        let slot = self.blocks.lock().unwrap().entry(key).or_default().clone();
        let mut guard = slot.lock().unwrap();
        if let Some(b) = guard.as_ref() {
            return Ok(b.clone());
        }
        let b = Arc::new(self.build_plain(key)?);
        *guard = Some(b.clone());
        Ok(b)
    }

    fn cached_block(&self, key: BlockKey) -> Option<Arc<SpanBasis>> {
        let slot = self.blocks.lock().unwrap().get(&key)?.clone();
        let g = slot.lock().unwrap();
        g.clone()
    }

    /// Nested spaces of a block, graded by the number of clusters: graphs of
    /// the block whose vertices are grouped into tree-shaped clusters with
    /// an acyclic quotient, each cluster decorated by the quotient object.
    /// Cluster symbols are odd.
    pub fn nested(&self, key: BlockKey) -> Result<Arc<BTreeMap<usize, SpanBasis>>, SpanError> {
        let slot = self.nested.lock().unwrap().entry(key).or_default().clone();
        let mut guard = slot.lock().unwrap();
        if let Some(b) = guard.as_ref() {
            return Ok(b.clone());
        }
        let orient = Orientation { cluster_odd: true, ..self.orient.clone() };
        let shapes = nested_shapes(&self.plain_shapes(key)?);
        let ctx = nested_shapes(&self.contexts(key)?);
        let (_, ar) = self.hole_types();
        let mut out = BTreeMap::new();
        for v in 1..=key.weight {
            let items: Vec<_> = shapes.iter().filter(|s| s.2 == v).cloned().collect();
            let space = ShapeSpace::build(self.gens.clone(), orient.clone(), items);
            let mut ech = Echelon::new(space.dim());
            if let Some(rows) = self.cache_load(key, Some(v), space.dim()) {
                for r in rows {
                    ech.insert(r);
                }
            } else {
                let cv: Vec<_> = ctx.iter().filter(|s| s.2 == v).cloned().collect();
                self.insert_ideal(&space, &cv, &ar, &mut ech)?;
            }
            let b = SpanBasis::new(key, Some(v), space, ech);
            self.cache_store(key, Some(v), &b);
            out.insert(v, b);
        }
        let out = Arc::new(out);
        *guard = Some(out.clone());
        Ok(out)
    }

    /// Dimensions of a weight component summed over genus 0..=max_genus,
    /// with the per-genus blocks.
    pub fn weight_component(
        &self,
        m: usize,
        n: usize,
        weight: usize,
        max_genus: usize,
        mode: Mode,
    ) -> Result<(Vec<Arc<SpanBasis>>, usize), SpanError> {
        let mut blocks = Vec::new();
        let mut dim = 0;
        for genus in 0..=max_genus {
            let b = self.block(BlockKey { m, n, weight, genus })?;
            dim += b.dim(mode);
            blocks.push(b);
        }
        Ok((blocks, dim))
    }

    /// Class of a single generator basis element as a corolla (weight 1).
    pub fn generator_class(&self, gen: usize, basis: usize) -> Result<ClassVector, SpanError> {
        let g = &self.gens[gen];
        let key = BlockKey { m: g.inputs, n: g.outputs, weight: 1, genus: 0 };
        let b = self.block(key)?;
        let coeffs = b.class_of(&[(Rational::one(), RigidGraph::corolla(gen, basis, g.inputs, g.outputs))])?;
        Ok(ClassVector { key, coeffs })
    }

    fn block_for_compose(&self, key: BlockKey) -> Result<Arc<SpanBasis>, SpanError> {
        if self.lazy {
            self.block(key)
        } else {
            self.cached_block(key).ok_or(SpanError::BlockMissing(key))
        }
    }

    /// Plugs outputs of `b` into inputs of `a` and projects to the quotient.
    pub fn compose(&self, a: &ClassVector, b: &ClassVector, gl: &Gluing) -> Result<ClassVector, SpanError> {
        let (ka, kb) = (a.key, b.key);
        gl.check((ka.m, ka.n), (kb.m, kb.n))?;
        let k = gl.pairs.len();
        let genus = ka.genus + kb.genus + k - 1;
        let key = BlockKey { m: ka.m + kb.m - k, n: ka.n + kb.n - k, weight: ka.weight + kb.weight, genus };
        if genus > self.max_genus {
            return Err(SpanError::GenusOverflow(genus, self.max_genus));
        }
        // unit: relabel the other operand
        if ka.weight == 0 || kb.weight == 0 {
            let (other, op) = if ka.weight == 0 { (b, Operand::B) } else { (a, Operand::A) };
            let unit = if ka.weight == 0 { a } else { b };
            let scale = unit.coeffs.get(&0).cloned().unwrap_or_else(Rational::zero);
            let ob = self.block_for_compose(other.key)?;
            let target = self.block_for_compose(key)?;
            let mut v = BTreeMap::new();
            for (q, c) in &other.coeffs {
                let (g, _) = ob.representative(*q);
                // legs of the other operand; the unit's wire carries the glued label across
                let fin = relabel_through_unit(gl, op, true, other.key.m);
                let fout = relabel_through_unit(gl, op, false, other.key.n);
                let h = g.relabel_legs(&fin, &fout);
                target.space.add_rigid(&h, &vec![0; h.num_vertices()], None, &(c * &scale), &mut v)?;
            }
            return Ok(ClassVector { key, coeffs: target.project(&v) });
        }
        let ba = self.block_for_compose(ka)?;
        let bb = self.block_for_compose(kb)?;
        let target = self.block_for_compose(key)?;
        let mut v = BTreeMap::new();
        for (qa, ca) in &a.coeffs {
            let (ga, _) = ba.representative(*qa);
            for (qb, cb) in &b.coeffs {
                let (gb, _) = bb.representative(*qb);
                let g = glue(&ga, &gb, gl);
                target.space.add_rigid(&g, &vec![0; g.num_vertices()], None, &(ca * cb), &mut v)?;
            }
        }
        Ok(ClassVector { key, coeffs: target.project(&v) })
    }

    /// Quotient dimensions of the blocks of genus ≥ 1.
    pub fn genus_vanishing_report(
        &self,
        m: usize,
        n: usize,
        max_weight: usize,
        max_genus: usize,
    ) -> Result<Vec<(usize, usize, usize)>, SpanError> {
        let mut out = Vec::new();
        for w in 1..=max_weight {
            for g in 1..=max_genus {
                let b = self.block(BlockKey { m, n, weight: w, genus: g })?;
                out.push((w, g, b.quotient_dim()));
            }
        }
        Ok(out)
    }
}

// Leg relabelling of the non-unit operand when composing with the unit wire.
fn relabel_through_unit(gl: &Gluing, op: Operand, inputs: bool, count: usize) -> Vec<usize> {
    let unit = if op == Operand::A { Operand::B } else { Operand::A };
    let list = if inputs { &gl.inputs } else { &gl.outputs };
    (1..=count)
        .map(|l| {
            if let Some(i) = list.iter().position(|&x| x == (op, l)) {
                return i + 1;
            }
            // glued leg: it continues through the unit's free leg 1
            list.iter().position(|&x| x == (unit, 1)).unwrap() + 1
        })
        .collect()
}

#[cfg(test)]
mod tests;
