//! Coordinates on spaces of decorated (clustered) graphs modulo slot
//! symmetries and renumbering: one block of coordinates per isomorphism
//! class, namely the coinvariants of its automorphism group acting on the
//! tensor product of vertex decorations.

use super::SpanError;
use crate::exact_linalg::{Echelon, Rational};
use crate::graphs::{canonicalize, Relabel, RigidGraph, Symbol};
use crate::presentations::GeneratorSpace;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Parity data for orientation signs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub gen_odd: Vec<bool>,
    pub cluster_odd: bool,
}

impl Orientation {
    pub fn plain(gens: &[GeneratorSpace]) -> Self {
        Orientation { gen_odd: gens.iter().map(|g| g.is_odd()).collect(), cluster_odd: false }
    }
}

#[derive(Clone, Debug)]
enum Coinv {
    Identity,
    Dead,
    General { ech: Echelon, coords: Vec<usize>, coord_of: HashMap<usize, usize> },
}

#[derive(Clone, Debug)]
pub struct Shape {
    pub graph: RigidGraph,
    pub clusters: Vec<usize>,
    pub nclusters: usize,
    dims: Vec<usize>,
    coinv: Coinv,
    pub offset: usize,
    pub ncoords: usize,
}

#[derive(Clone, Debug)]
pub struct ShapeSpace {
    pub gens: Arc<Vec<GeneratorSpace>>,
    pub orient: Orientation,
    pub shapes: Vec<Shape>,
    index: HashMap<Vec<u32>, usize>,
    /// coordinate -> (shape, tensor index)
    coord_owner: Vec<(usize, usize)>,
}

type SparseVec = Vec<(usize, Rational)>;

fn tensor_index(dims: &[usize], tuple: &[usize]) -> usize {
    tuple.iter().zip(dims).fold(0, |acc, (&t, &d)| acc * d + t)
}

fn tensor_tuple(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut t = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        t[i] = idx % dims[i];
        idx /= dims[i];
    }
    t
}

impl ShapeSpace {
    fn odd_fn(&self) -> impl Fn(usize) -> bool + '_ {
        move |g: usize| self.orient.gen_odd.get(g).copied().unwrap_or(false)
    }

    /// Decoration transport along a relabelling: the image of the decoration
    /// tuple carried by `g` (its `basis` field) as a sparse vector over the
    /// tensor basis of the target vertex order.
    fn transport(&self, g: &RigidGraph, r: &Relabel) -> SparseVec {
        let all_scalar = r.order.iter().all(|&u| self.gens[g.gens[u]].dim == 1);
        if all_scalar {
            let mut s = Rational::from_integer(r.sign.into());
            for (i, &u) in r.order.iter().enumerate() {
                s *= self.gens[g.gens[u]].action_scalar(&r.in_perm[i], &r.out_perm[i]);
            }
            return vec![(0, s)];
        }
        let dims: Vec<usize> = r.order.iter().map(|&u| self.gens[g.gens[u]].dim).collect();
        let mut acc: SparseVec = vec![(0, Rational::from_integer(r.sign.into()))];
        for (i, &u) in r.order.iter().enumerate() {
            let m = self.gens[g.gens[u]].action(&r.in_perm[i], &r.out_perm[i]);
            let col: Vec<(usize, Rational)> =
                (0..dims[i]).filter(|&c| !m[c][g.basis[u]].is_zero()).map(|c| (c, m[c][g.basis[u]].clone())).collect();
            let mut next = Vec::with_capacity(acc.len() * col.len());
            for (a, x) in &acc {
                for (c, y) in &col {
                    next.push((a * dims[i] + c, x * y));
                }
            }
            acc = next;
        }
        acc
    }

    /// Builds coordinates for canonical (graph, clusters, #clusters) items.
    pub fn build(gens: Arc<Vec<GeneratorSpace>>, orient: Orientation, items: Vec<(RigidGraph, Vec<usize>, usize)>) -> Self {
        let mut sp = ShapeSpace { gens, orient, shapes: Vec::new(), index: HashMap::new(), coord_owner: Vec::new() };
        for (graph, clusters, nclusters) in items {
            let gen_odd = sp.orient.gen_odd.clone();
            let odd = move |g: usize| gen_odd.get(g).copied().unwrap_or(false);
            let c = canonicalize(&graph, &clusters, &odd, sp.orient.cluster_odd, None);
            let graph = c.graph.clone();
            let clusters = c.clusters.clone();
            let dims: Vec<usize> = graph.gens.iter().map(|&g| sp.gens[g].dim).collect();
            let tdim: usize = dims.iter().product();
            // automorphism relations
            let mut rows: Vec<SparseVec> = Vec::new();
            for y in 0..tdim {
                let mut gy = graph.clone();
                gy.basis = tensor_tuple(&dims, y);
                let cy = canonicalize(&gy, &clusters, &odd, sp.orient.cluster_odd, None);
                for r in &cy.relabels {
                    let mut row = sp.transport(&gy, r);
                    row.push((y, -Rational::one()));
                    rows.push(row);
                }
                for &(u, k, v, j) in &c.bundles {
                    let gu = &sp.gens[graph.gens[u]];
                    let gv = &sp.gens[graph.gens[v]];
                    let mut pu: Vec<usize> = (0..gu.outputs).collect();
                    pu.swap(k, k + 1);
                    let mut pv: Vec<usize> = (0..gv.inputs).collect();
                    pv.swap(j, j + 1);
                    let id_in_u: Vec<usize> = (0..gu.inputs).collect();
                    let id_out_v: Vec<usize> = (0..gv.outputs).collect();
                    let mu = gu.action(&id_in_u, &pu);
                    let mv = gv.action(&pv, &id_out_v);
                    let mut row: SparseVec = Vec::new();
                    let mut t = gy.basis.clone();
                    for a in 0..dims[u] {
                        for b in 0..dims[v] {
                            let coef = &mu[a][gy.basis[u]] * &mv[b][gy.basis[v]];
                            if coef.is_zero() {
                                continue;
                            }
                            t[u] = a;
                            t[v] = b;
                            row.push((tensor_index(&dims, &t), coef));
                        }
                    }
                    row.push((y, -Rational::one()));
                    rows.push(row);
                }
            }
            let coinv = if tdim == 1 {
                let dead = rows.iter().any(|r| r.iter().fold(Rational::zero(), |a, (_, x)| a + x) != Rational::zero());
                if dead {
                    Coinv::Dead
                } else {
                    Coinv::Identity
                }
            } else {
                let mut ech = Echelon::new(tdim);
                for r in rows {
                    let mut m: BTreeMap<usize, Rational> = BTreeMap::new();
                    for (j, x) in r {
                        *m.entry(j).or_insert_with(Rational::zero) += x;
                    }
                    ech.insert(m);
                }
                ech.reduce();
                let coords = ech.free_cols();
                let coord_of = coords.iter().enumerate().map(|(i, &t)| (t, i)).collect();
                Coinv::General { ech, coords, coord_of }
            };
            let ncoords = match &coinv {
                Coinv::Identity => 1,
                Coinv::Dead => 0,
                Coinv::General { coords, .. } => coords.len(),
            };
            let offset = sp.coord_owner.len();
            let si = sp.shapes.len();
            match &coinv {
                Coinv::Identity => sp.coord_owner.push((si, 0)),
                Coinv::Dead => {}
                Coinv::General { coords, .. } => sp.coord_owner.extend(coords.iter().map(|&t| (si, t))),
            }
            if sp.index.insert(c.key.clone(), si).is_some() {
                panic!("duplicate shape in space");
            }
            sp.shapes.push(Shape { graph, clusters, nclusters, dims, coinv, offset, ncoords });
        }
        sp
    }

    pub fn dim(&self) -> usize {
        self.coord_owner.len()
    }

    pub fn num_shapes(&self) -> usize {
        self.shapes.len()
    }

    /// Adds `coeff` times the class of a rigid decorated graph.
    pub fn add_rigid(
        &self,
        g: &RigidGraph,
        clusters: &[usize],
        word: Option<&[Symbol]>,
        coeff: &Rational,
        out: &mut BTreeMap<usize, Rational>,
    ) -> Result<(), SpanError> {
        let odd = self.odd_fn();
        let c = canonicalize(g, clusters, &odd, self.orient.cluster_odd, word);
        let si = *self.index.get(&c.key).ok_or(SpanError::ShapeMissing)?;
        let shape = &self.shapes[si];
        if matches!(shape.coinv, Coinv::Dead) {
            return Ok(());
        }
        let vec = self.transport(g, &c.relabels[0]);
        let mut add = |j: usize, x: Rational| {
            let e = out.entry(j).or_insert_with(Rational::zero);
            *e += x;
            if e.is_zero() {
                out.remove(&j);
            }
        };
        match &shape.coinv {
            Coinv::Identity => {
                for (_, x) in vec {
                    add(shape.offset, x * coeff);
                }
            }
            Coinv::Dead => {}
            Coinv::General { ech, coord_of, .. } => {
                let mut v: BTreeMap<usize, Rational> = BTreeMap::new();
                for (t, x) in vec {
                    *v.entry(t).or_insert_with(Rational::zero) += x * coeff;
                }
                for (t, x) in ech.project(&v) {
                    add(shape.offset + coord_of[&t], x);
                }
            }
        }
        Ok(())
    }

    /// A rigid representative of a coordinate: canonical graph decorated by
    /// the tensor basis element spanning that coordinate.
    pub fn representative(&self, coord: usize) -> (&Shape, RigidGraph) {
        let (si, t) = self.coord_owner[coord];
        let s = &self.shapes[si];
        let mut g = s.graph.clone();
        g.basis = tensor_tuple(&s.dims, t);
        (s, g)
    }

    pub fn shape_of(&self, coord: usize) -> usize {
        self.coord_owner[coord].0
    }
}
