//! Bar and cobar complexes over nested graph spaces.
//!
//! A basis element of the bar complex in block (m, n, W, g) is a graph whose
//! vertices are grouped into V tree-shaped clusters, each cluster carrying a
//! quotient class of the presentation (see [`SpanEngine::nested`]). The
//! differential contracts an edge between two clusters into one; it is only
//! applied when that edge is the unique edge between the clusters and the
//! merge keeps the cluster graph acyclic (anything else composes at positive
//! genus, which is zero in the diamond quotient).
//!
//! Orientation: the word of a clustered graph lists each (odd) cluster
//! symbol followed by its vertices. Merging X and Y removes c_X, then c_Y,
//! with the Koszul sign of each removal, and puts the merged symbol in front.
//!
//! The cobar complex of a dual presentation is the transpose of the bar
//! complex of that dual: splitting coefficients are the transposed
//! composition matrices.

mod report;

pub use report::{koszul_report, koszul_report_with, BlockReport, KoszulVerdict, Ranges, Verdict};

use crate::exact_linalg::{homology, HomologyProfile, LinalgError, Rational, SparseMatrix};
use crate::graphs::{default_word, RigidGraph, Symbol};
use crate::presentations::Presentation;
use crate::span_engine::{BlockKey, SpanBasis, SpanEngine, SpanError};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Bar,
    Cobar,
}

/// One block of a bar or cobar complex, graded by the number of clusters V.
#[derive(Debug, Clone)]
pub struct ChainComplexBlock {
    pub presentation: String,
    pub kind: ComplexKind,
    pub key: BlockKey,
    pub bases: Arc<BTreeMap<usize, SpanBasis>>,
    /// bar: V → V−1; cobar: V → V+1
    pub differentials: BTreeMap<usize, SparseMatrix>,
}

impl ChainComplexBlock {
    /// Basis dimension for each V.
    pub fn dims(&self) -> BTreeMap<usize, usize> {
        self.bases.iter().map(|(&v, b)| (v, b.quotient_dim())).collect()
    }

    pub fn dim(&self, v: usize) -> usize {
        self.bases.get(&v).map_or(0, |b| b.quotient_dim())
    }

    pub fn syzygy(&self, v: usize) -> usize {
        self.key.weight - v
    }

    /// Checks d∘d = 0 on every pair of consecutive differentials.
    pub fn check_square_zero(&self) -> Result<(), LinalgError> {
        for (&v, d) in &self.differentials {
            let next = match self.kind {
                ComplexKind::Bar if v > 1 => self.differentials.get(&(v - 1)),
                ComplexKind::Cobar => self.differentials.get(&(v + 1)),
                _ => None,
            };
            if let Some(e) = next {
                if !e.mul(d).is_zero() {
                    return Err(LinalgError::CompositionNotZero(self.syzygy(v), self.syzygy(v) + 1));
                }
            }
        }
        Ok(())
    }

    /// Homology indexed by syzygy degree W − V.
    pub fn homology(&self) -> Result<HomologyProfile, LinalgError> {
        let w = self.key.weight;
        if w == 0 || self.bases.is_empty() {
            return Ok(HomologyProfile::default());
        }
        // chain degree k = syzygy; the map lowering k by one goes from
        // V = W − k to V = W − k + 1, i.e. the cobar direction
        let ds: Vec<SparseMatrix> = (1..w)
            .map(|k| {
                let v = w - k;
                match self.kind {
                    ComplexKind::Cobar => self.differentials[&v].clone(),
                    ComplexKind::Bar => self.differentials[&(v + 1)].transpose(),
                }
            })
            .collect();
        if ds.is_empty() {
            return Ok(HomologyProfile { dims: BTreeMap::from([(0, self.dim(w))]) });
        }
        homology(&ds)
    }
}

fn merge_sign(word: &[Symbol], x: usize, y: usize, odd: &dyn Fn(&Symbol) -> bool) -> (i64, Vec<Symbol>) {
    let mut w = word.to_vec();
    let mut sign = 1;
    for c in [x, y] {
        let i = w.iter().position(|s| *s == Symbol::Cluster(c)).expect("cluster symbol in word");
        if w[..i].iter().filter(|s| odd(s)).count() % 2 == 1 {
            sign = -sign;
        }
        w.remove(i);
    }
    w.insert(0, Symbol::Cluster(x));
    (sign, w)
}

/// Cluster pairs (X, Y) joined by exactly one edge X → Y such that no other
/// directed path leads from X to Y.
fn contractible_pairs(g: &RigidGraph, clusters: &[usize]) -> Vec<(usize, usize)> {
    let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (clusters[e.src], clusters[e.dst]);
        if a != b {
            *count.entry((a, b)).or_default() += 1;
        }
    }
    let succ = |c: usize| count.keys().filter(move |(a, _)| *a == c).map(|&(_, b)| b);
    count
        .iter()
        .filter(|(_, &k)| k == 1)
        .map(|(&p, _)| p)
        .filter(|&(x, y)| {
            // search for y from x avoiding the direct edge
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = succ(x).filter(|&z| z != y).collect();
            while let Some(z) = stack.pop() {
                if z == y {
                    return false;
                }
                if seen.insert(z) {
                    stack.extend(succ(z));
                }
            }
            true
        })
        .collect()
}

fn bar_differential(src: &SpanBasis, dst: &SpanBasis) -> Result<SparseMatrix, SpanError> {
    let orient = dst.space.orient.clone();
    let mut d = SparseMatrix::new(dst.quotient_dim(), src.quotient_dim());
    for q in 0..src.quotient_dim() {
        let (g, cl) = src.representative(q);
        let odd = |s: &Symbol| match *s {
            Symbol::Cluster(_) => orient.cluster_odd,
            Symbol::Vertex(v) => orient.gen_odd[g.gens[v]],
        };
        let word = default_word(&cl);
        let mut v = BTreeMap::new();
        for (x, y) in contractible_pairs(&g, &cl) {
            let (sign, w) = merge_sign(&word, x, y, &odd);
            let merged: Vec<usize> = cl.iter().map(|&c| if c == y { x } else { c }).collect();
            dst.space.add_rigid(&g, &merged, Some(&w), &Rational::from_integer(sign.into()), &mut v)?;
        }
        for (r, x) in dst.project(&v) {
            d.set(r, q, x);
        }
    }
    Ok(d)
}

/// Bar complex of one block over an engine (its orientation fixes the signs).
pub fn bar_block(engine: &SpanEngine, key: BlockKey) -> Result<ChainComplexBlock, ComplexError> {
    let bases = if key.m == 1 && key.n == 1 { Arc::new(BTreeMap::new()) } else { engine.nested(key)? };
    let mut differentials = BTreeMap::new();
    for v in 2..=key.weight {
        if let (Some(src), Some(dst)) = (bases.get(&v), bases.get(&(v - 1))) {
            differentials.insert(v, bar_differential(src, dst)?);
        }
    }
    let block = ChainComplexBlock {
        presentation: engine.pres.name.clone(),
        kind: ComplexKind::Bar,
        key,
        bases,
        differentials,
    };
    block.check_square_zero()?;
    Ok(block)
}

/// Cobar complex of one block of a dual presentation: transposed bar.
pub fn cobar_block(engine: &SpanEngine, key: BlockKey) -> Result<ChainComplexBlock, ComplexError> {
    let bar = bar_block(engine, key)?;
    let differentials = bar.differentials.iter().map(|(&v, d)| (v - 1, d.transpose())).collect();
    let block = ChainComplexBlock { kind: ComplexKind::Cobar, differentials, ..bar };
    block.check_square_zero()?;
    Ok(block)
}

/// Dioperadic bar complex: trees only.
pub fn bar_dioperad(p: &Presentation, m: usize, n: usize, max_weight: usize) -> Result<Vec<ChainComplexBlock>, ComplexError> {
    bar_prop_diamond(p, m, n, max_weight, 0)
}

/// Diamond bar complex of the properadic envelope, genus ≤ `max_genus`.
pub fn bar_prop_diamond(
    p: &Presentation,
    m: usize,
    n: usize,
    max_weight: usize,
    max_genus: usize,
) -> Result<Vec<ChainComplexBlock>, ComplexError> {
    let e = SpanEngine::new(p);
    let mut out = Vec::new();
    for genus in 0..=max_genus {
        for weight in 1..=max_weight {
            out.push(bar_block(&e, BlockKey { m, n, weight, genus })?);
        }
    }
    Ok(out)
}

/// Diamond cobar complex of a dual presentation, genus ≤ `max_genus`.
pub fn cobar_diamond(
    dual: &Presentation,
    m: usize,
    n: usize,
    max_genus: usize,
    max_weight: usize,
) -> Result<Vec<ChainComplexBlock>, ComplexError> {
    let e = SpanEngine::new(dual);
    let mut out = Vec::new();
    for genus in 0..=max_genus {
        for weight in 1..=max_weight {
            out.push(cobar_block(&e, BlockKey { m, n, weight, genus })?);
        }
    }
    Ok(out)
}
