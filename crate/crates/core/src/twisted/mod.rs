//! Two-coloured twisted associative algebras obtained by freezing legs of a
//! dioperad: `A(m, n) = Q(m+1, n+1)` with the last input and last output
//! frozen, and the right module `M(m, n) = Q(m+2, n+1)` with the last two
//! inputs frozen. The product plugs the frozen output of the left factor
//! into the frozen input of the right one.
//!
//! Elements are handled in the induced basis: a [`Piece`] carries the sets
//! of external labels it occupies (mapped in increasing order onto the
//! unfrozen legs) and a quotient basis index of the underlying block.

mod bar;

pub use bar::{
    bar_tw, bar_tw_partitions, inversion_degree, partition_pairs, planar_subcomplex, PartitionPair, PlanarComplex, TwBlockKey,
    TwComplex, TwVerdict,
};

use crate::exact_linalg::{LinalgError, Rational};
use crate::presentations::Presentation;
use crate::span_engine::{BlockKey, ClassVector, Gluing, Operand, SpanEngine, SpanError};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistedError {
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("frozen input count must be 1 or 2, got {0}")]
    Marks(usize),
    #[error("coefficient flag does not match the module argument")]
    Coefficients,
    #[error("invalid partition pair: {0}")]
    Partition(String),
    #[error("fast path needs one-dimensional diagonal components: {0}")]
    NotDiagonal(String),
}

/// A basis element of the induced representation: the underlying element
/// sits on the legs `ins`, `outs` (sorted external labels).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Piece {
    pub ins: Vec<usize>,
    pub outs: Vec<usize>,
    pub weight: usize,
    pub basis: usize,
}

impl Piece {
    pub fn arity(&self) -> (usize, usize) {
        (self.ins.len(), self.outs.len())
    }
}

type ProductKey = (usize, (usize, usize, usize, usize), (usize, usize, usize, usize), Vec<bool>, Vec<bool>);

struct Core {
    source: Presentation,
    engine: SpanEngine,
    products: Mutex<HashMap<ProductKey, Arc<Vec<(usize, Rational)>>>>,
    parities: Mutex<HashMap<(BlockKey, usize), bool>>,
}

impl Core {
    fn block_key(marks: usize, m: usize, n: usize, weight: usize) -> BlockKey {
        BlockKey { m: m + marks, n: n + 1, weight, genus: 0 }
    }

    fn dim(&self, marks: usize, m: usize, n: usize, weight: usize) -> Result<usize, SpanError> {
        if weight == 0 {
            return Ok(usize::from(marks == 1 && m == 0 && n == 0));
        }
        Ok(self.engine.block(Self::block_key(marks, m, n, weight))?.quotient_dim())
    }

    /// Parity of the total generator degree of a basis element.
    fn odd(&self, marks: usize, p: &Piece) -> Result<bool, SpanError> {
        let key = Self::block_key(marks, p.ins.len(), p.outs.len(), p.weight);
        if let Some(&b) = self.parities.lock().unwrap().get(&(key, p.basis)) {
            return Ok(b);
        }
        let (g, _) = self.engine.block(key)?.representative(p.basis);
        let deg: i32 = g.gens.iter().map(|&x| self.source.generators[x].degree).sum();
        let odd = deg.rem_euclid(2) == 1;
        self.parities.lock().unwrap().insert((key, p.basis), odd);
        Ok(odd)
    }

    /// `x · y` with `x` carrying `marks` frozen inputs and `y` an algebra
    /// element; coefficients over the basis of the merged piece.
    fn product(&self, marks: usize, x: &Piece, y: &Piece) -> Result<Vec<(Piece, Rational)>, SpanError> {
        let mut ins: Vec<(usize, bool)> = x.ins.iter().map(|&l| (l, false)).chain(y.ins.iter().map(|&l| (l, true))).collect();
        let mut outs: Vec<(usize, bool)> =
            x.outs.iter().map(|&l| (l, false)).chain(y.outs.iter().map(|&l| (l, true))).collect();
        ins.sort_unstable();
        outs.sort_unstable();
        let pin: Vec<bool> = ins.iter().map(|p| p.1).collect();
        let pout: Vec<bool> = outs.iter().map(|p| p.1).collect();
        let (mx, nx) = x.arity();
        let (my, ny) = y.arity();
        let key: ProductKey = (marks, (mx, nx, x.weight, x.basis), (my, ny, y.weight, y.basis), pin.clone(), pout.clone());
        let cached = self.products.lock().unwrap().get(&key).cloned();
        let coeffs = match cached {
            Some(c) => c,
            None => {
                let c = Arc::new(self.compute_product(marks, x, y, &pin, &pout)?);
                self.products.lock().unwrap().insert(key, c.clone());
                c
            }
        };
        let labels_in: Vec<usize> = ins.iter().map(|p| p.0).collect();
        let labels_out: Vec<usize> = outs.iter().map(|p| p.0).collect();
        Ok(coeffs
            .iter()
            .map(|(q, c)| {
                (Piece { ins: labels_in.clone(), outs: labels_out.clone(), weight: x.weight + y.weight, basis: *q }, c.clone())
            })
            .collect())
    }

    fn compute_product(
        &self,
        marks: usize,
        x: &Piece,
        y: &Piece,
        pin: &[bool],
        pout: &[bool],
    ) -> Result<Vec<(usize, Rational)>, SpanError> {
        let (mx, nx) = x.arity();
        let (my, ny) = y.arity();
        let class = |marks: usize, p: &Piece| ClassVector {
            key: Core::block_key(marks, p.ins.len(), p.outs.len(), p.weight),
            coeffs: BTreeMap::from([(p.basis, Rational::one())]),
        };
        let legs = |pattern: &[bool]| -> Vec<(Operand, usize)> {
            let (mut i, mut j) = (0, 0);
            pattern
                .iter()
                .map(|&from_y| {
                    if from_y {
                        j += 1;
                        (Operand::A, j)
                    } else {
                        i += 1;
                        (Operand::B, i)
                    }
                })
                .collect()
        };
        let mut inputs = legs(pin);
        inputs.extend((1..=marks).map(|k| (Operand::B, mx + k)));
        let mut outputs = legs(pout);
        outputs.push((Operand::A, ny + 1));
        let gl = Gluing { pairs: vec![(nx + 1, my + 1)], inputs, outputs };
        let c = self.engine.compose(&class(1, y), &class(marks, x), &gl)?;
        Ok(c.coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }
}

/// `∂in∂out` of the quotient of a presentation.
#[derive(Clone)]
pub struct TwistedAlgebra {
    core: Arc<Core>,
}

/// `∂in²∂out` of the quotient, a right module over [`TwistedAlgebra`].
#[derive(Clone)]
pub struct TwistedRightModule {
    core: Arc<Core>,
}

pub enum Derived {
    Algebra(TwistedAlgebra),
    Module(TwistedRightModule),
}

/// The algebra (`in_marks` = 1) or module (`in_marks` = 2) derived from `p`.
pub fn derive(p: &Presentation, in_marks: usize) -> Result<Derived, TwistedError> {
    let a = TwistedAlgebra::new(p);
    match in_marks {
        1 => Ok(Derived::Algebra(a)),
        2 => Ok(Derived::Module(a.module())),
        k => Err(TwistedError::Marks(k)),
    }
}

impl TwistedAlgebra {
    pub fn new(p: &Presentation) -> Self {
        let core = Core {
            source: p.clone(),
            engine: SpanEngine::new(p),
            products: Mutex::new(HashMap::new()),
            parities: Mutex::new(HashMap::new()),
        };
        TwistedAlgebra { core: Arc::new(core) }
    }

    pub fn source(&self) -> &Presentation {
        &self.core.source
    }

    /// The module sharing this algebra's block cache.
    pub fn module(&self) -> TwistedRightModule {
        TwistedRightModule { core: self.core.clone() }
    }

    /// Dimension of `A(m, n)` in one weight (weight 0 is the unit).
    pub fn dim(&self, m: usize, n: usize, weight: usize) -> Result<usize, TwistedError> {
        Ok(self.core.dim(1, m, n, weight)?)
    }

    /// Dimension of `A(m, n)` summed over all weights.
    pub fn total_dim(&self, m: usize, n: usize) -> Result<usize, TwistedError> {
        (0..=max_weight(m + 1, n + 1)).map(|w| self.dim(m, n, w)).sum()
    }

    pub fn is_odd(&self, p: &Piece) -> Result<bool, TwistedError> {
        Ok(self.core.odd(1, p)?)
    }

    /// Product of two pieces on disjoint labels.
    pub fn product(&self, x: &Piece, y: &Piece) -> Result<Vec<(Piece, Rational)>, TwistedError> {
        Ok(self.core.product(1, x, y)?)
    }

    /// Linear extension of [`Self::product`].
    pub fn product_linear(
        &self,
        x: &[(Piece, Rational)],
        y: &[(Piece, Rational)],
    ) -> Result<Vec<(Piece, Rational)>, TwistedError> {
        bilinear(x, y, |a, b| self.product(a, b))
    }

    /// Weight-two part of `A(m, n)` against its quadratic presentation:
    /// (free dimension, dimension of the relation span, algebra dimension).
    pub fn weight_two_check(&self, m: usize, n: usize) -> Result<(usize, usize, usize), TwistedError> {
        let b = bar_tw(self, TwBlockKey { m, n, weight: 2, coefficients: false }, None)?;
        let free = b.dim(2);
        let rank = b.differentials.get(&2).map_or(0, crate::exact_linalg::rank);
        Ok((free, free - rank, self.dim(m, n, 2)?))
    }
}

impl TwistedRightModule {
    pub fn algebra(&self) -> TwistedAlgebra {
        TwistedAlgebra { core: self.core.clone() }
    }

    pub fn dim(&self, m: usize, n: usize, weight: usize) -> Result<usize, TwistedError> {
        Ok(self.core.dim(2, m, n, weight)?)
    }

    pub fn total_dim(&self, m: usize, n: usize) -> Result<usize, TwistedError> {
        (1..=max_weight(m + 2, n + 1)).map(|w| self.dim(m, n, w)).sum()
    }

    pub fn is_odd(&self, p: &Piece) -> Result<bool, TwistedError> {
        Ok(self.core.odd(2, p)?)
    }

    /// Right action of an algebra piece.
    pub fn act(&self, x: &Piece, a: &Piece) -> Result<Vec<(Piece, Rational)>, TwistedError> {
        Ok(self.core.product(2, x, a)?)
    }

    pub fn act_linear(&self, x: &[(Piece, Rational)], a: &[(Piece, Rational)]) -> Result<Vec<(Piece, Rational)>, TwistedError> {
        bilinear(x, a, |p, q| self.act(p, q))
    }
}

// every vertex of a tree with ≥ 3 legs lowers (inputs + outputs − 2) by at least one
fn max_weight(m: usize, n: usize) -> usize {
    (m + n).saturating_sub(2).max(1)
}

fn bilinear(
    x: &[(Piece, Rational)],
    y: &[(Piece, Rational)],
    f: impl Fn(&Piece, &Piece) -> Result<Vec<(Piece, Rational)>, TwistedError>,
) -> Result<Vec<(Piece, Rational)>, TwistedError> {
    let mut acc: BTreeMap<Piece, Rational> = BTreeMap::new();
    for (p, a) in x {
        for (q, b) in y {
            for (r, c) in f(p, q)? {
                *acc.entry(r).or_insert_with(Rational::zero) += a * b * c;
            }
        }
    }
    Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

#[cfg(test)]
mod tests;
