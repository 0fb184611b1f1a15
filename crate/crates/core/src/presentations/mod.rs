//! Quadratic presentations: generator spaces with symmetric-group actions,
//! weight-2 relations, the JSON file format, the built-in catalog and the
//! quadratic dual.

mod builtin;
pub(crate) mod dual;
mod json;

pub use builtin::{builtin, BUILTIN_NAMES};
pub use dual::quadratic_dual;
pub use json::{parse, to_json};

use crate::exact_linalg::{int, Rational};
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Small dense matrix, row-major.
pub type Mat = Vec<Vec<Rational>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("not a group action: {0}")]
    NonGroupAction(String),
    #[error("unknown builtin {0:?}")]
    UnknownBuiltin(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Dioperad,
    PropEnvelope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpace {
    pub id: String,
    pub inputs: usize,
    pub outputs: usize,
    pub dim: usize,
    /// `in_transpositions[i]` acts for the swap of input slots i, i+1.
    pub in_transpositions: Vec<Mat>,
    pub out_transpositions: Vec<Mat>,
    pub degree: i32,
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn scalar(v: i64) -> Mat {
    vec![vec![int(v)]]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Rational::zero(), |acc, t| acc + &a[i][t] * &b[t][j]))
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Rational]) -> Vec<Rational> {
    a.iter().map(|r| r.iter().zip(v).fold(Rational::zero(), |acc, (x, y)| acc + x * y)).collect()
}

/// Adjacent swaps turning the identity arrangement into `perm`:
/// starting from `[0,1,..]` and swapping positions (i, i+1) in order yields
/// an arrangement whose entry j is `perm[j]`.
pub fn swap_sequence(perm: &[usize]) -> Vec<usize> {
    let mut arr: Vec<usize> = (0..perm.len()).collect();
    let mut out = Vec::new();
    for j in 0..perm.len() {
        let mut q = arr.iter().position(|&x| x == perm[j]).expect("not a permutation");
        while q > j {
            arr.swap(q - 1, q);
            out.push(q - 1);
            q -= 1;
        }
    }
    out
}

pub fn perm_sign(perm: &[usize]) -> i64 {
    if swap_sequence(perm).len() % 2 == 0 {
        1
    } else {
        -1
    }
}

impl GeneratorSpace {
    /// One-dimensional generator on which every input transposition acts by
    /// `in_sign` and every output transposition by `out_sign`.
    pub fn character(id: &str, inputs: usize, outputs: usize, in_sign: i64, out_sign: i64) -> Self {
        GeneratorSpace {
            id: id.to_string(),
            inputs,
            outputs,
            dim: 1,
            in_transpositions: vec![scalar(in_sign); inputs.saturating_sub(1)],
            out_transpositions: vec![scalar(out_sign); outputs.saturating_sub(1)],
            degree: 0,
        }
    }

    /// Action of a slot reordering. A vertex decorated by `x` whose new slot j
    /// is the old slot `in_perm[j]` (resp. `out_perm[j]`) is decorated by `M x`.
    pub fn action(&self, in_perm: &[usize], out_perm: &[usize]) -> Mat {
        let mut m = identity(self.dim);
        for i in swap_sequence(in_perm) {
            m = mat_mul(&self.in_transpositions[i], &m);
        }
        for i in swap_sequence(out_perm) {
            m = mat_mul(&self.out_transpositions[i], &m);
        }
        m
    }

    /// Same as `action` when the generator is one-dimensional.
    pub fn action_scalar(&self, in_perm: &[usize], out_perm: &[usize]) -> Rational {
        debug_assert_eq!(self.dim, 1);
        let mut s = Rational::one();
        for i in swap_sequence(in_perm) {
            s *= &self.in_transpositions[i][0][0];
        }
        for i in swap_sequence(out_perm) {
            s *= &self.out_transpositions[i][0][0];
        }
        s
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }

    fn check(&self) -> Result<(), PresentationError> {
        let bad = |msg: String| PresentationError::NonGroupAction(format!("generator {}: {msg}", self.id));
        if self.inputs == 0 || self.outputs == 0 || self.dim == 0 {
            return Err(PresentationError::ArityMismatch(format!(
                "generator {} must have at least one input, one output and positive dimension",
                self.id
            )));
        }
        if self.in_transpositions.len() != self.inputs - 1 || self.out_transpositions.len() != self.outputs - 1 {
            return Err(PresentationError::ArityMismatch(format!(
                "generator {}: expected {} input and {} output transposition matrices",
                self.id,
                self.inputs - 1,
                self.outputs - 1
            )));
        }
        for t in self.in_transpositions.iter().chain(&self.out_transpositions) {
            if t.len() != self.dim || t.iter().any(|r| r.len() != self.dim) {
                return Err(PresentationError::ArityMismatch(format!(
                    "generator {}: transposition matrix is not {}×{}",
                    self.id, self.dim, self.dim
                )));
            }
        }
        let id = identity(self.dim);
        let pw = |m: &Mat, k: usize| (0..k).fold(identity(self.dim), |acc, _| mat_mul(&acc, m));
        for (side, ts) in [("input", &self.in_transpositions), ("output", &self.out_transpositions)] {
            for i in 0..ts.len() {
                if mat_mul(&ts[i], &ts[i]) != id {
                    return Err(bad(format!("{side} transposition {} does not square to 1", i + 1)));
                }
                for j in i + 1..ts.len() {
                    let order = if j == i + 1 { 3 } else { 2 };
                    if pw(&mat_mul(&ts[i], &ts[j]), order) != id {
                        return Err(bad(format!("{side} transpositions {} and {} violate the braid relation", i + 1, j + 1)));
                    }
                }
            }
        }
        for a in &self.in_transpositions {
            for b in &self.out_transpositions {
                if mat_mul(a, b) != mat_mul(b, a) {
                    return Err(bad("input and output actions do not commute".into()));
                }
            }
        }
        Ok(())
    }
}

/// One corolla inside a two-vertex term. External labels are 1-based; the
/// label 0 marks the slot carrying the internal edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSpec {
    pub gen: usize,
    pub basis: usize,
    pub ins: Vec<usize>,
    pub outs: Vec<usize>,
}

/// `coeff · (upper ∘ lower)`: the lower vertex's internal output feeds the
/// upper vertex's internal input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoVertexTerm {
    pub coeff: Rational,
    pub lower: VertexSpec,
    pub upper: VertexSpec,
}

impl TwoVertexTerm {
    pub fn arity(&self) -> (usize, usize) {
        (self.lower.ins.len() + self.upper.ins.len() - 1, self.lower.outs.len() + self.upper.outs.len() - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub terms: Vec<TwoVertexTerm>,
}

impl Relation {
    pub fn arity(&self) -> Option<(usize, usize)> {
        self.terms.first().map(|t| t.arity())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub kind: Kind,
    pub generators: Vec<GeneratorSpace>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    pub fn gen_index(&self, id: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.id == id)
    }

    /// Checks arities, label coverage and the Coxeter relations.
    pub fn validate(&self) -> Result<(), PresentationError> {
        for g in &self.generators {
            g.check()?;
        }
        let am = |s: String| PresentationError::ArityMismatch(s);
        for r in &self.relations {
            let Some((m, n)) = r.arity() else { continue };
            for t in &r.terms {
                for (v, side) in [(&t.lower, "lower"), (&t.upper, "upper")] {
                    let g = self
                        .generators
                        .get(v.gen)
                        .ok_or_else(|| am(format!("relation {}: unknown generator index {}", r.name, v.gen)))?;
                    if v.ins.len() != g.inputs || v.outs.len() != g.outputs {
                        return Err(am(format!(
                            "relation {}: {side} vertex uses {} with arity ({},{}) but generator has ({},{})",
                            r.name,
                            g.id,
                            v.ins.len(),
                            v.outs.len(),
                            g.inputs,
                            g.outputs
                        )));
                    }
                    if v.basis >= g.dim {
                        return Err(am(format!("relation {}: basis index {} out of range for {}", r.name, v.basis, g.id)));
                    }
                }
                if t.arity() != (m, n) {
                    return Err(am(format!("relation {}: terms of different arities", r.name)));
                }
                if t.lower.ins.contains(&0) || t.upper.outs.contains(&0) {
                    return Err(am(format!("relation {}: internal marker on an external side", r.name)));
                }
                if t.lower.outs.iter().filter(|&&x| x == 0).count() != 1
                    || t.upper.ins.iter().filter(|&&x| x == 0).count() != 1
                {
                    return Err(am(format!("relation {}: each vertex needs exactly one internal slot", r.name)));
                }
                let mut ins: Vec<usize> =
                    t.lower.ins.iter().chain(&t.upper.ins).copied().filter(|&x| x != 0).collect();
                let mut outs: Vec<usize> =
                    t.lower.outs.iter().chain(&t.upper.outs).copied().filter(|&x| x != 0).collect();
                ins.sort_unstable();
                outs.sort_unstable();
                if ins != (1..=m).collect::<Vec<_>>() || outs != (1..=n).collect::<Vec<_>>() {
                    return Err(am(format!("relation {}: external labels do not cover 1..{m} and 1..{n}", r.name)));
                }
            }
        }
        Ok(())
    }

    /// Content hash of the canonical JSON form.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(to_json(self).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Weight-2 arities (m, n) reachable by two generators joined by one edge.
    pub fn quadratic_arities(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for a in &self.generators {
            for b in &self.generators {
                let ar = (a.inputs + b.inputs - 1, a.outputs + b.outputs - 1);
                if !v.contains(&ar) {
                    v.push(ar);
                }
            }
        }
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_sequences_realize_permutations() {
        for perm in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 0], vec![3, 1, 0, 2]] {
            let mut arr: Vec<usize> = (0..perm.len()).collect();
            for i in swap_sequence(&perm) {
                arr.swap(i, i + 1);
            }
            assert_eq!(arr, perm);
        }
        assert_eq!(perm_sign(&[1, 0, 2]), -1);
        assert_eq!(perm_sign(&[1, 2, 0]), 1);
    }

    #[test]
    fn coxeter_check_rejects_bad_actions() {
        let mut g = GeneratorSpace::character("x", 3, 1, 1, 1);
        g.in_transpositions[1] = scalar(2);
        assert!(matches!(g.check(), Err(PresentationError::NonGroupAction(_))));
        // two non-commuting involutions that do not braid
        let mut h = GeneratorSpace::character("y", 3, 1, 1, 1);
        h.dim = 2;
        h.in_transpositions = vec![
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            vec![vec![int(1), int(0)], vec![int(0), int(-1)]],
        ];
        assert!(matches!(h.check(), Err(PresentationError::NonGroupAction(_))));
    }

    #[test]
    fn standard_representation_passes() {
        // S_3 acting on its 2-dimensional irreducible
        let s1 = vec![vec![int(-1), int(1)], vec![int(0), int(1)]];
        let s2 = vec![vec![int(1), int(0)], vec![int(1), int(-1)]];
        let g = GeneratorSpace {
            id: "std".into(),
            inputs: 3,
            outputs: 1,
            dim: 2,
            in_transpositions: vec![s1, s2],
            out_transpositions: vec![],
            degree: 0,
        };
        g.check().unwrap();
    }
}
