use super::{GeneratorSpace, Mat, Presentation, Relation, TwoVertexTerm, VertexSpec};
use crate::exact_linalg::{Echelon, Rational};
use crate::graphs::{Port, RigidGraph};
use crate::span_engine::SpanEngine;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

fn transpose(m: &Mat) -> Mat {
    (0..m.len()).map(|i| m.iter().map(|r| r[i].clone()).collect()).collect()
}

fn scaled(m: &Mat, s: i64) -> Mat {
    m.iter().map(|r| r.iter().map(|x| x * Rational::from_integer(s.into())).collect()).collect()
}

/// Dual generator: transposition matrices are involutions, so the
/// contragredient action is the transpose; `twist` also tensors with the
/// sign representation on both sides.
fn dual_generator(g: &GeneratorSpace, twist: bool) -> GeneratorSpace {
    let s = if twist { -1 } else { 1 };
    GeneratorSpace {
        degree: if twist { 1 + g.outputs as i32 - g.inputs as i32 - g.degree } else { g.degree },
        in_transpositions: g.in_transpositions.iter().map(|t| scaled(&transpose(t), s)).collect(),
        out_transpositions: g.out_transpositions.iter().map(|t| scaled(&transpose(t), s)).collect(),
        ..g.clone()
    }
}

fn vertex_spec(g: &RigidGraph, v: usize) -> VertexSpec {
    let label = |p: &Port| match *p {
        Port::Leg(l) => l,
        Port::Slot(..) => 0,
    };
    VertexSpec { gen: g.gens[v], basis: g.basis[v], ins: g.ins[v].iter().map(label).collect(), outs: g.outs[v].iter().map(label).collect() }
}

/// Integer multiple of `v` with coprime entries and positive leading entry.
fn primitive(v: &[Rational]) -> Vec<Rational> {
    let den = v.iter().fold(num_bigint::BigInt::one(), |a, x| a.lcm(x.denom()));
    let ints: Vec<num_bigint::BigInt> = v.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |a, x| a.gcd(x));
    let lead_neg = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let y = Rational::from_integer(x / &g);
            if lead_neg {
                -y
            } else {
                y
            }
        })
        .collect()
}

fn dual_name(name: &str) -> String {
    match name.strip_suffix("_dual") {
        Some(base) => base.to_string(),
        None => format!("{name}_dual"),
    }
}

/// Quadratic dual: dual generators, and as relations a basis of the
/// annihilator of the relation span in every weight-2 arity block, for the
/// pairing in which identical rigid two-vertex graphs pair to 1.
pub fn quadratic_dual(p: &Presentation) -> Presentation {
    dual_with(p, true)
}

/// Orientation sign of a rigid two-vertex tree: reading the input slots of
/// the lower vertex then the upper one (internal edge as label 0) gives a
/// permutation; likewise for outputs. The product of both signs changes by
/// the slot-permutation sign under rearrangements and by a global character
/// under relabelling of legs, which makes the twisted pairing invariant.
fn orientation_sign(g: &RigidGraph) -> i64 {
    let lower = if g.outs[0].iter().any(|p| matches!(p, Port::Slot(1, _))) { 0 } else { 1 };
    let mut sign = 1;
    for sides in [&g.ins, &g.outs] {
        let keys: Vec<usize> = sides[lower]
            .iter()
            .chain(&sides[1 - lower])
            .map(|p| match *p {
                Port::Leg(l) => l,
                Port::Slot(..) => 0,
            })
            .collect();
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                if keys[i] > keys[j] {
                    sign = -sign;
                }
            }
        }
    }
    sign
}

/// Koszul sign of moving the upper vertex's suspension (degree
/// outputs − inputs) past the lower vertex's external outputs.
fn suspension_sign(gens: &[GeneratorSpace], g: &RigidGraph) -> i64 {
    let lower = if g.outs[0].iter().any(|p| matches!(p, Port::Slot(1, _))) { 0 } else { 1 };
    let (l, u) = (&gens[g.gens[lower]], &gens[g.gens[1 - lower]]);
    let du = u.outputs as i64 - u.inputs as i64;
    if (du * (l.outputs as i64 - 1)).rem_euclid(2) == 1 {
        -1
    } else {
        1
    }
}

pub(crate) fn dual_with(p: &Presentation, twist: bool) -> Presentation {
    let gens: Vec<GeneratorSpace> = p.generators.iter().map(|g| dual_generator(g, twist)).collect();
    let mut q = Presentation { name: dual_name(&p.name), kind: p.kind, generators: gens, relations: Vec::new() };
    let arities: BTreeSet<(usize, usize)> = p
        .generators
        .iter()
        .flat_map(|a| p.generators.iter().map(move |b| (a.inputs + b.inputs - 1, a.outputs + b.outputs - 1)))
        .collect();
    let primal = SpanEngine::new(p);
    let dual = SpanEngine::new(&q);
    let odd: Vec<bool> = q.generators.iter().map(|g| g.is_odd()).collect();
    let odd_p: Vec<bool> = p.generators.iter().map(|g| g.is_odd()).collect();
    let mut relations = Vec::new();
    for arity in arities {
        let rows = primal.relation_rows(arity).expect("weight-2 blocks are small");
        let space = dual.two_vertex_space(arity).expect("weight-2 blocks are small");
        let mut ech = Echelon::new(space.dim());
        let eps: Vec<i64> = (0..space.dim())
            .map(|c| {
                let g = space.representative(c).1;
                // coordinates refer to the canonical vertex order; bring both
                // sides to (lower, upper) order before pairing
                let upper_first = !g.outs[0].iter().any(|p| matches!(p, Port::Slot(1, _)));
                let koszul = upper_first
                    && ((odd_p[g.gens[0]] && odd_p[g.gens[1]]) != (odd[g.gens[0]] && odd[g.gens[1]]));
                let o = if twist { orientation_sign(&g) * suspension_sign(&q.generators, &g) } else { 1 };
                if koszul {
                    -o
                } else {
                    o
                }
            })
            .collect();
        for r in rows {
            ech.insert(r.into_iter().map(|(c, x)| (c, x * Rational::from_integer(eps[c].into()))));
        }
        for (k, v) in ech.null_space().into_iter().enumerate() {
            let v = primitive(&v);
            let mut terms = Vec::new();
            for (c, x) in v.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let (_, g) = space.representative(c);
                let lower = if g.outs[0].iter().any(|p| matches!(p, Port::Slot(1, _))) { 0 } else { 1 };
                let upper = 1 - lower;
                let mut coeff = x.clone();
                if lower == 1 && odd[g.gens[0]] && odd[g.gens[1]] {
                    coeff = -coeff;
                }
                terms.push(TwoVertexTerm { coeff, lower: vertex_spec(&g, lower), upper: vertex_spec(&g, upper) });
            }
            relations.push(Relation { name: format!("orth_{}_{}_{}", arity.0, arity.1, k + 1), terms });
        }
    }
    q.relations = relations;
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::builtin;
    use crate::span_engine::BlockKey;

    fn table(p: &Presentation, max_mn: usize, max_w: usize) -> Vec<((usize, usize, usize), usize)> {
        let e = SpanEngine::new(p);
        let mut out = Vec::new();
        for m in 1..=max_mn {
            for n in 1..=max_mn {
                for w in 1..=max_w {
                    let d = e.block(BlockKey { m, n, weight: w, genus: 0 }).unwrap().quotient_dim();
                    out.push(((m, n, w), d));
                }
            }
        }
        out
    }

    // all weights, the unit counting in weight 0
    fn summed(p: &Presentation, m: usize, n: usize) -> usize {
        let e = SpanEngine::new(p);
        usize::from(m == 1 && n == 1)
            + (1..=m + n).map(|w| e.block(BlockKey { m, n, weight: w, genus: 0 }).unwrap().quotient_dim()).sum::<usize>()
    }

    #[test]
    fn qpois_dual_is_one_dimensional_on_the_diagonal() {
        let d = quadratic_dual(&builtin("qpois").unwrap());
        assert_eq!(d.name, "qpois_dual");
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(summed(&d, m, n), usize::from(m == n), "({m},{n})");
            }
        }
    }

    #[test]
    fn qlp_dual_dims() {
        let d = quadratic_dual(&builtin("qlp").unwrap());
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(summed(&d, m, n), usize::from(m >= n), "({m},{n})");
            }
        }
    }

    #[test]
    fn lie_bialgebra_dual_is_frobenius() {
        let d = quadratic_dual(&builtin("lieb").unwrap());
        for m in 1..=3 {
            for n in 1..=3 {
                assert_eq!(summed(&d, m, n), 1, "({m},{n})");
            }
        }
    }

    #[test]
    fn double_dual_preserves_dimensions() {
        for name in ["qpois", "qlp", "lieb", "frob"] {
            let p = builtin(name).unwrap();
            let dd = quadratic_dual(&quadratic_dual(&p));
            assert_eq!(dd.name, name);
            let e = SpanEngine::new(&p);
            let f = SpanEngine::new(&dd);
            for m in 1..=6 {
                for n in 1..=7 - m {
                    for w in 1..=3 {
                        let k = BlockKey { m, n, weight: w, genus: 0 };
                        assert_eq!(e.block(k).unwrap().quotient_dim(), f.block(k).unwrap().quotient_dim(), "{name} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn stored_duals_match_computed() {
        for name in ["qpois", "qlp"] {
            let stored = builtin(&format!("{name}_dual")).unwrap();
            let computed = quadratic_dual(&builtin(name).unwrap());
            assert_eq!(table(&stored, 4, 3), table(&computed, 4, 3), "{name}");
        }
    }

    #[test]
    fn dual_generators_are_suspended() {
        let d = quadratic_dual(&builtin("qpois").unwrap());
        let g = &d.generators[0];
        assert_eq!((g.in_transpositions[0][0][0].clone(), g.out_transpositions[0][0][0].clone()), (-Rational::one(), Rational::one()));
        assert_eq!(g.degree, 1);
        let d = quadratic_dual(&builtin("lieb").unwrap());
        assert_eq!(d.generators.iter().map(|g| g.degree).collect::<Vec<_>>(), vec![0, 2]);
    }
}
