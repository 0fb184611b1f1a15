use super::*;
use crate::exact_linalg::{Rational, SparseMatrix};
use crate::presentations::builtin;
use std::collections::{BTreeMap, HashMap};

fn qpd() -> TwistedAlgebra {
    TwistedAlgebra::new(&builtin("qpois_dual").unwrap())
}

fn diag(ins: &[usize], outs: &[usize]) -> Piece {
    Piece { ins: ins.to_vec(), outs: outs.to_vec(), weight: ins.len(), basis: 0 }
}

type Entries = BTreeMap<(Vec<Piece>, Vec<Piece>), Rational>;

fn entries(c: &TwComplex) -> Entries {
    let mut out = BTreeMap::new();
    for (&k, d) in &c.differentials {
        for (r, col, x) in d.entries() {
            out.insert((c.bases[&k][col].clone(), c.bases[&(k - 1)][r].clone()), x.clone());
        }
    }
    out
}

#[test]
fn derived_dimensions() {
    let a = qpd();
    let md = a.module();
    for m in 0..=4 {
        for n in 0..=4 {
            assert_eq!(a.total_dim(m, n).unwrap(), usize::from(m == n), "A({m},{n})");
            assert_eq!(md.total_dim(m, n).unwrap(), usize::from(n == m + 1), "M({m},{n})");
        }
    }
    assert!(matches!(derive(&builtin("qpois_dual").unwrap(), 3), Err(TwistedError::Marks(3))));
    assert!(matches!(derive(&builtin("qpois_dual").unwrap(), 2), Ok(Derived::Module(_))));
}

#[test]
fn weight_two_relations() {
    assert_eq!(qpd().weight_two_check(2, 2).unwrap(), (4, 3, 1));
}

#[test]
fn bar_small_anchors() {
    let a = qpd();
    let b1 = bar_tw(&a, TwBlockKey::koszul(1, false), None).unwrap();
    assert_eq!(b1.dims(), BTreeMap::from([(1, 1)]));
    assert_eq!(b1.bases[&1][0], vec![diag(&[1], &[1])]);
    assert_eq!(b1.homology().unwrap().dims, BTreeMap::from([(0, 1)]));
    let b2 = bar_tw(&a, TwBlockKey::koszul(2, false), None).unwrap();
    assert_eq!(b2.dims(), BTreeMap::from([(1, 1), (2, 4)]));
    assert_eq!(crate::exact_linalg::rank(&b2.differentials[&2]), 1);
    assert_eq!(b2.homology().unwrap().get(0), 3);
    assert_eq!(b2.homology().unwrap().support(), vec![0]);
}

#[test]
fn coefficient_flag_must_match() {
    let a = qpd();
    let md = a.module();
    assert_eq!(bar_tw(&a, TwBlockKey::koszul(2, true), None).unwrap_err(), TwistedError::Coefficients);
    assert_eq!(bar_tw(&a, TwBlockKey::koszul(2, false), Some(&md)).unwrap_err(), TwistedError::Coefficients);
}

#[test]
fn concentration_up_to_four() {
    let a = qpd();
    let md = a.module();
    let h0 = [1, 3, 19, 211];
    for n in 1..=4 {
        let b = bar_tw(&a, TwBlockKey::koszul(n, false), None).unwrap();
        let h = b.homology().unwrap();
        assert_eq!(h.support(), vec![0], "N={n}");
        assert_eq!(h.get(0), h0[n - 1]);
        let b = bar_tw(&a, TwBlockKey::koszul(n, true), Some(&md)).unwrap();
        assert_eq!(b.homology().unwrap().support(), vec![0], "N={n} with module");
        assert_eq!(b.verdict().unwrap(), TwVerdict::Pass);
    }
}

#[test]
fn fast_path_matches_generic() {
    let a = qpd();
    for n in 1..=4 {
        let g = bar_tw(&a, TwBlockKey::koszul(n, false), None).unwrap();
        let f = bar_tw_partitions(&a, n).unwrap();
        assert_eq!(f.dims(), g.dims(), "N={n}");
        assert_eq!(entries(&f), entries(&g), "N={n}");
    }
}

#[test]
fn fast_path_rejects_other_algebras() {
    let a = TwistedAlgebra::new(&builtin("qlp_dual").unwrap());
    assert!(matches!(bar_tw_partitions(&a, 2), Err(TwistedError::NotDiagonal(_))));
}

#[test]
fn planar_structure_constants_are_signs() {
    let a = qpd();
    for p in 1..=3 {
        for q in 1..=4 - p {
            let x = diag(&(1..=p).collect::<Vec<_>>(), &(1..=p).collect::<Vec<_>>());
            let y = diag(&(p + 1..=p + q).collect::<Vec<_>>(), &(p + 1..=p + q).collect::<Vec<_>>());
            let prod = a.product(&x, &y).unwrap();
            assert_eq!(prod.len(), 1);
            assert!(prod[0].1 == Rational::from_integer(1.into()) || prod[0].1 == Rational::from_integer((-1).into()));
        }
    }
}

#[test]
fn partition_pair_validation() {
    assert!(PartitionPair::new(vec![vec![2], vec![1]], vec![vec![1], vec![2]]).is_ok());
    assert!(PartitionPair::new(vec![vec![1, 2]], vec![vec![1], vec![2]]).is_err());
    assert!(PartitionPair::new(vec![vec![1], vec![2]], vec![vec![1, 2], vec![]]).is_err());
    assert!(PartitionPair::new(vec![vec![1], vec![1]], vec![vec![1], vec![2]]).is_err());
    assert!(PartitionPair::new(vec![vec![1], vec![3]], vec![vec![1], vec![2]]).is_err());
    let pp = PartitionPair::new(vec![vec![3, 1], vec![2]], vec![vec![2, 1], vec![3]]).unwrap();
    assert_eq!(pp.ins, vec![vec![1, 3], vec![2]]);
    assert_eq!(pp.len(), 2);
}

#[test]
fn inversion_degree_examples() {
    let pp = |i: Vec<Vec<usize>>, o: Vec<Vec<usize>>| PartitionPair::new(i, o).unwrap();
    assert_eq!(inversion_degree(&pp(vec![vec![1], vec![2]], vec![vec![1], vec![2]])), 0);
    assert_eq!(inversion_degree(&pp(vec![vec![2], vec![1]], vec![vec![1], vec![2]])), 1);
    assert_eq!(inversion_degree(&pp(vec![vec![2], vec![1]], vec![vec![2], vec![1]])), 2);
    assert_eq!(inversion_degree(&pp(vec![vec![2, 3], vec![1]], vec![vec![1, 2], vec![3]])), 2);
}

#[test]
fn partition_pair_counts() {
    // Σ_k k! S(N,k)² ordered pairs with matched sizes, grouped by composition
    let counts: Vec<usize> = (1..=4).map(|n| partition_pairs(n).len()).collect();
    assert_eq!(counts, vec![1, 5, 55, 1077]);
}

#[test]
fn merges_never_add_inversions() {
    let a = qpd();
    for n in 2..=4 {
        let f = bar_tw_partitions(&a, n).unwrap();
        for (src, dst) in entries(&f).keys() {
            assert!(inversion_degree(&PartitionPair::of_pieces(dst)) <= inversion_degree(&PartitionPair::of_pieces(src)));
        }
    }
}

#[test]
fn planar_sizes_and_homology() {
    for n in 1..=6 {
        let p = planar_subcomplex(n);
        for (k, d) in p.dims() {
            assert_eq!(d, binomial(n - 1, k - 1), "N={n} k={k}");
        }
        let h = p.homology().unwrap();
        let expect: Vec<usize> = if n == 1 { vec![1] } else { vec![] };
        assert_eq!(h.support(), expect, "N={n}");
    }
    let p = planar_subcomplex(2);
    assert_eq!(p.bases[&2], vec![vec![1, 1]]);
    assert_eq!(p.differentials[&2].get(0, 0), Rational::from_integer(1.into()));
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn composition_of(s: &[Piece]) -> Option<Vec<usize>> {
    let pp = PartitionPair::of_pieces(s);
    (inversion_degree(&pp) == 0).then(|| s.iter().map(|p| p.weight).collect())
}

/// Finds ±1 rescalings of both bases carrying one differential to the other.
fn equal_up_to_signs(a: &BTreeMap<usize, SparseMatrix>, b: &BTreeMap<usize, SparseMatrix>, top: usize) -> bool {
    let mut eps: HashMap<(usize, usize), bool> = HashMap::new();
    for k in 2..=top {
        let (da, db) = (&a[&k], &b[&k]);
        let mut ea: BTreeMap<(usize, usize), Rational> = da.entries().map(|(r, c, x)| ((r, c), x.clone())).collect();
        let eb: BTreeMap<(usize, usize), Rational> = db.entries().map(|(r, c, x)| ((r, c), x.clone())).collect();
        if ea.keys().ne(eb.keys()) {
            return false;
        }
        for ((r, c), x) in &eb {
            let flip_row = *eps.entry((k - 1, *r)).or_insert(false);
            let y = ea.remove(&(*r, *c)).unwrap();
            let want_flip_col = (y == -x.clone()) != flip_row;
            if y != *x && y != -x.clone() {
                return false;
            }
            if *eps.entry((k, *c)).or_insert(want_flip_col) != want_flip_col {
                return false;
            }
        }
    }
    true
}

#[test]
fn planar_is_inversion_free_part() {
    let a = qpd();
    for n in 1..=4 {
        let f = bar_tw_partitions(&a, n).unwrap();
        let p = planar_subcomplex(n);
        // restrict f to inversion-free sequences, reindexed like p
        let mut pos: BTreeMap<usize, Vec<Option<usize>>> = BTreeMap::new();
        for (&k, basis) in &f.bases {
            let idx: HashMap<&Vec<usize>, usize> = p.bases[&k].iter().enumerate().map(|(i, c)| (c, i)).collect();
            let v: Vec<Option<usize>> = basis.iter().map(|s| composition_of(s).map(|c| idx[&c])).collect();
            assert_eq!(v.iter().flatten().count(), p.bases[&k].len(), "bijection N={n} k={k}");
            pos.insert(k, v);
        }
        let mut restricted = BTreeMap::new();
        for (&k, d) in &f.differentials {
            let mut m = SparseMatrix::new(p.bases[&(k - 1)].len(), p.bases[&k].len());
            for (r, c, x) in d.entries() {
                if let Some(c2) = pos[&k][c] {
                    // a subcomplex: no term leaves the inversion-free part
                    let r2 = pos[&(k - 1)][r].expect("merge of inversion-free blocks stays inversion-free");
                    m.set(r2, c2, x.clone());
                }
            }
            restricted.insert(k, m);
        }
        assert!(equal_up_to_signs(&restricted, &p.differentials, n), "N={n}");
    }
}

/// All pieces of `a` on the given labels.
fn pieces_on(a: &TwistedAlgebra, ins: &[usize], outs: &[usize]) -> Vec<Piece> {
    let mut v = Vec::new();
    for w in 1..=4 {
        for q in 0..a.dim(ins.len(), outs.len(), w).unwrap() {
            v.push(Piece { ins: ins.to_vec(), outs: outs.to_vec(), weight: w, basis: q });
        }
    }
    v
}

fn split3(items: &[usize]) -> Vec<[Vec<usize>; 3]> {
    let mut out = vec![[vec![], vec![], vec![]]];
    for &x in items {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..3).map(move |i| {
                    let mut t = t.clone();
                    t[i].push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn check_associative(a: &TwistedAlgebra, m: usize, n: usize) -> usize {
    let ins: Vec<usize> = (1..=m).collect();
    let outs: Vec<usize> = (1..=n).collect();
    let mut checked = 0;
    for si in split3(&ins) {
        for so in split3(&outs) {
            let xs = pieces_on(a, &si[0], &so[0]);
            let ys = pieces_on(a, &si[1], &so[1]);
            let zs = pieces_on(a, &si[2], &so[2]);
            for x in &xs {
                for y in &ys {
                    for z in &zs {
                        let one = Rational::from_integer(1.into());
                        let (x, y, z) = (vec![(x.clone(), one.clone())], vec![(y.clone(), one.clone())], vec![(z.clone(), one)]);
                        let l = a.product_linear(&a.product_linear(&x, &y).unwrap(), &z).unwrap();
                        let r = a.product_linear(&x, &a.product_linear(&y, &z).unwrap()).unwrap();
                        assert_eq!(l, r, "{x:?} {y:?} {z:?}");
                        checked += 1;
                    }
                }
            }
        }
    }
    checked
}

#[test]
fn product_is_associative() {
    let a = qpd();
    let mut total = 0;
    for m in 3..=4 {
        total += check_associative(&a, m, m);
    }
    assert!(total > 0);
    let b = TwistedAlgebra::new(&builtin("qlp_dual").unwrap());
    let mut total = 0;
    for (m, n) in [(3, 3), (4, 3), (4, 4)] {
        total += check_associative(&b, m, n);
    }
    assert!(total > 0);
}

#[test]
fn module_action_is_compatible() {
    let a = qpd();
    let md = a.module();
    let one = Rational::from_integer(1.into());
    // x ∈ M(1,2) on inputs {1}, outputs {1,3}; y, z ∈ A(1,1)
    let x = vec![(Piece { ins: vec![1], outs: vec![1, 3], weight: 2, basis: 0 }, one.clone())];
    let y = vec![(diag(&[2], &[2]), one.clone())];
    let z = vec![(diag(&[3], &[4]), one)];
    let l = md.act_linear(&md.act_linear(&x, &y).unwrap(), &z).unwrap();
    let r = md.act_linear(&x, &a.product_linear(&y, &z).unwrap()).unwrap();
    assert!(!l.is_empty());
    assert_eq!(l, r);
}

#[test]
fn report_json_shape() {
    let a = qpd();
    let b = bar_tw(&a, TwBlockKey::koszul(2, false), None).unwrap();
    let j = b.to_json("qpois_dual").unwrap();
    assert_eq!(j["block"]["N"], 2);
    assert_eq!(j["block"]["coefficients"], false);
    assert_eq!(j["dims_by_syzygy"]["0"], 3);
    assert_eq!(j["verdict"]["status"], "pass");
}
