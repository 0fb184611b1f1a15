use super::oracle::rigid_dims;
use super::*;
use crate::presentations::builtin;

fn key(m: usize, n: usize, weight: usize, genus: usize) -> BlockKey {
    BlockKey { m, n, weight, genus }
}

#[test]
fn qpois_small_blocks() {
    let p = builtin("qpois").unwrap();
    let e = SpanEngine::new(&p);
    assert_eq!(e.weight_component(2, 2, 1, 0, Mode::Quotient).unwrap().1, 1);
    // the double edge kills itself
    assert_eq!(e.block(key(2, 2, 2, 1)).unwrap().free_dim(), 0);
    let b = e.block(key(3, 3, 2, 0)).unwrap();
    assert_eq!((b.free_dim(), b.ideal_dim(), b.quotient_dim()), (9, 1, 8));
}

#[test]
fn orbit_basis_matches_rigid_oracle() {
    for name in ["qpois", "lieb", "frob", "qlp"] {
        let p = builtin(name).unwrap();
        let e = SpanEngine::new(&p);
        let odd: Vec<bool> = p.generators.iter().map(|g| g.is_odd()).collect();
        for m in 1..=3 {
            for n in 1..=3 {
                for w in 1..=3 {
                    for g in 0..=1 {
                        let k = key(m, n, w, g);
                        let r = rigid_dims(&p, &odd, k, 200_000).unwrap();
                        let b = e.block(k).unwrap();
                        assert_eq!(
                            (b.free_dim(), b.ideal_dim(), b.quotient_dim()),
                            (r.free, r.ideal, r.quotient),
                            "{name} {k}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn compose_generators_along_one_leg() {
    let p = builtin("qpois").unwrap();
    let e = SpanEngine::new(&p);
    let x = e.generator_class(0, 0).unwrap();
    let gl = Gluing::standard((2, 2), (2, 2), &[(2, 1)]);
    let c = e.compose(&x, &x, &gl).unwrap();
    assert_eq!(c.key, key(3, 3, 2, 0));
    let b = e.block(c.key).unwrap();
    assert_eq!((b.free_dim(), b.quotient_dim()), (9, 8));
    assert!(!c.is_zero());
}

#[test]
fn unit_is_neutral() {
    let p = builtin("qpois").unwrap();
    let e = SpanEngine::new(&p);
    let x = e.generator_class(0, 0).unwrap();
    let gl = Gluing::standard((2, 2), (2, 2), &[(2, 1)]);
    let c = e.compose(&x, &x, &gl).unwrap();
    let u = ClassVector::unit();
    for k in 1..=3 {
        let gl = Gluing::standard((3, 3), (1, 1), &[(1, k)]);
        let mut g2 = gl.clone();
        // keep the result's input k where it was
        g2.inputs = (1..=3).map(|l| if l == k { (Operand::B, 1) } else { (Operand::A, l) }).collect();
        assert_eq!(e.compose(&c, &u, &g2).unwrap(), c);
        let gl = Gluing {
            pairs: vec![(k, 1)],
            inputs: (1..=3).map(|l| (Operand::B, l)).collect(),
            outputs: (1..=3).map(|l| if l == k { (Operand::A, 1) } else { (Operand::B, l) }).collect(),
        };
        assert_eq!(e.compose(&u, &c, &gl).unwrap(), c);
    }
}

#[test]
fn dual_generators_glued_twice_vanish() {
    let p = builtin("qpois_dual").unwrap();
    let e = SpanEngine::new(&p);
    let x = e.generator_class(0, 0).unwrap();
    let c = e.compose(&x, &x, &Gluing::standard((2, 2), (2, 2), &[(1, 1), (2, 2)])).unwrap();
    assert_eq!(c.key, key(2, 2, 2, 1));
    assert!(c.is_zero());
}

#[test]
fn genus_overflow_and_missing_blocks() {
    let p = builtin("qpois").unwrap();
    let mut e = SpanEngine::new(&p);
    e.max_genus = 0;
    let x = e.generator_class(0, 0).unwrap();
    let two = Gluing::standard((2, 2), (2, 2), &[(1, 1), (2, 2)]);
    assert_eq!(e.compose(&x, &x, &two), Err(SpanError::GenusOverflow(1, 0)));
    e.lazy = false;
    let one = Gluing::standard((2, 2), (2, 2), &[(1, 1)]);
    assert_eq!(e.compose(&x, &x, &one), Err(SpanError::BlockMissing(key(3, 3, 2, 0))));
    e.block(key(3, 3, 2, 0)).unwrap();
    assert!(e.compose(&x, &x, &one).is_ok());
}

#[test]
fn genus_vanishing() {
    let d = builtin("qpois_dual").unwrap();
    let e = SpanEngine::new(&d);
    for (m, n) in [(2, 2), (3, 3)] {
        for (w, g, dim) in e.genus_vanishing_report(m, n, 3, 2).unwrap() {
            assert_eq!(dim, 0, "({m},{n}) weight {w} genus {g}");
        }
    }
    let f = builtin("frob").unwrap();
    let e = SpanEngine::new(&f);
    let r = e.genus_vanishing_report(1, 1, 2, 1).unwrap();
    assert!(r.iter().any(|&(w, g, d)| w == 2 && g == 1 && d > 0));
}

#[test]
fn disk_cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("koszulab-cache-test-{}", std::process::id()));
    let p = builtin("qlp").unwrap();
    let k = key(3, 2, 2, 0);
    let a = SpanEngine::new(&p).with_cache(Some(dir.clone()));
    let d1 = a.block(k).unwrap().quotient_dim();
    assert!(std::fs::read_dir(&dir).unwrap().count() > 0);
    let b = SpanEngine::new(&p).with_cache(Some(dir.clone()));
    let d2 = b.block(k).unwrap().quotient_dim();
    assert_eq!(d1, d2);
    std::fs::remove_dir_all(dir).unwrap();
}
