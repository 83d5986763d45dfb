mod common;

use bellscope::finemodel::{certify_local, fine_model, Locality};
use bellscope::scalar::Rational;
use bellscope::{CgVector, Scenario};
use common::{in_hull, random_local, random_mixed, rng, vertex_points};
use num_traits::{Signed, Zero};

/// Every full-table probability `P(a b | x y)` recomputed by brute force
/// from the model's entries.
fn check_model(v: &CgVector<Rational>) {
    let s = v.scenario();
    let model = fine_model(v).unwrap();
    let m = s.ma();
    assert_eq!(model.entries().len(), 1 << (m + 2));
    assert!(model.entries().iter().all(|p| !p.is_negative()));
    assert_eq!(
        model.entries().iter().sum::<Rational>(),
        Rational::from_integer(1.into())
    );
    for ia in 0..m {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    let mut total = Rational::zero();
                    for a in 0..1usize << m {
                        let bits: Vec<usize> = (0..m).map(|k| (a >> (m - 1 - k)) & 1).collect();
                        for b in 0..4usize {
                            let bb = [b >> 1, b & 1];
                            if bits[ia] == ja && bb[ib] == jb {
                                total += model.probability(&bits, bb);
                            }
                        }
                    }
                    assert_eq!(total, v.full_probability(ia, ib, ja, jb));
                }
            }
        }
    }
    assert_eq!(&model.behavior(), v);
}

#[test]
fn models_reproduce_local_behaviors_exactly() {
    for (s, seed, count) in [
        (Scenario::new(2, 2, 2, 2).unwrap(), 11, 200),
        (Scenario::new(3, 2, 2, 2).unwrap(), 12, 500),
        (Scenario::new(4, 2, 2, 2).unwrap(), 13, 300),
    ] {
        let mut r = rng(seed);
        for _ in 0..count {
            check_model(&random_local(s, &mut r));
        }
    }
}

#[test]
fn vertex_mixtures_never_fail() {
    let s = Scenario::new(3, 2, 2, 2).unwrap();
    let mut r = rng(21);
    for _ in 0..1000 {
        let v = random_local(s, &mut r);
        assert!(certify_local(&v).unwrap().is_local());
    }
}

#[test]
fn certification_agrees_with_linear_programming() {
    for (s, seed, count) in [
        (Scenario::new(3, 2, 2, 2).unwrap(), 31, 500),
        (Scenario::new(4, 2, 2, 2).unwrap(), 32, 150),
    ] {
        let verts = vertex_points(s);
        let mut r = rng(seed);
        let (mut local, mut nonlocal) = (0, 0);
        for _ in 0..count {
            let v = random_mixed(s, &mut r);
            let expected = in_hull(&verts, v.coords());
            match certify_local(&v).unwrap() {
                Locality::Local(model) => {
                    assert!(
                        expected,
                        "model found for a nonlocal point {:?}",
                        v.coords()
                    );
                    assert_eq!(model.behavior(), v);
                    local += 1;
                }
                Locality::Nonlocal(q) => {
                    assert!(!expected, "local point rejected by {q}");
                    assert!((q.evaluate(&v) - bellscope::scalar::rat(q.bound())).is_positive());
                    nonlocal += 1;
                }
            }
        }
        assert!(local > 0 && nonlocal > 0);
    }
}

#[test]
fn floating_point_models() {
    let s = Scenario::new(3, 2, 2, 2).unwrap();
    let mut r = rng(41);
    for _ in 0..100 {
        let exact = random_local(s, &mut r);
        let approx: Vec<f64> = exact
            .coords()
            .iter()
            .map(|x| num_traits::ToPrimitive::to_f64(x).unwrap())
            .collect();
        let v = CgVector::new(s, approx).unwrap();
        let model = fine_model(&v).unwrap();
        assert!(model.is_valid());
        for (x, y) in model.behavior().coords().iter().zip(v.coords()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
