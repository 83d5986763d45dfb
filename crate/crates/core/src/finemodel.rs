//! Explicit local models for scenarios with two binary settings on one
//! side.
//!
//! For a behavior in `(m,2,2,2)` that satisfies every positivity and CHSH
//! facet, [`fine_model`] builds a joint distribution over all outcomes
//! `(a_1, …, a_m, b_1, b_2)` whose pair marginals are the measured
//! probabilities. Alice's outcomes are independent given Bob's pair.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::catalog::{make, FamilyId};
use crate::error::{Error, Result};
use crate::polytope::Inequality;
use crate::scalar::Scalar;
use crate::scenario::{CgVector, Scenario};
use crate::symmetry::SymmetryGroup;

/// Probabilities of every outcome string `(a_1, …, a_m, b_1, b_2)`.
///
/// Entries are indexed with `a_1` as the most significant bit and `b_2`
/// as the least significant one.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    m: usize,
    probs: Vec<T>,
}

impl<T: Scalar + PartialOrd> JointDistribution<T> {
    pub fn settings(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[T] {
        &self.probs
    }

    fn index(&self, a: &[usize], b: [usize; 2]) -> usize {
        a.iter().chain(&b).fold(0, |acc, &bit| (acc << 1) | bit)
    }

    /// Probability of the outcome string `a` for Alice and `b` for Bob.
    pub fn probability(&self, a: &[usize], b: [usize; 2]) -> &T {
        assert_eq!(a.len(), self.m, "one outcome per setting of Alice");
        &self.probs[self.index(a, b)]
    }

    /// `P(ja, jb | ia, ib)` obtained by summing out the other variables.
    pub fn pair_marginal(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> T {
        let shift_a = self.m + 1 - ia;
        let shift_b = 1 - ib;
        self.probs
            .iter()
            .enumerate()
            .filter(|(k, _)| (k >> shift_a) & 1 == ja && (k >> shift_b) & 1 == jb)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// The behavior this distribution reproduces.
    pub fn behavior(&self) -> CgVector<T> {
        let s = Scenario::new(self.m, 2, 2, 2).expect("m >= 1");
        let mut c = vec![T::zero(); s.cg_dimension()];
        for ia in 0..self.m {
            c[s.a_marginal_index(ia, 0)] =
                self.pair_marginal(ia, 0, 0, 0) + self.pair_marginal(ia, 0, 0, 1);
            for ib in 0..2 {
                c[s.joint_index(ia, ib, 0, 0)] = self.pair_marginal(ia, ib, 0, 0);
            }
        }
        for ib in 0..2 {
            c[s.b_marginal_index(ib, 0)] =
                self.pair_marginal(0, ib, 0, 0) + self.pair_marginal(0, ib, 1, 0);
        }
        CgVector::new(s, c).expect("dimension matches")
    }

    /// Every entry is nonnegative and the entries sum to one.
    pub fn is_valid(&self) -> bool {
        let sum = self.probs.iter().fold(T::zero(), |acc, p| acc + p.clone());
        self.probs.iter().all(|p| !is_negative(p)) && (sum - T::one()).is_negligible()
    }
}

fn is_negative<T: Scalar + PartialOrd>(x: &T) -> bool {
    *x < T::zero() && !x.is_negligible()
}

fn check<T: Scalar + PartialOrd>(x: T, what: impl FnOnce() -> String) -> Result<T> {
    if is_negative(&x) {
        return Err(Error::NegativeIntermediate(what()));
    }
    Ok(x)
}

fn min_of<T: Scalar + PartialOrd>(values: impl IntoIterator<Item = T>) -> T {
    values
        .into_iter()
        .reduce(|x, y| if y < x { y } else { x })
        .expect("nonempty")
}

fn check_shape(s: Scenario) -> Result<()> {
    if s.mb() != 2 || s.na() != 2 || s.nb() != 2 {
        return Err(Error::UnsupportedScenario(s));
    }
    Ok(())
}

/// Positivity and CHSH facets of `(m,2,2,2)`, which together describe its
/// local polytope.
pub fn chsh_facets(s: Scenario) -> Result<Arc<Vec<Inequality>>> {
    check_shape(s)?;
    static CACHE: OnceLock<Mutex<HashMap<Scenario, Arc<Vec<Inequality>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(f) = cache.lock().expect("cache lock").get(&s) {
        return Ok(f.clone());
    }
    let mut out = Vec::new();
    for ia in 0..s.ma() {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    out.push(make(FamilyId::Positivity {
                        scenario: s,
                        ia,
                        ib,
                        ja,
                        jb,
                    })?);
                }
            }
        }
    }
    let base = make(FamilyId::Chsh)?;
    let small = base.scenario();
    let fit = crate::polytope::AffineFit::for_scenario(small)?;
    let mut variants: Vec<Vec<i64>> = SymmetryGroup::for_scenario(small)?
        .orbit(&base.slack_vector()?)
        .into_iter()
        .collect();
    variants.sort();
    for slack in variants {
        let v = fit.inequality_from_slack(&slack)?;
        let c = v.coeffs();
        for i in 0..s.ma() {
            for j in i + 1..s.ma() {
                let pair = [i, j];
                let mut coeffs = vec![0; s.cg_dimension()];
                for (k, &ia) in pair.iter().enumerate() {
                    coeffs[s.a_marginal_index(ia, 0)] = c[small.a_marginal_index(k, 0)];
                    for ib in 0..2 {
                        coeffs[s.joint_index(ia, ib, 0, 0)] = c[small.joint_index(k, ib, 0, 0)];
                    }
                }
                for ib in 0..2 {
                    coeffs[s.b_marginal_index(ib, 0)] = c[small.b_marginal_index(ib, 0)];
                }
                out.push(Inequality::new(s, coeffs, v.bound())?.with_label("CHSH"));
            }
        }
    }
    let out = Arc::new(out);
    cache.lock().expect("cache lock").insert(s, out.clone());
    Ok(out)
}

/// First positivity or CHSH facet violated by `v`, if any.
pub fn violated_facet<T: Scalar + PartialOrd>(v: &CgVector<T>) -> Result<Option<Inequality>> {
    let facets = chsh_facets(v.scenario())?;
    Ok(facets
        .iter()
        .find(|q| {
            let slack = T::from_i64(q.bound()) - q.evaluate(v);
            is_negative(&slack)
        })
        .cloned())
}

/// Builds the joint distribution for a local behavior in `(m,2,2,2)`.
///
/// Bob's pair gets `P(B_1, B_2) = β` with `β` the smallest of `P(B_1)`,
/// `P(B_2)` and `P(A_i B_k) + P(B_{3−k}) − P(A_i B_{3−k})` over all `i, k`.
/// Each `A_i` is then attached to Bob's pair with
/// `P(A_i, B_1, B_2) = α_i`, the smallest of `P(A_i B_1)`, `P(A_i B_2)`,
/// `β` and `β − (P(A_i) + P(B_1) + P(B_2) − P(A_i B_1) − P(A_i B_2) − 1)`,
/// and the triples are glued by conditional independence given Bob's
/// outcomes. Cells whose conditioning probability vanishes get zero weight.
///
/// Every intermediate probability is checked for nonnegativity.
pub fn fine_model<T: Scalar + PartialOrd>(v: &CgVector<T>) -> Result<JointDistribution<T>> {
    let s = v.scenario();
    check_shape(s)?;
    if let Some(q) = violated_facet(v)? {
        return Err(Error::NotLocal(Box::new(q)));
    }
    let m = s.ma();
    let pa = |i: usize| v.a_marginal(i, 0).clone();
    let pb = |k: usize| v.b_marginal(k, 0).clone();
    let pab = |i: usize, k: usize| v.joint(i, k, 0, 0).clone();

    let beta = min_of(
        [pb(0), pb(1)].into_iter().chain(
            (0..m)
                .flat_map(|i| (0..2).map(move |k| (i, k)))
                .map(|(i, k)| pab(i, k) + pb(1 - k) - pab(i, 1 - k)),
        ),
    );
    let bob = [
        check(beta.clone(), || "P(B1=0, B2=0)".into())?,
        check(pb(0) - beta.clone(), || "P(B1=0, B2=1)".into())?,
        check(pb(1) - beta.clone(), || "P(B1=1, B2=0)".into())?,
        check(T::one() - pb(0) - pb(1) + beta.clone(), || {
            "P(B1=1, B2=1)".into()
        })?,
    ];

    // triples[i][a][b]: P(A_i = a, (B_1, B_2) = b) with b = 2·b1 + b2.
    let mut triples = Vec::with_capacity(m);
    for i in 0..m {
        let (p, q0, q1) = (pa(i), pab(i, 0), pab(i, 1));
        let alpha = min_of([
            q0.clone(),
            q1.clone(),
            beta.clone(),
            beta.clone() - (p.clone() + pb(0) + pb(1) - q0.clone() - q1.clone() - T::one()),
        ]);
        let gap = beta.clone() - alpha.clone();
        let cells = [
            [
                alpha.clone(),
                q0.clone() - alpha.clone(),
                q1.clone() - alpha.clone(),
                p.clone() - q0.clone() - q1.clone() + alpha,
            ],
            [
                gap.clone(),
                pb(0) - q0.clone() - gap.clone(),
                pb(1) - q1.clone() - gap.clone(),
                q0 + q1 + gap + T::one() - p - pb(0) - pb(1),
            ],
        ];
        for (a, row) in cells.iter().enumerate() {
            for (b, x) in row.iter().enumerate() {
                check(x.clone(), || {
                    format!("P(A{}={a}, B1={}, B2={})", i + 1, b >> 1, b & 1)
                })?;
            }
        }
        triples.push(cells);
    }

    let n = 1usize << (m + 2);
    let probs = (0..n)
        .map(|k| {
            let b = k & 3;
            if bob[b].is_zero() {
                return T::zero();
            }
            (0..m).fold(bob[b].clone(), |acc, i| {
                let a = (k >> (m + 1 - i)) & 1;
                acc * triples[i][a][b].clone() / bob[b].clone()
            })
        })
        .collect();
    Ok(JointDistribution { m, probs })
}

/// Outcome of [`certify_local`].
#[derive(Clone, Debug, PartialEq)]
pub enum Locality<T> {
    /// A joint distribution reproducing the behavior.
    Local(JointDistribution<T>),
    /// A facet of the local polytope that the behavior violates.
    Nonlocal(Inequality),
}

impl<T> Locality<T> {
    pub fn is_local(&self) -> bool {
        matches!(self, Locality::Local(_))
    }
}

/// Decides membership in the local polytope of `(m,2,2,2)`, returning a
/// local model or a violated facet.
pub fn certify_local<T: Scalar + PartialOrd>(v: &CgVector<T>) -> Result<Locality<T>> {
    check_shape(v.scenario())?;
    match fine_model(v) {
        Ok(jd) => Ok(Locality::Local(jd)),
        Err(Error::NotLocal(q)) => Ok(Locality::Nonlocal(*q)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::vertices::enumerate_vertices;
    use num_traits::{One, Zero};

    fn s(m: usize) -> Scenario {
        Scenario::new(m, 2, 2, 2).unwrap()
    }

    #[test]
    fn facet_list_sizes() {
        assert_eq!(chsh_facets(s(2)).unwrap().len(), 24);
        assert_eq!(chsh_facets(s(3)).unwrap().len(), 48);
        assert_eq!(chsh_facets(s(4)).unwrap().len(), 32 + 48);
        assert!(chsh_facets(Scenario::new(2, 3, 2, 2).unwrap()).is_err());
    }

    #[test]
    fn vertices_become_point_masses() {
        for d in enumerate_vertices(s(3)).unwrap() {
            let v = d.to_cg::<Rational>();
            let jd = fine_model(&v).unwrap();
            let mut out = d.a_out().to_vec();
            out.extend(d.b_out());
            let k = out.iter().fold(0, |acc, &x| (acc << 1) | x);
            for (i, p) in jd.entries().iter().enumerate() {
                assert_eq!(p.is_one(), i == k);
                assert!(p.is_one() || p.is_zero());
            }
            assert_eq!(jd.behavior(), v);
        }
    }

    #[test]
    fn uniform_behavior() {
        let sc = s(3);
        let mut c = vec![ratio(1, 4); sc.cg_dimension()];
        for i in 0..3 {
            c[sc.a_marginal_index(i, 0)] = ratio(1, 2);
        }
        for k in 0..2 {
            c[sc.b_marginal_index(k, 0)] = ratio(1, 2);
        }
        let v = CgVector::new(sc, c).unwrap();
        let jd = fine_model(&v).unwrap();
        assert!(jd.is_valid());
        assert_eq!(jd.behavior(), v);
        assert_eq!(jd.pair_marginal(2, 1, 1, 0), ratio(1, 4));
    }

    #[test]
    fn pr_box_is_rejected() {
        let sc = s(2);
        let mut c = vec![ratio(1, 2); sc.cg_dimension()];
        c[sc.joint_index(1, 1, 0, 0)] = Rational::zero();
        let v = CgVector::new(sc, c).unwrap();
        match certify_local(&v).unwrap() {
            Locality::Nonlocal(q) => assert_eq!(q.label(), Some("CHSH")),
            Locality::Local(_) => panic!("PR box is not local"),
        }
        assert!(matches!(fine_model(&v), Err(Error::NotLocal(_))));
    }

    #[test]
    fn unsupported_shape() {
        let sc = Scenario::new(2, 2, 3, 2).unwrap();
        let v = CgVector::new(sc, vec![Rational::zero(); sc.cg_dimension()]).unwrap();
        assert!(matches!(
            certify_local(&v),
            Err(Error::UnsupportedScenario(_))
        ));
    }
}
