//! Local relabelings: permutations of settings, of outcomes per setting,
//! and (in symmetric scenarios) exchange of the parties.
//!
//! Inequalities are transformed through their slack vectors
//! `bound - coeffs · v` over the lexicographically ordered vertices, which
//! sidesteps the affine bookkeeping outcome relabelings cause in CG
//! coordinates. Canonical forms minimize the slack vector over the group.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::catalog;
use crate::error::{Error, Result};
use crate::polytope::{AffineFit, Inequality};
use crate::scenario::Scenario;
use crate::vertices::{check_vertex_count, DeterministicStrategy, DEFAULT_VERTEX_CAP};

/// Largest `group order × vertex count` handled by canonicalization.
pub const GROUP_WORK_CAP: u128 = 50_000_000;

/// A local relabeling `d ↦ swap^s(L(d))`, where the local part `L` sends
/// `a[i]` to position `a_settings[i]` with value `a_outcomes[i][a[i]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetryElement {
    scenario: Scenario,
    a_settings: Vec<usize>,
    b_settings: Vec<usize>,
    a_outcomes: Vec<Vec<usize>>,
    b_outcomes: Vec<Vec<usize>>,
    swap: bool,
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n
        && p.iter()
            .all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    g.iter().map(|&x| f[x]).collect()
}

impl SymmetryElement {
    pub fn new(
        scenario: Scenario,
        a_settings: Vec<usize>,
        b_settings: Vec<usize>,
        a_outcomes: Vec<Vec<usize>>,
        b_outcomes: Vec<Vec<usize>>,
        swap: bool,
    ) -> Result<Self> {
        let ok = is_permutation(&a_settings, scenario.ma())
            && is_permutation(&b_settings, scenario.mb())
            && a_outcomes.len() == scenario.ma()
            && b_outcomes.len() == scenario.mb()
            && a_outcomes.iter().all(|p| is_permutation(p, scenario.na()))
            && b_outcomes.iter().all(|p| is_permutation(p, scenario.nb()));
        if !ok {
            return Err(Error::ParameterOutOfRange(format!(
                "not a relabeling of {scenario}"
            )));
        }
        if swap && !scenario.is_symmetric() {
            return Err(Error::ParameterOutOfRange(format!(
                "party swap needs a symmetric scenario, got {scenario}"
            )));
        }
        Ok(SymmetryElement {
            scenario,
            a_settings,
            b_settings,
            a_outcomes,
            b_outcomes,
            swap,
        })
    }

    pub fn identity(s: Scenario) -> Self {
        SymmetryElement {
            scenario: s,
            a_settings: (0..s.ma()).collect(),
            b_settings: (0..s.mb()).collect(),
            a_outcomes: vec![(0..s.na()).collect(); s.ma()],
            b_outcomes: vec![(0..s.nb()).collect(); s.mb()],
            swap: false,
        }
    }

    pub fn party_swap(s: Scenario) -> Result<Self> {
        let mut g = Self::identity(s);
        if !s.is_symmetric() {
            return Err(Error::ParameterOutOfRange(format!(
                "party swap needs a symmetric scenario, got {s}"
            )));
        }
        g.swap = true;
        Ok(g)
    }

    /// Relabels the outcomes of one A setting.
    pub fn a_outcome_perm(s: Scenario, setting: usize, perm: Vec<usize>) -> Result<Self> {
        let mut g = Self::identity(s);
        if setting >= s.ma() {
            return Err(Error::ParameterOutOfRange(format!(
                "no A setting {setting}"
            )));
        }
        g.a_outcomes[setting] = perm;
        Self::new(
            s,
            g.a_settings,
            g.b_settings,
            g.a_outcomes,
            g.b_outcomes,
            false,
        )
    }

    /// Permutes the settings of both parties.
    pub fn setting_perm(s: Scenario, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        let g = Self::identity(s);
        Self::new(s, a, b, g.a_outcomes, g.b_outcomes, false)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn swaps_parties(&self) -> bool {
        self.swap
    }

    fn conjugated_by_swap(&self) -> Self {
        SymmetryElement {
            scenario: self.scenario,
            a_settings: self.b_settings.clone(),
            b_settings: self.a_settings.clone(),
            a_outcomes: self.b_outcomes.clone(),
            b_outcomes: self.a_outcomes.clone(),
            swap: self.swap,
        }
    }

    /// `self ∘ h`: apply `h` first.
    pub fn compose(&self, h: &SymmetryElement) -> Result<Self> {
        self.check(h.scenario)?;
        let g = if h.swap {
            self.conjugated_by_swap()
        } else {
            self.clone()
        };
        let local = |gs: &[usize], go: &[Vec<usize>], hs: &[usize], ho: &[Vec<usize>]| {
            let outcomes = (0..hs.len())
                .map(|i| compose(&go[hs[i]], &ho[i]))
                .collect::<Vec<_>>();
            (compose(gs, hs), outcomes)
        };
        let (a_settings, a_outcomes) =
            local(&g.a_settings, &g.a_outcomes, &h.a_settings, &h.a_outcomes);
        let (b_settings, b_outcomes) =
            local(&g.b_settings, &g.b_outcomes, &h.b_settings, &h.b_outcomes);
        Ok(SymmetryElement {
            scenario: self.scenario,
            a_settings,
            b_settings,
            a_outcomes,
            b_outcomes,
            swap: self.swap ^ h.swap,
        })
    }

    pub fn inverse(&self) -> Self {
        let local_inv = |s: &[usize], o: &[Vec<usize>]| {
            let si = invert(s);
            let oi = (0..s.len()).map(|k| invert(&o[si[k]])).collect::<Vec<_>>();
            (si, oi)
        };
        let (a_settings, a_outcomes) = local_inv(&self.a_settings, &self.a_outcomes);
        let (b_settings, b_outcomes) = local_inv(&self.b_settings, &self.b_outcomes);
        let inv = SymmetryElement {
            scenario: self.scenario,
            a_settings,
            b_settings,
            a_outcomes,
            b_outcomes,
            swap: self.swap,
        };
        if self.swap {
            inv.conjugated_by_swap()
        } else {
            inv
        }
    }

    fn check(&self, s: Scenario) -> Result<()> {
        if s != self.scenario {
            return Err(Error::IncompatibleScenario {
                expected: self.scenario,
                found: s,
            });
        }
        Ok(())
    }

    pub fn act_on_strategy(&self, d: &DeterministicStrategy) -> Result<DeterministicStrategy> {
        self.check(d.scenario())?;
        let mut a = vec![0; self.scenario.ma()];
        for (i, &o) in d.a_out().iter().enumerate() {
            a[self.a_settings[i]] = self.a_outcomes[i][o];
        }
        let mut b = vec![0; self.scenario.mb()];
        for (j, &o) in d.b_out().iter().enumerate() {
            b[self.b_settings[j]] = self.b_outcomes[j][o];
        }
        if self.swap {
            std::mem::swap(&mut a, &mut b);
        }
        DeterministicStrategy::new(self.scenario, a, b)
    }

    /// `perm[k]` is the index of `g · v_k`.
    pub fn vertex_permutation(&self) -> Result<Vec<u32>> {
        let n = check_vertex_count(self.scenario, DEFAULT_VERTEX_CAP)?;
        (0..n)
            .map(|k| {
                let d = DeterministicStrategy::from_index(self.scenario, k);
                Ok(self.act_on_strategy(&d)?.index() as u32)
            })
            .collect()
    }

    /// The inequality `q'` with `q'(g·v) = q(v)` on every vertex.
    pub fn act_on_inequality(&self, q: &Inequality) -> Result<Inequality> {
        self.check(q.scenario())?;
        let slack = q.slack_vector()?;
        let perm = self.vertex_permutation()?;
        let mut moved = vec![0; slack.len()];
        for (k, &p) in perm.iter().enumerate() {
            moved[p as usize] = slack[k];
        }
        let mut out = AffineFit::for_scenario(self.scenario)?.inequality_from_slack(&moved)?;
        out.set_label(q.label().map(str::to_owned));
        Ok(out)
    }
}

/// `mA!·mB!·(nA!)^mA·(nB!)^mB`, doubled for symmetric scenarios.
pub fn group_order(s: Scenario) -> Option<u128> {
    let fact = |n: usize| (1..=n as u128).try_fold(1u128, |a, b| a.checked_mul(b));
    let mut order = fact(s.ma())?.checked_mul(fact(s.mb())?)?;
    order = order.checked_mul(fact(s.na())?.checked_pow(s.ma() as u32)?)?;
    order = order.checked_mul(fact(s.nb())?.checked_pow(s.mb() as u32)?)?;
    if s.is_symmetric() {
        order = order.checked_mul(2)?;
    }
    Some(order)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// The full relabeling group of a scenario together with its action on
/// vertex indices.
#[derive(Debug)]
pub struct SymmetryGroup {
    scenario: Scenario,
    elements: Vec<SymmetryElement>,
    tables: Vec<Vec<u32>>,
}

impl SymmetryGroup {
    /// Shared group of `s`; fails when `group order × vertex count`
    /// exceeds [`GROUP_WORK_CAP`].
    pub fn for_scenario(s: Scenario) -> Result<Arc<SymmetryGroup>> {
        static CACHE: OnceLock<Mutex<HashMap<Scenario, Arc<SymmetryGroup>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().expect("group cache poisoned").get(&s) {
            return Ok(g.clone());
        }
        let g = Arc::new(SymmetryGroup::new(s)?);
        cache
            .lock()
            .expect("group cache poisoned")
            .insert(s, g.clone());
        Ok(g)
    }

    fn new(s: Scenario) -> Result<Self> {
        let work = group_order(s)
            .zip(s.vertex_count())
            .and_then(|(g, v)| g.checked_mul(v));
        if work.is_none_or(|w| w > GROUP_WORK_CAP) {
            return Err(Error::Resource(format!(
                "relabeling group of {s} is too large to canonicalize"
            )));
        }
        let pa = permutations(s.ma());
        let pb = permutations(s.mb());
        let oa = permutations(s.na());
        let ob = permutations(s.nb());
        let swaps: &[bool] = if s.is_symmetric() {
            &[false, true]
        } else {
            &[false]
        };
        let tuples = |choices: &[Vec<usize>], len: usize| -> Vec<Vec<Vec<usize>>> {
            let mut out = vec![Vec::new()];
            for _ in 0..len {
                out = out
                    .into_iter()
                    .flat_map(|t| {
                        choices.iter().map(move |c| {
                            let mut t = t.clone();
                            t.push(c.clone());
                            t
                        })
                    })
                    .collect();
            }
            out
        };
        let ta = tuples(&oa, s.ma());
        let tb = tuples(&ob, s.mb());
        let mut elements = Vec::new();
        for &swap in swaps {
            for sa in &pa {
                for sb in &pb {
                    for a in &ta {
                        for b in &tb {
                            elements.push(SymmetryElement {
                                scenario: s,
                                a_settings: sa.clone(),
                                b_settings: sb.clone(),
                                a_outcomes: a.clone(),
                                b_outcomes: b.clone(),
                                swap,
                            });
                        }
                    }
                }
            }
        }
        let tables = elements
            .par_iter()
            .map(|g| g.vertex_permutation())
            .collect::<Result<_>>()?;
        Ok(SymmetryGroup {
            scenario: s,
            elements,
            tables,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SymmetryElement] {
        &self.elements
    }

    /// `slack ∘ perm` for every element: the orbit of `slack` with
    /// multiplicity.
    fn image(&self, slack: &[i64], g: usize) -> Vec<i64> {
        self.tables[g].iter().map(|&j| slack[j as usize]).collect()
    }

    /// Lexicographically smallest vector in the orbit of `slack`.
    pub fn min_image(&self, slack: &[i64]) -> Vec<i64> {
        let less = |g: usize, h: usize| {
            let (tg, th) = (&self.tables[g], &self.tables[h]);
            for (&x, &y) in tg.iter().zip(th) {
                let (a, b) = (slack[x as usize], slack[y as usize]);
                if a != b {
                    return a < b;
                }
            }
            false
        };
        let best = (0..self.order())
            .into_par_iter()
            .fold(|| 0usize, |best, g| if less(g, best) { g } else { best })
            .reduce(
                || 0usize,
                |x, y| {
                    if less(y, x) || (!less(x, y) && y < x) {
                        y
                    } else {
                        x
                    }
                },
            );
        self.image(slack, best)
    }

    /// The distinct slack vectors in the orbit of `slack`.
    pub fn orbit(&self, slack: &[i64]) -> HashSet<Vec<i64>> {
        (0..self.order())
            .into_par_iter()
            .map(|g| self.image(slack, g))
            .collect()
    }
}

/// Lexicographically minimal slack vector over the orbit of `q`.
pub fn canonical_slack(q: &Inequality) -> Result<Vec<i64>> {
    let group = SymmetryGroup::for_scenario(q.scenario())?;
    Ok(group.min_image(&q.slack_vector()?))
}

/// Orbit representative of `q` under local relabelings.
pub fn canonical_form(q: &Inequality) -> Result<Inequality> {
    let slack = canonical_slack(q)?;
    let mut out = AffineFit::for_scenario(q.scenario())?.inequality_from_slack(&slack)?;
    out.set_label(q.label().map(str::to_owned));
    Ok(out)
}

/// Whether two inequalities are related by a local relabeling.
pub fn equivalent(p: &Inequality, q: &Inequality) -> Result<bool> {
    Ok(p.scenario() == q.scenario() && canonical_slack(p)? == canonical_slack(q)?)
}

/// One orbit of a facet list.
#[derive(Clone, Debug)]
pub struct OrbitClass {
    pub canonical: Inequality,
    pub orbit_size: usize,
    /// Indices into the classified list.
    pub members: Vec<usize>,
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub scenario: Scenario,
    pub group_order: usize,
    pub classes: Vec<OrbitClass>,
}

impl OrbitReport {
    pub fn total(&self) -> usize {
        self.classes.iter().map(|c| c.members.len()).sum()
    }
}

/// Partitions inequalities of one scenario into relabeling orbits.
pub fn classify_orbits(facets: &[Inequality]) -> Result<OrbitReport> {
    let Some(first) = facets.first() else {
        return Err(Error::ShapeMismatch("nothing to classify".into()));
    };
    let s = first.scenario();
    if let Some(q) = facets.iter().find(|q| q.scenario() != s) {
        return Err(Error::IncompatibleScenario {
            expected: s,
            found: q.scenario(),
        });
    }
    let group = SymmetryGroup::for_scenario(s)?;
    let fit = AffineFit::for_scenario(s)?;
    let slacks: Vec<Vec<i64>> = facets
        .par_iter()
        .map(|q| q.slack_vector())
        .collect::<Result<_>>()?;
    let index: HashMap<&[i64], usize> = slacks
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    let mut assigned = vec![false; facets.len()];
    let mut classes = Vec::new();
    for i in 0..facets.len() {
        if assigned[i] {
            continue;
        }
        let orbit = group.orbit(&slacks[i]);
        let mut members: Vec<usize> = orbit
            .iter()
            .filter_map(|v| index.get(v.as_slice()).copied())
            .collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            assigned[m] = true;
        }
        let min = orbit.iter().min().expect("orbit is nonempty");
        let canonical = fit.inequality_from_slack(min)?;
        let label = catalog::identify(&canonical)?;
        classes.push(OrbitClass {
            canonical,
            orbit_size: orbit.len(),
            members,
            label,
        });
    }
    classes.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    Ok(OrbitReport {
        scenario: s,
        group_order: group.order(),
        classes,
    })
}

/// The same inequality with the roles of the parties exchanged, living in
/// the transposed scenario.
pub fn transpose_inequality(q: &Inequality) -> Inequality {
    let s = q.scenario();
    let t = s.transposed();
    let c = q.coeffs();
    let mut out = vec![0; c.len()];
    for ib in 0..s.mb() {
        for jb in 0..s.nb() - 1 {
            out[t.a_marginal_index(ib, jb)] = c[s.b_marginal_index(ib, jb)];
        }
    }
    for ia in 0..s.ma() {
        for ja in 0..s.na() - 1 {
            out[t.b_marginal_index(ia, ja)] = c[s.a_marginal_index(ia, ja)];
            for ib in 0..s.mb() {
                for jb in 0..s.nb() - 1 {
                    out[t.joint_index(ib, ia, jb, ja)] = c[s.joint_index(ia, ib, ja, jb)];
                }
            }
        }
    }
    let mut r = Inequality::new(t, out, q.bound()).expect("same nonzero coefficients");
    r.set_label(q.label().map(str::to_owned));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertices::enumerate_vertices;

    fn s2222() -> Scenario {
        Scenario::new(2, 2, 2, 2).unwrap()
    }

    fn chsh() -> Inequality {
        Inequality::new(s2222(), vec![-1, 0, -1, 0, 1, 1, 1, -1], 0).unwrap()
    }

    #[test]
    fn orders() {
        let order = |a, b, c, d| group_order(Scenario::new(a, b, c, d).unwrap()).unwrap();
        assert_eq!(order(2, 2, 2, 2), 128);
        assert_eq!(order(3, 3, 2, 2), 4608);
        assert_eq!(order(2, 2, 3, 3), 10368);
        assert_eq!(order(3, 4, 2, 2), 18432);
        assert_eq!(SymmetryGroup::for_scenario(s2222()).unwrap().order(), 128);
    }

    #[test]
    fn strategy_examples() {
        let s = s2222();
        let d = DeterministicStrategy::new(s, vec![0, 1], vec![1, 0]).unwrap();
        let swapped = SymmetryElement::party_swap(s)
            .unwrap()
            .act_on_strategy(&d)
            .unwrap();
        assert_eq!(
            (swapped.a_out(), swapped.b_out()),
            (&[1, 0][..], &[0, 1][..])
        );
        let flip = SymmetryElement::a_outcome_perm(s, 0, vec![1, 0]).unwrap();
        assert_eq!(flip.act_on_strategy(&d).unwrap().a_out(), &[1, 1]);
        assert_eq!(SymmetryElement::identity(s).act_on_strategy(&d).unwrap(), d);
    }

    #[test]
    fn swap_requires_symmetry() {
        assert!(SymmetryElement::party_swap(Scenario::new(2, 3, 2, 2).unwrap()).is_err());
    }

    #[test]
    fn composition_and_inverse_act_correctly() {
        let s = Scenario::new(2, 2, 3, 3).unwrap();
        let group = SymmetryGroup::for_scenario(s).unwrap();
        let vs = enumerate_vertices(s).unwrap();
        for (i, g) in group.elements().iter().enumerate().step_by(97) {
            let h = &group.elements()[(i * 31 + 7) % group.order()];
            let gh = g.compose(h).unwrap();
            let gi = g.inverse();
            for d in vs.iter().step_by(5) {
                let lhs = gh.act_on_strategy(d).unwrap();
                let rhs = g.act_on_strategy(&h.act_on_strategy(d).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
                assert_eq!(
                    gi.act_on_strategy(&g.act_on_strategy(d).unwrap()).unwrap(),
                    *d
                );
            }
        }
    }

    #[test]
    fn chsh_variants_share_a_canonical_form() {
        let q = chsh();
        let group = SymmetryGroup::for_scenario(s2222()).unwrap();
        let c = canonical_form(&q).unwrap();
        assert_eq!(canonical_form(&c).unwrap(), c);
        let mut images = HashSet::new();
        for g in group.elements() {
            let r = g.act_on_inequality(&q).unwrap();
            assert_eq!(canonical_form(&r).unwrap(), c);
            images.insert(r);
        }
        assert_eq!(images.len(), 8);
    }

    #[test]
    fn positivity_differs_from_chsh() {
        let mut c = vec![0; 8];
        c[4] = -1;
        let pos = Inequality::new(s2222(), c, 0).unwrap();
        assert!(!equivalent(&pos, &chsh()).unwrap());
    }

    #[test]
    fn transpose_round_trip() {
        let s = Scenario::new(2, 3, 2, 3).unwrap();
        let coeffs: Vec<i64> = (0..s.cg_dimension() as i64).map(|i| i % 5 - 2).collect();
        let q = Inequality::new(s, coeffs, 3).unwrap();
        let t = transpose_inequality(&q);
        assert_eq!(t.scenario(), s.transposed());
        assert_eq!(transpose_inequality(&t), q);
        let d = DeterministicStrategy::new(s, vec![1, 0], vec![2, 0, 1]).unwrap();
        let dt = DeterministicStrategy::new(t.scenario(), vec![2, 0, 1], vec![1, 0]).unwrap();
        assert_eq!(q.value_at(&d), t.value_at(&dt));
    }
}
