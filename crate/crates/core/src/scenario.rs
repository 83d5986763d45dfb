//! Bell scenarios and the minimal no-signalling (CG) coordinate system.
//!
//! CG coordinates are ordered as: A-marginals `P(jA|iA)` (setting outer,
//! outcome inner, outcomes `0..nA-1` exclusive of the last), then
//! B-marginals likewise, then joints `P(jA,jB|iA,iB)` ordered by
//! `(iA, iB, jA, jB)` with `iA` outermost. All indices are 0-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Setting and outcome counts of a two-party scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    ma: usize,
    mb: usize,
    na: usize,
    nb: usize,
}

impl Scenario {
    pub fn new(ma: usize, mb: usize, na: usize, nb: usize) -> Result<Self> {
        if ma < 1 || mb < 1 || na < 2 || nb < 2 {
            return Err(Error::InvalidScenario { ma, mb, na, nb });
        }
        Ok(Scenario { ma, mb, na, nb })
    }

    pub fn ma(&self) -> usize {
        self.ma
    }
    pub fn mb(&self) -> usize {
        self.mb
    }
    pub fn na(&self) -> usize {
        self.na
    }
    pub fn nb(&self) -> usize {
        self.nb
    }

    /// `mA·mB·(nA−1)·(nB−1) + mA·(nA−1) + mB·(nB−1)`
    pub fn cg_dimension(&self) -> usize {
        self.ma * self.mb * (self.na - 1) * (self.nb - 1)
            + self.ma * (self.na - 1)
            + self.mb * (self.nb - 1)
    }

    /// The same scenario with the parties exchanged.
    pub fn transposed(&self) -> Scenario {
        Scenario {
            ma: self.mb,
            mb: self.ma,
            na: self.nb,
            nb: self.na,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.ma == self.mb && self.na == self.nb
    }

    pub fn vertex_count(&self) -> Option<u128> {
        let a = (self.na as u128).checked_pow(self.ma as u32)?;
        let b = (self.nb as u128).checked_pow(self.mb as u32)?;
        a.checked_mul(b)
    }

    pub fn a_marginal_index(&self, ia: usize, ja: usize) -> usize {
        debug_assert!(ia < self.ma && ja + 1 < self.na);
        ia * (self.na - 1) + ja
    }

    pub fn b_marginal_index(&self, ib: usize, jb: usize) -> usize {
        debug_assert!(ib < self.mb && jb + 1 < self.nb);
        self.ma * (self.na - 1) + ib * (self.nb - 1) + jb
    }

    pub fn joint_index(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> usize {
        debug_assert!(ia < self.ma && ib < self.mb && ja + 1 < self.na && jb + 1 < self.nb);
        let offset = self.ma * (self.na - 1) + self.mb * (self.nb - 1);
        offset + ((ia * self.mb + ib) * (self.na - 1) + ja) * (self.nb - 1) + jb
    }

    /// Human-readable name of a CG coordinate, 1-based settings as in the
    /// usual table notation.
    pub fn coordinate_name(&self, idx: usize) -> String {
        let amarg = self.ma * (self.na - 1);
        let bmarg = self.mb * (self.nb - 1);
        if idx < amarg {
            format!("P({}|A{})", idx % (self.na - 1), idx / (self.na - 1) + 1)
        } else if idx < amarg + bmarg {
            let k = idx - amarg;
            format!("P({}|B{})", k % (self.nb - 1), k / (self.nb - 1) + 1)
        } else {
            let mut k = idx - amarg - bmarg;
            let jb = k % (self.nb - 1);
            k /= self.nb - 1;
            let ja = k % (self.na - 1);
            k /= self.na - 1;
            let ib = k % self.mb;
            let ia = k / self.mb;
            format!("P({ja},{jb}|A{},B{})", ia + 1, ib + 1)
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.ma, self.mb, self.na, self.nb)
    }
}

/// A point in CG coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CgVector<T> {
    scenario: Scenario,
    coords: Vec<T>,
}

impl<T: Scalar> CgVector<T> {
    pub fn new(scenario: Scenario, coords: Vec<T>) -> Result<Self> {
        if coords.len() != scenario.cg_dimension() {
            return Err(Error::ShapeMismatch(format!(
                "CG vector for {scenario} needs {} coordinates, got {}",
                scenario.cg_dimension(),
                coords.len()
            )));
        }
        Ok(CgVector { scenario, coords })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn a_marginal(&self, ia: usize, ja: usize) -> &T {
        &self.coords[self.scenario.a_marginal_index(ia, ja)]
    }

    pub fn b_marginal(&self, ib: usize, jb: usize) -> &T {
        &self.coords[self.scenario.b_marginal_index(ib, jb)]
    }

    pub fn joint(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> &T {
        &self.coords[self.scenario.joint_index(ia, ib, ja, jb)]
    }

    /// Dot product with an integer coefficient vector.
    pub fn dot_i64(&self, coeffs: &[i64]) -> T {
        assert_eq!(coeffs.len(), self.coords.len());
        self.coords
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c != 0)
            .fold(T::zero(), |acc, (x, &c)| acc + x.clone() * T::from_i64(c))
    }

    /// Full probability `P(ja,jb|ia,ib)` reconstructed from CG coordinates.
    pub fn full_probability(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> T {
        let s = self.scenario;
        let (last_a, last_b) = (ja + 1 == s.na, jb + 1 == s.nb);
        match (last_a, last_b) {
            (false, false) => self.joint(ia, ib, ja, jb).clone(),
            (false, true) => (0..s.nb - 1).fold(self.a_marginal(ia, ja).clone(), |acc, k| {
                acc - self.joint(ia, ib, ja, k).clone()
            }),
            (true, false) => (0..s.na - 1).fold(self.b_marginal(ib, jb).clone(), |acc, k| {
                acc - self.joint(ia, ib, k, jb).clone()
            }),
            (true, true) => {
                let mut acc = T::one();
                for k in 0..s.na - 1 {
                    acc = acc - self.a_marginal(ia, k).clone();
                }
                for k in 0..s.nb - 1 {
                    acc = acc - self.b_marginal(ib, k).clone();
                }
                for x in 0..s.na - 1 {
                    for y in 0..s.nb - 1 {
                        acc = acc + self.joint(ia, ib, x, y).clone();
                    }
                }
                acc
            }
        }
    }
}

/// Full conditional probability table `P(ja,jb|ia,ib)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullTable<T> {
    scenario: Scenario,
    data: Vec<T>,
}

impl<T: Scalar> FullTable<T> {
    pub fn new(scenario: Scenario, data: Vec<T>) -> Result<Self> {
        let len = scenario.ma * scenario.mb * scenario.na * scenario.nb;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "full table for {scenario} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(FullTable { scenario, data })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(scenario.ma * scenario.mb * scenario.na * scenario.nb);
        for ia in 0..scenario.ma {
            for ib in 0..scenario.mb {
                for ja in 0..scenario.na {
                    for jb in 0..scenario.nb {
                        data.push(f(ia, ib, ja, jb));
                    }
                }
            }
        }
        FullTable { scenario, data }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    fn offset(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> usize {
        let s = &self.scenario;
        ((ia * s.mb + ib) * s.na + ja) * s.nb + jb
    }

    pub fn get(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> &T {
        &self.data[self.offset(ia, ib, ja, jb)]
    }

    pub fn set(&mut self, ia: usize, ib: usize, ja: usize, jb: usize, v: T) {
        let o = self.offset(ia, ib, ja, jb);
        self.data[o] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    fn a_marginal_given(&self, ia: usize, ib: usize, ja: usize) -> T {
        (0..self.scenario.nb).fold(T::zero(), |acc, jb| acc + self.get(ia, ib, ja, jb).clone())
    }

    fn b_marginal_given(&self, ia: usize, ib: usize, jb: usize) -> T {
        (0..self.scenario.na).fold(T::zero(), |acc, ja| acc + self.get(ia, ib, ja, jb).clone())
    }
}

/// Project a normalized no-signalling table onto CG coordinates.
pub fn full_to_cg<T: Scalar>(table: &FullTable<T>) -> Result<CgVector<T>> {
    let s = table.scenario;
    for ia in 0..s.ma {
        for ib in 0..s.mb {
            let sum = table.data
                [table.offset(ia, ib, 0, 0)..table.offset(ia, ib, 0, 0) + s.na * s.nb]
                .iter()
                .fold(T::zero(), |acc, x| acc + x.clone());
            if !(sum.clone() - T::one()).is_negligible() {
                return Err(Error::Normalization {
                    ia,
                    ib,
                    sum: format!("{sum:?}"),
                });
            }
        }
    }
    for ia in 0..s.ma {
        for ja in 0..s.na {
            let first = table.a_marginal_given(ia, 0, ja);
            for ib in 1..s.mb {
                if !(table.a_marginal_given(ia, ib, ja) - first.clone()).is_negligible() {
                    return Err(Error::Signalling {
                        party: 'A',
                        setting: ia,
                    });
                }
            }
        }
    }
    for ib in 0..s.mb {
        for jb in 0..s.nb {
            let first = table.b_marginal_given(0, ib, jb);
            for ia in 1..s.ma {
                if !(table.b_marginal_given(ia, ib, jb) - first.clone()).is_negligible() {
                    return Err(Error::Signalling {
                        party: 'B',
                        setting: ib,
                    });
                }
            }
        }
    }
    let mut coords = vec![T::zero(); s.cg_dimension()];
    for ia in 0..s.ma {
        for ja in 0..s.na - 1 {
            coords[s.a_marginal_index(ia, ja)] = table.a_marginal_given(ia, 0, ja);
        }
    }
    for ib in 0..s.mb {
        for jb in 0..s.nb - 1 {
            coords[s.b_marginal_index(ib, jb)] = table.b_marginal_given(0, ib, jb);
        }
    }
    for ia in 0..s.ma {
        for ib in 0..s.mb {
            for ja in 0..s.na - 1 {
                for jb in 0..s.nb - 1 {
                    coords[s.joint_index(ia, ib, ja, jb)] = table.get(ia, ib, ja, jb).clone();
                }
            }
        }
    }
    CgVector::new(s, coords)
}

/// Reconstruct the unique no-signalling table with the given CG coordinates.
///
/// Entries can come out negative when `v` is not a behavior.
pub fn cg_to_full<T: Scalar>(v: &CgVector<T>) -> FullTable<T> {
    FullTable::from_fn(v.scenario, |ia, ib, ja, jb| {
        v.full_probability(ia, ib, ja, jb)
    })
}
