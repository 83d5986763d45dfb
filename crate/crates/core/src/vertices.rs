//! Deterministic local strategies: the vertices of the local polytope.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{CgVector, Scenario};

/// Default cap on the number of vertices materialized at once.
pub const DEFAULT_VERTEX_CAP: u128 = 10_000_000;

/// One outcome per setting for each party.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    scenario: Scenario,
    a_out: Vec<usize>,
    b_out: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(scenario: Scenario, a_out: Vec<usize>, b_out: Vec<usize>) -> Result<Self> {
        if a_out.len() != scenario.ma() || b_out.len() != scenario.mb() {
            return Err(Error::ShapeMismatch(format!(
                "strategy for {scenario} needs {} A and {} B outcomes",
                scenario.ma(),
                scenario.mb()
            )));
        }
        if a_out.iter().any(|&o| o >= scenario.na()) || b_out.iter().any(|&o| o >= scenario.nb()) {
            return Err(Error::ParameterOutOfRange(
                "outcome index out of range".into(),
            ));
        }
        Ok(DeterministicStrategy {
            scenario,
            a_out,
            b_out,
        })
    }

    /// Strategy at position `index` of the lexicographic vertex order.
    pub fn from_index(scenario: Scenario, mut index: usize) -> Self {
        let mut b_out = vec![0; scenario.mb()];
        for slot in b_out.iter_mut().rev() {
            *slot = index % scenario.nb();
            index /= scenario.nb();
        }
        let mut a_out = vec![0; scenario.ma()];
        for slot in a_out.iter_mut().rev() {
            *slot = index % scenario.na();
            index /= scenario.na();
        }
        DeterministicStrategy {
            scenario,
            a_out,
            b_out,
        }
    }

    /// Position in the lexicographic order of `(a_out, b_out)`.
    pub fn index(&self) -> usize {
        let a = self
            .a_out
            .iter()
            .fold(0usize, |acc, &o| acc * self.scenario.na() + o);
        self.b_out
            .iter()
            .fold(a, |acc, &o| acc * self.scenario.nb() + o)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn a_out(&self) -> &[usize] {
        &self.a_out
    }

    pub fn b_out(&self) -> &[usize] {
        &self.b_out
    }

    /// `P(ja,jb|ia,ib)` of the induced product behavior.
    pub fn probability(&self, ia: usize, ib: usize, ja: usize, jb: usize) -> bool {
        self.a_out[ia] == ja && self.b_out[ib] == jb
    }

    /// CG coordinates as 0/1 integers.
    pub fn cg_coords(&self) -> Vec<i64> {
        let s = self.scenario;
        let mut v = vec![0i64; s.cg_dimension()];
        self.for_each_unit_coordinate(|i| v[i] = 1);
        v
    }

    /// Calls `f` on every CG coordinate equal to 1 at this vertex.
    pub fn for_each_unit_coordinate(&self, mut f: impl FnMut(usize)) {
        let s = self.scenario;
        for (ia, &a) in self.a_out.iter().enumerate() {
            if a + 1 < s.na() {
                f(s.a_marginal_index(ia, a));
            }
        }
        for (ib, &b) in self.b_out.iter().enumerate() {
            if b + 1 < s.nb() {
                f(s.b_marginal_index(ib, b));
            }
        }
        for (ia, &a) in self.a_out.iter().enumerate() {
            if a + 1 == s.na() {
                continue;
            }
            for (ib, &b) in self.b_out.iter().enumerate() {
                if b + 1 < s.nb() {
                    f(s.joint_index(ia, ib, a, b));
                }
            }
        }
    }

    pub fn to_cg<T: Scalar>(&self) -> CgVector<T> {
        let coords = self.cg_coords().into_iter().map(T::from_i64).collect();
        CgVector::new(self.scenario, coords).expect("length matches by construction")
    }

    /// `coeffs · v` without materializing the CG vector.
    pub fn dot(&self, coeffs: &[i64]) -> i64 {
        let mut acc = 0i64;
        self.for_each_unit_coordinate(|i| acc += coeffs[i]);
        acc
    }
}

/// All `nA^mA · nB^mB` strategies in lexicographic order, capped at
/// [`DEFAULT_VERTEX_CAP`].
pub fn enumerate_vertices(s: Scenario) -> Result<Vec<DeterministicStrategy>> {
    enumerate_vertices_capped(s, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_vertices_capped(s: Scenario, cap: u128) -> Result<Vec<DeterministicStrategy>> {
    let count = check_vertex_count(s, cap)?;
    Ok((0..count)
        .map(|k| DeterministicStrategy::from_index(s, k))
        .collect())
}

pub(crate) fn check_vertex_count(s: Scenario, cap: u128) -> Result<usize> {
    match s.vertex_count() {
        Some(c) if c <= cap => Ok(c as usize),
        Some(c) => Err(Error::Resource(format!(
            "{s} has {c} vertices, cap is {cap}"
        ))),
        None => Err(Error::Resource(format!("{s} vertex count overflows"))),
    }
}

/// Vertex CG vectors as integer rows, in lexicographic order.
pub fn vertex_matrix(s: Scenario) -> Result<Vec<Vec<i64>>> {
    Ok(enumerate_vertices(s)?
        .iter()
        .map(|d| d.cg_coords())
        .collect())
}
