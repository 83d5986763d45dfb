//! The local polytope: inequalities, facet enumeration and facet checks.

mod dd;
mod fit;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::time::Duration;

use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::EchelonBasis;
use crate::scalar::{Fp, Rational, Scalar};
use crate::scenario::{CgVector, Scenario};
use crate::vertices::{check_vertex_count, DeterministicStrategy, DEFAULT_VERTEX_CAP};

pub use dd::{facets_of_points, HullDescription, LinearConstraint};
pub use fit::AffineFit;

/// Environment variable overriding the enumeration wall-clock cap, in seconds.
pub const CAP_SECONDS_ENV: &str = "BELLSCOPE_CAP_SECONDS";

/// An integer Bell expression `coeffs · v <= bound` over CG coordinates.
///
/// Labels are metadata: equality, ordering and hashing look only at the
/// scenario, the coefficients and the bound.
#[derive(Clone, Debug)]
pub struct Inequality {
    scenario: Scenario,
    coeffs: Vec<i64>,
    bound: i64,
    label: Option<String>,
}

impl Inequality {
    /// Builds an inequality and divides out the common gcd of coefficients
    /// and bound.
    pub fn new(scenario: Scenario, coeffs: Vec<i64>, bound: i64) -> Result<Self> {
        if coeffs.len() != scenario.cg_dimension() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {scenario}, expected {}",
                coeffs.len(),
                scenario.cg_dimension()
            )));
        }
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::ZeroInequality);
        }
        let g = coeffs
            .iter()
            .fold(bound.unsigned_abs(), |g, &c| g.gcd(&c.unsigned_abs()));
        let g = g as i64;
        Ok(Inequality {
            scenario,
            coeffs: coeffs.into_iter().map(|c| c / g).collect(),
            bound: bound / g,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn set_label(&mut self, label: Option<String>) {
        self.label = label;
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// `coeffs · v` at a deterministic strategy.
    pub fn value_at(&self, d: &DeterministicStrategy) -> i64 {
        d.dot(&self.coeffs)
    }

    /// `coeffs · v` at an arbitrary point.
    pub fn evaluate<T: Scalar>(&self, v: &CgVector<T>) -> T {
        v.dot_i64(&self.coeffs)
    }

    /// `bound - coeffs · v` at every vertex, in vertex order.
    pub fn slack_vector(&self) -> Result<Vec<i64>> {
        let n = check_vertex_count(self.scenario, DEFAULT_VERTEX_CAP)?;
        Ok((0..n)
            .into_par_iter()
            .map(|k| {
                self.bound - self.value_at(&DeterministicStrategy::from_index(self.scenario, k))
            })
            .collect())
    }

    fn key(&self) -> (Scenario, &[i64], i64) {
        (self.scenario, &self.coeffs, self.bound)
    }
}

impl PartialEq for Inequality {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Inequality {}

impl Hash for Inequality {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Inequality {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Inequality {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            match (first, c < 0) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if c.abs() != 1 {
                write!(f, "{}", c.abs())?;
            }
            f.write_str(&self.scenario.coordinate_name(i))?;
            first = false;
        }
        write!(f, " <= {}", self.bound)
    }
}

/// Tight vertices and affine rank of an inequality's face.
#[derive(Clone, Debug)]
pub struct FacetCertificate {
    pub inequality: Inequality,
    pub tight_vertex_indices: Vec<usize>,
    /// Affine dimension of the tight set; `-1` when nothing is tight.
    pub affine_rank: isize,
}

impl FacetCertificate {
    pub fn is_facet(&self) -> bool {
        self.affine_rank == self.inequality.scenario.cg_dimension() as isize - 1
    }
}

/// Largest value of `coeffs · v` over deterministic strategies.
pub fn lhv_bound(coeffs: &[i64], s: Scenario) -> Result<i64> {
    if coeffs.len() != s.cg_dimension() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for {s}, expected {}",
            coeffs.len(),
            s.cg_dimension()
        )));
    }
    let n = check_vertex_count(s, DEFAULT_VERTEX_CAP)?;
    Ok((0..n)
        .into_par_iter()
        .map(|k| DeterministicStrategy::from_index(s, k).dot(coeffs))
        .max()
        .expect("scenarios have at least one vertex"))
}

/// Checks validity and computes the face dimension of `q`.
pub fn is_facet(q: &Inequality) -> Result<FacetCertificate> {
    let s = q.scenario;
    let n = check_vertex_count(s, DEFAULT_VERTEX_CAP)?;
    let values: Vec<i64> = (0..n)
        .into_par_iter()
        .map(|k| q.value_at(&DeterministicStrategy::from_index(s, k)))
        .collect();
    if let Some((vertex, &value)) = values.iter().enumerate().find(|(_, &v)| v > q.bound) {
        return Err(Error::InvalidInequality {
            vertex,
            value,
            bound: q.bound,
        });
    }
    let tight: Vec<usize> = (0..n).filter(|&k| values[k] == q.bound).collect();
    let d = s.cg_dimension();
    let rows = || {
        tight.iter().map(move |&k| {
            let mut row = vec![1i64];
            row.extend(DeterministicStrategy::from_index(s, k).cg_coords());
            row
        })
    };
    // the tight set lies in a hyperplane, so its homogenized rank is at most d
    let mut fp = EchelonBasis::<Fp>::new(d + 1);
    for row in rows() {
        fp.insert(row.into_iter().map(Fp::from_i64).collect());
        if fp.rank() == d {
            break;
        }
    }
    let rank = if fp.rank() == d {
        d
    } else {
        let mut exact = EchelonBasis::<Rational>::new(d + 1);
        for row in rows() {
            exact.insert(row.into_iter().map(Rational::from_i64).collect());
            if exact.rank() == d {
                break;
            }
        }
        exact.rank()
    };
    Ok(FacetCertificate {
        inequality: q.clone(),
        tight_vertex_indices: tight,
        affine_rank: rank as isize - 1,
    })
}

/// Limits for facet enumeration.
#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    pub time_cap: Option<Duration>,
    pub max_rays: usize,
    pub max_vertices: u128,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            time_cap: Some(Duration::from_secs(3600)),
            max_rays: 4_000_000,
            max_vertices: 4096,
        }
    }
}

impl EnumerationOptions {
    /// Defaults, with the time cap taken from [`CAP_SECONDS_ENV`] when set.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(secs) = std::env::var(CAP_SECONDS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            opts.time_cap = Some(Duration::from_secs_f64(secs));
        }
        opts
    }
}

/// All facets of the local polytope of `s`, sorted.
pub fn enumerate_facets(s: Scenario) -> Result<Vec<Inequality>> {
    enumerate_facets_with(s, &EnumerationOptions::from_env())
}

pub fn enumerate_facets_with(s: Scenario, opts: &EnumerationOptions) -> Result<Vec<Inequality>> {
    let n = check_vertex_count(s, opts.max_vertices)?;
    let points: Vec<Vec<i64>> = (0..n)
        .map(|k| DeterministicStrategy::from_index(s, k).cg_coords())
        .collect();
    let hull = facets_of_points(&points, opts)?;
    debug_assert!(hull.equations.is_empty());
    let mut out = hull
        .facets
        .into_iter()
        .map(|c| Inequality::new(s, c.coeffs, c.rhs))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}
