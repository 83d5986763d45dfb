use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::Inequality;
use crate::error::{Error, Result};
use crate::linalg::{inverse, EchelonBasis};
use crate::scalar::{Rational, Scalar};
use crate::scenario::Scenario;
use crate::vertices::{check_vertex_count, DeterministicStrategy, DEFAULT_VERTEX_CAP};

/// Recovers CG coefficients from values prescribed on every vertex.
///
/// Uses the lexicographically first affinely independent vertices as a
/// basis; the fitted function is then checked against all vertices.
#[derive(Debug)]
pub struct AffineFit {
    scenario: Scenario,
    basis: Vec<usize>,
    inverse: Vec<Vec<Rational>>,
    vertices: Vec<Vec<i64>>,
}

impl AffineFit {
    /// Shared, lazily built fit for a scenario.
    pub fn for_scenario(s: Scenario) -> Result<Arc<AffineFit>> {
        static CACHE: OnceLock<Mutex<HashMap<Scenario, Arc<AffineFit>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(fit) = cache.lock().expect("fit cache poisoned").get(&s) {
            return Ok(fit.clone());
        }
        let fit = Arc::new(AffineFit::new(s)?);
        cache
            .lock()
            .expect("fit cache poisoned")
            .insert(s, fit.clone());
        Ok(fit)
    }

    pub fn new(s: Scenario) -> Result<Self> {
        let n = check_vertex_count(s, DEFAULT_VERTEX_CAP)?;
        let dim = s.cg_dimension() + 1;
        let vertices: Vec<Vec<i64>> = (0..n)
            .map(|k| DeterministicStrategy::from_index(s, k).cg_coords())
            .collect();
        let homog = |v: &[i64]| -> Vec<Rational> {
            std::iter::once(1)
                .chain(v.iter().copied())
                .map(Rational::from_i64)
                .collect()
        };
        let mut echelon = EchelonBasis::new(dim);
        let mut basis = Vec::with_capacity(dim);
        for (k, v) in vertices.iter().enumerate() {
            if echelon.insert(homog(v)) {
                basis.push(k);
                if basis.len() == dim {
                    break;
                }
            }
        }
        let w: Vec<Vec<Rational>> = basis.iter().map(|&k| homog(&vertices[k])).collect();
        let inverse = inverse(&w).expect("vertices span the CG space");
        Ok(AffineFit {
            scenario: s,
            basis,
            inverse,
            vertices,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Finds `c`, `c0` and a positive `scale` with
    /// `c0 + c · v_k = scale · values[k]` for every vertex `k`.
    pub fn fit(&self, values: &[i64]) -> Result<(Vec<i64>, i64, i64)> {
        if values.len() != self.vertices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} vertex values for {}, expected {}",
                values.len(),
                self.scenario,
                self.vertices.len()
            )));
        }
        let rhs: Vec<Rational> = self
            .basis
            .iter()
            .map(|&k| Rational::from_i64(values[k]))
            .collect();
        let x: Vec<Rational> = self
            .inverse
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&rhs)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect();
        let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints = x
            .iter()
            .map(|v| {
                (v * Rational::from_integer(lcm.clone()))
                    .to_integer()
                    .to_i64()
            })
            .collect::<Option<Vec<i64>>>()
            .ok_or(Error::Overflow("affine fit"))?;
        let scale = lcm.to_i64().ok_or(Error::Overflow("affine fit"))?;
        let (c0, c) = (ints[0], ints[1..].to_vec());
        for (v, &val) in self.vertices.iter().zip(values) {
            let lhs = c0 + v.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>();
            if lhs != scale * val {
                return Err(Error::ShapeMismatch(
                    "vertex values are not an affine function of the CG coordinates".into(),
                ));
            }
        }
        Ok((c, c0, scale))
    }

    /// The inequality whose slack at each vertex is proportional to `slack`.
    pub fn inequality_from_slack(&self, slack: &[i64]) -> Result<Inequality> {
        let (c, c0, _) = self.fit(slack)?;
        Inequality::new(self.scenario, c.into_iter().map(|x| -x).collect(), c0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_round_trip() {
        let s = Scenario::new(2, 3, 2, 3).unwrap();
        let fit = AffineFit::for_scenario(s).unwrap();
        let mut coeffs = vec![0; s.cg_dimension()];
        coeffs[0] = 2;
        coeffs[5] = -3;
        coeffs[s.cg_dimension() - 1] = 1;
        let q = Inequality::new(s, coeffs, 7).unwrap();
        let back = fit
            .inequality_from_slack(&q.slack_vector().unwrap())
            .unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn non_affine_values_are_rejected() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        let fit = AffineFit::for_scenario(s).unwrap();
        assert_eq!(fit.fit(&[1; 16]).unwrap(), (vec![0; 8], 1, 1));
        let mut vals = vec![0; 16];
        vals[0] = 1;
        assert!(fit.fit(&vals).is_err());
    }
}
