use nalgebra::{Matrix3, RealField};

use super::{paulis, DensityMatrix};
use crate::error::{Error, Result};

/// `T_ij = Tr[ρ (σ_i ⊗ σ_j)]` for a two-qubit state.
pub fn correlation_matrix<T: RealField + Copy>(rho: &DensityMatrix<T>) -> Result<Matrix3<T>> {
    if rho.dim() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "correlation matrix needs two qubits, got dimension {}",
            rho.dim()
        )));
    }
    let s = paulis::<T>();
    Ok(Matrix3::from_fn(|i, j| {
        rho.expectation(&s[i].kronecker(&s[j]))
    }))
}

/// Maximal CHSH value of a two-qubit state over all projective qubit
/// measurements, in the probability form whose local bound is 0.
///
/// With `t1 ≥ t2` the two largest eigenvalues of `TᵀT` this is
/// `(√(t1 + t2) − 1)/2`.
pub fn horodecki_chsh<T: RealField + Copy>(rho: &DensityMatrix<T>) -> Result<T> {
    let t = correlation_matrix(rho)?;
    let mut ev: Vec<T> = (t.transpose() * t)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let sum = ev[0] + ev[1];
    let root = if sum > T::zero() {
        sum.sqrt()
    } else {
        T::zero()
    };
    Ok((root - T::one()) * nalgebra::convert(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{singlet, werner};

    #[test]
    fn singlet_reaches_tsirelson() {
        let v = horodecki_chsh(&singlet::<f64>()).unwrap();
        assert!((v - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        let t = correlation_matrix(&singlet::<f64>()).unwrap();
        assert!((t + Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn werner_threshold() {
        let p = 1.0 / 2f64.sqrt();
        assert!(horodecki_chsh(&werner(p).unwrap()).unwrap().abs() < 1e-12);
        assert!(horodecki_chsh(&werner(p + 1e-3).unwrap()).unwrap() > 0.0);
    }
}
