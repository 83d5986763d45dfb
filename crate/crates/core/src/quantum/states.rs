use nalgebra::{Complex, RealField};
use num_traits::Zero;

use super::{horodecki_chsh, real, CMatrix, CVector, DensityMatrix};
use crate::error::{Error, Result};

fn ket<T: RealField + Copy>(amps: &[f64]) -> CVector<T> {
    CVector::from_iterator(
        amps.len(),
        amps.iter().map(|&a| Complex::new(real(a), T::zero())),
    )
}

fn check_weight<T: RealField + Copy>(p: T, what: &str) -> Result<()> {
    if p < T::zero() || p > T::one() {
        return Err(Error::ParameterOutOfRange(format!(
            "{what} = {p} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet<T: RealField + Copy>() -> DensityMatrix<T> {
    DensityMatrix::from_pure(&ket(&[0.0, 1.0, -1.0, 0.0])).expect("singlet is a valid state")
}

/// `Σ_k |kk⟩/√d`.
pub fn maximally_entangled<T: RealField + Copy>(d: usize) -> DensityMatrix<T> {
    let mut amps = vec![0.0; d * d];
    for k in 0..d {
        amps[k * d + k] = 1.0;
    }
    DensityMatrix::from_pure(&ket(&amps)).expect("nonzero vector")
}

/// `p·singlet + (1 − p)·I/4`.
pub fn werner<T: RealField + Copy>(p: T) -> Result<DensityMatrix<T>> {
    check_weight(p, "visibility")?;
    DensityMatrix::mixture(&[
        (p, &singlet()),
        (T::one() - p, &DensityMatrix::maximally_mixed(4)),
    ])
}

/// `p·|Φ_d⟩⟨Φ_d| + (1 − p)·I/d²` on two qudits.
pub fn isotropic<T: RealField + Copy>(d: usize, p: T) -> Result<DensityMatrix<T>> {
    check_weight(p, "visibility")?;
    DensityMatrix::mixture(&[
        (p, &maximally_entangled(d)),
        (T::one() - p, &DensityMatrix::maximally_mixed(d * d)),
    ])
}

/// `0.85·|φ⟩⟨φ| + 0.15·|01⟩⟨01|` with `|φ⟩ = (2|00⟩ + |11⟩)/√5`.
pub fn sigma_state<T: RealField + Copy>() -> Result<DensityMatrix<T>> {
    let phi = DensityMatrix::from_pure(&ket(&[2.0, 0.0, 0.0, 1.0]))?;
    let flip = DensityMatrix::from_pure(&ket(&[0.0, 1.0, 0.0, 0.0]))?;
    DensityMatrix::mixture(&[(real(0.85), &phi), (real(0.15), &flip)])
}

/// `λ·|ψ_θ⟩⟨ψ_θ| + (1 − λ)·|01⟩⟨01|` with `|ψ_θ⟩ = cos θ|00⟩ + sin θ|11⟩`.
pub fn rho_theta<T: RealField + Copy>(theta: T, lambda: T) -> Result<DensityMatrix<T>> {
    check_weight(lambda, "lambda")?;
    let psi = CVector::from_vec(vec![
        Complex::new(theta.cos(), T::zero()),
        Complex::zero(),
        Complex::zero(),
        Complex::new(theta.sin(), T::zero()),
    ]);
    let pure = DensityMatrix::from_pure(&psi)?;
    let flip = DensityMatrix::from_pure(&ket(&[0.0, 1.0, 0.0, 0.0]))?;
    DensityMatrix::mixture(&[(lambda, &pure), (T::one() - lambda, &flip)])
}

/// The weight `λ` at which `rho_theta(θ, λ)` sits exactly on the CHSH
/// boundary, found by bisection on the optimal CHSH value.
pub fn lambda_chsh<T: RealField + Copy>(theta: T) -> Result<T> {
    let f = |l: T| -> Result<T> { horodecki_chsh(&rho_theta(theta, l)?) };
    let (mut lo, mut hi) = (real::<T>(0.5), T::one());
    if f(hi)? <= T::zero() {
        return Err(Error::ParameterOutOfRange(format!(
            "the pure state at theta = {theta} does not violate CHSH"
        )));
    }
    if f(lo)? > T::zero() {
        return Err(Error::ParameterOutOfRange(format!(
            "CHSH is already violated at lambda = 1/2 for theta = {theta}"
        )));
    }
    let tol = T::default_epsilon() * real(16.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * real(0.5);
        if f(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * real(0.5))
}

/// Three-qubit pure state `μ|000⟩ + √((1 − μ²)/2)(|110⟩ + |101⟩)`.
pub fn sharing_state_vector<T: RealField + Copy>(mu: T) -> Result<CVector<T>> {
    check_weight(mu, "mu")?;
    let side = ((T::one() - mu * mu) * real(0.5)).sqrt();
    let mut v = CVector::zeros(8);
    v[0] = Complex::new(mu, T::zero());
    v[0b110] = Complex::new(side, T::zero());
    v[0b101] = Complex::new(side, T::zero());
    Ok(v)
}

/// Density matrix of [`sharing_state_vector`].
pub fn sharing_state<T: RealField + Copy>(mu: T) -> Result<DensityMatrix<T>> {
    DensityMatrix::from_pure(&sharing_state_vector(mu)?)
}

/// The same state with the two subsystems exchanged: `S ρ S` for the swap
/// `S|i⟩|k⟩ = |k⟩|i⟩` on `C^da ⊗ C^db`.
pub fn swap_subsystems<T: RealField + Copy>(
    rho: &DensityMatrix<T>,
    da: usize,
    db: usize,
) -> Result<DensityMatrix<T>> {
    if da * db != rho.dim() {
        return Err(Error::ShapeMismatch(format!(
            "local dimensions {da}x{db} do not multiply to {}",
            rho.dim()
        )));
    }
    let m = rho.matrix();
    let idx = |r: usize| (r % da) * db + r / da;
    DensityMatrix::new(CMatrix::from_fn(da * db, da * db, |r, c| {
        m[(idx(r), idx(c))]
    }))
}

/// Partial trace keeping the subsystems listed in `keep` (in their
/// original order). `dims` gives every subsystem's dimension.
pub fn partial_trace<T: RealField + Copy>(
    rho: &DensityMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix<T>> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::ShapeMismatch(format!(
            "subsystem dimensions {dims:?} do not multiply to {}",
            rho.dim()
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ShapeMismatch(format!(
            "kept subsystems {keep:?} must be increasing indices below {}",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    let strides: Vec<usize> = (0..dims.len())
        .map(|k| dims[k + 1..].iter().product())
        .collect();
    let place = |subs: &[usize], mut idx: usize| -> usize {
        let mut out = 0;
        for &k in subs.iter().rev() {
            out += (idx % dims[k]) * strides[k];
            idx /= dims[k];
        }
        out
    };
    let m = rho.matrix();
    let out = CMatrix::from_fn(dk, dk, |r, c| {
        let (rb, cb) = (place(keep, r), place(keep, c));
        (0..dt).fold(Complex::zero(), |acc, t| {
            let off = place(&traced, t);
            acc + m[(rb + off, cb + off)]
        })
    });
    DensityMatrix::new(out)
}
