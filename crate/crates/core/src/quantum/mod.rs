//! Quantum behaviors: states, projective measurements, Bell operators and
//! numerical maximization of Bell expressions.
//!
//! Everything is generic over a real field `T` (in practice `f64`);
//! matrices are complex `nalgebra` matrices.

mod horodecki;
mod scans;
mod seesaw;
mod states;

use nalgebra::{Complex, ComplexField, DMatrix, DVector, RealField};

use crate::error::{Error, Result};
use crate::polytope::Inequality;
use crate::scalar::Scalar;
use crate::scenario::{FullTable, Scenario};

pub use horodecki::{correlation_matrix, horodecki_chsh};
pub use scans::{
    fig1_grid, fig1_scan, onset_by_bisection, orbit_max_value, planar_singlet_measurements,
    sharing_measurements, sigma_measurements, Fig1Row, OnsetOptions,
};
pub use seesaw::{
    seesaw_maximize, seesaw_maximize_on_state, MeasurementClass, SeesawOptions, SeesawResult,
};
pub use states::{
    isotropic, lambda_chsh, maximally_entangled, partial_trace, rho_theta, sharing_state,
    sharing_state_vector, sigma_state, singlet, swap_subsystems, werner,
};

/// Complex square matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Complex column vector.
pub type CVector<T> = DVector<Complex<T>>;

pub(crate) fn real<T: RealField>(x: f64) -> T {
    nalgebra::convert(x)
}

pub(crate) fn cx<T: RealField>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

fn tolerance<T: RealField + Copy>(target: f64) -> T {
    let floor = T::default_epsilon() * real(1000.0);
    let t = real::<T>(target);
    if t > floor {
        t
    } else {
        floor
    }
}

fn max_abs<T: RealField + Copy>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = z.modulus();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen<T: RealField + Copy>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let herm = (m + m.adjoint()) * Complex::new(real::<T>(0.5), T::zero());
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: RealField> {
    m: CMatrix<T>,
}

impl<T: RealField + Copy> DensityMatrix<T> {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::ShapeMismatch("density matrix must be square".into()));
        }
        let tol = tolerance::<T>(1e-12);
        if max_abs(&(&m - m.adjoint())) > tol {
            return Err(Error::ParameterOutOfRange("matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::ParameterOutOfRange(format!("trace is {tr}, not 1")));
        }
        let (vals, _) = hermitian_eigen(&m);
        if vals[0] < -tolerance::<T>(1e-10) {
            return Err(Error::ParameterOutOfRange(format!(
                "matrix has negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { m })
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn from_pure(psi: &CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if norm <= T::default_epsilon() {
            return Err(Error::ParameterOutOfRange("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    /// Convex combination of states with weights summing to one.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::ShapeMismatch("empty mixture".into()));
        };
        let d = first.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, rho) in parts {
            if rho.dim() != d {
                return Err(Error::ShapeMismatch(
                    "mixture of different dimensions".into(),
                ));
            }
            if *w < T::zero() {
                return Err(Error::ParameterOutOfRange("negative mixture weight".into()));
            }
            m += rho.m.scale(*w);
        }
        Self::new(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            m: CMatrix::identity(d, d).unscale(real::<T>(d as f64)),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    /// `Re Tr(op ρ)`.
    pub fn expectation(&self, op: &CMatrix<T>) -> T {
        (op * &self.m).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigen(&self.m).0
    }
}

/// A projective measurement: orthogonal projectors summing to the
/// identity. Zero and higher-rank projectors are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement<T: RealField> {
    projectors: Vec<CMatrix<T>>,
}

impl<T: RealField + Copy> ProjectiveMeasurement<T> {
    pub fn new(projectors: Vec<CMatrix<T>>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::ShapeMismatch("measurement without outcomes".into()));
        };
        let d = first.nrows();
        let tol = tolerance::<T>(1e-10);
        let mut sum = CMatrix::zeros(d, d);
        for p in &projectors {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::ShapeMismatch("projectors of different sizes".into()));
            }
            if max_abs(&(p * p - p)) > tol || max_abs(&(p - p.adjoint())) > tol {
                return Err(Error::ParameterOutOfRange(
                    "operator is not a projector".into(),
                ));
            }
            sum += p;
        }
        if max_abs(&(sum - CMatrix::identity(d, d))) > tol {
            return Err(Error::ParameterOutOfRange(
                "projectors do not sum to the identity".into(),
            ));
        }
        Ok(ProjectiveMeasurement { projectors })
    }

    /// Qubit measurement whose outcome 0 projects onto the Bloch direction
    /// with polar angle `theta` from the z axis and azimuth `phi` from the
    /// x axis; outcome 1 is the orthogonal complement.
    pub fn qubit(theta: T, phi: T) -> Self {
        let p0 = bloch_projector(theta, phi);
        let p1 = CMatrix::identity(2, 2) - &p0;
        ProjectiveMeasurement {
            projectors: vec![p0, p1],
        }
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn projectors(&self) -> &[CMatrix<T>] {
        &self.projectors
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors
            .iter()
            .map(|p| p.trace().re.round())
            .map(|r| r.to_subset().unwrap_or(0.0) as usize)
            .collect()
    }
}

/// `(I + n·σ)/2` with `n = (sin θ cos φ, sin θ sin φ, cos θ)`.
pub fn bloch_projector<T: RealField + Copy>(theta: T, phi: T) -> CMatrix<T> {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    let half = real::<T>(0.5);
    let (nx, ny, nz) = (st * cp, st * sp, ct);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(half * (T::one() + nz), T::zero()),
            Complex::new(half * nx, -half * ny),
            Complex::new(half * nx, half * ny),
            Complex::new(half * (T::one() - nz), T::zero()),
        ],
    )
}

/// Pauli matrices `x`, `y`, `z`.
pub fn paulis<T: RealField + Copy>() -> [CMatrix<T>; 3] {
    let (o, z, i) = (cx::<T>(1.0, 0.0), cx::<T>(0.0, 0.0), cx::<T>(0.0, 1.0));
    [
        CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// One projective measurement per setting for each party.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet<T: RealField> {
    a: Vec<ProjectiveMeasurement<T>>,
    b: Vec<ProjectiveMeasurement<T>>,
}

impl<T: RealField + Copy> MeasurementSet<T> {
    pub fn new(a: Vec<ProjectiveMeasurement<T>>, b: Vec<ProjectiveMeasurement<T>>) -> Result<Self> {
        let consistent = |v: &[ProjectiveMeasurement<T>]| {
            v.first().is_some_and(|m0| {
                v.iter()
                    .all(|m| m.dim() == m0.dim() && m.outcomes() == m0.outcomes())
            })
        };
        if !consistent(&a) || !consistent(&b) {
            return Err(Error::ShapeMismatch(
                "each party needs measurements of equal size and outcome count".into(),
            ));
        }
        Ok(MeasurementSet { a, b })
    }

    pub fn a(&self) -> &[ProjectiveMeasurement<T>] {
        &self.a
    }

    pub fn b(&self) -> &[ProjectiveMeasurement<T>] {
        &self.b
    }

    /// Local dimensions `(dA, dB)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.a[0].dim(), self.b[0].dim())
    }

    /// Scenario probed by these measurements.
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(
            self.a.len(),
            self.b.len(),
            self.a[0].outcomes(),
            self.b[0].outcomes(),
        )
    }

    /// Born-rule table `P(ja,jb|ia,ib) = Tr[(Π_ja ⊗ Π_jb) ρ]`.
    pub fn born_table(&self, rho: &DensityMatrix<T>) -> Result<FullTable<T>>
    where
        T: Scalar,
    {
        let (da, db) = self.dims();
        if rho.dim() != da * db {
            return Err(Error::ShapeMismatch(format!(
                "state of dimension {} for local dimensions {da}x{db}",
                rho.dim()
            )));
        }
        Ok(FullTable::from_fn(self.scenario()?, |ia, ib, ja, jb| {
            rho.expectation(&self.a[ia].projectors[ja].kronecker(&self.b[ib].projectors[jb]))
        }))
    }
}

/// Hermitian operator whose expectation is the value of a Bell expression.
#[derive(Clone, Debug)]
pub struct BellOperator<T: RealField> {
    scenario: Scenario,
    op: CMatrix<T>,
}

impl<T: RealField + Copy> BellOperator<T> {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.op
    }

    /// `Tr(B ρ)`.
    pub fn value(&self, rho: &DensityMatrix<T>) -> Result<T> {
        if rho.dim() != self.op.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "state of dimension {} for an operator of dimension {}",
                rho.dim(),
                self.op.nrows()
            )));
        }
        Ok(rho.expectation(&self.op))
    }

    /// Largest eigenvalue and a matching unit eigenvector.
    pub fn top_eigen(&self) -> (T, CVector<T>) {
        let (vals, vecs) = hermitian_eigen(&self.op);
        let k = vals.len() - 1;
        (vals[k], vecs.column(k).into_owned())
    }
}

/// `B = Σ cA Π^A⊗I + Σ cB I⊗Π^B + Σ cJ Π^A⊗Π^B` for the CG coefficients
/// of `q`.
pub fn bell_operator<T: RealField + Copy>(
    q: &Inequality,
    m: &MeasurementSet<T>,
) -> Result<BellOperator<T>> {
    let s = q.scenario();
    if m.scenario()? != s {
        return Err(Error::ShapeMismatch(format!(
            "measurements probe {}, inequality lives in {s}",
            m.scenario()?
        )));
    }
    let (da, db) = m.dims();
    let (ia_id, ib_id) = (
        CMatrix::<T>::identity(da, da),
        CMatrix::<T>::identity(db, db),
    );
    let c = q.coeffs();
    let w = |v: i64| Complex::new(real::<T>(v as f64), T::zero());
    let mut op = CMatrix::zeros(da * db, da * db);
    for ia in 0..s.ma() {
        for ja in 0..s.na() - 1 {
            let v = c[s.a_marginal_index(ia, ja)];
            if v != 0 {
                op += m.a[ia].projectors[ja].kronecker(&ib_id) * w(v);
            }
        }
    }
    for ib in 0..s.mb() {
        for jb in 0..s.nb() - 1 {
            let v = c[s.b_marginal_index(ib, jb)];
            if v != 0 {
                op += ia_id.kronecker(&m.b[ib].projectors[jb]) * w(v);
            }
        }
    }
    for ia in 0..s.ma() {
        for ib in 0..s.mb() {
            for ja in 0..s.na() - 1 {
                for jb in 0..s.nb() - 1 {
                    let v = c[s.joint_index(ia, ib, ja, jb)];
                    if v != 0 {
                        op += m.a[ia].projectors[ja].kronecker(&m.b[ib].projectors[jb]) * w(v);
                    }
                }
            }
        }
    }
    Ok(BellOperator { scenario: s, op })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make, FamilyId};
    use crate::scenario::full_to_cg;
    use std::f64::consts::PI;

    #[test]
    fn commuting_measurements_stay_local() {
        let q = make(FamilyId::Chsh).unwrap();
        let z = ProjectiveMeasurement::<f64>::qubit(0.0, 0.0);
        let m = MeasurementSet::new(vec![z.clone(), z.clone()], vec![z.clone(), z]).unwrap();
        let b = bell_operator(&q, &m).unwrap();
        for rho in [
            singlet::<f64>(),
            werner(0.3).unwrap(),
            sigma_state().unwrap(),
        ] {
            assert!(b.value(&rho).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn operator_matches_behavior() {
        let q = make(FamilyId::I3322).unwrap();
        let m = planar_singlet_measurements::<f64>();
        let rho = sigma_state::<f64>().unwrap();
        let table = m.born_table(&rho).unwrap();
        let cg = full_to_cg(&table).unwrap();
        let direct = q.evaluate(&cg);
        let via_op = bell_operator(&q, &m).unwrap().value(&rho).unwrap();
        assert!((direct - via_op).abs() < 1e-10);
    }

    #[test]
    fn planar_angles_reach_a_quarter() {
        let q = make(FamilyId::I3322).unwrap();
        let m = planar_singlet_measurements::<f64>();
        let v = bell_operator(&q, &m).unwrap().value(&singlet()).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let bad = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[cx(1.0, 0.0), cx(0.5, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)],
        );
        assert!(DensityMatrix::new(bad).is_err());
        let neg = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[cx(1.5, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-0.5, 0.0)],
        );
        assert!(DensityMatrix::new(neg).is_err());
        let p = bloch_projector::<f64>(PI / 3.0, 0.2);
        assert!(ProjectiveMeasurement::new(vec![p.clone(), p]).is_err());
        let m =
            ProjectiveMeasurement::new(vec![CMatrix::<f64>::identity(2, 2), CMatrix::zeros(2, 2)])
                .unwrap();
        assert_eq!(m.ranks(), vec![2, 0]);
    }

    #[test]
    fn bloch_projector_points_along_n() {
        let [sx, sy, sz] = paulis::<f64>();
        let (t, f) = (1.1, -0.7);
        let p = bloch_projector(t, f);
        let n = [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
        for (s, ni) in [sx, sy, sz].iter().zip(n) {
            assert!(((s * &p).trace().re - ni).abs() < 1e-12);
        }
    }
}
