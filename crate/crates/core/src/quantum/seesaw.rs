use nalgebra::{Complex, ComplexField, RealField};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    bell_operator, hermitian_eigen, real, CMatrix, DensityMatrix, MeasurementSet,
    ProjectiveMeasurement,
};
use crate::error::{Error, Result};
use crate::polytope::Inequality;
use crate::scenario::Scenario;

/// Which measurements the optimizer may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementClass {
    /// Any projective measurement; projectors may have any rank,
    /// including zero.
    Projective,
    /// Every projector has rank one, so the local dimension must equal
    /// the number of outcomes.
    Rank1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// A sweep gaining less than this counts as stalled.
    pub tolerance: f64,
    /// Consecutive stalled sweeps that end a restart.
    pub stall_sweeps: usize,
    pub class: MeasurementClass,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions {
            restarts: 50,
            seed: 0,
            max_iterations: 500,
            tolerance: 1e-10,
            stall_sweeps: 3,
            class: MeasurementClass::Projective,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult<T: RealField> {
    pub value: T,
    pub state: DensityMatrix<T>,
    pub measurements: MeasurementSet<T>,
    /// Index of the restart that produced the optimum.
    pub restart: usize,
    /// Sweeps used by that restart.
    pub iterations: usize,
    pub converged_restarts: usize,
}

/// Maximizes the Bell expression of `q` over states of dimension
/// `dA·dB` and measurements of the chosen class.
///
/// Each restart alternates exact updates of Alice's measurements, Bob's
/// measurements and the state (the top eigenvector of the Bell operator),
/// so the value never decreases along a restart. Restarts run in parallel
/// from independent seeded streams; the result does not depend on the
/// thread count.
pub fn seesaw_maximize<T: RealField + Copy>(
    q: &Inequality,
    dims: (usize, usize),
    opts: &SeesawOptions,
) -> Result<SeesawResult<T>> {
    run_all(q, dims, None, opts)
}

/// Like [`seesaw_maximize`] with the state held fixed.
pub fn seesaw_maximize_on_state<T: RealField + Copy>(
    q: &Inequality,
    rho: &DensityMatrix<T>,
    dims: (usize, usize),
    opts: &SeesawOptions,
) -> Result<SeesawResult<T>> {
    if rho.dim() != dims.0 * dims.1 {
        return Err(Error::ShapeMismatch(format!(
            "state of dimension {} for local dimensions {}x{}",
            rho.dim(),
            dims.0,
            dims.1
        )));
    }
    run_all(q, dims, Some(rho), opts)
}

struct Outcome<T: RealField> {
    value: T,
    state: DensityMatrix<T>,
    a: Vec<Vec<CMatrix<T>>>,
    b: Vec<Vec<CMatrix<T>>>,
    iterations: usize,
    converged: bool,
}

fn to_f64<T: RealField + Copy>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

fn run_all<T: RealField + Copy>(
    q: &Inequality,
    (da, db): (usize, usize),
    fixed: Option<&DensityMatrix<T>>,
    opts: &SeesawOptions,
) -> Result<SeesawResult<T>> {
    let s = q.scenario();
    if opts.restarts == 0 {
        return Err(Error::ParameterOutOfRange(
            "at least one restart is needed".into(),
        ));
    }
    if da == 0 || db == 0 {
        return Err(Error::ShapeMismatch(
            "local dimensions must be positive".into(),
        ));
    }
    if opts.class == MeasurementClass::Rank1 && (da != s.na() || db != s.nb()) {
        return Err(Error::ShapeMismatch(format!(
            "rank-one measurements need local dimensions {}x{}, got {da}x{db}",
            s.na(),
            s.nb()
        )));
    }
    let outcomes: Vec<Outcome<T>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            Restart::new(q, da, db, opts).run(&mut rng, fixed)
        })
        .collect::<Result<_>>()?;

    let converged_restarts = outcomes.iter().filter(|o| o.converged).count();
    let (restart, best) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|x, y| if y.1.value > x.1.value { y } else { x })
        .expect("at least one restart");
    if converged_restarts == 0 {
        return Err(Error::NonConvergence {
            iterations: opts.max_iterations,
            best: to_f64(best.value),
        });
    }
    let wrap = |ms: Vec<Vec<CMatrix<T>>>| -> Result<Vec<ProjectiveMeasurement<T>>> {
        ms.into_iter().map(ProjectiveMeasurement::new).collect()
    };
    Ok(SeesawResult {
        value: best.value,
        state: best.state,
        measurements: MeasurementSet::new(wrap(best.a)?, wrap(best.b)?)?,
        restart,
        iterations: best.iterations,
        converged_restarts,
    })
}

fn haar_unitary<T: RealField + Copy>(d: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::<T>::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(real(re * scale), real(im * scale))
    });
    let qr = z.qr();
    let (mut qm, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rkk = r[(k, k)];
        let m = rkk.modulus();
        if m > T::zero() {
            let phase = rkk.unscale(m);
            let mut col = qm.column_mut(k);
            col *= phase;
        }
    }
    qm
}

fn outer<T: RealField + Copy>(v: &CMatrix<T>, cols: &[usize]) -> CMatrix<T> {
    let d = v.nrows();
    let mut p = CMatrix::zeros(d, d);
    for &c in cols {
        let col = v.column(c);
        p += col * col.adjoint();
    }
    p
}

fn random_measurement<T: RealField + Copy>(
    d: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<CMatrix<T>> {
    let u = haar_unitary::<T>(d, rng);
    (0..n)
        .map(|j| outer(&u, &(j..d).step_by(n).collect::<Vec<_>>()))
        .collect()
}

/// `Tr_B[(I ⊗ O) ρ]`.
fn contract_b<T: RealField + Copy>(
    rho: &CMatrix<T>,
    o: &CMatrix<T>,
    da: usize,
    db: usize,
) -> CMatrix<T> {
    CMatrix::from_fn(da, da, |i, j| {
        let mut acc = Complex::zero();
        for k in 0..db {
            for l in 0..db {
                acc += o[(k, l)] * rho[(i * db + l, j * db + k)];
            }
        }
        acc
    })
}

/// `Tr_A[(O ⊗ I) ρ]`.
fn contract_a<T: RealField + Copy>(
    rho: &CMatrix<T>,
    o: &CMatrix<T>,
    da: usize,
    db: usize,
) -> CMatrix<T> {
    CMatrix::from_fn(db, db, |k, l| {
        let mut acc = Complex::zero();
        for i in 0..da {
            for j in 0..da {
                acc += o[(i, j)] * rho[(j * db + k, i * db + l)];
            }
        }
        acc
    })
}

/// Raises `Σ_j Re Tr(K_j Π_j)` by exact updates on pairs of outcomes:
/// inside the range of `Π_j + Π_k` the best split follows the spectrum of
/// `K_j − K_k`.
fn improve_measurement<T: RealField + Copy>(
    k: &[CMatrix<T>],
    proj: &mut [CMatrix<T>],
    class: MeasurementClass,
) {
    let n = proj.len();
    let eps = real::<T>(1e-14);
    for _ in 0..100 {
        let mut gained = T::zero();
        for j in 0..n {
            for l in j + 1..n {
                let p = &proj[j] + &proj[l];
                let (pv, pvec) = hermitian_eigen(&p);
                let range: Vec<usize> = (0..pv.len()).filter(|&c| pv[c] > real(0.5)).collect();
                if range.is_empty() {
                    continue;
                }
                let v = CMatrix::from_fn(p.nrows(), range.len(), |r, c| pvec[(r, range[c])]);
                let diff = &k[j] - &k[l];
                let compressed = v.adjoint() * &diff * &v;
                let (dv, dvec) = hermitian_eigen(&compressed);
                let r = dv.len();
                let take: Vec<usize> = match class {
                    MeasurementClass::Projective => (0..r).filter(|&c| dv[c] > T::zero()).collect(),
                    MeasurementClass::Rank1 => vec![r - 1],
                };
                let rest: Vec<usize> = (0..r).filter(|c| !take.contains(c)).collect();
                let basis = &v * &dvec;
                let new_j = outer(&basis, &take);
                let delta = ((&new_j - &proj[j]) * &diff).trace().re;
                if delta > eps {
                    proj[l] = outer(&basis, &rest);
                    proj[j] = new_j;
                    gained += delta;
                }
            }
        }
        if gained <= eps || n == 2 {
            break;
        }
    }
}

struct Restart<'a> {
    q: &'a Inequality,
    s: Scenario,
    da: usize,
    db: usize,
    opts: &'a SeesawOptions,
}

impl<'a> Restart<'a> {
    fn new(q: &'a Inequality, da: usize, db: usize, opts: &'a SeesawOptions) -> Self {
        Restart {
            q,
            s: q.scenario(),
            da,
            db,
            opts,
        }
    }

    fn bell<T: RealField + Copy>(
        &self,
        a: &[Vec<CMatrix<T>>],
        b: &[Vec<CMatrix<T>>],
    ) -> Result<super::BellOperator<T>> {
        let wrap = |ms: &[Vec<CMatrix<T>>]| -> Vec<ProjectiveMeasurement<T>> {
            ms.iter()
                .map(|p| ProjectiveMeasurement {
                    projectors: p.clone(),
                })
                .collect()
        };
        bell_operator(self.q, &MeasurementSet::new(wrap(a), wrap(b))?)
    }

    fn run<T: RealField + Copy>(
        &self,
        rng: &mut ChaCha8Rng,
        fixed: Option<&DensityMatrix<T>>,
    ) -> Result<Outcome<T>> {
        let s = self.s;
        let mut a: Vec<Vec<CMatrix<T>>> = (0..s.ma())
            .map(|_| random_measurement(self.da, s.na(), rng))
            .collect();
        let mut b: Vec<Vec<CMatrix<T>>> = (0..s.mb())
            .map(|_| random_measurement(self.db, s.nb(), rng))
            .collect();
        let mut state = match fixed {
            Some(rho) => rho.clone(),
            None => DensityMatrix::from_pure(&self.bell(&a, &b)?.top_eigen().1)?,
        };
        let mut value = self.bell(&a, &b)?.value(&state)?;
        let tol = real::<T>(self.opts.tolerance);
        let (mut stalls, mut iterations, mut converged) = (0, 0, false);
        while iterations < self.opts.max_iterations {
            iterations += 1;
            self.update_a(&mut a, &b, state.matrix());
            self.update_b(&a, &mut b, state.matrix());
            let op = self.bell(&a, &b)?;
            if fixed.is_none() {
                state = DensityMatrix::from_pure(&op.top_eigen().1)?;
            }
            let next = op.value(&state)?;
            let gain = next - value;
            value = if next > value { next } else { value };
            if gain < tol {
                stalls += 1;
                if stalls >= self.opts.stall_sweeps {
                    converged = true;
                    break;
                }
            } else {
                stalls = 0;
            }
        }
        Ok(Outcome {
            value: self.bell(&a, &b)?.value(&state)?,
            state,
            a,
            b,
            iterations,
            converged,
        })
    }

    fn update_a<T: RealField + Copy>(
        &self,
        a: &mut [Vec<CMatrix<T>>],
        b: &[Vec<CMatrix<T>>],
        rho: &CMatrix<T>,
    ) {
        let (s, c) = (self.s, self.q.coeffs());
        let w = |v: i64| Complex::new(real::<T>(v as f64), T::zero());
        let marginal = contract_b(rho, &CMatrix::identity(self.db, self.db), self.da, self.db);
        let parts: Vec<Vec<CMatrix<T>>> = b
            .iter()
            .map(|m| {
                m[..s.nb() - 1]
                    .iter()
                    .map(|p| contract_b(rho, p, self.da, self.db))
                    .collect()
            })
            .collect();
        for (ia, proj) in a.iter_mut().enumerate() {
            let k: Vec<CMatrix<T>> = (0..s.na())
                .map(|ja| {
                    let mut kj = CMatrix::zeros(self.da, self.da);
                    if ja + 1 < s.na() {
                        kj += &marginal * w(c[s.a_marginal_index(ia, ja)]);
                        for (ib, row) in parts.iter().enumerate() {
                            for (jb, part) in row.iter().enumerate() {
                                kj += part * w(c[s.joint_index(ia, ib, ja, jb)]);
                            }
                        }
                    }
                    kj
                })
                .collect();
            improve_measurement(&k, proj, self.opts.class);
        }
    }

    fn update_b<T: RealField + Copy>(
        &self,
        a: &[Vec<CMatrix<T>>],
        b: &mut [Vec<CMatrix<T>>],
        rho: &CMatrix<T>,
    ) {
        let (s, c) = (self.s, self.q.coeffs());
        let w = |v: i64| Complex::new(real::<T>(v as f64), T::zero());
        let marginal = contract_a(rho, &CMatrix::identity(self.da, self.da), self.da, self.db);
        let parts: Vec<Vec<CMatrix<T>>> = a
            .iter()
            .map(|m| {
                m[..s.na() - 1]
                    .iter()
                    .map(|p| contract_a(rho, p, self.da, self.db))
                    .collect()
            })
            .collect();
        for (ib, proj) in b.iter_mut().enumerate() {
            let k: Vec<CMatrix<T>> = (0..s.nb())
                .map(|jb| {
                    let mut kj = CMatrix::zeros(self.db, self.db);
                    if jb + 1 < s.nb() {
                        kj += &marginal * w(c[s.b_marginal_index(ib, jb)]);
                        for (ia, row) in parts.iter().enumerate() {
                            for (ja, part) in row.iter().enumerate() {
                                kj += part * w(c[s.joint_index(ia, ib, ja, jb)]);
                            }
                        }
                    }
                    kj
                })
                .collect();
            improve_measurement(&k, proj, self.opts.class);
        }
    }
}
