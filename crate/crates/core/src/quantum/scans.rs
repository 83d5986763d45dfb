use nalgebra::RealField;

use super::{
    bell_operator, horodecki_chsh, lambda_chsh, real, rho_theta, seesaw_maximize_on_state,
    DensityMatrix, MeasurementSet, ProjectiveMeasurement, SeesawOptions,
};
use crate::catalog::{make, FamilyId};
use crate::error::{Error, Result};
use crate::polytope::{AffineFit, Inequality};
use crate::symmetry::SymmetryGroup;

fn qubit_set<T: RealField + Copy>(a: [(f64, f64); 3], b: [(f64, f64); 3]) -> MeasurementSet<T> {
    let make = |angles: [(f64, f64); 3]| {
        angles
            .iter()
            .map(|&(t, p)| ProjectiveMeasurement::qubit(real(t), real(p)))
            .collect()
    };
    MeasurementSet::new(make(a), make(b)).expect("three qubit measurements per party")
}

/// Coplanar settings in the x-z plane for the singlet: angles from the z
/// axis `A = 0, π/3, 2π/3` and `B = 4π/3, π, 2π/3`.
pub fn planar_singlet_measurements<T: RealField + Copy>() -> MeasurementSet<T> {
    use std::f64::consts::PI;
    qubit_set(
        [(0.0, 0.0), (PI / 3.0, 0.0), (2.0 * PI / 3.0, 0.0)],
        [(4.0 * PI / 3.0, 0.0), (PI, 0.0), (2.0 * PI / 3.0, 0.0)],
    )
}

/// Settings for [`super::sigma_state`]: `A = (η, 0), (π − η, 0), (0, 0)`
/// and `B = (π − χ, 0), (χ, 0), (π, 0)` with `cos η = 1/(2√2)` and
/// `cos χ = √(7/8)`. Pairs are (polar angle from z, azimuth from x).
pub fn sigma_measurements<T: RealField + Copy>() -> MeasurementSet<T> {
    use std::f64::consts::PI;
    let eta = (1.0 / (2.0 * 2f64.sqrt())).acos();
    let chi = (7.0f64 / 8.0).sqrt().acos();
    qubit_set(
        [(eta, 0.0), (PI - eta, 0.0), (0.0, 0.0)],
        [(PI - chi, 0.0), (chi, 0.0), (PI, 0.0)],
    )
}

/// Settings for a two-qubit reduction of [`super::sharing_state`] at
/// `μ = 0.852`, as (polar angle from z, azimuth from x) pairs. The first
/// list acts on one of the two symmetric qubits and the second on the
/// distinguished qubit, so the reduced state must have its subsystems
/// exchanged (see [`super::swap_subsystems`]) before evaluation.
pub fn sharing_measurements<T: RealField + Copy>() -> MeasurementSet<T> {
    use std::f64::consts::PI;
    let (alpha, beta, delta, gamma) = (2.8252, 0.1931, 0.0804, 2.5445);
    qubit_set(
        [
            (alpha, 2.0 * PI - beta),
            (alpha, PI - beta),
            (PI / 2.0, 2.0 * PI - delta),
        ],
        [(gamma, PI + delta), (gamma, delta), (PI / 2.0, beta)],
    )
}

/// Largest violation `Tr(B ρ) − bound` over every relabeling of `q`,
/// together with the relabeled inequality attaining it. Ties go to the
/// smallest slack vector.
pub fn orbit_max_value<T: RealField + Copy>(
    q: &Inequality,
    rho: &DensityMatrix<T>,
    m: &MeasurementSet<T>,
) -> Result<(T, Inequality)> {
    let s = q.scenario();
    let group = SymmetryGroup::for_scenario(s)?;
    let fit = AffineFit::for_scenario(s)?;
    let mut orbit: Vec<Vec<i64>> = group.orbit(&q.slack_vector()?).into_iter().collect();
    orbit.sort();
    let mut best: Option<(T, Inequality)> = None;
    for slack in orbit {
        let mut image = fit.inequality_from_slack(&slack)?;
        image.set_label(q.label().map(str::to_owned));
        let v = bell_operator(&image, m)?.value(rho)? - real::<T>(image.bound() as f64);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, image));
        }
    }
    Ok(best.expect("orbit contains q"))
}

/// Search window and accuracy for [`onset_by_bisection`].
#[derive(Clone, Debug, PartialEq)]
pub struct OnsetOptions {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    /// Values above this count as a violation.
    pub threshold: f64,
    pub seesaw: SeesawOptions,
}

impl Default for OnsetOptions {
    fn default() -> Self {
        OnsetOptions {
            lo: 0.5,
            hi: 1.0,
            iterations: 16,
            threshold: 1e-7,
            seesaw: SeesawOptions {
                restarts: 30,
                ..SeesawOptions::default()
            },
        }
    }
}

/// Smallest mixing parameter of `family` at which the see-saw finds a
/// value of `q` above the threshold, assuming violation is monotone in
/// the parameter. Fails if the upper end is not violated or the lower end
/// already is.
pub fn onset_by_bisection<T, F>(
    q: &Inequality,
    dims: (usize, usize),
    family: F,
    opts: &OnsetOptions,
) -> Result<T>
where
    T: RealField + Copy,
    F: Fn(T) -> Result<DensityMatrix<T>>,
{
    let threshold = real::<T>(opts.threshold);
    let violated = |p: T| -> Result<bool> {
        let r = seesaw_maximize_on_state(q, &family(p)?, dims, &opts.seesaw)?;
        Ok(r.value > threshold)
    };
    let (mut lo, mut hi) = (real::<T>(opts.lo), real::<T>(opts.hi));
    if !violated(hi)? {
        return Err(Error::ParameterOutOfRange(format!(
            "no violation at the upper end {hi}"
        )));
    }
    if violated(lo)? {
        return Err(Error::ParameterOutOfRange(format!(
            "already violated at the lower end {lo}"
        )));
    }
    for _ in 0..opts.iterations {
        let mid = (lo + hi) * real(0.5);
        if violated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * real(0.5))
}

/// One point of the CHSH-boundary scan, rescaled so that the local bound
/// is 1 and the maximally mixed state gives 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig1Row<T> {
    pub theta: T,
    pub lambda: T,
    pub i_chsh_tilde: T,
    pub i3322_tilde: T,
}

/// `n` equally spaced angles strictly inside `(0, π/2)`.
pub fn fig1_grid<T: RealField + Copy>(n: usize) -> Vec<T> {
    let step = T::frac_pi_2() / real((n + 1) as f64);
    (1..=n).map(|k| step * real(k as f64)).collect()
}

/// For each `θ`, builds `rho_theta(θ, lambda_chsh(θ))` and reports
/// `2·I_CHSH + 1` and `I3322 + 1`, the latter maximized by the see-saw
/// over measurements of the class in `opts` with the state fixed.
pub fn fig1_scan<T: RealField + Copy>(
    thetas: &[T],
    opts: &SeesawOptions,
) -> Result<Vec<Fig1Row<T>>> {
    let i3322 = make(FamilyId::I3322)?;
    thetas
        .iter()
        .map(|&theta| {
            let lambda = lambda_chsh(theta)?;
            let rho = rho_theta(theta, lambda)?;
            let chsh = horodecki_chsh(&rho)?;
            let best = seesaw_maximize_on_state(&i3322, &rho, (2, 2), opts)?;
            Ok(Fig1Row {
                theta,
                lambda,
                i_chsh_tilde: chsh * real(2.0) + T::one(),
                i3322_tilde: best.value + T::one(),
            })
        })
        .collect()
}
