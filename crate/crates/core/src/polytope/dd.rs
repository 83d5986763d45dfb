//! Double description: the facets of a point set as the extreme rays of
//! the cone `{h : h · (1, p) >= 0 for every point p}`.
//!
//! Points are inserted one by one. The cone is kept as its list of extreme
//! rays, each with the set of inserted points it is tight on; two rays are
//! combined only when they are adjacent, decided combinatorially from those
//! zero sets.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::EnumerationOptions;
use crate::error::{Error, Result};
use crate::linalg::{inverse, null_space, EchelonBasis};
use crate::scalar::{Rational, Scalar};

/// `coeffs · x <= rhs` for facets, `coeffs · x = rhs` for equations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearConstraint {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

/// Facets and affine hull of a finite point set.
///
/// When the points are not full dimensional the facets are given inside the
/// affine hull (coefficients vanish outside a set of independent
/// coordinates) and `equations` describes the hull itself.
#[derive(Clone, Debug, Default)]
pub struct HullDescription {
    pub facets: Vec<LinearConstraint>,
    pub equations: Vec<LinearConstraint>,
}

/// Convex-hull facets of integer points.
pub fn facets_of_points(points: &[Vec<i64>], opts: &EnumerationOptions) -> Result<HullDescription> {
    let start = Instant::now();
    let Some(first) = points.first() else {
        return Err(Error::ShapeMismatch("no points".into()));
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::ShapeMismatch("points of different lengths".into()));
    }
    let rows: Vec<Vec<i64>> = points
        .iter()
        .map(|p| std::iter::once(1).chain(p.iter().copied()).collect())
        .collect();
    let q_rows: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect())
        .collect();

    let mut basis = EchelonBasis::new(d + 1);
    for r in &q_rows {
        basis.insert(r.clone());
        if basis.rank() == d + 1 {
            break;
        }
    }
    let mut cols = basis.pivots().to_vec();
    cols.sort_unstable();
    debug_assert_eq!(cols.first(), Some(&0));

    let mut equations: Vec<LinearConstraint> = null_space(&q_rows, d + 1)
        .into_iter()
        .map(|h| {
            let mut h = integer_direction(&h)?;
            if let Some(lead) = h[1..].iter().find(|x| !x.is_zero()) {
                if lead.is_negative() {
                    h.iter_mut().for_each(|x| *x = -x.clone());
                }
            }
            let h = to_i64_vec(&h)?;
            Ok(LinearConstraint {
                coeffs: h[1..].to_vec(),
                rhs: -h[0],
            })
        })
        .collect::<Result<_>>()?;
    equations.sort();

    let facets = if cols.len() < 2 {
        Vec::new()
    } else {
        let projected: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect();
        let rays = extreme_rays(&projected, opts, start)?;
        let mut facets: Vec<LinearConstraint> = rays
            .into_iter()
            .map(|ray| {
                let mut h = vec![0i64; d + 1];
                for (&c, v) in cols.iter().zip(ray) {
                    h[c] = v;
                }
                LinearConstraint {
                    coeffs: h[1..].iter().map(|x| -x).collect(),
                    rhs: h[0],
                }
            })
            .collect();
        facets.sort();
        facets
    };
    Ok(HullDescription { facets, equations })
}

fn integer_direction(v: &[Rational]) -> Result<Vec<BigInt>> {
    let lcm = v.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::ZeroInequality);
    }
    Ok(ints.into_iter().map(|x| x / &g).collect())
}

fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| x.to_i64().ok_or(Error::Overflow("facet coefficient")))
        .collect()
}

/// Extreme rays of `{h : rows · h >= 0}` for a full-column-rank matrix,
/// each primitive in the integers.
fn extreme_rays(
    rows: &[Vec<i64>],
    opts: &EnumerationOptions,
    start: Instant,
) -> Result<Vec<Vec<i64>>> {
    let words = rows.len().div_ceil(64);
    macro_rules! dispatch {
        ($($w:literal),*) => {
            match words {
                $(n if n <= $w => run::<$w>(rows, opts, start),)*
                _ => Err(Error::Resource(format!(
                    "{} points exceed the enumerator's limit of 1024",
                    rows.len()
                ))),
            }
        };
    }
    dispatch!(1, 2, 4, 8, 16)
}

fn run<const W: usize>(
    rows: &[Vec<i64>],
    opts: &EnumerationOptions,
    start: Instant,
) -> Result<Vec<Vec<i64>>> {
    match DoubleDescription::<i64, W>::new(rows, opts, start).and_then(|dd| dd.finish()) {
        Err(Error::Overflow(_)) => DoubleDescription::<BigInt, W>::new(rows, opts, start)?.finish(),
        other => other,
    }
}

trait RayInt:
    Clone
    + Integer
    + Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + From<i64>
    + TryFrom<BigInt>
    + ToPrimitive
    + Send
    + Sync
{
}

impl<T> RayInt for T where
    T: Clone
        + Integer
        + Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + From<i64>
        + TryFrom<BigInt>
        + ToPrimitive
        + Send
        + Sync
{
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Bits<const W: usize>([u64; W]);

impl<const W: usize> Bits<W> {
    fn empty() -> Self {
        Bits([0; W])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
        out
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray<T, const W: usize> {
    h: Vec<T>,
    zeros: Bits<W>,
}

struct DoubleDescription<'a, T, const W: usize> {
    rows: &'a [Vec<i64>],
    rays: Vec<Ray<T, W>>,
    pending: Vec<usize>,
    opts: &'a EnumerationOptions,
    start: Instant,
}

impl<'a, T: RayInt, const W: usize> DoubleDescription<'a, T, W> {
    fn new(rows: &'a [Vec<i64>], opts: &'a EnumerationOptions, start: Instant) -> Result<Self> {
        let dim = rows[0].len();
        let mut basis = EchelonBasis::<Rational>::new(dim);
        let mut chosen = Vec::with_capacity(dim);
        for (k, r) in rows.iter().enumerate() {
            if basis.insert(r.iter().map(|&x| Rational::from_i64(x)).collect()) {
                chosen.push(k);
                if chosen.len() == dim {
                    break;
                }
            }
        }
        if chosen.len() < dim {
            return Err(Error::ShapeMismatch("cone is not pointed".into()));
        }
        let w: Vec<Vec<Rational>> = chosen
            .iter()
            .map(|&k| rows[k].iter().map(|&x| Rational::from_i64(x)).collect())
            .collect();
        let inv = inverse(&w).expect("chosen rows are independent");
        let mut rays = Vec::with_capacity(dim);
        for j in 0..dim {
            let col: Vec<Rational> = inv.iter().map(|r| r[j].clone()).collect();
            let h = integer_direction(&col)?
                .into_iter()
                .map(|x| T::try_from(x).map_err(|_| Error::Overflow("initial ray")))
                .collect::<Result<Vec<T>>>()?;
            let mut zeros = Bits::empty();
            for (i, &k) in chosen.iter().enumerate() {
                if i != j {
                    zeros.set(k);
                }
            }
            rays.push(Ray { h, zeros });
        }
        let pending = (0..rows.len()).filter(|k| !chosen.contains(k)).collect();
        Ok(DoubleDescription {
            rows,
            rays,
            pending,
            opts,
            start,
        })
    }

    fn check_time(&self) -> Result<()> {
        match self.opts.time_cap {
            Some(cap) if self.start.elapsed() > cap => Err(Error::Resource(format!(
                "facet enumeration exceeded {} s",
                cap.as_secs_f64()
            ))),
            _ => Ok(()),
        }
    }

    fn finish(mut self) -> Result<Vec<Vec<i64>>> {
        let pending = std::mem::take(&mut self.pending);
        for k in pending {
            self.check_time()?;
            self.add_row(k)?;
            if self.rays.len() > self.opts.max_rays {
                return Err(Error::Resource(format!(
                    "intermediate cone has {} rays, cap is {}",
                    self.rays.len(),
                    self.opts.max_rays
                )));
            }
        }
        self.rays
            .iter()
            .map(|r| {
                r.h.iter()
                    .map(|x| x.to_i64().ok_or(Error::Overflow("facet coefficient")))
                    .collect()
            })
            .collect()
    }

    fn add_row(&mut self, k: usize) -> Result<()> {
        let row = &self.rows[k];
        let dim = row.len();
        let values: Vec<T> = self
            .rays
            .iter()
            .map(|r| dot(row, &r.h))
            .collect::<Result<_>>()?;
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (i, v) in values.iter().enumerate() {
            if v.is_positive() {
                pos.push(i);
            } else if v.is_negative() {
                neg.push(i);
            }
        }
        if neg.is_empty() {
            for (r, v) in self.rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zeros.set(k);
                }
            }
            return Ok(());
        }

        let rays = &self.rays;
        let created: Vec<Vec<Ray<T, W>>> = pos
            .par_iter()
            .map(|&p| {
                self.check_time()?;
                let mut out = Vec::new();
                for &n in &neg {
                    let common = rays[p].zeros.and(&rays[n].zeros);
                    if common.count() + 2 < dim {
                        continue;
                    }
                    let blocked = rays
                        .iter()
                        .enumerate()
                        .any(|(i, r)| i != p && i != n && common.is_subset_of(&r.zeros));
                    if blocked {
                        continue;
                    }
                    let h = combine(&values[p], &rays[n].h, &values[n], &rays[p].h)?;
                    let mut zeros = common;
                    zeros.set(k);
                    out.push(Ray { h, zeros });
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;

        let old = std::mem::take(&mut self.rays);
        let mut next =
            Vec::with_capacity(old.len() - neg.len() + created.iter().map(Vec::len).sum::<usize>());
        for (mut r, v) in old.into_iter().zip(values) {
            if v.is_zero() {
                r.zeros.set(k);
                next.push(r);
            } else if v.is_positive() {
                next.push(r);
            }
        }
        next.extend(created.into_iter().flatten());
        self.rays = next;
        Ok(())
    }
}

fn dot<T: RayInt>(row: &[i64], h: &[T]) -> Result<T> {
    let mut acc = T::zero();
    for (&a, x) in row.iter().zip(h) {
        if a == 0 || x.is_zero() {
            continue;
        }
        let term = T::from(a)
            .checked_mul(x)
            .ok_or(Error::Overflow("ray evaluation"))?;
        acc = acc
            .checked_add(&term)
            .ok_or(Error::Overflow("ray evaluation"))?;
    }
    Ok(acc)
}

/// `sp · hn − sn · hp` divided by its gcd; zero on the new row.
fn combine<T: RayInt>(sp: &T, hn: &[T], sn: &T, hp: &[T]) -> Result<Vec<T>> {
    let overflow = || Error::Overflow("ray combination");
    let mut h = Vec::with_capacity(hn.len());
    let mut g = T::zero();
    for (a, b) in hn.iter().zip(hp) {
        let x = sp
            .checked_mul(a)
            .ok_or_else(overflow)?
            .checked_sub(&sn.checked_mul(b).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
        g = g.gcd(&x);
        h.push(x);
    }
    if !g.is_zero() && !g.is_one() {
        for x in &mut h {
            *x = x.div_floor(&g);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> EnumerationOptions {
        EnumerationOptions::default()
    }

    #[test]
    fn unit_square() {
        let pts = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let hull = facets_of_points(&pts, &opts()).unwrap();
        assert!(hull.equations.is_empty());
        let mut want = vec![
            LinearConstraint {
                coeffs: vec![-1, 0],
                rhs: 0,
            },
            LinearConstraint {
                coeffs: vec![0, -1],
                rhs: 0,
            },
            LinearConstraint {
                coeffs: vec![1, 0],
                rhs: 1,
            },
            LinearConstraint {
                coeffs: vec![0, 1],
                rhs: 1,
            },
        ];
        want.sort();
        assert_eq!(hull.facets, want);
    }

    #[test]
    fn cube_with_interior_point() {
        let mut pts = vec![vec![1, 1, 1]];
        for x in [0, 2] {
            for y in [0, 2] {
                for z in [0, 2] {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        let hull = facets_of_points(&pts, &opts()).unwrap();
        assert_eq!(hull.facets.len(), 6);
        assert!(hull.facets.iter().all(|f| f.rhs == 0 || f.rhs == 2));
    }

    #[test]
    fn cross_polytope() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for s in [-1, 1] {
                let mut p = vec![0; 4];
                p[i] = s;
                pts.push(p);
            }
        }
        let hull = facets_of_points(&pts, &opts()).unwrap();
        assert_eq!(hull.facets.len(), 16);
        assert!(hull
            .facets
            .iter()
            .all(|f| f.rhs == 1 && f.coeffs.iter().all(|c| c.abs() == 1)));
    }

    #[test]
    fn degenerate_square_in_a_plane() {
        // square lying in the plane z = 1
        let pts = vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]];
        let hull = facets_of_points(&pts, &opts()).unwrap();
        assert_eq!(
            hull.equations,
            vec![LinearConstraint {
                coeffs: vec![0, 0, 1],
                rhs: 1
            }]
        );
        assert_eq!(hull.facets.len(), 4);
        for f in &hull.facets {
            let vals: Vec<i64> = pts
                .iter()
                .map(|p| p.iter().zip(&f.coeffs).map(|(a, b)| a * b).sum())
                .collect();
            assert!(vals.iter().all(|&v| v <= f.rhs));
            assert_eq!(vals.iter().filter(|&&v| v == f.rhs).count(), 2);
        }
    }

    #[test]
    fn single_point() {
        let hull = facets_of_points(&[vec![3, 4]], &opts()).unwrap();
        assert!(hull.facets.is_empty());
        assert_eq!(hull.equations.len(), 2);
    }

    #[test]
    fn big_integer_fallback_agrees() {
        let t = 1i64 << 40;
        let pts = vec![vec![0, 0], vec![t, 0], vec![0, t], vec![t, t]];
        let hull = facets_of_points(&pts, &opts()).unwrap();
        let mut want = vec![
            LinearConstraint {
                coeffs: vec![-1, 0],
                rhs: 0,
            },
            LinearConstraint {
                coeffs: vec![0, -1],
                rhs: 0,
            },
            LinearConstraint {
                coeffs: vec![1, 0],
                rhs: t,
            },
            LinearConstraint {
                coeffs: vec![0, 1],
                rhs: t,
            },
        ];
        want.sort();
        assert_eq!(hull.facets, want);
    }
}
