//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use bellscope::scalar::{rat, ratio, Rational};
use bellscope::{enumerate_vertices, CgVector, Scenario};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact membership of `p` in the convex hull of `points`: phase one of
/// the simplex method with Bland's rule over the rationals.
pub fn in_hull(points: &[Vec<Rational>], p: &[Rational]) -> bool {
    let n = points.len();
    let d = p.len();
    let m = d + 1;
    // Tableau rows: [λ_1..λ_n | artificials a_1..a_m | rhs].
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|r| {
            let mut row = vec![Rational::zero(); width];
            for (j, pt) in points.iter().enumerate() {
                row[j] = if r < d {
                    pt[r].clone()
                } else {
                    Rational::one()
                };
            }
            row[width - 1] = if r < d { p[r].clone() } else { Rational::one() };
            if row[width - 1].is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            row[n + r] = Rational::one();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of minimizing the sum of artificials.
    let mut cost = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..n {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }
    while let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let a = &t[i][width - 1] / &t[i][enter];
                        let b = &t[l][width - 1] / &t[l][enter];
                        a < b || (a == b && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            unreachable!("phase one is bounded below by zero");
        };
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x = &*x / &piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (x, y) in cost.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        basis[r] = enter;
    }
    cost[width - 1].is_zero()
}

/// CG coordinates of every vertex, as exact rationals.
pub fn vertex_points(s: Scenario) -> Vec<Vec<Rational>> {
    enumerate_vertices(s)
        .unwrap()
        .iter()
        .map(|d| d.cg_coords().into_iter().map(rat).collect())
        .collect()
}

/// A random convex combination of a few random vertices.
pub fn random_local(s: Scenario, rng: &mut ChaCha8Rng) -> CgVector<Rational> {
    let verts = vertex_points(s);
    let k = rng.random_range(1..=4);
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    let mut c = vec![Rational::zero(); s.cg_dimension()];
    for w in weights {
        let v = &verts[rng.random_range(0..verts.len())];
        for (x, y) in c.iter_mut().zip(v) {
            *x += ratio(w, total) * y;
        }
    }
    CgVector::new(s, c).unwrap()
}

/// A PR box on Alice's settings `i, j` with the anticorrelated cell at
/// `(odd_a, odd_b)`; the other settings of Alice are uniformly random.
pub fn pr_box(s: Scenario, i: usize, j: usize, odd_a: usize, odd_b: usize) -> CgVector<Rational> {
    let mut c = vec![Rational::zero(); s.cg_dimension()];
    for ia in 0..s.ma() {
        c[s.a_marginal_index(ia, 0)] = ratio(1, 2);
        for ib in 0..2 {
            let pair = [i, j];
            c[s.joint_index(ia, ib, 0, 0)] = match pair.iter().position(|&x| x == ia) {
                Some(k) if (k, ib) == (odd_a, odd_b) => Rational::zero(),
                Some(_) => ratio(1, 2),
                None => ratio(1, 4),
            };
        }
    }
    for ib in 0..2 {
        c[s.b_marginal_index(ib, 0)] = ratio(1, 2);
    }
    CgVector::new(s, c).unwrap()
}

/// A point on the segment between a random local behavior and a random PR
/// box, so that both sides of the local polytope's boundary are sampled.
pub fn random_mixed(s: Scenario, rng: &mut ChaCha8Rng) -> CgVector<Rational> {
    let local = random_local(s, rng);
    let i = rng.random_range(0..s.ma() - 1);
    let j = rng.random_range(i + 1..s.ma());
    let pr = pr_box(s, i, j, rng.random_range(0..2), rng.random_range(0..2));
    let t = ratio(rng.random_range(0..=12), 12);
    let c = local
        .coords()
        .iter()
        .zip(pr.coords())
        .map(|(x, y)| &t * y + (Rational::one() - &t) * x)
        .collect();
    CgVector::new(s, c).unwrap()
}

/// Rank by plain Gaussian elimination over the
/// rationals.
pub fn exact_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if !row[col].is_zero() {
                let f = &row[col] / &pivot[col];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `mA(nA−1) + mB(nB−1) + mA·mB(nA−1)(nB−1)`.
pub fn cg_dimension_formula(ma: usize, mb: usize, na: usize, nb: usize) -> usize {
    ma * (na - 1) + mb * (nb - 1) + ma * mb * (na - 1) * (nb - 1)
}
