use crate::error::{Error, Result};
use crate::polytope::{AffineFit, Inequality};
use crate::scenario::Scenario;
use crate::vertices::{check_vertex_count, DeterministicStrategy, DEFAULT_VERTEX_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
}

/// Re-expresses `f`, a function of vertices of `target`, as an inequality
/// `f(v) <= bound` in CG coordinates of `target`.
fn fit_function(
    target: Scenario,
    bound: i64,
    f: impl Fn(&DeterministicStrategy) -> i64,
    label: Option<&str>,
) -> Result<Inequality> {
    let n = check_vertex_count(target, DEFAULT_VERTEX_CAP)?;
    let slack: Vec<i64> = (0..n)
        .map(|k| bound - f(&DeterministicStrategy::from_index(target, k)))
        .collect();
    let mut q = AffineFit::for_scenario(target)?.inequality_from_slack(&slack)?;
    q.set_label(label.map(str::to_owned));
    Ok(q)
}

/// Replaces the listed settings by deterministic responses and drops them.
///
/// `fixed` holds `(party, setting, outcome)` triples with 0-based indices.
/// The remaining settings keep their relative order.
pub fn restrict_deterministic(
    q: &Inequality,
    fixed: &[(Party, usize, usize)],
) -> Result<Inequality> {
    let s = q.scenario();
    let mut fa: Vec<Option<usize>> = vec![None; s.ma()];
    let mut fb: Vec<Option<usize>> = vec![None; s.mb()];
    for &(party, setting, outcome) in fixed {
        let (slots, n) = match party {
            Party::A => (&mut fa, s.na()),
            Party::B => (&mut fb, s.nb()),
        };
        if setting >= slots.len() || outcome >= n {
            return Err(Error::ParameterOutOfRange(format!(
                "cannot fix setting {setting} of {party:?} to outcome {outcome} in {s}"
            )));
        }
        slots[setting] = Some(outcome);
    }
    let free = |v: &[Option<usize>]| v.iter().filter(|x| x.is_none()).count();
    let reduced = Scenario::new(free(&fa), free(&fb), s.na(), s.nb())?;
    let fill = |fixed: &[Option<usize>], free: &[usize]| -> Vec<usize> {
        let mut it = free.iter();
        fixed
            .iter()
            .map(|x| x.unwrap_or_else(|| *it.next().expect("free count matches")))
            .collect()
    };
    fit_function(
        reduced,
        q.bound(),
        |d| {
            let full = DeterministicStrategy::new(s, fill(&fa, d.a_out()), fill(&fb, d.b_out()))
                .expect("embedded strategy is valid");
            q.value_at(&full)
        },
        q.label(),
    )
}

fn check_maps(
    maps: &[Vec<usize>],
    settings: usize,
    small: usize,
    surjective: bool,
) -> Result<usize> {
    if maps.len() != settings {
        return Err(Error::InvalidPartition(format!(
            "{} outcome maps for {settings} settings",
            maps.len()
        )));
    }
    let size = maps.first().map_or(0, Vec::len);
    for m in maps {
        if m.len() != size || m.iter().any(|&x| x >= small) {
            return Err(Error::InvalidPartition(format!(
                "outcome map {m:?} does not land in 0..{small}"
            )));
        }
        if surjective && (0..small).any(|t| !m.contains(&t)) {
            return Err(Error::InvalidPartition(format!(
                "outcome map {m:?} misses an outcome of 0..{small}"
            )));
        }
        if !surjective {
            let mut sorted = m.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != m.len() {
                return Err(Error::InvalidPartition(format!(
                    "outcome selection {m:?} repeats"
                )));
            }
        }
    }
    Ok(size)
}

/// Lifts `q` to more outcomes by coarse-graining: outcome `j` of setting
/// `i` in the larger scenario counts as outcome `a_maps[i][j]` of `q`.
///
/// The lifted inequality takes the same value on a behavior as `q` takes
/// on the merged behavior.
pub fn merge_outcomes(
    q: &Inequality,
    a_maps: &[Vec<usize>],
    b_maps: &[Vec<usize>],
) -> Result<Inequality> {
    let s = q.scenario();
    let na = check_maps(a_maps, s.ma(), s.na(), true)?;
    let nb = check_maps(b_maps, s.mb(), s.nb(), true)?;
    let large = Scenario::new(s.ma(), s.mb(), na, nb)?;
    fit_function(
        large,
        q.bound(),
        |d| {
            let a = d
                .a_out()
                .iter()
                .enumerate()
                .map(|(i, &o)| a_maps[i][o])
                .collect();
            let b = d
                .b_out()
                .iter()
                .enumerate()
                .map(|(i, &o)| b_maps[i][o])
                .collect();
            q.value_at(&DeterministicStrategy::new(s, a, b).expect("maps land in range"))
        },
        q.label(),
    )
}

/// Restricts `q` to behaviors using only some outcomes: outcome `k` of
/// setting `i` in the smaller scenario is outcome `a_keep[i][k]` of `q`.
pub fn restrict_outcomes(
    q: &Inequality,
    a_keep: &[Vec<usize>],
    b_keep: &[Vec<usize>],
) -> Result<Inequality> {
    let s = q.scenario();
    let na = check_maps(a_keep, s.ma(), s.na(), false)?;
    let nb = check_maps(b_keep, s.mb(), s.nb(), false)?;
    let small = Scenario::new(s.ma(), s.mb(), na, nb)?;
    fit_function(
        small,
        q.bound(),
        |d| {
            let a = d
                .a_out()
                .iter()
                .enumerate()
                .map(|(i, &o)| a_keep[i][o])
                .collect();
            let b = d
                .b_out()
                .iter()
                .enumerate()
                .map(|(i, &o)| b_keep[i][o])
                .collect();
            q.value_at(&DeterministicStrategy::new(s, a, b).expect("selections land in range"))
        },
        q.label(),
    )
}

/// Places `q` on the first settings of a scenario with at least as many
/// settings; extra settings get zero coefficients.
pub fn embed_settings(q: &Inequality, target: Scenario) -> Result<Inequality> {
    let s = q.scenario();
    if target.na() != s.na()
        || target.nb() != s.nb()
        || target.ma() < s.ma()
        || target.mb() < s.mb()
    {
        return Err(Error::IncompatibleScenario {
            expected: s,
            found: target,
        });
    }
    let c = q.coeffs();
    let mut out = vec![0; target.cg_dimension()];
    for ia in 0..s.ma() {
        for ja in 0..s.na() - 1 {
            out[target.a_marginal_index(ia, ja)] = c[s.a_marginal_index(ia, ja)];
            for ib in 0..s.mb() {
                for jb in 0..s.nb() - 1 {
                    out[target.joint_index(ia, ib, ja, jb)] = c[s.joint_index(ia, ib, ja, jb)];
                }
            }
        }
    }
    for ib in 0..s.mb() {
        for jb in 0..s.nb() - 1 {
            out[target.b_marginal_index(ib, jb)] = c[s.b_marginal_index(ib, jb)];
        }
    }
    let mut r = Inequality::new(target, out, q.bound())?;
    r.set_label(q.label().map(str::to_owned));
    Ok(r)
}

/// Embeds `q` into a scenario with at least as many settings and
/// outcomes, merging every surplus outcome into the last one.
pub fn lift(q: &Inequality, target: Scenario) -> Result<Inequality> {
    let s = q.scenario();
    if target.ma() < s.ma() || target.mb() < s.mb() || target.na() < s.na() || target.nb() < s.nb()
    {
        return Err(Error::IncompatibleScenario {
            expected: s,
            found: target,
        });
    }
    let widen = |n_small: usize, n_large: usize, m: usize| -> Vec<Vec<usize>> {
        vec![(0..n_large).map(|j| j.min(n_small - 1)).collect(); m]
    };
    let merged = if (target.na(), target.nb()) == (s.na(), s.nb()) {
        q.clone()
    } else {
        merge_outcomes(
            q,
            &widen(s.na(), target.na(), s.ma()),
            &widen(s.nb(), target.nb(), s.mb()),
        )?
    };
    embed_settings(&merged, target)
}
