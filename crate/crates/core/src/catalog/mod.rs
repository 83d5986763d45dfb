//! Named Bell inequalities and families, and maps between scenarios.

mod maps;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::polytope::Inequality;
use crate::scenario::Scenario;
use crate::symmetry::{canonical_slack, transpose_inequality};

pub use maps::{
    embed_settings, lift, merge_outcomes, restrict_deterministic, restrict_outcomes, Party,
};
pub use text::{parse_inequalities, parse_inequality, to_text};

/// A named inequality or family member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Chsh,
    I3322,
    I2233,
    /// `m` settings per party, two outcomes.
    Imm22(usize),
    /// Two settings per party, `n` outcomes.
    I22nn(usize),
    Immnn(usize, usize),
    /// The three inequalities new to 3422, numbered 1 to 3.
    I3422(u8),
    /// `P(ja,jb|ia,ib) >= 0`.
    Positivity {
        scenario: Scenario,
        ia: usize,
        ib: usize,
        ja: usize,
        jb: usize,
    },
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilyId::Chsh => f.write_str("CHSH"),
            FamilyId::I3322 => f.write_str("I3322"),
            FamilyId::I2233 => f.write_str("I2233"),
            FamilyId::Imm22(m) => write!(f, "Imm22({m})"),
            FamilyId::I22nn(n) => write!(f, "I22nn({n})"),
            FamilyId::Immnn(m, n) => write!(f, "Immnn({m},{n})"),
            FamilyId::I3422(k) => write!(f, "I3422_{k}"),
            FamilyId::Positivity {
                scenario,
                ia,
                ib,
                ja,
                jb,
            } => write!(f, "positivity({scenario};{ia},{ib},{ja},{jb})"),
        }
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    /// Accepts the `Display` forms, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 1,
            msg: format!("unknown family {s:?}"),
        };
        let lower = s.trim().to_ascii_lowercase();
        let args = |prefix: &str| -> Option<Vec<usize>> {
            let inner = lower
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            inner
                .split([',', ';'])
                .map(|x| x.trim().parse().ok())
                .collect()
        };
        let id = match lower.as_str() {
            "chsh" => FamilyId::Chsh,
            "i3322" => FamilyId::I3322,
            "i2233" => FamilyId::I2233,
            "i3422_1" => FamilyId::I3422(1),
            "i3422_2" => FamilyId::I3422(2),
            "i3422_3" => FamilyId::I3422(3),
            _ => {
                if let Some(a) = args("imm22") {
                    match a[..] {
                        [m] => FamilyId::Imm22(m),
                        _ => return Err(bad()),
                    }
                } else if let Some(a) = args("i22nn") {
                    match a[..] {
                        [n] => FamilyId::I22nn(n),
                        _ => return Err(bad()),
                    }
                } else if let Some(a) = args("immnn") {
                    match a[..] {
                        [m, n] => FamilyId::Immnn(m, n),
                        _ => return Err(bad()),
                    }
                } else if let Some(rest) = lower.strip_prefix("positivity(") {
                    let inner = rest.strip_suffix(')').ok_or_else(bad)?;
                    let (sc, idx) = inner.split_once(';').ok_or_else(bad)?;
                    let digits: Vec<usize> = sc
                        .trim()
                        .chars()
                        .map(|c| c.to_digit(10).map(|d| d as usize))
                        .collect::<Option<_>>()
                        .ok_or_else(bad)?;
                    let idx: Vec<usize> = idx
                        .split(',')
                        .map(|x| x.trim().parse().ok())
                        .collect::<Option<_>>()
                        .ok_or_else(bad)?;
                    match (&digits[..], &idx[..]) {
                        (&[a, b, c, d], &[ia, ib, ja, jb]) => FamilyId::Positivity {
                            scenario: Scenario::new(a, b, c, d)?,
                            ia,
                            ib,
                            ja,
                            jb,
                        },
                        _ => return Err(bad()),
                    }
                } else {
                    return Err(bad());
                }
            }
        };
        Ok(id)
    }
}

impl FamilyId {
    pub fn scenario(&self) -> Result<Scenario> {
        match *self {
            FamilyId::Chsh => Scenario::new(2, 2, 2, 2),
            FamilyId::I3322 => Scenario::new(3, 3, 2, 2),
            FamilyId::I2233 => Scenario::new(2, 2, 3, 3),
            FamilyId::Imm22(m) => Scenario::new(m, m, 2, 2),
            FamilyId::I22nn(n) => Scenario::new(2, 2, n, n),
            FamilyId::Immnn(m, n) => Scenario::new(m, m, n, n),
            FamilyId::I3422(_) => Scenario::new(3, 4, 2, 2),
            FamilyId::Positivity { scenario, .. } => Ok(scenario),
        }
    }
}

/// Coefficients laid out as the usual table: A-marginal blocks along the
/// top, B-marginal entries down the side, joint blocks in the body with
/// `body[(iB, jB)][(iA, jA)]`.
struct Table {
    s: Scenario,
    coeffs: Vec<i64>,
}

impl Table {
    fn new(s: Scenario) -> Self {
        Table {
            s,
            coeffs: vec![0; s.cg_dimension()],
        }
    }

    fn a(&mut self, ia: usize, ja: usize, v: i64) {
        let i = self.s.a_marginal_index(ia, ja);
        self.coeffs[i] = v;
    }

    fn b(&mut self, ib: usize, jb: usize, v: i64) {
        let i = self.s.b_marginal_index(ib, jb);
        self.coeffs[i] = v;
    }

    fn joint(&mut self, ia: usize, ib: usize, ja: usize, jb: usize, v: i64) {
        let i = self.s.joint_index(ia, ib, ja, jb);
        self.coeffs[i] = v;
    }

    /// Fills from literal rows: `header` has the A-marginals and each body
    /// row starts with its B-marginal entry.
    fn literal(s: Scenario, header: &[i64], rows: &[&[i64]]) -> Self {
        let mut t = Table::new(s);
        let (ka, kb) = (s.na() - 1, s.nb() - 1);
        for (c, &v) in header.iter().enumerate() {
            t.a(c / ka, c % ka, v);
        }
        for (r, row) in rows.iter().enumerate() {
            let (ib, jb) = (r / kb, r % kb);
            t.b(ib, jb, row[0]);
            for (c, &v) in row[1..].iter().enumerate() {
                t.joint(c / ka, ib, c % ka, jb, v);
            }
        }
        t
    }

    fn finish(self, bound: i64, label: impl Into<String>) -> Result<Inequality> {
        Ok(Inequality::new(self.s, self.coeffs, bound)?.with_label(label))
    }
}

/// The inequality named by `f`, in the orientation `coeffs · v <= bound`.
pub fn make(f: FamilyId) -> Result<Inequality> {
    let label = f.to_string();
    match f {
        FamilyId::Chsh => {
            Table::literal(f.scenario()?, &[-1, 0], &[&[-1, 1, 1], &[0, 1, -1]]).finish(0, label)
        }
        FamilyId::I3322 => Table::literal(
            f.scenario()?,
            &[-1, 0, 0],
            &[&[-2, 1, 1, 1], &[-1, 1, 1, -1], &[0, 1, -1, 0]],
        )
        .finish(0, label),
        FamilyId::I2233 => Table::literal(
            f.scenario()?,
            &[-1, -1, 0, 0],
            &[
                &[-1, 1, 1, 0, 1],
                &[-1, 1, 0, 1, 1],
                &[0, 0, 1, 0, -1],
                &[0, 1, 1, -1, -1],
            ],
        )
        .finish(0, label),
        FamilyId::I3422(k) => {
            let s = f.scenario()?;
            let (header, rows, bound): (&[i64], [&[i64]; 4], i64) = match k {
                1 => (
                    &[1, 1, -2],
                    [
                        &[1, -1, -1, 1],
                        &[0, -1, 1, 1],
                        &[0, 1, -1, 1],
                        &[1, -1, -1, -1],
                    ],
                    2,
                ),
                2 => (
                    &[0, 1, -1],
                    [
                        &[-1, -1, 1, 1],
                        &[0, 0, -1, 1],
                        &[-1, 1, 0, 1],
                        &[1, -1, -1, 0],
                    ],
                    1,
                ),
                3 => (
                    &[1, 0, -1],
                    [
                        &[0, -2, 1, 1],
                        &[0, 0, -1, 1],
                        &[-1, 1, 1, 1],
                        &[2, -1, -1, -1],
                    ],
                    2,
                ),
                _ => {
                    return Err(Error::ParameterOutOfRange(format!(
                        "3422 inequalities are numbered 1 to 3, got {k}"
                    )))
                }
            };
            Table::literal(s, header, &rows).finish(bound, label)
        }
        FamilyId::Imm22(m) => {
            if m < 2 {
                return Err(Error::ParameterOutOfRange(format!(
                    "Imm22 needs m >= 2, got {m}"
                )));
            }
            let mut t = Table::new(f.scenario()?);
            t.a(0, 0, -1);
            for i in 1..=m {
                t.b(i - 1, 0, -((m - i) as i64));
                for j in 1..=m {
                    let v = match i + j {
                        x if x <= m + 1 => 1,
                        x if x == m + 2 => -1,
                        _ => 0,
                    };
                    t.joint(j - 1, i - 1, 0, 0, v);
                }
            }
            t.finish(0, label)
        }
        FamilyId::I22nn(n) => {
            if n < 2 {
                return Err(Error::ParameterOutOfRange(format!(
                    "I22nn needs n >= 2, got {n}"
                )));
            }
            let mut t = Table::new(f.scenario()?);
            for k in 0..n - 1 {
                t.a(0, k, -1);
                t.b(0, k, -1);
            }
            for r in 0..n - 1 {
                for c in 0..n - 1 {
                    let x = i64::from(r + c <= n - 2);
                    let y = i64::from(r + c >= n - 2);
                    // (A1,B1) X; (A2,B1), (A1,B2) Y; (A2,B2) -Y
                    t.joint(0, 0, c, r, x);
                    t.joint(1, 0, c, r, y);
                    t.joint(0, 1, c, r, y);
                    t.joint(1, 1, c, r, -y);
                }
            }
            t.finish(0, label)
        }
        FamilyId::Immnn(m, n) => {
            if m < 2 || n < 2 {
                return Err(Error::ParameterOutOfRange(format!(
                    "Immnn needs m, n >= 2, got ({m},{n})"
                )));
            }
            let mut t = Table::new(f.scenario()?);
            for k in 0..n - 1 {
                t.a(0, k, -1);
                for j in 1..=m {
                    t.b(j - 1, k, -((m - j) as i64));
                }
            }
            let x = |r: usize, c: usize| i64::from(r + c <= n - 2);
            let y = |r: usize, c: usize| i64::from(r + c >= n - 2);
            let z = |r: usize, c: usize| if r == n - 2 { 0 } else { y(r, c) };
            for i in 1..=m {
                for j in 1..=m {
                    for r in 0..n - 1 {
                        for c in 0..n - 1 {
                            let v = match i + j {
                                p if p <= m => x(r, c),
                                p if p == m + 1 => y(r, c),
                                p if p == m + 2 => -y(r, c),
                                _ => -z(r, c),
                            };
                            t.joint(j - 1, i - 1, c, r, v);
                        }
                    }
                }
            }
            t.finish(0, label)
        }
        FamilyId::Positivity {
            scenario: s,
            ia,
            ib,
            ja,
            jb,
        } => {
            if ia >= s.ma() || ib >= s.mb() || ja >= s.na() || jb >= s.nb() {
                return Err(Error::ParameterOutOfRange(format!("{f} is not in {s}")));
            }
            // -P(ja,jb|ia,ib) <= 0, with P written in CG coordinates
            let (la, lb) = (ja + 1 == s.na(), jb + 1 == s.nb());
            let mut t = Table::new(s);
            let mut bound = 0;
            let a_terms: Vec<usize> = if la {
                (0..s.na() - 1).collect()
            } else {
                vec![ja]
            };
            let b_terms: Vec<usize> = if lb {
                (0..s.nb() - 1).collect()
            } else {
                vec![jb]
            };
            let sign = if la == lb { -1 } else { 1 };
            for &a in &a_terms {
                for &b in &b_terms {
                    t.joint(ia, ib, a, b, sign);
                }
            }
            match (la, lb) {
                (false, false) => {}
                (false, true) => t.a(ia, ja, -1),
                (true, false) => t.b(ib, jb, -1),
                (true, true) => {
                    bound = 1;
                    for a in 0..s.na() - 1 {
                        t.a(ia, a, 1);
                    }
                    for b in 0..s.nb() - 1 {
                        t.b(ib, b, 1);
                    }
                }
            }
            t.finish(bound, "positivity")
        }
    }
}

/// Ordered ways of writing `n` as a sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return if n >= 1 { vec![vec![n]] } else { Vec::new() };
    }
    (1..n)
        .flat_map(|first| {
            compositions(n - first, k - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Coarse-graining maps, one per orbit of ways to merge `large` outcomes
/// into `small` ones on `settings` settings.
fn merge_patterns(large: usize, small: usize, settings: usize) -> Vec<Vec<Vec<usize>>> {
    let maps: Vec<Vec<usize>> = compositions(large, small)
        .into_iter()
        .map(|parts| {
            parts
                .iter()
                .enumerate()
                .flat_map(|(label, &size)| std::iter::repeat_n(label, size))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..settings {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Vec<usize>>| {
                maps.iter().map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m.clone());
                    p
                })
            })
            .collect();
    }
    out
}

const MAX_PATTERNS: usize = 4096;

/// Every lift of `q` into `s` up to relabelings of `s`.
fn lifts(q: &Inequality, s: Scenario) -> Vec<Inequality> {
    let qs = q.scenario();
    if qs.ma() > s.ma() || qs.mb() > s.mb() || qs.na() > s.na() || qs.nb() > s.nb() {
        return Vec::new();
    }
    let pa = merge_patterns(s.na(), qs.na(), qs.ma());
    let pb = merge_patterns(s.nb(), qs.nb(), qs.mb());
    if pa.len() * pb.len() > MAX_PATTERNS {
        return lift(q, s).into_iter().collect();
    }
    let mut out = Vec::new();
    for a in &pa {
        for b in &pb {
            if let Ok(l) = merge_outcomes(q, a, b).and_then(|m| embed_settings(&m, s)) {
                out.push(l);
            }
        }
    }
    out
}

/// Families with an identifiable orbit in `s`, lifted into `s`.
fn candidates(s: Scenario) -> Vec<Inequality> {
    let mut fams = vec![FamilyId::Chsh, FamilyId::I3322, FamilyId::I2233];
    fams.extend((1..=3).map(FamilyId::I3422));
    let m = s.ma().max(s.mb());
    let n = s.na().max(s.nb());
    fams.extend((4..=m).map(FamilyId::Imm22));
    fams.extend((4..=n).map(FamilyId::I22nn));
    for mm in 3..=m {
        for nn in 3..=n {
            fams.push(FamilyId::Immnn(mm, nn));
        }
    }
    let mut out = vec![make(FamilyId::Positivity {
        scenario: s,
        ia: 0,
        ib: 0,
        ja: 0,
        jb: 0,
    })
    .expect("positivity exists in every scenario")];
    for f in fams {
        let Ok(q) = make(f) else { continue };
        out.extend(lifts(&q, s));
        if !q.scenario().is_symmetric() {
            out.extend(lifts(&transpose_inequality(&q), s));
        }
    }
    out
}

/// Name of the known family whose orbit contains `q`, if any.
pub fn identify(q: &Inequality) -> Result<Option<String>> {
    type Names = Arc<HashMap<Vec<i64>, String>>;
    static CACHE: OnceLock<Mutex<HashMap<Scenario, Names>>> = OnceLock::new();
    let s = q.scenario();
    let cache = CACHE.get_or_init(Default::default);
    let cached = cache.lock().expect("name cache poisoned").get(&s).cloned();
    let names = match cached {
        Some(n) => n,
        None => {
            let mut map = HashMap::new();
            for c in candidates(s) {
                let key = canonical_slack(&c)?;
                let label = c.label().unwrap_or("unnamed").to_owned();
                map.entry(key).or_insert(label);
            }
            let names = Arc::new(map);
            cache
                .lock()
                .expect("name cache poisoned")
                .insert(s, names.clone());
            names
        }
    };
    Ok(names.get(&canonical_slack(q)?).cloned())
}
