//! Plain-text tables for inequalities.
//!
//! ```text
//! scenario 2 2 2 2
//! bound 0
//! label CHSH
//! -1 | 0
//! -1 | 1 | 1
//! 0 | 1 | -1
//! end
//! ```
//!
//! The first table row holds the A-marginal blocks. Every following row
//! belongs to one `(B setting, B outcome)` pair: its B-marginal entry, then
//! one joint block per A setting. The `label` line is optional.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::polytope::Inequality;
use crate::scenario::Scenario;

fn join(v: impl Iterator<Item = i64>) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Renders `q` as a table block terminated by `end`.
pub fn to_text(q: &Inequality) -> String {
    let s = q.scenario();
    let c = q.coeffs();
    let (ka, kb) = (s.na() - 1, s.nb() - 1);
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} {} {} {}", s.ma(), s.mb(), s.na(), s.nb());
    let _ = writeln!(out, "bound {}", q.bound());
    if let Some(label) = q.label() {
        let _ = writeln!(out, "label {label}");
    }
    let header: Vec<String> = (0..s.ma())
        .map(|ia| join((0..ka).map(|ja| c[s.a_marginal_index(ia, ja)])))
        .collect();
    let _ = writeln!(out, "{}", header.join(" | "));
    for ib in 0..s.mb() {
        for jb in 0..kb {
            let mut cells = vec![c[s.b_marginal_index(ib, jb)].to_string()];
            cells.extend(
                (0..s.ma()).map(|ia| join((0..ka).map(|ja| c[s.joint_index(ia, ib, ja, jb)]))),
            );
            let _ = writeln!(out, "{}", cells.join(" | "));
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn ints(line: usize, text: &str) -> Result<Vec<i64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| err(line, format!("not an integer: {t:?}")))
        })
        .collect()
}

fn blocks(line: usize, text: &str, sizes: &[usize]) -> Result<Vec<Vec<i64>>> {
    let parts: Vec<&str> = text.split('|').collect();
    if parts.len() != sizes.len() {
        return Err(err(
            line,
            format!("expected {} blocks, found {}", sizes.len(), parts.len()),
        ));
    }
    parts
        .iter()
        .zip(sizes)
        .map(|(p, &n)| {
            let v = ints(line, p)?;
            if v.len() != n {
                return Err(err(line, format!("block {p:?} should have {n} entries")));
            }
            Ok(v)
        })
        .collect()
}

fn parse_one(lines: &mut Lines<'_>) -> Result<Option<Inequality>> {
    let Some((ln, head)) = lines.next() else {
        return Ok(None);
    };
    let dims = head
        .strip_prefix("scenario")
        .ok_or_else(|| err(ln, "expected `scenario mA mB nA nB`"))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(ln, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    let [ma, mb, na, nb] = dims[..] else {
        return Err(err(ln, "scenario needs four counts"));
    };
    let s = Scenario::new(ma, mb, na, nb).map_err(|e| err(ln, e.to_string()))?;

    let (ln, bound_line) = lines.next().ok_or_else(|| err(ln + 1, "missing bound"))?;
    let bound = bound_line
        .strip_prefix("bound")
        .map(str::trim)
        .and_then(|b| b.parse::<i64>().ok())
        .ok_or_else(|| err(ln, "expected `bound <integer>`"))?;

    let (mut ln, mut row) = lines.next().ok_or_else(|| err(ln + 1, "missing table"))?;
    let mut label = None;
    if let Some(l) = row.strip_prefix("label ") {
        label = Some(l.trim().to_owned());
        (ln, row) = lines.next().ok_or_else(|| err(ln + 1, "missing table"))?;
    }

    let (ka, kb) = (na - 1, nb - 1);
    let mut coeffs = vec![0; s.cg_dimension()];
    for (ia, block) in blocks(ln, row, &vec![ka; ma])?.into_iter().enumerate() {
        for (ja, v) in block.into_iter().enumerate() {
            coeffs[s.a_marginal_index(ia, ja)] = v;
        }
    }
    let mut sizes = vec![1];
    sizes.extend(std::iter::repeat_n(ka, ma));
    for ib in 0..mb {
        for jb in 0..kb {
            let (ln, row) = lines.next().ok_or_else(|| err(ln + 1, "table too short"))?;
            let bl = blocks(ln, row, &sizes)?;
            coeffs[s.b_marginal_index(ib, jb)] = bl[0][0];
            for (ia, block) in bl[1..].iter().enumerate() {
                for (ja, &v) in block.iter().enumerate() {
                    coeffs[s.joint_index(ia, ib, ja, jb)] = v;
                }
            }
        }
    }
    match lines.next() {
        Some((_, "end")) => {}
        Some((l, other)) => return Err(err(l, format!("expected `end`, found {other:?}"))),
        None => return Err(err(ln + 1, "missing `end`")),
    }
    let mut q = Inequality::new(s, coeffs, bound).map_err(|e| err(ln, e.to_string()))?;
    q.set_label(label);
    Ok(Some(q))
}

/// Parses every block in `text`.
pub fn parse_inequalities(text: &str) -> Result<Vec<Inequality>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let mut out = Vec::new();
    while let Some(q) = parse_one(&mut lines)? {
        out.push(q);
    }
    Ok(out)
}

/// Parses exactly one block.
pub fn parse_inequality(text: &str) -> Result<Inequality> {
    let mut all = parse_inequalities(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(err(1, format!("expected one inequality, found {n}"))),
    }
}
