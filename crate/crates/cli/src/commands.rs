use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bellscope::catalog::{make, parse_inequalities, to_text, FamilyId};
use bellscope::finemodel::{certify_local, Locality};
use bellscope::polytope::{enumerate_facets_with, is_facet, lhv_bound, EnumerationOptions};
use bellscope::quantum::{
    fig1_grid, fig1_scan, isotropic, onset_by_bisection, orbit_max_value, partial_trace, paulis,
    seesaw_maximize, sharing_measurements, sharing_state, swap_subsystems, werner,
    MeasurementClass, OnsetOptions, ProjectiveMeasurement, SeesawOptions,
};
use bellscope::symmetry::classify_orbits;
use bellscope::{CgVector, Inequality, Rational, Scalar};
use serde_json::{json, Value};

use crate::behavior::{parse_behavior, parse_scenario, Behavior};
use crate::report::{fmt_f64, fmt_rational, git_blob_hash, num, Recorder, RunReport};
use crate::{Cli, Command, InequalitySource, SeesawArgs};

/// Names accepted by `family`, one representative per parameterized family.
const FAMILIES: &[&str] = &[
    "CHSH",
    "I3322",
    "I2233",
    "Imm22(m)",
    "I22nn(n)",
    "Immnn(m,n)",
    "I3422_1",
    "I3422_2",
    "I3422_3",
];

/// 2 for resource limits and non-convergence, 1 for everything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<bellscope::Error>() {
        Some(
            bellscope::Error::Resource(_)
            | bellscope::Error::NonConvergence { .. }
            | bellscope::Error::Overflow(_),
        ) => 2,
        _ => 1,
    }
}

struct Output {
    report: Option<PathBuf>,
}

impl Output {
    /// Writes the primary artifact (if any) to `out` or stdout, then the
    /// report to its file, or to whichever terminal stream is still free.
    fn emit(&self, report: &RunReport, artifact: Option<(&str, Option<&Path>)>) -> Result<()> {
        let mut stdout_taken = false;
        if let Some((text, out)) = artifact {
            match out {
                Some(path) => std::fs::write(path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => {
                    write_stream(&mut std::io::stdout().lock(), text)?;
                    stdout_taken = true;
                }
            }
        }
        let json = serde_json::to_string_pretty(report)? + "\n";
        match &self.report {
            Some(path) => {
                std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
            }
            None if stdout_taken => write_stream(&mut std::io::stderr().lock(), &json)?,
            None => write_stream(&mut std::io::stdout().lock(), &json)?,
        }
        Ok(())
    }
}

/// Writes `text`, treating a closed pipe on the reading end as success.
fn write_stream(w: &mut impl Write, text: &str) -> Result<()> {
    match w.write_all(text.as_bytes()).and_then(|()| w.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn family(name: &str) -> Result<FamilyId> {
    name.parse::<FamilyId>()
        .with_context(|| format!("unknown family `{name}`; try `bellscope family --list`"))
}

/// The inequalities named by `src`, plus a description of them for the
/// report inputs.
fn load(src: &InequalitySource) -> Result<(Vec<Inequality>, Value)> {
    match (&src.family, &src.inequality) {
        (Some(name), _) => {
            let f = family(name)?;
            Ok((vec![make(f)?], json!({ "family": f.to_string() })))
        }
        (None, Some(path)) => {
            let text = read_input(path)?;
            let qs = parse_inequalities(&text)?;
            if qs.is_empty() {
                bail!("{} contains no inequality", path.display());
            }
            Ok((
                qs,
                json!({ "inequality_hash": git_blob_hash(text.as_bytes()) }),
            ))
        }
        (None, None) => bail!("give --family or --inequality"),
    }
}

fn single(src: &InequalitySource) -> Result<(Inequality, Value)> {
    let (mut qs, desc) = load(src)?;
    if qs.len() != 1 {
        bail!("expected one inequality, found {}", qs.len());
    }
    Ok((qs.remove(0), desc))
}

fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .with_context(|| format!("`{text}` must be two comma-separated integers"))?;
    match parts[..] {
        [a, b] if a > 0 && b > 0 => Ok((a, b)),
        _ => bail!("`{text}` must be two positive comma-separated integers"),
    }
}

fn seesaw_options(a: &SeesawArgs) -> SeesawOptions {
    SeesawOptions {
        restarts: a.restarts,
        seed: a.seed,
        max_iterations: a.max_iterations,
        class: if a.rank1 {
            MeasurementClass::Rank1
        } else {
            MeasurementClass::Projective
        },
        ..SeesawOptions::default()
    }
}

fn seesaw_inputs(a: &SeesawArgs) -> Value {
    json!({
        "restarts": a.restarts,
        "seed": a.seed,
        "max_iterations": a.max_iterations,
        "measurement_class": if a.rank1 { "rank1" } else { "projective" },
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

fn scenario_flag(q: &Inequality) -> String {
    let s = q.scenario();
    format!("{},{},{},{}", s.ma(), s.mb(), s.na(), s.nb())
}

fn measurement_json(m: &ProjectiveMeasurement<f64>) -> Value {
    let mut out = json!({ "ranks": m.ranks() });
    if m.dim() == 2 {
        let s = paulis::<f64>();
        let bloch: Vec<Vec<Value>> = m
            .projectors()
            .iter()
            .map(|p| s.iter().map(|sigma| num((p * sigma).trace().re)).collect())
            .collect();
        out["bloch"] = json!(bloch);
    }
    out
}

trait ToJson {
    fn to_json(&self) -> Value;
}

impl ToJson for Rational {
    fn to_json(&self) -> Value {
        Value::from(fmt_rational(self))
    }
}

impl ToJson for f64 {
    fn to_json(&self) -> Value {
        num(*self)
    }
}

fn certify<T: Scalar + PartialOrd + ToJson>(v: &CgVector<T>) -> Result<Value> {
    Ok(match certify_local(v)? {
        Locality::Local(model) => json!({
            "local": true,
            "model": {
                "settings": model.settings(),
                "index_order": "a_1 .. a_m b_1 b_2, first setting most significant",
                "entries": model.entries().iter().map(ToJson::to_json).collect::<Vec<_>>(),
            },
        }),
        Locality::Nonlocal(q) => {
            let value = q.evaluate(v);
            json!({
                "local": false,
                "violated": q.label(),
                "value": value.to_json(),
                "bound": q.bound(),
                "inequality": to_text(&q),
            })
        }
    })
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let out = Output { report: cli.report };
    match cli.command {
        Command::Enumerate {
            scenario,
            out: file,
        } => {
            let s = parse_scenario(&scenario)?;
            let mut rec = Recorder::new("enumerate", json!({ "scenario": scenario }));
            rec.scenario(s);
            let facets = enumerate_facets_with(s, &EnumerationOptions::from_env())?;
            let text: String = facets.iter().map(to_text).collect();
            let report = rec.finish(json!({
                "facets": facets.len(),
                "output_hash": git_blob_hash(text.as_bytes()),
            }));
            out.emit(&report, Some((&text, file.as_deref())))
        }
        Command::Classify { file } => {
            let text = read_input(&file)?;
            let facets = parse_inequalities(&text)?;
            if facets.is_empty() {
                bail!("{} contains no inequality", file.display());
            }
            let mut rec = Recorder::new(
                "classify",
                json!({ "facets_hash": git_blob_hash(text.as_bytes()) }),
            );
            rec.scenario(facets[0].scenario());
            let orbits = classify_orbits(&facets)?;
            let mut table = format!("{:>6}  {:>8}  label\n", "class", "size");
            let classes: Vec<Value> = orbits
                .classes
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let label = c.label.clone().unwrap_or_else(|| "unnamed".into());
                    let _ = writeln!(table, "{:>6}  {:>8}  {label}", k + 1, c.orbit_size);
                    json!({
                        "label": label,
                        "orbit_size": c.orbit_size,
                        "present": c.members.len(),
                        "canonical": to_text(&c.canonical),
                    })
                })
                .collect();
            let _ = writeln!(table, "{:>6}  {:>8}  total", "", orbits.total());
            let report = rec.finish(json!({
                "group_order": orbits.group_order,
                "total": orbits.total(),
                "classes": classes,
            }));
            out.emit(&report, Some((&table, None)))
        }
        Command::Qmax {
            source,
            dims,
            seesaw,
        } => {
            let (q, desc) = single(&source)?;
            let (da, db) = parse_pair(&dims)?;
            let inputs = merge(
                merge(desc, json!({ "dims": [da, db] })),
                seesaw_inputs(&seesaw),
            );
            let mut rec = Recorder::new("qmax", inputs);
            rec.scenario(q.scenario());
            match seesaw_maximize::<f64>(&q, (da, db), &seesaw_options(&seesaw)) {
                Ok(r) => {
                    let m = r.state.matrix();
                    let state: Vec<Vec<[Value; 2]>> = (0..m.nrows())
                        .map(|i| {
                            (0..m.ncols())
                                .map(|j| [num(m[(i, j)].re), num(m[(i, j)].im)])
                                .collect()
                        })
                        .collect();
                    let report = rec.finish(json!({
                        "converged": true,
                        "value": num(r.value),
                        "bound": q.bound(),
                        "violation": num(r.value - q.bound() as f64),
                        "restart": r.restart,
                        "iterations": r.iterations,
                        "converged_restarts": r.converged_restarts,
                        "state": state,
                        "measurements": {
                            "a": r.measurements.a().iter().map(measurement_json).collect::<Vec<_>>(),
                            "b": r.measurements.b().iter().map(measurement_json).collect::<Vec<_>>(),
                        },
                    }));
                    out.emit(&report, None)
                }
                Err(e @ bellscope::Error::NonConvergence { .. }) => {
                    let bellscope::Error::NonConvergence { iterations, best } = e else {
                        unreachable!()
                    };
                    let report = rec.finish(json!({
                        "converged": false,
                        "best_value": num(best),
                        "iterations": iterations,
                    }));
                    out.emit(&report, None)?;
                    Err(e.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::LhvBound { source } => {
            let (qs, desc) = load(&source)?;
            let mut rec = Recorder::new("lhv-bound", desc);
            rec.scenario(qs[0].scenario());
            let rows = qs
                .iter()
                .map(|q| {
                    Ok(json!({
                        "label": q.label(),
                        "scenario": scenario_flag(q),
                        "lhv_bound": lhv_bound(q.coeffs(), q.scenario())?,
                        "stated_bound": q.bound(),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            out.emit(&rec.finish(json!({ "inequalities": rows })), None)
        }
        Command::FacetCheck { file } => {
            let text = read_input(&file)?;
            let qs = parse_inequalities(&text)?;
            if qs.is_empty() {
                bail!("no inequality in the input");
            }
            let mut rec = Recorder::new(
                "facet-check",
                json!({ "inequality_hash": git_blob_hash(text.as_bytes()) }),
            );
            rec.scenario(qs[0].scenario());
            let mut all = true;
            let rows = qs
                .iter()
                .map(|q| {
                    let cert = is_facet(q)?;
                    all &= cert.is_facet();
                    Ok(json!({
                        "label": q.label(),
                        "scenario": scenario_flag(q),
                        "facet": cert.is_facet(),
                        "affine_rank": cert.affine_rank,
                        "required_rank": q.scenario().cg_dimension() - 1,
                        "tight_vertices": cert.tight_vertex_indices.len(),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            out.emit(
                &rec.finish(json!({ "all_facets": all, "inequalities": rows })),
                None,
            )
        }
        Command::FineCertify { file } => {
            let text = read_input(&file)?;
            let mut rec = Recorder::new(
                "fine-certify",
                json!({ "behavior_hash": git_blob_hash(text.as_bytes()) }),
            );
            let results = match parse_behavior(&text)? {
                Behavior::Exact(v) => {
                    rec.scenario(v.scenario());
                    merge(json!({ "arithmetic": "exact" }), certify(&v)?)
                }
                Behavior::Float(v) => {
                    rec.scenario(v.scenario());
                    merge(json!({ "arithmetic": "f64" }), certify(&v)?)
                }
            };
            out.emit(&rec.finish(results), None)
        }
        Command::WernerScan {
            source,
            dim,
            lo,
            hi,
            iterations,
            seesaw,
        } => {
            let (q, desc) = single(&source)?;
            if dim < 2 {
                bail!("--dim must be at least 2");
            }
            let inputs = merge(
                merge(
                    desc,
                    json!({ "dim": dim, "lo": lo, "hi": hi, "iterations": iterations }),
                ),
                seesaw_inputs(&seesaw),
            );
            let mut rec = Recorder::new("werner-scan", inputs);
            rec.scenario(q.scenario());
            let opts = OnsetOptions {
                lo,
                hi,
                iterations,
                seesaw: seesaw_options(&seesaw),
                ..OnsetOptions::default()
            };
            let onset = if dim == 2 {
                onset_by_bisection(&q, (2, 2), werner::<f64>, &opts)?
            } else {
                onset_by_bisection(&q, (dim, dim), |p: f64| isotropic(dim, p), &opts)?
            };
            let width = (hi - lo) / f64::powi(2.0, iterations as i32);
            let report = rec.finish(json!({
                "state": if dim == 2 { "werner".to_owned() } else { format!("isotropic({dim})") },
                "onset": num(onset),
                "bracket_width": num(width),
            }));
            out.emit(&report, None)
        }
        Command::Fig1 {
            csv,
            points,
            restarts,
            seed,
            max_iterations,
            out: file,
        } => {
            let inputs = json!({
                "points": points,
                "restarts": restarts,
                "seed": seed,
                "max_iterations": max_iterations,
                "measurement_class": "rank1",
            });
            let rec = Recorder::new("fig1", inputs);
            let opts = SeesawOptions {
                restarts,
                seed,
                max_iterations,
                class: MeasurementClass::Rank1,
                ..SeesawOptions::default()
            };
            let rows = fig1_scan(&fig1_grid::<f64>(points), &opts)?;
            let mut table = String::from("theta,i_chsh_tilde,i3322_tilde\n");
            for r in &rows {
                let _ = writeln!(
                    table,
                    "{},{},{}",
                    fmt_f64(r.theta),
                    fmt_f64(r.i_chsh_tilde),
                    fmt_f64(r.i3322_tilde)
                );
            }
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "theta": num(r.theta),
                        "lambda": num(r.lambda),
                        "i_chsh_tilde": num(r.i_chsh_tilde),
                        "i3322_tilde": num(r.i3322_tilde),
                    })
                })
                .collect();
            let report = rec.finish(json!({
                "rows": json_rows,
                "csv_hash": git_blob_hash(table.as_bytes()),
            }));
            out.emit(&report, csv.then_some((table.as_str(), file.as_deref())))
        }
        Command::Sharing { mu } => {
            let mut rec = Recorder::new("sharing", json!({ "mu": mu }));
            let q = make(FamilyId::I3322)?;
            rec.scenario(q.scenario());
            let rho = sharing_state::<f64>(mu)?;
            let m = sharing_measurements();
            let mut pairs = serde_json::Map::new();
            let mut values = Vec::new();
            for (name, keep) in [("AB", [0, 1]), ("AC", [0, 2])] {
                let reduced = swap_subsystems(&partial_trace(&rho, &[2, 2, 2], &keep)?, 2, 2)?;
                let (v, best) = orbit_max_value(&q, &reduced, &m)?;
                values.push(v);
                pairs.insert(
                    name.into(),
                    json!({ "value": num(v), "inequality": to_text(&best) }),
                );
            }
            let report = rec.finish(json!({
                "pairs": pairs,
                "difference": num((values[0] - values[1]).abs()),
            }));
            out.emit(&report, None)
        }
        Command::Family { name, emit, list } => {
            if list {
                let rec = Recorder::new("family", json!({ "list": true }));
                let text: String = FAMILIES.iter().map(|f| format!("{f}\n")).collect();
                return out.emit(
                    &rec.finish(json!({ "families": FAMILIES })),
                    Some((&text, None)),
                );
            }
            let Some(name) = name else {
                bail!("give a family name or --list");
            };
            let f = family(&name)?;
            let q = make(f)?;
            let mut rec = Recorder::new("family", json!({ "family": f.to_string() }));
            rec.scenario(q.scenario());
            let text = to_text(&q);
            let report = rec.finish(json!({
                "label": q.label(),
                "scenario": scenario_flag(&q),
                "bound": q.bound(),
                "inequality": text,
            }));
            out.emit(&report, emit.then_some((text.as_str(), None)))
        }
    }
}
