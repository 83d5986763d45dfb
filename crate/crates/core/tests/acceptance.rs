//! One pass/fail line per acceptance criterion.
//!
//! Run with `cargo test -p bellscope --test acceptance`. The process exits
//! with status 1 if any gated criterion fails; extended criteria are
//! reported but do not affect the exit status.

mod common;

use std::error::Error;
use std::fmt::Write as _;
use std::time::Instant;

use bellscope::catalog::{make, restrict_deterministic, restrict_outcomes, FamilyId, Party};
use bellscope::finemodel::{certify_local, fine_model, Locality};
use bellscope::polytope::{enumerate_facets, is_facet, lhv_bound};
use bellscope::quantum::{
    bell_operator, fig1_grid, fig1_scan, horodecki_chsh, onset_by_bisection, orbit_max_value,
    partial_trace, planar_singlet_measurements, seesaw_maximize, seesaw_maximize_on_state,
    sharing_measurements, sharing_state, sigma_measurements, sigma_state, singlet, swap_subsystems,
    werner, MeasurementClass, OnsetOptions, SeesawOptions,
};
use bellscope::symmetry::{canonical_form, classify_orbits};
use bellscope::{Inequality, Scenario};
use common::{in_hull, random_local, random_mixed, rng, vertex_points};

type Outcome = Result<(bool, String), Box<dyn Error>>;

struct Criterion {
    id: u32,
    gated: bool,
    name: &'static str,
    run: fn() -> Outcome,
}

fn scenario(ma: usize, mb: usize, na: usize, nb: usize) -> Scenario {
    Scenario::new(ma, mb, na, nb).expect("valid scenario")
}

fn seesaw(restarts: usize) -> SeesawOptions {
    SeesawOptions {
        restarts,
        ..SeesawOptions::default()
    }
}

/// Orbit sizes summed per family label, sorted by size.
fn family_sizes(facets: &[Inequality]) -> Result<Vec<(usize, String)>, Box<dyn Error>> {
    let report = classify_orbits(facets)?;
    let mut out: Vec<(usize, String)> = Vec::new();
    for c in &report.classes {
        let family = c.label.clone().unwrap_or_else(|| "unnamed".into());
        let family = family.split('(').next().unwrap_or_default().to_owned();
        match out.iter_mut().find(|(_, l)| *l == family) {
            Some(entry) => entry.0 += c.orbit_size,
            None => out.push((c.orbit_size, family)),
        }
    }
    out.sort();
    Ok(out)
}

fn show(sizes: &[(usize, String)]) -> String {
    sizes
        .iter()
        .map(|(n, l)| format!("{l}:{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn facet_counts() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for ((ma, mb, na, nb), expected) in [
        ((2, 2, 2, 2), 24),
        ((2, 3, 2, 2), 48),
        ((3, 3, 2, 2), 684),
        ((2, 2, 2, 3), 96),
        ((2, 2, 2, 4), 424),
        ((2, 2, 3, 3), 1116),
    ] {
        let n = enumerate_facets(scenario(ma, mb, na, nb))?.len();
        ok &= n == expected;
        write!(detail, "{ma}{mb}{na}{nb}={n} ")?;
    }
    Ok((ok, detail))
}

fn orbit_classification() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    let cases = [
        (
            scenario(2, 2, 2, 2),
            None,
            vec![(8, "CHSH"), (16, "positivity")],
        ),
        (
            scenario(3, 3, 2, 2),
            Some((576, FamilyId::I3322)),
            vec![(36, "positivity"), (72, "CHSH"), (576, "I3322")],
        ),
        (
            scenario(2, 2, 3, 3),
            Some((432, FamilyId::I2233)),
            vec![(36, "positivity"), (432, "I2233"), (648, "CHSH")],
        ),
    ];
    for (s, new_class, expected) in cases {
        let facets = enumerate_facets(s)?;
        let sizes = family_sizes(&facets)?;
        let expected: Vec<(usize, String)> = expected
            .into_iter()
            .map(|(n, l)| (n, l.to_owned()))
            .collect();
        ok &= sizes == expected;
        if let Some((size, family)) = new_class {
            let report = classify_orbits(&facets)?;
            let target = canonical_form(&make(family)?)?;
            let matched = report
                .classes
                .iter()
                .any(|c| c.orbit_size == size && c.canonical == target);
            ok &= matched;
            write!(
                detail,
                "{s}: {} [{family} canonical match: {matched}]; ",
                show(&sizes)
            )?;
        } else {
            write!(detail, "{s}: {}; ", show(&sizes))?;
        }
    }
    Ok((ok, detail))
}

fn extended_3422() -> Outcome {
    let start = Instant::now();
    let facets = enumerate_facets(scenario(3, 4, 2, 2))?;
    let sizes = family_sizes(&facets)?;
    let expected: Vec<(usize, String)> = [
        (48, "positivity"),
        (144, "CHSH"),
        (2304, "I3322"),
        (2304, "I3422_1"),
        (3027, "I3422_2"),
        (4608, "I3422_3"),
    ]
    .into_iter()
    .map(|(n, l)| (n, l.to_owned()))
    .collect();
    let mut found = sizes.clone();
    found.sort_by(|a, b| a.1.cmp(&b.1));
    let mut want = expected;
    want.sort_by(|a, b| a.1.cmp(&b.1));
    let ok = facets.len() == 12480 && found == want;
    Ok((
        ok,
        format!(
            "{} facets, {} in {:.1}s (expected 12480, I3422_2:3027)",
            facets.len(),
            show(&sizes),
            start.elapsed().as_secs_f64()
        ),
    ))
}

fn lhv_bounds() -> Outcome {
    let mut families = vec![FamilyId::Chsh, FamilyId::I3322, FamilyId::I2233];
    families.extend((2..=6).map(FamilyId::I22nn));
    families.extend((2..=6).map(FamilyId::Imm22));
    families.extend(
        [(2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (4, 3), (5, 3)]
            .map(|(m, n)| FamilyId::Immnn(m, n)),
    );
    let mut ok = true;
    let mut wrong = Vec::new();
    for f in families.iter().copied().chain((1..=3).map(FamilyId::I3422)) {
        let q = make(f)?;
        let expected = match f {
            FamilyId::I3422(1) | FamilyId::I3422(3) => 2,
            FamilyId::I3422(_) => 1,
            _ => 0,
        };
        let b = lhv_bound(q.coeffs(), q.scenario())?;
        if b != expected || q.bound() != expected {
            ok = false;
            wrong.push(format!("{f}={b}"));
        }
    }
    Ok((
        ok,
        format!(
            "{} expressions checked; mismatches: {wrong:?}",
            families.len() + 3
        ),
    ))
}

fn facet_verification() -> Outcome {
    let mut checked = Vec::new();
    let mut failed = Vec::new();
    let members = (2..=6).map(FamilyId::Imm22).chain(
        [(2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (4, 3), (5, 3)]
            .map(|(m, n)| FamilyId::Immnn(m, n)),
    );
    for f in members {
        let q = make(f)?;
        if !is_facet(&q)?.is_facet() {
            failed.push(f.to_string());
        }
        checked.push(f.to_string());
    }
    Ok((
        failed.is_empty(),
        format!("{} checked; not facets: {failed:?}", checked.len()),
    ))
}

fn quantum_maxima() -> Outcome {
    let opts = seesaw(50);
    let chsh = seesaw_maximize::<f64>(&make(FamilyId::Chsh)?, (2, 2), &opts)?.value;
    let i3322 = seesaw_maximize::<f64>(&make(FamilyId::I3322)?, (2, 2), &opts)?.value;
    let planar = bell_operator(&make(FamilyId::I3322)?, &planar_singlet_measurements())?
        .value(&singlet::<f64>())?;
    let ok = (chsh - 0.207107).abs() <= 1e-5
        && (i3322 - 0.25).abs() <= 1e-4
        && (planar - 0.25).abs() <= 1e-6;
    Ok((
        ok,
        format!("CHSH {chsh:.9}, I3322 {i3322:.9}, planar {planar:.12}"),
    ))
}

fn relevance() -> Outcome {
    let sigma = sigma_state::<f64>()?;
    let q = make(FamilyId::I3322)?;
    let chsh = horodecki_chsh(&sigma)?;
    let m = sigma_measurements();
    let (direct, _) = orbit_max_value(&q, &sigma, &m)?;
    let (swapped, _) = orbit_max_value(&q, &swap_subsystems(&sigma, 2, 2)?, &m)?;
    let angles = direct.max(swapped);
    let best = seesaw_maximize_on_state(&q, &sigma, (2, 2), &seesaw(50))?.value;
    let ok = chsh <= 0.0 && (angles - 0.0129).abs() <= 5e-4 && best >= 0.0129 - 5e-4;
    Ok((
        ok,
        format!("Horodecki CHSH {chsh:.6}, I3322 at listed angles {angles:.6} (best relabeling, either party order), see-saw {best:.8}"),
    ))
}

#[allow(clippy::approx_constant)]
fn werner_thresholds() -> Outcome {
    let opts = OnsetOptions::default();
    let chsh = onset_by_bisection(&make(FamilyId::Chsh)?, (2, 2), werner::<f64>, &opts)?;
    let i3322 = onset_by_bisection(&make(FamilyId::I3322)?, (2, 2), werner::<f64>, &opts)?;
    let rank1 = OnsetOptions {
        seesaw: SeesawOptions {
            class: MeasurementClass::Rank1,
            max_iterations: 5000,
            ..opts.seesaw.clone()
        },
        ..opts.clone()
    };
    let i3322_rank1 = onset_by_bisection(&make(FamilyId::I3322)?, (2, 2), werner::<f64>, &rank1)?;
    let ok = (chsh - 0.7071).abs() <= 0.005 && (i3322 - 0.75).abs() <= 0.01;
    Ok((
        ok,
        format!("CHSH onset {chsh:.5}, I3322 onset {i3322:.5} (rank-one measurements only: {i3322_rank1:.5})"),
    ))
}

fn sharing() -> Outcome {
    let q = make(FamilyId::I3322)?;
    let rho = sharing_state::<f64>(0.852)?;
    let m = sharing_measurements();
    let mut values = Vec::new();
    for keep in [[0, 1], [0, 2]] {
        let pair = swap_subsystems(&partial_trace(&rho, &[2, 2, 2], &keep)?, 2, 2)?;
        values.push(orbit_max_value(&q, &pair, &m)?.0);
    }
    let ok =
        values.iter().all(|v| (v - 0.0041).abs() <= 5e-4) && (values[0] - values[1]).abs() <= 1e-9;
    Ok((ok, format!("AB {:.7}, AC {:.7}", values[0], values[1])))
}

fn csv(rows: &[bellscope::quantum::Fig1Row<f64>]) -> String {
    let mut out = String::from("theta,i_chsh_tilde,i3322_tilde\n");
    for r in rows {
        out.push_str(&format!(
            "{:.11e},{:.11e},{:.11e}\n",
            r.theta, r.i_chsh_tilde, r.i3322_tilde
        ));
    }
    out
}

fn fig1_property() -> Outcome {
    use std::f64::consts::PI;
    let opts = SeesawOptions {
        class: MeasurementClass::Rank1,
        max_iterations: 5000,
        ..SeesawOptions::default()
    };
    let grid = fig1_grid::<f64>(25);
    let rows = fig1_scan(&grid, &opts)?;
    let chsh_dev = rows
        .iter()
        .map(|r| (r.i_chsh_tilde - 1.0).abs())
        .fold(0.0, f64::max);
    let edge: Vec<_> = rows
        .iter()
        .filter(|r| (r.theta < PI / 8.0 || r.theta > 3.0 * PI / 8.0) && r.i3322_tilde > 1.0)
        .collect();
    let deterministic = csv(&rows) == csv(&fig1_scan(&grid, &opts)?);
    let ok = chsh_dev <= 1e-6 && !edge.is_empty() && deterministic;
    let peak = rows.iter().map(|r| r.i3322_tilde).fold(f64::MIN, f64::max);
    Ok((
        ok,
        format!(
            "max |I_CHSH~ - 1| {chsh_dev:.1e}, {} edge points with I3322~ > 1 (peak {peak:.5}), CSV reproducible: {deterministic}",
            edge.len()
        ),
    ))
}

fn fine_models() -> Outcome {
    let s = scenario(3, 2, 2, 2);
    let mut r = rng(2024);
    let mut exact = 0;
    for _ in 0..500 {
        let v = random_local(s, &mut r);
        let model = fine_model(&v)?;
        if model.is_valid() && model.behavior() == v {
            exact += 1;
        }
    }
    let verts = vertex_points(s);
    let (mut agree, mut inside) = (0, 0);
    for _ in 0..500 {
        let v = random_mixed(s, &mut r);
        let hull = in_hull(&verts, v.coords());
        inside += usize::from(hull);
        let certified = match certify_local(&v)? {
            Locality::Local(m) => m.behavior() == v,
            Locality::Nonlocal(_) => false,
        };
        agree += usize::from(certified == hull);
    }
    Ok((
        exact == 500 && agree == 500,
        format!(
            "{exact}/500 exact models; {agree}/500 agree with the hull oracle ({inside} inside)"
        ),
    ))
}

fn reductions() -> Outcome {
    let chsh = canonical_form(&make(FamilyId::Chsh)?)?;
    let mut results = Vec::new();
    let restricted = restrict_deterministic(
        &make(FamilyId::I3322)?,
        &[(Party::A, 2, 1), (Party::B, 0, 1)],
    )?;
    results.push(("I3322 restricted", canonical_form(&restricted)? == chsh));
    let merged = restrict_outcomes(
        &make(FamilyId::I2233)?,
        &[vec![1, 2], vec![1, 2]],
        &[vec![0, 2], vec![0, 2]],
    )?;
    results.push(("I2233 outcome-restricted", canonical_form(&merged)? == chsh));
    results.push((
        "Imm22(2)",
        canonical_form(&make(FamilyId::Imm22(2))?)? == chsh,
    ));
    for n in 2..=3 {
        let a = canonical_form(&make(FamilyId::Immnn(2, n))?)?;
        results.push((
            "Immnn(2,n) = I22nn(n)",
            a == canonical_form(&make(FamilyId::I22nn(n))?)?,
        ));
    }
    for m in 2..=3 {
        let a = canonical_form(&make(FamilyId::Immnn(m, 2))?)?;
        results.push((
            "Immnn(m,2) = Imm22(m)",
            a == canonical_form(&make(FamilyId::Imm22(m))?)?,
        ));
    }
    let failed: Vec<_> = results
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    Ok((
        failed.is_empty(),
        format!("{} identities; failed: {failed:?}", results.len()),
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            gated: true,
            name: "facet counts",
            run: facet_counts,
        },
        Criterion {
            id: 2,
            gated: true,
            name: "orbit classification",
            run: orbit_classification,
        },
        Criterion {
            id: 3,
            gated: false,
            name: "3422 enumeration and classes",
            run: extended_3422,
        },
        Criterion {
            id: 4,
            gated: true,
            name: "LHV bounds",
            run: lhv_bounds,
        },
        Criterion {
            id: 5,
            gated: true,
            name: "facet verification",
            run: facet_verification,
        },
        Criterion {
            id: 6,
            gated: true,
            name: "quantum maxima",
            run: quantum_maxima,
        },
        Criterion {
            id: 7,
            gated: true,
            name: "relevance of I3322 on sigma",
            run: relevance,
        },
        Criterion {
            id: 8,
            gated: true,
            name: "Werner thresholds",
            run: werner_thresholds,
        },
        Criterion {
            id: 9,
            gated: true,
            name: "nonlocality sharing",
            run: sharing,
        },
        Criterion {
            id: 10,
            gated: true,
            name: "CHSH-boundary scan",
            run: fig1_property,
        },
        Criterion {
            id: 11,
            gated: true,
            name: "Fine models",
            run: fine_models,
        },
        Criterion {
            id: 12,
            gated: true,
            name: "reduction identities",
            run: reductions,
        },
    ];
    let mut gated_failures = Vec::new();
    for Criterion {
        id,
        gated,
        name,
        run,
    } in criteria
    {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let kind = if gated { "gated" } else { "extended" };
        println!(
            "criterion {id:>2} [{kind}] {}: {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if gated && !ok {
            gated_failures.push(id);
        }
    }
    if gated_failures.is_empty() {
        println!("acceptance: all gated criteria pass");
    } else {
        println!("acceptance: gated criteria failing: {gated_failures:?}");
        std::process::exit(1);
    }
}
