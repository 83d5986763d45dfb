use bellscope::catalog::lift;
use bellscope::quantum::{
    bell_operator, fig1_scan, horodecki_chsh, isotropic, onset_by_bisection, orbit_max_value,
    partial_trace, seesaw_maximize, sharing_measurements, sharing_state, sigma_state, singlet,
    swap_subsystems, werner, MeasurementClass, OnsetOptions, ProjectiveMeasurement, SeesawOptions,
};
use bellscope::{full_to_cg, make, FamilyId, MeasurementSet, Scenario};
use nalgebra::{Complex, DMatrix};

fn opts(restarts: usize) -> SeesawOptions {
    SeesawOptions {
        restarts,
        ..SeesawOptions::default()
    }
}

#[test]
fn born_table_matches_explicit_traces() {
    let a: Vec<_> = [(0.3, 0.1), (1.2, 2.0)]
        .iter()
        .map(|&(t, p)| ProjectiveMeasurement::qubit(t, p))
        .collect();
    let b: Vec<_> = [(2.1, 0.4), (0.7, 5.0)]
        .iter()
        .map(|&(t, p)| ProjectiveMeasurement::qubit(t, p))
        .collect();
    let m = MeasurementSet::new(a.clone(), b.clone()).unwrap();
    let rho = sigma_state::<f64>().unwrap();
    let table = m.born_table(&rho).unwrap();
    for (ia, ma) in a.iter().enumerate() {
        for (ib, mb) in b.iter().enumerate() {
            for ja in 0..2 {
                for jb in 0..2 {
                    let op: DMatrix<Complex<f64>> =
                        ma.projectors()[ja].kronecker(&mb.projectors()[jb]);
                    let p = (op * rho.matrix()).trace().re;
                    assert!((table.get(ia, ib, ja, jb) - p).abs() < 1e-13);
                }
            }
        }
    }
    let q = make(FamilyId::Chsh).unwrap();
    let cg = full_to_cg(&table).unwrap();
    let direct = bell_operator(&q, &m).unwrap().value(&rho).unwrap();
    assert!((q.evaluate(&cg) - direct).abs() < 1e-13);
}

#[test]
fn tsirelson_bound() {
    let q = make(FamilyId::Chsh).unwrap();
    let r = seesaw_maximize::<f64>(&q, (2, 2), &opts(8)).unwrap();
    assert!((r.value - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-8);
    let v = bell_operator(&q, &r.measurements)
        .unwrap()
        .value(&r.state)
        .unwrap();
    assert!((v - r.value).abs() < 1e-10);
}

#[test]
fn i3322_on_qubits() {
    let q = make(FamilyId::I3322).unwrap();
    let r = seesaw_maximize::<f64>(&q, (2, 2), &opts(20)).unwrap();
    assert!((r.value - 0.25).abs() < 1e-6, "{}", r.value);
}

#[test]
fn i2233_on_qutrits_reaches_closed_form() {
    let q = make(FamilyId::I2233).unwrap();
    let r = seesaw_maximize::<f64>(&q, (3, 3), &opts(20)).unwrap();
    let expected = ((11.0f64 / 3.0).sqrt() - 1.0) / 3.0;
    assert!((r.value - expected).abs() < 1e-6, "{}", r.value);
}

#[test]
fn qutrit_onsets_are_ordered() {
    let scan = OnsetOptions {
        iterations: 8,
        seesaw: opts(8),
        ..OnsetOptions::default()
    };
    let family = |p: f64| isotropic(3, p);
    let target = Scenario::new(2, 2, 3, 3).unwrap();
    let lifted = lift(&make(FamilyId::Chsh).unwrap(), target).unwrap();
    let chsh = onset_by_bisection(&lifted, (3, 3), family, &scan).unwrap();
    assert!((chsh - 0.7630).abs() < 5e-3, "{chsh}");
    let i2233 = onset_by_bisection(&make(FamilyId::I2233).unwrap(), (3, 3), family, &scan).unwrap();
    assert!((i2233 - 0.6962).abs() < 5e-3, "{i2233}");
    assert!(i2233 < chsh);
}

#[test]
fn werner_chsh_onset() {
    let scan = OnsetOptions {
        iterations: 10,
        seesaw: opts(6),
        ..OnsetOptions::default()
    };
    let p =
        onset_by_bisection(&make(FamilyId::Chsh).unwrap(), (2, 2), werner::<f64>, &scan).unwrap();
    assert!((p - 1.0 / 2f64.sqrt()).abs() < 2e-3);
    assert!(horodecki_chsh(&werner(p + 2e-3).unwrap()).unwrap() > 0.0);
}

#[test]
fn sharing_pairs_are_symmetric() {
    let q = make(FamilyId::I3322).unwrap();
    let rho = sharing_state::<f64>(0.852).unwrap();
    let m = sharing_measurements();
    let mut values = Vec::new();
    for keep in [[0, 1], [0, 2]] {
        let pair = partial_trace(&rho, &[2, 2, 2], &keep).unwrap();
        let (v, _) = orbit_max_value(&q, &swap_subsystems(&pair, 2, 2).unwrap(), &m).unwrap();
        values.push(v);
    }
    assert!((values[0] - values[1]).abs() < 1e-14);
    assert!(
        values[0] > 0.0 && (values[0] - 0.0041).abs() < 5e-4,
        "{}",
        values[0]
    );
}

#[test]
fn sigma_does_not_violate_chsh() {
    assert!(horodecki_chsh(&sigma_state::<f64>().unwrap()).unwrap() <= 0.0);
    assert!((horodecki_chsh(&singlet::<f64>()).unwrap() - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
}

#[test]
fn scans_are_deterministic() {
    let o = SeesawOptions {
        restarts: 4,
        seed: 9,
        class: MeasurementClass::Rank1,
        max_iterations: 5000,
        ..SeesawOptions::default()
    };
    let thetas = [0.6f64, 0.9];
    let a = fig1_scan(&thetas, &o).unwrap();
    let b = fig1_scan(&thetas, &o).unwrap();
    assert_eq!(a, b);
    for row in &a {
        assert!((row.i_chsh_tilde - 1.0).abs() < 1e-9);
    }
}
