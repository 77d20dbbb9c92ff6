use std::f64::consts::FRAC_PI_4;

use ionqv_core::compiler::*;
use ionqv_core::linalg::{c, expm_hermitian, kron, pauli, phase_distance, random_unitary, CMat};
use ionqv_core::sim::{all_pairs, circuit_unitary, embed_standard, EncodingMap, IonSpec, NativeGate, Register};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cnot() -> CMat {
    let mut m = CMat::identity(4, 4);
    m.swap_rows(2, 3);
    m
}

#[test]
fn distance_ignores_global_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_unitary(8, &mut rng);
    let v = &u * c(FRAC_PI_4.cos(), FRAC_PI_4.sin());
    assert!(phase_distance(&u, &v) < 1e-15);
}

#[test]
fn exact_su8_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ion = IonSpec::qudit(8).unwrap();
    for _ in 0..20 {
        let u = random_unitary(8, &mut rng);
        let rep = synthesize_exact(&u, &ion, ExactOptions::default()).unwrap();
        assert!(rep.pulse_count <= 42 && rep.within_bound);
        assert!(rep.distance <= 1e-9);
    }
}

#[test]
fn exact_rejects_bad_inputs() {
    let disconnected = IonSpec::new(4, vec![(0, 1), (2, 3)], EncodingMap::m1(4).unwrap()).unwrap();
    assert!(synthesize_exact(&CMat::identity(4, 4), &disconnected, ExactOptions::default()).is_err());
    let mut m = CMat::identity(4, 4);
    m[(0, 0)] = c(2.0, 0.0);
    assert!(synthesize_exact(&m, &IonSpec::qudit(4).unwrap(), ExactOptions::default()).is_err());
}

#[test]
fn inter_ion_cnot_from_two_gates() {
    let reg = Register::build(vec![IonSpec::all_to_all(4, EncodingMap::m1(4).unwrap()).unwrap(), IonSpec::qudit(2).unwrap()]).unwrap();
    let target = embed_standard(&cnot(), &[0, 2], &reg).unwrap();
    let tpl = [SlotSpec::R { ion: 0, a: 2, b: 3 }, SlotSpec::Ms { ion_i: 0, ion_j: 1, pair_i: (2, 3), pair_j: (0, 1) }];
    let rep = synthesize_variational(&reg, &target, &tpl, Budget { layers_max: 1, restarts: 8, sweeps: 400 }, 3).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.gate_count, 2);
    assert_eq!(rep.ms_count, 1);
    assert!(rep.distance <= 1e-9);
    // the printed closed form verifies as well
    let printed =
        vec![NativeGate::r(0, 2, 3, std::f64::consts::FRAC_PI_2, 0.0), NativeGate::ms(0, 1, (2, 3), (0, 1), -std::f64::consts::FRAC_PI_2)];
    assert!(phase_distance(&target, &circuit_unitary(&reg, &printed)) <= 1e-12);
}

fn local_layer(slots: &mut Vec<SlotSpec>) {
    for ion in 0..2 {
        for (a, b) in all_pairs(4) {
            slots.push(SlotSpec::R { ion, a, b });
        }
    }
}

#[test]
fn xx_across_two_ququarts_needs_two_ms_layers() {
    let reg = Register::uniform(2, 4).unwrap();
    let xx = kron(&pauli('X'), &pauli('X'));
    let target = embed_standard(&expm_hermitian(&xx, 0.37), &[1, 3], &reg).unwrap();
    let mut tpl = Vec::new();
    local_layer(&mut tpl);
    tpl.push(SlotSpec::Ms { ion_i: 0, ion_j: 1, pair_i: (0, 1), pair_j: (0, 1) });
    local_layer(&mut tpl);
    let (_, d) = optimize_slots(&reg, &target, &tpl, None, 4, 1500, 5).unwrap();
    assert!(d * d > 1e-8, "one MS layer reached cost {}", d * d);
    let rep = synthesize_variational(&reg, &target, &tpl, Budget { layers_max: 3, restarts: 4, sweeps: 1500 }, 5).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.layers, 2);
    assert!(rep.ms_count <= 2);
}

#[test]
fn limited_connectivity_counts_depend_on_qubit_and_map() {
    let mut counts = Vec::new();
    for map in [EncodingMap::m1(4).unwrap(), EncodingMap::m2()] {
        let reg = Register::build(vec![IonSpec::new(4, vec![(0, 1), (0, 2), (2, 3)], map).unwrap()]).unwrap();
        for q in 0..2 {
            let t = embed_standard(&expm_hermitian(&pauli('X'), 0.37), &[q], &reg).unwrap();
            counts.push(pulse_search(&reg, &t, 6, 3, 400, 1).unwrap().map(|g| g.len()));
        }
    }
    assert_eq!(counts, vec![Some(6), Some(2), Some(4), Some(6)]);
}

#[test]
fn table_suite_reports_every_row() {
    let tables = builtin_tables();
    let entries = run_table_suite(&tables, AuditOptions::default()).unwrap();
    assert_eq!(entries.len(), tables.rows.len());
    let find = |t: &str, r: &str| entries.iter().find(|e| e.table == t && e.row == r).unwrap();
    assert!(find("III", "1").pass);
    let r13 = find("I", "13");
    assert!(!r13.pass);
    let alt = r13.alternative.as_ref().unwrap();
    let mut pairs: Vec<&str> = alt.sequence.iter().map(|s| &s[4..7]).collect();
    pairs.sort();
    assert_eq!(pairs, vec!["0 3", "1 2"]);
    for e in &entries {
        assert_eq!(e.statuses.len(), 4);
        if !e.pass {
            let a = e.alternative.as_ref().unwrap_or_else(|| panic!("row {} {} has no alternative", e.table, e.row));
            assert!(a.length <= e.paper_sequence.len() && a.distance <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exact_reconstructs_random_su4(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(4, &mut rng);
        let rep = synthesize_exact(&u, &IonSpec::qudit(4).unwrap(), ExactOptions::default()).unwrap();
        prop_assert!(rep.pulse_count <= 12);
        prop_assert!(rep.distance <= 1e-9);
    }

    #[test]
    fn relabelled_sequences_serve_the_other_map(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(4, &mut rng);
        let (m1, m2) = (EncodingMap::m1(4).unwrap(), EncodingMap::m2());
        let r1 = Register::build(vec![IonSpec::all_to_all(4, m1.clone()).unwrap()]).unwrap();
        let r2 = Register::build(vec![IonSpec::all_to_all(4, m2.clone()).unwrap()]).unwrap();
        let t1 = embed_standard(&u, &[0, 1], &r1).unwrap();
        let t2 = embed_standard(&u, &[0, 1], &r2).unwrap();
        let rep = synthesize_exact(&t1, r1.ion(0), ExactOptions::default()).unwrap();
        let perm: Vec<usize> = (0..4).map(|a| m2.level(m1.label(a))).collect();
        let moved: Vec<NativeGate> = rep.sequence.gates.iter().map(|g| g.relabel(0, &perm)).collect();
        prop_assert_eq!(moved.len(), rep.pulse_count);
        prop_assert!(phase_distance(&t2, &circuit_unitary(&r2, &moved)) <= 1e-9);
    }
}
