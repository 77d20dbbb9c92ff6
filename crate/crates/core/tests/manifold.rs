use std::path::Path;

use ionqv_core::manifold::{
    field_sweep, indices_of, manifold_cost, reference_manifold, search_top_k, transition_table, CostParams, LevelModel, Mechanism,
    MemoryPairs, GAUSS,
};

fn data_file() -> LevelModel {
    LevelModel::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ba137_d52.json")).unwrap()
}

#[test]
fn data_file_matches_bundled_model() {
    let (a, b) = (data_file(), LevelModel::ba137_d52());
    assert_eq!((a.a_hfs_hz, a.b_hfs_hz, a.g_j, a.g_i), (b.a_hfs_hz, b.b_hfs_hz, b.g_j, b.g_i));
}

#[test]
fn allowed_edge_memory_sum_is_smaller() {
    let model = data_file();
    let all = CostParams::default();
    let allowed = CostParams { memory_pairs: MemoryPairs::Allowed, ..all.clone() };
    let t = transition_table(&model, &all).unwrap();
    let set = indices_of(&t, &reference_manifold()).unwrap();
    let a = manifold_cost(&t, &set, &all).unwrap().unwrap().cost;
    let b = manifold_cost(&t, &set, &allowed).unwrap().unwrap().cost;
    assert!(b.memory < a.memory);
    assert_eq!(a.internal, b.internal);
}

#[test]
fn memory_error_grows_with_field_noise() {
    let model = data_file();
    let quiet = CostParams::default();
    let noisy = CostParams { db_rms_t: 4.0 * quiet.db_rms_t, ..quiet.clone() };
    let t = transition_table(&model, &quiet).unwrap();
    let set = indices_of(&t, &reference_manifold()).unwrap();
    let a = manifold_cost(&t, &set, &quiet).unwrap().unwrap().cost.memory;
    let b = manifold_cost(&t, &set, &noisy).unwrap().unwrap().cost.memory;
    assert!((b / a - 16.0).abs() < 1e-9);
}

#[test]
fn magnetic_dipole_search_runs() {
    let params = CostParams { mechanism: Mechanism::M1, d: 2e5, ..CostParams::default() };
    let r = search_top_k(&data_file(), 2, &params, 5).unwrap();
    assert!(r.top.len() <= 5);
    assert!(r.top.windows(2).all(|w| w[0].cost.total <= w[1].cost.total));
}

#[test]
fn sweep_grid_and_empty_zero_field() {
    let rows = field_sweep(&data_file(), 2, &CostParams::default(), 5, 0.0, 40.0, 3).unwrap();
    let fields: Vec<f64> = rows.iter().map(|r| r.field_g).collect();
    assert_eq!(fields, vec![0.0, 20.0, 40.0]);
    assert_eq!(rows[0].candidates, 0);
    assert!(rows[0].median_cost.is_nan());
    assert!(rows[1].candidates > 0 && rows[1].min_cost <= rows[1].median_cost);
    assert!(field_sweep(&data_file(), 2, &CostParams::default(), 5, 10.0, 5.0, 3).is_err());
}

#[test]
fn three_qubit_search_is_sorted() {
    let params = CostParams { field_t: 30.0 * GAUSS, ..CostParams::default() };
    let r = search_top_k(&data_file(), 3, &params, 4).unwrap();
    assert_eq!(r.n, 3);
    assert!(r.top.iter().all(|c| c.states.len() == 8));
    assert!(r.top.windows(2).all(|w| w[0].cost.total <= w[1].cost.total));
}
