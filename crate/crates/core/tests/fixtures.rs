//! Tests over the bundled TSPLIB / QAPLIB fixture files.

use std::path::PathBuf;

use gpn_core::dfp::DfpView;
use gpn_core::instance::{parse_qaplib, parse_tsplib, TspSource};
use gpn_core::training::{init_two_stage, route, ModelBank, ModelKind, TrainConfig};

fn fixture(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

#[test]
fn eil76_fixture_parses_as_euclidean_coords() {
    let t = parse_tsplib(&fixture("tsplib/eil76.tsp")).unwrap();
    assert_eq!(t.n, 76);
    assert_eq!(t.source, TspSource::EuclideanCoords);
    assert_eq!(t.name, "eil76");
    assert!(t.dist.is_symmetric());
}

#[test]
fn gr48_style_triangle_expands_to_a_symmetric_matrix() {
    let t = parse_tsplib(&fixture("tsplib/gr48_style.tsp")).unwrap();
    assert_eq!(t.n, 48);
    assert!(t.dist.is_symmetric());
    for i in 0..48 {
        assert_eq!(t.dist.get(i, i), 0.0);
    }
}

#[test]
fn had12_fixture_parses() {
    let q = parse_qaplib(&fixture("qaplib/had12.dat")).unwrap();
    assert_eq!(q.n, 12);
    assert!(q.dist.is_symmetric());
    assert!(q.flow.is_symmetric());
}

#[test]
fn nug12_zero_ratio_matches_the_reference_table() {
    let q = parse_qaplib(&fixture("qaplib/nug12.dat")).unwrap();
    let ratio = DfpView::new(&q).zero_ratio() * 100.0;
    assert!((ratio - 42.70).abs() <= 0.01, "nug12 ratio {ratio}");
}

#[test]
fn sparsity_routing_sends_chr_to_sparse_and_had_to_dense() {
    let cfg = TrainConfig {
        train_n: 4,
        hidden_dim: 4,
        layers: 1,
        ..TrainConfig::default_for(ModelKind::TwoStageQap)
    };
    let bank = ModelBank::new(
        init_two_stage(&cfg).unwrap(),
        init_two_stage(&TrainConfig { seed: 1, ..cfg }).unwrap(),
    );
    let chr = parse_qaplib(&fixture("qaplib/chr12a.dat")).unwrap();
    let had = parse_qaplib(&fixture("qaplib/had12.dat")).unwrap();
    assert!(std::ptr::eq(route(&bank, &chr), &bank.sparse_model));
    assert!(std::ptr::eq(route(&bank, &had), &bank.dense_model));
}
