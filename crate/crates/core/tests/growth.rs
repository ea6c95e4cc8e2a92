use graphflex::learners::{learn_knn, Kernel};
use graphflex::metrics::edge_prf;
use graphflex::pipeline::{init, run, run_with_model, PipelineConfig};
use graphflex::synth::{gen_blobs, FeatureModel};
use graphflex::{build_graph, FeatureMatrix};

fn cfg() -> PipelineConfig {
    PipelineConfig {
        clust_k: 3,
        k: 6,
        knn_k: 6,
        t: 6,
        seed: 5,
        ..PipelineConfig::default()
    }
}

#[test]
fn run_covers_every_node_and_tracks_knn() {
    let ds = gen_blobs::<f64>(600, 3, &FeatureModel::new(8, 5.0), 3).unwrap();
    let (g, rep) = run(&ds.features, None, &cfg()).unwrap();
    assert_eq!(g.n(), 600);
    assert_eq!(rep.steps.len(), 6);
    assert_eq!(rep.static_nodes + rep.steps.iter().map(|s| s.batch).sum::<usize>(), 600);
    let knn = build_graph(600, &learn_knn(&ds.features, 6, Kernel::Auto).unwrap()).unwrap();
    let m = edge_prf(&g, &knn).unwrap();
    assert!(m.f1 > 0.6, "{m:?}");
    let intra = g.edges().iter().filter(|e| ds.labels[e.u] == ds.labels[e.v]).count();
    assert!(intra as f64 >= 0.95 * g.num_edges() as f64);
}

#[test]
fn stepping_by_hand_matches_growth_contract() {
    let ds = gen_blobs::<f64>(300, 2, &FeatureModel::new(4, 5.0), 8).unwrap();
    let idx: Vec<usize> = (0..150).collect();
    let mut st = init(&ds.features.select_rows(&idx), None, &cfg()).unwrap();
    for lo in (150..300).step_by(50) {
        let before = st.graph.edges();
        let batch: FeatureMatrix<f64> = ds.features.select_rows(&(lo..lo + 50).collect::<Vec<_>>());
        st.step(&batch).unwrap();
        assert_eq!(st.graph.n(), lo + 50);
        // earlier edges survive with at least their old weight
        for e in before.iter() {
            assert!(st.graph.weight(e.u, e.v).unwrap() >= e.w);
        }
        for v in lo..lo + 50 {
            assert!(st.graph.degree(v) > 0, "node {v} left isolated");
        }
    }
    assert_eq!(st.log.len(), 3);
}

#[test]
fn resumed_model_reproduces_run() {
    let x = gen_blobs::<f64>(400, 3, &FeatureModel::new(6, 4.0), 6).unwrap().features;
    let (g1, _, model) = run_with_model(&x, None, None, &cfg()).unwrap();
    let (g2, _, _) = run_with_model(&x, None, model, &cfg()).unwrap();
    assert_eq!(g1, g2);
}
