use graphflex::clustering::kmeans_fit;
use graphflex::io;
use graphflex::synth::{gen_blobs, gen_small_world, FeatureModel};
use graphflex::Error;

#[test]
fn features_round_trip_through_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen_blobs::<f64>(40, 3, &FeatureModel::new(6, 2.0), 9).unwrap().features;
    let bin = dir.path().join("x.fmtx");
    let csv = dir.path().join("x.csv");
    io::write_features(&x, &bin).unwrap();
    io::write_features(&x, &csv).unwrap();
    assert_eq!(io::read_features(&bin).unwrap(), x);
    let back = io::read_features(&csv).unwrap();
    assert_eq!((back.n(), back.d()), (40, 6));
    for (a, b) in back.rows().flatten().zip(x.rows().flatten()) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("f0,f1,f2,f3,f4,f5\n"));
}

#[test]
fn graph_and_labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = gen_small_world::<f64>(120, 4, 0.2, 3, &FeatureModel::new(4, 1.0), 2).unwrap();
    let g = ds.graph.unwrap();
    let gp = dir.path().join("g.edges");
    io::write_graph(&g, &gp).unwrap();
    assert_eq!(io::read_graph(&gp, None).unwrap(), g);
    let lp = dir.path().join("y.txt");
    io::write_labels_file(&ds.labels, &lp).unwrap();
    assert_eq!(io::read_labels_file(&lp).unwrap(), ds.labels);
}

#[test]
fn model_round_trip_keeps_inference() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen_blobs::<f64>(90, 3, &FeatureModel::new(5, 4.0), 1).unwrap().features;
    let m = kmeans_fit(&x, 3, 100, 4).unwrap();
    let p = dir.path().join("m.bin");
    io::write_model_file(&m, &p).unwrap();
    let back = io::read_model_file(&p).unwrap();
    assert_eq!(back.centroids, m.centroids);
    assert_eq!(back.method, m.method);
    assert_eq!(back.infer_batch(&x).unwrap(), m.infer_batch(&x).unwrap());
}

#[test]
fn bad_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("dup.edges");
    std::fs::write(&p, "0 1\n1 2\n0 1 2.0\n").unwrap();
    match io::read_graph(&p, None) {
        Err(Error::Parse { line, msg }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("line 1"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
    let t = dir.path().join("short.fmtx");
    let mut bytes = b"FMTX".to_vec();
    bytes.extend_from_slice(&3u64.to_le_bytes());
    bytes.extend_from_slice(&2u64.to_le_bytes());
    bytes.extend_from_slice(&1.0f64.to_le_bytes());
    std::fs::write(&t, bytes).unwrap();
    assert!(io::read_features(&t).is_err());
    assert!(io::read_features(dir.path().join("missing.fmtx")).is_err());
}
