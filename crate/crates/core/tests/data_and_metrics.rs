use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use woakm::dataset::{load_ucr, parse_ucr, synth_blobs, Delimiter};
use woakm::distance::{build_matrix, build_matrix_cached, dtw, euclidean_sq, DtwParams, Metric};
use woakm::eval::{rand_index, speedup, unique_medoids};
use woakm::{Dataset, DistanceMatrix, Error, TimeSeries};

fn ts(v: &[f64]) -> TimeSeries {
    TimeSeries::new(v.to_vec()).unwrap()
}

#[test]
fn loads_ragged_tab_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "1\t0.5\t0.7\n2\t0.1\t0.2\t0.3").unwrap();
    let d = load_ucr(f.path(), None).unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d.series()[0].values(), &[0.5, 0.7]);
    assert_eq!(d.series()[1].len(), 3);
    assert_eq!(d.class_count(), Some(2));
    assert!(!d.is_uniform_length());
}

#[test]
fn reports_bad_number_with_line() {
    match parse_ucr("x", "1\tabc\n", None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("expected parse error, got {other:?}"),
    }
    match parse_ucr("x", "1,2,3\n2,4,nan\n", Some(Delimiter::Comma)) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected located error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        load_ucr("/definitely/not/here.tsv", None),
        Err(Error::Io { .. })
    ));
}

#[test]
fn eog_vertical_signal_shape() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/EOGVerticalSignal/EOGVerticalSignal_TEST.tsv");
    if !path.exists() {
        eprintln!("skipping: {} not present", path.display());
        return;
    }
    let d = load_ucr(&path, None).unwrap();
    assert_eq!(d.len(), 362);
    assert!(d.series().iter().all(|s| s.len() == 1250));
    assert_eq!(d.class_count(), Some(12));
}

#[test]
fn synthetic_blobs() {
    let d = synth_blobs(5, 2, 16, 0.0, 1).unwrap();
    assert_eq!(d.len(), 10);
    for g in 0..2 {
        let first = &d.series()[g * 5];
        assert!(d.series()[g * 5..(g + 1) * 5].iter().all(|s| s == first));
    }
    assert_ne!(d.series()[0], d.series()[5]);

    let a = synth_blobs(5, 3, 16, 0.01, 7).unwrap();
    assert_eq!(a.len(), 15);
    assert_eq!(a, synth_blobs(5, 3, 16, 0.01, 7).unwrap());
    assert_ne!(a, synth_blobs(5, 3, 16, 0.01, 8).unwrap());
    assert!(synth_blobs(1, 3, 16, 0.0, 0).is_err());
    assert!(synth_blobs(5, 0, 16, 0.0, 0).is_err());
}

#[test]
fn dtw_examples() {
    assert_eq!(
        dtw(
            &ts(&[0.0, 0.0]),
            &ts(&[1.0, 1.0]),
            DtwParams::unconstrained()
        )
        .unwrap(),
        2.0
    );
    let x = ts(&[1.0, 3.0, 2.0]);
    assert_eq!(dtw(&x, &x, DtwParams::band(1)).unwrap(), 0.0);
    let y = ts(&[0.0, 1.0, 5.0]);
    assert_eq!(dtw(&x, &y, DtwParams::band(0)).unwrap(), 1.0 + 4.0 + 9.0);
    // warping absorbs a shift that the diagonal cannot
    let a = ts(&[0.0, 0.0, 1.0, 0.0]);
    let b = ts(&[0.0, 1.0, 0.0, 0.0]);
    assert_eq!(dtw(&a, &b, DtwParams::band(1)).unwrap(), 0.0);
    assert_eq!(euclidean_sq(&a, &b).unwrap(), 2.0);
}

#[test]
fn dtw_band_must_cover_length_gap() {
    let x = ts(&[1.0, 2.0]);
    let y = ts(&[1.0, 2.0, 3.0, 4.0]);
    assert!(dtw(&x, &y, DtwParams::band(1)).is_err());
    assert_eq!(dtw(&x, &y, DtwParams::band(2)).unwrap(), 1.0 + 4.0);
}

#[test]
fn euclidean_examples() {
    assert_eq!(
        euclidean_sq(&ts(&[1.0, 2.0]), &ts(&[1.0, 2.0])).unwrap(),
        0.0
    );
    assert_eq!(
        euclidean_sq(&ts(&[0.0, 0.0]), &ts(&[3.0, 4.0])).unwrap(),
        25.0
    );
    assert!(matches!(
        euclidean_sq(&ts(&[0.0]), &ts(&[3.0, 4.0])),
        Err(Error::Shape(_))
    ));
}

#[test]
fn matrix_of_identical_series_is_zero() {
    let s = ts(&[1.0, 2.0, 3.0]);
    let d = Dataset::new("same", vec![s.clone(), s.clone(), s], None).unwrap();
    let m = build_matrix(&d, Metric::Dtw(DtwParams::unconstrained())).unwrap();
    assert!((0..3).all(|i| (0..3).all(|j| m.get(i, j) == 0.0)));
}

#[test]
fn matrix_matches_per_pair_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let series: Vec<TimeSeries> = (0..10)
        .map(|_| {
            let len = rng.random_range(8..=12);
            TimeSeries::new((0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
        })
        .collect();
    let d = Dataset::new("rnd", series.clone(), None).unwrap();
    let params = DtwParams::band(4);
    let m = build_matrix(&d, Metric::Dtw(params)).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            assert_eq!(m.get(i, j), dtw(&series[i], &series[j], params).unwrap());
        }
    }
    assert!(matches!(
        build_matrix(&d, Metric::Euclidean),
        Err(Error::Shape(_))
    ));
}

#[test]
fn matrix_reports_failing_pair() {
    let d = Dataset::new(
        "gap",
        vec![
            ts(&[1.0, 2.0]),
            ts(&[1.0, 2.0]),
            ts(&[1.0, 2.0, 3.0, 4.0, 5.0]),
        ],
        None,
    )
    .unwrap();
    match build_matrix(&d, Metric::Dtw(DtwParams::band(1))) {
        Err(Error::Pair { i, j, .. }) => assert_eq!((i, j), (0, 2)),
        other => panic!("expected pair error, got {other:?}"),
    }
}

#[test]
fn matrix_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = synth_blobs(4, 3, 12, 0.2, 5).unwrap();
    let metric = Metric::Dtw(DtwParams::band(2));
    let (built, cached) = build_matrix_cached(&d, metric, Some(dir.path())).unwrap();
    assert!(!cached);
    let (loaded, cached) = build_matrix_cached(&d, metric, Some(dir.path())).unwrap();
    assert!(cached);
    assert_eq!(built, loaded);

    let bogus = dir.path().join("bogus.bin");
    std::fs::write(&bogus, b"not a matrix").unwrap();
    assert!(matches!(
        DistanceMatrix::read_cache(&bogus),
        Err(Error::Cache { .. })
    ));
}

#[test]
fn matrix_validation() {
    assert!(DistanceMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    assert!(DistanceMatrix::from_dense(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    assert!(DistanceMatrix::from_dense(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
    assert!(DistanceMatrix::from_dense(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    assert!(DistanceMatrix::from_dense(2, vec![0.0, 1.0, 1.0]).is_err());
}

#[test]
fn rand_index_examples() {
    assert_eq!(rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap().ri, 1.0);
    let r = rand_index(&[0, 1, 1], &[0, 0, 1]).unwrap();
    assert_eq!((r.a, r.b, r.c, r.d), (0, 1, 1, 1));
    assert_eq!(r.ri, 1.0 / 3.0);
}

#[test]
fn rand_index_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let p: Vec<usize> = (0..30).map(|_| rng.random_range(0..4)).collect();
        let t: Vec<usize> = (0..30).map(|_| rng.random_range(0..3)).collect();
        let mut agree = 0;
        for i in 0..30 {
            for j in i + 1..30 {
                if (p[i] == p[j]) == (t[i] == t[j]) {
                    agree += 1;
                }
            }
        }
        assert_eq!(rand_index(&p, &t).unwrap().ri, agree as f64 / 435.0);
    }
}

#[test]
fn diversity_and_speedup() {
    let same = vec![vec![4, 7]; 5];
    assert_eq!(unique_medoids(same.iter().map(Vec::as_slice)), 2);
    let disjoint: Vec<Vec<usize>> = (0..5).map(|w| vec![2 * w, 2 * w + 1]).collect();
    assert_eq!(unique_medoids(disjoint.iter().map(Vec::as_slice)), 10);
    assert_eq!(speedup(2.29, 1.0).unwrap(), 2.29);
    assert!(matches!(speedup(1.0, 0.0), Err(Error::Parameter(_))));
}
