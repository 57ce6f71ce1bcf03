mod common;

use approx::assert_relative_eq;
use common::*;
use gmm_init::bench::{
    export_report, mean_variance, rank_all, rank_datasets, rank_methods, read_records_csv,
    run_grid, summarize, write_rank_tables_csv, write_records_csv, BenchDataset, Criterion,
    EmPooling, GridConfig, RankTable, ReportFormat, RunRecord, Summary, RECORD_COLUMNS,
};
use gmm_init::em::EmConfig;
use gmm_init::MethodSpec;
use rand::Rng;

fn summary(id: &str, method: MethodSpec, mean_final: f64) -> Summary {
    Summary {
        dataset_id: id.into(),
        method,
        count: 2,
        mean_initial: mean_final + 1.0,
        var_initial: 1.0,
        mean_final,
        var_final: 1.0,
    }
}

fn record(id: &str, method: MethodSpec, init: u64, em: u64, nll_final: f64) -> RunRecord {
    RunRecord {
        dataset_id: id.into(),
        method,
        init_seed: init,
        em_seed: em,
        nll_initial: nll_final + 10.0,
        nll_final,
        resamples: 0,
        mixes: 0,
        keeps: 0,
        millis: 0,
    }
}

fn small_sets() -> Vec<BenchDataset> {
    let mut r = rng(1);
    vec![
        BenchDataset {
            id: "a".into(),
            data: blobs(&[vec![0.0, 0.0], vec![6.0, 0.0], vec![0.0, 6.0]], 20, 1.5, &mut r),
        },
        BenchDataset {
            id: "b".into(),
            data: blobs(&[vec![0.0, 0.0], vec![9.0, 9.0], vec![9.0, 0.0]], 20, 2.0, &mut r),
        },
    ]
}

fn quick_cfg() -> GridConfig {
    GridConfig {
        k: 3,
        init_seeds: 2,
        em_seeds: 2,
        em: EmConfig::with_rounds(5).unwrap(),
        ..GridConfig::default()
    }
}

#[test]
fn single_cell_single_record() {
    let sets = small_sets();
    let cfg = GridConfig {
        init_seeds: 1,
        em_seeds: 1,
        ..quick_cfg()
    };
    let out = run_grid(&sets[..1], &[MethodSpec::KmeansPP], &cfg).unwrap();
    assert!(out.is_complete());
    assert_eq!(out.records.len(), 1);
    assert!(out.records[0].nll_final.is_finite());
}

#[test]
fn default_grid_has_ninety_records_per_cell() {
    let cfg = GridConfig::default();
    assert_eq!(cfg.init_seeds * cfg.em_seeds, 90);
    let sets = small_sets();
    let cfg = GridConfig {
        k: 3,
        em: EmConfig::with_rounds(1).unwrap(),
        ..GridConfig::default()
    };
    let out = run_grid(&sets[..1], &[MethodSpec::Uniform], &cfg).unwrap();
    assert_eq!(out.records.len(), 90);
    let s = summarize(&out.records, EmPooling::Pooled);
    assert_eq!(s[0].count, 90);
    assert_eq!(summarize(&out.records, EmPooling::BestOf)[0].count, 30);
}

#[test]
fn reruns_and_thread_counts_agree() {
    let sets = small_sets();
    let methods = MethodSpec::roster();
    let cfg = GridConfig {
        k: 2,
        init_seeds: 2,
        em_seeds: 2,
        em: EmConfig::with_rounds(3).unwrap(),
        ..GridConfig::default()
    };
    // Agglomerative(0.1) on 60 points leaves a 6-point sample, enough for K = 2
    let a = run_grid(&sets, &methods, &cfg).unwrap();
    let b = run_grid(&sets, &methods, &cfg).unwrap();
    let c = run_grid(&sets, &methods, &GridConfig { jobs: 4, ..cfg.clone() }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.records.len(), 2 * 8 * 4);
}

#[test]
fn infeasible_cells_are_reported() {
    let sets = small_sets();
    let cfg = GridConfig { k: 10, ..quick_cfg() };
    let out = run_grid(&sets[..1], &[MethodSpec::Agglomerative { sample_fraction: 0.1 }, MethodSpec::Uniform], &cfg)
        .unwrap();
    assert!(!out.is_complete());
    assert_eq!(out.failures.len(), 2);
    assert_eq!(out.records.len(), 4);
}

#[test]
fn em_never_worsens_without_degeneracy() {
    let out = run_grid(&small_sets(), &MethodSpec::roster()[..4], &quick_cfg()).unwrap();
    for r in &out.records {
        if r.degeneracy_events() == 0 {
            assert!(r.nll_final <= r.nll_initial + 1e-6, "{r:?}");
        }
    }
}

#[test]
fn mean_variance_cases() {
    assert_eq!(mean_variance(&[1.0, 3.0]), (2.0, 2.0));
    assert_eq!(mean_variance(&[4.0, 4.0, 4.0]), (4.0, 0.0));
    assert_eq!(mean_variance(&[5.0]), (5.0, 0.0));
}

#[test]
fn summaries_ignore_record_order() {
    let out = run_grid(&small_sets(), &[MethodSpec::Uniform, MethodSpec::Gonzalez], &quick_cfg()).unwrap();
    let mut shuffled = out.records.clone();
    shuffled.reverse();
    shuffled.swap(0, 3);
    for pooling in [EmPooling::Pooled, EmPooling::BestOf] {
        assert_eq!(summarize(&out.records, pooling), summarize(&shuffled, pooling));
    }
}

#[test]
fn best_of_keeps_lowest_final() {
    let m = MethodSpec::Uniform;
    let rs = vec![
        record("d", m, 0, 0, 5.0),
        record("d", m, 0, 1, 3.0),
        record("d", m, 1, 0, 7.0),
        record("d", m, 1, 1, 9.0),
    ];
    let s = &summarize(&rs, EmPooling::BestOf)[0];
    assert_eq!(s.count, 2);
    assert_eq!(s.mean_final, 5.0);
    assert_eq!(s.var_final, 8.0);
    let p = &summarize(&rs, EmPooling::Pooled)[0];
    assert_eq!(p.mean_final, 6.0);
    assert_relative_eq!(p.var_final, 20.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn dominant_method_takes_every_first_place() {
    let a = MethodSpec::KmeansPP;
    let b = MethodSpec::Uniform;
    let mut s = Vec::new();
    for i in 0..10 {
        let id = format!("set{i}");
        s.push(summary(&id, a, 100.0 + i as f64));
        s.push(summary(&id, b, 200.0 + i as f64));
    }
    let t = rank_methods(&s, Criterion::MeanFinal).unwrap();
    assert_eq!(t.row(&a).unwrap(), &[10, 0]);
    assert_eq!(t.row(&b).unwrap(), &[0, 10]);
}

#[test]
fn hand_ranked_fixture_with_ties() {
    let (a, b, c) = (
        MethodSpec::Uniform,
        MethodSpec::KmeansPP,
        MethodSpec::Gonzalez,
    );
    // per data set mean final NLL (A, B, C) and the competition ranks by hand
    let table = [
        ("d1", [1.0, 2.0, 3.0]), // 1 2 3
        ("d2", [2.0, 2.0, 1.0]), // 2 2 1
        ("d3", [5.0, 4.0, 4.0]), // 3 1 1
        ("d4", [7.0, 7.0, 7.0]), // 1 1 1
    ];
    let mut s = Vec::new();
    for (id, v) in table {
        for (m, x) in [a, b, c].into_iter().zip(v) {
            s.push(summary(id, m, x));
        }
    }
    let t = rank_methods(&s, Criterion::MeanFinal).unwrap();
    assert_eq!(t.row(&a).unwrap(), &[2, 1, 1]);
    assert_eq!(t.row(&b).unwrap(), &[2, 2, 0]);
    assert_eq!(t.row(&c).unwrap(), &[3, 0, 1]);
    assert_eq!(t.datasets, 4);
    for row in &t.counts {
        assert_eq!(row.iter().sum::<usize>(), 4);
    }
    let d3 = &rank_datasets(&s, Criterion::MeanFinal).unwrap()[2];
    assert_eq!(d3.rank_of(&a), Some(3));
}

#[test]
fn tables_ignore_input_order_and_merge_additively() {
    let mut r = rng(5);
    let methods = MethodSpec::roster();
    let mut s = Vec::new();
    for i in 0..6 {
        for m in &methods {
            s.push(summary(&format!("set{i}"), *m, (r.random_range(0..5)) as f64));
        }
    }
    let all = rank_all(&s).unwrap();
    let mut rev = s.clone();
    rev.reverse();
    assert_eq!(rank_all(&rev).unwrap(), all);

    let (first, second): (Vec<Summary>, Vec<Summary>) =
        s.iter().cloned().partition(|x| x.dataset_id < "set3".to_string());
    for (c, whole) in Criterion::ALL.iter().zip(&all) {
        let merged = rank_methods(&first, *c)
            .unwrap()
            .merge(&rank_methods(&second, *c).unwrap())
            .unwrap();
        assert_eq!(&merged, whole);
    }
}

#[test]
fn missing_summary_is_an_error() {
    let s = vec![
        summary("d1", MethodSpec::Uniform, 1.0),
        summary("d1", MethodSpec::KmeansPP, 2.0),
        summary("d2", MethodSpec::Uniform, 1.0),
    ];
    assert!(rank_methods(&s, Criterion::MeanFinal).is_err());
}

#[test]
fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.csv");
    let out = run_grid(&small_sets(), &MethodSpec::roster()[..5], &quick_cfg()).unwrap();
    write_records_csv(&path, &out.records).unwrap();
    assert_eq!(read_records_csv(&path).unwrap(), out.records);

    write_records_csv(&path, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim_end(), RECORD_COLUMNS.join(","));
    assert!(read_records_csv(&path).unwrap().is_empty());
}

#[test]
fn rank_table_csv_mirrors_counts() {
    let dir = tempfile::tempdir().unwrap();
    let s = vec![
        summary("d1", MethodSpec::Uniform, 1.0),
        summary("d1", MethodSpec::KmeansPP, 2.0),
        summary("d2", MethodSpec::Uniform, 3.0),
        summary("d2", MethodSpec::KmeansPP, 2.0),
    ];
    let tables: Vec<RankTable> = rank_all(&s).unwrap();
    let path = dir.path().join("ranks.csv");
    write_rank_tables_csv(&path, &tables).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["method", "criterion", "rank_1", "rank_2"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let t = tables.iter().find(|t| t.criterion.id() == &row[1]).unwrap();
        let m: MethodSpec = row[0].parse().unwrap();
        let counts: Vec<usize> = (2..4).map(|i| row[i].parse().unwrap()).collect();
        assert_eq!(t.row(&m).unwrap(), counts.as_slice());
    }
}

#[test]
fn export_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_grid(&small_sets(), &MethodSpec::roster()[..3], &quick_cfg()).unwrap();
    let tables = rank_all(&summarize(&out.records, EmPooling::Pooled)).unwrap();
    for fmt in [ReportFormat::Csv, ReportFormat::Json] {
        let files = export_report(dir.path(), &tables, &out.records, fmt).unwrap();
        assert!(!files.is_empty());
        for f in files {
            assert!(f.exists());
        }
    }
    let bad = dir.path().join("records.csv").join("nested");
    let err = export_report(&bad, &tables, &out.records, ReportFormat::Csv).unwrap_err();
    assert!(err.to_string().contains("nested"));
}
