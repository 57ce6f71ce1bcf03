use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmm-init"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(dir: &Path, name: &str, seed: u64, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let seed = seed.to_string();
    let mut args = vec!["generate", "--out", s(&out), "--seed", &seed];
    args.extend_from_slice(extra);
    let o = gmm(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn generate_counts_signal_and_noise() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.json");
    let out = dir.path().join("data.csv");
    let o = gmm(&[
        "generate", "--k", "10", "--n", "10000", "--sep", "2", "--noise", "0.1", "--seed", "3",
        "--labels", "--out", s(&out), "--truth", s(&truth),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("seed: 3"));
    assert!(text.contains("9000 signal, 1000 noise"));
    assert!(text.contains("separation: "));
    assert!(text.contains("eccentricities: "));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10_000);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",-1")).count(), 1000);
    let model = gmm_init::io::read_mixture_json(&truth).unwrap();
    assert_eq!(model.k(), 10);
}

#[test]
fn generate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.csv", 17, &["--n", "500", "--d", "3"]);
    let b = generate(dir.path(), "b.csv", 17, &["--n", "500", "--d", "3"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn generate_rejects_zero_separation() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmm(&["generate", "--sep", "0", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_writes_model_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "blobs.csv", 5, &["--k", "3", "--n", "600", "--sep", "3"]);
    let model = dir.path().join("model.json");
    let trace = dir.path().join("trace.csv");
    let o = gmm(&[
        "fit", "--data", s(&data), "--method", "kmeanspp", "--k", "3", "--rounds", "12",
        "--out", s(&model), "--trace", s(&trace),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"method\":\"Kmeans++\""));
    let rows = fs::read_to_string(&trace).unwrap().lines().count() - 1;
    assert_eq!(rows, 12);
    assert_eq!(gmm_init::io::read_mixture_json(&model).unwrap().k(), 3);

    let o = gmm(&[
        "fit", "--data", s(&data), "--method", "adaptive", "--alpha", "0.5", "--k", "3",
        "--out", s(&model), "--trace", s(&trace),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Adaptive(0.5)"));
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count() - 1, 50);
}

#[test]
fn fit_excludes_label_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "l.csv", 6, &["--k", "2", "--n", "200", "--labels"]);
    let model = dir.path().join("m.json");
    let o = gmm(&[
        "fit", "--data", s(&data), "--k", "2", "--rounds", "3", "--exclude-columns", "2",
        "--out", s(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(gmm_init::io::read_mixture_json(&model).unwrap().dim(), 2);
}

#[test]
fn fit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.csv");
    fs::write(&small, "x,y\n1,2\n3,4\n").unwrap();
    let model = dir.path().join("m.json");
    let o = gmm(&["fit", "--data", s(&small), "--k", "3", "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,2\n3,4\n5,oops\n").unwrap();
    let o = gmm(&["fit", "--data", s(&bad), "--k", "1", "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

fn write_manifest(dir: &Path, datasets: &[(&str, &str)], extra: &str) -> std::path::PathBuf {
    let mut text = format!("k = 3\ninit_seeds = 2\nem_seeds = 2\nrounds = 4\nseed = 9\n{extra}\n");
    for (id, path) in datasets {
        text.push_str(&format!("\n[[datasets]]\nid = \"{id}\"\npath = \"{path}\"\n"));
    }
    let p = dir.join("manifest.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run_bench(manifest: &Path, out: &Path, jobs: &str) -> Output {
    gmm(&["bench", "--manifest", s(manifest), "--out-dir", s(out), "--jobs", jobs])
}

#[test]
fn bench_default_roster_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "one.csv", 1, &["--k", "3", "--n", "300", "--sep", "2"]);
    generate(dir.path(), "two.csv", 2, &["--k", "3", "--n", "300", "--sep", "1"]);
    let manifest = write_manifest(dir.path(), &[("one", "one.csv"), ("two", "two.csv")], "");
    let outs: Vec<_> = ["r1", "r2", "r3"].iter().map(|n| dir.path().join(n)).collect();
    for (o, jobs) in outs.iter().zip(["1", "1", "4"]) {
        let res = run_bench(&manifest, o, jobs);
        assert!(res.status.success(), "{}", stderr(&res));
    }
    for f in ["records.csv", "rank_tables.csv", "summaries.csv", "failures.csv", "status.txt"] {
        let a = fs::read(outs[0].join(f)).unwrap();
        assert_eq!(a, fs::read(outs[1].join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(outs[2].join(f)).unwrap(), "{f}");
    }
    let ranks = fs::read_to_string(outs[0].join("rank_tables.csv")).unwrap();
    assert_eq!(ranks.lines().count(), 1 + 4 * 8);
    assert_eq!(fs::read_to_string(outs[0].join("status.txt")).unwrap(), "complete\n");
    let records = fs::read_to_string(outs[0].join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 8 * 2 * 2);

    // re-aggregating the records reproduces the tables
    let again = dir.path().join("again");
    let o = gmm(&["rank", "--records", s(&outs[0].join("records.csv")), "--out-dir", s(&again)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(again.join("rank_tables.csv")).unwrap(),
        fs::read(outs[0].join("rank_tables.csv")).unwrap()
    );
}

#[test]
fn bench_missing_dataset_names_entry() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), &[("ghost", "nowhere.csv")], "");
    let o = run_bench(&manifest, &dir.path().join("out"), "1");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("ghost"), "{}", stderr(&o));
}

#[test]
fn bench_partial_failure_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "tiny.csv", 1, &["--k", "2", "--n", "20"]);
    // HAC on 10% of 20 points leaves 2 < K = 3
    let manifest = write_manifest(
        dir.path(),
        &[("tiny", "tiny.csv")],
        "methods = [\"kmeans++\", \"agglomerative:0.1\"]",
    );
    let out = dir.path().join("out");
    let o = run_bench(&manifest, &out, "1");
    assert_eq!(o.status.code(), Some(1));
    assert!(fs::read_to_string(out.join("status.txt")).unwrap().starts_with("partial"));
    assert!(fs::read_to_string(out.join("failures.csv")).unwrap().lines().count() > 1);
    assert!(out.join("records.csv").exists());
}
