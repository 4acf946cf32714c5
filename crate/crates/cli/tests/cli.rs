use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mapfilt_core::io::read_series_csv;
use serde_json::Value;

const VAR1: &str = r#"{"ar": [[[0.5, 0.1, 0, 0], [0.2, 0.4, 0.1, 0], [0.1, 0.2, 0.6, 0.2], [0, 0.1, 0.2, 0.5]]],
"sigma": [[1, 0.2, 0.1, 0], [0.2, 1, 0.2, 0.1], [0.1, 0.2, 1, 0.3], [0, 0.1, 0.3, 1]]}"#;

fn mapfilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapfilt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate_one(dir: &Path, length: &str, seed: &str) -> std::path::PathBuf {
    let model = dir.join("var1.json");
    fs::write(&model, VAR1).unwrap();
    let out = dir.join("sim");
    let o = mapfilt(&[
        "simulate",
        "--model",
        s(&model),
        "--length",
        length,
        "--reps",
        "1",
        "--seed",
        seed,
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("rep_000.csv")
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(mapfilt(&[]).status.code(), Some(1));
    assert_eq!(mapfilt(&["privatize"]).status.code(), Some(1));
    assert_eq!(mapfilt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mapfilt(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        mapfilt(&["privatize", "--input", s(&missing), "--out", s(dir.path())])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn invalid_partition_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_one(dir.path(), "300", "1");
    let o = mapfilt(&[
        "privatize",
        "--input",
        s(&input),
        "--nx",
        "4",
        "--out",
        s(&dir.path().join("p")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_input_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    let mut text = String::from("time,a,b,c\n");
    for t in 0..200 {
        // The third channel duplicates the first, so the auxiliary block is singular
        // once the confidential block is only the first channel.
        let a = ((t * 7919) % 13) as f64;
        let b = ((t * 104729) % 17) as f64;
        text.push_str(&format!("{t},{a},{b},{b}\n"));
    }
    fs::write(&input, text).unwrap();
    let o = mapfilt(&[
        "privatize",
        "--input",
        s(&input),
        "--nx",
        "1",
        "--out",
        s(&dir.path().join("p")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = simulate_one(a.path(), "200", "9");
    let fb = simulate_one(b.path(), "200", "9");
    assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap());
    let c = tempfile::tempdir().unwrap();
    let fc = simulate_one(c.path(), "200", "10");
    assert_ne!(
        fs::read(a.path().join("sim/rep_000.csv")).unwrap(),
        fs::read(fc).unwrap()
    );
}

#[test]
fn zero_restarts_release_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_one(dir.path(), "400", "3");
    let out = dir.path().join("p");
    let o = mapfilt(&["privatize", "--input", s(&input), "--restarts", "0", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(report["privacy"].as_f64().unwrap().abs() < 1e-9);
    let x = read_series_csv::<f64>(&input).unwrap();
    let y = read_series_csv::<f64>(&out.join("privatized.csv")).unwrap();
    assert_eq!(y.series.len(), x.series.len());
    assert_eq!(y.series.dim(), 2);
    for t in 0..x.series.len() {
        for k in 0..2 {
            assert!(
                (x.series.values()[(t, k)] - y.series.values()[(t, k)]).abs() < 1e-6,
                "t={t} k={k}"
            );
        }
    }
}

#[test]
fn privatize_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_one(dir.path(), "600", "4");
    let out = dir.path().join("p");
    let o = mapfilt(&[
        "privatize",
        "--input",
        s(&input),
        "--restarts",
        "2",
        "--seed",
        "5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["privatized.csv", "report.json", "filter.json", "acf.csv", "ccf.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let p = report["privacy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(report["smap_error"].as_f64().unwrap() < 1e-8);
    assert!(report.get("runtime_secs").is_none());
}

#[test]
fn evaluate_of_identical_series_has_full_utility() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_one(dir.path(), "300", "6");
    let out = dir.path().join("e");
    let o = mapfilt(&[
        "evaluate",
        "--original",
        s(&input),
        "--privatized",
        s(&input),
        "--lag",
        "10",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert!((m["rum"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(m["lag"].as_u64(), Some(10));
}

#[test]
fn qwi_ingest_pivots_counties() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("qwi.csv");
    let mut text = String::from("geography_label,year,quarter,Emp\n");
    for (i, county) in ["Baltimore County, MD", "Frederick County, MD"].iter().enumerate() {
        for q in 0..8 {
            text.push_str(&format!(
                "\"{county}\",{},{},{}\n",
                2000 + q / 4,
                q % 4 + 1,
                1000 * (i + 1) + q
            ));
        }
    }
    fs::write(&input, text).unwrap();
    let out = dir.path().join("q");
    let o = mapfilt(&[
        "qwi-ingest",
        "--input",
        s(&input),
        "--counties",
        "Frederick,Baltimore",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_series_csv::<f64>(&out.join("qwi_series.csv")).unwrap();
    assert_eq!((t.series.len(), t.series.dim()), (8, 2));
    assert_eq!(t.series.values()[(0, 0)], 2000.0);
    assert_eq!(t.series.values()[(7, 1)], 1007.0);
    let o = mapfilt(&[
        "qwi-ingest",
        "--input",
        s(&input),
        "--counties",
        "Howard",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
