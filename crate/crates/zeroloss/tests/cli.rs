use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeroloss"))
        .args(args)
        .env_remove("ZEROLOSS_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn separable_is_deterministic_across_runs_threads_and_svg() {
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    let base = [
        "separable",
        "--n-list",
        "2,4,8",
        "--trials",
        "10",
        "--seed",
        "7",
        "--test-count",
        "2000",
    ];
    for (dir, extra) in dirs.iter().zip([
        &["--threads", "1"][..],
        &["--threads", "3"],
        &["--svg", "--bound-r", "4"],
    ]) {
        let mut args = base.to_vec();
        args.extend(["--out-dir", s(dir.path())]);
        args.extend(extra);
        ok(&args);
    }
    for file in ["trials.csv", "summary.csv", "summary.json"] {
        let first = fs::read(dirs[0].path().join(file)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, fs::read(d.path().join(file)).unwrap(), "{file}");
        }
    }
    let trials = fs::read_to_string(dirs[0].path().join("trials.csv")).unwrap();
    assert!(trials.starts_with("n,trial_index,trial_seed,test_error,updates,status\n"));
    assert_eq!(trials.lines().count(), 31);
    assert!(!trials.contains('\r'));
    let svg = fs::read_to_string(dirs[2].path().join("separable.svg")).unwrap();
    assert!(svg.contains(r#"width="800" height="600""#));
    assert!(!dirs[0].path().join("separable.svg").exists());

    let manifest = read_json(&dirs[0].path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "separable");
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["params"]["n_list"], serde_json::json!([2, 4, 8]));
    assert_eq!(manifest["params"]["feature"], "linear");
    assert!(manifest["finished_unix_ms"].as_u64() >= manifest["started_unix_ms"].as_u64());
}

#[test]
fn separable_env_threads_and_flag_errors() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_zeroloss"))
        .args([
            "separable",
            "--n-list",
            "3",
            "--trials",
            "2",
            "--seed",
            "1",
            "--test-count",
            "100",
        ])
        .args(["--out-dir", s(dir.path())])
        .env("ZEROLOSS_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_zeroloss"))
        .args([
            "separable",
            "--n-list",
            "3",
            "--trials",
            "2",
            "--seed",
            "1",
            "--test-count",
            "100",
        ])
        .args(["--out-dir", s(dir.path())])
        .env("ZEROLOSS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));

    assert_eq!(code(&["separable", "--n-list", "2,4", "--trials", "10"]).0, 2);
    assert_eq!(
        code(&[
            "separable",
            "--n-list",
            "2",
            "--trials",
            "1",
            "--seed",
            "1",
            "--feature",
            "cubic"
        ])
        .0,
        2
    );
    let (c, err) = code(&[
        "separable",
        "--n-list",
        "0",
        "--trials",
        "1",
        "--seed",
        "1",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(c, 2, "{err}");
    let (c, _) = code(&[
        "separable",
        "--n-list",
        "2",
        "--trials",
        "1",
        "--seed",
        "1",
        "--quantiles",
        "1.5",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(c, 2);
}

#[test]
fn output_failure_exits_with_io_code() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let (c, err) = code(&[
        "separable",
        "--n-list",
        "2",
        "--trials",
        "1",
        "--seed",
        "1",
        "--test-count",
        "10",
        "--out-dir",
        s(&blocker),
    ]);
    assert_eq!(c, 1, "{err}");
}

#[test]
fn finite_demo_report() {
    let demo = data("problems/demo3.json");
    for mode in ["exhaustive", "support"] {
        let out = ok(&[
            "finite",
            "--problem",
            s(&demo),
            "--n",
            "3",
            "--epsilon",
            "0.3",
            "--mode",
            mode,
        ]);
        let r = stdout_json(&out);
        assert_eq!(r["mode"], mode);
        assert!(r["count_identity_residual"].as_f64().unwrap().abs() < 1e-12);
        assert!(r["covariance_identity_residual"].as_f64().unwrap().abs() < 1e-12);
        let manifest: Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
        assert_eq!(manifest["subcommand"], "finite");
    }
    let out = ok(&["finite", "--problem", s(&demo), "--n", "2", "--epsilon", "0"]);
    assert_eq!(stdout_json(&out)["lhs_mean_ratio"], 1.0);

    let dir = TempDir::new().unwrap();
    ok(&[
        "finite",
        "--problem",
        s(&demo),
        "--n",
        "2",
        "--epsilon",
        "0.5",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(read_json(&dir.path().join("report.json"))["n"], 2);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn finite_errors() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"inputs\": [\n  {\"p\": 1.0, \"label\": 0},\n  oops\n]}").unwrap();
    let (c, err) = code(&["finite", "--problem", s(&bad), "--n", "1", "--epsilon", "0.1"]);
    assert_eq!(c, 2);
    assert!(err.contains("PARSE_ERROR") && err.contains(":3:"), "{err}");

    let (c, err) = code(&[
        "finite",
        "--problem",
        s(&dir.path().join("missing.json")),
        "--n",
        "1",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(c, 2, "{err}");

    let no_fit = dir.path().join("no_fit.json");
    fs::write(
        &no_fit,
        r#"{"inputs": [{"p": 0.5, "label": 0}, {"p": 0.5, "label": 1}], "hypotheses": [[0, 0]]}"#,
    )
    .unwrap();
    let (c, err) = code(&["finite", "--problem", s(&no_fit), "--n", "1", "--epsilon", "0.1"]);
    assert_eq!(c, 4, "{err}");
    ok(&[
        "finite",
        "--problem",
        s(&no_fit),
        "--n",
        "1",
        "--epsilon",
        "0.1",
        "--condition",
    ]);
}

#[test]
fn doc_density_peak_and_learning_columns() {
    let dir = TempDir::new().unwrap();
    let d = s(dir.path());
    let params = ["--e-min", "0.1", "--alpha", "57", "--beta", "8"];
    let mut args = vec!["doc", "--n-list", "0,10000", "--curve", "qn", "--svg", "--out-dir", d];
    args.extend(params);
    ok(&args);
    let qn = |n: u32| -> Vec<(f64, f64)> {
        let text = fs::read_to_string(dir.path().join(format!("qn_{n}.csv"))).unwrap();
        assert!(text.starts_with("E,q_n\n"));
        text.lines()
            .skip(1)
            .map(|l| {
                let (e, q) = l.split_once(',').unwrap();
                (e.parse().unwrap(), q.parse().unwrap())
            })
            .collect()
    };
    let argmax = |rows: Vec<(f64, f64)>| {
        rows.into_iter()
            .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a })
            .0
    };
    assert!((argmax(qn(0)) - 0.9).abs() <= 1e-3 + 1e-12);
    assert!((argmax(qn(10000)) - (0.1 + 50.4 / 10063.0)).abs() <= 1e-3);
    assert!(fs::read_to_string(dir.path().join("doc.svg"))
        .unwrap()
        .contains("n = 10000"));

    let mut args = vec![
        "doc",
        "--n-list",
        "0,1,10,100,1000,10000",
        "--curve",
        "learning",
        "--out-dir",
        d,
    ];
    args.extend(params);
    ok(&args);
    let text = fs::read_to_string(dir.path().join("learning.csv")).unwrap();
    assert!(text.starts_with("n,expected_error,closed_form\n"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() <= 1e-8, "{line}");
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["params"]["curve"], "learning");
}

#[test]
fn doc_validation() {
    let dir = TempDir::new().unwrap();
    let base = [
        "doc",
        "--e-min",
        "0.1",
        "--beta",
        "8",
        "--n-list",
        "0",
        "--curve",
        "qn",
        "--out-dir",
    ];
    let mut args = base.to_vec();
    args.extend([s(dir.path()), "--alpha", "0"]);
    let (c, err) = code(&args);
    assert_eq!(c, 2);
    assert!(err.contains("INVALID_PARAMETER"), "{err}");
    let mut args = base.to_vec();
    args.extend([s(dir.path()), "--alpha", "2", "--grid-step", "0"]);
    assert_eq!(code(&args).0, 2);
}

#[test]
fn bounds_examples() {
    let v = stdout_json(&ok(&[
        "bounds",
        "--kind",
        "vc",
        "--d",
        "3",
        "--epsilon",
        "0.1",
        "--solve-n",
        "--delta",
        "1",
    ]));
    assert!(v["n"].as_u64().unwrap().abs_diff(410) <= 2, "{v}");
    let v = stdout_json(&ok(&[
        "bounds",
        "--kind",
        "frac",
        "--R",
        "98",
        "--epsilon",
        "0.1",
        "--solve-n",
        "--delta",
        "0.25",
        "--form",
        "exp",
    ]));
    assert_eq!(v["n"], 60);
    let v = stdout_json(&ok(&[
        "bounds", "--kind", "quartile", "--R", "98", "--n", "60", "--q", "0.25",
    ]));
    assert!((v["exponential"].as_f64().unwrap() - 0.0995).abs() < 1e-4, "{v}");
    let v = stdout_json(&ok(&[
        "bounds",
        "--kind",
        "frac",
        "--R",
        "98",
        "--epsilon",
        "0.1",
        "--n",
        "60",
        "--form",
        "exp",
    ]));
    assert!((v["bound"].as_f64().unwrap() - 0.242_917_713_313_303_13).abs() < 1e-12);

    assert_eq!(
        code(&[
            "bounds",
            "--kind",
            "vc",
            "--epsilon",
            "0.1",
            "--solve-n",
            "--delta",
            "1"
        ])
        .0,
        2
    );
    assert_eq!(
        code(&["bounds", "--kind", "quartile", "--R", "98", "--n", "60", "--q", "1.5"]).0,
        2
    );
    let dir = TempDir::new().unwrap();
    ok(&[
        "bounds",
        "--kind",
        "vc",
        "--d",
        "2",
        "--epsilon",
        "0.1",
        "--n",
        "312",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(read_json(&dir.path().join("manifest.json"))["subcommand"], "bounds");
    assert!(read_json(&dir.path().join("bounds.json"))["bound"].as_f64().unwrap() <= 0.25);
}

#[test]
fn fit_bundled_curve_and_refit() {
    let dir = TempDir::new().unwrap();
    let input = data("curves/mnist_resnet018.csv");
    ok(&["fit", "--input", s(&input), "--out-dir", s(dir.path()), "--svg"]);
    let fit = read_json(&dir.path().join("fit.json"));
    let rel = |k: &str, v: f64| (fit[k].as_f64().unwrap() - v).abs() / v;
    assert!(
        rel("e_min", 0.0035) < 1e-6 && rel("eta", 65.0) < 1e-6 && rel("e0", 0.9) < 1e-6,
        "{fit}"
    );
    assert_eq!(fit["points"].as_array().unwrap().len(), 17);
    let svg = fs::read_to_string(dir.path().join("fit.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 34);

    let fitted = dir.path().join("fitted.csv");
    assert!(fs::read_to_string(&fitted)
        .unwrap()
        .starts_with("n,mean_error,log_n,log_deviation\n"));
    let again_dir = TempDir::new().unwrap();
    ok(&["fit", "--input", s(&fitted), "--out-dir", s(again_dir.path())]);
    let again = read_json(&again_dir.path().join("fit.json"));
    for k in ["e_min", "eta", "e0"] {
        let (a, b) = (again[k].as_f64().unwrap(), fit[k].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-6 * b, "{k}: {a} vs {b}");
    }

    ok(&[
        "fit",
        "--input",
        s(&input),
        "--out-dir",
        s(dir.path()),
        "--classes",
        "10",
    ]);
    let fixed = read_json(&dir.path().join("fit.json"));
    assert_eq!(fixed["e0"], 0.9);
    assert_eq!(fixed["e0_fixed"], true);
}

#[test]
fn fit_input_errors() {
    let dir = TempDir::new().unwrap();
    let out = s(dir.path());
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let one = write("one.csv", "n,mean_error\n100,0.5\n");
    let (c, err) = code(&["fit", "--input", s(&one), "--out-dir", out, "--fix-e0", "0.9"]);
    assert_eq!(c, 4);
    assert!(err.contains("INSUFFICIENT_DATA"), "{err}");
    let same = write("same.csv", "n,mean_error\n100,0.5\n100.0,0.4\n");
    let (c, err) = code(&["fit", "--input", s(&same), "--out-dir", out]);
    assert_eq!(c, 2);
    assert!(err.contains("DUPLICATE_N"), "{err}");
    let range = write("range.csv", "n,mean_error\n1,0.5\n2,0.4\n3,1.5\n");
    let (c, err) = code(&["fit", "--input", s(&range), "--out-dir", out]);
    assert_eq!(c, 2);
    assert!(err.contains("RANGE_ERROR") && err.contains(":4:"), "{err}");
    let parse = write("parse.csv", "n,mean_error\n1,0.5\nx,0.4\n");
    let (c, err) = code(&["fit", "--input", s(&parse), "--out-dir", out]);
    assert_eq!(c, 2);
    assert!(err.contains("PARSE_ERROR") && err.contains(":3:"), "{err}");
    let ok_file = write("ok.csv", "n,mean_error\n1,0.5\n2,0.4\n3,0.3\n");
    assert_eq!(
        code(&[
            "fit",
            "--input",
            s(&ok_file),
            "--out-dir",
            out,
            "--fix-e0",
            "0.9",
            "--classes",
            "2"
        ])
        .0,
        2
    );
    assert_eq!(
        code(&["fit", "--input", s(&ok_file), "--out-dir", out, "--fix-e0", "1.5"]).0,
        2
    );
}
