use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../models/{name}.txt"))
}

fn obskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obskit")).args(args).output().unwrap()
}

fn analyze(path: &std::path::Path, flags: &[&str]) -> Output {
    let mut args = vec!["analyze", path.to_str().unwrap()];
    args.extend_from_slice(flags);
    obskit(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_model(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".txt").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn c2m_orcdf_text_report() {
    let o = analyze(&model("c2m"), &["--algorithm", "orcdf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("model:       c2m"), "{out}");
    assert!(out.contains("termination: FullRank"));
    assert!(out.trim_end().ends_with("6/6 observable after 3 iteration(s)"), "{out}");
    assert!(out.lines().all(|l| l == l.trim_end()), "trailing whitespace");
}

#[test]
fn constant_input_stagnates() {
    let o = analyze(
        &model("c2m"),
        &["--algorithm", "fispo", "--u-deriv-bound", "u=0", "--format", "json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"termination\": \"RankStagnation\""), "{out}");
    assert!(out.contains("\"x2\": \"unobservable\""));
    assert!(out.contains("\"u\": \"0\""));
}

#[test]
fn bare_bound_applies_to_every_input() {
    let o = analyze(&model("ts"), &["--u-deriv-bound", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("\"aTc\": \"1\"") && out.contains("\"IPTG\": \"1\""),
        "{out}"
    );
}

#[test]
fn json_output_is_reproducible() {
    let flags = ["--algorithm", "fispo", "--format", "json", "--seed", "11"];
    let a = analyze(&model("hiv_unknown"), &flags);
    let b = analyze(&model("hiv_unknown"), &flags);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("\"seed\": 11"));
}

#[test]
fn not_affine_is_a_model_error() {
    let o = analyze(&model("ts"), &["--algorithm", "orcdf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("obskit: "), "{}", stderr(&o));
    assert!(stderr(&o).contains("affine"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_file_is_a_model_error() {
    let f = temp_model("states: x1\ndynamics:\n  x1' = -x1 +\noutputs:\n  y1 = x1\n");
    let o = analyze(f.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_file_is_a_model_error() {
    let o = obskit(&["analyze", "/nonexistent/model.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(obskit(&["analyze", ""]).status.code(), Some(2));
    assert_eq!(obskit(&["analyze"]).status.code(), Some(2));
    let c2m = model("c2m");
    for flags in [
        &["--bogus"][..],
        &["--algorithm", "newton"],
        &["--kmax", "0"],
        &["--multiexp", "0"],
        &["--timeout", "0"],
        &["--u-deriv-bound", "nosuch=1"],
        &["--u-deriv-bound", "u=-1"],
        &["--w-deriv-bound", "u=1"],
        &["--exclude", "nosuch"],
        &["--threads", "0"],
    ] {
        let o = analyze(&c2m, flags);
        assert_eq!(o.status.code(), Some(2), "{flags:?}: {}", stderr(&o));
    }
}

#[test]
fn degenerate_evaluation_exits_with_four() {
    let f = temp_model("states: x1\nparameters: a\ndynamics:\n  x1' = -a*x1\noutputs:\n  y1 = x1*ln(-x1^2 - 1)\n");
    let o = analyze(f.path(), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn kmax_and_exclusions() {
    let o = analyze(
        &model("bolie"),
        &["--kmax", "1", "--exclude", "Vp,p1", "--format", "json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"termination\": \"KmaxReached\""), "{out}");
    assert!(!out.contains("\"Vp\": "), "{out}");
    assert!(
        out.contains("\"exclude\": [\n      \"Vp\",\n      \"p1\"\n    ]"),
        "{out}"
    );
}

#[test]
fn timings_are_opt_in() {
    let plain = stdout(&analyze(&model("c2m"), &["--format", "json"]));
    assert!(plain.contains("\"stage_seconds\": null"));
    let timed = stdout(&analyze(&model("c2m"), &["--format", "json", "--timings"]));
    assert!(!timed.contains("\"stage_seconds\": null"));
}

#[test]
fn multiple_experiments() {
    let o = analyze(&model("c2m"), &["--algorithm", "orcdf", "--multiexp", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("x2_e2"));
}
