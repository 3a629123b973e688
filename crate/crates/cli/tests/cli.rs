mod common;

use common::{field, hbt, path_str, stderr, stdout, table};

#[test]
fn eval_prints_the_sphere_example() {
    let o = hbt(&["eval", "--case", "C", "--R", "1", "--tau", "1", "--q", "2", "--dw", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = field(&stdout(&o), "C").unwrap();
    assert!((c - 1.2132676).abs() < 1e-6, "{c}");
}

#[test]
fn eval_coherent_source_is_flat() {
    let o = hbt(&["eval", "--case", "A", "--coherent", "--q", "0", "--dw", "0"]);
    assert_eq!(field(&stdout(&o), "C"), Some(1.0));
}

#[test]
fn invalid_input_exits_one() {
    let o = hbt(&["eval", "--case", "A", "--R", "-1", "--q", "1", "--dw", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`R`"));
    assert_eq!(hbt(&["eval", "--case", "Z", "--q", "1", "--dw", "0"]).status.code(), Some(1));
    assert_eq!(hbt(&["fit", "/nonexistent/surface.csv"]).status.code(), Some(1));
    assert_eq!(hbt(&["--help"]).status.code(), Some(0));
}

#[test]
fn figure2_at_unit_x() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f2.csv");
    let o = hbt(&["figure2", "--x-grid", "0:1:11", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = table(&out);
    let cases = t.str_column("case").unwrap();
    let x = t.f64_column("x").unwrap();
    let phi = t.f64_column("phi").unwrap();
    let at = |c: &str| (0..x.len()).find(|&i| cases[i] == c && x[i] == 1.0).map(|i| phi[i]).unwrap();
    assert!((at("A") - (-1.0f64).exp()).abs() < 1e-15);
    assert!((at("D") - 0.4096).abs() < 1e-15);
    assert_eq!(t.rows.len(), 44);
}

#[test]
fn check_passes_for_exponential_source() {
    let o = hbt(&["check", "--case", "D", "--grid", "10x10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(field(&s, "max_rel_dev").unwrap() < 1e-6);
    assert_eq!(field(&s, "points"), Some(100.0));
}

#[test]
fn check_exits_two_when_tolerance_is_missed() {
    let o = hbt(&["check", "--case", "C", "--grid", "4x4", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status = fail"));
}

#[test]
fn synth_and_fit_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let synth = |out: &std::path::Path| {
        let o = hbt(&[
            "synth", "--case", "A", "--q-grid", "0:4:41", "--dw-grid", "0:2:21", "--pairs-per-bin", "1000000",
            "--seed", "3", "--out", path_str(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    synth(&p("s1.csv"));
    synth(&p("s2.csv"));
    let s1 = std::fs::read(p("s1.csv")).unwrap();
    assert_eq!(s1, std::fs::read(p("s2.csv")).unwrap());

    let fit = |report: &std::path::Path, csv: &std::path::Path| {
        let o = hbt(&["fit", path_str(&p("s1.csv")), "--out", path_str(report), "--csv", path_str(csv)]);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    fit(&p("r1.txt"), &p("r1.csv"));
    fit(&p("r2.txt"), &p("r2.csv"));
    let text = std::fs::read_to_string(p("r1.txt")).unwrap();
    assert_eq!(text, std::fs::read_to_string(p("r2.txt")).unwrap());
    assert_eq!(std::fs::read(p("r1.csv")).unwrap(), std::fs::read(p("r2.csv")).unwrap());
    assert!(text.contains("chaoticity = chaotic"));
    let tau = field(&text, "tau_hat").unwrap();
    assert!((tau - 1.0).abs() < 0.05, "{tau}");

    let t = table(&p("r1.csv"));
    assert_eq!(t.metadata.get("format").map(String::as_str), Some("hbt-fit"));
    assert_eq!(t.metadata.get("seed").map(String::as_str), Some("3"));
}

#[test]
fn synth_rejects_too_few_pairs() {
    let o = hbt(&["synth", "--pairs-per-bin", "10", "--q-grid", "0:1:3", "--dw-grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(1));
}
