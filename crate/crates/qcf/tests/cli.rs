use std::path::Path;

use qcf::cli::{run_from, EXIT_INVALID_INPUT, EXIT_NOT_SATISFIED, EXIT_OK};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qcf"];
    argv.extend_from_slice(args);
    let code = run_from(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    assert_eq!(run(&["--version"]).0, EXIT_OK);
    assert_eq!(run(&["check", "--help"]).0, EXIT_OK);
}

#[test]
fn unknown_arguments_are_invalid_input() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["analyze", "--manifold", "round_sphere(3,1)", "--t", "x"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["analyze"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["analyze", "--manifold", "round_sphere(3,-1)"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["check", "--manifold", "round_sphere(3,1)", "--theorem", "nope"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["check", "--manifold", "round_sphere(3,1)", "--theorem", "euler-4d"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["verify", "nope"]).0, EXIT_INVALID_INPUT);
    assert_eq!(run(&["optimize", "--family", "torus"]).0, EXIT_INVALID_INPUT);
}

#[test]
fn analyze_reports_every_t() {
    let (code, out, _) = run(&["analyze", "--manifold", "round_sphere(4,1)", "--t=-1/2,0,1"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["schema"], "qcf-report/1");
    assert_eq!(v["command"], "analyze");
    let f = v["analysis"]["functional"].as_array().unwrap();
    assert_eq!(f.len(), 3);
    assert_eq!(f[0]["t"].as_f64(), Some(-0.5));
    assert_eq!(v["analysis"]["einstein"], true);
}

#[test]
fn check_exit_codes_follow_the_verdicts() {
    let (code, out, _) = run(&["check", "--manifold", "round_sphere(3,1)", "--theorem", "traceless-pointwise-3d", "--t=-0.5"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let verdict = &v["verdicts"][0];
    assert_eq!(verdict["satisfied"], true);
    assert!((verdict["margin"].as_f64().unwrap() - 6f64.sqrt()).abs() < 1e-12);
    assert_eq!(verdict["inputs_digest"].as_str().unwrap().len(), 64);
    assert_eq!(v["criticality"][0]["critical"], true);

    let (code, _, _) = run(&["check", "--manifold", "product_spheres(2,1,2,1)", "--theorem", "curvature-integral-4d"]);
    assert_eq!(code, EXIT_NOT_SATISFIED);
}

#[test]
fn check_reports_the_yamabe_source() {
    let (_, out, _) = run(&["check", "--manifold", "round_sphere(4,1)", "--theorem", "weyl-ricci-yamabe"]);
    assert_eq!(json(&out)["yamabe_source"], "exact");
    let (_, out, _) = run(&["check", "--manifold", "product_spheres(2,1,2,1)", "--theorem", "weyl-ricci-yamabe"]);
    assert_eq!(json(&out)["yamabe_source"], "lower4d");
    let (_, out, _) = run(&["check", "--manifold", "berger_sphere(2,1,1)", "--theorem", "weyl-ricci-yamabe"]);
    let v = json(&out);
    assert_eq!(v["yamabe_source"], "none");
    assert_eq!(v["verdicts"][0]["status"], "indeterminate");
    let (_, out, _) =
        run(&["check", "--manifold", "berger_sphere(2,1,1)", "--theorem", "weyl-ricci-yamabe", "--yamabe", "10"]);
    assert_eq!(json(&out)["yamabe_source"], "caller");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["check", "--manifold", "product_spheres(2,1,2,1.5)", "--t=-0.5,-0.25"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.1, b.1);
    let args = ["optimize", "--family", "berger-axial", "--t=-1/2", "--max-iter", "10"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn gauss_bonnet_command() {
    let (code, out, _) = run(&["gauss-bonnet", "--manifold", "product_spheres(2,1,2,1)"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["gauss_bonnet"]["chi"], 4);
    let (code, _, _) = run(&["gauss-bonnet", "--manifold", "product_spheres(2,1,2,1)", "--chi", "2"]);
    assert_eq!(code, EXIT_NOT_SATISFIED);
    let (code, _, _) = run(&["gauss-bonnet", "--manifold", "round_sphere(3,1)"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
}

#[test]
fn optimize_writes_output_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt.json");
    let trace = dir.path().join("trace.csv");
    let (code, stdout, _) = run(&[
        "optimize",
        "--family",
        "berger-axial",
        "--t=-0.5",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let v = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(v["search"]["status"], "converged");
    assert_eq!(v["theta0"][0].as_f64(), Some(1.5));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("iteration,value,gradient_norm,step,theta_0,theta_1\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn optimize_reports_non_convergence() {
    let (code, out, _) = run(&["optimize", "--family", "berger-axial", "--t=-0.5", "--max-iter", "1"]);
    assert_eq!(code, EXIT_NOT_SATISFIED);
    assert_eq!(json(&out)["search"]["status"], "max_iterations");
}

#[test]
fn optimize_product_family() {
    let (code, out, _) = run(&["optimize", "--family", "product(2,2)", "--t", "0"]);
    assert_eq!(code, EXIT_OK);
    let theta = &json(&out)["search"]["theta"];
    let ratio = theta[0].as_f64().unwrap() / theta[1].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-5);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn chart_specs_drive_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write(
        dir.path(),
        "flat.json",
        r#"{"dim": 3, "domain": [[0, 1], [0, 1], [0, 1]], "periodic": [true, true, true],
            "metric": {"entries": [
                {"i": 0, "j": 0, "terms": [{"coeff": 1}]},
                {"i": 1, "j": 1, "terms": [{"coeff": 1}]},
                {"i": 2, "j": 2, "terms": [{"coeff": 1}]}]},
            "quadrature": {"nodes": [4, 4, 4], "rule": "trapezoid"}}"#,
    );
    let (code, out, err) = run(&["analyze", "--spec", &flat]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert!((v["analysis"]["volume"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["analysis"]["scalar"]["max"].as_f64().unwrap().abs() < 1e-9);

    let preset = write(dir.path(), "preset.json", r#"{"metric": "perturbed_sphere(3, 0.05, 2)", "quadrature": {"nodes": [4]}}"#);
    let (code, out, _) = run(&["analyze", "--spec", &preset, "--t=-0.5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["analysis"]["einstein"], false);
}

#[test]
fn malformed_specs_are_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        r#"{"metric": 3}"#,
        r#"{"metric": "round_sphere(3,1)", "extra": 1}"#,
        r#"{"dim": 2, "domain": [[0, 1], [0, 1]], "metric": {"entries": [{"i": 0, "j": 0, "terms": [{"coeff": 1, "factors": [{"kind": "tan", "axis": 0, "k": 1}]}]}]}}"#,
        r#"{"dim": 2, "domain": [[0, 1], [0, 1]], "metric": {"entries": [{"i": 0, "j": 0, "terms": [{"coeff": 1}]}]}}"#,
        "not json",
    ];
    for (i, text) in bad.iter().enumerate() {
        let p = write(dir.path(), &format!("bad{i}.json"), text);
        let (code, _, err) = run(&["analyze", "--spec", &p]);
        assert_eq!(code, EXIT_INVALID_INPUT, "{text}: {err}");
    }
    let (code, _, _) = run(&["analyze", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
    let (code, _, _) = run(&["analyze", "--spec", "x.json", "--manifold", "round_sphere(3,1)"]);
    assert_eq!(code, EXIT_INVALID_INPUT);
}

#[test]
fn verify_constants_passes() {
    let (code, out, err) = run(&["verify", "constants"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.lines().all(|l| l.starts_with("PASS") || l.starts_with("WARN")));
    assert_eq!(json(&out)["passed"], true);
}
