use std::path::Path;
use std::process::{Command, Output};

fn relu3d(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relu3d")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn build_square(dir: &Path) {
    let o = relu3d(&["build", "--theorem", "poly", "--coeffs", "0,0,1", "--H", "6", "-o", "sq.net"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("sq.net.report.json").exists());
}

#[test]
fn square_build_eval_size_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    build_square(dir);

    let o = relu3d(&["eval", "sq.net", "0.5"], dir);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.25).abs() <= 12.0 * 2f64.powi(-14));

    let o = relu3d(&["size", "sq.net"], dir);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((m["width"].as_u64(), m["depth"].as_u64(), m["height"].as_u64()), (Some(8), Some(1), Some(6)));

    let o = relu3d(&["verify", "sq.net", "--target", "square", "--norm", "sup"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sq.net.verify.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["norm_kind"]["kind"], "sup");
}

#[test]
fn tightened_bound_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    build_square(tmp.path());
    let o = relu3d(&["verify", "sq.net", "--target", "square", "--bound", "1e-9", "--report", "r.json"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r.json"));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(relu3d(&["verify", "missing.net", "--target", "square"], dir).status.code(), Some(2));
    assert_eq!(relu3d(&["frobnicate"], dir).status.code(), Some(2));
    assert_eq!(relu3d(&["build", "--theorem", "poly", "--bogus", "1", "-o", "x.net"], dir).status.code(), Some(2));
    assert_eq!(relu3d(&["build", "--theorem", "nope", "-o", "x.net"], dir).status.code(), Some(2));
}

#[test]
fn eval_matches_library_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    build_square(dir);
    let o = relu3d(&["eval", "sq.net", "--random", "5", "--seed", "3"], dir);
    assert!(o.status.success());
    let net = relu3d::net3d::from_json(&std::fs::read_to_string(dir.join("sq.net")).unwrap()).unwrap();
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    for line in lines {
        let (x, y) = line.split_once('\t').unwrap();
        let x: f64 = x.parse().unwrap();
        let y: f64 = y.parse().unwrap();
        assert_eq!(net.evaluate(&[x]).unwrap().to_bits(), y.to_bits());
    }
    // same seed, same points
    let again = relu3d(&["eval", "sq.net", "--random", "5", "--seed", "3"], dir);
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn params_document_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("p.json"), r#"{"theorem_id":"poly","params":{"coeffs":[0,0,1],"H":3}}"#).unwrap();
    let o = relu3d(&["build", "--params", "p.json", "--H", "5", "-o", "a.net"], dir);
    assert!(o.status.success());
    let o = relu3d(&["size", "a.net"], dir);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["height"].as_u64(), Some(5));
}

#[test]
fn sweep_writes_csv_and_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = relu3d(
        &["sweep", "--theorem", "poly", "--coeffs", "0,0,1", "--param", "H", "--values", "1..8", "--fit", "0.5", "-o", "s.csv"],
        dir,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("s.csv")).unwrap();
    assert!(csv.starts_with("H,measured,bound,ratio,param_count,width,depth,height"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn trig_build_verifies_against_default_target() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = relu3d(&["build", "--theorem", "trig", "--k", "3", "--N2", "10", "--kind", "sin", "-o", "s.net"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(relu3d(&["verify", "s.net"], dir).status.code(), Some(0));
}

#[test]
fn table1_default_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = relu3d(&["table1", "-o", "t.csv"], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("t.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("poly,")));
    assert!(csv.lines().any(|l| l.starts_with("analytic-cube,")));
}
