use std::path::Path;
use std::process::{Command, Output};

fn weyl_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn weyl_ratio_from_config_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "hyp.cfg",
        "# hyperbolic r^2\ngeometry = hyperbolic3\npotential = power:2\nlambdas = 5, 9, 13, 17\n\
         criterion_lambdas = geom:25:2:4\nexpect_criterion = satisfied\nexpect_ratio = to-one\n",
    );
    let mut bodies = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("r{run}.csv"));
        let o = weyl_lab(&[
            "weyl-ratio",
            "--config",
            &cfg,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("ASSERT PASS criterion delta=0.2"));
        bodies.push(std::fs::read_to_string(out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let mut lines = bodies[0].lines();
    let hash = lines
        .next()
        .unwrap()
        .strip_prefix("# config-hash=")
        .unwrap()
        .to_string();
    assert_eq!(hash.len(), 64);
    assert!(lines
        .next()
        .unwrap()
        .starts_with("lambda,n_lower,n_upper,phi"));
    assert!(lines.all(|l| l.ends_with(&hash)));
}

#[test]
fn inline_flags_and_failing_expectations() {
    let o = weyl_lab(&[
        "weyl-ratio",
        "--geometry",
        "line",
        "--potential",
        "power:2:raw",
        "--lambdas",
        "20,60,100",
        "--expect-ratio",
        "phi-over-n-decreasing",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ASSERT FAIL ratio-trend"));
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("20,10,10,"));
}

#[test]
fn invariants_delta_sweep() {
    let o = weyl_lab(&[
        "invariants",
        "--geometry",
        "line",
        "--potential",
        "power:2:raw",
        "--lambdas",
        "arith:25:100:25",
        "--delta-sweep",
        "--expect-criterion",
        "satisfied",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(csv.lines().count(), 2 + 12);
    assert_eq!(stderr(&o).matches("ASSERT PASS criterion").count(), 3);
}

#[test]
fn examples_exit_codes() {
    for args in [
        &["example", "doubling"][..],
        &["example", "h3-fail"],
        &["example", "positive", "--delta-sweep"],
        &["heat-check", "h3"],
        &["heat-check", "lemma21"],
        &["tauberian"],
    ] {
        let o = weyl_lab(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).contains("ASSERT FAIL"));
    }
    let o = weyl_lab(&["heat-check", "remainder"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ASSERT FAIL remainder-slope"));
}

#[test]
fn rxs1_small_grid_and_window_refusal() {
    let o = weyl_lab(&["example", "rxs1", "--count-lambdas", "2,2.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("ASSERT PASS phi-over-n-decreasing"));
    let o = weyl_lab(&["example", "rxs1", "--count-lambdas", "2,5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("feasibility window"));
}

#[test]
fn tauberian_without_c1_is_not_a_failure() {
    let o = weyl_lab(&[
        "tauberian",
        "--epsilon",
        "0.01",
        "--s-min",
        "20",
        "--s-max",
        "40",
        "--s-points",
        "41",
        "--cap",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("NOTE C1 not found"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "geometry = line\npotential = power:2\nlambdas = 3,2\n",
    );
    let o = weyl_lab(&["phi", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strictly increasing"));
    let o = weyl_lab(&["count", "--geometry", "line"]);
    assert_eq!(o.status.code(), Some(2));
    let o = weyl_lab(&["heat-check", "nonsense"]);
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let o = weyl_lab(&["weyl-ratio", "--config", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
