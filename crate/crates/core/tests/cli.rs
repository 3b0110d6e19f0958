use std::process::Command;

use fkm_cone::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("fkm-cone").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> serde_json::Value {
    let (code, out, err) = call(args);
    assert!(code <= 1, "{args:?}: exit {code}, {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["certify", "--m", "9", "--k", "1"]).0, 0);
    assert_eq!(call(&["certify", "--m", "2", "--k", "2"]).0, 1);
    assert_eq!(call(&["certify", "--m", "2", "--k", "1"]).0, 2);
    assert_eq!(call(&["vanishing", "--dim", "12", "--alpha2", "30"]).0, 1);
    assert_eq!(
        call(&[
            "vanishing",
            "--dim",
            "12",
            "--alpha2",
            "17.85",
            "--profile",
            "limit"
        ])
        .0,
        0
    );
    let (code, _, err) = call(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("certify"));
    assert_eq!(call(&["verify", "--m", "0", "--k", "1"]).0, 2);
}

#[test]
fn vanishing_json_keys() {
    let v = json(&[
        "vanishing",
        "--dim",
        "12",
        "--alpha2",
        "17.85",
        "--profile",
        "limit",
    ]);
    for key in [
        "exists",
        "theta_rad",
        "theta_deg",
        "tan_theta",
        "profile",
        "steps",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["exists"], true);
    assert!(v["theta_deg"].as_f64().unwrap() <= 11.23 + 0.3);
}

#[test]
fn radius_and_certificate_fields() {
    let v = json(&["radius", "--m", "9", "--n", "15"]);
    assert!((v["N_rad"].as_f64().unwrap() - (3f64.sqrt() / 2.0).atan()).abs() < 1e-15);
    let c = json(&["certify", "--m", "3", "--k", "3"]);
    assert_eq!(c["verdict"], "certified");
    assert_eq!(c["n"], 11);
}

#[test]
fn system_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("fkm_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sys.json");
    let p = path.to_str().unwrap();
    let (code, _, err) = call(&["construct", "--m", "4", "--k", "2", "--out", p]);
    assert_eq!(code, 0, "{err}");
    let (a_code, a, _) = call(&[
        "verify",
        "--system",
        p,
        "--samples",
        "20",
        "--format",
        "json",
    ]);
    let (b_code, b, _) = call(&[
        "verify",
        "--m",
        "4",
        "--k",
        "2",
        "--samples",
        "20",
        "--format",
        "json",
    ]);
    assert_eq!((a_code, b_code), (0, 0));
    assert_eq!(a, b);
    std::fs::write(&path, "{\"m\": 4}").unwrap();
    assert_eq!(call(&["verify", "--system", p]).0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_csv_shape() {
    let (code, out, _) = call(&["sweep", "--m", "2..4", "--k", "1..3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], fkm_cone::certify::FKM_CSV_HEADER);
    assert_eq!(lines.len(), 1 + 9);
    let (_, out, _) = call(&["sweep", "--dim", "21..30"]);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",certified")));
}

#[test]
fn binary_runs_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_fkm-cone");
    let runs = [
        vec![
            "verify",
            "--m",
            "3",
            "--k",
            "3",
            "--samples",
            "50",
            "--seed",
            "7",
        ],
        vec![
            "curvature",
            "--m",
            "2",
            "--k",
            "3",
            "--seed",
            "7",
            "--samples",
            "2",
        ],
        vec![
            "radius",
            "--m",
            "2",
            "--k",
            "3",
            "--samples",
            "2",
            "--seed",
            "7",
        ],
        vec!["sweep", "--m", "2..12", "--k", "1..2"],
    ];
    for args in runs {
        let a = Command::new(bin).args(&args).output().unwrap();
        let b = Command::new(bin).args(&args).output().unwrap();
        assert!(
            a.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}
