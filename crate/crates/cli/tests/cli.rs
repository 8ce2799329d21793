//! End-to-end tests of the command-line surface: output formats, exit
//! codes, and report determinism.

use std::process::{Command, Output};

fn qrperm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrperm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn density_in_permutation() {
    let out = qrperm(&["density", "--sigma", "132", "--perm", "15234"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "3/10");
}

#[test]
fn density_in_uniform_permuton() {
    let out = qrperm(&["density", "--sigma", "1234", "--permuton", "uniform3", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["density"], "1/24");
}

#[test]
fn gradient_row_output() {
    let out = qrperm(&["gradient", "--sigma", "1234", "--n", "5"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("6790/3 3250/3"));
}

#[test]
fn gradient_against_appendix_n7() {
    let out = qrperm(&["gradient", "--sigma", "2143", "--n", "7"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("-10486 -4522"), "{}", stdout(&out));
}

#[test]
fn certify_exit_codes() {
    // conclusive certificate: exit 0
    let out = qrperm(&["certify", "--quad", "1234,2341,3412,4123", "--n", "5", "--signs", "++++"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("CorollaryApplies"));

    // inconclusive: exit 1
    let out = qrperm(&["certify", "--quad", "1234,2143,3412,4321", "--n", "4", "--signs", "++++"]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("Inconclusive"));

    // usage error: exit 2
    let out = qrperm(&["certify", "--quad", "1234,2143", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qrperm(&["certify", "--quad", "1234,1243,1324,1342", "--signs", "auto"]);
    assert_eq!(out.status.code(), Some(2), "independent quadruples have no coefficients");
}

#[test]
fn certify_auto_signs_zero_combination() {
    let out = qrperm(&["certify", "--quad", "1243,3421,1423,3241", "--n", "5"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("CorollaryApplies"));
}

#[test]
fn certify_writes_validatable_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("evidence.json");
    let out = qrperm(&[
        "certify",
        "--quad",
        "1432,2341,3214,4123",
        "--n",
        "4",
        "--signs",
        "++++",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let evidence: qrperm_core::certify::NonForcingEvidence =
        serde_json::from_str(&text).unwrap();
    qrperm_core::certify::validate_evidence(&evidence).unwrap();
    assert_eq!(
        evidence.verdict,
        qrperm_core::certify::Verdict::KernelRestrictedApplies
    );
}

#[test]
fn enumerate_families() {
    let out = qrperm(&["enumerate", "--family", "all-one", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["latin_squares"], 576);
    assert_eq!(v["classes"].as_array().unwrap().len(), 12);

    let out = qrperm(&["enumerate", "--family", "zero-combination", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["classes"].as_array().unwrap().len(), 7);

    let out = qrperm(&["enumerate", "--family", "other"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_frequency_table() {
    let out = qrperm(&[
        "sample", "--permuton", "uniform4", "--m", "2", "--trials", "60000", "--seed", "7",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 2);
    let f12 = table[0]["frequency"].as_f64().unwrap();
    assert!((f12 - 0.5).abs() < 0.02, "{f12}");
}

#[test]
fn reproduce_subset_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    for p in [&p1, &p2] {
        let out = qrperm(&[
            "reproduce",
            "--only",
            "enumeration",
            "--only",
            "trichotomy",
            "--json",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stdout(&out));
    }
    let mut v1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&p1).unwrap()).unwrap();
    let mut v2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&p2).unwrap()).unwrap();
    v1["wall_ms"] = 0.into();
    v2["wall_ms"] = 0.into();
    assert_eq!(v1, v2);
    assert_eq!(v1["passed"], true);

    let out = qrperm(&["reproduce", "--only", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exceptional_case1_emits_witness_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("witness.json");
    let report = dir.path().join("facts.json");
    let out = qrperm(&[
        "exceptional",
        "--case",
        "1",
        "--emit",
        witness.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));

    let w: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    // the permuton in the witness file is a valid step permuton
    let spec: qrperm_core::permuton::PermutonSpec =
        serde_json::from_value(w["permuton"].clone()).unwrap();
    let permuton = spec.build().unwrap();
    assert_eq!(permuton.k(), 32);
    // residuals are exact rationals below 1e-12
    for key in ["g1", "g2"] {
        let r = qrperm_core::rat::parse_rat(w["residuals"][key].as_str().unwrap()).unwrap();
        assert!(r <= qrperm_core::rat::parse_rat("1/1000000000000").unwrap());
    }

    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["command"], "exceptional");
}

#[test]
fn witness_from_zero_round_trip() {
    // symmetric column-reflected perturbation zeroes the 2-point deviations
    let out = qrperm(&[
        "witness-from-zero",
        "--perms",
        "12;21",
        "--k",
        "3",
        "--x",
        "1/8,-1/8,1/16,-1/16",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("d(12) = 1/2"));

    // a point that misses: verification failure, exit 1, exact residual
    let out = qrperm(&[
        "witness-from-zero",
        "--perms",
        "123",
        "--k",
        "3",
        "--x",
        "1/8,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h_123"));
}
