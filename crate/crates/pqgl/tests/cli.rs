//! Black-box tests of the command-line binary: exit codes, artifact
//! layout, and byte-level determinism of the scan output.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqgl"))
}

/// Fresh scratch directory under the system temp root; each test owns one.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pqgl-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = stdout_of(&help);
    for sub in ["classify", "toolkit-selftest", "check-integrand", "solve", "estimate", "scan"] {
        assert!(text.contains(sub), "help does not mention `{sub}`");
    }
    let version = bin().arg("--version").output().unwrap();
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn classify_reports_each_regime() {
    let cases = [
        (["--n", "3", "--p", "2", "--q", "2", "--r", "3", "--alpha", "13"], "standard-growth"),
        (["--n", "2", "--p", "2", "--q", "11/5", "--r", "4", "--alpha", "0"], "strict-gap"),
        (["--n", "2", "--p", "2", "--q", "5/2", "--r", "4", "--alpha", "1"], "limit-gap"),
    ];
    for (args, regime) in cases {
        let out = bin().arg("classify").args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "classify {args:?} failed");
        assert!(stdout_of(&out).contains(regime), "expected `{regime}` in output");

        let json = bin().arg("classify").args(args).arg("--json").output().unwrap();
        assert_eq!(json.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout_of(&json)).unwrap();
        assert_eq!(v["regime"], regime);
    }
}

#[test]
fn failed_checks_exit_one() {
    // The growth gap is violated: q/p = 3/2 > 1 + 1/2 - 1/4.
    let out = bin()
        .args(["classify", "--n", "2", "--p", "2", "--q", "3", "--r", "4", "--alpha", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gap"));
}

#[test]
fn usage_errors_exit_two() {
    // Unknown subcommand.
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Config file that does not exist.
    let out = bin()
        .args(["check-integrand", "--config", "/nonexistent/members.ini"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Truncation levels without mollification radii.
    let out = bin()
        .args(["solve", "--integrand", "standard", "--grid", "9", "--k-list", "2,4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toolkit_selftest_passes() {
    let out = bin().args(["toolkit-selftest", "--json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 9);
}

#[test]
fn check_integrand_config_round_trip() {
    let dir = scratch("check");
    let ini = dir.join("member.ini");
    fs::write(
        &ini,
        "# double-phase member on the borderline\n\
         [integrand]\n\
         kind = K3\n\
         n = 2\n\
         p = 2\n\
         q = 5/2\n\
         r = 4\n\
         alpha = 1\n\
         a_profile = sine\n\
         a_min = 1.0\n\
         a_max = 2.0\n",
    )
    .unwrap();
    let report = dir.join("report.json");
    let out = bin()
        .args(["check-integrand", "--config"])
        .arg(&ini)
        .args(["--samples", "2000", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["margins"]["growth_lower"].as_f64().unwrap() >= -1e-10);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn solve_writes_field_and_report() {
    let dir = scratch("solve");
    let out = bin()
        .args(["solve", "--integrand", "standard", "--grid", "17", "--boundary", "harmonic"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let (dim, m, extent, values) = pqgl::cli::read_field_binary(&dir.join("field.bin")).unwrap();
    assert_eq!((dim, m), (2, 17));
    assert!(extent > 0.0);
    assert_eq!(values.len(), 17 * 17);
    assert!(values.iter().all(|v| v.is_finite()));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn solve_ladder_writes_every_rung() {
    let dir = scratch("ladder");
    let out = bin()
        .args([
            "solve",
            "--integrand",
            "limit-a",
            "--grid",
            "9",
            "--k-list",
            "2,4",
            "--eps-list",
            "0.3",
        ])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let ladder: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("ladder.json")).unwrap()).unwrap();
    let rungs = ladder["rungs"].as_array().unwrap();
    assert_eq!(rungs.len(), 2);
    for idx in 0..rungs.len() {
        assert!(dir.join(format!("rung_{idx:03}_field.bin")).is_file());
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn estimate_reports_stable_constants() {
    let dir = scratch("estimate");
    let out = bin()
        .args(["estimate", "--integrand", "standard", "--grid", "33"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("estimate.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["stability"]["main"]["ratio"].as_f64().unwrap() <= 2.0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn scan_is_deterministic_across_runs_and_thread_counts() {
    let strip_stamp = |path: &PathBuf| -> Vec<u8> {
        let bytes = fs::read(path).unwrap();
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        bytes[nl..].to_vec()
    };
    let mut outputs = Vec::new();
    for (tag, threads) in [("scan-a", "1"), ("scan-b", "1"), ("scan-c", "4")] {
        let dir = scratch(tag);
        let out = bin()
            .args(["scan", "--m-list", "9,17"])
            .arg("--out")
            .arg(&dir)
            .env("PQGL_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let csv = dir.join("scan.csv");
        assert!(csv.is_file());
        outputs.push((dir, strip_stamp(&csv)));
    }
    assert_eq!(outputs[0].1, outputs[1].1, "same-seed scans differ");
    assert_eq!(outputs[0].1, outputs[2].1, "thread count changed the scan output");
    for (dir, _) in outputs {
        let _ = fs::remove_dir_all(&dir);
    }
}
