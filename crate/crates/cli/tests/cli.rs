use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eip(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eip"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn eip")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = eip(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_config(dir: &Path) {
    ok(dir, &["init-config", "--out", "run.cfg"]);
    let text = fs::read_to_string(dir.join("run.cfg")).unwrap();
    let text: String = text
        .lines()
        .map(|l| {
            if l.starts_with("resolution") {
                "resolution = 16".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(dir.join("run.cfg"), text + "\n").unwrap();
}

#[test]
fn simulate_solve_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(
        d,
        &[
            "simulate", "--config", "run.cfg", "--out", "ev.evt", "--truth", "gt",
        ],
    );
    ok(
        d,
        &[
            "solve",
            "--config",
            "run.cfg",
            "--events",
            "ev.evt",
            "--out",
            "r",
            "--foreground",
            "gt_normals.pfm",
        ],
    );
    for f in [
        "r_normals.pfm",
        "r_cost.pfm",
        "r_labels.pfm",
        "gt_albedo.pfm",
    ] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    let summary = ok(
        d,
        &[
            "eval",
            "--result",
            "r_normals.pfm",
            "--truth",
            "gt_normals.pfm",
            "--out",
            "e",
        ],
    );
    let mae: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("mae_deg = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mae < 1.0, "mae {mae}");
    assert_eq!(
        fs::read_to_string(d.join("e_summary.txt")).unwrap(),
        summary
    );
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    for tag in ["a", "b"] {
        let ev = format!("{tag}.evt");
        ok(d, &["simulate", "--config", "run.cfg", "--out", &ev]);
        ok(
            d,
            &[
                "solve", "--config", "run.cfg", "--events", &ev, "--out", tag,
            ],
        );
    }
    for suffix in [".evt", "_normals.pfm", "_cost.pfm", "_labels.pfm"] {
        let a = fs::read(d.join(format!("a{suffix}"))).unwrap();
        let b = fs::read(d.join(format!("b{suffix}"))).unwrap();
        assert!(a == b, "{suffix} differs");
    }
}

#[test]
fn text_events_match_binary_events() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(d, &["simulate", "--config", "run.cfg", "--out", "ev.evt"]);
    ok(d, &["simulate", "--config", "run.cfg", "--out", "ev.txt"]);
    ok(
        d,
        &[
            "baseline", "--config", "run.cfg", "--events", "ev.evt", "--out", "b1.pfm",
        ],
    );
    ok(
        d,
        &[
            "baseline", "--config", "run.cfg", "--events", "ev.txt", "--out", "b2.pfm",
        ],
    );
    // text timestamps are microseconds, binary are nanoseconds
    let summary = ok(
        d,
        &[
            "eval", "--result", "b2.pfm", "--truth", "b1.pfm", "--out", "cmp",
        ],
    );
    let mae: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("mae_deg = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mae < 0.05, "mae {mae}");
    assert!(summary.contains("sentinel = 0"), "{summary}");
}

#[test]
fn calibrate_then_solve_with_estimated_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(
        d,
        &[
            "simulate", "--config", "run.cfg", "--out", "ramp.evt", "--ramp-k", "6",
        ],
    );
    ok(
        d,
        &[
            "calibrate",
            "--events",
            "ramp.evt",
            "--k",
            "6",
            "--cycles",
            "3",
            "--out",
            "th",
        ],
    );
    for f in ["th.pos.pfm", "th.neg.pfm", "th.calib"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    ok(d, &["simulate", "--config", "run.cfg", "--out", "ev.evt"]);
    let out = ok(
        d,
        &[
            "solve",
            "--config",
            "run.cfg",
            "--events",
            "ev.evt",
            "--out",
            "r",
            "--thresholds",
            "th",
        ],
    );
    assert!(out.contains("pixels solved"));
}

#[test]
fn profile_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(d, &["simulate", "--config", "run.cfg", "--out", "ev.evt"]);
    ok(
        d,
        &[
            "profile", "--config", "run.cfg", "--events", "ev.evt", "--x", "8", "--y", "8",
            "--out", "p.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("p.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,value,valid"));
    assert_eq!(lines.count(), 256);
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = eip(
        d,
        &[
            "solve",
            "--config",
            "missing.cfg",
            "--events",
            "x.evt",
            "--out",
            "r",
        ],
    );
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "));

    fs::write(d.join("bad.cfg"), "period = 1\nbogus = 3\n").unwrap();
    let out = eip(
        d,
        &[
            "solve", "--config", "bad.cfg", "--events", "x.evt", "--out", "r",
        ],
    );
    assert!(!out.status.success());
    assert_eq!(
        String::from_utf8(out.stderr)
            .unwrap()
            .trim_end()
            .lines()
            .count(),
        1
    );
}
