use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_enmi-loc");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn enmi(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ENMI_LOC_WORKERS")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_pgm(path: &Path, w: usize, h: usize, px: &[u8]) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend_from_slice(px);
    fs::write(path, bytes).unwrap();
}

#[test]
fn project_reference_camera_lists_66_tiles() {
    let cam = configs().join("camera.json");
    let out = enmi(&["project", "--camera", p(&cam), "--n0", "0.01"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "row,col,x_l,x_u,z_l,z_u,area_cm2,sigma"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 66);
    assert!(rows.iter().all(|r| !r.ends_with(',')));
    assert!(rows[65].starts_with("7,12,"));
}

#[test]
fn simulate_ci_config_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let cfg = configs().join("sim_ci.json");
    let out = enmi(&[
        "simulate",
        "--config",
        p(&cfg),
        "--out",
        p(&csv),
        "--svg",
        p(&svg),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n0,trials,nmi_errors,enmi_errors,nmi_error_rate,enmi_error_rate"
    );
    assert_eq!(text.lines().count(), 4);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn simulate_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("sim_ci.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--config".into(),
            p(&cfg).into(),
            "--out".into(),
            p(out).into(),
            "--trials".into(),
            "40".into(),
            "--seed".into(),
            "11".into(),
        ]
    };
    let one = Command::new(BIN)
        .args(args(&a))
        .env("ENMI_LOC_WORKERS", "1")
        .status()
        .unwrap();
    let three = Command::new(BIN)
        .arg("--workers")
        .arg("3")
        .args(args(&b))
        .status()
        .unwrap();
    assert!(one.success() && three.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(fs::read_to_string(&a).unwrap().contains("\n0.01,40,"));
}

#[test]
fn usage_errors_exit_2() {
    let out = enmi(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = enmi(&[
        "match",
        "--capture",
        "c",
        "--candidates",
        "d",
        "--mode",
        "bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nmi") && err.contains("enmi"));
    let out = enmi(&[
        "simulate", "--config", "s.json", "--out", "x.csv", "--svg", "x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(enmi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(enmi(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_is_a_runtime_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"trials": 3}"#).unwrap();
    let out_csv = dir.path().join("r.csv");
    let out = enmi(&["simulate", "--config", p(&cfg), "--out", p(&out_csv)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(!out_csv.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);

    let missing = enmi(&[
        "simulate",
        "--config",
        "/nonexistent/sim.json",
        "--out",
        p(&out_csv),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn mask_with_one_pair_fails() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("a.pgm"), 2, 2, &[1, 2, 3, 4]);
    write_pgm(&dir.path().join("b.pgm"), 2, 2, &[1, 2, 3, 4]);
    let manifest = dir.path().join("pairs.csv");
    fs::write(&manifest, "local_path,prior_path\na.pgm,b.pgm\n").unwrap();
    let out_csv = dir.path().join("mask.csv");
    let out = enmi(&["mask", "--pairs", p(&manifest), "--out", p(&out_csv)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n ≥ 2"), "{err}");
    assert!(!out_csv.exists());
}

#[test]
fn mask_writes_csv_and_preview() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pgm(&d.join("prior.pgm"), 2, 2, &[10, 10, 10, 10]);
    write_pgm(&d.join("l1.pgm"), 2, 2, &[11, 12, 10, 10]);
    write_pgm(&d.join("l2.pgm"), 2, 2, &[9, 8, 10, 13]);
    write_pgm(&d.join("valid.pgm"), 2, 2, &[1, 1, 0, 1]);
    let manifest = d.join("pairs.csv");
    fs::write(
        &manifest,
        "local_path,prior_path\nl1.pgm,prior.pgm\nl2.pgm,prior.pgm\n",
    )
    .unwrap();
    let out_csv = d.join("mask.csv");
    let preview = d.join("mask.pgm");
    let out = enmi(&[
        "mask",
        "--pairs",
        p(&manifest),
        "--out",
        p(&out_csv),
        "--preview",
        p(&preview),
        "--valid",
        p(&d.join("valid.pgm")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(&out_csv).unwrap(),
        "i,j,variance\n0,0,2\n0,1,8\n1,0,\n1,1,9\n"
    );
    let img = fs::read(&preview).unwrap();
    assert!(img.starts_with(b"P5\n2 2\n255\n"));
    assert_eq!(&img[img.len() - 4..], &[0, 219, 0, 255]);
}

#[test]
fn match_picks_the_copy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let truth: Vec<f64> = (0..66).map(|k| ((k * 37) % 256) as f64).collect();
    let decoy: Vec<f64> = (0..66).map(|k| ((k * 101 + 7) % 256) as f64).collect();
    fs::write(
        d.join("capture.json"),
        serde_json::to_string(&truth).unwrap(),
    )
    .unwrap();
    let cands = serde_json::json!([
        {"id": "decoy", "meta": {"x": 1}, "values": decoy},
        {"id": "truth", "meta": {"x": 2}, "values": truth},
    ]);
    fs::write(d.join("cands.json"), cands.to_string()).unwrap();
    for mode in ["nmi", "enmi"] {
        let out = enmi(&[
            "match",
            "--capture",
            p(&d.join("capture.json")),
            "--candidates",
            p(&d.join("cands.json")),
            "--mode",
            mode,
            "--n0",
            "0.001",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with("id,score,best\n"));
        let truth_line = text.lines().find(|l| l.starts_with("truth,")).unwrap();
        assert!(truth_line.ends_with(",1"), "{text}");
        if mode == "nmi" {
            // An exact copy fills only the diagonal.
            assert_eq!(truth_line, "truth,2,1");
        }
        assert!(String::from_utf8_lossy(&out.stderr).contains("best match: truth"));
    }

    // Directory form, one candidate per file.
    let cdir = d.join("cands");
    fs::create_dir(&cdir).unwrap();
    fs::write(cdir.join("b.json"), cands[1].to_string()).unwrap();
    fs::write(cdir.join("a.json"), cands[0].to_string()).unwrap();
    let out = enmi(&[
        "match",
        "--capture",
        p(&d.join("capture.json")),
        "--candidates",
        p(&cdir),
        "--mode",
        "nmi",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("decoy,"));

    let out = enmi(&[
        "match",
        "--capture",
        p(&d.join("capture.json")),
        "--candidates",
        p(&cdir),
        "--mode",
        "enmi",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
