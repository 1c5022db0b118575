mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{files_under, small_config};
use image::GrayImage;
use surfacegrid::dataset::{tagged_pairs, DatasetManifest, SubsetTag, TestSet, MANIFEST_FILE};
use surfacegrid::imageio::load_surface;
use surfacegrid::metrics::{prediction_path, reports_from_jsonl};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfacegrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_functions_writes_files_fragment_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = run(&["gen-functions", "--tiny", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = files_under(&out);
    assert_eq!(files.keys().filter(|k| k.starts_with("functions/")).count(), 5);
    assert!(files.contains_key("config.toml"));
    let fragment = std::str::from_utf8(&files["functions.jsonl"]).unwrap();
    assert_eq!(fragment.lines().count(), 5);
    assert!(fragment.lines().all(|l| l.contains("\"sha256\":\"")));

    let again = dir.path().join("b");
    assert!(run(&["gen-functions", "--tiny", "-o", p(&again)]).status.success());
    assert_eq!(files_under(&again), files);

    let other = dir.path().join("c");
    assert!(run(&["gen-functions", "--tiny", "--seed", "9", "--functions", "3..5", "-o", p(&other)])
        .status
        .success());
    let c = files_under(&other);
    assert_eq!(c.keys().filter(|k| k.starts_with("functions/")).count(), 2);
    assert_ne!(c["functions/f00003.txt"], files["functions/f00003.txt"]);
}

#[test]
fn bad_arguments_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(!run(&["gen-functions", "--functions", "5..5", "-o", p(&out)]).status.success());
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "master_seed = 1\n").unwrap();
    assert!(!run(&["build", "--config", p(&bad), "-o", p(&out)]).status.success());
    let mut c = surfacegrid::Config::tiny();
    c.viewpoints[0] = [30.0, 95.0];
    fs::write(&bad, c.to_toml()).unwrap();
    let o = run(&["build", "--config", p(&bad), "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn dry_run_prints_counts_and_builds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let o = run(&["build", "--dry-run", "-o", p(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("functions 2000 depth 20000 surfaces 78400"));
    assert!(!out.exists());
}

#[test]
fn build_inspect_and_rebuild() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let o = run(&["build", "--tiny", "--threads", "2", "-o", p(&out)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("plan: functions 5 depth 10 surfaces 20"));
    let first = fs::read(out.join(MANIFEST_FILE)).unwrap();

    let o = run(&["build", "--tiny", "--resume", "-o", p(&out)]);
    assert!(stdout(&o).contains("executed 0 reused 35"));
    let o = run(&["build", "--tiny", "-o", p(&out)]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join(MANIFEST_FILE)).unwrap(), first);

    let o = run(&["inspect", "--json", p(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["counts"]["surfaces"], 20);
    assert_eq!(v["valid"], true);
    assert_eq!(v["pending"], 0);
    assert!(stdout(&run(&["inspect", p(&out.join(MANIFEST_FILE))])).contains("rule lines37 10"));
}

#[test]
fn eval_scores_predictions_and_flags_missing_ones() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, small_config().to_toml()).unwrap();
    assert!(run(&["build", "--config", p(&cfg), "-o", p(&ds)]).status.success());
    let m = DatasetManifest::load(ds.join(MANIFEST_FILE)).unwrap();
    let pred = dir.path().join("pred");
    for pair in tagged_pairs(&m, SubsetTag::Test(TestSet::Base)) {
        let dst = prediction_path(&pred, &pair);
        fs::create_dir_all(dst.parent().unwrap()).unwrap();
        fs::copy(ds.join(&pair.depth), dst).unwrap();
    }
    let json = dir.path().join("r.jsonl");
    let o = run(&["eval", "--dataset", p(&ds), "--pred", p(&pred), "--set", "Base", "--json", p(&json)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0.000"));
    let reports = reports_from_jsonl(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!((reports.len(), reports[0].count), (1, 4));

    let o = run(&["eval", "--dataset", p(&ds), "--pred", p(&pred), "--set", "Base,Full"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Full"));

    let o = run(&["table", p(&json)]);
    assert!(o.status.success() && stdout(&o).contains("Base"));
}

#[test]
fn preprocess_binarizes_scans() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.png");
    GrayImage::new(40, 40).save(&blank).unwrap();
    let out = dir.path().join("out.png");
    assert!(!run(&["preprocess", p(&blank), p(&out)]).status.success());
    assert!(!out.exists());

    let scan = dir.path().join("scan.png");
    let mut img = GrayImage::from_pixel(256, 128, image::Luma([230]));
    for x in (0..256).step_by(16) {
        for y in 0..128 {
            img.put_pixel(x, y, image::Luma([20]));
        }
    }
    img.save(&scan).unwrap();
    assert!(run(&["preprocess", p(&scan), p(&out)]).status.success());
    let s = load_surface(&out).unwrap();
    assert_eq!((s.width(), s.height()), (512, 512));
    assert!(s.white_fraction() > 0.0 && s.white_fraction() < 0.5);

    let fixed = dir.path().join("fixed.png");
    assert!(run(&["preprocess", "--threshold", "100", p(&scan), p(&fixed)]).status.success());
    assert_eq!(load_surface(&fixed).unwrap(), s);
    assert!(!run(&["preprocess", "--threshold", "300", p(&scan), p(&fixed)]).status.success());
}

#[test]
fn render_and_early_stop_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (d, s) = (dir.path().join("d.png"), dir.path().join("s.png"));
    let o = run(&["render", "--id", "4", "--azimuth", "45", "--elevation", "22.5", "--depth", p(&d), "--surface", p(&s)]);
    assert!(o.status.success());
    assert!(d.exists() && s.exists());

    let log = dir.path().join("log.jsonl");
    let lines: String = (0..60)
        .map(|e| format!("{{\"epoch\":{e},\"train_loss\":1.0,\"val_mae\":{}}}\n", 1.0 + e as f64))
        .collect();
    fs::write(&log, lines).unwrap();
    let o = run(&["early-stop", p(&log)]);
    assert_eq!(stdout(&o).trim(), r#"{"action":"stop","rollback_epoch":0}"#);
    let o = run(&["early-stop", "--patience", "60", p(&log)]);
    assert!(stdout(&o).contains("continue"));
}
