use koszulab::presentations::{builtin, to_json};
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn koszulab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koszulab")).args(args).env_remove("KOSZULAB_CACHE").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("koszulab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Nonzero (m, n) cells of a TSV dimension table.
fn support(tsv: &str) -> Vec<(usize, usize)> {
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some("m\tn\tweight\tgenus\tdim"));
    lines
        .filter_map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[4] != "0").then(|| (f[0].parse().unwrap(), f[1].parse().unwrap()))
        })
        .collect()
}

#[test]
fn dims_tables() {
    let o = koszulab(&["dims", "--builtin", "qpois_dual", "--m", "1..4", "--n", "1..4", "--format", "tsv"]);
    assert!(o.status.success());
    assert_eq!(support(&stdout(&o)), (1..=4).map(|i| (i, i)).collect::<Vec<_>>());

    let o = koszulab(&["dims", "--builtin", "qlp_dual", "--m", "1..4", "--n", "1..4", "--format", "tsv"]);
    let want: Vec<(usize, usize)> = (1..=4).flat_map(|m| (1..=m).map(move |n| (m, n))).collect();
    assert_eq!(support(&stdout(&o)), want);

    let o = koszulab(&["dims", "--builtin", "qpois", "--m", "3", "--n", "3", "--weight", "2", "--format", "tsv"]);
    assert_eq!(stdout(&o), "m\tn\tweight\tgenus\tdim\n3\t3\t2\t0\t8\n");
}

#[test]
fn dims_json_rows() {
    let o = koszulab(&["dims", "--builtin", "qpois", "--m", "3", "--n", "3", "--weight", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["presentation"], "qpois");
    assert_eq!(v["rows"][0]["dim"], 8);
    assert_eq!(v["rows"][0]["weight"], 2);
}

#[test]
fn dual_file_round_trip() {
    let dir = scratch("dual");
    let path = dir.join("qpd.json");
    let o = koszulab(&["dual", "--builtin", "qpois", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = koszulab(&["dims", path.to_str().unwrap(), "--m", "1..3", "--n", "1..3", "--format", "tsv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(support(&stdout(&o)), vec![(1, 1), (2, 2), (3, 3)]);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cobar_weight_two_anchor() {
    let o = koszulab(&["cobar", "--builtin", "qpois_dual", "--m", "3", "--n", "3", "--max-genus", "0"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w2 = v.as_array().unwrap().iter().find(|b| b["block"]["W"] == 2).unwrap();
    assert_eq!(w2["dims_by_syzygy"]["0"], 8);
    assert_eq!(w2["kind"], "cobar");
}

#[test]
fn bar_reports_blocks() {
    let o = koszulab(&["bar", "--builtin", "qpois", "--m", "2..3", "--n", "2..3", "--max-weight", "2", "--format", "tsv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 4 * 2);
}

#[test]
fn twisted_bar_report() {
    let o = koszulab(&["tw-bar", "--builtin", "qpois_dual", "--N", "3"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["block"]["N"], 3);
    assert_eq!(v[0]["verdict"]["status"], "pass");
    assert_eq!(v[0]["dims_by_syzygy"]["0"], 19);

    let o = koszulab(&["tw-bar", "--builtin", "qpois_dual", "--N", "1..3", "--module"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v.as_array().unwrap().iter().all(|r| r["block"]["coefficients"] == true));
}

#[test]
fn verify_koszul_passes() {
    let o = koszulab(&["verify-koszul", "--builtin", "qpois", "--max-arity", "4", "--max-genus", "2", "--max-weight", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["status"], "pass");
    let o = koszulab(&["verify-koszul", "--builtin", "qlp", "--max-arity", "3", "--max-genus", "1", "--max-weight", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_koszul_detects_corrupted_relation() {
    let mut p = builtin("qpois").unwrap();
    let c = &mut p.relations[0].terms[0].coeff;
    *c = -c.clone();
    let dir = scratch("mutant");
    let path = dir.join("mutant.json");
    std::fs::write(&path, to_json(&p)).unwrap();
    let o = koszulab(&["verify-koszul", "--file", path.to_str().unwrap(), "--max-arity", "3", "--max-genus", "1", "--max-weight", "3", "--diagonal"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["status"], "fail");
    assert!(v["verdict"]["degree"].as_u64().unwrap() > 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(koszulab(&["dims", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(koszulab(&["dims", "--builtin", "qpois", "--m", "0"]).status.code(), Some(2));
    assert_eq!(koszulab(&["dims", "--builtin", "qpois", "--m", "3..2"]).status.code(), Some(2));
    assert_eq!(koszulab(&["dims"]).status.code(), Some(2));
    let dir = scratch("bad");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{ \"name\": 3 ").unwrap();
    let o = koszulab(&["dims", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    std::fs::remove_dir_all(dir).unwrap();
    let o = koszulab(&["dims", "--builtin", "qpois", "--m", "3", "--n", "3", "--weight", "2", "--max-rigid", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = koszulab(&["verify-koszul", "--builtin", "qpois", "--max-arity", "3", "--max-rigid", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify-koszul", "--builtin", "lieb", "--max-arity", "4", "--max-arity-sum", "5", "--max-genus", "1", "--max-weight", "3"];
    let a = koszulab(&args);
    let b = koszulab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let args = ["dims", "--builtin", "frob", "--m", "1..3", "--n", "1..3", "--max-genus", "1"];
    assert_eq!(koszulab(&args).stdout, koszulab(&args).stdout);
}

#[test]
fn cache_directory_from_environment() {
    let dir = scratch("cache");
    let env_dir = dir.join("env");
    let flag_dir = dir.join("flag");
    let args = ["dims", "--builtin", "qlp", "--m", "3", "--n", "2", "--weight", "2", "--cache", flag_dir.to_str().unwrap()];
    let o = Command::new(env!("CARGO_BIN_EXE_koszulab")).args(args).env("KOSZULAB_CACHE", &env_dir).output().unwrap();
    assert!(o.status.success());
    assert!(std::fs::read_dir(&env_dir).unwrap().count() > 0);
    assert!(!flag_dir.exists());
    let again = Command::new(env!("CARGO_BIN_EXE_koszulab")).args(args).env("KOSZULAB_CACHE", &env_dir).output().unwrap();
    assert_eq!(o.stdout, again.stdout);
    std::fs::remove_dir_all(dir).unwrap();
}
