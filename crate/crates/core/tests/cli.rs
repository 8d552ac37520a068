use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermatlab"))
        .args(args)
        .env_remove("FERMATLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fermatlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn kpoly_golden() {
    let o = run(&["kpoly", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2*x - a + b\n");
}

#[test]
fn dickson_csv_golden() {
    let o = run(&["--format", "csv", "dickson", "--z-max", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "x,y,z,a,b,m,primitive\n3,4,5,1,2,2,true\n5,12,13,1,8,4,true\n8,15,17,2,9,6,true\n"
    );
}

#[test]
fn search_csv_golden() {
    let o = run(&["--format", "csv", "search", "3", "--bound", "9", "--top-k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,y,z,gap\n6,8,9,-1\n");
}

#[test]
fn search_is_worker_independent() {
    let one = run(&["--workers", "1", "--format", "json", "search", "5", "--bound", "40"]);
    let four = run(&["--workers", "4", "--format", "json", "search", "5", "--bound", "40"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn precondition_exits_2() {
    let o = run(&["decompose", "3", "1", "2", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("fermatlab: "));
    assert_eq!(run(&["phi", "4", "2", "1"]).status.code(), Some(2));
    assert_eq!(run(&["audit", "--claims", "C-99"]).status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let o = run(&["--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn falsified_claim_exits_4() {
    let o = run(&["audit", "--claims", "C-26N", "--budget", "quick", "--fail-on-falsified"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["audit", "--claims", "C-26N", "--budget", "quick"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn deterministic_audit_json() {
    let args = ["audit", "--claims", "C-22", "--deterministic", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert!(v.get("meta").is_none());
    let claim = &v["claims"][0];
    assert_eq!(claim["id"], "C-22");
    assert_eq!(claim["strategy"], "SYMBOLIC");
    assert_eq!(claim["outcome"], "VERIFIED_IN_DOMAIN");
    for key in ["eq_ref", "domain", "witness", "checked_count", "notes"] {
        assert!(claim.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn seed_from_environment() {
    let base = ["audit", "--claims", "C-22", "--deterministic", "--format", "json"];
    let env = Command::new(env!("CARGO_BIN_EXE_fermatlab"))
        .args(base)
        .env("FERMATLAB_SEED", "0x10")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["seed"], 16);
    let flag = run(&["--seed", "16", "audit", "--claims", "C-22", "--deterministic", "--format", "json"]);
    assert_eq!(env.stdout, flag.stdout);
}

#[test]
fn out_writes_file() {
    let path = scratch("kpoly5.json");
    let o = run(&["--format", "json", "--out", path.to_str().unwrap(), "kpoly", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    serde_json::from_str::<serde_json::Value>(&text).unwrap();
}

#[test]
fn witness_file_round_trip() {
    let path = scratch("witnesses.json");
    let p = path.to_str().unwrap();
    let o = run(&["audit", "--claims", "C-23P", "--budget", "quick", "--witnesses", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(path.exists());
    // An empty budget still reports the stored counterexample.
    let o = run(&[
        "--format", "json", "audit", "--claims", "C-23P", "--budget", "grid=0", "--budget", "samples=0",
        "--witnesses", p,
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["claims"][0]["outcome"], "FALSIFIED");
}
