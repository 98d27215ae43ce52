use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_adaptive-lb");
const HEADER: &str = "scenario,seed,group,rule,jobs_completed,mean_tpt_x1000,std_tpt_x1000";

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// A scenario that finishes in a fraction of a second: no warmup, no
/// measured weeks beyond a short population.
const TINY: &str = r#"
agents = 10
warmup_weeks = 0
measure_weeks = 0

[[groups]]
name = "a"
size = 6
rule = "omega(w=0.3, n=4)"

[[groups]]
name = "b"
size = 4
rule = "load_querying"
"#;

#[test]
fn list_presets_names_the_catalog() {
    let out = cli(&["list-presets"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l.starts_with("fig10-cn-vs-ncn")));
}

#[test]
fn run_writes_header_group_and_global_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "tiny.toml", TINY);
    let out_path = dir.path().join("out.csv");
    let out = cli(&["run", "--config", &config, "--seed", "3", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert!(lines[1].starts_with("tiny,3,a,"));
    assert!(lines[2].starts_with("tiny,3,b,load_querying,0,"));
    assert!(lines[3].starts_with("tiny,3,__global__,mixed,0,"));
    assert!(lines[4].starts_with("tiny,mean,a,"));
}

#[test]
fn sweep_expands_axes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "tiny.toml", TINY);
    let out = cli(&["sweep", "--config", &config, "--axis", "w=0.1,0.5", "--axis", "n@0=2..3", "--seeds", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // 4 cells x (2 seeds + summary) x 3 rows, plus the header.
    assert_eq!(text.lines().count(), 1 + 4 * 3 * 3);
    assert!(text.contains("tiny[w=0.1,n@0=3]"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_sum = write(dir.path(), "bad.toml", "agents = 10\n[[groups]]\nsize = 9\nrule = \"bcsr\"\n");
    let unknown_key = write(dir.path(), "typo.toml", "agnets = 10\n");
    let tiny = write(dir.path(), "tiny.toml", TINY);
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--config", &bad_sum],
        vec!["run", "--config", &unknown_key],
        vec!["run", "--config", "/nonexistent/scenario.toml"],
        vec!["preset", "fig11"],
        vec!["sweep", "--config", &tiny, "--axis", "q=1,2"],
        vec!["run"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = cli(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = write(dir.path(), "tiny.toml", TINY);
    let out = cli(&["run", "--config", &tiny, "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
