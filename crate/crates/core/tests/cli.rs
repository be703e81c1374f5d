mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn dmcopt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmcopt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn stage_by_stage_flow() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("tiny.toml");
    let config = config.to_str().unwrap();
    for stage in ["synth-pop", "candidates", "score", "filter"] {
        let o = dmcopt(&["--config", config, stage], dir.path());
        assert_eq!(code(&o), 0, "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = dmcopt(&["--config", config, "recommend"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Search Method"));
    assert!(stdout(&o).contains("GMV"));

    for method in ["greedy", "usm", "exhaustive"] {
        let o = dmcopt(&["--config", config, "optimize", "--method", method], dir.path());
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(dir.path().join("usm_trace.log").exists());
    assert!(dir.path().join("optimize-exhaustive.json").exists());

    // The filtered sequence has 12 entries, the brute-force check's cap.
    let o = dmcopt(&["--config", config, "check-submodularity"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Violations"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[oracle]\nkind = \"sim\"\n").unwrap();
    let o = dmcopt(&["--config", bad.to_str().unwrap(), "candidates"], dir.path());
    assert_eq!(code(&o), 2);
    let o = dmcopt(&["--config", "/no/such/file.toml", "candidates"], dir.path());
    assert_eq!(code(&o), 2);
    let o = dmcopt(&["--oracle", "neural", "candidates"], dir.path());
    assert_eq!(code(&o), 2);
    let o = dmcopt(&["bogus-subcommand"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // Scoring before any population exists.
    let o = dmcopt(&["score"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    // Artifacts from another seed are refused.
    assert_eq!(code(&dmcopt(&["--seed", "1", "synth-pop"], dir.path())), 0);
    assert_eq!(code(&dmcopt(&["--seed", "1", "candidates"], dir.path())), 0);
    let o = dmcopt(&["--seed", "2", "score"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn size_refusal_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("wide.toml");
    std::fs::write(
        &config,
        r#"
[rules]
min_threshold_cents = 1000
max_threshold_cents = 200000
threshold_step_cents = 100
discount_step_cents = 100

[oracle]
kind = "sim"
stretch_utility_rate = 1.0
effort_cost_rate = 0.25
noise_scale = 0.0
seed = 0

[population]
kind = "synth"
count = 10
"#,
    )
    .unwrap();
    let o = dmcopt(&["--config", config.to_str().unwrap(), "candidates"], dir.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn submodularity_check_refuses_long_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("long.toml");
    let text = std::fs::read_to_string(fixture("tiny.toml")).unwrap().replace("max_threshold_cents = 12000", "max_threshold_cents = 20000");
    std::fs::write(&config, text).unwrap();
    let config = config.to_str().unwrap();
    for stage in ["synth-pop", "candidates", "score", "filter"] {
        assert_eq!(code(&dmcopt(&["--config", config, stage], dir.path())), 0);
    }
    let o = dmcopt(&["--config", config, "check-submodularity"], dir.path());
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn small_benchmark_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = dmcopt(&["benchmark", "--shops", "2", "--usm-seeds", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("Search Method"));
    for name in ["Global Optimum Searching", "Randomized USM Searching", "Greedy Searching"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(dir.path().join("benchmark.json").exists());
}
