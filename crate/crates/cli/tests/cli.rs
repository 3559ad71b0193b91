use std::path::{Path, PathBuf};
use std::process::Command;

const SCENARIO: &str = r#"
[scenario]
p_gen = 0.6
p_swap = 0.9
lifetime = 10
requests = 6
size = 4
k = 1

[benchmark]
algorithms = ["MG", "QP"]
inner = 4
outer = 3

[sweep]
axis = "k"
values = [1, 2]

[analyze]
links = [1, 3]
requests = [2]
p = [0.5]
trials = 200

[rate]
links = [4]
p = [0.6]
horizon = 30
trials = 40
"#;

fn setup(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.toml");
    std::fs::write(&path, config).unwrap();
    (dir, path)
}

fn entroute(command: &str, config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_entroute"))
        .args([command, "--config", config.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn every_command_writes_a_csv() {
    let (dir, config) = setup(SCENARIO);
    for (command, header) in [
        ("analyze", "m,n,p,statistic,parameter,value,std_error"),
        ("rate", "m,p,t,r,r_se,r_low,r_up,r_tilde"),
        ("simulate", "topology,size,requests,p_gen"),
        ("sweep", "topology,size,requests,p_gen"),
    ] {
        let out = dir.path().join(format!("{command}.csv"));
        let result = entroute(command, &config, &out, &[]);
        assert!(result.status.success(), "{command}: {}", String::from_utf8_lossy(&result.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with(header), "{command}: {text}");
    }
    let rows = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 2 * 2 * 2);
}

#[test]
fn analyze_single_link_row() {
    let (dir, config) = setup("[analyze]\nlinks = [1]\np = [0.5]\ntrials = 10\n");
    let out = dir.path().join("a.csv");
    assert!(entroute("analyze", &config, &out, &[]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\n1,1,0.5,expected_generation_time,,2,\n"), "{text}");
}

#[test]
fn analyze_spectrum_rows_are_ordered() {
    let (dir, config) = setup(SCENARIO);
    let out = dir.path().join("a.csv");
    assert!(entroute("analyze", &config, &out, &["--set", "analyze.links=[5]"]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let spectrum: Vec<f64> = text
        .lines()
        .filter(|l| l.contains("search_depth") || l.contains("opportunism"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(spectrum.len(), 11);
    assert!(spectrum.windows(2).all(|w| w[0] <= w[1]), "{spectrum:?}");
}

#[test]
fn rate_with_certain_links_is_one() {
    let (dir, config) = setup(SCENARIO);
    let out = dir.path().join("r.csv");
    assert!(entroute("rate", &config, &out, &["--set", "rate.p=[1.0]"]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "1", "{line}");
    }
}

#[test]
fn trajectories_mode() {
    let (dir, config) = setup(SCENARIO);
    let out = dir.path().join("t.csv");
    assert!(entroute("rate", &config, &out, &["--set", "rate.output=trajectories"]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("m,p,trial,t,delivered,rate\n"));
    assert_eq!(text.lines().count(), 1 + 40 * 30);
}

#[test]
fn output_does_not_depend_on_jobs() {
    let (dir, config) = setup(SCENARIO);
    for command in ["analyze", "rate", "simulate", "sweep"] {
        let outputs: Vec<Vec<u8>> = ["1", "3"]
            .iter()
            .map(|jobs| {
                let out = dir.path().join(format!("{command}-{jobs}.csv"));
                assert!(entroute(command, &config, &out, &["--jobs", jobs]).status.success());
                std::fs::read(&out).unwrap()
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{command}");
    }
}

#[test]
fn config_errors_exit_with_two_and_leave_no_file() {
    let (dir, config) = setup(SCENARIO);
    let out = dir.path().join("bad.csv");
    for extra in [
        vec!["--set", "benchmark.algorithms=[\"XX\"]"],
        vec!["--set", "scenario.p_gen=0"],
        vec!["--set", "scenario.unknown=1"],
        vec!["--set", "novalue"],
    ] {
        let result = entroute("simulate", &config, &out, &extra);
        assert_eq!(result.status.code(), Some(2), "{extra:?}");
        assert!(!String::from_utf8_lossy(&result.stderr).is_empty());
        assert!(!out.exists());
    }
    let result = entroute("simulate", &dir.path().join("missing.toml"), &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    let (_d2, only_rate) = setup("[rate]\nlinks = [2]\np = [0.5]\nhorizon = 3\ntrials = 2\n");
    assert_eq!(entroute("simulate", &only_rate, &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn slot_cap_exclusions_exit_with_three() {
    let (dir, config) = setup(SCENARIO);
    let out = dir.path().join("capped.csv");
    let result = entroute("simulate", &config, &out, &["--set", "benchmark.slot_cap=2"]);
    assert_eq!(result.status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().count() > 1);
}
