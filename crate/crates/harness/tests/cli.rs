use std::path::Path;
use std::process::{Command, Output};

use replay_harness::metrics::{read_rows, HEADER};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replay-bench")).args(args).output().unwrap()
}

const SMALL: &[&str] = &[
    "--env",
    "gridworld",
    "--set",
    "grid_width=4",
    "--set",
    "grid_height=4",
    "--episodes",
    "30",
    "--buffer-size",
    "1000",
    "--clusters",
    "4",
    "--set",
    "kmeans_warmup=100",
    "--set",
    "warmup_transitions=100",
];

fn run_small(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    args.push("--out");
    args.push(out.to_str().unwrap());
    bench(&args)
}

#[test]
fn sweep_writes_one_file_per_run_plus_merged() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), &["--strategy", "uniform,distribution-aware", "--seeds", "0,1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 6);
    let merged = dir.path().join("metrics.csv");
    let text = std::fs::read_to_string(&merged).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER);
    let rows = read_rows(&merged).unwrap();
    assert_eq!(rows.len(), 6 * 30);
    for run in rows.chunks(30) {
        for (i, row) in run.iter().enumerate() {
            assert_eq!(row.episode, i + 1);
            assert_eq!(row.run_id, run[0].run_id);
        }
        assert!(run.windows(2).all(|w| w[0].wall_steps < w[1].wall_steps));
    }
    let per_run = read_rows(&dir.path().join("runs").join("uniform-b1-s1.csv")).unwrap();
    assert_eq!(per_run, rows[30..60].to_vec());
}

#[test]
fn paired_seeds_share_the_environment_stream() {
    // uniform and beta = 1 make identical draws, so their curves coincide
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), &["--strategy", "uniform,distribution-aware", "--beta", "1", "--seeds", "4"]);
    assert!(out.status.success());
    let rows = read_rows(&dir.path().join("metrics.csv")).unwrap();
    let (u, d) = rows.split_at(30);
    for (a, b) in u.iter().zip(d) {
        assert_eq!((a.total_reward, a.wall_steps), (b.total_reward, b.wall_steps));
    }
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(&cfg, "env = chain\nseeds = 1..3\nepisodes = 5\n# comment\nstrategies = uniform\n").unwrap();
    let out = bench(&["show-config", "--config", cfg.to_str().unwrap(), "--episodes", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("env = chain"));
    assert!(text.contains("episodes = 7"));
    assert!(text.contains("seeds = 1,2"));
}

#[test]
fn exit_codes() {
    assert_eq!(bench(&["run", "--set", "colour=red"]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--beta", "2"]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--config", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(bench(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bench(&["compare", "/nonexistent/metrics.csv"]).status.code(), Some(1));
}

#[test]
fn compare_and_plot_read_the_merged_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_small(dir.path(), &["--strategy", "uniform,equal-cluster", "--seeds", "0,1"]);
    assert!(out.status.success());
    let merged = dir.path().join("metrics.csv");
    let summary = dir.path().join("summary");
    let out = bench(&["compare", merged.to_str().unwrap(), "--out", summary.to_str().unwrap()]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("uniform(b=1)") && table.contains("equal-cluster(b=0)"));
    let csv = std::fs::read_to_string(summary.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let svg_path = dir.path().join("curves.svg");
    let out = bench(&["plot", merged.to_str().unwrap(), "-o", svg_path.to_str().unwrap()]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<polygon").count(), 2);
    assert_well_formed(&svg);
}

#[test]
fn misaligned_metrics_fail_compare() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run_small(&a, &["--strategy", "uniform", "--seeds", "0"]).status.success());
    assert!(run_small(&b, &["--strategy", "equal-cluster", "--seeds", "0", "--set", "episodes=20"]).status.success());
    let mut text = std::fs::read_to_string(a.join("metrics.csv")).unwrap();
    let extra = std::fs::read_to_string(b.join("metrics.csv")).unwrap();
    text.push_str(extra.split_once('\n').unwrap().1);
    let merged = dir.path().join("merged.csv");
    std::fs::write(&merged, text).unwrap();
    let out = bench(&["compare", merged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not line up"));
}

#[test]
fn audit_passes_and_catches_injected_faults() {
    let args = [
        "--env",
        "gridworld",
        "--strategy",
        "uniform,distribution-aware",
        "--beta",
        "0.5",
        "--set",
        "report_steps=3000",
        "--buffer-size",
        "3000",
        "--clusters",
        "16",
        "--set",
        "kmeans_warmup=500",
        "--set",
        "audit_draws=200000",
    ];
    let mut ok = vec!["audit"];
    ok.extend_from_slice(&args);
    let out = bench(&ok);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches("PASS").count(), 2);

    let mut bad = ok.clone();
    bad.push("--inject-fault");
    let out = bench(&bad);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));
}

#[test]
fn cluster_report_lists_shares() {
    let out = bench(&[
        "cluster-report",
        "--env",
        "gridworld",
        "--set",
        "report_steps=2000",
        "--clusters",
        "8",
        "--set",
        "kmeans_warmup=500",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("8 clusters; top 20% hold"));
    let last_cum: f64 = text.lines().nth(8).unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!((last_cum - 1.0).abs() < 1e-12);
}

/// Minimal tag-balance check: every opened element is closed in order.
fn assert_well_formed(svg: &str) {
    assert!(svg.trim_start().starts_with("<svg"));
    let mut stack: Vec<String> = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('<') {
        let end = start + rest[start..].find('>').expect("unterminated tag");
        let tag = &rest[start + 1..end];
        if let Some(name) = tag.strip_prefix('/') {
            assert_eq!(stack.pop().as_deref(), Some(name.trim()), "mismatched close");
        } else if !tag.ends_with('/') {
            stack.push(tag.split_whitespace().next().unwrap().to_string());
        }
        let text = &rest[end + 1..rest[end + 1..].find('<').map_or(rest.len(), |i| end + 1 + i)];
        assert!(!text.contains('&') || text.contains("&amp;") || text.contains("&lt;"));
        rest = &rest[end + 1..];
    }
    assert!(stack.is_empty(), "unclosed {stack:?}");
}
