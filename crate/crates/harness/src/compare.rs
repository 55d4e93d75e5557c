//! Summaries across runs of a sweep.
//!
//! Runs are grouped by (strategy, beta). For each run the final score is the
//! mean total reward over its last 100 episodes (or all of them, if fewer)
//! and the AUC is the sum of its smoothed reward curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::metrics::MetricRow;

const FINAL_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_id: String,
    pub strategy: String,
    pub beta: f64,
    pub seed: u64,
    pub episodes: usize,
    pub final100: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub strategy: String,
    pub beta: f64,
    pub runs: usize,
    pub episodes: usize,
    pub final100_mean: f64,
    pub final100_sd: f64,
    pub auc_mean: f64,
    pub auc_sd: f64,
}

impl GroupSummary {
    pub fn label(&self) -> String {
        group_label(&self.strategy, self.beta)
    }
}

/// AUC wins of `a` over `b` on the seeds both groups ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedWins {
    pub a: String,
    pub b: String,
    pub wins: usize,
    pub ties: usize,
    pub paired: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub runs: Vec<RunSummary>,
    pub groups: Vec<GroupSummary>,
    pub wins: Vec<PairedWins>,
}

pub fn group_label(strategy: &str, beta: f64) -> String {
    format!("{strategy}(b={beta})")
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Splits rows into runs, in order of first appearance, checking that each
/// run lists episodes 1..=L in order.
pub fn split_runs(rows: &[MetricRow]) -> Result<Vec<Vec<MetricRow>>> {
    let mut order: Vec<String> = Vec::new();
    let mut by_run: BTreeMap<String, Vec<MetricRow>> = BTreeMap::new();
    for row in rows {
        if !by_run.contains_key(&row.run_id) {
            order.push(row.run_id.clone());
        }
        by_run.entry(row.run_id.clone()).or_default().push(row.clone());
    }
    let runs: Vec<Vec<MetricRow>> = order.iter().map(|id| by_run.remove(id).unwrap_or_default()).collect();
    for run in &runs {
        for (i, row) in run.iter().enumerate() {
            if row.episode != i + 1 {
                return Err(HarnessError::Alignment(format!(
                    "run {} has episode {} at position {}",
                    row.run_id,
                    row.episode,
                    i + 1
                )));
            }
        }
    }
    Ok(runs)
}

pub fn summarize_run(run: &[MetricRow]) -> RunSummary {
    let first = &run[0];
    let tail = &run[run.len().saturating_sub(FINAL_WINDOW)..];
    RunSummary {
        run_id: first.run_id.clone(),
        strategy: first.strategy.clone(),
        beta: first.beta,
        seed: first.seed,
        episodes: run.len(),
        final100: tail.iter().map(|r| r.total_reward).sum::<f64>() / tail.len() as f64,
        auc: run.iter().map(|r| r.mean_reward_100).sum(),
    }
}

pub fn compare(rows: &[MetricRow]) -> Result<Comparison> {
    if rows.is_empty() {
        return Err(HarnessError::Alignment("no metrics rows".into()));
    }
    let runs: Vec<RunSummary> = split_runs(rows)?.iter().map(|r| summarize_run(r)).collect();
    let episodes = runs[0].episodes;
    if let Some(r) = runs.iter().find(|r| r.episodes != episodes) {
        return Err(HarnessError::Alignment(format!(
            "run {} has {} episodes, expected {episodes}",
            r.run_id, r.episodes
        )));
    }

    let mut labels: Vec<(String, f64)> = Vec::new();
    for r in &runs {
        if !labels.iter().any(|(s, b)| *s == r.strategy && *b == r.beta) {
            labels.push((r.strategy.clone(), r.beta));
        }
    }
    let members = |s: &str, b: f64| -> Vec<&RunSummary> {
        runs.iter().filter(|r| r.strategy == s && r.beta == b).collect()
    };

    let groups: Vec<GroupSummary> = labels
        .iter()
        .map(|(s, b)| {
            let m = members(s, *b);
            let finals: Vec<f64> = m.iter().map(|r| r.final100).collect();
            let aucs: Vec<f64> = m.iter().map(|r| r.auc).collect();
            let (final100_mean, final100_sd) = mean_sd(&finals);
            let (auc_mean, auc_sd) = mean_sd(&aucs);
            GroupSummary {
                strategy: s.clone(),
                beta: *b,
                runs: m.len(),
                episodes,
                final100_mean,
                final100_sd,
                auc_mean,
                auc_sd,
            }
        })
        .collect();

    let mut wins = Vec::new();
    for (i, (sa, ba)) in labels.iter().enumerate() {
        for (j, (sb, bb)) in labels.iter().enumerate() {
            if i == j {
                continue;
            }
            let b_runs: BTreeMap<u64, f64> = members(sb, *bb).iter().map(|r| (r.seed, r.auc)).collect();
            let (mut w, mut t, mut paired) = (0, 0, 0);
            for r in members(sa, *ba) {
                if let Some(&other) = b_runs.get(&r.seed) {
                    paired += 1;
                    if r.auc > other {
                        w += 1;
                    } else if r.auc == other {
                        t += 1;
                    }
                }
            }
            wins.push(PairedWins {
                a: group_label(sa, *ba),
                b: group_label(sb, *bb),
                wins: w,
                ties: t,
                paired,
            });
        }
    }
    Ok(Comparison { runs, groups, wins })
}

impl Comparison {
    pub fn wins_of(&self, a: &str, b: &str) -> Option<&PairedWins> {
        self.wins.iter().find(|w| w.a == a && w.b == b)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<28} {:>5} {:>9} {:>22} {:>26}",
            "group", "runs", "episodes", "final100 (mean ± sd)", "auc (mean ± sd)"
        );
        for g in &self.groups {
            let _ = writeln!(
                s,
                "{:<28} {:>5} {:>9} {:>22} {:>26}",
                g.label(),
                g.runs,
                g.episodes,
                format!("{:.2} ± {:.2}", g.final100_mean, g.final100_sd),
                format!("{:.1} ± {:.1}", g.auc_mean, g.auc_sd)
            );
        }
        if !self.wins.is_empty() {
            let _ = writeln!(s, "\npaired AUC wins (a beats b on the same seed):");
            for w in &self.wins {
                let _ = writeln!(s, "  {} vs {}: {}/{} (ties {})", w.a, w.b, w.wins, w.paired, w.ties);
            }
        }
        s
    }

    /// Writes `summary.csv` and `wins.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        for g in &self.groups {
            w.serialize(g)?;
        }
        w.flush().map_err(|e| HarnessError::io(dir, e))?;
        let mut w = csv::Writer::from_path(dir.join("wins.csv"))?;
        for p in &self.wins {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| HarnessError::io(dir, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn series(strategy: &str, beta: f64, seed: u64, rewards: &[f64]) -> Vec<MetricRow> {
        let mut out = Vec::new();
        for (i, &r) in rewards.iter().enumerate() {
            let lo = (i + 1).saturating_sub(100);
            let w = &rewards[lo..=i];
            out.push(MetricRow {
                run_id: format!("{strategy}-b{beta}-s{seed}"),
                strategy: strategy.into(),
                beta,
                seed,
                episode: i + 1,
                total_reward: r,
                mean_reward_100: w.iter().sum::<f64>() / w.len() as f64,
                wall_steps: (i as u64 + 1) * 10,
            });
        }
        out
    }

    #[test]
    fn constant_series_has_known_auc_and_final() {
        let rows = series("uniform", 1.0, 0, &[-3.0; 250]);
        let c = compare(&rows).unwrap();
        assert_eq!(c.runs[0].auc, -750.0);
        assert_eq!(c.runs[0].final100, -3.0);
        assert_eq!(c.groups[0].final100_sd, 0.0);
        assert_eq!(c.groups[0].auc_sd, 0.0);
    }

    #[test]
    fn identical_runs_give_identical_rows_and_zero_spread() {
        let rewards: Vec<f64> = (0..150).map(|i| (i % 7) as f64).collect();
        let mut rows = series("uniform", 1.0, 0, &rewards);
        rows.extend(series("uniform", 1.0, 1, &rewards));
        rows.extend(series("distribution-aware", 0.5, 0, &rewards));
        rows.extend(series("distribution-aware", 0.5, 1, &rewards));
        let c = compare(&rows).unwrap();
        assert_eq!(c.groups.len(), 2);
        assert_eq!(c.groups[0].final100_mean, c.groups[1].final100_mean);
        assert_eq!(c.groups[0].auc_mean, c.groups[1].auc_mean);
        assert_eq!(c.groups[0].auc_sd, 0.0);
        let w = c.wins_of("uniform(b=1)", "distribution-aware(b=0.5)").unwrap();
        assert_eq!((w.wins, w.ties, w.paired), (0, 2, 2));
    }

    #[test]
    fn sample_sd_and_short_runs() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let c = compare(&series("uniform", 1.0, 0, &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(c.runs[0].final100, 2.0);
    }

    #[test]
    fn wins_are_counted_per_seed() {
        let mut rows = series("uniform", 1.0, 0, &[0.0; 10]);
        rows.extend(series("uniform", 1.0, 1, &[5.0; 10]));
        rows.extend(series("distribution-aware", 0.5, 0, &[1.0; 10]));
        rows.extend(series("distribution-aware", 0.5, 1, &[1.0; 10]));
        let c = compare(&rows).unwrap();
        let w = c.wins_of("distribution-aware(b=0.5)", "uniform(b=1)").unwrap();
        assert_eq!((w.wins, w.paired), (1, 2));
    }

    #[test]
    fn misaligned_runs_are_rejected() {
        let mut rows = series("uniform", 1.0, 0, &[0.0; 10]);
        rows.extend(series("uniform", 1.0, 1, &[0.0; 9]));
        assert!(matches!(compare(&rows), Err(HarnessError::Alignment(_))));
        let mut rows = series("uniform", 1.0, 0, &[0.0; 5]);
        rows.swap(1, 2);
        assert!(matches!(compare(&rows), Err(HarnessError::Alignment(_))));
        assert!(compare(&[]).is_err());
    }
}
