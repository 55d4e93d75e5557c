//! SVG learning curves: one mean line per (strategy, beta) group, with a
//! min-max band when the group has more than one run.

use std::fmt::Write as _;

use crate::compare::{group_label, split_runs};
use crate::error::{HarnessError, Result};
use crate::metrics::MetricRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub runs: usize,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Per-episode mean, min and max of `mean_reward_100` across each group's
/// runs, truncated to the shortest run in the group.
pub fn series(rows: &[MetricRow]) -> Result<Vec<Series>> {
    let runs = split_runs(rows)?;
    let mut groups: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for run in runs {
        let label = group_label(&run[0].strategy, run[0].beta);
        let curve: Vec<f64> = run.iter().map(|r| r.mean_reward_100).collect();
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, curves)) => curves.push(curve),
            None => groups.push((label, vec![curve])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(label, curves)| {
            let len = curves.iter().map(Vec::len).min().unwrap_or(0);
            let at = |i: usize| curves.iter().map(move |c| c[i]);
            Series {
                label,
                runs: curves.len(),
                mean: (0..len).map(|i| at(i).sum::<f64>() / curves.len() as f64).collect(),
                min: (0..len).map(|i| at(i).fold(f64::INFINITY, f64::min)).collect(),
                max: (0..len).map(|i| at(i).fold(f64::NEG_INFINITY, f64::max)).collect(),
            }
        })
        .collect())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(series: &[Series], title: &str) -> Result<String> {
    let len = series.iter().map(|s| s.mean.len()).max().unwrap_or(0);
    if len == 0 {
        return Err(HarnessError::Alignment("nothing to plot".into()));
    }
    let lo = series.iter().flat_map(|s| &s.min).copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().flat_map(|s| &s.max).copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (len.max(2) - 1) as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);
    let points = |vals: &mut dyn Iterator<Item = (usize, f64)>| {
        vals.map(|(i, v)| format!("{:.2},{:.2}", x(i), y(v))).collect::<Vec<_>>().join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<text x="{x0}" y="{}" text-anchor="start">1</text>"#, y0 + 16.0);
    let _ = writeln!(s, r#"<text x="{x1}" y="{}" text-anchor="end">{len}</text>"#, y0 + 16.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#,
        WIDTH / 2.0,
        y0 + 36.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{hi:.1}</text>"#, x0 - 6.0, y1 + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{lo:.1}</text>"#, x0 - 6.0, y0 + 4.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">mean reward (100 episodes)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" data-label="{}">"#, escape(&ser.label));
        if ser.runs > 1 {
            let upper = points(&mut ser.max.iter().copied().enumerate());
            let lower = points(&mut ser.min.iter().copied().enumerate().rev());
            let _ = writeln!(
                s,
                r#"<polygon class="band" points="{upper} {lower}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#
            );
        }
        let _ = writeln!(
            s,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            points(&mut ser.mean.iter().copied().enumerate())
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{colour}">{} (n={})</text>"#,
            x1 - 180.0,
            escape(&ser.label),
            ser.runs
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(strategy: &str, seed: u64, vals: &[f64]) -> Vec<MetricRow> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| MetricRow {
                run_id: format!("{strategy}-s{seed}"),
                strategy: strategy.into(),
                beta: 1.0,
                seed,
                episode: i + 1,
                total_reward: v,
                mean_reward_100: v,
                wall_steps: i as u64,
            })
            .collect()
    }

    #[test]
    fn series_aggregate_across_seeds() {
        let mut rows = run("uniform", 0, &[1.0, 2.0, 3.0]);
        rows.extend(run("uniform", 1, &[3.0, 4.0, 5.0]));
        rows.extend(run("other", 0, &[0.0, 0.0, 0.0]));
        let s = series(&rows).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mean, vec![2.0, 3.0, 4.0]);
        assert_eq!(s[0].min, vec![1.0, 2.0, 3.0]);
        assert_eq!(s[0].max, vec![3.0, 4.0, 5.0]);
        let svg = render_svg(&s, "a & b").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(svg.contains("a &amp; b"));
    }
}
