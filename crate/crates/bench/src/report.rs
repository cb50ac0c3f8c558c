use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::run::ResultRow;

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" rule, R's default). `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Statistics of one (scenario, planner, n) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub planner: String,
    pub checkpoint_n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_cost: Option<f64>,
    pub q25_cost: Option<f64>,
    pub q75_cost: Option<f64>,
    /// `(median - c*) / c*` when the optimum is known.
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub optimal_cost: Option<f64>,
    pub svg: String,
}

impl Report {
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.summary {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Median series of one planner, in ascending n.
    pub fn series(&self, scenario: &str, planner: &str) -> Vec<(usize, f64)> {
        self.summary
            .iter()
            .filter(|r| r.scenario == scenario && r.planner == planner)
            .filter_map(|r| r.median_cost.map(|m| (r.checkpoint_n, m)))
            .collect()
    }
}

pub fn convergence_report(rows: &[ResultRow], optimal_cost: Option<f64>) -> Result<Report> {
    if rows.is_empty() {
        return Err(BenchError::usage("report needs at least one result row"));
    }
    if let Some(c) = optimal_cost {
        if !(c > 0.0 && c.is_finite()) {
            return Err(BenchError::usage("optimal cost must be positive and finite"));
        }
    }
    let mut groups: BTreeMap<(&str, &str, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.scenario.as_str(), r.planner.as_str(), r.checkpoint_n))
            .or_default()
            .push(r);
    }
    let summary: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((scenario, planner, n), group)| {
            let mut costs: Vec<f64> = group.iter().filter_map(|r| r.best_cost).collect();
            costs.sort_by(f64::total_cmp);
            let stat = |p| (!costs.is_empty()).then(|| quantile(&costs, p));
            let median = stat(0.5);
            SummaryRow {
                scenario: scenario.to_string(),
                planner: planner.to_string(),
                checkpoint_n: n,
                trials: group.len(),
                successes: costs.len(),
                success_rate: costs.len() as f64 / group.len() as f64,
                median_cost: median,
                q25_cost: stat(0.25),
                q75_cost: stat(0.75),
                relative_error: median.zip(optimal_cost).map(|(m, c)| (m - c) / c),
            }
        })
        .collect();
    let svg = render_svg(&summary, optimal_cost);
    Ok(Report {
        summary,
        optimal_cost,
        svg,
    })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(summary: &[SummaryRow], optimal: Option<f64>) -> String {
    let ns: Vec<usize> = summary.iter().map(|r| r.checkpoint_n).collect();
    let (n_lo, n_hi) = (*ns.iter().min().unwrap() as f64, *ns.iter().max().unwrap() as f64);
    let log_x = n_hi >= 10.0 * n_lo;
    let fx = |n: f64| if log_x { n.log10() } else { n };
    let (x_lo, x_hi) = (fx(n_lo), fx(n_hi));

    let mut ys: Vec<f64> = summary.iter().filter_map(|r| r.median_cost).collect();
    ys.extend(summary.iter().filter_map(|r| r.q25_cost));
    ys.extend(summary.iter().filter_map(|r| r.q75_cost));
    ys.extend(optimal);
    let (mut y_lo, mut y_hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    let pad = ((y_hi - y_lo) * 0.05).max(1e-9);
    (y_lo, y_hi) = (y_lo - pad, y_hi + pad);

    let px = |n: usize| {
        let t = if x_hi > x_lo {
            (fx(n as f64) - x_lo) / (x_hi - x_lo)
        } else {
            0.5
        };
        MARGIN + t * (WIDTH - 2.0 * MARGIN)
    };
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-x-scale="{}"{}>"#,
        if log_x { "log" } else { "linear" },
        optimal.map_or(String::new(), |c| format!(r#" data-optimal="{c}""#)),
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">samples / iterations n{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        if log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">median cost</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (label, y) in [(y_lo, bottom), (y_hi, top)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{:.4}</text>"#,
            left - 5.0,
            y + 4.0,
            label
        );
    }
    let mut ticks: Vec<usize> = ns.clone();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{n}</text>"#,
            px(n),
            bottom + 16.0
        );
    }
    if let Some(c) = optimal {
        let y = py(c);
        let _ = writeln!(
            s,
            r##"<line class="optimum" x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4" data-optimal="{c}"/>"##
        );
    }

    let mut series: BTreeMap<(&str, &str), Vec<&SummaryRow>> = BTreeMap::new();
    for r in summary {
        series.entry((&r.scenario, &r.planner)).or_default().push(r);
    }
    for (i, ((scenario, planner), rows)) in series.into_iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<g class="series" data-scenario="{}" data-planner="{}" stroke="{color}" fill="{color}">"#,
            escape(scenario),
            escape(planner)
        );
        let points: Vec<String> = rows
            .iter()
            .filter_map(|r| r.median_cost.map(|m| format!("{:.2},{:.2}", px(r.checkpoint_n), py(m))))
            .collect();
        if points.len() > 1 {
            let _ = writeln!(s, r#"<polyline points="{}" fill="none"/>"#, points.join(" "));
        }
        for r in &rows {
            let Some(m) = r.median_cost else { continue };
            let (q25, q75) = (r.q25_cost.unwrap_or(m), r.q75_cost.unwrap_or(m));
            let x = px(r.checkpoint_n);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke-opacity="0.5"/>"#,
                py(q25),
                py(q75)
            );
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{:.2}" r="3" data-n="{}" data-median="{m}" data-q25="{q25}" data-q75="{q75}" data-success-rate="{}"/>"#,
                py(m),
                r.checkpoint_n,
                r.success_rate
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" stroke="none">{}</text>"#,
            right - 140.0,
            top + 16.0 * (i as f64 + 1.0),
            escape(planner)
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
