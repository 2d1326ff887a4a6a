//! Plain-text tables for metrics reports.
//!
//! Vulnerability reports render one row per morph type and one column pair
//! per model (rates with 3 decimals). Detectability reports render one row
//! per (MAD, training data, test data) with EER and APCER at each BPCER
//! target in percent (2 decimals). A model name `MAD/TRAIN` is split into its
//! two columns.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{MetricEntry, MetricsReport, ReportKind};

const MISSING: &str = "-";
const EER_FLAG: &str = "*";

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn render_grid(rows: &[Vec<String>], header_rows: usize) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = (0..cols)
            .map(|c| {
                let s = row.get(c).map(String::as_str).unwrap_or("");
                format!("{s:<w$}", w = widths[c])
            })
            .collect();
        let joined = cells.join(" | ");
        let mut line = joined.trim_end();
        while let Some(rest) = line.strip_suffix('|') {
            line = rest.trim_end();
        }
        out.push_str(line);
        out.push('\n');
        if i + 1 == header_rows {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

type Cells<'a> = BTreeMap<(&'a str, &'a str, &'a str, &'a str), f64>;

fn cells(entries: &[MetricEntry]) -> Cells<'_> {
    entries
        .iter()
        .map(|e| {
            (
                (e.model.as_str(), e.morph_type.as_str(), e.metric.as_str(), e.operating_point.as_str()),
                e.value,
            )
        })
        .collect()
}

/// The rate-valued cells of a vulnerability table, 3 decimals.
pub fn format_rate(v: f64) -> String {
    format!("{v:.3}")
}

/// A rate rendered as a percentage, 2 decimals.
pub fn format_percent(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn render_vulnerability(report: &MetricsReport) -> String {
    let cells = cells(&report.entries);
    let rated: Vec<&MetricEntry> = report.entries.iter().filter(|e| e.morph_type != "*").collect();
    let models = first_seen(rated.iter().map(|e| e.model.as_str()));
    let morph_types = first_seen(rated.iter().map(|e| e.morph_type.as_str()));
    let ops = first_seen(rated.iter().map(|e| e.operating_point.as_str()));
    let mut out = String::new();
    for metric in ["MMPMR", "FMMPMR"] {
        if !rated.iter().any(|e| e.metric == metric) {
            continue;
        }
        let mut top = vec![format!("{metric} / FR model")];
        let mut sub = vec!["Morphing technique".to_owned()];
        for m in &models {
            for (i, op) in ops.iter().enumerate() {
                top.push(if i == 0 { m.to_string() } else { String::new() });
                sub.push(op.to_string());
            }
        }
        let mut rows = vec![top, sub];
        for t in &morph_types {
            let mut row = vec![t.to_string()];
            for m in &models {
                for op in &ops {
                    row.push(cells.get(&(m, t, metric, op)).map_or(MISSING.into(), |v| format_rate(*v)));
                }
            }
            rows.push(row);
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&render_grid(&rows, 2));
    }
    let thresholds: Vec<&MetricEntry> = report
        .entries
        .iter()
        .filter(|e| e.morph_type == "*" && e.metric == "threshold")
        .collect();
    if !thresholds.is_empty() {
        out.push('\n');
        let mut rows = vec![vec![
            "FR model".to_owned(),
            "Operating point".to_owned(),
            "Threshold".to_owned(),
            "Achieved FMR".to_owned(),
        ]];
        for e in thresholds {
            let fmr = cells.get(&(e.model.as_str(), "*", "achieved_fmr", e.operating_point.as_str()));
            rows.push(vec![
                e.model.clone(),
                e.operating_point.clone(),
                format!("{:.6}", e.value),
                fmr.map_or(MISSING.into(), |v| format!("{v:.6}")),
            ]);
        }
        out.push_str(&render_grid(&rows, 1));
    }
    out
}

/// Split `MAD/TRAIN` into its parts; names without a slash have no training
/// data column.
pub fn split_mad_model(model: &str) -> (&str, &str) {
    model.split_once('/').unwrap_or((model, MISSING))
}

fn render_detectability(report: &MetricsReport) -> String {
    let cells = cells(&report.entries);
    let models = first_seen(report.entries.iter().map(|e| e.model.as_str()));
    let targets = first_seen(
        report
            .entries
            .iter()
            .filter(|e| e.metric == "APCER")
            .map(|e| e.operating_point.as_str()),
    );
    let mut top = vec![
        "MAD".to_owned(),
        "Train data".to_owned(),
        "Test data".to_owned(),
        "EER (%)".to_owned(),
    ];
    let mut sub = vec![String::new(); 4];
    for (i, t) in targets.iter().enumerate() {
        top.push(if i == 0 { "APCER (%) @ BPCER (%)".into() } else { String::new() });
        sub.push(t.strip_prefix("BPCER").unwrap_or(t).to_owned());
    }
    let mut rows = vec![top, sub];
    let mut flagged = false;
    for m in &models {
        let (mad, train) = split_mad_model(m);
        let types = first_seen(
            report
                .entries
                .iter()
                .filter(|e| e.model == *m)
                .map(|e| e.morph_type.as_str()),
        );
        for t in types {
            let eer = cells.get(&(m, t, "EER", "EER"));
            let mut eer_cell = eer.map_or(MISSING.into(), |v| format_percent(*v));
            if eer.is_some_and(|v| *v > 0.5) {
                eer_cell.push_str(EER_FLAG);
                flagged = true;
            }
            let mut row = vec![mad.to_owned(), train.to_owned(), t.to_owned(), eer_cell];
            for op in &targets {
                row.push(cells.get(&(m, t, "APCER", op)).map_or(MISSING.into(), |v| format_percent(*v)));
            }
            rows.push(row);
        }
    }
    let mut out = render_grid(&rows, 2);
    if flagged {
        out.push_str(&format!(
            "{EER_FLAG} EER above 50%: bona fide samples are closer to being classified as attacks; check score polarity.\n"
        ));
    }
    out
}

/// Text rendering of one report, including its warnings.
pub fn render_text(report: &MetricsReport) -> String {
    let (title, body) = match report.kind {
        ReportKind::Vulnerability => ("Vulnerability", render_vulnerability(report)),
        ReportKind::Detectability => ("Detectability", render_detectability(report)),
    };
    let mut out = format!("{title}\n\n{body}");
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

/// Merge any number of reports into one report per kind, vulnerability first.
pub fn combine(reports: Vec<MetricsReport>) -> Result<Vec<MetricsReport>> {
    if reports.iter().all(|r| r.entries.is_empty()) {
        return Err(Error::EmptyScoreSet {
            what: "metrics reports".into(),
        });
    }
    let (vuln, det): (Vec<_>, Vec<_>) = reports
        .into_iter()
        .partition(|r| r.kind == ReportKind::Vulnerability);
    [vuln, det]
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(MetricsReport::merge)
        .collect()
}
