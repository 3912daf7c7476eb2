//! Markdown tables and plot-ready CSV from sweep records.
//!
//! Tables have one row per mode and one column per SNR; each cell holds the
//! mean rate of the mode and, in parentheses, its share of converged runs.

use std::collections::BTreeMap;

use super::{SweepRecord, NOT_CONVERGED};
use crate::solution::Algorithm;

pub fn display_name(algo: Algorithm) -> &'static str {
    match algo {
        Algorithm::Iia => "IIA (equal power)",
        Algorithm::MaxSinr => "max-SINR",
        Algorithm::Grad => "sum-rate gradient",
        Algorithm::TwoLayer => "two-layer optimal",
        Algorithm::ZfOuter => "two-layer suboptimal (ZF outer)",
    }
}

fn snr_key(snr: f64) -> i64 {
    (snr * 1e6).round() as i64
}

fn label_index(label: &str) -> usize {
    label.strip_prefix('F').and_then(|n| n.parse().ok()).unwrap_or(usize::MAX)
}

struct Cell {
    rate_sum: f64,
    count: usize,
}

/// Records of one algorithm, keyed by SNR then mode label.
struct Group {
    snrs: BTreeMap<i64, f64>,
    cells: BTreeMap<(i64, String), Cell>,
    converged: BTreeMap<i64, (f64, usize)>,
    failed: BTreeMap<i64, usize>,
}

fn group(records: &[SweepRecord]) -> Vec<(Algorithm, Group)> {
    let mut out: Vec<(Algorithm, Group)> = Vec::new();
    for r in records {
        let pos = match out.iter().position(|(a, _)| *a == r.algorithm) {
            Some(p) => p,
            None => {
                out.push((
                    r.algorithm,
                    Group {
                        snrs: BTreeMap::new(),
                        cells: BTreeMap::new(),
                        converged: BTreeMap::new(),
                        failed: BTreeMap::new(),
                    },
                ));
                out.len() - 1
            }
        };
        let g = &mut out[pos].1;
        let key = snr_key(r.snr_db);
        g.snrs.insert(key, r.snr_db);
        if r.cluster_id == NOT_CONVERGED {
            *g.failed.entry(key).or_default() += 1;
            continue;
        }
        let cell = g.cells.entry((key, r.cluster_id.clone())).or_insert(Cell { rate_sum: 0.0, count: 0 });
        cell.rate_sum += r.rate_bits;
        cell.count += 1;
        let conv = g.converged.entry(key).or_default();
        conv.0 += r.rate_bits;
        conv.1 += 1;
    }
    out
}

fn labels(g: &Group) -> Vec<String> {
    let mut labels: Vec<String> = g.cells.keys().map(|(_, l)| l.clone()).collect();
    labels.sort_by_key(|l| (label_index(l), l.clone()));
    labels.dedup();
    labels
}

/// Renders one table per algorithm.
pub fn render_markdown(records: &[SweepRecord]) -> String {
    let mut out = String::new();
    for (algo, g) in group(records) {
        let snrs: Vec<i64> = g.snrs.keys().copied().collect();
        out.push_str(&format!("### {}\n\n", display_name(algo)));
        out.push_str("| Algorithm | Mode |");
        for k in &snrs {
            out.push_str(&format!(" {}dB |", g.snrs[k]));
        }
        out.push_str("\n|---|---|");
        out.push_str(&"---:|".repeat(snrs.len()));
        out.push('\n');
        for label in labels(&g) {
            out.push_str(&format!("| {} | {label} |", display_name(algo)));
            for k in &snrs {
                let total = g.converged.get(k).map_or(0, |c| c.1);
                match g.cells.get(&(*k, label.clone())) {
                    Some(c) => out.push_str(&format!(
                        " {:.2} ({:.1}) |",
                        c.rate_sum / c.count as f64,
                        100.0 * c.count as f64 / total.max(1) as f64
                    )),
                    None => out.push_str(" - (0.0) |"),
                }
            }
            out.push('\n');
        }
        out.push_str(&format!("| {} | Average rate |", display_name(algo)));
        for k in &snrs {
            match g.converged.get(k) {
                Some(&(sum, n)) if n > 0 => out.push_str(&format!(" {:.2} |", sum / n as f64)),
                _ => out.push_str(" - |"),
            }
        }
        out.push('\n');
        if !g.failed.is_empty() {
            out.push_str(&format!("| {} | Not converged |", display_name(algo)));
            for k in &snrs {
                out.push_str(&format!(" {} |", g.failed.get(k).copied().unwrap_or(0)));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// `snr_db,algorithm,average_rate_bits,best_mode_rate_bits,converged_runs,total_runs`.
pub fn plot_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("snr_db,algorithm,average_rate_bits,best_mode_rate_bits,converged_runs,total_runs\n");
    for (algo, g) in group(records) {
        for (k, snr) in &g.snrs {
            let (sum, n) = g.converged.get(k).copied().unwrap_or((0.0, 0));
            let failed = g.failed.get(k).copied().unwrap_or(0);
            let best = g
                .cells
                .iter()
                .filter(|((s, _), _)| s == k)
                .map(|(_, c)| c.rate_sum / c.count as f64)
                .fold(f64::NAN, f64::max);
            let avg = if n > 0 { sum / n as f64 } else { f64::NAN };
            out.push_str(&format!("{snr},{algo},{avg:.6},{best:.6},{n},{}\n", n + failed));
        }
    }
    out
}
