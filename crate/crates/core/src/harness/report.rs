use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cell::{CellStatus, SweepResult};
use crate::dataset::TargetMode;
use crate::neuralnet::Architecture;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Degree-space circular MAE; the mean over φ and ψ for two-angle cells.
    Mae,
    /// Codec-space RMSE over the sin/cos components.
    Rmse,
    /// Codec-space MSE.
    Mse,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::Rmse => "rmse",
            Metric::Mse => "mse",
        }
    }

    pub fn score(self, r: &SweepResult) -> Option<f64> {
        match self {
            Metric::Rmse => r.codec_rmse,
            Metric::Mse => r.codec_mse,
            Metric::Mae => match (r.degree_mae_phi, r.degree_mae_psi) {
                (Some(a), Some(b)) => Some((a + b) / 2.0),
                (a, b) => a.or(b),
            },
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(Metric::Mae),
            "rmse" => Ok(Metric::Rmse),
            "mse" => Ok(Metric::Mse),
            _ => Err(Error::Config(format!("unknown metric {s:?} (expected mae, rmse or mse)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub score: f64,
    pub encoding: String,
    pub window_size: usize,
    pub model: Architecture,
    pub target_mode: TargetMode,
}

/// The `k` best completed results by ascending `metric`, optionally limited
/// to one target mode. Ties are broken by encoding name, window, then model.
pub fn rank_results(
    results: &[SweepResult],
    metric: Metric,
    target: Option<TargetMode>,
    k: usize,
) -> Vec<RankedRow> {
    let mut rows: Vec<RankedRow> = results
        .iter()
        .filter(|r| r.status == CellStatus::Completed)
        .filter(|r| target.is_none_or(|t| r.target_mode == t))
        .filter_map(|r| {
            Some(RankedRow {
                score: metric.score(r)?,
                encoding: r.encoding.clone(),
                window_size: r.window_size,
                model: r.model,
                target_mode: r.target_mode,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.encoding.cmp(&b.encoding))
            .then_with(|| a.window_size.cmp(&b.window_size))
            .then_with(|| a.model.cmp(&b.model))
            .then_with(|| a.target_mode.cmp(&b.target_mode))
    });
    rows.truncate(k);
    rows
}

const HEADERS: [&str; 4] = ["Score", "Encoding", "Window Size", "Model Arch"];

fn cells(row: &RankedRow) -> [String; 4] {
    [
        format!("{:.3}", row.score),
        row.encoding.clone(),
        row.window_size.to_string(),
        row.model.to_string(),
    ]
}

/// Aligned plain-text table.
pub fn format_table(rows: &[RankedRow]) -> String {
    let body: Vec<[String; 4]> = rows.iter().map(cells).collect();
    let mut widths = HEADERS.map(str::len);
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, fields: &[&str]| {
        let parts: Vec<String> = fields
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (f, w))| if i == 0 { format!("{f:>w$}") } else { format!("{f:<w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &HEADERS);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for r in &body {
        let fields: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&mut out, &fields);
    }
    out
}

pub fn write_report_csv<W: Write>(mut out: W, rows: &[RankedRow]) -> Result<()> {
    writeln!(out, "score,encoding,window_size,model_arch")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.score, r.encoding, r.window_size, r.model)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(encoding: &str, window: usize, phi: f64) -> SweepResult {
        SweepResult {
            encoding: encoding.into(),
            window_size: window,
            model: Architecture::Lstm1,
            target_mode: TargetMode::Phi,
            status: CellStatus::Completed,
            codec_mse: Some(phi / 100.0),
            codec_rmse: Some((phi / 100.0).sqrt()),
            degree_mae_phi: Some(phi),
            degree_mae_psi: None,
            epochs_run: 1,
            seed: 0,
            reason: None,
        }
    }

    #[test]
    fn ranks_ascending() {
        let rs = vec![result("A", 3, 0.3), result("B", 3, 0.1), result("C", 3, 0.2)];
        let top = rank_results(&rs, Metric::Mae, None, 2);
        assert_eq!(top.iter().map(|r| r.score).collect::<Vec<_>>(), vec![0.1, 0.2]);
        assert_eq!(rank_results(&rs, Metric::Mae, None, 10).len(), 3);
    }

    #[test]
    fn ties_by_encoding_then_window() {
        let rs = vec![result("PAM30", 3, 1.0), result("BLOSUM62", 5, 1.0), result("BLOSUM62", 3, 1.0)];
        let top = rank_results(&rs, Metric::Mae, None, 3);
        let keys: Vec<_> = top.iter().map(|r| (r.encoding.as_str(), r.window_size)).collect();
        assert_eq!(keys, vec![("BLOSUM62", 3), ("BLOSUM62", 5), ("PAM30", 3)]);
    }

    #[test]
    fn filters_status_and_target() {
        let mut skipped = result("A", 3, 0.0);
        skipped.status = CellStatus::Skipped;
        let mut psi = result("B", 3, 0.5);
        psi.target_mode = TargetMode::Psi;
        psi.degree_mae_psi = psi.degree_mae_phi.take();
        let rs = vec![skipped, psi, result("C", 3, 9.0)];
        let top = rank_results(&rs, Metric::Mae, Some(TargetMode::Phi), 5);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].encoding, "C");
        assert!(rank_results(&[], Metric::Rmse, None, 3).is_empty());
    }

    #[test]
    fn both_mode_uses_mean() {
        let mut r = result("A", 3, 10.0);
        r.target_mode = TargetMode::Both;
        r.degree_mae_psi = Some(20.0);
        assert_eq!(Metric::Mae.score(&r), Some(15.0));
    }

    #[test]
    fn table_and_csv() {
        let rows = rank_results(&[result("BLOSUM62", 7, 14.294)], Metric::Mae, None, 1);
        let table = format_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], " Score  Encoding  Window Size  Model Arch");
        assert_eq!(lines[2], "14.294  BLOSUM62  7            LSTM1");
        let mut csv = Vec::new();
        write_report_csv(&mut csv, &rows).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "score,encoding,window_size,model_arch\n14.294,BLOSUM62,7,LSTM1\n"
        );
    }
}
