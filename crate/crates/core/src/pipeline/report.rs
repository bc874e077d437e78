//! Report emission: human-readable summary, the paired q-vs-k sampling
//! comparison, and a self-consistency check of the emitted scatter data
//! against the metrics rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::fraction_of_variance_unexplained;
use crate::Real;

use super::run::{MetricsRow, ScatterData, APPROX_ALL, APPROX_MEAN};

/// One matched pair of rows differing only in the residual sampling
/// scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QkPair {
    pub key: String,
    pub mse_q: Real,
    pub mse_k: Real,
    /// `mse_q / mse_k`; below one means q-sampling won.
    pub ratio: Real,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QkComparison {
    pub pairs: Vec<QkPair>,
    pub n_q_better: usize,
    pub n_equal: usize,
    pub n_k_better: usize,
    pub fraction_q_better: Real,
    pub fraction_k_better: Real,
}

/// Pairs every cell-level row (pooled, or the unique aggregate) fitted
/// with q-sampling against the matching k-sampling row.
pub fn compare_sampling(rows: &[MetricsRow]) -> QkComparison {
    let cell_level = |r: &&MetricsRow| {
        r.status == "ok" && (r.approx == APPROX_ALL || r.approx == APPROX_MEAN)
    };
    let key_of = |r: &MetricsRow| {
        format!(
            "{}|{}|{}|{}|{}|t{}",
            r.problem, r.dataset_method, r.approx, r.feature_base, r.regressor_family, r.train_size
        )
    };
    let mut pairs = Vec::new();
    for q in rows.iter().filter(cell_level) {
        if q.sampler.as_deref() != Some("q") {
            continue;
        }
        let key = key_of(q);
        let Some(k) = rows
            .iter()
            .filter(cell_level)
            .find(|r| r.sampler.as_deref() == Some("k") && key_of(r) == key)
        else {
            continue;
        };
        let (mse_q, mse_k) = (q.mse.unwrap(), k.mse.unwrap());
        pairs.push(QkPair {
            key,
            mse_q,
            mse_k,
            ratio: mse_q / mse_k,
        });
    }
    let n_q_better = pairs.iter().filter(|p| p.mse_q < p.mse_k).count();
    let n_k_better = pairs.iter().filter(|p| p.mse_k < p.mse_q).count();
    let n_equal = pairs.len() - n_q_better - n_k_better;
    let total = pairs.len().max(1) as Real;
    QkComparison {
        n_q_better,
        n_equal,
        n_k_better,
        fraction_q_better: n_q_better as Real / total,
        fraction_k_better: n_k_better as Real / total,
        pairs,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportSummary {
    pub rows: usize,
    pub ok_rows: usize,
    pub failed_rows: usize,
    pub scatter_checked: usize,
    pub qk_pairs: usize,
    pub fraction_q_better: Real,
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Reads `metrics.json` under `out_dir`, verifies scatter/metrics
/// self-consistency, and writes `summary.txt` plus
/// `qk_comparison.json`.
pub fn emit_report(out_dir: &Path) -> Result<ReportSummary> {
    let metrics_path = out_dir.join("metrics.json");
    let rows: Vec<MetricsRow> =
        serde_json::from_str(&std::fs::read_to_string(&metrics_path)?)?;

    // Self-consistency: the coefficient of determination recomputed from
    // the emitted scatter pairs must match the metrics row.
    let scatter_dir = out_dir.join("scatter");
    let mut scatter_checked = 0usize;
    for row in rows.iter().filter(|r| r.status == "ok") {
        let path = scatter_dir.join(format!("{}.json", sanitize(&row.id)));
        if !path.exists() {
            continue; // aggregate rows carry no scatter file
        }
        let scatter: ScatterData = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let exact: Vec<Real> = scatter.pairs.iter().map(|p| p.0).collect();
        let predicted: Vec<Real> = scatter.pairs.iter().map(|p| p.1).collect();
        let r2 = 1.0 - fraction_of_variance_unexplained(&exact, &predicted);
        let recorded = row.r2.unwrap();
        if (r2 - recorded).abs() > 1e-12 * recorded.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "scatter data for {} is inconsistent with its metrics row \
                 (recomputed r2 {r2}, recorded {recorded})",
                row.id
            )));
        }
        scatter_checked += 1;
    }

    let qk = compare_sampling(&rows);
    let mut text = serde_json::to_string_pretty(&qk)?;
    text.push('\n');
    std::fs::write(out_dir.join("qk_comparison.json"), text)?;

    let ok_rows = rows.iter().filter(|r| r.status == "ok").count();
    let mut summary = String::new();
    summary.push_str(&format!(
        "rows: {} ok, {} failed; scatter files checked: {}\n",
        ok_rows,
        rows.len() - ok_rows,
        scatter_checked
    ));
    if !qk.pairs.is_empty() {
        summary.push_str(&format!(
            "q-vs-k pairs: {} (q better {}, equal {}, k better {}; q-better fraction {:.4})\n",
            qk.pairs.len(),
            qk.n_q_better,
            qk.n_equal,
            qk.n_k_better,
            qk.fraction_q_better
        ));
    }
    summary.push('\n');
    summary.push_str(&format!(
        "{:<72} {:>12} {:>12} {:>10}\n",
        "row", "mse", "fvu", "r2"
    ));
    for row in &rows {
        match (row.mse, row.fvu, row.r2) {
            (Some(mse), Some(fvu), Some(r2)) => summary.push_str(&format!(
                "{:<72} {:>12.5e} {:>12.5e} {:>10.6}\n",
                row.id, mse, fvu, r2
            )),
            _ => summary.push_str(&format!("{:<72} FAILED: {}\n", row.id, row.status)),
        }
    }
    std::fs::write(out_dir.join("summary.txt"), summary)?;

    Ok(ReportSummary {
        rows: rows.len(),
        ok_rows,
        failed_rows: rows.len() - ok_rows,
        scatter_checked,
        qk_pairs: qk.pairs.len(),
        fraction_q_better: qk.fraction_q_better,
    })
}
