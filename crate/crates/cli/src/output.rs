use std::path::Path;

use reviewq_core::EvalReport;
use reviewq_service::jobs::{IngestSummary, TrainSummary};
use reviewq_service::PrioritizedList;
use serde::Serialize;

use crate::Format;

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn json<T: Serialize>(value: &T) {
    out!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

pub fn ingest(format: Format, s: &IngestSummary) {
    match format {
        Format::Json => json(s),
        Format::Table => {
            out!("snapshot  {}", s.snapshot_at.to_rfc3339());
            out!("fetched   {}", s.fetched);
            out!("stored    {}", s.stored);
            out!("skipped   {}", s.skipped);
        }
    }
}

pub fn train(format: Format, s: &TrainSummary, artifact: &Path) {
    match format {
        Format::Json => json(s),
        Format::Table => {
            out!("rows         {}", s.rows);
            out!("trained_at   {}", s.trained_at.to_rfc3339());
            out!("fingerprint  {}", s.fingerprint);
            out!("artifact     {}", artifact.display());
        }
    }
}

pub fn prioritized(format: Format, list: &PrioritizedList) {
    if format == Format::Json {
        return json(list);
    }
    let rows: Vec<[String; 6]> = list
        .items
        .iter()
        .map(|it| {
            let p = if it.degraded { format!("{:.3}*", it.merge_probability) } else { format!("{:.3}", it.merge_probability) };
            [it.rank.to_string(), it.change_id.clone(), it.change_type.to_string(), it.merge_conflict.to_string(), p, it.subject.clone()]
        })
        .collect();
    print_table(["rank", "change_id", "type", "conflict", "probability", "subject"], &rows);
    if list.items.iter().any(|it| it.degraded) {
        out!("* evidence had zero probability under the model; fallback used");
    }
    out!("model {} trained {}", &list.model_fingerprint[..12.min(list.model_fingerprint.len())], list.model_trained_at.to_rfc3339());
}

pub fn eval(format: Format, r: &EvalReport, out: &Path) {
    if format == Format::Json {
        return json(r);
    }
    let rows: Vec<[String; 4]> = r
        .per_fold
        .iter()
        .map(|f| [f.fold.to_string(), f.rows.to_string(), format!("{:.4}", f.rmse), format!("{:.4}", f.mae)])
        .collect();
    print_table(["fold", "rows", "rmse", "mae"], &rows);
    out!("aggregate rmse {:.4}  mae {:.4}  (always-0.5 rmse {:.4})", r.aggregate_rmse, r.aggregate_mae, r.baseline_rmse);
    out!("pooled    rmse {:.4}  mae {:.4}  auc {:.4}", r.pooled_rmse, r.pooled_mae, r.auc);
    out!("wrote {} and {}", out.join("report.json").display(), out.join("roc.csv").display());
}

pub fn synth(format: Format, rows: usize, out: &Path) {
    let changes = out.join("changes.json");
    let dataset = out.join("dataset.json");
    match format {
        Format::Json => json(&serde_json::json!({
            "rows": rows,
            "changes": changes,
            "dataset": dataset,
        })),
        Format::Table => out!("{rows} rows: {} {}", changes.display(), dataset.display()),
    }
}

fn print_table<const N: usize>(header: [&str; N], rows: &[[String; N]]) {
    let mut widths = header.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out!("{}", padded.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
}
