// SPDX-License-Identifier: Apache-2.0

//! Report rendering. CSV reports are long-format tables; JSON reports are
//! the serialized result structures.

use gitteams_core::commitcls::CascadeEvaluation;
use gitteams_core::teamstyle::TeamEvaluation;
use gitteams_ml::EvalReport;
use serde::Serialize;

use crate::args::Format;
use crate::error::CliResult;

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::CliError::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn json_string<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn score_row(table: &str, r: &EvalReport) -> Vec<String> {
    vec![
        table.to_string(),
        r.label.clone(),
        format!("{:.4}", r.f1),
        format!("{:.4}", r.precision),
        format!("{:.4}", r.recall),
        r.support.to_string(),
    ]
}

/// Static-stage and full-cascade scores per category.
pub fn commit_eval(ev: &CascadeEvaluation, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json_string(ev),
        Format::Csv => {
            let rows = ev
                .static_stages
                .iter()
                .map(|r| score_row("static", r))
                .chain(ev.full_cascade.iter().map(|r| score_row("cascade", r)))
                .collect();
            csv_string(&["stage", "category", "f1", "precision", "recall", "support"], rows)
        }
    }
}

pub fn team_eval(ev: &TeamEvaluation, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json_string(ev),
        Format::Csv => {
            let table = ev.algorithm.to_string();
            let mut rows: Vec<Vec<String>> = ev.per_style.iter().map(|r| score_row(&table, r)).collect();
            let total: usize = ev.per_style.iter().map(|r| r.support).sum();
            rows.push(vec![table, "macro".into(), format!("{:.4}", ev.macro_f1), String::new(), String::new(), total.to_string()]);
            csv_string(&["algorithm", "style", "f1", "precision", "recall", "support"], rows)
        }
    }
}

pub fn selected_features(ev: &TeamEvaluation) -> CliResult<String> {
    let rows = ev
        .selected_features
        .iter()
        .flat_map(|s| {
            s.features
                .iter()
                .enumerate()
                .map(move |(i, f)| vec![s.fold.to_string(), s.style.to_string(), (i + 1).to_string(), f.clone()])
        })
        .collect();
    csv_string(&["fold", "style", "position", "feature"], rows)
}

#[derive(Serialize)]
pub struct CountRow {
    pub label: String,
    pub count: usize,
    pub ratio: f64,
}

/// Count & Ratio table.
pub fn distribution(rows: &[CountRow], format: Format) -> CliResult<String> {
    match format {
        Format::Json => json_string(&rows),
        Format::Csv => csv_string(
            &["label", "count", "ratio"],
            rows.iter().map(|r| vec![r.label.clone(), r.count.to_string(), format!("{:.2}", r.ratio)]).collect(),
        ),
    }
}

pub fn count_rows<'a>(labels: impl Iterator<Item = &'a str>, order: &[&str]) -> Vec<CountRow> {
    let labels: Vec<&str> = labels.collect();
    let total = labels.len().max(1) as f64;
    order
        .iter()
        .map(|&name| {
            let count = labels.iter().filter(|&&l| l == name).count();
            CountRow { label: name.to_string(), count, ratio: count as f64 / total }
        })
        .collect()
}

#[derive(Serialize)]
pub struct Prediction {
    pub team_id: String,
    pub style: String,
    pub confidence: f64,
}

pub fn predictions(rows: &[Prediction], format: Format) -> CliResult<String> {
    match format {
        Format::Json => json_string(&rows),
        Format::Csv => csv_string(
            &["team_id", "style", "confidence"],
            rows.iter().map(|p| vec![p.team_id.clone(), p.style.clone(), p.confidence.to_string()]).collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_rows_keep_order_and_zeroes() {
        let rows = count_rows(["b", "a", "b"].into_iter(), &["a", "b", "c"]);
        assert_eq!(rows.iter().map(|r| r.count).collect::<Vec<_>>(), vec![1, 2, 0]);
        let text = distribution(&rows, Format::Csv).unwrap();
        assert_eq!(text, "label,count,ratio\na,1,0.33\nb,2,0.67\nc,0,0.00\n");
    }
}
