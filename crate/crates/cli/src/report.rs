//! The benchmark CSV: one row per dataset, a trailing mean-ranks row, and
//! a loader that reads the format back (artifacts must round-trip through
//! the tool's own parser).
//!
//! Layout: two leading `#` comment lines carry the tool version and the
//! config fingerprint, then a header row, data rows, and a final row whose
//! dataset cell is `mean_ranks` holding each method's average rank in its
//! accuracy column. UTF-8, LF line endings, `.` decimal separator.

use anyhow::{bail, Context, Result};

/// Accuracy columns, in rank-table order.
pub const METHODS: [&str; 3] = ["sfsdfc", "full", "mi_topk"];

const HEADER: [&str; 9] = [
    "dataset",
    "n",
    "m",
    "selected",
    "sfsdfc_acc",
    "full_acc",
    "mi_topk_acc",
    "select_time_s",
    "eval_time_s",
];

/// One dataset's outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub selected: usize,
    pub sfsdfc_acc: f64,
    pub full_acc: f64,
    pub mi_topk_acc: f64,
    pub select_time_s: f64,
    pub eval_time_s: f64,
}

impl BenchRow {
    /// Accuracies in [`METHODS`] order.
    pub fn accuracies(&self) -> [f64; 3] {
        [self.sfsdfc_acc, self.full_acc, self.mi_topk_acc]
    }
}

/// The whole benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Mean rank per method, in [`METHODS`] order (1 = best).
    pub mean_ranks: [f64; 3],
}

impl BenchReport {
    /// Render the report, embedding the version and config fingerprint as
    /// comment lines.
    pub fn to_csv(&self, version: &str, config_line: &str) -> Result<String> {
        let mut text = format!("# sfsdfc {version}\n# config: {config_line}\n");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.dataset.clone(),
                r.n.to_string(),
                r.m.to_string(),
                r.selected.to_string(),
                format!("{}", r.sfsdfc_acc),
                format!("{}", r.full_acc),
                format!("{}", r.mi_topk_acc),
                format!("{}", r.select_time_s),
                format!("{}", r.eval_time_s),
            ])?;
        }
        let mut tail = vec!["mean_ranks".to_string(), String::new(), String::new(), String::new()];
        tail.extend(self.mean_ranks.iter().map(|r| format!("{r}")));
        tail.extend([String::new(), String::new()]);
        w.write_record(tail)?;
        let body = w.into_inner().context("flushing the CSV buffer")?;
        text.push_str(std::str::from_utf8(&body).context("CSV buffer is not UTF-8")?);
        Ok(text)
    }

    /// Parse a report produced by [`BenchReport::to_csv`].
    pub fn parse(text: &str) -> Result<BenchReport> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(text.as_bytes());
        {
            let headers = reader.headers().context("reading the header row")?;
            if headers.iter().ne(HEADER) {
                bail!("unexpected header row: {headers:?}");
            }
        }
        let mut rows = Vec::new();
        let mut mean_ranks = None;
        for record in reader.records() {
            let record = record.context("reading a benchmark row")?;
            if record.len() != HEADER.len() {
                bail!("row has {} cells, expected {}", record.len(), HEADER.len());
            }
            if &record[0] == "mean_ranks" {
                if mean_ranks.is_some() {
                    bail!("duplicate mean_ranks row");
                }
                mean_ranks = Some([
                    parse_cell(&record[4], "sfsdfc rank")?,
                    parse_cell(&record[5], "full rank")?,
                    parse_cell(&record[6], "mi_topk rank")?,
                ]);
                continue;
            }
            if mean_ranks.is_some() {
                bail!("data row after the mean_ranks row");
            }
            rows.push(BenchRow {
                dataset: record[0].to_string(),
                n: parse_cell(&record[1], "n")?,
                m: parse_cell(&record[2], "m")?,
                selected: parse_cell(&record[3], "selected")?,
                sfsdfc_acc: parse_cell(&record[4], "sfsdfc_acc")?,
                full_acc: parse_cell(&record[5], "full_acc")?,
                mi_topk_acc: parse_cell(&record[6], "mi_topk_acc")?,
                select_time_s: parse_cell(&record[7], "select_time_s")?,
                eval_time_s: parse_cell(&record[8], "eval_time_s")?,
            });
        }
        let Some(mean_ranks) = mean_ranks else {
            bail!("missing mean_ranks row");
        };
        if rows.is_empty() {
            bail!("report has no data rows");
        }
        Ok(BenchReport { rows, mean_ranks })
    }
}

fn parse_cell<T: std::str::FromStr>(cell: &str, what: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    cell.parse().with_context(|| format!("parsing {what} from {cell:?}"))
}
