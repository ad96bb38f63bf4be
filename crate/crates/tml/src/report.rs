//! Report rows and their CSV / JSONL encodings.

use serde::Serialize;

/// One measured distance interval, or a derived scalar with `lower == upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Quantity {
    pub fn interval(name: &str, lower: f64, upper: f64) -> Self {
        Quantity { name: name.to_string(), lower, upper }
    }

    pub fn scalar(name: &str, value: f64) -> Self {
        Quantity::interval(name, value, value)
    }
}

/// A checked inequality with enough descriptors to regenerate its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub trial: u64,
    pub seed: u64,
    pub model: String,
    pub n1: usize,
    pub n2: usize,
    pub class1: String,
    pub class2: String,
    pub quantities: Vec<Quantity>,
    pub inequality: String,
    /// Right side minus left side, minimised over the checked inequalities.
    pub slack: f64,
    /// `false` for exploratory rows, which never fail.
    pub asserted: bool,
    pub pass: bool,
}

impl ReportRow {
    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn failed(&self) -> bool {
        self.asserted && !self.pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

const HEADER: [&str; 13] = [
    "suite", "trial", "seed", "model", "n1", "n2", "class1", "class2", "quantities", "inequality", "slack",
    "asserted", "pass",
];

fn quantities_field(qs: &[Quantity]) -> String {
    qs.iter()
        .map(|q| if q.lower == q.upper { format!("{}={}", q.name, q.upper) } else { format!("{}=[{};{}]", q.name, q.lower, q.upper) })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Encodes rows in the given format. Output depends only on the rows.
pub fn render(rows: &[ReportRow], format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(HEADER).expect("in-memory write");
            for r in rows {
                w.write_record([
                    r.suite.clone(),
                    r.trial.to_string(),
                    r.seed.to_string(),
                    r.model.clone(),
                    r.n1.to_string(),
                    r.n2.to_string(),
                    r.class1.clone(),
                    r.class2.clone(),
                    quantities_field(&r.quantities),
                    r.inequality.clone(),
                    r.slack.to_string(),
                    r.asserted.to_string(),
                    r.pass.to_string(),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        ReportFormat::Jsonl => {
            let mut out = Vec::new();
            for r in rows {
                serde_json::to_writer(&mut out, r).expect("rows serialize");
                out.push(b'\n');
            }
            out
        }
    }
}
