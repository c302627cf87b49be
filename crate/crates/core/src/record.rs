//! Per-treebank analysis rows and their CSV form.

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Columns that can take part in correlations and regressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    TrainSize,
    LogSize,
    MeanTestLen,
    Dug,
    Uug,
    FocusedDug,
    Las,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::TrainSize,
        Feature::LogSize,
        Feature::MeanTestLen,
        Feature::Dug,
        Feature::Uug,
        Feature::FocusedDug,
        Feature::Las,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::TrainSize => "size",
            Feature::LogSize => "log_size",
            Feature::MeanTestLen => "mean_test_len",
            Feature::Dug => "dug",
            Feature::Uug => "uug",
            Feature::FocusedDug => "focused_dug",
            Feature::Las => "las",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s || (s == "train_size" && *f == Feature::TrainSize))
            .ok_or_else(|| format!("unknown feature {:?}", s))
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record {name:?}: {field} = {value} is outside {range}")]
    OutOfRange {
        name: String,
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("record {name:?}: training size must be at least 1")]
    EmptyTraining { name: String },
    #[error("records CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("records CSV has no rows")]
    NoRows,
}

/// One analysis row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreebankRecord {
    pub name: String,
    /// Training sentences.
    pub train_size: u64,
    /// `ln(train_size)`.
    pub log_size: f64,
    /// Mean test sentence length in syntactic words.
    pub mean_test_len: f64,
    pub dug: f64,
    pub uug: Option<f64>,
    /// DUG over sentences of length 9..=14 only.
    pub focused_dug: Option<f64>,
    pub las: f64,
}

fn unit(name: &str, field: &'static str, value: f64) -> Result<f64, RecordError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(RecordError::OutOfRange {
            name: name.to_owned(),
            field,
            value,
            range: "[0, 1]",
        })
    }
}

impl TreebankRecord {
    pub fn new(
        name: impl Into<String>,
        train_size: u64,
        mean_test_len: f64,
        dug: f64,
        las: f64,
    ) -> Result<Self, RecordError> {
        let name = name.into();
        if train_size == 0 {
            return Err(RecordError::EmptyTraining { name });
        }
        if !(mean_test_len.is_finite() && mean_test_len > 0.0) {
            return Err(RecordError::OutOfRange {
                name,
                field: "mean_test_len",
                value: mean_test_len,
                range: "(0, inf)",
            });
        }
        let dug = unit(&name, "dug", dug)?;
        let las = unit(&name, "las", las)?;
        Ok(TreebankRecord {
            log_size: (train_size as f64).ln(),
            name,
            train_size,
            mean_test_len,
            dug,
            uug: None,
            focused_dug: None,
            las,
        })
    }

    pub fn with_uug(mut self, uug: f64) -> Result<Self, RecordError> {
        self.uug = Some(unit(&self.name, "uug", uug)?);
        Ok(self)
    }

    pub fn with_focused_dug(mut self, focused: f64) -> Result<Self, RecordError> {
        self.focused_dug = Some(unit(&self.name, "focused_dug", focused)?);
        Ok(self)
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::TrainSize => Some(self.train_size as f64),
            Feature::LogSize => Some(self.log_size),
            Feature::MeanTestLen => Some(self.mean_test_len),
            Feature::Dug => Some(self.dug),
            Feature::Uug => self.uug,
            Feature::FocusedDug => self.focused_dug,
            Feature::Las => Some(self.las),
        }
    }
}

#[derive(Deserialize)]
struct CsvRow {
    name: String,
    train_size: u64,
    mean_test_len: f64,
    dug: f64,
    las: f64,
    #[serde(default)]
    uug: Option<f64>,
    #[serde(default)]
    focused_dug: Option<f64>,
}

/// Reads `name,train_size,mean_test_len,dug,las[,uug][,focused_dug]`.
/// Columns are matched by header name.
pub fn read_records_csv<R: io::Read>(input: R) -> Result<Vec<TreebankRecord>, RecordError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: CsvRow = row?;
        let mut record = TreebankRecord::new(row.name, row.train_size, row.mean_test_len, row.dug, row.las)?;
        if let Some(u) = row.uug {
            record = record.with_uug(u)?;
        }
        if let Some(f) = row.focused_dug {
            record = record.with_focused_dug(f)?;
        }
        out.push(record);
    }
    if out.is_empty() {
        return Err(RecordError::NoRows);
    }
    Ok(out)
}

/// Writes records with the same header `read_records_csv` accepts. The
/// optional columns appear only when some record carries them.
pub fn write_records_csv(records: &[TreebankRecord]) -> String {
    let with_uug = records.iter().any(|r| r.uug.is_some());
    let with_focused = records.iter().any(|r| r.focused_dug.is_some());
    let mut header = vec!["name", "train_size", "mean_test_len", "dug", "las"];
    if with_uug {
        header.push("uug");
    }
    if with_focused {
        header.push("focused_dug");
    }

    let mut table = crate::report::CsvTable::new(&header);
    for r in records {
        let opt = |v: Option<f64>| v.map(crate::report::fmt_sig).unwrap_or_default();
        let mut row = vec![
            r.name.clone(),
            r.train_size.to_string(),
            crate::report::fmt_sig(r.mean_test_len),
            crate::report::fmt_sig(r.dug),
            crate::report::fmt_sig(r.las),
        ];
        if with_uug {
            row.push(opt(r.uug));
        }
        if with_focused {
            row.push(opt(r.focused_dug));
        }
        table.push(row);
    }
    table.to_csv()
}
