use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{PeprError, Result};
use crate::resource::{ArchClass, ExperimentSet, ResourceKind, RunRecord, RunTags, Strategy};

pub const COL_MODEL_ID: &str = "model_id";
pub const COL_DATASET_ID: &str = "dataset_id";
pub const COL_PERFORMANCE: &str = "performance";
pub const COL_PARAMS: &str = "params_millions";
pub const COL_ARCH_CLASS: &str = "arch_class";
pub const COL_EFFICIENT: &str = "efficient";
pub const COL_EPOCH: &str = "epoch";

const REQUIRED: [&str; 6] = [
    COL_MODEL_ID,
    COL_DATASET_ID,
    COL_PERFORMANCE,
    COL_PARAMS,
    COL_ARCH_CLASS,
    COL_EFFICIENT,
];

/// Resource kinds stored as their own column (parameters live in the tags).
const RESOURCE_COLUMNS: [ResourceKind; 5] = [
    ResourceKind::Energy,
    ResourceKind::Carbon,
    ResourceKind::Memory,
    ResourceKind::Time,
    ResourceKind::DataFraction,
];

fn is_known(col: &str) -> bool {
    REQUIRED.contains(&col)
        || col == COL_EPOCH
        || RESOURCE_COLUMNS.iter().any(|k| k.column() == col)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFormat {
    Csv,
    Json,
}

impl RunFormat {
    /// `.json` means JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => RunFormat::Json,
            _ => RunFormat::Csv,
        }
    }
}

/// Records grouped per `dataset_id`, each group with min-max contexts for the
/// resource kinds all its records carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiments {
    sets: BTreeMap<String, ExperimentSet>,
}

impl Experiments {
    pub fn from_records(records: Vec<RunRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(PeprError::NoRecords);
        }
        let mut seen = BTreeSet::new();
        let mut grouped: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
        for r in records {
            let key = (
                r.model_id().to_string(),
                r.dataset_id().to_string(),
                r.epoch(),
            );
            if !seen.insert(key) {
                return Err(PeprError::InvalidArgument(format!(
                    "duplicate record for model `{}` on dataset `{}`{}",
                    r.model_id(),
                    r.dataset_id(),
                    r.epoch()
                        .map(|e| format!(" at epoch {e}"))
                        .unwrap_or_default()
                )));
            }
            grouped
                .entry(r.dataset_id().to_string())
                .or_default()
                .push(r);
        }
        let sets = grouped
            .into_iter()
            .map(|(k, v)| Ok((k, ExperimentSet::new(v)?)))
            .collect::<Result<_>>()?;
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &BTreeMap<String, ExperimentSet> {
        &self.sets
    }

    pub fn get(&self, dataset_id: &str) -> Option<&ExperimentSet> {
        self.sets.get(dataset_id)
    }

    pub fn dataset_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.sets.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// The only dataset, or an error naming the ones present.
    pub fn single(&self) -> Result<&ExperimentSet> {
        if self.sets.len() == 1 {
            Ok(self.sets.values().next().expect("one set"))
        } else {
            Err(PeprError::InvalidArgument(format!(
                "expected a single dataset, found {}",
                self.dataset_ids().collect::<Vec<_>>().join(", ")
            )))
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &RunRecord> + '_ {
        self.sets.values().flat_map(|s| s.records())
    }

    /// Rebuilds the `kind` context of every dataset with `strategy`.
    pub fn with_strategy(self, kind: ResourceKind, strategy: Strategy) -> Result<Self> {
        let sets = self
            .sets
            .into_iter()
            .map(|(k, s)| Ok((k, s.with_strategy(kind, strategy)?)))
            .collect::<Result<_>>()?;
        Ok(Self { sets })
    }
}

fn row_err(line: u64, message: impl Into<String>) -> PeprError {
    PeprError::Row {
        line,
        message: message.into(),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "y" | "1" => Some(true),
        "false" | "no" | "n" | "0" => Some(false),
        _ => None,
    }
}

fn parse_f64(line: u64, col: &str, s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| row_err(line, format!("{col}: `{s}` is not a number")))
}

/// Builds a record from `(column, cell)` pairs, column names already
/// lowercased.
fn record_from_cells(line: u64, cells: &[(String, String)]) -> Result<RunRecord> {
    let get = |col: &str| {
        cells
            .iter()
            .find(|(c, _)| c == col)
            .map(|(_, v)| v.as_str())
    };
    let required = |col: &str| -> Result<&str> {
        match get(col) {
            Some(v) if !v.trim().is_empty() => Ok(v.trim()),
            _ => Err(row_err(line, format!("missing value for `{col}`"))),
        }
    };

    let performance = parse_f64(line, COL_PERFORMANCE, required(COL_PERFORMANCE)?)?
        .expect("required cell is non-empty");
    if !(0.0..=1.0).contains(&performance) {
        return Err(row_err(
            line,
            format!("performance {performance} is outside [0, 1]"),
        ));
    }
    let arch_class: ArchClass = required(COL_ARCH_CLASS)?
        .parse()
        .map_err(|e: PeprError| row_err(line, e.to_string()))?;
    let efficient_raw = required(COL_EFFICIENT)?;
    let efficient = parse_bool(efficient_raw).ok_or_else(|| {
        row_err(
            line,
            format!("efficient: `{efficient_raw}` is not a boolean"),
        )
    })?;
    let params = parse_f64(line, COL_PARAMS, get(COL_PARAMS).unwrap_or(""))?;

    let mut record = RunRecord::new(
        required(COL_MODEL_ID)?,
        required(COL_DATASET_ID)?,
        performance,
        RunTags::new(arch_class, efficient, params),
    )
    .map_err(|e| row_err(line, e.to_string()))?;

    for kind in RESOURCE_COLUMNS {
        if let Some(v) = parse_f64(line, kind.column(), get(kind.column()).unwrap_or(""))? {
            record = record
                .with_resource(kind, v)
                .map_err(|e| row_err(line, e.to_string()))?;
        }
    }
    if let Some(epoch) = get(COL_EPOCH).map(str::trim).filter(|s| !s.is_empty()) {
        let epoch: u32 = epoch.parse().map_err(|_| {
            row_err(
                line,
                format!("epoch: `{epoch}` is not a non-negative integer"),
            )
        })?;
        record = record.with_epoch(epoch);
    }
    for (col, v) in cells {
        // an empty cell means the record has no value for that column
        if !is_known(col) && !v.is_empty() {
            record = record.with_extra(col.clone(), v.clone());
        }
    }
    Ok(record)
}

fn read_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(PeprError::NoRecords);
    }
    let lowered: Vec<String> = headers
        .iter()
        .map(|h| {
            let l = h.to_ascii_lowercase();
            if is_known(&l) {
                l
            } else {
                h.clone()
            }
        })
        .collect();
    for col in REQUIRED {
        if !lowered.iter().any(|h| h == col) {
            return Err(PeprError::Header(format!("missing column `{col}`")));
        }
    }
    let mut dup = BTreeSet::new();
    if let Some(h) = lowered.iter().find(|h| !dup.insert(h.as_str())) {
        return Err(PeprError::Header(format!("duplicate column `{h}`")));
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let cells: Vec<(String, String)> = lowered
            .iter()
            .cloned()
            .zip(row.iter().map(str::to_string))
            .collect();
        records.push(record_from_cells(line, &cells)?);
    }
    if records.is_empty() {
        return Err(PeprError::NoRecords);
    }
    Ok(records)
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn read_json(text: &str) -> Result<Vec<RunRecord>> {
    if text.trim().is_empty() {
        return Err(PeprError::NoRecords);
    }
    let value: Value = serde_json::from_str(text)?;
    let rows = match value {
        Value::Array(rows) => rows,
        Value::Object(mut obj) => match obj.remove("records") {
            Some(Value::Array(rows)) => rows,
            _ => return Err(PeprError::Header("expected an array of records".into())),
        },
        _ => return Err(PeprError::Header("expected an array of records".into())),
    };
    if rows.is_empty() {
        return Err(PeprError::NoRecords);
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i as u64 + 1;
            let obj = row
                .as_object()
                .ok_or_else(|| row_err(line, "record is not an object"))?;
            let cells: Vec<(String, String)> = obj
                .iter()
                .map(|(k, v)| {
                    let l = k.to_ascii_lowercase();
                    (if is_known(&l) { l } else { k.clone() }, json_cell(v))
                })
                .collect();
            for col in REQUIRED {
                if !cells.iter().any(|(c, _)| c == col) {
                    return Err(row_err(line, format!("missing field `{col}`")));
                }
            }
            record_from_cells(line, &cells)
        })
        .collect()
}

/// Parses run records from text in the given format.
pub fn read_runs(text: &str, format: RunFormat) -> Result<Vec<RunRecord>> {
    match format {
        RunFormat::Csv => read_csv(text),
        RunFormat::Json => read_json(text),
    }
}

/// Reads a run-record file and groups its records per dataset.
pub fn ingest_runs(path: &Path, format: RunFormat) -> Result<Experiments> {
    let text = std::fs::read_to_string(path)?;
    Experiments::from_records(read_runs(&text, format)?)
}

struct Layout {
    resources: Vec<ResourceKind>,
    epoch: bool,
    extras: Vec<String>,
}

fn layout<'a>(records: impl Iterator<Item = &'a RunRecord> + Clone) -> Layout {
    let resources = RESOURCE_COLUMNS
        .into_iter()
        .filter(|&k| records.clone().any(|r| r.resources().contains_key(&k)))
        .collect();
    let epoch = records.clone().any(|r| r.epoch().is_some());
    let extras: BTreeSet<String> = records.flat_map(|r| r.extra().keys().cloned()).collect();
    Layout {
        resources,
        epoch,
        extras: extras.into_iter().collect(),
    }
}

/// Serializes records in the run-record schema. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_runs<'a>(
    records: impl IntoIterator<Item = &'a RunRecord>,
    format: RunFormat,
) -> Result<String> {
    let records: Vec<&RunRecord> = records.into_iter().collect();
    let lay = layout(records.iter().copied());
    match format {
        RunFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let mut header: Vec<String> = REQUIRED.iter().map(|s| s.to_string()).collect();
            header.extend(lay.resources.iter().map(|k| k.column().to_string()));
            if lay.epoch {
                header.push(COL_EPOCH.to_string());
            }
            header.extend(lay.extras.iter().cloned());
            w.write_record(&header)?;
            for r in &records {
                let mut row = vec![
                    r.model_id().to_string(),
                    r.dataset_id().to_string(),
                    r.performance().to_string(),
                    r.tags()
                        .params_millions
                        .map(|p| p.to_string())
                        .unwrap_or_default(),
                    r.tags().arch_class.to_string(),
                    r.tags().efficient.to_string(),
                ];
                for k in &lay.resources {
                    row.push(r.resource(*k).map(|v| v.to_string()).unwrap_or_default());
                }
                if lay.epoch {
                    row.push(r.epoch().map(|e| e.to_string()).unwrap_or_default());
                }
                for key in &lay.extras {
                    row.push(r.extra().get(key).cloned().unwrap_or_default());
                }
                w.write_record(&row)?;
            }
            let bytes = w.into_inner().map_err(|e| PeprError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        RunFormat::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    obj.insert(COL_MODEL_ID.into(), r.model_id().into());
                    obj.insert(COL_DATASET_ID.into(), r.dataset_id().into());
                    obj.insert(COL_PERFORMANCE.into(), r.performance().into());
                    obj.insert(
                        COL_PARAMS.into(),
                        r.tags().params_millions.map_or(Value::Null, Value::from),
                    );
                    obj.insert(
                        COL_ARCH_CLASS.into(),
                        r.tags().arch_class.to_string().into(),
                    );
                    obj.insert(COL_EFFICIENT.into(), r.tags().efficient.into());
                    for (k, v) in r.resources() {
                        obj.insert(k.column().into(), (*v).into());
                    }
                    if let Some(e) = r.epoch() {
                        obj.insert(COL_EPOCH.into(), e.into());
                    }
                    for (k, v) in r.extra() {
                        obj.insert(k.clone(), v.clone().into());
                    }
                    Value::Object(obj)
                })
                .collect();
            Ok(serde_json::to_string_pretty(&rows)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "model_id,dataset_id,performance,params_millions,arch_class,efficient,energy_wh";

    #[test]
    fn empty_inputs_have_no_records() {
        assert!(matches!(
            read_runs("", RunFormat::Csv),
            Err(PeprError::NoRecords)
        ));
        assert!(matches!(
            read_runs(HEADER, RunFormat::Csv),
            Err(PeprError::NoRecords)
        ));
        assert!(matches!(
            read_runs("[]", RunFormat::Json),
            Err(PeprError::NoRecords)
        ));
        assert!(matches!(
            read_runs("", RunFormat::Json),
            Err(PeprError::NoRecords)
        ));
    }

    #[test]
    fn performance_out_of_range_names_the_line() {
        let text = format!("{HEADER}\na,d,0.5,1,CNN,true,3\nb,d,1.2,1,CNN,true,4\n");
        match read_runs(&text, RunFormat::Csv) {
            Err(PeprError::Row { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("performance"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{HEADER}\na,d,high,1,CNN,true,3\n");
        assert!(matches!(
            read_runs(&text, RunFormat::Csv),
            Err(PeprError::Row { line: 2, .. })
        ));
    }

    #[test]
    fn header_is_case_insensitive_and_keeps_unknown_columns() {
        let text = "Model_ID,DATASET_ID,Performance,params_millions,arch_class,efficient,Energy_Wh,Notes\n\
                    a,d,0.5,1.5,other,no,3,hello\n";
        let recs = read_runs(text, RunFormat::Csv).unwrap();
        assert_eq!(recs[0].resource(ResourceKind::Energy), Some(3.0));
        assert_eq!(
            recs[0].extra().get("Notes").map(String::as_str),
            Some("hello")
        );
        assert_eq!(recs[0].tags().arch_class, ArchClass::Other);
    }

    #[test]
    fn malformed_header() {
        let text = "model_id,performance\na,0.5\n";
        assert!(matches!(
            read_runs(text, RunFormat::Csv),
            Err(PeprError::Header(_))
        ));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = format!("{HEADER}\na,d,0.5,1,CNN,true,3\na,d,0.6,1,CNN,true,4\n");
        let recs = read_runs(&text, RunFormat::Csv).unwrap();
        assert!(Experiments::from_records(recs).is_err());
        let text = format!("{HEADER},epoch\na,d,0.5,1,CNN,true,3,1\na,d,0.6,1,CNN,true,4,2\n");
        let recs = read_runs(&text, RunFormat::Csv).unwrap();
        assert!(Experiments::from_records(recs).is_ok());
    }

    #[test]
    fn missing_optional_resources_are_absent() {
        let text = "model_id,dataset_id,performance,params_millions,arch_class,efficient,energy_wh,memory_gb\n\
                    a,d,0.5,1,CNN,true,3,\nb,d,0.6,,CNN,false,4,2.0\n";
        let exps = Experiments::from_records(read_runs(text, RunFormat::Csv).unwrap()).unwrap();
        let set = exps.single().unwrap();
        assert!(set.context(ResourceKind::Energy).is_ok());
        assert!(set.context(ResourceKind::Memory).is_err());
        assert!(set.context(ResourceKind::Params).is_err());
        assert_eq!(set.records()[0].resource(ResourceKind::Memory), None);
    }

    #[test]
    fn groups_per_dataset() {
        let text = format!(
            "{HEADER}\na,d1,0.5,1,CNN,true,3\na,d2,0.6,1,CNN,true,4\nb,d2,0.7,2,CNN,true,8\n"
        );
        let exps = Experiments::from_records(read_runs(&text, RunFormat::Csv).unwrap()).unwrap();
        assert_eq!(exps.dataset_ids().collect::<Vec<_>>(), vec!["d1", "d2"]);
        assert_eq!(
            exps.get("d2")
                .unwrap()
                .context(ResourceKind::Energy)
                .unwrap()
                .r_max(),
            8.0
        );
        assert!(exps.single().is_err());
    }

    #[test]
    fn json_accepts_wrapped_records() {
        let text = r#"{"records": [{"model_id": "a", "dataset_id": "d", "performance": 0.5,
            "params_millions": null, "arch_class": "CNN", "efficient": true, "time_s": 12.5}]}"#;
        let recs = read_runs(text, RunFormat::Json).unwrap();
        assert_eq!(recs[0].resource(ResourceKind::Time), Some(12.5));
        assert_eq!(recs[0].tags().params_millions, None);
    }
}
