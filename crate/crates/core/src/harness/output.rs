use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::ResultRow;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 19] = [
    "scenario",
    "learner",
    "T",
    "seed",
    "regret",
    "V_T",
    "D_T",
    "P_T_star",
    "S_T_star",
    "M",
    "G",
    "bound_thm1",
    "bound_thm2",
    "bound_thm3",
    "bound_thm4",
    "bound_thm5",
    "bound_thm8",
    "lemma_failures",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| Error::Serialization {
        path: "<memory>".into(),
        reason: e.to_string(),
    })?;
    String::from_utf8(buf).map_err(|e| Error::Serialization {
        path: "<memory>".into(),
        reason: e.to_string(),
    })
}

pub fn to_json_string(rows: &[ResultRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Serialization {
        path: "<memory>".into(),
        reason: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn emit_results(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv_string(rows),
        OutputFormat::Json => to_json_string(rows),
    }
    .map_err(|e| match e {
        Error::Serialization { reason, .. } => Error::Serialization {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let ser = |reason: String| Error::Serialization {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| ser(e.to_string()))?;
    let header: Vec<String> = r.headers().map_err(|e| ser(e.to_string()))?.iter().map(String::from).collect();
    if header != CSV_COLUMNS {
        return Err(ser(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| ser(e.to_string()))).collect()
}

pub fn read_json(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Serialization {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRow {
        ResultRow {
            scenario: "s".into(),
            learner: "ls".into(),
            horizon: 100,
            seed: 3,
            regret: Some(0.1 + 0.2),
            v_t: Some(0.0),
            d_t: Some(1e-300),
            p_t_star: Some(2.5),
            s_t_star: Some(1.0 / 3.0),
            m: Some(2.0),
            g: Some(2.0),
            bound_thm2: Some(40.0),
            lemma_failures: Some(0),
            ..Default::default()
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(to_csv_string(&[]).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn one_row_gives_two_lines() {
        let s = to_csv_string(&[sample()]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(s.ends_with('\n'));
        assert_eq!(lines[1], "s,ls,100,3,0.30000000000000004,0.0,1e-300,2.5,0.3333333333333333,2.0,2.0,,40.0,,,,,0,");
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![sample(), ResultRow { learner: "gd".into(), ..sample() }];
        let csv_path = dir.path().join("r.csv");
        let json_path = dir.path().join("r.json");
        emit_results(&rows, OutputFormat::Csv, &csv_path).unwrap();
        emit_results(&rows, OutputFormat::Json, &json_path).unwrap();
        assert_eq!(read_csv(&csv_path).unwrap(), rows);
        assert_eq!(read_json(&json_path).unwrap(), rows);
    }

    #[test]
    fn json_field_names_match_columns() {
        let v: serde_json::Value = serde_json::from_str(&to_json_string(&[sample()]).unwrap()).unwrap();
        let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
        let mut want: Vec<&str> = CSV_COLUMNS.to_vec();
        want.sort();
        let mut got: Vec<&str> = keys.iter().map(|s| s.as_str()).collect();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = emit_results(&[], OutputFormat::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
