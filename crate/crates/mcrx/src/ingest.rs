//! Rating-file ingestion.
//!
//! Three flat formats are supported:
//! - `ml100k`: TAB-separated `user item rating timestamp`, ratings 1..5 step 1
//! - `ml1m_10m`: `UserID::MovieID::Rating::Timestamp`, ratings 0.5..5 step 0.5
//! - `csv`: RFC-4180 with header `user_id,item_id,rating,timestamp`; the
//!   rating scale cannot be inferred and must be supplied by the caller

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use mcrx_core::{DatasetError, RatingRecord, RatingScale, RatingsDataset};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: csv header must be `user_id,item_id,rating,timestamp`")]
    BadHeader { path: String },
    #[error("the csv format carries no rating scale; one must be supplied")]
    MissingScale,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingsFormat {
    Ml100k,
    Ml1m10m,
    Csv,
}

impl fmt::Display for RatingsFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatingsFormat::Ml100k => "ml100k",
            RatingsFormat::Ml1m10m => "ml1m_10m",
            RatingsFormat::Csv => "csv",
        })
    }
}

/// Loads a rating file. The scale is fixed by the format for the MovieLens
/// layouts; `csv_scale` is required for (and only consulted by) `csv`.
pub fn load_ratings(
    path: impl AsRef<Path>,
    format: RatingsFormat,
    csv_scale: Option<RatingScale>,
) -> Result<RatingsDataset, IngestError> {
    let path = path.as_ref();
    let (records, scale) = match format {
        RatingsFormat::Ml100k => {
            (parse_delimited(path, "\t")?, RatingScale::one_to_five())
        }
        RatingsFormat::Ml1m10m => {
            (parse_delimited(path, "::")?, RatingScale::half_to_five())
        }
        RatingsFormat::Csv => {
            let scale = csv_scale.ok_or(IngestError::MissingScale)?;
            (parse_csv(path)?, scale)
        }
    };
    Ok(RatingsDataset::from_records(records, scale)?)
}

fn io_error(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io { path: path.display().to_string(), source }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Parse { path: path.display().to_string(), line, message: message.into() }
}

fn parse_fields(
    path: &Path,
    line_no: usize,
    fields: &[&str],
) -> Result<RatingRecord, IngestError> {
    if fields.len() != 4 {
        return Err(parse_error(
            path,
            line_no,
            format!("expected 4 fields, found {}", fields.len()),
        ));
    }
    let user_id: u64 = fields[0]
        .trim()
        .parse()
        .map_err(|_| parse_error(path, line_no, format!("bad user id `{}`", fields[0])))?;
    let item_id: u64 = fields[1]
        .trim()
        .parse()
        .map_err(|_| parse_error(path, line_no, format!("bad item id `{}`", fields[1])))?;
    if user_id == 0 || item_id == 0 {
        return Err(parse_error(path, line_no, "user and item ids start at 1"));
    }
    let rating: f64 = fields[2]
        .trim()
        .parse()
        .map_err(|_| parse_error(path, line_no, format!("bad rating `{}`", fields[2])))?;
    let timestamp: i64 = fields[3].trim().parse().map_err(|_| {
        parse_error(path, line_no, format!("bad timestamp `{}`", fields[3]))
    })?;
    Ok(RatingRecord { user_id, item_id, rating, timestamp })
}

fn parse_delimited(path: &Path, delimiter: &str) -> Result<Vec<RatingRecord>, IngestError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_error(path, e))?;
        let fields: Vec<&str> = line.split(delimiter).collect();
        records.push(parse_fields(path, line_no, &fields)?);
    }
    Ok(records)
}

fn parse_csv(path: &Path) -> Result<Vec<RatingRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_error(path, io),
            other => parse_error(path, 1, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|_| IngestError::BadHeader { path: path.display().to_string() })?;
    let expected = ["user_id", "item_id", "rating", "timestamp"];
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != expected {
        return Err(IngestError::BadHeader { path: path.display().to_string() });
    }
    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        // +1: csv positions point at the record, headers occupy line 1.
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<&str> = record.iter().collect();
        records.push(parse_fields(path, line_no, &fields)?);
    }
    Ok(records)
}
