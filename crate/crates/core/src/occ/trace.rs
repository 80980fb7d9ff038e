//! Per-frame LED-state traces as CSV.
//!
//! ```text
//! time,beacon_id,s1,s2[,bit]
//! 0.016667,3,1,0,1
//! ```
//!
//! The optional `bit` column carries the transmitted bit for BER reporting.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use super::s2psk::{decode_frame, S2pskFrameSample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub beacon_id: u32,
    pub sample: S2pskFrameSample,
    pub truth: Option<u8>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn malformed(line: u64, message: impl Into<String>) -> TraceError {
    TraceError::Malformed { line, message: message.into() }
}

fn parse_state(field: &str, name: &str, line: u64) -> Result<u8, TraceError> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(malformed(line, format!("{name} must be 0 or 1, got `{other}`"))),
    }
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["time", "beacon_id", "s1", "s2"];
    if headers.len() < 4 || headers.iter().take(4).ne(expected.iter().copied()) {
        return Err(malformed(1, "header must start with time,beacon_id,s1,s2"));
    }
    let has_truth = headers.get(4) == Some("bit");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let want = if has_truth { 5 } else { 4 };
        if rec.len() != want {
            return Err(malformed(line, format!("expected {want} fields, got {}", rec.len())));
        }
        let time: f64 = rec[0]
            .parse()
            .map_err(|_| malformed(line, format!("bad time `{}`", &rec[0])))?;
        let beacon_id: u32 = rec[1]
            .parse()
            .map_err(|_| malformed(line, format!("bad beacon id `{}`", &rec[1])))?;
        let s1 = parse_state(&rec[2], "s1", line)?;
        let s2 = parse_state(&rec[3], "s2", line)?;
        let truth = if has_truth { Some(parse_state(&rec[4], "bit", line)?) } else { None };
        out.push(TraceRecord {
            time,
            beacon_id,
            sample: S2pskFrameSample { s1, s2, sample_time: time },
            truth,
        });
    }
    Ok(out)
}

pub fn write_trace<W: Write>(writer: W, records: &[TraceRecord]) -> Result<(), TraceError> {
    let with_truth = records.iter().any(|r| r.truth.is_some());
    let mut w = csv::Writer::from_writer(writer);
    if with_truth {
        w.write_record(["time", "beacon_id", "s1", "s2", "bit"])?;
    } else {
        w.write_record(["time", "beacon_id", "s1", "s2"])?;
    }
    for r in records {
        let mut row = vec![
            format!("{:.6}", r.time),
            r.beacon_id.to_string(),
            r.sample.s1.to_string(),
            r.sample.s2.to_string(),
        ];
        if with_truth {
            row.push(r.truth.map(|b| b.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Decoded bit stream of one beacon.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodedStream {
    pub bits: Vec<u8>,
    pub truth: Vec<u8>,
}

impl DecodedStream {
    /// Empirical bit error rate, when every record carried a truth bit.
    pub fn ber(&self) -> Option<f64> {
        if self.truth.is_empty() || self.truth.len() != self.bits.len() {
            return None;
        }
        let errors = self.bits.iter().zip(&self.truth).filter(|(a, b)| a != b).count();
        Some(errors as f64 / self.bits.len() as f64)
    }
}

/// XOR-demodulates every record, grouped by beacon in time order.
pub fn decode_trace(records: &[TraceRecord]) -> BTreeMap<u32, DecodedStream> {
    let mut sorted: Vec<&TraceRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.beacon_id.cmp(&b.beacon_id).then(a.time.total_cmp(&b.time)));
    let mut out: BTreeMap<u32, DecodedStream> = BTreeMap::new();
    for r in sorted {
        let entry = out.entry(r.beacon_id).or_default();
        entry.bits.push(decode_frame(&r.sample));
        if let Some(t) = r.truth {
            entry.truth.push(t);
        }
    }
    out
}
