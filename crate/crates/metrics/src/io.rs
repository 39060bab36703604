//! Metrics persistence: fixed-order CSV and JSON.
//!
//! Floats are written with Rust's shortest-round-trip formatting, so
//! export → import → export is byte-identical.

use std::io::{Read, Write};

use crate::error::MetricsError;
use crate::sample::MetricsSample;

pub const CSV_HEADER: [&str; 10] = [
    "fn",
    "window_start_ms",
    "conc_instances",
    "invocations",
    "exec_mean_ms",
    "exec_p50_ms",
    "exec_p95_ms",
    "mem_usage_mib",
    "alloc_mib",
    "fn_concurrency",
];

pub fn write_csv<W: Write>(samples: &[MetricsSample], writer: W) -> Result<(), MetricsError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER)?;
    for s in samples {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.write_record([
            s.function.clone(),
            s.window_start_ms.to_string(),
            s.concurrent_instances.to_string(),
            s.invocations.to_string(),
            opt(s.exec_mean_ms),
            opt(s.exec_p50_ms),
            opt(s.exec_p95_ms),
            s.memory_usage_mib.to_string(),
            s.allocated_memory_mib.to_string(),
            s.function_concurrency.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<MetricsSample>, MetricsError> {
    let mut input = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    for row in input.records() {
        let row = row?;
        let field = |i: usize| -> Result<&str, MetricsError> {
            row.get(i).ok_or_else(|| MetricsError::MalformedRow(format!("{row:?}")))
        };
        let parse = |i: usize| -> Result<f64, MetricsError> {
            field(i)?.parse().map_err(|_| MetricsError::MalformedRow(format!("{row:?}")))
        };
        let parse_opt = |i: usize| -> Result<Option<f64>, MetricsError> {
            let raw = field(i)?;
            if raw.is_empty() { Ok(None) } else { Ok(Some(parse(i)?)) }
        };
        samples.push(MetricsSample {
            function: field(0)?.to_string(),
            window_start_ms: parse(1)?,
            concurrent_instances: parse(2)? as u32,
            invocations: parse(3)? as u64,
            exec_mean_ms: parse_opt(4)?,
            exec_p50_ms: parse_opt(5)?,
            exec_p95_ms: parse_opt(6)?,
            memory_usage_mib: parse(7)?,
            allocated_memory_mib: parse(8)? as u32,
            function_concurrency: parse(9)? as u32,
        });
    }
    Ok(samples)
}

pub fn write_json<W: Write>(samples: &[MetricsSample], writer: W) -> Result<(), MetricsError> {
    serde_json::to_writer_pretty(writer, samples)?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<Vec<MetricsSample>, MetricsError> {
    Ok(serde_json::from_reader(reader)?)
}
