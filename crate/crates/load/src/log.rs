//! The per-request log and its CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestStatus {
    Ok,
    Throttled,
    Timeout,
    /// Transport-level failure (HTTP backend only); counted as a failed
    /// request, never aborting the run.
    Error,
}

impl fmt::Display for RequestStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RequestStatus::Ok => "ok",
            RequestStatus::Throttled => "throttled",
            RequestStatus::Timeout => "timeout",
            RequestStatus::Error => "error",
        })
    }
}

impl FromStr for RequestStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ok" => Ok(RequestStatus::Ok),
            "throttled" => Ok(RequestStatus::Throttled),
            "timeout" => Ok(RequestStatus::Timeout),
            "error" => Ok(RequestStatus::Error),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// One request as a VU saw it.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    /// Send time in ms from the start of the schedule.
    pub ts_ms: f64,
    pub status: RequestStatus,
    /// Service time; present only for ok requests.
    pub exec_ms: Option<f64>,
    pub total_ms: f64,
    pub cold: bool,
    pub instance: Option<u64>,
}

/// Every request of one load run, ordered by send time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RequestLog {
    records: Vec<RequestRecord>,
}

impl RequestLog {
    /// Build a log from records in any order; they are linearized by send
    /// timestamp (ties keep their append order).
    pub fn new(mut records: Vec<RequestRecord>) -> Self {
        records.sort_by(|a, b| a.ts_ms.partial_cmp(&b.ts_ms).expect("finite timestamps"));
        RequestLog { records }
    }

    pub fn records(&self) -> &[RequestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records sent within `[t0_ms, t1_ms)`.
    pub fn slice(&self, t0_ms: f64, t1_ms: f64) -> &[RequestRecord] {
        let lo = self.records.partition_point(|r| r.ts_ms < t0_ms);
        let hi = self.records.partition_point(|r| r.ts_ms < t1_ms);
        &self.records[lo..hi]
    }

    /// Write as CSV: `ts_ms,status,exec_ms,total_ms,cold,instance`.
    /// Optional fields serialize as empty cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LoadError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ts_ms", "status", "exec_ms", "total_ms", "cold", "instance"])?;
        for r in &self.records {
            w.write_record([
                format!("{:.3}", r.ts_ms),
                r.status.to_string(),
                r.exec_ms.map(|v| format!("{v:.3}")).unwrap_or_default(),
                format!("{:.3}", r.total_ms),
                if r.cold { "1" } else { "0" }.to_string(),
                r.instance.map(|i| i.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(LoadError::Io)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, LoadError> {
        let mut reader = csv::Reader::from_reader(input);
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row?;
            let field = |i: usize| row.get(i).unwrap_or_default();
            let bad = |what: &str| LoadError::MalformedLog(format!("{what} in {row:?}"));
            records.push(RequestRecord {
                ts_ms: field(0).parse().map_err(|_| bad("ts_ms"))?,
                status: field(1).parse().map_err(|_| bad("status"))?,
                exec_ms: match field(2) {
                    "" => None,
                    v => Some(v.parse().map_err(|_| bad("exec_ms"))?),
                },
                total_ms: field(3).parse().map_err(|_| bad("total_ms"))?,
                cold: match field(4) {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad("cold")),
                },
                instance: match field(5) {
                    "" => None,
                    v => Some(v.parse().map_err(|_| bad("instance"))?),
                },
            });
        }
        Ok(RequestLog::new(records))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(ts: f64, exec: f64) -> RequestRecord {
        RequestRecord {
            ts_ms: ts,
            status: RequestStatus::Ok,
            exec_ms: Some(exec),
            total_ms: exec,
            cold: false,
            instance: Some(1),
        }
    }

    #[test]
    fn records_are_linearized_by_send_time() {
        let log = RequestLog::new(vec![ok(30.0, 1.0), ok(10.0, 2.0), ok(20.0, 3.0)]);
        let times: Vec<f64> = log.records().iter().map(|r| r.ts_ms).collect();
        assert_eq!(times, vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn slice_selects_by_send_time_window() {
        let log = RequestLog::new((0..10).map(|i| ok(i as f64 * 100.0, 1.0)).collect());
        let mid = log.slice(200.0, 500.0);
        assert_eq!(mid.len(), 3);
        assert_eq!(mid[0].ts_ms, 200.0);
        assert_eq!(mid.last().unwrap().ts_ms, 400.0);
    }

    #[test]
    fn csv_round_trip_preserves_every_field() {
        let log = RequestLog::new(vec![
            ok(0.0, 101.25),
            RequestRecord {
                ts_ms: 50.5,
                status: RequestStatus::Throttled,
                exec_ms: None,
                total_ms: 0.0,
                cold: false,
                instance: None,
            },
            RequestRecord {
                ts_ms: 99.125,
                status: RequestStatus::Timeout,
                exec_ms: None,
                total_ms: 30_000.0,
                cold: true,
                instance: Some(7),
            },
        ]);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = RequestLog::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn empty_log_exports_header_only() {
        let mut buf = Vec::new();
        RequestLog::default().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "ts_ms,status,exec_ms,total_ms,cold,instance\n");
        assert!(RequestLog::read_csv(text.as_bytes()).unwrap().is_empty());
    }
}
