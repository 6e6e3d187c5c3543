//! Impulse-response CSV import/export.
//!
//! Format: header `time_s,response_c_per_j`, one sample per line, uniform
//! timestamps starting at 0. LF or CRLF line endings.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Scalar};
use crate::thermal::ImpulseResponse;

pub const IMPULSE_CSV_HEADER: &str = "time_s,response_c_per_j";

/// Maximum relative jitter tolerated between consecutive timestamps.
const DT_JITTER: f64 = 1e-3;

pub fn load_impulse_csv<T: Scalar>(path: &Path) -> Result<ImpulseResponse<T>> {
    let text = fs::read_to_string(path)?;
    parse_impulse_csv(&text, &path.display().to_string())
}

pub fn parse_impulse_csv<T: Scalar>(text: &str, origin: &str) -> Result<ImpulseResponse<T>> {
    let err = |line: usize, msg: String| Error::Csv {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    if header.trim() != IMPULSE_CSV_HEADER {
        return Err(err(
            1,
            format!("expected header `{IMPULSE_CSV_HEADER}`, got `{}`", header.trim()),
        ));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .ok_or_else(|| err(line_no, "missing time_s field".into()))?
            .trim()
            .parse()
            .map_err(|e| err(line_no, format!("bad time_s: {e}")))?;
        let h: f64 = fields
            .next()
            .ok_or_else(|| err(line_no, "missing response_c_per_j field".into()))?
            .trim()
            .parse()
            .map_err(|e| err(line_no, format!("bad response_c_per_j: {e}")))?;
        if fields.next().is_some() {
            return Err(err(line_no, "expected exactly two fields".into()));
        }
        times.push(t);
        samples.push(h);
    }
    if times.len() < 2 {
        return Err(err(times.len() + 1, "need at least two samples".into()));
    }
    if times[0].abs() > 1e-12 {
        return Err(err(2, format!("first timestamp must be 0, got {}", times[0])));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 {
        return Err(err(3, "timestamps must increase".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if ((step - dt) / dt).abs() > DT_JITTER {
            return Err(err(
                i + 3,
                format!("non-uniform grid: step {step} s vs expected {dt} s"),
            ));
        }
    }
    ImpulseResponse::tabulated(cast::<T>(dt), samples.into_iter().map(cast::<T>).collect())
}

/// Write a response as CSV; parametric responses must be tabulated first.
pub fn write_impulse_csv<T: Scalar>(resp: &ImpulseResponse<T>, path: &Path) -> Result<()> {
    let ImpulseResponse::Tabulated { dt_s, samples } = resp else {
        return Err(Error::InvalidParameter {
            name: "resp",
            reason: "tabulate the response before exporting it".into(),
        });
    };
    let mut out = String::with_capacity(samples.len() * 24);
    out.push_str(IMPULSE_CSV_HEADER);
    out.push('\n');
    for (k, &h) in samples.iter().enumerate() {
        let t = to_f64(*dt_s) * k as f64;
        out.push_str(&format!("{},{}\n", t, to_f64(h)));
    }
    fs::write(path, out)?;
    Ok(())
}
