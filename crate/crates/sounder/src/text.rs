//! Human-readable dump of capture and calibration files.
//!
//! ```text
//! MMWCAP01-TEXT
//! {"config":...,"grid":...,"meta":...}
//! <tx_index> <rx_index> <tone_index> <re> <im>
//! ...
//! ```
//!
//! Floats are printed in Rust's shortest round-trip form, so dump and parse
//! reproduce the binary file bit for bit.

use std::fmt::Write as _;

use mmw_core::{CalibrationProfile, MeasurementCapture};
use num_complex::Complex32;

use crate::error::{Result, SounderError};
use crate::format::{file_error, CalibrationHeader, CaptureHeader};

pub const CAPTURE_TEXT_TAG: &str = "MMWCAP01-TEXT";
pub const CALIBRATION_TEXT_TAG: &str = "MMWCAL01-TEXT";

pub fn capture_to_text(c: &MeasurementCapture) -> Result<String> {
    let header = CaptureHeader {
        config: c.config().clone(),
        grid: c.grid().clone(),
        meta: c.meta().clone(),
    };
    let (ntx, nrx, nt) = c.dims();
    let mut out = String::with_capacity(64 + c.tensor().len() * 24);
    out.push_str(CAPTURE_TEXT_TAG);
    out.push('\n');
    out.push_str(&serde_json::to_string(&header).map_err(|e| SounderError::Format(e.to_string()))?);
    out.push('\n');
    for t in 0..ntx {
        for r in 0..nrx {
            for (k, v) in c.response(t, r).iter().enumerate() {
                let _ = writeln!(out, "{t} {r} {k} {:?} {:?}", v.re, v.im);
            }
        }
    }
    debug_assert_eq!(out.lines().count(), 2 + ntx * nrx * nt);
    Ok(out)
}

pub fn calibration_to_text(cal: &CalibrationProfile) -> Result<String> {
    let mut out = String::new();
    out.push_str(CALIBRATION_TEXT_TAG);
    out.push('\n');
    let header = CalibrationHeader { num_tones: cal.len() };
    out.push_str(&serde_json::to_string(&header).map_err(|e| SounderError::Format(e.to_string()))?);
    out.push('\n');
    for (k, v) in cal.response().iter().enumerate() {
        let _ = writeln!(out, "{k} {:?} {:?}", v.re, v.im);
    }
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| SounderError::Dimension(format!("text dump ends before {what}")))
    }
}

fn parse_value(line_no: usize, field: &str) -> Result<f32> {
    field
        .parse::<f32>()
        .map_err(|_| SounderError::Format(format!("line {line_no}: bad number {field:?}")))
}

fn parse_index(line_no: usize, field: Option<&str>, expected: usize) -> Result<()> {
    match field.map(str::parse::<usize>) {
        Some(Ok(i)) if i == expected => Ok(()),
        Some(Ok(i)) => Err(SounderError::Dimension(format!(
            "line {line_no}: index {i} where {expected} was expected"
        ))),
        _ => Err(SounderError::Format(format!("line {line_no}: missing or bad index"))),
    }
}

/// Parses one data row: `indices.len()` index columns, then re and im.
fn parse_row(lines: &mut Lines<'_>, indices: &[usize]) -> Result<Complex32> {
    let (no, line) = lines.next("the declared number of values")?;
    let mut fields = line.split_ascii_whitespace();
    for &i in indices {
        parse_index(no, fields.next(), i)?;
    }
    let re = parse_value(no, fields.next().unwrap_or(""))?;
    let im = parse_value(no, fields.next().unwrap_or(""))?;
    if fields.next().is_some() {
        return Err(SounderError::Format(format!("line {no}: trailing fields")));
    }
    if !re.is_finite() || !im.is_finite() {
        return Err(SounderError::Data(format!("line {no}: non-finite value")));
    }
    Ok(Complex32::new(re, im))
}

fn open<'a>(text: &'a str, tag: &str) -> Result<(Lines<'a>, &'a str)> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, first) = lines.next("the tag line")?;
    if first.trim_end() != tag {
        return Err(SounderError::Format(format!("expected tag line {tag:?}")));
    }
    let (_, json) = lines.next("the metadata line")?;
    Ok((lines, json))
}

fn finish(mut lines: Lines<'_>) -> Result<()> {
    match lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        Some((i, _)) => Err(SounderError::Dimension(format!(
            "line {}: more values than the header declares",
            i + 1
        ))),
        None => Ok(()),
    }
}

pub fn capture_from_text(text: &str) -> Result<MeasurementCapture> {
    let (mut lines, json) = open(text, CAPTURE_TEXT_TAG)?;
    let header: CaptureHeader =
        serde_json::from_str(json).map_err(|e| SounderError::Format(format!("metadata: {e}")))?;
    header.config.validate().map_err(file_error)?;
    let (ntx, nrx, nt) = (header.grid.num_tx(), header.grid.num_rx(), header.config.num_tones);
    let mut h = Vec::with_capacity(header.num_values());
    for t in 0..ntx {
        for r in 0..nrx {
            for k in 0..nt {
                h.push(parse_row(&mut lines, &[t, r, k])?);
            }
        }
    }
    finish(lines)?;
    MeasurementCapture::new(header.config, header.grid, h, header.meta).map_err(file_error)
}

pub fn calibration_from_text(text: &str) -> Result<CalibrationProfile> {
    let (mut lines, json) = open(text, CALIBRATION_TEXT_TAG)?;
    let header: CalibrationHeader =
        serde_json::from_str(json).map_err(|e| SounderError::Format(format!("metadata: {e}")))?;
    let h = (0..header.num_tones)
        .map(|k| parse_row(&mut lines, &[k]))
        .collect::<Result<Vec<_>>>()?;
    finish(lines)?;
    CalibrationProfile::new(h).map_err(file_error)
}
