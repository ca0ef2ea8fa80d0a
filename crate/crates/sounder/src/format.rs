//! Binary capture and calibration files.
//!
//! Layout: 8 magic bytes, a u32 little-endian byte count, that many bytes of
//! UTF-8 JSON metadata, then the tensor as little-endian f32 (re, im) pairs,
//! tone index fastest, then RX beam, then TX beam.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use mmw_core::{BeamGrid, CalibrationProfile, LocationMeta, MeasurementCapture, SounderConfig};
use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::atomic::write_atomic;
use crate::error::{Result, SounderError};

pub const CAPTURE_MAGIC: [u8; 8] = *b"MMWCAP01";
pub const CALIBRATION_MAGIC: [u8; 8] = *b"MMWCAL01";

/// Metadata documents larger than this are treated as corrupt.
const MAX_HEADER_BYTES: u32 = 16 << 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureHeader {
    pub config: SounderConfig,
    pub grid: BeamGrid,
    pub meta: LocationMeta,
}

impl CaptureHeader {
    pub fn num_values(&self) -> usize {
        self.grid.num_pairs() * self.config.num_tones
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationHeader {
    pub num_tones: usize,
}

/// What a file claims to be, judged by its first bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Capture,
    Calibration,
    CaptureText,
    CalibrationText,
    Unknown,
}

pub fn sniff(path: &Path) -> Result<FileKind> {
    let mut head = Vec::with_capacity(16);
    File::open(path)
        .and_then(|f| f.take(16).read_to_end(&mut head))
        .map_err(|e| SounderError::io(path, e))?;
    Ok(sniff_bytes(&head))
}

pub fn sniff_bytes(head: &[u8]) -> FileKind {
    use crate::text::{CALIBRATION_TEXT_TAG, CAPTURE_TEXT_TAG};
    if head.starts_with(CAPTURE_TEXT_TAG.as_bytes()) {
        FileKind::CaptureText
    } else if head.starts_with(CALIBRATION_TEXT_TAG.as_bytes()) {
        FileKind::CalibrationText
    } else if head.starts_with(&CAPTURE_MAGIC) {
        FileKind::Capture
    } else if head.starts_with(&CALIBRATION_MAGIC) {
        FileKind::Calibration
    } else {
        FileKind::Unknown
    }
}

/// Core validation failures met while decoding a file are reported as file
/// problems, not as configuration mistakes of the caller.
pub(crate) fn file_error(e: mmw_core::Error) -> SounderError {
    match e {
        mmw_core::Error::Dimension(m) => SounderError::Dimension(m),
        mmw_core::Error::NonFinite(what) => SounderError::Data(format!("non-finite value in {what}")),
        other => SounderError::Format(other.to_string()),
    }
}

fn check_finite(values: &[Complex32]) -> Result<()> {
    match values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        Some(i) => Err(SounderError::Data(format!("non-finite tensor value at flat index {i}"))),
        None => Ok(()),
    }
}

fn frame(magic: [u8; 8], header: &impl Serialize, values: &[Complex32]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header).map_err(|e| SounderError::Format(e.to_string()))?;
    let len = u32::try_from(json.len())
        .ok()
        .filter(|&l| l <= MAX_HEADER_BYTES)
        .ok_or_else(|| SounderError::Format("metadata document too large".into()))?;
    let mut out = Vec::with_capacity(12 + json.len() + values.len() * 8);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&json);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

/// Reads magic and metadata; returns the raw JSON bytes.
fn read_frame_head<R: Read>(r: &mut R, magic: [u8; 8], what: &str) -> Result<Vec<u8>> {
    let mut got = [0u8; 8];
    read_exact_or(r, &mut got, || SounderError::Format(format!("file too short for a {what} header")))?;
    if got != magic {
        return Err(SounderError::Format(format!(
            "expected {what} magic {:?}, found {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(&got)
        )));
    }
    let mut len = [0u8; 4];
    read_exact_or(r, &mut len, || SounderError::Format("truncated metadata length".into()))?;
    let len = u32::from_le_bytes(len);
    if len > MAX_HEADER_BYTES {
        return Err(SounderError::Format(format!("metadata length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    read_exact_or(r, &mut json, || SounderError::Format("truncated metadata document".into()))?;
    Ok(json)
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], short: impl FnOnce() -> SounderError) -> Result<()> {
    match r.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Err(short()),
        Err(e) => Err(SounderError::io("<stream>", e)),
    }
}

fn read_payload<R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex32>> {
    let mut bytes = vec![0u8; count * 8];
    read_exact_or(r, &mut bytes, || {
        SounderError::Dimension(format!("payload shorter than the {count} values the header declares"))
    })?;
    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => {}
        Ok(_) => {
            return Err(SounderError::Dimension(format!(
                "payload longer than the {count} values the header declares"
            )))
        }
        Err(e) => return Err(SounderError::io("<stream>", e)),
    }
    let values: Vec<Complex32> = bytes
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect();
    check_finite(&values)?;
    Ok(values)
}

fn parse_json<'a, T: Deserialize<'a>>(json: &'a [u8]) -> Result<T> {
    serde_json::from_slice(json).map_err(|e| SounderError::Format(format!("metadata: {e}")))
}

/// Serializes raw parts, validating them first so nothing is produced for an
/// invalid tensor.
pub fn encode_capture_parts(
    config: &SounderConfig,
    grid: &BeamGrid,
    meta: &LocationMeta,
    tensor: &[Complex32],
) -> Result<Vec<u8>> {
    let header = CaptureHeader {
        config: config.clone(),
        grid: grid.clone(),
        meta: meta.clone(),
    };
    if tensor.len() != header.num_values() {
        return Err(SounderError::Dimension(format!(
            "tensor has {} values, grid and config need {}",
            tensor.len(),
            header.num_values()
        )));
    }
    check_finite(tensor)?;
    frame(CAPTURE_MAGIC, &header, tensor)
}

pub fn encode_capture(c: &MeasurementCapture) -> Result<Vec<u8>> {
    encode_capture_parts(c.config(), c.grid(), c.meta(), c.tensor())
}

pub fn read_capture<R: Read>(mut r: R) -> Result<MeasurementCapture> {
    let json = read_frame_head(&mut r, CAPTURE_MAGIC, "capture")?;
    let header: CaptureHeader = parse_json(&json)?;
    header.config.validate().map_err(file_error)?;
    let values = read_payload(&mut r, header.num_values())?;
    MeasurementCapture::new(header.config, header.grid, values, header.meta).map_err(file_error)
}

pub fn write_capture<W: Write>(mut w: W, c: &MeasurementCapture) -> Result<()> {
    let bytes = encode_capture(c)?;
    w.write_all(&bytes).map_err(|e| SounderError::io("<stream>", e))
}

pub fn load_capture(path: &Path) -> Result<MeasurementCapture> {
    let f = File::open(path).map_err(|e| SounderError::io(path, e))?;
    read_capture(BufReader::new(f)).map_err(|e| with_path(e, path))
}

pub fn save_capture(path: &Path, c: &MeasurementCapture) -> Result<()> {
    write_atomic(path, &encode_capture(c)?)
}

/// Writes raw parts; a NaN or a size mismatch is reported before the file is
/// touched.
pub fn save_capture_parts(
    path: &Path,
    config: &SounderConfig,
    grid: &BeamGrid,
    meta: &LocationMeta,
    tensor: &[Complex32],
) -> Result<()> {
    write_atomic(path, &encode_capture_parts(config, grid, meta, tensor)?)
}

pub fn encode_calibration(cal: &CalibrationProfile) -> Result<Vec<u8>> {
    check_finite(cal.response())?;
    frame(CALIBRATION_MAGIC, &CalibrationHeader { num_tones: cal.len() }, cal.response())
}

pub fn read_calibration<R: Read>(mut r: R) -> Result<CalibrationProfile> {
    let json = read_frame_head(&mut r, CALIBRATION_MAGIC, "calibration")?;
    let header: CalibrationHeader = parse_json(&json)?;
    let values = read_payload(&mut r, header.num_tones)?;
    CalibrationProfile::new(values).map_err(file_error)
}

pub fn load_calibration(path: &Path) -> Result<CalibrationProfile> {
    let f = File::open(path).map_err(|e| SounderError::io(path, e))?;
    read_calibration(BufReader::new(f)).map_err(|e| with_path(e, path))
}

pub fn save_calibration(path: &Path, cal: &CalibrationProfile) -> Result<()> {
    write_atomic(path, &encode_calibration(cal)?)
}

fn with_path(e: SounderError, path: &Path) -> SounderError {
    let p = path.display();
    match e {
        SounderError::Format(m) => SounderError::Format(format!("{p}: {m}")),
        SounderError::Dimension(m) => SounderError::Dimension(format!("{p}: {m}")),
        SounderError::Data(m) => SounderError::Data(format!("{p}: {m}")),
        SounderError::Io { source, .. } => SounderError::io(path, source),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmw_core::Scenario;

    fn tiny() -> MeasurementCapture {
        let cfg = SounderConfig {
            num_tones: 2,
            ..SounderConfig::default()
        };
        let grid = BeamGrid::from_spans((0.0, 0.0), (0.0, 0.0)).unwrap();
        let h = vec![Complex32::new(1.5, -0.25), Complex32::new(-0.0, 3.0e-30)];
        MeasurementCapture::new(cfg, grid, h, LocationMeta::new("rx01", 42.0, Scenario::NLoS)).unwrap()
    }

    #[test]
    fn minimal_capture_round_trips() {
        let c = tiny();
        let bytes = encode_capture(&c).unwrap();
        assert_eq!(&bytes[..8], b"MMWCAP01");
        let back = read_capture(&bytes[..]).unwrap();
        assert_eq!(back.dims(), (1, 1, 2));
        assert_eq!(back, c);
        assert_eq!(back.tensor()[1].re.to_bits(), (-0.0f32).to_bits());
    }

    #[test]
    fn header_problems_are_format_errors() {
        let bytes = encode_capture(&tiny()).unwrap();
        let mut bad = bytes.clone();
        bad[3] = b'X';
        assert!(matches!(read_capture(&bad[..]), Err(SounderError::Format(_))));
        assert!(matches!(read_capture(&bytes[..10]), Err(SounderError::Format(_))));
        let mut garbled = bytes.clone();
        garbled[12] = b'#';
        assert!(matches!(read_capture(&garbled[..]), Err(SounderError::Format(_))));
        // a calibration file is not a capture
        let cal = encode_calibration(&CalibrationProfile::unit(2)).unwrap();
        assert!(matches!(read_capture(&cal[..]), Err(SounderError::Format(_))));
    }

    #[test]
    fn payload_size_mismatch_is_dimension_error() {
        let bytes = encode_capture(&tiny()).unwrap();
        let short = &bytes[..bytes.len() - 8];
        assert!(matches!(read_capture(short), Err(SounderError::Dimension(_))));
        let mut long = bytes.clone();
        long.extend_from_slice(&[0; 8]);
        assert!(matches!(read_capture(&long[..]), Err(SounderError::Dimension(_))));
    }

    #[test]
    fn nan_payload_is_data_error() {
        let mut bytes = encode_capture(&tiny()).unwrap();
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(read_capture(&bytes[..]), Err(SounderError::Data(_))));
    }

    #[test]
    fn nan_rejected_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mmw");
        let c = tiny();
        let mut h = c.tensor().to_vec();
        h[0].im = f32::NAN;
        let err = save_capture_parts(&path, c.config(), c.grid(), c.meta(), &h).unwrap_err();
        assert!(matches!(err, SounderError::Data(_)));
        assert!(!path.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn calibration_round_trips() {
        let cal = CalibrationProfile::new(vec![Complex32::new(0.5, 0.5), Complex32::new(-1.0, 2.0)]).unwrap();
        let back = read_calibration(&encode_calibration(&cal).unwrap()[..]).unwrap();
        assert_eq!(back, cal);
    }
}
