//! Text formats of the public event-camera dataset.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::camera::CameraGeometry;
use super::pose::{PoseSample, PoseTrack, Quaternion};
use super::{Event, Polarity};
use crate::error::DataError;

/// Parsed event stream with the number of out-of-bounds lines rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedEvents {
    pub events: Vec<Event>,
    pub dropped: usize,
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Io { path: path.to_owned(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>, DataError> {
    File::create(path).map(BufWriter::new).map_err(|source| DataError::Io { path: path.to_owned(), source })
}

fn parse_err(line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, DataError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parse `t x y p` lines. Blank lines and `#` comments are skipped.
pub fn parse_events<R: Read>(reader: R, geometry: &CameraGeometry) -> Result<LoadedEvents, DataError> {
    let mut out = LoadedEvents::default();
    let mut last_t = f64::NEG_INFINITY;
    let mut warned = false;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let t: f64 = field(toks.next(), lineno, "timestamp")?;
        let x: i64 = field(toks.next(), lineno, "x coordinate")?;
        let y: i64 = field(toks.next(), lineno, "y coordinate")?;
        let p: u8 = field(toks.next(), lineno, "polarity")?;
        if toks.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens"));
        }
        if !t.is_finite() {
            return Err(parse_err(lineno, "non-finite timestamp"));
        }
        let polarity = Polarity::from_bit(p).ok_or_else(|| parse_err(lineno, format!("polarity must be 0 or 1, got {p}")))?;
        if x < 0 || y < 0 || x as usize >= geometry.width || y as usize >= geometry.height {
            out.dropped += 1;
            continue;
        }
        if t < last_t && !warned {
            log::warn!("line {lineno}: timestamp {t} precedes {last_t}; stream is not monotone");
            warned = true;
        }
        last_t = last_t.max(t);
        out.events.push(Event::new(t, x as f64, y as f64, polarity));
    }
    if out.dropped > 0 {
        log::warn!("dropped {} out-of-bounds events", out.dropped);
    }
    Ok(out)
}

pub fn load_events(path: &Path, geometry: &CameraGeometry) -> Result<LoadedEvents, DataError> {
    parse_events(open(path)?, geometry)
}

/// Write events as `t x y p` with nanosecond timestamps. Coordinates are
/// rounded to the nearest pixel.
pub fn write_events<W: Write>(mut writer: W, events: &[Event]) -> std::io::Result<()> {
    for e in events {
        writeln!(writer, "{:.9} {} {} {}", e.t, e.x.round() as i64, e.y.round() as i64, e.polarity.to_bit())?;
    }
    writer.flush()
}

/// Read a one-line `fx fy cx cy k1 k2 p1 p2 k3` calibration. The file carries
/// no sensor size, so it is supplied by the caller.
pub fn load_calibration(path: &Path, width: usize, height: usize) -> Result<CameraGeometry, DataError> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|source| DataError::Io { path: path.to_owned(), source })?;
    let (lineno, line) = text
        .lines()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| parse_err(1, "empty calibration file"))?;
    let vals: Vec<f64> =
        line.split_whitespace().map(|t| t.parse().map_err(|_| parse_err(lineno + 1, format!("invalid number `{t}`")))).collect::<Result<_, _>>()?;
    if vals.len() != 9 {
        return Err(parse_err(lineno + 1, format!("expected 9 values, found {}", vals.len())));
    }
    CameraGeometry::new(width, height, vals[0], vals[1], vals[2], vals[3], [vals[4], vals[5], vals[6], vals[7], vals[8]])
}

pub fn write_calibration<W: Write>(mut writer: W, g: &CameraGeometry) -> std::io::Result<()> {
    let [k1, k2, p1, p2, k3] = g.dist;
    writeln!(writer, "{} {} {} {} {} {} {} {} {}", g.fx, g.fy, g.cx, g.cy, k1, k2, p1, p2, k3)?;
    writer.flush()
}

/// Read `t tx ty tz qx qy qz qw` lines. Quaternions are renormalized; a norm
/// off by more than 1e-3 is a parse error.
pub fn load_poses(path: &Path) -> Result<PoseTrack, DataError> {
    let reader = BufReader::new(open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> =
            line.split_whitespace().map(|t| t.parse().map_err(|_| parse_err(lineno, format!("invalid number `{t}`")))).collect::<Result<_, _>>()?;
        if vals.len() != 8 {
            return Err(parse_err(lineno, format!("expected 8 values, found {}", vals.len())));
        }
        let q = Quaternion::new(vals[7], vals[4], vals[5], vals[6]);
        let n = q.norm();
        if (n - 1.0).abs() > 1e-3 {
            return Err(parse_err(lineno, format!("quaternion norm {n} is not unit")));
        }
        samples.push(PoseSample { t: vals[0], rotation: q.normalized(), translation: [vals[1], vals[2], vals[3]] });
    }
    PoseTrack::new(samples)
}

pub fn write_poses<W: Write>(mut writer: W, track: &PoseTrack) -> std::io::Result<()> {
    for s in track.samples() {
        let q = s.rotation;
        let [tx, ty, tz] = s.translation;
        writeln!(writer, "{:.9} {tx:.9} {ty:.9} {tz:.9} {:.12} {:.12} {:.12} {:.12}", s.t, q.x, q.y, q.z, q.w)?;
    }
    writer.flush()
}

/// Write events to a file path.
pub fn save_events(path: &Path, events: &[Event]) -> Result<(), DataError> {
    write_events(create(path)?, events).map_err(|source| DataError::Io { path: path.to_owned(), source })
}

pub fn save_poses(path: &Path, track: &PoseTrack) -> Result<(), DataError> {
    write_poses(create(path)?, track).map_err(|source| DataError::Io { path: path.to_owned(), source })
}

pub fn save_calibration(path: &Path, g: &CameraGeometry) -> Result<(), DataError> {
    write_calibration(create(path)?, g).map_err(|source| DataError::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn davis() -> CameraGeometry {
        CameraGeometry::pinhole(240, 180, 200.0)
    }

    #[test]
    fn parses_documented_line() {
        let got = parse_events("0.003811 96 133 0\n".as_bytes(), &davis()).unwrap();
        assert_eq!(got.events, vec![Event::new(0.003811, 96.0, 133.0, Polarity::Negative)]);
        assert_eq!(got.dropped, 0);
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert_eq!(parse_events("".as_bytes(), &davis()).unwrap(), LoadedEvents::default());
    }

    #[test]
    fn out_of_bounds_is_counted() {
        let got = parse_events("0.1 500 10 1\n0.2 5 10 1\n".as_bytes(), &davis()).unwrap();
        assert_eq!(got.dropped, 1);
        assert_eq!(got.events.len(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_events("0.1 5 10 1\n0.2 five 10 1\n".as_bytes(), &davis()).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 2, .. }), "{err}");
        let err = parse_events("0.1 5 10 3\n".as_bytes(), &davis()).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));
    }

    #[test]
    fn non_monotone_time_is_accepted() {
        let got = parse_events("0.2 1 1 1\n0.1 2 2 0\n".as_bytes(), &davis()).unwrap();
        assert_eq!(got.events.len(), 2);
    }

    #[test]
    fn events_round_trip_byte_identically() {
        let text = "0.003811000 96 133 0\n0.004000001 0 0 1\n1.250000000 239 179 1\n";
        let loaded = parse_events(text.as_bytes(), &davis()).unwrap();
        let mut buf = Vec::new();
        write_events(&mut buf, &loaded.events).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn calibration_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calib.txt");
        let g = CameraGeometry::new(240, 180, 199.1, 198.4, 132.2, 110.8, [-0.36, 0.15, 1e-4, -2e-4, 0.0]).unwrap();
        save_calibration(&path, &g).unwrap();
        assert_eq!(load_calibration(&path, 240, 180).unwrap(), g);
    }
}
