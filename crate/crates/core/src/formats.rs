//! Interchange files: keypoints, descriptors (text or little-endian f32),
//! homographies, and the CSV outputs of matching and evaluation.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so text
//! files reproduce the in-memory values exactly and identical runs produce
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::descriptor::{Descriptor, DescriptorKind, FlipMode, MeanHistograms, DESCRIPTOR_LEN};
use crate::error::{Error, Result};
use crate::evaluation::EvaluationCurve;
use crate::homography::Homography;
use crate::keypoint::Keypoint;
use crate::matching::MatchPair;

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_f64(token: &str, path: &Path, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::parse(path, format!("line {line}: bad number {token:?}")))
}

// ---------------------------------------------------------------- keypoints

/// One `x y scale orientation response` line per keypoint.
pub fn format_keypoints(keypoints: &[Keypoint]) -> String {
    let mut out = String::from("# x y scale orientation response\n");
    for kp in keypoints {
        let _ = writeln!(out, "{} {} {} {} {}", kp.x, kp.y, kp.scale, kp.orientation, kp.response);
    }
    out
}

pub fn parse_keypoints(text: &str, path: &Path) -> Result<Vec<Keypoint>> {
    let mut keypoints = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                format!("line {}: expected 5 fields, got {}", n + 1, fields.len()),
            ));
        }
        let v = fields
            .iter()
            .map(|t| parse_f64(t, path, n + 1))
            .collect::<Result<Vec<_>>>()?;
        if !(v[2] > 0.0) {
            return Err(Error::parse(path, format!("line {}: scale must be positive", n + 1)));
        }
        keypoints.push(Keypoint::new(v[0], v[1], v[2], v[3]).with_response(v[4]));
    }
    Ok(keypoints)
}

pub fn read_keypoints(path: impl AsRef<Path>) -> Result<Vec<Keypoint>> {
    let path = path.as_ref();
    parse_keypoints(&read_text(path)?, path)
}

// -------------------------------------------------------------- descriptors

/// Descriptor plus the keypoint it was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRecord {
    pub keypoint: Keypoint,
    pub descriptor: Descriptor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorFile {
    pub kind: DescriptorKind,
    pub mode: FlipMode,
    pub records: Vec<DescriptorRecord>,
}

const BINARY_TAG: &str = "f32le";

fn kind_tag(kind: DescriptorKind) -> &'static str {
    match kind {
        DescriptorKind::Dci => "DCI",
        DescriptorKind::Hog => "HOG",
    }
}

impl DescriptorFile {
    pub fn descriptors(&self) -> Vec<Descriptor> {
        self.records.iter().map(|r| r.descriptor.clone()).collect()
    }

    fn header(&self) -> String {
        format!(
            "{} {} {} {}",
            kind_tag(self.kind),
            DESCRIPTOR_LEN,
            self.records.len(),
            self.mode
        )
    }

    /// Header `DCI 128 <count> <mode>` (or `HOG ...`), then
    /// `x y scale orientation d1 … d128` per record. Flat patches are stored as zeros.
    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.records {
            let k = &r.keypoint;
            let _ = write!(out, "{} {} {} {}", k.x, k.y, k.scale, k.orientation);
            for v in r.descriptor.values() {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Same header followed by ` f32le`, then per record 132 little-endian f32:
    /// x, y, scale, orientation, d1 … d128.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = format!("{} {BINARY_TAG}\n", self.header()).into_bytes();
        for r in &self.records {
            let k = &r.keypoint;
            for v in [k.x, k.y, k.scale, k.orientation]
                .into_iter()
                .chain(r.descriptor.values().iter().copied())
            {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn parse(bytes: &[u8], path: &Path) -> Result<Self> {
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(path, "missing header line"))?;
        let header = std::str::from_utf8(&bytes[..newline])
            .map_err(|_| Error::parse(path, "header is not UTF-8"))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(Error::parse(path, format!("bad header {header:?}")));
        }
        let kind = match tokens[0] {
            "DCI" => DescriptorKind::Dci,
            "HOG" => DescriptorKind::Hog,
            other => return Err(Error::parse(path, format!("unknown descriptor tag {other:?}"))),
        };
        if tokens[1] != DESCRIPTOR_LEN.to_string() {
            return Err(Error::parse(path, format!("unsupported dimension {}", tokens[1])));
        }
        let count: usize = tokens[2]
            .parse()
            .map_err(|_| Error::parse(path, format!("bad record count {:?}", tokens[2])))?;
        let mode: FlipMode = tokens[3].parse().map_err(|e: String| Error::parse(path, e))?;
        let binary = match tokens.get(4) {
            None => false,
            Some(&BINARY_TAG) if tokens.len() == 5 => true,
            Some(_) => return Err(Error::parse(path, format!("bad header {header:?}"))),
        };
        let body = &bytes[newline + 1..];
        let rows = if binary {
            parse_binary_rows(body, count, path)?
        } else {
            parse_text_rows(body, count, path)?
        };
        let records = rows
            .into_iter()
            .map(|row| {
                Ok(DescriptorRecord {
                    keypoint: Keypoint::new(row[0], row[1], row[2], row[3]),
                    descriptor: Descriptor::from_values(row[4..].to_vec())?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { kind, mode, records })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes, path)
    }
}

const ROW_LEN: usize = 4 + DESCRIPTOR_LEN;

fn parse_text_rows(body: &[u8], count: usize, path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::str::from_utf8(body).map_err(|_| Error::parse(path, "body is not UTF-8"))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let row = line
                .split_whitespace()
                .map(|t| parse_f64(t, path, n + 2))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != ROW_LEN {
                return Err(Error::parse(
                    path,
                    format!("line {}: expected {ROW_LEN} fields, got {}", n + 2, row.len()),
                ));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    if rows.len() != count {
        return Err(Error::parse(path, format!("header says {count} records, found {}", rows.len())));
    }
    Ok(rows)
}

fn parse_binary_rows(body: &[u8], count: usize, path: &Path) -> Result<Vec<Vec<f64>>> {
    if body.len() != count * ROW_LEN * 4 {
        return Err(Error::parse(
            path,
            format!("expected {} bytes of records, found {}", count * ROW_LEN * 4, body.len()),
        ));
    }
    Ok(body
        .chunks_exact(ROW_LEN * 4)
        .map(|row| {
            row.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect()
        })
        .collect())
}

// --------------------------------------------------------------- homography

/// Three lines of three whitespace-separated reals.
pub fn parse_homography(text: &str, path: &Path) -> Result<Homography> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.len() != 3 {
        return Err(Error::parse(path, format!("expected 3 rows, got {}", rows.len())));
    }
    let mut m = [[0.0; 3]; 3];
    for (r, line) in rows.iter().enumerate() {
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(Error::parse(path, format!("row {} needs 3 values", r + 1)));
        }
        for (c, t) in vals.iter().enumerate() {
            m[r][c] = parse_f64(t, path, r + 1)?;
        }
    }
    Homography::new(m).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn read_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    parse_homography(&read_text(path)?, path)
}

pub fn format_homography(h: &Homography) -> String {
    h.matrix()
        .iter()
        .map(|row| format!("{} {} {}\n", row[0], row[1], row[2]))
        .collect()
}

// ---------------------------------------------------------------------- CSV

pub fn format_matches_csv(matches: &[MatchPair]) -> String {
    let mut out = String::from("index_a,index_b,distance,ratio\n");
    for m in matches {
        let _ = writeln!(out, "{},{},{},{}", m.index_a, m.index_b, m.distance, m.distance_ratio);
    }
    out
}

pub fn format_curve_csv(curve: &EvaluationCurve) -> String {
    let mut out = String::from("threshold,recall,one_minus_precision,correct,false\n");
    for s in &curve.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.threshold, s.recall, s.one_minus_precision, s.num_correct, s.num_false
        );
    }
    out
}

pub fn format_stats_csv(stats: &MeanHistograms) -> String {
    let mut out = String::from("bin,hog,holg\n");
    for b in 0..stats.hog.len() {
        let _ = writeln!(out, "{b},{},{}", stats.hog[b], stats.holg[b]);
    }
    out
}
