//! Binary PGM masks and `re,im` point CSV files.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::geometry::{CompactGridSet, GridSpec};

/// Encodes a square mask as binary PGM, 255 for set pixels.
pub fn encode_pgm(mask: &[bool], resolution: usize) -> Vec<u8> {
    let mut out = format!("P5\n{resolution} {resolution}\n255\n").into_bytes();
    out.extend(mask.iter().map(|&b| if b { 255u8 } else { 0u8 }));
    out
}

/// Decodes a binary PGM; any nonzero sample counts as inside.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>)> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(LabError::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(LabError::Format(format!("expected P5 magic, found {}", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| LabError::Format(format!("bad PGM header field {s}")));
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(LabError::Format(format!("unsupported maxval {maxval}")));
    }
    pos += 1; // single whitespace byte after maxval
    let data = bytes
        .get(pos..pos + w * h)
        .ok_or_else(|| LabError::Format("PGM pixel data shorter than header".into()))?;
    Ok((w, h, data.iter().map(|&b| b != 0).collect()))
}

/// Writes `bytes` to a sibling temp file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| LabError::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(LabError::from)
}

pub fn write_pgm(path: &Path, set: &CompactGridSet) -> Result<()> {
    match set {
        CompactGridSet::Raster { grid, mask } => write_atomic(path, &encode_pgm(mask, grid.resolution)),
        CompactGridSet::Points(_) => Err(LabError::UnsupportedRepresentation("point-cloud")),
    }
}

/// Reads a square PGM onto the given grid geometry.
pub fn read_pgm(path: &Path, center: Complex64, half_width: f64) -> Result<CompactGridSet> {
    let (w, h, mask) = decode_pgm(&fs::read(path)?)?;
    if w != h {
        return Err(LabError::Format(format!("mask must be square, got {w}x{h}")));
    }
    CompactGridSet::from_mask(GridSpec::new(center, half_width, w)?, mask)
}

pub fn encode_points_csv(points: &[Complex64]) -> String {
    let mut s = String::from("re,im\n");
    for p in points {
        s.push_str(&format!("{:?},{:?}\n", p.re, p.im));
    }
    s
}

pub fn decode_points_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("re,im") => {}
        other => return Err(LabError::Format(format!("expected header re,im, found {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut it = line.split(',').map(str::trim);
            let mut next = || {
                it.next()
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| LabError::Format(format!("bad point on data line {}: {line}", i + 1)))
            };
            Ok(Complex64::new(next()?, next()?))
        })
        .collect()
}

pub fn write_points_csv(path: &Path, points: &[Complex64]) -> Result<()> {
    write_atomic(path, encode_points_csv(points).as_bytes())
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Complex64>> {
    decode_points_csv(&fs::read_to_string(path)?)
}
