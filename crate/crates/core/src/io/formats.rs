//! On-disk formats: binary PGM/PPM images, raw little-endian `f32` dumps
//! with JSON sidecars, calibration JSON and JSON-lines detection files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::{CalibrationRecord, CameraModel};
use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::volume::{BevMap, FeatureVolume, PlanarMap};

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

/// 8-bit binary PGM of a one-channel map with values in `[0, 1]`.
pub fn write_pgm8(path: &Path, map: &PlanarMap) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    bytes.extend(
        map.channel(0)
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    write_file(path, &bytes)
}

/// 16-bit binary PGM of channel 0 of a BEV map; image row 0 is the largest
/// Y index. Values are clamped to `[0, 1]` and scaled by 65535.
pub fn write_bev_pgm16(path: &Path, bev: &BevMap) -> Result<()> {
    let (ny, nx) = bev.dims();
    let mut bytes = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    for row in 0..ny {
        let iy = ny - 1 - row;
        for ix in 0..nx {
            let v = (bev.get(0, iy, ix).clamp(0.0, 1.0) as f64 * 65535.0).round() as u16;
            bytes.extend_from_slice(&v.to_be_bytes());
        }
    }
    write_file(path, &bytes)
}

/// Binary PPM, `rgb` in row-major order.
pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[[u8; 3]]) -> Result<()> {
    if rgb.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "PPM payload has {} pixels, expected {width}x{height}",
            rgb.len()
        )));
    }
    let mut bytes = format!("P6\n{width} {height}\n255\n").into_bytes();
    bytes.extend(rgb.iter().flatten());
    write_file(path, &bytes)
}

/// Decoded binary PNM image.
#[derive(Debug, Clone, PartialEq)]
pub struct Pnm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

/// Reads binary P5 (gray) and P6 (RGB) images with 8- or 16-bit samples.
pub fn read_pnm(path: &Path) -> Result<Pnm> {
    let bytes = read_file(path)?;
    let bad = |msg: &str| Error::Data(format!("{}: {msg}", path.display()));
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| bad("empty file"))?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        _ => return Err(bad("not a binary PGM/PPM")),
    };
    let mut number = || -> Result<usize> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("malformed header"))
    };
    let width = number()?;
    let height = number()?;
    let maxval = number()? as u32;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("unsupported header values"));
    }
    // single whitespace byte separates header from raster
    let start = pos + 1;
    let wide = maxval > 255;
    let n = width * height * channels;
    let need = n * if wide { 2 } else { 1 };
    if bytes.len() < start + need {
        return Err(bad("truncated raster"));
    }
    let raster = &bytes[start..start + need];
    let samples = if wide {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    } else {
        raster.iter().map(|&b| b as u32).collect()
    };
    Ok(Pnm {
        width,
        height,
        channels,
        maxval,
        samples,
    })
}

/// Reads a PGM as a one-channel map scaled to `[0, 1]`.
pub fn read_pgm_map(path: &Path) -> Result<PlanarMap> {
    let img = read_pnm(path)?;
    if img.channels != 1 {
        return Err(Error::Data(format!(
            "{}: expected a grayscale PGM",
            path.display()
        )));
    }
    let scale = img.maxval as f32;
    PlanarMap::new(
        1,
        img.height,
        img.width,
        img.samples.iter().map(|&s| s as f32 / scale).collect(),
    )
}

/// JSON sidecar describing a raw `f32` dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    /// Array shape, outermost first.
    pub dims: Vec<usize>,
    /// Axis names matching `dims`, e.g. `["C", "Y", "X"]`.
    pub layout: Vec<String>,
    pub dtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

pub const RAW_DTYPE: &str = "f32le";

/// Sidecar path for a raw dump: same stem, `.json` extension.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

pub fn write_raw(path: &Path, data: &[f32], sidecar: &RawSidecar) -> Result<()> {
    let expected: usize = sidecar.dims.iter().product();
    if expected != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "raw dump has {} values, sidecar dims {:?}",
            data.len(),
            sidecar.dims
        )));
    }
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_file(path, &bytes)?;
    write_json(&sidecar_path(path), sidecar)
}

pub fn read_raw(path: &Path) -> Result<(Vec<f32>, RawSidecar)> {
    let sidecar: RawSidecar = read_json(&sidecar_path(path))?;
    if sidecar.dtype != RAW_DTYPE {
        return Err(Error::Data(format!(
            "{}: unsupported dtype {}",
            path.display(),
            sidecar.dtype
        )));
    }
    let bytes = read_file(path)?;
    let expected: usize = sidecar.dims.iter().product();
    if bytes.len() != expected * 4 {
        return Err(Error::Data(format!(
            "{}: {} bytes but sidecar dims {:?} need {}",
            path.display(),
            bytes.len(),
            sidecar.dims,
            expected * 4
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((data, sidecar))
}

pub fn write_bev_raw(path: &Path, bev: &BevMap, grid: Option<&GridSpec>) -> Result<()> {
    let (ny, nx) = bev.dims();
    let sidecar = RawSidecar {
        dims: vec![bev.channels(), ny, nx],
        layout: ["C", "Y", "X"].map(String::from).to_vec(),
        dtype: RAW_DTYPE.into(),
        grid: grid.cloned(),
    };
    write_raw(path, bev.data(), &sidecar)
}

pub fn read_bev_raw(path: &Path) -> Result<(BevMap, RawSidecar)> {
    let (data, sidecar) = read_raw(path)?;
    let &[c, ny, nx] = sidecar.dims.as_slice() else {
        return Err(Error::Data(format!(
            "{}: BEV dump must be 3-D (C, Y, X)",
            path.display()
        )));
    };
    Ok((BevMap::from_data(c, ny, nx, data)?, sidecar))
}

pub fn write_volume_raw(
    path: &Path,
    volume: &FeatureVolume,
    grid: Option<&GridSpec>,
) -> Result<()> {
    let (ny, nz, nx) = volume.dims();
    let sidecar = RawSidecar {
        dims: vec![volume.channels(), ny, nz, nx],
        layout: ["C", "Y", "Z", "X"].map(String::from).to_vec(),
        dtype: RAW_DTYPE.into(),
        grid: grid.cloned(),
    };
    write_raw(path, volume.data(), &sidecar)
}

pub fn read_volume_raw(path: &Path) -> Result<FeatureVolume> {
    let (data, sidecar) = read_raw(path)?;
    let &[c, ny, nz, nx] = sidecar.dims.as_slice() else {
        return Err(Error::Data(format!(
            "{}: volume dump must be 4-D (C, Y, Z, X)",
            path.display()
        )));
    };
    FeatureVolume::from_data(c, ny, nz, nx, data)
}

pub fn write_calibration(path: &Path, cameras: &[CameraModel]) -> Result<()> {
    let records: Vec<CalibrationRecord> = cameras.iter().map(CalibrationRecord::from).collect();
    write_json(path, &records)
}

pub fn read_calibration(path: &Path) -> Result<Vec<CameraModel>> {
    let records: Vec<CalibrationRecord> = read_json(path)?;
    records
        .into_iter()
        .map(|r| {
            let name = r.name.clone();
            CameraModel::try_from(r)
                .map_err(|e| Error::Config(format!("{}: camera {name}: {e}", path.display())))
        })
        .collect()
}

/// One line of a detection or ground-truth file; `score` is absent for
/// ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

pub fn write_jsonl(path: &Path, records: &[PointRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::json(path, e))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    write_file(path, &out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<PointRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PointRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn detections_to_records(frame: i64, dets: &[Detection]) -> Vec<PointRecord> {
    dets.iter()
        .map(|d| PointRecord {
            frame,
            x: d.position[0],
            y: d.position[1],
            score: Some(d.score),
        })
        .collect()
}

pub fn points_to_records(frame: i64, points: &[[f64; 2]]) -> Vec<PointRecord> {
    points
        .iter()
        .map(|p| PointRecord {
            frame,
            x: p[0],
            y: p[1],
            score: None,
        })
        .collect()
}

/// Groups records by frame, keeping file order within each frame.
pub fn group_by_frame(records: &[PointRecord]) -> BTreeMap<i64, Vec<PointRecord>> {
    let mut frames: BTreeMap<i64, Vec<PointRecord>> = BTreeMap::new();
    for r in records {
        frames.entry(r.frame).or_default().push(*r);
    }
    frames
}
