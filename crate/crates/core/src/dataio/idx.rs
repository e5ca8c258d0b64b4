//! IDX container: big-endian magic and dimensions followed by raw `u8` data.

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};

const MAGIC_IMAGES: u32 = 0x0000_0803;
const MAGIC_LABELS: u32 = 0x0000_0801;
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, PartialEq)]
pub enum IdxData {
    /// One row per image, pixels divided by 255.
    Images {
        rows: usize,
        cols: usize,
        data: Array2<f64>,
    },
    Labels(Vec<u8>),
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::parse(bytes.len(), "truncated header"))
}

fn payload(bytes: &[u8], start: usize, len: usize) -> Result<&[u8]> {
    let end = start
        .checked_add(len)
        .ok_or_else(|| Error::parse(start, "dimensions overflow"))?;
    if bytes.len() < end {
        return Err(Error::parse(
            bytes.len(),
            format!("truncated payload: expected {len} bytes after offset {start}"),
        ));
    }
    if bytes.len() > end {
        return Err(Error::parse(
            end,
            format!("{} trailing bytes after declared dimensions", bytes.len() - end),
        ));
    }
    Ok(&bytes[start..end])
}

/// Parses an IDX images or labels file; gzip input is detected by its magic.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    if bytes.starts_with(&GZIP_MAGIC) {
        let mut raw = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut raw)
            .map_err(|e| Error::parse(0, format!("gzip: {e}")))?;
        return parse_idx(&raw);
    }
    match be_u32(bytes, 0)? {
        MAGIC_IMAGES => {
            let n = be_u32(bytes, 4)? as usize;
            let rows = be_u32(bytes, 8)? as usize;
            let cols = be_u32(bytes, 12)? as usize;
            let pixels = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::parse(8, "dimensions overflow"))?;
            let total = n
                .checked_mul(pixels)
                .ok_or_else(|| Error::parse(4, "dimensions overflow"))?;
            let raw = payload(bytes, 16, total)?;
            let data = Array2::from_shape_vec(
                (n, pixels),
                raw.iter().map(|&p| f64::from(p) / 255.0).collect(),
            )
            .map_err(|e| Error::parse(16, e.to_string()))?;
            Ok(IdxData::Images { rows, cols, data })
        }
        MAGIC_LABELS => {
            let n = be_u32(bytes, 4)? as usize;
            Ok(IdxData::Labels(payload(bytes, 8, n)?.to_vec()))
        }
        m => Err(Error::parse(0, format!("bad magic number 0x{m:08x}"))),
    }
}

/// Serializes images (values in `[0, 1]`) back to IDX, rounding to the
/// nearest `u8` level.
pub fn images_to_idx(images: &Array2<f64>, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if rows * cols != images.ncols() {
        return Err(Error::domain(format!(
            "{rows} x {cols} does not match image width {}",
            images.ncols()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.len());
    for v in [MAGIC_IMAGES, images.nrows() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend(images.iter().map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8));
    Ok(out)
}

pub fn labels_to_idx(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&MAGIC_LABELS.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Locations of the four standard MNIST files.
#[derive(Debug, Clone)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    /// Standard file names in `dir`, each optionally with a `.gz` suffix.
    pub fn in_dir(dir: &Path) -> Result<Self> {
        let find = |stem: &str| -> Result<PathBuf> {
            [stem.to_string(), format!("{stem}.gz")]
                .iter()
                .map(|name| dir.join(name))
                .find(|p| p.is_file())
                .ok_or_else(|| {
                    Error::Config(format!("{stem}[.gz] not found in {}", dir.display()))
                })
        };
        Ok(Self {
            train_images: find("train-images-idx3-ubyte")?,
            train_labels: find("train-labels-idx1-ubyte")?,
            test_images: find("t10k-images-idx3-ubyte")?,
            test_labels: find("t10k-labels-idx1-ubyte")?,
        })
    }
}

fn load_pair(images: &Path, labels: &Path) -> Result<Dataset> {
    let read = |p: &Path| -> Result<IdxData> {
        let bytes = std::fs::read(p)?;
        parse_idx(&bytes).map_err(|e| match e {
            Error::Parse { offset, msg } => Error::Parse {
                offset,
                msg: format!("{}: {msg}", p.display()),
            },
            e => e,
        })
    };
    let data = match read(images)? {
        IdxData::Images { data, .. } => data,
        IdxData::Labels(_) => {
            return Err(Error::parse(0, format!("{} holds labels", images.display())))
        }
    };
    let labels = match read(labels)? {
        IdxData::Labels(l) => l,
        IdxData::Images { .. } => {
            return Err(Error::parse(0, format!("{} holds images", labels.display())))
        }
    };
    Dataset::new(data, labels)
}

/// Loads `(train, test)` from the standard MNIST files in `dir`.
pub fn load_mnist(dir: &Path) -> Result<(Dataset, Dataset)> {
    let f = MnistFiles::in_dir(dir)?;
    Ok((
        load_pair(&f.train_images, &f.train_labels)?,
        load_pair(&f.test_images, &f.test_labels)?,
    ))
}
