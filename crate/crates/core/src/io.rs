//! File formats: dense CSV and binary matrices, 8-bit PGM images, binary
//! snapshot streams, and the JSON problem descriptor.
//!
//! Floats are written with Rust's shortest round-trip formatting (`{}`), so
//! identical values always produce identical bytes and parse back exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use faer::Mat;

use crate::error::{Error, Result};
use crate::operators::{AffineSubspace, LinearMap};
use crate::problem::{AffineQuadraticProblem, Lip};

/// Provenance written at the top of every text output.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OutputHeader {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl OutputHeader {
    pub fn new(config_hash: impl Into<String>, seed: Option<u64>) -> Self {
        OutputHeader {
            tool: "apgkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// Comment lines, each starting with `prefix` and ending in `\n`.
    pub fn comment_lines(&self, prefix: &str) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        format!(
            "{prefix} {} {}\n{prefix} config-hash: {}\n{prefix} seed: {seed}\n",
            self.tool, self.version, self.config_hash
        )
    }
}

/// A dense row-major matrix as stored in files.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseData {
    pub fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    pub fn from_mat(m: &Mat<f64>) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        DenseData { rows, cols, data }
    }
}

/// Writes a matrix as CSV, one row per line, after optional comment lines.
pub fn write_matrix_csv<W: Write>(mut w: W, m: &DenseData, header: Option<&OutputHeader>) -> Result<()> {
    if let Some(h) = header {
        w.write_all(h.comment_lines("#").as_bytes())?;
    }
    for i in 0..m.rows {
        let row = &m.data[i * m.cols..(i + 1) * m.cols];
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a CSV matrix; lines starting with `#` and blank lines are skipped.
pub fn read_matrix_csv<R: Read>(r: R) -> Result<DenseData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let c = rec.len();
        if *cols.get_or_insert(c) != c {
            return Err(Error::Parse(format!("row {} has {c} fields, expected {}", rows + 1, cols.unwrap())));
        }
        for f in rec.iter() {
            data.push(f.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {f:?}")))?);
        }
        rows += 1;
    }
    Ok(DenseData {
        rows,
        cols: cols.unwrap_or(0),
        data,
    })
}

/// Binary layout: `rows: u32 LE`, `cols: u32 LE`, then `rows·cols` f64 LE, row-major.
pub fn write_matrix_bin<W: Write>(mut w: W, m: &DenseData) -> Result<()> {
    let dims = |v: usize| {
        u32::try_from(v).map_err(|_| Error::Parse(format!("dimension {v} does not fit the binary header")))
    };
    w.write_all(&dims(m.rows)?.to_le_bytes())?;
    w.write_all(&dims(m.cols)?.to_le_bytes())?;
    for v in &m.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_bin<R: Read>(mut r: R) -> Result<DenseData> {
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rows = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let cols = u32::from_le_bytes(b4) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 8 {
        return Err(Error::Parse(format!(
            "binary matrix {rows}x{cols} needs {} data bytes, found {}",
            rows * cols * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(DenseData { rows, cols, data })
}

/// Reads CSV or binary by extension (`.bin` is binary, anything else CSV).
pub fn read_matrix(path: &Path) -> Result<DenseData> {
    let f = BufReader::new(fs::File::open(path)?);
    if path.extension().is_some_and(|e| e == "bin") {
        read_matrix_bin(f)
    } else {
        read_matrix_csv(f)
    }
}

/// Reads a vector stored as a single row or a single column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.rows > 1 && m.cols > 1 {
        return Err(Error::Parse(format!(
            "{} holds a {}x{} matrix, expected a vector",
            path.display(),
            m.rows,
            m.cols
        )));
    }
    Ok(m.data)
}

/// Writes a vector as a one-column CSV.
pub fn write_vector_csv<W: Write>(w: W, v: &[f64], header: Option<&OutputHeader>) -> Result<()> {
    let m = DenseData {
        rows: v.len(),
        cols: 1,
        data: v.to_vec(),
    };
    write_matrix_csv(w, &m, header)
}

/// Snapshot stream: per entry `iter: u64 LE`, `len: u32 LE`, `len` f64 LE.
pub fn write_snapshots<W: Write>(mut w: W, snaps: &BTreeMap<usize, Vec<f64>>) -> Result<()> {
    for (k, v) in snaps {
        w.write_all(&(*k as u64).to_le_bytes())?;
        let len = u32::try_from(v.len()).map_err(|_| Error::Parse("snapshot too long".into()))?;
        w.write_all(&len.to_le_bytes())?;
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: Read>(mut r: R) -> Result<BTreeMap<usize, Vec<f64>>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut out = BTreeMap::new();
    let mut rest = &bytes[..];
    let truncated = || Error::Parse("truncated snapshot stream".into());
    while !rest.is_empty() {
        if rest.len() < 12 {
            return Err(truncated());
        }
        let k = u64::from_le_bytes(rest[..8].try_into().expect("8 bytes")) as usize;
        let len = u32::from_le_bytes(rest[8..12].try_into().expect("4 bytes")) as usize;
        rest = &rest[12..];
        if rest.len() < len * 8 {
            return Err(truncated());
        }
        let v = rest[..len * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        rest = &rest[len * 8..];
        out.insert(k, v);
    }
    Ok(out)
}

/// Writes an 8-bit binary PGM (P5). Values are clamped to `[0, 1]` and mapped
/// linearly to `0..=255`. Header comments go between magic and dimensions.
pub fn write_pgm<W: Write>(
    mut w: W,
    width: usize,
    height: usize,
    data: &[f64],
    header: Option<&OutputHeader>,
) -> Result<()> {
    if data.len() != width * height {
        return Err(Error::dim("PGM pixels", width * height, data.len()));
    }
    w.write_all(b"P5\n")?;
    if let Some(h) = header {
        w.write_all(h.comment_lines("#").as_bytes())?;
    }
    write!(w, "{width} {height}\n255\n")?;
    let px: Vec<u8> = data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    w.write_all(&px)?;
    Ok(())
}

/// Reads a grayscale image (PGM or anything the decoder handles) into
/// row-major values in `[0, 1]`. Returns `(width, height, pixels)`.
pub fn read_image(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::ImageReader::open(path)?.with_guessed_format()?.decode()?.into_luma8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
    Ok((w as usize, h as usize, data))
}

/// Source of a vector in a descriptor: a file or inline values.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum VectorRef {
    File { file: PathBuf },
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapDescriptor {
    /// Dense matrix from a CSV or binary file.
    Dense { file: PathBuf },
    /// Rows `indices` of the `total × total` identity.
    RowSampling { total: usize, indices: VectorRef },
    Identity { n: usize },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "representation", rename_all = "kebab-case")]
pub enum SubspaceDescriptor {
    Whole { n: usize },
    Hyperplane { normal: VectorRef, offset: f64 },
    /// `{x : Cx = d}` with orthonormal rows `C`.
    OrthonormalRows { c: PathBuf, d: VectorRef },
    /// `anchor + span(basis)` with orthonormal basis columns.
    Basis { anchor: VectorRef, basis: PathBuf },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum LipDescriptor {
    Value(f64),
    Keyword(String),
}

/// JSON problem descriptor; relative paths resolve against the descriptor's
/// directory.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProblemDescriptor {
    #[serde(rename = "A")]
    pub a: MapDescriptor,
    pub b: VectorRef,
    #[serde(rename = "U")]
    pub u: SubspaceDescriptor,
    pub lip: LipDescriptor,
}

impl ProblemDescriptor {
    pub fn from_path(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path)?;
        let desc: ProblemDescriptor = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((desc, base))
    }

    pub fn build(&self, base: &Path) -> Result<AffineQuadraticProblem> {
        let a = match &self.a {
            MapDescriptor::Dense { file } => LinearMap::dense(read_matrix(&base.join(file))?.to_mat()),
            MapDescriptor::RowSampling { total, indices } => {
                let idx = load_vector(indices, base)?
                    .into_iter()
                    .map(|v| {
                        if v >= 0.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(Error::Parse(format!("bad row index {v}")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                LinearMap::row_sampling(*total, idx)?
            }
            MapDescriptor::Identity { n } => LinearMap::identity(*n),
        };
        let b = load_vector(&self.b, base)?;
        let u = match &self.u {
            SubspaceDescriptor::Whole { n } => AffineSubspace::whole(*n),
            SubspaceDescriptor::Hyperplane { normal, offset } => {
                AffineSubspace::hyperplane(load_vector(normal, base)?, *offset)?
            }
            SubspaceDescriptor::OrthonormalRows { c, d } => AffineSubspace::orthonormal_rows(
                LinearMap::dense(read_matrix(&base.join(c))?.to_mat()),
                load_vector(d, base)?,
            )?,
            SubspaceDescriptor::Basis { anchor, basis } => {
                AffineSubspace::from_basis(load_vector(anchor, base)?, read_matrix(&base.join(basis))?.to_mat())?
            }
        };
        let lip = match &self.lip {
            LipDescriptor::Value(v) => Lip::Value(*v),
            LipDescriptor::Keyword(k) if k == "auto" => Lip::Auto,
            LipDescriptor::Keyword(k) => return Err(Error::Parse(format!("lip must be a number or \"auto\", got {k:?}"))),
        };
        AffineQuadraticProblem::new(a, b, u, lip)
    }
}

fn load_vector(r: &VectorRef, base: &Path) -> Result<Vec<f64>> {
    match r {
        VectorRef::File { file } => read_vector(&base.join(file)),
        VectorRef::Values { values } => Ok(values.clone()),
    }
}

/// Reads and builds a problem from a descriptor file.
pub fn load_problem(path: &Path) -> Result<AffineQuadraticProblem> {
    let (desc, base) = ProblemDescriptor::from_path(path)?;
    desc.build(&base)
}

/// Reads non-comment, non-empty lines.
pub fn read_data_lines<R: Read>(r: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.to_string());
        }
    }
    Ok(out)
}
