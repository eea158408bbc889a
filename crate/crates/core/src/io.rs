//! Binary container shared by datasets, trajectories and checkpoints.
//!
//! Layout: one line of JSON (the header), space-padded so that the newline
//! ends at byte `payload_offset - 1`, followed by the arrays listed in the
//! header as little-endian `f64`, row-major, back to back. `payload_offset`
//! is a multiple of 8.
//!
//! ```
//! use smartpde::io::{Container, decode, encode};
//!
//! let mut c = Container::new("example", serde_json::json!({"note": "hi"}));
//! c.push("values", vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
//! let bytes = encode(&c).unwrap();
//! assert_eq!(decode(&bytes, "mem").unwrap(), c);
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::autodiff::Tensor;
use crate::error::{shape_err, Error, Result};
use crate::pde::{Dataset, EllipticSolution, Trajectory1D, Trajectory2D};
use crate::surrogate::{MlpConfig, ModelParams, NormStats};

pub const FORMAT: &str = "smartpde";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ArraySpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub payload_offset: usize,
    pub arrays: Vec<ArraySpec>,
    pub meta: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: String,
    pub meta: Value,
    pub arrays: Vec<(ArraySpec, Vec<f64>)>,
}

impl Container {
    pub fn new(kind: impl Into<String>, meta: Value) -> Self {
        Self { kind: kind.into(), meta, arrays: Vec::new() }
    }

    pub fn push(&mut self, name: &str, shape: Vec<usize>, data: Vec<f64>) -> Result<()> {
        let spec = ArraySpec { name: name.to_string(), shape };
        if spec.len() != data.len() {
            return Err(shape_err(format!("array `{name}` has {} values for shape {:?}", data.len(), spec.shape)));
        }
        self.arrays.push((spec, data));
        Ok(())
    }

    pub fn array(&self, name: &str) -> Option<&(ArraySpec, Vec<f64>)> {
        self.arrays.iter().find(|(s, _)| s.name == name)
    }

    fn take(&mut self, name: &str, path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
        let i = self
            .arrays
            .iter()
            .position(|(s, _)| s.name == name)
            .ok_or_else(|| format_err(path, format!("missing array `{name}`")))?;
        let (spec, data) = self.arrays.remove(i);
        Ok((spec.shape, data))
    }

    fn meta_as<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        serde_json::from_value(self.meta.clone()).map_err(|e| format_err(path, format!("bad metadata: {e}")))
    }

    fn expect_kind(&self, kind: &str, path: &Path) -> Result<()> {
        if self.kind != kind {
            return Err(format_err(path, format!("expected a {kind} file, found {}", self.kind)));
        }
        Ok(())
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), reason: reason.into() }
}

fn header_line(header: &Header) -> Result<Vec<u8>> {
    serde_json::to_vec(header).map_err(|e| Error::InvalidConfig(format!("header serialisation failed: {e}")))
}

/// Serialises a container to bytes.
pub fn encode(c: &Container) -> Result<Vec<u8>> {
    let mut header = Header {
        format: FORMAT.into(),
        version: VERSION,
        kind: c.kind.clone(),
        payload_offset: 0,
        arrays: c.arrays.iter().map(|(s, _)| s.clone()).collect(),
        meta: c.meta.clone(),
    };
    // The offset is part of the header, so iterate until its digits settle.
    let mut line = header_line(&header)?;
    loop {
        let offset = (line.len() + 1).div_ceil(8) * 8;
        if offset == header.payload_offset {
            break;
        }
        header.payload_offset = offset;
        line = header_line(&header)?;
    }
    let offset = header.payload_offset;
    let payload: usize = c.arrays.iter().map(|(s, _)| s.len()).sum();
    let mut out = Vec::with_capacity(offset + 8 * payload);
    out.extend_from_slice(&line);
    out.resize(offset - 1, b' ');
    out.push(b'\n');
    for (_, data) in &c.arrays {
        for v in data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses the header line and checks it against the file length.
pub fn decode_header(bytes: &[u8], path: impl AsRef<Path>) -> Result<Header> {
    let path = path.as_ref();
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| format_err(path, "no header line"))?;
    let header: Header = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| format_err(path, format!("header is not valid JSON: {e}")))?;
    if header.format != FORMAT {
        return Err(format_err(path, format!("unknown format `{}`", header.format)));
    }
    if header.version != VERSION {
        return Err(format_err(path, format!("unsupported version {}", header.version)));
    }
    if header.payload_offset != nl + 1 || !header.payload_offset.is_multiple_of(8) {
        return Err(format_err(path, format!("payload offset {} does not follow the header", header.payload_offset)));
    }
    let expected: usize = header.arrays.iter().map(ArraySpec::len).sum::<usize>() * 8;
    let actual = bytes.len() - header.payload_offset;
    if actual != expected {
        return Err(format_err(path, format!("payload has {actual} bytes, header declares {expected}")));
    }
    Ok(header)
}

pub fn decode(bytes: &[u8], path: impl AsRef<Path>) -> Result<Container> {
    let header = decode_header(bytes, path)?;
    let mut at = header.payload_offset;
    let mut arrays = Vec::with_capacity(header.arrays.len());
    for spec in header.arrays {
        let n = spec.len();
        let data = bytes[at..at + 8 * n]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        at += 8 * n;
        arrays.push((spec, data));
    }
    Ok(Container { kind: header.kind, meta: header.meta, arrays })
}

pub fn write_container(path: impl AsRef<Path>, c: &Container) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, encode(c)?)?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<Container> {
    let path = path.as_ref();
    let bytes = read_existing(path)?;
    decode(&bytes, path)
}

/// Reads and validates only the header of a file.
pub fn audit_file(path: impl AsRef<Path>) -> Result<Header> {
    let path = path.as_ref();
    decode_header(&read_existing(path)?, path)
}

fn read_existing(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::MissingRun(path.to_path_buf()));
    }
    Ok(fs::read(path)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("metadata types serialise to JSON")
}

/// Everything in a dataset file except the two arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub stats: NormStats,
    pub spacing: Vec<f64>,
    pub spatial_mask: Vec<bool>,
    pub source_indices: Vec<usize>,
    /// Free-form provenance (task, seed, solver settings).
    pub provenance: Value,
}

pub fn dataset_to_container(ds: &Dataset, provenance: Value) -> Result<Container> {
    let meta = DatasetMeta {
        input_names: ds.input_names.clone(),
        output_names: ds.output_names.clone(),
        stats: ds.stats.clone(),
        spacing: ds.spacing.clone(),
        spatial_mask: ds.spatial_mask.clone(),
        source_indices: ds.source_indices.clone(),
        provenance,
    };
    let mut c = Container::new("dataset", to_value(&meta));
    c.push("coords", ds.coords.shape().to_vec(), ds.coords.data().to_vec())?;
    c.push("targets", ds.targets.shape().to_vec(), ds.targets.data().to_vec())?;
    Ok(c)
}

pub fn dataset_from_container(mut c: Container, path: &Path) -> Result<(Dataset, Value)> {
    c.expect_kind("dataset", path)?;
    let meta: DatasetMeta = c.meta_as(path)?;
    let (cs, cd) = c.take("coords", path)?;
    let (ts, td) = c.take("targets", path)?;
    let coords = Tensor::new(cs, cd)?;
    let targets = Tensor::new(ts, td)?;
    if coords.rows() != targets.rows() || coords.cols() != meta.input_names.len() {
        return Err(format_err(path, "coordinate and target arrays disagree"));
    }
    let ds = Dataset {
        input_names: meta.input_names,
        output_names: meta.output_names,
        coords,
        targets,
        stats: meta.stats,
        spacing: meta.spacing,
        spatial_mask: meta.spatial_mask,
        source_indices: meta.source_indices,
    };
    Ok((ds, meta.provenance))
}

/// A reference solution of any supported problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Trajectory1D(Trajectory1D),
    Trajectory2D(Trajectory2D),
    Elliptic(EllipticSolution),
}

impl Solution {
    pub fn as_sampled(&self) -> &dyn crate::pde::SampledSolution {
        match self {
            Solution::Trajectory1D(t) => t,
            Solution::Trajectory2D(t) => t,
            Solution::Elliptic(e) => e,
        }
    }
}

pub fn solution_to_container(sol: &Solution, provenance: Value) -> Result<Container> {
    let c = match sol {
        Solution::Trajectory1D(t) => {
            let meta = serde_json::json!({
                "grid": t.grid, "times": t.times, "pde": t.pde,
                "scheme": t.pde.scheme(), "provenance": provenance,
            });
            let mut c = Container::new("trajectory1d", meta);
            c.push("u", vec![t.nt(), t.nx()], t.u.clone())?;
            c
        }
        Solution::Trajectory2D(t) => {
            let meta = serde_json::json!({
                "grid": t.grid, "times": t.times, "nu": t.nu,
                "scheme": "vorticity-streamfunction pseudo-spectral, integrating-factor RK4",
                "provenance": provenance,
            });
            let mut c = Container::new("trajectory2d", meta);
            let shape = vec![t.nt(), t.grid.y.nx, t.grid.x.nx];
            c.push("u", shape.clone(), t.u.clone())?;
            c.push("v", shape.clone(), t.v.clone())?;
            c.push("p", shape, t.p.clone())?;
            c
        }
        Solution::Elliptic(e) => {
            let meta = serde_json::json!({
                "grid": e.grid, "scheme": "conservative three-point finite differences",
                "provenance": provenance,
            });
            let mut c = Container::new("elliptic", meta);
            c.push("a_faces", vec![e.a_faces.len()], e.a_faces.clone())?;
            c.push("f", vec![e.f.len()], e.f.clone())?;
            c.push("u", vec![e.u.len()], e.u.clone())?;
            c
        }
    };
    Ok(c)
}

fn meta_field<T: DeserializeOwned>(meta: &Value, key: &str, path: &Path) -> Result<T> {
    let v = meta.get(key).ok_or_else(|| format_err(path, format!("metadata lacks `{key}`")))?;
    serde_json::from_value(v.clone()).map_err(|e| format_err(path, format!("bad `{key}`: {e}")))
}

pub fn solution_from_container(mut c: Container, path: &Path) -> Result<Solution> {
    let meta = c.meta.clone();
    match c.kind.as_str() {
        "trajectory1d" => {
            let (_, u) = c.take("u", path)?;
            let t = Trajectory1D::new(
                meta_field(&meta, "grid", path)?,
                meta_field(&meta, "times", path)?,
                u,
                meta_field(&meta, "pde", path)?,
            )?;
            Ok(Solution::Trajectory1D(t))
        }
        "trajectory2d" => {
            let (_, u) = c.take("u", path)?;
            let (_, v) = c.take("v", path)?;
            let (_, p) = c.take("p", path)?;
            let t = Trajectory2D {
                grid: meta_field(&meta, "grid", path)?,
                times: meta_field(&meta, "times", path)?,
                u,
                v,
                p,
                nu: meta_field(&meta, "nu", path)?,
            };
            let n = t.nt() * t.slice_len();
            if t.u.len() != n || t.v.len() != n || t.p.len() != n {
                return Err(format_err(path, "field sizes do not match the grid"));
            }
            Ok(Solution::Trajectory2D(t))
        }
        "elliptic" => {
            let (_, a_faces) = c.take("a_faces", path)?;
            let (_, f) = c.take("f", path)?;
            let (_, u) = c.take("u", path)?;
            let grid: crate::pde::Grid1D = meta_field(&meta, "grid", path)?;
            if a_faces.len() + 1 != grid.nx || f.len() != grid.nx || u.len() != grid.nx {
                return Err(format_err(path, "field sizes do not match the grid"));
            }
            Ok(Solution::Elliptic(EllipticSolution { grid, a_faces, f, u }))
        }
        other => Err(format_err(path, format!("`{other}` is not a solution file"))),
    }
}

/// Checkpoint metadata: architecture, normalisation and run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub mlp: MlpConfig,
    pub stats: NormStats,
    pub run: Value,
}

pub fn checkpoint_to_container(params: &ModelParams, stats: &NormStats, run: Value) -> Result<Container> {
    let meta = CheckpointMeta { mlp: params.config.clone(), stats: stats.clone(), run };
    let mut c = Container::new("checkpoint", to_value(&meta));
    let flat = params.flatten();
    c.push("params", vec![flat.len()], flat)?;
    Ok(c)
}

pub fn checkpoint_from_container(mut c: Container, path: &Path) -> Result<(ModelParams, CheckpointMeta)> {
    c.expect_kind("checkpoint", path)?;
    let meta: CheckpointMeta = c.meta_as(path)?;
    let (_, flat) = c.take("params", path)?;
    let params = ModelParams::from_flat(&meta.mlp, &flat).map_err(|e| format_err(path, e.to_string()))?;
    Ok((params, meta))
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset, provenance: Value) -> Result<()> {
    write_container(path, &dataset_to_container(ds, provenance)?)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<(Dataset, Value)> {
    let path = path.as_ref();
    dataset_from_container(read_container(path)?, path)
}

pub fn write_solution(path: impl AsRef<Path>, sol: &Solution, provenance: Value) -> Result<()> {
    write_container(path, &solution_to_container(sol, provenance)?)
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<Solution> {
    let path = path.as_ref();
    solution_from_container(read_container(path)?, path)
}

pub fn write_checkpoint(path: impl AsRef<Path>, params: &ModelParams, stats: &NormStats, run: Value) -> Result<()> {
    write_container(path, &checkpoint_to_container(params, stats, run)?)
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, CheckpointMeta)> {
    let path = path.as_ref();
    checkpoint_from_container(read_container(path)?, path)
}

/// Writes serialisable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingRun(PathBuf::from(path)));
    }
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_is_aligned_and_declared() {
        let mut c = Container::new("x", Value::Null);
        c.push("a", vec![3], vec![1.0, -2.5, f64::MIN_POSITIVE]).unwrap();
        let bytes = encode(&c).unwrap();
        let h = decode_header(&bytes, "mem").unwrap();
        assert_eq!(h.payload_offset % 8, 0);
        assert_eq!(bytes[h.payload_offset - 1], b'\n');
        assert_eq!(bytes.len(), h.payload_offset + 24);
        assert_eq!(&bytes[h.payload_offset..h.payload_offset + 8], &1.0_f64.to_le_bytes());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut c = Container::new("x", Value::Null);
        c.push("a", vec![2], vec![1.0, 2.0]).unwrap();
        let bytes = encode(&c).unwrap();
        assert!(matches!(decode(&bytes[..bytes.len() - 1], "mem"), Err(Error::Format { .. })));
        assert!(decode(b"not json\n", "mem").is_err());
    }

    #[test]
    fn push_checks_shape() {
        let mut c = Container::new("x", Value::Null);
        assert!(c.push("a", vec![2, 2], vec![1.0]).is_err());
    }
}
