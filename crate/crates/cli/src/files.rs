//! JSON interchange formats: systems, vectors and per-index frame families.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major. Floats are
//! written in shortest round-trip form and parsed exactly, so saving and
//! loading reproduces every entry bit for bit.

use std::fs;
use std::path::Path;

use kgframe::constructions::SubspaceFrameFamily;
use kgframe::{GSystem, KGSystem, Operator, Vector};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: &str = "1";

pub type ComplexJson = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<ComplexJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SystemFile {
    pub version: String,
    pub ambient_dim: usize,
    pub field: String,
    pub blocks: Vec<MatrixJson>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub version: String,
    pub dim: usize,
    pub entries: Vec<ComplexJson>,
}

/// `families[j]` is the frame for the `j`-th block space, one vector per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub version: String,
    pub families: Vec<Vec<Vec<ComplexJson>>>,
}

fn to_pair(z: &Complex64) -> ComplexJson {
    [z.re, z.im]
}

fn from_pair(p: &ComplexJson) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn matrix_to_json(m: &Operator) -> MatrixJson {
    let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push(to_pair(&m[(i, j)]));
        }
    }
    MatrixJson {
        rows: m.nrows(),
        cols: m.ncols(),
        entries,
    }
}

pub fn matrix_from_json(m: &MatrixJson, what: &str) -> CliResult<Operator> {
    if m.entries.len() != m.rows * m.cols {
        return Err(CliError::Input(format!(
            "{what}: {} entries for a {}x{} matrix",
            m.entries.len(),
            m.rows,
            m.cols
        )));
    }
    Ok(Operator::from_fn(m.rows, m.cols, |i, j| {
        from_pair(&m.entries[i * m.cols + j])
    }))
}

pub fn vector_to_pairs(v: &Vector) -> Vec<ComplexJson> {
    v.iter().map(to_pair).collect()
}

fn check_version(version: &str, path: &str) -> CliResult<()> {
    if version != FORMAT_VERSION {
        return Err(CliError::Parse {
            path: path.into(),
            message: format!("unsupported version {version:?}, expected {FORMAT_VERSION:?}"),
        });
    }
    Ok(())
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses JSON, reporting the failing field path together with line and column.
pub fn parse_json<T: DeserializeOwned>(bytes: &[u8], path: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        let message = if field == "." {
            inner.to_string()
        } else {
            format!("field {field}: {inner}")
        };
        CliError::Parse {
            path: path.into(),
            message,
        }
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn system_to_file(ksys: &KGSystem, include_k: bool) -> SystemFile {
    SystemFile {
        version: FORMAT_VERSION.into(),
        ambient_dim: ksys.ambient_dim(),
        field: "complex".into(),
        blocks: ksys.system().blocks().iter().map(matrix_to_json).collect(),
        k: include_k.then(|| matrix_to_json(ksys.k())),
    }
}

pub fn system_from_file(file: &SystemFile, path: &str) -> CliResult<KGSystem> {
    check_version(&file.version, path)?;
    if file.field != "complex" {
        return Err(CliError::Parse {
            path: path.into(),
            message: format!("unsupported field {:?}, expected \"complex\"", file.field),
        });
    }
    let n = file.ambient_dim;
    let mut blocks = Vec::with_capacity(file.blocks.len());
    for (j, b) in file.blocks.iter().enumerate() {
        if b.cols != n {
            return Err(kgframe::Error::DimMismatch(format!(
                "{path}: block {j} has {} columns, expected ambientDim {n}",
                b.cols
            ))
            .into());
        }
        blocks.push(matrix_from_json(b, &format!("{path}: block {j}"))?);
    }
    let sys = GSystem::new(n, blocks)?;
    match &file.k {
        None => Ok(KGSystem::with_identity(sys)),
        Some(k) => {
            if k.rows != n || k.cols != n {
                return Err(kgframe::Error::DimMismatch(format!(
                    "{path}: K is {}x{}, expected {n}x{n}",
                    k.rows, k.cols
                ))
                .into());
            }
            Ok(KGSystem::new(
                sys,
                matrix_from_json(k, &format!("{path}: K"))?,
            )?)
        }
    }
}

/// A loaded input together with its raw bytes, kept for the report digest.
pub struct Loaded<T> {
    pub value: T,
    pub bytes: Vec<u8>,
}

pub fn load_system(path: &Path) -> CliResult<Loaded<KGSystem>> {
    let bytes = read_bytes(path)?;
    let name = path.display().to_string();
    let file: SystemFile = parse_json(&bytes, &name)?;
    Ok(Loaded {
        value: system_from_file(&file, &name)?,
        bytes,
    })
}

pub fn save_system(ksys: &KGSystem, path: &Path) -> CliResult<()> {
    write_json(&system_to_file(ksys, true), path)
}

pub fn load_vector(path: &Path) -> CliResult<Loaded<Vector>> {
    let bytes = read_bytes(path)?;
    let name = path.display().to_string();
    let file: VectorFile = parse_json(&bytes, &name)?;
    check_version(&file.version, &name)?;
    if file.entries.len() != file.dim {
        return Err(CliError::Input(format!(
            "{name}: {} entries for dimension {}",
            file.entries.len(),
            file.dim
        )));
    }
    Ok(Loaded {
        value: Vector::from_iterator(file.dim, file.entries.iter().map(from_pair)),
        bytes,
    })
}

pub fn vector_to_file(v: &Vector) -> VectorFile {
    VectorFile {
        version: FORMAT_VERSION.into(),
        dim: v.len(),
        entries: vector_to_pairs(v),
    }
}

pub fn load_families(path: &Path) -> CliResult<Loaded<SubspaceFrameFamily>> {
    let bytes = read_bytes(path)?;
    let name = path.display().to_string();
    let file: FamilyFile = parse_json(&bytes, &name)?;
    check_version(&file.version, &name)?;
    let families = file
        .families
        .iter()
        .map(|fam| {
            fam.iter()
                .map(|v| Vector::from_iterator(v.len(), v.iter().map(from_pair)))
                .collect()
        })
        .collect();
    Ok(Loaded {
        value: SubspaceFrameFamily::new(families)?,
        bytes,
    })
}

pub fn families_to_file(fams: &SubspaceFrameFamily) -> FamilyFile {
    FamilyFile {
        version: FORMAT_VERSION.into(),
        families: fams
            .families()
            .iter()
            .map(|fam| fam.iter().map(vector_to_pairs).collect())
            .collect(),
    }
}
