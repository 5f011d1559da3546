//! JSON file formats.
//!
//! Matrices are `{"rows": r, "cols": c, "entries": [[re, im], ...]}` in
//! row-major order.
//!
//! - channel: `{"dim_in", "dim_out", "kraus": [matrix, ...]}` or
//!   `{"choi": matrix, "dim_in"?, "dim_out"?}` (square channel if dims are omitted)
//! - family: `{"label"?, "channels": [channel | "path.json" | {"classical": function}]}`,
//!   paths relative to the family file
//! - scheme: `{"type": "haar", "d", "k", "unitary"? | "seed"?}`,
//!   `{"type": "hadamard", "n", "k"}` or
//!   `{"type": "classical_table", "n", "k", "enc_table", "dec_table"}`
//! - function: `{"n", "table"}`

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversaries::{lift_classical, AdversarialFamily, ClassicalFunction};
use crate::channels::{ChoiMatrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmath::ComplexMatrix;
use crate::schemes::{ClassicalSchemeTable, HaarScheme, HadamardScheme};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelFile {
    Kraus(KrausFile),
    Choi(ChoiFile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<ComplexMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiFile {
    pub choi: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_out: Option<usize>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<QuantumChannel> {
        match self {
            Self::Kraus(KrausFile { dim_in, dim_out, kraus }) => QuantumChannel::new(dim_in, dim_out, kraus),
            Self::Choi(ChoiFile { choi, dim_in, dim_out }) => {
                let n = choi.rows();
                let (din, dout) = match (dim_in, dim_out) {
                    (Some(a), Some(b)) => (a, b),
                    (Some(a), None) if a > 0 && n % a == 0 => (a, n / a),
                    (None, Some(b)) if b > 0 && n % b == 0 => (n / b, b),
                    (None, None) => {
                        let d = (n as f64).sqrt().round() as usize;
                        if d * d != n {
                            return Err(Error::Shape(format!(
                                "choi: {n}x{n} is not d^2 x d^2; give dim_in and dim_out"
                            )));
                        }
                        (d, d)
                    }
                    _ => return Err(Error::Shape(format!("choi: dimensions do not divide {n}"))),
                };
                ChoiMatrix::new(din, dout, choi)?.to_channel()
            }
        }
    }

    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self::Kraus(KrausFile {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().to_vec(),
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum FamilyEntry {
    Path(String),
    Inline(serde_json::Value),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    #[serde(default)]
    label: Option<String>,
    channels: Vec<FamilyEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeFile {
    Haar {
        d: usize,
        k: u32,
        #[serde(default)]
        unitary: Option<ComplexMatrix>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Hadamard {
        n: u32,
        k: u32,
    },
    ClassicalTable {
        n: u32,
        k: u32,
        enc_table: Vec<Vec<f64>>,
        dec_table: Vec<Option<usize>>,
    },
}

/// Scheme loaded from a file.
#[derive(Clone, Debug)]
pub enum LoadedScheme {
    Haar(HaarScheme),
    Hadamard(HadamardScheme),
    ClassicalTable(ClassicalSchemeTable),
}

impl SchemeFile {
    pub fn into_scheme(self) -> Result<LoadedScheme> {
        match self {
            Self::Haar { d, k, unitary, seed } => {
                let scheme = match (unitary, seed) {
                    (Some(u), None) => HaarScheme::new(u, k)?,
                    (None, Some(s)) => HaarScheme::from_seed(d, k, s)?,
                    _ => {
                        return Err(Error::InvalidScheme(
                            "haar scheme needs exactly one of `unitary` or `seed`".into(),
                        ))
                    }
                };
                if scheme.d() != d {
                    return Err(Error::InvalidScheme(format!("d: file says {d}, unitary is {}", scheme.d())));
                }
                Ok(LoadedScheme::Haar(scheme))
            }
            Self::Hadamard { n, k } => Ok(LoadedScheme::Hadamard(HadamardScheme::new(n, k)?)),
            Self::ClassicalTable { n, k, enc_table, dec_table } => Ok(LoadedScheme::ClassicalTable(
                ClassicalSchemeTable::new(n, k, enc_table, dec_table)?,
            )),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Dispatches on the presence of a `choi` key so that serde's error names
/// the offending field.
fn channel_from_value(value: serde_json::Value) -> Result<ChannelFile> {
    let is_choi = value.get("choi").is_some();
    let parsed = if is_choi {
        serde_json::from_value(value).map(ChannelFile::Choi)
    } else {
        serde_json::from_value(value).map(ChannelFile::Kraus)
    };
    parsed.map_err(|e| Error::InvalidChannel(e.to_string()))
}

pub fn parse_channel(json: &str) -> Result<QuantumChannel> {
    channel_from_value(serde_json::from_str(json)?)?.into_channel()
}

pub fn load_channel(path: &Path) -> Result<QuantumChannel> {
    parse_channel(&read(path)?)
}

pub fn channel_to_json(ch: &QuantumChannel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ChannelFile::from_channel(ch))?)
}

/// Parses a family; relative channel paths resolve against `base`.
pub fn parse_family(json: &str, base: &Path, default_label: &str) -> Result<AdversarialFamily> {
    let file: FamilyFile = serde_json::from_str(json).map_err(|e| Error::Family(e.to_string()))?;
    let channels = file
        .channels
        .into_iter()
        .enumerate()
        .map(|(i, entry)| {
            let ch = match entry {
                FamilyEntry::Path(p) => {
                    let mut path = PathBuf::from(&p);
                    if path.is_relative() {
                        path = base.join(path);
                    }
                    load_channel(&path)
                }
                FamilyEntry::Inline(mut v) => match v.get_mut("classical").map(serde_json::Value::take) {
                    Some(f) => serde_json::from_value::<ClassicalFunction>(f)
                        .map_err(|e| Error::Family(format!("classical: {e}")))
                        .and_then(|f| lift_classical(&f)),
                    None => channel_from_value(v).and_then(ChannelFile::into_channel),
                },
            };
            ch.map_err(|e| Error::Family(format!("channels[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    AdversarialFamily::new(file.label.unwrap_or_else(|| default_label.to_string()), channels)
}

pub fn load_family(path: &Path) -> Result<AdversarialFamily> {
    let base = path.parent().unwrap_or(Path::new("."));
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_family(&read(path)?, base, &label)
}

pub fn parse_scheme(json: &str) -> Result<LoadedScheme> {
    serde_json::from_str::<SchemeFile>(json)
        .map_err(|e| Error::InvalidScheme(e.to_string()))?
        .into_scheme()
}

pub fn load_scheme(path: &Path) -> Result<LoadedScheme> {
    parse_scheme(&read(path)?)
}

pub fn load_function(path: &Path) -> Result<ClassicalFunction> {
    Ok(serde_json::from_str(&read(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::SeededRng;

    #[test]
    fn channel_round_trip() {
        let ch = QuantumChannel::random(3, 2, &mut SeededRng::new(1, 0)).unwrap();
        let back = parse_channel(&channel_to_json(&ch).unwrap()).unwrap();
        assert_eq!(back.kraus(), ch.kraus());
    }

    #[test]
    fn choi_file() {
        let id = QuantumChannel::identity(2).unwrap();
        let json = format!("{{\"choi\": {}}}", serde_json::to_string(id.choi().unwrap().matrix()).unwrap());
        let ch = parse_channel(&json).unwrap();
        assert!((ch.entanglement_fidelity().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_channel_names_the_problem() {
        let err = parse_channel(r#"{"dim_in": 2, "dim_out": 2}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidChannel(_)));
        assert!(err.to_string().contains("kraus"), "{err}");
        let err = parse_channel(r#"{"dim_in": 2, "dim_out": 2, "kraus": []}"#).unwrap_err();
        assert!(!err.to_string().is_empty());
    }

    #[test]
    fn family_with_mixed_entries() {
        let dir = std::env::temp_dir().join(format!("tamperlab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("id.json"), channel_to_json(&QuantumChannel::identity(4).unwrap()).unwrap()).unwrap();
        let json = r#"{"label": "mix", "channels": ["id.json", {"classical": {"n": 2, "table": [1, 1, 2, 3]}}]}"#;
        let fam = parse_family(json, &dir, "x").unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.label(), "mix");
        fs::remove_dir_all(&dir).ok();
        assert!(parse_family(r#"{"channels": ["missing.json"]}"#, &dir, "x").is_err());
    }

    #[test]
    fn scheme_files() {
        match parse_scheme(r#"{"type": "haar", "d": 8, "k": 2, "seed": 3}"#).unwrap() {
            LoadedScheme::Haar(s) => assert_eq!(s.num_messages(), 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_scheme(r#"{"type": "hadamard", "n": 4, "k": 2}"#).unwrap(),
            LoadedScheme::Hadamard(_)
        ));
        let table = r#"{"type": "classical_table", "n": 1, "k": 1, "enc_table": [[1, 0], [0, 1]], "dec_table": [0, 1]}"#;
        assert!(matches!(parse_scheme(table).unwrap(), LoadedScheme::ClassicalTable(_)));
        assert!(parse_scheme(r#"{"type": "haar", "d": 8, "k": 2}"#).is_err());
        assert!(parse_scheme(r#"{"type": "bogus"}"#).is_err());
    }
}
