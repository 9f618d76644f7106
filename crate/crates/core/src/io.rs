//! State and local-unitary file formats.
//!
//! A state file is a JSON header `{version, modes, generator?}` plus
//! coefficients, either inline as `[[re, im], …]` in row-major order or in a
//! little-endian binary sidecar of interleaved f64 re/im pairs referenced by
//! filename and guarded by an element count. A file carrying only a
//! generator is a valid generation spec: the coefficients are sampled on
//! load.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::ModeGrid;
use crate::motion::{make_phase_unitary, make_random_unitary, LocalUnitary};
use crate::state::{BuildWarning, GaussianSpec, PureState};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("state file needs either inline coeffs, a coeffs_file, or a generator")]
    MissingCoefficients,
    #[error("coefficient count mismatch: header expects {expected}, found {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("local-unitary spec has {got} mode entries, state has {expected} modes")]
    LuModeCount { expected: usize, got: usize },
    #[error(transparent)]
    Build(#[from] crate::error::Error),
}

pub type FileResult<T> = std::result::Result<T, FileError>;

/// Serialized Gaussian generator; complex numbers as [re, im].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSpecFile {
    pub quadratic: Vec<Vec<(f64, f64)>>,
    pub linear: Vec<(f64, f64)>,
}

impl GaussianSpecFile {
    pub fn to_spec(&self) -> GaussianSpec {
        GaussianSpec::new(
            self.quadratic
                .iter()
                .map(|row| row.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
                .collect(),
            self.linear
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect(),
        )
    }

    pub fn from_spec(spec: &GaussianSpec) -> Self {
        Self {
            quadratic: spec
                .quadratic
                .iter()
                .map(|row| row.iter().map(|c| (c.re, c.im)).collect())
                .collect(),
            linear: spec.linear.iter().map(|c| (c.re, c.im)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub version: u32,
    pub modes: Vec<ModeGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GaussianSpecFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs_count: Option<usize>,
}

/// Load a state file, sampling the generator when no coefficients are stored.
pub fn read_state(path: &Path) -> FileResult<(PureState, Vec<BuildWarning>)> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let header: StateFile = serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if header.version != FORMAT_VERSION {
        return Err(FileError::Version(header.version));
    }
    let mut modes = header.modes.clone();
    for g in &mut modes {
        g.rehydrate()?;
    }
    let expected: usize = modes.iter().map(ModeGrid::count).product();
    let shape: Vec<usize> = modes.iter().map(ModeGrid::count).collect();

    if let Some(inline) = &header.coeffs {
        if inline.len() != expected {
            return Err(FileError::CountMismatch {
                expected,
                got: inline.len(),
            });
        }
        let values: Vec<Complex64> = inline
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        let tensor = ArrayD::from_shape_vec(IxDyn(&shape), values).expect("count checked");
        let state = PureState::from_tensor(modes, tensor)?;
        return Ok((state, Vec::new()));
    }
    if let Some(name) = &header.coeffs_file {
        let guard = header.coeffs_count.ok_or(FileError::MissingCoefficients)?;
        if guard != expected {
            return Err(FileError::CountMismatch {
                expected,
                got: guard,
            });
        }
        let sidecar = path.parent().unwrap_or(Path::new(".")).join(name);
        let mut bytes = Vec::new();
        fs::File::open(&sidecar)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| FileError::Io {
                path: sidecar.clone(),
                source,
            })?;
        if bytes.len() != expected * 16 {
            return Err(FileError::CountMismatch {
                expected: expected * 16,
                got: bytes.len(),
            });
        }
        let values: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|chunk| {
                let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let tensor = ArrayD::from_shape_vec(IxDyn(&shape), values).expect("count checked");
        let state = PureState::from_tensor(modes, tensor)?;
        return Ok((state, Vec::new()));
    }
    if let Some(generator) = &header.generator {
        let (state, warnings) = PureState::gaussian(&generator.to_spec(), modes)?;
        return Ok((state, warnings));
    }
    Err(FileError::MissingCoefficients)
}

/// Write a state file. Coefficients go inline unless `binary_sidecar` names
/// a sidecar file (created next to `path`).
pub fn write_state(
    path: &Path,
    state: &PureState,
    generator: Option<&GaussianSpec>,
    binary_sidecar: Option<&str>,
) -> FileResult<()> {
    let mut header = StateFile {
        version: FORMAT_VERSION,
        modes: state.modes().to_vec(),
        generator: generator.map(GaussianSpecFile::from_spec),
        coeffs: None,
        coeffs_file: None,
        coeffs_count: None,
    };
    match binary_sidecar {
        None => {
            header.coeffs = Some(state.coeffs().iter().map(|c| (c.re, c.im)).collect());
        }
        Some(name) => {
            let sidecar = path.parent().unwrap_or(Path::new(".")).join(name);
            let mut bytes = Vec::with_capacity(state.coeffs().len() * 16);
            for c in state.coeffs().iter() {
                bytes.extend_from_slice(&c.re.to_le_bytes());
                bytes.extend_from_slice(&c.im.to_le_bytes());
            }
            fs::File::create(&sidecar)
                .and_then(|mut f| f.write_all(&bytes))
                .map_err(|source| FileError::Io {
                    path: sidecar.clone(),
                    source,
                })?;
            header.coeffs_file = Some(name.to_string());
            header.coeffs_count = Some(state.coeffs().len());
        }
    }
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Per-mode kernel description in a local-unitary spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Phase {
        values: Vec<f64>,
    },
    /// Haar-style kernel; without an explicit seed the caller's base seed
    /// plus the mode index is used.
    Random {
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Identity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LuSpecFile {
    pub modes: Vec<KernelSpec>,
}

pub fn read_lu_spec(path: &Path) -> FileResult<LuSpecFile> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Materialize the kernels of a spec against the state's grids.
pub fn build_local_unitary(
    spec: &LuSpecFile,
    grids: &[ModeGrid],
    base_seed: u64,
) -> FileResult<LocalUnitary> {
    if spec.modes.len() != grids.len() {
        return Err(FileError::LuModeCount {
            expected: grids.len(),
            got: spec.modes.len(),
        });
    }
    let mut kernels = Vec::with_capacity(grids.len());
    for (mode, (kernel_spec, grid)) in spec.modes.iter().zip(grids).enumerate() {
        let kernel = match kernel_spec {
            KernelSpec::Phase { values } => make_phase_unitary(grid, values)?,
            KernelSpec::Random { seed } => {
                make_random_unitary(grid, seed.unwrap_or(base_seed + mode as u64))
            }
            KernelSpec::Identity => {
                ndarray::Array2::from_diag_elem(grid.count(), Complex64::new(1.0, 0.0))
            }
        };
        kernels.push(kernel);
    }
    Ok(LocalUnitary::new(kernels, grids)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_state() -> (PureState, GaussianSpec) {
        let spec = GaussianSpec::from_real(&[vec![1.0, -0.5], vec![-0.5, 1.0]]);
        let grids = vec![
            ModeGrid::uniform(-5.0, 5.0, 8).unwrap(),
            ModeGrid::uniform(-5.0, 5.0, 8).unwrap(),
        ];
        (PureState::gaussian(&spec, grids).unwrap().0, spec)
    }

    #[test]
    fn inline_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let (state, spec) = sample_state();
        write_state(&path, &state, Some(&spec), None).unwrap();
        let (loaded, warnings) = read_state(&path).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(loaded.modes(), state.modes());
        for (a, b) in loaded.coeffs().iter().zip(state.coeffs().iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sidecar_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let (state, _) = sample_state();
        write_state(&path, &state, None, Some("state.bin")).unwrap();
        let (loaded, _) = read_state(&path).unwrap();
        assert_eq!(loaded.coeffs(), state.coeffs());
    }

    #[test]
    fn generator_only_file_is_sampled_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gen.json");
        let (state, spec) = sample_state();
        let header = StateFile {
            version: FORMAT_VERSION,
            modes: state.modes().to_vec(),
            generator: Some(GaussianSpecFile::from_spec(&spec)),
            coeffs: None,
            coeffs_file: None,
            coeffs_count: None,
        };
        fs::write(&path, serde_json::to_string(&header).unwrap()).unwrap();
        let (loaded, _) = read_state(&path).unwrap();
        for (a, b) in loaded.coeffs().iter().zip(state.coeffs().iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn count_guard_rejects_truncated_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let (state, _) = sample_state();
        write_state(&path, &state, None, Some("state.bin")).unwrap();
        let sidecar = dir.path().join("state.bin");
        let bytes = fs::read(&sidecar).unwrap();
        fs::write(&sidecar, &bytes[..bytes.len() - 16]).unwrap();
        assert!(matches!(
            read_state(&path),
            Err(FileError::CountMismatch { .. })
        ));
    }

    #[test]
    fn wrong_inline_count_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let (state, _) = sample_state();
        let mut header = StateFile {
            version: FORMAT_VERSION,
            modes: state.modes().to_vec(),
            generator: None,
            coeffs: Some(vec![(1.0, 0.0); 3]),
            coeffs_file: None,
            coeffs_count: None,
        };
        fs::write(&path, serde_json::to_string(&header).unwrap()).unwrap();
        assert!(matches!(
            read_state(&path),
            Err(FileError::CountMismatch { .. })
        ));
        header.coeffs = None;
        fs::write(&path, serde_json::to_string(&header).unwrap()).unwrap();
        assert!(matches!(
            read_state(&path),
            Err(FileError::MissingCoefficients)
        ));
    }

    #[test]
    fn lu_spec_round_trip_and_build() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lu.json");
        let spec = LuSpecFile {
            modes: vec![
                KernelSpec::Phase {
                    values: vec![0.0; 8],
                },
                KernelSpec::Random { seed: Some(4) },
            ],
        };
        fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
        let loaded = read_lu_spec(&path).unwrap();
        let (state, _) = sample_state();
        let lu = build_local_unitary(&loaded, state.modes(), 0).unwrap();
        assert_eq!(lu.kernels().len(), 2);
        let bad = LuSpecFile {
            modes: vec![KernelSpec::Identity],
        };
        assert!(matches!(
            build_local_unitary(&bad, state.modes(), 0),
            Err(FileError::LuModeCount { .. })
        ));
        // Unseeded random kernels fall back to the base seed deterministically.
        let unseeded = LuSpecFile {
            modes: vec![KernelSpec::Random { seed: None }, KernelSpec::Identity],
        };
        let a = build_local_unitary(&unseeded, state.modes(), 9).unwrap();
        let b = build_local_unitary(&unseeded, state.modes(), 9).unwrap();
        assert_eq!(a.kernels()[0], b.kernels()[0]);
    }
}
