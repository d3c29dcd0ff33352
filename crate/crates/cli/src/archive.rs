//! JSON archive of a transfer-tensor set, reloadable by `ttm_pild` runs.

use std::path::Path;

use pild::{Complex64, SuperOperator, TransferTensorSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT: &str = "pild-transfer-tensors";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Archive {
    format: String,
    version: u32,
    dt: f64,
    dim: usize,
    /// Each tensor as row-major real and imaginary parts of the
    /// `d² x d²` matrix.
    tensors: Vec<Tensor>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Tensor {
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn write(path: &Path, tensors: &TransferTensorSet) -> Result<(), CliError> {
    let n = tensors.dim() * tensors.dim();
    let archive = Archive {
        format: FORMAT.into(),
        version: VERSION,
        dt: tensors.dt,
        dim: tensors.dim(),
        tensors: tensors
            .tensors
            .iter()
            .map(|t| {
                let m = t.matrix();
                let entries = (0..n * n).map(|k| m[(k / n, k % n)]);
                Tensor {
                    re: entries.clone().map(|z| z.re).collect(),
                    im: entries.map(|z| z.im).collect(),
                }
            })
            .collect(),
    };
    let text = serde_json::to_string(&archive).map_err(|e| CliError::Numerical(format!("archive: {e}")))?;
    std::fs::write(path, text).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

pub fn read(path: &Path) -> Result<TransferTensorSet, CliError> {
    let bad = |reason: String| CliError::Validation(format!("ttm.archive {}: {reason}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let archive: Archive = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if archive.format != FORMAT || archive.version != VERSION {
        return Err(bad(format!("unsupported format {} v{}", archive.format, archive.version)));
    }
    if archive.tensors.is_empty() {
        return Err(bad("no tensors".into()));
    }
    let n = archive.dim * archive.dim;
    let tensors = archive
        .tensors
        .iter()
        .map(|t| {
            if t.re.len() != n * n || t.im.len() != n * n {
                return Err(bad(format!("tensor size does not match dim = {}", archive.dim)));
            }
            let m = pild::liouville::Operator::from_fn(n, n, |i, j| Complex64::new(t.re[i * n + j], t.im[i * n + j]));
            SuperOperator::from_matrix(archive.dim, m).map_err(|e| bad(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransferTensorSet {
        dt: archive.dt,
        tensors,
    })
}
