//! Trained-parameter persistence: magic `GMDL1`, then per-parameter
//! records of (name length, name, rank, dims, float64 payload), all
//! little-endian.

use std::fs;
use std::path::Path;

use numeric_core::NdArray;

use crate::error::ModelError;
use crate::nets::Net;

const MAGIC: &[u8; 5] = b"GMDL1";

pub fn save_params(path: &Path, params: &[(String, NdArray)]) -> Result<(), ModelError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    for (name, value) in params {
        let name_bytes = name.as_bytes();
        buf.extend_from_slice(&(name_bytes.len() as u32).to_le_bytes());
        buf.extend_from_slice(name_bytes);
        buf.extend_from_slice(&(value.shape().len() as u32).to_le_bytes());
        for &dim in value.shape() {
            buf.extend_from_slice(&(dim as u64).to_le_bytes());
        }
        for v in value.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| ModelError::io(path, e))
}

pub fn load_params(path: &Path) -> Result<Vec<(String, NdArray)>, ModelError> {
    let bytes = fs::read(path).map_err(|e| ModelError::io(path, e))?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelError::persist(path, "missing GMDL1 magic"));
    }
    let mut pos = MAGIC.len();
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], ModelError> {
        if *pos + n > bytes.len() {
            return Err(ModelError::persist(path, "truncated record"));
        }
        let slice = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(slice)
    };
    let mut out = Vec::new();
    while pos < bytes.len() {
        let name_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let name = String::from_utf8(take(&mut pos, name_len)?.to_vec())
            .map_err(|_| ModelError::persist(path, "parameter name is not UTF-8"))?;
        let rank = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        let value = NdArray::from_vec(&shape, data)
            .map_err(|e| ModelError::persist(path, e.to_string()))?;
        out.push((name, value));
    }
    Ok(out)
}

/// Current parameter values of a model, in its stable declaration order.
pub fn snapshot(net: &dyn Net) -> Vec<(String, NdArray)> {
    net.params()
        .into_iter()
        .map(|(name, var)| (name, var.value()))
        .collect()
}

/// Writes loaded values into a model with matching parameter names and
/// shapes.
pub fn restore(net: &dyn Net, saved: &[(String, NdArray)], path: &Path) -> Result<(), ModelError> {
    let params = net.params();
    if params.len() != saved.len() {
        return Err(ModelError::persist(
            path,
            format!("file has {} parameters, model has {}", saved.len(), params.len()),
        ));
    }
    for ((name, var), (saved_name, value)) in params.iter().zip(saved) {
        if name != saved_name {
            return Err(ModelError::persist(
                path,
                format!("parameter order mismatch: {saved_name:?} vs {name:?}"),
            ));
        }
        if var.value().shape() != value.shape() {
            return Err(ModelError::persist(
                path,
                format!(
                    "shape mismatch for {name}: {:?} vs {:?}",
                    value.shape(),
                    var.value().shape()
                ),
            ));
        }
        var.set_value(value.clone());
    }
    Ok(())
}
