//! Embedding table persistence: a `dim n_words` header, one
//! space-delimited line per word, then a final `<AVG>` line. Floats are
//! written with full round-trip precision.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::TextError;
use crate::skipgram::EmbeddingModel;
use crate::vocab::Vocabulary;

pub fn save_embeddings(path: &Path, model: &EmbeddingModel) -> Result<(), TextError> {
    let n = model.vocab().len();
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", model.dim, n));
    for i in 0..n {
        out.push_str(model.vocab().token(i));
        for v in model.vector_by_index(i) {
            out.push(' ');
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out.push_str("<AVG>");
    for v in model.stored_average() {
        out.push(' ');
        out.push_str(&format!("{v:?}"));
    }
    out.push('\n');
    let mut file = fs::File::create(path).map_err(|e| TextError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| TextError::io(path, e))
}

/// Loads a persisted table. The reconstructed model serves lookups and
/// sentence embeddings; context vectors are not stored.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingModel, TextError> {
    let text = fs::read_to_string(path).map_err(|e| TextError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| TextError::parse(path, "missing header"))?;
    let mut parts = header.split_whitespace();
    let dim: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| TextError::parse(path, "header dim is not an integer"))?;
    let n_words: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| TextError::parse(path, "header word count is not an integer"))?;

    let mut tokens: Vec<String> = Vec::with_capacity(n_words);
    let mut input = Vec::with_capacity(n_words * dim);
    let mut stored_average: Option<Vec<f64>> = None;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields
            .next()
            .ok_or_else(|| TextError::parse(path, "empty row"))?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse()
                    .map_err(|_| TextError::parse(path, format!("{f:?} is not a float")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != dim {
            return Err(TextError::parse(
                path,
                format!("row {token:?} has {} values, expected {dim}", values.len()),
            ));
        }
        if token == "<AVG>" {
            stored_average = Some(values);
        } else {
            tokens.push(token.to_string());
            input.extend(values);
        }
    }
    if tokens.len() != n_words {
        return Err(TextError::parse(
            path,
            format!("found {} word rows, header says {n_words}", tokens.len()),
        ));
    }
    let avg = stored_average.ok_or_else(|| TextError::parse(path, "missing <AVG> row"))?;

    let vocab = Vocabulary::from_ordered_tokens(tokens);
    let model = EmbeddingModel::from_parts(dim, vocab, input, Vec::new());
    // The recomputed average must match the stored row.
    for (a, b) in model.stored_average().iter().zip(&avg) {
        if (a - b).abs() > 1e-9 {
            return Err(TextError::parse(
                path,
                "stored <AVG> row disagrees with the mean of the vectors",
            ));
        }
    }
    Ok(model)
}
