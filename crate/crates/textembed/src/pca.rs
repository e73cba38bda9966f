//! PCA via a cyclic Jacobi eigendecomposition of the sample covariance.

use crate::error::TextError;

/// Centers the data, eigendecomposes the covariance, and projects onto the
/// top-k eigenvectors ordered by descending eigenvalue. Sign convention:
/// each component's largest-magnitude entry is positive.
pub fn pca_project(vectors: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>, TextError> {
    let n = vectors.len();
    if n < 2 {
        return Err(TextError::Argument(format!(
            "pca needs at least 2 vectors, got {n}"
        )));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(TextError::Argument("pca vectors have mixed dimensions".into()));
    }
    if k > dim || k == 0 {
        return Err(TextError::Argument(format!(
            "k={k} outside 1..={dim}"
        )));
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    // sample covariance
    let mut cov = vec![0.0; dim * dim];
    for row in &centered {
        for i in 0..dim {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..dim {
                cov[i * dim + j] += ri * row[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..dim {
        for j in i..dim {
            cov[i * dim + j] /= denom;
            cov[j * dim + i] = cov[i * dim + j];
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(&mut cov, dim);

    // order components by descending eigenvalue, stable on ties
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &col in order.iter().take(k) {
        let mut comp: Vec<f64> = (0..dim).map(|r| eigenvectors[r * dim + col]).collect();
        // fix the sign by the largest-magnitude entry (first on ties)
        let mut best = 0;
        for (i, v) in comp.iter().enumerate() {
            if v.abs() > comp[best].abs() {
                best = i;
            }
        }
        if comp[best] < 0.0 {
            for v in &mut comp {
                *v = -*v;
            }
        }
        components.push(comp);
    }

    Ok(centered
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|c| row.iter().zip(c).map(|(x, e)| x * e).sum())
                .collect()
        })
        .collect())
}

/// Cyclic Jacobi rotations on a symmetric matrix. Returns (eigenvalues,
/// column eigenvectors). Deterministic sweep order and stopping rule.
fn jacobi_eigen(a: &mut [f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let mut off: f64 = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p * dim + q] * a[p * dim + q];
            }
        }
        if off < 1e-22 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..dim {
                    let aip = a[i * dim + p];
                    let aiq = a[i * dim + q];
                    a[i * dim + p] = c * aip - s * aiq;
                    a[i * dim + q] = s * aip + c * aiq;
                }
                for j in 0..dim {
                    let apj = a[p * dim + j];
                    let aqj = a[q * dim + j];
                    a[p * dim + j] = c * apj - s * aqj;
                    a[q * dim + j] = s * apj + c * aqj;
                }
                for i in 0..dim {
                    let vip = v[i * dim + p];
                    let viq = v[i * dim + q];
                    v[i * dim + p] = c * vip - s * viq;
                    v[i * dim + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
    (eigenvalues, v)
}
