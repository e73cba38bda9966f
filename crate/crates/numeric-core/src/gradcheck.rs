//! Central finite-difference verification of reverse-mode gradients.

use crate::error::NumericError;
use crate::graph::{reverse_sweep, Var};

/// Compares analytic gradients against central differences for every
/// coordinate of every parameter.
///
/// `f` rebuilds the scalar loss from the current parameter values; it must
/// be deterministic. Returns the maximum over coordinates of
/// |analytic - cd| / max(|analytic|, |cd|, 1e-8).
pub fn finite_diff_check<F>(
    params: &[Var],
    h: f64,
    mut f: F,
) -> Result<f64, NumericError>
where
    F: FnMut() -> Result<Var, NumericError>,
{
    if h <= 0.0 {
        return Err(NumericError::argument("finite_diff_check needs h > 0"));
    }
    for p in params {
        p.zero_grad();
    }
    let loss = f()?;
    reverse_sweep(&loss)?;
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad().data().to_vec()).collect();
    for p in params {
        p.zero_grad();
    }

    let mut max_rel: f64 = 0.0;
    for (pi, p) in params.iter().enumerate() {
        let n = p.value().len();
        for j in 0..n {
            let orig = p.value_at(j);
            p.set_value_at(j, orig + h);
            let plus = f()?.scalar_value();
            p.set_value_at(j, orig - h);
            let minus = f()?.scalar_value();
            p.set_value_at(j, orig);
            let cd = (plus - minus) / (2.0 * h);
            let an = analytic[pi][j];
            let rel = (an - cd).abs() / an.abs().max(cd.abs()).max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}
