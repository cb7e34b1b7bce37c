//! Moments by Richardson-extrapolated central differences.

use super::handle::{TransformHandle, TransformKind};
use crate::error::TransformError;

/// Number of step halvings in the extrapolation tableau.
const LEVELS: i32 = 4;

/// First or second moment of the variable behind `handle`.
///
/// For an LST this is `E X` or `E X^2`; for a PGF it is the factorial
/// moment `E N` or `E N(N-1)`. Derivatives are taken at the identity
/// point on the analytic continuation, so both sides of it are sampled.
pub fn lst_moment(handle: &TransformHandle, k: u32) -> Result<f64, TransformError> {
    let sign = match handle.kind() {
        TransformKind::Lst => 1.0,
        TransformKind::Pgf => -1.0,
    };
    let at = handle.identity_point();
    let fd_step = handle.engine().options().fd_step;
    let g = |t: f64| -> Result<f64, TransformError> {
        let v = handle.eval_raw(at + sign * t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(TransformError::Differentiation(format!(
                "{:?} is not finite at offset {t:e}",
                handle.transform()
            )))
        }
    };
    // g(t) = E[exp(-t X)] for both kinds up to second order, so
    // E X = -g'(0) and the second moment is g''(0).
    let scale = pilot_scale(&g)?;
    match k {
        1 => {
            let h = fd_step * scale;
            let d = richardson(|h| Ok((g(h)? - g(-h)?) / (2.0 * h)), h, 4.0)?;
            let m = -d;
            if !m.is_finite() || m < -1e-9 / scale {
                return Err(TransformError::Differentiation(format!(
                    "first moment of {:?} evaluated to {m}",
                    handle.transform()
                )));
            }
            Ok(m)
        }
        2 => {
            let h = 100.0 * fd_step * scale;
            let f0 = g(0.0)?;
            let d2 = richardson(
                |h| {
                    let (p1, m1, p2, m2) = (g(h)?, g(-h)?, g(2.0 * h)?, g(-2.0 * h)?);
                    Ok((-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h))
                },
                h,
                16.0,
            )?;
            if !d2.is_finite() {
                return Err(TransformError::Differentiation(format!(
                    "second moment of {:?} is not finite",
                    handle.transform()
                )));
            }
            Ok(d2)
        }
        _ => Err(TransformError::Differentiation(format!("unsupported order {k}"))),
    }
}

/// Natural argument scale `1 / E X`, from a coarse one-sided difference.
fn pilot_scale<G>(g: &G) -> Result<f64, TransformError>
where
    G: Fn(f64) -> Result<f64, TransformError>,
{
    let mut h: f64 = 1e-3;
    let mut mean = 0.0;
    for _ in 0..3 {
        mean = (1.0 - g(h)?) / h;
        if !mean.is_finite() {
            return Err(TransformError::Differentiation("non-finite pilot estimate".into()));
        }
        if mean <= 0.0 {
            return Ok(1.0);
        }
        h = 1e-3 / mean;
    }
    Ok(if mean > 1e-12 { 1.0 / mean } else { 1.0 })
}

/// Neville tableau over steps `h 2^j`, `j = LEVELS-1 .. 0`; the leading
/// error term of `d` scales like `h^p` with `ratio = 2^p`.
fn richardson<D>(d: D, h: f64, ratio: f64) -> Result<f64, TransformError>
where
    D: Fn(f64) -> Result<f64, TransformError>,
{
    let mut row: Vec<f64> = Vec::with_capacity(LEVELS as usize);
    for j in (0..LEVELS).rev() {
        row.push(d(h * 2f64.powi(j))?);
    }
    let mut factor = ratio;
    while row.len() > 1 {
        row = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    Ok(row[0])
}
