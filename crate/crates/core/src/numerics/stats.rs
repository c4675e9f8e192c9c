use crate::error::{Error, Result};

/// Linear-interpolation quantile: with the values sorted, `h = p * (len - 1)`
/// and the result interpolates between ranks `floor(h)` and `ceil(h)`.
///
/// `p` is clamped to `[0, 1]`.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    let mut sorted = values.to_vec();
    quantile_in_place(&mut sorted, p)
}

/// Several quantiles of the same population, sorting once.
pub fn quantiles(values: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = values.to_vec();
    sort_finite(&mut sorted)?;
    Ok(ps.iter().map(|&p| interpolate_sorted(&sorted, p)).collect())
}

fn quantile_in_place(values: &mut [f64], p: f64) -> Result<f64> {
    sort_finite(values)?;
    Ok(interpolate_sorted(values, p))
}

fn sort_finite(values: &mut [f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("quantile of non-finite values".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(())
}

fn interpolate_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
