use crate::error::{Error, Result};

/// FDR combination min_i (K/i)·p₍ᵢ₎ of K p-values, clamped to [0,1].
pub fn fdr_combine(pvalues: &[f64]) -> Result<f64> {
    if pvalues.is_empty() {
        return Err(Error::InvalidArgument("need at least one p-value".into()));
    }
    if pvalues.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument("p-values must lie in [0,1]".into()));
    }
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    let combined = sorted
        .iter()
        .enumerate()
        .map(|(i, p)| k / (i + 1) as f64 * p)
        .fold(f64::INFINITY, f64::min);
    Ok(combined.clamp(0.0, 1.0))
}
