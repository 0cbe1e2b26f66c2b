use crate::error::{invalid, Error, Result};

/// Lower median of the estimates.
pub fn median_trick(z_hats: &[f64]) -> Result<f64> {
    if z_hats.is_empty() {
        return invalid("median of an empty list");
    }
    if z_hats.iter().any(|v| v.is_nan()) {
        return invalid("median of a list containing NaN");
    }
    let mut v = z_hats.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v[(v.len() - 1) / 2])
}

/// ⌈72 ln(1/ζ)⌉ copies push a 3/4-probability guarantee to 1 − ζ.
pub fn n_for_confidence(zeta: f64) -> Result<usize> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return invalid("confidence level ζ must lie in (0, 1)");
    }
    Ok((72.0 * (1.0 / zeta).ln()).ceil() as usize)
}

/// F = −log Z.
pub fn free_energy(z_hat: f64) -> Result<f64> {
    if !(z_hat > 0.0) {
        return Err(Error::Domain(format!("free energy needs Z > 0, got {z_hat}")));
    }
    Ok(-z_hat.ln())
}
