//! Nondimensional numbers of the wind-driven circulation models.

use crate::error::{Error, Result};

fn positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(())
}

/// `Ro = U / (beta L^2)`.
pub fn rossby_number(u: f64, beta: f64, l: f64) -> Result<f64> {
    positive(&[("U", u), ("beta", beta), ("L", l)])?;
    Ok(u / (beta * l * l))
}

/// `Re = U L / A`.
pub fn reynolds_number(u: f64, l: f64, a: f64) -> Result<f64> {
    positive(&[("U", u), ("L", l), ("A", a)])?;
    Ok(u * l / a)
}

/// `eps_S = gamma / (beta L)`.
pub fn stommel_number(gamma: f64, beta: f64, l: f64) -> Result<f64> {
    positive(&[("gamma", gamma), ("beta", beta), ("L", l)])?;
    Ok(gamma / (beta * l))
}

/// `eps_M = A / (beta L^3)`.
pub fn munk_scale(a: f64, beta: f64, l: f64) -> Result<f64> {
    positive(&[("A", a), ("beta", beta), ("L", l)])?;
    Ok(a / (beta * l.powi(3)))
}

/// `eps_M = Ro / Re`.
pub fn munk_from_rossby_reynolds(ro: f64, re: f64) -> Result<f64> {
    positive(&[("Ro", ro), ("Re", re)])?;
    Ok(ro / re)
}
