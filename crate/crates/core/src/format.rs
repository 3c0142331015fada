//! Fixed float formatting for text outputs.

/// `printf("%.6e")` formatting, e.g. `1.234500e-07`.
pub fn sci(v: f64) -> String {
    sci_digits(v, 6)
}

/// `printf("%.{digits}e")` formatting.
pub fn sci_digits(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.digits$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", e.abs())
}
