//! Shared CSV formatting.

/// Formats a float with 17 significant digits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
