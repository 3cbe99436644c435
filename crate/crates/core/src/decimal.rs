//! Nine-significant-digit decimal representation used for every stored
//! measurement. Values produced by [`quantize`] survive a text round trip
//! through [`format`] bit-for-bit.

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds `v` to the nearest double that has a 9-significant-digit decimal
/// representation.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest decimal text for `quantize(v)`; never more than 9 significant
/// digits and never in exponent notation.
pub fn format(v: f64) -> String {
    let q = quantize(v);
    let s = format!("{q}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}
