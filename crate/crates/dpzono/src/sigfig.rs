//! 12-significant-digit rounding for emitted files, so reruns produce
//! byte-identical output across platforms.

/// Rounds to 12 significant decimal digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("round-trip of finite float")
}

/// Shortest decimal representation of the 12-significant-digit
/// rounding of `x`.
pub fn format_sig12(x: f64) -> String {
    format!("{}", round_sig12(x))
}
