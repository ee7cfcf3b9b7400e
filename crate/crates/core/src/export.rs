//! Plain-text writers shared by the solvers: CSV with 17 significant digits
//! and whitespace-separated gnuplot data.

/// Full-precision, locale-independent rendering (`{:.16e}`), enough to
/// round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
