//! Plain-decimal rendering with a fixed number of significant digits.

/// Render `x` with `digits` significant digits in positional notation,
/// dropping trailing zeros (`%g`-like, but never switching to exponents).
pub fn sig_digits(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    // Round in scientific form first so that e.g. 9.9999996 -> 10.00000 picks
    // the right exponent.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("roundtrip");
    let mut out = format!("{:.*}", decimals, rounded);
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    if out == "-0" {
        out = "0".to_string();
    }
    out
}
