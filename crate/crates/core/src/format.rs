//! Float rendering shared by the CSV writers and output file names.

/// Shortest decimal string that parses back to exactly `x`.
///
/// Positional notation is used for decimal exponents in `[-4, 16)` and
/// scientific notation with a signed, two-digit exponent outside it, so
/// `1e-7` renders as `1e-07`, `0.001` as `0.001` and `1e9` as `1000000000.0`.
pub fn float_repr(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    let sci = format!("{x:e}");
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..16).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let s = x.to_string();
        if s.contains('.') {
            s
        } else {
            s + ".0"
        }
    }
}
