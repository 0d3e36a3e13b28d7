//! Fixed number formatting for reports and exports.

/// `%.15g`-style: 15 significant digits, trailing zeros trimmed, exponent
/// form outside `1e-4 ≤ |x| < 1e15`.
pub fn g15(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    // the exponent after rounding to 15 digits decides the style
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form always has an 'e'");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        let m = trim(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
