//! Number formatting shared by the printed reports and the CSV tables.

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// fixed notation unless the decimal exponent is below −4 or at least
/// `digits`, trailing zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // round first so that 9.999995 → 1e+01 picks the right notation
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, the precision of every emitted value.
pub fn g6(x: f64) -> String {
    sig(x, 6)
}

/// As [`g6`], with `NA` for an undefined value.
pub fn g6_or_na(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), g6)
}
