//! Output formatting shared by every CSV emitter: floats are rendered with
//! 10 significant digits, in fixed notation for moderate magnitudes and
//! scientific notation otherwise, with trailing zeros trimmed so identical
//! values always produce identical bytes.

/// Format a float with 10 significant digits.
///
/// Decade exponents in [-4, 10) render as fixed-point, everything else as
/// `<mantissa>e<exp>`; trailing fractional zeros are trimmed in both forms.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mant, exp) = sci
        .split_once('e')
        .expect("{:.9e} always contains an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.')
        } else {
            &fixed
        };
        if trimmed == "-0" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_frozen_examples() {
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(-0.0), "0");
        assert_eq!(sig10(1.0), "1");
        assert_eq!(sig10(-1.5), "-1.5");
        assert_eq!(sig10(0.5), "0.5");
        assert_eq!(sig10(1.0 / 3.0), "0.3333333333");
        assert_eq!(sig10(2.0 / 3.0), "0.6666666667");
        assert_eq!(sig10(123.456), "123.456");
        assert_eq!(sig10(1e9), "1000000000");
        assert_eq!(sig10(1e10), "1e10");
        assert_eq!(sig10(1.23e-4), "0.000123");
        assert_eq!(sig10(1.23e-5), "1.23e-5");
        assert_eq!(sig10(-9.87654321e22), "-9.87654321e22");
        assert_eq!(sig10(0.8413447460685429), "0.8413447461");
    }

    #[test]
    fn ten_significant_digits_roundtrip() {
        // Parsing the printed form back must agree to a relative 1e-9.
        for &x in &[
            std::f64::consts::PI,
            -std::f64::consts::E,
            6.022e23,
            -1.6e-19,
            0.1,
            1234.5678,
            9.999999999e9,
        ] {
            let back: f64 = sig10(x).parse().unwrap();
            assert!(
                ((back - x) / x).abs() < 1e-9,
                "sig10({x}) = {} reparses to {back}",
                sig10(x)
            );
        }
    }

    #[test]
    fn stable_bytes_for_equal_values() {
        assert_eq!(sig10(0.5), sig10(2.0_f64.recip() as f64));
        assert_eq!(sig10(f64::NAN), "nan");
        assert_eq!(sig10(f64::INFINITY), "inf");
        assert_eq!(sig10(f64::NEG_INFINITY), "-inf");
    }
}
