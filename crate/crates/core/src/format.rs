//! Number formatting shared by the CSV writers.

/// Fixed four decimal places; never prints a negative zero.
pub fn fixed4(value: f64) -> String {
    let s = format!("{value:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Scientific notation with a four-decimal mantissa, for small coefficients and residuals.
pub fn sci4(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.4e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_normalised() {
        assert_eq!(fixed4(-0.00001), "0.0000");
        assert_eq!(fixed4(-0.0), "0.0000");
        assert_eq!(fixed4(91.6596), "91.6596");
        assert_eq!(sci4(-0.0), "0.0000e0");
        assert_eq!(sci4(-0.005), "-5.0000e-3");
    }
}
