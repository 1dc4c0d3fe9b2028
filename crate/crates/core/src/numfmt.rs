//! `%g`-style float formatting with a fixed number of significant digits.

/// Formats `x` with `digits` significant digits, choosing fixed or
/// exponential notation like C's `%.{digits}g` and trimming trailing zeros.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let digits = digits.max(1);
    // Exponent after rounding to the requested precision.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
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

/// Twelve significant digits, used for every CSV value.
pub fn csv_float(x: f64) -> String {
    format_sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(format_sig(0.1, 12), "0.1");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(123456.0, 3), "1.23e+05");
        assert_eq!(format_sig(1.5e-7, 12), "1.5e-07");
        assert_eq!(format_sig(-2.5, 12), "-2.5");
        assert_eq!(format_sig(100.0, 12), "100");
        assert_eq!(format_sig(0.0001, 12), "0.0001");
        assert_eq!(format_sig(9.9999999999999, 12), "10");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 0.8123456789012345, -1.2e-300, 6.02214076e23] {
            let s = format_sig(x, 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), (x as f64).to_bits(), "{s}");
        }
    }
}

/// JSON formatter writing every `f64` with a fixed number of significant digits.
struct SigDigitsFormatter {
    digits: usize,
}

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_sig(value, self.digits).as_bytes())
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as compact JSON with `digits` significant digits per float.
pub fn to_json_with_digits<T: serde::Serialize + ?Sized>(value: &T, digits: usize) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter { digits });
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
