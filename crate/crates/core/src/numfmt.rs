//! Number formatting shared by the CSV writers.

/// `x` rounded to `digits` significant digits, printed in the shortest
/// form that reads back to the rounded value.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("scientific notation parses");
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Twelve significant digits, the precision of every CSV column.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(-1.0e-20 / 3.0), "-3.33333333333e-21");
        assert_eq!(sig(123456.0, 2), "120000");
        assert_eq!(sig12(0.0), "0");
    }
}
