//! Shared CSV field formatting.

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Set elements separated by spaces.
pub fn fmt_set(set: &[usize]) -> String {
    set.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_set(&[0, 4, 9]), "0 4 9");
    }
}
