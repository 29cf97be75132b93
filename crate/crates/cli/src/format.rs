//! Fixed-width number formatting shared by all tables.

/// C-style `%.12e`: twelve mantissa digits and a signed exponent of at least
/// two digits, e.g. `1.443669535370e-02`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Joins CSV fields; an empty string leaves the cell blank.
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}
