pub mod kernel;
pub mod riesz;
pub mod solve;
pub mod verify;

use gkp_core::util::fmt17;

/// Joins values as one CSV line at full precision.
pub(crate) fn csv_line(vals: &[f64]) -> String {
    vals.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",")
}

pub(crate) fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
