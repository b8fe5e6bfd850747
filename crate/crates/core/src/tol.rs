//! Shared tolerances for inequality checks.

/// Absolute slack for accumulated double-precision sums.
pub const ABS: f64 = 1e-12;
/// Relative slack.
pub const REL: f64 = 1e-9;

/// `lhs <= rhs` up to `ABS + REL * max(|lhs|, |rhs|)`.
pub fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + ABS + REL * lhs.abs().max(rhs.abs())
}

/// `|a - b|` within `ABS + REL * max(|a|, |b|)`.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ABS + REL * a.abs().max(b.abs())
}
