//! Small numeric helpers shared across modules.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Natural log of a positive big integer, splitting off high bits when the
/// value does not fit an `f64`.
pub(crate) fn biguint_ln(v: &BigUint) -> f64 {
    if let Some(x) = v.to_f64() {
        if x.is_finite() && x > 0.0 {
            return x.ln();
        }
    }
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let head = (v >> shift).to_f64().unwrap_or(f64::MAX);
    head.ln() + shift as f64 * std::f64::consts::LN_2
}
