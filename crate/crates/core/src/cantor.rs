//! The Cantor staircase, evaluated exactly from the ternary digits of its
//! argument.
//!
//! Every finite double is a dyadic rational `N / 2^E`, so its ternary digits
//! can be produced with integer arithmetic and no rounding. Scanning stops at
//! the first digit 1, when the expansion terminates, or once the remaining
//! contribution is below half an ulp of the accumulated value.

use num_bigint::BigUint;

/// Upper bound on scanned digits; `3^-700` is below the smallest subnormal.
const MAX_DIGITS: usize = 700;

enum Residue {
    Small { n: u128, e: u32 },
    Big { n: BigUint, e: u64 },
}

/// Exact ternary digits of `x ∈ (0, 1)`.
struct TernaryDigits {
    residue: Residue,
}

impl TernaryDigits {
    fn new(x: f64) -> Self {
        debug_assert!(x > 0.0 && x < 1.0);
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        // x = mantissa * 2^exp with exp < 0 since x < 1.
        let tz = mantissa.trailing_zeros() as i64;
        let (n, e) = (mantissa >> tz, (-(exp + tz)) as u64);
        let residue = if e <= 124 {
            Residue::Small {
                n: n as u128,
                e: e as u32,
            }
        } else {
            Residue::Big {
                n: BigUint::from(n),
                e,
            }
        };
        TernaryDigits { residue }
    }

    fn is_exhausted(&self) -> bool {
        match &self.residue {
            Residue::Small { n, .. } => *n == 0,
            Residue::Big { n, .. } => n.bits() == 0,
        }
    }

    fn next_digit(&mut self) -> u8 {
        match &mut self.residue {
            Residue::Small { n, e } => {
                let t = *n * 3;
                let d = (t >> *e) as u8;
                *n = t & ((1u128 << *e) - 1);
                d
            }
            Residue::Big { n, e } => {
                let t = &*n * 3u32;
                let d = (&t >> *e).to_u32_digits().first().copied().unwrap_or(0) as u8;
                let mask = (BigUint::from(1u8) << *e) - 1u8;
                *n = t & mask;
                d
            }
        }
    }
}

/// The Cantor function `C: [0, 1] → [0, 1]`; clamps outside the unit
/// interval.
pub fn cantor(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut digits = TernaryDigits::new(x);
    let (mut value, mut weight) = (0.0f64, 0.5f64);
    for _ in 0..MAX_DIGITS {
        if digits.is_exhausted() {
            break;
        }
        match digits.next_digit() {
            0 => {}
            1 => return value + weight,
            _ => value += weight,
        }
        weight *= 0.5;
        if value > 0.0 && weight < value * f64::EPSILON * 0.25 {
            break;
        }
    }
    value
}

/// The open middle-third gap (a complementary interval of the Cantor set)
/// containing `x`, or `None` when `x` lies in the Cantor set.
///
/// Gap endpoints are rounded to the nearest doubles; points outside `[0, 1]`
/// report the unbounded outer gaps.
pub fn cantor_gap(x: f64) -> Option<(f64, f64)> {
    if x < 0.0 {
        return Some((f64::NEG_INFINITY, 0.0));
    }
    if x > 1.0 {
        return Some((1.0, f64::INFINITY));
    }
    if x == 0.0 || x == 1.0 || x.is_nan() {
        return None;
    }
    let mut digits = TernaryDigits::new(x);
    let (mut lo, mut scale) = (0.0f64, 1.0f64);
    for _ in 0..MAX_DIGITS {
        if digits.is_exhausted() {
            return None;
        }
        scale /= 3.0;
        match digits.next_digit() {
            0 => {}
            1 => {
                return if digits.is_exhausted() {
                    // x is a left gap endpoint, hence in the set.
                    None
                } else {
                    Some((lo + scale, lo + 2.0 * scale))
                };
            }
            _ => lo += 2.0 * scale,
        }
    }
    None
}

/// Whether the closed interval `[c, d]` meets the Cantor set.
pub fn meets_cantor_set(c: f64, d: f64) -> bool {
    match (cantor_gap(c), cantor_gap(d)) {
        (Some(g), Some(h)) => g != h,
        _ => true,
    }
}
