//! Cantor-Lebesgue measure.
//!
//! The measure is the law of `x = sum_k d_k 3^{-k}` with i.i.d. fair digits
//! `d_k` in `{0, 1}`, i.e. the middle-thirds Cantor measure contracted onto
//! `[0, 1/2]` (twice a sample has ternary digits in `{0, 2}`). Its
//! coefficients are
//!
//! ```text
//! nu(n) = e(-n/4) * prod_{k>=1} cos(pi n 3^{-k})
//! ```
//!
//! and satisfy `nu(3n) = nu(n)` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Truncate the product once the remaining factors can move it by less than this.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Factors of the infinite product used for `n`, together with the
/// certified bound on the omitted tail.
pub fn cantor_factors(n: i64) -> (Vec<f64>, f64) {
    let abs = n.unsigned_abs() as i128;
    let scale = PI * abs as f64;
    let mut factors = Vec::new();
    let mut pow3: i128 = 1;
    let mut nine_k = 1.0f64;
    loop {
        pow3 *= 3;
        nine_k *= 9.0;
        // Reduce pi |n| / 3^k modulo 2 pi with exact integer arithmetic and
        // cancel common factors of three so that 3n and n produce identical
        // floating-point arguments.
        let mut num = abs % (2 * pow3);
        let mut den = pow3;
        while num % 3 == 0 && den % 3 == 0 && den > 1 {
            num /= 3;
            den /= 3;
        }
        factors.push((PI * num as f64 / den as f64).cos());
        // sum_{j>k} (pi n 3^{-j})^2 / 2 = (pi n)^2 9^{-k} / 16
        let tail = scale * scale / nine_k / 16.0;
        if tail < TAIL_TOLERANCE {
            return (factors, tail);
        }
    }
}

pub fn cantor_coefficient(n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (factors, _) = cantor_factors(n);
    let magnitude: f64 = factors.iter().product();
    // e(-n/4) = (-i)^n
    let phase = match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    phase * magnitude
}
