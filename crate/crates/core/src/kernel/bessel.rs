//! Bessel function of the first kind of order zero.
//!
//! Three regimes: the power series near the origin, Miller's backward
//! recurrence in the transition region and the Hankel asymptotic
//! expansion for large arguments.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_LIMIT: f64 = 5.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// `J0(x)`. Absolute accuracy is at the level of a few ulps of 1.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if !x.is_finite() {
        return if x.is_nan() { f64::NAN } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        series(x)
    } else if x < ASYMPTOTIC_LIMIT {
        miller(x)
    } else {
        hankel(x)
    }
}

/// `sum_l (-1)^l / (l!)^2 (x/2)^(2l)`
fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..60 {
        let lf = l as f64;
        term *= q / (lf * lf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // start well above x so the dominant solution swamps the start-up error
    let mut n = (x + 10.0 + 12.0 * x.cbrt()) as usize;
    n += n % 2;
    let mut next = 0.0; // f_{n+1}
    let mut cur = 1e-30; // f_n
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=n).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
        // cur holds f_{k-1}
        match k - 1 {
            0 => j0 = cur,
            m if m % 2 == 0 => norm += 2.0 * cur,
            _ => {}
        }
    }
    j0 / (j0 + norm)
}

fn hankel(x: f64) -> f64 {
    // t_k = t_{k-1} * (-(2k-1)^2) / (8 k x); P = sum (-1)^j t_{2j}, Q = sum (-1)^j t_{2j+1}
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        t *= -(odd * odd) / (8.0 * kf * x);
        if t.abs() >= last || t.abs() < 1e-19 {
            break;
        }
        last = t.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * t;
        } else {
            q += sign * t;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
