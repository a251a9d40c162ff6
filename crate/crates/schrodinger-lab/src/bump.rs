//! Smooth compactly supported building blocks shared by the frame, the
//! Littlewood-Paley partition and the example constructions.

use std::f64::consts::FRAC_PI_2;

fn edge(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

/// C-infinity step: 0 for `v <= 0`, 1 for `v >= 1`, with `step(v) + step(1 - v) = 1`.
pub fn step(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v >= 1.0 {
        1.0
    } else {
        let a = edge(v);
        a / (a + edge(1.0 - v))
    }
}

/// `exp(-1/(1-u^2))` on `|u| < 1`, zero outside.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Plateau window: 1 on `|u| <= radius/2`, 0 on `|u| >= radius`, smooth in between.
///
/// Translates by `1.5 * radius` square-sum to one:
/// `sum_m plateau(u - 1.5 m radius, radius)^2 = 1` for every `u`.
pub fn plateau(u: f64, radius: f64) -> f64 {
    let half = 0.5 * radius;
    let v = (u.abs() - half) / half;
    if v >= 1.0 {
        return 0.0;
    }
    (FRAC_PI_2 * step(v)).cos()
}
