/// `exp(-1/s)` for `s > 0`, zero otherwise.
#[inline]
fn flat(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 1 for `x <= a`, 0 for `x >= b`, monotone in between.
#[inline]
pub fn smooth_step_down(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        1.0
    } else if x >= b {
        0.0
    } else {
        let y = (x - a) / (b - a);
        let up = flat(1.0 - y);
        up / (up + flat(y))
    }
}

/// Even cutoff with `χ ≡ 1` on `[-1, 1]` and support in `[-2, 2]`.
#[inline]
pub fn chi(x: f64) -> f64 {
    smooth_step_down(x.abs(), 1.0, 2.0)
}
