//! Scalar root finding shared by the solvers.

/// Root of a continuous function on `[a, b]` whose endpoint values have
/// opposite signs (or one is zero). Illinois false position with a bisection
/// step whenever the bracket fails to halve.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum(), "root not bracketed");
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = (b - a).abs();
        if width <= xtol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Largest `x` in `[lo, hi]` with `pred(x)` true, given `pred(lo)`.
pub fn bisect_last_true<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    if pred(hi) {
        return hi;
    }
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = illinois(f, 0.0, f(0.0), 2.0, f(2.0), 1e-14, 200);
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn handles_steep_functions() {
        let f = |x: f64| (20.0 * x).exp() - 1e6;
        let r = illinois(f, 0.0, f(0.0), 1.0, f(1.0), 1e-13, 200);
        assert!((r - 1e6f64.ln() / 20.0).abs() < 1e-11);
    }

    #[test]
    fn bisection_edge() {
        let x = bisect_last_true(|x| x <= 0.3, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-11);
        assert_eq!(bisect_last_true(|_| true, 0.0, 1.0, 1e-9), 1.0);
    }
}
