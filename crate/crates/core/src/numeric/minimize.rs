//! Golden-section search for unimodal (in practice convex) scalar functions.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes `f` on `[a, b]`, stopping once the bracket is narrower than
/// `xtol`. Returns `(argmin, min)`; endpoints are included in the final
/// comparison so boundary minima are reported exactly.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let fa0 = f(a);
    let fb0 = f(b);
    let (a_end, b_end) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    if fa0 <= best.1 {
        best = (a_end, fa0);
    }
    if fb0 < best.1 {
        best = (b_end, fb0);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_minimum() {
        let (x, fx) = golden_min(|x| (x - 1.234).powi(2) + 3.0, -10.0, 10.0, 1e-10);
        assert!((x - 1.234).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimum_is_exact() {
        let (x, fx) = golden_min(|x| x, 2.0, 5.0, 1e-9);
        assert_eq!(x, 2.0);
        assert_eq!(fx, 2.0);
    }

    #[test]
    fn infinite_plateau_side() {
        let (x, _) = golden_min(
            |x| if x < 0.5 { f64::INFINITY } else { (x - 0.7).abs() },
            0.0,
            1.0,
            1e-9,
        );
        assert!((x - 0.7).abs() < 1e-8);
    }
}
