//! One-dimensional maximization: a coarse grid to locate the best bracket,
//! then golden-section refinement inside it.

/// Location and value of a maximum, with the number of objective calls spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        evaluations += 1;
        // Bracket cannot shrink further in floating point.
        if x1 >= x2 {
            break;
        }
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Maximum { x, value, evaluations }
}

/// Scans `grid_points` evenly spaced points of `[lo, hi]` (endpoints
/// included), then refines around the best one by golden section.
pub fn grid_golden_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> Maximum {
    assert!(hi >= lo, "empty interval [{lo}, {hi}]");
    if hi - lo <= tol {
        let x = 0.5 * (lo + hi);
        return Maximum { x, value: f(x), evaluations: 1 };
    }
    let n = grid_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let point = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };
    let (mut best_i, mut best_v) = (0, f64::NEG_INFINITY);
    for i in 0..n {
        let v = f(point(i));
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let a = point(best_i.saturating_sub(1));
    let b = point((best_i + 1).min(n - 1));
    let refined = golden_section_max(&f, a, b, tol);
    let evaluations = n + refined.evaluations;
    if refined.value >= best_v {
        Maximum { evaluations, ..refined }
    } else {
        Maximum { x: point(best_i), value: best_v, evaluations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_parabola_peak() {
        let m = grid_golden_max(|x| -(x - 0.3217).powi(2), 0.0, 1.0, 100, 1e-10);
        assert!((m.x - 0.3217).abs() < 1e-6);
    }

    #[test]
    fn finds_boundary_peak() {
        let m = grid_golden_max(|x| x, 0.0, 2.0, 50, 1e-10);
        assert!((m.x - 2.0).abs() < 1e-8);
        let m = grid_golden_max(|x| -x, 0.0, 2.0, 50, 1e-10);
        assert!(m.x < 1e-8);
    }

    #[test]
    fn degenerate_interval() {
        let m = grid_golden_max(|x| x, 0.5, 0.5, 50, 1e-10);
        assert_eq!(m.x, 0.5);
    }

    #[test]
    fn golden_handles_multimodal_with_grid() {
        // Two peaks, the right one higher.
        let f = |x: f64| (-(x - 0.2).powi(2) * 200.0).exp() + 1.5 * (-(x - 0.8).powi(2) * 200.0).exp();
        let m = grid_golden_max(f, 0.0, 1.0, 200, 1e-10);
        assert!((m.x - 0.8).abs() < 1e-4);
    }
}
