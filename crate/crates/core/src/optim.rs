//! One-dimensional search helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximize a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Returns `(argmax, max)`, including the endpoints as candidates.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while b - a > tol && iters < 200 {
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
        iters += 1;
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximize `f` on `[lo, hi]`: scan `points` uniform nodes, then refine around
/// the best node with golden-section search to `tol`.
pub(crate) fn grid_golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64) {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best_f = f64::NEG_INFINITY;
    for i in 0..points {
        let x = if i + 1 == points { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let a = (lo + step * best_i.saturating_sub(1) as f64).max(lo);
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let refined = golden_max(&f, a, b, tol);
    if refined.1 >= best_f {
        refined
    } else {
        let x = if best_i + 1 == points { hi } else { lo + step * best_i as f64 };
        (x, best_f)
    }
}

/// Root of an increasing `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`.
/// Returns `None` without a sign change.
pub(crate) fn bisect_increasing(g: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if ga > 0.0 || gb < 0.0 {
        return None;
    }
    if ga == 0.0 {
        return Some(a);
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            return Some(mid);
        }
        if g(mid) <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}
