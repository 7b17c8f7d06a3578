//! One-dimensional minimisation helpers shared by the rate selector.

/// Inverse golden ratio, `(√5 − 1)/2`.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a bracketed 1-D minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGolden {
    pub x: f64,
    pub value: f64,
    /// The coarse grid's best point was one of its two end points.
    pub at_boundary: bool,
}

/// Minimises `f` over `[lo, hi]` (both positive): a logarithmic grid of
/// `points` values locates the best cell, then golden-section search in
/// `ln x` refines it until the bracket's relative width is below `rel_tol`.
/// The best value seen anywhere is returned, so the result is never worse
/// than the grid.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    rel_tol: f64,
) -> GridGolden {
    debug_assert!(lo > 0.0 && hi > lo && points >= 3);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / (points - 1) as f64;
    let grid_x = |i: usize| {
        if i == points - 1 {
            hi
        } else {
            (llo + step * i as f64).exp()
        }
    };

    let mut best = (f64::NAN, f64::INFINITY);
    let mut best_i = 0;
    for i in 0..points {
        let x = grid_x(i);
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let at_boundary = best_i == 0 || best_i == points - 1;

    let mut a = grid_x(best_i.saturating_sub(1)).ln();
    let mut b = grid_x((best_i + 1).min(points - 1)).ln();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    let consider = |x: f64, v: f64, best: &mut (f64, f64)| {
        if v < best.1 {
            *best = (x, v);
        }
    };
    consider(c.exp(), fc, &mut best);
    consider(d.exp(), fd, &mut best);
    // Bracket width in ln-space approximates relative width in x.
    while b - a > rel_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp());
            consider(c.exp(), fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp());
            consider(d.exp(), fd, &mut best);
        }
    }
    let mid = (0.5 * (a + b)).exp();
    consider(mid, f(mid), &mut best);
    GridGolden {
        x: best.0,
        value: best.1,
        at_boundary,
    }
}

/// Golden-section search of `f` over `[lo, hi]` in `ln x` using exactly
/// `budget` evaluations (at least 2). Returns the best evaluated point.
pub fn golden_budgeted<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, budget: usize) -> (f64, f64, usize) {
    debug_assert!(lo > 0.0 && hi >= lo);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    let mut evals = 2;
    let mut best = if fc <= fd { (c.exp(), fc) } else { (d.exp(), fd) };
    while evals < budget.max(2) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp());
            if fc < best.1 {
                best = (c.exp(), fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp());
            if fd < best.1 {
                best = (d.exp(), fd);
            }
        }
        evals += 1;
    }
    (best.0, best.1, evals)
}
