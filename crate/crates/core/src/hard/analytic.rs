//! Closed-form gap constant of the bipartite family.

/// Grid step of the coarse scan in [`analytic_q`].
pub const GRID_STEP: f64 = 1e-4;
/// Final bracket width of the golden-section refinement.
pub const REFINE_TOL: f64 = 1e-8;

/// `β(1 − e^{−(1−λ)β/α}) + (1−β)(1 − e^{−(1−λ)β/α}·e^{−λ/(1−α)})`.
pub fn analytic_f(part_alpha: f64, beta: f64, lambda: f64) -> f64 {
    let first = (-(1.0 - lambda) * beta / part_alpha).exp();
    let second = (-lambda / (1.0 - part_alpha)).exp();
    beta * (1.0 - first) + (1.0 - beta) * (1.0 - first * second)
}

/// Maximum of [`analytic_f`] over `λ ∈ [0,1]`, with the maximizer.
pub fn analytic_q(part_alpha: f64, beta: f64) -> (f64, f64) {
    let f = |l: f64| analytic_f(part_alpha, beta, l);
    let steps = (1.0 / GRID_STEP).round() as usize;
    let best = (0..=steps)
        .map(|i| i as f64 * GRID_STEP)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap_or(0.0);
    let (mut lo, mut hi) = ((best - GRID_STEP).max(0.0), (best + GRID_STEP).min(1.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > REFINE_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let candidates = [lo, hi, 0.5 * (lo + hi), best];
    let arg = candidates.into_iter().max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap_or(best);
    (f(arg), arg)
}
