//! LSH banding parameters.

/// Integration step for the false-positive/false-negative areas.
pub const INTEGRATION_STEP: f64 = 0.01;

/// Probability that two documents with Jaccard `s` share at least one band.
#[inline]
pub fn collision_probability(s: f64, bands: usize, rows: usize) -> f64 {
    1.0 - (1.0 - s.powi(rows as i32)).powi(bands as i32)
}

fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let n = (((hi - lo) / INTEGRATION_STEP) - 1e-9).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h)).sum();
    (0.5 * (f(lo) + f(hi)) + inner) * h
}

/// Area under the S-curve below `threshold` (false positives) and above the
/// curve's complement past it (false negatives).
pub fn banding_errors(threshold: f64, bands: usize, rows: usize) -> (f64, f64) {
    let fp = trapezoid(|s| collision_probability(s, bands, rows), 0.0, threshold);
    let fneg = trapezoid(|s| 1.0 - collision_probability(s, bands, rows), threshold, 1.0);
    (fp, fneg)
}

/// `(bands, rows)` with `bands * rows <= num_perm` minimizing the equally
/// weighted false-positive and false-negative areas.
///
/// Ties go to the larger `bands * rows`, then the larger `bands`.
pub fn optimal_bands(threshold: f64, num_perm: usize) -> (usize, usize) {
    let mut best = (1, 1);
    let mut best_err = f64::INFINITY;
    for bands in 1..=num_perm.max(1) {
        for rows in 1..=(num_perm.max(1) / bands) {
            let (fp, fneg) = banding_errors(threshold, bands, rows);
            let err = 0.5 * fp + 0.5 * fneg;
            let better = err < best_err
                || (err == best_err
                    && (bands * rows, bands) > (best.0 * best.1, best.0));
            if better {
                best_err = err;
                best = (bands, rows);
            }
        }
    }
    best
}
