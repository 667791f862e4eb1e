use crate::error::{Error, Result};

use super::reference::ReferenceDistribution;

fn check_sorted(eigs: &[f64]) -> Result<()> {
    if eigs.is_empty() {
        return Err(Error::InvalidParameter("empty eigenvalue list".into()));
    }
    if let Some(i) = eigs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("eigenvalues must be sorted ascending".into()));
    }
    Ok(())
}

/// Kolmogorov–Smirnov distance between the empirical distribution of `eigs`
/// and `reference`, evaluated on both sides of every jump.
pub fn ks_distance(eigs: &[f64], reference: &ReferenceDistribution) -> Result<f64> {
    check_sorted(eigs)?;
    let n = eigs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in eigs.iter().enumerate() {
        let f = reference.cdf(x);
        sup = sup.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    Ok(sup.min(1.0))
}

/// Two-sample KS distance between two sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Two-sample KS distance at resolution `tol`: the smallest `D` with
/// `F_a(x) <= F_b(x + tol) + D` and `F_b(x) <= F_a(x + tol) + D` for all `x`.
/// Equal to [`ks_two_sample`] at `tol = 0`. A positive `tol` absorbs the
/// rounding of an eigensolver on eigenvalues that coincide exactly.
pub fn ks_two_sample_tol(a: &[f64], b: &[f64], tol: f64) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
    }
    let cdf = |xs: &[f64], x: f64| xs.partition_point(|&v| v <= x) as f64 / xs.len() as f64;
    let one_sided = |p: &[f64], q: &[f64]| {
        p.iter().fold(0.0f64, |sup, &x| sup.max(cdf(p, x) - cdf(q, x + tol)))
    };
    Ok(one_sided(a, b).max(one_sided(b, a)).max(0.0))
}

/// Wasserstein-1 distance via the quantile coupling: each eigenvalue is
/// matched to a `1/n` slice of the reference mass, and the cost of every slice
/// is evaluated in closed form from the cdf and the partial first moment.
pub fn wasserstein1(eigs: &[f64], reference: &ReferenceDistribution) -> Result<f64> {
    check_sorted(eigs)?;
    let n = eigs.len();
    let g = |x: f64| reference.partial_first_moment(x);
    let mut lo_x = reference.support().0;
    let mut total = 0.0;
    for (i, &lambda) in eigs.iter().enumerate() {
        let hi_x = if i + 1 == n { reference.support().1 } else { reference.quantile((i + 1) as f64 / n as f64) };
        let (fa, fb) = (reference.cdf(lo_x), reference.cdf(hi_x));
        let split = lambda.clamp(lo_x, hi_x);
        let fs = reference.cdf(split);
        let below = lambda * (fs - fa) - (g(split) - g(lo_x));
        let above = (g(hi_x) - g(split)) - lambda * (fb - fs);
        total += below.max(0.0) + above.max(0.0);
        lo_x = hi_x;
    }
    Ok(total)
}
