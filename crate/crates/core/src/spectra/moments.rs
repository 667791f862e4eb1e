use rayon::prelude::*;

use crate::error::Result;
use crate::laplacian::LaplacianView;
use crate::numeric::pairwise_sum;

/// `(1/n) sum_i lambda_i^k`, pairwise-summed.
pub fn empirical_moment(eigs: &[f64], k: u32) -> f64 {
    let powers: Vec<f64> = eigs.iter().map(|x| x.powi(k as i32)).collect();
    pairwise_sum(&powers) / eigs.len() as f64
}

fn apply_power(view: &LaplacianView, mut v: Vec<f64>, power: u32) -> Result<Vec<f64>> {
    for _ in 0..power {
        v = view.apply(&v)?;
    }
    Ok(v)
}

/// `(1/n) Tr(M^k)` from the columns `M^k e_i`, without an eigensolve.
/// Costs `n * k` applications of the view.
pub fn trace_moment(view: &LaplacianView, k: u32) -> Result<f64> {
    let n = view.n();
    let (lo, hi) = (k / 2, k - k / 2);
    let diag: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let left = apply_power(view, e, lo)?;
            let right = if hi == lo { left.clone() } else { view.apply(&left)? };
            let prod: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
            Ok(pairwise_sum(&prod))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&diag) / n as f64)
}

pub(crate) fn quadratic_form_power(view: &LaplacianView, z: Vec<f64>, k: u32) -> Result<f64> {
    let left = apply_power(view, z, k / 2)?;
    let right = if k % 2 == 0 { left.clone() } else { view.apply(&left)? };
    let prod: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum(&prod))
}
