use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Kernel bandwidth and whether it came from the degenerate fallback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub sigma: f64,
    pub fallback: bool,
}

fn check_sets(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<usize> {
    let dim = x.first().or(y.first()).map_or(0, Vec::len);
    if x.iter().chain(y).any(|p| p.len() != dim) {
        return Err(invalid("all sample points must share one dimension"));
    }
    if x.iter().chain(y).flatten().any(|v| !v.is_finite()) {
        return Err(invalid("sample points must be finite"));
    }
    Ok(dim)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// σ solving `d̄ / (2σ²) = 1`, with `d̄` the mean Euclidean distance over
/// all pairs drawn one from each set. Falls back to σ = 1 when `d̄ = 0`.
pub fn median_bandwidth(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<Bandwidth> {
    check_sets(x, y)?;
    if x.is_empty() || y.is_empty() || x.len() + y.len() < 2 {
        return Err(invalid("bandwidth needs at least one point in each set"));
    }
    let row_sums: Vec<f64> = x
        .par_iter()
        .map(|a| y.iter().map(|b| sq_dist(a, b).sqrt()).sum())
        .collect();
    let mean = row_sums.iter().sum::<f64>() / (x.len() * y.len()) as f64;
    if mean > 0.0 {
        Ok(Bandwidth {
            sigma: (mean / 2.0).sqrt(),
            fallback: false,
        })
    } else {
        Ok(Bandwidth {
            sigma: 1.0,
            fallback: true,
        })
    }
}

/// Unbiased MMD² with a Gaussian kernel whose bandwidth is chosen by
/// [`median_bandwidth`].
pub fn mmd2_unbiased(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64> {
    check_sizes(x, y)?;
    let bw = median_bandwidth(x, y)?;
    mmd2_unbiased_with_sigma(x, y, bw.sigma)
}

fn check_sizes(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<()> {
    if x.len() < 2 || y.len() < 2 {
        return Err(invalid(format!(
            "unbiased MMD needs at least 2 points per set, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    check_sets(x, y).map(|_| ())
}

/// Unbiased MMD² for a fixed kernel width `sigma`.
pub fn mmd2_unbiased_with_sigma(x: &[Vec<f64>], y: &[Vec<f64>], sigma: f64) -> Result<f64> {
    check_sizes(x, y)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(format!("kernel width must be positive, got {sigma}")));
    }
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let k = |a: &[f64], b: &[f64]| (-gamma * sq_dist(a, b)).exp();
    // Off-diagonal sum over one set, using symmetry.
    let within = |s: &[Vec<f64>]| -> f64 {
        let rows: Vec<f64> = (0..s.len())
            .into_par_iter()
            .map(|i| s[i + 1..].iter().map(|b| k(&s[i], b)).sum())
            .collect();
        2.0 * rows.iter().sum::<f64>()
    };
    let cross_rows: Vec<f64> = x.par_iter().map(|a| y.iter().map(|b| k(a, b)).sum()).collect();
    let (m, n) = (x.len() as f64, y.len() as f64);
    Ok(within(x) / (m * (m - 1.0)) + within(y) / (n * (n - 1.0)) - 2.0 * cross_rows.iter().sum::<f64>() / (m * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn identical_points_give_zero() {
        for m in 2..10 {
            let x = vec![vec![0.3, -1.0]; m];
            assert_eq!(mmd2_unbiased(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn bandwidth_examples() {
        let b = median_bandwidth(&pts(&[0.0]), &pts(&[2.0])).unwrap();
        assert_eq!(b, Bandwidth { sigma: 1.0, fallback: false });
        let b = median_bandwidth(&pts(&[5.0, 5.0]), &pts(&[5.0])).unwrap();
        assert_eq!(b, Bandwidth { sigma: 1.0, fallback: true });
    }

    #[test]
    fn singleton_sets_are_rejected() {
        assert!(mmd2_unbiased(&pts(&[0.0, 1.0]), &pts(&[10.0])).is_err());
        assert!(mmd2_unbiased_with_sigma(&pts(&[0.0, 1.0]), &pts(&[10.0]), 1.0).is_err());
    }

    #[test]
    fn hand_example() {
        // X = {0, 1}, Y = {10, 12}, σ = 1.
        let k = |d: f64| (-d * d / 2.0).exp();
        let expected = (2.0 * k(1.0)) / 2.0 + (2.0 * k(2.0)) / 2.0 - 2.0 * (k(10.0) + k(12.0) + k(9.0) + k(11.0)) / 4.0;
        let got = mmd2_unbiased_with_sigma(&pts(&[0.0, 1.0]), &pts(&[10.0, 12.0]), 1.0).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![vec![0.0], vec![1.0]];
        assert!(mmd2_unbiased(&x, &y).is_err());
        assert!(mmd2_unbiased_with_sigma(&x, &x, 0.0).is_err());
    }
}
