//! Small statistical helpers shared by the estimators and the tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Goodness of fit of `bins` against the uniform distribution.
pub fn chi_square_uniform_p_value(bins: &[u64]) -> f64 {
    let total: u64 = bins.iter().sum();
    if bins.len() < 2 || total == 0 {
        return 1.0;
    }
    let expected = total as f64 / bins.len() as f64;
    let stat: f64 = bins
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    chi_square_sf(stat, bins.len() - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test between two histograms over the
/// same bins.
///
/// Adjacent bins are pooled left to right until each pooled bin holds at
/// least `min_pooled` combined counts; a short tail is folded into the last
/// pooled bin. Sample sizes may differ.
pub fn two_sample_chi_square(a: &[u64], b: &[u64], min_pooled: u64) -> ChiSquareTest {
    assert_eq!(a.len(), b.len(), "histograms must share bins");
    let mut pooled: Vec<(u64, u64)> = Vec::new();
    let (mut ra, mut rb) = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        ra += x;
        rb += y;
        if ra + rb >= min_pooled.max(1) {
            pooled.push((ra, rb));
            ra = 0;
            rb = 0;
        }
    }
    if ra + rb > 0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += ra;
                last.1 += rb;
            }
            None => pooled.push((ra, rb)),
        }
    }

    let na: u64 = pooled.iter().map(|p| p.0).sum();
    let nb: u64 = pooled.iter().map(|p| p.1).sum();
    if na == 0 || nb == 0 || pooled.len() < 2 {
        return ChiSquareTest { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let ka = (nb as f64 / na as f64).sqrt();
    let kb = (na as f64 / nb as f64).sqrt();
    let statistic: f64 = pooled
        .iter()
        .map(|&(x, y)| {
            let diff = ka * x as f64 - kb * y as f64;
            diff * diff / (x + y) as f64
        })
        .sum();
    let dof = pooled.len() - 1;
    ChiSquareTest { statistic, dof, p_value: chi_square_sf(statistic, dof) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_histograms_have_zero_statistic() {
        let h = [50, 40, 30, 20, 10];
        let t = two_sample_chi_square(&h, &h, 10);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 4);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn very_different_histograms_reject() {
        let t = two_sample_chi_square(&[1000, 10, 10], &[10, 1000, 10], 10);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn pooling_merges_sparse_bins() {
        // bins of size 3 each pool in pairs of 6 < 10 => triples of 9 < 10 => four-wide
        let a = [3, 3, 3, 3, 3, 3, 3, 3];
        let t = two_sample_chi_square(&a, &a, 10);
        // (6+6) reaches 12 after two bins; 8 bins -> 4 pooled bins
        assert_eq!(t.dof, 3);
    }

    #[test]
    fn unequal_sample_sizes_scale() {
        // b is exactly 2x a: no evidence of difference
        let a = [100, 50, 25];
        let b = [200, 100, 50];
        let t = two_sample_chi_square(&a, &b, 10);
        assert!(t.statistic.abs() < 1e-9);
    }

    #[test]
    fn uniform_chi_square() {
        assert!(chi_square_uniform_p_value(&[100; 10]) > 0.999);
        assert!(chi_square_uniform_p_value(&[200, 0, 100, 100]) < 1e-6);
    }

    #[test]
    fn std_error() {
        assert!((binomial_std_error(0.5, 100) - 0.05).abs() < 1e-15);
    }
}
