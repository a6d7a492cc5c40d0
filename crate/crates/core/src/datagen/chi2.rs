//! Chi-square quantiles via the regularized lower incomplete gamma function.

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // power series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..10_000 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (sum * log_prefactor.exp()).min(1.0)
    } else {
        // continued fraction for Q(a, x), modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        (1.0 - log_prefactor.exp() * h).max(0.0)
    }
}

pub fn chi2_cdf(x: f64, dof: u32) -> f64 {
    regularized_gamma_p(f64::from(dof) / 2.0, x / 2.0)
}

/// The `p`-quantile of the chi-square distribution with `dof` degrees of
/// freedom, by bisection on the CDF.
///
/// # Panics
///
/// If `p` is not in `(0, 1)` or `dof == 0`.
pub fn chi2_quantile(p: f64, dof: u32) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability must lie in (0, 1), got {p}");
    assert!(dof > 0, "degrees of freedom must be positive");
    let mut lo = 0.0;
    let mut hi = f64::from(dof).max(1.0);
    while chi2_cdf(hi, dof) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn two_dof_closed_form() {
        for p in [0.01, 0.5, 0.9, 0.99, 0.999999] {
            let exact = -2.0 * (1.0f64 - p).ln();
            assert!((chi2_quantile(p, 2) - exact).abs() < 1e-9 * exact.max(1.0), "p = {p}");
        }
        assert!((chi2_quantile(0.99, 2) - 9.210_340_371_976_18).abs() < 1e-9);
    }

    #[test]
    fn cdf_hits_target_probability() {
        for dof in 1..=6 {
            for p in [0.001, 0.05, 0.5, 0.95, 0.99, 0.999999] {
                let q = chi2_quantile(p, dof);
                assert!((chi2_cdf(q, dof) - p).abs() < 1e-10, "dof {dof} p {p}");
            }
        }
    }

    #[test]
    fn reference_values() {
        // frozen from scipy.stats.chi2.ppf
        assert!((chi2_quantile(0.99, 1) - 6.634_896_601_021_214).abs() < 1e-8);
        assert!((chi2_quantile(0.5, 1) - 0.454_936_423_119_572_7).abs() < 1e-8);
        assert!((chi2_quantile(0.99, 3) - 11.344_866_730_144_373).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for dof in [1u32, 2, 3, 5] {
            let d = ChiSquared::new(f64::from(dof)).unwrap();
            for x in [0.01, 0.4549, 1.0, 3.7, 6.6349, 20.0] {
                assert!((chi2_cdf(x, dof) - d.cdf(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let q99 = chi2_quantile(0.99, 1);
        let q50 = chi2_quantile(0.5, 1);
        let n = 2_000_000;
        let (mut below99, mut below50) = (0usize, 0usize);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let s = z * z;
            below99 += usize::from(s <= q99);
            below50 += usize::from(s <= q50);
        }
        // 5 standard errors
        assert!((below99 as f64 / n as f64 - 0.99).abs() < 5.0 * (0.99f64 * 0.01 / n as f64).sqrt());
        assert!((below50 as f64 / n as f64 - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    #[should_panic]
    fn rejects_probability_one() {
        chi2_quantile(1.0, 1);
    }
}
