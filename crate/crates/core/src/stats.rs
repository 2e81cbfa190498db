//! Tie-aware Kendall tau-b, Pearson correlation, and simple OLS regression
//! with a two-sided slope significance test.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Tie-aware Kendall rank correlation between two equal-length vectors.
///
/// `tau_b = (C - D) / sqrt((n0 - n1) (n0 - n2))` where `n0` is the number of
/// pairs, `n1`/`n2` the pairs tied in x/y, and pairs tied in both count in
/// neither C nor D. Runs in `O(n log n)` via merge counting.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { which: "x" });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { which: "y" });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::TauUndefined { which: "x" });
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::TauUndefined { which: "y" });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b]).expect("finite").then(y[a].partial_cmp(&y[b]).expect("finite"))
    });

    let tied = |count: u64| count * count.saturating_sub(1) / 2;

    // runs of equal x, and of equal (x, y), in x-major order
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for w in 1..n {
        let (prev, curr) = (order[w - 1], order[w]);
        if x[curr] == x[prev] {
            run_x += 1;
            if y[curr] == y[prev] {
                run_xy += 1;
            } else {
                tied_xy += tied(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += tied(run_x);
            tied_xy += tied(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += tied(run_x);
    tied_xy += tied(run_xy);

    // merge-sort the y sequence, counting inversions = discordant pairs
    let mut seq: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buffer = vec![0.0f64; n];
    let mut swaps = 0u64;
    let mut width = 1usize;
    while width < n {
        let mut lo = 0usize;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut out) = (lo, mid, lo);
            while i < mid || j < hi {
                if i < mid && (j >= hi || seq[i] <= seq[j]) {
                    buffer[out] = seq[i];
                    i += 1;
                } else {
                    buffer[out] = seq[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                out += 1;
            }
            lo = hi;
        }
        seq[..n].copy_from_slice(&buffer[..n]);
        width *= 2;
    }

    let mut tied_y = 0u64;
    let mut run_y = 1u64;
    for w in 1..n {
        if seq[w] == seq[w - 1] {
            run_y += 1;
        } else {
            tied_y += tied(run_y);
            run_y = 1;
        }
    }
    tied_y += tied(run_y);

    let n0 = n as u64 * (n as u64 - 1) / 2;
    let numerator = n0 as i64 - tied_x as i64 - tied_y as i64 + tied_xy as i64 - 2 * swaps as i64;
    Ok(tau_b_from_counts(numerator, n0, tied_x, tied_y))
}

/// Final tau-b expression shared by fast and naive counting routes so the
/// two agree bit-for-bit on identical integer counts.
pub fn tau_b_from_counts(concordant_minus_discordant: i64, n0: u64, tied_x: u64, tied_y: u64) -> f64 {
    let denominator = ((n0 - tied_x) as f64 * (n0 - tied_y) as f64).sqrt();
    (concordant_minus_discordant as f64 / denominator).clamp(-1.0, 1.0)
}

/// Pearson linear correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(Error::ZeroVariance { which: "x".into() });
    }
    if var_y == 0.0 {
        return Err(Error::ZeroVariance { which: "y".into() });
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Simple linear regression of `y` on `x` by ordinary least squares.
#[derive(Debug, Clone, Copy)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p-value of the slope, from the exact Student-t CDF with
    /// `n - 2` degrees of freedom.
    pub p_value: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn ols_regression(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance { which: "x".into() });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let residual = yi - (intercept + slope * xi);
            residual * residual
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 0.0 };

    let df = (n - 2) as f64;
    let se_slope = (sse / df / sxx).sqrt();
    let p_value = if se_slope == 0.0 {
        if slope == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let t = slope / se_slope;
        student_t_two_sided(t.abs(), df)
    };

    Ok(RegressionResult { slope, intercept, p_value, r_squared, n })
}

/// `P(|T| >= t)` for the Student-t distribution with `df` degrees of
/// freedom, via the regularized incomplete beta function.
pub fn student_t_two_sided(t_abs: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    // symmetric tail avoids 1 - cdf cancellation
    (2.0 * dist.cdf(-t_abs)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tau_identical_rankings() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau_b(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn tau_reversed_rankings() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau_b(&x, &y).unwrap(), -1.0);
    }

    #[test]
    fn tau_single_discordant_pair() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        assert_abs_diff_eq!(kendall_tau_b(&x, &y).unwrap(), 4.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn tau_with_ties_matches_oracle() {
        let x = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let y = [1.0, 2.0, 2.0, 3.0, 3.0, 4.0];
        assert_eq!(kendall_tau_b(&x, &y).unwrap(), tau_b_naive(&x, &y));
        // value cross-checked against R cor.test / scipy
        assert_abs_diff_eq!(kendall_tau_b(&x, &y).unwrap(), 0.8006407690254358, epsilon = 1e-15);
    }

    #[test]
    fn tau_all_tied_is_error() {
        let x = [2.0, 2.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(kendall_tau_b(&x, &y), Err(Error::TauUndefined { which: "x" })));
        assert!(matches!(kendall_tau_b(&y, &x), Err(Error::TauUndefined { which: "y" })));
    }

    #[test]
    fn tau_rejects_bad_input() {
        assert!(matches!(kendall_tau_b(&[1.0], &[1.0]), Err(Error::TooFewObservations { .. })));
        assert!(matches!(
            kendall_tau_b(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            kendall_tau_b(&[1.0, f64::NAN], &[1.0, 2.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    /// O(n^2) pair-enumeration oracle, sharing only the final closed-form
    /// expression with the fast path.
    pub(crate) fn tau_b_naive(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        let mut tied_x = 0u64;
        let mut tied_y = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = x[i].partial_cmp(&x[j]).unwrap();
                let dy = y[i].partial_cmp(&y[j]).unwrap();
                use std::cmp::Ordering::Equal;
                match (dx, dy) {
                    (Equal, Equal) => {
                        tied_x += 1;
                        tied_y += 1;
                    }
                    (Equal, _) => tied_x += 1,
                    (_, Equal) => tied_y += 1,
                    (a, b) if a == b => concordant += 1,
                    _ => discordant += 1,
                }
            }
        }
        let n0 = n as u64 * (n as u64 - 1) / 2;
        tau_b_from_counts(concordant - discordant, n0, tied_x, tied_y)
    }

    #[test]
    fn pearson_exact_linear() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_eq!(pearson(&x, &y).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn pearson_half() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 2.0];
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pearson_zero_variance_is_error() {
        let x = [1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(pearson(&x, &y), Err(Error::ZeroVariance { which }) if which == "x"));
        assert!(matches!(pearson(&y, &x), Err(Error::ZeroVariance { which }) if which == "y"));
    }

    #[test]
    fn ols_perfect_fit() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 0.5, 1.0];
        let fit = ols_regression(&x, &y).unwrap();
        assert_eq!(fit.slope, 0.5);
        assert_eq!(fit.intercept, 0.0);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.p_value, 0.0);
    }

    #[test]
    fn ols_constant_response() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [5.0, 5.0, 5.0, 5.0];
        let fit = ols_regression(&x, &y).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
        assert_eq!(fit.p_value, 1.0);
    }

    #[test]
    fn ols_matches_high_precision_reference() {
        // Expected values from a 50-digit reference computation.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let y = [2.3, 1.8, 4.1, 3.9, 6.2, 5.8, 8.1, 7.6, 9.9, 10.4];
        let fit = ols_regression(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.9654545454545455, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.intercept, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 0.9497271121719985, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.p_value, 1.782867241979133e-6, epsilon = 1e-10);
        assert_eq!(fit.n, 10);
    }

    #[test]
    fn ols_rejects_degenerate_input() {
        assert!(matches!(
            ols_regression(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewObservations { .. })
        ));
        assert!(matches!(
            ols_regression(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance { .. })
        ));
    }

    #[test]
    fn student_t_reference_points() {
        // 50-digit reference values for the two-sided tail.
        assert_abs_diff_eq!(
            student_t_two_sided(2.228138851986273, 10.0),
            0.05,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            student_t_two_sided(1.0, 5.0),
            0.3632174676491226,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            student_t_two_sided(3.5, 28.0),
            0.001576472141235464,
            epsilon = 1e-10
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Vectors drawn from a small alphabet so ties are common, with at
        /// least two distinct values guaranteed in each.
        fn arb_tied_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (2usize..60).prop_flat_map(|n| {
                let x = proptest::collection::vec(0u8..6, n);
                let y = proptest::collection::vec(0u8..6, n);
                (x, y).prop_map(|(mut x, mut y)| {
                    x[0] = 7;
                    y[0] = 7;
                    (
                        x.into_iter().map(f64::from).collect(),
                        y.into_iter().map(f64::from).collect(),
                    )
                })
            })
        }

        proptest! {
            #[test]
            fn fast_tau_equals_naive_oracle((x, y) in arb_tied_pair()) {
                prop_assert_eq!(kendall_tau_b(&x, &y).unwrap(), tests::tau_b_naive(&x, &y));
            }

            #[test]
            fn tau_is_symmetric_and_bounded((x, y) in arb_tied_pair()) {
                let a = kendall_tau_b(&x, &y).unwrap();
                let b = kendall_tau_b(&y, &x).unwrap();
                prop_assert_eq!(a, b);
                prop_assert!((-1.0..=1.0).contains(&a));
            }

            #[test]
            fn tau_invariant_under_monotone_transform((x, y) in arb_tied_pair()) {
                let stretched: Vec<f64> = x.iter().map(|v| v * v + 3.0 * v + 1.0).collect();
                prop_assert_eq!(
                    kendall_tau_b(&x, &y).unwrap(),
                    kendall_tau_b(&stretched, &y).unwrap()
                );
            }

            #[test]
            fn pearson_symmetric_and_affine_invariant(
                pair in (2usize..40).prop_flat_map(|n| (
                    proptest::collection::vec(-100.0f64..100.0, n),
                    proptest::collection::vec(-100.0f64..100.0, n),
                ))
            ) {
                let (x, y) = pair;
                let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) else { return Ok(()); };
                prop_assert!((a - b).abs() < 1e-12);
                let shifted: Vec<f64> = y.iter().map(|v| 2.5 * v - 4.0).collect();
                let c = pearson(&x, &shifted).unwrap();
                prop_assert!((a - c).abs() < 1e-9);
            }
        }
    }
}
