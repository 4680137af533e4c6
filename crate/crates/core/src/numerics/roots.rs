//! Inversion of monotone scalar functions.

use crate::error::{Result, TailError};

/// Maximum number of geometric bracket expansions.
pub const MAX_EXPANSIONS: usize = 60;

const MAX_ITER: usize = 400;

/// Solve `f(x) = target` for a strictly monotone `f`.
///
/// The bracket `[lo, hi]` is widened geometrically (at most 60 times) until it
/// straddles the target, then narrowed by alternating secant and bisection
/// steps. On return `|f(x) - target| <= tol * max(1, |target|)`, or the bracket
/// has collapsed to adjacent floats.
pub fn invert_monotone<F>(f: F, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !target.is_finite() || !(tol > 0.0) {
        return Err(TailError::domain(format!(
            "invert_monotone needs lo < hi, finite target and tol > 0 (lo={lo}, hi={hi}, target={target}, tol={tol})"
        )));
    }
    let thresh = tol * target.abs().max(1.0);
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo.is_nan() || fhi.is_nan() {
        return Err(TailError::domain("function is NaN at a bracket endpoint"));
    }
    if (flo - target).abs() <= thresh {
        return Ok(lo);
    }
    if (fhi - target).abs() <= thresh {
        return Ok(hi);
    }
    if flo == fhi {
        return Err(TailError::NonMonotone { lo, hi });
    }
    let increasing = fhi > flo;
    // g < 0 below the root, g > 0 above it
    let g = |v: f64| if increasing { v - target } else { target - v };

    let mut expansions = 0;
    while g(flo) > 0.0 || g(fhi) < 0.0 {
        if expansions == MAX_EXPANSIONS {
            return Err(TailError::NoBracket { target, expansions });
        }
        expansions += 1;
        let width = hi - lo;
        if g(fhi) < 0.0 {
            let (nlo, nflo) = (hi, fhi);
            hi += 2.0 * width;
            fhi = f(hi);
            if fhi.is_nan() || g(fhi) < g(nflo) {
                return Err(TailError::NonMonotone { lo: nlo, hi });
            }
            lo = nlo;
            flo = nflo;
        } else {
            let (nhi, nfhi) = (lo, flo);
            // keep positive domains positive
            lo = if lo > 0.0 { lo / 2.0 } else { lo - 2.0 * width };
            flo = f(lo);
            if flo.is_nan() || g(flo) > g(nfhi) {
                return Err(TailError::NonMonotone { lo, hi: nhi });
            }
            hi = nhi;
            fhi = nfhi;
        }
    }

    let mut use_secant = true;
    for _ in 0..MAX_ITER {
        let (glo, ghi) = (g(flo), g(fhi));
        let mut x = if use_secant && ghi != glo {
            lo - glo * (hi - lo) / (ghi - glo)
        } else if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        use_secant = !use_secant;
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        if x <= lo || x >= hi {
            // adjacent floats
            return Ok(if (flo - target).abs() < (fhi - target).abs() { lo } else { hi });
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(TailError::domain(format!("function is NaN at x = {x}")));
        }
        if (fx - target).abs() <= thresh {
            return Ok(x);
        }
        if g(fx) < 0.0 {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if (g(flo) > 0.0) || (g(fhi) < 0.0) {
            return Err(TailError::NonMonotone { lo, hi });
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_inverse() {
        let x = invert_monotone(|x| x, 0.3, 0.0, 1.0, 1e-14).unwrap();
        assert!((x - 0.3).abs() < 1e-14);
    }

    #[test]
    fn decreasing_exponential() {
        let x = invert_monotone(|x| (-x).exp(), (-2.0f64).exp(), 0.0, 1.0, 1e-15).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_expands_downward_for_positive_domains() {
        let x = invert_monotone(|x| x.ln(), -40.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((x.ln() + 40.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target_reports_no_bracket() {
        let err = invert_monotone(|x| x.atan(), 2.0, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, TailError::NoBracket { expansions: MAX_EXPANSIONS, .. }));
    }

    #[test]
    fn non_monotone_is_detected() {
        let err = invert_monotone(|x| -(x - 1.0).powi(2), 0.1, 0.0, 0.5, 1e-12).unwrap_err();
        assert!(matches!(err, TailError::NonMonotone { .. }));
    }

    #[test]
    fn bad_arguments() {
        assert!(invert_monotone(|x| x, 0.5, 1.0, 0.0, 1e-12).is_err());
        assert!(invert_monotone(|x| x, f64::NAN, 0.0, 1.0, 1e-12).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn random_monotone_functions_round_trip(
            a in 0.1f64..5.0,
            p in 0.2f64..4.0,
            c in -3.0f64..3.0,
            decreasing in any::<bool>(),
            x0 in 0.01f64..50.0,
        ) {
            let f = move |x: f64| {
                let v = a * x.powf(p) + c;
                if decreasing { -v } else { v }
            };
            let target = f(x0);
            let x = invert_monotone(f, target, 0.0, 1.0, 1e-12).unwrap();
            prop_assert!((f(x) - target).abs() <= 1e-12 * target.abs().max(1.0));
        }
    }
}
