//! Modified Bessel function of the second kind, real order and argument.
//!
//! K_μ and K_{μ+1} for |μ| ≤ 1/2 come from Temme's series when x < 2 and from
//! Steed's continued fraction otherwise; integer steps in order use the
//! (stable) upward recurrence.

use std::f64::consts::PI;

use crate::error::{Result, TailError};

// Taylor coefficients of 1/Γ(1+z) = Σ C[k] z^k.
const RGAMMA_TAYLOR: [f64; 30] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
];

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const RESCALE: f64 = 1e250;

/// Returns (1/Γ(1+μ), 1/Γ(1-μ), gam1, gam2) with
/// gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ) and gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mut even = 0.0;
    let mut odd_over_mu = 0.0;
    let mu2 = mu * mu;
    let mut pow = 1.0;
    for k in (0..RGAMMA_TAYLOR.len()).step_by(2) {
        even += RGAMMA_TAYLOR[k] * pow;
        if k + 1 < RGAMMA_TAYLOR.len() {
            odd_over_mu += RGAMMA_TAYLOR[k + 1] * pow;
        }
        pow *= mu2;
    }
    let gampl = even + mu * odd_over_mu;
    let gammi = even - mu * odd_over_mu;
    (gampl, gammi, -odd_over_mu, even)
}

/// e^x K_μ(x) and e^x K_{μ+1}(x) for |μ| ≤ 1/2.
fn scaled_pair(mu: f64, x: f64) -> (f64, f64) {
    let xi = 1.0 / x;
    if x < 2.0 {
        let x1 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x1.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gampl, gammi, gam1, gam2) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x1 * x1;
        let mut sum1 = p;
        let mu2 = mu * mu;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * 2.0 * xi * scale)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        let h = a1 * h;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        (kmu, kmu * (mu + x + 0.5 - h) * xi)
    }
}

/// e^x K_ν(x) as mantissa · exp(log_scale), immune to overflow in the recurrence.
fn scaled_parts(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(TailError::domain(format!("bessel_k requires finite nu and x > 0, got nu={nu}, x={x}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1) = scaled_pair(mu, x);
    let mut log_scale = 0.0;
    let two_over_x = 2.0 / x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * two_over_x * k1 + kmu;
        kmu = k1;
        k1 = next;
        if k1 > RESCALE {
            kmu /= RESCALE;
            k1 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    Ok((kmu, log_scale))
}

/// K_ν(x) for real ν and x > 0. May overflow to +∞ for large ν and tiny x;
/// use [`ln_bessel_k`] there.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, ls) = scaled_parts(nu, x)?;
    Ok(m * (ls - x).exp())
}

/// e^x K_ν(x).
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let (m, ls) = scaled_parts(nu, x)?;
    Ok(m * ls.exp())
}

/// ln K_ν(x), finite wherever K_ν(x) is a positive finite real number in
/// extended range.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, ls) = scaled_parts(nu, x)?;
    Ok(m.ln() + ls - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::{integrate, QuadratureSpec};
    use proptest::prelude::*;

    // K_ν(x) at 30 significant digits.
    const REFERENCE: [(f64, f64, f64); 17] = [
        (0.0, 1e-06, 13.931_442_073_626_419_459),
        (0.0, 0.3, 1.372_460_060_544_297_410_6),
        (0.25, 1.7, 0.167_972_840_125_318_915_92),
        (0.5, 1.0, 0.461_068_504_447_894_558_44),
        (1.0, 2.0, 0.139_865_881_816_522_427_28),
        (1.0, 0.001, 999.996_238_156_085_553_46),
        (1.5, 2.5, 0.091_092_320_415_613_984_504),
        (2.0, 2.0, 0.253_759_754_566_055_862_94),
        (2.5, 0.01, 375_987.974_779_794_807_81),
        (3.3, 5.0, 0.009_791_521_116_214_422_675_1),
        (5.0, 1e-06, 3.839_999_999_999_760_868_8e32),
        (7.5, 12.0, 0.000_019_821_049_684_594_501_791),
        (10.0, 1e-06, 1.857_945_599_999_949_231_2e68),
        (10.0, 3.0, 2_459.620_422_056_946_773_9),
        (10.0, 50.0, 9.150_988_209_987_996_111_5e-23),
        (0.7, 50.0, 3.426_753_929_472_965_402_6e-23),
        (4.0, 30.0, 2.771_259_175_987_624_92e-14),
    ];

    #[test]
    fn matches_reference_table() {
        for (nu, x, want) in REFERENCE {
            let got = bessel_k(nu, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn half_integer_closed_form() {
        let want = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((bessel_k(0.5, 1.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.461_068).abs() < 1e-6);
        for x in [0.01, 0.7, 1.9, 2.1, 10.0, 40.0] {
            let closed = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(((bessel_k(0.5, x).unwrap() - closed) / closed).abs() < 1e-13);
        }
    }

    #[test]
    fn integral_representation_oracle() {
        let spec = QuadratureSpec::with_tolerance(1e-13);
        for (nu, x) in [(2.0, 2.0), (0.3, 0.8), (3.7, 4.0), (1.0, 9.0)] {
            let integrand = |t: f64| {
                let e = -x * t.cosh();
                if e == f64::NEG_INFINITY {
                    0.0
                } else {
                    0.5 * ((e + nu * t).exp() + (e - nu * t).exp())
                }
            };
            let oracle = integrate(integrand, 0.0, f64::INFINITY, &spec).unwrap();
            let got = bessel_k(nu, x).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-10, "nu={nu} x={x}: {got} vs {oracle}");
        }
        assert!((bessel_k(2.0, 2.0).unwrap() - 0.253_760).abs() < 1e-6);
    }

    #[test]
    fn log_and_scaled_forms_are_consistent() {
        for (nu, x) in [(0.2, 0.5), (3.0, 2.0), (9.5, 45.0)] {
            let k = bessel_k(nu, x).unwrap();
            assert!((ln_bessel_k(nu, x).unwrap() - k.ln()).abs() < 1e-13 * k.ln().abs().max(1.0));
            assert!(((bessel_k_scaled(nu, x).unwrap() - k * x.exp()) / (k * x.exp())).abs() < 1e-13);
        }
        // beyond f64 range, ln K_ν(x) ~ ln(Γ(ν)/2) + ν ln(2/x)
        let nu: f64 = 60.0;
        let x: f64 = 1e-8;
        let approx = crate::numerics::special::ln_gamma_unchecked(nu) - 2f64.ln() + nu * (2.0 / x).ln();
        assert!((ln_bessel_k(nu, x).unwrap() - approx).abs() < 1e-9);
        assert!(bessel_k(700.0, 1e-3).unwrap().is_infinite());
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -2.0).is_err());
        assert!(ln_bessel_k(1.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn order_symmetry(nu in 0.0f64..10.0, x in 1e-6f64..50.0) {
            prop_assert_eq!(bessel_k(-nu, x).unwrap(), bessel_k(nu, x).unwrap());
        }

        #[test]
        fn three_term_recurrence(nu in 1.0f64..9.0, x in 1e-3f64..50.0) {
            let lhs = bessel_k(nu + 1.0, x).unwrap();
            let rhs = bessel_k(nu - 1.0, x).unwrap() + 2.0 * nu / x * bessel_k(nu, x).unwrap();
            prop_assert!(((lhs - rhs) / lhs).abs() < 1e-8);
        }
    }
}
