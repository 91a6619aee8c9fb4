//! Small special-function and numeric helpers shared across modules.

use crate::real::{real, Real};

/// Digamma function.
///
/// Recurrence up to `x >= 6`, then the asymptotic expansion; accurate to
/// ~1e-10 over the arguments used here (positive integers).
pub fn digamma<T: Real>(mut x: T) -> T {
    let mut acc = T::zero();
    let ten = real::<T>(10.0);
    while x < ten {
        acc -= x.recip();
        x += T::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    // ln x - 1/(2x) - 1/(12x^2) + 1/(120x^4) - 1/(252x^6) + 1/(240x^8)
    let series = x.ln() - inv * real(0.5)
        - inv2 * (real::<T>(1.0 / 12.0)
            - inv2 * (real::<T>(1.0 / 120.0)
                - inv2 * (real::<T>(1.0 / 252.0) - inv2 * real::<T>(1.0 / 240.0))));
    acc + series
}

/// Natural log of the modified Bessel function `I_0`.
///
/// Polynomial fits for small argument, asymptotic form for large; stays in
/// the log domain so arguments of order 1e4 and beyond are fine.
pub fn ln_i0<T: Real>(x: T) -> T {
    let x = x.abs();
    let t375 = real::<T>(3.75);
    if x < t375 {
        let t = x / t375;
        let t2 = t * t;
        let p = T::one()
            + t2 * (real::<T>(3.5156229)
                + t2 * (real::<T>(3.0899424)
                    + t2 * (real::<T>(1.2067492)
                        + t2 * (real::<T>(0.2659732)
                            + t2 * (real::<T>(0.0360768) + t2 * real::<T>(0.0045813))))));
        p.ln()
    } else {
        let t = t375 / x;
        let p = real::<T>(0.39894228)
            + t * (real::<T>(0.01328592)
                + t * (real::<T>(0.00225319)
                    + t * (real::<T>(-0.00157565)
                        + t * (real::<T>(0.00916281)
                            + t * (real::<T>(-0.02057706)
                                + t * (real::<T>(0.02635537)
                                    + t * (real::<T>(-0.01647633)
                                        + t * real::<T>(0.00392377))))))));
        x - x.ln() * real(0.5) + p.ln()
    }
}

/// `ln(sum(exp(x_i)))` with the usual max shift; `-inf` for empty input.
pub fn logsumexp<T: Real>(xs: &[T]) -> T {
    let mut max = T::neg_infinity();
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let mut sum = T::zero();
    for &x in xs {
        sum += (x - max).exp();
    }
    max + sum.ln()
}

/// Wrap an angle to `[0, 2*pi)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let y = x - tau * (x / tau).floor();
    if y >= tau || y < T::zero() {
        T::zero()
    } else {
        y
    }
}

/// Standard normal CDF (Abramowitz-Stegun 26.2.17, |err| < 7.5e-8).
pub fn normal_cdf<T: Real>(x: T) -> T {
    let z = x.abs();
    let t = (T::one() + real::<T>(0.2316419) * z).recip();
    let poly = t
        * (real::<T>(0.319381530)
            + t * (real::<T>(-0.356563782)
                + t * (real::<T>(1.781477937)
                    + t * (real::<T>(-1.821255978) + t * real::<T>(1.330274429)))));
    let pdf = (-z * z * real::<T>(0.5)).exp() / (T::TAU()).sqrt();
    let tail = pdf * poly;
    if x >= T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

/// Derive an independent stream seed from a base seed and a tag (splitmix64).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn digamma_known_values() {
        // psi(1) = -gamma, psi(0.5) = -gamma - 2 ln 2, psi(10)
        assert_relative_eq!(digamma(1.0_f64), -0.5772156649015329, epsilon = 1e-10);
        assert_relative_eq!(digamma(0.5_f64), -1.9635100260214235, epsilon = 1e-10);
        assert_relative_eq!(digamma(10.0_f64), 2.251752589066721, epsilon = 1e-10);
        assert_relative_eq!(digamma(100000.0_f64), 100000.0_f64.ln() - 0.5 / 100000.0, epsilon = 1e-9);
    }

    #[test]
    fn ln_i0_known_values() {
        assert_relative_eq!(ln_i0(0.0_f64), 0.0, epsilon = 1e-12);
        assert_relative_eq!(ln_i0(1.0_f64), 1.2660658777520084_f64.ln(), epsilon = 1e-6);
        assert_relative_eq!(ln_i0(2.0_f64), 2.2795853023360673_f64.ln(), epsilon = 1e-6);
        assert_relative_eq!(ln_i0(5.0_f64), 27.239871823604442_f64.ln(), epsilon = 1e-6);
        assert_relative_eq!(ln_i0(10.0_f64), 2815.716628466254_f64.ln(), epsilon = 1e-6);
    }

    #[test]
    fn ln_i0_large_argument_matches_asymptotics() {
        // ln I0(z) ~ z - ln(2 pi z)/2 + ln(1 + 1/(8z) + 9/(128 z^2))
        for &z in &[50.0_f64, 100.0, 1e3, 1e6] {
            let expect = z - 0.5 * (2.0 * std::f64::consts::PI * z).ln()
                + (1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z)).ln();
            assert_relative_eq!(ln_i0(z), expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn logsumexp_matches_direct_sum() {
        let xs = [-1.0_f64, 0.5, 2.0, -20.0];
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(logsumexp(&xs), direct, epsilon = 1e-14);
        assert_eq!(logsumexp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        // large shift does not overflow
        assert_relative_eq!(logsumexp(&[1000.0_f64, 1000.0]), 1000.0 + 2.0_f64.ln());
    }

    #[test]
    fn wrap_angle_range() {
        let tau = std::f64::consts::TAU;
        for &x in &[0.0, 1.0, -1.0, 10.0 * tau + 0.25, -7.5 * tau - 0.25, -1e-18, tau] {
            let w = wrap_angle(x);
            assert!((0.0..tau).contains(&w), "wrap({x}) = {w}");
            // same point on the circle
            let d = (x - w) / tau;
            assert_relative_eq!(d, d.round(), epsilon = 1e-9);
        }
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_relative_eq!(normal_cdf(0.0_f64), 0.5, epsilon = 1e-7);
        assert_relative_eq!(normal_cdf(1.0_f64), 0.8413447460685429, epsilon = 1e-7);
        assert_relative_eq!(normal_cdf(-1.0_f64), 0.15865525393145707, epsilon = 1e-7);
        assert_relative_eq!(normal_cdf(3.0_f64), 0.9986501019683699, epsilon = 1e-7);
    }

    #[test]
    fn derive_seed_decorrelates_tags() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }
}
