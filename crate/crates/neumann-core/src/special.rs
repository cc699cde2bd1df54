//! Gamma function and a few constants derived from it.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the series in its accurate range
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `Γ(x)`; exact factorials for small positive integers and half-integers.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x > 0.0 && x <= 30.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    if (2.0 * x) == (2.0 * x).floor() && x > 0.0 && x <= 30.0 {
        // Γ(k + 1/2) = (2k-1)!! √π / 2^k
        let k = (x - 0.5) as u64;
        let mut v = PI.sqrt();
        for j in 0..k {
            v *= j as f64 + 0.5;
        }
        return v;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

/// Surface measure of the unit sphere in `R^N`, `2π^{N/2}/Γ(N/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma(5.0), 24.0);
        // Γ(1/3), Γ(5/4) from tables
        assert!((gamma(1.0 / 3.0) / 2.678_938_534_707_747_6 - 1.0).abs() < 1e-13);
        assert!((gamma(1.25) / 0.906_402_477_055_477 - 1.0).abs() < 1e-13);
        // 59! = Γ(60) against the logged value
        let ln59 = (1..60).map(|k| (k as f64).ln()).sum::<f64>();
        assert!((ln_gamma(60.0) / ln59 - 1.0).abs() < 1e-14);
        assert!((gamma(37.3) / (36.3 * gamma(36.3)) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
