//! Complete elliptic integrals and the Jacobi `dn` function.
//!
//! Everything uses the parameter convention `m = k²`, so that
//! `K(m) = ∫_0^{π/2} dθ / sqrt(1 - m sin²θ)`. Negative parameters are allowed
//! wherever the defining integral makes sense.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

/// Parameters at or above this value are rejected by [`ellip_k`].
pub const K_PARAMETER_LIMIT: f64 = 1.0 - 1e-12;

const AGM_TOL: f64 = 1e-16;

/// Arithmetic-geometric mean of `1` and `sqrt(1 - m)`, together with the
/// weighted sum `Σ 2^{n-1} c_n²` (with `c_0² = m`) needed for `E`.
fn agm(m: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() <= AGM_TOL * a {
            break;
        }
        pow *= 2.0;
        sum += pow * c * c;
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind, `m < 1 - 1e-12`.
pub fn ellip_k(m: f64) -> Result<f64> {
    if !(m < K_PARAMETER_LIMIT) {
        return Err(domain("m", m, "(-inf, 1 - 1e-12)"));
    }
    Ok(FRAC_PI_2 / agm(m).0)
}

/// Complete elliptic integral of the second kind, `m <= 1`.
pub fn ellip_e(m: f64) -> Result<f64> {
    if !(m <= 1.0) {
        return Err(domain("m", m, "(-inf, 1]"));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let (a, sum) = agm(m);
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// `K(m)` for `m < 0` through `K(m) = K(m / (m - 1)) / sqrt(1 - m)`, which
/// moves the parameter into `[0, 1)`.
pub fn imaginary_modulus_k(m_neg: f64) -> Result<f64> {
    if !(m_neg < 0.0) {
        return Err(domain("m", m_neg, "(-inf, 0)"));
    }
    Ok(ellip_k(m_neg / (m_neg - 1.0))? / (1.0 - m_neg).sqrt())
}

/// `dK/dm`. Near `m = 0` the closed form `(E - (1-m) K) / (2 m (1-m))`
/// cancels, so the hypergeometric series is summed instead.
pub fn ellip_k_deriv(m: f64) -> Result<f64> {
    if m.abs() < 0.05 {
        // K = π/2 Σ c_n² m^n with c_n = (2n)! / (4^n n!²).
        let mut c = 1.0;
        let mut total = 0.0;
        let mut mp = 1.0;
        for n in 1..40 {
            let nf = n as f64;
            c *= (2.0 * nf - 1.0) / (2.0 * nf);
            total += nf * c * c * mp;
            mp *= m;
            if (nf * c * c * mp).abs() < 1e-18 * total.abs() {
                break;
            }
        }
        return Ok(FRAC_PI_2 * total);
    }
    let k = ellip_k(m)?;
    let e = ellip_e(m)?;
    Ok((e - (1.0 - m) * k) / (2.0 * m * (1.0 - m)))
}

/// Jacobi `dn(u | m)`.
///
/// For `0 <= m < 1` this runs the descending Landen recurrence. Negative
/// parameters are reduced to that range with
/// `dn(u | m) = 1 / dn(u sqrt(1 - m) | -m / (1 - m))`.
pub fn jacobi_dn(u: f64, m: f64) -> Result<f64> {
    if !(m < 1.0) || !u.is_finite() {
        return Err(domain("m", m, "(-inf, 1)"));
    }
    if m < 0.0 {
        let mu = -m / (1.0 - m);
        return Ok(1.0 / dn_landen(u * (1.0 - m).sqrt(), mu));
    }
    Ok(dn_landen(u, m))
}

fn dn_landen(u: f64, m: f64) -> f64 {
    if m == 0.0 {
        return 1.0;
    }
    let mut a = [0.0f64; 32];
    let mut c = [0.0f64; 32];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-16 * a[n] && n < 31 {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (c[k] / a[k] * phi.sin()).asin());
    }
    // dn² = 1 - m sin²φ written as a sum of positive terms.
    let (s, c) = phi.sin_cos();
    (c * c + (1.0 - m) * s * s).sqrt()
}

/// Lower and upper bounds `(π/2) sqrt(artanh(r)/r)` and `(π/2) artanh(r)/r`
/// for `K(r²)`, `0 < r < 1`.
pub fn k_bounds(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(domain("r", r, "(0, 1)"));
    }
    let q = r.atanh() / r;
    Ok((FRAC_PI_2 * q.sqrt(), FRAC_PI_2 * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Trapezoid rule on `[0, π/2]`; the integrands are even and π-periodic,
    /// so this converges geometrically.
    fn periodic_trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = FRAC_PI_2 / n as f64;
        let mut s = 0.5 * (f(0.0) + f(FRAC_PI_2));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    }

    fn k_oracle(m: f64) -> f64 {
        periodic_trapezoid(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 40_000)
    }

    fn e_oracle(m: f64) -> f64 {
        periodic_trapezoid(|t| (1.0 - m * t.sin().powi(2)).sqrt(), 40_000)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(ellip_e(0.0).unwrap(), FRAC_PI_2);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        assert_eq!(jacobi_dn(0.0, 0.7).unwrap(), 1.0);
        assert_eq!(jacobi_dn(3.3, 0.0).unwrap(), 1.0);
        assert!(ellip_k(1.0).is_err());
        assert!(ellip_k(1.0 - 1e-13).is_err());
        assert!(ellip_k(f64::NAN).is_err());
        assert!(ellip_e(1.5).is_err());
        assert!(jacobi_dn(0.1, 1.0).is_err());
    }

    #[test]
    fn against_quadrature() {
        for m in [0.5, -1.0, 0.3, -4.0, 0.9] {
            assert!(rel(ellip_k(m).unwrap(), k_oracle(m)) < 1e-13, "K({m})");
            assert!(rel(ellip_e(m).unwrap(), e_oracle(m)) < 1e-13, "E({m})");
        }
    }

    #[test]
    fn random_parameters_against_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let m = rng.gen_range(-5.0..0.999);
            assert!(rel(ellip_k(m).unwrap(), k_oracle(m)) < 1e-11, "K({m})");
            assert!(rel(ellip_e(m).unwrap(), e_oracle(m)) < 1e-11, "E({m})");
        }
    }

    #[test]
    fn legendre_relation() {
        for i in 1..100 {
            let m = i as f64 / 100.0;
            let (k, e) = (ellip_k(m).unwrap(), ellip_e(m).unwrap());
            let (kp, ep) = (ellip_k(1.0 - m).unwrap(), ellip_e(1.0 - m).unwrap());
            assert!((e * kp + ep * k - k * kp - FRAC_PI_2).abs() < 1e-11, "m={m}");
        }
    }

    #[test]
    fn imaginary_modulus() {
        for m in [-1.0, -0.3, -7.5, -1e-9] {
            let a = imaginary_modulus_k(m).unwrap();
            assert!(rel(a, ellip_k(m).unwrap()) < 1e-12);
        }
        assert!((imaginary_modulus_k(-1e-14).unwrap() - FRAC_PI_2).abs() < 1e-13);
        assert!(imaginary_modulus_k(0.0).is_err());
        assert!(imaginary_modulus_k(0.2).is_err());
    }

    #[test]
    fn k_derivative_matches_differences() {
        for m in [-3.0, -0.5, -0.04, -1e-4, 0.0, 1e-3, 0.049, 0.051, 0.4, 0.9] {
            let h = 1e-5;
            let fd = (ellip_k(m + h).unwrap() - ellip_k(m - h).unwrap()) / (2.0 * h);
            let d = ellip_k_deriv(m).unwrap();
            assert!(rel(d, fd) < 1e-8, "m={m}: {d} vs {fd}");
        }
        assert!((ellip_k_deriv(0.0).unwrap() - std::f64::consts::PI / 8.0).abs() < 1e-16);
    }

    /// Composite Gauss-Legendre (5 points) for smooth integrands.
    fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let x = [0.0, 0.538469310105683091, 0.906179845938663993];
        let w = [0.568888888888888889, 0.478628670499366468, 0.236926885056189088];
        let h = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            let r = 0.5 * h;
            s += w[0] * f(c);
            for k in 1..3 {
                s += w[k] * (f(c + r * x[k]) + f(c - r * x[k]));
            }
        }
        s * 0.5 * h
    }

    #[test]
    fn dn_squared_integrates_to_e() {
        for m in [0.4, 0.85, -0.6, -3.0] {
            let k = ellip_k(m).unwrap();
            let i = gauss5(|u| jacobi_dn(u, m).unwrap().powi(2), 0.0, k, 200);
            assert!((i - ellip_e(m).unwrap()).abs() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn dn_satisfies_its_differential_equation() {
        // (dn')² = (1 - dn²)(dn² - (1 - m)).
        for m in [0.2, 0.7, 0.99, -0.5, -2.0] {
            for i in 0..40 {
                let u = 0.17 * i as f64 - 2.0;
                let h = 1e-5;
                let d = (jacobi_dn(u + h, m).unwrap() - jacobi_dn(u - h, m).unwrap()) / (2.0 * h);
                let dn = jacobi_dn(u, m).unwrap();
                let rhs = (1.0 - dn * dn) * (dn * dn - (1.0 - m));
                assert!((d * d - rhs).abs() < 1e-8, "m={m} u={u}");
            }
        }
    }

    #[test]
    fn dn_extremes() {
        for m in [0.3, 0.9, -1.5] {
            let k = ellip_k(m).unwrap();
            let d = jacobi_dn(k, m).unwrap();
            assert!((d - (1.0 - m).sqrt()).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn k_bound_examples() {
        for r in [0.5, 0.99] {
            let (lo, hi) = k_bounds(r).unwrap();
            let k = ellip_k(r * r).unwrap();
            assert!(lo < k && k < hi);
        }
        let (lo, hi) = k_bounds(1e-8).unwrap();
        assert!((lo - FRAC_PI_2).abs() < 1e-14 && (hi - FRAC_PI_2).abs() < 1e-14);
        assert!(k_bounds(0.0).is_err() && k_bounds(1.0).is_err());
    }

    #[test]
    fn k_bounds_strict_on_grid() {
        for i in 1..=1000 {
            let r = i as f64 / 1001.0;
            let (lo, hi) = k_bounds(r).unwrap();
            let k = ellip_k(r * r).unwrap();
            assert!(lo < k && k < hi, "r={r}");
        }
    }

    proptest! {
        #[test]
        fn dn_is_periodic(u in -10.0..10.0f64, m in -3.0..0.95f64) {
            let k = ellip_k(m).unwrap();
            let a = jacobi_dn(u, m).unwrap();
            let b = jacobi_dn(u + 2.0 * k, m).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
