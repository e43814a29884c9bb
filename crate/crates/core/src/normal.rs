//! Normal distribution primitives: density, tails, and a full-precision
//! quantile, plus the truncated-normal pieces built on them.

use statrs::function::erf::erfc;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.3989422804014326779399460599343819;

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal survival function, accurate in the upper tail.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Standard normal quantile (Wichura's AS241, ~1 ulp over (0, 1)).
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    // coeffs[0] is the constant term.
    let mut acc = coeffs[7];
    for i in (0..7).rev() {
        acc = acc * x + coeffs[i];
    }
    acc
}

const A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const B: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const D: [f64; 8] = [
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

/// Mass of `N(mu, sigma^2)` on `[0, inf)`; the truncated-normal normalizer.
pub fn tn_normalizer(mu: f64, sigma: f64) -> f64 {
    norm_cdf(mu / sigma)
}

/// Truncated-normal density on `[0, inf)` at `x`.
pub fn tn_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    norm_pdf((x - mu) / sigma) / (sigma * tn_normalizer(mu, sigma))
}

/// Exact inverse-CDF draw from `N(mu, sigma^2)` conditioned on `[0, inf)`.
///
/// Works in the upper tail of the standard normal so that `mu` far below
/// zero keeps full relative precision.
pub fn tn_sample<R: rand::Rng + ?Sized>(mu: f64, sigma: f64, rng: &mut R) -> f64 {
    let alpha = -mu / sigma;
    let tail = norm_sf(alpha);
    let u: f64 = rng.random::<f64>().clamp(1e-300, 1.0 - 1e-16);
    let p = (u * tail).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
    let z = -norm_quantile(p);
    (mu + sigma * z).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quantile_known_values() {
        assert_relative_eq!(norm_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_relative_eq!(norm_quantile(0.5), 0.0, epsilon = 1e-300);
        assert_relative_eq!(norm_quantile(0.0013498980316300945), -3.0, epsilon = 1e-10);
    }

    #[test]
    fn quantile_cdf_round_trip() {
        for &p in &[1e-300, 1e-100, 1e-12, 1e-4, 0.3, 0.5, 0.77, 1.0 - 1e-9] {
            let z = norm_quantile(p);
            let back = if z < 0.0 { norm_sf(-z) } else { norm_cdf(z) };
            assert_relative_eq!(back, p, max_relative = 1e-10);
        }
    }

    #[test]
    fn survival_symmetry() {
        for &z in &[0.0, 0.5, 1.0, 3.7, 9.0] {
            assert_relative_eq!(norm_sf(z), norm_cdf(-z), max_relative = 1e-14);
        }
    }
}
