//! Univariate truncated-normal estimators of the mean and variance
//! parameters, their asymptotic variances, and the Cramer-Rao bounds.

use crate::error::{Error, Result};
use crate::hfun::HSpec;
use crate::normal::{norm_sf, tn_normalizer, tn_pdf};
use crate::quad::{integrate, QuadratureConfig};

/// Which parameter is being estimated (the other is known).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnivariateTarget {
    /// Estimate mu with sigma^2 known.
    Mu,
    /// Estimate sigma^2 with mu known.
    Sigma2,
}

impl UnivariateTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnivariateTarget::Mu => "mu",
            UnivariateTarget::Sigma2 => "sigma2",
        }
    }
}

/// A grid study over one parameter with a list of weight functions.
#[derive(Debug, Clone)]
pub struct UnivariateStudy {
    pub target: UnivariateTarget,
    pub known_value: f64,
    pub grid: Vec<f64>,
    pub hspecs: Vec<HSpec>,
}

/// One output row of a study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub target: UnivariateTarget,
    pub param0: f64,
    pub hspec: HSpec,
    pub asy_var: std::result::Result<f64, String>,
    pub cr_bound: std::result::Result<f64, String>,
}

impl StudyRow {
    pub fn efficiency(&self) -> Option<f64> {
        match (&self.asy_var, &self.cr_bound) {
            (Ok(v), Ok(c)) if *v > 0.0 => Some(c / v),
            _ => None,
        }
    }
}

/// Estimator of mu with sigma^2 known:
/// `sum(h(X) X - sigma^2 h'(X)) / sum(h(X))`.
pub fn estimate_mu(data: &[f64], sigma2: f64, h: &HSpec) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("sample".into()));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be positive".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in data.iter().enumerate() {
        if x < 0.0 {
            return Err(Error::DomainViolation {
                row: i,
                col: 0,
                detail: "sample entries must be positive".into(),
            });
        }
        let (hv, hd) = h.eval_unchecked(x);
        num += hv * x - sigma2 * hd;
        den += hv;
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator("sum of weights".into()));
    }
    Ok(num / den)
}

/// Estimator of sigma^2 with mu known:
/// `sum(h(X)(X-mu)^2) / sum(h(X) + h'(X)(X-mu))`.
pub fn estimate_sigma2(data: &[f64], mu: f64, h: &HSpec) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("sample".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in data.iter().enumerate() {
        if x < 0.0 {
            return Err(Error::DomainViolation {
                row: i,
                col: 0,
                detail: "sample entries must be positive".into(),
            });
        }
        let (hv, hd) = h.eval_unchecked(x);
        num += hv * (x - mu) * (x - mu);
        den += hv + hd * (x - mu);
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator("weighted curvature sum".into()));
    }
    Ok(num / den)
}

/// Expectation of `f` under TN(mu, sigma^2), splitting panels at the kinks.
fn tn_expect(
    f: impl Fn(f64) -> f64,
    mu: f64,
    sigma: f64,
    kinks: &[f64],
    quad: &QuadratureConfig,
) -> Result<f64> {
    let z = tn_normalizer(mu, sigma);
    let mut upper = mu.max(0.0) + 12.0 * sigma;
    // Extend until the neglected tail mass is below 1e-12 of the total.
    while norm_sf((upper - mu) / sigma) / z >= 1e-12 {
        upper += 2.0 * sigma;
    }
    integrate(|x| f(x) * tn_pdf(x, mu, sigma), 0.0, upper, kinks, quad)
}

/// Asymptotic variance of `sqrt(n) (estimate - truth)` for the selected
/// target at true value `param0`.
pub fn asymptotic_variance(
    target: UnivariateTarget,
    param0: f64,
    known: f64,
    h: &HSpec,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let kinks = h.kinks();
    match target {
        UnivariateTarget::Mu => {
            let mu = param0;
            let sigma2 = known;
            if !(sigma2 > 0.0) {
                return Err(Error::InvalidArgument("known sigma2 must be positive".into()));
            }
            let sigma = sigma2.sqrt();
            let a = tn_expect(
                |x| {
                    let (hv, hd) = h.eval_unchecked(x);
                    sigma2 * hv * hv + sigma2 * sigma2 * hd * hd
                },
                mu,
                sigma,
                &kinks,
                quad,
            )?;
            let b = tn_expect(|x| h.eval_unchecked(x).0, mu, sigma, &kinks, quad)?;
            if b <= 0.0 {
                return Err(Error::ZeroDenominator("E[h]".into()));
            }
            Ok(a / (b * b))
        }
        UnivariateTarget::Sigma2 => {
            let sigma2 = param0;
            let mu = known;
            if !(sigma2 > 0.0) {
                return Err(Error::InvalidArgument("param0 sigma2 must be positive".into()));
            }
            let sigma = sigma2.sqrt();
            let a = tn_expect(
                |x| {
                    let (hv, hd) = h.eval_unchecked(x);
                    let d = (x - mu) * (x - mu);
                    2.0 * sigma2.powi(3) * hv * hv * d + sigma2.powi(4) * hd * hd * d
                },
                mu,
                sigma,
                &kinks,
                quad,
            )?;
            let b = tn_expect(
                |x| h.eval_unchecked(x).0 * (x - mu) * (x - mu),
                mu,
                sigma,
                &kinks,
                quad,
            )?;
            if b <= 0.0 {
                return Err(Error::ZeroDenominator("E[h (X-mu)^2]".into()));
            }
            Ok(a / (b * b))
        }
    }
}

/// Cramer-Rao lower bound: `sigma^4 / var(X - mu)` for the mean target,
/// `4 sigma^8 / var((X - mu)^2)` for the variance target.
pub fn cramer_rao(
    target: UnivariateTarget,
    param0: f64,
    known: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    match target {
        UnivariateTarget::Mu => {
            let mu = param0;
            let sigma2 = known;
            let sigma = sigma2.sqrt();
            let m1 = tn_expect(|x| x - mu, mu, sigma, &[], quad)?;
            let m2 = tn_expect(|x| (x - mu) * (x - mu), mu, sigma, &[], quad)?;
            let var = m2 - m1 * m1;
            if var <= 0.0 {
                return Err(Error::Quadrature("non-positive variance".into()));
            }
            Ok(sigma2 * sigma2 / var)
        }
        UnivariateTarget::Sigma2 => {
            let sigma2 = param0;
            let mu = known;
            let sigma = sigma2.sqrt();
            let m1 = tn_expect(|x| (x - mu) * (x - mu), mu, sigma, &[], quad)?;
            let m2 = tn_expect(|x| (x - mu).powi(4), mu, sigma, &[], quad)?;
            let var = m2 - m1 * m1;
            if var <= 0.0 {
                return Err(Error::Quadrature("non-positive variance".into()));
            }
            Ok(4.0 * sigma2.powi(4) / var)
        }
    }
}

/// Side-condition advisory for the asymptotic-variance displays: weights
/// that do not vanish at the origin are flagged (except the known benign
/// variance-at-zero-mean case).
pub fn univariate_warning(target: UnivariateTarget, known: f64, h: &HSpec) -> Option<String> {
    let origin_ok = h.origin_limit().0 == 0.0;
    if origin_ok || (target == UnivariateTarget::Sigma2 && known == 0.0) {
        None
    } else {
        Some(format!("weight {h} does not vanish at 0; validity conditions may fail"))
    }
}

/// Runs a full study grid.
pub fn run_study(study: &UnivariateStudy, quad: &QuadratureConfig) -> Result<Vec<StudyRow>> {
    if study.grid.is_empty() {
        return Err(Error::EmptyInput("study grid".into()));
    }
    if study.hspecs.is_empty() {
        return Err(Error::EmptyInput("weight list".into()));
    }
    if study.target == UnivariateTarget::Mu && !(study.known_value > 0.0) {
        return Err(Error::InvalidArgument("known sigma2 must be positive".into()));
    }
    let mut rows = Vec::new();
    for &param0 in &study.grid {
        for h in &study.hspecs {
            rows.push(StudyRow {
                target: study.target,
                param0,
                hspec: h.clone(),
                asy_var: asymptotic_variance(study.target, param0, study.known_value, h, quad)
                    .map_err(|e| e.to_string()),
                cr_bound: cramer_rao(study.target, param0, study.known_value, quad)
                    .map_err(|e| e.to_string()),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(s: &str) -> HSpec {
        s.parse().unwrap()
    }

    #[test]
    fn mu_estimator_hand_cases() {
        // h(x) = x: (sum hX - sigma^2 h') / sum h = (2 - 2) / 2.
        let est = estimate_mu(&[1.0, 1.0], 1.0, &h("pow:1:inf")).unwrap();
        assert_eq!(est, 0.0);
        // Constant h recovers the sample mean.
        let data = [0.3, 1.7, 2.4, 0.9];
        let est = estimate_mu(&data, 2.0, &h("const:1")).unwrap();
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        assert_relative_eq!(est, mean, epsilon = 1e-15);
    }

    #[test]
    fn sigma2_estimator_hand_cases() {
        // Constant h at mu = 0 is the second sample moment.
        let est = estimate_sigma2(&[1.0, 2.0], 0.0, &h("const:1")).unwrap();
        assert_eq!(est, 2.5);
        // All residuals zero.
        let est = estimate_sigma2(&[1.0, 1.0], 1.0, &h("pow:1:inf")).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn sigma2_const_weight_is_second_moment_bitwise() {
        let data = [0.11, 2.73, 0.59, 1.41, 3.14, 0.07];
        let est = estimate_sigma2(&data, 0.0, &h("const:1")).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for &x in &data {
            num += x * x;
            den += 1.0;
        }
        assert_eq!(est, num / den);
    }

    #[test]
    fn cramer_rao_limits() {
        let quad = QuadratureConfig::default();
        // Truncation vanishes far from the boundary: bound -> sigma^2.
        let b = cramer_rao(UnivariateTarget::Mu, 12.0, 1.0, &quad).unwrap();
        assert_relative_eq!(b, 1.0, epsilon = 1e-6);
        // Half-normal: var(X^2) = EX^4 - (EX^2)^2 = 3 - 1 = 2, bound = 4/2.
        let b = cramer_rao(UnivariateTarget::Sigma2, 1.0, 0.0, &quad).unwrap();
        assert_relative_eq!(b, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn sigma2_constant_weight_attains_the_bound_at_zero_mean() {
        let quad = QuadratureConfig::default();
        let v = asymptotic_variance(UnivariateTarget::Sigma2, 1.0, 0.0, &h("const:1"), &quad)
            .unwrap();
        let b = cramer_rao(UnivariateTarget::Sigma2, 1.0, 0.0, &quad).unwrap();
        assert_relative_eq!(v, b, epsilon = 1e-7);
    }

    #[test]
    fn log1p_near_bound_without_truncation() {
        // Far from the boundary, slowly growing weights are near-efficient.
        let quad = QuadratureConfig::default();
        let v = asymptotic_variance(UnivariateTarget::Mu, 10.0, 1.0, &h("log1p:2"), &quad)
            .unwrap();
        let b = cramer_rao(UnivariateTarget::Mu, 10.0, 1.0, &quad).unwrap();
        assert!(v >= b - 1e-9);
        assert!((v - b) / b < 0.05, "asy var {v} should be within 5% of the bound {b}");
    }

    #[test]
    fn variance_continuous_on_grid() {
        // Spike detector: every interior grid value must sit within 1% of
        // the linear interpolant of its neighbours, so quadrature cannot
        // introduce jumps even where the curve itself has slope.
        let quad = QuadratureConfig::default();
        let grid: Vec<f64> = (5..25).map(|i| i as f64 * 0.1).collect();
        for hs in [h("pow:1:3"), h("log1p:1")] {
            let vals: Vec<f64> = grid
                .iter()
                .map(|&mu| {
                    asymptotic_variance(UnivariateTarget::Mu, mu, 1.0, &hs, &quad).unwrap()
                })
                .collect();
            for i in 1..vals.len() - 1 {
                let interp = 0.5 * (vals[i - 1] + vals[i + 1]);
                assert!(
                    (vals[i] - interp).abs() / vals[i] < 0.01,
                    "{hs}: spike at mu = {} ({} vs interpolant {})",
                    grid[i],
                    vals[i],
                    interp
                );
            }
        }
    }

    #[test]
    fn study_rows_and_warnings() {
        let quad = QuadratureConfig::default();
        let study = UnivariateStudy {
            target: UnivariateTarget::Mu,
            known_value: 1.0,
            grid: vec![0.5, 1.0],
            hspecs: vec![h("pow:1:3"), h("log1p:1")],
        };
        let rows = run_study(&study, &quad).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let eff = row.efficiency().unwrap();
            assert!(eff > 0.0 && eff <= 1.05, "efficiency {eff}");
        }
        assert!(univariate_warning(UnivariateTarget::Mu, 1.0, &h("const:1")).is_some());
        assert!(univariate_warning(UnivariateTarget::Sigma2, 0.0, &h("const:1")).is_none());
        assert!(univariate_warning(UnivariateTarget::Mu, 1.0, &h("pow:1:3")).is_none());
    }

    #[test]
    fn divergent_variance_is_an_error() {
        // p = 1/4: h'^2 ~ x^-3/2 is not integrable at 0.
        let quad = QuadratureConfig { max_panels: 500, ..Default::default() };
        let res = asymptotic_variance(UnivariateTarget::Mu, 0.5, 1.0, &h("pow:0.25:1"), &quad);
        assert!(res.is_err());
    }
}
