//! Pairwise interaction power models on the non-negative orthant.
//!
//! The density is proportional to
//! `exp(-(1/2a) (x^a)' K x^a + eta' (x^b - 1)/b)` with the convention
//! `(x^b - 1)/b = log x` at `b = 0` (where the support is the open orthant).

use crate::copositivity::{is_strictly_copositive, Copositivity, CopositivityConfig};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// The `(a, b, centered)` triple selecting a model family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    /// Interaction exponent, `a > 0`.
    pub a: f64,
    /// Linear-part exponent, `b >= 0`.
    pub b: f64,
    /// When true, `eta` is identically zero.
    pub centered: bool,
}

impl ModelSpec {
    pub fn new(a: f64, b: f64, centered: bool) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent a must be positive, got {a}")));
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponent b must be non-negative, got {b}"
            )));
        }
        Ok(ModelSpec { a, b, centered })
    }

    /// Truncated Gaussian graphical model, `a = b = 1`.
    pub fn truncated_gaussian(centered: bool) -> Self {
        ModelSpec { a: 1.0, b: 1.0, centered }
    }

    pub fn is_truncated_gaussian(&self) -> bool {
        self.a == 1.0 && self.b == 1.0
    }
}

/// Interaction matrix and linear coefficients `(K, eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionParams {
    pub k: DMatrix<f64>,
    pub eta: DVector<f64>,
}

impl InteractionParams {
    pub fn new(k: DMatrix<f64>, eta: DVector<f64>) -> Result<Self> {
        if k.nrows() != k.ncols() {
            return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
        }
        if eta.len() != k.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "eta has length {} but K is {}x{}",
                eta.len(),
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(InteractionParams { k, eta })
    }

    /// Centered parameters: `eta = 0`.
    pub fn centered(k: DMatrix<f64>) -> Result<Self> {
        let m = k.nrows();
        InteractionParams::new(k, DVector::zeros(m))
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }
}

/// An `n x m` data matrix of non-negative observations plus the column
/// scales recorded when standardization was applied (all ones otherwise).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub scale: DVector<f64>,
}

impl Dataset {
    /// Wraps a raw data matrix; entries must be finite and non-negative.
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::EmptyInput("data matrix".into()));
        }
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                let v = x[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::DomainViolation {
                        row: i,
                        col: j,
                        detail: format!("entry {v} is negative or not finite"),
                    });
                }
            }
        }
        let m = x.ncols();
        Ok(Dataset { x, scale: DVector::from_element(m, 1.0) })
    }

    /// Standardizes columns to unit root-mean-square (l2 norm sqrt(n)) and
    /// records the applied divisors. This keeps entries on their natural
    /// O(1) scale, so the loss stays calibrated as an average
    /// log-likelihood surrogate for eBIC.
    pub fn standardized(x: DMatrix<f64>) -> Result<Self> {
        let mut ds = Dataset::new(x)?;
        let sqrt_n = (ds.n() as f64).sqrt();
        let mut scale = DVector::from_element(ds.m(), 1.0);
        for j in 0..ds.m() {
            let norm = ds.x.column(j).norm() / sqrt_n;
            if norm == 0.0 {
                return Err(Error::DomainViolation {
                    row: 0,
                    col: j,
                    detail: "column is identically zero; cannot standardize".into(),
                });
            }
            scale[j] = norm;
            for i in 0..ds.n() {
                ds.x[(i, j)] /= norm;
            }
        }
        ds.scale = scale;
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    /// Index of the first exact zero entry, if any.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        for j in 0..self.m() {
            for i in 0..self.n() {
                if self.x[(i, j)] == 0.0 {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Unnormalized log-density of the pairwise interaction power model.
pub fn log_density_unnorm(
    spec: &ModelSpec,
    params: &InteractionParams,
    x: &DVector<f64>,
) -> Result<f64> {
    let m = params.dim();
    if x.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "x has length {} but K is {}x{}",
            x.len(),
            m,
            m
        )));
    }
    for (j, &v) in x.iter().enumerate() {
        if v < 0.0 || (v == 0.0 && spec.b == 0.0 && !spec.centered) {
            return Err(Error::DomainViolation {
                row: 0,
                col: j,
                detail: if v < 0.0 {
                    format!("entry {v} is negative")
                } else {
                    "entry is zero but the log-linear part requires x > 0".into()
                },
            });
        }
    }
    let xa = x.map(|v| v.powf(spec.a));
    let quad = xa.dot(&(&params.k * &xa));
    let mut out = -quad / (2.0 * spec.a);
    if !spec.centered {
        if spec.b == 0.0 {
            for j in 0..m {
                out += params.eta[j] * x[j].ln();
            }
        } else {
            for j in 0..m {
                out += params.eta[j] * (x[j].powf(spec.b) - 1.0) / spec.b;
            }
        }
    }
    Ok(out)
}

/// Outcome of the normalizability check.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalizability {
    Ok,
    Violated(&'static str),
    Unknown,
}

/// Sufficient-condition check that the density integrates.
///
/// `Ok` when (CC1 and CC2) hold, (CC1 and CC3) hold, or the model is
/// centered with CC1 and `a > 0`; `Violated` names the first failed
/// condition; `Unknown` when strict co-positivity is neither proven nor
/// refuted.
pub fn check_normalizable(
    spec: &ModelSpec,
    params: &InteractionParams,
    copos_cfg: &CopositivityConfig,
) -> Result<Normalizability> {
    let copos = is_strictly_copositive(&params.k, copos_cfg)?;
    if let Copositivity::ProvenNo { .. } = copos {
        return Ok(Normalizability::Violated("CC1"));
    }
    if !spec.centered {
        if spec.b > 0.0 {
            // CC2: 2a > b > 0.
            if !(2.0 * spec.a > spec.b) {
                return Ok(Normalizability::Violated("CC2"));
            }
        } else {
            // CC3: b = 0 and every eta_j > -1.
            if params.eta.iter().any(|&e| e <= -1.0) {
                return Ok(Normalizability::Violated("CC3"));
            }
        }
    }
    match copos {
        Copositivity::ProvenYes => Ok(Normalizability::Ok),
        Copositivity::Unknown => Ok(Normalizability::Unknown),
        Copositivity::ProvenNo { .. } => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(vals: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(vals)
    }

    #[test]
    fn log_density_identity_at_one() {
        let spec = ModelSpec::new(1.0, 1.0, false).unwrap();
        let params = InteractionParams::new(DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let ld = log_density_unnorm(&spec, &params, &v(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(ld, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn log_density_b_zero() {
        let spec = ModelSpec::new(0.5, 0.0, false).unwrap();
        let params = InteractionParams::new(DMatrix::identity(1, 1), v(&[0.0])).unwrap();
        let ld = log_density_unnorm(&spec, &params, &v(&[1.0])).unwrap();
        assert_relative_eq!(ld, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn log_density_hand_evaluation() {
        let spec = ModelSpec::new(1.0, 1.0, false).unwrap();
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let params = InteractionParams::new(k, v(&[1.0, 1.0])).unwrap();
        let ld = log_density_unnorm(&spec, &params, &v(&[2.0, 1.0])).unwrap();
        assert_relative_eq!(ld, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn log_density_domain_errors() {
        let spec = ModelSpec::new(0.5, 0.0, false).unwrap();
        let params = InteractionParams::new(DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        assert!(log_density_unnorm(&spec, &params, &v(&[0.0, 1.0])).is_err());
        assert!(log_density_unnorm(&spec, &params, &v(&[1.0])).is_err());
    }

    #[test]
    fn b_zero_convention_is_continuous() {
        // The b = 0 branch must agree with tiny b at interior points.
        let params = InteractionParams::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.5]),
            v(&[0.4, -0.3]),
        )
        .unwrap();
        let spec0 = ModelSpec::new(0.5, 0.0, false).unwrap();
        let spec_eps = ModelSpec::new(0.5, 1e-8, false).unwrap();
        for point in [[0.3, 1.7], [2.5, 0.9], [1.0, 1.0], [0.05, 4.0]] {
            let x = v(&point);
            let l0 = log_density_unnorm(&spec0, &params, &x).unwrap();
            let le = log_density_unnorm(&spec_eps, &params, &x).unwrap();
            assert_relative_eq!(l0, le, epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn normalizability_verdicts() {
        let cfg = CopositivityConfig::default();
        // Positive definite K with a = b = 1 satisfies CC1 and CC2.
        let spec = ModelSpec::new(1.0, 1.0, false).unwrap();
        let params = InteractionParams::new(
            DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 2.0]),
            v(&[5.0, -5.0]),
        )
        .unwrap();
        assert_eq!(check_normalizable(&spec, &params, &cfg).unwrap(), Normalizability::Ok);

        // b = 0 with some eta <= -1 violates CC3.
        let spec = ModelSpec::new(0.5, 0.0, false).unwrap();
        let params =
            InteractionParams::new(DMatrix::identity(2, 2), v(&[-1.5, 0.0])).unwrap();
        assert_eq!(
            check_normalizable(&spec, &params, &cfg).unwrap(),
            Normalizability::Violated("CC3")
        );

        // Centered needs only CC1 and a > 0.
        let spec = ModelSpec::new(1.0, 1.0, true).unwrap();
        let params = InteractionParams::centered(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(check_normalizable(&spec, &params, &cfg).unwrap(), Normalizability::Ok);

        // Co-positivity refuted implies CC1 is the first failure.
        let spec = ModelSpec::new(1.0, 1.0, true).unwrap();
        let params = InteractionParams::centered(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, -3.0, -3.0, 1.0],
        ))
        .unwrap();
        assert_eq!(
            check_normalizable(&spec, &params, &cfg).unwrap(),
            Normalizability::Violated("CC1")
        );

        // 2a <= b trips CC2 even before co-positivity is resolved.
        let spec = ModelSpec::new(0.5, 2.0, false).unwrap();
        let params = InteractionParams::new(DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        assert_eq!(
            check_normalizable(&spec, &params, &cfg).unwrap(),
            Normalizability::Violated("CC2")
        );
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, -0.1])).is_err());
        let ds = Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 4.0])).unwrap();
        assert_eq!(ds.first_zero(), Some((0, 1)));
        let ds = Dataset::standardized(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 4.0, 1.0]))
            .unwrap();
        assert_relative_eq!(ds.scale[0], 5.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(ds.x.column(0).norm(), 2f64.sqrt(), epsilon = 1e-14);
    }
}
