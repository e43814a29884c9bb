//! Edge-recovery metrics (TPR/FPR, ROC, AUC with vertical averaging) and
//! population-level theory diagnostics.

use crate::error::{Error, Result};
use crate::hfun::HSpec;
use crate::loss::assemble_pairwise;
use crate::model::{InteractionParams, ModelSpec};
use crate::sampling::{sample_pairwise_gibbs, sample_tn_gibbs, GibbsConfig};
use crate::solver::EstimatePath;
use nalgebra::DMatrix;
use std::collections::BTreeSet;

/// Normalizes a support set to unordered off-diagonal pairs `{(i, j): i < j}`.
pub fn normalize_support(support: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    support
        .iter()
        .filter(|&&(i, j)| i != j)
        .map(|&(i, j)| if i < j { (i, j) } else { (j, i) })
        .collect()
}

/// True/false positive rates over off-diagonal ordered pairs:
/// `TPR = |est ∩ true| / |true|`, `FPR = |est \ true| / (m(m-1) - |true|)`.
pub fn confusion(
    est_support: &BTreeSet<(usize, usize)>,
    true_support: &BTreeSet<(usize, usize)>,
    m: usize,
) -> Result<(f64, f64)> {
    let est = normalize_support(est_support);
    let truth = normalize_support(true_support);
    if truth.is_empty() {
        return Err(Error::EmptyTrueSupport);
    }
    // Ordered-pair counts are twice the unordered ones.
    let tp = 2 * est.intersection(&truth).count();
    let fp = 2 * est.difference(&truth).count();
    let pos = 2 * truth.len();
    let neg = m * (m - 1) - pos;
    let tpr = tp as f64 / pos as f64;
    let fpr = if neg == 0 { 0.0 } else { fp as f64 / neg as f64 };
    Ok((tpr, fpr))
}

/// An ROC polyline from `(0,0)` to `(1,1)`, nondecreasing in both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` points sorted by fpr.
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Builds a monotone curve from raw `(fpr, tpr)` pairs: augments the
    /// `(0,0)` and `(1,1)` endpoints, sorts by fpr, and applies a running
    /// max to tpr (staircase monotonization).
    pub fn from_points(mut raw: Vec<(f64, f64)>) -> RocCurve {
        raw.push((0.0, 0.0));
        raw.push((1.0, 1.0));
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut points = Vec::with_capacity(raw.len());
        let mut best = 0.0f64;
        for (f, t) in raw {
            best = best.max(t);
            points.push((f, best));
        }
        RocCurve { points }
    }

    /// Interpolated tpr at false positive rate `f`. Vertical segments take
    /// their upper value.
    pub fn tpr_at(&self, f: f64) -> f64 {
        // Collapse duplicates lazily: scan for the bracketing segment with
        // distinct fpr values.
        let pts = &self.points;
        if f <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let (f0, t0) = w[0];
            let (f1, t1) = w[1];
            if f <= f1 {
                if f1 == f0 {
                    continue;
                }
                if f == f1 {
                    // Take the topmost point at this fpr.
                    let mut t = t1;
                    for &(ff, tt) in pts {
                        if ff == f1 {
                            t = t.max(tt);
                        }
                    }
                    return t;
                }
                return t0 + (t1 - t0) * (f - f0) / (f1 - f0);
            }
        }
        pts.last().unwrap().1
    }

    /// Area under the curve by the trapezoid rule.
    pub fn auc(&self) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            let (f0, t0) = w[0];
            let (f1, t1) = w[1];
            area += 0.5 * (t0 + t1) * (f1 - f0);
        }
        area
    }
}

/// Maps every path entry through [`confusion`] and produces the staircase.
pub fn roc_from_path(
    path: &EstimatePath,
    true_support: &BTreeSet<(usize, usize)>,
    m: usize,
) -> Result<RocCurve> {
    if path.estimates.is_empty() {
        return Err(Error::EmptyInput("path".into()));
    }
    let mut raw = Vec::with_capacity(path.estimates.len());
    for est in &path.estimates {
        let (tpr, fpr) = confusion(&est.support, true_support, m)?;
        raw.push((fpr, tpr));
    }
    Ok(RocCurve::from_points(raw))
}

/// Pointwise-in-FPR average of the curves on a uniform grid; preserves the
/// mean AUC up to interpolation error.
pub fn vertical_average(curves: &[RocCurve], grid_size: usize) -> Result<RocCurve> {
    if curves.is_empty() {
        return Err(Error::EmptyInput("curve list".into()));
    }
    let g = grid_size.max(2);
    let mut points = Vec::with_capacity(g + 1);
    points.push((0.0, 0.0));
    for k in 0..g {
        let f = k as f64 / (g - 1) as f64;
        let mean = curves.iter().map(|c| c.tpr_at(f)).sum::<f64>() / curves.len() as f64;
        points.push((f, mean));
    }
    Ok(RocCurve { points })
}

/// Population theory constants estimated from a Monte Carlo draw.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    /// Incoherence `1 - |Gamma0_{Sc,S} (Gamma0_{S,S})^-1|_inf`; at or below
    /// zero means the irrepresentability condition fails.
    pub alpha: f64,
    /// `|(Gamma0_{S,S})^-1|_inf`.
    pub c_gamma0: f64,
    /// Maximum absolute column sum of the true parameter matrix.
    pub c_psi0: f64,
    /// Maximum nonzero count over columns of the true parameter matrix.
    pub d_psi0: usize,
    pub mc_samples: usize,
}

/// Support statistics of the stacked parameter `[K; eta']`: max column
/// nonzeros and max absolute column sum.
pub fn psi_support_stats(params: &InteractionParams, centered: bool) -> (usize, f64) {
    let m = params.dim();
    let mut d = 0usize;
    let mut c: f64 = 0.0;
    for j in 0..m {
        let mut nnz = 0usize;
        let mut sum = 0.0;
        for i in 0..m {
            if params.k[(i, j)] != 0.0 {
                nnz += 1;
            }
            sum += params.k[(i, j)].abs();
        }
        if !centered {
            if params.eta[j] != 0.0 {
                nnz += 1;
            }
            sum += params.eta[j].abs();
        }
        d = d.max(nnz);
        c = c.max(sum);
    }
    (d, c)
}

fn max_abs_row_sum(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Estimates `Gamma0 = E Gamma(x)` by Gibbs Monte Carlo and computes the
/// support-recovery constants: incoherence alpha, `c_Gamma0`, and the
/// support statistics of the true parameter matrix.
pub fn population_diagnostics(
    spec: &ModelSpec,
    params0: &InteractionParams,
    h: &HSpec,
    mc_n: usize,
    cfg: &GibbsConfig,
    rng: &mut impl rand::Rng,
) -> Result<DiagnosticsReport> {
    let m = params0.dim();
    let data = if spec.is_truncated_gaussian() {
        sample_tn_gibbs(params0, mc_n, cfg, rng)?
    } else {
        sample_pairwise_gibbs(spec, params0, mc_n, cfg, rng)?
    };
    let hs = vec![h.clone(); m];
    let loss = assemble_pairwise(spec, &hs, &data)?;
    let side = loss.block_side();

    let mut worst_offsupport = 0.0f64;
    let mut worst_inverse = 0.0f64;
    for (j, block) in loss.blocks.iter().enumerate() {
        // Support of column j of Psi0 = [K; eta'] (diagonal included).
        let mut sel: Vec<usize> = (0..m).filter(|&i| params0.k[(i, j)] != 0.0).collect();
        if !spec.centered && params0.eta[j] != 0.0 {
            sel.push(m);
        }
        if sel.is_empty() {
            continue;
        }
        let comp: Vec<usize> = (0..side).filter(|i| !sel.contains(i)).collect();
        let ss = block.gamma.select_rows(sel.iter()).select_columns(sel.iter());
        let inv = ss
            .try_inverse()
            .ok_or(Error::SingularBlock { block: j })?;
        worst_inverse = worst_inverse.max(max_abs_row_sum(&inv));
        if !comp.is_empty() {
            let cs = block.gamma.select_rows(comp.iter()).select_columns(sel.iter());
            worst_offsupport = worst_offsupport.max(max_abs_row_sum(&(cs * &inv)));
        }
    }
    let (d_psi0, c_psi0) = psi_support_stats(params0, spec.centered);
    Ok(DiagnosticsReport {
        alpha: 1.0 - worst_offsupport,
        c_gamma0: worst_inverse,
        c_psi0,
        d_psi0,
        mc_samples: mc_n,
    })
}
