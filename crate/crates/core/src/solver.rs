//! Coordinate-descent minimization of `1/2 t' Gamma t - g' t + lambda |t|_1`.
//!
//! In symmetric mode each off-diagonal interaction kappa_{ij} is a single
//! variable appearing in blocks i and j; its update pools both blocks'
//! quadratic and linear coefficients and carries penalty `2 lambda` (the
//! entry shows up twice in `|K|_1`). Diagonals and eta get single-block
//! updates. Every update is an exact one-dimensional minimization, so the
//! objective never increases.

use crate::error::{Error, Result};
use crate::loss::QuadraticLoss;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Convergence threshold on the largest coordinate change per sweep.
    pub tol: f64,
    /// Sweep cap.
    pub max_iter: usize,
    /// Maintain `K = K'` with pooled pair updates.
    pub symmetric: bool,
    /// `lambda_eta / lambda_K`; infinity pins eta to zero, 0 leaves eta
    /// unpenalized.
    pub lambda_ratio: f64,
    /// Penalize diagonal entries of K along with the rest of `|K|_1`.
    /// The reference experiments leave the diagonal free, so this
    /// defaults to off.
    pub penalize_diagonal: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 10_000,
            symmetric: true,
            lambda_ratio: 0.0,
            penalize_diagonal: false,
        }
    }
}

/// A fitted interaction matrix with solver metadata.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub k: DMatrix<f64>,
    pub eta: Option<DVector<f64>>,
    pub lambda: f64,
    /// All `(i, j)` with `K[i][j] != 0`, exact zeros only.
    pub support: BTreeSet<(usize, usize)>,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized objective at the returned point.
    pub loss_value: f64,
    /// Pre-symmetrization `max |K - K'|` (closed-form solves only).
    pub max_asymmetry: f64,
}

impl Estimate {
    pub fn zero(m: usize, with_eta: bool) -> Self {
        Estimate {
            k: DMatrix::zeros(m, m),
            eta: if with_eta { Some(DVector::zeros(m)) } else { None },
            lambda: 0.0,
            support: BTreeSet::new(),
            iterations: 0,
            converged: false,
            loss_value: 0.0,
            max_asymmetry: 0.0,
        }
    }

    /// Unordered off-diagonal support `{(i, j) : i < j}`.
    pub fn off_diagonal_support(&self) -> BTreeSet<(usize, usize)> {
        self.support
            .iter()
            .filter(|&&(i, j)| i != j)
            .map(|&(i, j)| if i < j { (i, j) } else { (j, i) })
            .collect()
    }
}

pub fn support_of(k: &DMatrix<f64>) -> BTreeSet<(usize, usize)> {
    let mut s = BTreeSet::new();
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            if k[(i, j)] != 0.0 {
                s.insert((i, j));
            }
        }
    }
    s
}

/// Warm-started solution path over a descending lambda grid.
#[derive(Debug, Clone)]
pub struct EstimatePath {
    pub estimates: Vec<Estimate>,
}

impl EstimatePath {
    pub fn lambdas(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.lambda).collect()
    }
}

/// `sign(z) max(|z| - lam, 0)`.
pub fn soft_threshold(z: f64, lam: f64) -> f64 {
    if z > lam {
        z - lam
    } else if z < -lam {
        z + lam
    } else {
        0.0
    }
}

/// Penalized objective of the full problem at `(K, eta)`.
pub fn objective(
    loss: &QuadraticLoss,
    k: &DMatrix<f64>,
    eta: Option<&DVector<f64>>,
    lambda_k: f64,
    lambda_eta: f64,
) -> f64 {
    let m = loss.m;
    let mut val = 0.0;
    for (j, block) in loss.blocks.iter().enumerate() {
        let side = loss.block_side();
        let mut theta = DVector::zeros(side);
        for i in 0..m {
            theta[i] = k[(i, j)];
        }
        if loss.has_eta() {
            theta[m] = eta.map_or(0.0, |e| e[j]);
        }
        val += 0.5 * theta.dot(&(&block.gamma * &theta)) - block.g.dot(&theta);
    }
    val += lambda_k * k.iter().map(|v| v.abs()).sum::<f64>();
    if let Some(e) = eta {
        let l1: f64 = e.iter().map(|v| v.abs()).sum();
        if l1 > 0.0 {
            val += lambda_eta * l1;
        }
    }
    val
}

/// Minimizes the penalized quadratic by coordinate descent.
///
/// `lambda_eta` is ignored for centered layouts; pass `f64::INFINITY` to pin
/// eta at zero in the non-centered layout.
pub fn coordinate_descent(
    loss: &QuadraticLoss,
    lambda_k: f64,
    lambda_eta: f64,
    init: Option<&Estimate>,
    cfg: &SolverConfig,
) -> Result<Estimate> {
    descend(loss, lambda_k, lambda_eta, init, cfg, None)
}

/// Same as [`coordinate_descent`] but only coordinates selected by `mask`
/// (a K-entry predicate) may move; everything else is pinned at zero.
pub fn coordinate_descent_restricted(
    loss: &QuadraticLoss,
    lambda_k: f64,
    lambda_eta: f64,
    cfg: &SolverConfig,
    mask: &dyn Fn(usize, usize) -> bool,
) -> Result<Estimate> {
    descend(loss, lambda_k, lambda_eta, None, cfg, Some(mask))
}

fn descend(
    loss: &QuadraticLoss,
    lambda_k: f64,
    lambda_eta: f64,
    init: Option<&Estimate>,
    cfg: &SolverConfig,
    mask: Option<&dyn Fn(usize, usize) -> bool>,
) -> Result<Estimate> {
    if lambda_k < 0.0 || (loss.has_eta() && lambda_eta < 0.0) {
        return Err(Error::InvalidArgument("penalty must be non-negative".into()));
    }
    let m = loss.m;
    let side = loss.block_side();
    let with_eta = loss.has_eta();
    let eta_free = with_eta && lambda_eta.is_finite();

    // theta[:, j] is block j's coefficient vector; prod[:, j] = Gamma_j theta_j.
    let mut theta = DMatrix::<f64>::zeros(side, m);
    if let Some(e) = init {
        if e.k.nrows() != m || e.k.ncols() != m {
            return Err(Error::DimensionMismatch("init estimate has wrong size".into()));
        }
        for j in 0..m {
            for i in 0..m {
                theta[(i, j)] = if cfg.symmetric {
                    0.5 * (e.k[(i, j)] + e.k[(j, i)])
                } else {
                    e.k[(i, j)]
                };
            }
            if eta_free {
                theta[(m, j)] = e.eta.as_ref().map_or(0.0, |v| v[j]);
            }
        }
    }
    let mut prod = DMatrix::<f64>::zeros(side, m);
    for j in 0..m {
        let col = theta.column(j).into_owned();
        prod.set_column(j, &(&loss.blocks[j].gamma * col));
    }

    let allowed = |i: usize, j: usize| mask.map_or(true, |f| f(i, j));

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut max_delta = 0.0f64;
        if cfg.symmetric {
            for j in 0..m {
                for i in 0..=j {
                    if !allowed(i, j) {
                        continue;
                    }
                    let (q, r, pen) = if i == j {
                        let q = loss.blocks[j].gamma[(j, j)];
                        let r = loss.blocks[j].g[j]
                            - (prod[(j, j)] - q * theta[(j, j)]);
                        let pen = if cfg.penalize_diagonal { lambda_k } else { 0.0 };
                        (q, r, pen)
                    } else {
                        let qj = loss.blocks[j].gamma[(i, i)];
                        let qi = loss.blocks[i].gamma[(j, j)];
                        let r = (loss.blocks[j].g[i] - (prod[(i, j)] - qj * theta[(i, j)]))
                            + (loss.blocks[i].g[j] - (prod[(j, i)] - qi * theta[(j, i)]));
                        (qj + qi, r, 2.0 * lambda_k)
                    };
                    if q == 0.0 {
                        return Err(Error::ZeroDiagonal { block: j, index: i });
                    }
                    let old = theta[(i, j)];
                    let new = soft_threshold(r, pen) / q;
                    let delta = new - old;
                    if delta != 0.0 {
                        debug_assert!(
                            0.5 * q * (new * new - old * old) - r * delta
                                + pen * (new.abs() - old.abs())
                                <= 1e-9 * (1.0 + r.abs() + q * old.abs()),
                            "coordinate update increased the objective"
                        );
                        theta[(i, j)] = new;
                        let gcol = loss.blocks[j].gamma.column(i);
                        for t in 0..side {
                            prod[(t, j)] += delta * gcol[t];
                        }
                        if i != j {
                            theta[(j, i)] = new;
                            let gcol = loss.blocks[i].gamma.column(j);
                            for t in 0..side {
                                prod[(t, i)] += delta * gcol[t];
                            }
                        }
                        max_delta = max_delta.max(delta.abs());
                    }
                }
                if eta_free {
                    let q = loss.blocks[j].gamma[(m, m)];
                    if q == 0.0 {
                        return Err(Error::ZeroDiagonal { block: j, index: m });
                    }
                    let r = loss.blocks[j].g[m] - (prod[(m, j)] - q * theta[(m, j)]);
                    let old = theta[(m, j)];
                    let new = soft_threshold(r, lambda_eta) / q;
                    let delta = new - old;
                    if delta != 0.0 {
                        theta[(m, j)] = new;
                        let gcol = loss.blocks[j].gamma.column(m);
                        for t in 0..side {
                            prod[(t, j)] += delta * gcol[t];
                        }
                        max_delta = max_delta.max(delta.abs());
                    }
                }
            }
        } else {
            for j in 0..m {
                for i in 0..side {
                    if i == m && !eta_free {
                        continue;
                    }
                    if i < m && !allowed(i, j) {
                        continue;
                    }
                    let q = loss.blocks[j].gamma[(i, i)];
                    if q == 0.0 {
                        return Err(Error::ZeroDiagonal { block: j, index: i });
                    }
                    let pen = if i == m {
                        lambda_eta
                    } else if i == j && !cfg.penalize_diagonal {
                        0.0
                    } else {
                        lambda_k
                    };
                    let r = loss.blocks[j].g[i] - (prod[(i, j)] - q * theta[(i, j)]);
                    let old = theta[(i, j)];
                    let new = soft_threshold(r, pen) / q;
                    let delta = new - old;
                    if delta != 0.0 {
                        debug_assert!(
                            0.5 * q * (new * new - old * old) - r * delta
                                + pen * (new.abs() - old.abs())
                                <= 1e-9 * (1.0 + r.abs() + q * old.abs()),
                            "coordinate update increased the objective"
                        );
                        theta[(i, j)] = new;
                        let gcol = loss.blocks[j].gamma.column(i);
                        for t in 0..side {
                            prod[(t, j)] += delta * gcol[t];
                        }
                        max_delta = max_delta.max(delta.abs());
                    }
                }
            }
        }
        if max_delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let mut k = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            k[(i, j)] = theta[(i, j)];
        }
    }
    let eta = if with_eta {
        Some(DVector::from_iterator(m, (0..m).map(|j| theta[(m, j)])))
    } else {
        None
    };
    let loss_value = objective(loss, &k, eta.as_ref(), lambda_k, if eta_free { lambda_eta } else { 0.0 });
    Ok(Estimate {
        support: support_of(&k),
        k,
        eta,
        lambda: lambda_k,
        iterations,
        converged,
        loss_value,
        max_asymmetry: 0.0,
    })
}

/// Default grid: `nlambda` log-spaced values from `|g|_inf` down to 1% of it.
pub fn default_lambda_grid(loss: &QuadraticLoss, nlambda: usize) -> Vec<f64> {
    let lmax = loss.g_inf_norm();
    log_spaced_grid(lmax, 0.01 * lmax, nlambda)
}

pub fn log_spaced_grid(from: f64, to: f64, count: usize) -> Vec<f64> {
    assert!(from > 0.0 && to > 0.0 && from > to && count >= 2);
    let (lf, lt) = (from.ln(), to.ln());
    (0..count)
        .map(|i| (lf + (lt - lf) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Solves along a strictly descending lambda grid with warm starts.
pub fn solve_path(
    loss: &QuadraticLoss,
    lambdas: &[f64],
    cfg: &SolverConfig,
) -> Result<EstimatePath> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("lambda grid".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("lambda grid must be strictly decreasing".into()));
    }
    let mut estimates: Vec<Estimate> = Vec::with_capacity(lambdas.len());
    for (idx, &lam) in lambdas.iter().enumerate() {
        let lam_eta = if cfg.lambda_ratio.is_infinite() {
            f64::INFINITY
        } else {
            cfg.lambda_ratio * lam
        };
        let init = estimates.get(idx.wrapping_sub(1));
        let est = coordinate_descent(loss, lam, lam_eta, init, cfg)?;
        estimates.push(est);
    }
    Ok(EstimatePath { estimates })
}

/// Unregularized per-block solve `theta_j = Gamma_j^-1 g_j`; symmetric mode
/// averages `(K + K')/2` and records the pre-symmetrization asymmetry.
pub fn closed_form(loss: &QuadraticLoss) -> Result<Estimate> {
    let m = loss.m;
    let mut k = DMatrix::zeros(m, m);
    let mut eta = if loss.has_eta() { Some(DVector::zeros(m)) } else { None };
    for (j, block) in loss.blocks.iter().enumerate() {
        let chol = block
            .gamma
            .clone()
            .cholesky()
            .ok_or(Error::SingularBlock { block: j })?;
        let theta = chol.solve(&block.g);
        for i in 0..m {
            k[(i, j)] = theta[i];
        }
        if let Some(e) = eta.as_mut() {
            e[j] = theta[m];
        }
    }
    let asym = (&k - k.transpose()).abs().max();
    let k = (&k + k.transpose()) * 0.5;
    let loss_value = objective(loss, &k, eta.as_ref(), 0.0, 0.0);
    Ok(Estimate {
        support: support_of(&k),
        k,
        eta,
        lambda: 0.0,
        iterations: 0,
        converged: true,
        loss_value,
        max_asymmetry: asym,
    })
}

/// A certified direction of unbounded descent for the penalized loss.
#[derive(Debug, Clone)]
pub struct UnboundedDirection {
    pub block: usize,
    pub direction: DVector<f64>,
    /// `-g' nu + lambda |nu|_1`, strictly negative.
    pub slope: f64,
}

/// Searches `ker(Gamma_j)` for a direction along which the penalized loss
/// decreases linearly; `None` when every block kernel is trivial or the
/// penalty dominates.
pub fn kernel_unbounded_direction(
    loss: &QuadraticLoss,
    lambda: f64,
) -> Option<UnboundedDirection> {
    let mut best: Option<UnboundedDirection> = None;
    for (j, block) in loss.blocks.iter().enumerate() {
        let eig = block.gamma.clone().symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let tol = 1e-10 * max_eig.max(1e-300);
        for (idx, &val) in eig.eigenvalues.iter().enumerate() {
            if val.abs() > tol {
                continue;
            }
            let v = eig.eigenvectors.column(idx).into_owned();
            let gv = block.g.dot(&v);
            let nu = if gv >= 0.0 { v } else { -v };
            let slope = -block.g.dot(&nu) + lambda * nu.iter().map(|t| t.abs()).sum::<f64>();
            if slope < 0.0
                && best.as_ref().map_or(true, |b| slope < b.slope)
            {
                best = Some(UnboundedDirection { block: j, direction: nu, slope });
            }
        }
    }
    best
}

/// Objective of moving `a` steps along a single-block direction, with all
/// other coordinates at zero. Linear in `a` when the direction is in the
/// kernel.
pub fn objective_along(loss: &QuadraticLoss, dir: &UnboundedDirection, a: f64, lambda: f64) -> f64 {
    let block = &loss.blocks[dir.block];
    let theta = &dir.direction * a;
    0.5 * theta.dot(&(&block.gamma * &theta)) - block.g.dot(&theta)
        + lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
}

/// Largest violation of the subgradient optimality conditions.
///
/// Symmetric mode pools the paired condition for each off-diagonal variable.
pub fn kkt_max_violation(
    loss: &QuadraticLoss,
    est: &Estimate,
    lambda_k: f64,
    lambda_eta: f64,
    cfg: &SolverConfig,
) -> f64 {
    let m = loss.m;
    let side = loss.block_side();
    let mut grads = DMatrix::<f64>::zeros(side, m);
    for j in 0..m {
        let mut theta = DVector::zeros(side);
        for i in 0..m {
            theta[i] = est.k[(i, j)];
        }
        if loss.has_eta() {
            theta[m] = est.eta.as_ref().map_or(0.0, |e| e[j]);
        }
        grads.set_column(j, &(&loss.blocks[j].gamma * theta - &loss.blocks[j].g));
    }
    let viol = |grad: f64, value: f64, pen: f64| -> f64 {
        if value == 0.0 {
            (grad.abs() - pen).max(0.0)
        } else {
            (grad + pen * value.signum()).abs()
        }
    };
    let mut worst = 0.0f64;
    if cfg.symmetric {
        for j in 0..m {
            for i in 0..=j {
                let pen_d = if cfg.penalize_diagonal { lambda_k } else { 0.0 };
                let v = if i == j {
                    viol(grads[(j, j)], est.k[(j, j)], pen_d)
                } else {
                    viol(grads[(i, j)] + grads[(j, i)], est.k[(i, j)], 2.0 * lambda_k)
                };
                worst = worst.max(v);
            }
        }
    } else {
        for j in 0..m {
            for i in 0..m {
                let pen = if i == j && !cfg.penalize_diagonal { 0.0 } else { lambda_k };
                worst = worst.max(viol(grads[(i, j)], est.k[(i, j)], pen));
            }
        }
    }
    if loss.has_eta() && lambda_eta.is_finite() {
        for j in 0..m {
            let e = est.eta.as_ref().map_or(0.0, |v| v[j]);
            worst = worst.max(viol(grads[(m, j)], e, lambda_eta));
        }
    }
    worst
}
