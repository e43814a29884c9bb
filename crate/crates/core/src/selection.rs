//! eBIC scoring over a solution path, optional support-restricted refits,
//! and model choice.

use crate::error::{Error, Result};
use crate::loss::QuadraticLoss;
use crate::solver::{coordinate_descent_restricted, objective, Estimate, EstimatePath, SolverConfig};
use statrs::function::gamma::ln_gamma;
use std::collections::BTreeSet;

/// eBIC record for one path entry. Lower scores are better: the score is
/// `2n * loss + |S| log n + 2 log binom(m(m-1)/2, |S|)`, the negative
/// log-likelihood orientation of the criterion.
#[derive(Debug, Clone)]
pub struct EbicScore {
    pub lambda: f64,
    pub score: f64,
    pub support_size: usize,
    pub refitted: bool,
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Scores an estimate on the un-amplified quadratic.
///
/// The support size counts upper-triangle off-diagonal entries of K only;
/// eta never enters the penalty. With `refit = true` the quadratic terms are
/// evaluated at the support-restricted unpenalized solution instead of the
/// penalized estimate.
pub fn ebic(
    raw_loss: &QuadraticLoss,
    est: &Estimate,
    n: usize,
    refit_first: bool,
    cfg: &SolverConfig,
) -> Result<EbicScore> {
    if est.k.nrows() != raw_loss.m {
        return Err(Error::DimensionMismatch("estimate does not match loss".into()));
    }
    let m = raw_loss.m;
    let off_support = est.off_diagonal_support();
    let s = off_support.len();
    let max_edges = m * (m - 1) / 2;

    let (k, eta) = if refit_first {
        let refitted = refit(raw_loss, &off_support, cfg)?;
        (refitted.k, refitted.eta)
    } else {
        (est.k.clone(), est.eta.clone())
    };
    // 2n * unpenalized loss = n theta' Gamma theta - 2n g' theta.
    let quad = 2.0 * n as f64 * objective(raw_loss, &k, eta.as_ref(), 0.0, 0.0);
    let score = quad + s as f64 * (n as f64).ln() + 2.0 * ln_binomial(max_edges, s);
    Ok(EbicScore { lambda: est.lambda, score, support_size: s, refitted: refit_first })
}

/// Unpenalized fit restricted to `support + diagonal + eta`; all other
/// coordinates stay at exactly zero.
pub fn refit(
    loss: &QuadraticLoss,
    support: &BTreeSet<(usize, usize)>,
    cfg: &SolverConfig,
) -> Result<Estimate> {
    let m = loss.m;
    // Symmetrize the requested support.
    let mut active: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(i, j) in support {
        if i >= m || j >= m {
            return Err(Error::DimensionMismatch("support index out of range".into()));
        }
        active.insert((i, j));
        active.insert((j, i));
    }
    for d in 0..m {
        active.insert((d, d));
    }
    // Fail early when a restricted block is not positive definite.
    for (j, block) in loss.blocks.iter().enumerate() {
        let mut rowsel: Vec<usize> = (0..m).filter(|&i| active.contains(&(i, j))).collect();
        if loss.has_eta() {
            rowsel.push(m);
        }
        let sub = block.gamma.select_rows(rowsel.iter()).select_columns(rowsel.iter());
        if sub.cholesky().is_none() {
            return Err(Error::SingularBlock { block: j });
        }
    }
    let cfg = SolverConfig { tol: cfg.tol.min(1e-10), max_iter: cfg.max_iter.max(20_000), ..cfg.clone() };
    let mask = |i: usize, j: usize| active.contains(&(i, j));
    let mut est = coordinate_descent_restricted(loss, 0.0, 0.0, &cfg, &mask)?;
    est.lambda = 0.0;
    Ok(est)
}

/// Scores every path entry and returns the argmin (ties break to the larger
/// lambda; entries that failed to converge are skipped whenever any entry
/// converged).
pub fn select(
    path: &EstimatePath,
    raw_loss: &QuadraticLoss,
    n: usize,
    refit_first: bool,
    cfg: &SolverConfig,
) -> Result<(usize, Vec<EbicScore>)> {
    if path.estimates.is_empty() {
        return Err(Error::EmptyInput("path".into()));
    }
    let scores: Vec<EbicScore> = path
        .estimates
        .iter()
        .map(|e| ebic(raw_loss, e, n, refit_first, cfg))
        .collect::<Result<_>>()?;
    let any_converged = path.estimates.iter().any(|e| e.converged);
    let mut best = None;
    for (idx, score) in scores.iter().enumerate() {
        if any_converged && !path.estimates[idx].converged {
            continue;
        }
        match best {
            None => best = Some(idx),
            Some(b) => {
                if score.score < scores[b].score {
                    best = Some(idx);
                }
            }
        }
    }
    Ok((best.expect("nonempty path"), scores))
}
