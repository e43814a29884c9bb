//! End-to-end edge-recovery experiments: generate graphs, sample, fit
//! lambda paths, and average ROC curves across replicates.

use crate::error::{Error, Result};
use crate::evaluation::{confusion, vertical_average, RocCurve};
use crate::hfun::HSpec;
use crate::loss::{
    amplify, assemble_pairwise, profile_out_eta, AmplifierScope, AmplifierSpec,
};
use crate::model::{Dataset, InteractionParams, ModelSpec};
use crate::sampling::{
    generate_k0, sample_pairwise_gibbs, sample_tn_gibbs, trial_rng, GibbsConfig, GraphSpec,
};
use crate::solver::{default_lambda_grid, solve_path, support_of, SolverConfig};
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Configuration of one ROC/AUC experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub graph: GraphSpec,
    pub m: usize,
    pub n: usize,
    pub h: HSpec,
    /// Diagonal multiplier; `None` leaves the loss un-amplified.
    pub multiplier: Option<f64>,
    /// Constant eta vector for non-centered models.
    pub eta0: Option<f64>,
    /// For non-centered truncated Gaussians: mu components drawn
    /// `N(0, mu0_sd^2)` and `eta = K mu`.
    pub mu0_sd: Option<f64>,
    pub num_k0: usize,
    pub trials_per_k0: usize,
    pub nlambda: usize,
    /// Solve the profiled K problem instead of penalizing eta.
    pub profile_eta: bool,
    /// Solver settings shared by every replicate (including the
    /// eta-penalty ratio).
    pub solver: SolverConfig,
    pub seed: u64,
    pub standardize: bool,
    pub gibbs: GibbsConfig,
}

#[derive(Debug, Clone)]
pub struct RocExperimentResult {
    pub averaged: RocCurve,
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    pub sd_auc: f64,
    pub all_converged: bool,
    pub failures: usize,
}

fn true_params(
    spec: &ExperimentSpec,
    k0: &nalgebra::DMatrix<f64>,
    rng: &mut impl rand::Rng,
) -> Result<InteractionParams> {
    let m = spec.m;
    if spec.model.centered {
        return InteractionParams::centered(k0.clone());
    }
    if let Some(sd) = spec.mu0_sd {
        let mu = DVector::from_iterator(
            m,
            (0..m).map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)),
        );
        let eta = k0 * mu;
        return InteractionParams::new(k0.clone(), eta);
    }
    let c = spec.eta0.unwrap_or(0.0);
    InteractionParams::new(k0.clone(), DVector::from_element(m, c))
}

/// One replicate: sample, assemble, amplify, trace the lambda path with
/// adaptive refinement, score the ROC.
///
/// The base grid steps over the support-activation region too coarsely to
/// resolve the curve (the support can jump by thousands of entries between
/// adjacent lambdas), so midpoints are inserted wherever the false positive
/// rate moves more than `FPR_GAP`, and the grid is extended below its
/// default floor until the curve effectively reaches the (1, 1) corner.
fn run_trial(
    spec: &ExperimentSpec,
    params: &InteractionParams,
    truth: &BTreeSet<(usize, usize)>,
    stream: u64,
) -> Result<(RocCurve, bool)> {
    const FPR_GAP: f64 = 0.025;
    const REFINE_ROUNDS: usize = 6;
    const MAX_TAIL_EXTENSIONS: usize = 40;

    let mut rng = trial_rng(spec.seed, stream);
    let raw = if spec.model.is_truncated_gaussian() {
        sample_tn_gibbs(params, spec.n, &spec.gibbs, &mut rng)?
    } else {
        sample_pairwise_gibbs(&spec.model, params, spec.n, &spec.gibbs, &mut rng)?
    };
    let data = if spec.standardize { Dataset::standardized(raw.x)? } else { raw };

    let hs = vec![spec.h.clone(); spec.m];
    let loss = assemble_pairwise(&spec.model, &hs, &data)?;
    let scope = if spec.model.centered {
        AmplifierScope::AllDiagonal
    } else {
        AmplifierScope::KBlockOnly
    };
    let loss = match spec.multiplier {
        Some(delta) => amplify(&loss, &AmplifierSpec::multiplier(delta, scope))?,
        None => loss,
    };
    let (loss, _recovery) = if !spec.model.centered && spec.profile_eta {
        let (k_loss, rec) = profile_out_eta(&loss)?;
        (k_loss, Some(rec))
    } else {
        (loss, None)
    };

    let cfg = spec.solver.clone();
    let grid = default_lambda_grid(&loss, spec.nlambda);
    let path = solve_path(&loss, &grid, &cfg)?;
    // Solved points sorted by descending lambda, with their fpr.
    let mut points: Vec<(f64, crate::solver::Estimate, f64)> = Vec::new();
    for est in path.estimates {
        let (_, fpr) = confusion(&est.support, truth, spec.m)?;
        points.push((est.lambda, est, fpr));
    }

    let solve_at = |lam: f64,
                    init: &crate::solver::Estimate|
     -> Result<(f64, crate::solver::Estimate, f64)> {
        let lam_eta = if cfg.lambda_ratio.is_infinite() {
            f64::INFINITY
        } else {
            cfg.lambda_ratio * lam
        };
        let est = crate::solver::coordinate_descent(&loss, lam, lam_eta, Some(init), &cfg)?;
        let (_, fpr) = confusion(&est.support, truth, spec.m)?;
        Ok((lam, est, fpr))
    };

    for _ in 0..REFINE_ROUNDS {
        let mut inserts = Vec::new();
        for idx in 1..points.len() {
            if (points[idx].2 - points[idx - 1].2).abs() > FPR_GAP {
                inserts.push((points[idx - 1].0 * points[idx].0).sqrt());
            }
        }
        if inserts.is_empty() {
            break;
        }
        for lam in inserts {
            let pos = points.partition_point(|p| p.0 > lam);
            let warm = &points[pos - 1].1;
            let solved = solve_at(lam, warm)?;
            points.insert(pos, solved);
        }
    }
    for _ in 0..MAX_TAIL_EXTENSIONS {
        let last = points.last().unwrap();
        if last.2 >= 0.995 || !last.1.converged {
            break;
        }
        let lam = last.0 * 0.6;
        let solved = solve_at(lam, &last.1)?;
        points.push(solved);
    }

    let converged = points.iter().all(|p| p.1.converged);
    let raw_points = points
        .iter()
        .map(|(_, est, fpr)| {
            let (tpr, _) = confusion(&est.support, truth, spec.m)?;
            Ok((*fpr, tpr))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((RocCurve::from_points(raw_points), converged))
}

/// Runs `num_k0 x trials_per_k0` replicates and vertically averages the
/// ROC curves. Failed replicates are counted, not fatal, as long as at
/// least one curve survives.
pub fn run_roc_experiment(spec: &ExperimentSpec) -> Result<RocExperimentResult> {
    let mut jobs = Vec::new();
    for k0_idx in 0..spec.num_k0 {
        // Streams: k0 draws use streams 0..num_k0; trials follow after.
        let mut k0_rng = trial_rng(spec.seed, k0_idx as u64);
        let k0 = generate_k0(spec.m, &spec.graph, &mut k0_rng)?;
        let params = true_params(spec, &k0, &mut k0_rng)?;
        let truth: BTreeSet<(usize, usize)> = support_of(&params.k)
            .into_iter()
            .filter(|&(i, j)| i != j)
            .collect();
        for t in 0..spec.trials_per_k0 {
            let stream = (spec.num_k0 + k0_idx * spec.trials_per_k0 + t) as u64;
            jobs.push((params.clone(), truth.clone(), stream));
        }
    }
    let outcomes: Vec<Result<(RocCurve, bool)>> = jobs
        .par_iter()
        .map(|(params, truth, stream)| run_trial(spec, params, truth, *stream))
        .collect();

    let mut curves = Vec::new();
    let mut all_converged = true;
    let mut failures = 0usize;
    for out in outcomes {
        match out {
            Ok((curve, converged)) => {
                all_converged &= converged;
                curves.push(curve);
            }
            Err(_) => failures += 1,
        }
    }
    if curves.is_empty() {
        return Err(Error::EmptyInput("every replicate failed".into()));
    }
    let aucs: Vec<f64> = curves.iter().map(|c| c.auc()).collect();
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let sd = if aucs.len() > 1 {
        (aucs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (aucs.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    let averaged = vertical_average(&curves, 1001)?;
    Ok(RocExperimentResult {
        averaged,
        aucs,
        mean_auc: mean,
        sd_auc: sd,
        all_converged,
        failures,
    })
}
