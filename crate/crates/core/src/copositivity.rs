//! Sufficient tests and refutation search for strict co-positivity.
//!
//! Strict co-positivity (`v' K v > 0` for all non-zero `v >= 0`) is the
//! normalizability condition on the interaction matrix. The exact decision
//! problem is co-NP-hard, so this module proves it via positive definiteness
//! of the symmetric part or entrywise non-negativity, refutes it via a
//! simplex grid search with local descent, and otherwise reports `Unknown`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CopositivityConfig {
    /// Smallest symmetric-part eigenvalue accepted as a positive-definiteness proof.
    pub pd_tol: f64,
    /// Grid resolution per axis for the simplex search.
    pub grid_points: usize,
    /// Cap on evaluated simplex nodes; beyond it the search samples randomly.
    pub max_grid_nodes: usize,
    /// Iterations of the local descent refinement.
    pub refine_steps: usize,
}

impl Default for CopositivityConfig {
    fn default() -> Self {
        CopositivityConfig {
            pd_tol: 1e-10,
            grid_points: 12,
            max_grid_nodes: 100_000,
            refine_steps: 200,
        }
    }
}

/// Tri-state verdict; the witness satisfies `v >= 0`, `||v||_1 = 1`,
/// `v' K v <= 0` exactly as returned.
#[derive(Debug, Clone, PartialEq)]
pub enum Copositivity {
    ProvenYes,
    ProvenNo { witness: DVector<f64>, value: f64 },
    Unknown,
}

fn quad_form(k: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(k * v))
}

/// Enumerates compositions of `total` into `m` parts, calling `f` on each.
fn for_each_composition(m: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    let mut parts = vec![0usize; m];
    fn rec(parts: &mut Vec<usize>, idx: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if idx == parts.len() - 1 {
            parts[idx] = left;
            f(parts);
            return;
        }
        for v in 0..=left {
            parts[idx] = v;
            rec(parts, idx + 1, left - v, f);
        }
    }
    rec(&mut parts, 0, total, f);
}

fn composition_count(m: usize, total: usize) -> Option<usize> {
    // C(total + m - 1, m - 1), saturating to None on overflow.
    let mut acc: u128 = 1;
    for i in 0..(m - 1) {
        acc = acc.checked_mul((total + m - 1 - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Local descent on the simplex: repeatedly moves mass between coordinate
/// pairs while the quadratic form decreases, shrinking the step size.
fn refine_on_simplex(s: &DMatrix<f64>, start: &DVector<f64>, steps: usize) -> DVector<f64> {
    let m = s.nrows();
    let mut v = start.clone();
    let mut best = quad_form(s, &v);
    let mut step = 0.25f64;
    for _ in 0..steps {
        let mut improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let t = step.min(v[j]);
                if t <= 0.0 {
                    continue;
                }
                let mut cand = v.clone();
                cand[i] += t;
                cand[j] -= t;
                let q = quad_form(s, &cand);
                if q < best {
                    best = q;
                    v = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    v
}

/// Decides strict co-positivity of `K` up to the configured effort.
pub fn is_strictly_copositive(k: &DMatrix<f64>, cfg: &CopositivityConfig) -> Result<Copositivity> {
    if k.nrows() != k.ncols() {
        return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
    }
    let m = k.nrows();
    if m == 0 {
        return Err(Error::EmptyInput("matrix".into()));
    }
    let s = (k + k.transpose()) * 0.5;

    // Positive definiteness of the symmetric part is sufficient.
    let eig = s.clone().symmetric_eigenvalues();
    if eig.iter().copied().fold(f64::INFINITY, f64::min) > cfg.pd_tol {
        return Ok(Copositivity::ProvenYes);
    }
    // Entrywise non-negativity with strictly positive diagonal is sufficient.
    if s.iter().all(|&v| v >= 0.0) && (0..m).all(|i| s[(i, i)] > 0.0) {
        return Ok(Copositivity::ProvenYes);
    }

    // Refutation search over the unit simplex.
    let mut best_v: Option<DVector<f64>> = None;
    let mut best_q = f64::INFINITY;
    let mut consider = |v: DVector<f64>| {
        let q = quad_form(&s, &v);
        if q < best_q {
            best_q = q;
            best_v = Some(v);
        }
    };
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        consider(e);
    }
    let g = cfg.grid_points.max(1);
    match composition_count(m, g) {
        Some(count) if count <= cfg.max_grid_nodes => {
            for_each_composition(m, g, &mut |parts| {
                let v = DVector::from_iterator(m, parts.iter().map(|&p| p as f64 / g as f64));
                consider(v);
            });
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..cfg.max_grid_nodes {
                let mut v = DVector::from_iterator(m, (0..m).map(|_| {
                    let u: f64 = rng.random();
                    -u.max(1e-12).ln()
                }));
                let sum = v.sum();
                v /= sum;
                consider(v);
            }
        }
    }

    if let Some(start) = best_v {
        let v = refine_on_simplex(&s, &start, cfg.refine_steps);
        let sum = v.sum();
        if sum > 0.0 {
            let v = v / sum;
            let value = quad_form(k, &v);
            if value <= 0.0 {
                return Ok(Copositivity::ProvenNo { witness: v, value });
            }
        }
    }
    Ok(Copositivity::Unknown)
}
