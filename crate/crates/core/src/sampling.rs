//! Ground-truth graph generation and Gibbs sampling from the model family.

use crate::error::{Error, Result};
use crate::model::{check_normalizable, Dataset, InteractionParams, ModelSpec, Normalizability};
use crate::normal::tn_sample;
use crate::copositivity::CopositivityConfig;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Interaction-matrix generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphScheme {
    /// Disconnected equal blocks; `num_blocks` must divide m.
    Block { num_blocks: usize },
    /// Every off-diagonal pair filled independently.
    ErdosRenyi,
}

#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub scheme: GraphScheme,
    /// Edge inclusion probability.
    pub pi: f64,
    /// Uniform range for edge weights.
    pub weight_range: (f64, f64),
    /// Target smallest eigenvalue of the generated matrix.
    pub min_eigenvalue: f64,
}

impl GraphSpec {
    pub fn block(pi: f64, num_blocks: usize) -> Self {
        GraphSpec {
            scheme: GraphScheme::Block { num_blocks },
            pi,
            weight_range: (0.5, 1.0),
            min_eigenvalue: 0.1,
        }
    }

    pub fn erdos_renyi(pi: f64) -> Self {
        GraphSpec {
            scheme: GraphScheme::ErdosRenyi,
            pi,
            weight_range: (0.5, 1.0),
            min_eigenvalue: 0.1,
        }
    }
}

/// Derives the per-trial RNG from a master seed: stream `t + 1` of a
/// counter-based generator seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial + 1);
    rng
}

/// Draws a symmetric interaction matrix: off-diagonal support Bernoulli(pi)
/// with Uniform weights, diagonal set to the common value giving the target
/// smallest eigenvalue.
pub fn generate_k0(m: usize, gs: &GraphSpec, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    if m < 2 {
        return Err(Error::InvalidArgument("need m >= 2".into()));
    }
    if !(gs.pi > 0.0 && gs.pi < 1.0) {
        return Err(Error::InvalidArgument(format!("pi must be in (0,1), got {}", gs.pi)));
    }
    let mut k = DMatrix::<f64>::zeros(m, m);
    let (w0, w1) = gs.weight_range;
    fn fill_pair<R: Rng + ?Sized>(
        k: &mut DMatrix<f64>,
        i: usize,
        j: usize,
        pi: f64,
        w0: f64,
        w1: f64,
        rng: &mut R,
    ) {
        if rng.random::<f64>() < pi {
            let w = w0 + (w1 - w0) * rng.random::<f64>();
            k[(i, j)] = w;
            k[(j, i)] = w;
        }
    }
    match gs.scheme {
        GraphScheme::Block { num_blocks } => {
            if num_blocks == 0 || m % num_blocks != 0 {
                return Err(Error::InvalidArgument(format!(
                    "num_blocks {num_blocks} must divide m = {m}"
                )));
            }
            let size = m / num_blocks;
            for b in 0..num_blocks {
                let off = b * size;
                for i in 0..size {
                    for j in 0..i {
                        fill_pair(&mut k, off + i, off + j, gs.pi, w0, w1, rng);
                    }
                }
            }
        }
        GraphScheme::ErdosRenyi => {
            for i in 0..m {
                for j in 0..i {
                    fill_pair(&mut k, i, j, gs.pi, w0, w1, rng);
                }
            }
        }
    }
    // With zero diagonal, adding d*I shifts every eigenvalue by d.
    let min_eig = k
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let d = gs.min_eigenvalue - min_eig;
    for i in 0..m {
        k[(i, i)] = d;
    }
    Ok(k)
}

/// Gibbs sampler controls. The RNG is always passed to the sampling calls
/// explicitly; seeds live with the caller.
#[derive(Debug, Clone)]
pub struct GibbsConfig {
    pub burn_in: usize,
    pub thin: usize,
    /// Grid size for numeric inverse-CDF conditionals.
    pub grid_points: usize,
    /// Manual upper truncation for the numeric grid; `None` solves for the
    /// point where the conditional log-density drops 40 nats below its peak.
    pub domain_cap: Option<f64>,
    /// Optional initial state (defaults to all ones).
    pub init: Option<DVector<f64>>,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig { burn_in: 1000, thin: 10, grid_points: 2048, domain_cap: None, init: None }
    }
}

/// Exact inverse-CDF draw from the univariate truncated normal. Re-exported
/// here as the conditional sampler used by the truncated-Gaussian chain.
pub fn sample_truncated_normal_uni<R: Rng + ?Sized>(mu: f64, sigma: f64, rng: &mut R) -> f64 {
    tn_sample(mu, sigma, rng)
}

/// Systematic-scan Gibbs sampler for the truncated Gaussian model
/// (`a = b = 1`) with parameters `(K, eta)`.
///
/// The conditional of coordinate j is the univariate truncated normal with
/// mean `(eta_j - sum_{k != j} K_jk x_k) / K_jj` and variance `1 / K_jj`.
pub fn sample_tn_gibbs(
    params: &InteractionParams,
    n: usize,
    cfg: &GibbsConfig,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    let m = params.dim();
    for j in 0..m {
        if params.k[(j, j)] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "conditional variance needs K[{j}][{j}] > 0"
            )));
        }
    }
    let mut x = cfg.init.clone().unwrap_or_else(|| DVector::from_element(m, 1.0));
    if x.len() != m {
        return Err(Error::DimensionMismatch("init state has wrong length".into()));
    }
    let mut s = &params.k * &x;
    for _ in 0..cfg.burn_in {
        tn_sweep(params, &mut x, &mut s, rng);
    }
    let mut out = DMatrix::zeros(n, m);
    for row in 0..n {
        for _ in 0..cfg.thin {
            tn_sweep(params, &mut x, &mut s, rng);
        }
        for j in 0..m {
            out[(row, j)] = x[j];
        }
    }
    Dataset::new(out)
}

fn tn_sweep<R: Rng + ?Sized>(
    params: &InteractionParams,
    x: &mut DVector<f64>,
    s: &mut DVector<f64>,
    rng: &mut R,
) {
    let m = params.dim();
    for j in 0..m {
        let kjj = params.k[(j, j)];
        let lin = params.eta[j] - (s[j] - kjj * x[j]);
        let new = tn_sample(lin / kjj, (1.0 / kjj).sqrt(), rng);
        let delta = new - x[j];
        if delta != 0.0 {
            let col = params.k.column(j);
            for t in 0..m {
                s[t] += delta * col[t];
            }
            x[j] = new;
        }
    }
}

/// Unnormalized conditional log-density of coordinate j at value `t`:
/// `-c2 t^{2a}/(2a) - c1 t^a / a + eta_j (t^b - 1)/b` (log at `b = 0`).
fn conditional_logf(t: f64, a: f64, b: f64, c2: f64, c1: f64, eta: f64, centered: bool) -> f64 {
    let ta = t.powf(a);
    let mut lf = -c2 * ta * ta / (2.0 * a) - c1 * ta / a;
    if !centered {
        if b == 0.0 {
            lf += eta * t.ln();
        } else {
            lf += eta * (t.powf(b) - 1.0) / b;
        }
    }
    lf
}

/// Gibbs sampler for general `(a, b)` pairwise models; each conditional is
/// drawn by numeric inverse-CDF on a log-spaced grid.
pub fn sample_pairwise_gibbs(
    spec: &ModelSpec,
    params: &InteractionParams,
    n: usize,
    cfg: &GibbsConfig,
    rng: &mut impl Rng,
) -> Result<Dataset> {
    let m = params.dim();
    if cfg.grid_points < 64 {
        return Err(Error::InvalidArgument("need at least 64 grid points".into()));
    }
    match check_normalizable(spec, params, &CopositivityConfig::default())? {
        Normalizability::Violated(cond) => return Err(Error::NotNormalizable(cond.into())),
        _ => {}
    }
    let (a, b) = (spec.a, spec.b);
    let mut x = cfg.init.clone().unwrap_or_else(|| DVector::from_element(m, 1.0));
    if x.len() != m {
        return Err(Error::DimensionMismatch("init state has wrong length".into()));
    }
    let mut xa = x.map(|v| v.powf(a));
    let mut s = &params.k * &xa;

    let mut grid_t = vec![0.0f64; cfg.grid_points];
    let mut cdf = vec![0.0f64; cfg.grid_points];

    for phase in 0..2 {
        let rows = if phase == 0 { cfg.burn_in } else { n * cfg.thin };
        let mut out = if phase == 1 { Some(DMatrix::zeros(n, m)) } else { None };
        let mut kept = 0usize;
        for step in 0..rows {
            for j in 0..m {
                let c2 = params.k[(j, j)];
                let c1 = s[j] - c2 * xa[j];
                let eta = params.eta[j];
                let lf = |t: f64| conditional_logf(t, a, b, c2, c1, eta, spec.centered);

                // Locate the peak on a coarse log grid, then find the cap
                // where the log-density has dropped 40 nats.
                let cap = match cfg.domain_cap {
                    Some(c) => c,
                    None => {
                        let mut peak_t = 1.0;
                        let mut peak = f64::NEG_INFINITY;
                        for k in 0..96 {
                            let t = (-18.0 + 36.0 * k as f64 / 95.0).exp();
                            let v = lf(t);
                            if v > peak {
                                peak = v;
                                peak_t = t;
                            }
                        }
                        if !peak.is_finite() {
                            return Err(Error::ConditionalUnderflow { coord: j });
                        }
                        let mut hi = peak_t;
                        while lf(hi) > peak - 40.0 && hi < 1e280 {
                            hi *= 2.0;
                        }
                        let mut lo = hi / 2.0;
                        for _ in 0..40 {
                            let mid = 0.5 * (lo + hi);
                            if lf(mid) > peak - 40.0 {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        hi
                    }
                };
                let tmin = cap * 1e-24;
                let ratio = (cap / tmin).ln() / (cfg.grid_points - 1) as f64;
                let mut peak = f64::NEG_INFINITY;
                for k in 0..cfg.grid_points {
                    let t = tmin * (ratio * k as f64).exp();
                    grid_t[k] = t;
                    cdf[k] = lf(t);
                    if cdf[k] > peak {
                        peak = cdf[k];
                    }
                }
                if !peak.is_finite() {
                    return Err(Error::ConditionalUnderflow { coord: j });
                }
                // Trapezoid cumulative of exp(lf - peak) over the grid.
                let mut prev_w = (cdf[0] - peak).exp();
                let mut acc = 0.0;
                cdf[0] = 0.0;
                for k in 1..cfg.grid_points {
                    let w = (cdf[k] - peak).exp();
                    acc += 0.5 * (prev_w + w) * (grid_t[k] - grid_t[k - 1]);
                    cdf[k] = acc;
                    prev_w = w;
                }
                let total = acc;
                if !(total > 0.0) || !total.is_finite() {
                    return Err(Error::ConditionalUnderflow { coord: j });
                }
                let target = rng.random::<f64>() * total;
                let hi = cdf.partition_point(|&v| v < target).min(cfg.grid_points - 1).max(1);
                let (c_lo, c_hi) = (cdf[hi - 1], cdf[hi]);
                let frac = if c_hi > c_lo { (target - c_lo) / (c_hi - c_lo) } else { 0.5 };
                let new = grid_t[hi - 1] + frac * (grid_t[hi] - grid_t[hi - 1]);

                let new_xa = new.powf(a);
                let delta = new_xa - xa[j];
                if delta != 0.0 {
                    let col = params.k.column(j);
                    for t in 0..m {
                        s[t] += delta * col[t];
                    }
                    xa[j] = new_xa;
                }
                x[j] = new;
            }
            if phase == 1 && (step + 1) % cfg.thin == 0 {
                let out = out.as_mut().unwrap();
                for j in 0..m {
                    out[(kept, j)] = x[j];
                }
                kept += 1;
            }
        }
        if let Some(out) = out {
            return Dataset::new(out);
        }
    }
    unreachable!()
}
