//! Assembly of the quadratic estimation loss `1/2 t' Gamma t - g' t`.
//!
//! The loss is block-diagonal over the m columns of the parameter matrix:
//! block j couples column j of K (and eta_j in the non-centered layout).
//! Blocks are stored independently; the full `m(m+1) x m(m+1)` matrix is
//! never materialized and total assembly cost is O(n m^3).

use crate::error::{Error, Result};
use crate::hfun::HSpec;
use crate::model::{Dataset, ModelSpec};
use crate::solver::Estimate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Which parameter set a loss block couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossLayout {
    /// `eta = 0`: each block has side m.
    Centered,
    /// K and eta jointly: each block has side m+1 (last row/column is eta).
    Noncentered,
    /// Gaussian score matching on all of R^m: side-m blocks, `g_j = e_j`.
    GaussianFull,
}

impl LossLayout {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossLayout::Centered => "centered",
            LossLayout::Noncentered => "noncentered",
            LossLayout::GaussianFull => "gaussian_full",
        }
    }
}

/// One per-column block of the quadratic loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBlock {
    pub gamma: DMatrix<f64>,
    pub g: DVector<f64>,
}

/// The assembled estimation problem: blocks, applied amplifier, and the
/// model metadata needed to interpret them.
#[derive(Debug, Clone)]
pub struct QuadraticLoss {
    pub layout: LossLayout,
    pub blocks: Vec<LossBlock>,
    /// Diagonal additions applied per block (all zeros when un-amplified);
    /// subtracting them recovers the raw diagonals.
    pub amplifier: Vec<DVector<f64>>,
    pub n: usize,
    pub m: usize,
    pub spec: Option<ModelSpec>,
    pub hspec: Option<Vec<HSpec>>,
}

impl QuadraticLoss {
    pub fn block_side(&self) -> usize {
        match self.layout {
            LossLayout::Noncentered => self.m + 1,
            _ => self.m,
        }
    }

    pub fn has_eta(&self) -> bool {
        self.layout == LossLayout::Noncentered
    }

    /// Largest `|g|` entry; the default top of the lambda grid.
    pub fn g_inf_norm(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.g.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// Un-amplified copy (subtracts the recorded diagonal additions).
    pub fn raw(&self) -> QuadraticLoss {
        let mut out = self.clone();
        for (block, gam) in out.blocks.iter_mut().zip(&self.amplifier) {
            for i in 0..gam.len() {
                block.gamma[(i, i)] -= gam[i];
            }
        }
        for gam in out.amplifier.iter_mut() {
            gam.fill(0.0);
        }
        out
    }
}

/// Diagonal amplification request.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplifierMode {
    None,
    /// Replace each in-scope diagonal d by `delta * d`, `delta >= 1`.
    Multiplier(f64),
    /// Add the given vector entrywise to each block's in-scope diagonal.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplifierScope {
    AllDiagonal,
    /// Only the K-block diagonals; required for the non-centered layout.
    KBlockOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierSpec {
    pub mode: AmplifierMode,
    pub scope: AmplifierScope,
}

impl AmplifierSpec {
    pub fn multiplier(delta: f64, scope: AmplifierScope) -> Self {
        AmplifierSpec { mode: AmplifierMode::Multiplier(delta), scope }
    }

    pub fn none() -> Self {
        AmplifierSpec { mode: AmplifierMode::None, scope: AmplifierScope::AllDiagonal }
    }

    pub fn describe(&self) -> String {
        let scope = match self.scope {
            AmplifierScope::AllDiagonal => "all",
            AmplifierScope::KBlockOnly => "k-block",
        };
        match &self.mode {
            AmplifierMode::None => "none".to_string(),
            AmplifierMode::Multiplier(d) => format!("mult:{d}:{scope}"),
            AmplifierMode::Explicit(_) => format!("explicit:{scope}"),
        }
    }
}

/// Checks that exact zeros in column `j` are compatible with the exponents
/// and weight function actually used by the assembly formulas.
fn zeros_allowed(spec: &ModelSpec, h: &HSpec) -> std::result::Result<(), String> {
    let a_ok = spec.a == 1.0 || spec.a >= 2.0;
    if !a_ok {
        return Err(format!("exponent a-1 = {} or a-2 is negative", spec.a - 1.0));
    }
    if !spec.centered {
        let b_ok = spec.b == 1.0 || spec.b >= 2.0;
        if !b_ok {
            return Err(format!("exponent b-1 = {} or b-2 is negative", spec.b - 1.0));
        }
    }
    if !h.origin_limit().1.is_finite() {
        return Err(format!("weight derivative of {h} is unbounded at 0"));
    }
    Ok(())
}

fn check_domain(spec: &ModelSpec, h: &[HSpec], data: &Dataset) -> Result<()> {
    for j in 0..data.m() {
        let mut zero_row = None;
        for i in 0..data.n() {
            if data.x[(i, j)] == 0.0 {
                zero_row = Some(i);
                break;
            }
        }
        if let Some(i) = zero_row {
            if let Err(reason) = zeros_allowed(spec, &h[j]) {
                return Err(Error::DomainViolation { row: i, col: j, detail: reason });
            }
        }
    }
    Ok(())
}

/// Assembles the block loss for a pairwise interaction power model.
///
/// Block j is built as `(1/n) y'y` from the rank-structured factor
/// `y = [-(sqrt(h_j) o X_j^(a-1)) o x^a, sqrt(h_j) o X_j^(b-1)]` and the
/// linear part from the closed-form column expressions.
pub fn assemble_pairwise(spec: &ModelSpec, h: &[HSpec], data: &Dataset) -> Result<QuadraticLoss> {
    let (n, m) = (data.n(), data.m());
    if h.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} weight functions for {} columns",
            h.len(),
            m
        )));
    }
    check_domain(spec, h, data)?;
    let (a, b) = (spec.a, spec.b);
    let side = if spec.centered { m } else { m + 1 };

    // x^a is shared by every block.
    let xa = data.x.map(|v| v.powf(a));

    let blocks: Vec<LossBlock> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut y = DMatrix::zeros(n, side);
            let mut g = DVector::zeros(side);
            let mut g2 = 0.0;
            for i in 0..n {
                let xj = data.x[(i, j)];
                let (hv, hd) = h[j].eval_unchecked(xj);
                let sqrt_h = hv.sqrt();
                let w = sqrt_h * xj.powf(a - 1.0);
                for k in 0..m {
                    y[(i, k)] = -w * xa[(i, k)];
                }
                // Linear part for the K column.
                let mut coef = hd * xj.powf(a - 1.0);
                if a != 1.0 {
                    coef += (a - 1.0) * hv * xj.powf(a - 2.0);
                }
                for k in 0..m {
                    g[k] += coef * xa[(i, k)];
                }
                g[j] += a * hv * xj.powf(2.0 * a - 2.0);
                if !spec.centered {
                    y[(i, m)] = sqrt_h * xj.powf(b - 1.0);
                    let mut v = -hd * xj.powf(b - 1.0);
                    if b != 1.0 {
                        v -= (b - 1.0) * hv * xj.powf(b - 2.0);
                    }
                    g2 += v;
                }
            }
            let gamma = y.tr_mul(&y) / n as f64;
            g /= n as f64;
            if !spec.centered {
                g[m] = g2 / n as f64;
            }
            LossBlock { gamma, g }
        })
        .collect();

    Ok(QuadraticLoss {
        layout: if spec.centered { LossLayout::Centered } else { LossLayout::Noncentered },
        amplifier: vec![DVector::zeros(side); m],
        blocks,
        n,
        m,
        spec: Some(*spec),
        hspec: Some(h.to_vec()),
    })
}

/// Direct assembly for the truncated Gaussian model (`a = b = 1`) from its
/// explicit second-moment expressions; must agree with
/// `assemble_pairwise` at `a = b = 1`.
pub fn assemble_truncated_gaussian(
    h: &HSpec,
    data: &Dataset,
    centered: bool,
) -> Result<QuadraticLoss> {
    let (n, m) = (data.n(), data.m());
    let nf = n as f64;
    let side = if centered { m } else { m + 1 };
    let spec = ModelSpec::truncated_gaussian(centered);

    let blocks: Vec<LossBlock> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut hv = DVector::zeros(n);
            let mut hd = DVector::zeros(n);
            for i in 0..n {
                let (v, d) = h.eval_unchecked(data.x[(i, j)]);
                hv[i] = v;
                hd[i] = d;
            }
            let mut gamma = DMatrix::zeros(side, side);
            for k in 0..m {
                for l in 0..=k {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += hv[i] * data.x[(i, k)] * data.x[(i, l)];
                    }
                    gamma[(k, l)] = acc / nf;
                    gamma[(l, k)] = gamma[(k, l)];
                }
            }
            let mut g = DVector::zeros(side);
            for k in 0..m {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += hd[i] * data.x[(i, k)];
                }
                if k == j {
                    acc += hv.sum();
                }
                g[k] = acc / nf;
            }
            if !centered {
                for k in 0..m {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += hv[i] * data.x[(i, k)];
                    }
                    gamma[(k, m)] = -acc / nf;
                    gamma[(m, k)] = gamma[(k, m)];
                }
                gamma[(m, m)] = hv.sum() / nf;
                g[m] = -hd.sum() / nf;
            }
            LossBlock { gamma, g }
        })
        .collect();

    Ok(QuadraticLoss {
        layout: if centered { LossLayout::Centered } else { LossLayout::Noncentered },
        amplifier: vec![DVector::zeros(side); m],
        blocks,
        n,
        m,
        spec: Some(spec),
        hspec: Some(vec![h.clone(); m]),
    })
}

/// Gaussian score matching loss on all of `R^m`: every block shares the
/// second-moment matrix and `g_j = e_j`.
pub fn assemble_gaussian_full_support(x: &DMatrix<f64>) -> Result<QuadraticLoss> {
    let (n, m) = (x.nrows(), x.ncols());
    if n == 0 || m == 0 {
        return Err(Error::EmptyInput("data matrix".into()));
    }
    let gram = x.tr_mul(x) / n as f64;
    let blocks = (0..m)
        .map(|j| {
            let mut g = DVector::zeros(m);
            g[j] = 1.0;
            LossBlock { gamma: gram.clone(), g }
        })
        .collect();
    Ok(QuadraticLoss {
        layout: LossLayout::GaussianFull,
        blocks,
        amplifier: vec![DVector::zeros(m); m],
        n,
        m,
        spec: None,
        hspec: None,
    })
}

/// Applies a diagonal amplifier, recording what was added.
pub fn amplify(loss: &QuadraticLoss, amp: &AmplifierSpec) -> Result<QuadraticLoss> {
    if loss.layout == LossLayout::Noncentered && amp.scope == AmplifierScope::AllDiagonal {
        if !matches!(amp.mode, AmplifierMode::None) {
            return Err(Error::ScopeMismatch(
                "non-centered losses amplify the K-block diagonals only".into(),
            ));
        }
    }
    let scope_len = match (loss.layout, amp.scope) {
        (LossLayout::Noncentered, AmplifierScope::KBlockOnly) => loss.m,
        _ => loss.block_side(),
    };
    let mut out = loss.clone();
    match &amp.mode {
        AmplifierMode::None => {}
        AmplifierMode::Multiplier(delta) => {
            if !(*delta >= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "multiplier must be >= 1, got {delta}"
                )));
            }
            for (block, gam) in out.blocks.iter_mut().zip(out.amplifier.iter_mut()) {
                for i in 0..scope_len {
                    let add = (delta - 1.0) * block.gamma[(i, i)];
                    block.gamma[(i, i)] += add;
                    gam[i] += add;
                }
            }
        }
        AmplifierMode::Explicit(gamma) => {
            if gamma.len() != scope_len {
                return Err(Error::DimensionMismatch(format!(
                    "explicit amplifier has length {}, scope needs {}",
                    gamma.len(),
                    scope_len
                )));
            }
            if gamma.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidArgument("amplifier entries must be >= 0".into()));
            }
            for (block, gam) in out.blocks.iter_mut().zip(out.amplifier.iter_mut()) {
                for i in 0..scope_len {
                    block.gamma[(i, i)] += gamma[i];
                    gam[i] += gamma[i];
                }
            }
        }
    }
    Ok(out)
}

/// Model family selecting the consistency-threshold multiplier formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierFamily {
    TruncatedGaussian,
    GaussianFull,
}

/// Largest multiplier with a consistency guarantee.
///
/// Truncated Gaussian: `2 - (1 + 4e max(6 log m / n, sqrt(6 log m / n)))^-1`;
/// Gaussian on `R^m`: `2 - (1 + 80 sqrt(log m / n))^-1`.
pub fn multiplier_upper_bound(n: usize, m: usize, family: MultiplierFamily) -> f64 {
    assert!(n >= 1 && m >= 2, "need n >= 1 and m >= 2");
    let ratio = (m as f64).ln() / n as f64;
    match family {
        MultiplierFamily::TruncatedGaussian => {
            let t = (6.0 * ratio).max((6.0 * ratio).sqrt());
            2.0 - 1.0 / (1.0 + 4.0 * std::f64::consts::E * t)
        }
        MultiplierFamily::GaussianFull => 2.0 - 1.0 / (1.0 + 80.0 * ratio.sqrt()),
    }
}

/// Data needed to recover eta after solving the profiled K problem.
#[derive(Debug, Clone)]
pub struct EtaRecovery {
    pub gamma22: Vec<f64>,
    pub gamma12: Vec<DVector<f64>>,
    pub g2: Vec<f64>,
}

impl EtaRecovery {
    /// `eta_j = gamma22_j^-1 (g2_j - gamma12_j' K_col_j)`.
    pub fn recover(&self, k: &DMatrix<f64>) -> DVector<f64> {
        let m = k.ncols();
        DVector::from_iterator(
            m,
            (0..m).map(|j| (self.g2[j] - self.gamma12[j].dot(&k.column(j).into_owned())) / self.gamma22[j]),
        )
    }
}

/// Eliminates eta by per-block Schur complement, returning a centered-layout
/// loss for K plus the data needed to recover eta afterwards.
pub fn profile_out_eta(loss: &QuadraticLoss) -> Result<(QuadraticLoss, EtaRecovery)> {
    if loss.layout != LossLayout::Noncentered {
        return Err(Error::ScopeMismatch("profiling requires a non-centered loss".into()));
    }
    let m = loss.m;
    let mut blocks = Vec::with_capacity(m);
    let mut amplifier = Vec::with_capacity(m);
    let mut rec = EtaRecovery { gamma22: Vec::new(), gamma12: Vec::new(), g2: Vec::new() };
    for (j, block) in loss.blocks.iter().enumerate() {
        let g22 = block.gamma[(m, m)];
        if g22 == 0.0 {
            return Err(Error::ZeroEtaBlock { block: j });
        }
        let g12 = block.gamma.view((0, m), (m, 1)).into_owned().column(0).into_owned();
        let top = block.gamma.view((0, 0), (m, m)).into_owned();
        let schur = &top - &g12 * g12.transpose() / g22;
        let g1 = block.g.rows(0, m).into_owned();
        let g2 = block.g[m];
        let g_new = &g1 - &g12 * (g2 / g22);
        blocks.push(LossBlock { gamma: schur, g: g_new });
        amplifier.push(loss.amplifier[j].rows(0, m).into_owned());
        rec.gamma22.push(g22);
        rec.gamma12.push(g12);
        rec.g2.push(g2);
    }
    Ok((
        QuadraticLoss {
            layout: LossLayout::Centered,
            blocks,
            amplifier,
            n: loss.n,
            m,
            spec: loss.spec,
            hspec: loss.hspec.clone(),
        },
        rec,
    ))
}

/// Evaluates the sample score-matching loss directly from analytic first and
/// second partials of the log-density; cross-validates the quadratic algebra.
pub fn direct_sample_loss(
    spec: &ModelSpec,
    h: &[HSpec],
    data: &Dataset,
    params: &crate::model::InteractionParams,
) -> Result<f64> {
    let (n, m) = (data.n(), data.m());
    if params.dim() != m || h.len() != m {
        return Err(Error::DimensionMismatch("params/h/data dimensions differ".into()));
    }
    check_domain(spec, h, data)?;
    let (a, b) = (spec.a, spec.b);
    let sym = (&params.k + params.k.transpose()) * 0.5;
    let mut total = 0.0;
    for i in 0..n {
        let xi = data.x.row(i).transpose();
        let xa = xi.map(|v| v.powf(a));
        let s = &sym * &xa;
        for j in 0..m {
            let xj = xi[j];
            let (hv, hd) = h[j].eval_unchecked(xj);
            let mut grad = -xj.powf(a - 1.0) * s[j];
            let mut hess = -a * sym[(j, j)] * xj.powf(2.0 * a - 2.0);
            if a != 1.0 {
                hess -= (a - 1.0) * xj.powf(a - 2.0) * s[j];
            }
            if !spec.centered {
                grad += params.eta[j] * xj.powf(b - 1.0);
                if b != 1.0 {
                    hess += (b - 1.0) * params.eta[j] * xj.powf(b - 2.0);
                }
            }
            total += hd * grad + hv * (hess + 0.5 * grad * grad);
        }
    }
    Ok(total / n as f64)
}

/// Rescales an estimate fitted on column-standardized data back to the
/// original units: `K[i][j] /= (s_i s_j)^a`, `eta[j] /= s_j^b` for `b > 0`
/// (unchanged at `b = 0`). The support is untouched.
pub fn back_transform_estimate(
    est: &Estimate,
    scale: &DVector<f64>,
    spec: &ModelSpec,
) -> Estimate {
    let mut out = est.clone();
    let m = out.k.nrows();
    for i in 0..m {
        for j in 0..m {
            out.k[(i, j)] /= (scale[i] * scale[j]).powf(spec.a);
        }
    }
    if spec.b > 0.0 {
        if let Some(eta) = out.eta.as_mut() {
            for j in 0..m {
                eta[j] /= scale[j].powf(spec.b);
            }
        }
    }
    out
}

/// Writes a binary loss snapshot: one JSON header line
/// (`layout, n, m, a, b, h, amplifier`), then per block the matrix in
/// column-major order, the linear term, and the applied diagonal addition,
/// all as little-endian f64.
pub fn write_snapshot(loss: &QuadraticLoss, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let header = serde_json::json!({
        "schema": "gsm-loss/1",
        "layout": loss.layout.as_str(),
        "n": loss.n,
        "m": loss.m,
        "a": loss.spec.map(|s| s.a),
        "b": loss.spec.map(|s| s.b),
        "centered": loss.spec.map(|s| s.centered),
        "h": loss.hspec.as_ref().map(|hs| hs.iter().map(|h| h.to_string()).collect::<Vec<_>>()),
        "amplified": loss.amplifier.iter().any(|g| g.iter().any(|&v| v != 0.0)),
    });
    writeln!(w, "{header}")?;
    for (block, gam) in loss.blocks.iter().zip(&loss.amplifier) {
        for v in block.gamma.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in block.g.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        let side = block.g.len();
        for i in 0..side {
            let v = if i < gam.len() { gam[i] } else { 0.0 };
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back a snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<QuadraticLoss> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut header_line = String::new();
    r.read_line(&mut header_line)?;
    let header: serde_json::Value = serde_json::from_str(&header_line)
        .map_err(|e| Error::SnapshotFormat(format!("bad header: {e}")))?;
    let layout = match header["layout"].as_str() {
        Some("centered") => LossLayout::Centered,
        Some("noncentered") => LossLayout::Noncentered,
        Some("gaussian_full") => LossLayout::GaussianFull,
        other => return Err(Error::SnapshotFormat(format!("unknown layout {other:?}"))),
    };
    let n = header["n"].as_u64().ok_or_else(|| Error::SnapshotFormat("missing n".into()))?
        as usize;
    let m = header["m"].as_u64().ok_or_else(|| Error::SnapshotFormat("missing m".into()))?
        as usize;
    let spec = match (header["a"].as_f64(), header["b"].as_f64()) {
        (Some(a), Some(b)) => Some(crate::model::ModelSpec::new(
            a,
            b,
            header["centered"].as_bool().unwrap_or(layout == LossLayout::Centered),
        )?),
        _ => None,
    };
    let hspec = header["h"].as_array().map(|arr| {
        arr.iter()
            .filter_map(|v| v.as_str())
            .map(|s| s.parse::<HSpec>())
            .collect::<Result<Vec<_>>>()
    });
    let hspec = match hspec {
        Some(res) => Some(res?),
        None => None,
    };
    let side = match layout {
        LossLayout::Noncentered => m + 1,
        _ => m,
    };
    let read_f64 = |r: &mut BufReader<std::fs::File>| -> Result<f64> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    let mut blocks = Vec::with_capacity(m);
    let mut amplifier = Vec::with_capacity(m);
    for _ in 0..m {
        let mut gamma = DMatrix::zeros(side, side);
        for c in 0..side {
            for rix in 0..side {
                gamma[(rix, c)] = read_f64(&mut r)?;
            }
        }
        let mut g = DVector::zeros(side);
        for i in 0..side {
            g[i] = read_f64(&mut r)?;
        }
        let mut gam = DVector::zeros(side);
        for i in 0..side {
            gam[i] = read_f64(&mut r)?;
        }
        blocks.push(LossBlock { gamma, g });
        amplifier.push(gam);
    }
    Ok(QuadraticLoss { layout, blocks, amplifier, n, m, spec, hspec })
}


#[cfg(test)]
mod profile_equivalence_tests {
    use super::*;
    use crate::sampling::trial_rng;
    use rand::Rng;

    #[test]
    fn profiled_solve_recovers_the_full_block_solution() {
        // Block elimination: solving the profiled K system and recovering
        // eta reproduces the unregularized full solve, block by block.
        let mut rng = trial_rng(88, 0);
        let x = nalgebra::DMatrix::from_fn(30, 3, |_, _| 0.1 + rng.random::<f64>());
        let data = Dataset::new(x).unwrap();
        let spec = ModelSpec::truncated_gaussian(false);
        let hs: Vec<HSpec> = vec!["pow:1:3".parse().unwrap(); 3];
        let loss = assemble_pairwise(&spec, &hs, &data).unwrap();
        let (k_loss, rec) = profile_out_eta(&loss).unwrap();

        let mut k_profiled = nalgebra::DMatrix::zeros(3, 3);
        for (j, block) in k_loss.blocks.iter().enumerate() {
            let theta = block.gamma.clone().cholesky().unwrap().solve(&block.g);
            for i in 0..3 {
                k_profiled[(i, j)] = theta[i];
            }
        }
        let eta_profiled = rec.recover(&k_profiled);

        for (j, block) in loss.blocks.iter().enumerate() {
            let theta = block.gamma.clone().cholesky().unwrap().solve(&block.g);
            for i in 0..3 {
                assert!(
                    (k_profiled[(i, j)] - theta[i]).abs() < 1e-10,
                    "K mismatch at ({i}, {j})"
                );
            }
            assert!((eta_profiled[j] - theta[3]).abs() < 1e-10, "eta mismatch at {j}");
        }
    }
}
