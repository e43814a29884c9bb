mod io;

use clap::{Args, Parser, Subcommand};
use gsm::{
    amplify, assemble_pairwise, back_transform_estimate, check_normalizable, h_admissible,
    multiplier_upper_bound, profile_out_eta, sample_pairwise_gibbs, sample_tn_gibbs, select,
    solve_path, trial_rng, Admissibility, AmplifierScope, AmplifierSpec, Dataset, Error as GsmError,
    GibbsConfig, GraphSpec, HSpec, InteractionParams, ModelSpec, MultiplierFamily,
    Normalizability, QuadratureConfig, SolverConfig, UnivariateTarget,
};
use nalgebra::{DMatrix, DVector};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gsm", version, about = "Generalized score matching for non-negative data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an interaction matrix from a CSV of non-negative observations.
    Estimate(EstimateArgs),
    /// Generate a ground-truth model and sample from it.
    Simulate(SimulateArgs),
    /// Run a multi-trial edge-recovery experiment and average the ROC curves.
    Roc(RocArgs),
    /// Tabulate asymptotic variances and efficiency for the univariate study.
    Univariate(UnivariateArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV (rows are observations; a header row is auto-detected).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Treat eta as identically zero.
    #[arg(long)]
    centered: bool,
    /// Weight function, e.g. pow:1:3, log1p:2, mcp:1:10, scad:1:3, const:1.
    #[arg(long, default_value = "pow:1:3")]
    h: String,
    /// Diagonal multiplier: a number >= 1, or `auto` for the consistency
    /// threshold C(n, m).
    #[arg(long)]
    mult: Option<String>,
    /// Profile eta out instead of penalizing it (non-centered only).
    #[arg(long)]
    profile_eta: bool,
    /// lambda_eta / lambda_K for the joint non-centered solve (`inf` pins
    /// eta at zero, 0 leaves it unpenalized).
    #[arg(long, default_value = "0")]
    lambda_ratio: String,
    #[arg(long, default_value_t = 50)]
    nlambda: usize,
    /// Score the path by eBIC and report the selected model.
    #[arg(long)]
    ebic: bool,
    /// Use support-restricted refits inside the eBIC score.
    #[arg(long)]
    refit: bool,
    /// Include the diagonal of K in the l1 penalty (off by default,
    /// matching the reference experiments).
    #[arg(long)]
    penalize_diagonal: bool,
    /// Skip column l2-norm standardization.
    #[arg(long)]
    no_scale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model exponents as `a:b`, e.g. 1:1 or 0.5:0.
    #[arg(long)]
    model: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Graph scheme: `block:<pi>:<num_blocks>` or `er:<pi>`.
    #[arg(long)]
    graph: String,
    /// Constant mean parameter (truncated Gaussian only; eta = K mu 1).
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Constant eta component.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gibbs burn-in sweeps.
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Keep every thin-th Gibbs sweep. Raise this for ill-conditioned
    /// interaction matrices, where the chain mixes slowly.
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Emit a header row in the data CSV.
    #[arg(long)]
    header: bool,
    /// Output CSV path; truth and manifest are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RocArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    graph: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "pow:1:3")]
    h: String,
    #[arg(long)]
    mult: Option<String>,
    /// Trials per ground-truth matrix.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 5)]
    num_k0: usize,
    #[arg(long, default_value_t = 50)]
    nlambda: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Constant eta component (makes the model non-centered).
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Draw mu ~ N(0, sd^2) per trial (truncated Gaussian, non-centered).
    #[arg(long)]
    mu_sd: Option<f64>,
    /// Gibbs burn-in sweeps.
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Keep every thin-th Gibbs sweep.
    #[arg(long, default_value_t = 10)]
    thin: usize,
    #[arg(long)]
    profile_eta: bool,
    #[arg(long, default_value = "0")]
    lambda_ratio: String,
    /// Prefix for roc.csv, auc.json, and manifest.json outputs.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct UnivariateArgs {
    /// `mu` (sigma^2 known) or `sigma2` (mu known).
    #[arg(long)]
    target: String,
    /// The known nuisance value.
    #[arg(long, allow_negative_numbers = true)]
    known: f64,
    /// Parameter grid `start:stop:step`.
    #[arg(long)]
    grid: String,
    /// Comma-separated weight functions.
    #[arg(long)]
    h: String,
    #[arg(long)]
    out: PathBuf,
}

/// Exit codes: 0 success, 1 usage, 2 data/domain, 3 numeric failure.
fn exit_code(err: &GsmError) -> i32 {
    match err {
        GsmError::DomainViolation { .. }
        | GsmError::DimensionMismatch(_)
        | GsmError::NotSquare { .. }
        | GsmError::EmptyInput(_)
        | GsmError::NotNormalizable(_)
        | GsmError::EmptyTrueSupport
        | GsmError::Io(_) => 2,
        GsmError::ParseHSpec(_) | GsmError::InvalidArgument(_) => 1,
        GsmError::ZeroDiagonal { .. }
        | GsmError::SingularBlock { .. }
        | GsmError::ScopeMismatch(_)
        | GsmError::ZeroEtaBlock { .. }
        | GsmError::ZeroDenominator(_)
        | GsmError::Quadrature(_)
        | GsmError::ConditionalUnderflow { .. }
        | GsmError::NoConvergence { .. }
        | GsmError::SnapshotFormat(_) => 3,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let started = Instant::now();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(&args, started),
        Command::Simulate(args) => cmd_simulate(&args, started),
        Command::Roc(args) => cmd_roc(&args, started),
        Command::Univariate(args) => cmd_univariate(&args, started),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn parse_model(s: &str) -> Result<(f64, f64), GsmError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(GsmError::InvalidArgument(format!("--model expects a:b, got `{s}`")));
    }
    let a = parts[0]
        .parse::<f64>()
        .map_err(|_| GsmError::InvalidArgument(format!("bad exponent `{}`", parts[0])))?;
    let b = parts[1]
        .parse::<f64>()
        .map_err(|_| GsmError::InvalidArgument(format!("bad exponent `{}`", parts[1])))?;
    Ok((a, b))
}

fn parse_graph(s: &str) -> Result<GraphSpec, GsmError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || {
        GsmError::InvalidArgument(format!(
            "--graph expects block:<pi>:<blocks> or er:<pi>, got `{s}`"
        ))
    };
    match parts.as_slice() {
        ["block", pi, blocks] => {
            let pi = pi.parse::<f64>().map_err(|_| bad())?;
            let blocks = blocks.parse::<usize>().map_err(|_| bad())?;
            Ok(GraphSpec::block(pi, blocks))
        }
        ["er", pi] => {
            let pi = pi.parse::<f64>().map_err(|_| bad())?;
            Ok(GraphSpec::erdos_renyi(pi))
        }
        _ => Err(bad()),
    }
}

fn parse_ratio(s: &str) -> Result<f64, GsmError> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    let v = s
        .parse::<f64>()
        .map_err(|_| GsmError::InvalidArgument(format!("bad --lambda-ratio `{s}`")))?;
    if v < 0.0 {
        return Err(GsmError::InvalidArgument("--lambda-ratio must be >= 0".into()));
    }
    Ok(v)
}

fn parse_mult(s: Option<&str>, n: usize, m: usize) -> Result<Option<f64>, GsmError> {
    match s {
        None => Ok(None),
        Some(v) if v.eq_ignore_ascii_case("auto") => {
            // The truncated-Gaussian threshold doubles as the default for
            // the other exponent families.
            Ok(Some(multiplier_upper_bound(n, m, MultiplierFamily::TruncatedGaussian)))
        }
        Some(v) => {
            let d = v
                .parse::<f64>()
                .map_err(|_| GsmError::InvalidArgument(format!("bad --mult `{v}`")))?;
            if d < 1.0 {
                return Err(GsmError::InvalidArgument("--mult must be >= 1".into()));
            }
            Ok(Some(d))
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name =
        out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.push_str(".manifest.json");
    out.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    path: &Path,
    command: &str,
    config: serde_json::Value,
    seeds: serde_json::Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    started: Instant,
) -> Result<(), GsmError> {
    let manifest = json!({
        "schema": "gsm/1",
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "seed": seeds,
        "wall_time_secs": started.elapsed().as_secs_f64(),
        "inputs": inputs,
        "outputs": outputs,
        "warnings": warnings,
    });
    io::write_json(path, &manifest)?;
    Ok(())
}

fn cmd_estimate(args: &EstimateArgs, started: Instant) -> Result<(), GsmError> {
    let spec = ModelSpec::new(args.a, args.b, args.centered)?;
    let h: HSpec = args.h.parse()?;
    let lambda_ratio = parse_ratio(&args.lambda_ratio)?;
    if args.profile_eta && args.centered {
        return Err(GsmError::InvalidArgument(
            "--profile-eta only applies to non-centered models".into(),
        ));
    }
    if args.nlambda < 2 {
        return Err(GsmError::InvalidArgument("--nlambda must be at least 2".into()));
    }

    let (raw, _had_header) = io::read_csv_matrix(&args.data)?;
    if spec.b == 0.0 && !spec.centered {
        for j in 0..raw.ncols() {
            for i in 0..raw.nrows() {
                if raw[(i, j)] == 0.0 {
                    return Err(GsmError::DomainViolation {
                        row: i,
                        col: j,
                        detail: format!(
                            "zero entry at data row {}, column {} but b = 0 needs x > 0",
                            i + 1,
                            j + 1
                        ),
                    });
                }
            }
        }
    }
    let data = if args.no_scale { Dataset::new(raw)? } else { Dataset::standardized(raw)? };
    let (n, m) = (data.n(), data.m());

    let mut warnings = Vec::new();
    if let Admissibility::Inadmissible { clause } = h_admissible(&h, &spec, None) {
        warnings.push(format!("weight function may be invalid for this model: {clause}"));
        eprintln!("warning: {}", warnings.last().unwrap());
    }

    let hs = vec![h.clone(); m];
    let raw_loss = assemble_pairwise(&spec, &hs, &data)?;
    let mult = parse_mult(args.mult.as_deref(), n, m)?;
    let scope =
        if spec.centered { AmplifierScope::AllDiagonal } else { AmplifierScope::KBlockOnly };
    let loss = match mult {
        Some(delta) => amplify(&raw_loss, &AmplifierSpec::multiplier(delta, scope))?,
        None => raw_loss.clone(),
    };

    // The solve target plus the matching un-amplified loss for eBIC.
    let (solve_loss, ebic_loss, recovery) = if args.profile_eta {
        let (k_loss, rec) = profile_out_eta(&loss)?;
        let (raw_k_loss, _) = profile_out_eta(&raw_loss)?;
        (k_loss, raw_k_loss, Some(rec))
    } else {
        (loss, raw_loss.clone(), None)
    };

    let cfg = SolverConfig {
        lambda_ratio,
        penalize_diagonal: args.penalize_diagonal,
        ..Default::default()
    };
    let grid = gsm::default_lambda_grid(&solve_loss, args.nlambda);
    let path = solve_path(&solve_loss, &grid, &cfg)?;

    let (chosen_idx, scores) = if args.ebic {
        let (best, scores) = select(&path, &ebic_loss, n, args.refit, &cfg)?;
        (best, Some(scores))
    } else {
        (path.estimates.len() - 1, None)
    };
    let mut est = path.estimates[chosen_idx].clone();
    if let Some(rec) = &recovery {
        est.eta = Some(rec.recover(&est.k));
    }
    let est = back_transform_estimate(&est, &data.scale, &spec);

    let support: Vec<[usize; 2]> =
        est.off_diagonal_support().into_iter().map(|(i, j)| [i, j]).collect();
    let out = json!({
        "schema": "gsm/1",
        "n": n,
        "m": m,
        "a": spec.a,
        "b": spec.b,
        "centered": spec.centered,
        "h": h.to_string(),
        "standardized": !args.no_scale,
        "scale": data.scale.iter().copied().collect::<Vec<f64>>(),
        "multiplier": mult,
        "profiled": args.profile_eta,
        "lambda": est.lambda,
        "lambda_grid": grid,
        "selected_index": if args.ebic { Some(chosen_idx) } else { None },
        "converged": est.converged,
        "iterations": est.iterations,
        "K": io::matrix_to_json(&est.k),
        "eta": est.eta.as_ref().map(|e| e.iter().copied().collect::<Vec<f64>>()),
        "support": support,
        "ebic_path": scores.map(|s| {
            s.iter()
                .map(|sc| {
                    json!({
                        "lambda": sc.lambda,
                        "support_size": sc.support_size,
                        "ebic": sc.score,
                        "refitted": sc.refitted,
                    })
                })
                .collect::<Vec<_>>()
        }),
    });
    io::write_json(&args.out, &out)?;
    write_manifest(
        &manifest_path(&args.out),
        "estimate",
        json!({
            "data": args.data.display().to_string(),
            "a": args.a, "b": args.b, "centered": args.centered,
            "h": args.h, "mult": args.mult, "profile_eta": args.profile_eta,
            "lambda_ratio": args.lambda_ratio, "nlambda": args.nlambda,
            "ebic": args.ebic, "refit": args.refit, "no_scale": args.no_scale,
            "penalize_diagonal": args.penalize_diagonal,
            "out": args.out.display().to_string(),
        }),
        json!(null),
        vec![args.data.display().to_string()],
        vec![args.out.display().to_string()],
        warnings,
        started,
    )
}

fn cmd_simulate(args: &SimulateArgs, started: Instant) -> Result<(), GsmError> {
    let (a, b) = parse_model(&args.model)?;
    if args.mu.is_some() && args.eta.is_some() {
        return Err(GsmError::InvalidArgument("--mu and --eta are mutually exclusive".into()));
    }
    if args.mu.is_some() && !(a == 1.0 && b == 1.0) {
        return Err(GsmError::InvalidArgument(
            "--mu parametrizes the truncated Gaussian; use --eta for other models".into(),
        ));
    }
    let centered = args.mu.is_none() && args.eta.is_none();
    let spec = ModelSpec::new(a, b, centered)?;
    let graph = parse_graph(&args.graph)?;

    // Retry a few seeds if the generated parameters are not normalizable.
    let mut chosen: Option<(InteractionParams, u64)> = None;
    let mut last_violation = String::new();
    for attempt in 0..10u64 {
        let mut rng = trial_rng(args.seed, attempt);
        let k0 = gsm::generate_k0(args.m, &graph, &mut rng)?;
        let eta = match (args.mu, args.eta) {
            (Some(mu), _) => &k0 * DVector::from_element(args.m, mu),
            (_, Some(e)) => DVector::from_element(args.m, e),
            _ => DVector::zeros(args.m),
        };
        let params = InteractionParams::new(k0, eta)?;
        match check_normalizable(&spec, &params, &Default::default())? {
            Normalizability::Violated(cond) => {
                last_violation = cond.to_string();
                continue;
            }
            _ => {
                chosen = Some((params, attempt));
                break;
            }
        }
    }
    let (params, attempt) = chosen.ok_or(GsmError::NotNormalizable(last_violation))?;

    let gibbs = GibbsConfig { burn_in: args.burn_in, thin: args.thin, ..Default::default() };
    let mut rng = trial_rng(args.seed, 100 + attempt);
    let data = if spec.is_truncated_gaussian() {
        sample_tn_gibbs(&params, args.n, &gibbs, &mut rng)?
    } else {
        sample_pairwise_gibbs(&spec, &params, args.n, &gibbs, &mut rng)?
    };

    let header: Option<Vec<String>> =
        if args.header { Some((1..=args.m).map(|j| format!("v{j}")).collect()) } else { None };
    io::write_csv_matrix(&args.out, &data.x, header.as_deref())?;

    let support: Vec<[usize; 2]> = gsm::solver::support_of(&params.k)
        .into_iter()
        .filter(|&(i, j)| i < j)
        .map(|(i, j)| [i, j])
        .collect();
    let truth_path = args.out.with_file_name({
        let mut name =
            args.out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        name.push_str(".truth.json");
        name
    });
    io::write_json(
        &truth_path,
        &json!({
            "schema": "gsm/1",
            "K": io::matrix_to_json(&params.k),
            "eta": params.eta.iter().copied().collect::<Vec<f64>>(),
            "support": support,
            "a": a, "b": b, "centered": centered,
        }),
    )?;
    write_manifest(
        &manifest_path(&args.out),
        "simulate",
        json!({
            "model": args.model, "m": args.m, "n": args.n, "graph": args.graph,
            "mu": args.mu, "eta": args.eta, "header": args.header,
            "burn_in": args.burn_in, "thin": args.thin,
            "out": args.out.display().to_string(),
        }),
        json!(args.seed),
        vec![],
        vec![args.out.display().to_string(), truth_path.display().to_string()],
        vec![],
        started,
    )
}

fn cmd_roc(args: &RocArgs, started: Instant) -> Result<(), GsmError> {
    let (a, b) = parse_model(&args.model)?;
    if args.mu_sd.is_some() && !(a == 1.0 && b == 1.0) {
        return Err(GsmError::InvalidArgument(
            "--mu-sd applies to the truncated Gaussian only".into(),
        ));
    }
    let centered = args.eta.is_none() && args.mu_sd.is_none();
    if args.profile_eta && centered {
        return Err(GsmError::InvalidArgument(
            "--profile-eta needs a non-centered truth (--eta or --mu-sd)".into(),
        ));
    }
    let spec = gsm::ExperimentSpec {
        model: ModelSpec::new(a, b, centered)?,
        graph: parse_graph(&args.graph)?,
        m: args.m,
        n: args.n,
        h: args.h.parse()?,
        multiplier: parse_mult(args.mult.as_deref(), args.n, args.m)?,
        eta0: args.eta,
        mu0_sd: args.mu_sd,
        num_k0: args.num_k0,
        trials_per_k0: args.trials,
        nlambda: args.nlambda,
        profile_eta: args.profile_eta,
        solver: SolverConfig { lambda_ratio: parse_ratio(&args.lambda_ratio)?, ..Default::default() },
        seed: args.seed,
        standardize: true,
        gibbs: GibbsConfig { burn_in: args.burn_in, thin: args.thin, ..Default::default() },
    };
    let result = gsm::run_roc_experiment(&spec)?;

    let roc_path = PathBuf::from(format!("{}roc.csv", args.out_prefix));
    let curve = DMatrix::from_fn(result.averaged.points.len(), 2, |i, j| {
        if j == 0 {
            result.averaged.points[i].0
        } else {
            result.averaged.points[i].1
        }
    });
    io::write_csv_matrix(&roc_path, &curve, Some(&["fpr".to_string(), "tpr".to_string()]))?;

    let auc_path = PathBuf::from(format!("{}auc.json", args.out_prefix));
    io::write_json(
        &auc_path,
        &json!({
            "schema": "gsm/1",
            "mean": result.mean_auc,
            "sd": result.sd_auc,
            "trials": result.aucs.len(),
            "aucs": result.aucs,
            "all_converged": result.all_converged,
            "failures": result.failures,
            "config": {
                "model": args.model, "graph": args.graph, "m": args.m, "n": args.n,
                "h": args.h, "mult": args.mult, "trials": args.trials,
                "num_k0": args.num_k0, "nlambda": args.nlambda,
                "eta": args.eta, "mu_sd": args.mu_sd,
                "profile_eta": args.profile_eta, "lambda_ratio": args.lambda_ratio,
            },
        }),
    )?;
    write_manifest(
        &PathBuf::from(format!("{}manifest.json", args.out_prefix)),
        "roc",
        json!({
            "model": args.model, "graph": args.graph, "m": args.m, "n": args.n,
            "h": args.h, "mult": args.mult, "trials": args.trials,
            "num_k0": args.num_k0, "nlambda": args.nlambda, "eta": args.eta,
            "mu_sd": args.mu_sd, "profile_eta": args.profile_eta,
            "lambda_ratio": args.lambda_ratio, "burn_in": args.burn_in,
            "thin": args.thin, "out_prefix": args.out_prefix,
        }),
        json!(args.seed),
        vec![],
        vec![roc_path.display().to_string(), auc_path.display().to_string()],
        if result.failures > 0 {
            vec![format!("{} replicate(s) failed", result.failures)]
        } else {
            vec![]
        },
        started,
    )
}

fn cmd_univariate(args: &UnivariateArgs, started: Instant) -> Result<(), GsmError> {
    let target = match args.target.as_str() {
        "mu" => UnivariateTarget::Mu,
        "sigma2" => UnivariateTarget::Sigma2,
        other => {
            return Err(GsmError::InvalidArgument(format!(
                "--target must be mu or sigma2, got `{other}`"
            )))
        }
    };
    let parts: Vec<&str> = args.grid.split(':').collect();
    if parts.len() != 3 {
        return Err(GsmError::InvalidArgument("--grid expects start:stop:step".into()));
    }
    let start: f64 =
        parts[0].parse().map_err(|_| GsmError::InvalidArgument("bad grid start".into()))?;
    let stop: f64 =
        parts[1].parse().map_err(|_| GsmError::InvalidArgument("bad grid stop".into()))?;
    let step: f64 =
        parts[2].parse().map_err(|_| GsmError::InvalidArgument("bad grid step".into()))?;
    if !(step > 0.0) || stop < start {
        return Err(GsmError::InvalidArgument("grid needs step > 0 and stop >= start".into()));
    }
    let mut grid = Vec::new();
    let mut v = start;
    while v <= stop + 1e-9 * step {
        grid.push(v);
        v = start + step * (grid.len() as f64);
    }
    let hspecs: Vec<HSpec> =
        args.h.split(',').map(|s| s.parse::<HSpec>()).collect::<Result<_, _>>()?;

    let study = gsm::UnivariateStudy { target, known_value: args.known, grid, hspecs };
    let quad = QuadratureConfig::default();
    let rows = gsm::run_study(&study, &quad)?;

    let mut warnings = Vec::new();
    let mut ok_count = 0usize;
    let mut out = String::from("target,param0,h_spec,asy_var,cr_bound,efficiency,status\n");
    for row in &rows {
        if let Some(w) =
            gsm::univariate::univariate_warning(row.target, study.known_value, &row.hspec)
        {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let status = match (&row.asy_var, &row.cr_bound) {
            (Ok(_), Ok(_)) => {
                ok_count += 1;
                "ok".to_string()
            }
            (Err(e), _) | (_, Err(e)) => format!("error: {e}"),
        };
        let fmt = |r: &Result<f64, String>| match r {
            Ok(v) => format!("{v}"),
            Err(_) => "nan".to_string(),
        };
        let eff = row.efficiency().map(|e| format!("{e}")).unwrap_or_else(|| "nan".to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.target.as_str(),
            row.param0,
            row.hspec,
            fmt(&row.asy_var),
            fmt(&row.cr_bound),
            eff,
            status.replace(',', ";"),
        ));
    }
    if ok_count == 0 {
        return Err(GsmError::Quadrature("every grid point failed".into()));
    }
    std::fs::write(&args.out, out)?;
    write_manifest(
        &manifest_path(&args.out),
        "univariate",
        json!({
            "target": args.target, "known": args.known, "grid": args.grid,
            "h": args.h, "out": args.out.display().to_string(),
        }),
        json!(null),
        vec![],
        vec![args.out.display().to_string()],
        warnings,
        started,
    )
}
