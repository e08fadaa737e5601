//! The `evp-lab` command line: one subcommand per experiment family, every
//! run emitting its outputs plus a manifest that reproduces them.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use evp_core::arithmetic::diophantine_profile;
use evp_core::cohomology::solve_rotation;
use evp_core::environment::{invariant_density, Environment, Symmetry};
use evp_core::geomsum::{
    char_modulus, convolve_segment, delta_table, llt_error, stopping_tail, Segment,
    TailMode,
};
use evp_core::liouville::{
    build_observable, lemma_certificate, slow_mixing_witness, BuildOptions, NuSource,
    SupportSet, SupportSign,
};
use evp_core::math;
use evp_core::periodic::PeriodicFunction;
use evp_core::poisson::{center, clt_variance, solve_poisson_iterated};
use evp_core::walk::{
    cesaro_nu, clt_report_from_samples, clt_trial, mixing_curve, nu_from_density,
    StationarySampler, DP_STEP_CAP,
};

use crate::alpha_spec::parse_alpha;
use crate::formats::{
    parse_range_list, read_function, write_function, CsvTable, EnvConfig,
};
use crate::manifest::ExperimentManifest;

#[derive(Parser)]
#[command(
    name = "evp-lab",
    version,
    about = "Random walks in quasi-periodic circle environments: solvers, \
             densities, mixing curves, and limit-theorem experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base RNG seed for Monte Carlo subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (flag > EVP_LAB_THREADS > available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Working precision in bits (flag > EVP_LAB_PRECISION_BITS > 512).
    #[arg(long, global = true)]
    precision_bits: Option<u32>,

    /// Directory for output files and manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Print the primary result as JSON to stdout (default for most
    /// subcommands).
    #[arg(long, global = true)]
    json: bool,

    /// Emit CSV where the subcommand supports it; the optional value names
    /// the file (default `<out-dir>/<command>.csv`).
    #[arg(long, global = true, num_args = 0..=1, value_name = "PATH")]
    csv: Option<Option<PathBuf>>,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction expansion and Diophantine profile of a rotation
    /// number.
    Alpha(AlphaArgs),
    /// Solve the cohomological equation phi(x+a) - phi(x) = psi(x).
    Cohomology(CohomologyArgs),
    /// Invariant density of an environment.
    Density(DensityArgs),
    /// Poisson certificates T phi - phi = psi (iterated to --depth).
    Poisson(PoissonArgs),
    /// Exact mixing curve n -> E_x psi(X_n) - nu(psi).
    Mix(MixArgs),
    /// Central-limit experiment under a stationary start.
    Clt(CltArgs),
    /// Geometric-sum distribution experiments.
    #[command(subcommand)]
    Geomsum(GeomsumCommand),
    /// The slow-mixing observable construction with its certificates.
    Liouville(LiouvilleArgs),
}

#[derive(Args)]
struct AlphaArgs {
    /// golden | sqrt2-1 | liouville:N | schedule:g1,g2,... | p/q | 0.ddd
    #[arg(long)]
    value: String,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// Also write the JSON document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CohomologyArgs {
    #[arg(long)]
    alpha: String,
    /// Right side psi as a periodic-function JSON file.
    #[arg(long)]
    psi: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 40)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Environment config file (keys: alpha, p_coefficients, tolerance).
    #[arg(long, conflicts_with_all = ["alpha", "p"])]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<String>,
    /// Jump probability p as a periodic-function JSON file.
    #[arg(long)]
    p: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Output file for the density rho.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoissonArgs {
    /// Environment config file.
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    /// Number of iterated certificates.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MixArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    psi: PathBuf,
    /// Starting point on the circle.
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Checkpoints, e.g. 256,512,...,8192 or 256..8192.
    #[arg(long)]
    ns: String,
}

#[derive(Args)]
struct CltArgs {
    #[arg(long)]
    env: PathBuf,
    /// Observable (defaults to cos(2 pi x), centered automatically).
    #[arg(long)]
    psi: Option<PathBuf>,
    #[arg(long, visible_alias = "N", default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GeomsumCommand {
    /// Finite-difference decay tables over a dyadic ladder.
    Delta(DeltaArgs),
    /// Local-limit error along a segment-length ladder.
    Llt(LltArgs),
    /// Stopped-sum moderate-deviation tail over a ladder, with the
    /// log-quadratic fit.
    Tail(TailArgs),
}

#[derive(Args)]
struct DeltaArgs {
    /// Stay probability of the iid sites.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Site-count ladder, e.g. 64..4096.
    #[arg(long)]
    n: String,
    /// Difference orders, e.g. 0,1,2.
    #[arg(long, default_value = "0,1,2")]
    m: String,
}

#[derive(Args)]
struct LltArgs {
    /// Segment lengths, e.g. 8,16,...,512.
    #[arg(long)]
    lengths: String,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
}

#[derive(Args)]
struct TailArgs {
    /// Ladder of n values, e.g. 64..4096.
    #[arg(long)]
    n: String,
    /// Success probability of the geometric summands.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// exact | mc
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
}

#[derive(Args)]
struct LiouvilleArgs {
    #[arg(long, default_value_t = 2)]
    stages: usize,
    #[arg(long, default_value_t = 1 << 15)]
    dp_cap: u64,
    /// Sample points per support-set arc.
    #[arg(long, default_value_t = 256)]
    points_per_arc: usize,
    /// Optional environment config (defaults to p = 1/2 + 0.2 cos(2 pi x)
    /// over the scheduled alpha).
    #[arg(long)]
    env: Option<PathBuf>,
    /// Witness points evaluated per stage.
    #[arg(long, default_value_t = 4)]
    witness_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse argv, run, and map errors onto exit codes (1 = tolerance or
/// construction failure, 2 = usage/schema errors).
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            let diag = json!({ "error": err.to_string(), "chain": format!("{err:#}") });
            eprintln!("{diag}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let threads = cli
        .threads
        .or_else(|| std::env::var("EVP_LAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
    }
    let precision = cli.precision_bits.or_else(|| {
        std::env::var("EVP_LAB_PRECISION_BITS").ok().and_then(|v| v.parse().ok())
    });
    let ctx = RunContext {
        seed: cli.seed,
        precision_bits: precision.unwrap_or(evp_core::arithmetic::DEFAULT_PRECISION_BITS),
        out_dir: cli.out_dir.clone(),
        emit_json: cli.json || cli.csv.is_none(),
        csv: cli.csv.clone(),
    };
    std::fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("creating {}", ctx.out_dir.display()))?;
    match cli.command {
        Command::Alpha(a) => cmd_alpha(&ctx, a),
        Command::Cohomology(a) => cmd_cohomology(&ctx, a),
        Command::Density(a) => cmd_density(&ctx, a),
        Command::Poisson(a) => cmd_poisson(&ctx, a),
        Command::Mix(a) => cmd_mix(&ctx, a),
        Command::Clt(a) => cmd_clt(&ctx, a),
        Command::Geomsum(g) => match g {
            GeomsumCommand::Delta(a) => cmd_delta(&ctx, a),
            GeomsumCommand::Llt(a) => cmd_llt(&ctx, a),
            GeomsumCommand::Tail(a) => cmd_tail(&ctx, a),
        },
        Command::Liouville(a) => cmd_liouville(&ctx, a),
    }
}

pub struct RunContext {
    pub seed: u64,
    pub precision_bits: u32,
    pub out_dir: PathBuf,
    pub emit_json: bool,
    /// --csv flag: requested (outer) with an optional explicit path.
    pub csv: Option<Option<PathBuf>>,
}

impl RunContext {
    fn csv_path(&self, command: &str) -> Option<PathBuf> {
        match &self.csv {
            None => None,
            Some(Some(path)) => Some(path.clone()),
            Some(None) => Some(self.out_dir.join(format!("{command}.csv"))),
        }
    }
}

impl RunContext {
    fn finish(
        &self,
        mut manifest: ExperimentManifest,
        result: &serde_json::Value,
        out: Option<&Path>,
    ) -> Result<()> {
        let mut doc = result.clone();
        if let Some(map) = doc.as_object_mut() {
            map.insert(
                "manifest_digest".into(),
                serde_json::Value::String(manifest.short_digest().to_string()),
            );
        }
        if let Some(path) = out {
            std::fs::write(path, serde_json::to_string_pretty(&doc)?)
                .with_context(|| format!("writing {}", path.display()))?;
            manifest.record_output(path)?;
        }
        manifest.write(&self.out_dir)?;
        if self.emit_json {
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Ok(())
    }
}

fn cmd_alpha(ctx: &RunContext, args: AlphaArgs) -> Result<i32> {
    let parsed = parse_alpha(&args.value, args.depth, ctx.precision_bits)?;
    let rot = &parsed.rotation;
    let profile = diophantine_profile(rot).ok();
    let result = json!({
        "value": rot.to_f64(),
        "depth_requested": args.depth,
        "depth_achieved": rot.depth(),
        "exhausted": rot.exhausted(),
        "partial_quotients": rot
            .partial_quotients()
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>(),
        "convergents": rot
            .convergents()
            .iter()
            .map(|c| vec![c.p.to_string(), c.q.to_string()])
            .collect::<Vec<_>>(),
        "tau_est": profile.as_ref().map(|p| p.tau_est),
        "c_est": profile.as_ref().map(|p| p.c_est),
        "m0": profile.as_ref().map(|p| p.m0),
        "witness_depth": profile.as_ref().map(|p| p.witness_depth),
        "liouville_like": profile.as_ref().map(|p| p.liouville_like),
        "schedule": parsed.schedule.as_ref().map(|s| {
            s.stages
                .iter()
                .map(|st| {
                    json!({
                        "index": st.index,
                        "p": st.p.to_string(),
                        "q": st.q.to_string(),
                        "gamma": st.gamma,
                        "verified": st.verified,
                        "ln_error": st.ln_error,
                    })
                })
                .collect::<Vec<_>>()
        }),
    });
    let config = json!({
        "value": args.value,
        "depth": args.depth,
        "precision_bits": ctx.precision_bits
    });
    let manifest = ExperimentManifest::new("alpha", config, ctx.seed);
    ctx.finish(manifest, &result, args.out.as_deref())?;
    Ok(0)
}

fn cmd_cohomology(ctx: &RunContext, args: CohomologyArgs) -> Result<i32> {
    let parsed = parse_alpha(&args.alpha, args.depth, ctx.precision_bits)?;
    let psi = read_function(&args.psi)?;
    let report = solve_rotation(&psi, &parsed.rotation, 1e-12)?;
    let passed = report.residual_sup < args.tol;
    let result = json!({
        "residual_sup": report.residual_sup,
        "smallest_denominator": report.smallest_denominator,
        "denominator_index": report.denominator_index,
        "norm_ratio": report.norm_ratio,
        "tolerance": args.tol,
        "passed": passed,
        "solution": crate::formats::PeriodicFunctionJson::from_function(&report.solution),
    });
    let config = json!({
        "alpha": args.alpha,
        "psi": args.psi.display().to_string(),
        "tol": args.tol,
        "depth": args.depth,
    });
    let mut manifest = ExperimentManifest::new("cohomology", config, ctx.seed);
    manifest.record_input(&args.psi)?;
    ctx.finish(manifest, &result, args.out.as_deref())?;
    Ok(if passed { 0 } else { 1 })
}

fn load_env(
    ctx: &RunContext,
    config: Option<&Path>,
    alpha: Option<&str>,
    p: Option<&Path>,
    tol: f64,
) -> Result<(Environment, f64, serde_json::Value)> {
    if let Some(path) = config {
        let cfg = EnvConfig::read(path)?;
        let snapshot = serde_json::to_value(&cfg)?;
        let (env, tol) = cfg.build(ctx.precision_bits)?;
        Ok((env, tol, snapshot))
    } else {
        let alpha = alpha.ok_or_else(|| anyhow!("either --config or --alpha/--p required"))?;
        let p_path = p.ok_or_else(|| anyhow!("--p required alongside --alpha"))?;
        let parsed = parse_alpha(alpha, 40, ctx.precision_bits)?;
        let p_fn = read_function(p_path)?;
        let env = Environment::classify(parsed.rotation, p_fn)?;
        let snapshot = json!({
            "alpha": alpha,
            "p": p_path.display().to_string(),
            "tolerance": tol,
        });
        Ok((env, tol, snapshot))
    }
}

fn cmd_density(ctx: &RunContext, args: DensityArgs) -> Result<i32> {
    let (env, tol, snapshot) = load_env(
        ctx,
        args.config.as_deref(),
        args.alpha.as_deref(),
        args.p.as_deref(),
        args.tol,
    )?;
    let density = invariant_density(&env, tol)?;
    let result = json!({
        "lambda": env.lambda(),
        "symmetry": match env.symmetry() {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Asymmetric => "asymmetric",
        },
        "epsilon_margin": env.epsilon_margin(),
        "construction": format!("{:?}", density.construction),
        "mirrored": density.mirrored,
        "stationarity_residual": density.stationarity_residual,
        "tolerance": tol,
        "rho_mean": density.rho.mean(),
    });
    let mut manifest = ExperimentManifest::new("density", snapshot, ctx.seed);
    if let Some(cfg) = &args.config {
        manifest.record_input(cfg)?;
    }
    if let Some(p) = &args.p {
        manifest.record_input(p)?;
    }
    if let Some(out) = &args.out {
        write_function(out, &density.rho)?;
        manifest.record_output(out)?;
    }
    ctx.finish(manifest, &result, None)?;
    Ok(0)
}

fn cmd_poisson(ctx: &RunContext, args: PoissonArgs) -> Result<i32> {
    let (env, tol, snapshot) =
        load_env(ctx, Some(&args.env), None, None, args.tol)?;
    let tol = tol.min(args.tol);
    let density = invariant_density(&env, tol)?;
    let psi_raw = read_function(&args.psi)?;
    let psi = center(&density.rho, &psi_raw);
    let certs = solve_poisson_iterated(&env, &density, &psi, args.depth.max(1), tol)?;
    let sigma2 = clt_variance(&env, &density, &certs[0].phi);
    let result = json!({
        "tolerance": tol,
        "centered_mean_removed": psi_raw.mean() - psi.mean(),
        "sigma2": sigma2,
        "levels": certs
            .iter()
            .map(|c| {
                json!({
                    "branch": format!("{:?}", c.branch),
                    "mirrored": c.mirrored,
                    "residual_sup": c.residual_sup,
                    "norm_ratio": c.norm_ratio,
                    "phi": crate::formats::PeriodicFunctionJson::from_function(&c.phi),
                })
            })
            .collect::<Vec<_>>(),
    });
    let config = json!({
        "env": args.env.display().to_string(),
        "psi": args.psi.display().to_string(),
        "depth": args.depth,
        "tol": args.tol,
        "snapshot": snapshot,
    });
    let mut manifest = ExperimentManifest::new("poisson", config, ctx.seed);
    manifest.record_input(&args.env)?;
    manifest.record_input(&args.psi)?;
    ctx.finish(manifest, &result, args.out.as_deref())?;
    Ok(0)
}

fn cmd_mix(ctx: &RunContext, args: MixArgs) -> Result<i32> {
    let (env, tol, snapshot) = load_env(ctx, Some(&args.env), None, None, 1e-9)?;
    let psi = read_function(&args.psi)?;
    let ns = parse_range_list(&args.ns)?;
    // nu from the density when it certifies, Cesaro fallback otherwise
    let (nu, nu_source) = match invariant_density(&env, tol) {
        Ok(d) => (nu_from_density(&d, &psi), "density"),
        Err(_) => {
            let n = (*ns.iter().max().unwrap()).min(1 << 13);
            let starts: Vec<f64> = (0..8).map(|i| i as f64 / 8.0 + 0.0625).collect();
            (cesaro_nu(&env, &psi, n, &starts, DP_STEP_CAP)?, "cesaro")
        }
    };
    let curve = mixing_curve(&env, args.x, &psi, &nu, &ns, DP_STEP_CAP)?;
    let slope = curve.fit.map(|f| f.slope);
    let r2 = curve.fit.map(|f| f.r2);

    let config = json!({
        "env": args.env.display().to_string(),
        "psi": args.psi.display().to_string(),
        "x": args.x,
        "ns": args.ns,
        "nu_source": nu_source,
        "snapshot": snapshot,
    });
    let mut manifest = ExperimentManifest::new("mix", config, ctx.seed);
    manifest.record_input(&args.env)?;
    manifest.record_input(&args.psi)?;

    let mut table = CsvTable::new(vec!["n", "expectation", "nu_psi", "gap", "fitted_slope"]);
    for row in &curve.rows {
        table.push(vec![
            row.n.to_string(),
            format!("{:.17e}", row.expectation),
            format!("{:.17e}", row.nu),
            format!("{:.17e}", row.gap),
            slope.map(|s| format!("{s:.8}")).unwrap_or_default(),
        ]);
    }
    if let Some(csv_path) = ctx.csv_path("mix") {
        table.write(&csv_path, "mix", manifest.short_digest())?;
        manifest.record_output(&csv_path)?;
    }
    let result = json!({
        "rows": curve.rows.iter().map(|r| json!({
            "n": r.n, "expectation": r.expectation, "nu": r.nu, "gap": r.gap
        })).collect::<Vec<_>>(),
        "fitted_slope": slope,
        "fit_r2": r2,
        "nu_source": nu_source,
        "nu_bar": nu.bar,
    });
    ctx.finish(manifest, &result, None)?;
    Ok(0)
}

fn cmd_clt(ctx: &RunContext, args: CltArgs) -> Result<i32> {
    use rayon::prelude::*;
    let (env, tol, snapshot) = load_env(ctx, Some(&args.env), None, None, 1e-9)?;
    let density = invariant_density(&env, tol)?;
    let psi_raw = match &args.psi {
        Some(path) => read_function(path)?,
        None => PeriodicFunction::cosine(1),
    };
    let psi = center(&density.rho, &psi_raw);
    let cert = evp_core::poisson::solve_poisson(&env, &density, &psi, tol)?;
    let sigma2 = clt_variance(&env, &density, &cert.phi);
    let sampler = StationarySampler::new(&density.rho);
    let mut samples: Vec<f64> = (0..args.trials as u64)
        .into_par_iter()
        .map(|t| clt_trial(&env, &sampler, &psi, args.n, ctx.seed, t))
        .collect();
    let report = clt_report_from_samples(&mut samples, sigma2, ctx.seed);

    let config = json!({
        "env": args.env.display().to_string(),
        "psi": args.psi.as_ref().map(|p| p.display().to_string()),
        "N": args.n,
        "trials": args.trials,
        "seed": ctx.seed,
        "snapshot": snapshot,
    });
    let mut manifest = ExperimentManifest::new("clt", config, ctx.seed);
    manifest.record_input(&args.env)?;
    manifest.record_streams(0..args.trials as u64);
    let result = json!({
        "sigma2": sigma2,
        "empirical_variance": report.empirical_variance,
        "variance_ratio": report.empirical_variance / sigma2,
        "empirical_mean": report.empirical_mean,
        "ks_statistic": report.ks_statistic,
        "trials": report.trials,
        "seed": report.seed,
        "poisson_residual": cert.residual_sup,
    });
    ctx.finish(manifest, &result, args.out.as_deref())?;
    Ok(0)
}

fn cmd_delta(ctx: &RunContext, args: DeltaArgs) -> Result<i32> {
    let ns = parse_range_list(&args.n)?;
    let orders: Vec<usize> = args
        .m
        .split(',')
        .map(|t| t.trim().parse().context("order"))
        .collect::<Result<_>>()?;
    let config = json!({ "s": args.s, "n": args.n, "m": args.m });
    let mut manifest = ExperimentManifest::new("geomsum-delta", config, ctx.seed);
    let mut table = CsvTable::new(vec!["n", "m", "sup", "scaled_sup"]);
    let mut rows = Vec::new();
    for &n in &ns {
        let seg = Segment::iid(args.s, n, 0.0)?;
        let pmf = convolve_segment(&seg)?;
        for &m in &orders {
            let dt = delta_table(&pmf, m)?;
            table.push(vec![
                n.to_string(),
                m.to_string(),
                format!("{:.17e}", dt.sup),
                format!("{:.17e}", dt.scaled_sup),
            ]);
            rows.push(json!({ "n": n, "m": m, "sup": dt.sup, "scaled_sup": dt.scaled_sup }));
        }
    }
    if let Some(path) = ctx.csv_path("geomsum-delta") {
        table.write(&path, "geomsum-delta", manifest.short_digest())?;
        manifest.record_output(&path)?;
    }
    ctx.finish(manifest, &json!({ "rows": rows }), None)?;
    Ok(0)
}

fn cmd_llt(ctx: &RunContext, args: LltArgs) -> Result<i32> {
    let lengths = parse_range_list(&args.lengths)?;
    let config = json!({ "lengths": args.lengths, "s": args.s });
    let mut manifest = ExperimentManifest::new("geomsum-llt", config, ctx.seed);
    let mut table = CsvTable::new(vec!["length", "sigma", "sup_error", "scaled_error"]);
    let mut rows = Vec::new();
    for &len in &lengths {
        let seg = Segment::iid(args.s, len, 0.0)?;
        let rep = llt_error(&seg)?;
        table.push(vec![
            len.to_string(),
            format!("{:.17e}", rep.sigma),
            format!("{:.17e}", rep.sup_error),
            format!("{:.17e}", rep.scaled_error),
        ]);
        rows.push(json!({
            "length": len, "sigma": rep.sigma,
            "sup_error": rep.sup_error, "scaled_error": rep.scaled_error
        }));
    }
    if let Some(path) = ctx.csv_path("geomsum-llt") {
        table.write(&path, "geomsum-llt", manifest.short_digest())?;
        manifest.record_output(&path)?;
    }
    ctx.finish(manifest, &json!({ "rows": rows }), None)?;
    Ok(0)
}

fn cmd_tail(ctx: &RunContext, args: TailArgs) -> Result<i32> {
    let ns = parse_range_list(&args.n)?;
    let mode = match args.mode.as_str() {
        "exact" => TailMode::Exact,
        "mc" => TailMode::MonteCarlo { trials: args.trials },
        other => return Err(anyhow!("mode must be exact or mc, got {other:?}")),
    };
    let config = json!({ "n": args.n, "p": args.p, "mode": args.mode, "trials": args.trials });
    let mut manifest = ExperimentManifest::new("geomsum-tail", config, ctx.seed);
    let mut table = CsvTable::new(vec!["n", "tau", "threshold", "probability"]);
    let mut rows = Vec::new();
    let mut fit_x = Vec::new();
    let mut fit_y = Vec::new();
    for &n in &ns {
        let ps = vec![args.p; n];
        let est = stopping_tail(&ps, n, mode, ctx.seed)?;
        table.push(vec![
            n.to_string(),
            est.tau.to_string(),
            format!("{:.17e}", est.threshold),
            format!("{:.17e}", est.probability),
        ]);
        rows.push(json!({
            "n": n, "tau": est.tau, "threshold": est.threshold,
            "probability": est.probability, "ci_half_width": est.ci_half_width
        }));
        if est.probability > 0.0 {
            let ln_n = math::ln(n as f64);
            fit_x.push(ln_n * ln_n);
            fit_y.push(math::ln(est.probability));
        }
    }
    let fit = math::linear_fit(&fit_x, &fit_y);
    let c_fit = fit.map(|f| -f.slope);
    let r2 = fit.map(|f| f.r2);
    if let Some(path) = ctx.csv_path("geomsum-tail") {
        table.write(&path, "geomsum-tail", manifest.short_digest())?;
        manifest.record_output(&path)?;
    }
    // the characteristic-function diagnostic for the same parameters
    let diag = char_modulus(&vec![args.p; 64], &[0.1, 0.5, 1.0, 2.0])?;
    let result = json!({
        "rows": rows,
        "c_fit": c_fit,
        "fit_r2": r2,
        "kappa_hat": diag.kappa_hat,
        "theta_plateau": diag.theta_plateau,
    });
    ctx.finish(manifest, &result, None)?;
    Ok(if c_fit.map(|c| c > 0.0).unwrap_or(false) { 0 } else { 1 })
}

fn cmd_liouville(ctx: &RunContext, args: LiouvilleArgs) -> Result<i32> {
    let gammas: Vec<f64> = (0..args.stages).map(|i| (i + 2) as f64).collect();
    let opts = evp_core::arithmetic::LiouvilleOptions {
        enforce_growth: true,
        precision_bits: Some(ctx.precision_bits),
        ..Default::default()
    };
    let schedule = evp_core::arithmetic::liouville_alpha(&gammas, 2, &opts)?;
    let env = match &args.env {
        Some(path) => load_env(ctx, Some(path), None, None, 1e-9)?.0,
        None => {
            let p = PeriodicFunction::from_cos_sin(0.5, &[(0.2, 0.0)]);
            Environment::classify(schedule.rotation.clone(), p)?
        }
    };
    let density = invariant_density(&env, 1e-9)?;
    let nu = NuSource::Density(&density);
    let build_opts = BuildOptions {
        stages: args.stages,
        dp_cap: args.dp_cap,
        points_per_arc: args.points_per_arc,
        witness_cap: 256,
    };
    let obs = build_observable(&env, &schedule, &nu, &build_opts)?;
    let witness =
        slow_mixing_witness(&env, &obs, args.witness_points, args.dp_cap, 20_000, ctx.seed)?;

    // lemma certificates at a few exact points per stage
    let mut lemma_rows = Vec::new();
    let mut all_support = true;
    for (st_sched, st_obs) in schedule.stages.iter().zip(&obs.stages) {
        let set = SupportSet {
            q: st_obs.q,
            sign: st_obs.side,
        };
        let pts = set.sample_points(2)?;
        let step = (pts.len() / 4).max(1);
        for x in pts.iter().step_by(step) {
            let cert = lemma_certificate(&env, st_sched, x, args.dp_cap)?;
            all_support &= cert.support_check;
            lemma_rows.push(json!({
                "stage": st_sched.index,
                "x": x.to_f64(),
                "qtilde": cert.qtilde,
                "support_check": cert.support_check,
                "exhaustive": cert.exhaustive,
                "expectation": cert.expectation,
                "bound_holds": cert.bound_holds,
            }));
        }
    }

    let all_certified = obs.stages.iter().all(|s| s.certified);
    let all_witness = witness.iter().all(|w| !w.exact || w.satisfied);
    let result = json!({
        "schedule": schedule.stages.iter().map(|st| json!({
            "index": st.index, "p": st.p.to_string(), "q": st.q.to_string(),
            "gamma": st.gamma, "verified": st.verified, "ln_error": st.ln_error,
        })).collect::<Vec<_>>(),
        "stages": obs.stages.iter().map(|s| json!({
            "index": s.index, "q": s.q, "qtilde": s.qtilde,
            "amplitude": s.amplitude, "included": s.included,
            "side": match s.side { SupportSign::Plus => "+", SupportSign::Minus => "-" },
            "h_measure": s.h_measure, "g_measure": s.g_measure,
            "certificate_margin": s.certificate_margin,
            "certified": s.certified,
            "decided_within_bar": s.decided_within_bar,
            "growth_ok": s.growth_ok,
        })).collect::<Vec<_>>(),
        "nu_phi": obs.nu_phi.value,
        "nu_phi_bar": obs.nu_phi.bar,
        "lemma_certificates": lemma_rows,
        "witness": witness.iter().map(|w| json!({
            "stage": w.stage, "x": w.x, "qtilde": w.qtilde,
            "expectation": w.expectation, "nu": w.nu, "gap": w.gap,
            "lower_bound": w.lower_bound, "exact": w.exact, "satisfied": w.satisfied,
        })).collect::<Vec<_>>(),
        "all_certified": all_certified,
        "all_witness_satisfied": all_witness,
        "all_support_checks": all_support,
    });
    let config = json!({
        "stages": args.stages,
        "dp_cap": args.dp_cap,
        "points_per_arc": args.points_per_arc,
        "seed": ctx.seed,
        "env": args.env.as_ref().map(|p| p.display().to_string()),
    });
    let mut manifest = ExperimentManifest::new("liouville", config, ctx.seed);
    if let Some(path) = &args.env {
        manifest.record_input(path)?;
    }
    ctx.finish(manifest, &result, args.out.as_deref())?;
    Ok(if all_certified && all_witness && all_support { 0 } else { 1 })
}
