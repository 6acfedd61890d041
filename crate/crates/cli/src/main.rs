//! `dwplab` — verification and ODE runs for doubly-warped product geometry.
//!
//! Exit codes: 0 success / all verdicts pass, 1 verification failure,
//! 2 usage or configuration error, 3 infeasible ODE parameters.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use dwplab_core::dwp::{presets, DoublyWarpedProduct, PolyExp, WarpProfile};
use dwplab_core::einstein;
use dwplab_core::error::GeomError;
use dwplab_core::models;
use dwplab_core::obata::{
    flow_reconstruct, shear_setup, PotentialSetup, ReconstructionConfig,
};
use dwplab_core::ode::{self, IntegratorConfig, OdeParams, RegimeKind};
use dwplab_core::report::{self, SamplingGrid, VerificationReport};

#[derive(Parser)]
#[command(name = "dwplab", version, about = "numerical lab for doubly-warped product metrics")]
struct Cli {
    /// JSON config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the full report (JSON or CSV, command-dependent) to this path
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sampling; DWP_LAB_SEED overrides the default
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for grid scans (default: available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GeometryArgs {
    /// Model id: hopf-s3 | hopf-s5 | heisenberg3 | flat-product
    #[arg(long)]
    model: Option<String>,
    /// Profile preset: sinh-cosh | cosh-sinh | exp | linear | custom-poly-exp
    #[arg(long)]
    profile: Option<String>,
    /// Coefficients a,b,c,d of ρ = a + b·e^{ct} + d·t² (custom profile)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho_coeffs: Option<Vec<f64>>,
    /// Coefficients of σ; omitted means σ = ρ'
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sigma_coeffs: Option<Vec<f64>>,
    /// Coefficients of a t-only warping factor k₁
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k1_coeffs: Option<Vec<f64>>,
    /// Interval of t for custom profiles, as lo,hi
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    interval: Option<Vec<f64>>,
    /// Points sampled per run
    #[arg(long)]
    samples: Option<usize>,
    /// Margin kept inside chart bounds while sampling
    #[arg(long)]
    margin: Option<f64>,
    /// Residual tolerance for verdicts
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Clone)]
struct OdeArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Coefficient D of ρ^{−2n}
    #[arg(long = "D", alias = "d", allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List the model flows
    Models,
    /// Verify the nine closed-form connection identities on a sampled grid
    VerifyConnection(GeometryArgs),
    /// Verify the Kähler defect and the pointwise Kähler conditions
    VerifyKaehler(GeometryArgs),
    /// Numeric Ricci blocks against their closed forms
    RicciReport(GeometryArgs),
    /// CSV scan of (t, eq1, eq2, c(t)) for the Einstein system
    EinsteinScan {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Sign ε of the scalar curvature; C = 2(n+1)ε
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<i8>,
        /// Einstein constant C, overriding --eps
        #[arg(long, allow_hyphen_values = true)]
        big_c: Option<f64>,
        #[arg(long)]
        t_samples: Option<usize>,
    },
    /// Classify ODE parameters into their regime
    OdeClassify(OdeArgs),
    /// Integrate the warping ODE; CSV of t, rho, rho', z-drift
    OdeIntegrate {
        #[command(flatten)]
        ode: OdeArgs,
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Uniformly resample the output to this many rows
        #[arg(long)]
        resample: Option<usize>,
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Classify a (c, D) grid of parameters; JSON regime map
    OdeAtlas {
        #[arg(long)]
        n: Option<u32>,
        /// Restrict to one ε; default scans −1, 0, 1
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<i8>,
        #[arg(long, allow_hyphen_values = true)]
        c_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c_max: Option<f64>,
        #[arg(long)]
        c_steps: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        d_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        d_max: Option<f64>,
        #[arg(long)]
        d_steps: Option<usize>,
        #[arg(long)]
        rho0: Option<f64>,
    },
    /// Hessian eigenstructure residuals for u = ρ²
    ObataCheck(GeometryArgs),
    /// Gradient-flow reconstruction of the product structure
    FlowReconstruct {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Level value u₀ of the seeding hypersurface
        #[arg(long)]
        u0: Option<f64>,
        /// Coordinate shear amount (0 runs in the product chart itself)
        #[arg(long)]
        shear: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        s_min: Option<f64>,
        #[arg(long)]
        s_max: Option<f64>,
        #[arg(long)]
        seeds: Option<usize>,
    },
}

/// Values an on-disk config may provide; flags win over these.
#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    profile: Option<String>,
    rho_coeffs: Option<Vec<f64>>,
    sigma_coeffs: Option<Vec<f64>>,
    k1_coeffs: Option<Vec<f64>>,
    interval: Option<Vec<f64>>,
    samples: Option<usize>,
    margin: Option<f64>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    n: Option<u32>,
    eps: Option<i8>,
    c: Option<f64>,
    d: Option<f64>,
    rho0: Option<f64>,
}

#[derive(Serialize)]
struct EffectiveConfig {
    model: Option<String>,
    profile: Option<String>,
    samples: usize,
    margin: f64,
    tolerance: f64,
    seed: u64,
}

fn exit_code_for(err: &GeomError) -> ExitCode {
    match err {
        GeomError::InfeasibleInitialCondition { .. } | GeomError::StartsAtRoot { .. } => {
            ExitCode::from(3)
        }
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file: FileConfig = match &cli.config {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str(&s).map_err(|e| e.to_string()))
        {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };

    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("DWP_LAB_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .or(file.seed)
        .unwrap_or(report::DEFAULT_SEED);

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not set worker pool: {e}");
        }
    }

    match run(&cli, &file, seed) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn coeffs(v: &[f64]) -> PolyExp {
    PolyExp { a: v[0], b: v[1], c: v[2], d: v[3] }
}

fn resolve_profile(g: &GeometryArgs, file: &FileConfig) -> Result<WarpProfile, GeomError> {
    let name = g
        .profile
        .clone()
        .or_else(|| file.profile.clone())
        .unwrap_or_else(|| "sinh-cosh".into());
    if name != "custom-poly-exp" {
        return presets::by_name(&name);
    }
    let rho = g
        .rho_coeffs
        .clone()
        .or_else(|| file.rho_coeffs.clone())
        .ok_or_else(|| GeomError::InvalidConfig("custom-poly-exp needs --rho-coeffs".into()))?;
    let sigma = g.sigma_coeffs.clone().or_else(|| file.sigma_coeffs.clone());
    let k1 = g.k1_coeffs.clone().or_else(|| file.k1_coeffs.clone());
    let interval = g
        .interval
        .clone()
        .or_else(|| file.interval.clone())
        .unwrap_or_else(|| vec![0.1, 1.5]);
    for (name, v) in [("rho-coeffs", Some(&rho)), ("sigma-coeffs", sigma.as_ref()), ("k1-coeffs", k1.as_ref())] {
        if let Some(v) = v {
            if v.len() != 4 {
                return Err(GeomError::InvalidConfig(format!("--{name} needs exactly 4 values, got {}", v.len())));
            }
        }
    }
    if interval.len() != 2 {
        return Err(GeomError::InvalidConfig("--interval needs exactly 2 values".into()));
    }
    Ok(presets::poly_exp(
        coeffs(&rho),
        sigma.as_deref().map(coeffs),
        k1.as_deref().map(coeffs),
        (interval[0], interval[1]),
    ))
}

struct Geometry {
    dwp: DoublyWarpedProduct,
    grid: SamplingGrid,
    tolerance: f64,
    effective: EffectiveConfig,
}

fn resolve_geometry(g: &GeometryArgs, file: &FileConfig, seed: u64) -> Result<Geometry, GeomError> {
    let model_id = g
        .model
        .clone()
        .or_else(|| file.model.clone())
        .unwrap_or_else(|| "hopf-s3".into());
    let base = models::by_id(&model_id)?;
    let n = (base.dim() + 1) / 2;
    let profile = resolve_profile(g, file)?;
    let samples = g.samples.or(file.samples).unwrap_or(40);
    let margin = g.margin.or(file.margin).unwrap_or(0.06);
    let tolerance = g.tolerance.or(file.tolerance).unwrap_or(report::TOL_IDENTITY);
    let effective = EffectiveConfig {
        model: Some(model_id),
        profile: Some(profile.label.clone()),
        samples,
        margin,
        tolerance,
        seed,
    };
    Ok(Geometry {
        dwp: DoublyWarpedProduct::build(base, profile, n)?,
        grid: SamplingGrid::new(samples, margin, seed),
        tolerance,
        effective,
    })
}

fn write_out(out: &Option<PathBuf>, contents: &str) -> Result<(), GeomError> {
    if let Some(path) = out {
        std::fs::write(path, contents)
            .map_err(|e| GeomError::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli, file: &FileConfig, seed: u64) -> Result<bool, GeomError> {
    match &cli.command {
        Command::Models => {
            #[derive(Serialize)]
            struct ModelRow {
                id: String,
                dim: usize,
                n: usize,
                sasaki: bool,
                transverse_c: f64,
            }
            let mut rows = Vec::new();
            for flow in models::catalog() {
                let grid = SamplingGrid::new(4, 0.1, seed);
                let pts = grid.points(&flow.chart.bounds);
                let sas = flow.is_sasaki(&pts, 1e-8)?;
                let (ric, _) = flow.transverse_ricci(&pts[0])?;
                let c = ric.trace() / (2.0 * ric.nrows() as f64);
                println!(
                    "{:<14} dim {}  n {}  sasaki {}  transverse c = {:+.3}",
                    flow.label,
                    flow.dim(),
                    (flow.dim() + 1) / 2,
                    sas.is_sasaki,
                    c
                );
                rows.push(ModelRow {
                    id: flow.label.clone(),
                    dim: flow.dim(),
                    n: (flow.dim() + 1) / 2,
                    sasaki: sas.is_sasaki,
                    transverse_c: c,
                });
            }
            write_out(&cli.out, &report::to_json(&rows))?;
            Ok(true)
        }

        Command::VerifyConnection(g) => {
            let geo = resolve_geometry(g, file, seed)?;
            let points = geo.grid.points(&geo.dwp.chart.bounds);
            let mut residuals: std::collections::BTreeMap<&'static str, Vec<f64>> =
                Default::default();
            for p in &points {
                for idr in geo.dwp.verify_connection_identities(p)? {
                    residuals.entry(idr.name).or_default().push(idr.residual);
                }
            }
            let reports: Vec<VerificationReport> = residuals
                .into_iter()
                .map(|(name, rs)| {
                    VerificationReport::from_residuals(
                        name,
                        "closed-form Levi-Civita identity of the warped metric",
                        &rs,
                        geo.tolerance,
                    )
                })
                .collect::<Result<_, _>>()?;
            let summary = report::aggregate(reports, seed)?;
            for r in &summary.reports {
                println!(
                    "{:<14} max {:.3e}  mean {:.3e}  [{}]",
                    r.identity,
                    r.residual_max,
                    r.residual_mean,
                    if r.passed { "pass" } else { "FAIL" }
                );
            }
            println!(
                "verify-connection: {} over {} points",
                if summary.all_passed { "PASS" } else { "FAIL" },
                points.len()
            );
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                summary: &'a report::SuiteSummary,
            }
            write_out(&cli.out, &report::to_json(&Out { config: &geo.effective, summary: &summary }))?;
            Ok(summary.all_passed)
        }

        Command::VerifyKaehler(g) => {
            let geo = resolve_geometry(g, file, seed)?;
            let points = geo.grid.points(&geo.dwp.chart.bounds);
            let mut defect: f64 = 0.0;
            for p in &points {
                defect = defect.max(geo.dwp.kaehler_defect(p)?);
            }
            let conditions = geo.dwp.kaehler_conditions(&geo.grid, 6, 12, geo.tolerance)?;
            let defect_pass = defect < geo.tolerance * 10.0;
            println!("kaehler defect max |∇̃J̃| = {defect:.3e} over {} points", points.len());
            println!(
                "conditions: reeb(k) {:.3e}, alignment {:.3e}, grad k {:.3e}, C in [{:.6}, {:.6}]",
                conditions.reeb_derivative_of_k,
                conditions.oneill_alignment,
                conditions.transverse_gradient_of_k,
                conditions.c_min,
                conditions.c_max
            );
            let pass = defect_pass && conditions.passes;
            println!("verify-kaehler: {}", if pass { "PASS" } else { "FAIL" });
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                defect_max: f64,
                conditions: &'a dwplab_core::dwp::KaehlerConditionsReport,
                passed: bool,
            }
            write_out(
                &cli.out,
                &report::to_json(&Out {
                    config: &geo.effective,
                    defect_max: defect,
                    conditions: &conditions,
                    passed: pass,
                }),
            )?;
            Ok(pass)
        }

        Command::RicciReport(g) => {
            let geo = resolve_geometry(g, file, seed)?;
            let points = geo.grid.points(&geo.dwp.chart.bounds);
            let mut blocks = Vec::new();
            let mut pass = true;
            for p in points.iter().take(8) {
                let b = einstein::ricci_blocks(&geo.dwp, p)?;
                pass &= b.vertical_residual < report::TOL_CLOSED_FORM
                    && b.transverse_residual < report::TOL_CLOSED_FORM * (1.0 + b.vertical_closed.abs())
                    && b.mixed_max < geo.tolerance;
                println!(
                    "t = {:+.4}: vertical {:+.6} (closed {:+.6}), mixed {:.2e}, transverse dev {:.2e}",
                    p[0], b.vertical_numeric, b.vertical_closed, b.mixed_max, b.transverse_residual
                );
                for w in &b.warnings {
                    println!("  warning: {w}");
                }
                blocks.push(b);
            }
            println!("ricci-report: {}", if pass { "PASS" } else { "FAIL" });
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                blocks: &'a [einstein::RicciBlocks],
                passed: bool,
            }
            write_out(
                &cli.out,
                &report::to_json(&Out { config: &geo.effective, blocks: &blocks, passed: pass }),
            )?;
            Ok(pass)
        }

        Command::EinsteinScan { geometry, eps, big_c, t_samples } => {
            let geo = resolve_geometry(geometry, file, seed)?;
            let eps = eps.or(file.eps).unwrap_or(-1);
            let big_c = big_c.unwrap_or_else(|| einstein::einstein_constant(geo.dwp.n, eps));
            let count = t_samples.unwrap_or(60);
            let ts = geo
                .grid
                .line(geo.dwp.profile.interval.0, geo.dwp.profile.interval.1, count);
            let base_point = geo.grid.points(&geo.dwp.base.chart.bounds).remove(0);
            let rows = einstein::einstein_scan(&geo.dwp, big_c, &ts, &base_point)?;
            let worst_eq1 = rows.iter().map(|r| r[1].abs()).fold(0.0f64, f64::max);
            let worst_eq2 = rows.iter().map(|r| r[2]).fold(0.0f64, f64::max);
            println!(
                "einstein-scan: C = {big_c}, {} samples, max |eq1| = {worst_eq1:.3e}, max eq2 = {worst_eq2:.3e}",
                rows.len()
            );
            write_out(&cli.out, &report::to_csv(&["t", "eq1", "eq2", "c"], &rows))?;
            Ok(true)
        }

        Command::OdeClassify(o) => {
            let params = resolve_ode(o, file)?;
            let regime = ode::classify(&params)?;
            #[derive(Serialize)]
            struct Out<'a> {
                params: &'a OdeParams,
                regime: &'a ode::OdeRegime,
            }
            let json = report::to_json(&Out { params: &params, regime: &regime });
            print!("{json}");
            write_out(&cli.out, &json)?;
            Ok(true)
        }

        Command::OdeIntegrate { ode: o, t_min, t_max, resample, rtol } => {
            let params = resolve_ode(o, file)?;
            let span = (t_min.unwrap_or(-10.0), t_max.unwrap_or(10.0));
            let mut config = IntegratorConfig::default();
            if let Some(r) = rtol {
                config.rtol = *r;
            }
            let traj = ode::integrate(&params, span, &config)?;
            for e in &traj.events {
                println!("event at t = {:+.9}: {:?}", e.t, e.kind);
            }
            println!(
                "ode-integrate: {} samples, z-drift {:.3e} (relative), {} steps",
                traj.samples.len(),
                traj.z_drift(),
                traj.stats.accepted
            );
            let samples = match resample {
                Some(m) => traj.resample_uniform(*m),
                None => traj.samples.clone(),
            };
            let n = params.n as i32;
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .map(|s| {
                    let drift = if s.rho > 0.0 {
                        let z = s.rho_d * s.rho_d + f64::from(params.eps) * s.rho * s.rho;
                        z - params.c / params.n as f64 - params.d * s.rho.powi(-2 * n)
                    } else {
                        0.0
                    };
                    vec![s.t, s.rho, s.rho_d, drift]
                })
                .collect();
            write_out(&cli.out, &report::to_csv(&["t", "rho", "rho_d", "z_drift"], &rows))?;
            Ok(true)
        }

        Command::OdeAtlas {
            n,
            eps,
            c_min,
            c_max,
            c_steps,
            d_min,
            d_max,
            d_steps,
            rho0,
        } => {
            use rayon::prelude::*;
            let n = n.or(file.n).unwrap_or(2);
            let eps_values: Vec<i8> = match eps {
                Some(e) => vec![*e],
                None => vec![-1, 0, 1],
            };
            let lin = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
                (0..k).map(|i| lo + (hi - lo) * i as f64 / (k.max(2) - 1) as f64).collect()
            };
            let cs = lin(c_min.unwrap_or(-3.0), c_max.unwrap_or(3.0), c_steps.unwrap_or(13));
            let ds = lin(d_min.unwrap_or(-1.0), d_max.unwrap_or(1.0), d_steps.unwrap_or(9));

            #[derive(Serialize)]
            struct Cell {
                params: OdeParams,
                kind: Option<RegimeKind>,
                regime: Option<ode::OdeRegime>,
                error: Option<String>,
            }
            let mut combos = Vec::new();
            for &e in &eps_values {
                for &c in &cs {
                    for &d in &ds {
                        combos.push(OdeParams {
                            n,
                            eps: e,
                            c,
                            d,
                            rho0: rho0.or(file.rho0).unwrap_or(1.0),
                        });
                    }
                }
            }
            let cells: Vec<Cell> = combos
                .into_par_iter()
                .map(|params| match ode::classify(&params) {
                    Ok(regime) => Cell {
                        params,
                        kind: Some(regime.kind),
                        regime: Some(regime),
                        error: None,
                    },
                    Err(e) => Cell {
                        params,
                        kind: None,
                        regime: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            let counts = cells.iter().fold((0usize, 0usize, 0usize, 0usize), |mut acc, c| {
                match c.kind {
                    Some(RegimeKind::NoSolution) => acc.0 += 1,
                    Some(RegimeKind::GlobalOnR) => acc.1 += 1,
                    Some(RegimeKind::MaximalInterval) => acc.2 += 1,
                    None => acc.3 += 1,
                }
                acc
            });
            println!(
                "ode-atlas: {} cells — no-solution {}, global {}, maximal-interval {}, infeasible {}",
                cells.len(),
                counts.0,
                counts.1,
                counts.2,
                counts.3
            );
            write_out(&cli.out, &report::to_json(&cells))?;
            Ok(true)
        }

        Command::ObataCheck(g) => {
            let geo = resolve_geometry(g, file, seed)?;
            let setup = PotentialSetup::squared_warping(&geo.dwp);
            let points = geo.grid.points(&geo.dwp.chart.bounds);
            let mut spectra = Vec::new();
            let mut worst: f64 = 0.0;
            let mut oneill_worst: f64 = 0.0;
            for p in points.iter().take(12) {
                let spec = setup.hessian_spectrum(p)?;
                worst = worst
                    .max(spec.j_invariance_residual)
                    .max(spec.eigenvector_residual)
                    .max(spec.two_eigenvalue_residual);
                let (oneill, _) = setup.level_set_oneill_residual(p)?;
                oneill_worst = oneill_worst.max(oneill);
                spectra.push(spec);
            }
            let pass = worst < geo.tolerance * 10.0 && oneill_worst < report::TOL_CLOSED_FORM;
            println!(
                "obata-check: structure residual {worst:.3e}, level-set O'Neill {oneill_worst:.3e} — {}",
                if pass { "PASS" } else { "FAIL" }
            );
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a EffectiveConfig,
                spectra: &'a [dwplab_core::obata::HessianSpectrum],
                structure_residual_max: f64,
                level_oneill_max: f64,
                passed: bool,
            }
            write_out(
                &cli.out,
                &report::to_json(&Out {
                    config: &geo.effective,
                    spectra: &spectra,
                    structure_residual_max: worst,
                    level_oneill_max: oneill_worst,
                    passed: pass,
                }),
            )?;
            Ok(pass)
        }

        Command::FlowReconstruct { geometry, u0, shear, s_min, s_max, seeds } => {
            let geo = resolve_geometry(geometry, file, seed)?;
            let mut setup = PotentialSetup::squared_warping(&geo.dwp);
            let shear_amount = shear.unwrap_or(0.08);
            if shear_amount != 0.0 {
                setup = shear_setup(&setup, shear_amount);
            }
            let mid = 0.5 * (geo.dwp.profile.interval.0 + geo.dwp.profile.interval.1);
            let default_u0 = geo.dwp.profile.rho_jet(mid).rho.powi(2);
            let cfg = ReconstructionConfig {
                u0: u0.unwrap_or(default_u0),
                s_min: s_min.unwrap_or(-0.25),
                s_max: s_max.unwrap_or(0.5),
                seeds: seeds.unwrap_or(6),
                seed_rng: seed,
                ..Default::default()
            };
            let rep = flow_reconstruct(&setup, &cfg)?;
            println!(
                "flow-reconstruct: {} seeds, spread {:.3e}, f' {:.3e}, ξ-scaling {:.3e}, metric {:.3e}",
                rep.seed_count,
                rep.spread_max,
                rep.f_prime_residual_max,
                rep.xi_scaling_max,
                rep.metric_residual_max
            );
            let pass = rep.spread_max < 1e-8
                && rep.f_prime_residual_max < 1e-7
                && rep.xi_scaling_max < report::TOL_CLOSED_FORM
                && rep.metric_residual_max < report::TOL_RECONSTRUCTION;
            // CSV rows: f'' by central differences of f' on the save grid
            let mut rows = Vec::new();
            for (i, r) in rep.rows.iter().enumerate() {
                let fpp = if i == 0 || i + 1 == rep.rows.len() {
                    r.lambda
                } else {
                    let h = rep.rows[i + 1].s - rep.rows[i - 1].s;
                    (rep.rows[i + 1].f_prime - rep.rows[i - 1].f_prime) / h
                };
                rows.push(vec![r.s, r.f, r.f_prime, fpp, r.lambda, r.mu, r.spread]);
            }
            println!("flow-reconstruct: {}", if pass { "PASS" } else { "FAIL" });
            write_out(
                &cli.out,
                &report::to_csv(&["t", "f", "f_prime", "f_second", "lambda", "mu", "spread"], &rows),
            )?;
            Ok(pass)
        }
    }
}

fn resolve_ode(o: &OdeArgs, file: &FileConfig) -> Result<OdeParams, GeomError> {
    Ok(OdeParams {
        n: o.n.or(file.n).unwrap_or(2),
        eps: o.eps.or(file.eps).unwrap_or(-1),
        c: o.c.or(file.c).unwrap_or(0.0),
        d: o.d.or(file.d).unwrap_or(0.0),
        rho0: o.rho0.or(file.rho0).unwrap_or(1.0),
    })
}
