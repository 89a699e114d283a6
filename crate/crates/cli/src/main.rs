//! Command line driver for the domain decomposition studies: a demo solve
//! with solution export, the H1 convergence study, the Robin-parameter
//! sensitivity study, and the standalone polynomial verifier.

use clap::{Args, Parser, Subcommand};
use schwarz_mortar::study::{
    default_alpha_list, preset, resolve_alpha, run_alpha_study, run_convergence_study, run_demo,
    run_verify_appendix, AlphaRule, SolverKind, StudyConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "schwarz-mortar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Config file (see README for the grammar); overrides --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in decomposition: two | four | conforming | single.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for CSV files, exports, and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stopping tolerance on the interface jump residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap (reported, never fatal).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Solver: schwarz | gmres.
    #[arg(long)]
    solver: Option<SolverKind>,
    /// Robin parameter rule: min | mean | max | opt | a number.
    #[arg(long)]
    alpha: Option<String>,
    /// Uniform refinements of the base decomposition.
    #[arg(long)]
    refinements: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and export meshes, nodal solutions, and the history.
    Demo(CommonOpts),
    /// Error-under-refinement study (levels 0..=refinements).
    Convergence(CommonOpts),
    /// Iteration counts and error histories across Robin parameters.
    AlphaStudy {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated alpha values; default scales the mean-rule value.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Numerically verify the end-interval polynomial inequality per degree.
    VerifyAppendix {
        /// Output directory for appendix.csv and witnesses.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest polynomial degree to scan (2..=20).
        #[arg(long, default_value_t = 16)]
        pmax: usize,
        /// Random samples per degree for the reported constants.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// RNG seed (recorded in the manifest).
        #[arg(long, default_value_t = 20240914)]
        seed: u64,
    },
}

fn load_config(opts: &CommonOpts, default_preset: &str) -> Result<StudyConfig, String> {
    let mut cfg = if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        StudyConfig::parse(&text).map_err(|e| e.to_string())?
    } else {
        let name = opts.preset.as_deref().unwrap_or(default_preset);
        preset(name).ok_or_else(|| {
            format!("unknown preset {name:?} (two | four | conforming | single)")
        })?
    };
    if let Some(tol) = opts.tol {
        cfg.tol = tol;
    }
    if let Some(max_iter) = opts.max_iter {
        cfg.max_iter = max_iter;
    }
    if let Some(solver) = opts.solver {
        cfg.solver = solver;
    }
    if let Some(alpha) = &opts.alpha {
        cfg.alpha_rule = alpha.parse::<AlphaRule>()?;
    }
    if let Some(r) = opts.refinements {
        cfg.refinements = r;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Demo(opts) => {
            let cfg = load_config(&opts, "four")?;
            let demo = run_demo(&cfg, opts.out.as_deref()).map_err(|e| e.to_string())?;
            println!(
                "solver {} with alpha = {:.6}: {} in {} iterations (residual {:.3e}, alpha*h = {:.3})",
                cfg.solver,
                demo.alpha,
                if demo.report.converged { "converged" } else { "did NOT converge" },
                demo.report.iterations_used,
                demo.report.final_residual,
                demo.report.alpha_h,
            );
            println!("relative H1 error vs exact solution: {:.6e}", demo.e_rel);
            for (k, e) in demo.per_subdomain_h1.iter().enumerate() {
                println!("  subdomain {k}: H1 error {e:.6e}");
            }
            if let Some(dir) = &opts.out {
                println!("wrote meshes, solutions, and history to {}", dir.display());
            }
            Ok(())
        }
        Command::Convergence(opts) => {
            let cfg = load_config(&opts, "four")?;
            let study = run_convergence_study(&cfg, opts.out.as_deref()).map_err(|e| e.to_string())?;
            println!("refinement        h        E_rel      rate  iters");
            for r in &study.rows {
                println!(
                    "{:10} {:.4e} {:.4e} {:>9} {:6}{}",
                    r.refinement,
                    r.h,
                    r.e_rel,
                    r.rate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
                    r.iterations,
                    if r.converged { "" } else { "  (not converged)" },
                );
            }
            if let Some(dir) = &opts.out {
                println!("wrote convergence.csv to {}", dir.display());
            }
            Ok(())
        }
        Command::AlphaStudy { common, alphas } => {
            let cfg = load_config(&common, "two")?;
            let list = match alphas {
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?,
                None => default_alpha_list(&cfg).map_err(|e| e.to_string())?,
            };
            let study = run_alpha_study(&cfg, &list, common.out.as_deref())
                .map_err(|e| e.to_string())?;
            let mean = resolve_alpha(
                &StudyConfig {
                    alpha_rule: AlphaRule::Mean,
                    ..cfg.clone()
                },
                cfg.refinements,
            )
            .map_err(|e| e.to_string())?;
            println!("alpha_mean = {mean:.6}");
            println!("      alpha  iters  final_residual");
            for r in &study.rows {
                println!(
                    "{:11.4} {:6}  {:.3e}{}",
                    r.alpha,
                    r.iterations,
                    r.final_residual,
                    if r.converged { "" } else { "  (not converged)" },
                );
            }
            if let Some(dir) = &common.out {
                println!("wrote alpha_study.csv and histories to {}", dir.display());
            }
            Ok(())
        }
        Command::VerifyAppendix {
            out,
            pmax,
            samples,
            seed,
        } => {
            let report = run_verify_appendix(pmax, samples, seed, out.as_deref())
                .map_err(|e| e.to_string())?;
            println!("  p   lambda_max     min_J_ratio    stability_C");
            for row in &report.rows {
                println!(
                    "{:3}  {:+.6e}  {:+.6e}  {:.6e}{}",
                    row.p,
                    row.largest_eigenvalue,
                    row.min_j_ratio,
                    row.stability_c,
                    if row.largest_eigenvalue < 0.0 {
                        ""
                    } else {
                        "  <- not negative definite"
                    },
                );
            }
            if let Some(dir) = &out {
                println!("wrote appendix.csv to {}", dir.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
