mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use coalition_core::continuum::{continuum_certify, grid_groups, ContinuumDocument, ContinuumSurplus};
use coalition_core::transport::{transport_value, unified_size, unknown_counts, LMode};
use coalition_core::{
    certify, fixtures, max_welfare, min_imputation, DualStrategy, Error, Game, GameDocument, SizeBounds,
    SolverOptions, StabilityOptions, TypeEntry, Verdict,
};
use serde::Serialize;

use report::{r12, CertificateReport, ContinuumReport, CountReport, ReformulationReport, SolveReport};

#[derive(Debug, Parser)]
#[command(name = "coalition", version, about = "Stable assignments for bounded-size coalition games")]
struct Cli {
    /// Tolerance for the stability conditions and the duality gap.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Assignment weights at or below this do not count as formed groups.
    #[arg(long = "support-tol", global = true, default_value_t = 1e-12)]
    support_tol: f64,
    /// Common fractional-group size: least common multiple or factorial.
    #[arg(long, global = true, value_enum, default_value_t = LModeArg::Lcm)]
    lmode: LModeArg,
    /// How the imputation LP is solved.
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Full)]
    strategy: StrategyArg,
    /// Grid resolution for the continuum catalog.
    #[arg(long, global = true, default_value_t = 4)]
    resolution: usize,
    /// Write the JSON report here and print a short summary instead.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LModeArg {
    Lcm,
    Factorial,
}

impl From<LModeArg> for LMode {
    fn from(m: LModeArg) -> Self {
        match m {
            LModeArg::Lcm => LMode::Lcm,
            LModeArg::Factorial => LMode::Factorial,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Full,
    Cutting,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count the unknowns of the direct and reformulated problems.
    Count {
        #[arg(long)]
        types: u64,
        #[arg(long, default_value_t = 1)]
        min: usize,
        #[arg(long)]
        max: usize,
    },
    /// Maximize welfare over assignments.
    Solve { input: PathBuf },
    /// Minimize the imputation value subject to no blocking.
    Dual { input: PathBuf },
    /// Solve both problems and check stability. Exits 2 when unstable.
    Certify { input: PathBuf },
    /// Solve the symmetric transport reformulation and compare values.
    Reformulate { input: PathBuf },
    /// Certify a continuum game on its grid catalog.
    Continuum { input: PathBuf },
    /// Print a reference game: nondiff, unify, envy, unbounded, continuum_linear.
    Example {
        name: String,
        /// Largest group size for `unbounded`.
        #[arg(long, default_value_t = 5)]
        size: usize,
    },
}

/// Problems with what the user supplied; exit code 4.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<BadInput>().is_some() {
        return 4;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::Infeasible
            | Error::Unbounded
            | Error::IterLimit(_)
            | Error::NonConvergence(_)
            | Error::SupportOnR0 { .. }
            | Error::NotInU { .. },
        ) => 3,
        Some(_) => 4,
        None => 1,
    }
}

struct RunConfig {
    stab: StabilityOptions,
    opts: SolverOptions,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> anyhow::Result<Self> {
        for (name, v) in [("--tol", cli.tol), ("--support-tol", cli.support_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!(BadInput(format!("{name} must be positive, got {v}")));
            }
        }
        let mut opts = SolverOptions::default();
        if let Ok(raw) = std::env::var("COALITION_CAP") {
            opts.enumeration_cap = raw
                .trim()
                .parse()
                .map_err(|_| BadInput(format!("COALITION_CAP must be a non-negative integer, got `{raw}`")))?;
        }
        Ok(Self {
            stab: StabilityOptions {
                tol: cli.tol,
                support_tol: cli.support_tol,
            },
            opts,
            out: cli.out.clone(),
        })
    }

    /// JSON to stdout, or to `--out` with `summary` on stdout.
    fn emit<T: Serialize>(&self, report: &T, summary: impl FnOnce() -> String) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        match &self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", summary());
                println!("report written to {}", path.display());
            }
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| BadInput(format!("cannot read {}: {e}", path.display())).into())
}

fn load_game(path: &Path) -> anyhow::Result<Game> {
    let text = read(path)?;
    let doc: GameDocument =
        serde_json::from_str(&text).map_err(|e| BadInput(format!("{}: {e}", path.display())))?;
    Game::from_document(&doc).map_err(|e| BadInput(format!("{}: {e}", path.display())).into())
}

fn count(ctx: &RunConfig, types: u64, min: usize, max: usize) -> anyhow::Result<u8> {
    let bounds = SizeBounds::with_cap(min, max, 20).map_err(|e| BadInput(e.to_string()))?;
    let counts = unknown_counts(types, bounds);
    let report = CountReport {
        types,
        min_size: min,
        max_size: max,
        counts: (&counts).into(),
    };
    ctx.emit(&report, || {
        format!(
            "{} groups; reduced bound {} (L = {}) or {} (L = {})",
            report.counts.direct,
            report.counts.lcm.reduced_bound,
            report.counts.lcm.l,
            report.counts.factorial.reduced_bound,
            report.counts.factorial.l
        )
    })?;
    Ok(0)
}

fn solve(ctx: &RunConfig, path: &Path) -> anyhow::Result<u8> {
    let game = load_game(path)?;
    let sol = max_welfare(&game, &ctx.opts)?;
    let u = sol.row_imputation();
    let report = SolveReport {
        status: "optimal",
        welfare: r12(sol.value.0),
        assignment: report::assignment(&sol.assignment, &game.space),
        imputation: report::imputation(&u, &game.space),
        gap: r12(u.value(&game.space) - sol.value.0),
        iterations: sol.report.iterations,
    };
    ctx.emit(&report, || {
        format!("optimal welfare {} over {} groups", report.welfare, report.assignment.len())
    })?;
    Ok(0)
}

fn dual(ctx: &RunConfig, path: &Path, strategy: StrategyArg) -> anyhow::Result<u8> {
    let game = load_game(path)?;
    let strategy = match strategy {
        StrategyArg::Full => DualStrategy::Full,
        StrategyArg::Cutting => DualStrategy::CuttingPlane,
    };
    let sol = min_imputation(&game, strategy, &ctx.opts)?;
    let a = sol.row_assignment(&game);
    let welfare = game.surplus.welfare(&a);
    let report = SolveReport {
        status: "optimal",
        welfare: r12(welfare),
        assignment: report::assignment(&a, &game.space),
        imputation: report::imputation(&sol.imputation, &game.space),
        gap: r12(sol.value - welfare),
        iterations: sol.report.iterations,
    };
    ctx.emit(&report, || {
        format!(
            "minimal imputation value {} after {} round(s) with {} rows",
            r12(sol.value),
            sol.rounds,
            sol.rows.len()
        )
    })?;
    Ok(0)
}

fn certify_cmd(ctx: &RunConfig, path: &Path) -> anyhow::Result<u8> {
    let game = load_game(path)?;
    let c = certify(&game, &ctx.stab, &ctx.opts)?;
    let report = CertificateReport::new(&c, &game.space);
    ctx.emit(&report, || {
        format!("{}: welfare {}, gap {}", report.verdict, report.welfare, report.gap)
    })?;
    Ok(if c.verdict == Verdict::Stable { 0 } else { 2 })
}

fn reformulate(ctx: &RunConfig, path: &Path, mode: LMode) -> anyhow::Result<u8> {
    let game = load_game(path)?;
    let l = unified_size(game.bounds, mode);
    let t = transport_value(&game.space, game.bounds, &game.surplus, l, &ctx.opts)?;
    let direct = max_welfare(&game, &ctx.opts)?.value.0;
    let counts = unknown_counts(game.space.len() as u64, game.bounds);
    let report = ReformulationReport {
        l,
        mode: mode.name(),
        fractional_count: t.fractional.len(),
        unknown_counts: (&counts).into(),
        value: r12(t.value),
        value_direct: r12(direct),
        max_abs_diff: r12((t.value - direct).abs()),
    };
    ctx.emit(&report, || {
        format!(
            "L = {l}: transport value {} over {} fractional groups, direct value {}",
            report.value, report.fractional_count, report.value_direct
        )
    })?;
    Ok(0)
}

fn continuum(ctx: &RunConfig, path: &Path, resolution: usize) -> anyhow::Result<u8> {
    let text = read(path)?;
    let doc: ContinuumDocument =
        serde_json::from_str(&text).map_err(|e| BadInput(format!("{}: {e}", path.display())))?;
    let (game, surplus) = doc.into_game().map_err(|e| BadInput(format!("{}: {e}", path.display())))?;
    let catalog = grid_groups(&game, resolution, ctx.opts.enumeration_cap)?;
    let values = surplus.evaluate(&catalog);
    let c = continuum_certify(&game, &values, &catalog, &ctx.stab, &ctx.opts)?;
    let report = ContinuumReport::new(&c, game.space(), resolution, catalog.len());
    ctx.emit(&report, || {
        format!(
            "{} on {} catalog groups (m = {resolution}): welfare {}, gap {}",
            report.verdict, report.catalog_size, report.welfare, report.gap
        )
    })?;
    Ok(if c.verdict == Verdict::Stable { 0 } else { 2 })
}

fn example(ctx: &RunConfig, name: &str, size: usize) -> anyhow::Result<u8> {
    let doc = match name {
        "nondiff" => fixtures::nondiff(1.0, 1.0).to_document(),
        "unify" => fixtures::unify().to_document(),
        "envy" => fixtures::envy(1e-10).to_document(),
        "unbounded" => {
            if !(1..=coalition_core::DEFAULT_MAX_SIZE_CAP).contains(&size) {
                bail!(BadInput(format!(
                    "--size must be between 1 and {}",
                    coalition_core::DEFAULT_MAX_SIZE_CAP
                )));
            }
            fixtures::unbounded(size).to_document()
        }
        "continuum_linear" => {
            let doc = ContinuumDocument {
                types: vec![
                    TypeEntry {
                        label: "a".into(),
                        mass: 0.25,
                    },
                    TypeEntry {
                        label: "b".into(),
                        mass: 0.75,
                    },
                ],
                eps_lo: 0.25,
                eps_hi: 0.75,
                surplus: ContinuumSurplus::Linear { coef: vec![1.0, 3.0] },
            };
            ctx.emit(&doc, || "continuum game with linear surplus".into())?;
            return Ok(0);
        }
        other => bail!(Error::UnknownExample(other.to_string())),
    };
    ctx.emit(&doc, || {
        format!("{name}: {} types, {} surplus entries", doc.types.len(), doc.surplus.len())
    })?;
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let ctx = RunConfig::from_cli(&cli)?;
    match &cli.command {
        Command::Count { types, min, max } => count(&ctx, *types, *min, *max),
        Command::Solve { input } => solve(&ctx, input),
        Command::Dual { input } => dual(&ctx, input, cli.strategy),
        Command::Certify { input } => certify_cmd(&ctx, input),
        Command::Reformulate { input } => reformulate(&ctx, input, cli.lmode.into()),
        Command::Continuum { input } => continuum(&ctx, input, cli.resolution),
        Command::Example { name, size } => example(&ctx, name, *size),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
