use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use kdlab::commands::{self, DiagKind, DiagParams, Problem, SolverOptions, SweepKind};
use kdlab::result::ResultFile;
use kdlab::{tables, CliError, InstanceFile, Result};

#[derive(Parser)]
#[command(name = "kdlab", version, about = "Exact finite optimal transport: primal, dual, partial and relaxed problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Instance file (JSON).
    instance: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver feasibility and optimality tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Simplex iteration budget.
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
}

impl Common {
    fn options(&self) -> SolverOptions {
        SolverOptions { tolerance: self.tol, max_iterations: self.max_iter }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write a JSON result file.
    Solve {
        #[command(flatten)]
        common: Common,
        /// primal, dual, partial:EPS, restricted or relaxed-dual:EPS.
        #[arg(long, default_value = "primal")]
        problem: String,
        /// Override the instance's k_max.
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Run a parameter sweep; CSV unless --out ends in .json.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// epsilon-primal, epsilon-dual or n-scaling.
        #[arg(long)]
        sweep: String,
        /// Comma-separated grid: decreasing ε values or increasing n values.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Run a diagnostic; CSV unless --out ends in .json.
    Diagnose {
        instance: PathBuf,
        /// ccm, bound or singular.
        #[arg(long)]
        diag: String,
        /// ε grid of the potential sequence (bound, singular).
        #[arg(long)]
        grid: Option<String>,
        /// δ grid of the small-set profile (singular).
        #[arg(long)]
        delta_grid: Option<String>,
        /// Certificate tolerance (ccm).
        #[arg(long, default_value_t = commands::LP_CERTIFICATE_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a template instance file.
    Gen {
        /// explicit, ap or ex33.
        kind: String,
        /// Grid size (rotation kinds) or matrix side (explicit).
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Rotation shift; the golden shift when absent.
        #[arg(long)]
        shift: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        /// Seed for random explicit costs.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_instance(path: &Path, k_max: Option<usize>) -> Result<InstanceFile> {
    let mut inst = InstanceFile::read(path)?;
    if let Some(k) = k_max {
        match &mut inst {
            InstanceFile::Ap(s) | InstanceFile::Ex33(s) => s.k_max = Some(k),
            InstanceFile::Explicit(_) => return Err(CliError::Invalid("--k-max applies to ap and ex33 instances".into())),
        }
    }
    Ok(inst)
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    match out {
        Some(path) => std::fs::write(path, body).map_err(io(path)),
        None => std::io::stdout().write_all(body).map_err(io(Path::new("<stdout>"))),
    }
}

fn is_json(out: Option<&Path>) -> bool {
    out.and_then(Path::extension).is_some_and(|e| e == "json")
}

fn summary(result: &ResultFile) -> String {
    let mut s = format!("problem: {}\n", result.problem);
    if let Some(r) = &result.report {
        s += &format!("primal value: {}\ndual value: {}\ngap: {}\n", r.primal_value.0, r.dual_value.0, r.gap.0);
        s += &format!("iterations: {} (pivots {}, degenerate {}, bland {})\n", r.stats.iterations, r.stats.pivots, r.stats.degenerate_pivots, r.stats.bland_pivots);
    }
    if let Some(c) = &result.certificate {
        s += &format!("strong c-cyclic monotonicity: {}\ncertified: {}\n", if c.strong_ccm { "pass" } else { "fail" }, c.certified);
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Solve { common, problem, k_max } => {
            let problem: Problem = problem.parse()?;
            let instance = read_instance(&common.instance, k_max)?;
            let result = commands::solve(&instance, problem, &common.options())?;
            let json = result.to_json()?;
            match &common.out {
                Some(path) => {
                    emit(Some(path), json.as_bytes())?;
                    print!("{}", summary(&result));
                }
                None => emit(None, json.as_bytes())?,
            }
        }
        Command::Sweep { common, sweep, grid, k_max } => {
            let kind: SweepKind = sweep.parse()?;
            let grid = grid.map_or_else(|| Ok(kind.default_grid()), |g| commands::parse_grid(&g))?;
            let instance = read_instance(&common.instance, None)?;
            let outcome = commands::sweep(&instance, kind, &grid, &common.options(), k_max)?;
            let out = common.out.as_deref();
            if is_json(out) {
                let mut result = ResultFile::new(instance, kind.to_string(), kdlab::result::SolverEcho {
                    tolerance: common.tol,
                    max_iterations: common.max_iter,
                });
                result.sweep = Some(outcome.record());
                emit(out, result.to_json()?.as_bytes())?;
            } else {
                let mut buf = Vec::new();
                tables::write_sweep(&mut buf, &outcome)?;
                emit(out, &buf)?;
            }
            if !outcome.monotone {
                eprintln!("warning: sweep values are not monotone");
            }
        }
        Command::Diagnose { instance, diag, grid, delta_grid, tol, max_iter, k_max, out } => {
            let kind: DiagKind = diag.parse()?;
            let mut params = DiagParams { tolerance: tol, ..DiagParams::default() };
            if let Some(g) = grid {
                params.epsilons = commands::parse_grid(&g)?;
            }
            if let Some(g) = delta_grid {
                params.deltas = commands::parse_grid(&g)?;
            }
            let instance = read_instance(&instance, k_max)?;
            let opts = SolverOptions { max_iterations: max_iter, ..SolverOptions::default() };
            let result = commands::diagnose(&instance, kind, &params, &opts)?;
            let out = out.as_deref();
            if is_json(out) {
                emit(out, result.to_json()?.as_bytes())?;
            } else {
                let mut buf = Vec::new();
                if let Some(c) = &result.certificate {
                    tables::write_certificate(&mut buf, c)?;
                }
                if let Some(rows) = &result.bound {
                    tables::write_bound(&mut buf, rows)?;
                }
                if let Some(s) = &result.singular {
                    tables::write_singular(&mut buf, s)?;
                }
                emit(out, &buf)?;
            }
        }
        Command::Gen { kind, n, shift, k_max, seed, out } => {
            let inst = commands::generate(&kind, n, shift, k_max, seed)?;
            inst.build()?;
            emit(out.as_deref(), kdlab::json::to_string(&inst)?.as_bytes())?;
        }
    }
    eprintln!("wall time: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
