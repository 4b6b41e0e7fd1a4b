//! The work behind each subcommand, free of argument parsing and printing.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use kdlab_core::diagnostics::{attainment_certificate, concrete_bound_check, singular_mass_estimate};
use kdlab_core::lp::{
    dual_sequence, extrapolate_to_zero, solve_dual, solve_partial, solve_primal, solve_relaxed_dual,
    solve_restricted_primal, SolverConfig,
};
use kdlab_core::rotation::build_h;
use kdlab_core::DualityReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::instance::{ExplicitInstance, InstanceFile, Model, RotationSpec, Shift, SCHEMA_VERSION};
use crate::json::ExtFloat;
use crate::result::{
    BoundRecord, CertificateRecord, ReportRecord, ResultFile, SingularRecord, SolverEcho, SweepPoint, SweepRecord,
};

/// Default tolerance for certificates of LP-produced solutions.
pub const LP_CERTIFICATE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Primal,
    Dual,
    Partial(f64),
    Restricted,
    RelaxedDual(f64),
}

impl FromStr for Problem {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let eps = |v: &str| {
            v.parse::<f64>().map_err(|_| CliError::Invalid(format!("bad epsilon {v:?} in problem {s:?}")))
        };
        match s.split_once(':') {
            None if s == "primal" => Ok(Problem::Primal),
            None if s == "dual" => Ok(Problem::Dual),
            None if s == "restricted" => Ok(Problem::Restricted),
            Some(("partial", v)) => Ok(Problem::Partial(eps(v)?)),
            Some(("relaxed-dual", v)) => Ok(Problem::RelaxedDual(eps(v)?)),
            _ => Err(CliError::Invalid(format!(
                "unknown problem {s:?}; expected primal, dual, partial:EPS, restricted or relaxed-dual:EPS"
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Primal => f.write_str("primal"),
            Problem::Dual => f.write_str("dual"),
            Problem::Partial(e) => write!(f, "partial:{e}"),
            Problem::Restricted => f.write_str("restricted"),
            Problem::RelaxedDual(e) => write!(f, "relaxed-dual:{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let cfg = SolverConfig::default();
        Self { tolerance: cfg.optimality_tol, max_iterations: cfg.max_iterations }
    }
}

impl SolverOptions {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            feasibility_tol: self.tolerance,
            optimality_tol: self.tolerance,
            max_iterations: self.max_iterations,
            ..SolverConfig::default()
        }
    }

    fn echo(&self) -> SolverEcho {
        SolverEcho { tolerance: self.tolerance, max_iterations: self.max_iterations }
    }
}

fn run_problem(model: &Model, problem: Problem, cfg: &SolverConfig) -> Result<DualityReport> {
    let (c, mu, nu) = (&model.cost, &model.mu, &model.nu);
    Ok(match problem {
        Problem::Primal => solve_primal(c, mu, nu, cfg)?,
        Problem::Dual => solve_dual(c, mu, nu, cfg)?,
        Problem::Partial(eps) => solve_partial(c, mu, nu, eps, cfg)?,
        Problem::Restricted => solve_restricted_primal(c, &model.reference, cfg)?,
        Problem::RelaxedDual(eps) => solve_relaxed_dual(c, mu, nu, &model.reference, eps, cfg)?,
    })
}

/// Solves one problem and packages the result with an attainment certificate
/// for the exact primal and dual problems.
pub fn solve(instance: &InstanceFile, problem: Problem, opts: &SolverOptions) -> Result<ResultFile> {
    let model = instance.build()?;
    let report = run_problem(&model, problem, &opts.config())?;
    let mut out = ResultFile::new(instance.clone(), problem.to_string(), opts.echo());
    if matches!(problem, Problem::Primal | Problem::Dual) {
        if let (Some(plan), Some(pp)) = (&report.optimal_plan, &report.optimal_potentials) {
            let a = attainment_certificate(&model.cost, plan, pp, LP_CERTIFICATE_TOL)?;
            out.certificate = Some(CertificateRecord::new(&a, LP_CERTIFICATE_TOL));
        }
    }
    out.report = Some(ReportRecord::from(&report));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    EpsilonPrimal,
    EpsilonDual,
    NScaling,
}

impl FromStr for SweepKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon-primal" => Ok(SweepKind::EpsilonPrimal),
            "epsilon-dual" => Ok(SweepKind::EpsilonDual),
            "n-scaling" => Ok(SweepKind::NScaling),
            _ => Err(CliError::Invalid(format!("unknown sweep {s:?}; expected epsilon-primal, epsilon-dual or n-scaling"))),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::EpsilonPrimal => "epsilon-primal",
            SweepKind::EpsilonDual => "epsilon-dual",
            SweepKind::NScaling => "n-scaling",
        })
    }
}

impl SweepKind {
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepKind::EpsilonPrimal => vec![1e-1, 1e-2, 1e-3],
            SweepKind::EpsilonDual => vec![1e-1, 1e-2, 1e-3, 1e-4],
            SweepKind::NScaling => vec![24.0, 48.0, 96.0, 192.0],
        }
    }
}

/// One grid point of a sweep, with its wall-clock time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub value: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
    /// ε-sweeps only: the last linear piece continued to ε = 0.
    pub extrapolated_limit: Option<f64>,
    /// Partial values rise as ε shrinks, relaxed-dual values fall; n-scaling values fall.
    pub monotone: bool,
}

impl SweepOutcome {
    pub fn record(&self) -> SweepRecord {
        SweepRecord {
            kind: self.kind.to_string(),
            rows: self
                .rows
                .iter()
                .map(|r| SweepPoint { parameter: r.parameter, value: r.value, iterations: r.iterations })
                .collect(),
            extrapolated_limit: self.extrapolated_limit,
            monotone: self.monotone,
        }
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Invalid(format!("bad grid value {t:?}"))))
        .collect()
}

fn check_epsilon_grid(grid: &[f64], upper: f64) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0 && *e <= upper)) || grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Invalid(format!("epsilon grid must be strictly decreasing within (0, {upper}]")));
    }
    Ok(())
}

fn check_n_grid(grid: &[f64]) -> Result<Vec<usize>> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Invalid("n grid must be strictly increasing".into()));
    }
    grid.iter()
        .map(|&v| {
            if v.fract() == 0.0 && v >= 4.0 && v <= kdlab_core::MAX_DIMENSION as f64 {
                Ok(v as usize)
            } else {
                Err(CliError::Invalid(format!("grid value {v} is not an integer n >= 4")))
            }
        })
        .collect()
}

/// Evaluates `f` at every grid point on up to `available_parallelism` threads;
/// results come back in grid order.
fn parallel_map<T: Send>(grid: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(grid.len()).max(1);
    let mut out: Vec<Option<Result<T>>> = (0..grid.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (chunk_idx, slots) in out.chunks_mut(grid.len().div_ceil(threads)).enumerate() {
            let f = &f;
            let start = chunk_idx * grid.len().div_ceil(threads);
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    *slot = Some(f(grid[start + k]));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every slot is filled")).collect()
}

fn with_n(instance: &InstanceFile, n: usize, k_max: Option<usize>) -> Result<InstanceFile> {
    let resize = |spec: &RotationSpec| {
        let mut s = spec.clone();
        s.n = n;
        s.k_max = k_max.or(spec.k_max).map(|k| k.min(n - 1));
        s
    };
    match instance {
        InstanceFile::Ap(spec) => Ok(InstanceFile::Ap(resize(spec))),
        InstanceFile::Ex33(spec) => Ok(InstanceFile::Ex33(resize(spec))),
        InstanceFile::Explicit(_) => Err(CliError::Invalid("n-scaling needs an ap or ex33 instance".into())),
    }
}

pub fn sweep(instance: &InstanceFile, kind: SweepKind, grid: &[f64], opts: &SolverOptions, k_max: Option<usize>) -> Result<SweepOutcome> {
    let cfg = opts.config();
    let timed = |f: &dyn Fn() -> Result<DualityReport>, parameter: f64, dual: bool| -> Result<SweepRow> {
        let start = Instant::now();
        let r = f()?;
        Ok(SweepRow {
            parameter,
            value: if dual { r.dual() } else { r.primal() },
            iterations: r.stats.iterations,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    };
    let (rows, limit, monotone) = match kind {
        SweepKind::EpsilonPrimal | SweepKind::EpsilonDual => {
            let dual = kind == SweepKind::EpsilonDual;
            check_epsilon_grid(grid, if dual { f64::MAX } else { 1.0 })?;
            let model = instance.build()?;
            let rows = parallel_map(grid, |e| {
                let problem = if dual { Problem::RelaxedDual(e) } else { Problem::Partial(e) };
                timed(&|| run_problem(&model, problem, &cfg), e, dual)
            })?;
            let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
            let monotone = values.windows(2).all(|w| if dual { w[1] <= w[0] + 1e-7 } else { w[1] >= w[0] - 1e-7 });
            (rows, Some(extrapolate_to_zero(grid, &values)), monotone)
        }
        SweepKind::NScaling => {
            let ns = check_n_grid(grid)?;
            let instances = ns.iter().map(|&n| with_n(instance, n, k_max)).collect::<Result<Vec<_>>>()?;
            let rows = parallel_map(grid, |v| {
                let idx = grid.iter().position(|g| *g == v).expect("value from the grid");
                let model = instances[idx].build()?;
                timed(&|| run_problem(&model, Problem::Primal, &cfg), v, false)
            })?;
            let monotone = rows.windows(2).all(|w| w[1].value <= w[0].value + 1e-7);
            (rows, None, monotone)
        }
    };
    Ok(SweepOutcome { kind, rows, extrapolated_limit: limit, monotone })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Ccm,
    Bound,
    Singular,
}

impl FromStr for DiagKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccm" => Ok(DiagKind::Ccm),
            "bound" => Ok(DiagKind::Bound),
            "singular" => Ok(DiagKind::Singular),
            _ => Err(CliError::Invalid(format!("unknown diagnostic {s:?}; expected ccm, bound or singular"))),
        }
    }
}

impl fmt::Display for DiagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagKind::Ccm => "ccm",
            DiagKind::Bound => "bound",
            DiagKind::Singular => "singular",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagParams {
    /// ε grid for the potential sequence (bound, singular).
    pub epsilons: Vec<f64>,
    /// δ grid for the small-set profile (singular).
    pub deltas: Vec<f64>,
    /// Tolerance of the certificate (ccm).
    pub tolerance: f64,
}

impl Default for DiagParams {
    fn default() -> Self {
        Self { epsilons: vec![1e-2, 1e-4], deltas: vec![1e-1, 1e-2, 1e-3], tolerance: LP_CERTIFICATE_TOL }
    }
}

pub fn diagnose(instance: &InstanceFile, kind: DiagKind, params: &DiagParams, opts: &SolverOptions) -> Result<ResultFile> {
    let model = instance.build()?;
    let cfg = opts.config();
    let mut out = ResultFile::new(instance.clone(), kind.to_string(), opts.echo());
    match kind {
        DiagKind::Ccm => {
            let r = solve_primal(&model.cost, &model.mu, &model.nu, &cfg)?;
            let plan = r.optimal_plan.as_ref().expect("primal returns a plan");
            let pp = r.optimal_potentials.as_ref().expect("primal returns potentials");
            let a = attainment_certificate(&model.cost, plan, pp, params.tolerance)?;
            out.certificate = Some(CertificateRecord::new(&a, params.tolerance));
        }
        DiagKind::Bound => {
            let (Some(inst), InstanceFile::Ap(_)) = (model.rotation, instance) else {
                return Err(CliError::Invalid("the bound diagnostic needs an ap instance".into()));
            };
            check_epsilon_grid(&params.epsilons, f64::MAX)?;
            let k_max = model.k_max.expect("rotation models carry k_max");
            let h = build_h(&inst, k_max)?;
            let seq = dual_sequence(&model.cost, &model.mu, &model.nu, &model.reference, &params.epsilons, &cfg)?;
            let rows = concrete_bound_check(&inst, &model.cost, &seq, &h, k_max)?;
            out.bound = Some(rows.iter().map(|r| BoundRecord::new(r, &params.epsilons)).collect());
        }
        DiagKind::Singular => {
            let Some(inst) = model.rotation else {
                return Err(CliError::Invalid("the singular diagnostic needs an ap or ex33 instance".into()));
            };
            check_epsilon_grid(&params.epsilons, f64::MAX)?;
            let h = build_h(&inst, model.k_max.expect("rotation models carry k_max"))?;
            let seq = dual_sequence(&model.cost, &model.mu, &model.nu, &model.reference, &params.epsilons, &cfg)?;
            let d = singular_mass_estimate(&model.reference, &seq, &h, &params.deltas)?;
            out.singular = Some(SingularRecord::new(&d, &params.epsilons, &params.deltas));
        }
    }
    Ok(out)
}

/// Template instance files.
pub fn generate(kind: &str, n: usize, shift: Option<usize>, k_max: Option<usize>, seed: Option<u64>) -> Result<InstanceFile> {
    let shift = shift.map_or(Shift::AutoGolden, Shift::Fixed);
    match kind {
        "ap" => Ok(InstanceFile::Ap(RotationSpec { seed, ..RotationSpec::template(n, shift, k_max) })),
        "ex33" => Ok(InstanceFile::Ex33(RotationSpec { seed, ..RotationSpec::template(n, shift, k_max) })),
        "explicit" => {
            let seed = seed.unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cost = (0..n).map(|_| (0..n).map(|_| ExtFloat(rng.gen_range(0..100) as f64 / 10.0)).collect()).collect();
            let mu = vec![1.0 / n as f64; n];
            Ok(InstanceFile::Explicit(ExplicitInstance {
                schema_version: SCHEMA_VERSION,
                cost,
                mu: mu.clone(),
                nu: mu,
                reference_plan: None,
                seed: Some(seed),
            }))
        }
        other => Err(CliError::Invalid(format!("unknown instance kind {other:?}; expected explicit, ap or ex33"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problems_parse_and_print() {
        for s in ["primal", "dual", "restricted", "partial:0.25", "relaxed-dual:0.001"] {
            assert_eq!(s.parse::<Problem>().unwrap().to_string(), s);
        }
        assert!("partial".parse::<Problem>().is_err());
        assert!("partial:x".parse::<Problem>().is_err());
        assert!("primal:1".parse::<Problem>().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1, 1e-2").unwrap(), vec![0.1, 0.01]);
        assert!(parse_grid("0.1,,").is_err());
        assert!(check_epsilon_grid(&[0.1, 0.2], 1.0).is_err());
        assert!(check_n_grid(&[24.0, 48.5]).is_err());
        assert_eq!(check_n_grid(&[8.0, 24.0]).unwrap(), vec![8, 24]);
    }

    #[test]
    fn parallel_map_keeps_order() {
        let grid: Vec<f64> = (0..37).map(f64::from).collect();
        let out = parallel_map(&grid, |v| Ok(v * 2.0)).unwrap();
        assert_eq!(out, grid.iter().map(|v| v * 2.0).collect::<Vec<_>>());
        assert!(parallel_map(&grid, |v| if v == 5.0 { Err(CliError::Invalid("x".into())) } else { Ok(v) }).is_err());
    }
}
