//! Experiment dispatch, verdicts and output files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nonlocal_core::maxprinciple::{check_mp, witness_clauses, MPReport, MpVerdict, WitnessClauses};
use nonlocal_core::reaction::{
    build_subsolution, default_supersolution, evolve, steady_state, survival_criterion,
    EvolutionTrace, EvolveOptions, KppNonlinearity, KppSolution, Outcome, SteadyOptions,
    SurvivalReport, SurvivalVerdict,
};
use nonlocal_core::spectral::{BisectionOptions, ExhaustionTable, RankOneRoot};
use nonlocal_core::{
    build_grid, exhaustion_lambda, existence_diagnostic, principal_eigenpair, rank_one_bisection,
    EigenOptions, EigenReport, ExistenceDiagnostic, ExistenceVerdict, Grid, NonlocalOperator,
    Problem, UnboundedLine,
};

use crate::config::{build_coefficient, echo, ExperimentKind, NonlinearityBlock, ScenarioConfig};
use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Index of the perturbation used for the KPP subsolution bump.
const SUBSOLUTION_INDEX: usize = 8;
const SUBSOLUTION_EPSILON: f64 = 0.05;
/// Distance from an endpoint under which the sandwich counts as attained.
const ENDPOINT_TOL: f64 = 1e-8;
/// Entrywise slack for the inverse-positivity checks.
const POSITIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub label: String,
    pub pass: bool,
}

impl Verdict {
    fn new(label: impl Into<String>, pass: bool) -> Self {
        Self {
            label: label.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Eigen {
        report: EigenReport,
        sigma: f64,
        sigma_prime: f64,
        nodes: Vec<Vec<f64>>,
    },
    Ladder(ExistenceDiagnostic),
    RankOne {
        diagnostic: ExistenceDiagnostic,
        /// `None` when `F(λ) = 1` has no root away from the pole.
        root: Option<RankOneRoot>,
    },
    Mp {
        report: MPReport,
        clauses: Option<WitnessClauses>,
        nodes: Vec<Vec<f64>>,
    },
    Kpp {
        survival: SurvivalReport,
        solution: KppSolution,
        nodes: Vec<Vec<f64>>,
    },
    Evolve {
        survival: SurvivalReport,
        trace: EvolutionTrace,
    },
    Exhaustion(ExhaustionTable),
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub payload: Payload,
    pub verdicts: Vec<Verdict>,
    pub wall_clock: Duration,
    pub version: &'static str,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// A CSV table: header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub const LADDER_COLUMNS: [&str; 6] = [
    "N",
    "h",
    "lambda_p",
    "sigma",
    "sigma_prime",
    "concentration_ratio",
];
pub const EVOLUTION_COLUMNS: [&str; 5] = ["t", "sup_dist_to_p", "sup_dist_to_0", "min_u", "max_u"];

fn eigen_opts(s: &ScenarioConfig) -> EigenOptions {
    EigenOptions {
        tol: s.solver.tol,
        max_iter: s.solver.max_iter,
        ..EigenOptions::default()
    }
}

fn operator(s: &ScenarioConfig, grid: &Grid) -> Result<NonlocalOperator> {
    Ok(nonlocal_core::assemble(
        grid,
        &s.kernel()?,
        &s.dispersal()?,
        &s.coefficient(),
        &s.assembly(),
    )?)
}

fn single_grid(s: &ScenarioConfig) -> Result<Grid> {
    let n = s
        .grid
        .n
        .ok_or_else(|| CliError::Config("grid.n is required".into()))?;
    Ok(build_grid(&s.domain()?, n)?)
}

fn nonlinearity(s: &ScenarioConfig, grid: &Grid) -> Result<KppNonlinearity> {
    match &s.nonlinearity {
        Some(NonlinearityBlock::Logistic { mu }) => {
            let f = KppNonlinearity::logistic(build_coefficient(mu), grid)?;
            f.validate(grid)?;
            Ok(f)
        }
        None => Err(CliError::Config("missing nonlinearity".into())),
    }
}

/// `−σ′ < λ_p < −σ`, or its closed form when an endpoint is attained.
fn sandwich(lambda: f64, sigma: f64, sigma_prime: f64) -> Verdict {
    let (lo, hi) = (-sigma_prime, -sigma);
    let attained = (lambda - lo).abs() <= ENDPOINT_TOL || (lambda - hi).abs() <= ENDPOINT_TOL;
    if attained {
        Verdict::new("sandwich -σ' <= λ_p <= -σ (endpoint attained)", true)
    } else {
        Verdict::new("sandwich -σ' < λ_p < -σ", lo < lambda && lambda < hi)
    }
}

fn ladder_problem(s: &ScenarioConfig) -> Result<Problem> {
    let kernel = match s.kind {
        ExperimentKind::Rankone => {
            nonlocal_core::KernelJ::new(nonlocal_core::KernelShape::Uniform, 1.0, 1.0, 1)?
        }
        _ => s.kernel()?,
    };
    Ok(Problem {
        domain: s.domain()?,
        kernel,
        dispersal: s.dispersal()?,
        coefficient: s.coefficient(),
        surrogate: s.surrogate.map(|b| b.rho),
        assembly: s.assembly(),
    })
}

fn ladder_levels(s: &ScenarioConfig) -> Result<Vec<usize>> {
    s.grid
        .ladder
        .clone()
        .ok_or_else(|| CliError::Config("grid.ladder is required".into()))
}

fn ladder_verdicts(d: &ExistenceDiagnostic) -> Vec<Verdict> {
    d.levels
        .iter()
        .map(|l| {
            let v = sandwich(l.lambda_p, l.sigma, l.sigma_prime);
            Verdict::new(format!("N = {}: {}", l.n, v.label), v.pass)
        })
        .collect()
}

fn survival_pass(survival: &SurvivalReport, nontrivial: bool) -> bool {
    match survival.verdict {
        SurvivalVerdict::Persistence => nontrivial,
        SurvivalVerdict::Extinction => !nontrivial,
        SurvivalVerdict::Borderline => false,
    }
}

fn execute(s: &ScenarioConfig) -> Result<(Payload, Vec<Verdict>)> {
    let opts = eigen_opts(s);
    match s.kind {
        ExperimentKind::Eigen => {
            let grid = single_grid(s)?;
            let op = operator(s, &grid)?;
            let report = principal_eigenpair(&op, &opts)?;
            let (sigma, sigma_prime) = (op.sigma(), op.sigma_prime());
            let verdicts = vec![
                Verdict::new(
                    format!("CW bracket width <= {:e}", s.solver.tol),
                    report.bracket_width() <= s.solver.tol,
                ),
                Verdict::new(
                    "eigenvector strictly positive",
                    report.eigenvector.iter().all(|&v| v > 0.0),
                ),
                sandwich(report.lambda_p, sigma, sigma_prime),
            ];
            let nodes = grid.nodes().map(<[f64]>::to_vec).collect();
            Ok((
                Payload::Eigen {
                    report,
                    sigma,
                    sigma_prime,
                    nodes,
                },
                verdicts,
            ))
        }
        ExperimentKind::Ladder => {
            let d = existence_diagnostic(&ladder_problem(s)?, &ladder_levels(s)?, &opts)?;
            let verdicts = ladder_verdicts(&d);
            Ok((Payload::Ladder(d), verdicts))
        }
        ExperimentKind::Rankone => {
            let ladder = ladder_levels(s)?;
            let problem = ladder_problem(s)?;
            let d = existence_diagnostic(&problem, &ladder, &opts)?;
            let finest = build_grid(&problem.domain, *ladder.iter().max().unwrap_or(&ladder[0]))?;
            let rho = problem.surrogate.unwrap_or_default();
            let bisect = BisectionOptions {
                tol: s.solver.tol,
                ..BisectionOptions::default()
            };
            let root = match rank_one_bisection(&finest, &problem.coefficient, rho, &bisect) {
                Ok(r) => Some(r),
                Err(nonlocal_core::Error::CriterionFailure { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let expected = if root.is_some() {
                ExistenceVerdict::EigenfunctionExists
            } else {
                ExistenceVerdict::Degenerate
            };
            let mut verdicts = vec![Verdict::new(
                "criterion and concentration ladder agree",
                d.verdict == expected,
            )];
            if let Some(r) = &root {
                verdicts.push(Verdict::new(
                    format!("|F(λ₁) - 1| <= {:e}", 1e-8),
                    (r.f_value - 1.0).abs() <= 1e-8,
                ));
            }
            Ok((
                Payload::RankOne {
                    diagnostic: d,
                    root,
                },
                verdicts,
            ))
        }
        ExperimentKind::Mp => {
            let grid = single_grid(s)?;
            let op = operator(s, &grid)?;
            let report = check_mp(&op, s.solver.battery, s.solver.seed)?;
            let mut verdicts = Vec::new();
            let clauses = match &report.witness {
                Some(w) => {
                    let c = witness_clauses(&op, w)?;
                    verdicts.push(Verdict::new(
                        "witness satisfies the three clauses",
                        c.holds(),
                    ));
                    Some(c)
                }
                None => None,
            };
            verdicts.push(Verdict::new(
                "MP verdict agrees with sign(λ_p)",
                (report.verdict == MpVerdict::Holds) == (report.lambda_p > 0.0),
            ));
            if report.verdict == MpVerdict::Holds {
                let ok = |m: Option<f64>| m.is_none_or(|v| v >= -POSITIVITY_SLACK);
                verdicts.push(Verdict::new(
                    "inverse positivity",
                    ok(report.battery_min) && ok(report.inverse_min),
                ));
            }
            let nodes = grid.nodes().map(<[f64]>::to_vec).collect();
            Ok((
                Payload::Mp {
                    report,
                    clauses,
                    nodes,
                },
                verdicts,
            ))
        }
        ExperimentKind::Kpp => {
            let grid = single_grid(s)?;
            let op = operator(s, &grid)?;
            let f = nonlinearity(s, &grid)?;
            let survival = survival_criterion(&op, &f)?;
            let sup = default_supersolution(&op, &f)?;
            let sub = match survival.verdict {
                SurvivalVerdict::Persistence => {
                    build_subsolution(&op, &f, SUBSOLUTION_INDEX, SUBSOLUTION_EPSILON)?.values
                }
                _ => vec![0.0; op.size()],
            };
            let steady = SteadyOptions {
                k: s.solver.k,
                tol: s.solver.tol,
                max_iter: s.solver.max_iter,
            };
            let solution = steady_state(&op, &f, &sub, &sup, &steady)?;
            let verdicts = vec![
                Verdict::new(
                    format!("steady-state residual <= {:e}", s.solver.tol),
                    solution.residual <= s.solver.tol,
                ),
                Verdict::new(
                    "steady state matches the survival criterion",
                    survival_pass(&survival, !solution.trivial && solution.min_p > 0.0),
                ),
            ];
            let nodes = grid.nodes().map(<[f64]>::to_vec).collect();
            Ok((
                Payload::Kpp {
                    survival,
                    solution,
                    nodes,
                },
                verdicts,
            ))
        }
        ExperimentKind::Evolve => {
            let grid = single_grid(s)?;
            let op = operator(s, &grid)?;
            let f = nonlinearity(s, &grid)?;
            let survival = survival_criterion(&op, &f)?;
            let eo = EvolveOptions {
                scheme: s.solver.scheme,
                dt: s.solver.dt,
                t_final: s.solver.t_final,
                checkpoints: s.solver.checkpoints,
                tol: s.solver.classify_tol,
                limit: None,
            };
            let trace = evolve(&op, &f, &vec![s.solver.initial; op.size()], &eo)?;
            let verdicts = vec![Verdict::new(
                "long-time limit matches the survival criterion",
                match trace.classification {
                    Outcome::ConvergedToP => survival_pass(&survival, true),
                    Outcome::ConvergedTo0 => survival_pass(&survival, false),
                    Outcome::Undecided => false,
                },
            )];
            Ok((Payload::Evolve { survival, trace }, verdicts))
        }
        ExperimentKind::Exhaustion => {
            let [lo, hi] = s.domain.bounds;
            let radii = s.grid.radii.clone().unwrap_or_default();
            let h = s.grid.h.unwrap_or_default();
            let unbounded = UnboundedLine {
                core: (lo, hi),
                radii: radii.clone(),
            };
            let t = exhaustion_lambda(
                &unbounded,
                &s.kernel()?,
                &s.dispersal()?,
                &s.coefficient(),
                radii.len(),
                h,
                &s.assembly(),
                &opts,
            )?;
            let monotone = t.levels.windows(2).all(|w| {
                w[1].lambda_p <= w[0].lambda_p + nonlocal_core::spectral::EXHAUSTION_SLACK
            });
            let verdicts = vec![
                Verdict::new("λ_{p,k} non-increasing", monotone),
                Verdict::new("limit within [-σ', -σ]", t.within_bracket),
            ];
            Ok((Payload::Exhaustion(t), verdicts))
        }
    }
}

/// Runs one scenario.
pub fn run(s: &ScenarioConfig) -> Result<RunReport> {
    let start = Instant::now();
    let (payload, verdicts) = execute(s).map_err(|e| CliError::Scenario {
        scenario: s.name.clone(),
        source: Box::new(e),
    })?;
    Ok(RunReport {
        scenario: s.clone(),
        payload,
        verdicts,
        wall_clock: start.elapsed(),
        version: VERSION,
    })
}

fn cell(v: f64) -> String {
    format!("{v:e}")
}

fn node_table(nodes: &[Vec<f64>], name: &str, values: &[f64]) -> Table {
    let dim = nodes.first().map_or(1, Vec::len);
    let mut header: Vec<String> = ["x", "y", "z"][..dim]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.push(name.into());
    let rows = nodes
        .iter()
        .zip(values)
        .map(|(x, v)| x.iter().map(|c| cell(*c)).chain([cell(*v)]).collect())
        .collect();
    Table { header, rows }
}

fn ladder_table(d: &ExistenceDiagnostic) -> Table {
    Table {
        header: LADDER_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: d
            .levels
            .iter()
            .map(|l| {
                vec![
                    l.n.to_string(),
                    cell(l.h),
                    cell(l.lambda_p),
                    cell(l.sigma),
                    cell(l.sigma_prime),
                    cell(l.concentration_ratio),
                ]
            })
            .collect(),
    }
}

fn evolution_table(t: &EvolutionTrace) -> Table {
    Table {
        header: EVOLUTION_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: (0..t.times.len())
            .map(|i| {
                vec![
                    cell(t.times[i]),
                    cell(t.sup_dist_to_p[i]),
                    cell(t.sup_dist_to_0[i]),
                    cell(t.min_u[i]),
                    cell(t.max_u[i]),
                ]
            })
            .collect(),
    }
}

impl Payload {
    /// The main CSV table of the experiment.
    pub fn table(&self) -> Table {
        match self {
            Payload::Eigen { report, nodes, .. } => node_table(nodes, "phi", &report.eigenvector),
            Payload::Ladder(d) | Payload::RankOne { diagnostic: d, .. } => ladder_table(d),
            Payload::Mp { report, .. } => Table {
                header: [
                    "lambda_p",
                    "verdict",
                    "battery_size",
                    "battery_min",
                    "inverse_min",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
                rows: vec![vec![
                    cell(report.lambda_p),
                    mp_label(report.verdict).into(),
                    report.battery_size.to_string(),
                    report.battery_min.map(cell).unwrap_or_default(),
                    report.inverse_min.map(cell).unwrap_or_default(),
                ]],
            },
            Payload::Kpp {
                solution, nodes, ..
            } => node_table(nodes, "p", &solution.p),
            Payload::Evolve { trace, .. } => evolution_table(trace),
            Payload::Exhaustion(t) => Table {
                header: ["radius", "N", "lambda_p"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                rows: t
                    .levels
                    .iter()
                    .map(|l| vec![cell(l.radius), l.n.to_string(), cell(l.lambda_p)])
                    .collect(),
            },
        }
    }

    /// Secondary per-node table, for MP witnesses.
    pub fn witness_table(&self) -> Option<Table> {
        match self {
            Payload::Mp { report, nodes, .. } => report
                .witness
                .as_ref()
                .map(|w| node_table(nodes, "witness", w)),
            _ => None,
        }
    }
}

fn mp_label(v: MpVerdict) -> &'static str {
    match v {
        MpVerdict::Holds => "holds",
        MpVerdict::Violated => "violated",
    }
}

fn existence_label(v: ExistenceVerdict) -> &'static str {
    match v {
        ExistenceVerdict::EigenfunctionExists => "exists",
        ExistenceVerdict::Degenerate => "degenerate",
        ExistenceVerdict::Inconclusive => "inconclusive",
    }
}

fn survival_line(s: &SurvivalReport) -> String {
    let word = match s.verdict {
        SurvivalVerdict::Persistence => "persistence",
        SurvivalVerdict::Extinction => "extinction",
        SurvivalVerdict::Borderline => "borderline",
    };
    let mut line = format!("{word} (λ_p = {:.3})", s.lambda_p);
    if !s.a_nonpositive {
        line.push_str("\nnote: a > 0 somewhere; the KPP setting expects a = -b <= 0");
    }
    line
}

fn ladder_lines(out: &mut String, d: &ExistenceDiagnostic) {
    for l in &d.levels {
        let _ = writeln!(
            out,
            "N = {:>5}  λ_p = {:.9}  concentration = {:.6}",
            l.n, l.lambda_p, l.concentration_ratio
        );
    }
    let growth: Vec<String> = d
        .growth_factors()
        .iter()
        .map(|g| format!("{g:.3}"))
        .collect();
    let _ = writeln!(
        out,
        "concentration growth per level: [{}]",
        growth.join(", ")
    );
    let _ = writeln!(out, "existence verdict: {}", existence_label(d.verdict));
}

impl RunReport {
    /// Plain-text report.
    pub fn text(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(out, "nonlocal-spectra {}", self.version);
        let _ = writeln!(out, "scenario: {} ({})", s.name, s.kind.as_str());
        let _ = writeln!(out, "wall clock: {:.3} s", self.wall_clock.as_secs_f64());
        out.push('\n');
        match &self.payload {
            Payload::Eigen {
                report,
                sigma,
                sigma_prime,
                ..
            } => {
                let _ = writeln!(out, "λ_p = {:.9}", report.lambda_p);
                let (lo, hi) = report.lambda_bracket();
                let _ = writeln!(out, "λ_p bracket = [{lo:.12}, {hi:.12}]");
                let _ = writeln!(out, "σ = {sigma:.9}  σ' = {sigma_prime:.9}");
                let _ = writeln!(
                    out,
                    "iterations = {}  residual = {:e}",
                    report.iterations, report.residual
                );
            }
            Payload::Ladder(d) => ladder_lines(&mut out, d),
            Payload::RankOne { diagnostic, root } => {
                ladder_lines(&mut out, diagnostic);
                match root {
                    Some(r) => {
                        let _ = writeln!(out, "λ₁ = {:.9}  F(λ₁) = {:.12}", r.lambda1, r.f_value);
                    }
                    None => {
                        let _ =
                            writeln!(out, "F(λ) = 1 has no root below the pole: criterion fails");
                    }
                }
            }
            Payload::Mp {
                report, clauses, ..
            } => {
                let _ = writeln!(out, "λ_p = {:.9}", report.lambda_p);
                let _ = writeln!(out, "maximum principle: {}", mp_label(report.verdict));
                if let Some(m) = report.battery_min {
                    let _ = writeln!(
                        out,
                        "battery of {}: min solution {m:e}",
                        report.battery_size
                    );
                }
                if let Some(m) = report.inverse_min {
                    let _ = writeln!(out, "interior inverse: min entry {m:e}");
                }
                if let Some(c) = clauses {
                    let _ = writeln!(
                        out,
                        "witness: max interior residual {:e}, min boundary value {:e}, min value {:e}",
                        c.max_interior_residual, c.min_boundary_value, c.min_value
                    );
                }
            }
            Payload::Kpp {
                survival, solution, ..
            } => {
                let _ = writeln!(out, "{}", survival_line(survival));
                let max_p = solution.p.iter().copied().fold(0.0, f64::max);
                let _ = writeln!(
                    out,
                    "steady state: min p = {:.9}  max p = {max_p:.9}  iterations = {}  residual = {:e}",
                    solution.min_p, solution.iterations, solution.residual
                );
            }
            Payload::Evolve { survival, trace } => {
                let _ = writeln!(out, "{}", survival_line(survival));
                let outcome = match trace.classification {
                    Outcome::ConvergedToP => "converged to p",
                    Outcome::ConvergedTo0 => "converged to 0",
                    Outcome::Undecided => "undecided",
                };
                let scheme = match trace.scheme {
                    nonlocal_core::reaction::Scheme::Explicit => "explicit",
                    nonlocal_core::reaction::Scheme::Imex => "imex",
                };
                let _ = writeln!(out, "evolution ({scheme}, dt = {:e}): {outcome}", trace.dt);
            }
            Payload::Exhaustion(t) => {
                for l in &t.levels {
                    let _ = writeln!(
                        out,
                        "R = {:>6}  N = {:>5}  λ_p = {:.12}",
                        l.radius, l.n, l.lambda_p
                    );
                }
                let _ = writeln!(
                    out,
                    "limit ≈ {:.9}  σ = {:.9}  σ' = {:.9}",
                    t.limit, t.sigma, t.sigma_prime
                );
            }
        }
        out.push('\n');
        for v in &self.verdicts {
            let _ = writeln!(out, "{}: {}", v.label, if v.pass { "PASS" } else { "FAIL" });
        }
        out
    }
}

/// Writes `table` as RFC 4180 CSV.
pub fn write_table(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<()> {
    write_table(&report.payload.table(), path)
}

/// Files written for one scenario.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub echo: PathBuf,
}

/// Writes the CSV table, text report and scenario echo under `dir`.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> Result<Artifacts> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |e| CliError::Io { path: p, source: e }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let name = &report.scenario.name;
    let art = Artifacts {
        csv: dir.join(format!("{name}.csv")),
        report: dir.join(format!("{name}.report.txt")),
        echo: dir.join(format!("{name}.echo.toml")),
    };
    emit_csv(report, &art.csv)?;
    if let Some(t) = report.payload.witness_table() {
        write_table(&t, &dir.join(format!("{name}.witness.csv")))?;
    }
    std::fs::write(&art.report, report.text()).map_err(io(&art.report))?;
    let echoed = echo(std::slice::from_ref(&report.scenario))?;
    std::fs::write(&art.echo, echoed).map_err(io(&art.echo))?;
    Ok(art)
}

/// Runs every scenario on a pool of `workers` threads, in input order.
pub fn run_all(
    scenarios: &[ScenarioConfig],
    workers: Option<usize>,
) -> Result<Vec<Result<RunReport>>> {
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| scenarios.par_iter().map(run).collect()))
}
