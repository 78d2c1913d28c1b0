//! KPP problem `M[u] + f(x, u) = 0` and its evolution.
//!
//! The operator passed in carries `a = −b` on its diagonal; the reaction is
//! kept separate and linearized as `f_u(x, 0)` where needed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{sup_dist, sup_norm, Lu};
use crate::operator::NonlocalOperator;
use crate::profiles::{CoefficientA, Field};
use crate::spectral::{principal_eigenpair, EigenOptions};

pub type ReactionFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Bound on `|f_u(x, u)|` for `u ∈ [0, U]`, as a function of `U`.
pub type LipschitzFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `|λ_p|` at or below this gives a borderline survival verdict.
pub const BORDERLINE_TOL: f64 = 1e-9;
/// Allowed backward step of a monotone iterate.
pub const MONOTONE_SLACK: f64 = 1e-11;
/// Subsolution residual slack.
pub const SUBSOLUTION_SLACK: f64 = 1e-10;
pub const POSITIVITY_SLACK: f64 = 1e-8;

#[derive(Clone)]
pub struct KppNonlinearity {
    f: ReactionFn,
    fu0: Field,
    saturation: f64,
    lipschitz: LipschitzFn,
    label: String,
}

impl fmt::Debug for KppNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KppNonlinearity")
            .field("label", &self.label)
            .field("saturation", &self.saturation)
            .finish()
    }
}

impl KppNonlinearity {
    /// `f(x, u) = u(μ(x) − u)` with saturation `M = max(sup μ, 1)`.
    pub fn logistic(mu: CoefficientA, grid: &Grid) -> Result<Self> {
        let samples = grid.sample(|x| mu.eval(x));
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: i });
        }
        let sup = mu
            .sigma()
            .unwrap_or_else(|| samples.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let sup_abs = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let label = format!("logistic({})", mu.label());
        let mu_f = mu.clone();
        let mu_d = mu;
        Ok(Self {
            f: Arc::new(move |x, u| u * (mu_f.eval(x) - u)),
            fu0: Arc::new(move |x| mu_d.eval(x)),
            saturation: sup.max(1.0),
            lipschitz: Arc::new(move |u_max| sup_abs + 2.0 * u_max),
            label,
        })
    }

    pub fn custom(
        f: ReactionFn,
        fu0: Field,
        saturation: f64,
        lipschitz: LipschitzFn,
    ) -> Result<Self> {
        if !(saturation > 0.0 && saturation.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "saturation bound must be positive, got {saturation}"
            )));
        }
        Ok(Self {
            f,
            fu0,
            saturation,
            lipschitz,
            label: "custom".into(),
        })
    }

    pub fn eval(&self, x: &[f64], u: f64) -> f64 {
        (self.f)(x, u)
    }

    pub fn derivative_at_zero(&self, x: &[f64]) -> f64 {
        (self.fu0)(x)
    }

    pub fn saturation(&self) -> f64 {
        self.saturation
    }

    pub fn lipschitz_on(&self, u_max: f64) -> f64 {
        (self.lipschitz)(u_max)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Samples the KPP hypotheses at every node.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let m = self.saturation;
        let levels: Vec<f64> = (0..24).map(|k| 2.0 * m * 0.5f64.powi(k)).collect();
        for (i, x) in grid.nodes().enumerate() {
            let f0 = self.eval(x, 0.0);
            if f0 != 0.0 {
                return Err(Error::InvalidProfile(format!("f(x, 0) = {f0} at node {i}")));
            }
            for u in [m, 2.0 * m] {
                let v = self.eval(x, u);
                if !(v <= 0.0) {
                    return Err(Error::InvalidProfile(format!(
                        "f(x, {u}) = {v} > 0 at node {i}; saturation bound is wrong"
                    )));
                }
            }
            // levels run downward, so f(u)/u must not decrease along them.
            let mut prev = f64::NEG_INFINITY;
            for &u in &levels {
                let r = self.eval(x, u) / u;
                if r < prev - 1e-10 {
                    return Err(Error::InvalidProfile(format!(
                        "f(x, u)/u is not decreasing at node {i} near u = {u}"
                    )));
                }
                prev = r;
            }
        }
        Ok(())
    }

    fn nodal(&self, grid: &Grid, u: &[f64], out: &mut [f64]) {
        for (i, x) in grid.nodes().enumerate() {
            out[i] = self.eval(x, u[i]);
        }
    }
}

/// `M + f_u(·, 0)`.
pub fn linearization(op: &NonlocalOperator, f: &KppNonlinearity) -> Result<NonlocalOperator> {
    let diag = op
        .diag()
        .iter()
        .zip(op.grid().nodes())
        .map(|(a, x)| a + f.derivative_at_zero(x))
        .collect();
    op.with_diagonal(diag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivalVerdict {
    Persistence,
    Extinction,
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub lambda_p: f64,
    pub verdict: SurvivalVerdict,
    /// Whether the departure term satisfies `a ≤ 0` at every node.
    pub a_nonpositive: bool,
}

pub fn survival_criterion(op: &NonlocalOperator, f: &KppNonlinearity) -> Result<SurvivalReport> {
    let lin = linearization(op, f)?;
    let eig = principal_eigenpair(&lin, &EigenOptions::default())?;
    let lambda_p = eig.lambda_p;
    let verdict = if lambda_p < -BORDERLINE_TOL {
        SurvivalVerdict::Persistence
    } else if lambda_p > BORDERLINE_TOL {
        SurvivalVerdict::Extinction
    } else {
        SurvivalVerdict::Borderline
    };
    Ok(SurvivalReport {
        lambda_p,
        verdict,
        a_nonpositive: op.diag().iter().all(|&a| a <= 0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subsolution {
    pub values: Vec<f64>,
    pub epsilon: f64,
    /// Radius of the bump that lifts the coefficient to its maximum.
    pub radius: f64,
    pub lambda_n: f64,
}

fn bump(r: f64, radius: f64) -> f64 {
    let s = r / radius;
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `εφ_n` with `φ_n` the Perron vector of the linearization whose coefficient
/// is lifted to its maximum on a bump of radius `1/n` around the arg-max.
pub fn build_subsolution(
    op: &NonlocalOperator,
    f: &KppNonlinearity,
    n: usize,
    epsilon: f64,
) -> Result<Subsolution> {
    if n == 0 {
        return Err(Error::Precondition(
            "perturbation index must be >= 1".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let lin = linearization(op, f)?;
    let base = principal_eigenpair(&lin, &EigenOptions::default())?;
    if base.lambda_p >= -BORDERLINE_TOL {
        return Err(Error::Precondition(format!(
            "a positive subsolution needs lambda_p < 0, got {}",
            base.lambda_p
        )));
    }
    let grid = op.grid();
    let domain = grid.domain();
    let a = lin.diag();
    let sigma = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let centre = grid.node(lin.argmax_nodes()[0]).to_vec();
    let len = grid.len();
    let mut mu = vec![0.0; len];
    let mut fu = vec![0.0; len];

    let mut radius = 1.0 / n as f64;
    for _ in 0..12 {
        let diag: Vec<f64> = grid
            .nodes()
            .zip(a)
            .map(|(x, &ai)| ai + bump(domain.distance(x, &centre), radius) * (sigma - ai))
            .collect();
        let eig = principal_eigenpair(&lin.with_diagonal(diag)?, &EigenOptions::default())?;
        let mut eps = epsilon;
        for _ in 0..=40 {
            let u: Vec<f64> = eig.eigenvector.iter().map(|p| eps * p).collect();
            op.apply(&u, &mut mu);
            f.nodal(grid, &u, &mut fu);
            let worst = mu
                .iter()
                .zip(&fu)
                .fold(f64::INFINITY, |m, (a, b)| m.min(a + b));
            if worst >= -SUBSOLUTION_SLACK {
                return Ok(Subsolution {
                    values: u,
                    epsilon: eps,
                    radius,
                    lambda_n: eig.lambda_p,
                });
            }
            eps *= 0.5;
        }
        radius *= 0.5;
    }
    Err(Error::Subsolution(format!(
        "no epsilon <= {epsilon} gives a subsolution; lambda_p = {} may be too close to 0 at h = {}",
        base.lambda_p,
        grid.h()
    )))
}

/// Constant supersolution `2M`, doubled until `M[s] + f(s) ≤ 0` at every node.
pub fn default_supersolution(op: &NonlocalOperator, f: &KppNonlinearity) -> Result<Vec<f64>> {
    let grid = op.grid();
    let len = grid.len();
    let mut level = 2.0 * f.saturation();
    let mut mu = vec![0.0; len];
    let mut fu = vec![0.0; len];
    for _ in 0..60 {
        let s = vec![level; len];
        op.apply(&s, &mut mu);
        f.nodal(grid, &s, &mut fu);
        if mu.iter().zip(&fu).all(|(a, b)| a + b <= 0.0) {
            return Ok(s);
        }
        level *= 2.0;
    }
    Err(Error::Precondition(
        "no constant supersolution found; check the saturation bound".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Resolvent shift; computed from the bracket when absent.
    pub k: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            k: None,
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Non-decreasing iterates from the subsolution.
    Up,
    /// Non-increasing iterates from the supersolution (used when the
    /// subsolution is identically zero).
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KppSolution {
    pub p: Vec<f64>,
    pub iterations: usize,
    pub monotone: bool,
    pub direction: Direction,
    pub residual: f64,
    pub trivial: bool,
    pub min_p: f64,
    pub k: f64,
}

/// `k = ‖b‖∞ + ‖c‖∞ + Lip(f on [0, sup]) + 1`.
pub fn auto_shift(op: &NonlocalOperator, f: &KppNonlinearity, u_max: f64) -> f64 {
    sup_norm(op.diag()) + sup_norm(op.column_mass()) + f.lipschitz_on(u_max) + 1.0
}

fn residual(op: &NonlocalOperator, f: &KppNonlinearity, u: &[f64], scratch: &mut [f64]) -> f64 {
    let mut fu = vec![0.0; u.len()];
    op.apply(u, scratch);
    f.nodal(op.grid(), u, &mut fu);
    scratch
        .iter()
        .zip(&fu)
        .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()))
}

/// Monotone iteration `(kI − A)u_{m+1} = k u_m + f(·, u_m)` between an
/// ordered sub/supersolution pair.
pub fn steady_state(
    op: &NonlocalOperator,
    f: &KppNonlinearity,
    sub: &[f64],
    sup: &[f64],
    opts: &SteadyOptions,
) -> Result<KppSolution> {
    let len = op.size();
    for v in [sub, sup] {
        if v.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: v.len(),
            });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { node: i });
        }
    }
    if let Some(i) = (0..len).find(|&i| sub[i] > sup[i]) {
        return Err(Error::Precondition(format!(
            "sub exceeds sup at node {i}: {} > {}",
            sub[i], sup[i]
        )));
    }
    if let Some(i) = sub.iter().position(|&v| v < 0.0) {
        return Err(Error::Precondition(format!("sub is negative at node {i}")));
    }

    let u_max = sup_norm(sup);
    let k = opts.k.unwrap_or_else(|| auto_shift(op, f, u_max));
    if !(k > 0.0) {
        return Err(Error::Precondition(format!("k must be positive, got {k}")));
    }
    let mut resolvent = op.matrix();
    for i in 0..len {
        for j in 0..len {
            resolvent.set(i, j, -resolvent.get(i, j));
        }
        resolvent.set(i, i, resolvent.get(i, i) + k);
    }
    let lu = Lu::new(&resolvent)
        .map_err(|e| Error::Singular(format!("kI - A is not invertible for k = {k}: {e}")))?;

    let direction = if sup_norm(sub) == 0.0 {
        Direction::Down
    } else {
        Direction::Up
    };
    let mut u = match direction {
        Direction::Up => sub.to_vec(),
        Direction::Down => sup.to_vec(),
    };
    let mut fu = vec![0.0; len];
    let mut scratch = vec![0.0; len];
    let grid = op.grid();

    for step in 1..=opts.max_iter {
        f.nodal(grid, &u, &mut fu);
        let rhs: Vec<f64> = u.iter().zip(&fu).map(|(ui, fi)| k * ui + fi).collect();
        let next = lu.solve(&rhs)?;
        for i in 0..len {
            let slack = MONOTONE_SLACK * (1.0 + u[i].abs());
            let bad = match direction {
                Direction::Up => next[i] < u[i] - slack || next[i] > sup[i] + slack,
                Direction::Down => next[i] > u[i] + slack || next[i] < sub[i] - slack,
            };
            if bad {
                return Err(Error::Monotonicity {
                    step,
                    detail: format!(
                        "node {i}: {} -> {} with bracket [{}, {}]; increase k above {k}",
                        u[i], next[i], sub[i], sup[i]
                    ),
                });
            }
        }
        let change = sup_dist(&next, &u);
        u = next;
        if change < opts.tol {
            let r = residual(op, f, &u, &mut scratch);
            if r <= opts.tol {
                let min_p = u.iter().copied().fold(f64::INFINITY, f64::min);
                return Ok(KppSolution {
                    trivial: sup_norm(&u) <= 10.0 * opts.tol,
                    p: u,
                    iterations: step,
                    monotone: true,
                    direction,
                    residual: r,
                    min_p,
                    k,
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        lower: u.iter().copied().fold(f64::INFINITY, f64::min),
        upper: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Largest pairwise distance between steady states from several brackets.
pub fn uniqueness_check(
    op: &NonlocalOperator,
    f: &KppNonlinearity,
    trials: &[(Vec<f64>, Vec<f64>)],
    opts: &SteadyOptions,
) -> Result<f64> {
    if trials.len() < 2 {
        return Err(Error::Precondition(
            "uniqueness needs at least two brackets".into(),
        ));
    }
    let sols = trials
        .iter()
        .map(|(lo, hi)| steady_state(op, f, lo, hi, opts).map(|s| s.p))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            worst = worst.max(sup_dist(&sols[i], &sols[j]));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    Imex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub scheme: Scheme,
    /// Defaults to the explicit stability bound.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub checkpoints: usize,
    /// Classification threshold.
    pub tol: f64,
    /// Candidate limit; solved for when absent.
    pub limit: Option<Vec<f64>>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Explicit,
            dt: None,
            t_final: 200.0,
            checkpoints: 10,
            tol: 1e-6,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ConvergedToP,
    ConvergedTo0,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub sup_dist_to_p: Vec<f64>,
    pub sup_dist_to_0: Vec<f64>,
    pub min_u: Vec<f64>,
    pub max_u: Vec<f64>,
    pub classification: Outcome,
    pub final_state: Vec<f64>,
    pub limit: Vec<f64>,
    pub dt: f64,
    pub scheme: Scheme,
}

pub fn stable_dt(op: &NonlocalOperator, f: &KppNonlinearity, u_max: f64) -> f64 {
    1.0 / (sup_norm(op.diag()) + sup_norm(op.column_mass()) + f.lipschitz_on(u_max))
}

/// Integrates `∂ₜu = M[u] + f(·, u)` and classifies the long-time limit.
pub fn evolve(
    op: &NonlocalOperator,
    f: &KppNonlinearity,
    u0: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    let len = op.size();
    if u0.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: u0.len(),
        });
    }
    if let Some(i) = u0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { node: i });
    }
    if let Some(i) = u0.iter().position(|&x| x < 0.0) {
        return Err(Error::Precondition(format!("u0 is negative at node {i}")));
    }
    if sup_norm(u0) == 0.0 {
        return Err(Error::Precondition("u0 must not vanish identically".into()));
    }
    if !(opts.t_final > 0.0) || opts.checkpoints == 0 {
        return Err(Error::Precondition(
            "evolution needs T > 0 and at least one checkpoint".into(),
        ));
    }

    let limit = match &opts.limit {
        Some(p) if p.len() == len => p.clone(),
        Some(p) => {
            return Err(Error::LengthMismatch {
                expected: len,
                found: p.len(),
            })
        }
        None => {
            let mut sup = default_supersolution(op, f)?;
            let top = sup_norm(u0);
            if top > sup[0] {
                sup.iter_mut().for_each(|s| *s = top);
            }
            steady_state(op, f, &vec![0.0; len], &sup, &SteadyOptions::default())?.p
        }
    };

    let u_bound = sup_norm(u0).max(f.saturation());
    let dt_max = stable_dt(op, f, u_bound);
    let dt_req = opts.dt.unwrap_or(dt_max);
    if !(dt_req > 0.0) {
        return Err(Error::Precondition(format!(
            "dt must be positive, got {dt_req}"
        )));
    }
    let steps_per_cp = ((opts.t_final / opts.checkpoints as f64) / dt_req)
        .ceil()
        .max(1.0) as usize;
    let dt = opts.t_final / (steps_per_cp * opts.checkpoints) as f64;

    let imex = match opts.scheme {
        Scheme::Explicit => None,
        Scheme::Imex => {
            let mut m = op.matrix();
            for i in 0..len {
                for j in 0..len {
                    m.set(i, j, -dt * m.get(i, j));
                }
                m.set(i, i, m.get(i, i) + 1.0);
            }
            Some(Lu::new(&m)?)
        }
    };

    let grid = op.grid();
    let mut u = u0.to_vec();
    let mut au = vec![0.0; len];
    let mut fu = vec![0.0; len];
    let zero = vec![0.0; len];
    let mut trace = EvolutionTrace {
        times: Vec::with_capacity(opts.checkpoints),
        sup_dist_to_p: Vec::with_capacity(opts.checkpoints),
        sup_dist_to_0: Vec::with_capacity(opts.checkpoints),
        min_u: Vec::with_capacity(opts.checkpoints),
        max_u: Vec::with_capacity(opts.checkpoints),
        classification: Outcome::Undecided,
        final_state: Vec::new(),
        limit,
        dt,
        scheme: opts.scheme,
    };

    for cp in 1..=opts.checkpoints {
        for s in 0..steps_per_cp {
            f.nodal(grid, &u, &mut fu);
            match &imex {
                None => {
                    op.apply(&u, &mut au);
                    for i in 0..len {
                        u[i] += dt * (au[i] + fu[i]);
                    }
                }
                Some(lu) => {
                    let rhs: Vec<f64> = u.iter().zip(&fu).map(|(a, b)| a + dt * b).collect();
                    u = lu.solve(&rhs)?;
                }
            }
            let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
            if min_u < -POSITIVITY_SLACK || !min_u.is_finite() {
                return Err(Error::Stability {
                    t: ((cp - 1) * steps_per_cp + s + 1) as f64 * dt,
                    min_u,
                });
            }
        }
        trace
            .times
            .push(opts.t_final * cp as f64 / opts.checkpoints as f64);
        trace.sup_dist_to_p.push(sup_dist(&u, &trace.limit));
        trace.sup_dist_to_0.push(sup_dist(&u, &zero));
        trace
            .min_u
            .push(u.iter().copied().fold(f64::INFINITY, f64::min));
        trace
            .max_u
            .push(u.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }

    let to_p = *trace.sup_dist_to_p.last().unwrap();
    let to_0 = *trace.sup_dist_to_0.last().unwrap();
    let p_trivial = sup_norm(&trace.limit) < opts.tol;
    trace.classification = if to_0 < opts.tol {
        Outcome::ConvergedTo0
    } else if to_p < opts.tol && !p_trivial {
        Outcome::ConvergedToP
    } else {
        Outcome::Undecided
    };
    trace.final_state = u;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Domain};
    use crate::operator::{assemble, AssemblyOptions};
    use crate::profiles::{DispersalG, KernelJ, KernelShape};

    fn torus(b: f64, n: usize) -> NonlocalOperator {
        let grid = build_grid(&Domain::torus_interval(0.0, 1.0).unwrap(), n).unwrap();
        let j = KernelJ::new(KernelShape::Uniform, 0.25, 1.0, 1).unwrap();
        let g = DispersalG::constant(1.0).unwrap();
        assemble(
            &grid,
            &j,
            &g,
            &CoefficientA::constant(-b),
            &AssemblyOptions::default(),
        )
        .unwrap()
    }

    fn logistic(op: &NonlocalOperator, mu: f64) -> KppNonlinearity {
        KppNonlinearity::logistic(CoefficientA::constant(mu), op.grid()).unwrap()
    }

    #[test]
    fn survival_examples() {
        let op = torus(1.0, 32);
        let cases = [
            (0.4, -0.4, SurvivalVerdict::Persistence),
            (-0.2, 0.2, SurvivalVerdict::Extinction),
            (0.0, 0.0, SurvivalVerdict::Borderline),
        ];
        for (mu, lam, verdict) in cases {
            let r = survival_criterion(&op, &logistic(&op, mu)).unwrap();
            assert!((r.lambda_p - lam).abs() < 1e-9, "{mu}: {}", r.lambda_p);
            assert_eq!(r.verdict, verdict);
            assert!(r.a_nonpositive);
        }
    }

    #[test]
    fn validation_catches_bad_saturation() {
        let op = torus(1.0, 16);
        assert!(logistic(&op, 0.4).validate(op.grid()).is_ok());
        let bad = KppNonlinearity::custom(
            Arc::new(|_, u| u * (3.0 - u)),
            Arc::new(|_| 3.0),
            1.0,
            Arc::new(|m| 3.0 + 2.0 * m),
        )
        .unwrap();
        assert!(bad.validate(op.grid()).is_err());
    }

    #[test]
    fn torus_subsolution() {
        let op = torus(1.0, 32);
        let f = logistic(&op, 0.4);
        let s = build_subsolution(&op, &f, 4, 0.01).unwrap();
        assert_eq!(s.epsilon, 0.01);
        assert!(s.values.iter().all(|&v| (v - 0.01).abs() < 1e-9));
        assert!(build_subsolution(&op, &logistic(&op, -0.2), 4, 0.01).is_err());
    }

    #[test]
    fn torus_steady_state_from_several_brackets() {
        let op = torus(1.0, 32);
        let f = logistic(&op, 0.4);
        let n = op.size();
        let opts = SteadyOptions::default();
        for lo in [0.01, 0.3] {
            let s = steady_state(&op, &f, &vec![lo; n], &vec![1.0; n], &opts).unwrap();
            assert!(s.p.iter().all(|&p| (p - 0.4).abs() < 1e-8));
            assert_eq!(s.direction, Direction::Up);
            assert!(!s.trivial);
        }
        let trials = vec![
            (vec![0.01; n], vec![1.0; n]),
            (vec![0.3; n], vec![2.0; n]),
            (vec![0.05; n], vec![5.0; n]),
        ];
        assert!(uniqueness_check(&op, &f, &trials, &opts).unwrap() <= 1e-8);
        assert!(uniqueness_check(&op, &f, &trials[..1], &opts).is_err());
    }

    #[test]
    fn extinction_runs_downward() {
        let op = torus(1.0, 32);
        let f = logistic(&op, -0.2);
        let n = op.size();
        let s = steady_state(
            &op,
            &f,
            &vec![0.0; n],
            &vec![1.0; n],
            &SteadyOptions::default(),
        )
        .unwrap();
        assert_eq!(s.direction, Direction::Down);
        assert!(s.trivial);
        assert!(sup_norm(&s.p) < 1e-9);
    }

    #[test]
    fn small_k_breaks_monotonicity() {
        let op = torus(1.0, 32);
        let f = logistic(&op, 0.4);
        let n = op.size();
        let opts = SteadyOptions {
            k: Some(0.05),
            ..SteadyOptions::default()
        };
        let r = steady_state(&op, &f, &vec![0.01; n], &vec![5.0; n], &opts);
        assert!(matches!(
            r,
            Err(Error::Monotonicity { .. }) | Err(Error::Singular(_))
        ));
    }

    #[test]
    fn evolution_examples() {
        let op = torus(1.0, 32);
        let n = op.size();
        let t = evolve(
            &op,
            &logistic(&op, 0.4),
            &vec![0.1; n],
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_eq!(t.classification, Outcome::ConvergedToP);
        assert!(*t.sup_dist_to_p.last().unwrap() < 1e-6);
        assert_eq!(t.times.len(), 10);

        let t = evolve(
            &op,
            &logistic(&op, -0.2),
            &vec![0.5; n],
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_eq!(t.classification, Outcome::ConvergedTo0);

        assert!(evolve(
            &op,
            &logistic(&op, 0.4),
            &vec![0.0; n],
            &EvolveOptions::default()
        )
        .is_err());
    }

    #[test]
    fn imex_matches_explicit() {
        let op = torus(1.0, 32);
        let f = logistic(&op, 0.4);
        let n = op.size();
        let opts = EvolveOptions {
            scheme: Scheme::Imex,
            dt: Some(0.5),
            ..EvolveOptions::default()
        };
        let t = evolve(&op, &f, &vec![0.1; n], &opts).unwrap();
        assert_eq!(t.classification, Outcome::ConvergedToP);
    }

    #[test]
    fn oversized_step_is_a_stability_error() {
        let op = torus(1.0, 32);
        let f = logistic(&op, 0.4);
        let n = op.size();
        let opts = EvolveOptions {
            dt: Some(5.0),
            t_final: 50.0,
            ..EvolveOptions::default()
        };
        assert!(matches!(
            evolve(&op, &f, &vec![3.0; n], &opts),
            Err(Error::Stability { .. })
        ));
    }
}
