//! Principal eigenpairs of discretized nonlocal operators.
//!
//! `K + diag(a)` is Metzler, so after the shift `k = ‖a‖∞ + ‖c‖∞ + 1` the
//! matrix `Â = K + diag(a) + kI` is entrywise nonnegative with a positive
//! diagonal. Its Perron root `ρ(Â)` gives `λ_p = k − ρ(Â)`, and every
//! positive iterate yields a certified Collatz–Wielandt bracket on `ρ(Â)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, Domain, Grid, UnboundedLine};
use crate::linalg::{DenseMatrix, Lu};
use crate::operator::{assemble, rank_one_operator, AssemblyOptions, NonlocalOperator};
use crate::profiles::{CoefficientA, ContactProfile, DispersalG, KernelJ};

/// Below this, entries of an iterate count as vanished.
const UNDERFLOW: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Target width of the Collatz–Wielandt bracket.
    pub tol: f64,
    pub max_iter: usize,
    /// Plain power steps before switching to shifted inverse steps.
    pub power_steps: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            power_steps: 400,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub lambda_p: f64,
    /// Perron vector normalized to `max φ = 1`.
    pub eigenvector: Vec<f64>,
    /// Collatz–Wielandt bounds on the shifted radius `ρ(Â)`.
    pub cw_lower: f64,
    pub cw_upper: f64,
    pub iterations: usize,
    /// `‖(K + diag a)φ + λ_p φ‖∞`.
    pub residual: f64,
    pub shift: f64,
    /// Bracket width after each iteration.
    pub history: Vec<f64>,
}

impl EigenReport {
    pub fn bracket_width(&self) -> f64 {
        self.cw_upper - self.cw_lower
    }

    /// Certified interval for `λ_p`.
    pub fn lambda_bracket(&self) -> (f64, f64) {
        (self.shift - self.cw_upper, self.shift - self.cw_lower)
    }
}

/// `(min_i (Âφ)_i/φ_i, max_i (Âφ)_i/φ_i)` for a strictly positive `φ`.
pub fn cw_bracket(mat: &DenseMatrix, phi: &[f64]) -> Result<(f64, f64)> {
    if phi.len() != mat.size() {
        return Err(Error::LengthMismatch {
            expected: mat.size(),
            found: phi.len(),
        });
    }
    if let Some((i, &v)) = phi.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveVector { node: i, value: v });
    }
    let mut y = vec![0.0; phi.len()];
    mat.matvec(phi, &mut y);
    Ok(ratio_bounds(&y, phi))
}

fn ratio_bounds(y: &[f64], phi: &[f64]) -> (f64, f64) {
    y.iter()
        .zip(phi)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            let r = a / b;
            (lo.min(r), hi.max(r))
        })
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0f64, f64::max);
    if m > 0.0 {
        for x in v.iter_mut() {
            *x /= m;
        }
    }
}

struct Shifted<'a> {
    kernel: &'a DenseMatrix,
    diag: Vec<f64>,
}

impl Shifted<'_> {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.kernel.matvec_plus_diag(&self.diag, x, y);
    }

    fn resolvent(&self, mu: f64) -> Result<Lu> {
        let n = self.diag.len();
        let mut m = DenseMatrix::from_fn(n, |i, j| -self.kernel.get(i, j));
        for i in 0..n {
            m.set(i, i, m.get(i, i) + mu - self.diag[i]);
        }
        Lu::new(&m)
    }
}

/// Principal eigenpair of `K + diag(a)` by Collatz–Wielandt-certified
/// iteration on the shifted matrix.
///
/// Plain power steps run first; if the bracket is still wide after
/// `power_steps`, the iteration continues with `(μ − Â)⁻¹` for a shift `μ`
/// just above the certified upper bound, which is again entrywise
/// nonnegative and shares the Perron vector.
pub fn principal_eigenpair(op: &NonlocalOperator, opts: &EigenOptions) -> Result<EigenReport> {
    let m = op.size();
    let a_inf = op.diag().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let c_inf = op.column_mass().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let shift = a_inf + c_inf + 1.0;
    let shifted = Shifted {
        kernel: op.kernel(),
        diag: op.diag().iter().map(|a| a + shift).collect(),
    };

    let mut phi = vec![1.0; m];
    let mut y = vec![0.0; m];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut bracket;

    loop {
        shifted.apply(&phi, &mut y);
        bracket = ratio_bounds(&y, &phi);
        history.push(bracket.1 - bracket.0);
        iterations += 1;
        if bracket.1 - bracket.0 < opts.tol
            || iterations >= opts.max_iter
            || iterations >= opts.power_steps
        {
            break;
        }
        std::mem::swap(&mut phi, &mut y);
        normalize_max(&mut phi);
        check_positive(&phi, iterations, m)?;
    }

    if bracket.1 - bracket.0 >= opts.tol && iterations < opts.max_iter {
        let mut width_at_factor = bracket.1 - bracket.0;
        let mut mu = bracket.1 + width_at_factor.max(1e-13 * bracket.1.abs());
        let mut lu = shifted.resolvent(mu)?;
        loop {
            let mut v = lu.solve(&phi)?;
            for x in v.iter_mut() {
                *x = x.abs();
            }
            normalize_max(&mut v);
            for x in v.iter_mut() {
                *x = x.max(UNDERFLOW);
            }
            shifted.apply(&v, &mut y);
            let b = ratio_bounds(&y, &v);
            iterations += 1;
            history.push(b.1 - b.0);
            phi = v;
            if b.1 - b.0 < bracket.1 - bracket.0 {
                bracket = b;
            }
            if b.1 - b.0 < opts.tol {
                bracket = b;
                break;
            }
            if iterations >= opts.max_iter {
                return Err(Error::NotConverged {
                    iterations,
                    lower: bracket.0,
                    upper: bracket.1,
                });
            }
            if bracket.1 - bracket.0 < 1e-3 * width_at_factor {
                width_at_factor = bracket.1 - bracket.0;
                let next = bracket.1 + width_at_factor.max(1e-13 * bracket.1.abs());
                if let Ok(f) = shifted.resolvent(next) {
                    lu = f;
                    mu = next;
                }
            }
            let _ = mu;
        }
    } else if bracket.1 - bracket.0 >= opts.tol {
        return Err(Error::NotConverged {
            iterations,
            lower: bracket.0,
            upper: bracket.1,
        });
    }

    normalize_max(&mut phi);
    check_positive(&phi, iterations, m)?;
    let rho = 0.5 * (bracket.0 + bracket.1);
    let lambda_p = shift - rho;
    op.apply(&phi, &mut y);
    let residual = y
        .iter()
        .zip(&phi)
        .fold(0.0f64, |r, (ay, p)| r.max((ay + lambda_p * p).abs()));

    Ok(EigenReport {
        lambda_p,
        eigenvector: phi,
        cw_lower: bracket.0,
        cw_upper: bracket.1,
        iterations,
        residual,
        shift,
        history,
    })
}

fn check_positive(phi: &[f64], iterations: usize, m: usize) -> Result<()> {
    // Entries decay geometrically before they underflow; give them time.
    if iterations < m.min(50) {
        return Ok(());
    }
    match phi.iter().position(|&v| !(v > UNDERFLOW)) {
        Some(node) => Err(Error::Reducible { node }),
        None => Ok(()),
    }
}

/// `sup φ / ∫ φ dμ`.
pub fn concentration_ratio(op: &NonlocalOperator, phi: &[f64]) -> f64 {
    let sup = phi.iter().copied().fold(0.0f64, f64::max);
    let mass: f64 = phi
        .iter()
        .zip(op.measure().values())
        .map(|(p, w)| p * w)
        .sum();
    sup / mass
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    pub tol: f64,
    /// Roots closer than `pole_guard · h` to the pole at `−σ̄` are treated
    /// as grid artefacts of the maximizing nodes.
    pub pole_guard: f64,
    pub max_iter: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            pole_guard: 10.0,
            max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneRoot {
    pub lambda1: f64,
    pub f_value: f64,
    /// `φ_λ₁ = c₀ / (−λ₁ − ā)` at the nodes.
    pub phi: Vec<f64>,
    pub iterations: usize,
}

/// Solves `F(λ) = c₀ ∫_ω dμ / (−λ − ā) = 1` for `λ < −σ̄` by bisection.
pub fn rank_one_bisection(
    grid: &Grid,
    a: &CoefficientA,
    c0: f64,
    opts: &BisectionOptions,
) -> Result<RankOneRoot> {
    if !(c0 > 0.0) {
        return Err(Error::Precondition(format!(
            "c0 must be positive, got {c0}"
        )));
    }
    let abar = grid.sample(|x| a.eval(x));
    let w = grid.weights();
    let sigma = abar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = |lambda: f64| -> f64 {
        c0 * abar
            .iter()
            .zip(w)
            .map(|(ai, wi)| wi / (-lambda - ai))
            .sum::<f64>()
    };

    let mut hi = -sigma - opts.pole_guard * grid.h();
    let f_hi = f(hi);
    if f_hi <= 1.0 {
        return Err(Error::CriterionFailure { f_at_guard: f_hi });
    }
    let volume: f64 = w.iter().sum();
    let mut lo = -sigma - (2.0 * c0 * volume).max(1.0);

    let mut iterations = 0;
    let (mut lambda, mut value) = (hi, f_hi);
    while iterations < opts.max_iter {
        iterations += 1;
        lambda = 0.5 * (lo + hi);
        value = f(lambda);
        if (value - 1.0).abs() <= opts.tol || hi - lo <= f64::EPSILON * lambda.abs() {
            break;
        }
        if value > 1.0 {
            hi = lambda;
        } else {
            lo = lambda;
        }
    }
    let phi = abar.iter().map(|ai| c0 / (-lambda - ai)).collect();
    Ok(RankOneRoot {
        lambda1: lambda,
        f_value: value,
        phi,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrability {
    /// `1/(σ − a) ∉ L¹` near the maximum set.
    NonIntegrable,
    Integrable,
    /// `a ≡ σ` on an open set.
    Plateau,
}

/// Classifies `1/(σ − a)` near the maximum set from the declared contact profile.
///
/// For `σ − a ~ c·d^γ` in dimension `n`, `∫ r^{n−1−γ} dr` diverges at 0
/// exactly when `γ ≥ n`.
pub fn integrability_classifier(a: &CoefficientA, n: usize) -> Result<Integrability> {
    match a.contact() {
        Some(ContactProfile::Plateau { .. }) => Ok(Integrability::Plateau),
        Some(ContactProfile::Power { gamma, .. }) => Ok(if *gamma >= n as f64 {
            Integrability::NonIntegrable
        } else {
            Integrability::Integrable
        }),
        None => Err(Error::InvalidProfile(
            "coefficient carries no contact-profile metadata".into(),
        )),
    }
}

/// Everything needed to rebuild the operator at any resolution.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Domain,
    pub kernel: KernelJ,
    pub dispersal: DispersalG,
    pub coefficient: CoefficientA,
    /// `Some(ρ)` selects the rank-one surrogate instead of the kernel.
    pub surrogate: Option<f64>,
    pub assembly: AssemblyOptions,
}

impl Problem {
    pub fn operator(&self, n: usize) -> Result<NonlocalOperator> {
        let grid = build_grid(&self.domain, n)?;
        match self.surrogate {
            Some(rho) => rank_one_operator(&grid, rho, &self.coefficient),
            None => assemble(
                &grid,
                &self.kernel,
                &self.dispersal,
                &self.coefficient,
                &self.assembly,
            ),
        }
    }
}

/// Relative change in the concentration ratio tolerated for a stable level.
pub const STABLE_RATIO_TOL: f64 = 0.10;
/// Relative change in `−σ − λ_p` tolerated for a stable level.
pub const STABLE_GAP_TOL: f64 = 0.20;
/// Per-doubling growth of the concentration ratio that signals a point mass.
pub const DEGENERATE_GROWTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExistenceVerdict {
    EigenfunctionExists,
    Degenerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderLevel {
    pub n: usize,
    pub h: f64,
    pub lambda_p: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    pub concentration_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceDiagnostic {
    pub levels: Vec<LadderLevel>,
    /// The `σ` gaps are measured against (declared supremum when known).
    pub sigma_ref: f64,
    pub verdict: ExistenceVerdict,
}

impl ExistenceDiagnostic {
    pub fn gaps(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| -self.sigma_ref - l.lambda_p)
            .collect()
    }

    pub fn growth_factors(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| w[1].concentration_ratio / w[0].concentration_ratio)
            .collect()
    }
}

/// Refinement study of `λ_p` and the concentration ratio.
pub fn existence_diagnostic(
    problem: &Problem,
    ladder: &[usize],
    opts: &EigenOptions,
) -> Result<ExistenceDiagnostic> {
    if ladder.len() < 4 {
        return Err(Error::Precondition(format!(
            "the ladder needs at least 4 levels, got {}",
            ladder.len()
        )));
    }
    if ladder
        .windows(2)
        .any(|w| w[1] != 2 * w[0] && w[1] + 1 != 2 * w[0])
    {
        return Err(Error::Precondition(
            "ladder levels must double N (N -> 2N or 2N - 1)".into(),
        ));
    }
    let mut levels = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let op = problem.operator(n)?;
        let eig = principal_eigenpair(&op, opts)?;
        levels.push(LadderLevel {
            n,
            h: op.grid().h(),
            lambda_p: eig.lambda_p,
            sigma: op.sigma(),
            sigma_prime: op.sigma_prime(),
            concentration_ratio: concentration_ratio(&op, &eig.eigenvector),
        });
    }
    let sigma_ref = problem
        .coefficient
        .sigma()
        .unwrap_or_else(|| levels.last().map(|l| l.sigma).unwrap_or(0.0));
    let mut diag = ExistenceDiagnostic {
        levels,
        sigma_ref,
        verdict: ExistenceVerdict::Inconclusive,
    };
    diag.verdict = classify_ladder(&diag);
    Ok(diag)
}

fn classify_ladder(d: &ExistenceDiagnostic) -> ExistenceVerdict {
    let growth = d.growth_factors();
    let gaps = d.gaps();
    let k = gaps.len();
    let last_growth = growth[growth.len() - 1];
    let (g_prev, g_last) = (gaps[k - 2], gaps[k - 1]);

    let ratio_stable = (last_growth - 1.0).abs() <= STABLE_RATIO_TOL;
    let gap_stable = g_last > 0.0 && (g_last - g_prev).abs() <= STABLE_GAP_TOL * g_last;
    if ratio_stable && gap_stable {
        return ExistenceVerdict::EigenfunctionExists;
    }
    let concentrating = growth.iter().all(|&f| f >= DEGENERATE_GROWTH);
    // Discrete gaps may approach zero from either side.
    let closing =
        gaps.windows(2).all(|w| w[1].abs() < w[0].abs()) && g_last.abs() < 0.5 * gaps[0].abs();
    if concentrating && closing {
        return ExistenceVerdict::Degenerate;
    }
    ExistenceVerdict::Inconclusive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionLevel {
    pub radius: f64,
    pub n: usize,
    pub lambda_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionTable {
    pub levels: Vec<ExhaustionLevel>,
    pub limit: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
    /// `−σ′ < limit < −σ` on the largest truncation.
    pub within_bracket: bool,
}

/// Slack allowed in the monotonicity of `λ_{p,k}`.
pub const EXHAUSTION_SLACK: f64 = 1e-10;

/// `λ_p` on the nested truncations `(−R_k, R_k)` at fixed spacing `h`.
#[allow(clippy::too_many_arguments)]
pub fn exhaustion_lambda(
    unbounded: &UnboundedLine,
    j: &KernelJ,
    g: &DispersalG,
    a: &CoefficientA,
    m: usize,
    h: f64,
    assembly: &AssemblyOptions,
    opts: &EigenOptions,
) -> Result<ExhaustionTable> {
    let domains = crate::grid::exhaustion_sequence(unbounded, m)?;
    let mut levels: Vec<ExhaustionLevel> = Vec::with_capacity(m);
    let mut last_op = None;
    for d in &domains {
        let cells = d.side(0) / h;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::Precondition(format!(
                "side {} is not a multiple of h = {h}",
                d.side(0)
            )));
        }
        let n = cells.round() as usize + 1;
        let grid = build_grid(d, n)?;
        let op = assemble(&grid, j, g, a, assembly)?;
        let eig = principal_eigenpair(&op, opts)?;
        if let Some(prev) = levels.last() {
            if eig.lambda_p > prev.lambda_p + EXHAUSTION_SLACK {
                return Err(Error::NumericalInconsistency(format!(
                    "lambda_p increased from {} to {} between R = {} and R = {}",
                    prev.lambda_p,
                    eig.lambda_p,
                    prev.radius,
                    d.upper()[0]
                )));
            }
        }
        levels.push(ExhaustionLevel {
            radius: d.upper()[0],
            n,
            lambda_p: eig.lambda_p,
        });
        last_op = Some(op);
    }
    let op = last_op.expect("at least two levels");
    let limit = levels.last().map(|l| l.lambda_p).unwrap_or(f64::NAN);
    let sigma = a.sigma().unwrap_or_else(|| op.sigma());
    let sigma_prime = op.sigma_prime();
    Ok(ExhaustionTable {
        levels,
        limit,
        sigma,
        sigma_prime,
        within_bracket: -sigma_prime < limit && limit < -sigma,
    })
}

/// `max φ / min φ` over the nodes of a sub-box compactly inside the domain.
pub fn harnack_ratio(op: &NonlocalOperator, phi: &[f64], sub: &Domain) -> Result<f64> {
    let grid = op.grid();
    let domain = grid.domain();
    let inside = if domain.is_torus() {
        domain.contains_domain(sub)
    } else {
        domain.strictly_contains(sub)
    };
    if !inside {
        return Err(Error::Precondition(
            "the sub-box must be compactly contained in the domain".into(),
        ));
    }
    if phi.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: phi.len(),
        });
    }
    let idx = grid.nodes_in(sub);
    if idx.is_empty() {
        return Err(Error::Precondition("no grid nodes in the sub-box".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &i in &idx {
        if !(phi[i] > 0.0) {
            return Err(Error::NonPositiveVector {
                node: i,
                value: phi[i],
            });
        }
        lo = lo.min(phi[i]);
        hi = hi.max(phi[i]);
    }
    Ok(hi / lo)
}
