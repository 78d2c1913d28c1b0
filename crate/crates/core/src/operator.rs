//! Nyström discretization of `M_Ω[u] = ∫_Ω J((x−y)/g(y)) u(y)/gⁿ(y) dy + a(x)u`
//! and the structural constants derived from the kernel.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, MeasureWeights};
use crate::linalg::DenseMatrix;
use crate::profiles::{CoefficientA, DispersalG, KernelJ};

pub const DEFAULT_G_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Rescale kernel columns to their continuum mass. `None` picks the
    /// geometry default: on for tori, off for bounded boxes.
    pub renormalize: Option<bool>,
    pub g_floor: f64,
    /// Allow degenerate `g` by dropping columns where `g < g_floor`.
    pub exclude_degenerate: bool,
    /// `None` picks [`Quadrature::Cell`] for degenerate `g` in one
    /// dimension and [`Quadrature::Nodal`] otherwise.
    pub quadrature: Option<Quadrature>,
}

/// How a kernel column is integrated in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Point evaluation `J((x_i − y_j)/g_j) dμ_j`.
    Nodal,
    /// Product integration `∫_{cell j} J((x_i − y)/g(y)) dy / g(y)ⁿ`.
    /// The substitution `y = x₀ ± t^{1/(1−q)}` near a zero `x₀` of
    /// `g ~ |y − x₀|^q` removes the `1/g` singularity, so no cell is dropped.
    Cell,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            renormalize: None,
            g_floor: DEFAULT_G_FLOOR,
            exclude_degenerate: true,
            quadrature: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    Nonlocal,
    /// Constant kernel `ρ` (the rank-one surrogate).
    RankOne {
        rho: f64,
    },
}

/// Dense `K + diag(a)` on a grid, with `K[i][j] = J((x_i−x_j)/g_j) dμ_j`.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Arc<Grid>,
    kernel: Arc<DenseMatrix>,
    diag: Vec<f64>,
    measure: MeasureWeights,
    column_mass: Vec<f64>,
    kernel_sup: f64,
    renormalized: bool,
    kind: OperatorKind,
}

impl NonlocalOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// The integral part `K`.
    pub fn kernel(&self) -> &DenseMatrix {
        &self.kernel
    }

    /// The zero-order coefficient sampled at the nodes.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn measure(&self) -> &MeasureWeights {
        &self.measure
    }

    /// `c(x_j) = Σ_i w_i K[i][j] / w_j`, or 1 at excluded nodes.
    pub fn column_mass(&self) -> &[f64] {
        &self.column_mass
    }

    /// `max K[i][j] / dμ_j`, the discrete `‖J‖∞`.
    pub fn kernel_sup(&self) -> f64 {
        self.kernel_sup
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Same kernel, different zero-order coefficient.
    pub fn with_diagonal(&self, diag: Vec<f64>) -> Result<Self> {
        if diag.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                found: diag.len(),
            });
        }
        if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: i });
        }
        Ok(Self {
            diag,
            ..self.clone()
        })
    }

    pub fn with_coefficient(&self, a: &CoefficientA) -> Result<Self> {
        self.with_diagonal(self.grid.sample(|x| a.eval(x)))
    }

    /// `y = (K + diag(a)) x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.kernel.matvec_plus_diag(&self.diag, x, y);
    }

    /// `K + diag(a)` as one dense matrix.
    pub fn matrix(&self) -> DenseMatrix {
        self.kernel.plus_diag(&self.diag)
    }

    /// `σ = max_i a(x_i)`.
    pub fn sigma(&self) -> f64 {
        self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `σ′ = max_i [a(x_i) + c(x_i)]`.
    pub fn sigma_prime(&self) -> f64 {
        self.diag
            .iter()
            .zip(&self.column_mass)
            .map(|(a, c)| a + c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices where the diagonal attains `σ`.
    pub fn argmax_nodes(&self) -> Vec<usize> {
        let s = self.sigma();
        (0..self.size()).filter(|&i| self.diag[i] == s).collect()
    }
}

/// `k(x, y) = J((x−y)/g(y)) / g(y)ⁿ`, minimal image on a torus.
pub fn eval_kernel(
    j: &KernelJ,
    g: &DispersalG,
    domain: &Domain,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let gy = g.eval(y);
    if !(gy > 0.0) {
        return Err(Error::DegeneratePoint { g: gy });
    }
    let mut z = [0.0; 2];
    let n = domain.dim();
    domain.displacement(x, y, &mut z[..n]);
    for v in &mut z[..n] {
        *v /= gy;
    }
    Ok(j.eval(&z[..n]) / gy.powi(n as i32))
}

// 4-point Gauss–Legendre on [-1, 1].
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Composite Gauss–Legendre on `[lo, hi]` with panel edges at `breaks` honoured.
fn gauss_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize, breaks: &[f64]) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut edges = vec![lo, hi];
    edges.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    edges.sort_by(|a, b| a.total_cmp(b));
    let mut acc = 0.0;
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let a = w[0] + p as f64 * h;
            for (t, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                acc += wt * f(a + 0.5 * h * (t + 1.0)) * 0.5 * h;
            }
        }
    }
    acc
}

/// `∫_Ω J((y − x)/g) dy / gⁿ` in the rescaled variable `z = (y − x)/g`.
fn continuum_column_mass(domain: &Domain, j: &KernelJ, x: &[f64], gx: f64) -> Result<f64> {
    let s = j.support();
    if domain.is_torus() {
        for a in 0..domain.dim() {
            if s * gx > 0.5 * domain.side(a) {
                return Err(Error::InvalidProfile(format!(
                    "kernel reach {} exceeds half the period {}",
                    s * gx,
                    0.5 * domain.side(a)
                )));
            }
        }
        return Ok(j.mass());
    }
    let lo: Vec<f64> = (0..domain.dim())
        .map(|a| ((domain.lower()[a] - x[a]) / gx).max(-s))
        .collect();
    let hi: Vec<f64> = (0..domain.dim())
        .map(|a| ((domain.upper()[a] - x[a]) / gx).min(s))
        .collect();
    if lo.iter().all(|&v| v <= -s) && hi.iter().all(|&v| v >= s) {
        return Ok(j.mass());
    }
    Ok(if domain.dim() == 1 {
        gauss_1d(|z| j.eval(&[z]), lo[0], hi[0], 256, &[0.0])
    } else {
        gauss_1d(
            |z0| gauss_1d(|z1| j.eval(&[z0, z1]), lo[1], hi[1], 64, &[0.0]),
            lo[0],
            hi[0],
            64,
            &[0.0],
        )
    })
}

/// Gauss panels per cell piece.
const CELL_PANELS: usize = 8;

/// Quadrature points `(y, g(y), weight / g(y))` covering one grid cell.
struct CellRule {
    points: Vec<(f64, f64, f64)>,
}

impl CellRule {
    fn new(grid: &Grid, g: &DispersalG, col: usize) -> Self {
        let domain = grid.domain();
        let h = grid.spacing()[0];
        let y0 = grid.node(col)[0];
        let (mut lo, mut hi) = (y0 - 0.5 * h, y0 + 0.5 * h);
        if !domain.is_torus() {
            lo = lo.max(domain.lower()[0]);
            hi = hi.min(domain.upper()[0]);
        }
        let zeros: Vec<f64> = g.zero_set().iter().map(|z| z[0]).collect();
        let power = 1.0 / (1.0 - g.vanishing_order().unwrap_or(0.5));

        let mut edges = vec![lo, hi];
        edges.extend(zeros.iter().copied().filter(|&z| z > lo && z < hi));
        edges.sort_by(|a, b| a.total_cmp(b));

        let mut points = Vec::new();
        for w in edges.windows(2) {
            let (p, q) = (w[0], w[1]);
            let near = zeros
                .iter()
                .copied()
                .filter(|&z| z <= p || z >= q)
                .min_by(|a, b| {
                    let da = (a - p).abs().min((a - q).abs());
                    let db = (b - p).abs().min((b - q).abs());
                    da.total_cmp(&db)
                })
                .filter(|&z| (z - p).abs().min((z - q).abs()) <= 2.0 * h);
            match near {
                // y = z + side · t^power, dy = power · t^(power−1) dt.
                Some(z) => {
                    let side = if p >= z { 1.0 } else { -1.0 };
                    let (ta, tb) = {
                        let a = (p - z).abs().powf(1.0 / power);
                        let b = (q - z).abs().powf(1.0 / power);
                        (a.min(b), a.max(b))
                    };
                    gauss_points(ta, tb, |t, wt| {
                        let y = z + side * t.powf(power);
                        let jac = power * t.powf(power - 1.0);
                        let gy = g.eval(&[y]);
                        if gy > 0.0 {
                            points.push((y, gy, wt * jac / gy));
                        }
                    });
                }
                None => gauss_points(p, q, |y, wt| {
                    let gy = g.eval(&[y]);
                    points.push((y, gy, wt / gy));
                }),
            }
        }
        Self { points }
    }

    fn mass(&self) -> f64 {
        self.points.iter().map(|p| p.2).sum()
    }
}

fn gauss_points<F: FnMut(f64, f64)>(lo: f64, hi: f64, mut emit: F) {
    let h = (hi - lo) / CELL_PANELS as f64;
    for p in 0..CELL_PANELS {
        let a = lo + p as f64 * h;
        for (t, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            emit(a + 0.5 * h * (t + 1.0), wt * 0.5 * h);
        }
    }
}

/// Assembles `K + diag(a)` on `grid`.
pub fn assemble(
    grid: &Grid,
    j: &KernelJ,
    g: &DispersalG,
    a: &CoefficientA,
    opts: &AssemblyOptions,
) -> Result<NonlocalOperator> {
    let domain = grid.domain();
    let n = grid.dim();
    if j.dim() != n {
        return Err(Error::InvalidProfile(format!(
            "kernel is {}-dimensional but the grid is {n}-dimensional",
            j.dim()
        )));
    }
    let quadrature = opts.quadrature.unwrap_or(if g.is_degenerate() && n == 1 {
        Quadrature::Cell
    } else {
        Quadrature::Nodal
    });
    let g_values = grid.sample(|x| g.eval(x));
    let m = grid.len();

    let (mut kernel, measure) = match quadrature {
        Quadrature::Nodal => {
            if g.is_degenerate() && !opts.exclude_degenerate {
                return Err(Error::Precondition(
                    "degenerate g requires g_floor exclusion".into(),
                ));
            }
            let measure = MeasureWeights::new(grid, &g_values, opts.g_floor)?;
            if !g.is_degenerate() && measure.excluded_count() > 0 {
                return Err(Error::InvalidProfile(format!(
                    "regular-mode g drops below the floor {} at {} nodes",
                    opts.g_floor,
                    measure.excluded_count()
                )));
            }
            let dmu = measure.values();
            let excluded = measure.excluded();
            let kernel = DenseMatrix::from_fn(m, |i, col| {
                if excluded[col] {
                    return 0.0;
                }
                let mut z = [0.0; 2];
                domain.displacement(grid.node(i), grid.node(col), &mut z[..n]);
                let gj = g_values[col];
                for v in &mut z[..n] {
                    *v /= gj;
                }
                j.eval(&z[..n]) * dmu[col]
            });
            (kernel, measure)
        }
        Quadrature::Cell => {
            if n != 1 {
                return Err(Error::Precondition(
                    "cell quadrature is available in one dimension only".into(),
                ));
            }
            let cells: Vec<CellRule> = (0..m).map(|c| CellRule::new(grid, g, c)).collect();
            if let Some(c) = cells.iter().position(|r| !r.mass().is_finite()) {
                return Err(Error::NonFinite { node: c });
            }
            let measure = MeasureWeights::from_values(cells.iter().map(CellRule::mass).collect())?;
            let kernel = DenseMatrix::from_fn(m, |i, col| {
                let x = grid.node(i);
                let mut z = [0.0];
                cells[col]
                    .points
                    .iter()
                    .map(|&(y, gy, w)| {
                        domain.displacement(x, &[y], &mut z);
                        w * j.eval(&[z[0] / gy])
                    })
                    .sum()
            });
            (kernel, measure)
        }
    };
    if let Some(pos) = kernel.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: pos / m });
    }
    let dmu = measure.values();
    let excluded = measure.excluded();

    let mut column_mass = quadrature_column_mass(&kernel, grid, excluded);
    let renormalize = opts.renormalize.unwrap_or(domain.is_torus());
    if renormalize {
        for col in 0..m {
            if excluded[col] || column_mass[col] <= 0.0 || g_values[col] < opts.g_floor {
                continue;
            }
            let target = continuum_column_mass(domain, j, grid.node(col), g_values[col])?;
            kernel.scale_column(col, target / column_mass[col]);
            column_mass[col] = target;
        }
    }

    let mut kernel_sup = 0.0f64;
    for col in (0..m).filter(|&c| !excluded[c]) {
        for i in 0..m {
            kernel_sup = kernel_sup.max(kernel.get(i, col) / dmu[col]);
        }
    }

    let diag = grid.sample(|x| a.eval(x));
    if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: i });
    }

    Ok(NonlocalOperator {
        grid: Arc::new(grid.clone()),
        kernel: Arc::new(kernel),
        diag,
        measure,
        column_mass,
        kernel_sup,
        renormalized: renormalize,
        kind: OperatorKind::Nonlocal,
    })
}

fn quadrature_column_mass(kernel: &DenseMatrix, grid: &Grid, excluded: &[bool]) -> Vec<f64> {
    let w = grid.weights();
    let m = grid.len();
    let mut mass = vec![0.0; m];
    for (i, wi) in w.iter().enumerate() {
        for (acc, k) in mass.iter_mut().zip(kernel.row(i)) {
            *acc += wi * k;
        }
    }
    for col in 0..m {
        mass[col] = if excluded[col] {
            1.0
        } else {
            mass[col] / w[col]
        };
    }
    mass
}

/// Constant-kernel operator `ρ ∫_Ω u dx + a(x) u`.
pub fn rank_one_operator(grid: &Grid, rho: f64, a: &CoefficientA) -> Result<NonlocalOperator> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Precondition(format!(
            "rho must be positive, got {rho}"
        )));
    }
    if grid.domain().is_torus() {
        return Err(Error::Precondition(
            "the rank-one surrogate is posed on a bounded domain".into(),
        ));
    }
    let w = grid.weights();
    let kernel = DenseMatrix::from_fn(grid.len(), |_, col| rho * w[col]);
    let diag = grid.sample(|x| a.eval(x));
    if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: i });
    }
    let total: f64 = w.iter().sum();
    Ok(NonlocalOperator {
        grid: Arc::new(grid.clone()),
        kernel: Arc::new(kernel),
        diag,
        measure: MeasureWeights::lebesgue(grid),
        column_mass: vec![rho * total; grid.len()],
        kernel_sup: rho,
        renormalized: false,
        kind: OperatorKind::RankOne { rho },
    })
}

/// Constants `(r, c₀)` with `J((x−y)/g(y)) ≥ c₀` whenever `|x − y| ≤ r`.
///
/// `c₀ = J(0)/2`; `δ` is the largest radius with `J ≥ c₀` on `B(0, δ)`
/// (bisection on sampled spheres), and `r = δ α / 2`.
pub fn kernel_floor_constants(j: &KernelJ, g: &DispersalG) -> Result<(f64, f64)> {
    let j0 = j.value_at_origin();
    if !(j0 > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "J(0) = {j0} must be positive"
        )));
    }
    if !(g.alpha() > 0.0) {
        return Err(Error::Precondition(
            "kernel floor constants need a regular g (alpha > 0)".into(),
        ));
    }
    let c0 = 0.5 * j0;
    let dirs: Vec<Vec<f64>> = if j.dim() == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..32)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                vec![t.cos(), t.sin()]
            })
            .collect()
    };
    let above = |rho: f64| {
        dirs.iter().all(|d| {
            let z: Vec<f64> = d.iter().map(|v| v * rho).collect();
            j.eval(&z) >= c0
        })
    };
    let (mut lo, mut hi) = (0.0, j.support());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * lo * g.alpha(), c0))
}

/// Quadrature `c(x_j) = Σ_i w_i J((x_i − x_j)/g_j) / g_jⁿ`; 1 where `g < g_floor`.
pub fn column_mass_c(grid: &Grid, j: &KernelJ, g: &DispersalG, g_floor: f64) -> Vec<f64> {
    let domain = grid.domain();
    let n = grid.dim();
    let w = grid.weights();
    (0..grid.len())
        .map(|col| {
            let y = grid.node(col);
            let gy = g.eval(y);
            if gy < g_floor {
                return 1.0;
            }
            let mut z = [0.0; 2];
            let mut acc = 0.0;
            for (i, x) in grid.nodes().enumerate() {
                domain.displacement(x, y, &mut z[..n]);
                for v in &mut z[..n] {
                    *v /= gy;
                }
                acc += w[i] * j.eval(&z[..n]);
            }
            acc / gy.powi(n as i32)
        })
        .collect()
}

/// `(σ, σ′) = (max a, max (a + c))` over the nodes.
pub fn sigma_and_sigma_prime(
    grid: &Grid,
    j: &KernelJ,
    g: &DispersalG,
    a: &CoefficientA,
) -> (f64, f64) {
    let c = column_mass_c(grid, j, g, DEFAULT_G_FLOOR);
    let av = grid.sample(|x| a.eval(x));
    let sigma = av.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma_prime = av
        .iter()
        .zip(&c)
        .map(|(a, c)| a + c)
        .fold(f64::NEG_INFINITY, f64::max);
    (sigma, sigma_prime)
}
