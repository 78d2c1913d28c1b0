//! Evaluable profiles for the dispersal kernel `J`, the dispersal budget `g`
//! and the zero-order coefficient `a`, each carrying the analytic metadata
//! the solvers and classifiers rely on.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=2).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "dimension must be 1 or 2, got {dim}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    Uniform,
    Triangular,
    CosineBump,
}

impl KernelShape {
    /// Radial profile with value 1 at the origin, `t = |z| / s ∈ [0, 1]`.
    fn profile(self, t: f64) -> f64 {
        match self {
            KernelShape::Uniform => 1.0,
            KernelShape::Triangular => 1.0 - t,
            KernelShape::CosineBump => 0.5 * (1.0 + (PI * t).cos()),
        }
    }

    /// `∫ profile(|z|/s) dz` for `s = 1`.
    fn unit_mass(self, dim: usize) -> f64 {
        match (self, dim) {
            (KernelShape::Uniform, 1) => 2.0,
            (KernelShape::Triangular, 1) => 1.0,
            (KernelShape::CosineBump, 1) => 1.0,
            (KernelShape::Uniform, _) => PI,
            (KernelShape::Triangular, _) => PI / 3.0,
            (KernelShape::CosineBump, _) => PI * (0.5 - 2.0 / (PI * PI)),
        }
    }
}

#[derive(Clone)]
enum KernelForm {
    Shape { shape: KernelShape, peak: f64 },
    Custom { f: Field, mass: f64 },
}

/// Compactly supported, nonnegative dispersal kernel.
#[derive(Clone)]
pub struct KernelJ {
    form: KernelForm,
    support: f64,
    dim: usize,
}

impl fmt::Debug for KernelJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("KernelJ");
        match &self.form {
            KernelForm::Shape { shape, peak } => d.field("shape", shape).field("peak", peak),
            KernelForm::Custom { mass, .. } => d.field("shape", &"custom").field("mass", mass),
        };
        d.field("support", &self.support)
            .field("dim", &self.dim)
            .finish()
    }
}

impl KernelJ {
    /// Radial kernel of the given shape, support radius and total mass.
    pub fn new(shape: KernelShape, support: f64, mass: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(support > 0.0) || !support.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "kernel support must be positive, got {support}"
            )));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "kernel mass must be positive, got {mass}"
            )));
        }
        let peak = mass / (shape.unit_mass(dim) * support.powi(dim as i32));
        Ok(Self {
            form: KernelForm::Shape { shape, peak },
            support,
            dim,
        })
    }

    /// Radial kernel prescribed by its value at the origin instead of its mass.
    pub fn with_peak(shape: KernelShape, support: f64, peak: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(support > 0.0) || !(peak > 0.0) {
            return Err(Error::InvalidProfile(
                "kernel support and peak must be positive".into(),
            ));
        }
        Ok(Self {
            form: KernelForm::Shape { shape, peak },
            support,
            dim,
        })
    }

    /// Arbitrary kernel; `f` must vanish outside the ball of radius `support`.
    pub fn custom(f: Field, support: f64, mass: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(support > 0.0) {
            return Err(Error::InvalidProfile(
                "kernel support must be positive".into(),
            ));
        }
        Ok(Self {
            form: KernelForm::Custom { f, mass },
            support,
            dim,
        })
    }

    pub fn shape(&self) -> Option<KernelShape> {
        match self.form {
            KernelForm::Shape { shape, .. } => Some(shape),
            KernelForm::Custom { .. } => None,
        }
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared total mass `∫ J`.
    pub fn mass(&self) -> f64 {
        match &self.form {
            KernelForm::Shape { shape, peak } => {
                peak * shape.unit_mass(self.dim) * self.support.powi(self.dim as i32)
            }
            KernelForm::Custom { mass, .. } => *mass,
        }
    }

    #[inline]
    pub fn eval(&self, z: &[f64]) -> f64 {
        let r = norm(z);
        if r > self.support {
            return 0.0;
        }
        match &self.form {
            KernelForm::Shape { shape, peak } => peak * shape.profile(r / self.support),
            KernelForm::Custom { f, .. } => f(z),
        }
    }

    pub fn value_at_origin(&self) -> f64 {
        self.eval(&vec![0.0; self.dim])
    }

    /// `sup J`, taken at the origin for the built-in shapes.
    pub fn sup(&self) -> f64 {
        match &self.form {
            KernelForm::Shape { peak, .. } => *peak,
            KernelForm::Custom { .. } => {
                let s = self.support;
                let k = 400;
                let mut best = 0.0f64;
                for i in 0..=k {
                    let t = -s + 2.0 * s * i as f64 / k as f64;
                    if self.dim == 1 {
                        best = best.max(self.eval(&[t]));
                    } else {
                        for j in 0..=k {
                            let u = -s + 2.0 * s * j as f64 / k as f64;
                            best = best.max(self.eval(&[t, u]));
                        }
                    }
                }
                best
            }
        }
    }

    /// `∫ J` by a fine composite midpoint rule over the support box.
    pub fn numeric_mass(&self) -> f64 {
        let s = self.support;
        if self.dim == 1 {
            let k = 20_000;
            let h = 2.0 * s / k as f64;
            (0..k)
                .map(|i| self.eval(&[-s + (i as f64 + 0.5) * h]))
                .sum::<f64>()
                * h
        } else {
            let k = 800;
            let h = 2.0 * s / k as f64;
            let mut acc = 0.0;
            for i in 0..k {
                let x = -s + (i as f64 + 0.5) * h;
                for j in 0..k {
                    acc += self.eval(&[x, -s + (j as f64 + 0.5) * h]);
                }
            }
            acc * h * h
        }
    }

    /// Checks nonnegativity, `J(0) > 0`, compact support and declared mass.
    pub fn validate(&self) -> Result<()> {
        if !(self.value_at_origin() > 0.0) {
            return Err(Error::InvalidProfile("J(0) must be positive".into()));
        }
        let s = self.support;
        let dirs: Vec<Vec<f64>> = if self.dim == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            (0..16)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 16.0;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        };
        for dir in &dirs {
            for i in 0..=200 {
                let r = 2.0 * s * i as f64 / 200.0;
                let z: Vec<f64> = dir.iter().map(|d| d * r).collect();
                let v = self.eval(&z);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidProfile(format!("J({z:?}) = {v} is not >= 0")));
                }
                if r > s * (1.0 + 1e-12) && v != 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "J does not vanish outside its declared support at {z:?}"
                    )));
                }
            }
        }
        let numeric = self.numeric_mass();
        if (numeric - self.mass()).abs() > 1e-3 {
            return Err(Error::InvalidProfile(format!(
                "numerical mass {numeric} differs from declared {}",
                self.mass()
            )));
        }
        Ok(())
    }
}

#[derive(Clone)]
enum DispersalForm {
    Constant(f64),
    Affine {
        base: f64,
        slope: Vec<f64>,
    },
    Power {
        exponent: f64,
        center: Vec<f64>,
        cap: f64,
    },
    Custom(Field),
}

/// Dispersal budget `g ≥ 0`.
#[derive(Clone)]
pub struct DispersalG {
    form: DispersalForm,
    alpha: f64,
    beta: f64,
    degenerate: bool,
    lp_exponent: Option<f64>,
    zero_set: Vec<Vec<f64>>,
}

impl fmt::Debug for DispersalG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = match &self.form {
            DispersalForm::Constant(v) => format!("constant({v})"),
            DispersalForm::Affine { base, slope } => format!("affine({base}, {slope:?})"),
            DispersalForm::Power {
                exponent,
                center,
                cap,
            } => format!("power({exponent}, {center:?}, cap {cap})"),
            DispersalForm::Custom(_) => "custom".into(),
        };
        f.debug_struct("DispersalG")
            .field("form", &form)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("degenerate", &self.degenerate)
            .finish()
    }
}

impl DispersalG {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "constant g must be positive, got {value}"
            )));
        }
        Ok(Self {
            form: DispersalForm::Constant(value),
            alpha: value,
            beta: value,
            degenerate: false,
            lp_exponent: None,
            zero_set: Vec::new(),
        })
    }

    /// `g(x) = base + slope · x`, bounds taken over the corners of `domain`.
    pub fn affine(base: f64, slope: Vec<f64>, domain: &crate::grid::Domain) -> Result<Self> {
        if slope.len() != domain.dim() {
            return Err(Error::InvalidProfile("slope dimension mismatch".into()));
        }
        let corners: Vec<Vec<f64>> = if domain.dim() == 1 {
            vec![vec![domain.lower()[0]], vec![domain.upper()[0]]]
        } else {
            let (lo, hi) = (domain.lower(), domain.upper());
            vec![
                vec![lo[0], lo[1]],
                vec![lo[0], hi[1]],
                vec![hi[0], lo[1]],
                vec![hi[0], hi[1]],
            ]
        };
        let vals: Vec<f64> = corners
            .iter()
            .map(|c| base + c.iter().zip(&slope).map(|(x, s)| x * s).sum::<f64>())
            .collect();
        let alpha = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let beta = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(alpha > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "affine g reaches {alpha} <= 0 on the domain"
            )));
        }
        Ok(Self {
            form: DispersalForm::Affine { base, slope },
            alpha,
            beta,
            degenerate: false,
            lp_exponent: None,
            zero_set: Vec::new(),
        })
    }

    /// `g(x) = min(|x − center|^exponent, cap)`, vanishing at `center`.
    ///
    /// `1/gⁿ` is locally `L^p` for every `p < 1/exponent`, so the exponent
    /// must lie in (0, 1); the declared `p` is the midpoint of `(1, 1/exponent)`.
    pub fn power_degenerate(exponent: f64, center: Vec<f64>, cap: f64) -> Result<Self> {
        check_dim(center.len())?;
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::InvalidProfile(format!(
                "degenerate exponent must lie in (0, 1) for 1/g^n to be L^p with p > 1, got {exponent}"
            )));
        }
        if !(cap > 0.0) {
            return Err(Error::InvalidProfile("cap must be positive".into()));
        }
        Ok(Self {
            form: DispersalForm::Power {
                exponent,
                center: center.clone(),
                cap,
            },
            alpha: 0.0,
            beta: cap,
            degenerate: true,
            lp_exponent: Some(0.5 * (1.0 + 1.0 / exponent)),
            zero_set: vec![center],
        })
    }

    /// User-supplied `g` with declared bounds; `alpha == 0` selects degenerate mode.
    pub fn custom(f: Field, alpha: f64, beta: f64, zero_set: Vec<Vec<f64>>) -> Result<Self> {
        if !(alpha >= 0.0 && alpha <= beta) {
            return Err(Error::InvalidProfile("need 0 <= alpha <= beta".into()));
        }
        Ok(Self {
            form: DispersalForm::Custom(f),
            alpha,
            beta,
            degenerate: alpha == 0.0,
            lp_exponent: None,
            zero_set,
        })
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.form {
            DispersalForm::Constant(v) => *v,
            DispersalForm::Affine { base, slope } => {
                base + x.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>()
            }
            DispersalForm::Power {
                exponent,
                center,
                cap,
            } => {
                let r = norm(&x.iter().zip(center).map(|(a, b)| a - b).collect::<Vec<_>>());
                r.powf(*exponent).min(*cap)
            }
            DispersalForm::Custom(f) => f(x),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn lp_exponent(&self) -> Option<f64> {
        self.lp_exponent
    }

    pub fn zero_set(&self) -> &[Vec<f64>] {
        &self.zero_set
    }

    /// `q` when `g ~ |x − x₀|^q` near its zero set.
    pub fn vanishing_order(&self) -> Option<f64> {
        match &self.form {
            DispersalForm::Power { exponent, .. } => Some(*exponent),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.form, DispersalForm::Constant(_))
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for (i, x) in grid.nodes().enumerate() {
            let g = self.eval(x);
            if !g.is_finite() {
                return Err(Error::NonFinite { node: i });
            }
            if self.degenerate {
                if g < 0.0 {
                    return Err(Error::InvalidProfile(format!("g({x:?}) = {g} < 0")));
                }
                if g == 0.0 {
                    let near = self.zero_set.iter().any(|z| {
                        z.iter()
                            .zip(x)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                            < 1e-9
                    });
                    if !near {
                        return Err(Error::InvalidProfile(format!(
                            "g vanishes at {x:?} outside the declared zero set"
                        )));
                    }
                }
            } else if g < self.alpha - 1e-12 || g > self.beta + 1e-12 {
                return Err(Error::InvalidProfile(format!(
                    "g({x:?}) = {g} outside [{}, {}]",
                    self.alpha, self.beta
                )));
            }
        }
        Ok(())
    }
}

/// Local behaviour of `a` near its maximum set Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContactProfile {
    /// `a(x) ≈ σ − c · d(x, Γ)^γ`.
    Power { gamma: f64, c: f64 },
    /// `a ≡ σ` on the open box `(lower, upper)`.
    Plateau { lower: Vec<f64>, upper: Vec<f64> },
}

/// Zero-order coefficient `a = −b`.
#[derive(Clone)]
pub struct CoefficientA {
    field: Field,
    sigma: Option<f64>,
    contact: Option<ContactProfile>,
    label: String,
}

impl fmt::Debug for CoefficientA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientA")
            .field("label", &self.label)
            .field("sigma", &self.sigma)
            .field("contact", &self.contact)
            .finish()
    }
}

fn dist_to(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl CoefficientA {
    pub fn constant(value: f64) -> Self {
        Self {
            field: Arc::new(move |_| value),
            sigma: Some(value),
            contact: Some(ContactProfile::Plateau {
                lower: vec![f64::NEG_INFINITY; 2],
                upper: vec![f64::INFINITY; 2],
            }),
            label: format!("constant({value})"),
        }
    }

    /// `σ − c |x − center|²`.
    pub fn quadratic_well(sigma: f64, c: f64, center: Vec<f64>) -> Self {
        let mut a = Self::power_contact(sigma, c, 2.0, center);
        a.label = format!("quadratic-well(sigma={sigma}, c={c})");
        a
    }

    /// `σ − c |x − center|^γ`.
    pub fn power_contact(sigma: f64, c: f64, gamma: f64, center: Vec<f64>) -> Self {
        let label = format!("power-contact(sigma={sigma}, c={c}, gamma={gamma})");
        Self {
            field: Arc::new(move |x| sigma - c * dist_to(x, &center).powf(gamma)),
            sigma: Some(sigma),
            contact: Some(ContactProfile::Power { gamma, c }),
            label,
        }
    }

    /// `σ − c |x − center|² / (1 + |x − center|²)`, bounded below by `σ − c`.
    pub fn lorentzian_well(sigma: f64, c: f64, center: Vec<f64>) -> Self {
        let label = format!("lorentzian-well(sigma={sigma}, c={c})");
        Self {
            field: Arc::new(move |x| {
                let r2 = dist_to(x, &center).powi(2);
                sigma - c * r2 / (1.0 + r2)
            }),
            sigma: Some(sigma),
            contact: Some(ContactProfile::Power { gamma: 2.0, c }),
            label,
        }
    }

    /// `σ − c · d(x, [lower, upper])^γ`: flat on the box, power decay outside.
    pub fn plateau(sigma: f64, c: f64, gamma: f64, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let label = format!("plateau(sigma={sigma}, box={lower:?}..{upper:?})");
        let (lo, hi) = (lower.clone(), upper.clone());
        Self {
            field: Arc::new(move |x| {
                let d = x
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let e = (lo[k] - v).max(v - hi[k]).max(0.0);
                        e * e
                    })
                    .sum::<f64>()
                    .sqrt();
                sigma - c * d.powf(gamma)
            }),
            sigma: Some(sigma),
            contact: Some(ContactProfile::Plateau { lower, upper }),
            label,
        }
    }

    /// Arbitrary coefficient; `sigma` is its declared supremum if known.
    pub fn from_fn(f: Field, sigma: Option<f64>, contact: Option<ContactProfile>) -> Self {
        Self {
            field: f,
            sigma,
            contact,
            label: "custom".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.field)(x)
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn contact(&self) -> Option<&ContactProfile> {
        self.contact.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `a + delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let f = self.field.clone();
        Self {
            field: Arc::new(move |x| f(x) + delta),
            sigma: self.sigma.map(|s| s + delta),
            contact: self.contact.clone(),
            label: format!("{} + {delta}", self.label),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for (i, x) in grid.nodes().enumerate() {
            let v = self.eval(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { node: i });
            }
            if let Some(s) = self.sigma {
                if v > s + 1e-12 {
                    return Err(Error::InvalidProfile(format!(
                        "a({x:?}) = {v} exceeds declared sigma {s}"
                    )));
                }
                if let Some(ContactProfile::Plateau { lower, upper }) = &self.contact {
                    let inside = x
                        .iter()
                        .enumerate()
                        .all(|(k, &c)| lower[k] < c && c < upper[k]);
                    if inside && (v - s).abs() > 1e-12 {
                        return Err(Error::InvalidProfile(format!(
                            "a({x:?}) = {v} is not flat on the declared plateau"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
