//! Rectangular domains, uniform tensor grids and their quadrature.
//!
//! Bounded boxes are discretized by closed grids (face nodes included,
//! trapezoid weights); tori by cell-centred grids with midpoint weights and
//! a minimal-image metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible node count per axis.
pub const MIN_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Bounded,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    geometry: Geometry,
    /// Truncation radii when the box stands in for an unbounded set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<Vec<f64>>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, geometry: Geometry) -> Result<Self> {
        let n = lower.len();
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1 or 2, got {n}"
            )));
        }
        if upper.len() != n {
            return Err(Error::InvalidDomain(
                "lower and upper bounds differ in length".into(),
            ));
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            geometry,
            truncation: None,
        })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi], Geometry::Bounded)
    }

    pub fn torus_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi], Geometry::Torus)
    }

    pub fn square(lo: f64, hi: f64, geometry: Geometry) -> Result<Self> {
        Self::new(vec![lo, lo], vec![hi, hi], geometry)
    }

    /// Marks the box as a truncation of an unbounded set.
    pub fn with_truncation(mut self, radii: Vec<f64>) -> Self {
        self.truncation = Some(radii);
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn is_torus(&self) -> bool {
        self.geometry == Geometry::Torus
    }

    pub fn truncation(&self) -> Option<&[f64]> {
        self.truncation.as_deref()
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    /// Per-axis interval inclusion `other ⊆ self`.
    pub fn contains_domain(&self, other: &Domain) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|a| self.lower[a] <= other.lower[a] && other.upper[a] <= self.upper[a])
    }

    /// Per-axis strict inclusion: `other` is compactly contained in `self`.
    pub fn strictly_contains(&self, other: &Domain) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|a| self.lower[a] < other.lower[a] && other.upper[a] < self.upper[a])
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(a, &v)| self.lower[a] <= v && v <= self.upper[a])
    }

    /// Displacement `x - y`, using the minimal image on a torus.
    pub fn displacement(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for a in 0..self.dim() {
            let mut d = x[a] - y[a];
            if self.is_torus() {
                let period = self.side(a);
                d -= period * (d / period).round();
            }
            out[a] = d;
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut d = [0.0; 2];
        self.displacement(x, y, &mut d[..self.dim()]);
        d[..self.dim()].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance from `x` to the box boundary (zero on a torus).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        if self.is_torus() {
            return 0.0;
        }
        (0..self.dim())
            .map(|a| (x[a] - self.lower[a]).min(self.upper[a] - x[a]))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

/// Uniform tensor grid over a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    /// Flat node coordinates, `dim` entries per node; axis 0 varies fastest.
    points: Vec<f64>,
    weights: Vec<f64>,
    boundary: Vec<bool>,
}

/// Builds a uniform grid with `n` nodes on every axis.
pub fn build_grid(domain: &Domain, n: usize) -> Result<Grid> {
    Grid::new(domain, &vec![n; domain.dim()])
}

impl Grid {
    pub fn new(domain: &Domain, counts: &[usize]) -> Result<Self> {
        let dim = domain.dim();
        if counts.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} node counts, got {}",
                counts.len()
            )));
        }
        if let Some(&n) = counts.iter().find(|&&n| n < MIN_NODES) {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per axis, got {n}"
            )));
        }
        if domain.is_torus() && domain.truncation().is_some() {
            return Err(Error::InvalidGrid(
                "a torus cannot stand in for an unbounded domain".into(),
            ));
        }

        let mut axis_nodes = Vec::with_capacity(dim);
        let mut axis_weights = Vec::with_capacity(dim);
        let mut spacing = Vec::with_capacity(dim);
        for (a, &n) in counts.iter().enumerate() {
            let (lo, len) = (domain.lower[a], domain.side(a));
            match domain.geometry {
                Geometry::Bounded => {
                    let h = len / (n - 1) as f64;
                    let nodes: Vec<f64> = (0..n)
                        .map(|i| {
                            if i == n - 1 {
                                domain.upper[a]
                            } else {
                                lo + i as f64 * h
                            }
                        })
                        .collect();
                    let mut w = vec![h; n];
                    w[0] = 0.5 * h;
                    w[n - 1] = 0.5 * h;
                    axis_nodes.push(nodes);
                    axis_weights.push(w);
                    spacing.push(h);
                }
                Geometry::Torus => {
                    let h = len / n as f64;
                    axis_nodes.push((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect());
                    axis_weights.push(vec![h; n]);
                    spacing.push(h);
                }
            }
        }

        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut boundary = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            let mut on_face = false;
            for a in 0..dim {
                points.push(axis_nodes[a][idx[a]]);
                w *= axis_weights[a][idx[a]];
                on_face |= idx[a] == 0 || idx[a] == counts[a] - 1;
            }
            weights.push(w);
            boundary.push(on_face && !domain.is_torus());
            for a in 0..dim {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }

        Ok(Self {
            domain: domain.clone(),
            counts: counts.to_vec(),
            spacing,
            points,
            weights,
            boundary,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Largest spacing over the axes.
    pub fn h(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    /// Indices of the nodes lying in the closed box `sub`.
    pub fn nodes_in(&self, sub: &Domain) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| sub.contains_point(self.node(i)))
            .collect()
    }
}

/// `Σ_i w_i · samples_i`.
pub fn integrate(grid: &Grid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: samples.len(),
        });
    }
    let mut acc = 0.0;
    for (i, (w, s)) in grid.weights.iter().zip(samples).enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite { node: i });
        }
        acc += w * s;
    }
    Ok(acc)
}

/// Per-node weights of the measure `dx / g(x)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureWeights {
    values: Vec<f64>,
    excluded: Vec<bool>,
}

impl MeasureWeights {
    /// Nodes where `g < g_floor` are flagged and receive zero weight.
    pub fn new(grid: &Grid, g_values: &[f64], g_floor: f64) -> Result<Self> {
        if g_values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: g_values.len(),
            });
        }
        let n = grid.dim() as i32;
        let mut values = Vec::with_capacity(grid.len());
        let mut excluded = Vec::with_capacity(grid.len());
        for (i, (&w, &g)) in grid.weights().iter().zip(g_values).enumerate() {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::NonFinite { node: i });
            }
            if g < g_floor {
                values.push(0.0);
                excluded.push(true);
            } else {
                values.push(w / g.powi(n));
                excluded.push(false);
            }
        }
        Ok(Self { values, excluded })
    }

    /// Weights computed elsewhere, e.g. by integrating `1/gⁿ` over cells.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NonFinite { node: i });
        }
        let excluded = vec![false; values.len()];
        Ok(Self { values, excluded })
    }

    /// Plain `dx` weights (g ≡ 1).
    pub fn lebesgue(grid: &Grid) -> Self {
        Self {
            values: grid.weights().to_vec(),
            excluded: vec![false; grid.len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| e).count()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Moves every face of a bounded box inward by `theta`.
pub fn shrink_domain(domain: &Domain, theta: f64) -> Result<Domain> {
    if domain.is_torus() {
        return Err(Error::Precondition(
            "a torus has no boundary to shrink".into(),
        ));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Precondition(format!(
            "theta must be >= 0, got {theta}"
        )));
    }
    let min_half = (0..domain.dim())
        .map(|a| 0.5 * domain.side(a))
        .fold(f64::INFINITY, f64::min);
    if theta >= min_half {
        return Err(Error::InvalidDomain(format!(
            "theta = {theta} empties the box (half side {min_half})"
        )));
    }
    if theta == 0.0 {
        return Ok(domain.clone());
    }
    let lower = domain.lower.iter().map(|v| v + theta).collect();
    let upper = domain.upper.iter().map(|v| v - theta).collect();
    Domain::new(lower, upper, Geometry::Bounded)
}

/// A one-dimensional unbounded set approximated by symmetric intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundedLine {
    /// The core set Ω₀ every truncation must contain.
    pub core: (f64, f64),
    /// Strictly increasing truncation radii R_k.
    pub radii: Vec<f64>,
}

/// Nested bounded intervals `(−R_k, R_k)` for the first `m` radii.
pub fn exhaustion_sequence(unbounded: &UnboundedLine, m: usize) -> Result<Vec<Domain>> {
    if m < 2 {
        return Err(Error::Precondition(format!(
            "an exhaustion needs at least 2 levels, got {m}"
        )));
    }
    if unbounded.radii.len() < m {
        return Err(Error::Precondition(format!(
            "{m} levels requested but only {} radii given",
            unbounded.radii.len()
        )));
    }
    let radii = &unbounded.radii[..m];
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::Precondition(
            "truncation radii must be positive and strictly increasing".into(),
        ));
    }
    let (c_lo, c_hi) = unbounded.core;
    if !(c_lo < c_hi) || c_lo < -radii[0] || c_hi > radii[0] {
        return Err(Error::Precondition(format!(
            "core ({c_lo}, {c_hi}) is not contained in the first truncation (-{0}, {0})",
            radii[0]
        )));
    }
    radii
        .iter()
        .map(|&r| Domain::interval(-r, r).map(|d| d.with_truncation(vec![r])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn closed_interval_grid() {
        let g = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 5).unwrap();
        let xs: Vec<f64> = g.nodes().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.weights(), &[0.25, 0.5, 0.5, 0.5, 0.25]);
        assert_eq!(g.boundary_mask(), &[true, false, false, false, true]);
        assert!(close(g.weights().iter().sum::<f64>(), 2.0, 1e-15));
    }

    #[test]
    fn torus_grid_uses_cell_centres() {
        let g = build_grid(&Domain::torus_interval(0.0, 1.0).unwrap(), 4).unwrap();
        let xs: Vec<f64> = g.nodes().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(g.weights().iter().all(|&w| w == 0.25));
        assert!(g.boundary_mask().iter().all(|&b| !b));
    }

    #[test]
    fn square_grid_weights_sum_to_area() {
        let d = Domain::square(0.0, 1.0, Geometry::Bounded).unwrap();
        let g = Grid::new(&d, &[4, 4]).unwrap();
        assert_eq!(g.len(), 16);
        assert!(close(g.weights().iter().sum::<f64>(), 1.0, 1e-12));
        // 4 corners + 8 edge nodes
        assert_eq!(g.boundary_mask().iter().filter(|&&b| b).count(), 12);
    }

    #[test]
    fn rejects_small_counts_and_truncated_torus() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(matches!(build_grid(&d, 3), Err(Error::InvalidGrid(_))));
        let t = Domain::torus_interval(0.0, 1.0)
            .unwrap()
            .with_truncation(vec![1.0]);
        assert!(matches!(build_grid(&t, 8), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::new(vec![0.0; 3], vec![1.0; 3], Geometry::Bounded).is_err());
    }

    #[test]
    fn integrate_linear_is_exact() {
        let g = build_grid(&Domain::interval(0.0, 1.0).unwrap(), 101).unwrap();
        let v = integrate(&g, &g.sample(|x| x[0])).unwrap();
        assert!(close(v, 0.5, 1e-12));
        let one = integrate(&g, &vec![1.0; g.len()]).unwrap();
        assert!(close(one, 1.0, 1e-12));
        assert!(matches!(
            integrate(&g, &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn torus_displacement_wraps() {
        let d = Domain::torus_interval(0.0, 1.0).unwrap();
        assert!(close(d.distance(&[0.05], &[0.95]), 0.1, 1e-15));
        let b = Domain::interval(0.0, 1.0).unwrap();
        assert!(close(b.distance(&[0.05], &[0.95]), 0.9, 1e-15));
    }

    #[test]
    fn shrink_examples() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let s = shrink_domain(&d, 0.25).unwrap();
        assert_eq!((s.lower()[0], s.upper()[0]), (-0.75, 0.75));
        assert_eq!(shrink_domain(&d, 0.0).unwrap(), d);
        let sq = Domain::square(0.0, 1.0, Geometry::Bounded).unwrap();
        let s = shrink_domain(&sq, 0.4).unwrap();
        assert!(close(s.lower()[1], 0.4, 1e-15) && close(s.upper()[0], 0.6, 1e-15));
        assert!(shrink_domain(&d, 1.0).is_err());
    }

    #[test]
    fn exhaustion_examples() {
        let unbounded = UnboundedLine {
            core: (-1.0, 1.0),
            radii: vec![2.0, 3.0, 4.0],
        };
        let seq = exhaustion_sequence(&unbounded, 3).unwrap();
        let bounds: Vec<(f64, f64)> = seq.iter().map(|d| (d.lower()[0], d.upper()[0])).collect();
        assert_eq!(bounds, vec![(-2.0, 2.0), (-3.0, 3.0), (-4.0, 4.0)]);
        assert!(exhaustion_sequence(&unbounded, 1).is_err());

        let wide_core = UnboundedLine {
            core: (-5.0, 5.0),
            radii: vec![2.0, 3.0],
        };
        assert!(exhaustion_sequence(&wide_core, 2).is_err());

        let bad = UnboundedLine {
            core: (-1.0, 1.0),
            radii: vec![2.0, 2.0],
        };
        assert!(exhaustion_sequence(&bad, 2).is_err());
    }

    #[test]
    fn measure_weights_floor_excludes_nodes() {
        let g = build_grid(&Domain::interval(-1.0, 1.0).unwrap(), 5).unwrap();
        let gv = g.sample(|x| x[0].abs().sqrt());
        let m = MeasureWeights::new(&g, &gv, 1e-8).unwrap();
        assert_eq!(m.excluded(), &[false, false, true, false, false]);
        assert_eq!(m.values()[2], 0.0);
        assert!(close(m.values()[1], 0.5 / 0.5f64.sqrt(), 1e-15));
    }
}
