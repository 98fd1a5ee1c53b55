//! Boundary-graded node sets and the fields sampled on them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::Domain;

/// Default grading exponent.
pub const DEFAULT_GRADING: f64 = 3.0;

/// Smallest node count accepted by [`make_graded_grid`].
pub const MIN_NODES: usize = 16;

/// Strictly increasing nodes on `[0, 1]` with exact endpoints, together with
/// the geometric weights every discrete operator needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    grading: f64,
    domain: Domain,
    // cached per-node / per-interval geometry
    delta: Vec<f64>,
    widths: Vec<f64>,
    mid_weights: Vec<f64>,
    volumes: Vec<f64>,
}

impl Grid1D {
    /// Build a grid from explicit nodes.
    pub fn from_nodes(nodes: Vec<f64>, grading: f64, domain: Domain) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!("{} nodes", nodes.len())));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidGrid("endpoints must be exactly 0 and 1".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {i}"
            )));
        }
        let delta = nodes.iter().map(|&x| domain.delta(x)).collect();
        Ok(Self::assemble(nodes, delta, grading, domain))
    }

    /// Geometry from nodes and their boundary distances. Near the outer
    /// boundary the distances are more accurate than `1 - x`, so widths and
    /// dual cells there are taken from them.
    fn assemble(nodes: Vec<f64>, delta: Vec<f64>, grading: f64, domain: Domain) -> Self {
        let k = domain.radial_power();
        let n = nodes.len();
        let widths: Vec<f64> = (0..n - 1)
            .map(|j| {
                if nodes[j] >= 0.5 {
                    delta[j] - delta[j + 1]
                } else {
                    nodes[j + 1] - nodes[j]
                }
            })
            .collect();
        let mid_weights = nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).powi(k))
            .collect();
        // exact measure of the dual cell [x_{i-1/2}, x_{i+1/2}] under r^{N-1} dr,
        // factored so that thin cells near r = 1 do not cancel
        let dim = k + 1;
        let mut volumes = vec![0.0; n];
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { 0.5 * widths[i - 1] };
            let right = if i == n - 1 { 0.0 } else { 0.5 * widths[i] };
            let lo = nodes[i] - left;
            let hi = nodes[i] + right;
            let sum: f64 = (0..dim).map(|j| hi.powi(j) * lo.powi(k - j)).sum();
            volumes[i] = (left + right) * sum / dim as f64;
        }
        Self {
            nodes,
            grading,
            domain,
            delta,
            widths,
            mid_weights,
            volumes,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `δ` at every node.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Interval widths `h_{i+1/2}`, one per interval.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Radial weight `r^{N-1}` at interval midpoints (all ones on the interval).
    pub fn mid_weights(&self) -> &[f64] {
        &self.mid_weights
    }

    /// Dual-cell measure attached to each node, radial weight included.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Whether node `i` carries a homogeneous Dirichlet condition.
    #[inline]
    pub fn is_dirichlet(&self, i: usize) -> bool {
        i + 1 == self.nodes.len() || (i == 0 && self.domain == Domain::Interval01)
    }

    /// Index range of the unknowns.
    pub fn free_range(&self) -> std::ops::Range<usize> {
        let n = self.nodes.len();
        match self.domain {
            Domain::Interval01 => 1..n - 1,
            Domain::RadialBall { .. } => 0..n - 1,
        }
    }

    /// Smallest interval width.
    pub fn min_width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `δ` at interval midpoints.
    pub fn mid_delta(&self) -> Vec<f64> {
        self.delta.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Graded grid with `n` nodes.
///
/// On the interval the nodes follow `x = ½(2t)^g` for `t <= ½` and the mirror
/// image above, so cells shrink like `δ^{1-1/g}` toward both ends. On the ball
/// `r = 1 - (1-t)^g` grades only toward `r = 1`.
pub fn make_graded_grid(n: usize, grading: f64, domain: Domain) -> Result<Grid1D> {
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::InvalidGrading(grading));
    }
    if n < MIN_NODES {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_NODES} nodes, got {n}"
        )));
    }
    let last = (n - 1) as f64;
    let mut nodes = vec![0.0; n];
    let mut delta = vec![0.0; n];
    match domain {
        Domain::Interval01 => {
            for i in 0..=(n - 1) / 2 {
                let t = i as f64 / last;
                let x = 0.5 * (2.0 * t).powf(grading);
                nodes[i] = x;
                nodes[n - 1 - i] = 1.0 - x;
                delta[i] = x;
                delta[n - 1 - i] = x;
            }
            if n % 2 == 1 {
                nodes[(n - 1) / 2] = 0.5;
                delta[(n - 1) / 2] = 0.5;
            }
        }
        Domain::RadialBall { .. } => {
            for i in 0..n {
                let d = (1.0 - i as f64 / last).powf(grading);
                nodes[i] = 1.0 - d;
                delta[i] = d;
            }
        }
    }
    nodes[0] = 0.0;
    nodes[n - 1] = 1.0;
    delta[0] = domain.delta(0.0);
    delta[n - 1] = 0.0;
    if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!(
            "grading {grading} with {n} nodes collapses nodes at index {i} in double precision"
        )));
    }
    Ok(Grid1D::assemble(nodes, delta, grading, domain))
}

/// Real values attached to the nodes of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid1D>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid1D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid1D>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Sample `f(x)` at every node.
    pub fn sample(grid: Arc<Grid1D>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    /// Sample `f(x)` at interior nodes and set the Dirichlet nodes to zero.
    pub fn sample_dirichlet(grid: Arc<Grid1D>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &x)| if grid.is_dirichlet(i) { 0.0 } else { f(x) })
            .collect();
        Self { grid, values }
    }

    /// Like [`GridFunction::sample_dirichlet`] with `f(x, δ)`, where `δ` is the
    /// grid's own boundary distance (accurate even where `1 - x` is not).
    pub fn sample_with_delta(grid: Arc<Grid1D>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                if grid.is_dirichlet(i) {
                    0.0
                } else {
                    f(grid.nodes()[i], grid.delta()[i])
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Whether every Dirichlet node holds exactly zero.
    pub fn satisfies_dirichlet(&self) -> bool {
        (0..self.len())
            .filter(|&i| self.grid.is_dirichlet(i))
            .all(|i| self.values[i] == 0.0)
    }

    /// Zero the Dirichlet nodes.
    pub fn enforce_dirichlet(&mut self) {
        for i in 0..self.values.len() {
            if self.grid.is_dirichlet(i) {
                self.values[i] = 0.0;
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Index and value of the maximum.
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Ensure `other` lives on the same grid.
    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        same_grid(&self.grid, &other.grid)
    }

    /// Divided differences `Du` on every interval.
    pub fn differences(&self) -> Vec<f64> {
        self.values
            .windows(2)
            .zip(self.grid.widths())
            .map(|(w, h)| (w[1] - w[0]) / h)
            .collect()
    }

    /// Nodal derivative: centered in the interior, one-sided at the ends.
    pub fn nodal_derivative(&self) -> Vec<f64> {
        let x = self.grid.nodes();
        let u = &self.values;
        let n = u.len();
        (0..n)
            .map(|i| {
                if i == 0 {
                    (u[1] - u[0]) / (x[1] - x[0])
                } else if i == n - 1 {
                    (u[n - 1] - u[n - 2]) / (x[n - 1] - x[n - 2])
                } else {
                    (u[i + 1] - u[i - 1]) / (x[i + 1] - x[i - 1])
                }
            })
            .collect()
    }
}

pub(crate) fn same_grid(a: &Arc<Grid1D>, b: &Arc<Grid1D>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "grids differ ({} vs {} nodes)",
            a.len(),
            b.len()
        )))
    }
}
