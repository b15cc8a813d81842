use std::f64::consts::PI;
use std::sync::Arc;

use crate::{Error, Result};

/// Default number of Chebyshev–Gauss–Lobatto nodes.
pub const DEFAULT_NODES: usize = 33;

/// Barycentric evaluation is allowed on `|x| <= EXTRAPOLATION_MARGIN`.
pub const EXTRAPOLATION_MARGIN: f64 = 1.25;

/// Return the `n` Chebyshev–Gauss–Lobatto points of `[-1, 1]` in ascending
/// order.
///
/// The points are `cos(k pi / (n - 1))` reversed, evaluated through the
/// sine form so that the set is exactly symmetric and contains `0` for odd `n`.
pub fn cheb_nodes(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 Chebyshev nodes, got {n}"
        )));
    }
    let m = (n - 1) as f64;
    Ok((0..n)
        .map(|j| {
            let k = 2.0 * j as f64 - m;
            (PI * k / (2.0 * m)).sin()
        })
        .collect())
}

/// Nodes, barycentric weights and the first-order differentiation matrix of
/// a Chebyshev–Gauss–Lobatto grid.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // row-major n x n
    diff: Vec<f64>,
}

impl ChebGrid {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        let nodes = cheb_nodes(n)?;
        let mut weights: Vec<f64> = (0..n)
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;

        let mut diff = vec![0.0; n * n];
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (weights[j] / weights[i]) / (nodes[i] - nodes[j]);
                    diff[i * n + j] = d;
                    row_sum += d;
                }
            }
            // negative sum trick: exact annihilation of constants
            diff[i * n + i] = -row_sum;
        }
        Ok(Arc::new(Self {
            nodes,
            weights,
            diff,
        }))
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

    /// Index of the node equal to `0`, present for odd node counts.
    pub fn center_index(&self) -> Option<usize> {
        let n = self.len();
        (n % 2 == 1).then_some(n / 2)
    }

    fn apply_diff(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.diff[i * n..(i + 1) * n]
                    .iter()
                    .zip(values)
                    .map(|(d, v)| d * v)
                    .sum()
            })
            .collect()
    }

    fn barycentric(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let dx = x - xj;
            if dx == 0.0 {
                return fj;
            }
            let c = wj / dx;
            num += c * fj;
            den += c;
        }
        num / den
    }
}

/// A real function on `[-1, 1]` represented by its samples at the
/// Chebyshev–Gauss–Lobatto nodes of a shared grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<ChebGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(grid: Arc<ChebGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<ChebGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<ChebGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Barycentric interpolation at `x`; exact at the nodes.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x.abs() > EXTRAPOLATION_MARGIN {
            return Err(Error::OutOfDomain(format!(
                "interpolation point {x} outside |x| <= {EXTRAPOLATION_MARGIN}"
            )));
        }
        Ok(self.grid.barycentric(&self.values, x))
    }

    /// Spectral derivative of order `k`, `1 <= k <= n - 1`.
    pub fn derivative(&self, k: usize) -> Result<GridFunction> {
        let n = self.len();
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "derivative order {k} outside 1..={}",
                n - 1
            )));
        }
        let mut values = self.values.clone();
        for _ in 0..k {
            values = self.grid.apply_diff(&values);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Value at the center node `x = 0` (odd grids) or by interpolation.
    pub fn at_zero(&self) -> f64 {
        match self.grid.center_index() {
            Some(i) => self.values[i],
            None => self.grid.barycentric(&self.values, 0.0),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_{1<=j<=k} max_nodes |f^(j)|`, the grid version of the `C^k`
    /// seminorm.
    pub fn ck_seminorm(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("C^k seminorm needs k >= 1".into()));
        }
        let mut best: f64 = 0.0;
        let mut d = self.clone();
        for _ in 0..k {
            d = Self {
                grid: self.grid.clone(),
                values: self.grid.apply_diff(&d.values),
            };
            best = best.max(d.sup_norm());
        }
        Ok(best)
    }

    /// `max(sup |f|, sup |f'|)` over the nodes.
    pub fn c1_norm(&self) -> f64 {
        let d = self.grid.apply_diff(&self.values);
        d.iter().fold(self.sup_norm(), |m, v| m.max(v.abs()))
    }

    /// Largest difference quotient of the `k`-th derivative over node pairs.
    pub fn lipschitz_of_derivative(&self, k: usize) -> Result<f64> {
        let d = if k == 0 {
            self.clone()
        } else {
            self.derivative(k)?
        };
        let xs = self.nodes();
        let mut best: f64 = 0.0;
        for i in 0..xs.len() {
            for j in (i + 1)..xs.len() {
                let q = (d.values[i] - d.values[j]).abs() / (xs[i] - xs[j]).abs();
                best = best.max(q);
            }
        }
        Ok(best)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(())
    }
}
