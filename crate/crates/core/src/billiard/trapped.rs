use rayon::prelude::*;

use crate::billiard::dynamics::{billiard_map, BilliardStep};
use crate::billiard::table::{BilliardTable, PhasePoint, GLANCING_EPS};
use crate::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 1024;
pub const DEFAULT_BOUNCES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellStatus {
    Escaped,
    Glancing,
    Trapped,
}

impl CellStatus {
    /// Grey level used in the PGM output.
    pub fn byte(self) -> u8 {
        match self {
            CellStatus::Escaped => 0,
            CellStatus::Glancing => 128,
            CellStatus::Trapped => 255,
        }
    }
}

/// Status of a single phase point after `n_max` bounces forward and, by time
/// reversal, backward.
pub fn classify(table: &BilliardTable, p: PhasePoint, n_max: usize) -> Result<CellStatus> {
    if p.sigma.abs() >= 1.0 - GLANCING_EPS {
        return Ok(CellStatus::Glancing);
    }
    for start in [p, p.reversed()] {
        let mut q = start;
        for _ in 0..n_max {
            match billiard_map(table, q)? {
                BilliardStep::Hit(b) => q = b.to,
                BilliardStep::Escape => return Ok(CellStatus::Escaped),
                BilliardStep::Glancing => return Ok(CellStatus::Glancing),
            }
        }
    }
    Ok(CellStatus::Trapped)
}

/// Sampling window and resolution of a trapped-set raster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrappedOptions {
    pub n_theta: usize,
    pub n_sigma: usize,
    pub n_max: usize,
    /// Defaults to the whole component, centred on the point facing the
    /// centroid of the table.
    pub theta_range: Option<(f64, f64)>,
    pub sigma_range: (f64, f64),
}

impl Default for TrappedOptions {
    fn default() -> Self {
        Self {
            n_theta: DEFAULT_RESOLUTION,
            n_sigma: DEFAULT_RESOLUTION,
            n_max: DEFAULT_BOUNCES,
            theta_range: None,
            sigma_range: (-1.0, 1.0),
        }
    }
}

/// Per-cell trapped/escaped/glancing mask on one boundary component,
/// sampled at cell centres. Cell `(i, j)` has theta index `i` and sigma
/// index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrappedGrid {
    pub component: usize,
    pub theta_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub n_theta: usize,
    pub n_sigma: usize,
    pub n_max: usize,
    cells: Vec<CellStatus>,
}

pub fn trapped_set(
    table: &BilliardTable,
    component: usize,
    res: (usize, usize),
    n_max: usize,
) -> Result<TrappedGrid> {
    trapped_set_with(
        table,
        component,
        &TrappedOptions {
            n_theta: res.0,
            n_sigma: res.1,
            n_max,
            ..TrappedOptions::default()
        },
    )
}

pub fn trapped_set_with(
    table: &BilliardTable,
    component: usize,
    opts: &TrappedOptions,
) -> Result<TrappedGrid> {
    if !table.no_eclipse_check()? {
        return Err(Error::EclipseViolation);
    }
    if opts.n_theta == 0 || opts.n_sigma == 0 {
        return Err(Error::InvalidArgument("raster resolution must be positive".into()));
    }
    let (s0, s1) = opts.sigma_range;
    if !(-1.0 <= s0 && s0 < s1 && s1 <= 1.0) {
        return Err(Error::InvalidArgument(format!("bad sigma range [{s0}, {s1}]")));
    }
    let theta_range = match opts.theta_range {
        Some((a, b)) if a < b => (a, b),
        Some((a, b)) => {
            return Err(Error::InvalidArgument(format!("bad theta range [{a}, {b}]")));
        }
        None => {
            let c = table.theta_facing_centroid(component)?;
            let half = 0.5 * table.component_length(component)?;
            (c - half, c + half)
        }
    };
    let mut grid = TrappedGrid {
        component,
        theta_range,
        sigma_range: opts.sigma_range,
        n_theta: opts.n_theta,
        n_sigma: opts.n_sigma,
        n_max: opts.n_max,
        cells: Vec::new(),
    };
    let cells = (0..opts.n_theta * opts.n_sigma)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % opts.n_theta, idx / opts.n_theta);
            let (theta, sigma) = grid.cell_center(i, j);
            let theta = table.reduce_theta(component, theta)?;
            classify(table, PhasePoint::new(component, theta, sigma), opts.n_max)
        })
        .collect::<Result<Vec<_>>>()?;
    grid.cells = cells;
    Ok(grid)
}

impl TrappedGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let (t0, t1) = self.theta_range;
        let (s0, s1) = self.sigma_range;
        (
            t0 + (i as f64 + 0.5) * (t1 - t0) / self.n_theta as f64,
            s0 + (j as f64 + 0.5) * (s1 - s0) / self.n_sigma as f64,
        )
    }

    /// Cell containing `(theta, sigma)`; `theta` is shifted by whole
    /// component lengths `period` into the window when possible.
    pub fn cell_of(&self, theta: f64, sigma: f64, period: f64) -> Option<(usize, usize)> {
        let (t0, t1) = self.theta_range;
        let (s0, s1) = self.sigma_range;
        let mut t = theta;
        if period > 0.0 {
            t -= period * ((t - t0) / period).floor();
        }
        if !(t0..t1).contains(&t) || !(s0..s1).contains(&sigma) {
            return None;
        }
        let i = ((t - t0) / (t1 - t0) * self.n_theta as f64) as usize;
        let j = ((sigma - s0) / (s1 - s0) * self.n_sigma as f64) as usize;
        Some((i.min(self.n_theta - 1), j.min(self.n_sigma - 1)))
    }

    pub fn status(&self, i: usize, j: usize) -> CellStatus {
        self.cells[j * self.n_theta + i]
    }

    pub fn cells(&self) -> &[CellStatus] {
        &self.cells
    }

    pub fn count(&self, status: CellStatus) -> usize {
        self.cells.iter().filter(|&&c| c == status).count()
    }

    pub fn trapped_fraction(&self) -> f64 {
        self.count(CellStatus::Trapped) as f64 / self.cells.len() as f64
    }

    /// Fraction of cells whose status equals that of their image under a
    /// cell permutation.
    pub fn agreement_under(&self, f: impl Fn(usize, usize) -> (usize, usize)) -> f64 {
        let mut same = 0usize;
        for j in 0..self.n_sigma {
            for i in 0..self.n_theta {
                let (a, b) = f(i, j);
                if self.status(i, j) == self.status(a, b) {
                    same += 1;
                }
            }
        }
        same as f64 / self.cells.len() as f64
    }

    /// Agreement under `(theta, sigma) -> (-theta, -sigma)` about the window
    /// centre, the action of a mirror symmetry of the table through this
    /// component.
    pub fn reflection_agreement(&self) -> f64 {
        self.agreement_under(|i, j| (self.n_theta - 1 - i, self.n_sigma - 1 - j))
    }

    /// Binary PGM, one byte per cell, highest sigma in the first row.
    pub fn to_pgm(&self, comment: &str) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cells.len() + 256);
        out.extend_from_slice(b"P5\n");
        for line in comment.lines() {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        out.extend_from_slice(format!("{} {}\n255\n", self.n_theta, self.n_sigma).as_bytes());
        for j in (0..self.n_sigma).rev() {
            out.extend(self.cells[j * self.n_theta..(j + 1) * self.n_theta].iter().map(|c| c.byte()));
        }
        out
    }

    /// Plain-text description of the raster for a sidecar file.
    pub fn header(&self) -> String {
        format!(
            "component = {}\ntheta_min = {:.17e}\ntheta_max = {:.17e}\nsigma_min = {:.17e}\nsigma_max = {:.17e}\nn_theta = {}\nn_sigma = {}\nn_max = {}\nrows = sigma descending\nvalues = 0 escaped, 128 glancing, 255 trapped\ntrapped_fraction = {:.17e}\n",
            self.component,
            self.theta_range.0,
            self.theta_range.1,
            self.sigma_range.0,
            self.sigma_range.1,
            self.n_theta,
            self.n_sigma,
            self.n_max,
            self.trapped_fraction(),
        )
    }
}
