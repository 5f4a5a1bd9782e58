//! Piecewise-uniform Shishkin mesh in space and uniform grid in time.

use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, Regime, Side};

/// Layer decay rates `(theta1, theta2)`: `theta1` governs the interior layers
/// next to `d`, `theta2` the boundary layers at `x = 0` and `x = 1`.
pub fn compute_thetas(spec: &ProblemSpec, regime: Regime) -> (f64, f64) {
    let alpha = spec.alpha();
    match regime {
        Regime::EpsDominant => {
            let theta1 = (spec.rho * alpha).sqrt() / spec.eps.sqrt();
            (theta1, theta1 / 2.0)
        }
        Regime::MuDominant => (alpha * spec.mu / spec.eps, spec.rho / (2.0 * spec.mu)),
    }
}

fn check_mesh_size(n: usize, min: usize) -> Result<()> {
    if n < min || !n.is_multiple_of(8) {
        return Err(Error::InvalidMeshSize(n));
    }
    Ok(())
}

/// Transition widths `(tau1, tau2, tau3, tau4)`; the fine segments are
/// `[0,tau1]`, `[d-tau2,d]`, `[d,d+tau3]` and `[1-tau4,1]`.
pub fn compute_transition_points(d: f64, theta1: f64, theta2: f64, n: usize) -> Result<[f64; 4]> {
    check_mesh_size(n, 16)?;
    let ln_n = (n as f64).ln();
    let (left, right) = (d / 4.0, (1.0 - d) / 4.0);
    Ok([
        left.min(2.0 / theta2 * ln_n),
        left.min(2.0 / theta1 * ln_n),
        right.min(2.0 / theta1 * ln_n),
        right.min(2.0 / theta2 * ln_n),
    ])
}

/// Spatial mesh with `N + 1` nodes split into six uniform segments holding
/// `N/8, N/4, N/8, N/8, N/4, N/8` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    nodes: Vec<f64>,
    tau: [f64; 4],
    seg_steps: [f64; 6],
    n: usize,
    d: f64,
}

impl SpatialMesh {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn d_index(&self) -> usize {
        self.n / 2
    }

    pub fn tau(&self) -> [f64; 4] {
        self.tau
    }

    /// Nominal step sizes `h1..h6` of the six segments.
    pub fn seg_steps(&self) -> [f64; 6] {
        self.seg_steps
    }

    /// `h_i = x_i - x_{i-1}` for `1 <= i <= N`.
    #[inline]
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    /// `(h_i + h_{i+1}) / 2` for interior `i`.
    #[inline]
    pub fn hbar(&self, i: usize) -> f64 {
        (self.nodes[i + 1] - self.nodes[i - 1]) / 2.0
    }

    /// Indices of `tau1`, `d - tau2`, `d + tau3`, `1 - tau4`.
    pub fn transition_indices(&self) -> [usize; 4] {
        let e = self.n / 8;
        [e, 3 * e, 5 * e, 7 * e]
    }

    pub fn is_transition(&self, i: usize) -> bool {
        self.transition_indices().contains(&i)
    }

    /// Segment (0-based, `0..6`) containing the interval `(x_{i-1}, x_i)`.
    pub fn segment_of_interval(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.n);
        let e = self.n / 8;
        match i - 1 {
            k if k < e => 0,
            k if k < 3 * e => 1,
            k if k < 4 * e => 2,
            k if k < 5 * e => 3,
            k if k < 7 * e => 4,
            _ => 5,
        }
    }

    /// Side of the discontinuity for a node other than `N/2`.
    pub fn side(&self, i: usize) -> Side {
        if i < self.n / 2 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

/// Lays out the six uniform segments for the given transition widths.
pub fn build_spatial_mesh(d: f64, tau: [f64; 4], n: usize) -> Result<SpatialMesh> {
    check_mesh_size(n, 8)?;
    let anchors = [0.0, tau[0], d - tau[1], d, d + tau[2], 1.0 - tau[3], 1.0];
    let e = n / 8;
    let starts = [0, e, 3 * e, 4 * e, 5 * e, 7 * e, n];

    let mut seg_steps = [0.0; 6];
    for k in 0..6 {
        let length = anchors[k + 1] - anchors[k];
        if !(length > 0.0) {
            return Err(Error::DegenerateSegment {
                segment: k + 1,
                length,
            });
        }
        seg_steps[k] = length / (starts[k + 1] - starts[k]) as f64;
    }

    let mut nodes = Vec::with_capacity(n + 1);
    for k in 0..6 {
        for i in starts[k]..starts[k + 1] {
            nodes.push(if i == starts[k] {
                anchors[k]
            } else {
                anchors[k] + (i - starts[k]) as f64 * seg_steps[k]
            });
        }
    }
    nodes.push(1.0);

    Ok(SpatialMesh {
        nodes,
        tau,
        seg_steps,
        n,
        d,
    })
}

/// Full construction: regime, layer rates, transition points, mesh.
pub fn shishkin_mesh(spec: &ProblemSpec, regime: Regime, n: usize) -> Result<SpatialMesh> {
    let (theta1, theta2) = compute_thetas(spec, regime);
    let tau = compute_transition_points(spec.d, theta1, theta2, n)?;
    build_spatial_mesh(spec.d, tau, n)
}

/// Uniform time levels `t_j = j T / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    levels: Vec<f64>,
    dt: f64,
}

impl TimeGrid {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }
}

pub fn build_time_grid(final_time: f64, steps: usize) -> Result<TimeGrid> {
    if steps == 0 || !(final_time > 0.0 && final_time.is_finite()) {
        return Err(Error::InvalidTimeGrid { final_time, steps });
    }
    let dt = final_time / steps as f64;
    let mut levels: Vec<f64> = (0..steps).map(|j| j as f64 * dt).collect();
    levels.push(final_time);
    Ok(TimeGrid { levels, dt })
}

/// Halves every interval in space and time. Transition points are kept, so
/// coarse node `i` is fine node `2i` and coarse level `j` is fine level `2j`.
pub fn bisect(mesh: &SpatialMesh, grid: &TimeGrid) -> (SpatialMesh, TimeGrid) {
    let mut nodes = Vec::with_capacity(2 * mesh.n + 1);
    for w in mesh.nodes.windows(2) {
        nodes.push(w[0]);
        nodes.push(0.5 * (w[0] + w[1]));
    }
    nodes.push(mesh.nodes[mesh.n]);
    let fine_mesh = SpatialMesh {
        nodes,
        tau: mesh.tau,
        seg_steps: mesh.seg_steps.map(|h| h / 2.0),
        n: 2 * mesh.n,
        d: mesh.d,
    };
    let fine_grid = build_time_grid(grid.final_time(), 2 * grid.steps())
        .expect("coarse grid was valid");
    (fine_mesh, fine_grid)
}
