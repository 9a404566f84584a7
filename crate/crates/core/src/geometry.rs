//! Curvature and degree of the degree-`p` line bundle on `E_i`.
//!
//! The bundle is trivialized over the charts `y < 1/2` and `y > 1/2` of the unit
//! square with transition `g = e^{2πipx}`, glued by the partition
//! `ψ₁ = sin πy`, `ψ₂ = cos πy`. The frame `Ψ = (ψ₁, gψ₂)` gives the rank-one
//! projection `P = ΨΨ†` and the Grassmannian connection `A = Ψ†dΨ = |ψ₂|² ḡ dg`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sections::check_tau;
use crate::weyl::cis;

/// Tolerance on the projection invariants at every node.
pub const PROJECTION_TOL: f64 = 1e-10;

/// `(i/2π) ∫ Ω` for the homogeneous connection `ω = (2πip/ω_y) y dx`, whose
/// curvature `Ω = -(2πip/ω_y) dx∧dy` is constant on the fundamental domain of area `ω_y`.
pub fn chern_homogeneous(p: i64, tau: Complex64) -> Result<f64> {
    check_tau(tau)?;
    let omega = Complex64::new(0.0, -2.0 * PI * p as f64 / tau.im);
    let integral = omega * tau.im;
    Ok((Complex64::i() / (2.0 * PI) * integral).re)
}

/// `(sin πy, cos πy)`.
pub fn partition_chi(y: f64) -> (f64, f64) {
    let (s, c) = (PI * y).sin_cos();
    (s, c)
}

/// `1` on `y ≤ 1/2`, `e^{2πipx}` on `y > 1/2`. At `y = 1/2` the weight `ψ₂` vanishes,
/// so either side would do.
pub fn transition_g(x: f64, y: f64, p: i64) -> Complex64 {
    if y <= 0.5 {
        Complex64::new(1.0, 0.0)
    } else {
        cis(2.0 * PI * p as f64 * x)
    }
}

fn frame(x: f64, y: f64, p: i64) -> [Complex64; 2] {
    let (s, c) = partition_chi(y);
    [Complex64::new(s, 0.0), transition_g(x, y, p) * c]
}

/// `(Ψ†∂_xΨ, Ψ†∂_yΨ)` from the closed-form derivatives of the frame.
fn connection(x: f64, y: f64, p: i64) -> (Complex64, Complex64) {
    let (s, c) = partition_chi(y);
    let g = transition_g(x, y, p);
    let dg_dx = if y <= 0.5 { Complex64::default() } else { Complex64::new(0.0, 2.0 * PI * p as f64) * g };
    let psi = [Complex64::new(s, 0.0), g * c];
    let dpsi_dx = [Complex64::default(), dg_dx * c];
    let dpsi_dy = [Complex64::new(PI * c, 0.0), g * (-PI * s)];
    let pair = |d: [Complex64; 2]| psi[0].conj() * d[0] + psi[1].conj() * d[1];
    (pair(dpsi_dx), pair(dpsi_dy))
}

/// Analytic curvature coefficient: `Ω = Ω_xy dx∧dy`, `Ω_xy = 2π²ip sin 2πy` on `y > 1/2`.
pub fn curvature_exact(y: f64, p: i64) -> Complex64 {
    if y <= 0.5 {
        Complex64::default()
    } else {
        Complex64::new(0.0, 2.0 * PI * PI * p as f64 * (2.0 * PI * y).sin())
    }
}

/// `p (|ψ₂(1)|² - |ψ₂(1/2)|²)`: the degree after integrating `Ω` in `y` by hand.
pub fn semi_analytic_degree(p: i64) -> f64 {
    let (_, at_one) = partition_chi(1.0);
    let (_, at_half) = partition_chi(0.5);
    p as f64 * (at_one * at_one - at_half * at_half)
}

pub type Mat2 = [[Complex64; 2]; 2];

/// `P = ΨΨ†` sampled on the `(nx+1) × (ny+1)` nodes of `[0,1]²`.
#[derive(Debug, Clone)]
pub struct ProjectionField {
    pub nx: usize,
    pub ny: usize,
    pub p: i64,
    values: Vec<Mat2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionDefects {
    pub idempotency: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub periodicity: f64,
}

impl ProjectionDefects {
    pub fn max(&self) -> f64 {
        self.idempotency.max(self.hermiticity).max(self.trace).max(self.periodicity)
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_dist(a: &Mat2, b: &Mat2) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

impl ProjectionField {
    pub fn at(&self, i: usize, j: usize) -> &Mat2 {
        &self.values[j * (self.nx + 1) + i]
    }

    pub fn defects(&self) -> ProjectionDefects {
        let mut d = ProjectionDefects { idempotency: 0.0, hermiticity: 0.0, trace: 0.0, periodicity: 0.0 };
        for m in &self.values {
            d.idempotency = d.idempotency.max(mat_dist(&mat_mul(m, m), m));
            let adj = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
            d.hermiticity = d.hermiticity.max(mat_dist(&adj, m));
            d.trace = d.trace.max((m[0][0] + m[1][1] - 1.0).norm());
        }
        for i in 0..=self.nx {
            d.periodicity = d.periodicity.max(mat_dist(self.at(i, 0), self.at(i, self.ny)));
        }
        for j in 0..=self.ny {
            d.periodicity = d.periodicity.max(mat_dist(self.at(0, j), self.at(self.nx, j)));
        }
        d
    }
}

/// Builds `P = ΨΨ†` and checks idempotency, hermiticity, unit trace and
/// periodicity at every node.
pub fn projection_p(nx: usize, ny: usize, p: i64) -> Result<ProjectionField> {
    if nx < 8 || ny < 8 {
        return Err(invalid(format!("projection grid must be at least 8×8, got {nx}×{ny}")));
    }
    let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let psi = frame(i as f64 / nx as f64, j as f64 / ny as f64, p);
            values.push([[psi[0] * psi[0].conj(), psi[0] * psi[1].conj()], [psi[1] * psi[0].conj(), psi[1] * psi[1].conj()]]);
        }
    }
    let field = ProjectionField { nx, ny, p, values };
    let d = field.defects();
    if d.max() > PROJECTION_TOL {
        return Err(Error::Construction(format!("projection invariants violated: {d:?}")));
    }
    Ok(field)
}

/// Cell-centred samples over `[0,1]²`, row-major in `y`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) / self.nx as f64, (j as f64 + 0.5) / self.ny as f64)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.nx + i]
    }

    /// CSV with header `x,y,omega_im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,omega_im\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (x, y) = self.center(i, j);
                s.push_str(&format!("{x},{y},{}\n", self.get(i, j).im));
            }
        }
        s
    }
}

fn check_grid(nx: usize, ny: usize) -> Result<()> {
    if nx < 8 || ny < 8 {
        return Err(invalid(format!("curvature grid must be at least 8×8, got {nx}×{ny}")));
    }
    if !ny.is_multiple_of(2) {
        return Err(invalid("ny must be even so that y = 1/2 is a grid line"));
    }
    Ok(())
}

/// Discrete curvature: circulation of `A` around each cell (edges by the
/// trapezoid rule) divided by the cell area.
pub fn curvature_field(p: i64, nx: usize, ny: usize) -> Result<GridField> {
    check_grid(nx, ny)?;
    let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let nodes: Vec<(Complex64, Complex64)> = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| connection(i as f64 * hx, j as f64 * hy, p)))
        .collect();
    let at = |i: usize, j: usize| nodes[j * (nx + 1) + i];
    // the chart value on the line y = 1/2 matches both sides since |ψ₂|² = 0 there
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let bottom = 0.5 * (at(i, j).0 + at(i + 1, j).0) * hx;
            let right = 0.5 * (at(i + 1, j).1 + at(i + 1, j + 1).1) * hy;
            let top = 0.5 * (at(i, j + 1).0 + at(i + 1, j + 1).0) * hx;
            let left = 0.5 * (at(i, j).1 + at(i, j + 1).1) * hy;
            values.push((bottom + right - top - left) / (hx * hy));
        }
    }
    Ok(GridField { nx, ny, values })
}

/// Largest deviation of the discrete curvature from the analytic one at cell centres.
pub fn curvature_field_error(field: &GridField, p: i64) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..field.ny {
        for i in 0..field.nx {
            let (_, y) = field.center(i, j);
            worst = worst.max((field.get(i, j) - curvature_exact(y, p)).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernResult {
    pub p: i64,
    pub grid: usize,
    pub value: f64,
    /// `|value(grid) - value(grid/2)|`.
    pub est_error: f64,
}

fn degree_from_field(field: &GridField) -> f64 {
    let area = 1.0 / (field.nx * field.ny) as f64;
    let total: Complex64 = field.values.iter().sum::<Complex64>() * area;
    (Complex64::i() / (2.0 * PI) * total).re
}

/// `(i/2π) ∬ Ω` from the discrete curvature on an `n × n` grid.
pub fn chern_grassmann(p: i64, n: usize) -> Result<ChernResult> {
    let value = degree_from_field(&curvature_field(p, n, n)?);
    let half = n / 2;
    let est_error = if half >= 8 && half.is_multiple_of(2) {
        (value - degree_from_field(&curvature_field(p, half, half)?)).abs()
    } else {
        f64::NAN
    };
    Ok(ChernResult { p, grid: n, value, est_error })
}
