//! Line-bundle data over the elliptic curve `E_τ = ℂ/(ℤ + τℤ)`.
//!
//! Sections of degree `p` are quasi-periodic functions
//! `f(z+1) = f(z)`, `f(z+τ) = e^{-πip(ω_x+2x)} f(z)`, built from `|p|` fibers by the
//! Weil-Brezin-Zak series
//! `f(z) = Σ_n e^{2πinx} e^{πin²ω_x/p} f_{[n]}(y + nω_y/p)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure_finite, invalid, Result};
use crate::quadrature::periodic_integral;
use crate::weyl::{cis, GaussPacket, GaussPacketTerm};

pub const DEFAULT_SERIES_N: usize = 12;
/// Integrality tolerance for the module constraint.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliParams {
    pub theta: f64,
    pub tau: Complex64,
    /// Degree. Zero is allowed and describes plain doubly periodic functions.
    pub p: i64,
}

impl ModuliParams {
    pub fn new(theta: f64, tau: Complex64, p: i64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(invalid(format!("theta must lie in [0,1), got {theta}")));
        }
        check_tau(tau)?;
        Ok(Self { theta, tau, p })
    }

    pub fn omega_x(&self) -> f64 {
        self.tau.re
    }

    pub fn omega_y(&self) -> f64 {
        self.tau.im
    }

    /// `q = e^{πiτ}`
    pub fn q(&self) -> Complex64 {
        (Complex64::i() * PI * self.tau).exp()
    }

    /// `(ω_x, ω_y - pθ/2)` before rounding.
    fn constraint_values(&self) -> (f64, f64) {
        (self.omega_x(), self.omega_y() - self.p as f64 * self.theta / 2.0)
    }

    pub fn constraint_satisfied(&self) -> bool {
        let (a, b) = self.constraint_values();
        (a - a.round()).abs() <= CONSTRAINT_TOL && (b - b.round()).abs() <= CONSTRAINT_TOL
    }

    /// `(r, s) = (ω_x, ω_y - pθ/2)` when both are integers.
    pub fn rs(&self) -> Option<(i64, i64)> {
        let (a, b) = self.constraint_values();
        self.constraint_satisfied().then(|| (a.round() as i64, b.round() as i64))
    }

    /// Distance of `(ω_x, ω_y - pθ/2)` from `ℤ²` in the sup norm.
    pub fn constraint_gap(&self) -> f64 {
        let (a, b) = self.constraint_values();
        (a - a.round()).abs().max((b - b.round()).abs())
    }
}

pub(crate) fn check_tau(tau: Complex64) -> Result<()> {
    ensure_finite("tau.re", tau.re)?;
    ensure_finite("tau.im", tau.im)?;
    if tau.im <= 0.0 {
        return Err(invalid(format!("Im tau must be positive, got {}", tau.im)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// `α^p(m+nτ, z) = q^{-pn²} e^{-2πipnz}`, holomorphic in `z`.
    Alpha,
    /// `β^p(m+nτ, z) = e^{-πiω_x pn²} e^{-2πipnx}`, unitary.
    Beta,
}

/// Factor of automorphy for `λ = m + nτ`.
pub fn automorphy_factor(kind: FactorKind, p: i64, (_m, n): (i64, i64), z: Complex64, tau: Complex64) -> Complex64 {
    let (p, n) = (p as f64, n as f64);
    match kind {
        FactorKind::Alpha => (-Complex64::i() * PI * (tau * p * n * n + 2.0 * p * n * z)).exp(),
        FactorKind::Beta => cis(-PI * p * (tau.re * n * n + 2.0 * n * z.re)),
    }
}

fn lattice_point((m, n): (i64, i64), tau: Complex64) -> Complex64 {
    m as f64 + n as f64 * tau
}

fn relative_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / rhs.norm().max(1.0)
}

/// Worst relative violation of `e(λ+λ′, z) = e(λ, z+λ′) e(λ′, z)` over random
/// `λ, λ′ ∈ [-3,3]²` and `z` in the fundamental domain.
pub fn cocycle_defect_with<R: Rng + ?Sized>(
    factor: impl Fn((i64, i64), Complex64) -> Complex64,
    tau: Complex64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    check_tau(tau)?;
    if samples == 0 {
        return Err(invalid("samples must be ≥ 1"));
    }
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let l1 = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let l2 = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let z = rng.gen::<f64>() + rng.gen::<f64>() * tau;
        let sum = (l1.0 + l2.0, l1.1 + l2.1);
        let lhs = factor(sum, z);
        let rhs = factor(l1, z + lattice_point(l2, tau)) * factor(l2, z);
        worst = worst.max(relative_residual(rhs, lhs));
    }
    Ok(worst)
}

pub fn cocycle_defect<R: Rng + ?Sized>(kind: FactorKind, p: i64, tau: Complex64, samples: usize, rng: &mut R) -> Result<f64> {
    cocycle_defect_with(|l, z| automorphy_factor(kind, p, l, z, tau), tau, samples, rng)
}

/// Defect of `f(z+1) = f(z)` and `f(z+τ) = e(τ, z) f(z)` on a `grid × grid`
/// sample `z = a + bτ`, `a, b ∈ [0,1)`. Each residual is scaled by `|e(τ, z)|`
/// times `max(1, M)`, with `M` the largest `|f|` on the same row of the sample;
/// this stays meaningful near zeros of `f` and for the growing `α^p` gauge.
pub fn quasiperiodicity_defect_kind(
    f: impl Fn(Complex64) -> Complex64,
    params: &ModuliParams,
    kind: FactorKind,
    grid: usize,
) -> Result<f64> {
    if grid < 2 {
        return Err(invalid("grid must be ≥ 2"));
    }
    let tau = params.tau;
    let mut worst = 0.0_f64;
    for j in 0..grid {
        let row: Vec<Complex64> = (0..grid).map(|i| i as f64 / grid as f64 + j as f64 / grid as f64 * tau).collect();
        let vals: Vec<Complex64> = row.iter().map(|&z| f(z)).collect();
        let scale = vals.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for (&z, &fz) in row.iter().zip(&vals) {
            worst = worst.max((f(z + 1.0) - fz).norm() / scale);
            let factor = automorphy_factor(kind, params.p, (0, 1), z, tau);
            worst = worst.max((f(z + tau) - factor * fz).norm() / (factor.norm() * scale));
        }
    }
    Ok(worst)
}

/// [`quasiperiodicity_defect_kind`] for the unitary factor `β^p`.
pub fn quasiperiodicity_defect(f: impl Fn(Complex64) -> Complex64, params: &ModuliParams, grid: usize) -> Result<f64> {
    quasiperiodicity_defect_kind(f, params, FactorKind::Beta, grid)
}

/// Maps a `β^p` section to an `α^p` one: `f ↦ e^{πpy²/ω_y} f`.
pub fn to_alpha_gauge(f: impl Fn(Complex64) -> Complex64, p: i64, tau: Complex64) -> impl Fn(Complex64) -> Complex64 {
    move |z| f(z) * (PI * p as f64 * z.im * z.im / tau.im).exp()
}

/// An element of `S(ℝ) ⊗ ℂ^p`: one packet per residue class `0..p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector {
    packets: Vec<GaussPacket>,
}

impl FiberVector {
    pub fn new(packets: Vec<GaussPacket>) -> Result<Self> {
        if packets.is_empty() {
            return Err(invalid("a fiber vector needs at least one component"));
        }
        Ok(Self { packets })
    }

    pub fn zero(p: usize) -> Result<Self> {
        Self::new(vec![GaussPacket::zero(); p])
    }

    pub fn dim(&self) -> usize {
        self.packets.len()
    }

    pub fn packets(&self) -> &[GaussPacket] {
        &self.packets
    }

    /// Component for the class `n mod p`.
    pub fn class(&self, n: i64) -> &GaussPacket {
        &self.packets[n.rem_euclid(self.dim() as i64) as usize]
    }

    pub fn map(&self, f: impl Fn(&GaussPacket) -> Result<GaussPacket>) -> Result<Self> {
        Ok(Self { packets: self.packets.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &FiberVector) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { packets: self.packets.iter().zip(&other.packets).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { packets: self.packets.iter().map(|a| a.scale(c)).collect() }
    }

    /// `Σ_k ⟨f_k, g_k⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FiberVector) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self.packets.iter().zip(&other.packets).map(|(a, b)| a.inner(b)).sum())
    }

    pub(crate) fn check_dim(&self, other: &FiberVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(invalid(format!("fiber dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    /// Largest `|f_k(t) - g_k(t)|` over the sample points.
    pub fn max_diff_on(&self, other: &FiberVector, ts: &[f64]) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .packets
            .iter()
            .zip(&other.packets)
            .flat_map(|(a, b)| ts.iter().map(move |&t| (a.eval(t) - b.eval(t)).norm()))
            .fold(0.0, f64::max))
    }

    pub fn support_radius(&self, eps: f64) -> f64 {
        self.packets.iter().map(|p| p.support_radius(eps)).fold(0.0, f64::max)
    }
}

/// A degree-`p` section given by its fibers and evaluated by the truncated WBZ series.
#[derive(Debug, Clone)]
pub struct QuasiSection {
    params: ModuliParams,
    fibers: FiberVector,
    series_n: usize,
}

impl QuasiSection {
    pub fn new(params: ModuliParams, fibers: FiberVector, series_n: usize) -> Result<Self> {
        if params.p == 0 {
            return Err(invalid("sections need nonzero degree"));
        }
        if fibers.dim() as i64 != params.p.abs() {
            return Err(invalid(format!("expected {} fibers, got {}", params.p.abs(), fibers.dim())));
        }
        if series_n == 0 {
            return Err(invalid("series_N must be ≥ 1"));
        }
        Ok(Self { params, fibers, series_n })
    }

    pub fn params(&self) -> &ModuliParams {
        &self.params
    }

    pub fn fibers(&self) -> &FiberVector {
        &self.fibers
    }

    pub fn series_n(&self) -> usize {
        self.series_n
    }

    pub fn with_series_n(&self, series_n: usize) -> Result<Self> {
        Self::new(self.params, self.fibers.clone(), series_n)
    }

    /// Index whose fiber argument `y + nω_y/p` is closest to zero. Summing over a
    /// window around it makes the truncation commute with `z ↦ z + τ`.
    fn window_center(&self, y: f64) -> i64 {
        (-y * self.params.p as f64 / self.params.omega_y()).round() as i64
    }

    fn term(&self, n: i64, z: Complex64) -> Complex64 {
        let p = self.params.p as f64;
        let nf = n as f64;
        let arg = z.im + nf * self.params.omega_y() / p;
        let phase = 2.0 * PI * nf * z.re + PI * nf * nf * self.params.omega_x() / p;
        cis(phase) * self.fibers.class(n).eval(arg)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let c = self.window_center(z.im);
        let n = self.series_n as i64;
        (c - n..=c + n).map(|k| self.term(k, z)).sum()
    }

    /// Bound on the discarded part of the series at `z`, from the packet envelopes.
    pub fn tail_bound(&self, z: Complex64) -> f64 {
        let p = self.params.p as f64;
        let c = self.window_center(z.im);
        let n = self.series_n as i64;
        let mut total = 0.0;
        for k in n + 1..=n + 64 {
            let shell: f64 = [c + k, c - k]
                .iter()
                .map(|&m| self.fibers.class(m).envelope(z.im + m as f64 * self.params.omega_y() / p))
                .sum();
            total += shell;
            if shell < 1e-300 {
                break;
            }
        }
        total
    }

    /// Covariant derivative on the fibers: `∇₁ = (2πip/ω_y)·t`, `∇₂ = d/dt`.
    /// On evaluated sections these are `∂_x + 2πipy/ω_y` and `∂_y`.
    pub fn nabla(&self, direction: u8) -> Result<Self> {
        let fibers = match direction {
            1 => {
                let c = Complex64::new(0.0, 2.0 * PI * self.params.p as f64 / self.params.omega_y());
                self.fibers.map(|f| Ok(f.mul_t()?.scale(c)))?
            }
            2 => self.fibers.map(GaussPacket::derivative)?,
            d => return Err(invalid(format!("direction must be 1 or 2, got {d}"))),
        };
        Ok(Self { fibers, ..self.clone() })
    }

    /// Values on the regular `grid × grid` sample `z = a + bτ` of the fundamental
    /// parallelogram, as `(x, y, f(z))`.
    pub fn sample_grid(&self, grid: usize) -> Vec<(f64, f64, Complex64)> {
        let tau = self.params.tau;
        let mut out = Vec::with_capacity(grid * grid);
        for j in 0..grid {
            for i in 0..grid {
                let z = i as f64 / grid as f64 + j as f64 / grid as f64 * tau;
                out.push((z.re, z.im, self.eval(z)));
            }
        }
        out
    }
}

/// Recovers samples of the fiber `f_{[n]}` from a section:
/// `f_{[n]}(y) = ∫₀¹ e^{-2πinx} e^{πin²ω_x/p} f(x + iy - nτ/p) dx`.
pub fn wbz_inverse(
    f: impl Fn(Complex64) -> Complex64,
    params: &ModuliParams,
    n: i64,
    ys: &[f64],
) -> Result<Vec<Complex64>> {
    let p = params.p;
    if p == 0 {
        return Err(invalid("wbz_inverse needs nonzero degree"));
    }
    if !(0..=p.abs()).contains(&n) {
        return Err(invalid(format!("class index {n} outside 0..={}", p.abs())));
    }
    let shift = params.tau * (n as f64 / p as f64);
    let prefactor = cis(PI * (n * n) as f64 * params.omega_x() / p as f64);
    ys.iter()
        .map(|&y| {
            let v = periodic_integral(|x| cis(-2.0 * PI * n as f64 * x) * f(Complex64::new(x, y) - shift))?;
            Ok(prefactor * v)
        })
        .collect()
}

/// `ϑ(z; q) = Σ_{|n|≤N} q^{n²} e^{2πinz}` together with a bound on the omitted terms.
pub fn jacobi_theta(z: Complex64, tau: Complex64, n_max: usize) -> Result<(Complex64, f64)> {
    check_tau(tau)?;
    if n_max == 0 {
        return Err(invalid("N must be ≥ 1"));
    }
    let term = |n: f64| (Complex64::i() * PI * (tau * n * n + 2.0 * n * z)).exp();
    let n = n_max as i64;
    let value = (-n..=n).map(|k| term(k as f64)).sum();
    let mut tail = 0.0;
    for k in n + 1..n + 200 {
        let shell = term(k as f64).norm() + term(-k as f64).norm();
        tail += shell;
        if shell < 1e-300 {
            break;
        }
    }
    Ok((value, tail))
}

/// Relative residual of `ϑ(z + kτ) = q^{-k²} e^{-2πikz} ϑ(z)`.
pub fn theta_functional_residual(z: Complex64, tau: Complex64, k: i64, n_max: usize) -> Result<f64> {
    let (lhs, _) = jacobi_theta(z + k as f64 * tau, tau, n_max)?;
    let (base, _) = jacobi_theta(z, tau, n_max)?;
    let kf = k as f64;
    let rhs = (-Complex64::i() * PI * (tau * kf * kf + 2.0 * kf * z)).exp() * base;
    Ok(relative_residual(lhs, rhs))
}

/// Holomorphic `α^p` section `Σ_{n ≡ class mod p} q^{n²/p} e^{2πinz}`.
#[derive(Debug, Clone, Copy)]
pub struct HoloBasis {
    pub p: i64,
    pub tau: Complex64,
    pub class: i64,
    pub n_max: usize,
}

impl HoloBasis {
    pub fn new(p: i64, tau: Complex64, class: i64, n_max: usize) -> Result<Self> {
        check_tau(tau)?;
        if p <= 0 {
            return Err(invalid(format!("holomorphic basis needs p > 0, got {p}")));
        }
        if !(0..p).contains(&class) {
            return Err(invalid(format!("class {class} outside 0..{p}")));
        }
        Ok(Self { p, tau, class, n_max })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let k = self.n_max as i64;
        let p = self.p as f64;
        (-k..=k)
            .map(|j| {
                let n = (self.class + self.p * j) as f64;
                (Complex64::i() * PI * (self.tau * n * n / p + 2.0 * n * z)).exp()
            })
            .sum()
    }

    /// The unitary-gauge partner `e^{-πpy²/ω_y} f` as a WBZ section: Gaussian
    /// fiber of width `ω_y/p` in this class, zero elsewhere.
    pub fn beta_section(&self, theta: f64) -> Result<QuasiSection> {
        let params = ModuliParams::new(theta, self.tau, self.p)?;
        let fibers = class_gaussian_fibers(self.p, self.tau, self.class)?;
        QuasiSection::new(params, fibers, self.n_max)
    }
}

/// Fibers `e^{-πp t²/ω_y}` in `class`, zero elsewhere. For `p < 0` the Gaussian
/// is not normalizable and construction fails.
fn class_gaussian_fibers(p: i64, tau: Complex64, class: i64) -> Result<FiberVector> {
    let width = tau.im / p as f64;
    let g = GaussPacket::new(vec![GaussPacketTerm::new(Complex64::new(1.0, 0.0), 0, 0.0, 0.0, width)?])?;
    let mut packets = vec![GaussPacket::zero(); p.unsigned_abs() as usize];
    packets[class.rem_euclid(p.abs()) as usize] = g;
    FiberVector::new(packets)
}

/// Holomorphic sections of degree `p`: one per residue class when `p > 0`; for
/// `p < 0` the only candidate fiber is not square integrable and none exist.
pub fn holomorphic_basis(p: i64, tau: Complex64, n_max: usize) -> Result<Vec<HoloBasis>> {
    check_tau(tau)?;
    if p == 0 {
        return Err(invalid("degree 0 is not covered"));
    }
    let mut basis = Vec::new();
    for class in 0..p.abs() {
        if class_gaussian_fibers(p, tau, class).is_err() {
            continue;
        }
        basis.push(HoloBasis::new(p, tau, class, n_max)?);
    }
    Ok(basis)
}

pub fn holomorphic_dimension(p: i64, tau: Complex64) -> Result<usize> {
    Ok(holomorphic_basis(p, tau, DEFAULT_SERIES_N)?.len())
}

/// `max |½(∂_x + i∂_y) f| / max |f|` over a `grid × grid` sample of `[0,1)²`,
/// using fourth-order central differences with step `h`.
pub fn dbar_defect(f: impl Fn(Complex64) -> Complex64, grid: usize, h: f64) -> Result<f64> {
    if grid < 2 {
        return Err(invalid("grid must be ≥ 2"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("h must be positive, got {h}")));
    }
    let diff = |z: Complex64, dir: Complex64| {
        (-f(z + 2.0 * h * dir) + 8.0 * f(z + h * dir) - 8.0 * f(z - h * dir) + f(z - 2.0 * h * dir)) / (12.0 * h)
    };
    let (mut top, mut scale) = (0.0_f64, 0.0_f64);
    for i in 0..grid {
        for j in 0..grid {
            let z = Complex64::new(i as f64 / grid as f64, j as f64 / grid as f64);
            let dbar = 0.5 * (diff(z, Complex64::new(1.0, 0.0)) + Complex64::i() * diff(z, Complex64::i()));
            top = top.max(dbar.norm());
            scale = scale.max(f(z).norm());
        }
    }
    Ok(if scale == 0.0 { top } else { top / scale })
}

#[derive(Debug, Clone)]
pub struct GramReport {
    /// `⟨f_i, f_j⟩ = ∫ conj(f_i) f_j e^{-2πpy²/ω_y} dA` over the fundamental domain.
    pub matrix: DMatrix<Complex64>,
    /// Smallest eigenvalue after scaling to unit diagonal.
    pub min_eigenvalue: f64,
    /// Eigenvalues of the scaled matrix above `threshold`.
    pub rank: usize,
}

/// Weighted `L²` Gram matrix of degree-`p` holomorphic sections, by the
/// trapezoid rule on a `grid × grid` sample (the integrand is doubly periodic).
pub fn gram_matrix(basis: &[HoloBasis], grid: usize, threshold: f64) -> Result<GramReport> {
    let Some(first) = basis.first() else {
        return Ok(GramReport { matrix: DMatrix::zeros(0, 0), min_eigenvalue: 0.0, rank: 0 });
    };
    let (p, tau) = (first.p as f64, first.tau);
    let k = basis.len();
    let mut g = DMatrix::<Complex64>::zeros(k, k);
    let weight_area = tau.im / (grid * grid) as f64;
    let mut vals = vec![Complex64::default(); k];
    for i in 0..grid {
        for j in 0..grid {
            let z = i as f64 / grid as f64 + j as f64 / grid as f64 * tau;
            let w = (-2.0 * PI * p * z.im * z.im / tau.im).exp() * weight_area;
            for (v, b) in vals.iter_mut().zip(basis) {
                *v = b.eval(z);
            }
            for a in 0..k {
                for b in 0..k {
                    g[(a, b)] += vals[a].conj() * vals[b] * w;
                }
            }
        }
    }
    let d: Vec<f64> = (0..k).map(|a| g[(a, a)].re.sqrt()).collect();
    let scaled = DMatrix::from_fn(k, k, |a, b| g[(a, b)] / (d[a] * d[b]));
    let eig = SymmetricEigen::new(scaled).eigenvalues;
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = eig.iter().filter(|&&e| e > threshold).count();
    Ok(GramReport { matrix: g, min_eigenvalue, rank })
}
