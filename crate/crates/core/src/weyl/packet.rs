use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_degree, cis, ensure_width, MERGE_TOL};
use crate::error::{ensure_finite, invalid, Result};

pub const DEFAULT_MAX_DEGREE: u32 = 32;

/// `amp · t^deg · e^{2πi·freq·t} · e^{-π(t-center)²/width}`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPacketTerm {
    pub amp: Complex64,
    pub deg: u32,
    pub freq: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussPacketTerm {
    pub fn new(amp: Complex64, deg: u32, freq: f64, center: f64, width: f64) -> Result<Self> {
        ensure_finite("amp.re", amp.re)?;
        ensure_finite("amp.im", amp.im)?;
        ensure_finite("freq", freq)?;
        ensure_finite("center", center)?;
        ensure_width(width)?;
        Ok(Self { amp, deg, freq, center, width })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let d = t - self.center;
        self.amp
            * t.powi(self.deg as i32)
            * cis(2.0 * PI * self.freq * t)
            * (-PI * d * d / self.width).exp()
    }

    /// `|term(t)|`, which bounds the term since the plane wave has modulus one.
    pub fn envelope(&self, t: f64) -> f64 {
        let d = t - self.center;
        self.amp.norm() * t.abs().powi(self.deg as i32) * (-PI * d * d / self.width).exp()
    }

    fn same_shape(&self, other: &GaussPacketTerm) -> bool {
        self.deg == other.deg
            && (self.freq - other.freq).abs() < MERGE_TOL
            && (self.center - other.center).abs() < MERGE_TOL
            && (self.width - other.width).abs() < MERGE_TOL
    }

    /// Radius `ρ` around the center past which the envelope stays below `eps`.
    fn decay_radius(&self, eps: f64) -> f64 {
        let a = self.amp.norm();
        if a == 0.0 {
            return 0.0;
        }
        let d = self.deg as f64;
        let c = self.center.abs();
        let step = 0.05 * self.width.sqrt();
        let mut rho = 0.0_f64;
        loop {
            let bound = a * (c + rho).powf(d) * (-PI * rho * rho / self.width).exp();
            // past the maximum of (c+ρ)^d e^{-πρ²/w}, the bound decreases monotonically
            let decreasing = rho * (c + rho) >= d * self.width / (2.0 * PI);
            if bound < eps && decreasing {
                return rho;
            }
            rho += step;
        }
    }
}

/// Finite sum of Gaussian wave-packet terms: the concrete model of a Schwartz
/// function. Closed under Weyl operators, differentiation and multiplication by `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPacket {
    terms: Vec<GaussPacketTerm>,
    max_degree: u32,
}

impl Default for GaussPacket {
    fn default() -> Self {
        Self::zero()
    }
}

impl GaussPacket {
    pub fn new(terms: Vec<GaussPacketTerm>) -> Result<Self> {
        Self::with_cap(terms, DEFAULT_MAX_DEGREE)
    }

    pub fn with_cap(terms: Vec<GaussPacketTerm>, max_degree: u32) -> Result<Self> {
        for t in &terms {
            GaussPacketTerm::new(t.amp, t.deg, t.freq, t.center, t.width)?;
            check_degree(t.deg, max_degree)?;
        }
        Ok(Self::canonical(terms, max_degree))
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new(), max_degree: DEFAULT_MAX_DEGREE }
    }

    /// Unit-amplitude `e^{-π(t-center)²/width}`.
    pub fn gaussian(center: f64, width: f64) -> Self {
        Self::new(vec![GaussPacketTerm {
            amp: Complex64::new(1.0, 0.0),
            deg: 0,
            freq: 0.0,
            center,
            width,
        }])
        .expect("valid gaussian parameters")
    }

    pub fn with_max_degree(mut self, cap: u32) -> Self {
        self.max_degree = cap;
        self
    }

    fn canonical(raw: Vec<GaussPacketTerm>, max_degree: u32) -> Self {
        let mut merged: Vec<GaussPacketTerm> = Vec::with_capacity(raw.len());
        for t in raw {
            if t.amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            match merged.iter_mut().find(|m| m.same_shape(&t)) {
                Some(m) => m.amp += t.amp,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.amp != Complex64::new(0.0, 0.0));
        Self { terms: merged, max_degree }
    }

    pub fn terms(&self) -> &[GaussPacketTerm] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.deg).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.envelope(t)).sum()
    }

    /// `R` with `|ψ(t)| < eps` for all `|t| > R`.
    pub fn support_radius(&self, eps: f64) -> f64 {
        let n = self.terms.len().max(1) as f64;
        self.terms
            .iter()
            .map(|t| t.center.abs() + t.decay_radius(eps / n))
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &GaussPacket) -> GaussPacket {
        let cap = self.max_degree.max(other.max_degree);
        Self::canonical(self.terms.iter().chain(other.terms.iter()).copied().collect(), cap)
    }

    pub fn scale(&self, c: Complex64) -> GaussPacket {
        Self::canonical(
            self.terms.iter().map(|t| GaussPacketTerm { amp: t.amp * c, ..*t }).collect(),
            self.max_degree,
        )
    }

    /// `W(a,b)ψ`. The shifted monomial `(t-a)^d` is expanded binomially.
    pub fn apply_weyl(&self, a: f64, b: f64) -> GaussPacket {
        let mut out = Vec::new();
        for t in &self.terms {
            let prefactor = t.amp * cis(-PI * a * b) * cis(-2.0 * PI * t.freq * a);
            let mut binom = 1.0_f64;
            for k in (0..=t.deg).rev() {
                // coefficient of t^k in (t-a)^deg: C(deg,k) (-a)^{deg-k}
                let power = (t.deg - k) as i32;
                let coeff = binom * (-a).powi(power);
                out.push(GaussPacketTerm {
                    amp: prefactor * coeff,
                    deg: k,
                    freq: t.freq + b,
                    center: t.center + a,
                    width: t.width,
                });
                // C(deg, k-1) = C(deg, k) · k / (deg - k + 1)
                binom = binom * k as f64 / (t.deg - k + 1) as f64;
            }
        }
        Self::canonical(out, self.max_degree)
    }

    /// `dψ/dt`, term by term.
    pub fn derivative(&self) -> Result<GaussPacket> {
        let mut out = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            check_degree(t.deg + 1, self.max_degree)?;
            let lin = Complex64::new(2.0 * PI * t.center / t.width, 2.0 * PI * t.freq);
            if t.deg > 0 {
                out.push(GaussPacketTerm { amp: t.amp * t.deg as f64, deg: t.deg - 1, ..*t });
            }
            out.push(GaussPacketTerm { amp: t.amp * lin, ..*t });
            out.push(GaussPacketTerm {
                amp: t.amp * (-2.0 * PI / t.width),
                deg: t.deg + 1,
                ..*t
            });
        }
        Ok(Self::canonical(out, self.max_degree))
    }

    /// `t · ψ(t)`.
    pub fn mul_t(&self) -> Result<GaussPacket> {
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            check_degree(t.deg + 1, self.max_degree)?;
            out.push(GaussPacketTerm { deg: t.deg + 1, ..*t });
        }
        Ok(Self::canonical(out, self.max_degree))
    }

    /// `⟨ψ, φ⟩ = ∫ conj(ψ(t)) φ(t) dt` in closed form.
    pub fn inner(&self, other: &GaussPacket) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for x in &self.terms {
            for y in &other.terms {
                total += term_inner(x, y);
            }
        }
        total
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
}

fn term_inner(x: &GaussPacketTerm, y: &GaussPacketTerm) -> Complex64 {
    // conj(x)·y = conj(ax) ay t^{dx+dy} exp(-αt² + βt + γ)
    let alpha = PI / x.width + PI / y.width;
    let beta = Complex64::new(
        2.0 * PI * (x.center / x.width + y.center / y.width),
        2.0 * PI * (y.freq - x.freq),
    );
    let gamma = -PI * (x.center * x.center / x.width + y.center * y.center / y.width);
    let m = (x.deg + y.deg) as usize;
    let moments = gaussian_moments_scaled(Complex64::new(alpha, 0.0), beta, gamma.into(), m)
        .expect("alpha is positive for positive widths");
    x.amp.conj() * y.amp * moments[m]
}

/// `∫ t^m e^{-αt² + βt} dt` for `m = 0..=max_m`, with `Re α > 0`.
///
/// Seeded by the closed forms for `m = 0, 1` and advanced with
/// `M_m = ((m-1) M_{m-2} + β M_{m-1}) / (2α)`.
pub fn gaussian_moments(alpha: Complex64, beta: Complex64, max_m: usize) -> Result<Vec<Complex64>> {
    gaussian_moments_scaled(alpha, beta, Complex64::new(0.0, 0.0), max_m)
}

/// Same as [`gaussian_moments`] with every moment multiplied by `e^{log_scale}`;
/// the scale is folded into the exponent before exponentiating.
fn gaussian_moments_scaled(
    alpha: Complex64,
    beta: Complex64,
    log_scale: Complex64,
    max_m: usize,
) -> Result<Vec<Complex64>> {
    if alpha.re.is_nan() || alpha.re <= 0.0 || !alpha.im.is_finite() {
        return Err(invalid(format!("gaussian moment needs Re α > 0, got {alpha}")));
    }
    let two_alpha = 2.0 * alpha;
    let m0 = (Complex64::new(PI, 0.0) / alpha).sqrt() * (log_scale + beta * beta / (4.0 * alpha)).exp();
    let mut out = Vec::with_capacity(max_m + 1);
    out.push(m0);
    if max_m >= 1 {
        out.push(beta / two_alpha * m0);
    }
    for m in 2..=max_m {
        let next = ((m - 1) as f64 * out[m - 2] + beta * out[m - 1]) / two_alpha;
        out.push(next);
    }
    Ok(out)
}
