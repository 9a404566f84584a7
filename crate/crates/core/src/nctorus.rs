//! Truncated Fourier model of the smooth noncommutative torus.
//!
//! A [`TorusElement`] is a finitely supported coefficient array `a_{m,n}`. Read
//! as an algebra element it means `Σ a_{m,n} U^m V^n` in the normal order
//! `U^m V^n`, with `UV = e^{2πiθ} VU`; read as a function it means
//! `Σ a_{m,n} u^m v^n` with `u = e^{2πix}`, `v = e^{2πiy}`. The flag is only
//! metadata: which product applies is decided by the operation invoked.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::weyl::{cis, WeylSum, WeylTerm};

/// Typical support radius used when generating elements.
pub const DEFAULT_SUPPORT: i64 = 16;
/// Products whose support leaves `|m|, |n| ≤ cap` are refused.
pub const DEFAULT_CAP: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    /// `Σ a_{m,n} U^m V^n`
    Algebra,
    /// `Σ a_{m,n} u^m v^n`
    Function,
}

/// `σ((j,k),(m,n)) = e^{iπθ(jn - km)}`
pub fn sigma(theta: f64, (j, k): (i64, i64), (m, n): (i64, i64)) -> Complex64 {
    cis(PI * theta * (j * n - k * m) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    theta: f64,
    coeffs: BTreeMap<(i64, i64), Complex64>,
    interp: Interpretation,
    cap: i64,
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(invalid(format!("theta must lie in [0,1), got {theta}")))
    }
}

impl TorusElement {
    pub fn zero(theta: f64, interp: Interpretation) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta, coeffs: BTreeMap::new(), interp, cap: DEFAULT_CAP })
    }

    pub fn one(theta: f64, interp: Interpretation) -> Result<Self> {
        Self::monomial(theta, interp, 0, 0, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(theta: f64, interp: Interpretation, m: i64, n: i64, c: Complex64) -> Result<Self> {
        Self::from_coeffs(theta, interp, [((m, n), c)])
    }

    pub fn from_coeffs(
        theta: f64,
        interp: Interpretation,
        coeffs: impl IntoIterator<Item = ((i64, i64), Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::zero(theta, interp)?;
        for ((m, n), c) in coeffs {
            ensure_finite("coefficient", c.re)?;
            ensure_finite("coefficient", c.im)?;
            out.check_index(m, n)?;
            out.accumulate(m, n, c);
        }
        Ok(out)
    }

    pub fn with_cap(mut self, cap: i64) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_interpretation(mut self, interp: Interpretation) -> Self {
        self.interp = interp;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interp
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn coeff(&self, m: i64, n: i64) -> Complex64 {
        self.coeffs.get(&(m, n)).copied().unwrap_or_default()
    }

    /// Nonzero coefficients in lexicographic `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max(|m|, |n|)` over the support.
    pub fn support_radius(&self) -> i64 {
        self.coeffs.keys().map(|&(m, n)| m.abs().max(n.abs())).max().unwrap_or(0)
    }

    fn check_index(&self, m: i64, n: i64) -> Result<()> {
        if m.abs() > self.cap || n.abs() > self.cap {
            Err(Error::Capacity(format!(
                "index ({m},{n}) outside the support cap {}",
                self.cap
            )))
        } else {
            Ok(())
        }
    }

    fn accumulate(&mut self, m: i64, n: i64, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let slot = self.coeffs.entry((m, n)).or_default();
        *slot += c;
        if *slot == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&(m, n));
        }
    }

    fn same_theta(&self, other: &TorusElement) -> Result<()> {
        if self.theta == other.theta {
            Ok(())
        } else {
            Err(invalid(format!("theta mismatch: {} vs {}", self.theta, other.theta)))
        }
    }

    fn map_coeffs(&self, interp: Interpretation, f: impl Fn(i64, i64, Complex64) -> ((i64, i64), Complex64)) -> Self {
        let mut out = Self { coeffs: BTreeMap::new(), interp, ..*self };
        for (&(m, n), &c) in &self.coeffs {
            let ((mm, nn), cc) = f(m, n, c);
            out.accumulate(mm, nn, cc);
        }
        out
    }

    fn twisted_product(&self, other: &TorusElement, phase: impl Fn((i64, i64), (i64, i64)) -> Complex64) -> Result<Self> {
        self.same_theta(other)?;
        let mut out = Self {
            coeffs: BTreeMap::new(),
            cap: self.cap.max(other.cap),
            ..*self
        };
        for (&(j, k), &a) in &self.coeffs {
            for (&(m, n), &b) in &other.coeffs {
                let (mm, nn) = (j + m, k + n);
                out.check_index(mm, nn)?;
                out.accumulate(mm, nn, a * b * phase((j, k), (m, n)));
            }
        }
        Ok(out)
    }

    /// Algebra product in normal order, from `V^k U^m = e^{-2πiθkm} U^m V^k`.
    pub fn mul(&self, other: &TorusElement) -> Result<Self> {
        let theta = self.theta;
        Ok(self
            .twisted_product(other, |(_, k), (m, _)| cis(-2.0 * PI * theta * (k * m) as f64))?
            .with_interpretation(Interpretation::Algebra))
    }

    /// Algebra involution: `(a U^m V^n)* = ā e^{-2πiθmn} U^{-m} V^{-n}`.
    pub fn adjoint(&self) -> Self {
        let theta = self.theta;
        self.map_coeffs(Interpretation::Algebra, |m, n, c| {
            ((-m, -n), c.conj() * cis(-2.0 * PI * theta * (m * n) as f64))
        })
    }

    /// Pointwise complex conjugation of the function `Σ a_{m,n} u^m v^n`.
    pub fn conj(&self) -> Self {
        self.map_coeffs(Interpretation::Function, |m, n, c| ((-m, -n), c.conj()))
    }

    /// Cocycle-twisted convolution `u^j v^k ⋆ u^m v^n = σ((j,k),(m,n)) u^{j+m} v^{k+n}`.
    pub fn star(&self, other: &TorusElement) -> Result<Self> {
        let theta = self.theta;
        Ok(self
            .twisted_product(other, |x, y| sigma(theta, x, y))?
            .with_interpretation(Interpretation::Function))
    }

    /// Quantization map `T_θ`: `a_{m,n} u^m v^n ↦ a_{m,n} e^{-πimnθ} U^m V^n`.
    pub fn quantize(&self) -> Self {
        let theta = self.theta;
        self.map_coeffs(Interpretation::Algebra, |m, n, c| {
            ((m, n), c * cis(-PI * theta * (m * n) as f64))
        })
    }

    /// Inverse of [`TorusElement::quantize`].
    pub fn dequantize(&self) -> Self {
        let theta = self.theta;
        self.map_coeffs(Interpretation::Function, |m, n, c| {
            ((m, n), c * cis(PI * theta * (m * n) as f64))
        })
    }

    /// `p_k(a) = sup (1+m²+n²)^{k/2} |a_{m,n}|` (the square root of the sup of squares).
    pub fn seminorm(&self, k: u32) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(m, n), c)| (1.0 + (m * m + n * n) as f64).powf(k as f64 / 2.0) * c.norm())
            .fold(0.0, f64::max)
    }

    /// Image under `π(U) = W(1,0)`, `π(V) = W(0,-θ)`:
    /// `U^m V^n ↦ e^{πimnθ} W(m, -nθ)`.
    pub fn rep_pi(&self) -> WeylSum {
        let theta = self.theta;
        WeylSum::new(self.coeffs.iter().map(|(&(m, n), &c)| WeylTerm {
            coeff: c * cis(PI * theta * (m * n) as f64),
            a: m as f64,
            b: -(n as f64) * theta,
        }))
        .expect("finite coefficients")
    }

    pub fn add(&self, other: &TorusElement) -> Result<Self> {
        self.same_theta(other)?;
        let mut out = self.clone();
        for (&(m, n), &c) in &other.coeffs {
            out.accumulate(m, n, c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_coeffs(self.interp, |m, n, c| ((m, n), c * s))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &TorusElement) -> f64 {
        let mut keys: Vec<(i64, i64)> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|(m, n)| (self.coeff(m, n) - other.coeff(m, n)).norm())
            .fold(0.0, f64::max)
    }

    /// Coefficients with `|m|, |n| ≤ radius`.
    pub fn restrict(&self, radius: i64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|&(m, n), _| m.abs() <= radius && n.abs() <= radius);
        out
    }

    /// Largest coefficient on the boundary shell `max(|m|,|n|) = radius`.
    pub fn shell_max(&self, radius: i64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&(m, n), _)| m.abs().max(n.abs()) == radius)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Evaluate the function reading `Σ a_{m,n} u_τ^m v_τ^n` at `z`, where
    /// `u_τ = e^{2πi(x - ω_x y/ω_y)}` and `v_τ = e^{2πiy/ω_y}`; for `τ = i` these are `u`, `v`.
    pub fn eval_on_curve(&self, tau: Complex64, z: Complex64) -> Complex64 {
        let (wx, wy) = (tau.re, tau.im);
        let phase_u = 2.0 * PI * (z.re - wx / wy * z.im);
        let phase_v = 2.0 * PI * z.im / wy;
        self.coeffs
            .iter()
            .map(|(&(m, n), &c)| c * cis(m as f64 * phase_u + n as f64 * phase_v))
            .sum()
    }

    /// Text form: a `theta <decimal>` header then `m n re im` lines in
    /// lexicographic `(m, n)` order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "theta {}", self.theta).unwrap();
        for (&(m, n), c) in &self.coeffs {
            writeln!(s, "{m} {n} {:e} {:e}", c.re, c.im).unwrap();
        }
        s
    }

    /// Parses [`TorusElement::to_text`] output. Lines starting with `#` and blank
    /// lines are skipped; any other keyword line is an error.
    pub fn from_text(text: &str, interp: Interpretation) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty torus element".into()))?;
        let theta = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["theta", v] => v.parse::<f64>().map_err(|e| Error::Parse(format!("theta: {e}")))?,
            _ => return Err(Error::Parse(format!("expected `theta <value>`, got `{header}`"))),
        };
        let mut coeffs = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [m, n, re, im] = fields[..] else {
                return Err(Error::Parse(format!("expected `m n re im`, got `{line}`")));
            };
            let parse_i = |s: &str| s.parse::<i64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            let parse_f = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
            coeffs.push(((parse_i(m)?, parse_i(n)?), Complex64::new(parse_f(re)?, parse_f(im)?)));
        }
        Self::from_coeffs(theta, interp, coeffs)
    }
}

/// `‖xy - yx‖` in canonical Weyl form.
pub fn commutator_defect(x: &WeylSum, y: &WeylSum) -> f64 {
    x.mul(y).distance(&y.mul(x))
}

/// Largest commutator defect between each candidate and each generator.
pub fn center_defect(candidates: &[WeylSum], generators: &[WeylSum]) -> f64 {
    candidates
        .iter()
        .flat_map(|c| generators.iter().map(move |g| commutator_defect(c, g)))
        .fold(0.0, f64::max)
}

/// For `θ = p/q` in lowest terms, the commutation defect of `W(q,0)` and
/// `W(0,p)` against `x_gen` (typically `W(1,0)` or `W(0,-p/q)`). Zero certifies
/// that both lie in the commutant of the generator.
pub fn center_defect_rational(p: i64, q: i64, x_gen: &WeylSum) -> Result<f64> {
    if q < 1 {
        return Err(invalid(format!("q must be ≥ 1, got {q}")));
    }
    if gcd(p, q) != 1 {
        return Err(invalid(format!("p/q = {p}/{q} is not in lowest terms")));
    }
    let candidates = [WeylSum::unit(q as f64, 0.0), WeylSum::unit(0.0, p as f64)];
    Ok(center_defect(&candidates, std::slice::from_ref(x_gen)))
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
