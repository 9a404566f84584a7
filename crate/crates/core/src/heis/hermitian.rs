//! Algebra-valued Hermitian structures, truncated to `|m|, |n| ≤ N` and
//! reported with the largest coefficient on the boundary shell as a tail estimate.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{classical_operator, deformed_operator, heis_operator, right_word, Generator};
use crate::error::{invalid, Error, Result};
use crate::nctorus::{Interpretation, TorusElement};
use crate::quadrature::fourier_coeffs;
use crate::sections::{FiberVector, ModuliParams, QuasiSection};

/// Envelope level below which fiber values are treated as zero when choosing
/// summation windows.
const SUPPORT_EPS: f64 = 1e-22;

#[derive(Debug, Clone, PartialEq)]
pub struct HermResult {
    pub element: TorusElement,
    /// Largest coefficient with `max(|m|,|n|) = N`.
    pub tail: f64,
}

impl HermResult {
    fn new(element: TorusElement, n: i64) -> Self {
        let tail = element.shell_max(n);
        Self { element, tail }
    }

    /// Torus-element text followed by a `tail <decimal>` line.
    pub fn to_text(&self) -> String {
        let mut s = self.element.to_text();
        writeln!(s, "tail {:e}", self.tail).unwrap();
        s
    }

    pub fn from_text(text: &str, interp: Interpretation) -> Result<Self> {
        let mut body = String::new();
        let mut tail = None;
        for line in text.lines() {
            match line.trim().strip_prefix("tail ") {
                Some(v) => tail = Some(v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("tail: {e}")))?),
                None => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let tail = tail.ok_or_else(|| Error::Parse("missing `tail` line".into()))?;
        Ok(Self { element: TorusElement::from_text(&body, interp)?, tail })
    }
}

/// Pointwise pairing `(ψ|φ)_t = Σ_r conj(ψ_r(t)) φ_r(t)`.
#[derive(Debug, Clone)]
pub struct FiberPairing {
    psi: FiberVector,
    phi: FiberVector,
}

impl FiberPairing {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.psi.packets().iter().zip(self.phi.packets()).map(|(a, b)| a.eval(t).conj() * b.eval(t)).sum()
    }

    /// `∫ (ψ|φ)_t dt` in closed form.
    pub fn integral(&self) -> Complex64 {
        self.psi.inner(&self.phi).expect("dimensions checked at construction")
    }
}

pub fn herm_fiber(psi: &FiberVector, phi: &FiberVector) -> Result<FiberPairing> {
    psi.check_dim(phi)?;
    Ok(FiberPairing { psi: psi.clone(), phi: phi.clone() })
}

fn check_n(n: i64) -> Result<()> {
    if n < 1 {
        return Err(invalid(format!("truncation N must be ≥ 1, got {n}")));
    }
    Ok(())
}

/// `⟨ψ, φ⟩ = Σ U^m V^n ∫ (ψ◁U^mV^n | φ)_t dt` for the Heisenberg action.
pub fn herm_heis(psi: &FiberVector, phi: &FiberVector, p: i64, s: i64, theta: f64, n: i64) -> Result<HermResult> {
    check_n(n)?;
    psi.check_dim(phi)?;
    let op_u = heis_operator(Generator::U, p, s, theta)?;
    let op_v = heis_operator(Generator::V, p, s, theta)?;
    let mut coeffs = Vec::new();
    for m in -n..=n {
        for k in -n..=n {
            let moved = right_word(&op_u, &op_v, m, k)?.apply(psi)?;
            coeffs.push(((m, k), moved.inner(phi)?));
        }
    }
    let element = TorusElement::from_coeffs(theta, Interpretation::Algebra, coeffs)?;
    Ok(HermResult::new(element, n))
}

/// `⟨𝑓, 𝑔⟩ = (1/ω_y) Σ u_τ^m v_τ^n ∫ (𝑓 | 𝑔◁u_τ^{-m}v_τ^{-n})_t dt`, a function on
/// `E_τ` in the variables `u_τ`, `v_τ`; it equals `conj(f)·g` for the WBZ sections.
pub fn herm_classical(f: &FiberVector, g: &FiberVector, params: &ModuliParams, n: i64) -> Result<HermResult> {
    check_n(n)?;
    f.check_dim(g)?;
    let op_u = classical_operator(Generator::U, params)?;
    let op_v = classical_operator(Generator::V, params)?;
    let scale = 1.0 / params.omega_y();
    let mut coeffs = Vec::new();
    for m in -n..=n {
        for k in -n..=n {
            let moved = right_word(&op_u, &op_v, -m, -k)?.apply(g)?;
            coeffs.push(((m, k), f.inner(&moved)? * scale));
        }
    }
    let element = TorusElement::from_coeffs(0.0, Interpretation::Function, coeffs)?;
    Ok(HermResult::new(element, n))
}

fn check_r0_s1(params: &ModuliParams) -> Result<()> {
    match params.rs() {
        Some((0, 1)) => Ok(()),
        _ => Err(invalid(format!(
            "needs tau = i(1 + p·theta/2), i.e. r = 0 and s = 1; got tau = {}, p = {}, theta = {}",
            params.tau, params.p, params.theta
        ))),
    }
}

/// Fourier coefficients of `f̄ ⋆_θ g` on the torus, for `τ = i(1 + pθ/2)`:
/// the `u^k` part is
/// `F_k(y) = Σ_m conj(f_{[m]}(y + m/p - kθ/2)) g_{[m+k]}(y + (m+k)/p + kθ/2)`,
/// 1-periodic in `y`, and its Fourier coefficients are extracted by quadrature.
pub fn star_section(f: &QuasiSection, g: &QuasiSection, n: i64) -> Result<HermResult> {
    check_n(n)?;
    let params = *f.params();
    if *g.params() != params {
        return Err(invalid("sections have different moduli"));
    }
    check_r0_s1(&params)?;
    let (p, theta) = (params.p, params.theta);
    let (ff, gf) = (f.fibers(), g.fibers());
    let radius = ff.support_radius(SUPPORT_EPS).max(gf.support_radius(SUPPORT_EPS));
    let pf = p as f64;
    let mut coeffs = Vec::new();
    for k in -n..=n {
        let shift = k as f64 * theta / 2.0;
        // y ∈ [0,1) and |y + m/p - kθ/2| ≤ R
        let m_lo = (pf * (shift - radius - 1.0)).floor() as i64;
        let m_hi = (pf * (shift + radius)).ceil() as i64;
        let fk = |y: f64| -> Complex64 {
            (m_lo..=m_hi)
                .map(|m| {
                    let a = ff.class(m).eval(y + m as f64 / pf - shift).conj();
                    if a == Complex64::default() {
                        return a;
                    }
                    a * gf.class(m + k).eval(y + (m + k) as f64 / pf + shift)
                })
                .sum()
        };
        for (j, c) in fourier_coeffs(fk, n)?.into_iter().enumerate() {
            coeffs.push(((k, j as i64 - n), c));
        }
    }
    let element = TorusElement::from_coeffs(theta, Interpretation::Function, coeffs)?;
    Ok(HermResult::new(element, n))
}

#[derive(Debug, Clone)]
pub struct DeformedIdentity {
    /// `T_θ(f̄ ⋆_θ g)`.
    pub lhs: TorusElement,
    /// `Σ V^n U^m ∫ (𝑓◀V^nU^m | 𝑔)_t dt`, rewritten in normal order.
    pub rhs: TorusElement,
    pub residual: f64,
    pub tail: f64,
}

/// Compares the quantized section star product with the deformed-action
/// Hermitian structure, coefficientwise for `|m|, |n| ≤ N`.
pub fn herm_deformed_identity(f: &QuasiSection, g: &QuasiSection, n: i64) -> Result<DeformedIdentity> {
    let star = star_section(f, g, n)?;
    let params = *f.params();
    let theta = params.theta;
    let op_u = deformed_operator(Generator::U, &params)?;
    let op_v = deformed_operator(Generator::V, &params)?;
    let mut coeffs = Vec::new();
    for m in -n..=n {
        for k in -n..=n {
            // 𝑓◀V^kU^m = A_U^m A_V^k 𝑓, and V^kU^m = e^{-2πiθkm} U^mV^k
            let word = op_u.pow(m)?.compose(&op_v.pow(k)?);
            let value = word.apply(f.fibers())?.inner(g.fibers())?;
            let phase = crate::weyl::cis(-2.0 * std::f64::consts::PI * theta * (m * k) as f64);
            coeffs.push(((m, k), value * phase));
        }
    }
    let rhs = TorusElement::from_coeffs(theta, Interpretation::Algebra, coeffs)?;
    let lhs = star.element.quantize();
    let residual = lhs.max_abs_diff(&rhs);
    let tail = star.tail.max(rhs.shell_max(n));
    Ok(DeformedIdentity { lhs, rhs, residual, tail })
}
