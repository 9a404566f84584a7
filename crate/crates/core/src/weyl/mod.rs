//! Weyl operators on L²(ℝ) and their finite linear combinations.
//!
//! `W(a,b)` acts as `(W(a,b)ψ)(t) = e^{-πiab} e^{2πibt} ψ(t-a)` and composes
//! through the symplectic phase `W(a,b)W(c,d) = e^{-πi(ad-bc)} W(a+c, b+d)`.
//! Everything here acts exactly on [`GaussPacket`]s, so operator identities can
//! be checked without any discretisation error.

mod packet;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{ensure_finite, invalid, Result};

pub use packet::{gaussian_moments, GaussPacket, GaussPacketTerm, DEFAULT_MAX_DEGREE};

/// Two Weyl keys are the same when both coordinates differ by less than this.
pub const MERGE_TOL: f64 = 1e-12;
/// Coefficients smaller than this are removed from canonical sums.
pub const DROP_TOL: f64 = 1e-15;

/// `e^{iφ}`
#[inline]
pub(crate) fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Product of two Weyl operators: returns `(phase, a+c, b+d)` with
/// `W(a,b)W(c,d) = phase · W(a+c, b+d)`.
pub fn mul_weyl(a: f64, b: f64, c: f64, d: f64) -> Result<(Complex64, f64, f64)> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        ensure_finite(name, v)?;
    }
    Ok((cis(-PI * (a * d - b * c)), a + c, b + d))
}

/// `coeff · W(a,b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylTerm {
    pub coeff: Complex64,
    pub a: f64,
    pub b: f64,
}

impl WeylTerm {
    pub fn new(coeff: Complex64, a: f64, b: f64) -> Result<Self> {
        ensure_finite("coeff.re", coeff.re)?;
        ensure_finite("coeff.im", coeff.im)?;
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        Ok(Self { coeff, a, b })
    }

    fn same_key(&self, a: f64, b: f64) -> bool {
        (self.a - a).abs() < MERGE_TOL && (self.b - b).abs() < MERGE_TOL
    }
}

/// A finite combination `Σ c_j W(a_j, b_j)` in canonical form: keys are unique
/// up to [`MERGE_TOL`], negligible coefficients are dropped, and terms are
/// sorted by `(a, b)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeylSum {
    terms: Vec<WeylTerm>,
}

impl WeylSum {
    pub fn new(terms: impl IntoIterator<Item = WeylTerm>) -> Result<Self> {
        let terms: Vec<WeylTerm> = terms.into_iter().collect();
        for t in &terms {
            WeylTerm::new(t.coeff, t.a, t.b)?;
        }
        Ok(Self::canonical(terms))
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::unit(0.0, 0.0)
    }

    /// The single unitary `W(a,b)`. Panics on non-finite input; use
    /// [`WeylSum::single`] for checked construction.
    pub fn unit(a: f64, b: f64) -> Self {
        Self::single(Complex64::new(1.0, 0.0), a, b).expect("finite Weyl key")
    }

    pub fn single(coeff: Complex64, a: f64, b: f64) -> Result<Self> {
        Self::new([WeylTerm::new(coeff, a, b)?])
    }

    fn canonical(raw: Vec<WeylTerm>) -> Self {
        let mut merged: Vec<WeylTerm> = Vec::with_capacity(raw.len());
        for t in raw {
            match merged.iter_mut().find(|m| m.same_key(t.a, t.b)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() >= DROP_TOL);
        merged.sort_by(|x, y| x.a.total_cmp(&y.a).then(x.b.total_cmp(&y.b)));
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[WeylTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `W(a,b)` (zero when absent).
    pub fn coeff_at(&self, a: f64, b: f64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.same_key(a, b))
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    /// Bilinear extension of the Weyl product law.
    pub fn mul(&self, other: &WeylSum) -> WeylSum {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for x in &self.terms {
            for y in &other.terms {
                let phase = cis(-PI * (x.a * y.b - x.b * y.a));
                out.push(WeylTerm {
                    coeff: x.coeff * y.coeff * phase,
                    a: x.a + y.a,
                    b: x.b + y.b,
                });
            }
        }
        Self::canonical(out)
    }

    /// `(c W(a,b))* = c̄ W(-a,-b)`.
    pub fn adjoint(&self) -> WeylSum {
        Self::canonical(
            self.terms
                .iter()
                .map(|t| WeylTerm {
                    coeff: t.coeff.conj(),
                    a: -t.a,
                    b: -t.b,
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &WeylSum) -> WeylSum {
        Self::canonical(self.terms.iter().chain(other.terms.iter()).copied().collect())
    }

    pub fn scale(&self, c: Complex64) -> WeylSum {
        Self::canonical(
            self.terms
                .iter()
                .map(|t| WeylTerm { coeff: t.coeff * c, ..*t })
                .collect(),
        )
    }

    /// Largest coefficient of `self - other` after canonical merging.
    pub fn distance(&self, other: &WeylSum) -> f64 {
        let diff = self.add(&other.scale(Complex64::new(-1.0, 0.0)));
        diff.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Apply the operator to a packet; exact within the packet family.
    pub fn apply(&self, psi: &GaussPacket) -> GaussPacket {
        let mut out = GaussPacket::zero().with_max_degree(psi.max_degree());
        for t in &self.terms {
            out = out.add(&psi.apply_weyl(t.a, t.b).scale(t.coeff));
        }
        out
    }

    /// `n`-th power; negative powers use the adjoint, which is the inverse for single unitaries.
    pub fn pow(&self, n: i64) -> WeylSum {
        let base = if n < 0 { self.adjoint() } else { self.clone() };
        let mut acc = WeylSum::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }
}

impl fmt::Display for WeylSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)W({}, {})", t.coeff.re, t.coeff.im, t.a, t.b)?;
        }
        Ok(())
    }
}

/// Convenience for `W(a,b)` applied to a packet.
pub fn apply_weyl(a: f64, b: f64, psi: &GaussPacket) -> Result<GaussPacket> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    Ok(psi.apply_weyl(a, b))
}

/// `W(a,b)` on `x`, evaluated pointwise from a callable instead of a packet.
pub fn weyl_pointwise(a: f64, b: f64, psi: impl Fn(f64) -> Complex64, t: f64) -> Complex64 {
    cis(-PI * a * b) * cis(2.0 * PI * b * t) * psi(t - a)
}

pub(crate) fn check_degree(deg: u32, cap: u32) -> Result<()> {
    if deg > cap {
        Err(crate::error::Error::Capacity(format!(
            "packet degree {deg} exceeds cap {cap}"
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn ensure_width(width: f64) -> Result<()> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("packet width must be finite and > 0, got {width}")))
    }
}
