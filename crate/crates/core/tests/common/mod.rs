//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use nctlab::nctorus::{Interpretation, TorusElement};
use nctlab::sections::FiberVector;
use nctlab::weyl::{GaussPacket, GaussPacketTerm};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// `(W(a,b)ψ)(t) = e^{-πiab} e^{2πibt} ψ(t-a)`, written out directly.
pub fn weyl_direct(a: f64, b: f64, psi: &dyn Fn(f64) -> Complex64, t: f64) -> Complex64 {
    e(-a * b / 2.0) * e(b * t) * psi(t - a)
}

/// Composite Simpson rule on `[-l, l]`.
pub fn simpson(f: impl Fn(f64) -> Complex64, l: f64, panels: usize) -> Complex64 {
    let n = panels * 2;
    let h = 2.0 * l / n as f64;
    let mut acc = f(-l) + f(l);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-l + k as f64 * h);
    }
    acc * h / 3.0
}

/// Twisted convolution `Σ a_x b_y σ(x,y) e_{x+y}` with
/// `σ((j,k),(m,n)) = e^{iπθ(jn-km)}`.
pub fn star_oracle(f: &TorusElement, g: &TorusElement, theta: f64) -> Vec<((i64, i64), Complex64)> {
    let mut out: std::collections::BTreeMap<(i64, i64), Complex64> = Default::default();
    for ((j, k), a) in f.iter() {
        for ((m, n), b) in g.iter() {
            let phase = Complex64::from_polar(1.0, PI * theta * (j * n - k * m) as f64);
            *out.entry((j + m, k + n)).or_default() += a * b * phase;
        }
    }
    out.into_iter().collect()
}

/// `ϑ(z;τ) = Σ_{|n|≤n_max} e^{πin²τ + 2πinz}`.
pub fn theta_oracle(z: Complex64, tau: Complex64, n_max: i64) -> Complex64 {
    (-n_max..=n_max)
        .map(|n| {
            let nf = n as f64;
            (Complex64::i() * PI * (nf * nf * tau + 2.0 * nf * z)).exp()
        })
        .sum()
}

pub fn coeff_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

/// Trigonometric polynomials with support in `[-2,2]²`.
pub fn torus_strategy(theta: f64, interp: Interpretation) -> impl Strategy<Value = TorusElement> {
    prop::collection::vec(((-2i64..=2, -2i64..=2), coeff_strategy()), 1..8)
        .prop_map(move |coeffs| TorusElement::from_coeffs(theta, interp, coeffs).unwrap())
}

pub fn packet_strategy() -> impl Strategy<Value = GaussPacket> {
    prop::collection::vec((coeff_strategy(), 0u32..=1, -0.3..0.3f64, -0.4..0.4f64, 0.6..1.4f64), 1..=2).prop_map(
        |terms| {
            GaussPacket::new(
                terms
                    .into_iter()
                    .map(|(amp, deg, freq, center, width)| GaussPacketTerm::new(amp, deg, freq, center, width).unwrap())
                    .collect(),
            )
            .unwrap()
        },
    )
}

pub fn fiber_strategy(p: usize) -> impl Strategy<Value = FiberVector> {
    prop::collection::vec(packet_strategy(), p).prop_map(|packets| FiberVector::new(packets).unwrap())
}

pub fn max_diff(a: &[((i64, i64), Complex64)], b: &TorusElement) -> f64 {
    let mut worst = 0.0_f64;
    for &((m, n), v) in a {
        worst = worst.max((v - b.coeff(m, n)).norm());
    }
    for ((m, n), v) in b.iter() {
        if !a.iter().any(|&(k, _)| k == (m, n)) {
            worst = worst.max(v.norm());
        }
    }
    worst
}
