use std::f64::consts::PI;

use num_complex::Complex64;

use super::Generator;
use crate::weyl::cis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Function-side bimodule action on `f(x, y)`:
///
/// - `U▷f = e^{2πix} f(x, y+θ/2)`, `V▷f = e^{2πiy} f(x-θ/2, y)`
/// - `f◁U = e^{2πix} f(x, y-θ/2)`, `f◁V = e^{2πiy} f(x+θ/2, y)`
pub fn bimod_act<F>(side: Side, gen: Generator, f: F, theta: f64) -> impl Fn(Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    move |z: Complex64| match gen {
        Generator::U => cis(2.0 * PI * z.re) * f(z + Complex64::new(0.0, sign * theta / 2.0)),
        Generator::V => cis(2.0 * PI * z.im) * f(z - sign * theta / 2.0),
    }
}

/// `(Jf)(z) = conj(f(-z))`.
pub fn jmap<F>(f: F) -> impl Fn(Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    move |z| f(-z).conj()
}
