//! Heisenberg modules `S(ℝ) ⊗ ℂ^p` and their right actions.
//!
//! Every generator acts as `c · W(a,b) ⊗ M` with `M` built from the clock and
//! shift matrices, so actions, words and inverses are all [`FiberOperator`]s.
//! Right actions compose contravariantly: `ψ◁(XY) = (ψ◁X)◁Y`.

mod bimodule;
mod hermitian;

pub use bimodule::{bimod_act, jmap, Side};
pub use hermitian::{
    herm_classical, herm_deformed_identity, herm_fiber, herm_heis, star_section, DeformedIdentity, HermResult,
};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::nctorus::gcd;
use crate::sections::{check_tau, FiberVector, ModuliParams};
use crate::weyl::{cis, mul_weyl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    U,
    V,
}

/// Clock `C = diag(e^{2πik/p})` and shift `(Sw)_k = w_{k-1}`, with `C S = e^{2πi/p} S C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockShift {
    pub p: usize,
    pub c: DMatrix<Complex64>,
    pub s: DMatrix<Complex64>,
}

pub fn clock_shift(p: usize) -> Result<ClockShift> {
    if p < 1 {
        return Err(invalid("p must be ≥ 1"));
    }
    let c = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            cis(2.0 * PI * i as f64 / p as f64)
        } else {
            Complex64::default()
        }
    });
    let s = DMatrix::from_fn(p, p, |i, j| {
        if (j + 1) % p == i {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    Ok(ClockShift { p, c, s })
}

/// Integer power of a unitary matrix; negative powers use the adjoint.
pub fn unitary_pow(m: &DMatrix<Complex64>, k: i64) -> DMatrix<Complex64> {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k.unsigned_abs() {
        out = &out * &base;
    }
    out
}

/// `coeff · W(a, b) ⊗ matrix`, acting componentwise on fiber vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator {
    pub coeff: Complex64,
    pub a: f64,
    pub b: f64,
    pub matrix: DMatrix<Complex64>,
}

impl FiberOperator {
    pub fn new(coeff: Complex64, a: f64, b: f64, matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid("matrix part must be square and nonempty"));
        }
        mul_weyl(a, b, 0.0, 0.0)?;
        Ok(Self { coeff, a, b, matrix })
    }

    pub fn identity(p: usize) -> Self {
        Self { coeff: Complex64::new(1.0, 0.0), a: 0.0, b: 0.0, matrix: DMatrix::identity(p, p) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FiberOperator) -> FiberOperator {
        let (phase, a, b) = mul_weyl(self.a, self.b, other.a, other.b).expect("finite symbols");
        FiberOperator { coeff: self.coeff * other.coeff * phase, a, b, matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> Result<FiberOperator> {
        let matrix = self.matrix.clone().try_inverse().ok_or_else(|| invalid("matrix part is singular"))?;
        Ok(FiberOperator { coeff: self.coeff.inv(), a: -self.a, b: -self.b, matrix })
    }

    pub fn pow(&self, k: i64) -> Result<FiberOperator> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = Self::identity(self.dim());
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        Ok(out)
    }

    pub fn apply(&self, psi: &FiberVector) -> Result<FiberVector> {
        let p = self.dim();
        if psi.dim() != p {
            return Err(invalid(format!("operator acts on dimension {p}, got {}", psi.dim())));
        }
        let moved: Vec<_> = psi.packets().iter().map(|f| f.apply_weyl(self.a, self.b).scale(self.coeff)).collect();
        let out = (0..p)
            .map(|i| {
                (0..p)
                    .filter(|&j| self.matrix[(i, j)] != Complex64::default())
                    .fold(crate::weyl::GaussPacket::zero(), |acc, j| acc.add(&moved[j].scale(self.matrix[(i, j)])))
            })
            .collect();
        FiberVector::new(out)
    }
}

/// Operator of the word `U^m V^n` under a right action: `A_V^n ∘ A_U^m`.
pub fn right_word(op_u: &FiberOperator, op_v: &FiberOperator, m: i64, n: i64) -> Result<FiberOperator> {
    Ok(op_v.pow(n)?.compose(&op_u.pow(m)?))
}

fn check_p(p: i64) -> Result<usize> {
    if p < 1 {
        return Err(invalid(format!("p must be ≥ 1, got {p}")));
    }
    Ok(p as usize)
}

/// `ψ◁U = {W(s/p+θ, 0) ⊗ (S*)^s} ψ`, `ψ◁V = {W(0, 1) ⊗ C} ψ`.
pub fn heis_operator(gen: Generator, p: i64, s: i64, theta: f64) -> Result<FiberOperator> {
    let cs = clock_shift(check_p(p)?)?;
    let one = Complex64::new(1.0, 0.0);
    match gen {
        Generator::U => FiberOperator::new(one, s as f64 / p as f64 + theta, 0.0, unitary_pow(&cs.s, -s)),
        Generator::V => FiberOperator::new(one, 0.0, 1.0, cs.c),
    }
}

pub fn heis_act(gen: Generator, psi: &FiberVector, p: i64, s: i64, theta: f64) -> Result<FiberVector> {
    heis_operator(gen, p, s, theta)?.apply(psi)
}

/// `u_τ ↦ W(ω_y/p, -ω_x/ω_y) ⊗ S`, `v_τ ↦ W(0, 1/ω_y) ⊗ C*`. Under the WBZ
/// transform these become multiplication by `u_τ`, `v_τ`.
pub fn classical_operator(gen: Generator, params: &ModuliParams) -> Result<FiberOperator> {
    let p = check_p(params.p)?;
    let cs = clock_shift(p)?;
    let (wx, wy) = (params.omega_x(), params.omega_y());
    let one = Complex64::new(1.0, 0.0);
    match gen {
        Generator::U => FiberOperator::new(one, wy / p as f64, -wx / wy, cs.s),
        Generator::V => FiberOperator::new(one, 0.0, 1.0 / wy, cs.c.adjoint()),
    }
}

pub fn classical_act(gen: Generator, psi: &FiberVector, params: &ModuliParams) -> Result<FiberVector> {
    classical_operator(gen, params)?.apply(psi)
}

/// `𝑓◀U = e^{πir/p} {W(s/p+θ, 0) ⊗ (C*)^r S} 𝑓`, `𝑓◀V = {W(0, 1) ⊗ (C*)^s} 𝑓`.
/// Defined only when `τ - (pθ/2)i = r + is` with integers `r, s`.
pub fn deformed_operator(gen: Generator, params: &ModuliParams) -> Result<FiberOperator> {
    let p = check_p(params.p)?;
    let (r, s) = params
        .rs()
        .ok_or_else(|| invalid(format!("tau = {} violates the module constraint for p={p}, theta={}", params.tau, params.theta)))?;
    let cs = clock_shift(p)?;
    let cstar = cs.c.adjoint();
    match gen {
        Generator::U => FiberOperator::new(
            cis(PI * r as f64 / p as f64),
            s as f64 / p as f64 + params.theta,
            0.0,
            unitary_pow(&cstar, r) * &cs.s,
        ),
        Generator::V => FiberOperator::new(Complex64::new(1.0, 0.0), 0.0, 1.0, unitary_pow(&cstar, s)),
    }
}

pub fn deformed_act(gen: Generator, psi: &FiberVector, params: &ModuliParams) -> Result<FiberVector> {
    deformed_operator(gen, params)?.apply(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintStatus {
    pub satisfied: bool,
    /// `(r, s)` when satisfied.
    pub rs: Option<(i64, i64)>,
}

/// Whether `τ - (pθ/2)i ∈ ℤ + iℤ`, to the integrality tolerance.
pub fn constraint_check(tau: Complex64, theta: f64, p: i64) -> Result<ConstraintStatus> {
    check_tau(tau)?;
    let params = ModuliParams::new(theta, tau, p)?;
    let rs = params.rs();
    Ok(ConstraintStatus { satisfied: rs.is_some(), rs })
}

/// Fixed witness fibers: one shifted, modulated Gaussian per class.
pub fn witness_fibers(p: usize) -> Result<FiberVector> {
    use crate::weyl::{GaussPacket, GaussPacketTerm};
    let packets = (0..p)
        .map(|k| {
            let kf = k as f64;
            let term = GaussPacketTerm::new(Complex64::new(1.0, 0.3 * kf), 0, 0.15 * kf, 0.1 - 0.05 * kf, 0.9)?;
            GaussPacket::new(vec![term])
        })
        .collect::<Result<_>>()?;
    FiberVector::new(packets)
}

/// Quasi-periodicity defect of `f◁U` and `f◁V` (function-side right action) for a
/// WBZ section `f` of the given moduli. Small exactly when the constraint holds;
/// otherwise `f◁V` picks up the phase `e^{2πi(ω_y - pθ/2)}` and `f◁U` the phase
/// `e^{2πiω_x}` under `z ↦ z + τ`.
pub fn constraint_defect_witness(tau: Complex64, theta: f64, p: i64, grid: usize) -> Result<f64> {
    use crate::sections::{quasiperiodicity_defect, QuasiSection, DEFAULT_SERIES_N};
    let params = ModuliParams::new(theta, tau, p)?;
    let sec = QuasiSection::new(params, witness_fibers(check_p(p)?)?, DEFAULT_SERIES_N)?;
    let f = |z: Complex64| sec.eval(z);
    let mut worst = 0.0_f64;
    for gen in [Generator::U, Generator::V] {
        let acted = bimod_act(Side::Right, gen, f, theta);
        worst = worst.max(quasiperiodicity_defect(acted, &params, grid)?);
    }
    Ok(worst)
}

fn mod_inverse(s: i64, p: i64) -> Result<i64> {
    if gcd(s, p) != 1 {
        return Err(invalid(format!("gcd(s={s}, p={p}) must be 1")));
    }
    let s = s.rem_euclid(p);
    Ok((1..=p).find(|&t| (s * t).rem_euclid(p) == 1 % p).unwrap_or(0))
}

fn permute(w: &FiberVector, sigma: impl Fn(i64) -> i64) -> Result<FiberVector> {
    let p = w.dim() as i64;
    FiberVector::new((0..p).map(|n| w.class(sigma(n)).clone()).collect())
}

/// `(Tw)_n = w_{-sn mod p}`. It intertwines the deformed and Heisenberg actions
/// when `s² ≡ 1 (mod p)`; in general the intertwiner is [`iso_t_inverse`].
pub fn iso_t(w: &FiberVector, s: i64) -> Result<FiberVector> {
    mod_inverse(s, w.dim() as i64)?;
    permute(w, |n| -s * n)
}

/// `(T⁻¹w)_n = w_{-s⁻¹n mod p}`; satisfies `T⁻¹(𝑓◀a) = (T⁻¹𝑓)◁a` for `r = 0`.
pub fn iso_t_inverse(w: &FiberVector, s: i64) -> Result<FiberVector> {
    let sinv = mod_inverse(s, w.dim() as i64)?;
    permute(w, |n| -sinv * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::QuasiSection;
    use crate::weyl::{GaussPacket, GaussPacketTerm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fibers(p: usize) -> FiberVector {
        let packets = (0..p)
            .map(|k| {
                let k = k as f64;
                GaussPacket::new(vec![
                    GaussPacketTerm::new(c(1.0 - 0.2 * k, 0.1 * k), 0, 0.05 * k, -0.1 + 0.1 * k, 0.7).unwrap(),
                    GaussPacketTerm::new(c(0.2, -0.3), 1, 0.1, 0.2, 1.1).unwrap(),
                ])
                .unwrap()
            })
            .collect();
        FiberVector::new(packets).unwrap()
    }

    const TS: [f64; 7] = [-1.3, -0.6, -0.1, 0.0, 0.4, 0.9, 1.7];

    fn max_diff(a: &FiberVector, b: &FiberVector) -> f64 {
        a.max_diff_on(b, &TS).unwrap()
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-14)
    }

    #[test]
    fn clock_shift_basics() {
        let one = clock_shift(1).unwrap();
        assert_eq!(one.c[(0, 0)], c(1.0, 0.0));
        assert_eq!(one.s[(0, 0)], c(1.0, 0.0));
        let two = clock_shift(2).unwrap();
        assert!((two.c[(1, 1)] + 1.0).norm() < 1e-15);
        assert!(close(&(&two.c * &two.s), &(-(&two.s * &two.c))));
        let three = clock_shift(3).unwrap();
        let id = DMatrix::identity(3, 3);
        assert!(close(&unitary_pow(&three.c, 3), &id));
        assert!(close(&unitary_pow(&three.s, 3), &id));
        assert!(close(&(&three.c * three.c.adjoint()), &id));
        let w = cis(2.0 * PI / 3.0);
        assert!(close(&(&three.c * &three.s), &(&three.s * &three.c * w)));
        assert!(clock_shift(0).is_err());
    }

    #[test]
    fn operator_algebra() {
        let op = heis_operator(Generator::U, 3, 2, 0.3).unwrap();
        let inv = op.inverse().unwrap();
        let psi = fibers(3);
        let back = inv.apply(&op.apply(&psi).unwrap()).unwrap();
        assert!(max_diff(&back, &psi) < 1e-12);
        let twice = op.pow(2).unwrap().apply(&psi).unwrap();
        let manual = op.apply(&op.apply(&psi).unwrap()).unwrap();
        assert!(max_diff(&twice, &manual) < 1e-12);
        assert!(op.apply(&fibers(2)).is_err());
    }

    #[test]
    fn heis_p1_is_pure_weyl() {
        let psi = fibers(1);
        let u = heis_act(Generator::U, &psi, 1, 0, 0.3).unwrap();
        let v = heis_act(Generator::V, &psi, 1, 0, 0.3).unwrap();
        for &t in &TS {
            let f = psi.packets()[0].clone();
            assert!((u.packets()[0].eval(t) - f.apply_weyl(0.3, 0.0).eval(t)).norm() < 1e-14);
            assert!((v.packets()[0].eval(t) - f.apply_weyl(0.0, 1.0).eval(t)).norm() < 1e-14);
        }
    }

    #[test]
    fn heis_module_relation() {
        for (p, s, theta) in [(1, 0, 0.3), (2, 1, 0.41), (3, 2, 0.17), (5, 2, 0.6)] {
            let psi = fibers(p as usize);
            let uv = heis_act(Generator::V, &heis_act(Generator::U, &psi, p, s, theta).unwrap(), p, s, theta).unwrap();
            let vu = heis_act(Generator::U, &heis_act(Generator::V, &psi, p, s, theta).unwrap(), p, s, theta).unwrap();
            assert!(max_diff(&uv, &vu.scale(cis(2.0 * PI * theta))) < 1e-10, "p={p}");
        }
        let zero = FiberVector::zero(3).unwrap();
        assert!(heis_act(Generator::U, &zero, 3, 1, 0.2).unwrap().packets().iter().all(GaussPacket::is_zero));
    }

    #[test]
    fn deformed_module_relation_and_reduction() {
        let params = ModuliParams::new(0.0, c(0.0, 1.0), 1).unwrap();
        let psi = fibers(1);
        let u = deformed_act(Generator::U, &psi, &params).unwrap();
        let w = FiberVector::new(vec![psi.packets()[0].apply_weyl(1.0, 0.0)]).unwrap();
        assert!(max_diff(&u, &w) < 1e-14);
        for (p, theta, r, s) in [(2, 0.3, 1, 1), (3, 0.18, 0, 1), (3, 0.45, -1, 2)] {
            let tau = c(r as f64, s as f64 + p as f64 * theta / 2.0);
            let params = ModuliParams::new(theta, tau, p).unwrap();
            let psi = fibers(p as usize);
            let uv = deformed_act(Generator::V, &deformed_act(Generator::U, &psi, &params).unwrap(), &params).unwrap();
            let vu = deformed_act(Generator::U, &deformed_act(Generator::V, &psi, &params).unwrap(), &params).unwrap();
            assert!(max_diff(&uv, &vu.scale(cis(2.0 * PI * theta))) < 1e-10);
        }
        let bad = ModuliParams::new(0.3, c(0.0, 1.0), 2).unwrap();
        assert!(deformed_act(Generator::U, &fibers(2), &bad).is_err());
    }

    #[test]
    fn constraint_examples() {
        let st = constraint_check(c(0.0, 1.0), 0.0, 3).unwrap();
        assert_eq!(st.rs, Some((0, 1)));
        let st = constraint_check(c(0.0, 1.0 + 0.37 / 2.0), 0.37, 1).unwrap();
        assert_eq!(st.rs, Some((0, 1)));
        assert!(!constraint_check(c(0.0, 1.0), 0.3, 2).unwrap().satisfied);
        assert!(constraint_check(c(0.0, -1.0), 0.3, 2).is_err());
    }

    #[test]
    fn iso_t_permutations() {
        let w = fibers(3);
        let t = iso_t(&w, 1).unwrap();
        assert_eq!(t.packets()[0], w.packets()[0]);
        assert_eq!(t.packets()[1], w.packets()[2]);
        assert_eq!(t.packets()[2], w.packets()[1]);
        let one = fibers(1);
        assert_eq!(iso_t(&one, 1).unwrap(), one);
        assert!(iso_t(&fibers(4), 2).is_err());
        let five = fibers(5);
        assert_eq!(iso_t_inverse(&iso_t(&five, 2).unwrap(), 2).unwrap(), five);
    }

    #[test]
    fn iso_t_intertwines() {
        // s² ≡ 1: T itself intertwines
        let (p, theta) = (3_i64, 0.21);
        let params = ModuliParams::new(theta, c(0.0, 1.0 + p as f64 * theta / 2.0), p).unwrap();
        let f = fibers(3);
        for gen in [Generator::U, Generator::V] {
            let lhs = iso_t(&deformed_act(gen, &f, &params).unwrap(), 1).unwrap();
            let rhs = heis_act(gen, &iso_t(&f, 1).unwrap(), p, 1, theta).unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-10);
        }
        // s = 2, p = 5: the inverse map intertwines, T does not
        let (p, s, theta) = (5_i64, 2_i64, 0.3);
        let params = ModuliParams::new(theta, c(0.0, s as f64 + p as f64 * theta / 2.0), p).unwrap();
        let f = fibers(5);
        let mut t_defect = 0.0_f64;
        for gen in [Generator::U, Generator::V] {
            let lhs = iso_t_inverse(&deformed_act(gen, &f, &params).unwrap(), s).unwrap();
            let rhs = heis_act(gen, &iso_t_inverse(&f, s).unwrap(), p, s, theta).unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-10);
            let lhs = iso_t(&deformed_act(gen, &f, &params).unwrap(), s).unwrap();
            let rhs = heis_act(gen, &iso_t(&f, s).unwrap(), p, s, theta).unwrap();
            t_defect = t_defect.max(max_diff(&lhs, &rhs));
        }
        assert!(t_defect > 1e-3);
    }

    #[test]
    fn iso_t_is_unitary() {
        let f = fibers(5);
        let g = f.scale(c(0.3, -1.0)).add(&fibers(5).map(|x| Ok(x.apply_weyl(0.4, 0.2))).unwrap()).unwrap();
        let before = f.inner(&g).unwrap();
        let after = iso_t(&f, 3).unwrap().inner(&iso_t(&g, 3).unwrap()).unwrap();
        assert!((before - after).norm() < 1e-14);
    }

    fn sections_agree(a: &QuasiSection, b: impl Fn(Complex64) -> Complex64, tau: Complex64) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..12 {
            for j in 0..12 {
                let z = i as f64 / 12.0 + j as f64 / 12.0 * tau;
                worst = worst.max((a.eval(z) - b(z)).norm());
            }
        }
        worst
    }

    #[test]
    fn classical_action_is_multiplication() {
        for (p, tau) in [(1_i64, c(0.0, 1.0)), (2, c(0.3, 1.1)), (3, c(-0.4, 0.9))] {
            let params = ModuliParams::new(0.0, tau, p).unwrap();
            let f = QuasiSection::new(params, fibers(p as usize), 12).unwrap();
            let (wx, wy) = (tau.re, tau.im);
            let u = |z: Complex64| cis(2.0 * PI * (z.re - wx * z.im / wy)) * f.eval(z);
            let v = |z: Complex64| cis(2.0 * PI * z.im / wy) * f.eval(z);
            let fu = QuasiSection::new(params, classical_act(Generator::U, f.fibers(), &params).unwrap(), 12).unwrap();
            let fv = QuasiSection::new(params, classical_act(Generator::V, f.fibers(), &params).unwrap(), 12).unwrap();
            assert!(sections_agree(&fu, u, tau) <= 1e-9);
            assert!(sections_agree(&fv, v, tau) <= 1e-9);
        }
    }

    #[test]
    fn deformed_action_matches_function_side() {
        for (p, theta, r, s) in [(1_i64, 0.3, 0_i64, 1_i64), (2, 0.18, 1, 1), (3, 0.45, 0, 1), (3, 0.3, -2, 2)] {
            let tau = c(r as f64, s as f64 + p as f64 * theta / 2.0);
            let params = ModuliParams::new(theta, tau, p).unwrap();
            let f = QuasiSection::new(params, fibers(p as usize), 12).unwrap();
            for gen in [Generator::U, Generator::V] {
                let acted = QuasiSection::new(params, deformed_act(gen, f.fibers(), &params).unwrap(), 12).unwrap();
                let oracle = bimod_act(Side::Right, gen, |z| f.eval(z), theta);
                assert!(sections_agree(&acted, oracle, tau) <= 1e-9, "p={p} r={r} {gen:?}");
            }
        }
    }

    #[test]
    fn constraint_witness() {
        for (p, theta) in [(1_i64, 0.18), (2, 0.3), (3, 0.45)] {
            let tau = c(1.0, 1.0 + p as f64 * theta / 2.0);
            assert!(constraint_defect_witness(tau, theta, p, 8).unwrap() <= 1e-8);
        }
        assert!(constraint_defect_witness(c(0.0, 1.0), 0.0, 2, 8).unwrap() <= 1e-10);
        let d = constraint_defect_witness(c(0.0, 1.0), 0.3, 2, 8).unwrap();
        let gap = (c(1.0, 0.0) - cis(2.0 * PI * 0.7)).norm();
        assert!(d >= 0.05 && d <= gap + 1e-9, "{d} vs {gap}");
    }
}
