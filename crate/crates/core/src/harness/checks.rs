use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{render_report, run_named, CheckResult, Comparison, Ctx, ReportFormat};
use crate::error::Result;
use crate::geometry::{chern_grassmann, chern_homogeneous, curvature_field, curvature_field_error, projection_p};
use crate::heis::{
    bimod_act, constraint_defect_witness, deformed_act, herm_classical, herm_deformed_identity, herm_heis, Generator,
    Side,
};
use crate::nctorus::{center_defect, center_defect_rational, Interpretation, TorusElement};
use crate::sections::{
    dbar_defect, gram_matrix, holomorphic_basis, holomorphic_dimension, quasiperiodicity_defect,
    theta_functional_residual, wbz_inverse, FiberVector, ModuliParams, QuasiSection,
};
use crate::weyl::{cis, mul_weyl, weyl_pointwise, GaussPacket, GaussPacketTerm, WeylSum};

use Comparison::{Ge, Le};

pub const CHECK_NAMES: [&str; 16] = [
    "weyl-law",
    "commutation",
    "quantization-iso",
    "rational-center",
    "wbz-roundtrip",
    "quasiperiodicity-closure",
    "constraint-dichotomy",
    "herm-classical",
    "herm-deformed",
    "module-action-oracle",
    "theta-functional",
    "holo-dimension",
    "chern-homogeneous",
    "chern-grassmannian",
    "projection-validity",
    "determinism",
];

/// Checks compared twice by the determinism check.
const DETERMINISM_SUBSET: [&str; 4] = ["weyl-law", "quantization-iso", "rational-center", "theta-functional"];
const SERIES_N: usize = 12;

pub(crate) fn run_check(ctx: &Ctx) -> Vec<CheckResult> {
    match ctx.name {
        "weyl-law" => weyl_law(ctx),
        "commutation" => commutation(ctx),
        "quantization-iso" => quantization_iso(ctx),
        "rational-center" => rational_center(ctx),
        "wbz-roundtrip" => wbz_roundtrip(ctx),
        "quasiperiodicity-closure" => quasiperiodicity_closure(ctx),
        "constraint-dichotomy" => constraint_dichotomy(ctx),
        "herm-classical" => herm_classical_check(ctx),
        "herm-deformed" => herm_deformed(ctx),
        "module-action-oracle" => module_action_oracle(ctx),
        "theta-functional" => theta_functional(ctx),
        "holo-dimension" => holo_dimension(ctx),
        "chern-homogeneous" => chern_homogeneous_check(ctx),
        "chern-grassmannian" => chern_grassmannian(ctx),
        "projection-validity" => projection_validity(ctx),
        "determinism" => determinism(ctx),
        other => unreachable!("unregistered check {other}"),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tau_json(tau: Complex64) -> Value {
    json!([tau.re, tau.im])
}

fn random_amp(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// One or two terms of degree ≤ 1, widths in [0.6, 1.4].
fn broad_packet(rng: &mut ChaCha8Rng) -> Result<GaussPacket> {
    let count = rng.gen_range(1..=2);
    let terms = (0..count)
        .map(|_| {
            let amp = random_amp(rng);
            let deg = rng.gen_range(0..=1);
            let freq = rng.gen_range(-0.3..0.3);
            let center = rng.gen_range(-0.4..0.4);
            let width = rng.gen_range(0.6..1.4);
            GaussPacketTerm::new(amp, deg, freq, center, width)
        })
        .collect::<Result<_>>()?;
    GaussPacket::new(terms)
}

/// Single Gaussians of width ≈ 0.3 near the origin; their Hermitian
/// coefficients fall below 1e-10 by `|m|, |n| = 8`.
fn narrow_packet(rng: &mut ChaCha8Rng) -> Result<GaussPacket> {
    let amp = random_amp(rng);
    let freq = rng.gen_range(-0.1..0.1);
    let center = rng.gen_range(-0.1..0.1);
    let width = rng.gen_range(0.28..0.32);
    GaussPacket::new(vec![GaussPacketTerm::new(amp, 0, freq, center, width)?])
}

fn fibers(rng: &mut ChaCha8Rng, p: i64, narrow: bool) -> Result<FiberVector> {
    let packets = (0..p)
        .map(|_| if narrow { narrow_packet(rng) } else { broad_packet(rng) })
        .collect::<Result<_>>()?;
    FiberVector::new(packets)
}

fn parallelogram(tau: Complex64, grid: usize) -> Vec<Complex64> {
    (0..grid)
        .flat_map(|j| (0..grid).map(move |i| i as f64 / grid as f64 + j as f64 / grid as f64 * tau))
        .collect()
}

fn weyl_law(ctx: &Ctx) -> Vec<CheckResult> {
    let samples = 200;
    let grid: Vec<f64> = (0..101).map(|k| -5.0 + 0.1 * k as f64).collect();
    vec![ctx.run(0, json!({"samples": samples, "grid": grid.len()}), "weyl-law", Le, |rng| {
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let [a, b, cc, d]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
            let psi = broad_packet(rng)?;
            let (phase, e, f) = mul_weyl(a, b, cc, d)?;
            for &t in &grid {
                let inner = |s: f64| weyl_pointwise(cc, d, |u| psi.eval(u), s);
                let lhs = weyl_pointwise(a, b, inner, t);
                let rhs = phase * weyl_pointwise(e, f, |u| psi.eval(u), t);
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    })]
}

fn commutation(ctx: &Ctx) -> Vec<CheckResult> {
    [0.0, 0.3, 0.5, 0.7]
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            ctx.run(i, json!({"theta": theta}), "commutation", Le, |rng| {
                let pu = WeylSum::unit(1.0, 0.0);
                let pv = WeylSum::unit(0.0, -theta);
                let lhs = pu.mul(&pv);
                let rhs = pv.mul(&pu).scale(cis(2.0 * PI * theta));
                let mut worst = lhs.distance(&rhs);
                for _ in 0..5 {
                    let psi = broad_packet(rng)?;
                    let a = pu.apply(&pv.apply(&psi));
                    let b = pv.apply(&pu.apply(&psi)).scale(cis(2.0 * PI * theta));
                    for k in 0..101 {
                        let t = -5.0 + 0.1 * k as f64;
                        worst = worst.max((a.eval(t) - b.eval(t)).norm());
                    }
                }
                Ok(worst)
            })
        })
        .collect()
}

fn random_trig(rng: &mut ChaCha8Rng, theta: f64) -> Result<TorusElement> {
    let count = rng.gen_range(1..=25);
    let coeffs: Vec<_> = (0..count)
        .map(|_| ((rng.gen_range(-2..=2), rng.gen_range(-2..=2)), random_amp(rng)))
        .collect();
    TorusElement::from_coeffs(theta, Interpretation::Function, coeffs)
}

fn quantization_iso(ctx: &Ctx) -> Vec<CheckResult> {
    [0.3, 0.5]
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            ctx.run(i, json!({"theta": theta, "pairs": 50, "support": "5x5"}), "quantization-iso", Le, |rng| {
                let mut worst = 0.0_f64;
                for _ in 0..50 {
                    let f = random_trig(rng, theta)?;
                    let g = random_trig(rng, theta)?;
                    let lhs = f.star(&g)?.quantize();
                    let rhs = f.quantize().mul(&g.quantize())?;
                    worst = worst.max(lhs.max_abs_diff(&rhs));
                }
                Ok(worst)
            })
        })
        .collect()
}

fn rational_center(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> = [(1, 2), (1, 3), (2, 5)]
        .iter()
        .enumerate()
        .map(|(i, &(p, q))| {
            ctx.run(i, json!({"theta": format!("{p}/{q}")}), "rational-center", Le, |_| {
                let theta = p as f64 / q as f64;
                let gens = [WeylSum::unit(1.0, 0.0), WeylSum::unit(0.0, -theta)];
                let mut worst = 0.0_f64;
                for g in &gens {
                    worst = worst.max(center_defect_rational(p, q, g)?);
                }
                Ok(worst)
            })
        })
        .collect();
    // No power π(U)^q = W(q,0), π(V)^q ∝ W(0,-qθ) with q ≤ 5 is central for θ = 0.3.
    let theta = 0.3;
    out.push(ctx.run(3, json!({"theta": theta, "max_power": 5}), "rational-center.irrational", Ge, |_| {
        let gens = [WeylSum::unit(1.0, 0.0), WeylSum::unit(0.0, -theta)];
        let best = (1..=5)
            .map(|q| {
                let cands = [WeylSum::unit(q as f64, 0.0), WeylSum::unit(0.0, -(q as f64) * theta)];
                center_defect(&cands, &gens)
            })
            .fold(f64::INFINITY, f64::min);
        Ok(best)
    }));
    out
}

fn wbz_roundtrip(ctx: &Ctx) -> Vec<CheckResult> {
    let theta = 0.3;
    let ys: Vec<f64> = (0..11).map(|k| -1.0 + 0.2 * k as f64).collect();
    let mut out = Vec::new();
    for &p in &ctx.cfg.sweep.p {
        for tau in [c(0.0, 1.0), c(0.0, 1.0 + p as f64 * theta / 2.0)] {
            let index = out.len();
            out.push(ctx.run(index, json!({"p": p, "tau": tau_json(tau), "series_n": SERIES_N}), "wbz-roundtrip", Le, |rng| {
                let params = ModuliParams::new(theta, tau, p)?;
                let fib = fibers(rng, p, false)?;
                let sec = QuasiSection::new(params, fib.clone(), SERIES_N)?;
                let mut worst = 0.0_f64;
                for n in 0..p {
                    let got = wbz_inverse(|z| sec.eval(z), &params, n, &ys)?;
                    for (y, v) in ys.iter().zip(got) {
                        worst = worst.max((v - fib.class(n).eval(*y)).norm());
                    }
                }
                Ok(worst)
            }));
        }
    }
    out
}

fn quasiperiodicity_closure(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &p in &ctx.cfg.sweep.p {
        for &tau in &ctx.cfg.sweep.tau {
            for key in ["quasiperiodicity-closure", "quasiperiodicity-closure.nabla"] {
                let index = out.len();
                out.push(ctx.run(index, json!({"p": p, "tau": tau_json(tau)}), key, Le, |rng| {
                    let params = ModuliParams::new(0.0, tau, p)?;
                    let sec = QuasiSection::new(params, fibers(rng, p, false)?, SERIES_N)?;
                    if key.ends_with("nabla") {
                        let mut worst = 0.0_f64;
                        for dir in [1, 2] {
                            let d = sec.nabla(dir)?;
                            worst = worst.max(quasiperiodicity_defect(|z| d.eval(z), &params, 12)?);
                        }
                        Ok(worst)
                    } else {
                        quasiperiodicity_defect(|z| sec.eval(z), &params, 12)
                    }
                }));
            }
        }
    }
    out
}

fn constraint_dichotomy(ctx: &Ctx) -> Vec<CheckResult> {
    let grid = 8;
    let mut out = Vec::new();
    let thetas: Vec<f64> = ctx.cfg.sweep.theta.iter().copied().filter(|&t| t != 0.0).collect();
    for &p in &ctx.cfg.sweep.p {
        for &theta in &thetas {
            let index = out.len();
            out.push(ctx.run_with(index, json!({"p": p, "theta": theta}), "constraint-dichotomy", Le, |rng| {
                let (r, s) = (rng.gen_range(-1..=1), rng.gen_range(1..=2));
                let tau = c(r as f64, s as f64 + p as f64 * theta / 2.0);
                let d = constraint_defect_witness(tau, theta, p, grid)?;
                Ok((d, vec![("tau", tau_json(tau))]))
            }));
        }
    }
    for _ in 0..5 {
        let index = out.len();
        out.push(ctx.run_with(index, json!({}), "constraint-dichotomy.violated", Ge, |rng| {
            let p = ctx.cfg.sweep.p[rng.gen_range(0..ctx.cfg.sweep.p.len())];
            let theta = ctx.cfg.sweep.theta[rng.gen_range(0..ctx.cfg.sweep.theta.len())];
            let params = loop {
                let re = if rng.gen_bool(0.5) { rng.gen_range(-1..=1) as f64 } else { rng.gen_range(-1.0..1.0) };
                let tau = c(re, rng.gen_range(0.8..2.0));
                let params = ModuliParams::new(theta, tau, p)?;
                if params.constraint_gap() >= 0.1 {
                    break params;
                }
            };
            let gap = params.constraint_gap();
            let phase_gap = (c(1.0, 0.0) - cis(2.0 * PI * gap)).norm();
            let d = constraint_defect_witness(params.tau, theta, p, grid)?;
            Ok((d, vec![("p", json!(p)), ("theta", json!(theta)), ("tau", tau_json(params.tau)), ("phase_gap", json!(phase_gap))]))
        }));
    }
    out
}

fn herm_classical_check(ctx: &Ctx) -> Vec<CheckResult> {
    let (grid, n) = (32, 12);
    [1_i64, 2]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            ctx.run(i, json!({"p": p, "tau": [0.0, 1.0], "grid": grid, "n": n}), "herm-classical", Le, |rng| {
                let params = ModuliParams::new(0.0, c(0.0, 1.0), p)?;
                let (f, g) = (fibers(rng, p, false)?, fibers(rng, p, false)?);
                let h = herm_classical(&f, &g, &params, n)?;
                let fs = QuasiSection::new(params, f, SERIES_N)?;
                let gs = QuasiSection::new(params, g, SERIES_N)?;
                let mut worst = 0.0_f64;
                for z in parallelogram(params.tau, grid) {
                    let want = fs.eval(z).conj() * gs.eval(z);
                    worst = worst.max((h.element.eval_on_curve(params.tau, z) - want).norm());
                }
                Ok(worst)
            })
        })
        .collect()
}

fn deformed_params(p: i64, theta: f64) -> Result<ModuliParams> {
    ModuliParams::new(theta, c(0.0, 1.0 + p as f64 * theta / 2.0), p)
}

fn herm_deformed(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &p in &ctx.cfg.sweep.p {
        for &theta in &ctx.cfg.sweep.theta {
            for &n in &ctx.cfg.sweep.n {
                let mut keys = vec!["herm-deformed", "herm-deformed.tail"];
                if p == 3 && theta != 0.0 {
                    keys.push("herm-deformed.mismatch");
                }
                for key in keys {
                    let index = out.len();
                    let cmp = if key.ends_with("mismatch") { Ge } else { Le };
                    out.push(ctx.run(index, json!({"p": p, "theta": theta, "n": n}), key, cmp, |rng| {
                        let params = deformed_params(p, theta)?;
                        let f = QuasiSection::new(params, fibers(rng, p, true)?, SERIES_N)?;
                        let g = QuasiSection::new(params, fibers(rng, p, true)?, SERIES_N)?;
                        let id = herm_deformed_identity(&f, &g, n)?;
                        Ok(match key {
                            "herm-deformed" => id.residual,
                            "herm-deformed.tail" => id.tail,
                            _ => id.lhs.max_abs_diff(&herm_heis(f.fibers(), g.fibers(), p, 1, theta, n)?.element),
                        })
                    }));
                }
            }
        }
    }
    out
}

fn module_action_oracle(ctx: &Ctx) -> Vec<CheckResult> {
    let grid = 16;
    let mut out = Vec::new();
    for &p in &ctx.cfg.sweep.p {
        for &theta in &ctx.cfg.sweep.theta {
            let index = out.len();
            out.push(ctx.run(index, json!({"p": p, "theta": theta, "grid": grid}), "module-action-oracle", Le, |rng| {
                let params = deformed_params(p, theta)?;
                let f = QuasiSection::new(params, fibers(rng, p, false)?, SERIES_N)?;
                let mut worst = 0.0_f64;
                for gen in [Generator::U, Generator::V] {
                    let acted = QuasiSection::new(params, deformed_act(gen, f.fibers(), &params)?, SERIES_N)?;
                    let oracle = bimod_act(Side::Right, gen, |z| f.eval(z), theta);
                    for z in parallelogram(params.tau, grid) {
                        worst = worst.max((acted.eval(z) - oracle(z)).norm());
                    }
                }
                Ok(worst)
            }));
        }
    }
    out
}

fn theta_functional(ctx: &Ctx) -> Vec<CheckResult> {
    let n = 12;
    ctx.cfg
        .sweep
        .tau
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            ctx.run(i, json!({"tau": tau_json(tau), "shifts": [-2, 2], "n": n}), "theta-functional", Le, |rng| {
                let mut worst = 0.0_f64;
                for _ in 0..20 {
                    let z = c(rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5));
                    for k in -2..=2 {
                        worst = worst.max(theta_functional_residual(z, tau, k, n)?);
                    }
                }
                Ok(worst)
            })
        })
        .collect()
}

fn holo_dimension(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &tau in &ctx.cfg.sweep.tau {
        for &p in &ctx.cfg.sweep.p {
            for key in ["holo-dimension", "holo-dimension.gram", "holo-dimension.count"] {
                let index = out.len();
                let cmp = if key.ends_with("gram") { Ge } else { Le };
                out.push(ctx.run(index, json!({"p": p, "tau": tau_json(tau)}), key, cmp, |_| {
                    let basis = holomorphic_basis(p, tau, SERIES_N)?;
                    match key {
                        "holo-dimension" => {
                            let mut worst = 0.0_f64;
                            for b in &basis {
                                worst = worst.max(dbar_defect(|z| b.eval(z), 16, 1e-4)?);
                            }
                            Ok(worst)
                        }
                        "holo-dimension.gram" => Ok(gram_matrix(&basis, 48, 1e-8)?.min_eigenvalue),
                        _ => Ok((holomorphic_dimension(p, tau)? as f64 - p as f64).abs()),
                    }
                }));
            }
        }
        let index = out.len();
        out.push(ctx.run(index, json!({"p": -1, "tau": tau_json(tau)}), "holo-dimension.count", Le, |_| {
            Ok(holomorphic_dimension(-1, tau)? as f64)
        }));
    }
    out
}

fn chern_homogeneous_check(ctx: &Ctx) -> Vec<CheckResult> {
    let taus = [c(0.0, 1.0), c(0.3, 1.1), c(0.5, 2.0)];
    let mut out = Vec::new();
    for p in -2..=3 {
        for tau in taus {
            let index = out.len();
            out.push(ctx.run(index, json!({"p": p, "tau": tau_json(tau)}), "chern-homogeneous", Le, |_| {
                Ok((chern_homogeneous(p, tau)? - p as f64).abs())
            }));
        }
    }
    out
}

fn chern_grassmannian(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &p in &ctx.cfg.sweep.p {
        for &grid in &ctx.cfg.sweep.grid {
            let index = out.len();
            out.push(ctx.run_with(index, json!({"p": p, "grid": grid}), "chern-grassmannian", Le, |_| {
                let r = chern_grassmann(p, grid)?;
                Ok(((r.value - p as f64).abs(), vec![("value", json!(r.value)), ("est_error", json!(r.est_error))]))
            }));
            let index = out.len();
            out.push(ctx.run_with(index, json!({"p": p, "grid": grid}), "chern-grassmannian.order", Le, |_| {
                let errs = [grid / 4, grid / 2, grid]
                    .iter()
                    .map(|&n| Ok(curvature_field_error(&curvature_field(p, n, n)?, p)))
                    .collect::<Result<Vec<f64>>>()?;
                let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
                let metric = ratios.iter().map(|r| (r - 4.0).abs()).fold(0.0, f64::max);
                Ok((metric, vec![("field_errors", json!(errs)), ("ratios", json!(ratios))]))
            }));
        }
    }
    out
}

fn projection_validity(ctx: &Ctx) -> Vec<CheckResult> {
    let grid = 128;
    ctx.cfg
        .sweep
        .p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            ctx.run_with(i, json!({"p": p, "grid": grid}), "projection-validity", Le, |_| {
                let d = projection_p(grid, grid, p)?.defects();
                Ok((d.max(), vec![("defects", json!(d))]))
            })
        })
        .collect()
}

fn determinism(ctx: &Ctx) -> Vec<CheckResult> {
    vec![ctx.run_with(0, json!({"checks": DETERMINISM_SUBSET}), "determinism", Le, |_| {
        let first = render_report(&run_named(ctx.cfg, &DETERMINISM_SUBSET), ReportFormat::Json)?;
        let second = render_report(&run_named(ctx.cfg, &DETERMINISM_SUBSET), ReportFormat::Json)?;
        let differ = if first == second { 0.0 } else { 1.0 };
        Ok((differ, vec![("bytes", json!(first.len()))]))
    })]
}
