//! Seeded cross-module invariant suites.
//!
//! Each suite draws from its own ChaCha stream derived from the run seed, so
//! suites can run concurrently and the assembled report is byte-identical
//! for a given seed and configuration.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classical::{
    analytic_velocity, chiral_flow, closed_form_deviation, duality_residual, integrate_doubled,
    integrate_physical, noether_charge, PhaseState,
};
use crate::error::Result;
use crate::hamiltonian::{first_order_route, split_hamiltonian};
use crate::ode::IntegratorOptions;
use crate::params::exact::{
    chiral_to_physical_exact, physical_to_chiral_exact, RationalChiral, RationalDho,
};
use crate::params::{chiral_to_physical, physical_to_chiral, DhoParams};
use crate::pseudoq::{
    composite_spectrum, eta_operator, fock_matrix_hamiltonian, ladder_algebra,
    ladder_matrix_elements, number_and_hamiltonian, oscillator_spectrum,
    pseudo_hermiticity_residual, OperatorMatrix,
};
use crate::solder::path::PolyPath;
use crate::solder::{
    auxiliary_lagrangian, chiral_lagrangian, chiral_lagrangian_exact, composite_lagrangian_exact,
    gauge_shift, gauge_variation_residual, solder_auxiliary, solder_direct, Chirality,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChecksConfig {
    pub seed: u64,
    /// Draws for algebraic identities.
    pub algebraic_draws: usize,
    /// Draws for integration-backed checks.
    pub integration_draws: usize,
    /// Truncation dimension for the spectrum suite.
    pub dim: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            algebraic_draws: 1000,
            integration_draws: 100,
            dim: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub invariants: Vec<InvariantResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChecksReport {
    pub config: ChecksConfig,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl ChecksReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

#[derive(Default)]
struct Suite {
    invariants: Vec<InvariantResult>,
}

impl Suite {
    /// Records `residual <= tolerance`; NaN fails.
    fn check(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.invariants.push(InvariantResult {
            name: name.to_string(),
            passed: residual <= tolerance,
            max_residual: residual,
            tolerance,
        });
    }

    /// Records a boolean identity as residual 0 or 1 with tolerance 0.
    fn holds(&mut self, name: &str, ok: bool) {
        self.check(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    /// Records an error from a step that should have succeeded.
    fn failed(&mut self, name: &str, tolerance: f64) {
        self.check(name, f64::INFINITY, tolerance);
    }

    fn finish(self, name: &str) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            passed: self.invariants.iter().all(|i| i.passed),
            invariants: self.invariants,
        }
    }
}

/// Underdamped draw parametrized by `(m, γ/2m, Ω)`.
pub fn sample_underdamped<R: Rng>(rng: &mut R) -> DhoParams {
    let m = rng.random_range(0.2..5.0);
    let rate: f64 = rng.random_range(0.0..2.0);
    let omega: f64 = rng.random_range(0.3..3.0);
    DhoParams::new(m, 2.0 * m * rate, m * (omega * omega + rate * rate)).expect("positive draw")
}

/// Overdamped draw with `R ∈ (0.0975, 0.9975)`.
pub fn sample_overdamped<R: Rng>(rng: &mut R) -> DhoParams {
    let m = rng.random_range(0.2..5.0);
    let rate: f64 = rng.random_range(0.3..3.0);
    let beta = rate * rng.random_range(0.05..0.95);
    DhoParams::new(m, 2.0 * m * rate, m * (rate * rate - beta * beta)).expect("positive draw")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn params_rel_error(a: &DhoParams, b: &DhoParams) -> f64 {
    rel(a.m(), b.m())
        .max(rel(a.k(), b.k()))
        .max((a.gamma() - b.gamma()).abs() / b.gamma().abs().max(b.m()))
}

fn small_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> BigRational {
    BigRational::new(
        BigInt::from(rng.random_range(lo..=hi)),
        BigInt::from(rng.random_range(1..=12)),
    )
}

fn suite_params(cfg: &ChecksConfig, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::default();
    for (name, sample) in [
        (
            "underdamped_round_trip",
            sample_underdamped::<ChaCha8Rng> as fn(&mut ChaCha8Rng) -> DhoParams,
        ),
        ("overdamped_round_trip", sample_overdamped::<ChaCha8Rng>),
    ] {
        let mut worst = 0.0f64;
        for _ in 0..cfg.algebraic_draws {
            let p = sample(rng);
            worst = match physical_to_chiral(&p).and_then(|c| chiral_to_physical(&c)) {
                Ok(q) => worst.max(params_rel_error(&q, &p)),
                Err(_) => f64::INFINITY,
            };
        }
        s.check(name, worst, 1e-12);
    }

    let mut mismatches = 0usize;
    for _ in 0..cfg.algebraic_draws {
        // k₋ > 0, k₊ = -k₋ - δ and Γ > 0 give a physical overdamped triple
        let km = small_rational(rng, 1, 60);
        let delta = small_rational(rng, 1, 60);
        let kp = -(km.clone() + delta);
        let gamma = small_rational(rng, 1, 60);
        let ok = chiral_to_physical_exact(&RationalChiral {
            gamma,
            k_plus: kp,
            k_minus: km,
        })
        .and_then(|p| Ok((physical_to_chiral_exact(&p)?, p)))
        .and_then(|(c, p)| Ok((chiral_to_physical_exact(&c)?, p)))
        .map(|(q, p)| q == p)
        .unwrap_or(false);
        if !ok {
            mismatches += 1;
        }
    }
    s.check("overdamped_round_trip_exact", mismatches as f64, 0.0);
    s.finish("params")
}

fn suite_solder(cfg: &ChecksConfig, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::default();
    let mut worst = 0.0f64;
    for i in 0..cfg.algebraic_draws {
        let p = if i % 2 == 0 {
            sample_underdamped(rng)
        } else {
            sample_overdamped(rng)
        };
        let r = physical_to_chiral(&p).and_then(|cp| {
            let lp = chiral_lagrangian(Chirality::Plus, &cp);
            let lm = chiral_lagrangian(Chirality::Minus, &cp);
            let aux = solder_auxiliary(&lp, &lm)?;
            let direct = solder_direct(&lp, &lm)?;
            let scale = aux.residual.max_coefficient().max(1.0);
            Ok(aux
                .max_coefficient_deviation
                .max(direct.max_coefficient_deviation)
                .max(aux.residual.coefficient_deviation(&direct.residual))
                / scale)
        });
        worst = worst.max(r.unwrap_or(f64::INFINITY));
    }
    s.check("routes_agree_with_composite", worst, 1e-12);

    let q = |n: i64| BigRational::from_integer(n.into());
    let cp = RationalChiral {
        gamma: q(1),
        k_plus: q(-2),
        k_minus: q(1),
    };
    let lp = chiral_lagrangian_exact(Chirality::Plus, &cp);
    let lm = chiral_lagrangian_exact(Chirality::Minus, &cp);
    let want = RationalDho::new(q(1), q(3), q(2)).expect("anchor");
    let exact = [solder_auxiliary(&lp, &lm), solder_direct(&lp, &lm)]
        .iter()
        .all(|r| {
            r.as_ref().is_ok_and(|r| {
                r.identified.m == want.m
                    && r.identified.gamma == want.gamma
                    && r.identified.k == want.k
                    && r.residual == composite_lagrangian_exact(&want)
            })
        });
    s.holds("anchor_exact", exact);

    let mut gauge = 0.0f64;
    for _ in 0..cfg.integration_draws {
        let p = sample_underdamped(rng);
        let r = physical_to_chiral(&p).and_then(|cp| {
            auxiliary_lagrangian(
                &chiral_lagrangian(Chirality::Plus, &cp),
                &chiral_lagrangian(Chirality::Minus, &cp),
            )
        });
        gauge = gauge.max(match r {
            Ok(l) => {
                let path = PolyPath::random(rng, 6, 6);
                let shift = gauge_shift(&PolyPath::random(rng, 2, 6));
                gauge_variation_residual(&l, &path, &shift) / l.max_coefficient().max(1.0)
            }
            Err(_) => f64::INFINITY,
        });
    }
    s.check("auxiliary_gauge_invariance", gauge, 1e-10);
    s.finish("solder")
}

fn grid(t1: f64, dt: f64) -> Vec<f64> {
    let n = (t1 / dt).round() as usize;
    (0..=n).map(|i| i as f64 * t1 / n as f64).collect()
}

fn suite_classical(cfg: &ChecksConfig, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::default();
    let opts = IntegratorOptions::default();
    let anchor = DhoParams::new(0.5, 1.0, 1.0).expect("anchor");
    let one = Complex64::new(1.0, 0.0);

    let t = grid(10.0, 0.01);
    let dev = analytic_velocity(&anchor, one, 0.0)
        .and_then(|(vx, vy)| {
            integrate_doubled(
                &anchor,
                &PhaseState::from_physical(one, one, vx, vy),
                &t,
                &opts,
            )
        })
        .and_then(|traj| closed_form_deviation(&anchor, &traj));
    s.check("anchor_closed_form", dev.unwrap_or(f64::INFINITY), 1e-8);

    let decoupled = analytic_velocity(&anchor, one, 0.0)
        .and_then(|(vx, vy)| integrate_physical(&anchor, [one, one, vx, vy], &t, &opts));
    let gamma = physical_to_chiral(&anchor).map(|c| c.gamma);
    match (decoupled, gamma) {
        (Ok(traj), Ok(gamma)) => {
            s.check(
                "anchor_closed_form_decoupled",
                traj.closed_form_deviation(&anchor).unwrap_or(f64::INFINITY),
                1e-8,
            );
            s.check("anchor_xy_constancy", traj.xy_drift(), 1e-10);
            s.check("anchor_noether_drift", traj.noether_drift(gamma), 1e-8);
        }
        _ => s.failed("anchor_xy_constancy", 1e-10),
    }

    let (mut closed, mut dual, mut charge) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.integration_draws {
        let p = sample_underdamped(rng);
        let t = grid(4.0, 0.05);
        let x0 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let y0 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = (|| -> Result<(f64, f64, f64)> {
            let (vx, _) = analytic_velocity(&p, x0, 0.0)?;
            let (_, vy) = analytic_velocity(&p, y0, 0.0)?;
            let traj =
                integrate_doubled(&p, &PhaseState::from_physical(x0, y0, vx, vy), &t, &opts)?;
            let scale = traj
                .states()
                .iter()
                .map(|st| st.x1.norm().max(st.x2.norm()))
                .fold(1.0, f64::max);
            let cd = closed_form_deviation(&p, &traj)? / scale;
            let du = duality_residual(&p, &traj, &opts)?;

            let cp = physical_to_chiral(&p)?;
            let (g, kappa) = (cp.g().unwrap_or(f64::NAN), cp.kappa().unwrap_or_default());
            let start = PhaseState::new(x0, y0);
            let flow = chiral_flow(g, kappa, &start, &t, &opts)?;
            let c0 = noether_charge(cp.gamma, &start, Chirality::Plus);
            // drift relative to |Γ| times the largest |x₁|² + |x₂|² on the path
            let size = flow
                .states()
                .iter()
                .map(|st| st.x1.norm_sqr() + st.x2.norm_sqr())
                .fold(0.0, f64::max);
            let cs = flow
                .states()
                .iter()
                .map(|st| (noether_charge(cp.gamma, st, Chirality::Plus) - c0).norm())
                .fold(0.0, f64::max)
                / (cp.gamma.norm() * size).max(f64::MIN_POSITIVE);
            Ok((cd, du, cs))
        })();
        let (cd, du, cs) = r.unwrap_or((f64::INFINITY, f64::INFINITY, f64::INFINITY));
        closed = closed.max(cd);
        dual = dual.max(du);
        charge = charge.max(cs);
    }
    s.check("random_closed_form", closed, 1e-8);
    s.check("random_duality", dual, 1e-8);
    s.check("random_noether_drift", charge, 1e-8);
    s.finish("classical")
}

fn suite_hamiltonian(cfg: &ChecksConfig, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::default();
    let (mut symp, mut off, mut conj, mut route) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.integration_draws {
        let p = sample_underdamped(rng);
        match split_hamiltonian(&p) {
            Ok(sp) => {
                symp = symp.max(sp.map.symplectic_residual());
                off = off.max(sp.off_block_residual);
                conj = conj.max(sp.conjugacy_residual());
                let r = physical_to_chiral(&p).and_then(|cp| {
                    first_order_route(cp.g().unwrap_or(f64::NAN), cp.kappa().unwrap_or_default())
                });
                route = route.max(match r {
                    Ok(h) => (h.matrix() - sp.plus.matrix())
                        .iter()
                        .map(|z| z.norm())
                        .fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                });
            }
            Err(_) => symp = f64::INFINITY,
        }
    }
    s.check("ct_symplectic", symp, 1e-12);
    s.check("ct_off_block", off, 1e-12);
    s.check("plus_minus_conjugacy", conj, 1e-14);
    s.check("first_order_route", route, 1e-12);
    s.finish("hamiltonian")
}

fn suite_pseudoq(cfg: &ChecksConfig, rng: &mut ChaCha8Rng) -> SuiteReport {
    let mut s = Suite::default();
    let d = cfg.dim;
    s.holds(
        "exact_ladder_algebra",
        ladder_algebra(d).is_ok_and(|a| a.holds()),
    );

    let w = Complex64::new(1.0, 1.0);
    let r = (|| -> Result<(f64, f64)> {
        let eta = eta_operator(d)?;
        let (_, hd) = number_and_hamiltonian(w, d)?;
        let (_, hm) = number_and_hamiltonian(w.conj(), d)?;
        let diag =
            pseudo_hermiticity_residual(&hd, &eta)?.max(pseudo_hermiticity_residual(&hm, &eta)?);
        let href = fock_matrix_hamiltonian(w, w.norm(), d)?;
        let lead = href.entries().view((0, 0), (d - 1, d - 1)).into_owned();
        let lead = OperatorMatrix::new(lead, href.basis())?;
        let eta_lead = eta_operator(d - 1)?;
        Ok((diag, pseudo_hermiticity_residual(&lead, &eta_lead)?))
    })();
    let (diag, reference) = r.unwrap_or((f64::INFINITY, f64::INFINITY));
    s.check("pseudo_hermiticity_diagonal", diag, 1e-15);
    s.check("pseudo_hermiticity_reference", reference, 1e-10);

    let levels = d / 4;
    match (oscillator_spectrum(w, d), oscillator_spectrum(w, 2 * d)) {
        (Ok(spec), Ok(oracle)) => {
            let dev = |sp: &crate::pseudoq::OscillatorSpectrum| {
                sp.rows
                    .iter()
                    .take(levels)
                    .map(|r| (r.eigenvalue - w * (r.n as f64 + 0.5)).norm())
                    .fold(0.0, f64::max)
            };
            s.check("spectrum_levels", dev(&spec), 1e-6);
            s.check("spectrum_levels_oracle", dev(&oracle), 1e-6);
            let lv = &spec.levels;
            s.check("biorthonormality", lv.biorthonormality_residual(), 1e-8);
            let eta = (0..lv.len())
                .map(|n| lv.eta_alignment_residual(&spec.eta, n))
                .fold(0.0, f64::max);
            s.check("eta_identification", eta, 1e-6);
            let (mut num, mut cc) = (0.0f64, 0.0f64);
            for n in 1..levels {
                match ladder_matrix_elements(lv, &spec.a, &spec.atilde, n) {
                    Ok(rep) => {
                        num = num.max(rep.number_residual());
                        cc = cc.max(rep.conjugacy_residual());
                    }
                    Err(_) => num = f64::INFINITY,
                }
            }
            s.check("ladder_number", num, 1e-6);
            s.check("ladder_conjugacy", cc, 1e-8);
            s.check(
                "ground_annihilation",
                (spec.a.entries() * lv.right(0)).norm(),
                1e-8,
            );
        }
        _ => s.failed("spectrum_levels", 1e-6),
    }

    let (mut reality, mut imag) = (true, 0.0f64);
    for _ in 0..cfg.algebraic_draws {
        let p = sample_underdamped(rng);
        let (n, m) = (rng.random_range(0..20u64), rng.random_range(0..20u64));
        match composite_spectrum(&p, n, m) {
            Ok(e) => {
                reality &= (e.im == 0.0) == (n == m);
                imag = imag.max((e.im - p.decay_rate() * (n as f64 - m as f64)).abs());
            }
            Err(_) => reality = false,
        }
    }
    s.holds("composite_real_iff_equal", reality);
    s.check("composite_imaginary_part", imag, 0.0);
    let anchor = DhoParams::new(0.5, 1.0, 1.0).expect("anchor");
    s.holds(
        "composite_anchor",
        composite_spectrum(&anchor, 1, 0).is_ok_and(|e| e == Complex64::new(2.0, 1.0)),
    );
    s.finish("pseudoq")
}

type SuiteFn = fn(&ChecksConfig, &mut ChaCha8Rng) -> SuiteReport;

const SUITES: [SuiteFn; 5] = [
    suite_params,
    suite_solder,
    suite_classical,
    suite_hamiltonian,
    suite_pseudoq,
];

/// Runs all suites concurrently and assembles the report in a fixed order.
pub fn run_checks(cfg: &ChecksConfig) -> ChecksReport {
    let suites: Vec<SuiteReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = SUITES
            .iter()
            .enumerate()
            .map(|(i, f)| {
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(i as u64 + 1);
                    f(cfg, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite panicked"))
            .collect()
    });
    ChecksReport {
        config: *cfg,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}
