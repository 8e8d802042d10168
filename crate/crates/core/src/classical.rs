//! Classical dynamics of the doubled oscillator.
//!
//! States live in hyperbolic coordinates `x₁, x₂` with
//! `x = (x₁ + x₂)/√2` the damped oscillator and `y = (x₁ - x₂)/√2` its
//! time-reversed image. States are complex; the physical motion for real
//! initial data is the real part.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, IntegratorOptions, State};
use crate::params::{frequencies, ChiralParams, DhoParams};
use crate::solder::matrix::{sigma_x, Mat};
use crate::solder::{Chirality, QuadraticLagrangian};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x1: Complex64,
    pub x2: Complex64,
    /// `(ẋ₁, ẋ₂)`; required by the second-order system only.
    pub velocity: Option<[Complex64; 2]>,
}

impl PhaseState {
    pub fn new(x1: Complex64, x2: Complex64) -> Self {
        Self {
            x1,
            x2,
            velocity: None,
        }
    }

    pub fn with_velocity(x1: Complex64, x2: Complex64, v1: Complex64, v2: Complex64) -> Self {
        Self {
            x1,
            x2,
            velocity: Some([v1, v2]),
        }
    }

    /// State with positions `(x, y)` and velocities `(ẋ, ẏ)`.
    pub fn from_physical(x: Complex64, y: Complex64, vx: Complex64, vy: Complex64) -> Self {
        let (x1, x2) = physical_to_hyperbolic(x, y);
        let (v1, v2) = physical_to_hyperbolic(vx, vy);
        Self::with_velocity(x1, x2, v1, v2)
    }

    pub fn is_finite(&self) -> bool {
        let fin = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        fin(&self.x1) && fin(&self.x2) && self.velocity.is_none_or(|v| v.iter().all(fin))
    }

    pub fn physical(&self) -> (Complex64, Complex64) {
        hyperbolic_to_physical(self)
    }
}

/// `(x, y) = ((x₁ + x₂)/√2, (x₁ - x₂)/√2)`
pub fn hyperbolic_to_physical(s: &PhaseState) -> (Complex64, Complex64) {
    ((s.x1 + s.x2) * FRAC_1_SQRT_2, (s.x1 - s.x2) * FRAC_1_SQRT_2)
}

/// Inverse of [`hyperbolic_to_physical`]; the map is its own inverse.
pub fn physical_to_hyperbolic(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    ((x + y) * FRAC_1_SQRT_2, (x - y) * FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PhaseState>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<PhaseState>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        ode::validate_grid(&times)?;
        if states.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParams("non-finite state".into()));
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t, x1_re, x1_im, x2_re, x2_im, x_re, x_im, y_re, y_im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        out.write_record([
            "t", "x1_re", "x1_im", "x2_re", "x2_im", "x_re", "x_im", "y_re", "y_im",
        ])
        .map_err(io)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let (x, y) = s.physical();
            let row = [
                *t, s.x1.re, s.x1.im, s.x2.re, s.x2.im, x.re, x.im, y.re, y.im,
            ];
            out.write_record(row.iter().map(|v| format!("{v:e}")))
                .map_err(io)?;
        }
        out.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Integrates `m ẍ₁ + γ ẋ₂ + k x₁ = 0`, `m ẍ₂ + γ ẋ₁ + k x₂ = 0`, which is
/// `m ẍ + γ ẋ + k x = 0` together with `m ÿ - γ ẏ + k y = 0`.
pub fn integrate_doubled(
    p: &DhoParams,
    init: &PhaseState,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let [v1, v2] = init
        .velocity
        .ok_or_else(|| Error::InvalidParams("second-order integration needs velocities".into()))?;
    let (g, w) = (p.gamma() / p.m(), p.k() / p.m());
    let f = move |_: f64, s: &State| {
        State::from_vec(vec![s[2], s[3], -s[3] * g - s[0] * w, -s[2] * g - s[1] * w])
    };
    let ys = ode::integrate(
        f,
        State::from_vec(vec![init.x1, init.x2, v1, v2]),
        grid,
        opts,
    )?;
    let states = ys
        .iter()
        .map(|s| PhaseState::with_velocity(s[0], s[1], s[2], s[3]))
        .collect();
    Trajectory::new(grid.to_vec(), states)
}

/// `x = A e^{-γt/2m} e^{iΩt}`, `y = A e^{γt/2m} e^{-iΩt}`.
pub fn analytic_solution(
    p: &DhoParams,
    amplitude: Complex64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    let f = frequencies(p)?;
    let rate = p.decay_rate();
    let x = amplitude * Complex64::new(-rate * t, f.omega * t).exp();
    let y = amplitude * Complex64::new(rate * t, -f.omega * t).exp();
    Ok((x, y))
}

/// Velocities `(ẋ, ẏ)` of [`analytic_solution`] at `t`.
pub fn analytic_velocity(
    p: &DhoParams,
    amplitude: Complex64,
    t: f64,
) -> Result<(Complex64, Complex64)> {
    let f = frequencies(p)?;
    let (x, y) = analytic_solution(p, amplitude, t)?;
    Ok((
        x * Complex64::new(-p.decay_rate(), f.omega),
        y * Complex64::new(p.decay_rate(), -f.omega),
    ))
}

fn linear_flow(
    c: DMatrix<Complex64>,
    init: &PhaseState,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let ys = ode::integrate(
        move |_, s: &State| &c * s,
        State::from_vec(vec![init.x1, init.x2]),
        grid,
        opts,
    )?;
    let states = ys.iter().map(|s| PhaseState::new(s[0], s[1])).collect();
    Trajectory::new(grid.to_vec(), states)
}

/// Integrates `ig ẋ₂ = -κ x₁`, `ig ẋ₁ = -κ x₂`, the equations of motion of the
/// `+` member of the complex doublet. `x₁ ± x₂` evolve as `e^{±iκt/g}`.
pub fn chiral_flow(
    g: f64,
    kappa: Complex64,
    init: &PhaseState,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    ChiralParams::complex(g, kappa)?;
    let r = Complex64::i() * kappa / g;
    let zero = Complex64::from(0.0);
    linear_flow(
        DMatrix::from_row_slice(2, 2, &[zero, r, r, zero]),
        init,
        grid,
        opts,
    )
}

/// Integrates the Euler–Lagrange equations `2A ẋ = K x` of a first-order
/// two-variable Lagrangian.
pub fn first_order_flow(
    l: &QuadraticLagrangian,
    init: &PhaseState,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if l.n() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2 variables, got {}",
            l.n()
        )));
    }
    if !l.is_first_order() {
        return Err(Error::NotFirstOrder("kinetic matrix is nonzero".into()));
    }
    let to_na = |m: &Mat<Complex64>| DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
    let two_a = to_na(l.coupling()) * Complex64::from(2.0);
    let inv = two_a
        .try_inverse()
        .ok_or_else(|| Error::InvalidParams("first-order coupling is singular".into()))?;
    linear_flow(inv * to_na(l.potential()), init, grid, opts)
}

/// `C± = ±(Γ/2)(x₁² - x₂²)`
pub fn noether_charge(gamma: Complex64, s: &PhaseState, sign: Chirality) -> Complex64 {
    sign.sign::<Complex64>() * gamma * 0.5 * (s.x1 * s.x1 - s.x2 * s.x2)
}

/// Size of the change of `L` under `x → x + θσx` once total derivatives
/// are discarded.
///
/// `L` is quadratic, so the change is `θ L₁ + θ² L₂` with `L₂ = L∘σ`. Both
/// forms are reduced to canonical coefficients, in which `xᵀSẋ` terms
/// are dropped. The result is `|θ| max|L₁| + θ² max|L₂|`; for an invariant
/// `L` the first term vanishes and the result is the `θ²` remainder.
pub fn su11_invariance_residual(l: &QuadraticLagrangian, theta: f64) -> Result<f64> {
    let (l1, l2) = su11_variation(l)?;
    Ok(theta.abs() * l1.max_coefficient() + theta * theta * l2.max_coefficient())
}

/// First- and second-order parts `(L₁, L₂)` of the `x → x + θσx` variation.
pub fn su11_variation(
    l: &QuadraticLagrangian,
) -> Result<(QuadraticLagrangian, QuadraticLagrangian)> {
    if l.n() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2 variables, got {}",
            l.n()
        )));
    }
    let sigma = sigma_x::<Complex64>();
    let names = l.labels().to_vec();
    let l2 = l.change_variables(&sigma, names.clone())?;
    let unit = l.change_variables(&(&Mat::identity(2) + &sigma), names.clone())?;
    let diff = |f: fn(&QuadraticLagrangian) -> &Mat<Complex64>| &(f(&unit) - f(l)) - f(&l2);
    let l1 = QuadraticLagrangian::new(
        diff(QuadraticLagrangian::kinetic),
        diff(QuadraticLagrangian::coupling),
        diff(QuadraticLagrangian::potential),
        names,
    )?;
    Ok((l1, l2))
}

/// Time-reverses a doubled trajectory and swaps `x ↔ y`, which maps
/// `(x₁, x₂, ẋ₁, ẋ₂)(t)` to `(x₁, -x₂, -ẋ₁, ẋ₂)(-t)`.
pub fn time_reversed_dual(traj: &Trajectory) -> Result<Trajectory> {
    let mut times = Vec::with_capacity(traj.len());
    let mut states = Vec::with_capacity(traj.len());
    for (t, s) in traj.times.iter().zip(&traj.states).rev() {
        let [v1, v2] = s
            .velocity
            .ok_or_else(|| Error::InvalidParams("duality needs velocities".into()))?;
        times.push(-t);
        states.push(PhaseState::with_velocity(s.x1, -s.x2, -v1, v2));
    }
    Trajectory::new(times, states)
}

/// Relative deviation between the dual of `traj` and a fresh integration of
/// the same system from the dual's initial state.
pub fn duality_residual(p: &DhoParams, traj: &Trajectory, opts: &IntegratorOptions) -> Result<f64> {
    let dual = time_reversed_dual(traj)?;
    let rerun = integrate_doubled(p, &dual.states[0], &dual.times, opts)?;
    let flat = |s: &PhaseState| {
        let v = s.velocity.unwrap_or_default();
        DVector::from_vec(vec![s.x1, s.x2, v[0], v[1]])
    };
    let mut scale = 1.0f64;
    let mut dev = 0.0f64;
    for (a, b) in dual.states.iter().zip(&rerun.states) {
        let (fa, fb) = (flat(a), flat(b));
        scale = scale.max(fa.iter().map(|c| c.norm()).fold(0.0, f64::max));
        dev = dev.max((fa - fb).iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    Ok(dev / scale)
}

/// Largest deviation of an integrated doubled trajectory from the closed
/// forms, with amplitudes `x(0)` and `y(0)` taken from the first state.
/// The initial velocities must be those of the closed forms.
pub fn closed_form_deviation(p: &DhoParams, traj: &Trajectory) -> Result<f64> {
    let (ax, ay) = traj.states[0].physical();
    let t0 = traj.times[0];
    let mut dev = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let (x, y) = s.physical();
        let (xa, _) = analytic_solution(p, ax, t - t0)?;
        let (_, ya) = analytic_solution(p, ay, t - t0)?;
        dev = dev.max((x - xa).norm()).max((y - ya).norm());
    }
    Ok(dev)
}

/// Samples of `(x, y, ẋ, ẏ)` integrated in the decoupled coordinates.
///
/// With `x` decaying and `y` growing, recovering `x` from `x₁ + x₂` loses
/// `|y|·ε` absolutely; storing `x` and `y` keeps both to relative precision,
/// so products such as `x·y` stay accurate over many decay times.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalTrajectory {
    pub times: Vec<f64>,
    /// Rows `[x, y, ẋ, ẏ]`.
    pub states: Vec<[Complex64; 4]>,
}

impl PhysicalTrajectory {
    /// Largest `|x(t) - x_cf(t)|` or `|y(t) - y_cf(t)|`, with the closed forms
    /// anchored at the first sample.
    pub fn closed_form_deviation(&self, p: &DhoParams) -> Result<f64> {
        let [ax, ay, ..] = self.states[0];
        let t0 = self.times[0];
        let mut dev = 0.0f64;
        for (t, s) in self.times.iter().zip(&self.states) {
            let (xa, _) = analytic_solution(p, ax, t - t0)?;
            let (_, ya) = analytic_solution(p, ay, t - t0)?;
            dev = dev.max((s[0] - xa).norm()).max((s[1] - ya).norm());
        }
        Ok(dev)
    }

    /// `max_t |x(t)y(t) - x(0)y(0)|`
    pub fn xy_drift(&self) -> f64 {
        let c0 = self.states[0][0] * self.states[0][1];
        self.states
            .iter()
            .map(|s| (s[0] * s[1] - c0).norm())
            .fold(0.0, f64::max)
    }

    /// `max_t |C(t) - C(0)|` for `C± = ±Γ x y`, which equals
    /// `±(Γ/2)(x₁² - x₂²)`.
    pub fn noether_drift(&self, gamma: Complex64) -> f64 {
        gamma.norm() * self.xy_drift()
    }
}

/// Integrates `m ẍ + γ ẋ + k x = 0` and `m ÿ - γ ẏ + k y = 0` as separate
/// components of one state.
pub fn integrate_physical(
    p: &DhoParams,
    init: [Complex64; 4],
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<PhysicalTrajectory> {
    let (g, w) = (p.gamma() / p.m(), p.k() / p.m());
    let f = move |_: f64, s: &State| {
        State::from_vec(vec![s[2], s[3], -s[2] * g - s[0] * w, s[3] * g - s[1] * w])
    };
    let ys = ode::integrate(f, State::from_row_slice(&init), grid, opts)?;
    Ok(PhysicalTrajectory {
        times: grid.to_vec(),
        states: ys.iter().map(|s| [s[0], s[1], s[2], s[3]]).collect(),
    })
}
