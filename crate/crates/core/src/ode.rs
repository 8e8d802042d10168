//! Fixed-step RK4 with a step-halving error estimate.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Largest step; each output interval is split into equal steps no longer
    /// than this.
    pub step: f64,
    /// Bound on `|y_h - y_{h/2}| / max(1, |y|)` per output interval.
    pub tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tolerance: 1e-8,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParams(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

pub fn validate_grid(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidParams("time grid is empty".into()));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams(
            "time grid has non-finite entries".into(),
        ));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn rk4_step<F: Fn(f64, &State) -> State>(f: &F, t: f64, y: &State, h: f64) -> State {
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &(y + &k1 * Complex64::from(h / 2.0)));
    let k3 = f(t + h / 2.0, &(y + &k2 * Complex64::from(h / 2.0)));
    let k4 = f(t + h, &(y + &k3 * Complex64::from(h)));
    y + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0)
}

fn advance<F: Fn(f64, &State) -> State>(f: &F, t0: f64, y: &State, dt: f64, n: usize) -> State {
    let h = dt / n as f64;
    let mut y = y.clone();
    for i in 0..n {
        y = rk4_step(f, t0 + i as f64 * h, &y, h);
    }
    y
}

fn max_norm(y: &State) -> f64 {
    y.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Integrates `ẏ = f(t, y)` from `y(grid[0]) = y0`, returning the state at
/// every grid point. Each interval is integrated at step `h` and `h/2`; the
/// `h/2` solution is kept and the difference is the error estimate.
pub fn integrate<F: Fn(f64, &State) -> State>(
    f: F,
    y0: State,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<State>> {
    opts.validate()?;
    validate_grid(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        let n = ((dt / opts.step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let y = out.last().expect("seeded with y0");
        let coarse = advance(&f, w[0], y, dt, n);
        let fine = advance(&f, w[0], y, dt, 2 * n);
        let scale = max_norm(&fine).max(1.0);
        let estimate = max_norm(&(&coarse - &fine)) / scale;
        if !(estimate <= opts.tolerance) {
            return Err(Error::StepSizeTooLarge {
                estimate,
                tolerance: opts.tolerance,
            });
        }
        out.push(fine);
    }
    Ok(out)
}
