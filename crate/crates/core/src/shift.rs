//! Shift tracking: the moving reference position X(t) that the weighted
//! relative-entropy diagnostics recenter on. X follows the ODE
//! Xdot = f(U(t, X), m) where f is the normalized relative flux and m the
//! midpoint of the shock states; it is integrated with Heun's method in
//! lockstep with the field solver, one advance per accepted step.

use crate::error::{Error, Result};
use crate::model::{normalized_flux, EntropyModel, FluxModel, LambdaBox, ShockPair};
use crate::solver::SimState;

/// Linear interpolation of cell averages at cell centers. Errors outside
/// the span of the centers.
pub fn trace(state: &SimState, x: f64) -> Result<f64> {
    let n = state.u.len();
    let lo = state.grid.center(0);
    let hi = state.grid.center(n - 1);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let dx = state.grid.dx();
    let s = (x - lo) / dx;
    let j = (s.floor() as usize).min(n - 2);
    let t = (s - j as f64).clamp(0.0, 1.0);
    Ok(state.u[j] + t * (state.u[j + 1] - state.u[j]))
}

/// Piecewise-constant shock recentered at x_shift.
pub fn shifted_shock(shock: &ShockPair, x_shift: f64, x: f64) -> f64 {
    if x < x_shift {
        shock.c_left
    } else {
        shock.c_right
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShiftSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
}

/// Integrated shift history. `lip_bound` is the a priori speed bound
/// 2 Lambda^2; exceeding it is logged once, not fatal.
#[derive(Clone, Debug)]
pub struct ShiftTrack {
    pub samples: Vec<ShiftSample>,
    pub midpoint: f64,
    pub lip_bound: f64,
    warned_speed: bool,
}

impl ShiftTrack {
    /// Start the track at X = 0 on the given state.
    pub fn begin(
        state: &SimState,
        entropy: &EntropyModel,
        flux: &FluxModel,
        midpoint: f64,
        lambda: &LambdaBox,
    ) -> Result<Self> {
        let xdot = normalized_flux(entropy, flux, trace(state, 0.0)?, midpoint)?;
        Ok(ShiftTrack {
            samples: vec![ShiftSample {
                t: state.t,
                x: 0.0,
                xdot,
            }],
            midpoint,
            lip_bound: 2.0 * lambda.lambda * lambda.lambda,
            warned_speed: false,
        })
    }

    pub fn current(&self) -> ShiftSample {
        *self.samples.last().unwrap()
    }

    fn guard_position(&self, state: &SimState, x: f64) -> Result<()> {
        let dx = state.grid.dx();
        let lo = state.grid.x_lo + 5.0 * dx;
        let hi = state.grid.x_hi - 5.0 * dx;
        if x < lo || x > hi {
            return Err(Error::DomainTooSmall {
                x,
                x_lo: state.grid.x_lo,
                x_hi: state.grid.x_hi,
                t: state.t,
            });
        }
        Ok(())
    }

    /// Heun update across one solver step: predictor with the slope at
    /// (prev, X), corrector averaging the slope at (next, X_pred). A zero
    /// step leaves X unchanged.
    pub fn advance(
        &mut self,
        prev: &SimState,
        next: &SimState,
        entropy: &EntropyModel,
        flux: &FluxModel,
    ) -> Result<()> {
        let x0 = self.current().x;
        let dt = next.t - prev.t;
        self.guard_position(prev, x0)?;
        let k1 = normalized_flux(entropy, flux, trace(prev, x0)?, self.midpoint)?;
        let x_pred = x0 + dt * k1;
        self.guard_position(next, x_pred)?;
        let k2 = normalized_flux(entropy, flux, trace(next, x_pred)?, self.midpoint)?;
        let xdot = 0.5 * (k1 + k2);
        let x1 = x0 + dt * xdot;
        self.guard_position(next, x1)?;
        if !self.warned_speed && xdot.abs() > self.lip_bound + 1e-8 {
            log::warn!(
                "shift speed {:.6} exceeds the bound {:.6} at t = {}",
                xdot,
                self.lip_bound,
                next.t
            );
            self.warned_speed = true;
        }
        self.samples.push(ShiftSample {
            t: next.t,
            x: x1,
            xdot,
        });
        Ok(())
    }
}
