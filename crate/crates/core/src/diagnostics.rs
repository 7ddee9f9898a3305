//! Weighted relative-entropy diagnostics around the tracked shift: the
//! weight profile, the contraction functional H(t), its exact production
//! identity (hyperbolic and diffusive parts), and the per-checkpoint record
//! stream the experiment drivers serialize.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::{relative_entropy, relative_flux, EntropyModel, FluxModel, LambdaBox, ShockPair};
use crate::shift::ShiftSample;
use crate::solver::SimState;

// 4-point Gauss-Legendre rule on [-1, 1], used for the weight integral.
const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Outer-scaled cutoff weight in the layer variable z = |x - X|/eps:
/// linear with slope theta e^(1 - theta delta) on [0, 1/theta), the
/// exponential e^(theta (z - delta)) on [1/theta, delta), and 1 beyond.
/// Valid only when delta >= 1/theta; then phi is C^0, increasing, and
/// phi' is continuous except at z = delta.
#[derive(Clone, Copy, Debug)]
pub struct WeightFn {
    pub theta: f64,
    pub delta: f64,
}

impl WeightFn {
    pub fn new(theta: f64, delta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight needs finite theta > 0, got theta = {theta}, delta = {delta}"
            )));
        }
        if theta * delta < 1.0 - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "weight needs delta >= 1/theta, got theta = {theta}, delta = {delta}"
            )));
        }
        Ok(WeightFn { theta, delta })
    }

    pub fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else if z < 1.0 / self.theta {
            self.theta * (1.0 - self.theta * self.delta).exp() * z
        } else if z < self.delta {
            (self.theta * (z - self.delta)).exp()
        } else {
            1.0
        }
    }

    pub fn deriv(&self, z: f64) -> f64 {
        if z < 0.0 {
            0.0
        } else if z < 1.0 / self.theta {
            self.theta * (1.0 - self.theta * self.delta).exp()
        } else if z < self.delta {
            self.theta * (self.theta * (z - self.delta)).exp()
        } else {
            0.0
        }
    }

    /// integral over [0, delta] of (phi')^2 restricted to the steep region
    /// phi' > theta phi, exactly theta e^2 e^(-2 theta delta).
    pub fn excess_grad_sq_closed(&self) -> f64 {
        self.theta * (2.0 - 2.0 * self.theta * self.delta).exp()
    }

    /// Same integral by panelwise Gauss quadrature with the indicator
    /// evaluated pointwise.
    pub fn excess_grad_sq_numeric(&self) -> f64 {
        let mut acc = 0.0;
        let mut panel = |a: f64, b: f64, panels: usize| {
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let m = a + (p as f64 + 0.5) * h;
                for q in 0..4 {
                    let z = m + 0.5 * h * GL4_X[q];
                    let d = self.deriv(z);
                    if d > self.theta * self.eval(z) {
                        acc += 0.5 * h * GL4_W[q] * d * d;
                    }
                }
            }
        };
        let knee = (1.0 / self.theta).min(self.delta);
        panel(0.0, knee, 24);
        if knee < self.delta {
            panel(knee, self.delta, 48);
        }
        acc
    }
}

/// delta = ln(1/eps), the default weight plateau in layer units.
pub fn default_delta(epsilon: f64) -> f64 {
    (1.0 / epsilon).ln()
}

/// Default steepness: (c_left - c_right)/(4 Lambda^2) capped at 1, then
/// floored at 1/delta so the weight stays valid at desk-scale epsilon.
pub fn default_theta(shock: &ShockPair, lambda: &LambdaBox, delta: f64) -> f64 {
    (shock.jump() / (4.0 * lambda.lambda * lambda.lambda))
        .min(1.0)
        .max(1.0 / delta)
}

/// Split a cell at the shift position and hand each piece to the
/// accumulator as (x_mid, len, side_state).
fn for_cell_pieces<G: FnMut(f64, f64, f64)>(
    xl: f64,
    xr: f64,
    x_shift: f64,
    shock: &ShockPair,
    mut g: G,
) {
    if xr <= x_shift {
        g(0.5 * (xl + xr), xr - xl, shock.c_left);
    } else if xl >= x_shift {
        g(0.5 * (xl + xr), xr - xl, shock.c_right);
    } else {
        g(0.5 * (xl + x_shift), x_shift - xl, shock.c_left);
        g(0.5 * (x_shift + xr), xr - x_shift, shock.c_right);
    }
}

/// Weighted relative entropy H = int phi^2 eta(U | shifted shock) dx.
pub fn weighted_h(
    state: &SimState,
    x_shift: f64,
    weight: &WeightFn,
    entropy: &EntropyModel,
    shock: &ShockPair,
) -> f64 {
    let eps = state.epsilon;
    let mut acc = 0.0;
    for i in 0..state.u.len() {
        let (xl, xr) = state.grid.cell_edges(i);
        let u = state.u[i];
        for_cell_pieces(xl, xr, x_shift, shock, |xm, len, c| {
            let phi = weight.eval((xm - x_shift).abs() / eps);
            acc += phi * phi * relative_entropy(entropy, u, c) * len;
        });
    }
    acc
}

/// Plain L2 distance squared to the shifted shock.
pub fn l2sq_to_shifted(state: &SimState, x_shift: f64, shock: &ShockPair) -> f64 {
    let mut acc = 0.0;
    for i in 0..state.u.len() {
        let (xl, xr) = state.grid.cell_edges(i);
        let u = state.u[i];
        for_cell_pieces(xl, xr, x_shift, shock, |_, len, c| {
            acc += (u - c) * (u - c) * len;
        });
    }
    acc
}

/// Unweighted relative entropy against the shifted shock.
pub fn rel_ent_total(
    state: &SimState,
    x_shift: f64,
    entropy: &EntropyModel,
    shock: &ShockPair,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..state.u.len() {
        let (xl, xr) = state.grid.cell_edges(i);
        let u = state.u[i];
        for_cell_pieces(xl, xr, x_shift, shock, |_, len, c| {
            acc += relative_entropy(entropy, u, c) * len;
        });
    }
    acc
}

/// L2 norm of the positive part of the discrete space derivative.
pub fn pos_deriv_norm(state: &SimState) -> f64 {
    let dx = state.grid.dx();
    let mut acc = 0.0;
    for w in state.u.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 {
            acc += d * d / dx;
        }
    }
    acc.sqrt()
}

/// The two production terms of the contraction identity,
/// dH/dt = hyp + dif:
///
/// hyp = (2/eps) [ int_{X-de}^{X} phi phi' (Xdot eta(U|c_l) - F(U, c_l))
///               - int_{X}^{X+de} phi phi' (Xdot eta(U|c_r) - F(U, c_r)) ]
/// dif = eps int phi^2 D2u (eta'(U) - eta'(c_side))
///
/// with z = |x - X|/eps, de = delta eps, and D2u the solver's centered
/// stencil with far-field ghost cells.
pub fn lemma_terms(
    state: &SimState,
    x_shift: f64,
    xdot: f64,
    weight: &WeightFn,
    entropy: &EntropyModel,
    flux: &FluxModel,
    shock: &ShockPair,
) -> Result<(f64, f64)> {
    let eps = state.epsilon;
    let dx = state.grid.dx();
    let n = state.u.len();
    let band = weight.delta * eps;

    let mut hyp = 0.0;
    // Only cells meeting [X - band, X + band] can contribute; pieces are
    // split at the shift and at both band edges so the midpoint rule never
    // straddles a discontinuity of the integrand.
    let first = ((x_shift - band - state.grid.x_lo) / dx).floor().max(0.0) as usize;
    let last = (((x_shift + band - state.grid.x_lo) / dx).ceil() as usize + 1).min(n);
    for i in first..last {
        let (xl, xr) = state.grid.cell_edges(i);
        let u = state.u[i];
        let mut cuts = [xl, 0.0, 0.0, 0.0, xr];
        let mut k = 1;
        for c in [x_shift - band, x_shift, x_shift + band] {
            if c > xl && c < xr {
                cuts[k] = c;
                k += 1;
            }
        }
        cuts[k] = xr;
        for w in cuts[..=k].windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let xm = 0.5 * (a + b);
            let z = (xm - x_shift).abs() / eps;
            let pp = weight.eval(z) * weight.deriv(z);
            if pp == 0.0 {
                continue;
            }
            let c = if xm < x_shift {
                shock.c_left
            } else {
                shock.c_right
            };
            let sgn = if xm < x_shift { 1.0 } else { -1.0 };
            let val = xdot * relative_entropy(entropy, u, c) - relative_flux(entropy, flux, u, c)?;
            hyp += sgn * pp * val * (b - a);
        }
    }
    hyp *= 2.0 / eps;

    let mut dif = 0.0;
    for i in 0..n {
        let um = if i > 0 { state.u[i - 1] } else { state.bc_left };
        let up = if i + 1 < n { state.u[i + 1] } else { state.bc_right };
        let u = state.u[i];
        let d2 = (up - 2.0 * u + um) / (dx * dx);
        if d2 == 0.0 {
            continue;
        }
        let (xl, xr) = state.grid.cell_edges(i);
        for_cell_pieces(xl, xr, x_shift, shock, |xm, len, c| {
            let phi = weight.eval((xm - x_shift).abs() / eps);
            dif += phi * phi * d2 * (entropy.eta1(u) - entropy.eta1(c)) * len;
        });
    }
    dif *= eps;

    Ok((hyp, dif))
}

/// Relative entropy restricted to |x - x_shift| >= radius.
pub fn away_rel_ent(
    state: &SimState,
    x_shift: f64,
    radius: f64,
    entropy: &EntropyModel,
    shock: &ShockPair,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..state.u.len() {
        let (xl, xr) = state.grid.cell_edges(i);
        let u = state.u[i];
        for_cell_pieces(xl, xr, x_shift, shock, |xm, len, c| {
            if (xm - x_shift).abs() >= radius {
                acc += relative_entropy(entropy, u, c) * len;
            }
        });
    }
    acc
}

/// One checkpoint worth of diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct DiagRecord {
    pub t: f64,
    pub x_shift: f64,
    pub xdot: f64,
    pub h: f64,
    pub l2sq: f64,
    pub rel_ent: f64,
    pub pos_deriv: f64,
    pub hyp: f64,
    pub dif: f64,
    pub drift_dev2: f64,
    /// drift_dev2 / t^(2/3); None at t = 0.
    pub drift_ratio: Option<f64>,
}

/// Assemble the full record for a state and its current shift sample.
pub fn record(
    state: &SimState,
    sample: ShiftSample,
    sigma: f64,
    weight: &WeightFn,
    entropy: &EntropyModel,
    flux: &FluxModel,
    shock: &ShockPair,
) -> Result<DiagRecord> {
    let (hyp, dif) = lemma_terms(state, sample.x, sample.xdot, weight, entropy, flux, shock)?;
    let dev = sample.x - sigma * state.t;
    Ok(DiagRecord {
        t: state.t,
        x_shift: sample.x,
        xdot: sample.xdot,
        h: weighted_h(state, sample.x, weight, entropy, shock),
        l2sq: l2sq_to_shifted(state, sample.x, shock),
        rel_ent: rel_ent_total(state, sample.x, entropy, shock),
        pos_deriv: pos_deriv_norm(state),
        hyp,
        dif,
        drift_dev2: dev * dev,
        drift_ratio: if state.t > 0.0 {
            Some(dev * dev / state.t.powf(2.0 / 3.0))
        } else {
            None
        },
    })
}

/// Centered-difference time derivative of H over a checkpoint series;
/// returns (record index, dH/dt) for the interior checkpoints.
pub fn dhdt_centered(records: &[DiagRecord]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for k in 1..records.len().saturating_sub(1) {
        let dt = records[k + 1].t - records[k - 1].t;
        if dt > 0.0 {
            out.push((k, (records[k + 1].h - records[k - 1].h) / dt));
        }
    }
    out
}

/// Shift-drift measure against the exact shock speed.
#[derive(Clone, Copy, Debug)]
pub struct DriftPoint {
    pub t: f64,
    pub dev_sq: f64,
    /// dev_sq / t^(2/3); None at t = 0.
    pub ratio: Option<f64>,
}

pub fn drift_deviation(samples: &[ShiftSample], sigma: f64) -> Vec<DriftPoint> {
    samples
        .iter()
        .map(|s| {
            let dev = s.x - sigma * s.t;
            DriftPoint {
                t: s.t,
                dev_sq: dev * dev,
                ratio: if s.t > 0.0 {
                    Some(dev * dev / s.t.powf(2.0 / 3.0))
                } else {
                    None
                },
            }
        })
        .collect()
}

/// Write the record series as CSV: optional `# key=value ...` metadata
/// comment, a header row, then one row per checkpoint. Formatting uses
/// Rust's shortest round-trip float notation, so identical runs produce
/// identical bytes.
pub fn write_timeseries_csv<W: Write>(
    out: &mut W,
    meta: Option<&str>,
    records: &[DiagRecord],
) -> Result<()> {
    if let Some(meta) = meta {
        writeln!(out, "# {meta}")?;
    }
    writeln!(
        out,
        "t,X,Xdot,H,l2sq,rel_ent_total,pos_deriv_norm,hyp,dif,drift_dev2,drift_ratio"
    )?;
    for r in records {
        write!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},",
            r.t, r.x_shift, r.xdot, r.h, r.l2sq, r.rel_ent, r.pos_deriv, r.hyp, r.dif, r.drift_dev2
        )?;
        match r.drift_ratio {
            Some(v) => writeln!(out, "{v:e}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}
