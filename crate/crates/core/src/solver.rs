//! Explicit finite-volume stepper: Godunov flux for the convex conservation
//! part plus centered second differences for the viscosity, forward Euler in
//! time. With cfl_advective + 2 cfl_diffusive <= 1 the combined update is
//! monotone, which is what the maximum-principle and comparison contracts
//! lean on; the defaults (0.5, 0.25) sit exactly on that line.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FluxModel, ShockPair};

/// Uniform cell grid over [x_lo, x_hi].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<Self> {
        if !(x_lo < x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidDomain { x_lo, x_hi });
        }
        if n_cells < 16 {
            return Err(Error::GridTooCoarse { n_cells });
        }
        Ok(Grid { x_lo, x_hi, n_cells })
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx()
    }

    pub fn cell_edges(&self, i: usize) -> (f64, f64) {
        let dx = self.dx();
        (self.x_lo + i as f64 * dx, self.x_lo + (i + 1) as f64 * dx)
    }
}

/// Cell averages plus the run context the stepper needs: time, viscosity,
/// far-field boundary values, and the initial-data box used for the
/// instability guard.
#[derive(Clone, Debug)]
pub struct SimState {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub t: f64,
    pub epsilon: f64,
    pub bc_left: f64,
    pub bc_right: f64,
    box_lo: f64,
    box_hi: f64,
}

impl SimState {
    /// The admissibility box [box_lo, box_hi] is frozen here from the
    /// initial data and boundary values; later steps must stay inside it.
    pub fn new(
        grid: Grid,
        u: Vec<f64>,
        t: f64,
        epsilon: f64,
        bc_left: f64,
        bc_right: f64,
    ) -> Result<Self> {
        if u.len() != grid.n_cells {
            return Err(Error::InvalidParameter(format!(
                "state length {} does not match grid n_cells {}",
                u.len(),
                grid.n_cells
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        let mut lo = bc_left.min(bc_right);
        let mut hi = bc_left.max(bc_right);
        for &v in &u {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite initial value".into()));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(SimState {
            grid,
            u,
            t,
            epsilon,
            bc_left,
            bc_right,
            box_lo: lo,
            box_hi: hi,
        })
    }

    /// Initial-data box the run must stay inside (maximum principle).
    pub fn bounds_box(&self) -> (f64, f64) {
        (self.box_lo, self.box_hi)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.u {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Total mass, sum of cell averages times dx.
    pub fn mass(&self) -> f64 {
        self.u.iter().sum::<f64>() * self.grid.dx()
    }

    /// Largest far-field deviation from the boundary values.
    pub fn boundary_deviation(&self) -> f64 {
        let n = self.u.len();
        (self.u[0] - self.bc_left)
            .abs()
            .max((self.u[n - 1] - self.bc_right).abs())
    }
}

/// Time-stepping controls. Checkpoints are the multiples of
/// t_end/output_stride counted from t = 0; stable_dt never steps across one.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepperConfig {
    pub t_end: f64,
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub output_stride: usize,
}

impl StepperConfig {
    pub fn new(
        t_end: f64,
        cfl_advective: f64,
        cfl_diffusive: f64,
        output_stride: usize,
    ) -> Result<Self> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_end must be >= 0, got {t_end}"
            )));
        }
        if !(cfl_advective > 0.0 && cfl_advective <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_advective must lie in (0, 1], got {cfl_advective}"
            )));
        }
        if !(cfl_diffusive > 0.0 && cfl_diffusive <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "cfl_diffusive must lie in (0, 1/2], got {cfl_diffusive}"
            )));
        }
        if output_stride == 0 {
            return Err(Error::InvalidParameter("output_stride must be >= 1".into()));
        }
        Ok(StepperConfig {
            t_end,
            cfl_advective,
            cfl_diffusive,
            output_stride,
        })
    }

    pub fn checkpoint_interval(&self) -> f64 {
        self.t_end / self.output_stride as f64
    }

    /// Smallest checkpoint time strictly after t (clamped to t_end).
    pub fn next_checkpoint_after(&self, t: f64) -> f64 {
        if t >= self.t_end {
            return self.t_end;
        }
        let dt = self.checkpoint_interval();
        // Start one below the rounded quotient: the loop guard, not the
        // division, decides strict ordering, so a quotient off by one ulp in
        // either direction cannot skip a checkpoint.
        let mut k = ((t / dt).floor() as usize).saturating_sub(1);
        loop {
            let tk = (k as f64 * dt).min(self.t_end);
            if tk > t || tk >= self.t_end {
                return tk;
            }
            k += 1;
        }
    }
}

/// Godunov numerical flux for convex A: the min of A over [ul, ur] when
/// ul <= ur, the max over [ur, ul] otherwise (attained at an endpoint by
/// convexity).
pub fn godunov_flux(flux: &FluxModel, ul: f64, ur: f64) -> f64 {
    if let FluxModel::Burgers = flux {
        // Specialized path; bit-identical to the generic one below.
        return if ul <= ur {
            if ul >= 0.0 {
                0.5 * ul * ul
            } else if ur <= 0.0 {
                0.5 * ur * ur
            } else {
                0.0
            }
        } else {
            (0.5 * ul * ul).max(0.5 * ur * ur)
        };
    }
    if ul <= ur {
        flux.a(flux.argmin_on(ul, ur))
    } else {
        flux.a(ul).max(flux.a(ur))
    }
}

fn dt_from_bounds(
    flux: &FluxModel,
    umin: f64,
    umax: f64,
    dx: f64,
    epsilon: f64,
    cfg: &StepperConfig,
    gap: f64,
) -> f64 {
    let max_a1 = flux.max_abs_a1_on(umin, umax);
    let mut dt = f64::INFINITY;
    if max_a1 > 0.0 {
        dt = dt.min(cfg.cfl_advective * dx / max_a1);
    }
    if epsilon > 0.0 {
        dt = dt.min(cfg.cfl_diffusive * dx * dx / epsilon);
    }
    // Degenerate state (no advection, no viscosity): the checkpoint gap is
    // the step.
    dt.min(gap)
}

/// Stable explicit step size: min of the advective and diffusive CFL bounds
/// (the latter omitted when epsilon = 0), clamped to the remaining time
/// before the next checkpoint.
pub fn stable_dt(flux: &FluxModel, state: &SimState, cfg: &StepperConfig) -> f64 {
    let (mut umin, mut umax) = state.min_max();
    umin = umin.min(state.bc_left).min(state.bc_right);
    umax = umax.max(state.bc_left).max(state.bc_right);
    let gap = cfg.next_checkpoint_after(state.t) - state.t;
    dt_from_bounds(
        flux,
        umin,
        umax,
        state.grid.dx(),
        state.epsilon,
        cfg,
        gap.max(0.0),
    )
}

/// One conservative update into `out`; returns (min, max) of the new cells.
/// Ghost cells hold the far-field boundary values.
fn update_kernel(
    flux: &FluxModel,
    u: &[f64],
    out: &mut [f64],
    bc_l: f64,
    bc_r: f64,
    lam: f64,
    mu: f64,
) -> (f64, f64) {
    let n = u.len();
    debug_assert!(n >= 2 && out.len() == n);
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    let mut f_left = godunov_flux(flux, bc_l, u[0]);
    let mut prev = bc_l;
    for i in 0..n {
        let cur = u[i];
        let next = if i + 1 < n { u[i + 1] } else { bc_r };
        let f_right = godunov_flux(flux, cur, next);
        let v = cur - lam * (f_right - f_left) + mu * (next - 2.0 * cur + prev);
        out[i] = v;
        vmin = vmin.min(v);
        vmax = vmax.max(v);
        prev = cur;
        f_left = f_right;
    }
    (vmin, vmax)
}

fn instability_check(state: &SimState, vmin: f64, vmax: f64, t: f64) -> Result<()> {
    let (lo, hi) = state.bounds_box();
    let tol = 1e-10 * lo.abs().max(hi.abs()).max(1.0);
    if vmin < lo - tol || vmax > hi + tol {
        // Locate one offending cell for the message.
        for (i, &v) in state.u.iter().enumerate() {
            if v < lo - tol || v > hi + tol {
                return Err(Error::Instability {
                    cell: i,
                    value: v,
                    lo,
                    hi,
                    t,
                });
            }
        }
        return Err(Error::Instability {
            cell: 0,
            value: if vmin < lo - tol { vmin } else { vmax },
            lo,
            hi,
            t,
        });
    }
    Ok(())
}

/// One explicit step of size dt. The caller is responsible for dt being
/// stable; the instability guard aborts if the update leaves the
/// initial-data box.
pub fn step(state: &SimState, flux: &FluxModel, dt: f64) -> Result<SimState> {
    let dx = state.grid.dx();
    let lam = dt / dx;
    let mu = state.epsilon * dt / (dx * dx);
    let mut next = state.clone();
    let (vmin, vmax) = update_kernel(
        flux,
        &state.u,
        &mut next.u,
        state.bc_left,
        state.bc_right,
        lam,
        mu,
    );
    next.t = state.t + dt;
    instability_check(&next, vmin, vmax, next.t)?;
    Ok(next)
}

/// Run callbacks. `on_step` fires after every accepted step with the states
/// on both sides of it; `on_checkpoint` fires at t = 0 and at every
/// checkpoint time.
pub trait Observer {
    fn on_step(&mut self, _prev: &SimState, _next: &SimState) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }
}

/// March the state to cfg.t_end with stable steps, snapping exactly onto
/// every checkpoint. Deterministic: identical inputs produce bit-identical
/// states. If t >= t_end on entry the observers see exactly one checkpoint
/// and the state is returned unchanged.
pub fn evolve(
    state: SimState,
    flux: &FluxModel,
    cfg: &StepperConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SimState> {
    let mut cur = state;
    for ob in observers.iter_mut() {
        ob.on_checkpoint(&cur)?;
    }
    if cur.t >= cfg.t_end {
        return Ok(cur);
    }

    let dx = cur.grid.dx();
    let jump = cur.bc_left - cur.bc_right;
    let mut warned_contamination = false;
    let mut scratch = cur.clone();
    let (mut umin, mut umax) = cur.min_max();
    umin = umin.min(cur.bc_left).min(cur.bc_right);
    umax = umax.max(cur.bc_left).max(cur.bc_right);

    loop {
        let next_ck = cfg.next_checkpoint_after(cur.t);
        let gap = next_ck - cur.t;
        let dt = dt_from_bounds(flux, umin, umax, dx, cur.epsilon, cfg, gap);
        // cur.t + dt <= next_ck always (next_ck is representable and bounds
        // the exact sum), but the rounded sum can land exactly on next_ck
        // with dt still short of gap; that step must count as the checkpoint
        // or it would be silently skipped.
        let at_checkpoint = dt >= gap || cur.t + dt >= next_ck;
        let lam = dt / dx;
        let mu = cur.epsilon * dt / (dx * dx);
        let (vmin, vmax) = update_kernel(
            flux,
            &cur.u,
            &mut scratch.u,
            cur.bc_left,
            cur.bc_right,
            lam,
            mu,
        );
        scratch.t = if at_checkpoint { next_ck } else { cur.t + dt };
        instability_check(&scratch, vmin, vmax, scratch.t)?;
        umin = vmin.min(cur.bc_left).min(cur.bc_right);
        umax = vmax.max(cur.bc_left).max(cur.bc_right);
        for ob in observers.iter_mut() {
            ob.on_step(&cur, &scratch)?;
        }
        std::mem::swap(&mut cur, &mut scratch);
        if at_checkpoint {
            for ob in observers.iter_mut() {
                ob.on_checkpoint(&cur)?;
            }
            if jump > 0.0 && !warned_contamination {
                let dev = cur.boundary_deviation();
                if dev > 1e-6 * jump {
                    log::warn!(
                        "boundary contamination: far-field deviation {dev:e} at t = {}",
                        cur.t
                    );
                    warned_contamination = true;
                }
            }
            if cur.t >= cfg.t_end {
                return Ok(cur);
            }
        }
    }
}

/// Initial-data presets: the admissible shock plus a compactly supported
/// perturbation, or the steady viscous layer itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitPreset {
    /// U0 = S0, the sharp shock.
    Shock,
    /// U0 = S1(x/eps), the steady viscous layer.
    Layer,
    /// U0 = S0 + a exp(-(x - x0)^2 / w^2).
    GaussianBump { amplitude: f64, width: f64, center: f64 },
    /// U0 = S0 + a cos^2(pi xi / 2) sin(pi k xi), xi = (x - x0)/w on [-1, 1].
    SinePacket {
        amplitude: f64,
        width: f64,
        center: f64,
        cycles: u32,
    },
    /// U0 = S0 + windowed random Fourier sum with 1/k^2 spectral decay,
    /// rescaled so max |p| equals `amplitude`. RNG is ChaCha8 with the
    /// recorded seed, so runs reproduce bit-identically.
    SmoothRandom {
        amplitude: f64,
        width: f64,
        center: f64,
        modes: u32,
        seed: u64,
    },
}

impl InitPreset {
    /// Nominal support of the perturbation, if there is one. The Gaussian
    /// tail beyond five widths is below every threshold used in the crate.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            InitPreset::Shock | InitPreset::Layer => None,
            InitPreset::GaussianBump { width, center, .. } => {
                Some((center - 5.0 * width, center + 5.0 * width))
            }
            InitPreset::SinePacket { width, center, .. }
            | InitPreset::SmoothRandom { width, center, .. } => {
                Some((center - width, center + width))
            }
        }
    }

    /// Pointwise perturbation p(x). Zero for Shock and Layer.
    pub fn perturbation(&self) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match *self {
            InitPreset::Shock | InitPreset::Layer => Box::new(|_| 0.0),
            InitPreset::GaussianBump {
                amplitude,
                width,
                center,
            } => Box::new(move |x| {
                let xi = (x - center) / width;
                amplitude * (-xi * xi).exp()
            }),
            InitPreset::SinePacket {
                amplitude,
                width,
                center,
                cycles,
            } => Box::new(move |x| {
                let xi = (x - center) / width;
                if xi.abs() >= 1.0 {
                    return 0.0;
                }
                let window = (std::f64::consts::FRAC_PI_2 * xi).cos().powi(2);
                amplitude * window * (std::f64::consts::PI * cycles as f64 * xi).sin()
            }),
            InitPreset::SmoothRandom {
                amplitude,
                width,
                center,
                modes,
                seed,
            } => {
                let k = modes.max(1) as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coefs: Vec<f64> = (1..=k)
                    .map(|j| rng.gen_range(-1.0..1.0) / (j * j) as f64)
                    .collect();
                let phases: Vec<f64> = (0..k)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                    .collect();
                let raw = move |xi: f64| -> f64 {
                    if xi.abs() >= 1.0 {
                        return 0.0;
                    }
                    let window = (std::f64::consts::FRAC_PI_2 * xi).cos().powi(2);
                    let mut s = 0.0;
                    for j in 0..k {
                        s += coefs[j]
                            * (std::f64::consts::PI * (j + 1) as f64 * xi + phases[j]).sin();
                    }
                    window * s
                };
                let mut peak = 0.0f64;
                for i in 0..=4096 {
                    let xi = -1.0 + 2.0 * i as f64 / 4096.0;
                    peak = peak.max(raw(xi).abs());
                }
                let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
                Box::new(move |x| scale * raw((x - center) / width))
            }
        }
    }
}

/// Cell average of the sharp shock S0 (exact: cells straddling x = 0 are
/// split there).
fn shock_cell_average(shock: &ShockPair, xl: f64, xr: f64) -> f64 {
    if xr <= 0.0 {
        shock.c_left
    } else if xl >= 0.0 {
        shock.c_right
    } else {
        (shock.c_left * (0.0 - xl) + shock.c_right * (xr - 0.0)) / (xr - xl)
    }
}

/// Three-point Gauss cell average of a smooth function.
pub(crate) fn gauss3_average(f: &dyn Fn(f64) -> f64, xl: f64, xr: f64) -> f64 {
    let m = 0.5 * (xl + xr);
    let h = 0.5 * (xr - xl);
    let r = h * (0.6f64).sqrt();
    (5.0 * f(m - r) + 8.0 * f(m) + 5.0 * f(m + r)) / 18.0
}

/// Build U0 = preset data on the grid. Layer delegates to the steady
/// profile; everything else is S0 plus the preset perturbation, averaged
/// cell by cell (3-point Gauss for the smooth part, exact split for S0).
pub fn initial_state(
    flux: &FluxModel,
    grid: Grid,
    shock: &ShockPair,
    epsilon: f64,
    preset: &InitPreset,
) -> Result<SimState> {
    if let InitPreset::Layer = preset {
        let profile = crate::profile::solve_profile(flux, shock, 1e-8, None)?;
        return crate::profile::layer_initial_data(&profile, epsilon, grid);
    }
    let p = preset.perturbation();
    let mut u = Vec::with_capacity(grid.n_cells);
    for i in 0..grid.n_cells {
        let (xl, xr) = grid.cell_edges(i);
        u.push(shock_cell_average(shock, xl, xr) + gauss3_average(&*p, xl, xr));
    }
    SimState::new(grid, u, 0.0, epsilon, shock.c_left, shock.c_right)
}
