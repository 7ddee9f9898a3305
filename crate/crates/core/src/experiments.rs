//! Experiment drivers: a single configured run with shift tracking and
//! per-checkpoint diagnostics, the epsilon sweep with its log-log rate fit,
//! and the serialized reports (time-series CSV, snapshot CSV, summary JSON).

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diagnostics::{
    self, away_rel_ent, default_delta, default_theta, dhdt_centered, record, DiagRecord, WeightFn,
};
use crate::error::{Error, Result};
use crate::model::{lambda_estimate, shock_speed, EntropyModel, FluxModel, LambdaBox, ShockPair};
use crate::shift::ShiftTrack;
use crate::solver::{evolve, initial_state, Grid, InitPreset, Observer, SimState, StepperConfig};

/// Resolution gate factor: dx max|A'| must not exceed epsilon / GATE_RHO.
pub const GATE_RHO: f64 = 20.0;
/// Default sweep grid scaling: dx = epsilon / SWEEP_RESOLUTION.
pub const SWEEP_RESOLUTION: f64 = 40.0;
/// Floor applied to the measured excess before log fitting.
pub const EXCESS_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSpec {
    pub c_left: f64,
    pub c_right: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_cells: usize,
}

fn default_cfl_advective() -> f64 {
    0.5
}
fn default_cfl_diffusive() -> f64 {
    0.25
}
fn default_output_stride() -> usize {
    200
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub epsilon: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl_advective")]
    pub cfl_advective: f64,
    #[serde(default = "default_cfl_diffusive")]
    pub cfl_diffusive: f64,
    #[serde(default = "default_output_stride")]
    pub output_stride: usize,
}

fn default_label() -> String {
    "case".to_string()
}

/// One run, fully specified. JSON keys follow the module layout:
/// flux/entropy/bound_m select the models and certificate box, shock.* the
/// end states, domain.* the grid, sim.* the stepper, init.preset the data,
/// theta/delta the weight (null = computed defaults).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "default_label")]
    pub label: String,
    pub flux: String,
    pub entropy: String,
    #[serde(default)]
    pub bound_m: Option<f64>,
    pub shock: ShockSpec,
    pub domain: DomainSpec,
    pub sim: SimSpec,
    pub init: InitPreset,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

impl CaseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// A modest Burgers bump case; starting point for hand-edited configs.
    pub fn example() -> Self {
        CaseConfig {
            label: "bump".into(),
            flux: "burgers".into(),
            entropy: "quadratic".into(),
            bound_m: None,
            shock: ShockSpec {
                c_left: 1.0,
                c_right: -1.0,
            },
            domain: DomainSpec {
                x_lo: -2.0,
                x_hi: 2.0,
                n_cells: 2400,
            },
            sim: SimSpec {
                epsilon: 0.05,
                t_end: 0.5,
                cfl_advective: default_cfl_advective(),
                cfl_diffusive: default_cfl_diffusive(),
                output_stride: default_output_stride(),
            },
            init: InitPreset::GaussianBump {
                amplitude: 0.2,
                width: 0.12,
                center: -0.75,
            },
            theta: None,
            delta: None,
        }
    }

    /// Filesystem-safe version of the label.
    pub fn safe_label(&self) -> String {
        self.label
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    }
}

/// Per-run monitor of the relative entropy away from the layer:
/// away_max = max over checkpoints of the relative entropy on
/// |x - X| >= alpha, reported against the fitted reference
/// l2sq(0) + eps log(1/eps) + e^(-alpha/eps).
#[derive(Clone, Copy, Debug)]
pub struct AlphaMonitor {
    pub alpha: f64,
    pub away_max: f64,
    pub reference: f64,
}

pub struct RunResult {
    pub label: String,
    pub sigma: f64,
    pub lambda: LambdaBox,
    pub weight: WeightFn,
    pub theta_source: &'static str,
    pub records: Vec<DiagRecord>,
    pub track: ShiftTrack,
    pub final_state: SimState,
    pub alpha_monitors: Vec<AlphaMonitor>,
    /// Deterministic metadata line echoed into the CSV header.
    pub meta: String,
}

impl RunResult {
    pub fn l2sq0(&self) -> f64 {
        self.records[0].l2sq
    }

    pub fn h0(&self) -> f64 {
        self.records[0].h
    }

    /// sup over checkpoints of l2sq(t) - l2sq(0), floored for log fits.
    pub fn excess(&self) -> f64 {
        let l0 = self.l2sq0();
        self.records
            .iter()
            .map(|r| r.l2sq - l0)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(EXCESS_FLOOR)
    }

    /// Largest drift ratio over checkpoints with t >= t_min.
    pub fn drift_ratio_max(&self, t_min: f64) -> f64 {
        self.records
            .iter()
            .filter(|r| r.t >= t_min)
            .filter_map(|r| r.drift_ratio)
            .fold(0.0, f64::max)
    }

    /// Largest shift speed over every integrator step.
    pub fn xdot_max(&self) -> f64 {
        self.track
            .samples
            .iter()
            .map(|s| s.xdot.abs())
            .fold(0.0, f64::max)
    }

    /// Largest centered-difference dH/dt over interior checkpoints.
    pub fn dhdt_max(&self) -> f64 {
        dhdt_centered(&self.records)
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct RunObserver<'a> {
    track: ShiftTrack,
    records: Vec<DiagRecord>,
    weight: WeightFn,
    entropy: &'a EntropyModel,
    flux: &'a FluxModel,
    shock: ShockPair,
    sigma: f64,
    alphas: [f64; 2],
    away_max: [f64; 2],
}

impl Observer for RunObserver<'_> {
    fn on_step(&mut self, prev: &SimState, next: &SimState) -> Result<()> {
        self.track.advance(prev, next, self.entropy, self.flux)
    }

    fn on_checkpoint(&mut self, state: &SimState) -> Result<()> {
        let jump = self.shock.jump();
        let dev = state.boundary_deviation();
        if dev > 1e-6 * jump {
            return Err(Error::BoundaryContamination {
                deviation: dev,
                threshold: 1e-6 * jump,
                t: state.t,
            });
        }
        let sample = self.track.current();
        self.records.push(record(
            state,
            sample,
            self.sigma,
            &self.weight,
            self.entropy,
            self.flux,
            &self.shock,
        )?);
        for (k, &alpha) in self.alphas.iter().enumerate() {
            self.away_max[k] = self.away_max[k].max(away_rel_ent(
                state,
                sample.x,
                alpha,
                self.entropy,
                &self.shock,
            ));
        }
        Ok(())
    }
}

/// Run one configured case: build the data, certify Lambda, evolve with the
/// shift and diagnostics observers, and return the full record.
/// Deterministic: a fixed config yields bit-identical output.
pub fn run_case(cfg: &CaseConfig) -> Result<RunResult> {
    let flux = FluxModel::from_key(&cfg.flux)?;
    let entropy = EntropyModel::from_key(&cfg.entropy)?;
    if cfg.shock.c_left <= cfg.shock.c_right {
        return Err(Error::InvalidParameter(format!(
            "need c_left > c_right, got ({}, {})",
            cfg.shock.c_left, cfg.shock.c_right
        )));
    }
    let shock = ShockPair::new(cfg.shock.c_left, cfg.shock.c_right);
    let sigma = shock_speed(&flux, shock.c_left, shock.c_right)?;
    let eps = cfg.sim.epsilon;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sim.epsilon must be positive, got {eps}"
        )));
    }
    let grid = Grid::new(cfg.domain.x_lo, cfg.domain.x_hi, cfg.domain.n_cells)?;
    if !(grid.x_lo < 0.0 && grid.x_hi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "domain must contain the initial shock at x = 0, got [{}, {}]",
            grid.x_lo, grid.x_hi
        )));
    }
    if let Some((s_lo, s_hi)) = cfg.init.support() {
        let margin = 0.1 * (grid.x_hi - grid.x_lo);
        if s_lo < grid.x_lo + margin || s_hi > grid.x_hi - margin {
            return Err(Error::SupportOutsideMargins {
                support_lo: s_lo,
                support_hi: s_hi,
                x_lo: grid.x_lo,
                x_hi: grid.x_hi,
            });
        }
    }
    let stepper = StepperConfig::new(
        cfg.sim.t_end,
        cfg.sim.cfl_advective,
        cfg.sim.cfl_diffusive,
        cfg.sim.output_stride,
    )?;

    let state = initial_state(&flux, grid, &shock, eps, &cfg.init)?;
    let (box_lo, box_hi) = state.bounds_box();
    let bound_m = cfg.bound_m.unwrap_or_else(|| box_lo.abs().max(box_hi.abs()));
    let lambda = lambda_estimate(&entropy, &flux, bound_m, 256)?;

    // Resolution gate: the scheme viscosity dx max|A'| must sit well under
    // the physical one.
    let gate_lhs = grid.dx() * flux.max_abs_a1_on(box_lo, box_hi);
    let gate_rhs = eps / GATE_RHO;
    if gate_lhs > gate_rhs * (1.0 + 1e-12) {
        return Err(Error::ResolutionGate {
            lhs: gate_lhs,
            rhs: gate_rhs,
            rho: GATE_RHO,
        });
    }

    let delta = cfg.delta.unwrap_or_else(|| default_delta(eps));
    let (theta, theta_source) = match cfg.theta {
        Some(t) => (t, "config"),
        None => {
            let raw = (shock.jump() / (4.0 * lambda.lambda * lambda.lambda)).min(1.0);
            let floored = default_theta(&shock, &lambda, delta);
            (floored, if floored > raw { "floor" } else { "default" })
        }
    };
    let weight = WeightFn::new(theta, delta)?;
    if eps * delta > theta * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "weight scales need epsilon*delta <= theta, got {} > {theta}",
            eps * delta
        )));
    }

    let alpha = eps * (1.0 / eps).ln();
    let track = ShiftTrack::begin(&state, &entropy, &flux, shock.midpoint(), &lambda)?;
    let seed_note = match cfg.init {
        InitPreset::SmoothRandom { seed, .. } => format!(" seed={seed}"),
        _ => String::new(),
    };
    let meta = format!(
        "label={} flux={} entropy={} c_left={} c_right={} epsilon={} x_lo={} x_hi={} n_cells={} \
         t_end={} output_stride={} theta={} delta={} theta_source={} lambda={} bound_m={} sigma={}{}",
        cfg.label,
        flux.key(),
        entropy.key(),
        shock.c_left,
        shock.c_right,
        eps,
        grid.x_lo,
        grid.x_hi,
        grid.n_cells,
        cfg.sim.t_end,
        cfg.sim.output_stride,
        theta,
        delta,
        theta_source,
        lambda.lambda,
        bound_m,
        sigma,
        seed_note
    );

    let mut obs = RunObserver {
        track,
        records: Vec::with_capacity(cfg.sim.output_stride + 2),
        weight,
        entropy: &entropy,
        flux: &flux,
        shock,
        sigma,
        alphas: [alpha, 2.0 * alpha],
        away_max: [0.0, 0.0],
    };
    let final_state = evolve(state, &flux, &stepper, &mut [&mut obs])?;

    let l2sq0 = obs.records[0].l2sq;
    let alpha_monitors = obs
        .alphas
        .iter()
        .zip(obs.away_max.iter())
        .map(|(&a, &m)| AlphaMonitor {
            alpha: a,
            away_max: m,
            reference: l2sq0 + alpha + (-a / eps).exp(),
        })
        .collect();

    Ok(RunResult {
        label: cfg.label.clone(),
        sigma,
        lambda,
        weight,
        theta_source,
        records: obs.records,
        track: obs.track,
        final_state,
        alpha_monitors,
        meta,
    })
}

/// Time-series CSV with the run metadata in the header comment.
pub fn write_series_csv<W: Write>(out: &mut W, result: &RunResult) -> Result<()> {
    diagnostics::write_timeseries_csv(out, Some(&result.meta), &result.records)
}

/// Final-state snapshot as (x, u) rows.
pub fn write_snapshot_csv<W: Write>(out: &mut W, state: &SimState) -> Result<()> {
    writeln!(out, "x,u")?;
    for i in 0..state.u.len() {
        writeln!(out, "{:e},{:e}", state.grid.center(i), state.u[i])?;
    }
    Ok(())
}

/// Per-run summary with the certificate, weight, excess, and the
/// theorem-shaped monitors (fitted constants; nothing here is asserted).
pub fn summary_json(result: &RunResult) -> serde_json::Value {
    let theta = result.weight.theta;
    let delta = result.weight.delta;
    let dhdt_max = result.dhdt_max();
    let prop_scale = (-theta * delta).exp();
    json!({
        "label": result.label,
        "sigma": result.sigma,
        "lambda": result.lambda.lambda,
        "bound_m": result.lambda.bound_m,
        "theta": theta,
        "delta": delta,
        "theta_source": result.theta_source,
        "checkpoints": result.records.len(),
        "l2sq0": result.l2sq0(),
        "l2sq_final": result.records.last().map(|r| r.l2sq),
        "h0": result.h0(),
        "h_final": result.records.last().map(|r| r.h),
        "excess": result.excess(),
        "xdot_max": result.xdot_max(),
        "xdot_bound": result.track.lip_bound,
        "drift_ratio_max": result.drift_ratio_max(0.1),
        "dhdt_max": dhdt_max,
        "dhdt_envelope_c": if dhdt_max > 0.0 { dhdt_max / prop_scale } else { 0.0 },
        "alpha_family": result.alpha_monitors.iter().map(|m| json!({
            "alpha": m.alpha,
            "away_max": m.away_max,
            "reference": m.reference,
            "ratio": m.away_max / m.reference,
        })).collect::<Vec<_>>(),
    })
}

/// Write series + snapshot + summary under `dir`, returning the file stem.
pub fn write_run_outputs(result: &RunResult, cfg: &CaseConfig, dir: &Path) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    let stem = cfg.safe_label();
    let mut f = std::fs::File::create(dir.join(format!("{stem}_series.csv")))?;
    write_series_csv(&mut f, result)?;
    let mut f = std::fs::File::create(dir.join(format!("{stem}_final.csv")))?;
    write_snapshot_csv(&mut f, &result.final_state)?;
    let summary = summary_json(result);
    std::fs::write(
        dir.join(format!("{stem}_summary.json")),
        format!("{:#}\n", summary),
    )?;
    Ok(stem)
}

/// Ordinary least squares on (ln x, ln y). `residual` is the RMS of the
/// log-space residuals.
#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        if !(x > 0.0) {
            return Err(Error::NonpositiveValue {
                what: "abscissa",
                value: x,
                index: i,
            });
        }
        if !(y > 0.0) {
            return Err(Error::NonpositiveValue {
                what: "value",
                value: y,
                index: i,
            });
        }
    }
    let n = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in points {
        sx += x.ln();
        sy += y.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "rate fit needs at least two distinct abscissas".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for &(x, y) in points {
        let r = y.ln() - (intercept + slope * x.ln());
        ss += r * r;
    }
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub n_cells: usize,
    /// Abscissa of the rate fit: epsilon * ln(1/epsilon).
    pub scale: f64,
    pub l2sq0: f64,
    pub excess: f64,
    /// excess / scale, the per-epsilon instance of the theorem constant.
    pub c_star: f64,
    pub drift_ratio_max: f64,
    pub xdot_max: f64,
    /// Certified speed limit 2 Lambda^2 for this case.
    pub xdot_bound: f64,
    pub runtime_s: f64,
}

/// Refinement control: the flagged epsilon rerun at half dx.
#[derive(Clone, Copy, Debug)]
pub struct RefinementCheck {
    pub epsilon: f64,
    pub excess_coarse: f64,
    pub excess_fine: f64,
    pub ratio: f64,
    pub slope_refit: f64,
    pub slope_shift: f64,
    pub under_resolved: bool,
    pub xdot_max: f64,
    pub xdot_bound: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub failures: Vec<(f64, String)>,
    pub fit: RateFit,
    /// max over epsilons of excess / (eps ln(1/eps)).
    pub c_star: f64,
    pub resolution: f64,
    pub refinement: Option<RefinementCheck>,
}

fn case_for_eps(base: &CaseConfig, eps: f64, resolution: f64) -> CaseConfig {
    let mut cfg = base.clone();
    cfg.sim.epsilon = eps;
    let span = base.domain.x_hi - base.domain.x_lo;
    let mut n = (span * resolution / eps).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    cfg.domain.n_cells = n;
    let tag = format!("{eps}").replace('.', "p").replace('-', "m");
    cfg.label = format!("{}_e{tag}", base.label);
    cfg
}

fn sweep_job(
    base: &CaseConfig,
    eps: f64,
    resolution: f64,
    out_dir: Option<&Path>,
) -> Result<SweepPoint> {
    let cfg = case_for_eps(base, eps, resolution);
    let start = Instant::now();
    let result = run_case(&cfg)?;
    let runtime_s = start.elapsed().as_secs_f64();
    if let Some(dir) = out_dir {
        write_run_outputs(&result, &cfg, dir)?;
    }
    let scale = eps * (1.0 / eps).ln();
    let excess = result.excess();
    Ok(SweepPoint {
        epsilon: eps,
        n_cells: cfg.domain.n_cells,
        scale,
        l2sq0: result.l2sq0(),
        excess,
        c_star: excess / scale,
        drift_ratio_max: result.drift_ratio_max(0.1),
        xdot_max: result.xdot_max(),
        xdot_bound: result.track.lip_bound,
        runtime_s,
    })
}

/// Run the epsilon sweep: per-epsilon grids scaled as dx = eps/resolution,
/// excess and drift collected per point, slope fitted over the successes.
/// `refine_eps` (must be one of the swept values) reruns that epsilon at
/// half dx and reports how the excess and the fitted slope move.
pub fn sweep(
    base: &CaseConfig,
    eps_list: &[f64],
    resolution: f64,
    refine_eps: Option<f64>,
    out_dir: Option<&Path>,
) -> Result<SweepReport> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "sweep needs at least 3 epsilons, got {}",
            eps_list.len()
        )));
    }
    if !eps_list.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "sweep epsilons must be strictly decreasing".into(),
        ));
    }
    if !(resolution >= GATE_RHO) {
        return Err(Error::InvalidParameter(format!(
            "sweep resolution must be >= {GATE_RHO}, got {resolution}"
        )));
    }
    if let Some(re) = refine_eps {
        if !eps_list.contains(&re) {
            return Err(Error::InvalidParameter(format!(
                "refine epsilon {re} is not in the sweep list"
            )));
        }
    }

    let outcomes: Vec<(f64, Result<SweepPoint>)> = eps_list
        .par_iter()
        .map(|&eps| (eps, sweep_job(base, eps, resolution, out_dir)))
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (eps, outcome) in outcomes {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => failures.push((eps, e.to_string())),
        }
    }
    if points.len() < 3 {
        return Err(Error::SweepFailed(format!(
            "only {} of {} cases succeeded: {:?}",
            points.len(),
            eps_list.len(),
            failures
        )));
    }
    let fit = fit_rate(
        &points
            .iter()
            .map(|p| (p.scale, p.excess))
            .collect::<Vec<_>>(),
    )?;
    let c_star = points.iter().map(|p| p.c_star).fold(0.0, f64::max);

    let refinement = match refine_eps {
        None => None,
        Some(re) => {
            let fine = sweep_job(base, re, 2.0 * resolution, out_dir)?;
            let coarse = points
                .iter()
                .find(|p| p.epsilon == re)
                .ok_or_else(|| Error::SweepFailed(format!("refine epsilon {re} failed")))?;
            let refit_points: Vec<(f64, f64)> = points
                .iter()
                .map(|p| {
                    if p.epsilon == re {
                        (p.scale, fine.excess)
                    } else {
                        (p.scale, p.excess)
                    }
                })
                .collect();
            let refit = fit_rate(&refit_points)?;
            let ratio = fine.excess / coarse.excess;
            Some(RefinementCheck {
                epsilon: re,
                excess_coarse: coarse.excess,
                excess_fine: fine.excess,
                ratio,
                slope_refit: refit.slope,
                slope_shift: (refit.slope - fit.slope).abs(),
                under_resolved: (ratio - 1.0).abs() > 0.1,
                xdot_max: fine.xdot_max,
                xdot_bound: fine.xdot_bound,
            })
        }
    };

    Ok(SweepReport {
        points,
        failures,
        fit,
        c_star,
        resolution,
        refinement,
    })
}

pub fn sweep_summary_json(report: &SweepReport) -> serde_json::Value {
    json!({
        "slope": report.fit.slope,
        "intercept": report.fit.intercept,
        "residual": report.fit.residual,
        "c_star": report.c_star,
        "resolution": report.resolution,
        "points": report.points.iter().map(|p| json!({
            "eps": p.epsilon,
            "n_cells": p.n_cells,
            "scale": p.scale,
            "l2sq0": p.l2sq0,
            "excess": p.excess,
            "c_star": p.c_star,
            "drift_ratio_max": p.drift_ratio_max,
            "xdot_max": p.xdot_max,
            "xdot_bound": p.xdot_bound,
            "runtime_s": p.runtime_s,
        })).collect::<Vec<_>>(),
        "failures": report.failures.iter().map(|(eps, msg)| json!({
            "eps": eps, "error": msg,
        })).collect::<Vec<_>>(),
        "refinement": report.refinement.map(|r| json!({
            "eps": r.epsilon,
            "excess_coarse": r.excess_coarse,
            "excess_fine": r.excess_fine,
            "ratio": r.ratio,
            "slope_refit": r.slope_refit,
            "slope_shift": r.slope_shift,
            "under_resolved": r.under_resolved,
        })),
    })
}

pub fn write_sweep_csv<W: Write>(out: &mut W, report: &SweepReport) -> Result<()> {
    writeln!(
        out,
        "# slope={} residual={} c_star={} resolution={}",
        report.fit.slope, report.fit.residual, report.c_star, report.resolution
    )?;
    writeln!(
        out,
        "eps,n_cells,scale,l2sq0,excess,c_star,drift_ratio_max,xdot_max,xdot_bound"
    )?;
    for p in &report.points {
        writeln!(
            out,
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.epsilon,
            p.n_cells,
            p.scale,
            p.l2sq0,
            p.excess,
            p.c_star,
            p.drift_ratio_max,
            p.xdot_max,
            p.xdot_bound
        )?;
    }
    Ok(())
}
