//! Steady viscous layer connecting the two shock states: the solution of
//! S' = h(S) := A(S) - A(c_left) - sigma (S - c_left) with S(-inf) = c_left,
//! S(+inf) = c_right and S(0) = (c_left + c_right)/2.
//!
//! The construction inverts the separable ODE. With
//! w = ln((c_left - S)/(S - c_right)) the profile becomes
//! S(w) = c_right + (c_left - c_right)/(1 + e^w), and for Burgers w = x
//! exactly. We lay down a uniform w grid fine enough for the requested
//! residual, recover the x position of every knot by integrating dx = dS/h(S)
//! with Gauss-Legendre panels, and evaluate with monotone cubic Hermite
//! pieces whose end slopes are the exact ODE values h(S_j). Outside the knot
//! range the layer is continued by its exact exponential tail rates
//! |A'(c) - sigma|.

use crate::error::{Error, Result};
use crate::model::{shock_speed, FluxModel, ShockPair};
use crate::solver::{gauss3_average, Grid, SimState};

// 8-point Gauss-Legendre rule on [-1, 1].
const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Sampled steady layer: strictly decreasing knot values with the exact ODE
/// slope at each knot, plus the linearized decay rates of the two tails.
#[derive(Clone, Debug)]
pub struct LayerProfile {
    pub shock: ShockPair,
    pub sigma: f64,
    pub tail_rate_left: f64,
    pub tail_rate_right: f64,
    knots_x: Vec<f64>,
    knots_s: Vec<f64>,
    slopes: Vec<f64>,
}

impl LayerProfile {
    pub fn knot_count(&self) -> usize {
        self.knots_x.len()
    }

    pub fn knot(&self, j: usize) -> (f64, f64) {
        (self.knots_x[j], self.knots_s[j])
    }

    pub fn knot_slope(&self, j: usize) -> f64 {
        self.slopes[j]
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.knots_x[0], *self.knots_x.last().unwrap())
    }

    /// Profile value at x: Hermite interpolation between knots, exponential
    /// tails beyond them.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots_x.len();
        if x < self.knots_x[0] {
            let dev = self.shock.c_left - self.knots_s[0];
            return self.shock.c_left - dev * (self.tail_rate_left * (x - self.knots_x[0])).exp();
        }
        if x >= self.knots_x[n - 1] {
            let dev = self.knots_s[n - 1] - self.shock.c_right;
            return self.shock.c_right
                + dev * (-self.tail_rate_right * (x - self.knots_x[n - 1])).exp();
        }
        let j = self.knots_x.partition_point(|&v| v <= x) - 1;
        let dx = self.knots_x[j + 1] - self.knots_x[j];
        let t = (x - self.knots_x[j]) / dx;
        let t2 = t * t;
        let omt = 1.0 - t;
        let h00 = (1.0 + 2.0 * t) * omt * omt;
        let h10 = t * omt * omt;
        let h01 = t2 * (3.0 - 2.0 * t);
        let h11 = t2 * (t - 1.0);
        h00 * self.knots_s[j]
            + h01 * self.knots_s[j + 1]
            + dx * (h10 * self.slopes[j] + h11 * self.slopes[j + 1])
    }
}

/// Solve for the steady layer. `tol` bounds both the knot residual
/// |S' - h(S)| and the relative cutoff of the resolved range (the knots
/// cover c_right + tol*jump <= S <= c_left - tol*jump; the exact tails carry
/// the rest). `half_width` truncates the knot range to [-hw, hw]; the
/// default keeps everything the cutoff produces.
pub fn solve_profile(
    flux: &FluxModel,
    shock: &ShockPair,
    tol: f64,
    half_width: Option<f64>,
) -> Result<LayerProfile> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::InvalidParameter(format!(
            "profile tol must lie in (0, 1e-2], got {tol}"
        )));
    }
    if shock.c_left <= shock.c_right {
        return Err(Error::InvalidParameter(format!(
            "need c_left > c_right for a decreasing layer, got ({}, {})",
            shock.c_left, shock.c_right
        )));
    }
    let hw_limit = match half_width {
        Some(hw) if !(hw > 0.0) => {
            return Err(Error::InvalidParameter(format!(
                "half_width must be positive, got {hw}"
            )));
        }
        Some(hw) => hw,
        None => f64::INFINITY,
    };
    let (c_l, c_r) = (shock.c_left, shock.c_right);
    let jump = c_l - c_r;
    let sigma = shock_speed(flux, c_l, c_r)?;
    let h = |u: f64| flux.a(u) - flux.a(c_l) - sigma * (u - c_l);
    let h1 = |u: f64| flux.a1(u) - sigma;

    // Existence: h < 0 strictly between the states (chord condition), with
    // genuinely attracting end states.
    for k in 1..=1024 {
        let u = c_r + jump * k as f64 / 1025.0;
        let hu = h(u);
        if hu >= 0.0 {
            return Err(Error::NonAdmissibleShock { u, h: hu });
        }
    }
    let rate_l = flux.a1(c_l) - sigma;
    let rate_r = sigma - flux.a1(c_r);
    if rate_l <= 0.0 {
        return Err(Error::NonAdmissibleShock { u: c_l, h: 0.0 });
    }
    if rate_r <= 0.0 {
        return Err(Error::NonAdmissibleShock { u: c_r, h: 0.0 });
    }

    // S as a function of w = ln((c_l - S)/(S - c_r)).
    let s_of_w = |w: f64| c_r + jump / (1.0 + w.exp());
    let w_max = ((1.0 - tol) / tol).ln();

    // Pick the w spacing from a coarse scan: the Hermite/centered-difference
    // residual is ~ |S'''| dx^2 / 6, and dx = dw / |dw/dx| with
    // |dw/dx| = jump |h| / ((c_l - S)(S - c_r)).
    let mut max_s3 = 0.0f64;
    let mut min_dwdx = f64::INFINITY;
    for k in 0..=1000 {
        let w = -w_max + 2.0 * w_max * k as f64 / 1000.0;
        let s = s_of_w(w);
        let hs = h(s);
        let s3 = flux.a2(s) * hs * hs + h1(s) * h1(s) * hs;
        max_s3 = max_s3.max(s3.abs());
        min_dwdx = min_dwdx.min(jump * hs.abs() / ((c_l - s) * (s - c_r)));
    }
    let dx_target = (0.5 * 6.0 * tol / max_s3.max(1e-12)).sqrt();
    let dw = (dx_target * min_dwdx).clamp(1e-5, 0.05);
    let mut n_iv = (2.0 * w_max / dw).ceil() as usize;
    if n_iv % 2 == 1 {
        n_iv += 1;
    }
    let dw = 2.0 * w_max / n_iv as f64;

    let n = n_iv + 1;
    let mid = n_iv / 2;
    let mut knots_s = Vec::with_capacity(n);
    for j in 0..n {
        knots_s.push(s_of_w(-w_max + dw * j as f64));
    }
    knots_s[mid] = shock.midpoint();

    // x increments by Gauss-Legendre on dx = dS / h(S), accumulated outward
    // from the normalization point S(0) = midpoint.
    let panel = |s_hi: f64, s_lo: f64| -> f64 {
        let m = 0.5 * (s_hi + s_lo);
        let r = 0.5 * (s_hi - s_lo);
        let mut acc = 0.0;
        for q in 0..8 {
            acc += GL8_W[q] / -h(m + r * GL8_X[q]);
        }
        acc * r
    };
    let mut knots_x = vec![0.0; n];
    for j in (mid + 1)..n {
        knots_x[j] = knots_x[j - 1] + panel(knots_s[j - 1], knots_s[j]);
    }
    for j in (0..mid).rev() {
        knots_x[j] = knots_x[j + 1] - panel(knots_s[j], knots_s[j + 1]);
    }

    let mut slopes: Vec<f64> = knots_s.iter().map(|&s| h(s)).collect();
    // Fritsch-Carlson safeguard: |slope| <= 3 |secant| on both sides keeps
    // each Hermite piece monotone. Exact slopes on this grid satisfy it with
    // huge margin; this only guards degenerate user tolerances.
    for j in 0..n {
        let mut cap = f64::INFINITY;
        if j > 0 {
            cap = cap.min(3.0 * (knots_s[j] - knots_s[j - 1]) / (knots_x[j] - knots_x[j - 1]));
        }
        if j + 1 < n {
            cap = cap.min(3.0 * (knots_s[j + 1] - knots_s[j]) / (knots_x[j + 1] - knots_x[j]));
        }
        // Slopes and secants are negative; cap is the admissible magnitude.
        if slopes[j] < cap {
            slopes[j] = cap;
        }
    }

    // Optional truncation to [-hw, hw]. The normalization knot stays.
    let lo = knots_x.partition_point(|&x| x < -hw_limit);
    let hi = knots_x.partition_point(|&x| x <= hw_limit);
    if hi - lo < 2 {
        return Err(Error::InvalidParameter(format!(
            "half_width {hw_limit} keeps fewer than two knots"
        )));
    }
    knots_x.drain(hi..);
    knots_x.drain(..lo);
    knots_s.drain(hi..);
    knots_s.drain(..lo);
    slopes.drain(hi..);
    slopes.drain(..lo);

    Ok(LayerProfile {
        shock: *shock,
        sigma,
        tail_rate_left: rate_l,
        tail_rate_right: rate_r,
        knots_x,
        knots_s,
        slopes,
    })
}

/// Cell averages of S1(x/epsilon) on the grid. Errors when the grid cannot
/// resolve the layer (dx > epsilon).
pub fn layer_initial_data(profile: &LayerProfile, epsilon: f64, grid: Grid) -> Result<SimState> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "layer data needs epsilon > 0, got {epsilon}"
        )));
    }
    let dx = grid.dx();
    if dx > epsilon {
        return Err(Error::UnderResolvedLayer { dx, epsilon });
    }
    let f = |x: f64| profile.eval(x / epsilon);
    let mut u = Vec::with_capacity(grid.n_cells);
    for i in 0..grid.n_cells {
        let (xl, xr) = grid.cell_edges(i);
        u.push(gauss3_average(&f, xl, xr));
    }
    SimState::new(
        grid,
        u,
        0.0,
        epsilon,
        profile.shock.c_left,
        profile.shock.c_right,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn burgers_layer() -> LayerProfile {
        solve_profile(&FluxModel::Burgers, &ShockPair::new(1.0, -1.0), 1e-8, None).unwrap()
    }

    #[test]
    fn burgers_profile_is_negative_tanh_half() {
        // S1(x) = -tanh(x/2) for A = u^2/2 with states (1, -1).
        let p = burgers_layer();
        assert!(p.eval(0.0).abs() <= 1e-12);
        for &x in &[0.25f64, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let exact = -(x / 2.0).tanh();
            assert!(
                (p.eval(x) - exact).abs() <= 1e-8,
                "x = {x}: {} vs {exact}",
                p.eval(x)
            );
            assert!(
                (p.eval(-x) + exact).abs() <= 1e-8,
                "x = {}: {} vs {}",
                -x,
                p.eval(-x),
                -exact
            );
        }
        assert_relative_eq!(p.sigma, 0.0);
        assert_relative_eq!(p.tail_rate_left, 1.0);
        assert_relative_eq!(p.tail_rate_right, 1.0);
    }

    #[test]
    fn eval_reproduces_knots_and_is_monotone() {
        let p = burgers_layer();
        let n = p.knot_count();
        for j in [0, 1, n / 3, n / 2, n - 2, n - 1] {
            let (x, s) = p.knot(j);
            assert_eq!(p.eval(x), s);
        }
        let mut prev = f64::INFINITY;
        for k in 0..=10_000 {
            let x = -30.0 + 60.0 * k as f64 / 10_000.0;
            let v = p.eval(x);
            assert!(v <= prev + 1e-13, "not monotone at x = {x}");
            assert!((-1.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn knot_residual_meets_tolerance() {
        // |centered difference - h(S_j)| <= tol across all interior knots,
        // for Burgers and for the exponential flux.
        for (flux, shock) in [
            (FluxModel::Burgers, ShockPair::new(1.0, -1.0)),
            (FluxModel::Exponential, ShockPair::new(1.0, 0.0)),
        ] {
            let p = solve_profile(&flux, &shock, 1e-8, None).unwrap();
            let sigma = p.sigma;
            let h = |u: f64| flux.a(u) - flux.a(shock.c_left) - sigma * (u - shock.c_left);
            let mut worst = 0.0f64;
            for j in 1..p.knot_count() - 1 {
                let (xm, sm) = p.knot(j - 1);
                let (_, s0) = p.knot(j);
                let (xp, sp) = p.knot(j + 1);
                worst = worst.max(((sp - sm) / (xp - xm) - h(s0)).abs());
            }
            assert!(worst <= 1e-8, "{}: residual {worst:e}", flux.key());
        }
    }

    #[test]
    fn tails_decay_at_linearized_rates() {
        // Coarse cutoff keeps the boundary deviation large enough that
        // subtracting it from c_left loses no precision.
        let p = solve_profile(&FluxModel::Burgers, &ShockPair::new(1.0, -1.0), 1e-3, None).unwrap();
        let (x_lo, x_hi) = p.x_range();
        // One unit into the tail the deviation shrinks by almost exactly e.
        let d0 = p.shock.c_left - p.eval(x_lo);
        let d1 = p.shock.c_left - p.eval(x_lo - 1.0);
        assert_relative_eq!(d1 / d0, (-1.0f64).exp(), max_relative = 1e-12);
        let e0 = p.eval(x_hi) - p.shock.c_right;
        let e1 = p.eval(x_hi + 1.0) - p.shock.c_right;
        assert_relative_eq!(e1 / e0, (-1.0f64).exp(), max_relative = 1e-12);
        // And the absolute tail error of the sharp profile stays tiny.
        let p = burgers_layer();
        assert!((p.eval(25.0) + (12.5f64).tanh()).abs() <= 1e-9);
    }

    #[test]
    fn truncated_profile_still_covers_the_domain() {
        let p = solve_profile(
            &FluxModel::Burgers,
            &ShockPair::new(1.0, -1.0),
            1e-8,
            Some(5.0),
        )
        .unwrap();
        let (x_lo, x_hi) = p.x_range();
        assert!(x_lo >= -5.0 && x_hi <= 5.0);
        assert!((p.eval(10.0) + (5.0f64).tanh()).abs() <= 1e-4);
        assert!(p.eval(0.0).abs() <= 1e-12);
    }

    #[test]
    fn non_convex_flux_without_profile_is_rejected() {
        let flux = FluxModel::Custom {
            name: "sine".into(),
            a: std::sync::Arc::new(|u| u.sin()),
            a1: std::sync::Arc::new(|u| u.cos()),
            a2: std::sync::Arc::new(|u| -u.sin()),
        };
        let err = solve_profile(&flux, &ShockPair::new(1.0, -1.0), 1e-8, None).unwrap_err();
        assert!(matches!(err, Error::NonAdmissibleShock { .. }));
    }

    #[test]
    fn wrong_state_order_is_rejected() {
        let err = solve_profile(&FluxModel::Burgers, &ShockPair::new(-1.0, 1.0), 1e-8, None)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn layer_l2_distance_to_shock_scales_linearly_in_epsilon() {
        // integral of |S1(x/eps) - S0(x)|^2 dx = 4 (2 ln 2 - 1) eps for the
        // Burgers layer, computed here from cell averages.
        let p = burgers_layer();
        let expected = 4.0 * (2.0 * std::f64::consts::LN_2 - 1.0);
        let dist2 = |eps: f64, n: usize| -> f64 {
            let grid = Grid::new(-2.0, 2.0, n).unwrap();
            let state = layer_initial_data(&p, eps, grid).unwrap();
            let dx = grid.dx();
            let mut acc = 0.0;
            for i in 0..n {
                let s0 = if grid.center(i) < 0.0 { 1.0 } else { -1.0 };
                acc += (state.u[i] - s0).powi(2) * dx;
            }
            acc
        };
        let d_05 = dist2(0.05, 1600);
        let d_025 = dist2(0.025, 3200);
        assert_relative_eq!(d_05, expected * 0.05, max_relative = 1e-2);
        assert_relative_eq!(d_025, expected * 0.025, max_relative = 1e-2);
        assert_relative_eq!(d_05 / d_025, 2.0, max_relative = 1e-2);
    }

    #[test]
    fn layer_data_far_field_matches_end_states() {
        let p = burgers_layer();
        let grid = Grid::new(-2.0, 2.0, 800).unwrap();
        let state = layer_initial_data(&p, 0.005, grid).unwrap();
        assert!((state.u[0] - 1.0).abs() <= 1e-12);
        assert!((state.u[799] + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let p = burgers_layer();
        let grid = Grid::new(-2.0, 2.0, 800).unwrap();
        let err = layer_initial_data(&p, 1e-3, grid).unwrap_err();
        assert!(matches!(err, Error::UnderResolvedLayer { .. }));
    }
}
