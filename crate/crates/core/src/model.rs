//! Scalar conservation-law models: convex fluxes, convex entropies, shock
//! data, and the quantitative convexity certificate used by the shift and
//! diagnostics machinery.
//!
//! Everything downstream (profiles, shift ODE, weighted entropy balances)
//! only touches the model through the operations here: shock speed,
//! relative entropy, entropy flux, relative entropy flux, the normalized
//! flux f = F/eta, and the certified box constant Lambda.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Strictly convex flux A with first and second derivatives.
#[derive(Clone)]
pub enum FluxModel {
    /// A(u) = u^2 / 2
    Burgers,
    /// A(u) = e^u
    Exponential,
    /// A(u) = u^4/4 + u^2/2
    Quartic,
    /// User-supplied flux with matching derivative callables.
    Custom {
        name: String,
        a: ScalarFn,
        a1: ScalarFn,
        a2: ScalarFn,
    },
}

impl FluxModel {
    pub fn a(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => 0.5 * u * u,
            FluxModel::Exponential => u.exp(),
            FluxModel::Quartic => 0.25 * u * u * u * u + 0.5 * u * u,
            FluxModel::Custom { a, .. } => a(u),
        }
    }

    pub fn a1(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => u,
            FluxModel::Exponential => u.exp(),
            FluxModel::Quartic => u * u * u + u,
            FluxModel::Custom { a1, .. } => a1(u),
        }
    }

    pub fn a2(&self, u: f64) -> f64 {
        match self {
            FluxModel::Burgers => 1.0,
            FluxModel::Exponential => u.exp(),
            FluxModel::Quartic => 3.0 * u * u + 1.0,
            FluxModel::Custom { a2, .. } => a2(u),
        }
    }

    /// Point where A' vanishes, if the builtin has one. Custom fluxes fall
    /// back to bisection in `argmin_on`.
    fn sonic(&self) -> Option<f64> {
        match self {
            FluxModel::Burgers | FluxModel::Quartic => Some(0.0),
            FluxModel::Exponential => None,
            FluxModel::Custom { .. } => None,
        }
    }

    /// Minimizer of A over [lo, hi]. Relies on convexity: A' is
    /// nondecreasing, so the minimum sits where A' crosses zero, clamped
    /// to the interval.
    pub fn argmin_on(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        if self.a1(lo) >= 0.0 {
            return lo;
        }
        if self.a1(hi) <= 0.0 {
            return hi;
        }
        if let Some(s) = self.sonic() {
            if s >= lo && s <= hi {
                return s;
            }
        }
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.a1(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// max |A'| over [lo, hi]; exact for convex A (attained at an endpoint).
    pub fn max_abs_a1_on(&self, lo: f64, hi: f64) -> f64 {
        self.a1(lo).abs().max(self.a1(hi).abs())
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "burgers" => Ok(FluxModel::Burgers),
            "exponential" => Ok(FluxModel::Exponential),
            "quartic" => Ok(FluxModel::Quartic),
            other => Err(Error::UnknownName {
                kind: "flux",
                name: other.to_string(),
                known: "burgers, exponential, quartic",
            }),
        }
    }

    pub fn key(&self) -> &str {
        match self {
            FluxModel::Burgers => "burgers",
            FluxModel::Exponential => "exponential",
            FluxModel::Quartic => "quartic",
            FluxModel::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FluxModel({})", self.key())
    }
}

/// Strictly convex entropy eta with first and second derivatives.
#[derive(Clone)]
pub enum EntropyModel {
    /// eta(u) = u^2
    Quadratic,
    /// eta(u) = u^4 + u^2
    Quartic,
    Custom {
        name: String,
        eta: ScalarFn,
        eta1: ScalarFn,
        eta2: ScalarFn,
    },
}

impl EntropyModel {
    pub fn eta(&self, u: f64) -> f64 {
        match self {
            EntropyModel::Quadratic => u * u,
            EntropyModel::Quartic => u * u * u * u + u * u,
            EntropyModel::Custom { eta, .. } => eta(u),
        }
    }

    pub fn eta1(&self, u: f64) -> f64 {
        match self {
            EntropyModel::Quadratic => 2.0 * u,
            EntropyModel::Quartic => 4.0 * u * u * u + 2.0 * u,
            EntropyModel::Custom { eta1, .. } => eta1(u),
        }
    }

    pub fn eta2(&self, u: f64) -> f64 {
        match self {
            EntropyModel::Quadratic => 2.0,
            EntropyModel::Quartic => 12.0 * u * u + 2.0,
            EntropyModel::Custom { eta2, .. } => eta2(u),
        }
    }

    pub fn from_key(key: &str) -> Result<Self> {
        match key {
            "quadratic" => Ok(EntropyModel::Quadratic),
            "quartic" => Ok(EntropyModel::Quartic),
            other => Err(Error::UnknownName {
                kind: "entropy",
                name: other.to_string(),
                known: "quadratic, quartic",
            }),
        }
    }

    pub fn key(&self) -> &str {
        match self {
            EntropyModel::Quadratic => "quadratic",
            EntropyModel::Quartic => "quartic",
            EntropyModel::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for EntropyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntropyModel({})", self.key())
    }
}

/// Far-field states of an entropy-admissible shock, c_left > c_right.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShockPair {
    pub c_left: f64,
    pub c_right: f64,
}

impl ShockPair {
    pub fn new(c_left: f64, c_right: f64) -> Self {
        ShockPair { c_left, c_right }
    }

    pub fn jump(&self) -> f64 {
        self.c_left - self.c_right
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.c_left + self.c_right)
    }
}

/// Certified convexity box: on [-bound_m, bound_m]^2 the five inequalities
/// of the quantitative convexity lemma hold with this lambda.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct LambdaBox {
    pub bound_m: f64,
    pub lambda: f64,
}

/// Rankine-Hugoniot speed (A(c_l) - A(c_r)) / (c_l - c_r).
pub fn shock_speed(flux: &FluxModel, c_left: f64, c_right: f64) -> Result<f64> {
    let gap = (c_left - c_right).abs();
    if gap < 1e-14 {
        return Err(Error::EqualStates { gap });
    }
    Ok((flux.a(c_left) - flux.a(c_right)) / (c_left - c_right))
}

/// eta(x|y) = eta(x) - eta(y) - eta'(y)(x - y). Nonnegative for convex eta,
/// zero iff x = y.
pub fn relative_entropy(entropy: &EntropyModel, x: f64, y: f64) -> f64 {
    entropy.eta(x) - entropy.eta(y) - entropy.eta1(y) * (x - y)
}

/// Entropy flux G with G' = eta' A' anchored at G(0) = 0.
///
/// Builtin pairs use closed forms; anything else integrates eta' A' with
/// adaptive Simpson (tol 1e-12, depth cap 30).
pub fn entropy_flux(entropy: &EntropyModel, flux: &FluxModel, u: f64) -> Result<f64> {
    match (entropy, flux) {
        (EntropyModel::Quadratic, FluxModel::Burgers) => Ok(2.0 / 3.0 * u * u * u),
        (EntropyModel::Quadratic, FluxModel::Exponential) => Ok(2.0 * ((u - 1.0) * u.exp() + 1.0)),
        (EntropyModel::Quadratic, FluxModel::Quartic) => {
            let u3 = u * u * u;
            Ok(0.4 * u3 * u * u + 2.0 / 3.0 * u3)
        }
        (EntropyModel::Quartic, FluxModel::Burgers) => {
            let u3 = u * u * u;
            Ok(0.8 * u3 * u * u + 2.0 / 3.0 * u3)
        }
        (EntropyModel::Quartic, FluxModel::Exponential) => {
            Ok((4.0 * u * u * u - 12.0 * u * u + 26.0 * u - 26.0) * u.exp() + 26.0)
        }
        (EntropyModel::Quartic, FluxModel::Quartic) => {
            let u3 = u * u * u;
            let u5 = u3 * u * u;
            Ok(4.0 / 7.0 * u5 * u * u + 1.2 * u5 + 2.0 / 3.0 * u3)
        }
        _ => {
            let integrand = |s: f64| entropy.eta1(s) * flux.a1(s);
            adaptive_simpson(&integrand, 0.0, u, 1e-12, 30)
        }
    }
}

/// Relative entropy flux F(x, y) = G(x) - G(y) - eta'(y)(A(x) - A(y)).
pub fn relative_flux(entropy: &EntropyModel, flux: &FluxModel, x: f64, y: f64) -> Result<f64> {
    let gx = entropy_flux(entropy, flux, x)?;
    let gy = entropy_flux(entropy, flux, y)?;
    Ok(gx - gy - entropy.eta1(y) * (flux.a(x) - flux.a(y)))
}

/// Normalized flux f(x, y) = F(x, y) / eta(x|y) with the removable
/// singularity on the diagonal filled by its limit A'(y). The substitution
/// window |x - y| <= 1e-9 (1 + |y|) keeps the ratio away from 0/0 noise.
pub fn normalized_flux(entropy: &EntropyModel, flux: &FluxModel, x: f64, y: f64) -> Result<f64> {
    let tol_sing = 1e-9 * (1.0 + y.abs());
    if (x - y).abs() <= tol_sing {
        return Ok(flux.a1(y));
    }
    Ok(relative_flux(entropy, flux, x, y)? / relative_entropy(entropy, x, y))
}

/// Slack used when checking the five certificate inequalities at sampled
/// points: absorbs roundoff without admitting real violations.
const CERT_SLACK: f64 = 1e-12;

/// Tolerance below which a sampled negative partial d_x f is treated as a
/// genuine convexity violation rather than central-difference noise.
const DERIV_TOL: f64 = 1e-8;

struct CertSamples {
    eta2: Vec<f64>,
    /// per off-diagonal pair: (d^2 = (x-y)^2, eta(x|y), |F|, fx, fy)
    pairs: Vec<(f64, f64, f64, f64, f64)>,
    /// fx and fy on the diagonal (d = 0 rows still constrain the partials)
    diag: Vec<(f64, f64)>,
}

fn certificate_samples(
    entropy: &EntropyModel,
    flux: &FluxModel,
    bound_m: f64,
    n_samples: usize,
) -> Result<CertSamples> {
    let m = bound_m;
    let n = n_samples;
    let grid: Vec<f64> = (0..n)
        .map(|k| -m + 2.0 * m * k as f64 / (n - 1) as f64)
        .collect();
    let h = m / (10.0 * n as f64);

    let mut eta2 = Vec::with_capacity(n);
    for &u in &grid {
        let e2 = entropy.eta2(u);
        if e2 <= 0.0 {
            return Err(Error::ConvexityViolation {
                what: "eta''",
                value: e2,
                at: (u, u),
                bound_m: m,
            });
        }
        eta2.push(e2);
    }

    // Cache per-grid values so F only costs two lookups plus one product.
    let g: Vec<f64> = grid
        .iter()
        .map(|&u| entropy_flux(entropy, flux, u))
        .collect::<Result<_>>()?;
    let a: Vec<f64> = grid.iter().map(|&u| flux.a(u)).collect();
    let eta1: Vec<f64> = grid.iter().map(|&u| entropy.eta1(u)).collect();

    let mut pairs = Vec::with_capacity(n * n);
    let mut diag = Vec::with_capacity(n);
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate() {
            let fx = (normalized_flux(entropy, flux, x + h, y)?
                - normalized_flux(entropy, flux, x - h, y)?)
                / (2.0 * h);
            let fy = (normalized_flux(entropy, flux, x, y + h)?
                - normalized_flux(entropy, flux, x, y - h)?)
                / (2.0 * h);
            if fx < -DERIV_TOL {
                return Err(Error::ConvexityViolation {
                    what: "d_x f",
                    value: fx,
                    at: (x, y),
                    bound_m: m,
                });
            }
            if i == j {
                diag.push((fx, fy));
                continue;
            }
            let d2 = (x - y) * (x - y);
            let re = relative_entropy(entropy, x, y);
            if re <= 0.0 {
                return Err(Error::ConvexityViolation {
                    what: "eta(x|y)",
                    value: re,
                    at: (x, y),
                    bound_m: m,
                });
            }
            let fabs = (g[i] - g[j] - eta1[j] * (a[i] - a[j])).abs();
            pairs.push((d2, re, fabs, fx, fy));
        }
    }
    Ok(CertSamples { eta2, pairs, diag })
}

fn certificate_feasible(s: &CertSamples, lam: f64) -> bool {
    let up = lam * (1.0 + CERT_SLACK);
    let dn = (1.0 - CERT_SLACK) / lam;
    for &e2 in &s.eta2 {
        if e2 > up || e2 < dn {
            return false;
        }
    }
    for &(fx, fy) in &s.diag {
        if fx > up || fy < dn {
            return false;
        }
    }
    for &(d2, re, fabs, fx, fy) in &s.pairs {
        if re > 0.5 * up * d2 || re < 0.5 * dn * d2 {
            return false;
        }
        if fabs > up * d2 {
            return false;
        }
        if fx > up || fy < dn {
            return false;
        }
    }
    true
}

/// Smallest lambda (within 1%, by bisection) such that, sampled on an
/// n_samples x n_samples grid over [-bound_m, bound_m]^2:
///
///   1/lambda <= eta'' <= lambda
///   (x-y)^2 / (2 lambda) <= eta(x|y) <= lambda (x-y)^2 / 2
///   |F(x, y)| <= lambda (x-y)^2
///   0 <= d_x f <= lambda
///   d_y f >= 1/lambda
///
/// with the partials by central differences of step bound_m/(10 n_samples).
/// The returned certificate is the feasible upper end of the final bracket,
/// so re-checking the inequalities at the same samples shows no violations.
pub fn lambda_estimate(
    entropy: &EntropyModel,
    flux: &FluxModel,
    bound_m: f64,
    n_samples: usize,
) -> Result<LambdaBox> {
    if !(bound_m > 0.0) || !bound_m.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bound_m must be positive and finite, got {bound_m}"
        )));
    }
    if n_samples < 8 {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be at least 8, got {n_samples}"
        )));
    }
    let samples = certificate_samples(entropy, flux, bound_m, n_samples)?;

    // eta'' <= lambda together with eta'' >= 1/lambda forces lambda >= 1,
    // so 0.5 is always below the feasible set.
    let mut lo = 0.5;
    let mut hi = 1.0;
    while !certificate_feasible(&samples, hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::CertificateInfeasible { limit: 1e12 });
        }
    }
    while hi - lo > 0.01 * lo {
        let mid = (lo * hi).sqrt();
        if certificate_feasible(&samples, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaBox {
        bound_m,
        lambda: hi,
    })
}

/// Adaptive Simpson integration of f over [a, b] (either orientation).
/// Errors with the offending interval if the depth cap is hit before the
/// local tolerance is met.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let flo = f(lo);
    let fhi = f(hi);
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    let v = simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, max_depth)?;
    Ok(sign * v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence {
            a,
            b,
            depth: 30,
            tol,
        });
    }
    let lv = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: composite Simpson with a fixed fine partition.
    fn simpson_oracle(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn shock_speed_matches_chord_slopes() {
        let burgers = FluxModel::Burgers;
        assert_eq!(shock_speed(&burgers, 1.0, -1.0).unwrap(), 0.0);
        assert_eq!(shock_speed(&burgers, 2.0, 0.0).unwrap(), 1.0);
        let expo = FluxModel::Exponential;
        assert_relative_eq!(
            shock_speed(&expo, 1.0, 0.0).unwrap(),
            std::f64::consts::E - 1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn shock_speed_rejects_equal_states() {
        let err = shock_speed(&FluxModel::Burgers, 1.0, 1.0 + 1e-15).unwrap_err();
        assert!(matches!(err, Error::EqualStates { .. }));
    }

    #[test]
    fn relative_entropy_quadratic_is_squared_distance() {
        let eta = EntropyModel::Quadratic;
        assert_eq!(relative_entropy(&eta, 2.0, 1.0), 1.0);
        assert_eq!(relative_entropy(&eta, -1.0, 3.0), 16.0);
        assert_eq!(relative_entropy(&eta, 0.7, 0.7), 0.0);
    }

    #[test]
    fn entropy_flux_closed_forms_match_quadrature() {
        let fluxes = [FluxModel::Burgers, FluxModel::Exponential, FluxModel::Quartic];
        let entropies = [EntropyModel::Quadratic, EntropyModel::Quartic];
        for entropy in &entropies {
            for flux in &fluxes {
                for &u in &[-2.0, -0.7, 0.0, 0.3, 1.0, 2.5] {
                    let closed = entropy_flux(entropy, flux, u).unwrap();
                    let oracle =
                        simpson_oracle(|s| entropy.eta1(s) * flux.a1(s), 0.0, u, 4000);
                    assert_relative_eq!(closed, oracle, epsilon = 1e-10, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn entropy_flux_anchor_and_burgers_value() {
        let eta = EntropyModel::Quadratic;
        let flux = FluxModel::Burgers;
        assert_eq!(entropy_flux(&eta, &flux, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            entropy_flux(&eta, &flux, 1.0).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn entropy_flux_custom_pair_uses_quadrature() {
        // cosh flux is not a builtin, so this exercises the Simpson path.
        let flux = FluxModel::Custom {
            name: "cosh".into(),
            a: Arc::new(|u: f64| u.cosh()),
            a1: Arc::new(|u: f64| u.sinh()),
            a2: Arc::new(|u: f64| u.cosh()),
        };
        let eta = EntropyModel::Quadratic;
        for &u in &[-1.5, 0.4, 2.0] {
            let got = entropy_flux(&eta, &flux, u).unwrap();
            // G(u) = int 2 s sinh(s) ds = 2 (u cosh u - sinh u)
            let exact = 2.0 * (u * u.cosh() - u.sinh());
            assert_relative_eq!(got, exact, epsilon = 1e-11, max_relative = 1e-10);
        }
    }

    #[test]
    fn entropy_flux_derivative_consistency() {
        // dG/du by central difference against eta' A' for a custom pair.
        let eta = EntropyModel::Quartic;
        let flux = FluxModel::Custom {
            name: "cosh".into(),
            a: Arc::new(|u: f64| u.cosh()),
            a1: Arc::new(|u: f64| u.sinh()),
            a2: Arc::new(|u: f64| u.cosh()),
        };
        let h = 1e-5;
        for &u in &[-1.0, -0.2, 0.8, 1.7] {
            let num = (entropy_flux(&eta, &flux, u + h).unwrap()
                - entropy_flux(&eta, &flux, u - h).unwrap())
                / (2.0 * h);
            let exact = eta.eta1(u) * flux.a1(u);
            assert_relative_eq!(num, exact, max_relative = 1e-6, epsilon = 1e-6);
        }
    }

    #[test]
    fn relative_flux_quadratic_burgers_example() {
        let eta = EntropyModel::Quadratic;
        let flux = FluxModel::Burgers;
        // F(x,y) = (x-y)^2 (2x+y)/3; F(0,1) = 1/3.
        assert_relative_eq!(
            relative_flux(&eta, &flux, 0.0, 1.0).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
        assert_eq!(relative_flux(&eta, &flux, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn normalized_flux_closed_form_on_grid() {
        let eta = EntropyModel::Quadratic;
        let flux = FluxModel::Burgers;
        let n = 101;
        for i in 0..n {
            for j in 0..n {
                let x = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
                let y = -2.0 + 4.0 * j as f64 / (n - 1) as f64;
                let f = normalized_flux(&eta, &flux, x, y).unwrap();
                assert!(
                    (f - (2.0 * x + y) / 3.0).abs() <= 1e-10,
                    "f({x},{y}) = {f} vs {}",
                    (2.0 * x + y) / 3.0
                );
            }
        }
    }

    #[test]
    fn normalized_flux_diagonal_is_characteristic_speed() {
        let eta = EntropyModel::Quadratic;
        for flux in [FluxModel::Burgers, FluxModel::Exponential, FluxModel::Quartic] {
            for &y in &[-1.2, 0.0, 0.8] {
                let f = normalized_flux(&eta, &flux, y, y).unwrap();
                assert_eq!(f, flux.a1(y));
            }
        }
    }

    #[test]
    fn normalized_flux_removable_singularity_rate() {
        // |f(y+h, y) - A'(y)| <= C h with C <= lambda on the box; use 10 as
        // a generous cap across the builtin pairs tested here.
        let cases = [
            (EntropyModel::Quadratic, FluxModel::Burgers),
            (EntropyModel::Quartic, FluxModel::Exponential),
            (EntropyModel::Quartic, FluxModel::Quartic),
        ];
        for (eta, flux) in &cases {
            for &y in &[-0.5, 0.0, 0.7] {
                for &h in &[1e-2, 1e-3, 1e-4] {
                    let f = normalized_flux(eta, flux, y + h, y).unwrap();
                    assert!(
                        (f - flux.a1(y)).abs() <= 10.0 * h,
                        "pair ({}, {}), y={y}, h={h}: |{}|",
                        eta.key(),
                        flux.key(),
                        f - flux.a1(y)
                    );
                }
            }
        }
    }

    /// Direct grid minimization of each certificate constraint; independent
    /// of the bisection path.
    fn lambda_oracle(entropy: &EntropyModel, flux: &FluxModel, m: f64, n: usize) -> f64 {
        let grid: Vec<f64> = (0..n)
            .map(|k| -m + 2.0 * m * k as f64 / (n - 1) as f64)
            .collect();
        let h = m / (10.0 * n as f64);
        let mut lam: f64 = 1.0;
        for &x in &grid {
            let e2 = entropy.eta2(x);
            lam = lam.max(e2).max(1.0 / e2);
            for &y in &grid {
                let fx = (normalized_flux(entropy, flux, x + h, y).unwrap()
                    - normalized_flux(entropy, flux, x - h, y).unwrap())
                    / (2.0 * h);
                let fy = (normalized_flux(entropy, flux, x, y + h).unwrap()
                    - normalized_flux(entropy, flux, x, y - h).unwrap())
                    / (2.0 * h);
                lam = lam.max(fx).max(1.0 / fy);
                if x != y {
                    let d2 = (x - y) * (x - y);
                    let re = relative_entropy(entropy, x, y);
                    let fa = relative_flux(entropy, flux, x, y).unwrap().abs();
                    lam = lam.max(2.0 * re / d2).max(d2 / (2.0 * re)).max(fa / d2);
                }
            }
        }
        lam
    }

    #[test]
    fn lambda_estimate_quadratic_burgers_is_three() {
        let eta = EntropyModel::Quadratic;
        let flux = FluxModel::Burgers;
        // Binding constraint is d_y f = 1/3 >= 1/lambda at every sample.
        for &m in &[1.0, 3.0] {
            let cert = lambda_estimate(&eta, &flux, m, 64).unwrap();
            assert!(
                (cert.lambda - 3.0).abs() <= 0.03 * 3.0,
                "m={m}: lambda = {}",
                cert.lambda
            );
        }
    }

    #[test]
    fn lambda_estimate_tracks_grid_infimum() {
        let cases = [
            (EntropyModel::Quadratic, FluxModel::Burgers, 1.0),
            (EntropyModel::Quadratic, FluxModel::Exponential, 1.5),
            (EntropyModel::Quartic, FluxModel::Quartic, 1.5),
        ];
        for (eta, flux, m) in &cases {
            let n = 48;
            let cert = lambda_estimate(eta, flux, *m, n).unwrap();
            let star = lambda_oracle(eta, flux, *m, n);
            assert!(
                cert.lambda >= star * (1.0 - 1e-9) && cert.lambda <= star * 1.011,
                "pair ({}, {}): bisection {} vs infimum {}",
                eta.key(),
                flux.key(),
                cert.lambda,
                star
            );
        }
    }

    #[test]
    fn lambda_estimate_rejects_concave_entropy() {
        let eta = EntropyModel::Custom {
            name: "concave".into(),
            eta: Arc::new(|u: f64| -u * u),
            eta1: Arc::new(|u: f64| -2.0 * u),
            eta2: Arc::new(|_| -2.0),
        };
        let err = lambda_estimate(&eta, &FluxModel::Burgers, 1.0, 16).unwrap_err();
        assert!(matches!(err, Error::ConvexityViolation { .. }));
    }

    #[test]
    fn certificate_inequalities_hold_at_returned_lambda() {
        let eta = EntropyModel::Quartic;
        let flux = FluxModel::Burgers;
        let m = 2.0;
        let n = 48;
        let cert = lambda_estimate(&eta, &flux, m, n).unwrap();
        let samples = certificate_samples(&eta, &flux, m, n).unwrap();
        assert!(certificate_feasible(&samples, cert.lambda));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn relative_entropy_nonnegative(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            for eta in [EntropyModel::Quadratic, EntropyModel::Quartic] {
                let v = relative_entropy(&eta, x, y);
                prop_assert!(v >= -1e-12 * (1.0 + x.abs() + y.abs()).powi(4));
            }
        }

        #[test]
        fn relative_flux_quadratic_bound(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            // |F| <= lambda (x-y)^2 with lambda = 3 on [-1,1]^2.
            let f = relative_flux(&EntropyModel::Quadratic, &FluxModel::Burgers, x, y).unwrap();
            prop_assert!(f.abs() <= 3.0 * (x - y) * (x - y) + 1e-15);
        }

        #[test]
        fn normalized_flux_monotone_in_x(y in -0.9f64..0.9, d in 1e-4f64..0.5) {
            // d_x f >= 0: f(x2, y) >= f(x1, y) for x2 > x1.
            let eta = EntropyModel::Quartic;
            let flux = FluxModel::Quartic;
            let x1 = y - 2.0 * d;
            let x2 = y + 3.0 * d;
            let f1 = normalized_flux(&eta, &flux, x1, y).unwrap();
            let f2 = normalized_flux(&eta, &flux, x2, y).unwrap();
            prop_assert!(f2 >= f1 - 1e-9);
        }
    }
}
