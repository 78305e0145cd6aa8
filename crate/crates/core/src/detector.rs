//! Analytic detection engine.
//!
//! The RSS statistic under the null is exponential conditioned on the
//! interference mixing variable V, and under the alternative it is a
//! LOS/NLOS mixture of a non-central and a central chi-squared law (2
//! degrees of freedom), again conditioned on V. Everything here reduces to
//! expectations `E_V[phi(V)]` with V totally skewed stable
//! S(1/b_I, 1, cos(pi/(2 b_I))):
//!
//! * false alarm: phi(v) = exp(-gamma_thr / (2 sigma0^2(v))), with
//!   sigma0^2(v) = v gamma_G + n0/2;
//! * detection: P_L Q1(mu/sigma1(v), sqrt(gamma_thr)/sigma1(v)) +
//!   P_N exp(-gamma_thr / (2 sigma1^2(v))), with
//!   sigma1^2(v) = k^2 rho^2 P_d / (2 eta_N d^2) + v gamma_G + n0/2 and
//!   mu^2 = k^2 rho^2 P_d / (eta_L d^2).
//!
//! For b_I = 2 the mixing law is Levy with scale 1/2 and the expectation is
//! computed by quadrature after the exact change of variables v = 1/(2w^2),
//! which turns it into a smooth half-normal integral
//! `sqrt(2/pi) int_0^inf phi(1/(2w^2)) e^{-w^2/2} dw` (no essential
//! singularity, no heavy tail). For other b_I the expectation is a Monte
//! Carlo average over a seeded, fixed V-sample set; reusing one seed gives
//! common random numbers across sweeps, so monotonicity in the threshold
//! holds exactly rather than statistically.

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::channel::{amplitude_constant, InterferenceModel, NetworkConfig};
use crate::distributions::sample_stable;
use crate::geometry::{los_probability, nearest_neighbor_pdf, EnvironmentProfile};
use crate::quad;
use crate::rng::RngStream;
use crate::{Error, Result};

/// One ROC point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPoint {
    pub gamma_thr: f64,
    pub p_fa: f64,
    pub p_d: f64,
}

/// How V-expectations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    /// Closed-form Levy mixing density; valid only for b_I = 2.
    LevyQuadrature,
    /// Average over a fixed V-sample set drawn once from the mixing law.
    /// The set depends only on (b_I, samples, seed), giving common random
    /// numbers across evaluations that share a seed.
    StableMonteCarlo { samples: usize, seed: u64 },
}

/// Single-sensor ROC at a fixed ground distance, or averaged over the
/// nearest-sensor law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RocMode {
    Single { r0: f64 },
    NetworkAverage,
}

/// ROC sweep result; failed grid points are reported alongside the points
/// that did evaluate.
#[derive(Debug)]
pub struct RocOutcome {
    pub points: Vec<DetectorPoint>,
    pub failures: Vec<(f64, Error)>,
}

const V_STREAM_ID: u64 = 86;
const V_EPSABS: f64 = 1e-10;
const V_EPSREL: f64 = 1e-9;
/// Half-normal truncation for the Levy-route substitution; tail mass
/// beyond w = 12 is below 2e-33.
const W_CUTOFF: f64 = 12.0;

enum Route {
    /// gamma_g = 0: V never enters, kernels are evaluated at v = 0 exactly.
    NoInterference,
    LevyQuad,
    Samples(Vec<f64>),
}

/// Reusable V-expectation evaluator; build once per sweep so Monte Carlo
/// samples are shared across every point of the sweep.
pub(crate) struct VExpectation {
    route: Route,
}

impl VExpectation {
    pub(crate) fn new(model: &InterferenceModel, method: &EvalMethod) -> Result<Self> {
        if let EvalMethod::LevyQuadrature = method {
            if model.b_i != 2.0 {
                return Err(Error::MethodMismatch(format!(
                    "Levy quadrature requires b_I = 2 exactly, got {}",
                    model.b_i
                )));
            }
        }
        if model.gamma_g == 0.0 {
            return Ok(VExpectation {
                route: Route::NoInterference,
            });
        }
        let route = match method {
            EvalMethod::LevyQuadrature => Route::LevyQuad,
            EvalMethod::StableMonteCarlo { samples, seed } => {
                if *samples == 0 {
                    return Err(Error::invalid("samples", "need at least one V sample"));
                }
                let p = model.mixing_params()?;
                let mut rng = RngStream::new(*seed, V_STREAM_ID);
                let v: Result<Vec<f64>> =
                    (0..*samples).map(|_| sample_stable(&p, &mut rng)).collect();
                Route::Samples(v?)
            }
        };
        Ok(VExpectation { route })
    }

    /// `transition_w` is the w-scale where the kernel departs from its
    /// v -> infinity plateau (the threshold-to-dispersion boundary layer);
    /// the quadrature interval is split there so a layer much narrower
    /// than the first panel cannot hide between nodes.
    fn expect<F: Fn(f64) -> f64>(&self, transition_w: f64, phi: F) -> Result<f64> {
        match &self.route {
            Route::NoInterference => Ok(phi(0.0)),
            Route::LevyQuad => {
                let f = |w: f64| phi(0.5 / (w * w)) * (-0.5 * w * w).exp();
                let norm = (2.0 / std::f64::consts::PI).sqrt();
                let cut = (8.0 * transition_w).clamp(1e-6, W_CUTOFF);
                if cut >= W_CUTOFF {
                    let q = quad::integrate(f, 0.0, W_CUTOFF, V_EPSABS, V_EPSREL)?;
                    return Ok(q.value * norm);
                }
                let head = quad::integrate(f, 0.0, cut, 0.5 * V_EPSABS, V_EPSREL)?;
                let tail = quad::integrate(f, cut, W_CUTOFF, 0.5 * V_EPSABS, V_EPSREL)?;
                Ok((head.value + tail.value) * norm)
            }
            Route::Samples(v) => {
                let sum: f64 = v.iter().map(|&vi| phi(vi)).sum();
                Ok(sum / v.len() as f64)
            }
        }
    }
}

/// w below which `v gamma_g` exceeds the scale the kernel reacts to.
fn layer_scale(gamma_g: f64, effective_gamma: f64) -> f64 {
    (0.5 * gamma_g / effective_gamma).sqrt()
}

/// First-order Marcum Q function, absolute error below 1e-12.
///
/// Poisson-weighted series over the chi-squared mixture: with x = a^2/2,
/// y = b^2/2, Q1 = sum_n Pois_n(x) P(Pois(y) <= n). Anchored at the
/// Poisson mode and expanded both ways with a rigorous remainder (the
/// unvisited Poisson mass bounds the truncated terms since every
/// chi-squared factor is <= 1). The extreme tails use the Chernoff-type
/// bounds Q1 <= e^{-(b-a)^2/2} (b > a) and 1 - Q1 <= e^{-(a-b)^2/2}
/// (a > b).
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    assert!(
        a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite(),
        "marcum_q1 requires finite nonnegative arguments"
    );
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-0.5 * b * b).exp();
    }
    let diff = b - a;
    if 0.5 * diff * diff > 80.0 {
        // Bound value below 2e-35: saturate.
        return if diff > 0.0 { 0.0 } else { 1.0 };
    }

    let x = 0.5 * a * a;
    let y = 0.5 * b * b;
    let n0 = x.floor();
    let ln_p0 = -x + n0 * x.ln() - ln_gamma(n0 + 1.0);
    let p0 = ln_p0.exp();
    let g0 = gamma_ur(n0 + 1.0, y);
    let ln_t0 = -y + n0 * y.ln() - ln_gamma(n0 + 1.0);
    let t0 = ln_t0.exp();

    let mut sum = p0 * g0;

    // Downward toward n = 0; both factors shrink, so the n remaining terms
    // are together bounded by n * p * g.
    let mut p = p0;
    let mut g = g0;
    let mut t = t0;
    let mut n = n0;
    while n >= 1.0 && n * p * g >= 1e-16 {
        p *= n / x;
        g = (g - t).max(0.0);
        t *= n / y;
        n -= 1.0;
        sum += p * g;
    }

    // Upward past the mode until the geometric bound on the remaining
    // Poisson mass (with every chi-squared factor <= 1) is negligible.
    let mut p = p0;
    let mut g = g0;
    let mut t = t0;
    let mut n = n0;
    loop {
        n += 1.0;
        p *= x / n;
        t *= y / n;
        g = (g + t).min(1.0);
        sum += p * g;
        if n > x {
            let q = x / (n + 1.0);
            if p * q < 1e-15 * (1.0 - q) {
                break;
            }
        }
    }
    sum.clamp(0.0, 1.0)
}

fn validate_threshold(gamma_thr: f64) -> Result<()> {
    if !(gamma_thr >= 0.0 && gamma_thr.is_finite()) {
        return Err(Error::invalid("gamma_thr", "threshold must be finite and >= 0"));
    }
    Ok(())
}

/// False-alarm probability at threshold `gamma_thr`.
pub fn pfa(
    gamma_thr: f64,
    model: &InterferenceModel,
    n0: f64,
    method: &EvalMethod,
) -> Result<f64> {
    validate_threshold(gamma_thr)?;
    if !(n0 >= 0.0) {
        return Err(Error::invalid("n0", "noise density must be >= 0"));
    }
    let ev = VExpectation::new(model, method)?;
    pfa_with(gamma_thr, model.gamma_g, n0, &ev)
}

fn pfa_with(gamma_thr: f64, gamma_g: f64, n0: f64, ev: &VExpectation) -> Result<f64> {
    if gamma_thr == 0.0 {
        return Ok(1.0);
    }
    let half_n0 = 0.5 * n0;
    let transition = layer_scale(gamma_g, gamma_thr + half_n0);
    ev.expect(transition, |v| {
        let s0 = v * gamma_g + half_n0;
        if s0 > 0.0 {
            (-0.5 * gamma_thr / s0).exp()
        } else {
            0.0
        }
    })
    .map(|p| p.clamp(0.0, 1.0))
}

/// Threshold with `|pfa(gamma_thr) - alpha_fa| <= 1e-6`, by bracketing and
/// bisection on the strictly decreasing false-alarm curve. Exact closed
/// form `n0 ln(1/alpha)` when the interference dispersion is zero.
pub fn solve_threshold(
    alpha_fa: f64,
    model: &InterferenceModel,
    n0: f64,
    method: &EvalMethod,
) -> Result<f64> {
    if !(alpha_fa > 0.0 && alpha_fa < 1.0) {
        return Err(Error::invalid("alpha_fa", "target must be in (0, 1)"));
    }
    let ev = VExpectation::new(model, method)?;
    solve_threshold_with(alpha_fa, model.gamma_g, n0, &ev)
}

const PFA_TOL: f64 = 1e-6;

fn solve_threshold_with(
    alpha_fa: f64,
    gamma_g: f64,
    n0: f64,
    ev: &VExpectation,
) -> Result<f64> {
    if gamma_g == 0.0 {
        return Ok(n0 * (1.0 / alpha_fa).ln());
    }

    // Bracket: expand upward from the interference scale until pfa < alpha.
    let mut lo = 0.0f64;
    let mut hi = gamma_g + n0;
    let mut expansions = 0;
    while pfa_with(hi, gamma_g, n0, ev)? >= alpha_fa {
        lo = hi;
        hi *= 10.0;
        expansions += 1;
        if expansions > 400 || !hi.is_finite() {
            return Err(Error::NoConvergence(format!(
                "threshold bracket expansion exhausted at gamma_thr = {hi:.3e} for alpha = {alpha_fa}"
            )));
        }
    }

    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let p = pfa_with(mid, gamma_g, n0, ev)?;
        if (p - alpha_fa).abs() <= 0.5 * PFA_TOL {
            return Ok(mid);
        }
        if p > alpha_fa {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            let p = pfa_with(mid, gamma_g, n0, ev)?;
            if (p - alpha_fa).abs() <= PFA_TOL {
                return Ok(mid);
            }
            return Err(Error::NoConvergence(format!(
                "bisection resolved the bracket but |pfa - {alpha_fa}| = {:.3e} > {PFA_TOL}",
                (p - alpha_fa).abs()
            )));
        }
    }
    Err(Error::NoConvergence(
        "threshold bisection exceeded the iteration cap".into(),
    ))
}

struct SignalGeometry {
    mu2: f64,
    diffuse: f64,
    p_los: f64,
}

fn signal_geometry(r0: f64, cfg: &NetworkConfig, env: &EnvironmentProfile) -> SignalGeometry {
    let k = amplitude_constant(cfg.f_c);
    let d2 = r0 * r0 + cfg.h * cfg.h;
    let s = k * k * cfg.rho * cfg.rho * cfg.p_d / d2;
    SignalGeometry {
        mu2: s / env.eta_los,
        diffuse: s / (2.0 * env.eta_nlos),
        p_los: los_probability(r0, cfg.h, env),
    }
}

fn pd_kernel(geo: &SignalGeometry, gamma_thr: f64, gamma_g: f64, half_n0: f64, v: f64) -> f64 {
    let s1 = geo.diffuse + v * gamma_g + half_n0;
    if s1 <= 0.0 {
        return if gamma_thr > 0.0 { 0.0 } else { 1.0 };
    }
    let y = gamma_thr / s1;
    if !y.is_finite() {
        return 0.0; // threshold astronomically above the conditional scale
    }
    let nlos = (-0.5 * y).exp();
    let los = marcum_q1((geo.mu2 / s1).sqrt(), y.sqrt());
    geo.p_los * los + (1.0 - geo.p_los) * nlos
}

/// Detection probability of the sensor at ground distance `r0`.
pub fn pd_single(
    r0: f64,
    gamma_thr: f64,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    model: &InterferenceModel,
    method: &EvalMethod,
) -> Result<f64> {
    validate_threshold(gamma_thr)?;
    cfg.validate()?;
    env.validate()?;
    if r0 < 0.0 {
        return Err(Error::invalid("r0", "distance must be nonnegative"));
    }
    let ev = VExpectation::new(model, method)?;
    pd_single_with(r0, gamma_thr, cfg, env, model.gamma_g, &ev)
}

fn pd_single_with(
    r0: f64,
    gamma_thr: f64,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    gamma_g: f64,
    ev: &VExpectation,
) -> Result<f64> {
    let geo = signal_geometry(r0, cfg, env);
    let half_n0 = 0.5 * cfg.n0;
    let transition = layer_scale(gamma_g, gamma_thr + geo.diffuse + half_n0);
    ev.expect(transition, |v| {
        pd_kernel(&geo, gamma_thr, gamma_g, half_n0, v)
    })
    .map(|p| p.clamp(0.0, 1.0))
}

/// Detection probability conditioned on the propagation state (true = LOS);
/// `pd_single` is the `p_los`-weighted mixture of the two states.
pub fn pd_single_given_state(
    r0: f64,
    gamma_thr: f64,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    model: &InterferenceModel,
    method: &EvalMethod,
    los: bool,
) -> Result<f64> {
    validate_threshold(gamma_thr)?;
    cfg.validate()?;
    env.validate()?;
    let ev = VExpectation::new(model, method)?;
    let geo = signal_geometry(r0, cfg, env);
    let half_n0 = 0.5 * cfg.n0;
    let gg = model.gamma_g;
    let transition = layer_scale(gg, gamma_thr + geo.diffuse + half_n0);
    ev.expect(transition, |v| {
        let s1 = geo.diffuse + v * gg + half_n0;
        if s1 <= 0.0 {
            return if gamma_thr > 0.0 { 0.0 } else { 1.0 };
        }
        let y = gamma_thr / s1;
        if !y.is_finite() {
            return 0.0;
        }
        if los {
            marcum_q1((geo.mu2 / s1).sqrt(), y.sqrt())
        } else {
            (-0.5 * y).exp()
        }
    })
    .map(|p| p.clamp(0.0, 1.0))
}

/// Integrate `f(r0)` against the nearest-sensor distance density,
/// truncating where the remaining tail mass drops below 1e-10.
pub fn average_over_nearest_distance<F: Fn(f64) -> Result<f64>>(
    lambda: f64,
    epsabs: f64,
    epsrel: f64,
    f: F,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", "density must be positive"));
    }
    let r_hi = ((1e10f64).ln() / (std::f64::consts::PI * lambda)).sqrt();
    let inner_err = std::cell::RefCell::new(None);
    let q = quad::integrate(
        |r0| {
            if inner_err.borrow().is_some() {
                return 0.0;
            }
            let w = nearest_neighbor_pdf(r0, lambda).unwrap_or(0.0);
            if w == 0.0 {
                return 0.0;
            }
            match f(r0) {
                Ok(v) => w * v,
                Err(e) => {
                    *inner_err.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        0.0,
        r_hi,
        epsabs,
        epsrel,
    )?;
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    Ok(q.value)
}

const PDAVG_EPSABS: f64 = 1e-6;
const PDAVG_EPSREL: f64 = 1e-6;

/// Network-average detection probability: `pd_single` integrated against
/// the nearest-sensor distance law. Absolute error well under 1e-4.
pub fn pd_avg(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    model: &InterferenceModel,
    gamma_thr: f64,
    method: &EvalMethod,
) -> Result<f64> {
    validate_threshold(gamma_thr)?;
    cfg.validate()?;
    env.validate()?;
    if !(cfg.lambda > 0.0) {
        return Err(Error::invalid(
            "lambda",
            "network average needs a positive sensor density",
        ));
    }
    let ev = VExpectation::new(model, method)?;
    let gg = model.gamma_g;
    average_over_nearest_distance(cfg.lambda, PDAVG_EPSABS, PDAVG_EPSREL, |r0| {
        pd_single_with(r0, gamma_thr, cfg, env, gg, &ev)
    })
    .map(|p| p.clamp(0.0, 1.0))
}

/// ROC sweep over a strictly increasing false-alarm grid: solve the
/// threshold for each target, then evaluate detection per `mode`.
pub fn roc_curve(
    mode: RocMode,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    model: &InterferenceModel,
    alpha_fa_grid: &[f64],
    method: &EvalMethod,
) -> Result<RocOutcome> {
    if alpha_fa_grid.is_empty() {
        return Err(Error::invalid("alpha_fa_grid", "grid must not be empty"));
    }
    for w in alpha_fa_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(
                "alpha_fa_grid",
                "grid must be strictly increasing",
            ));
        }
    }
    if !alpha_fa_grid.iter().all(|a| *a > 0.0 && *a < 1.0) {
        return Err(Error::invalid("alpha_fa_grid", "targets must be in (0, 1)"));
    }
    cfg.validate()?;
    env.validate()?;
    if let RocMode::Single { r0 } = mode {
        if r0 < 0.0 {
            return Err(Error::invalid("r0", "distance must be nonnegative"));
        }
    }

    let ev = VExpectation::new(model, method)?;
    let gg = model.gamma_g;
    let mut points = Vec::with_capacity(alpha_fa_grid.len());
    let mut failures = Vec::new();
    for &alpha in alpha_fa_grid {
        let point = solve_threshold_with(alpha, gg, cfg.n0, &ev).and_then(|gamma_thr| {
            let p_d = match mode {
                RocMode::Single { r0 } => {
                    pd_single_with(r0, gamma_thr, cfg, env, gg, &ev)?
                }
                RocMode::NetworkAverage => {
                    average_over_nearest_distance(cfg.lambda, PDAVG_EPSABS, PDAVG_EPSREL, |r0| {
                        pd_single_with(r0, gamma_thr, cfg, env, gg, &ev)
                    })?
                    .clamp(0.0, 1.0)
                }
            };
            Ok(DetectorPoint {
                gamma_thr,
                p_fa: alpha,
                p_d,
            })
        });
        match point {
            Ok(p) => points.push(p),
            Err(e) => failures.push((alpha, e)),
        }
    }
    Ok(RocOutcome { points, failures })
}
