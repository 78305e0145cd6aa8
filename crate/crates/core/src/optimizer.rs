//! Critical sensor density search.
//!
//! Densifying the network shortens the nearest-sensor distance, which helps
//! detection, and simultaneously raises the aggregate interference
//! dispersion, which hurts it. The constrained problem "maximize pd_avg at
//! a fixed false-alarm rate" is reduced to a one-dimensional scan by
//! eliminating the constraint per candidate density: the threshold is
//! re-solved at every lambda so the false-alarm target holds exactly along
//! the whole trace.

use rayon::prelude::*;

use crate::channel::{build_interference_model, InterferenceModel, NetworkConfig};
use crate::detector::{pd_avg, solve_threshold, EvalMethod};
use crate::geometry::EnvironmentProfile;
use crate::{Error, Result};

/// One objective evaluation along the search.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub lambda: f64,
    pub gamma_thr: f64,
    pub pd_avg: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub lambda_c: f64,
    pub pd_avg_max: f64,
    pub gamma_thr_at_opt: f64,
    /// Every evaluation made: the coarse grid first, then the refinement.
    pub trace: Vec<TracePoint>,
    /// Grid cell that brackets the maximum (the full range when the
    /// maximum sits on a boundary or the objective is flat).
    pub bracket: (f64, f64),
    /// The grid argmax hit an endpoint of `lambda_range`: no interior
    /// optimum exists in the searched range.
    pub boundary_maximum: bool,
    /// The objective is constant over the grid to within 1e-9; `lambda_c`
    /// then reports the low edge (the cheapest density attaining the
    /// common value).
    pub degenerate_flat: bool,
}

const GRID_POINTS: usize = 25;
/// Spread below which the objective is indistinguishable from constant:
/// each point carries threshold-solve residual (1e-6 in false-alarm terms)
/// plus the pd_avg quadrature budget.
const FLAT_SPREAD: f64 = 1e-5;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn critical_density(
    alpha_fa: f64,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    lambda_range: (f64, f64),
    rel_tol: f64,
    method: &EvalMethod,
) -> Result<OptimizationResult> {
    critical_density_with_model(
        alpha_fa,
        cfg,
        env,
        lambda_range,
        rel_tol,
        method,
        build_interference_model,
    )
}

/// Same search with a caller-supplied interference model builder (the
/// default derives the model from the network and environment at each
/// candidate density).
pub fn critical_density_with_model<B>(
    alpha_fa: f64,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    (lo, hi): (f64, f64),
    rel_tol: f64,
    method: &EvalMethod,
    build: B,
) -> Result<OptimizationResult>
where
    B: Fn(&NetworkConfig, &EnvironmentProfile) -> Result<InterferenceModel> + Sync,
{
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::invalid("lambda_range", "need 0 < lo < hi"));
    }
    if !(alpha_fa > 0.0 && alpha_fa < 1.0) {
        return Err(Error::invalid("alpha_fa", "target must be in (0, 1)"));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::invalid("rel_tol", "tolerance must be in (0, 1)"));
    }
    cfg.validate()?;
    env.validate()?;

    let objective = |lambda: f64| -> Result<TracePoint> {
        let cfg_l = cfg.with_lambda(lambda);
        let model = build(&cfg_l, env)?;
        let gamma_thr = solve_threshold(alpha_fa, &model, cfg_l.n0, method)?;
        let pd = pd_avg(&cfg_l, env, &model, gamma_thr, method)?;
        Ok(TracePoint {
            lambda,
            gamma_thr,
            pd_avg: pd,
        })
    };

    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            // Pin the endpoints so boundary detection compares exactly.
            match i {
                0 => lo,
                i if i == GRID_POINTS - 1 => hi,
                i => (ln_lo + step * i as f64).exp(),
            }
        })
        .collect();
    let mut trace: Vec<TracePoint> = grid
        .par_iter()
        .map(|&l| objective(l))
        .collect::<Result<Vec<_>>>()?;

    let spread = {
        let max = trace.iter().map(|t| t.pd_avg).fold(f64::MIN, f64::max);
        let min = trace.iter().map(|t| t.pd_avg).fold(f64::MAX, f64::min);
        max - min
    };
    if spread < FLAT_SPREAD {
        let low = trace[0];
        return Ok(OptimizationResult {
            lambda_c: low.lambda,
            pd_avg_max: low.pd_avg,
            gamma_thr_at_opt: low.gamma_thr,
            trace,
            bracket: (lo, hi),
            boundary_maximum: false,
            degenerate_flat: true,
        });
    }

    let best_idx = trace
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.pd_avg.total_cmp(&b.1.pd_avg))
        .map(|(i, _)| i)
        .expect("grid is nonempty");

    if best_idx == 0 || best_idx == GRID_POINTS - 1 {
        let best = trace[best_idx];
        let bracket = if best_idx == 0 {
            (grid[0], grid[1])
        } else {
            (grid[GRID_POINTS - 2], grid[GRID_POINTS - 1])
        };
        return Ok(OptimizationResult {
            lambda_c: best.lambda,
            pd_avg_max: best.pd_avg,
            gamma_thr_at_opt: best.gamma_thr,
            trace,
            bracket,
            boundary_maximum: true,
            degenerate_flat: false,
        });
    }

    // Golden-section refinement in log-density on the bracketing triple.
    let bracket = (grid[best_idx - 1], grid[best_idx + 1]);
    let mut a = bracket.0.ln();
    let mut b = bracket.1.ln();
    let tol = (1.0 + rel_tol).ln();
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = objective(x1.exp())?;
    let mut f2 = objective(x2.exp())?;
    trace.push(f1);
    trace.push(f2);
    let mut iterations = 0;
    while b - a > tol && iterations < 200 {
        if f1.pd_avg >= f2.pd_avg {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = objective(x1.exp())?;
            trace.push(f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = objective(x2.exp())?;
            trace.push(f2);
        }
        iterations += 1;
    }

    // Report the best point actually evaluated, so a refinement that
    // wandered inside a non-unimodal bracket can never lose to the grid.
    let best = trace
        .iter()
        .max_by(|a, b| a.pd_avg.total_cmp(&b.pd_avg))
        .copied()
        .expect("trace is nonempty");
    Ok(OptimizationResult {
        lambda_c: best.lambda,
        pd_avg_max: best.pd_avg,
        gamma_thr_at_opt: best.gamma_thr,
        trace,
        bracket,
        boundary_maximum: false,
        degenerate_flat: false,
    })
}
