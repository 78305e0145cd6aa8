//! Signal-level Monte Carlo simulator.
//!
//! Deliberately independent of the analytic chain: trials draw an
//! interferer field, per-node fading, phases and shadowing, the drone's
//! multipath, and receiver noise, then form the complex correlator output
//! R = Z + Y + N directly and threshold its squared magnitude. Agreement
//! with the stable-law detector is therefore an end-to-end check of the
//! model, not a tautology.
//!
//! Trials are keyed by (seed, trial index) through dedicated RNG streams,
//! so results are identical regardless of execution order or thread count,
//! and the null and alternative observations of a trial share the same
//! interference and noise realization (paired common random numbers).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{amplitude_constant, NetworkConfig, RhoMode};
use crate::detector::{marcum_q1, DetectorPoint};
use crate::distributions::{
    sample_lognormal_amp, sample_rayleigh_fading, sample_uniform_corr, sample_uniform_phase,
};
use crate::geometry::{
    default_truncation_radius, link_geometry, los_probability, sample_ppp_disk,
    EnvironmentProfile, PointField,
};
use crate::rng::RngStream;
use crate::stats::wilson_interval;
use crate::{Error, Result};

/// Complex correlator output in amplitude units (square root of watts).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IQSample {
    pub re: f64,
    pub im: f64,
}

impl IQSample {
    pub fn rss(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    fn add(self, other: IQSample) -> IQSample {
        IQSample {
            re: self.re + other.re,
            im: self.im + other.im,
        }
    }
}

/// Number of scattered rays used when a finite multipath sum is requested
/// without an explicit count.
pub const DEFAULT_MULTIPATH_COMPONENTS: u32 = 64;

/// How the drone's diffuse (scattered) component is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multipath {
    /// Dense-scatterer Gaussian limit of the ray sum.
    ExactLimit,
    /// Explicit sum of M equal-power Rayleigh rays.
    Finite(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypothesis {
    Null,
    Alternative { r0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub n_trials: usize,
    pub multipath: Multipath,
    /// Interferer field truncation radius; `None` uses the density default.
    pub r_max: Option<f64>,
    pub hypothesis: Hypothesis,
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "need at least one trial"));
        }
        if let Multipath::Finite(0) = self.multipath {
            return Err(Error::invalid("multipath", "finite mode needs M >= 1"));
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::invalid("r_max", "radius must be positive and finite"));
            }
        }
        if let Hypothesis::Alternative { r0 } = self.hypothesis {
            if !(r0 >= 0.0 && r0.is_finite()) {
                return Err(Error::invalid("r0", "distance must be nonnegative"));
            }
        }
        Ok(())
    }
}

fn sample_noise(n0: f64, rng: &mut RngStream) -> IQSample {
    let sigma = (0.5 * n0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    IQSample {
        re: sigma * re,
        im: sigma * im,
    }
}

/// Sum the field's per-node contributions
/// `k alpha_i rho_i e^{sigma_s G_i} sqrt(P_u) e^{j(theta_i + phi_i)} / R_i^{b_I}`.
pub fn aggregate_interference(
    field: &PointField,
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    rng: &mut RngStream,
) -> IQSample {
    let k = amplitude_constant(cfg.f_c);
    let b_i = env.b_i();
    let sqrt_pu = cfg.p_u.sqrt();
    let mut out = IQSample::default();
    for p in field.points() {
        let r = p.radius();
        if r == 0.0 {
            continue; // coincident node: measure-zero event, no finite loss
        }
        let alpha = sample_rayleigh_fading(rng);
        let rho = match cfg.rho_mode {
            RhoMode::FixedOne => 1.0,
            RhoMode::Uniform => sample_uniform_corr(rng),
        };
        let shadow = sample_lognormal_amp(env.sigma_s, rng);
        let phase = sample_uniform_phase(rng) + sample_uniform_phase(rng);
        let a = k * alpha * rho * shadow * sqrt_pu / r.powf(b_i);
        out.re += a * phase.cos();
        out.im += a * phase.sin();
    }
    out
}

/// One interference draw: a fresh field in a disk of the trial's truncation
/// radius, aggregated node by node. Empty when the density is zero.
pub fn simulate_interference(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    trial: &TrialConfig,
    rng: &mut RngStream,
) -> IQSample {
    if cfg.lambda == 0.0 {
        return IQSample::default();
    }
    let r_max = trial
        .r_max
        .unwrap_or_else(|| default_truncation_radius(cfg.lambda));
    let field = sample_ppp_disk(cfg.lambda, r_max, rng)
        .expect("validated density and radius");
    aggregate_interference(&field, cfg, env, rng)
}

/// One drone-signal draw at ground distance `r0`: the propagation state is
/// Bernoulli in the LOS probability; the diffuse part is either the
/// Gaussian limit or a finite ray sum, and the LOS state adds the
/// deterministic specular term at the drawn carrier phase.
pub fn simulate_drone_signal(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    r0: f64,
    trial: &TrialConfig,
    rng: &mut RngStream,
) -> IQSample {
    let k = amplitude_constant(cfg.f_c);
    let (d, _) = link_geometry(r0, cfg.h);
    let p_los = los_probability(r0, cfg.h, env);
    let is_los = rng.gen::<f64>() < p_los;
    let theta_d = sample_uniform_phase(rng);
    let amp = k * cfg.rho * cfg.p_d.sqrt() / d;

    let mut z = match trial.multipath {
        Multipath::ExactLimit => {
            let sigma = amp / (2.0 * env.eta_nlos).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            IQSample {
                re: sigma * re,
                im: sigma * im,
            }
        }
        Multipath::Finite(m) => {
            let scale = amp / ((m as f64) * env.eta_nlos).sqrt();
            let mut sum = IQSample::default();
            for _ in 0..m {
                let a = scale * sample_rayleigh_fading(rng);
                let phi = sample_uniform_phase(rng) + theta_d;
                sum.re += a * phi.cos();
                sum.im += a * phi.sin();
            }
            sum
        }
    };
    if is_los {
        let los = amp / env.eta_los.sqrt();
        z.re += los * theta_d.cos();
        z.im += los * theta_d.sin();
    }
    z
}

/// Empirical operating points over a threshold grid.
#[derive(Debug, Clone)]
pub struct EmpiricalRoc {
    pub points: Vec<DetectorPoint>,
    pub n_trials: usize,
    /// Set when the trial count leaves the binomial standard error at
    /// p = 0.1 above 0.003.
    pub warning: Option<String>,
}

const TRIALS_FOR_TARGET_SE: usize = 10_000;

fn paired_trial(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    trial: &TrialConfig,
    r0: f64,
    index: usize,
) -> (f64, f64) {
    let base = 3 * index as u64;
    let mut field_rng = RngStream::new(trial.seed, base);
    let mut noise_rng = RngStream::new(trial.seed, base + 1);
    let mut drone_rng = RngStream::new(trial.seed, base + 2);
    let y = simulate_interference(cfg, env, trial, &mut field_rng);
    let n = sample_noise(cfg.n0, &mut noise_rng);
    let z = simulate_drone_signal(cfg, env, r0, trial, &mut drone_rng);
    let null_rss = y.add(n).rss();
    let alt_rss = y.add(z).add(n).rss();
    (null_rss, alt_rss)
}

/// The paired (null, alternative) RSS of one trial, keyed by `index`
/// exactly as [`empirical_roc`] keys its trials: both hypotheses share the
/// trial's interference field and noise draw. Exposed so raw observations
/// can be dumped for external analysis.
pub fn paired_rss(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    trial: &TrialConfig,
    index: usize,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    env.validate()?;
    trial.validate()?;
    let Hypothesis::Alternative { r0 } = trial.hypothesis else {
        return Err(Error::invalid(
            "hypothesis",
            "paired trials need the alternative hypothesis to place the drone",
        ));
    };
    Ok(paired_trial(cfg, env, trial, r0, index))
}

/// Measure false-alarm and detection rates at each threshold. The trial
/// hypothesis must be the alternative (its `r0` places the drone); the null
/// side of each pair reuses the same interference and noise draw.
pub fn empirical_roc(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    trial: &TrialConfig,
    threshold_grid: &[f64],
) -> Result<EmpiricalRoc> {
    cfg.validate()?;
    env.validate()?;
    trial.validate()?;
    let r0 = match trial.hypothesis {
        Hypothesis::Alternative { r0 } => r0,
        Hypothesis::Null => {
            return Err(Error::invalid(
                "hypothesis",
                "the ROC needs the alternative hypothesis to place the drone",
            ))
        }
    };
    if threshold_grid.is_empty() {
        return Err(Error::invalid("threshold_grid", "grid must not be empty"));
    }
    for w in threshold_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(
                "threshold_grid",
                "grid must be strictly increasing",
            ));
        }
    }
    if !threshold_grid.iter().all(|g| *g >= 0.0 && g.is_finite()) {
        return Err(Error::invalid(
            "threshold_grid",
            "thresholds must be finite and nonnegative",
        ));
    }

    let rss: Vec<(f64, f64)> = (0..trial.n_trials)
        .into_par_iter()
        .map(|i| paired_trial(cfg, env, trial, r0, i))
        .collect();
    let mut null_sorted: Vec<f64> = rss.iter().map(|p| p.0).collect();
    let mut alt_sorted: Vec<f64> = rss.iter().map(|p| p.1).collect();
    null_sorted.sort_by(f64::total_cmp);
    alt_sorted.sort_by(f64::total_cmp);

    let n = trial.n_trials as f64;
    let exceed = |sorted: &[f64], thr: f64| {
        let first_above = sorted.partition_point(|&x| x <= thr);
        (sorted.len() - first_above) as f64 / n
    };
    let points = threshold_grid
        .iter()
        .map(|&gamma_thr| DetectorPoint {
            gamma_thr,
            p_fa: exceed(&null_sorted, gamma_thr),
            p_d: exceed(&alt_sorted, gamma_thr),
        })
        .collect();
    let warning = (trial.n_trials < TRIALS_FOR_TARGET_SE).then(|| {
        format!(
            "{} trials leave the binomial standard error at p = 0.1 above 0.003 \
             (need at least {TRIALS_FOR_TARGET_SE})",
            trial.n_trials
        )
    });
    Ok(EmpiricalRoc {
        points,
        n_trials: trial.n_trials,
        warning,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PointComparison {
    pub gamma_thr: f64,
    pub analytic_p_fa: f64,
    pub empirical_p_fa: f64,
    pub p_fa_interval: (f64, f64),
    pub analytic_p_d: f64,
    pub empirical_p_d: f64,
    pub p_d_interval: (f64, f64),
    pub delta_p_fa: f64,
    pub delta_p_d: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub points: Vec<PointComparison>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// Compare an analytic sweep against an empirical one on the same
/// threshold grid: per-point deltas, 95% Wilson intervals for the
/// empirical rates, and a pass verdict at the given tolerance.
pub fn validation_report(
    analytic: &[DetectorPoint],
    empirical: &EmpiricalRoc,
    tolerance: f64,
) -> Result<ValidationReport> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid("tolerance", "tolerance must be positive"));
    }
    if analytic.len() != empirical.points.len() {
        return Err(Error::GridMismatch(format!(
            "analytic sweep has {} points, empirical has {}",
            analytic.len(),
            empirical.points.len()
        )));
    }
    let n = empirical.n_trials;
    let z95 = 1.959_963_984_540_054;
    let mut points = Vec::with_capacity(analytic.len());
    let mut max_deviation = 0.0f64;
    for (a, e) in analytic.iter().zip(&empirical.points) {
        let scale = a.gamma_thr.abs().max(e.gamma_thr.abs()).max(f64::MIN_POSITIVE);
        if (a.gamma_thr - e.gamma_thr).abs() > 1e-9 * scale {
            return Err(Error::GridMismatch(format!(
                "threshold grids diverge: {:.6e} vs {:.6e}",
                a.gamma_thr, e.gamma_thr
            )));
        }
        let count = |p: f64| (p * n as f64).round() as u64;
        let delta_p_fa = (a.p_fa - e.p_fa).abs();
        let delta_p_d = (a.p_d - e.p_d).abs();
        max_deviation = max_deviation.max(delta_p_fa).max(delta_p_d);
        points.push(PointComparison {
            gamma_thr: a.gamma_thr,
            analytic_p_fa: a.p_fa,
            empirical_p_fa: e.p_fa,
            p_fa_interval: wilson_interval(count(e.p_fa), n as u64, z95)?,
            analytic_p_d: a.p_d,
            empirical_p_d: e.p_d,
            p_d_interval: wilson_interval(count(e.p_d), n as u64, z95)?,
            delta_p_fa,
            delta_p_d,
            within_tolerance: delta_p_fa <= tolerance && delta_p_d <= tolerance,
        });
    }
    let mut warnings = Vec::new();
    if let Some(w) = &empirical.warning {
        warnings.push(w.clone());
    }
    Ok(ValidationReport {
        max_deviation,
        tolerance,
        pass: points.iter().all(|p| p.within_tolerance),
        points,
        warnings,
    })
}

/// Mean aggregate power lost by truncating the interferer field at
/// `r_max`: the expectation of the sum of squared amplitudes beyond the
/// disk. Used to size truncation radii.
pub fn truncation_power_bound(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    r_max: f64,
) -> f64 {
    let k = amplitude_constant(cfg.f_c);
    let b_i = env.b_i();
    if b_i <= 1.0 {
        return f64::INFINITY;
    }
    let rho_sq = match cfg.rho_mode {
        RhoMode::FixedOne => cfg.rho * cfg.rho,
        RhoMode::Uniform => 1.0 / 3.0,
    };
    let shadow_sq = (2.0 * env.sigma_s * env.sigma_s).exp();
    2.0 * std::f64::consts::PI * cfg.lambda * k * k * cfg.p_u * rho_sq * shadow_sq
        * r_max.powf(2.0 - 2.0 * b_i)
        / (2.0 * b_i - 2.0)
}

/// An interference realization with node positions, correlations and
/// shadowing frozen; only fading, phases and noise stay random. Conditioned
/// on a frozen field the null RSS is exactly exponential and the LOS
/// alternative RSS is exactly non-central chi-squared, which makes the
/// simulator testable distribution-by-distribution rather than only through
/// averaged rates.
#[derive(Debug, Clone)]
pub struct FrozenField {
    amps: Vec<f64>,
    n0: f64,
}

impl FrozenField {
    pub fn freeze(
        field: &PointField,
        cfg: &NetworkConfig,
        env: &EnvironmentProfile,
        rng: &mut RngStream,
    ) -> FrozenField {
        let k = amplitude_constant(cfg.f_c);
        let b_i = env.b_i();
        let sqrt_pu = cfg.p_u.sqrt();
        let amps = field
            .points()
            .iter()
            .filter(|p| p.radius() > 0.0)
            .map(|p| {
                let rho = match cfg.rho_mode {
                    RhoMode::FixedOne => 1.0,
                    RhoMode::Uniform => sample_uniform_corr(rng),
                };
                let shadow = sample_lognormal_amp(env.sigma_s, rng);
                k * rho * shadow * sqrt_pu / p.radius().powf(b_i)
            })
            .collect();
        FrozenField { amps, n0: cfg.n0 }
    }

    /// Mean null RSS given this realization: sum of squared amplitudes
    /// plus the noise power (equals twice the conditional per-component
    /// variance).
    pub fn conditional_power(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum::<f64>() + self.n0
    }

    fn sample_interference(&self, rng: &mut RngStream) -> IQSample {
        let mut out = IQSample::default();
        for &a in &self.amps {
            let amp = a * sample_rayleigh_fading(rng);
            let phase = sample_uniform_phase(rng);
            out.re += amp * phase.cos();
            out.im += amp * phase.sin();
        }
        out
    }

    pub fn sample_null_rss(&self, rng: &mut RngStream) -> f64 {
        let y = self.sample_interference(rng);
        let n = sample_noise(self.n0, rng);
        y.add(n).rss()
    }

    pub fn null_rss_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        1.0 - (-x / self.conditional_power()).exp()
    }

    /// Alternative-hypothesis RSS draw with the LOS state forced, diffuse
    /// part in the Gaussian limit.
    pub fn sample_los_rss(
        &self,
        cfg: &NetworkConfig,
        env: &EnvironmentProfile,
        r0: f64,
        rng: &mut RngStream,
    ) -> f64 {
        let k = amplitude_constant(cfg.f_c);
        let (d, _) = link_geometry(r0, cfg.h);
        let amp = k * cfg.rho * cfg.p_d.sqrt() / d;
        let theta_d = sample_uniform_phase(rng);
        let sigma = amp / (2.0 * env.eta_nlos).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let los = amp / env.eta_los.sqrt();
        let z = IQSample {
            re: los * theta_d.cos() + sigma * re,
            im: los * theta_d.sin() + sigma * im,
        };
        let y = self.sample_interference(rng);
        let n = sample_noise(self.n0, rng);
        z.add(y).add(n).rss()
    }

    /// Exact conditional law of `sample_los_rss`.
    pub fn los_rss_cdf(
        &self,
        cfg: &NetworkConfig,
        env: &EnvironmentProfile,
        r0: f64,
        x: f64,
    ) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let k = amplitude_constant(cfg.f_c);
        let (d, _) = link_geometry(r0, cfg.h);
        let amp = k * cfg.rho * cfg.p_d.sqrt() / d;
        let mu = amp / env.eta_los.sqrt();
        let sigma1_sq =
            0.5 * self.conditional_power() + amp * amp / (2.0 * env.eta_nlos);
        let sigma1 = sigma1_sq.sqrt();
        1.0 - marcum_q1(mu / sigma1, x.sqrt() / sigma1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_test_one_sample;

    fn forced_nlos() -> EnvironmentProfile {
        let mut env = EnvironmentProfile::suburban();
        env.a = 1e9; // LOS weight collapses to zero at any geometry
        env
    }

    fn forced_los() -> EnvironmentProfile {
        let mut env = EnvironmentProfile::suburban();
        env.a = 1e-12; // LOS weight is 1 - O(1e-12) at any geometry
        env
    }

    fn base_trial(hypothesis: Hypothesis) -> TrialConfig {
        TrialConfig {
            n_trials: 1,
            multipath: Multipath::ExactLimit,
            r_max: None,
            hypothesis,
            seed: 1234,
        }
    }

    #[test]
    fn trial_config_validation() {
        let mut t = base_trial(Hypothesis::Null);
        assert!(t.validate().is_ok());
        t.n_trials = 0;
        assert!(t.validate().is_err());
        t.n_trials = 10;
        t.multipath = Multipath::Finite(0);
        assert!(t.validate().is_err());
        t.multipath = Multipath::Finite(8);
        t.r_max = Some(-1.0);
        assert!(t.validate().is_err());
    }

    #[test]
    fn empty_network_has_no_interference() {
        let cfg = NetworkConfig::baseline().with_lambda(0.0);
        let env = EnvironmentProfile::suburban();
        let trial = base_trial(Hypothesis::Null);
        let mut rng = RngStream::new(1, 0);
        let y = simulate_interference(&cfg, &env, &trial, &mut rng);
        assert_eq!(y, IQSample::default());
    }

    #[test]
    fn interference_is_reproducible_and_circular() {
        let cfg = NetworkConfig::baseline().with_lambda(1e-4);
        let mut env = EnvironmentProfile::suburban();
        env.gamma_i = 3.0; // mean exists for the self-normalized bound
        let mut trial = base_trial(Hypothesis::Null);
        trial.r_max = Some(500.0);

        let mut rng = RngStream::new(99, 0);
        let a = simulate_interference(&cfg, &env, &trial, &mut rng);
        let mut rng = RngStream::new(99, 0);
        let b = simulate_interference(&cfg, &env, &trial, &mut rng);
        assert_eq!(a, b);

        let n = 20_000;
        let (mut sum_re, mut sum_im, mut sum_sq) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let mut rng = RngStream::new(7, i);
            let y = simulate_interference(&cfg, &env, &trial, &mut rng);
            sum_re += y.re;
            sum_im += y.im;
            sum_sq += y.rss();
        }
        let mean_re = sum_re / n as f64;
        let mean_im = sum_im / n as f64;
        let se = (sum_sq / n as f64 / n as f64).sqrt();
        assert!(mean_re.abs() < 4.0 * se, "re {mean_re:e} vs se {se:e}");
        assert!(mean_im.abs() < 4.0 * se, "im {mean_im:e} vs se {se:e}");
    }

    #[test]
    fn diffuse_variance_matches_gaussian_limit() {
        let cfg = NetworkConfig::baseline();
        let env = forced_nlos();
        let trial = base_trial(Hypothesis::Alternative { r0: 923.0 });
        let r0 = 923.0;
        let k = amplitude_constant(cfg.f_c);
        let d2 = r0 * r0 + cfg.h * cfg.h;
        let want = k * k * cfg.rho * cfg.rho * cfg.p_d / (2.0 * env.eta_nlos * d2);

        let n = 500_000;
        let mut rng = RngStream::new(11, 0);
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = simulate_drone_signal(&cfg, &env, r0, &trial, &mut rng);
            sum_sq += z.re * z.re;
        }
        let got = sum_sq / n as f64;
        assert!(
            (got - want).abs() < 0.01 * want,
            "variance {got:e} vs {want:e}"
        );
    }

    #[test]
    fn los_power_adds_the_specular_term() {
        let cfg = NetworkConfig::baseline();
        let env = forced_los();
        let trial = base_trial(Hypothesis::Alternative { r0: 923.0 });
        let r0 = 923.0;
        let k = amplitude_constant(cfg.f_c);
        let d2 = r0 * r0 + cfg.h * cfg.h;
        let s = k * k * cfg.rho * cfg.rho * cfg.p_d / d2;
        // E|Z|^2 = mu^2 + 2 sigma^2 for the Rician sum.
        let want = s / env.eta_los + s / env.eta_nlos;

        let n = 500_000;
        let mut rng = RngStream::new(12, 0);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += simulate_drone_signal(&cfg, &env, r0, &trial, &mut rng).rss();
        }
        let got = sum / n as f64;
        assert!((got - want).abs() < 0.01 * want, "power {got:e} vs {want:e}");
    }

    #[test]
    fn finite_ray_sum_approaches_the_limit() {
        let cfg = NetworkConfig::baseline();
        let env = forced_nlos();
        let r0 = 923.0;
        let n = 20_000;
        let draw = |multipath: Multipath, seed: u64| -> Vec<f64> {
            let trial = TrialConfig {
                multipath,
                ..base_trial(Hypothesis::Alternative { r0 })
            };
            let mut rng = RngStream::new(seed, 0);
            (0..n)
                .map(|_| simulate_drone_signal(&cfg, &env, r0, &trial, &mut rng).rss())
                .collect()
        };
        let exact = draw(Multipath::ExactLimit, 21);
        let finite = draw(Multipath::Finite(DEFAULT_MULTIPATH_COMPONENTS), 22);
        let out = crate::stats::ks_test_two_sample(&exact, &finite, 0.01).unwrap();
        assert!(out.pass, "KS statistic {}", out.statistic);
    }

    #[test]
    fn zero_threshold_saturates_the_roc() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let mut trial = base_trial(Hypothesis::Alternative { r0: 923.0 });
        trial.n_trials = 200;
        trial.r_max = Some(1000.0);
        let roc = empirical_roc(&cfg, &env, &trial, &[0.0, 1e-12]).unwrap();
        assert_eq!(roc.points[0].p_fa, 1.0);
        assert_eq!(roc.points[0].p_d, 1.0);
        assert!(roc.warning.is_some());
    }

    #[test]
    fn roc_requires_the_alternative() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let mut trial = base_trial(Hypothesis::Null);
        trial.n_trials = 10;
        assert!(empirical_roc(&cfg, &env, &trial, &[1e-17]).is_err());
        let ok = base_trial(Hypothesis::Alternative { r0: 923.0 });
        assert!(empirical_roc(&cfg, &env, &ok, &[]).is_err());
        assert!(empirical_roc(&cfg, &env, &ok, &[1e-17, 1e-17]).is_err());
    }

    #[test]
    fn empirical_roc_is_reproducible() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let mut trial = base_trial(Hypothesis::Alternative { r0: 923.0 });
        trial.n_trials = 500;
        trial.r_max = Some(2000.0);
        let grid = [1e-18, 1e-17, 1e-16];
        let a = empirical_roc(&cfg, &env, &trial, &grid).unwrap();
        let b = empirical_roc(&cfg, &env, &trial, &grid).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.p_fa.to_bits(), y.p_fa.to_bits());
            assert_eq!(x.p_d.to_bits(), y.p_d.to_bits());
        }
    }

    #[test]
    fn detection_dominates_false_alarm() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let mut trial = base_trial(Hypothesis::Alternative { r0: 300.0 });
        trial.n_trials = 4000;
        let grid = [1e-18, 1e-17, 1e-16, 1e-15];
        let roc = empirical_roc(&cfg, &env, &trial, &grid).unwrap();
        for p in &roc.points {
            assert!(
                p.p_d >= p.p_fa - 0.02,
                "p_d {} below p_fa {} at {:.2e}",
                p.p_d,
                p.p_fa,
                p.gamma_thr
            );
        }
    }

    #[test]
    fn validation_report_contract() {
        let analytic = vec![
            DetectorPoint {
                gamma_thr: 1e-17,
                p_fa: 0.5,
                p_d: 0.9,
            },
            DetectorPoint {
                gamma_thr: 2e-17,
                p_fa: 0.3,
                p_d: 0.8,
            },
        ];
        let empirical = EmpiricalRoc {
            points: analytic.clone(),
            n_trials: 50_000,
            warning: None,
        };
        let report = validation_report(&analytic, &empirical, 0.02).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_deviation, 0.0);

        let shifted = EmpiricalRoc {
            points: analytic
                .iter()
                .map(|p| DetectorPoint {
                    p_d: p.p_d - 0.05,
                    ..*p
                })
                .collect(),
            n_trials: 50_000,
            warning: None,
        };
        let report = validation_report(&analytic, &shifted, 0.02).unwrap();
        assert!(!report.pass);
        assert!(report.points.iter().all(|p| !p.within_tolerance));
        assert!((report.max_deviation - 0.05).abs() < 1e-12);

        let wrong_grid = EmpiricalRoc {
            points: vec![analytic[0]],
            n_trials: 50_000,
            warning: None,
        };
        assert!(validation_report(&analytic, &wrong_grid, 0.02).is_err());
    }

    #[test]
    fn truncation_bound_shrinks_with_radius() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let near = truncation_power_bound(&cfg, &env, 1000.0);
        let far = truncation_power_bound(&cfg, &env, 2000.0);
        assert!(far < near);
        // b_I = 2: quadrupling the radius divides the bound by 16.
        let quad = truncation_power_bound(&cfg, &env, 4000.0);
        assert!((near / quad - 16.0).abs() < 1e-9);
    }

    #[test]
    fn frozen_null_rss_is_exponential() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let mut rng = RngStream::new(31, 0);
        let field = sample_ppp_disk(cfg.lambda, 3000.0, &mut rng).unwrap();
        let frozen = FrozenField::freeze(&field, &cfg, &env, &mut rng);
        let draws: Vec<f64> = (0..5000).map(|_| frozen.sample_null_rss(&mut rng)).collect();
        let out = ks_test_one_sample(&draws, |x| frozen.null_rss_cdf(x), 0.01).unwrap();
        assert!(out.pass, "KS statistic {} > {}", out.statistic, out.critical);
    }

    #[test]
    fn frozen_los_rss_is_noncentral_chi_squared() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let r0 = 923.0;
        let mut rng = RngStream::new(32, 0);
        let field = sample_ppp_disk(cfg.lambda, 3000.0, &mut rng).unwrap();
        let frozen = FrozenField::freeze(&field, &cfg, &env, &mut rng);
        let draws: Vec<f64> = (0..5000)
            .map(|_| frozen.sample_los_rss(&cfg, &env, r0, &mut rng))
            .collect();
        let out =
            ks_test_one_sample(&draws, |x| frozen.los_rss_cdf(&cfg, &env, r0, x), 0.01).unwrap();
        assert!(out.pass, "KS statistic {} > {}", out.statistic, out.critical);
    }
}
