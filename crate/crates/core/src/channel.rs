//! Amplitude path-loss constants, the fractional moment of a single
//! interferer's baseband contribution, and the derived stable-law
//! parameters of the aggregate interference.
//!
//! Per interferer at ground distance R the probe sees amplitude
//! `k alpha rho e^{sigma_s G} sqrt(P_u) / R^{b_I}` with uniform phase, where
//! `k = c / (4 pi f_c)` and `b_I = gamma_I / 2`. Summed over a Poisson
//! field, each I/Q component converges to a symmetric alpha-stable law with
//! index `alpha_Y = 2/b_I` and dispersion
//! `gamma_Y = pi lambda C_{alpha}^{-1} E{|U|^{2/b_I}}`, which conditionally
//! decomposes as sqrt(V) times a circular Gaussian of dispersion
//! `gamma_G = 2 gamma_Y^{b_I}` with V a totally skewed stable mixing
//! variable S(1/b_I, 1, cos(pi/(2 b_I))).

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::geometry::EnvironmentProfile;
use crate::quad;
use crate::{distributions::StableParams, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default "negligible" one-sided noise density floor, in watts. Keeps the
/// null variance positive when interference is switched off; the exact-zero
/// case is handled by closed forms.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-17;

/// Interferer correlation-mark model: all rho_i = 1, or i.i.d. uniform
/// marks on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMode {
    FixedOne,
    Uniform,
}

/// Shadowing factor of the fractional moment. `Exact` is the log-normal
/// MGF value e^{2 sigma_s^2 / b_I^2}; `Compat` reproduces the exponent
/// e^{2 sigma_s^2 / b_I} that some tabulations use. The two coincide at
/// sigma_s = 0, which is where every validated configuration sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowingMoment {
    Exact,
    Compat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Sensor/interferer density, per m^2. Zero is the degenerate
    /// no-interferer network.
    pub lambda: f64,
    /// Interferer (UE) transmit power, watts.
    pub p_u: f64,
    /// Drone transmit power, watts. Zero degenerates the alternative
    /// hypothesis to the null.
    pub p_d: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// One-sided noise spectral density (watts); each I/Q component carries
    /// variance n0/2.
    pub n0: f64,
    /// Drone altitude, meters.
    pub h: f64,
    /// Probe correlation of the detector to the drone signal, in [0, 1].
    pub rho: f64,
    /// Interferer correlation-mark model.
    pub rho_mode: RhoMode,
}

impl NetworkConfig {
    /// Reference operating point used across the validation suite: 20 dBm
    /// transmit powers, 5.8 GHz carrier, 300 m altitude, density 1e-5,
    /// unit probe correlation, negligible noise floor.
    pub fn baseline() -> Self {
        NetworkConfig {
            lambda: 1e-5,
            p_u: 0.1,
            p_d: 0.1,
            f_c: 5.8e9,
            n0: DEFAULT_NOISE_FLOOR,
            h: 300.0,
            rho: 1.0,
            rho_mode: RhoMode::FixedOne,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "density must be finite and >= 0"));
        }
        if !(self.p_u >= 0.0 && self.p_d >= 0.0) {
            return Err(Error::invalid("p_u/p_d", "powers must be >= 0"));
        }
        if !(self.f_c > 0.0) {
            return Err(Error::invalid("f_c", "carrier frequency must be positive"));
        }
        if !(self.n0 >= 0.0) {
            return Err(Error::invalid("n0", "noise density must be >= 0"));
        }
        if !(self.h > 0.0) {
            return Err(Error::invalid("h", "altitude must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", "correlation must be in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        NetworkConfig { lambda, ..self.clone() }
    }
}

/// Free-space amplitude constant `k = c / (4 pi f_c)`.
pub fn amplitude_constant(f_c: f64) -> f64 {
    assert!(f_c > 0.0, "carrier frequency must be positive");
    SPEED_OF_LIGHT / (4.0 * PI * f_c)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Phase moment `xi(b_i) = E{|cos Theta|^{2/b_i}}`, Theta uniform on
/// [0, 2 pi), by adaptive quadrature (symmetry reduces it to a quarter
/// period). xi(2) = 2/pi exactly.
pub fn xi(b_i: f64) -> f64 {
    assert!(b_i > 0.0, "amplitude loss exponent must be positive");
    let p = 2.0 / b_i;
    let integral = quad::integrate(|t| t.cos().powf(p), 0.0, PI / 2.0, 1e-10, 1e-10)
        .expect("cosine-power quadrature converges on a finite smooth interval");
    integral.value * 2.0 / PI
}

/// Normalization constant of the single-interferer stable limit:
/// `C_alpha = (1 - alpha) / (Gamma(2 - alpha) cos(pi alpha / 2))`, with the
/// continuous limit 2/pi at alpha = 1.
pub fn c_alpha(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 2.0, "C_alpha defined on (0, 2)");
    if (alpha - 1.0).abs() < 1e-9 {
        return 2.0 / PI;
    }
    (1.0 - alpha) / (gamma(2.0 - alpha) * (PI * alpha / 2.0).cos())
}

/// Fractional moment `E{|U|^{2/b_I}}` of one interferer's baseband
/// component with the exact log-normal shadowing factor.
pub fn interference_moment(cfg: &NetworkConfig, env: &EnvironmentProfile) -> Result<f64> {
    interference_moment_with(cfg, env, ShadowingMoment::Exact)
}

/// As [`interference_moment`], selecting the shadowing-factor convention.
///
/// Factors: `k^{2/b_I}` (amplitude), `P_u^{1/b_I}`, `Gamma(1 + 1/b_I)`
/// (Rayleigh fading), `xi(b_I)` (phase), `b_I/(2 + b_I)` for uniform
/// correlation marks (1 for fixed marks), shadowing per `mode`.
pub fn interference_moment_with(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
    mode: ShadowingMoment,
) -> Result<f64> {
    cfg.validate()?;
    env.validate()?;
    let b = env.b_i();
    let k = amplitude_constant(cfg.f_c);
    let rho_factor = match cfg.rho_mode {
        RhoMode::FixedOne => 1.0,
        RhoMode::Uniform => b / (2.0 + b),
    };
    let shadow = match mode {
        ShadowingMoment::Exact => (2.0 * env.sigma_s * env.sigma_s / (b * b)).exp(),
        ShadowingMoment::Compat => (2.0 * env.sigma_s * env.sigma_s / b).exp(),
    };
    Ok(k.powf(2.0 / b) * cfg.p_u.powf(1.0 / b) * gamma(1.0 + 1.0 / b) * xi(b) * rho_factor * shadow)
}

/// Stable-law description of the aggregate interference at the probe.
///
/// `stable_y` holds the per-component law of the aggregate sum; for the
/// degenerate no-interference model its dispersion is 0 (a point mass at
/// zero, the weak limit), in which case consumers must branch on
/// `gamma_g == 0` instead of sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceModel {
    pub b_i: f64,
    /// Amplitude loss constant `k_i = k^{b_i}`.
    pub k_i: f64,
    /// Fractional moment `E{|U|^{2/b_i}}`.
    pub moment: f64,
    /// Per-component aggregate law: alpha = 2/b_i, beta = 0.
    pub stable_y: StableParams,
    /// Gaussian dispersion of the conditional decomposition,
    /// `2 (gamma_y)^{b_i}`.
    pub gamma_g: f64,
}

impl InterferenceModel {
    /// Degenerate model with no interferers; gamma_g = 0.
    pub fn noise_only(b_i: f64) -> Self {
        InterferenceModel {
            b_i,
            k_i: 0.0,
            moment: 0.0,
            stable_y: StableParams {
                alpha: 2.0 / b_i,
                beta: 0.0,
                gamma: 0.0,
            },
            gamma_g: 0.0,
        }
    }

    pub fn gamma_y(&self) -> f64 {
        self.stable_y.gamma
    }

    /// Law of the mixing variable V: `S(1/b_i, 1, cos(pi/(2 b_i)))`.
    pub fn mixing_params(&self) -> Result<StableParams> {
        StableParams::new(1.0 / self.b_i, 1.0, (PI / (2.0 * self.b_i)).cos())
    }
}

/// Derive the aggregate-interference stable law for a network.
pub fn build_interference_model(
    cfg: &NetworkConfig,
    env: &EnvironmentProfile,
) -> Result<InterferenceModel> {
    cfg.validate()?;
    env.validate()?;
    let b_i = env.b_i();
    if cfg.lambda == 0.0 {
        return Ok(InterferenceModel::noise_only(b_i));
    }
    let alpha = 2.0 / b_i;
    let moment = interference_moment(cfg, env)?;
    let gamma_y = PI * cfg.lambda * moment / c_alpha(alpha);
    let gamma_g = 2.0 * gamma_y.powf(b_i);
    Ok(InterferenceModel {
        b_i,
        k_i: amplitude_constant(cfg.f_c).powf(b_i),
        moment,
        stable_y: StableParams::new(alpha, 0.0, gamma_y)?,
        gamma_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    // mpmath (30 digits) evaluations, frozen.
    const K_5P8GHZ: f64 = 4.1132285855490881e-3;
    const XI_1P065: f64 = 0.51221336683248087794;
    const XI_1P2: f64 = 0.53559411162611199543;
    const XI_1P5: f64 = 0.579797633481964182884996025785;
    const XI_1P75: f64 = 0.610365243361471033996519953892;
    const XI_2P445: f64 = 0.67531218449865622106;
    const C_8_OVER_7: f64 = 0.580587167547129052064429017339;
    const MOMENT_BASELINE: f64 = 7.33851031472707979311200735649e-4;
    const GAMMA_Y_1EM5: f64 = 3.62140968498350204930015574996e-8;
    const GAMMA_G_1EM6: f64 = 2.62292162129846150962122703844e-17;
    const GAMMA_G_1EM5: f64 = 2.62292162129846150962122703844e-15;
    const GAMMA_G_1EM4: f64 = 2.62292162129846150962122703844e-13;
    const GAMMA_G_1EM5_B1P75: f64 = 3.97541012794707536712501094684e-14;

    #[test]
    fn amplitude_constant_reference() {
        assert_relative_eq!(amplitude_constant(5.8e9), K_5P8GHZ, max_relative = 1e-12);
        assert_relative_eq!(
            amplitude_constant(11.6e9),
            amplitude_constant(5.8e9) / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn dbm_conversion() {
        assert_relative_eq!(dbm_to_watts(20.0), 0.1, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(0.0), 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn xi_reference_values() {
        assert_abs_diff_eq!(xi(2.0), 2.0 / PI, epsilon = 1e-8);
        assert_abs_diff_eq!(xi(1.5), XI_1P5, epsilon = 1e-8);
        assert_abs_diff_eq!(xi(1.75), XI_1P75, epsilon = 1e-8);
        assert_abs_diff_eq!(xi(1.2), XI_1P2, epsilon = 1e-8);
        assert_abs_diff_eq!(xi(1.065), XI_1P065, epsilon = 1e-8);
        assert_abs_diff_eq!(xi(2.445), XI_2P445, epsilon = 1e-8);
    }

    #[test]
    fn xi_monotone_and_bounded() {
        // E{|cos|^p} decreases in p, so xi increases in b_i toward 1.
        let grid: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.05).collect();
        let mut prev = 0.0;
        for &b in &grid {
            let v = xi(b);
            assert!(v > prev && v < 1.0, "xi({b}) = {v}");
            prev = v;
        }
        assert!(xi(2000.0) > 0.999);
    }

    #[test]
    fn c_alpha_values() {
        assert_abs_diff_eq!(c_alpha(1.0), 2.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(c_alpha(1.0 + 1e-7), 2.0 / PI, epsilon = 1e-6);
        assert_abs_diff_eq!(c_alpha(1.0 - 1e-7), 2.0 / PI, epsilon = 1e-6);
        assert_relative_eq!(c_alpha(8.0 / 7.0), C_8_OVER_7, max_relative = 1e-12);
    }

    #[test]
    fn moment_reference_value() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let m = interference_moment(&cfg, &env).unwrap();
        assert_relative_eq!(m, MOMENT_BASELINE, max_relative = 1e-9);
    }

    #[test]
    fn moment_uniform_rho_halves_at_b2() {
        let mut cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let fixed = interference_moment(&cfg, &env).unwrap();
        cfg.rho_mode = RhoMode::Uniform;
        let uniform = interference_moment(&cfg, &env).unwrap();
        assert_relative_eq!(uniform / fixed, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn moment_monotone_in_power_and_free_of_geometry() {
        let cfg = NetworkConfig::baseline();
        let env = EnvironmentProfile::suburban();
        let base = interference_moment(&cfg, &env).unwrap();

        let mut stronger = cfg.clone();
        stronger.p_u = 0.2;
        assert!(interference_moment(&stronger, &env).unwrap() > base);

        let mut moved = cfg.clone();
        moved.lambda = 1e-3;
        moved.h = 900.0;
        assert_eq!(interference_moment(&moved, &env).unwrap(), base);
    }

    #[test]
    fn shadowing_moment_conventions() {
        let cfg = NetworkConfig::baseline();
        let mut env = EnvironmentProfile::suburban();
        env.sigma_s = 0.3;
        let b = env.b_i();
        let exact = interference_moment_with(&cfg, &env, ShadowingMoment::Exact).unwrap();
        let compat = interference_moment_with(&cfg, &env, ShadowingMoment::Compat).unwrap();
        let expected_ratio =
            ((2.0 * 0.09 / (b * b)) - (2.0 * 0.09 / b)).exp();
        assert_relative_eq!(exact / compat, expected_ratio, max_relative = 1e-13);

        env.sigma_s = 0.0;
        let a = interference_moment_with(&cfg, &env, ShadowingMoment::Exact).unwrap();
        let c = interference_moment_with(&cfg, &env, ShadowingMoment::Compat).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn model_reference_values() {
        let env = EnvironmentProfile::suburban();
        for (lambda, want) in [
            (1e-6, GAMMA_G_1EM6),
            (1e-5, GAMMA_G_1EM5),
            (1e-4, GAMMA_G_1EM4),
        ] {
            let cfg = NetworkConfig::baseline().with_lambda(lambda);
            let m = build_interference_model(&cfg, &env).unwrap();
            assert_relative_eq!(m.gamma_g, want, max_relative = 1e-9);
        }
        let m = build_interference_model(&NetworkConfig::baseline(), &env).unwrap();
        assert_relative_eq!(m.gamma_y(), GAMMA_Y_1EM5, max_relative = 1e-9);
        assert_eq!(m.stable_y.alpha, 1.0);
        assert_eq!(m.stable_y.beta, 0.0);
        assert_relative_eq!(m.k_i, K_5P8GHZ * K_5P8GHZ, max_relative = 1e-12);

        let mut env35 = env.clone();
        env35.gamma_i = 3.5;
        let m = build_interference_model(&NetworkConfig::baseline(), &env35).unwrap();
        assert_relative_eq!(m.gamma_g, GAMMA_G_1EM5_B1P75, max_relative = 1e-9);
        assert_relative_eq!(m.stable_y.alpha, 8.0 / 7.0, max_relative = 1e-15);
    }

    #[test]
    fn gamma_g_density_power_law() {
        let env = EnvironmentProfile::suburban();
        for gamma_i in [4.0, 3.5, 2.8] {
            let mut e = env.clone();
            e.gamma_i = gamma_i;
            let b = e.b_i();
            let g1 = build_interference_model(&NetworkConfig::baseline().with_lambda(1e-5), &e)
                .unwrap()
                .gamma_g;
            for c in [2.0, 3.7, 10.0] {
                let g2 = build_interference_model(
                    &NetworkConfig::baseline().with_lambda(c * 1e-5),
                    &e,
                )
                .unwrap()
                .gamma_g;
                assert_relative_eq!(g2 / g1, c.powf(b), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn model_internal_consistency() {
        let env = EnvironmentProfile::suburban();
        let m = build_interference_model(&NetworkConfig::baseline(), &env).unwrap();
        assert_relative_eq!(
            m.gamma_g,
            2.0 * m.gamma_y().powf(m.b_i),
            max_relative = 1e-15
        );
        let v = m.mixing_params().unwrap();
        assert_eq!(v.alpha, 0.5);
        assert_eq!(v.beta, 1.0);
        assert_relative_eq!(v.gamma, (PI / 4.0).cos(), max_relative = 1e-15);
    }

    #[test]
    fn degenerate_density_yields_noise_only() {
        let env = EnvironmentProfile::suburban();
        let m =
            build_interference_model(&NetworkConfig::baseline().with_lambda(0.0), &env).unwrap();
        assert_eq!(m.gamma_g, 0.0);
        assert_eq!(m.moment, 0.0);
        // Vanishing-density limit approaches it continuously.
        let tiny =
            build_interference_model(&NetworkConfig::baseline().with_lambda(1e-30), &env).unwrap();
        assert!(tiny.gamma_g > 0.0 && tiny.gamma_g < 1e-60);
    }

    #[test]
    fn config_validation() {
        let mut cfg = NetworkConfig::baseline();
        cfg.rho = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::baseline();
        cfg.f_c = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::baseline();
        cfg.p_d = 0.0; // degenerate but allowed: alternative collapses to null
        assert!(cfg.validate().is_ok());
        cfg.lambda = 0.0;
        assert!(cfg.validate().is_ok());
    }
}
