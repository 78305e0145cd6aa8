//! Poisson fields, the nearest-sensor distance law, and air-to-ground link
//! geometry with its elevation-dependent LOS probability.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Propagation environment: LOS-probability sigmoid constants, excess path
/// losses (linear power ratios), interference path-loss exponent, and
/// shadowing coefficient.
///
/// The built-in profiles carry the standard sigmoid/excess-loss constants of
/// the widely used elevation-angle A2G model:
/// suburban (a, b, eta_los, eta_nlos) = (4.88, 0.43, 10^0.01, 10^2.1) and
/// urban (9.61, 0.16, 10^0.1, 10^2.0). Everything is overridable; the
/// analysis only relies on orderings, not on the absolute constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentProfile {
    pub label: String,
    pub a: f64,
    pub b: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    pub gamma_i: f64,
    pub sigma_s: f64,
}

/// Allowed range of the interference path-loss exponent.
pub const GAMMA_I_RANGE: (f64, f64) = (2.13, 4.89);

impl EnvironmentProfile {
    pub fn suburban() -> Self {
        EnvironmentProfile {
            label: "suburban".into(),
            a: 4.88,
            b: 0.43,
            eta_los: 10f64.powf(0.01),
            eta_nlos: 10f64.powf(2.1),
            gamma_i: 4.0,
            sigma_s: 0.0,
        }
    }

    pub fn urban() -> Self {
        EnvironmentProfile {
            label: "urban".into(),
            a: 9.61,
            b: 0.16,
            eta_los: 10f64.powf(0.1),
            eta_nlos: 10f64.powf(2.0),
            gamma_i: 4.0,
            sigma_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::invalid("a/b", "sigmoid constants must be positive"));
        }
        if !(self.eta_los >= 1.0) {
            return Err(Error::invalid("eta_los", "excess LOS loss must be >= 1"));
        }
        if !(self.eta_nlos > self.eta_los) {
            return Err(Error::invalid("eta_nlos", "NLOS loss must exceed LOS loss"));
        }
        if !(self.gamma_i >= GAMMA_I_RANGE.0 && self.gamma_i <= GAMMA_I_RANGE.1) {
            return Err(Error::invalid(
                "gamma_i",
                format!(
                    "path-loss exponent must lie in [{}, {}]",
                    GAMMA_I_RANGE.0, GAMMA_I_RANGE.1
                ),
            ));
        }
        if !(self.sigma_s >= 0.0) {
            return Err(Error::invalid("sigma_s", "shadowing must be nonnegative"));
        }
        Ok(())
    }

    /// Amplitude loss exponent b_I = gamma_i / 2.
    pub fn b_i(&self) -> f64 {
        self.gamma_i / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// A PPP realization on a disk, points sorted by ascending distance to the
/// origin (the probe sensor).
#[derive(Debug, Clone)]
pub struct PointField {
    points: Vec<Point>,
    radius: f64,
    density: f64,
}

impl PointField {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same realization restricted to a smaller disk. Keeps the sort
    /// order; used for truncation-robustness checks.
    pub fn truncated(&self, r_max: f64) -> PointField {
        let points = self
            .points
            .iter()
            .take_while(|p| p.radius() <= r_max)
            .copied()
            .collect();
        PointField {
            points,
            radius: r_max.min(self.radius),
            density: self.density,
        }
    }
}

/// Sample a homogeneous PPP of density `lambda` on the disk of radius
/// `r_max`: Poisson count, i.i.d. uniform locations, sorted by radius.
pub fn sample_ppp_disk<R: Rng + ?Sized>(
    lambda: f64,
    r_max: f64,
    rng: &mut R,
) -> Result<PointField> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", "density must be positive"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::invalid("r_max", "radius must be positive and finite"));
    }
    let mean = lambda * PI * r_max * r_max;
    let n = Poisson::new(mean)
        .map_err(|e| Error::invalid("lambda", format!("poisson mean invalid: {e}")))?
        .sample(rng) as usize;
    let mut points: Vec<Point> = (0..n)
        .map(|_| {
            // Uniform on the disk: radius via sqrt of a uniform.
            let r = r_max * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            Point {
                x: r * phi.cos(),
                y: r * phi.sin(),
            }
        })
        .collect();
    points.sort_by(|p, q| p.radius().total_cmp(&q.radius()));
    Ok(PointField {
        points,
        radius: r_max,
        density: lambda,
    })
}

/// Density of the distance from the drone's ground projection to the
/// nearest sensor: `2 pi lambda r0 exp(-lambda pi r0^2)`.
pub fn nearest_neighbor_pdf(r0: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", "density must be positive"));
    }
    if r0 < 0.0 {
        return Err(Error::invalid("r0", "distance must be nonnegative"));
    }
    Ok(2.0 * PI * lambda * r0 * (-lambda * PI * r0 * r0).exp())
}

/// Inverse-CDF draw of the nearest-sensor distance:
/// `r0 = sqrt(-ln(u) / (pi lambda))`.
pub fn sample_nearest_distance<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    assert!(lambda > 0.0, "density must be positive");
    let u = 1.0 - rng.gen::<f64>(); // (0, 1]
    (-u.ln() / (PI * lambda)).sqrt()
}

/// Mean of the nearest-sensor law, `1 / (2 sqrt(lambda))`.
pub fn mean_nearest_distance(lambda: f64) -> f64 {
    0.5 / lambda.sqrt()
}

/// Slant distance and elevation angle (degrees) of the A2G link.
/// `theta = 90` when the drone is overhead (r0 = 0).
pub fn link_geometry(r0: f64, h: f64) -> (f64, f64) {
    assert!(r0 >= 0.0 && h > 0.0);
    let d = r0.hypot(h);
    let theta = h.atan2(r0).to_degrees();
    (d, theta)
}

/// Elevation-dependent LOS probability
/// `1 / (1 + a exp(-b (theta_deg - a)))`; the NLOS probability is its
/// complement.
pub fn los_probability(r0: f64, h: f64, env: &EnvironmentProfile) -> f64 {
    let (_, theta) = link_geometry(r0, h);
    1.0 / (1.0 + env.a * (-env.b * (theta - env.a)).exp())
}

/// Simulation truncation radius with void probability ~e^{-900} beyond:
/// `30 / sqrt(pi lambda)`.
pub fn default_truncation_radius(lambda: f64) -> f64 {
    assert!(lambda > 0.0);
    30.0 / (PI * lambda).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn profiles_validate() {
        EnvironmentProfile::suburban().validate().unwrap();
        EnvironmentProfile::urban().validate().unwrap();
        let mut bad = EnvironmentProfile::suburban();
        bad.eta_nlos = bad.eta_los;
        assert!(bad.validate().is_err());
        let mut bad = EnvironmentProfile::urban();
        bad.gamma_i = 5.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ppp_mean_count() {
        let mut rng = RngStream::new(21, 0);
        let reps = 10_000;
        let total: usize = (0..reps)
            .map(|_| sample_ppp_disk(1e-4, 1000.0, &mut rng).unwrap().len())
            .sum();
        let mean = total as f64 / reps as f64;
        assert_abs_diff_eq!(mean, 1e-4 * PI * 1e6, epsilon = 0.5);
    }

    #[test]
    fn ppp_points_sorted_and_inside() {
        let mut rng = RngStream::new(22, 0);
        let field = sample_ppp_disk(1e-3, 500.0, &mut rng).unwrap();
        assert!(field.len() > 100);
        let radii: Vec<f64> = field.points().iter().map(Point::radius).collect();
        for w in radii.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(radii.last().unwrap() <= &500.0);
    }

    #[test]
    fn ppp_rejects_bad_inputs() {
        let mut rng = RngStream::new(23, 0);
        assert!(sample_ppp_disk(0.0, 100.0, &mut rng).is_err());
        assert!(sample_ppp_disk(-1e-5, 100.0, &mut rng).is_err());
        assert!(sample_ppp_disk(1e-5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn nearest_pdf_values() {
        assert_eq!(nearest_neighbor_pdf(0.0, 1e-4).unwrap(), 0.0);
        assert!(nearest_neighbor_pdf(-1.0, 1e-4).is_err());
        assert!(nearest_neighbor_pdf(1.0, 0.0).is_err());
    }

    #[test]
    fn nearest_pdf_normalization_and_mean() {
        let lambda = 1e-4;
        let norm = crate::quad::integrate_to_inf(
            |r| nearest_neighbor_pdf(r, lambda).unwrap_or(0.0),
            0.0,
            1e-12,
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(norm.value, 1.0, epsilon = 1e-10);
        let mean = crate::quad::integrate_to_inf(
            |r| r * nearest_neighbor_pdf(r, lambda).unwrap_or(0.0),
            0.0,
            1e-13,
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(mean.value, mean_nearest_distance(lambda), epsilon = 1e-6);
    }

    #[test]
    fn nearest_distance_sample_mean() {
        let mut rng = RngStream::new(24, 0);
        let n = 1_000_000;
        let m4: f64 = (0..n)
            .map(|_| sample_nearest_distance(1e-4, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(m4, 50.0, epsilon = 0.1);
        let m6: f64 = (0..n)
            .map(|_| sample_nearest_distance(1e-6, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(m6, 500.0, epsilon = 1.0);
    }

    #[test]
    fn link_geometry_cases() {
        let (d, theta) = link_geometry(0.0, 300.0);
        assert_eq!(d, 300.0);
        assert_eq!(theta, 90.0);
        let (_, theta) = link_geometry(300.0, 300.0);
        assert_abs_diff_eq!(theta, 45.0, epsilon = 1e-12);
        let (d, theta) = link_geometry(923.0, 300.0);
        assert_abs_diff_eq!(d, (923.0f64 * 923.0 + 300.0 * 300.0).sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(theta, 18.0, epsilon = 0.05);
    }

    #[test]
    fn los_probability_reference_points() {
        let sub = EnvironmentProfile::suburban();
        assert!(los_probability(1e-9, 300.0, &sub) > 0.999);
        let urb = EnvironmentProfile::urban();
        let p = los_probability(923.0, 300.0, &urb);
        assert_abs_diff_eq!(p, 0.285, epsilon = 0.01);
    }

    #[test]
    fn void_probability_at_mean_distance() {
        let lambda: f64 = 4e-4;
        let r = 0.5 / lambda.sqrt();
        let mut rng = RngStream::new(25, 0);
        let reps = 20_000;
        let mut voids = 0u32;
        for _ in 0..reps {
            let field = sample_ppp_disk(lambda, r, &mut rng).unwrap();
            if field.is_empty() {
                voids += 1;
            }
        }
        let expected = (-lambda * PI * r * r).exp();
        assert_abs_diff_eq!(voids as f64 / reps as f64, expected, epsilon = 0.005);
    }

    #[test]
    fn superposition_count_statistics() {
        // Merging two independent fields matches the count law of the summed
        // density: compare mean and variance of counts.
        let (l1, l2, r) = (2e-4, 3e-4, 400.0);
        let mut rng = RngStream::new(26, 0);
        let reps = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let n = sample_ppp_disk(l1, r, &mut rng).unwrap().len()
                + sample_ppp_disk(l2, r, &mut rng).unwrap().len();
            sum += n as f64;
            sumsq += (n * n) as f64;
        }
        let mean = sum / reps as f64;
        let var = sumsq / reps as f64 - mean * mean;
        let want = (l1 + l2) * PI * r * r;
        assert_abs_diff_eq!(mean, want, epsilon = 0.05 * want);
        assert_abs_diff_eq!(var, want, epsilon = 0.05 * want);
    }

    #[test]
    fn truncated_field_keeps_prefix() {
        let mut rng = RngStream::new(27, 0);
        let field = sample_ppp_disk(1e-3, 600.0, &mut rng).unwrap();
        let cut = field.truncated(300.0);
        assert!(cut.len() < field.len());
        assert!(cut.points().iter().all(|p| p.radius() <= 300.0));
        assert_eq!(&field.points()[..cut.len()], cut.points());
    }

    proptest! {
        #[test]
        fn los_monotone_in_geometry(
            r0 in 1.0f64..5000.0,
            h in 50.0f64..1500.0,
            bump in 1.01f64..3.0,
        ) {
            for env in [EnvironmentProfile::suburban(), EnvironmentProfile::urban()] {
                let p = los_probability(r0, h, &env);
                prop_assert!(p > 0.0 && p < 1.0);
                // Higher altitude raises elevation, hence LOS probability.
                prop_assert!(los_probability(r0, h * bump, &env) >= p);
                // Larger ground distance lowers it.
                prop_assert!(los_probability(r0 * bump, h, &env) <= p);
            }
        }

        #[test]
        fn nearest_pdf_nonnegative(r0 in 0.0f64..1e5, lambda in 1e-8f64..1e-2) {
            prop_assert!(nearest_neighbor_pdf(r0, lambda).unwrap() >= 0.0);
        }
    }
}
