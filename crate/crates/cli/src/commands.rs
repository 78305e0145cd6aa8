//! One function per CLI verb. Each reads its config section, runs the
//! engine, and writes CSV plus SVG into the output directory.

use dronesense::channel::{build_interference_model, xi};
use dronesense::detector::{pd_avg, pd_single, pfa, roc_curve, solve_threshold};
use dronesense::optimizer::critical_density;
use dronesense::simulator::{empirical_roc, paired_rss, validation_report};
use dronesense::{
    DetectorPoint, EnvironmentProfile, Hypothesis, Multipath, RocMode, TrialConfig,
};

use crate::config::FileConfig;
use crate::output::{num, write_csv, write_plot, PlotSpec, Series};
use crate::{AppError, RunContext};

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, AppError> {
    s.as_ref()
        .ok_or_else(|| AppError::Usage(format!("config has no [{name}] section")))
}

/// Labels from the command section, falling back to the configured
/// environment, resolved under the [environment] overrides.
fn resolve_environments(
    file: &FileConfig,
    labels: &Option<Vec<String>>,
) -> Result<Vec<EnvironmentProfile>, AppError> {
    match labels {
        None => Ok(vec![file.environment.to_core()?]),
        Some(list) if list.is_empty() => {
            Err(AppError::Usage("environments list is empty".into()))
        }
        Some(list) => list.iter().map(|l| file.environment.resolve(l)).collect(),
    }
}

pub fn roc(ctx: &RunContext) -> Result<(), AppError> {
    let sec = section(&ctx.file.roc, "roc")?;
    let base_cfg = ctx.file.network.to_core()?;
    let environments = resolve_environments(&ctx.file, &sec.environments)?;
    let densities = match &sec.densities {
        None => vec![base_cfg.lambda],
        Some(d) if d.is_empty() => {
            return Err(AppError::Usage("densities list is empty".into()))
        }
        Some(d) => d.clone(),
    };
    let with_empirical = sec.with_empirical.unwrap_or(false);
    let mode = match sec.mode.as_deref() {
        None | Some("single") => {
            let r0 = sec.r0_m.ok_or_else(|| {
                AppError::Usage("[roc] single-sensor mode needs r0_m".into())
            })?;
            RocMode::Single { r0 }
        }
        Some("average") => {
            if with_empirical {
                return Err(AppError::Usage(
                    "[roc] with_empirical needs mode = \"single\" (the simulator places \
                     the drone at a fixed distance)"
                        .into(),
                ));
            }
            RocMode::NetworkAverage
        }
        Some(other) => {
            return Err(AppError::Usage(format!(
                "[roc] mode must be \"single\" or \"average\", got \"{other}\""
            )))
        }
    };

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for env in &environments {
        for &lambda in &densities {
            let cfg = base_cfg.with_lambda(lambda);
            let model = build_interference_model(&cfg, env)?;
            let out = roc_curve(mode, &cfg, env, &model, &sec.p_fa, &ctx.method)?;
            for (alpha, err) in &out.failures {
                eprintln!(
                    "warning: {} lambda={lambda:e}: no point at p_fa={alpha}: {err}",
                    env.label
                );
            }
            if out.points.is_empty() {
                return Err(AppError::Numerical(format!(
                    "{} lambda={lambda:e}: every grid point failed",
                    env.label
                )));
            }

            let empirical = if with_empirical {
                let RocMode::Single { r0 } = mode else { unreachable!() };
                let mut grid: Vec<f64> = out.points.iter().map(|p| p.gamma_thr).collect();
                grid.sort_by(f64::total_cmp);
                let trial = TrialConfig {
                    n_trials: sec.trials.unwrap_or(100_000),
                    multipath: Multipath::ExactLimit,
                    r_max: None,
                    hypothesis: Hypothesis::Alternative { r0 },
                    seed: ctx.seed,
                };
                let emp = empirical_roc(&cfg, env, &trial, &grid)?;
                if let Some(w) = &emp.warning {
                    eprintln!("warning: {w}");
                }
                Some((grid, emp))
            } else {
                None
            };

            for p in &out.points {
                let emp_pd = empirical.as_ref().map(|(grid, emp)| {
                    let i = grid.partition_point(|&t| t < p.gamma_thr);
                    emp.points[i].p_d
                });
                rows.push(vec![
                    num(p.p_fa),
                    num(p.p_d),
                    emp_pd.map(num).unwrap_or_default(),
                    num(p.gamma_thr),
                    num(lambda),
                    env.label.clone(),
                ]);
            }
            series.push(Series {
                label: format!("{} lambda={lambda:e}", env.label),
                points: out.points.iter().map(|p| (p.p_fa, p.p_d)).collect(),
            });
        }
    }

    write_csv(
        &ctx.out_dir.join("roc.csv"),
        &[
            "p_fa",
            "p_d_analytic",
            "p_d_empirical",
            "gamma_thr",
            "lambda",
            "env_label",
        ],
        &rows,
    )?;
    write_plot(
        &ctx.out_dir.join("roc.svg"),
        &PlotSpec {
            title: "Detection vs false alarm",
            x_label: "false-alarm probability",
            y_label: "detection probability",
            log_x: true,
            y_range: Some((0.0, 1.0)),
        },
        &series,
    )
}

pub fn sweep_density(ctx: &RunContext) -> Result<(), AppError> {
    let sec = section(&ctx.file.sweep, "sweep")?;
    if sec.alpha_fa.is_empty() {
        return Err(AppError::Usage("[sweep] alpha_fa list is empty".into()));
    }
    if !(sec.lambda_min > 0.0 && sec.lambda_max > sec.lambda_min) {
        return Err(AppError::Usage(
            "[sweep] needs 0 < lambda_min < lambda_max".into(),
        ));
    }
    if sec.points < 2 {
        return Err(AppError::Usage("[sweep] needs at least 2 points".into()));
    }
    let base_cfg = ctx.file.network.to_core()?;
    let environments = resolve_environments(&ctx.file, &sec.environments)?;

    let n = sec.points;
    let (lo, hi) = (sec.lambda_min.ln(), sec.lambda_max.ln());
    let lambdas: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for env in &environments {
        for &alpha in &sec.alpha_fa {
            let mut points = Vec::with_capacity(n);
            for &lambda in &lambdas {
                let cfg = base_cfg.with_lambda(lambda);
                let model = build_interference_model(&cfg, env)?;
                let thr = solve_threshold(alpha, &model, cfg.n0, &ctx.method)?;
                let pd = pd_avg(&cfg, env, &model, thr, &ctx.method)?;
                rows.push(vec![
                    num(lambda),
                    num(alpha),
                    num(thr),
                    num(pd),
                    env.label.clone(),
                ]);
                points.push((lambda, pd));
            }
            series.push(Series {
                label: format!("{} p_fa={alpha}", env.label),
                points,
            });
        }
    }

    write_csv(
        &ctx.out_dir.join("pdavg_vs_lambda.csv"),
        &["lambda", "alpha_fa", "gamma_thr", "p_d_avg", "env_label"],
        &rows,
    )?;
    write_plot(
        &ctx.out_dir.join("pdavg_vs_lambda.svg"),
        &PlotSpec {
            title: "Network-average detection vs density",
            x_label: "density per m2",
            y_label: "average detection probability",
            log_x: true,
            y_range: Some((0.0, 1.0)),
        },
        &series,
    )
}

pub fn optimize(ctx: &RunContext) -> Result<(), AppError> {
    let sec = section(&ctx.file.optimize, "optimize")?;
    let cfg = ctx.file.network.to_core()?;
    let env = ctx.file.environment.to_core()?;
    let rel_tol = sec.rel_tol.unwrap_or(0.01);

    let result = critical_density(
        sec.alpha_fa,
        &cfg,
        &env,
        (sec.lambda_min, sec.lambda_max),
        rel_tol,
        &ctx.method,
    )?;

    write_csv(
        &ctx.out_dir.join("optimize_result.csv"),
        &[
            "alpha_fa",
            "lambda_c",
            "pd_avg_max",
            "gamma_thr_at_opt",
            "bracket_lo",
            "bracket_hi",
            "boundary_maximum",
            "degenerate_flat",
            "env_label",
        ],
        &[vec![
            num(sec.alpha_fa),
            num(result.lambda_c),
            num(result.pd_avg_max),
            num(result.gamma_thr_at_opt),
            num(result.bracket.0),
            num(result.bracket.1),
            result.boundary_maximum.to_string(),
            result.degenerate_flat.to_string(),
            env.label.clone(),
        ]],
    )?;

    let mut trace = result.trace.clone();
    trace.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    write_csv(
        &ctx.out_dir.join("optimize_trace.csv"),
        &["lambda", "gamma_thr", "pd_avg"],
        &trace
            .iter()
            .map(|t| vec![num(t.lambda), num(t.gamma_thr), num(t.pd_avg)])
            .collect::<Vec<_>>(),
    )?;

    write_plot(
        &ctx.out_dir.join("optimize_trace.svg"),
        &PlotSpec {
            title: "Critical-density search",
            x_label: "density per m2",
            y_label: "average detection probability",
            log_x: true,
            y_range: Some((0.0, 1.0)),
        },
        &[
            Series {
                label: format!("objective p_fa={}", sec.alpha_fa),
                points: trace.iter().map(|t| (t.lambda, t.pd_avg)).collect(),
            },
            Series {
                label: "lambda_c".into(),
                points: vec![(result.lambda_c, 0.0), (result.lambda_c, 1.0)],
            },
        ],
    )
}

pub fn validate(ctx: &RunContext) -> Result<(), AppError> {
    let sec = section(&ctx.file.validate, "validate")?;
    let cfg = ctx.file.network.to_core()?;
    let env = ctx.file.environment.to_core()?;
    let tolerance = sec.tolerance.unwrap_or(0.02);
    let model = build_interference_model(&cfg, &env)?;

    let mut thresholds: Vec<f64> = sec
        .p_fa
        .iter()
        .map(|&a| solve_threshold(a, &model, cfg.n0, &ctx.method))
        .collect::<Result<_, _>>()?;
    thresholds.sort_by(f64::total_cmp);

    let analytic: Vec<DetectorPoint> = thresholds
        .iter()
        .map(|&thr| {
            Ok(DetectorPoint {
                gamma_thr: thr,
                p_fa: pfa(thr, &model, cfg.n0, &ctx.method)?,
                p_d: pd_single(sec.r0_m, thr, &cfg, &env, &model, &ctx.method)?,
            })
        })
        .collect::<Result<_, dronesense::Error>>()?;

    let trial = TrialConfig {
        n_trials: sec.trials.unwrap_or(100_000),
        multipath: Multipath::ExactLimit,
        r_max: None,
        hypothesis: Hypothesis::Alternative { r0: sec.r0_m },
        seed: ctx.seed,
    };
    let empirical = empirical_roc(&cfg, &env, &trial, &thresholds)?;
    let report = validation_report(&analytic, &empirical, tolerance)?;

    write_csv(
        &ctx.out_dir.join("validation_report.csv"),
        &[
            "gamma_thr",
            "analytic_p_fa",
            "empirical_p_fa",
            "p_fa_ci_lo",
            "p_fa_ci_hi",
            "analytic_p_d",
            "empirical_p_d",
            "p_d_ci_lo",
            "p_d_ci_hi",
            "delta_p_fa",
            "delta_p_d",
            "within_tolerance",
        ],
        &report
            .points
            .iter()
            .map(|p| {
                vec![
                    num(p.gamma_thr),
                    num(p.analytic_p_fa),
                    num(p.empirical_p_fa),
                    num(p.p_fa_interval.0),
                    num(p.p_fa_interval.1),
                    num(p.analytic_p_d),
                    num(p.empirical_p_d),
                    num(p.p_d_interval.0),
                    num(p.p_d_interval.1),
                    num(p.delta_p_fa),
                    num(p.delta_p_d),
                    p.within_tolerance.to_string(),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &ctx.out_dir.join("validation_summary.csv"),
        &["n_trials", "tolerance", "max_deviation", "pass", "warnings"],
        &[vec![
            empirical.n_trials.to_string(),
            num(report.tolerance),
            num(report.max_deviation),
            report.pass.to_string(),
            report.warnings.join("; ").replace(',', ";"),
        ]],
    )?;

    if sec.dump_rss.unwrap_or(false) {
        let rows: Vec<Vec<String>> = (0..trial.n_trials)
            .map(|i| {
                let (null_rss, alt_rss) = paired_rss(&cfg, &env, &trial, i)?;
                Ok(vec![i.to_string(), num(null_rss), num(alt_rss)])
            })
            .collect::<Result<_, dronesense::Error>>()?;
        write_csv(
            &ctx.out_dir.join("rss_dump.csv"),
            &["trial", "null_rss", "alt_rss"],
            &rows,
        )?;
    }

    if !report.pass {
        return Err(AppError::Breach(format!(
            "max deviation {:.4} exceeds tolerance {:.4} (see validation_report.csv)",
            report.max_deviation, report.tolerance
        )));
    }
    Ok(())
}

/// Commonly tabulated phase-moment values for three standard amplitude
/// exponents; the table flags which ones the integral actually reproduces
/// (the 1.75 entry does not match).
const XI_REFERENCES: [(f64, f64); 3] = [(1.5, 0.579), (1.75, 0.7403), (2.0, 0.637)];
const XI_MATCH_TOL: f64 = 1e-3;

pub fn xi_table(ctx: &RunContext) -> Result<(), AppError> {
    let default = XiTableDefaults::default();
    let (b_min, b_max, points) = match &ctx.file.xi_table {
        Some(sec) => (
            sec.b_min.unwrap_or(default.b_min),
            sec.b_max.unwrap_or(default.b_max),
            sec.points.unwrap_or(default.points),
        ),
        None => (default.b_min, default.b_max, default.points),
    };
    if !(b_min > 0.0 && b_max > b_min) {
        return Err(AppError::Usage("[xi_table] needs 0 < b_min < b_max".into()));
    }
    if points < 2 {
        return Err(AppError::Usage("[xi_table] needs at least 2 points".into()));
    }

    let mut grid: Vec<f64> = (0..points)
        .map(|i| b_min + (b_max - b_min) * i as f64 / (points - 1) as f64)
        .collect();
    for (b, _) in XI_REFERENCES {
        if b >= b_min && b <= b_max {
            grid.push(b);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&b| {
            let value = xi(b);
            let reference = XI_REFERENCES
                .iter()
                .find(|(rb, _)| (rb - b).abs() < 1e-12)
                .map(|&(_, r)| r);
            vec![
                num(b),
                num(value),
                reference.map(num).unwrap_or_default(),
                reference
                    .map(|r| ((value - r).abs() < XI_MATCH_TOL).to_string())
                    .unwrap_or_default(),
            ]
        })
        .collect();

    write_csv(
        &ctx.out_dir.join("xi_table.csv"),
        &["b_i", "xi", "reference", "matches_reference"],
        &rows,
    )?;
    write_plot(
        &ctx.out_dir.join("xi_table.svg"),
        &PlotSpec {
            title: "Phase moment vs amplitude loss exponent",
            x_label: "b_I",
            y_label: "xi(b_I)",
            log_x: false,
            y_range: None,
        },
        &[Series {
            label: "xi".into(),
            points: grid.iter().map(|&b| (b, xi(b))).collect(),
        }],
    )
}

struct XiTableDefaults {
    b_min: f64,
    b_max: f64,
    points: usize,
}

impl Default for XiTableDefaults {
    fn default() -> Self {
        // The allowed path-loss exponent range in amplitude terms.
        XiTableDefaults {
            b_min: 1.065,
            b_max: 2.445,
            points: 15,
        }
    }
}
