//! The four subcommands. Each returns whether every check met its tolerance;
//! configuration and parse problems surface as [`CliError`].

use crate::config::ExperimentConfig;
use crate::report::ReportWriter;
use crate::CliError;
use exotic_core::embedding::{
    corollary_check, embed_fock, grading_shift, injectivity_probe, lemma1_check_with_bound,
    CoefficientArray, CorollaryCheck, ExoticFock, GradingShift, InjectivityReport, LemmaRecord,
};
use exotic_core::exotic_basis::{check_c1, check_c2, check_c3, C2Report, C3Report, ExoticFrame};
use exotic_core::fock_space::{ChaosFunctional, FockVector};
use exotic_core::heat_flow::{
    heat_equation_defect, semigroup_defect, solve_exotic_heat, verify_heat_residual, Horizon,
    TimeVerdict,
};
use exotic_core::laplacians::{exotic_laplacian, LaplacianPoint};
use exotic_core::multi_index::space_len;
use exotic_core::symmetric_tensor::SymTensor;
use exotic_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const BUNDLED_COEFFICIENTS: &str = include_str!("../data/coefficients.json");
const BUNDLED_INITIAL: &str = include_str!("../data/f2.json");

/// Largest embedded Fock vector (in stored coefficients) exported in full.
const MATERIALIZE_LIMIT: usize = 200_000;

pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

fn load_text(path: Option<&Path>, bundled: &str) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => Ok(bundled.to_owned()),
    }
}

fn origin(path: Option<&Path>) -> String {
    path.map_or_else(|| "bundled".to_owned(), |p| p.display().to_string())
}

// ---------------------------------------------------------------- basis-check

#[derive(Serialize)]
struct C1Row {
    k1: usize,
    k2: usize,
    n: usize,
    re: f64,
    im: f64,
    deviation: f64,
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct C2Grade {
    report: C2Report,
    /// `max_k |e_{a,k}| - min_k |e_{a,k}|`.
    spread: f64,
    /// `|M² - truncated_sq| / truncated_sq` at grade `2a-1`.
    analytic_deviation: Option<f64>,
}

#[derive(Serialize)]
struct C2Body {
    natural: C2Grade,
    configured: C2Grade,
    pass: bool,
}

#[derive(Serialize)]
struct C3Body {
    #[serde(rename = "K_a")]
    k_a: usize,
    #[serde(rename = "M_terms")]
    m_terms: usize,
    report: C3Report,
    threshold: f64,
    pass: bool,
}

fn c2_grade(
    frame: &ExoticFrame,
    p: f64,
    base: &exotic_core::graded_space::WeightFamily,
    natural: bool,
) -> Result<C2Grade, CliError> {
    let report = check_c2(frame, p, base)?;
    let lo = report
        .per_vector
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let spread = report.bound - lo;
    let analytic_deviation = natural.then(|| {
        let t = report.analytic.truncated_sq;
        (report.bound * report.bound - t).abs() / t
    });
    Ok(C2Grade {
        report,
        spread,
        analytic_deviation,
    })
}

pub fn basis_check(config: &ExperimentConfig, out: &ReportWriter) -> Result<Outcome, CliError> {
    let frame = config.build_frame()?;
    let base = config.base_weights()?;
    let tol = &config.tolerances;
    let order = frame.order();
    let mut rows = Vec::new();
    for &n in &config.ladder {
        let rep = check_c1(&frame, n, tol.c1)?;
        let rate = tol.c1_rate_constant * (n as f64).powf(-order);
        for (k1, row) in rep.means.iter().enumerate() {
            for (k2, v) in row.iter().enumerate() {
                let bound = tol.c1
                    + if k1 != k2 || frame.a() < 1.0 {
                        rate
                    } else {
                        0.0
                    };
                let deviation = rep.deviations[k1][k2];
                rows.push(C1Row {
                    k1: k1 + 1,
                    k2: k2 + 1,
                    n,
                    re: v.re,
                    im: v.im,
                    deviation,
                    bound,
                    pass: deviation <= bound,
                });
            }
        }
    }
    let c1_pass = rows.iter().all(|r| r.pass);

    let natural = c2_grade(&frame, order, &base, true)?;
    let configured = c2_grade(&frame, config.p, &base, false)?;
    let c2_pass = natural.analytic_deviation.is_some_and(|d| d <= 1e-10)
        && natural.spread <= 1e-12 * natural.report.bound.max(1.0)
        && configured.report.bound.is_finite();
    let c2 = C2Body {
        natural,
        configured,
        pass: c2_pass,
    };

    let report = check_c3(&frame)?;
    let c3 = C3Body {
        k_a: frame.k_a(),
        m_terms: frame.m_terms(),
        threshold: tol.c3_sigma_min,
        pass: report.independent && report.sigma_min > tol.c3_sigma_min,
        report,
    };

    let files = vec![
        out.csv(
            "c1_matrix.csv",
            &["k1", "k2", "N", "re", "im", "deviation", "bound", "pass"],
            &rows,
        )?,
        out.json("c2_bounds.json", &c2)?,
        out.json("c3_sigma.json", &c3)?,
    ];
    let worst = rows
        .iter()
        .map(|r| r.deviation / r.bound)
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: c1_pass && c2.pass && c3.pass,
        files,
        summary: vec![
            format!(
                "C1 {} (worst deviation/bound {worst:.3e})",
                verdict(c1_pass)
            ),
            format!(
                "C2 {} (M = {:.12e} at grade {})",
                verdict(c2.pass),
                c2.natural.report.bound,
                order
            ),
            format!(
                "C3 {} (sigma_min = {:.6e}, sigma_max = {:.6e})",
                verdict(c3.pass),
                c3.report.sigma_min,
                c3.report.sigma_max
            ),
        ],
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------- embed

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientCase {
    pub label: String,
    pub coefficients: CoefficientArray,
}

pub fn parse_coefficients(text: &str, k_a: usize) -> Result<Vec<CoefficientCase>, CliError> {
    let cases: Vec<CoefficientCase> =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("coefficients: {e}")))?;
    for c in &cases {
        if c.coefficients.k_a() > k_a {
            return Err(CliError::Config(format!(
                "case {:?} has K_a = {} but the frame has K_a = {k_a}",
                c.label,
                c.coefficients.k_a()
            )));
        }
    }
    Ok(cases
        .into_iter()
        .map(|c| CoefficientCase {
            coefficients: CoefficientArray::new(pad(c.coefficients.tensor(), k_a)),
            label: c.label,
        })
        .collect())
}

/// Extend coefficients on the first `k` frame vectors by zeros.
fn pad(t: &SymTensor, k_a: usize) -> SymTensor {
    if t.dim() == k_a {
        return t.clone();
    }
    if t.degree() == 0 {
        return SymTensor::scalar(k_a, t.coeffs()[0]);
    }
    let k = t.dim();
    SymTensor::from_fn(t.degree(), k_a, |idx| {
        if idx.iter().all(|&i| i < k) {
            t.get(idx)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("padding stays within the frame size")
}

#[derive(Serialize)]
struct LemmaRow<'a> {
    case: usize,
    label: &'a str,
    degree: usize,
    lhs: f64,
    rhs: f64,
    slack: f64,
    holds: bool,
}

#[derive(Serialize)]
struct CorollaryRow<'a> {
    label: &'a str,
    #[serde(flatten)]
    check: CorollaryCheck,
}

#[derive(Serialize)]
struct ShiftBody<'a> {
    shift: GradingShift,
    corollary: Vec<CorollaryRow<'a>>,
    pass: bool,
}

#[derive(Serialize)]
struct InjectivityBody {
    #[serde(rename = "M_terms")]
    m_terms: usize,
    tolerance: f64,
    probes: Vec<InjectivityReport>,
    pass: bool,
}

pub fn embed(config: &ExperimentConfig, out: &ReportWriter) -> Result<Outcome, CliError> {
    let path = config.embed.coefficients.as_deref();
    let text = load_text(path, BUNDLED_COEFFICIENTS)?;
    let frame = config.build_frame()?;
    let base = config.base_weights()?;
    let p = config.p;
    if p <= 0.0 {
        return Err(CliError::Config(format!(
            "embedding bounds need p > 0, got {p}"
        )));
    }
    let mut cases = parse_coefficients(&text, frame.k_a())?;
    if let Some(c) = cases
        .iter()
        .find(|c| c.coefficients.degree() > config.truncations.nmax)
    {
        return Err(CliError::Config(format!(
            "case {:?} exceeds Nmax = {}",
            c.label, config.truncations.nmax
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for i in 0..config.embed.random_cases {
        let n = rng.random_range(0..=config.embed.random_max_degree);
        cases.push(CoefficientCase {
            label: format!("random_{}", i + 1),
            coefficients: CoefficientArray::random(&mut rng, n, frame.k_a())?,
        });
    }

    let bound = check_c2(&frame, p, &base)?.bound;
    let records = cases
        .iter()
        .map(|c| lemma1_check_with_bound(&c.coefficients, &frame, p, &base, bound))
        .collect::<Result<Vec<LemmaRecord>, _>>()?;
    let rows: Vec<LemmaRow> = cases
        .iter()
        .zip(&records)
        .enumerate()
        .map(|(i, (c, r))| LemmaRow {
            case: i + 1,
            label: &c.label,
            degree: r.degree,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            holds: r.holds,
        })
        .collect();
    let lemma_pass = rows.iter().all(|r| r.holds);

    let shift = grading_shift(&frame, p, &base)?;
    let corollary = cases
        .iter()
        .map(|c| {
            let b = &c.coefficients;
            let mut kernels: Vec<SymTensor> = (0..=b.degree())
                .map(|n| SymTensor::zeros(n, frame.k_a()))
                .collect::<Result<_, _>>()?;
            kernels[b.degree()] = b.tensor().clone();
            let phi = ExoticFock::new(FockVector::new(frame.k_a(), kernels)?);
            Ok(CorollaryRow {
                label: &c.label,
                check: corollary_check(&phi, &frame, p, &base)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let shift_body = ShiftBody {
        shift,
        pass: corollary.iter().all(|c| c.check.holds),
        corollary,
    };

    let settings = &config.embed;
    let m_terms = settings.injectivity_m_terms.min(frame.m_terms());
    let mut probes = Vec::new();
    if settings.injectivity_trials > 0 {
        let probe_frame = config.frame_with_terms(m_terms)?;
        for &n in &settings.injectivity_degrees {
            probes.push(injectivity_probe(
                &probe_frame,
                n,
                settings.injectivity_trials,
                &mut rng,
            )?);
        }
    }
    let injectivity = InjectivityBody {
        m_terms,
        tolerance: config.tolerances.recovery,
        pass: probes.iter().all(|r| {
            r.max_relative_error <= config.tolerances.recovery && r.min_embedded_norm > 0.0
        }),
        probes,
    };

    let files = vec![
        out.csv(
            "lemma1.csv",
            &["case", "label", "degree", "lhs", "rhs", "slack", "holds"],
            &rows,
        )?,
        out.json("injectivity.json", &injectivity)?,
        out.json("grading_shift.json", &shift_body)?,
    ];
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let worst_rec = injectivity
        .probes
        .iter()
        .map(|r| r.max_relative_error)
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: lemma_pass && shift_body.pass && injectivity.pass,
        files,
        summary: vec![
            format!(
                "lemma {} ({}/{} hold, min slack {min_slack:.3e}, source {})",
                verdict(lemma_pass),
                rows.iter().filter(|r| r.holds).count(),
                rows.len(),
                origin(path)
            ),
            format!(
                "grading shift m = {} (product {:.6e}), corollary {}",
                shift.shift,
                shift.product,
                verdict(shift_body.pass)
            ),
            format!(
                "injectivity {} ({} probes, worst relative error {worst_rec:.3e})",
                verdict(injectivity.pass),
                injectivity.probes.len()
            ),
        ],
    })
}

// ----------------------------------------------------------------------- heat

/// Parse an exotic Fock vector and pad it to the frame size.
pub fn parse_initial(text: &str, config: &ExperimentConfig) -> Result<ExoticFock, CliError> {
    let fock: FockVector =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("initial data: {e}")))?;
    let k_a = config.frame.k_a;
    if fock.dim() > k_a {
        return Err(CliError::Config(format!(
            "initial data has dim {} but the frame has K_a = {k_a}",
            fock.dim()
        )));
    }
    if fock.nmax() > config.truncations.nmax {
        return Err(CliError::Config(format!(
            "initial data has Nmax = {} above truncations.Nmax = {}",
            fock.nmax(),
            config.truncations.nmax
        )));
    }
    let kernels = fock.kernels().iter().map(|k| pad(k, k_a)).collect();
    Ok(ExoticFock::new(FockVector::new(k_a, kernels)?))
}

fn initial_data(config: &ExperimentConfig) -> Result<(ExoticFock, String), CliError> {
    let path = config.heat.initial.as_deref();
    let text = load_text(path, BUNDLED_INITIAL)?;
    Ok((parse_initial(&text, config)?, origin(path)))
}

#[derive(Serialize)]
struct Sample {
    label: String,
    value: Complex64,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum EmbeddedExport {
    Materialized(FockVector),
    /// `S i(P_t φ)(ξ)` at the test points when the kernels are too large.
    STransform(Vec<Sample>),
}

#[derive(Serialize)]
struct Snapshot {
    t: f64,
    exotic: ExoticFock,
    embedded: EmbeddedExport,
}

#[derive(Serialize)]
struct Check {
    t: f64,
    semigroup_defect: f64,
    generator_defect: Option<f64>,
}

#[derive(Serialize)]
struct SolutionBody {
    initial_data: String,
    p: f64,
    grid: Vec<f64>,
    initial_norm: f64,
    horizon: Horizon,
    verdicts: Vec<TimeVerdict>,
    snapshots: Vec<Snapshot>,
    checks: Vec<Check>,
    pass: bool,
}

#[derive(Serialize)]
struct HorizonBody<'a> {
    horizon: &'a Horizon,
    verdicts: &'a [TimeVerdict],
    in_theory: bool,
}

#[derive(Serialize)]
struct ResidualCsv<'a> {
    t: f64,
    xi: &'a str,
    lhs_re: f64,
    lhs_im: f64,
    rhs_re: f64,
    rhs_im: f64,
    residual: f64,
    budget: f64,
    within_budget: bool,
    within_horizon: bool,
}

fn materialized_len(nmax: usize, m_terms: usize) -> usize {
    (0..=nmax)
        .map(|n| space_len(n, m_terms).unwrap_or(usize::MAX))
        .fold(0usize, usize::saturating_add)
}

pub fn heat(config: &ExperimentConfig, out: &ReportWriter) -> Result<Outcome, CliError> {
    let (phi, source) = initial_data(config)?;
    let frame = config.build_frame()?;
    let sol = solve_exotic_heat(&phi, &frame, config.p, &config.time_grid)?;
    let points = config.test_vectors()?;
    let labels = config.labels();
    let h = config.heat.h;
    let residuals = verify_heat_residual(&sol, &points, h, &config.ladder)?;

    let tol = &config.tolerances;
    let checks = sol
        .times
        .iter()
        .map(|&t| {
            Ok(Check {
                t,
                semigroup_defect: semigroup_defect(&phi, t, t, &frame)?,
                generator_defect: if t >= h {
                    Some(heat_equation_defect(&phi, t, h, &frame)?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let checks_pass = checks.iter().all(|c| {
        c.semigroup_defect <= tol.semigroup && c.generator_defect.is_none_or(|d| d <= tol.heat_fd)
    });
    let residual_pass = residuals.iter().all(|r| r.within_budget);

    let full = materialized_len(phi.nmax(), frame.m_terms()) <= MATERIALIZE_LIMIT;
    let snapshots = sol
        .times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let e = sol.embedded(j)?;
            let embedded = if full {
                EmbeddedExport::Materialized(e.materialize()?)
            } else {
                EmbeddedExport::STransform(
                    labels
                        .iter()
                        .zip(&points)
                        .map(|(l, xi)| {
                            Ok(Sample {
                                label: l.clone(),
                                value: e.s_transform_at(xi)?,
                            })
                        })
                        .collect::<Result<_, CliError>>()?,
                )
            };
            Ok(Snapshot {
                t,
                exotic: sol.snapshots[j].clone(),
                embedded,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let rows: Vec<ResidualCsv> = residuals
        .iter()
        .map(|r| ResidualCsv {
            t: r.t,
            xi: &labels[r.point],
            lhs_re: r.lhs.re,
            lhs_im: r.lhs.im,
            rhs_re: r.rhs.re,
            rhs_im: r.rhs.im,
            residual: r.residual,
            budget: r.budget,
            within_budget: r.within_budget,
            within_horizon: r.within_horizon,
        })
        .collect();
    let pass = checks_pass && residual_pass;
    let horizon_body = HorizonBody {
        horizon: &sol.horizon,
        verdicts: &sol.verdicts,
        in_theory: sol.in_theory(),
    };
    let files = vec![
        out.json(
            "solution.json",
            &SolutionBody {
                initial_data: source.clone(),
                p: sol.p,
                grid: sol.times.clone(),
                initial_norm: sol.initial_norm,
                horizon: sol.horizon,
                verdicts: sol.verdicts.clone(),
                snapshots,
                checks,
                pass,
            },
        )?,
        out.csv(
            "residuals.csv",
            &[
                "t",
                "xi",
                "lhs_re",
                "lhs_im",
                "rhs_re",
                "rhs_im",
                "residual",
                "budget",
                "within_budget",
                "within_horizon",
            ],
            &rows,
        )?,
        out.json("horizon.json", &horizon_body)?,
    ];
    let worst = residuals
        .iter()
        .map(|r| r.residual / r.budget.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let out_of_theory = sol.verdicts.iter().filter(|v| !v.within_horizon).count();
    Ok(Outcome {
        pass,
        files,
        summary: vec![
            format!(
                "horizon T* = {:.6} (K_a = {}, admissible {}), {} of {} grid times outside",
                sol.horizon.t_star,
                sol.horizon.k_a,
                sol.horizon.admissible,
                out_of_theory,
                sol.times.len()
            ),
            format!(
                "residuals {} ({} cells, worst residual/budget {worst:.3e}, source {source})",
                verdict(residual_pass),
                rows.len()
            ),
            format!("semigroup and generator checks {}", verdict(checks_pass)),
        ],
    })
}

// ---------------------------------------------------------------- cesaro-scan

#[derive(Serialize)]
struct ScanRow<'a> {
    xi: &'a str,
    n: usize,
    partial_re: f64,
    partial_im: f64,
    closed_form_re: Option<f64>,
    closed_form_im: Option<f64>,
    deviation: Option<f64>,
}

#[derive(Serialize)]
struct ScanPoint<'a> {
    label: &'a str,
    #[serde(flatten)]
    point: &'a LaplacianPoint,
}

#[derive(Serialize)]
struct ScanBody<'a> {
    initial_data: String,
    order: f64,
    points: Vec<ScanPoint<'a>>,
    reconstruction: Option<&'a ExoticFock>,
    pass: bool,
}

pub fn cesaro_scan(config: &ExperimentConfig, out: &ReportWriter) -> Result<Outcome, CliError> {
    let (phi, source) = initial_data(config)?;
    let frame = config.build_frame()?;
    let points = config.test_vectors()?;
    if points.is_empty() {
        return Err(CliError::Config(
            "cesaro-scan needs at least one test point".into(),
        ));
    }
    let labels = config.labels();
    let big = embed_fock(&phi, &frame)?;
    let report = exotic_laplacian(
        &big,
        &frame,
        &points,
        Some(&phi),
        &config.ladder,
        config.tolerances.intertwining,
    )?;
    let lrows = report.rows(&labels);
    let rows: Vec<ScanRow> = lrows
        .iter()
        .map(|r| ScanRow {
            xi: &r.label,
            n: r.n,
            partial_re: r.partial.re,
            partial_im: r.partial.im,
            closed_form_re: r.closed_form.map(|c| c.re),
            closed_form_im: r.closed_form.map(|c| c.im),
            deviation: r.deviation,
        })
        .collect();
    let pass = report.pass();
    let body = ScanBody {
        initial_data: source,
        order: report.order,
        points: labels
            .iter()
            .zip(&report.points)
            .map(|(l, p)| ScanPoint { label: l, point: p })
            .collect(),
        reconstruction: report.reconstruction.as_ref(),
        pass,
    };
    let files = vec![
        out.csv(
            "cesaro_scan.csv",
            &[
                "xi",
                "N",
                "partial_re",
                "partial_im",
                "closed_form_re",
                "closed_form_im",
                "deviation",
            ],
            &rows,
        )?,
        out.json("cesaro_scan.json", &body)?,
    ];
    let summary = labels
        .iter()
        .zip(&report.points)
        .map(|(l, p)| {
            format!(
                "{l}: N = {} partial {:.12} closed form {} discrepancy {} tolerance {:.3e} in domain {}",
                p.estimate.largest_n(),
                p.estimate.last(),
                p.closed_form.map_or("-".into(), |c| format!("{c:.12}")),
                p.discrepancy.map_or("-".into(), |d| format!("{d:.3e}")),
                p.tolerance,
                p.in_domain
            )
        })
        .collect();
    Ok(Outcome {
        pass,
        files,
        summary,
    })
}
