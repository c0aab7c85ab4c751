//! Monte-Carlo experiments: strong convergence order and validation of the
//! mean-square error formulas.

use num_traits::ToPrimitive;

use crate::coeffs::{CoeffEngine, IntegralSpec};
use crate::mserror::{
    mc_error_estimate, ms_error_double, ms_error_permutation_exact, Convention, McEstimate,
};
use crate::scheme::{simulate, SchemeConfig, SdeProblem};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Smallest sample count [`validate_error_formulas`] accepts.
pub const MIN_VALIDATION_SAMPLES: usize = 10_000;

/// Fits below this coefficient of determination are flagged, not trusted.
pub const MIN_R_SQUARED: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlopeStatus {
    Fitted,
    /// The fit is poor (`R² < 0.95`).
    Inconclusive,
    /// Some errors sit at the rounding floor, so no slope is meaningful.
    Undefined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Strictly decreasing.
    pub deltas: Vec<f64>,
    /// Root-mean-square endpoint errors, one per step size.
    pub rms_errors: Vec<f64>,
    /// Standard error of each mean squared error.
    pub mse_std_errors: Vec<f64>,
    /// Slope of `ln(rms)` against `ln(Δ)`; `None` when undefined.
    pub fitted_order: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    /// `ln(rms) − fit` per step size.
    pub residuals: Vec<f64>,
    pub n_paths: usize,
    pub status: SlopeStatus,
}

/// Least-squares line `y = a + b x`; returns `(a, b, R², residuals)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().copied().collect::<CompensatedSum>().value() / n;
    let my = y.iter().copied().collect::<CompensatedSum>().value() / n;
    let sxy: CompensatedSum = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: CompensatedSum = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let syy: CompensatedSum = y.iter().map(|b| (b - my) * (b - my)).collect();
    let b = sxy.value() / sxx.value();
    let a = my - b * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - (a + b * xi)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy.value() > 0.0 {
        1.0 - ss_res / syy.value()
    } else {
        1.0
    };
    (a, b, r2, residuals)
}

/// Strong convergence experiment against the problem's exact solution.
///
/// For each step size the scheme of `template.order` runs `n_paths` paths
/// to `t_end`; the exact solution uses the Wiener values assembled from the
/// very increments the scheme consumed.
pub fn strong_order_experiment(
    problem: &SdeProblem,
    template: &SchemeConfig,
    x0: &[f64],
    deltas: &[f64],
    t_end: f64,
    n_paths: usize,
) -> Result<ConvergenceReport> {
    if deltas.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence fit needs at least 3 step sizes, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    if n_paths < 2 {
        return Err(Error::InvalidArgument("need at least two paths".into()));
    }
    if problem
        .exact_solution(x0, 0.0, &vec![0.0; problem.m()])
        .is_none()
    {
        return Err(Error::Unsupported(format!(
            "problem {} has no exact solution",
            problem.name()
        )));
    }
    let mut rms = Vec::with_capacity(deltas.len());
    let mut ses = Vec::with_capacity(deltas.len());
    let mut floor_hit = false;
    for &delta in deltas {
        let mut cfg = template.clone();
        cfg.delta = delta;
        let paths = simulate(problem, &cfg, x0, t_end, n_paths)?;
        let blown = paths.iter().filter(|p| p.blew_up).count();
        if blown > 0 {
            return Err(Error::NonFinite(format!(
                "{blown} paths blew up at step {delta}"
            )));
        }
        let mut sq = Vec::with_capacity(paths.len());
        let mut scale = CompensatedSum::new();
        for p in &paths {
            let exact = problem
                .exact_solution(x0, p.final_time(), p.final_wiener())
                .expect("checked above");
            let e2: f64 = p
                .final_state()
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            sq.push(e2);
            scale.add(exact.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        let est = crate::mserror::mean_and_se(&sq);
        let r = est.mean.sqrt();
        let floor = 64.0 * f64::EPSILON * (scale.value() / paths.len() as f64).max(1.0);
        if r <= floor {
            floor_hit = true;
        }
        rms.push(r);
        ses.push(est.std_error);
    }
    if floor_hit {
        return Ok(ConvergenceReport {
            deltas: deltas.to_vec(),
            rms_errors: rms,
            mse_std_errors: ses,
            fitted_order: None,
            intercept: None,
            r_squared: None,
            residuals: Vec::new(),
            n_paths,
            status: SlopeStatus::Undefined,
        });
    }
    let lx: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = rms.iter().map(|e| e.ln()).collect();
    let (a, b, r2, residuals) = linear_fit(&lx, &ly);
    Ok(ConvergenceReport {
        deltas: deltas.to_vec(),
        rms_errors: rms,
        mse_std_errors: ses,
        fitted_order: Some(b),
        intercept: Some(a),
        r_squared: Some(r2),
        residuals,
        n_paths,
        status: if r2 < MIN_R_SQUARED {
            SlopeStatus::Inconclusive
        } else {
            SlopeStatus::Fitted
        },
    })
}

/// One `(spec, q)` cell of a validation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCell {
    pub spec: IntegralSpec,
    pub q: usize,
    /// Published approximation of the dimensionless error, if any.
    pub reference: Option<f64>,
}

impl ValidationCell {
    pub fn new(spec: IntegralSpec, q: usize) -> Self {
        Self {
            spec,
            q,
            reference: None,
        }
    }

    pub fn with_reference(mut self, value: f64) -> Self {
        self.reference = Some(value);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub spec: IntegralSpec,
    pub q: usize,
    pub q_ref: usize,
    /// Exact error at `q`.
    pub exact_error: f64,
    /// Expected `E[(I^{q_ref} − I^q)²] = E(q) − E(q_ref)`.
    pub expected: f64,
    pub mc: McEstimate,
    pub z: f64,
    pub pass: bool,
    /// `reference · Δ^p`, shown alongside when the cell carries one.
    pub reference: Option<f64>,
}

/// Reference level for the Monte-Carlo comparison at `q`.
pub fn reference_level(k: usize, q: usize) -> usize {
    match k {
        0..=2 => 100.max(q + 1),
        3 => q + 4,
        4 => q + 2,
        _ => q + 1,
    }
}

fn uses_ito(spec: &IntegralSpec) -> bool {
    !spec.pairwise_distinct() && !(spec.multiplicity() == 2 && spec.weights().total() == 0)
}

fn exact_error(spec: &IntegralSpec, q: usize, delta: f64) -> Result<f64> {
    let weights = spec.weights();
    match spec.multiplicity() {
        1 => Ok(0.0),
        2 => {
            let c = spec.components();
            ms_error_double(weights, q, delta, c[0] == c[1])
        }
        _ => {
            let tensor = CoeffEngine::global().build_tensor(weights, q, delta)?;
            let e = ms_error_permutation_exact(spec, &tensor)?;
            Ok(e.to_f64().unwrap_or(f64::NAN) * delta.powi(weights.delta_power() as i32))
        }
    }
}

/// Monte-Carlo check of the exact error formulas: per cell, the mean square
/// difference between the level-`q` and a finer reference expansion against
/// `E(q) − E(q_ref)`; a cell passes when `|z| ≤ 3`.
///
/// Equal-component cells other than `(00)` compare Itô expansions, whose
/// errors the formulas describe.
pub fn validate_error_formulas(
    cells: &[ValidationCell],
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ValidationRow>> {
    if n_samples < MIN_VALIDATION_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "validation needs at least {MIN_VALIDATION_SAMPLES} samples, got {n_samples}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {delta}"
        )));
    }
    let mut rows = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let spec = &cell.spec;
        let k = spec.multiplicity();
        let q_ref = reference_level(k, cell.q);
        let e_q = exact_error(spec, cell.q, delta)?;
        let e_ref = exact_error(spec, q_ref, delta)?;
        let expected = e_q - e_ref;
        let convention = if uses_ito(spec) {
            Convention::Ito
        } else {
            Convention::Stratonovich
        };
        let mc = mc_error_estimate(
            spec,
            cell.q,
            q_ref,
            n_samples,
            delta,
            seed.wrapping_add((c as u64) << 32),
            convention,
        )?;
        let diff = mc.mean - expected;
        let z = if mc.std_error > 0.0 {
            diff / mc.std_error
        } else if diff.abs() <= 1e-12 * expected.abs().max(f64::MIN_POSITIVE) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        rows.push(ValidationRow {
            spec: spec.clone(),
            q: cell.q,
            q_ref,
            exact_error: e_q,
            expected,
            mc,
            z,
            pass: z.abs() <= 3.0,
            reference: cell
                .reference
                .map(|r| r * delta.powi(spec.weights().delta_power() as i32)),
        });
    }
    Ok(rows)
}

/// Closed-form double-integral cells at `q ∈ {0, 2, 6}`: `(00)` with
/// distinct components, `(01)` and `(10)` with distinct and with equal ones.
pub fn formula_cells() -> Vec<ValidationCell> {
    let mut cells = Vec::new();
    for q in [0, 2, 6] {
        for (w, comps) in [
            ("00", [1, 2]),
            ("01", [1, 2]),
            ("10", [1, 2]),
            ("01", [1, 1]),
            ("10", [1, 1]),
        ] {
            let spec = IntegralSpec::new(w.parse().expect("family"), comps.to_vec()).expect("spec");
            cells.push(ValidationCell::new(spec, q));
        }
    }
    cells
}

/// The six published cells: `(000)` at `q = 6`, `(100)`, `(010)`, `(001)`,
/// `(0000)` at `q = 2`, and `(00000)` at `q = 1`, all with distinct
/// components, with their published dimensionless errors.
pub fn published_cells() -> Vec<ValidationCell> {
    [
        ("000", 6, 0.01956000),
        ("100", 2, 0.00815429),
        ("010", 2, 0.01739030),
        ("001", 2, 0.02528010),
        ("0000", 2, 0.02360840),
        ("00000", 1, 0.00759105),
    ]
    .into_iter()
    .map(|(w, q, r)| {
        ValidationCell::new(IntegralSpec::distinct(w.parse().expect("family")), q).with_reference(r)
    })
    .collect()
}
