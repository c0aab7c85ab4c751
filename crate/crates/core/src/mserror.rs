//! Mean-square error calculus for truncated expansions: exact errors,
//! bounds, Monte-Carlo estimates and truncation-level selection.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::coeffs::{squared_scale, CoeffEngine, CoefficientTensor, IntegralSpec, Weights};
use crate::kernels::{double_qmax, ito_double, ito_expansion, strat_double, strat_tensor};
use crate::legendre::RationalPoly;
use crate::noise::{sample_noise, StreamKey};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMethod {
    ClosedForm,
    PermutationForm,
    Bound,
    MonteCarlo,
}

impl fmt::Display for ErrorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMethod::ClosedForm => "closed-form",
            ErrorMethod::PermutationForm => "permutation-form",
            ErrorMethod::Bound => "bound",
            ErrorMethod::MonteCarlo => "monte-carlo",
        })
    }
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub spec: IntegralSpec,
    pub q: usize,
    pub exact_error: Option<f64>,
    pub upper_bound: Option<f64>,
    pub mc_estimate: Option<McEstimate>,
    pub method: ErrorMethod,
}

impl ErrorReport {
    /// The value selection compares against the threshold.
    pub fn best(&self) -> Option<f64> {
        self.exact_error
            .or(self.upper_bound)
            .or(self.mc_estimate.map(|e| e.mean))
    }
}

/// `‖K‖²` for the weights: returns the rational `c` and exponent `p` with
/// `I_k = c Δ^p`.
pub fn exact_ik(weights: &Weights) -> (BigRational, u32) {
    let zero = BigRational::zero();
    let mut f = RationalPoly::one();
    for &l in weights.as_slice() {
        let mut coeffs = vec![BigRational::zero(); 2 * l as usize + 1];
        coeffs[2 * l as usize] = BigRational::one();
        f = (&f * &RationalPoly::from_coeffs(coeffs)).integral_from(&zero);
    }
    (f.eval(&BigRational::one()), weights.delta_power())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum DoubleKind {
    Plain,
    Weighted,
}

fn double_kind(weights: &Weights) -> Result<DoubleKind> {
    match weights.as_slice() {
        [0, 0] => Ok(DoubleKind::Plain),
        [0, 1] | [1, 0] => Ok(DoubleKind::Weighted),
        _ => Err(Error::Unsupported(format!(
            "closed-form error for weights ({weights})"
        ))),
    }
}

/// Exact dimensionless error of the double-integral closed forms; multiply
/// by `Δ²` for `(00)` and `Δ⁴` for `(01)`, `(10)`.
///
/// `(00)` with equal components is exact (zero). For the weighted pair with
/// equal components this is the error of the Itô form.
pub fn ms_error_double_exact(weights: &Weights, q: usize, equal: bool) -> Result<BigRational> {
    let q = q as i64;
    match (double_kind(weights)?, equal) {
        (DoubleKind::Plain, true) => Ok(BigRational::zero()),
        (DoubleKind::Plain, false) => {
            let s: BigRational = (1..=q).map(|i| rat(1, 4 * i * i - 1)).sum();
            Ok((rat(1, 2) - s) * rat(1, 2))
        }
        (DoubleKind::Weighted, false) => {
            let a: BigRational = (2..=q).map(|i| rat(2, 4 * i * i - 1)).sum();
            let b: BigRational = (1..=q)
                .map(|i| rat(1, (2 * i - 1) * (2 * i - 1) * (2 * i + 3) * (2 * i + 3)))
                .sum();
            let c: BigRational = (0..=q)
                .map(|i| {
                    rat(
                        (i + 2) * (i + 2) + (i + 1) * (i + 1),
                        (2 * i + 1) * (2 * i + 5) * (2 * i + 3) * (2 * i + 3),
                    )
                })
                .sum();
            Ok((rat(5, 9) - a - b - c) * rat(1, 16))
        }
        (DoubleKind::Weighted, true) => {
            let a: BigRational = (0..=q)
                .map(|i| rat(1, (2 * i + 1) * (2 * i + 5) * (2 * i + 3) * (2 * i + 3)))
                .sum();
            let b: BigRational = (1..=q)
                .map(|i| rat(2, (2 * i - 1) * (2 * i - 1) * (2 * i + 3) * (2 * i + 3)))
                .sum();
            Ok((rat(1, 9) - a - b) * rat(1, 16))
        }
    }
}

// Same sums in floating point, for scans over very large q.
fn double_error_coeff(kind: DoubleKind, q: usize, equal: bool) -> f64 {
    let mut s = CompensatedSum::new();
    match (kind, equal) {
        (DoubleKind::Plain, true) => return 0.0,
        (DoubleKind::Plain, false) => return 0.25 / (2 * q + 1) as f64,
        (DoubleKind::Weighted, false) => {
            s.add(5.0 / 9.0);
            for i in 0..=q {
                let f = i as f64;
                if i >= 2 {
                    s.add(-2.0 / (4.0 * f * f - 1.0));
                }
                if i >= 1 {
                    s.add(-1.0 / ((2.0 * f - 1.0).powi(2) * (2.0 * f + 3.0).powi(2)));
                }
                s.add(
                    -((f + 2.0).powi(2) + (f + 1.0).powi(2))
                        / ((2.0 * f + 1.0) * (2.0 * f + 5.0) * (2.0 * f + 3.0).powi(2)),
                );
            }
        }
        (DoubleKind::Weighted, true) => {
            s.add(1.0 / 9.0);
            for i in 0..=q {
                let f = i as f64;
                s.add(-1.0 / ((2.0 * f + 1.0) * (2.0 * f + 5.0) * (2.0 * f + 3.0).powi(2)));
                if i >= 1 {
                    s.add(-2.0 / ((2.0 * f - 1.0).powi(2) * (2.0 * f + 3.0).powi(2)));
                }
            }
        }
    }
    s.value() / 16.0
}

/// Closed-form error of the `(00)`, `(01)`, `(10)` expansions at level `q`.
pub fn ms_error_double(weights: &Weights, q: usize, delta: f64, equal: bool) -> Result<f64> {
    let kind = double_kind(weights)?;
    let power = if kind == DoubleKind::Plain { 2 } else { 4 };
    Ok(double_error_coeff(kind, q, equal).max(0.0) * delta.powi(power))
}

/// Mean of the part of a weighted Stratonovich double integral with equal
/// components that its truncated form leaves out: `Σ_{i>q} C_{ii} / Δ²`.
pub fn double_strat_bias(q: usize) -> f64 {
    (1.0 / (2 * q + 1) as f64 + 1.0 / (2 * q + 3) as f64) / 16.0
}

/// Position permutations that map every position to one carrying the same
/// component, identity included.
pub fn allowed_permutations(components: &[usize]) -> Vec<Vec<usize>> {
    fn go(
        pos: usize,
        comps: &[usize],
        used: &mut [bool],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == comps.len() {
            out.push(cur.clone());
            return;
        }
        for p in 0..comps.len() {
            if !used[p] && comps[p] == comps[pos] {
                used[p] = true;
                cur.push(p);
                go(pos + 1, comps, used, cur, out);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(
        0,
        components,
        &mut vec![false; components.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

fn permutation_sum(
    spec: &IntegralSpec,
    tensor: &CoefficientTensor,
    include: &dyn Fn(&[usize]) -> bool,
    upto: usize,
) -> BigRational {
    let k = spec.multiplicity();
    let perms = allowed_permutations(spec.components());
    let extent = upto + 1;
    let masked = |j: &[usize]| -> Option<&BigRational> {
        if include(j) {
            tensor.exact(j)
        } else {
            None
        }
    };
    let mut total = BigRational::zero();
    let mut j = vec![0usize; k];
    let mut sj = vec![0usize; k];
    loop {
        if let Some(c) = masked(&j).filter(|c| !c.is_zero()) {
            let mut inner = BigRational::zero();
            for p in &perms {
                for (dst, &src) in sj.iter_mut().zip(p) {
                    *dst = j[src];
                }
                if let Some(cs) = masked(&sj) {
                    inner += cs;
                }
            }
            if !inner.is_zero() {
                total += squared_scale(spec.weights(), &j) * c * inner;
            }
        }
        let mut l = 0;
        while l < k {
            j[l] += 1;
            if j[l] < extent {
                break;
            }
            j[l] = 0;
            l += 1;
        }
        if l == k {
            break;
        }
    }
    total
}

/// Dimensionless permutation-form error `(I_k − Σ_j C_j Σ_σ C_{σ(j)}) / Δ^{k+2L}`
/// over the entries of `tensor` selected by `include`.
pub fn ms_error_permutation_masked(
    spec: &IntegralSpec,
    tensor: &CoefficientTensor,
    include: &dyn Fn(&[usize]) -> bool,
) -> Result<BigRational> {
    tensor.ensure_matches(spec)?;
    let (ik, _) = exact_ik(spec.weights());
    Ok(ik - permutation_sum(spec, tensor, include, tensor.q()))
}

pub fn ms_error_permutation_exact(
    spec: &IntegralSpec,
    tensor: &CoefficientTensor,
) -> Result<BigRational> {
    ms_error_permutation_masked(spec, tensor, &|_| true)
}

/// Exact error of the Itô expansion (and of the Stratonovich one for
/// pairwise distinct components) at the tensor's level and step size.
pub fn ms_error_permutation(spec: &IntegralSpec, tensor: &CoefficientTensor) -> Result<f64> {
    let e = ms_error_permutation_exact(spec, tensor)?;
    Ok(e.to_f64().unwrap_or(f64::NAN) * tensor.delta().powi(spec.weights().delta_power() as i32))
}

/// `(I_k − Σ_{j ≤ q} C_j²) / Δ^{k+2L}` in exact arithmetic.
pub fn residual_constant(weights: &Weights, q: usize) -> Result<BigRational> {
    let tensor = CoeffEngine::global().build_tensor(weights, q, 1.0)?;
    let (ik, _) = exact_ik(weights);
    let sum: BigRational = tensor
        .exact_values()
        .iter()
        .enumerate()
        .map(|(flat, c)| squared_scale(weights, &tensor.index_tuple(flat)) * c * c)
        .sum();
    Ok(ik - sum)
}

/// `k! (I_k − Σ_{j ≤ q} C_j²)`.
pub fn upper_bound_factorial(spec: &IntegralSpec, tensor: &CoefficientTensor) -> Result<f64> {
    tensor.ensure_matches(spec)?;
    let weights = spec.weights();
    let (ik, p) = exact_ik(weights);
    let sum: BigRational = tensor
        .exact_values()
        .iter()
        .enumerate()
        .map(|(flat, c)| squared_scale(weights, &tensor.index_tuple(flat)) * c * c)
        .sum();
    let fact: u64 = (1..=spec.multiplicity() as u64).product();
    let value = (ik - sum) * BigRational::from_integer(BigInt::from(fact));
    Ok(value.to_f64().unwrap_or(f64::NAN) * tensor.delta().powi(p as i32))
}

/// `−(Δ²/8) ln(1 − 2/(2q+1))`, an upper bound on the `(00)` error for
/// distinct components.
pub fn tail_bound_log(q: usize, delta: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidArgument(
            "logarithmic tail bound needs q ≥ 1 (ln of a negative number at q = 0)".into(),
        ));
    }
    Ok(-(delta * delta / 8.0) * (1.0 - 2.0 / (2 * q + 1) as f64).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Stratonovich,
    Ito,
}

/// Monte-Carlo estimate of `E[(I^{q_ref} − I^{q})²]`, both expansions read
/// from the same noise per sample.
pub fn mc_error_estimate(
    spec: &IntegralSpec,
    q: usize,
    q_ref: usize,
    n: usize,
    delta: f64,
    seed: u64,
    convention: Convention,
) -> Result<McEstimate> {
    if q_ref < q {
        return Err(Error::InvalidArgument(format!(
            "q_ref {q_ref} is below q {q}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let weights = spec.weights().clone();
    let k = spec.multiplicity();
    let m = spec.components().iter().copied().max().unwrap_or(1);
    let comps = spec.components().to_vec();

    let engine = CoeffEngine::global();
    let (lo, hi, qmax) = if k >= 3 {
        (
            Some(engine.build_tensor(&weights, q, delta)?),
            Some(engine.build_tensor(&weights, q_ref, delta)?),
            q_ref,
        )
    } else if k == 2 {
        (None, None, double_qmax(&weights, q_ref))
    } else {
        return Ok(McEstimate {
            mean: 0.0,
            std_error: 0.0,
            samples: n,
        });
    };

    let eval = |nm: &crate::noise::NoiseMatrix,
                level: usize,
                t: Option<&CoefficientTensor>|
     -> Result<f64> {
        match (k, convention) {
            (2, Convention::Stratonovich) => {
                strat_double(&weights, nm, comps[0], comps[1], level, delta)
            }
            (2, Convention::Ito) => ito_double(&weights, nm, comps[0], comps[1], level, delta),
            (_, Convention::Stratonovich) => strat_tensor(spec, nm, t.unwrap()),
            (_, Convention::Ito) => ito_expansion(spec, nm, t.unwrap()),
        }
    };

    let squares: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|path| {
            let nm = sample_noise(StreamKey::new(seed, path, 0), m, qmax);
            let d = eval(&nm, q_ref, hi.as_ref())? - eval(&nm, q, lo.as_ref())?;
            Ok(d * d)
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(&squares))
}

pub(crate) fn mean_and_se(values: &[f64]) -> McEstimate {
    let n = values.len();
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let ss = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .value();
    let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
    McEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        samples: n,
    }
}

/// Limits for [`select_q_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectOptions {
    /// Largest level tried for the closed-form double integrals.
    pub cap: usize,
    /// Largest level tried for multiplicities 3, 4, 5 (exact tensors).
    pub tensor_caps: [usize; 3],
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            cap: 1_000_000,
            tensor_caps: [24, 10, 6],
        }
    }
}

impl SelectOptions {
    pub fn cap_for(&self, k: usize) -> usize {
        match k {
            0..=2 => self.cap,
            _ => self.tensor_caps[k - 3].min(self.cap),
        }
    }
}

pub fn select_q(spec: &IntegralSpec, delta: f64, c_target: f64) -> Result<ErrorReport> {
    select_q_with(spec, delta, c_target, &SelectOptions::default())
}

/// Smallest `q` whose error (exact where available, otherwise the
/// permutation-form proxy) is at most `c_target · Δ⁶`.
pub fn select_q_with(
    spec: &IntegralSpec,
    delta: f64,
    c_target: f64,
    opts: &SelectOptions,
) -> Result<ErrorReport> {
    if !(c_target > 0.0 && c_target.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C_target must be positive, got {c_target}"
        )));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {delta}"
        )));
    }
    let threshold = c_target * delta.powi(6);
    let weights = spec.weights();
    let k = spec.multiplicity();
    let cap = opts.cap_for(k);
    let exceeded = || Error::QExceedsCap {
        family: spec.to_string(),
        cap,
    };
    let report = |q, exact, bound, method| ErrorReport {
        spec: spec.clone(),
        q,
        exact_error: exact,
        upper_bound: bound,
        mc_estimate: None,
        method,
    };

    match k {
        1 => Ok(report(0, Some(0.0), None, ErrorMethod::ClosedForm)),
        2 => {
            let kind = double_kind(weights)?;
            let equal = spec.components()[0] == spec.components()[1];
            let scale = match kind {
                DoubleKind::Plain => delta.powi(2),
                DoubleKind::Weighted => delta.powi(4),
            };
            let err_at = |q: usize| -> f64 {
                let mut e = double_error_coeff(kind, q, equal).max(0.0) * scale;
                if kind == DoubleKind::Weighted && equal {
                    let b = double_strat_bias(q) * delta * delta;
                    e += b * b;
                }
                e
            };
            if kind == DoubleKind::Plain && !equal {
                // Δ²/(4(2q+1)) ≤ threshold, solved directly.
                let need = ((scale / (4.0 * threshold) - 1.0) / 2.0).ceil().max(0.0);
                if need > cap as f64 {
                    return Err(exceeded());
                }
                let mut q = need as usize;
                while q > 0 && err_at(q - 1) <= threshold {
                    q -= 1;
                }
                while err_at(q) > threshold {
                    q += 1;
                    if q > cap {
                        return Err(exceeded());
                    }
                }
                let bound = if q >= 1 {
                    tail_bound_log(q, delta).ok()
                } else {
                    None
                };
                return Ok(report(q, Some(err_at(q)), bound, ErrorMethod::ClosedForm));
            }
            // Monotone in q; bisect over [0, cap].
            if err_at(cap) > threshold {
                return Err(exceeded());
            }
            let (mut lo, mut hi) = (0usize, cap);
            if err_at(0) <= threshold {
                hi = 0;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if err_at(mid) <= threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(report(hi, Some(err_at(hi)), None, ErrorMethod::ClosedForm))
        }
        _ => {
            let engine = CoeffEngine::global();
            let (ik, p) = exact_ik(weights);
            let dp = delta.powi(p as i32);
            let distinct = spec.pairwise_distinct();
            // Grow the tensor geometrically; within each tensor, scan levels
            // in order, accumulating the permutation sum shell by shell.
            let mut top = 2usize.min(cap);
            loop {
                let tensor = engine.build_tensor(weights, top, delta)?;
                let mut acc = BigRational::zero();
                for q in 0..=top {
                    // Allowed permutations preserve max(j), so level q adds
                    // exactly the shell max(j) = q.
                    let shell = |j: &[usize]| j.iter().copied().max() == Some(q);
                    acc += permutation_sum(spec, &tensor, &shell, q);
                    let err = (&ik - &acc).to_f64().unwrap_or(f64::NAN).max(0.0) * dp;
                    if err <= threshold {
                        let bound = if distinct {
                            None
                        } else {
                            let t = engine.build_tensor(weights, q, delta)?;
                            upper_bound_factorial(spec, &t).ok()
                        };
                        return Ok(report(q, Some(err), bound, ErrorMethod::PermutationForm));
                    }
                }
                if top >= cap {
                    return Err(exceeded());
                }
                top = (2 * top + 1).min(cap);
            }
        }
    }
}

/// Component patterns (as 1-based labels, first occurrence increasing) that
/// an `m`-dimensional noise can realize for multiplicity `k`.
pub fn component_patterns(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(
        pos: usize,
        k: usize,
        m: usize,
        used: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == k {
            out.push(cur.clone());
            return;
        }
        for c in 1..=(used + 1).min(m) {
            cur.push(c);
            go(pos + 1, k, m, used.max(c), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, m, 0, &mut Vec::new(), &mut out);
    out
}

/// Level for a whole family: the largest [`select_q_with`] result over all
/// component patterns realizable with `m` noise components.
pub fn select_family_q(
    weights: &Weights,
    m: usize,
    delta: f64,
    c_target: f64,
    opts: &SelectOptions,
) -> Result<(usize, Vec<ErrorReport>)> {
    let mut reports = Vec::new();
    for comps in component_patterns(weights.multiplicity(), m.max(1)) {
        let spec = IntegralSpec::new(weights.clone(), comps)?;
        reports.push(select_q_with(&spec, delta, c_target, opts)?);
    }
    let q = reports.iter().map(|r| r.q).max().unwrap_or(0);
    Ok((q, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::build_tensor;

    fn w(s: &str) -> Weights {
        s.parse().unwrap()
    }

    #[test]
    fn norms() {
        assert_eq!(exact_ik(&w("000")), (rat(1, 6), 3));
        assert_eq!(exact_ik(&w("010")), (rat(1, 20), 5));
        assert_eq!(exact_ik(&w("00000")), (rat(1, 120), 5));
        assert_eq!(exact_ik(&w("01")), (rat(1, 4), 4));
        assert_eq!(exact_ik(&w("10")), (rat(1, 12), 4));
        assert_eq!(exact_ik(&w("2")), (rat(1, 5), 5));
    }

    #[test]
    fn double_errors() {
        assert_eq!(ms_error_double(&w("00"), 0, 1.0, false).unwrap(), 0.25);
        assert_eq!(ms_error_double(&w("00"), 3, 2.0, true).unwrap(), 0.0);
        assert_eq!(
            ms_error_double_exact(&w("10"), 0, true).unwrap(),
            rat(1, 180)
        );
        for q in [0, 1, 5, 40] {
            for eq in [false, true] {
                for fam in ["00", "01"] {
                    let exact = ms_error_double_exact(&w(fam), q, eq)
                        .unwrap()
                        .to_f64()
                        .unwrap();
                    let float = ms_error_double(&w(fam), q, 1.0, eq).unwrap();
                    assert!((exact - float).abs() < 1e-15, "{fam} {q} {eq}");
                }
            }
        }
    }

    #[test]
    fn permutations() {
        assert_eq!(allowed_permutations(&[1, 2, 3]).len(), 1);
        assert_eq!(allowed_permutations(&[1, 1, 2]).len(), 2);
        assert_eq!(allowed_permutations(&[4, 4, 4]).len(), 6);
        assert_eq!(component_patterns(3, 1), vec![vec![1, 1, 1]]);
        assert_eq!(component_patterns(3, 2).len(), 4);
        assert_eq!(component_patterns(3, 3).len(), 5);
    }

    #[test]
    fn distinct_permutation_form_is_residual() {
        let spec = IntegralSpec::distinct(w("100"));
        let t = build_tensor(&spec, 2, 1.0).unwrap();
        assert_eq!(
            ms_error_permutation_exact(&spec, &t).unwrap(),
            residual_constant(&w("100"), 2).unwrap()
        );
    }

    #[test]
    fn log_bound() {
        assert!(tail_bound_log(0, 1.0).is_err());
        let b = tail_bound_log(1, 1.0).unwrap();
        assert!((b - (3f64).ln() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn selection_examples() {
        let spec = IntegralSpec::distinct(w("00"));
        assert_eq!(select_q(&spec, 1.0, 0.25).unwrap().q, 0);
        let spec = IntegralSpec::distinct(w("000"));
        assert_eq!(select_q(&spec, 1.0, 0.0196).unwrap().q, 6);
        let spec = IntegralSpec::repeated(w("000"));
        assert_eq!(select_q(&spec, 0.1, 1.0).unwrap().q, 0);
        assert!(matches!(
            select_q(&IntegralSpec::distinct(w("00")), 0.01, 1.0),
            Err(Error::QExceedsCap { .. })
        ));
    }
}
