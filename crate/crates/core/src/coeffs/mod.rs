//! Fourier–Legendre coefficients of iterated integrals.
//!
//! For weights `(l_1, …, l_k)` and indices `(j_1, …, j_k)` the dimensionless
//! coefficient is the nested integral over the ordered simplex of `[-1, 1]^k`
//!
//! ```text
//! C̄ = ∫_{-1}^{1} P_{j_k} w_k ∫_{-1}^{x_k} … ∫_{-1}^{x_2} P_{j_1} w_1 dx_1 … dx_k,
//! w_l(x) = (−(x + 1))^{l_l},
//! ```
//!
//! evaluated exactly by repeated polynomial multiplication and integration.
//! The coefficient on a step of length `Δ` is
//! `C = √∏(2j_l+1) / 2^{k+L} · Δ^{(k+2L)/2} · C̄` with `L = Σ l_l`.

mod spec;
pub mod table;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

pub use spec::{IntegralSpec, Weights, MAX_MULTIPLICITY, MAX_WEIGHT, SCHEME_FAMILIES};

use crate::legendre::{legendre_poly_ref, RationalPoly, DEFAULT_MAX_DEGREE};
use crate::{Error, Result};

fn weight_poly(l: u8) -> RationalPoly {
    match l {
        0 => RationalPoly::one(),
        1 => RationalPoly::from_integers(&[-1, -1]),
        2 => RationalPoly::from_integers(&[1, 2, 1]),
        _ => unreachable!("weights are validated on construction"),
    }
}

fn minus_one() -> BigRational {
    -BigRational::one()
}

/// `√∏(2j_l+1) / 2^{k+L} · Δ^{(k+2L)/2}`.
pub fn scale_factor(weights: &Weights, j: &[usize], delta: f64) -> f64 {
    let prod: f64 = j.iter().map(|&jl| (2 * jl + 1) as f64).product();
    let k_plus_l = (weights.multiplicity() + weights.total()) as i32;
    prod.sqrt() / 2f64.powi(k_plus_l) * delta.powf(weights.delta_power() as f64 / 2.0)
}

/// `∏(2j_l+1) / 4^{k+L}`, the exact part of `C² / (C̄² Δ^{k+2L})`.
pub fn squared_scale(weights: &Weights, j: &[usize]) -> BigRational {
    let prod = j
        .iter()
        .fold(BigInt::one(), |acc, &jl| acc * BigInt::from(2 * jl + 1));
    let k_plus_l = (weights.multiplicity() + weights.total()) as u32;
    BigRational::new(prod, BigInt::from(4u32).pow(k_plus_l))
}

type CacheKey = (Weights, Vec<u16>);

/// Computes and memoizes exact coefficients `C̄`.
///
/// The cache is keyed by weights and index tuple only; component indices do
/// not enter the coefficients.
#[derive(Debug)]
pub struct CoeffEngine {
    max_degree: usize,
    cache: RwLock<HashMap<CacheKey, BigRational>>,
}

impl Default for CoeffEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl CoeffEngine {
    pub fn new() -> Self {
        Self::with_max_degree(DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(max_degree: usize) -> Self {
        Self {
            max_degree: max_degree.min(DEFAULT_MAX_DEGREE),
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Process-wide engine shared by the free functions of this module.
    pub fn global() -> &'static CoeffEngine {
        static ENGINE: OnceLock<CoeffEngine> = OnceLock::new();
        ENGINE.get_or_init(CoeffEngine::new)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    fn check_indices(&self, weights: &Weights, j: &[usize]) -> Result<()> {
        if j.len() != weights.multiplicity() {
            return Err(Error::InvalidSpec(format!(
                "index tuple of length {} for multiplicity {}",
                j.len(),
                weights.multiplicity()
            )));
        }
        if let Some(&big) = j.iter().find(|&&jl| jl > self.max_degree) {
            return Err(Error::DegreeOverflow {
                requested: big,
                max: self.max_degree,
            });
        }
        Ok(())
    }

    /// Exact `C̄_{j_k … j_1}` for `j = (j_1, …, j_k)`.
    pub fn cbar(&self, weights: &Weights, j: &[usize]) -> Result<BigRational> {
        self.check_indices(weights, j)?;
        let key = (weights.clone(), j.iter().map(|&x| x as u16).collect());
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let mut inner = RationalPoly::one();
        for (&l, &jl) in weights.as_slice().iter().zip(j) {
            let integrand = &(&inner * legendre_poly_ref(jl)?) * &weight_poly(l);
            inner = integrand.integral_from(&minus_one());
        }
        let value = inner.eval(&BigRational::one());
        self.cache.write().unwrap().insert(key, value.clone());
        Ok(value)
    }

    /// All `(q+1)^k` exact coefficients, flattened with `j_1` varying fastest.
    pub fn cbar_block(&self, weights: &Weights, q: usize) -> Result<Vec<BigRational>> {
        let k = weights.multiplicity();
        self.check_indices(weights, &vec![q; k])?;
        let n = q + 1;
        let len = n.pow(k as u32);

        let cached: Option<Vec<BigRational>> = {
            let cache = self.cache.read().unwrap();
            (0..len)
                .map(|flat| {
                    cache
                        .get(&(weights.clone(), unflatten(flat, n, k)))
                        .cloned()
                })
                .collect()
        };
        if let Some(values) = cached {
            return Ok(values);
        }

        // Share the inner nested integrals between all tuples with a common
        // prefix (j_1, …, j_r); the outermost index runs in parallel. The last
        // integral ∫_{-1}^{1} g P_j is read off precomputed moments.
        let w = weights.as_slice();
        let polys: Vec<&RationalPoly> = (0..n).map(legendre_poly_ref).collect::<Result<_>>()?;
        let moments = legendre_moments((k - 1) * n + 2 * k, q);
        let slabs: Vec<Vec<BigRational>> = (0..n)
            .into_par_iter()
            .map(|j1| {
                let first = (polys[j1] * &weight_poly(w[0])).integral_from(&minus_one());
                let mut slab = Vec::with_capacity(len / n);
                if k == 1 {
                    slab.push(first.eval(&BigRational::one()));
                } else {
                    fill_block(&polys, &moments, w, 1, &first, &mut slab);
                }
                slab
            })
            .collect();

        let mut values = vec![BigRational::zero(); len];
        for (j1, slab) in slabs.into_iter().enumerate() {
            for (rest, v) in slab.into_iter().enumerate() {
                values[j1 + n * rest] = v;
            }
        }

        let mut cache = self.cache.write().unwrap();
        for (flat, v) in values.iter().enumerate() {
            cache.insert((weights.clone(), unflatten(flat, n, k)), v.clone());
        }
        Ok(values)
    }

    pub fn build_tensor(
        &self,
        weights: &Weights,
        q: usize,
        delta: f64,
    ) -> Result<CoefficientTensor> {
        let exact = self.cbar_block(weights, q)?;
        CoefficientTensor::from_exact(weights.clone(), q, exact, delta)
    }
}

// Appends the values for all remaining index positions of one prefix; the
// slab layout has the next index (level) varying fastest.
fn fill_block(
    polys: &[&RationalPoly],
    moments: &[Vec<BigRational>],
    weights: &[u8],
    level: usize,
    inner: &RationalPoly,
    out: &mut Vec<BigRational>,
) {
    let n = polys.len();
    let weighted = inner * &weight_poly(weights[level]);
    if level + 1 == weights.len() {
        for j in 0..n {
            let mut acc = BigRational::zero();
            for (c, mom) in weighted.coeffs().iter().zip(moments) {
                if !mom[j].is_zero() {
                    acc += c * &mom[j];
                }
            }
            out.push(acc);
        }
        return;
    }
    let start = out.len();
    let mut children: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for p in polys {
        let next = (&weighted * p).integral_from(&minus_one());
        let mut child = Vec::new();
        fill_block(polys, moments, weights, level + 1, &next, &mut child);
        children.push(child);
    }
    // Interleave so that this level's index is the fastest.
    let stride = children[0].len();
    out.reserve(n * stride);
    for rest in 0..stride {
        for child in &children {
            out.push(child[rest].clone());
        }
    }
    debug_assert_eq!(out.len() - start, n * stride);
}

/// `M[d][j] = ∫_{-1}^{1} x^d P_j(x) dx`, which vanishes unless `d ≥ j` and
/// `d − j` is even, where it equals `2^{j+1} d! ((d+j)/2)! / (((d−j)/2)! (d+j+1)!)`.
fn legendre_moments(max_power: usize, max_index: usize) -> Vec<Vec<BigRational>> {
    let mut fact = vec![BigInt::one()];
    for i in 1..=(max_power + max_index + 1) {
        let next = &fact[i - 1] * BigInt::from(i);
        fact.push(next);
    }
    (0..=max_power)
        .map(|d| {
            (0..=max_index)
                .map(|j| {
                    if d < j || (d - j) % 2 == 1 {
                        return BigRational::zero();
                    }
                    let num = (BigInt::one() << (j + 1)) * &fact[d] * &fact[(d + j) / 2];
                    let den = &fact[(d - j) / 2] * &fact[d + j + 1];
                    BigRational::new(num, den)
                })
                .collect()
        })
        .collect()
}

pub(crate) fn unflatten(mut flat: usize, extent: usize, k: usize) -> Vec<u16> {
    let mut j = Vec::with_capacity(k);
    for _ in 0..k {
        j.push((flat % extent) as u16);
        flat /= extent;
    }
    j
}

/// Dense `(q+1)^k` array of coefficients for one weight pattern and step size.
///
/// Entries are stored with `j_1` varying fastest. The exact `C̄` values are
/// the source of truth; the floating-point `C` values are derived for `delta`.
#[derive(Clone, Debug)]
pub struct CoefficientTensor {
    weights: Weights,
    q: usize,
    delta: f64,
    exact: Arc<Vec<BigRational>>,
    scaled: Vec<f64>,
}

impl CoefficientTensor {
    pub fn from_exact(
        weights: Weights,
        q: usize,
        exact: Vec<BigRational>,
        delta: f64,
    ) -> Result<Self> {
        let expected = (q + 1).pow(weights.multiplicity() as u32);
        if exact.len() != expected {
            return Err(Error::TensorMismatch(format!(
                "{} entries for extent {}^{}",
                exact.len(),
                q + 1,
                weights.multiplicity()
            )));
        }
        Self::with_shared(weights, q, Arc::new(exact), delta)
    }

    fn with_shared(
        weights: Weights,
        q: usize,
        exact: Arc<Vec<BigRational>>,
        delta: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {delta}"
            )));
        }
        let k = weights.multiplicity();
        let scaled = exact
            .iter()
            .enumerate()
            .map(|(flat, c)| {
                let j: Vec<usize> = unflatten(flat, q + 1, k)
                    .into_iter()
                    .map(usize::from)
                    .collect();
                scale_factor(&weights, &j, delta) * c.to_f64().unwrap_or(f64::NAN)
            })
            .collect();
        Ok(Self {
            weights,
            q,
            delta,
            exact,
            scaled,
        })
    }

    /// Same exact coefficients scaled for another step size.
    pub fn rescaled(&self, delta: f64) -> Result<Self> {
        Self::with_shared(self.weights.clone(), self.q, Arc::clone(&self.exact), delta)
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn multiplicity(&self) -> usize {
        self.weights.multiplicity()
    }

    pub fn extent(&self) -> usize {
        self.q + 1
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn flat_index(&self, j: &[usize]) -> Option<usize> {
        if j.len() != self.multiplicity() || j.iter().any(|&x| x > self.q) {
            return None;
        }
        Some(j.iter().rev().fold(0, |acc, &x| acc * (self.q + 1) + x))
    }

    pub fn index_tuple(&self, flat: usize) -> Vec<usize> {
        unflatten(flat, self.q + 1, self.multiplicity())
            .into_iter()
            .map(usize::from)
            .collect()
    }

    pub fn exact(&self, j: &[usize]) -> Option<&BigRational> {
        self.flat_index(j).map(|i| &self.exact[i])
    }

    pub fn get(&self, j: &[usize]) -> Option<f64> {
        self.flat_index(j).map(|i| self.scaled[i])
    }

    pub fn exact_values(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn scaled_values(&self) -> &[f64] {
        &self.scaled
    }

    pub fn ensure_matches(&self, spec: &IntegralSpec) -> Result<()> {
        if spec.weights() != &self.weights {
            return Err(Error::TensorMismatch(format!(
                "tensor for ({}) used with spec {spec}",
                self.weights
            )));
        }
        Ok(())
    }
}

/// Exact `C̄` for `spec` and `j = (j_1, …, j_k)`, from the global engine.
pub fn cbar(spec: &IntegralSpec, j: &[usize]) -> Result<BigRational> {
    CoeffEngine::global().cbar(spec.weights(), j)
}

/// `C = √∏(2j_l+1) / 2^{k+L} · Δ^{(k+2L)/2} · C̄`.
pub fn scaled_coefficient(spec: &IntegralSpec, j: &[usize], delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {delta}"
        )));
    }
    let c = cbar(spec, j)?;
    Ok(scale_factor(spec.weights(), j, delta) * c.to_f64().unwrap_or(f64::NAN))
}

pub fn build_tensor(spec: &IntegralSpec, q: usize, delta: f64) -> Result<CoefficientTensor> {
    CoeffEngine::global().build_tensor(spec.weights(), q, delta)
}
