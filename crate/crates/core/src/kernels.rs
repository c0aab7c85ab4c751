//! Truncated expansions of iterated Stratonovich integrals, the Itô
//! (Wick-ordered) expansion used as an oracle, and joint per-step batches.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::coeffs::{CoeffEngine, CoefficientTensor, IntegralSpec, Weights, SCHEME_FAMILIES};
use crate::noise::NoiseMatrix;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Strong order of a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    One,
    OneHalf,
    Two,
    TwoHalf,
}

impl Order {
    pub const ALL: [Order; 4] = [Order::One, Order::OneHalf, Order::Two, Order::TwoHalf];

    pub fn value(self) -> f64 {
        match self {
            Order::One => 1.0,
            Order::OneHalf => 1.5,
            Order::Two => 2.0,
            Order::TwoHalf => 2.5,
        }
    }

    /// Integral families whose realizations the scheme of this order consumes.
    pub fn families(self) -> &'static [&'static str] {
        match self {
            Order::One => &["0", "00"],
            Order::OneHalf => &["0", "1", "00", "000"],
            Order::Two => &["0", "1", "00", "01", "10", "000", "0000"],
            Order::TwoHalf => &SCHEME_FAMILIES,
        }
    }

    /// Families among [`Order::families`] that need a truncation level.
    pub fn truncated_families(self) -> Vec<&'static str> {
        self.families()
            .iter()
            .copied()
            .filter(|f| f.len() >= 2)
            .collect()
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.value())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "1.0" => Ok(Order::One),
            "1.5" => Ok(Order::OneHalf),
            "2" | "2.0" => Ok(Order::Two),
            "2.5" => Ok(Order::TwoHalf),
            other => Err(Error::InvalidArgument(format!(
                "order must be one of 1.0, 1.5, 2.0, 2.5; got {other:?}"
            ))),
        }
    }
}

/// Exact expansions of the single integrals `(0)`, `(1)`, `(2)`.
pub fn strat_single(l: u8, nm: &NoiseMatrix, i: usize, delta: f64) -> Result<f64> {
    let z = |j| nm.zeta(i, j);
    match l {
        0 => Ok(delta.sqrt() * z(0)),
        1 => Ok(-delta.powf(1.5) / 2.0 * (z(0) + z(1) / 3f64.sqrt())),
        2 => {
            Ok(delta.powf(2.5) / 3.0
                * (z(0) + 3f64.sqrt() / 2.0 * z(1) + z(2) / (2.0 * 5f64.sqrt())))
        }
        _ => Err(Error::Unsupported(format!(
            "single integral with weight {l}"
        ))),
    }
}

fn double_kind(weights: &Weights) -> Result<u8> {
    match weights.as_slice() {
        [0, 0] => Ok(0),
        [0, 1] => Ok(1),
        [1, 0] => Ok(2),
        _ => Err(Error::Unsupported(format!(
            "closed-form double integral for weights ({weights})"
        ))),
    }
}

/// Highest basis index touched by the double-integral expansion at level `q`.
pub fn double_qmax(weights: &Weights, q: usize) -> usize {
    if weights.as_slice() == [0, 0] {
        q
    } else {
        q + 2
    }
}

fn check_qmax(nm: &NoiseMatrix, needed: usize) -> Result<()> {
    if nm.qmax() < needed {
        return Err(Error::InvalidArgument(format!(
            "noise matrix holds indices up to {}, expansion needs {needed}",
            nm.qmax()
        )));
    }
    Ok(())
}

fn double_00(nm: &NoiseMatrix, i1: usize, i2: usize, q: usize, delta: f64) -> f64 {
    let (a, b) = (nm.row(i1), nm.row(i2));
    let mut acc = CompensatedSum::new();
    acc.add(a[0] * b[0]);
    for i in 1..=q {
        let w = 1.0 / ((4 * i * i - 1) as f64).sqrt();
        acc.add(w * (a[i - 1] * b[i] - a[i] * b[i - 1]));
    }
    delta / 2.0 * acc.value()
}

/// The closed forms for `(00)`, `(01)`, `(10)` at truncation `q`.
///
/// The weighted forms read `ζ` up to index `q + 2`.
pub fn strat_double(
    weights: &Weights,
    nm: &NoiseMatrix,
    i1: usize,
    i2: usize,
    q: usize,
    delta: f64,
) -> Result<f64> {
    let kind = double_kind(weights)?;
    check_qmax(nm, double_qmax(weights, q))?;
    let i00 = double_00(nm, i1, i2, q, delta);
    if kind == 0 {
        return Ok(i00);
    }
    let (a, b) = (nm.row(i1), nm.row(i2));
    let mut acc = CompensatedSum::new();
    if kind == 1 {
        acc.add(a[0] * b[1] / 3f64.sqrt());
    } else {
        acc.add(b[0] * a[1] / 3f64.sqrt());
    }
    for i in 0..=q {
        let fi = i as f64;
        let den = (((2 * i + 1) * (2 * i + 5)) as f64).sqrt() * (2 * i + 3) as f64;
        let diag = a[i] * b[i] / ((2.0 * fi - 1.0) * (2.0 * fi + 3.0));
        if kind == 1 {
            acc.add(((fi + 2.0) * a[i] * b[i + 2] - (fi + 1.0) * a[i + 2] * b[i]) / den);
            acc.add(-diag);
        } else {
            acc.add(((fi + 1.0) * b[i + 2] * a[i] - (fi + 2.0) * b[i] * a[i + 2]) / den);
            acc.add(diag);
        }
    }
    Ok(-delta / 2.0 * i00 - delta * delta / 4.0 * acc.value())
}

/// `Σ_{i ≤ q} C_{ii}` of the double-integral expansion: the amount by which
/// the truncated Stratonovich form exceeds the truncated Itô form when
/// `i1 = i2`.
pub fn double_diagonal_sum(weights: &Weights, q: usize, delta: f64) -> Result<f64> {
    let kind = double_kind(weights)?;
    if kind == 0 {
        return Ok(delta / 2.0);
    }
    let sign = if kind == 1 { 1.0 } else { -1.0 };
    let mut acc = CompensatedSum::new();
    acc.add(-delta * delta / 4.0);
    for i in 0..=q {
        let fi = i as f64;
        acc.add(sign * delta * delta / (4.0 * (2.0 * fi - 1.0) * (2.0 * fi + 3.0)));
    }
    Ok(acc.value())
}

/// Truncated Itô double integral: the closed form with the diagonal
/// `ζ_i ζ_i` replaced by `ζ_i² − 1` when `i1 = i2`.
pub fn ito_double(
    weights: &Weights,
    nm: &NoiseMatrix,
    i1: usize,
    i2: usize,
    q: usize,
    delta: f64,
) -> Result<f64> {
    let strat = strat_double(weights, nm, i1, i2, q, delta)?;
    if i1 != i2 {
        return Ok(strat);
    }
    Ok(strat - double_diagonal_sum(weights, q, delta)?)
}

fn contract(values: &[f64], extent: usize, rows: &[&[f64]]) -> f64 {
    let k = rows.len();
    let mut outer = CompensatedSum::new();
    let mut idx = vec![0usize; k];
    for block in values.chunks_exact(extent) {
        let mut inner = CompensatedSum::new();
        for (c, z) in block.iter().zip(rows[0]) {
            inner.add(c * z);
        }
        let mut prod = inner.value();
        for (row, &i) in rows.iter().zip(&idx).skip(1) {
            prod *= row[i];
        }
        outer.add(prod);
        for i in idx.iter_mut().skip(1) {
            *i += 1;
            if *i < extent {
                break;
            }
            *i = 0;
        }
    }
    outer.value()
}

fn tensor_rows<'a>(
    spec: &IntegralSpec,
    nm: &'a NoiseMatrix,
    tensor: &CoefficientTensor,
) -> Result<Vec<&'a [f64]>> {
    tensor.ensure_matches(spec)?;
    check_qmax(nm, tensor.q())?;
    if let Some(&c) = spec.components().iter().find(|&&c| c > nm.m()) {
        return Err(Error::InvalidArgument(format!(
            "component {c} exceeds the noise dimension {}",
            nm.m()
        )));
    }
    Ok(spec
        .components()
        .iter()
        .map(|&c| &nm.row(c)[..=tensor.q()])
        .collect())
}

/// Full contraction `Σ_j C_{j_k…j_1} ζ_{j_1}^{(i_1)} ⋯ ζ_{j_k}^{(i_k)}`.
pub fn strat_tensor(
    spec: &IntegralSpec,
    nm: &NoiseMatrix,
    tensor: &CoefficientTensor,
) -> Result<f64> {
    let rows = tensor_rows(spec, nm, tensor)?;
    Ok(contract(tensor.scaled_values(), tensor.extent(), &rows))
}

/// Partial matchings of positions `0..k` whose pairs join equal components.
pub fn admissible_matchings(components: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        pos: usize,
        used: &mut Vec<bool>,
        comps: &[usize],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if pos == comps.len() {
            out.push(current.clone());
            return;
        }
        if used[pos] {
            go(pos + 1, used, comps, current, out);
            return;
        }
        // `pos` stays unmatched …
        go(pos + 1, used, comps, current, out);
        // … or pairs with a later free position of the same component.
        for b in pos + 1..comps.len() {
            if !used[b] && comps[b] == comps[pos] {
                used[b] = true;
                current.push((pos, b));
                go(pos + 1, used, comps, current, out);
                current.pop();
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(
        0,
        &mut vec![false; components.len()],
        components,
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Prelimit Itô expansion: the tensor contraction with every admissible
/// pairing `1_{i_a=i_b} 1_{j_a=j_b}` removed with alternating sign.
pub fn ito_expansion(
    spec: &IntegralSpec,
    nm: &NoiseMatrix,
    tensor: &CoefficientTensor,
) -> Result<f64> {
    let rows = tensor_rows(spec, nm, tensor)?;
    let k = spec.multiplicity();
    let extent = tensor.extent();
    let values = tensor.scaled_values();
    let mut total = CompensatedSum::new();
    for matching in admissible_matchings(spec.components()) {
        if matching.is_empty() {
            total.add(contract(values, extent, &rows));
            continue;
        }
        let mut paired = vec![false; k];
        for &(a, b) in &matching {
            paired[a] = true;
            paired[b] = true;
        }
        let sign = if matching.len() % 2 == 0 { 1.0 } else { -1.0 };
        let mut acc = CompensatedSum::new();
        let mut j = vec![0usize; k];
        for &c in values {
            if matching.iter().all(|&(a, b)| j[a] == j[b]) {
                let mut prod = c;
                for p in 0..k {
                    if !paired[p] {
                        prod *= rows[p][j[p]];
                    }
                }
                acc.add(prod);
            }
            for jl in j.iter_mut() {
                *jl += 1;
                if *jl < extent {
                    break;
                }
                *jl = 0;
            }
        }
        total.add(sign * acc.value());
    }
    Ok(total.value())
}

/// Converts a Stratonovich double integral to the Itô one.
pub fn strat_to_ito(
    weights: &Weights,
    value: f64,
    i1: usize,
    i2: usize,
    delta: f64,
) -> Result<f64> {
    let kind = double_kind(weights)?;
    if i1 != i2 {
        return Ok(value);
    }
    Ok(match kind {
        0 => value - delta / 2.0,
        _ => value + delta * delta / 4.0,
    })
}

/// Truncation levels per integral family, keyed by the weight string.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QLevels(BTreeMap<String, usize>);

impl QLevels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Same level for every truncated family of `order`.
    pub fn uniform(order: Order, q: usize) -> Self {
        Self(
            order
                .truncated_families()
                .into_iter()
                .map(|f| (f.to_string(), q))
                .collect(),
        )
    }

    pub fn set(&mut self, family: &str, q: usize) -> &mut Self {
        self.0.insert(family.to_string(), q);
        self
    }

    pub fn with(mut self, family: &str, q: usize) -> Self {
        self.set(family, q);
        self
    }

    pub fn get(&self, family: &str) -> Option<usize> {
        self.0.get(family).copied()
    }

    pub fn require(&self, family: &str) -> Result<usize> {
        self.get(family)
            .ok_or_else(|| Error::MissingQ(family.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

fn family_slot(family: &str) -> usize {
    SCHEME_FAMILIES
        .iter()
        .position(|f| *f == family)
        .expect("scheme family")
}

/// Flat index of a component tuple `(c_1, …, c_k)`, 1-based, `c_1` fastest.
pub fn component_index(components: &[usize], m: usize) -> usize {
    components.iter().rev().fold(0, |acc, &c| acc * m + (c - 1))
}

fn component_tuple(mut flat: usize, m: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let c = flat % m + 1;
            flat /= m;
            c
        })
        .collect()
}

/// One joint realization of every integral a scheme step consumes, for all
/// component tuples, drawn from a single [`NoiseMatrix`].
#[derive(Clone, Debug)]
pub struct IntegralBatch {
    delta: f64,
    m: usize,
    order: Order,
    values: [Option<Vec<f64>>; 12],
}

impl IntegralBatch {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn contains(&self, family: &str) -> bool {
        SCHEME_FAMILIES.contains(&family) && self.values[family_slot(family)].is_some()
    }

    /// Realized value for `family` with components `(c_1, …, c_k)`.
    pub fn get(&self, family: &str, components: &[usize]) -> Option<f64> {
        if !SCHEME_FAMILIES.contains(&family) || components.len() != family.len() {
            return None;
        }
        if components.iter().any(|&c| c == 0 || c > self.m) {
            return None;
        }
        self.values[family_slot(family)]
            .as_ref()
            .map(|v| v[component_index(components, self.m)])
    }

    /// All realizations of one family, indexed by [`component_index`].
    pub fn family(&self, family: &str) -> Option<&[f64]> {
        if !SCHEME_FAMILIES.contains(&family) {
            return None;
        }
        self.values[family_slot(family)].as_deref()
    }

    pub fn value(&self, spec: &IntegralSpec) -> Option<f64> {
        self.get(&spec.weights().to_string(), spec.components())
    }
}

/// Reusable sampler holding the coefficient tensors for one `(order, Δ, q)`.
#[derive(Clone, Debug)]
pub struct BatchSampler {
    order: Order,
    delta: f64,
    m: usize,
    q: QLevels,
    tensors: BTreeMap<&'static str, Arc<CoefficientTensor>>,
    qmax: usize,
}

impl BatchSampler {
    pub fn new(order: Order, m: usize, q_levels: &QLevels, delta: f64) -> Result<Self> {
        Self::with_engine(CoeffEngine::global(), order, m, q_levels, delta)
    }

    pub fn with_engine(
        engine: &CoeffEngine,
        order: Order,
        m: usize,
        q_levels: &QLevels,
        delta: f64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "noise dimension must be at least 1".into(),
            ));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {delta}"
            )));
        }
        let mut q = QLevels::new();
        let mut tensors = BTreeMap::new();
        let mut qmax = if order.families().contains(&"2") {
            2
        } else if order.families().contains(&"1") {
            1
        } else {
            0
        };
        for family in order.truncated_families() {
            let level = q_levels.require(family)?;
            q.set(family, level);
            let weights: Weights = family.parse()?;
            if family.len() == 2 {
                qmax = qmax.max(double_qmax(&weights, level));
            } else {
                qmax = qmax.max(level);
                tensors.insert(
                    family,
                    Arc::new(engine.build_tensor(&weights, level, delta)?),
                );
            }
        }
        Ok(Self {
            order,
            delta,
            m,
            q,
            tensors,
            qmax,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q_levels(&self) -> &QLevels {
        &self.q
    }

    /// Largest basis index any family reads; noise must cover `0..=qmax`.
    pub fn qmax(&self) -> usize {
        self.qmax
    }

    pub fn tensor(&self, family: &str) -> Option<&CoefficientTensor> {
        self.tensors.get(family).map(|t| t.as_ref())
    }

    pub fn sample(&self, nm: &NoiseMatrix) -> Result<IntegralBatch> {
        if nm.m() != self.m {
            return Err(Error::InvalidArgument(format!(
                "noise has {} components, sampler expects {}",
                nm.m(),
                self.m
            )));
        }
        check_qmax(nm, self.qmax)?;
        let m = self.m;
        let mut values: [Option<Vec<f64>>; 12] = Default::default();
        for &family in self.order.families() {
            let weights: Weights = family.parse()?;
            let k = weights.multiplicity();
            let count = m.pow(k as u32);
            let mut out = Vec::with_capacity(count);
            for flat in 0..count {
                let comps = component_tuple(flat, m, k);
                let v = match k {
                    1 => strat_single(weights.as_slice()[0], nm, comps[0], self.delta)?,
                    2 => strat_double(
                        &weights,
                        nm,
                        comps[0],
                        comps[1],
                        self.q.require(family)?,
                        self.delta,
                    )?,
                    _ => {
                        let tensor = &self.tensors[family];
                        let spec = IntegralSpec::new(weights.clone(), comps)?;
                        strat_tensor(&spec, nm, tensor)?
                    }
                };
                out.push(v);
            }
            values[family_slot(family)] = Some(out);
        }
        Ok(IntegralBatch {
            delta: self.delta,
            m,
            order: self.order,
            values,
        })
    }
}

/// One-off batch; builds (or reuses cached) coefficients on every call.
pub fn sample_batch(
    order: Order,
    nm: &NoiseMatrix,
    q_levels: &QLevels,
    delta: f64,
) -> Result<IntegralBatch> {
    BatchSampler::new(order, nm.m(), q_levels, delta)?.sample(nm)
}
