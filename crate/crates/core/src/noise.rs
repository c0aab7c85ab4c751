//! Keyed Gaussian noise for the basis expansions.
//!
//! Every `(seed, path, step)` triple maps to its own ChaCha8 key, and every
//! Wiener component to its own stream under that key, so `ζ_j^{(i)}` does not
//! depend on `m`, on `qmax`, or on the order in which steps are generated.
//! Normals come from the ziggurat sampler of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub path: u64,
    pub step: u64,
}

impl StreamKey {
    pub fn new(seed: u64, path: u64, step: u64) -> Self {
        Self { seed, path, step }
    }

    pub fn with_path(self, path: u64) -> Self {
        Self { path, ..self }
    }

    pub fn with_step(self, step: u64) -> Self {
        Self { step, ..self }
    }

    fn rng(&self, component: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.path.to_le_bytes());
        key[16..24].copy_from_slice(&self.step.to_le_bytes());
        key[24..].copy_from_slice(b"zetanois");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(component as u64);
        rng
    }
}

/// `ζ_j^{(i)}` for `i = 1..=m`, `j = 0..=qmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseMatrix {
    m: usize,
    qmax: usize,
    values: Vec<f64>,
}

impl NoiseMatrix {
    /// Builds a matrix from explicit values, row `i-1` holding `ζ_·^{(i)}`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> crate::Result<Self> {
        let m = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if m == 0 || width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(crate::Error::InvalidArgument(
                "noise rows must be non-empty and of equal length".into(),
            ));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(crate::Error::InvalidArgument(
                "noise values must be finite".into(),
            ));
        }
        Ok(Self {
            m,
            qmax: width - 1,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(m: usize, qmax: usize) -> Self {
        Self {
            m,
            qmax,
            values: vec![0.0; m * (qmax + 1)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn qmax(&self) -> usize {
        self.qmax
    }

    /// `ζ_j^{(i)}`, with `i` 1-based. Indices past `qmax` read as zero, which
    /// is what a truncated expansion would use.
    #[inline]
    pub fn zeta(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i >= 1 && i <= self.m, "component {i} out of 1..={}", self.m);
        if j > self.qmax {
            return 0.0;
        }
        self.values[(i - 1) * (self.qmax + 1) + j]
    }

    /// All `ζ_·^{(i)}`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.qmax + 1;
        &self.values[(i - 1) * w..i * w]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let w = self.qmax + 1;
        self.values[(i - 1) * w + j] = value;
    }
}

pub fn sample_noise(key: StreamKey, m: usize, qmax: usize) -> NoiseMatrix {
    let mut values = Vec::with_capacity(m * (qmax + 1));
    for i in 1..=m {
        let mut rng = key.rng(i);
        values.extend((0..=qmax).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
    }
    NoiseMatrix { m, qmax, values }
}

/// `ΔW^{(i)} = √Δ ζ_0^{(i)}`.
pub fn wiener_increment(nm: &NoiseMatrix, i: usize, delta: f64) -> f64 {
    delta.sqrt() * nm.zeta(i, 0)
}
