//! Explicit one-step strong Taylor–Stratonovich schemes of orders 1.0–2.5.
//!
//! A step adds up to twelve term groups; the scheme of a lower order keeps
//! a prefix of them (1.0: groups 1–3, 1.5: 1–6, 2.0: 1–8, 2.5: all).

pub mod jet;
pub mod operators;
pub mod problem;

use rayon::prelude::*;

pub use crate::kernels::{Order, QLevels};
pub use operators::{apply_chains, apply_operators, modified_drift, roster, OperatorTable, ROSTER};
pub use problem::{Builtin, FdConfig, Provider, SdeProblem, SdeSystem};

use crate::kernels::{BatchSampler, IntegralBatch};
use crate::mserror::{select_family_q, SelectOptions};
use crate::noise::{sample_noise, wiener_increment, StreamKey};
use crate::{Error, Result};

/// Names of the term groups, in summation order.
pub const GROUPS: [&str; 12] = [
    "B*I0",
    "abar*delta",
    "GB*I00",
    "Gabar*I0,I1 - LbarB*I1",
    "GGB*I000",
    "Lbarabar*delta^2/2",
    "GLbarB,LbarGB,GGabar*I00,I01,I10",
    "GGGB*I0000",
    "LLa*delta^3/6",
    "GLbarabar,LbarLbarB,LbarGabar*I0,I1,I2",
    "GLbarGB,GGLbarB,GGGabar,LbarGGB*I000,I100,I010,I001",
    "GGGGB*I00000",
];

/// Number of leading groups the scheme of `order` keeps.
pub fn group_count(order: Order) -> usize {
    match order {
        Order::One => 3,
        Order::OneHalf => 6,
        Order::Two => 8,
        Order::TwoHalf => 12,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub order: Order,
    pub delta: f64,
    /// Explicit truncation levels; families left out are chosen from
    /// `c_target` when the scheme is built.
    pub q_levels: QLevels,
    pub seed: u64,
    pub c_target: f64,
    /// A trajectory stops, flagged, once some `|x_i|` exceeds this.
    pub blowup_bound: f64,
}

impl SchemeConfig {
    pub fn new(order: Order, delta: f64) -> Self {
        Self {
            order,
            delta,
            q_levels: QLevels::new(),
            seed: 0,
            c_target: 1.0,
            blowup_bound: 1e12,
        }
    }

    pub fn with_q_levels(mut self, q: QLevels) -> Self {
        self.q_levels = q;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_c_target(mut self, c: f64) -> Self {
        self.c_target = c;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.delta
            )));
        }
        if self.blowup_bound.is_nan() || self.blowup_bound <= 0.0 {
            return Err(Error::InvalidArgument(
                "blow-up bound must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Levels for every truncated family of the order: explicit ones as
    /// given, the rest from the error target over all index patterns that
    /// `m` noise components allow.
    pub fn resolve_q_levels(&self, m: usize) -> Result<QLevels> {
        self.validate()?;
        let mut q = QLevels::new();
        for family in self.order.truncated_families() {
            let level = match self.q_levels.get(family) {
                Some(l) => l,
                None => {
                    select_family_q(
                        &family.parse()?,
                        m,
                        self.delta,
                        self.c_target,
                        &SelectOptions::default(),
                    )?
                    .0
                }
            };
            q.set(family, level);
        }
        Ok(q)
    }
}

/// Contribution of one term group to a step.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupTerm {
    /// 1-based group number.
    pub group: usize,
    pub name: &'static str,
    pub value: Vec<f64>,
}

fn axpy(acc: &mut [f64], w: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += w * x;
    }
}

// All 1-based tuples (i_1, …, i_r), i_1 fastest.
fn tuples(m: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..m.pow(r as u32)).map(move |mut flat| {
        (0..r)
            .map(|_| {
                let i = flat % m + 1;
                flat /= m;
                i
            })
            .collect()
    })
}

fn rev(v: &[usize]) -> Vec<usize> {
    v.iter().rev().copied().collect()
}

/// Term groups of one step of the scheme of `order` from `x` at time `t`.
///
/// `ops` must hold the roster of `order` at `(x, t)` and `batch` the
/// integrals of `order` for step `batch.delta()`.
pub fn step_groups(
    order: Order,
    ops: &OperatorTable,
    batch: &IntegralBatch,
) -> Result<Vec<GroupTerm>> {
    let n = ops.n();
    let m = ops.m();
    let d = batch.delta();
    if batch.m() != m {
        return Err(Error::InvalidArgument(format!(
            "integrals have {} noise components, problem has {m}",
            batch.m()
        )));
    }
    for family in order.families() {
        if !batch.contains(family) {
            return Err(Error::InvalidArgument(format!(
                "integral batch lacks family ({family}) needed at order {order}"
            )));
        }
    }
    for chain in roster(order) {
        if !ops.contains(chain) {
            return Err(Error::InvalidArgument(format!(
                "operator table lacks {chain}"
            )));
        }
    }
    let i = |family: &str, comps: &[usize]| batch.get(family, comps).expect("checked family");
    let mut out = Vec::with_capacity(group_count(order));
    for g in 1..=group_count(order) {
        let mut v = vec![0.0; n];
        match g {
            1 => {
                for t in tuples(m, 1) {
                    axpy(&mut v, i("0", &t), ops.at("B", &t));
                }
            }
            2 => axpy(&mut v, d, ops.at("abar", &[])),
            3 => {
                for t in tuples(m, 2) {
                    axpy(&mut v, i("00", &rev(&t)), ops.at("GB", &t));
                }
            }
            4 => {
                for t in tuples(m, 1) {
                    let (i0, i1) = (i("0", &t), i("1", &t));
                    axpy(&mut v, d * i0 + i1, ops.at("Gabar", &t));
                    axpy(&mut v, -i1, ops.at("LbarB", &t));
                }
            }
            5 => {
                for t in tuples(m, 3) {
                    axpy(&mut v, i("000", &rev(&t)), ops.at("GGB", &t));
                }
            }
            6 => axpy(&mut v, d * d / 2.0, ops.at("Lbarabar", &[])),
            7 => {
                for t in tuples(m, 2) {
                    let c = rev(&t);
                    let (i00, i01, i10) = (i("00", &c), i("01", &c), i("10", &c));
                    axpy(&mut v, i10 - i01, ops.at("GLbarB", &t));
                    axpy(&mut v, -i10, ops.at("LbarGB", &t));
                    axpy(&mut v, i01 + d * i00, ops.at("GGabar", &t));
                }
            }
            8 => {
                for t in tuples(m, 4) {
                    axpy(&mut v, i("0000", &rev(&t)), ops.at("GGGB", &t));
                }
            }
            9 => axpy(&mut v, d * d * d / 6.0, ops.at("LLa", &[])),
            10 => {
                for t in tuples(m, 1) {
                    let (i0, i1, i2) = (i("0", &t), i("1", &t), i("2", &t));
                    axpy(
                        &mut v,
                        0.5 * i2 + d * i1 + d * d / 2.0 * i0,
                        ops.at("GLbarabar", &t),
                    );
                    axpy(&mut v, 0.5 * i2, ops.at("LbarLbarB", &t));
                    axpy(&mut v, -(i2 + d * i1), ops.at("LbarGabar", &t));
                }
            }
            11 => {
                for t in tuples(m, 3) {
                    let c = rev(&t);
                    let (i000, i100, i010, i001) =
                        (i("000", &c), i("100", &c), i("010", &c), i("001", &c));
                    axpy(&mut v, i100 - i010, ops.at("GLbarGB", &t));
                    axpy(&mut v, i010 - i001, ops.at("GGLbarB", &t));
                    axpy(&mut v, d * i000 + i001, ops.at("GGGabar", &t));
                    axpy(&mut v, -i100, ops.at("LbarGGB", &t));
                }
            }
            _ => {
                for t in tuples(m, 5) {
                    axpy(&mut v, i("00000", &rev(&t)), ops.at("GGGGB", &t));
                }
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(GROUPS[g - 1].to_string()));
        }
        out.push(GroupTerm {
            group: g,
            name: GROUPS[g - 1],
            value: v,
        });
    }
    Ok(out)
}

/// `y_{p+1}` from `y_p = x` given realized integrals.
pub fn step(
    problem: &SdeProblem,
    order: Order,
    x: &[f64],
    t: f64,
    batch: &IntegralBatch,
) -> Result<Vec<f64>> {
    let ops = apply_operators(problem, order, x, t)?;
    let groups = step_groups(order, &ops, batch)?;
    let mut y = x.to_vec();
    for g in &groups {
        for (yi, v) in y.iter_mut().zip(&g.value) {
            *yi += v;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state".into()));
    }
    Ok(y)
}

/// One simulated path.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTrajectory {
    /// `τ_p = pΔ`.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `W_{τ_p}` (from `W_0 = 0`) assembled from the same increments the
    /// scheme consumed.
    pub wiener: Vec<Vec<f64>>,
    /// The path left the blow-up bound and was cut short.
    pub blew_up: bool,
}

impl StateTrajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_wiener(&self) -> &[f64] {
        self.wiener.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial state")
    }
}

/// A scheme bound to a problem, with coefficients prepared once.
#[derive(Clone, Debug)]
pub struct Scheme {
    problem: SdeProblem,
    config: SchemeConfig,
    sampler: BatchSampler,
}

impl Scheme {
    pub fn new(problem: SdeProblem, config: SchemeConfig) -> Result<Self> {
        let q = config.resolve_q_levels(problem.m())?;
        let sampler = BatchSampler::new(config.order, problem.m(), &q, config.delta)?;
        Ok(Self {
            problem,
            config,
            sampler,
        })
    }

    pub fn problem(&self) -> &SdeProblem {
        &self.problem
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    /// Truncation levels actually in use.
    pub fn q_levels(&self) -> &QLevels {
        self.sampler.q_levels()
    }

    /// Step from `x` at `t` with the noise of `key`; also returns `ΔW`.
    pub fn step_keyed(&self, x: &[f64], t: f64, key: StreamKey) -> Result<(Vec<f64>, Vec<f64>)> {
        let nm = sample_noise(key, self.problem.m(), self.sampler.qmax());
        let batch = self.sampler.sample(&nm)?;
        let y = step(&self.problem, self.config.order, x, t, &batch)?;
        let dw = (1..=self.problem.m())
            .map(|i| wiener_increment(&nm, i, self.config.delta))
            .collect();
        Ok((y, dw))
    }

    /// Path `path` from `x0` over `steps` steps.
    pub fn path(&self, x0: &[f64], steps: usize, path: u64) -> Result<StateTrajectory> {
        let d = self.config.delta;
        let m = self.problem.m();
        let mut traj = StateTrajectory {
            times: vec![0.0],
            states: vec![x0.to_vec()],
            wiener: vec![vec![0.0; m]],
            blew_up: false,
        };
        let mut x = x0.to_vec();
        let mut w = vec![0.0; m];
        for p in 0..steps {
            let t = p as f64 * d;
            let key = StreamKey::new(self.config.seed, path, p as u64);
            let (y, dw) = match self.step_keyed(&x, t, key) {
                Ok(r) => r,
                Err(Error::NonFinite(_)) => {
                    traj.blew_up = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            for (wi, dwi) in w.iter_mut().zip(&dw) {
                *wi += dwi;
            }
            x = y;
            traj.times.push((p + 1) as f64 * d);
            traj.states.push(x.clone());
            traj.wiener.push(w.clone());
            if x.iter().any(|v| v.abs() > self.config.blowup_bound) {
                traj.blew_up = true;
                break;
            }
        }
        Ok(traj)
    }
}

/// Number of steps `T/Δ`, requiring `T` to be a multiple of `Δ` within
/// `1e−12` (relative to the step count).
pub fn step_count(t_end: f64, delta: f64) -> Result<usize> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "end time must be non-negative, got {t_end}"
        )));
    }
    let steps = t_end / delta;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-12 * rounded.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "end time {t_end} is not a multiple of the step {delta}"
        )));
    }
    Ok(rounded as usize)
}

/// `n_paths` independent trajectories on `[0, t_end]`, path `p` driven by
/// the streams of `(config.seed, p, ·)`.
pub fn simulate(
    problem: &SdeProblem,
    config: &SchemeConfig,
    x0: &[f64],
    t_end: f64,
    n_paths: usize,
) -> Result<Vec<StateTrajectory>> {
    if x0.len() != problem.n() {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} entries, problem dimension is {}",
            x0.len(),
            problem.n()
        )));
    }
    config.validate()?;
    let steps = step_count(t_end, config.delta)?;
    if n_paths == 0 {
        return Ok(Vec::new());
    }
    let scheme = Scheme::new(problem.clone(), config.clone())?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|p| scheme.path(x0, steps, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::sample_batch;
    use crate::noise::NoiseMatrix;

    #[test]
    fn constant_drift_is_exact() {
        let p = Builtin::Drift { c: 0.75 }.problem();
        let nm = sample_noise(StreamKey::new(1, 0, 0), 1, 5);
        let batch = sample_batch(
            Order::TwoHalf,
            &nm,
            &QLevels::uniform(Order::TwoHalf, 3),
            0.1,
        )
        .unwrap();
        let y = step(&p, Order::TwoHalf, &[2.0], 0.0, &batch).unwrap();
        assert!((y[0] - 2.075).abs() < 1e-15);
    }

    #[test]
    fn order_one_is_milstein() {
        let (alpha, beta, x) = (0.5, 0.3, 1.7);
        let p = Builtin::Gbm { alpha, beta }.problem();
        let nm = NoiseMatrix::from_rows(vec![vec![0.4, -1.1]]).unwrap();
        let d = 0.04;
        let batch = sample_batch(Order::One, &nm, &QLevels::uniform(Order::One, 1), d).unwrap();
        let y = step(&p, Order::One, &[x], 0.0, &batch).unwrap();
        let dw = d.sqrt() * 0.4;
        let want = x
            + (alpha - beta * beta / 2.0) * x * d
            + beta * x * dw
            + beta * beta * x * dw * dw / 2.0;
        assert!((y[0] - want).abs() < 1e-15);
    }

    #[test]
    fn step_count_checks_grid() {
        assert_eq!(step_count(1.0, 0.125).unwrap(), 8);
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(0.0, 0.1).unwrap(), 0);
    }

    #[test]
    fn decay_matches_exponential() {
        let p = Builtin::Decay.problem();
        let cfg = SchemeConfig::new(Order::TwoHalf, 2f64.powi(-6));
        let paths = simulate(&p, &cfg, &[1.0], 1.0, 1).unwrap();
        assert!((paths[0].final_state()[0] - (-1f64).exp()).abs() < 1e-6);
        assert!(simulate(&p, &cfg, &[1.0], 1.0, 0).unwrap().is_empty());
    }
}
