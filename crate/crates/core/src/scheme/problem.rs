//! SDE definitions and derivative providers.

use std::fmt;
use std::sync::Arc;

use super::jet::{Jet, JetContext, Scalar};
use crate::{Error, Result};

/// An Itô SDE `dx = a(x, t) dt + B(x, t) dW` with `x ∈ ℝⁿ`, `W ∈ ℝᵐ`.
///
/// The functions are generic over [`Scalar`] so that one definition serves
/// both plain evaluation and exact Taylor expansion.
pub trait SdeSystem: Send + Sync {
    /// `(n, m)`.
    fn dims(&self) -> (usize, usize);

    fn drift<S: Scalar>(&self, x: &[S], t: &S) -> Vec<S>;

    /// `B` in row-major order: entry `(r, c)` at `r * m + c`.
    fn diffusion<S: Scalar>(&self, x: &[S], t: &S) -> Vec<S>;

    /// Pathwise solution at time `t` given `W_t` (started from `W_0 = 0`),
    /// when one is known.
    fn exact_solution(&self, _x0: &[f64], _t: f64, _w: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Finite-difference settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    /// Highest derivative order estimated (1..=4).
    pub max_order: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { max_order: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Provider {
    /// Exact derivatives by Taylor-mode differentiation of the generic
    /// drift and diffusion.
    Analytic,
    FiniteDifference(FdConfig),
}

trait Evaluate: Send + Sync {
    fn drift(&self, x: &[f64], t: f64) -> Vec<f64>;
    fn diffusion(&self, x: &[f64], t: f64) -> Vec<f64>;
    fn drift_jet(&self, x: &[Jet], t: &Jet) -> Option<Vec<Jet>>;
    fn diffusion_jet(&self, x: &[Jet], t: &Jet) -> Option<Vec<Jet>>;
    fn exact(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>>;
}

struct Typed<S>(S);

impl<S: SdeSystem> Evaluate for Typed<S> {
    fn drift(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.0.drift(x, &t)
    }
    fn diffusion(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.0.diffusion(x, &t)
    }
    fn drift_jet(&self, x: &[Jet], t: &Jet) -> Option<Vec<Jet>> {
        Some(self.0.drift(x, t))
    }
    fn diffusion_jet(&self, x: &[Jet], t: &Jet) -> Option<Vec<Jet>> {
        Some(self.0.diffusion(x, t))
    }
    fn exact(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>> {
        self.0.exact_solution(x0, t, w)
    }
}

type VecFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;

struct Plain {
    drift: Box<VecFn>,
    diffusion: Box<VecFn>,
}

impl Evaluate for Plain {
    fn drift(&self, x: &[f64], t: f64) -> Vec<f64> {
        (self.drift)(x, t)
    }
    fn diffusion(&self, x: &[f64], t: f64) -> Vec<f64> {
        (self.diffusion)(x, t)
    }
    fn drift_jet(&self, _: &[Jet], _: &Jet) -> Option<Vec<Jet>> {
        None
    }
    fn diffusion_jet(&self, _: &[Jet], _: &Jet) -> Option<Vec<Jet>> {
        None
    }
    fn exact(&self, _: &[f64], _: f64, _: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// A type-erased SDE together with its derivative provider.
#[derive(Clone)]
pub struct SdeProblem {
    name: String,
    n: usize,
    m: usize,
    eval: Arc<dyn Evaluate>,
    provider: Provider,
}

impl fmt::Debug for SdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("provider", &self.provider)
            .finish()
    }
}

impl SdeProblem {
    /// Problem with exact (Taylor-mode) derivatives.
    pub fn analytic<S: SdeSystem + 'static>(name: impl Into<String>, system: S) -> Self {
        let (n, m) = system.dims();
        Self {
            name: name.into(),
            n,
            m,
            eval: Arc::new(Typed(system)),
            provider: Provider::Analytic,
        }
    }

    /// Problem given by plain functions; derivatives by finite differences.
    pub fn from_fns<A, B>(
        name: impl Into<String>,
        n: usize,
        m: usize,
        drift: A,
        diffusion: B,
    ) -> Self
    where
        A: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
        B: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            n,
            m,
            eval: Arc::new(Plain {
                drift: Box::new(drift),
                diffusion: Box::new(diffusion),
            }),
            provider: Provider::FiniteDifference(FdConfig::default()),
        }
    }

    /// Same problem with another derivative provider. Plain-function problems
    /// cannot switch to [`Provider::Analytic`].
    pub fn with_provider(mut self, provider: Provider) -> Result<Self> {
        if provider == Provider::Analytic
            && self.eval.drift_jet(&[], &Jet::constant(0.0)).is_none()
            && self.n > 0
        {
            return Err(Error::Unsupported(format!(
                "problem {} has no generic definition for analytic derivatives",
                self.name
            )));
        }
        if let Provider::FiniteDifference(cfg) = provider {
            if !(1..=4).contains(&cfg.max_order) {
                return Err(Error::InvalidArgument(format!(
                    "finite-difference order must be in 1..=4, got {}",
                    cfg.max_order
                )));
            }
        }
        self.provider = provider;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn provider(&self) -> Provider {
        self.provider
    }

    pub fn drift(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.eval.drift(x, t)
    }

    /// Row-major `n × m` diffusion matrix.
    pub fn diffusion(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.eval.diffusion(x, t)
    }

    pub fn exact_solution(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>> {
        self.eval.exact(x0, t, w)
    }

    /// Highest derivative order the provider can supply.
    pub fn max_degree(&self) -> usize {
        match self.provider {
            Provider::Analytic => 4,
            Provider::FiniteDifference(cfg) => cfg.max_order,
        }
    }

    /// Taylor expansions of `a` (n jets) and `B` (n·m jets, row-major) at
    /// `(x, t)` in the variables `(x_1, …, x_n, t)`.
    pub fn taylor(&self, x: &[f64], t: f64, degree: usize) -> Result<(Vec<Jet>, Vec<Jet>)> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "state has {} entries, problem dimension is {}",
                x.len(),
                self.n
            )));
        }
        let have = degree.min(self.max_degree());
        let ctx = JetContext::new(self.n + 1, degree);
        let (a, b) = match self.provider {
            Provider::Analytic => {
                let xs: Vec<Jet> = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Jet::variable(&ctx, i, v))
                    .collect();
                let tj = Jet::variable(&ctx, self.n, t);
                let a = self.eval.drift_jet(&xs, &tj);
                let b = self.eval.diffusion_jet(&xs, &tj);
                match (a, b) {
                    (Some(a), Some(b)) => (promote_all(&ctx, a), promote_all(&ctx, b)),
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "problem {} has no generic definition",
                            self.name
                        )))
                    }
                }
            }
            Provider::FiniteDifference(_) => {
                let a = fd_jets(&ctx, have, x, t, self.n, |x, t| self.eval.drift(x, t));
                let b = fd_jets(&ctx, have, x, t, self.n * self.m, |x, t| {
                    self.eval.diffusion(x, t)
                });
                (a, b)
            }
        };
        check_len(&a, self.n, "drift")?;
        check_len(&b, self.n * self.m, "diffusion")?;
        Ok((a, b))
    }
}

fn check_len(v: &[Jet], expected: usize, what: &str) -> Result<()> {
    if v.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{what} returned {} entries, expected {expected}",
            v.len()
        )));
    }
    Ok(())
}

// Constant outputs (e.g. B ≡ const) come back without a context; give them
// one so later operators see a uniform representation.
fn promote_all(ctx: &Arc<JetContext>, v: Vec<Jet>) -> Vec<Jet> {
    v.into_iter()
        .map(|j| {
            if j.context().is_some() {
                j
            } else {
                let mut c = vec![0.0; ctx.len()];
                c[0] = j.value();
                Jet::from_coeffs(ctx, c, ctx.degree())
            }
        })
        .collect()
}

// Central stencils of fourth-order accuracy for derivative orders 1..=4.
fn stencil(order: u8) -> &'static [(i32, f64)] {
    match order {
        1 => &[
            (-2, 1.0 / 12.0),
            (-1, -2.0 / 3.0),
            (1, 2.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        2 => &[
            (-2, -1.0 / 12.0),
            (-1, 4.0 / 3.0),
            (0, -5.0 / 2.0),
            (1, 4.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        3 => &[
            (-3, 1.0 / 8.0),
            (-2, -1.0),
            (-1, 13.0 / 8.0),
            (1, -13.0 / 8.0),
            (2, 1.0),
            (3, -1.0 / 8.0),
        ],
        4 => &[
            (-3, -1.0 / 6.0),
            (-2, 2.0),
            (-1, -13.0 / 2.0),
            (0, 28.0 / 3.0),
            (1, -13.0 / 2.0),
            (2, 2.0),
            (3, -1.0 / 6.0),
        ],
        _ => &[(0, 1.0)],
    }
}

/// Step for a mixed partial of total order `k` along a coordinate of size
/// `|v|`: the first-order step balances rounding at `max(1e−6, 1e−7(1+|v|))`;
/// higher orders use `ε^{1/(k+4)} (1+|v|)` for the fourth-order stencils.
pub fn fd_step(k: usize, v: f64) -> f64 {
    if k <= 1 {
        (1e-7 * (1.0 + v.abs())).max(1e-6)
    } else {
        f64::EPSILON.powf(1.0 / (k as f64 + 4.0)) * (1.0 + v.abs())
    }
}

fn fd_jets(
    ctx: &Arc<JetContext>,
    have: usize,
    x: &[f64],
    t: f64,
    outputs: usize,
    f: impl Fn(&[f64], f64) -> Vec<f64>,
) -> Vec<Jet> {
    let nv = ctx.nvars();
    let point: Vec<f64> = x.iter().copied().chain(std::iter::once(t)).collect();
    let eval = |p: &[f64]| f(&p[..nv - 1], p[nv - 1]);
    let mut coeffs = vec![vec![0.0; ctx.len()]; outputs];
    let base = eval(&point);
    for (o, v) in base.iter().enumerate().take(outputs) {
        coeffs[o][0] = *v;
    }
    for (idx, alpha) in ctx.exponents().iter().enumerate().skip(1) {
        let k: usize = alpha.iter().map(|&e| e as usize).sum();
        if k > have {
            continue;
        }
        let h: Vec<f64> = point.iter().map(|&v| fd_step(k, v)).collect();
        let axes: Vec<(usize, &[(i32, f64)])> = alpha
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(v, &e)| (v, stencil(e)))
            .collect();
        let mut acc = vec![0.0; outputs];
        let mut pos = vec![0usize; axes.len()];
        'outer: loop {
            let mut p = point.clone();
            let mut w = 1.0;
            for (a, &(v, st)) in axes.iter().enumerate() {
                let (off, c) = st[pos[a]];
                p[v] += off as f64 * h[v];
                w *= c;
            }
            let vals = eval(&p);
            for (o, acc_o) in acc.iter_mut().enumerate() {
                *acc_o += w * vals[o];
            }
            for a in 0..axes.len() {
                pos[a] += 1;
                if pos[a] < axes[a].1.len() {
                    continue 'outer;
                }
                pos[a] = 0;
            }
            break;
        }
        let mut scale = 1.0;
        for &(v, _) in &axes {
            let e = alpha[v] as i32;
            let fact: f64 = (1..=e).map(|i| i as f64).product();
            scale *= h[v].powi(e) * fact;
        }
        for o in 0..outputs {
            coeffs[o][idx] = acc[o] / scale;
        }
    }
    coeffs
        .into_iter()
        .map(|c| Jet::from_coeffs(ctx, c, have))
        .collect()
}

/// Reference problems available by id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// `dx = αx dt + βx dW`.
    Gbm { alpha: f64, beta: f64 },
    /// `dx = c dt`: the scheme is exact.
    Drift { c: f64 },
    /// `dx = −x dt`.
    Decay,
    /// `dx = A x dt + (B₁x dW¹ + B₂x dW²)`, n = m = 2, with `B₁B₂ ≠ B₂B₁`.
    Bilinear2,
}

impl Builtin {
    pub const IDS: [&'static str; 4] = ["gbm", "drift", "decay", "bilinear2"];

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "gbm" => Ok(Builtin::Gbm {
                alpha: 1.5,
                beta: 0.1,
            }),
            "drift" => Ok(Builtin::Drift { c: 1.0 }),
            "decay" => Ok(Builtin::Decay),
            "bilinear2" => Ok(Builtin::Bilinear2),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem {other:?}; builtins are {}",
                Self::IDS.join(", ")
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Builtin::Gbm { .. } => "gbm",
            Builtin::Drift { .. } => "drift",
            Builtin::Decay => "decay",
            Builtin::Bilinear2 => "bilinear2",
        }
    }

    pub fn default_x0(&self) -> Vec<f64> {
        match self {
            Builtin::Bilinear2 => vec![1.0, 0.5],
            _ => vec![1.0],
        }
    }

    pub fn problem(self) -> SdeProblem {
        SdeProblem::analytic(self.id(), self)
    }
}

const BILINEAR_A: [[f64; 2]; 2] = [[-0.5, 0.2], [0.1, -0.3]];
const BILINEAR_B1: [[f64; 2]; 2] = [[0.3, 0.1], [0.0, 0.2]];
const BILINEAR_B2: [[f64; 2]; 2] = [[0.1, 0.0], [0.25, -0.15]];

fn matvec<S: Scalar>(a: &[[f64; 2]; 2], x: &[S]) -> [S; 2] {
    [
        x[0].clone() * a[0][0] + x[1].clone() * a[0][1],
        x[0].clone() * a[1][0] + x[1].clone() * a[1][1],
    ]
}

impl SdeSystem for Builtin {
    fn dims(&self) -> (usize, usize) {
        match self {
            Builtin::Bilinear2 => (2, 2),
            _ => (1, 1),
        }
    }

    fn drift<S: Scalar>(&self, x: &[S], _t: &S) -> Vec<S> {
        match *self {
            Builtin::Gbm { alpha, .. } => vec![x[0].clone() * alpha],
            Builtin::Drift { c } => vec![S::cst(c)],
            Builtin::Decay => vec![-x[0].clone()],
            Builtin::Bilinear2 => matvec(&BILINEAR_A, x).to_vec(),
        }
    }

    fn diffusion<S: Scalar>(&self, x: &[S], _t: &S) -> Vec<S> {
        match *self {
            Builtin::Gbm { beta, .. } => vec![x[0].clone() * beta],
            Builtin::Drift { .. } | Builtin::Decay => vec![S::cst(0.0)],
            Builtin::Bilinear2 => {
                let [b11, b21] = matvec(&BILINEAR_B1, x);
                let [b12, b22] = matvec(&BILINEAR_B2, x);
                vec![b11, b12, b21, b22]
            }
        }
    }

    fn exact_solution(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>> {
        match *self {
            Builtin::Gbm { alpha, beta } => Some(vec![
                x0[0] * ((alpha - 0.5 * beta * beta) * t + beta * w[0]).exp(),
            ]),
            Builtin::Drift { c } => Some(vec![x0[0] + c * t]),
            Builtin::Decay => Some(vec![x0[0] * (-t).exp()]),
            Builtin::Bilinear2 => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_ids() {
        for id in Builtin::IDS {
            assert_eq!(Builtin::from_id(id).unwrap().id(), id);
        }
        assert!(Builtin::from_id("nope").is_err());
    }

    #[test]
    fn fd_jets_match_analytic() {
        struct Smooth;
        impl SdeSystem for Smooth {
            fn dims(&self) -> (usize, usize) {
                (2, 1)
            }
            fn drift<S: Scalar>(&self, x: &[S], t: &S) -> Vec<S> {
                vec![
                    x[0].sin() * x[1].clone() + t.clone(),
                    (x[0].clone() * 0.5).exp(),
                ]
            }
            fn diffusion<S: Scalar>(&self, x: &[S], t: &S) -> Vec<S> {
                vec![
                    x[1].clone() * x[1].clone() * 0.3,
                    x[0].cos() * (t.clone() + 1.0),
                ]
            }
        }
        let analytic = SdeProblem::analytic("smooth", Smooth);
        let fd = analytic
            .clone()
            .with_provider(Provider::FiniteDifference(FdConfig::default()))
            .unwrap();
        let (aa, ab) = analytic.taylor(&[0.4, -0.7], 0.3, 4).unwrap();
        let (fa, fb) = fd.taylor(&[0.4, -0.7], 0.3, 4).unwrap();
        for (x, y) in aa.iter().chain(&ab).zip(fa.iter().chain(&fb)) {
            for (i, (p, q)) in x.coeffs().iter().zip(y.coeffs()).enumerate() {
                assert!((p - q).abs() < 1e-5 * (1.0 + p.abs()), "{i}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn plain_problems_are_finite_difference_only() {
        let p = SdeProblem::from_fns("lin", 1, 1, |x, _| vec![-x[0]], |_, _| vec![0.2]);
        assert!(matches!(p.provider(), Provider::FiniteDifference(_)));
        assert!(p.with_provider(Provider::Analytic).is_err());
    }
}
