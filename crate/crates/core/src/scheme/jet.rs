//! Truncated multivariate Taylor polynomials ("jets") in `(x_1, …, x_n, t)`.
//!
//! A jet of degree `D` holds the Taylor coefficients of a function around an
//! expansion point for every monomial of total degree ≤ `D`. Arithmetic and
//! elementary functions propagate the expansion exactly up to degree `D`;
//! differentiation lowers the number of trustworthy degrees by one, which is
//! tracked in `valid`.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Monomial tables for a fixed number of variables and degree.
#[derive(Debug)]
pub struct JetContext {
    nvars: usize,
    degree: usize,
    exponents: Vec<Vec<u8>>,
    /// Number of monomials of total degree ≤ d, for d = 0..=degree.
    upto: Vec<usize>,
    /// Pairs `(a, b, c)` with monomial a · monomial b = monomial c.
    products: Vec<(u16, u16, u16)>,
    /// `shift[v][a]` = index of monomial a + e_v, if within the degree.
    shift: Vec<Vec<Option<u16>>>,
}

impl JetContext {
    pub fn new(nvars: usize, degree: usize) -> Arc<Self> {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut upto = Vec::with_capacity(degree + 1);
        for d in 0..=degree {
            let mut layer = Vec::new();
            compositions(d, nvars, &mut Vec::new(), &mut layer);
            exponents.extend(layer);
            upto.push(exponents.len());
        }
        let find = |e: &[u8]| exponents.iter().position(|x| x == e);
        let total = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();
        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            for (b, eb) in exponents.iter().enumerate() {
                if total(ea) + total(eb) > degree {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = find(&sum).expect("product monomial within degree");
                products.push((a as u16, b as u16, c as u16));
            }
        }
        products.sort_by_key(|&(_, _, c)| c);
        let shift = (0..nvars)
            .map(|v| {
                exponents
                    .iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[v] += 1;
                        find(&up).map(|i| i as u16)
                    })
                    .collect()
            })
            .collect();
        Arc::new(Self {
            nvars,
            degree,
            exponents,
            upto,
            products,
            shift,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        self.exponents.iter().position(|e| e == exponent)
    }

    /// Number of monomials of total degree ≤ `d`.
    pub fn count_upto(&self, d: usize) -> usize {
        self.upto[d.min(self.degree)]
    }
}

fn compositions(total: usize, parts: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if parts == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if parts == 1 {
        cur.push(total as u8);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in (0..=total).rev() {
        cur.push(first as u8);
        compositions(total - first, parts - 1, cur, out);
        cur.pop();
    }
}

/// A truncated Taylor expansion, or a plain constant.
#[derive(Clone, Debug)]
pub struct Jet {
    ctx: Option<Arc<JetContext>>,
    coeffs: Vec<f64>,
    /// Highest degree whose coefficients are exact; constants are exact to
    /// any degree.
    valid: i32,
}

const EXACT: i32 = i32::MAX;

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self {
            ctx: None,
            coeffs: vec![value],
            valid: EXACT,
        }
    }

    /// The coordinate function `var` expanded at `value`.
    pub fn variable(ctx: &Arc<JetContext>, var: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; ctx.len()];
        coeffs[0] = value;
        if ctx.degree >= 1 {
            let mut e = vec![0u8; ctx.nvars];
            e[var] = 1;
            coeffs[ctx.index_of(&e).unwrap()] = 1.0;
        }
        Self {
            ctx: Some(Arc::clone(ctx)),
            coeffs,
            valid: ctx.degree as i32,
        }
    }

    /// Jet from raw Taylor coefficients (`∂^α f / α!`) in context order.
    pub fn from_coeffs(ctx: &Arc<JetContext>, coeffs: Vec<f64>, valid: usize) -> Self {
        assert_eq!(coeffs.len(), ctx.len());
        Self {
            ctx: Some(Arc::clone(ctx)),
            coeffs,
            valid: valid.min(ctx.degree) as i32,
        }
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degrees known exactly; negative once more derivatives were taken than
    /// the expansion supports.
    pub fn valid_degree(&self) -> i32 {
        self.valid
    }

    pub fn context(&self) -> Option<&Arc<JetContext>> {
        self.ctx.as_ref()
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exponent: &[u8]) -> f64 {
        match &self.ctx {
            None => {
                if exponent.iter().all(|&e| e == 0) {
                    self.coeffs[0]
                } else {
                    0.0
                }
            }
            Some(ctx) => ctx.index_of(exponent).map_or(0.0, |i| self.coeffs[i]),
        }
    }

    /// `∂ / ∂(variable var)`.
    pub fn derivative(&self, var: usize) -> Jet {
        let Some(ctx) = &self.ctx else {
            return Jet::constant(0.0);
        };
        let coeffs = ctx.shift[var]
            .iter()
            .enumerate()
            .map(|(a, up)| match up {
                Some(u) => (ctx.exponents[a][var] as f64 + 1.0) * self.coeffs[*u as usize],
                None => 0.0,
            })
            .collect();
        Jet {
            ctx: Some(Arc::clone(ctx)),
            coeffs,
            valid: if self.valid == EXACT {
                EXACT
            } else {
                self.valid - 1
            },
        }
    }

    fn promote(&self, ctx: &Arc<JetContext>) -> Vec<f64> {
        match &self.ctx {
            Some(_) => self.coeffs.clone(),
            None => {
                let mut c = vec![0.0; ctx.len()];
                c[0] = self.coeffs[0];
                c
            }
        }
    }

    fn map_scalar(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            valid: self.valid,
        }
    }

    fn combine(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        match (&self.ctx, &rhs.ctx) {
            (None, None) => Jet::constant(f(self.coeffs[0], rhs.coeffs[0])),
            (Some(ctx), _) | (None, Some(ctx)) => {
                let a = self.promote(ctx);
                let b = rhs.promote(ctx);
                let coeffs = a.iter().zip(&b).map(|(&x, &y)| f(x, y)).collect();
                Jet {
                    ctx: Some(Arc::clone(ctx)),
                    coeffs,
                    valid: self.valid.min(rhs.valid),
                }
            }
        }
    }

    fn product(&self, rhs: &Jet) -> Jet {
        match (&self.ctx, &rhs.ctx) {
            (None, _) => rhs.map_scalar(|c| c * self.coeffs[0]),
            (_, None) => self.map_scalar(|c| c * rhs.coeffs[0]),
            (Some(ctx), Some(_)) => {
                let mut coeffs = vec![0.0; ctx.len()];
                for &(a, b, c) in &ctx.products {
                    coeffs[c as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
                }
                Jet {
                    ctx: Some(Arc::clone(ctx)),
                    coeffs,
                    valid: self.valid.min(rhs.valid),
                }
            }
        }
    }

    /// `f(self)` from the derivatives `f(v), f'(v), f''(v), …` at the value.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let Some(ctx) = &self.ctx else {
            return Jet::constant(derivs[0]);
        };
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = vec![0.0; ctx.len()];
        out[0] = derivs[0];
        let mut power = h.clone();
        let mut factorial = 1.0;
        for (k, &dk) in derivs.iter().enumerate().skip(1).take(ctx.degree) {
            factorial *= k as f64;
            let w = dk / factorial;
            for (o, p) in out.iter_mut().zip(&power.coeffs) {
                *o += w * p;
            }
            if k < ctx.degree {
                power = power.product(&h);
            }
        }
        Jet {
            ctx: Some(Arc::clone(ctx)),
            coeffs: out,
            valid: self.valid,
        }
    }

    fn order(&self) -> usize {
        self.ctx.as_ref().map_or(0, |c| c.degree)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Jet {
        let v = self.value();
        let mut d = vec![v.ln()];
        let mut fact = 1.0;
        for k in 1..=self.order() {
            // (−1)^{k−1} (k−1)! / v^k
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / v.powi(k as i32));
            fact *= k as f64;
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&(0..=self.order()).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&(0..=self.order()).map(|k| cycle[k % 4]).collect::<Vec<_>>())
    }

    pub fn powf(&self, p: f64) -> Jet {
        let v = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for k in 0..=self.order() {
            d.push(falling * v.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n >= 0 {
            // Exact for non-positive values too.
            let mut out = Jet::constant(1.0);
            for _ in 0..n {
                out = out.product(self);
            }
            return out;
        }
        self.recip().powi(-n)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let v = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            // (−1)^k k! / v^{k+1}
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / v.powi(k as i32 + 1));
            fact *= (k + 1) as f64;
        }
        self.compose(&d)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.combine(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.combine(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        match rhs.ctx {
            None => self.map_scalar(|c| c / rhs.coeffs[0]),
            Some(_) => self.product(&rhs.recip()),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map_scalar(|c| -c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map_scalar(|c| c * rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map_scalar(|c| c / rhs)
    }
}

/// Number type accepted by user-defined drift and diffusion functions, so
/// the same code evaluates plain values and Taylor expansions.
pub trait Scalar:
    Clone
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(value: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(value: f64) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn recip(&self) -> Self {
        f64::recip(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}

impl Scalar for Jet {
    fn cst(value: f64) -> Self {
        Jet::constant(value)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
}
