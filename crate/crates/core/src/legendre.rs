//! Legendre polynomials with exact rational coefficients and the shifted
//! orthonormal system `φ_j` on an interval `[t, T]`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

pub const DEFAULT_MAX_DEGREE: usize = 64;

/// Dense polynomial over the rationals, coefficients in ascending degree.
///
/// Trailing zero coefficients are never stored, so the zero polynomial has an
/// empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(BigRational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / BigInt::from(i + 1));
        }
        Self::from_coeffs(out)
    }

    /// `x ↦ ∫_a^x p(s) ds`.
    pub fn integral_from(&self, a: &BigRational) -> Self {
        let mut anti = self.antiderivative();
        let offset = anti.eval(a);
        if anti.coeffs.is_empty() {
            return anti;
        }
        anti.coeffs[0] -= offset;
        Self::from_coeffs(anti.coeffs)
    }

    pub fn definite_integral(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }
}

/// Exact antiderivative with zero constant term.
pub fn poly_antiderivative(p: &RationalPoly) -> RationalPoly {
    p.antiderivative()
}

impl Add for &RationalPoly {
    type Output = RationalPoly;

    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
            .collect();
        RationalPoly::from_coeffs(coeffs)
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;

    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        self + &(-rhs)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;

    fn neg(self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;

    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        RationalPoly::from_coeffs(out)
    }
}

fn legendre_table() -> &'static [RationalPoly] {
    static TABLE: OnceLock<Vec<RationalPoly>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![RationalPoly::one(), RationalPoly::x()];
        for n in 1..DEFAULT_MAX_DEGREE {
            // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
            let two_n_plus_one = BigRational::from_integer(BigInt::from(2 * n + 1));
            let n_rat = BigRational::from_integer(BigInt::from(n));
            let inv = BigRational::new(BigInt::one(), BigInt::from(n + 1));
            let lead = (&RationalPoly::x() * &table[n]).scale(&two_n_plus_one);
            let tail = table[n - 1].scale(&n_rat);
            table.push((&lead - &tail).scale(&inv));
        }
        table
    })
}

/// Legendre polynomial `P_n` with exact coefficients.
pub fn legendre_poly(n: usize) -> Result<RationalPoly> {
    legendre_poly_ref(n).cloned()
}

pub(crate) fn legendre_poly_ref(n: usize) -> Result<&'static RationalPoly> {
    legendre_table().get(n).ok_or(Error::DegreeOverflow {
        requested: n,
        max: DEFAULT_MAX_DEGREE,
    })
}

/// `P_n(x)` by the three-term recurrence in floating point.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// A step interval `[t, T]` with `T > t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    start: f64,
    end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn delta(&self) -> f64 {
        self.end - self.start
    }
}

/// `φ_j(s) = √((2j+1)/Δ) · P_j((s − t − Δ/2)·2/Δ)`.
pub fn phi_eval(j: usize, s: f64, iv: &Interval) -> Result<f64> {
    if !(s >= iv.start && s <= iv.end) {
        return Err(Error::Domain {
            point: s,
            start: iv.start,
            end: iv.end,
        });
    }
    let delta = iv.delta();
    let x = ((s - iv.start - delta / 2.0) * 2.0 / delta).clamp(-1.0, 1.0);
    Ok(((2 * j + 1) as f64 / delta).sqrt() * legendre_eval(j, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn low_order_polynomials() {
        assert_eq!(legendre_poly(0).unwrap(), RationalPoly::one());
        let p2 = legendre_poly(2).unwrap();
        assert_eq!(p2.coeffs(), &[rat(-1, 2), rat(0, 1), rat(3, 2)]);
        assert_eq!(p2.eval(&rat(1, 1)), rat(1, 1));
        assert!(legendre_poly(5).unwrap().eval(&rat(0, 1)).is_zero());
    }

    #[test]
    fn recurrence_matches_closed_forms() {
        let closed: [(&[i64], i64); 7] = [
            (&[1], 1),
            (&[0, 1], 1),
            (&[-1, 0, 3], 2),
            (&[0, -3, 0, 5], 2),
            (&[3, 0, -30, 0, 35], 8),
            (&[0, 15, 0, -70, 0, 63], 8),
            (&[-5, 0, 105, 0, -315, 0, 231], 16),
        ];
        for (n, (num, den)) in closed.iter().enumerate() {
            let expected = RationalPoly::from_integers(num).scale(&rat(1, *den));
            assert_eq!(legendre_poly(n).unwrap(), expected, "P_{n}");
        }
    }

    #[test]
    fn degree_overflow_is_an_error() {
        assert!(legendre_poly(DEFAULT_MAX_DEGREE).is_ok());
        assert!(matches!(
            legendre_poly(DEFAULT_MAX_DEGREE + 1),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn antiderivatives() {
        let one = RationalPoly::one();
        assert_eq!(poly_antiderivative(&one), RationalPoly::x());
        assert_eq!(
            poly_antiderivative(&RationalPoly::x()).coeffs(),
            &[rat(0, 1), rat(0, 1), rat(1, 2)]
        );
        let three_x2 = RationalPoly::from_integers(&[0, 0, 3]);
        assert_eq!(
            poly_antiderivative(&three_x2),
            RationalPoly::from_integers(&[0, 0, 0, 1])
        );
        assert!(poly_antiderivative(&RationalPoly::zero()).is_zero());
    }

    #[test]
    fn basis_integrals_are_exact() {
        let (lo, hi) = (rat(-1, 1), rat(1, 1));
        for j in 0..=12 {
            let integral = legendre_poly(j).unwrap().definite_integral(&lo, &hi);
            let expected = if j == 0 { rat(2, 1) } else { rat(0, 1) };
            assert_eq!(integral, expected, "j = {j}");
        }
    }

    #[test]
    fn float_recurrence_agrees_with_exact_polynomials() {
        for n in 0..=20 {
            let p = legendre_poly(n).unwrap();
            for &x in &[-1.0, -0.7, -0.1, 0.0, 0.35, 0.9, 1.0] {
                let exact = p
                    .eval(&BigRational::from_float(x).unwrap())
                    .to_f64()
                    .unwrap();
                assert!(
                    (exact - legendre_eval(n, x)).abs() < 1e-14,
                    "n = {n}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn phi_values() {
        let iv = Interval::new(0.5, 4.5).unwrap();
        assert!((phi_eval(0, 1.3, &iv).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(phi_eval(1, 2.5, &iv).unwrap(), 0.0);
        assert!(matches!(phi_eval(0, 4.6, &iv), Err(Error::Domain { .. })));
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
