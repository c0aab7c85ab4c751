//! The differential operators `G_i`, `L̄`, `L` and the table of composed
//! coefficient functions a scheme step consumes.
//!
//! Everything is evaluated on truncated Taylor expansions of `a` and `B` in
//! `(x, t)`: every operator application lowers the number of trustworthy
//! degrees by one (two for `L`), and a chain is valid while its constant
//! term still is.

use std::collections::{BTreeMap, HashMap};

use super::jet::Jet;
use super::problem::SdeProblem;
use crate::kernels::Order;
use crate::{Error, Result};

/// Every composed function of the order-2.5 scheme, by chain name, read
/// outermost operator first: `GLbarB` is `G_{i_2} L̄ B_{i_1}`.
pub const ROSTER: [&str; 20] = [
    "B",
    "abar",
    "GB",
    "Gabar",
    "LbarB",
    "GGB",
    "Lbarabar",
    "LLa",
    "GLbarB",
    "LbarGB",
    "GGabar",
    "GGGB",
    "GLbarabar",
    "LbarLbarB",
    "LbarGabar",
    "GLbarGB",
    "GGLbarB",
    "GGGabar",
    "LbarGGB",
    "GGGGB",
];

/// Roster entries used by the scheme of a given order.
pub fn roster(order: Order) -> &'static [&'static str] {
    match order {
        Order::One => &ROSTER[..3],
        Order::OneHalf => &ROSTER[..7],
        Order::Two => &ROSTER[..12],
        Order::TwoHalf => &ROSTER,
    }
}

/// Taylor degree needed to evaluate every chain of `order`.
pub fn jet_degree(order: Order) -> usize {
    match order {
        Order::One => 1,
        Order::OneHalf => 2,
        Order::Two => 3,
        Order::TwoHalf => 4,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Tok {
    G,
    Lbar,
    L,
    B,
    Abar,
    A,
}

fn parse_chain(name: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut rest = name;
    while !rest.is_empty() {
        let (tok, len) = if rest.starts_with("Lbar") {
            (Tok::Lbar, 4)
        } else if rest.starts_with("abar") {
            (Tok::Abar, 4)
        } else if rest.starts_with('G') {
            (Tok::G, 1)
        } else if rest.starts_with('L') {
            (Tok::L, 1)
        } else if rest.starts_with('B') {
            (Tok::B, 1)
        } else if rest.starts_with('a') {
            (Tok::A, 1)
        } else {
            return Err(Error::InvalidArgument(format!(
                "unknown operator chain {name:?}"
            )));
        };
        out.push(tok);
        rest = &rest[len..];
    }
    match out.last() {
        Some(Tok::B | Tok::Abar | Tok::A)
            if out[..out.len() - 1]
                .iter()
                .all(|t| matches!(t, Tok::G | Tok::Lbar | Tok::L)) =>
        {
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!(
            "malformed operator chain {name:?}"
        ))),
    }
}

/// Number of noise indices a chain carries: one per `G` plus one for `B`.
pub fn chain_arity(name: &str) -> Result<usize> {
    Ok(parse_chain(name)?
        .iter()
        .filter(|t| matches!(t, Tok::G | Tok::B))
        .count())
}

/// Total derivative order of a chain.
pub fn chain_order(name: &str) -> Result<usize> {
    Ok(parse_chain(name)?
        .iter()
        .map(|t| match t {
            Tok::G | Tok::Lbar | Tok::Abar => 1,
            Tok::L => 2,
            Tok::B | Tok::A => 0,
        })
        .sum())
}

/// Values of the roster functions at one point.
///
/// Entries are indexed by the operator tuple `(i_1, …, i_r)`: `i_1` is the
/// index of the innermost `B` (or of the innermost `G` for `ā`-based chains),
/// later indices belong to `G`s further out, and `i_1` varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTable {
    n: usize,
    m: usize,
    entries: BTreeMap<&'static str, (usize, Vec<f64>)>,
}

impl OperatorTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, chain: &str) -> bool {
        self.entries.contains_key(chain)
    }

    pub fn chains(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// The `n`-vector for `chain` at 1-based operator tuple `idx`.
    pub fn get(&self, chain: &str, idx: &[usize]) -> Option<&[f64]> {
        let (arity, values) = self.entries.get(chain)?;
        if idx.len() != *arity || idx.iter().any(|&i| i == 0 || i > self.m) {
            return None;
        }
        let flat = idx.iter().rev().fold(0, |acc, &i| acc * self.m + (i - 1));
        Some(&values[flat * self.n..(flat + 1) * self.n])
    }

    /// Like [`get`](Self::get) for indices the scheme itself generates.
    pub(crate) fn at(&self, chain: &str, idx: &[usize]) -> &[f64] {
        self.get(chain, idx)
            .unwrap_or_else(|| panic!("operator table lacks {chain} at {idx:?}"))
    }
}

struct Evaluator {
    n: usize,
    m: usize,
    a: Vec<Jet>,
    b: Vec<Jet>,
    abar: Vec<Jet>,
    memo: HashMap<(Vec<Tok>, Vec<usize>), Vec<Jet>>,
}

fn sum(terms: impl IntoIterator<Item = Jet>) -> Jet {
    terms
        .into_iter()
        .reduce(|acc, t| acc + t)
        .unwrap_or_else(|| Jet::constant(0.0))
}

impl Evaluator {
    fn new(problem: &SdeProblem, x: &[f64], t: f64, degree: usize) -> Result<Self> {
        let (a, b) = problem.taylor(x, t, degree)?;
        let (n, m) = (problem.n(), problem.m());
        let mut ev = Self {
            n,
            m,
            a,
            b,
            abar: Vec::new(),
            memo: HashMap::new(),
        };
        let corr: Vec<Vec<Jet>> = (0..m).map(|j| ev.g(j, &ev.b_col(j))).collect();
        ev.abar = (0..n)
            .map(|r| ev.a[r].clone() - sum(corr.iter().map(|c| c[r].clone())) * 0.5)
            .collect();
        Ok(ev)
    }

    fn b_col(&self, i: usize) -> Vec<Jet> {
        (0..self.n)
            .map(|r| self.b[r * self.m + i].clone())
            .collect()
    }

    // G_i f = Σ_j B_{ji} ∂f/∂x_j, with i 0-based.
    fn g(&self, i: usize, f: &[Jet]) -> Vec<Jet> {
        f.iter()
            .map(|fr| sum((0..self.n).map(|j| self.b[j * self.m + i].clone() * fr.derivative(j))))
            .collect()
    }

    // ∂f/∂t + v·∇f
    fn transport(&self, v: &[Jet], f: &[Jet]) -> Vec<Jet> {
        f.iter()
            .map(|fr| {
                fr.derivative(self.n) + sum((0..self.n).map(|j| v[j].clone() * fr.derivative(j)))
            })
            .collect()
    }

    fn l(&self, f: &[Jet]) -> Vec<Jet> {
        let first = self.transport(&self.a, f);
        first
            .into_iter()
            .zip(f)
            .map(|(head, fr)| {
                let mut diff = Vec::new();
                for l in 0..self.n {
                    let dl = fr.derivative(l);
                    for i in 0..self.n {
                        let w = sum((0..self.m).map(|k| {
                            self.b[l * self.m + k].clone() * self.b[i * self.m + k].clone()
                        }));
                        diff.push(w * dl.derivative(i));
                    }
                }
                head + sum(diff) * 0.5
            })
            .collect()
    }

    /// Chain `toks` (outermost first) with noise indices `idx` (0-based,
    /// innermost first).
    fn eval(&mut self, toks: &[Tok], idx: &[usize]) -> Vec<Jet> {
        let key = (toks.to_vec(), idx.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = match toks[0] {
            Tok::B => self.b_col(idx[0]),
            Tok::A => self.a.clone(),
            Tok::Abar => self.abar.clone(),
            op => {
                let inner_idx = if op == Tok::G {
                    &idx[..idx.len() - 1]
                } else {
                    idx
                };
                let inner = self.eval(&toks[1..], inner_idx);
                match op {
                    Tok::G => self.g(idx[idx.len() - 1], &inner),
                    Tok::Lbar => self.transport(&self.abar.clone(), &inner),
                    _ => self.l(&inner),
                }
            }
        };
        self.memo.insert(key, v.clone());
        v
    }
}

/// `ā = a − ½ Σ_j G_j B_j` at `(x, t)`.
pub fn modified_drift(problem: &SdeProblem, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let ev = Evaluator::new(problem, x, t, 1)?;
    if ev.abar.iter().any(|j| j.valid_degree() < 0) {
        return Err(Error::MissingDerivative {
            chain: "abar".into(),
            needed: 1,
            available: problem.max_degree(),
        });
    }
    Ok(ev.abar.iter().map(Jet::value).collect())
}

/// Evaluates every roster function the scheme of `order` needs at `(x, t)`.
pub fn apply_operators(
    problem: &SdeProblem,
    order: Order,
    x: &[f64],
    t: f64,
) -> Result<OperatorTable> {
    apply_chains(problem, roster(order), x, t)
}

/// Evaluates the given chains (names as in [`ROSTER`], or any other
/// composition of `G`, `Lbar`, `L` over `B`, `abar`, `a`).
pub fn apply_chains(
    problem: &SdeProblem,
    chains: &[&'static str],
    x: &[f64],
    t: f64,
) -> Result<OperatorTable> {
    let mut parsed = Vec::with_capacity(chains.len());
    let mut degree = 0;
    for &name in chains {
        let toks = parse_chain(name)?;
        let need = chain_order(name)?;
        if need > problem.max_degree() {
            return Err(Error::MissingDerivative {
                chain: name.to_string(),
                needed: need,
                available: problem.max_degree(),
            });
        }
        degree = degree.max(need);
        parsed.push((name, toks, chain_arity(name)?));
    }
    let mut ev = Evaluator::new(problem, x, t, degree)?;
    let (n, m) = (ev.n, ev.m);
    let mut entries = BTreeMap::new();
    for (name, toks, arity) in parsed {
        let count = m.pow(arity as u32);
        let mut values = Vec::with_capacity(count * n);
        let mut idx = vec![0usize; arity];
        for flat in 0..count {
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % m;
                rem /= m;
            }
            for jet in ev.eval(&toks, &idx) {
                if jet.valid_degree() < 0 {
                    return Err(Error::MissingDerivative {
                        chain: name.to_string(),
                        needed: chain_order(name)?,
                        available: problem.max_degree(),
                    });
                }
                let v = jet.value();
                if !v.is_finite() {
                    return Err(Error::NonFinite(name.to_string()));
                }
                values.push(v);
            }
        }
        entries.insert(name, (arity, values));
    }
    Ok(OperatorTable { n, m, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::problem::{Builtin, FdConfig, Provider};

    #[test]
    fn chain_shapes() {
        assert_eq!(chain_arity("GLbarGB").unwrap(), 3);
        assert_eq!(chain_arity("LLa").unwrap(), 0);
        assert_eq!(chain_order("LLa").unwrap(), 4);
        assert_eq!(chain_order("GGGGB").unwrap(), 4);
        assert_eq!(chain_order("GLbarabar").unwrap(), 3);
        assert!(parse_chain("GxB").is_err());
        assert!(parse_chain("BG").is_err());
        for c in ROSTER {
            assert!(chain_order(c).unwrap() <= 4, "{c}");
        }
    }

    #[test]
    fn gbm_closed_forms() {
        let (alpha, beta, x) = (0.7, 0.4, 1.3);
        let p = Builtin::Gbm { alpha, beta }.problem();
        let tab = apply_operators(&p, Order::TwoHalf, &[x], 0.2).unwrap();
        let ab = alpha - beta * beta / 2.0;
        let cases = [
            ("B", beta * x),
            ("abar", ab * x),
            ("GB", beta * beta * x),
            ("GGGGB", beta.powi(5) * x),
            ("Lbarabar", ab * ab * x),
            ("LLa", alpha.powi(3) * x),
            ("GLbarGB", beta * ab * beta * beta * x),
            ("LbarLbarB", ab * ab * beta * x),
        ];
        for (c, want) in cases {
            let got = tab.get(c, &vec![1; chain_arity(c).unwrap()]).unwrap()[0];
            assert!(
                (got - want).abs() < 1e-13 * want.abs().max(1.0),
                "{c}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn missing_derivatives_are_reported() {
        let p = Builtin::Bilinear2
            .problem()
            .with_provider(Provider::FiniteDifference(FdConfig { max_order: 2 }))
            .unwrap();
        match apply_operators(&p, Order::TwoHalf, &[1.0, 0.5], 0.0) {
            Err(Error::MissingDerivative {
                needed, available, ..
            }) => {
                assert!(needed > 2);
                assert_eq!(available, 2);
            }
            other => panic!("expected missing derivative, got {other:?}"),
        }
        assert!(apply_operators(&p, Order::OneHalf, &[1.0, 0.5], 0.0).is_ok());
    }
}
