use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub const MAX_MULTIPLICITY: usize = 5;
pub const MAX_WEIGHT: u8 = 2;

/// Exponents `(l_1, …, l_k)` of the weights `(t − t_l)^{l_l}`, innermost first.
///
/// Displayed and parsed as a digit string, e.g. `"100"` has the weight on the
/// innermost integration variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weights(Vec<u8>);

/// The twelve integral families of the order-2.5 scheme, in order of appearance.
pub const SCHEME_FAMILIES: [&str; 12] = [
    "0", "1", "2", "00", "01", "10", "000", "100", "010", "001", "0000", "00000",
];

impl Weights {
    pub fn new(exponents: Vec<u8>) -> Result<Self> {
        if exponents.is_empty() || exponents.len() > MAX_MULTIPLICITY {
            return Err(Error::InvalidSpec(format!(
                "multiplicity must be in 1..={MAX_MULTIPLICITY}, got {}",
                exponents.len()
            )));
        }
        if let Some(&l) = exponents.iter().find(|&&l| l > MAX_WEIGHT) {
            return Err(Error::InvalidSpec(format!(
                "weight exponent {l} is outside 0..={MAX_WEIGHT}"
            )));
        }
        Ok(Self(exponents))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn multiplicity(&self) -> usize {
        self.0.len()
    }

    /// `L = Σ l_i`.
    pub fn total(&self) -> usize {
        self.0.iter().map(|&l| l as usize).sum()
    }

    /// `k + 2L`: the coefficients scale like `Δ^{(k+2L)/2}` and the
    /// mean-square errors like `Δ^{k+2L}`.
    pub fn delta_power(&self) -> u32 {
        (self.multiplicity() + 2 * self.total()) as u32
    }

    pub fn is_scheme_family(&self) -> bool {
        SCHEME_FAMILIES.contains(&self.to_string().as_str())
    }

    pub fn scheme_families() -> Vec<Weights> {
        SCHEME_FAMILIES.iter().map(|s| s.parse().unwrap()).collect()
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Weights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let digits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidSpec(format!("bad weight character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Weights::new(digits)
    }
}

/// One iterated integral: weights plus Wiener component indices
/// `(i_1, …, i_k)`, each in `1..=m`, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralSpec {
    weights: Weights,
    components: Vec<usize>,
}

impl IntegralSpec {
    pub fn new(weights: Weights, components: Vec<usize>) -> Result<Self> {
        if components.len() != weights.multiplicity() {
            return Err(Error::InvalidSpec(format!(
                "{} components given for multiplicity {}",
                components.len(),
                weights.multiplicity()
            )));
        }
        if components.contains(&0) {
            return Err(Error::InvalidSpec(
                "component indices are 1-based; 0 (the time component) is not supported".into(),
            ));
        }
        Ok(Self {
            weights,
            components,
        })
    }

    /// Spec with the given weights and pairwise distinct components `1..=k`.
    pub fn distinct(weights: Weights) -> Self {
        let components = (1..=weights.multiplicity()).collect();
        Self {
            weights,
            components,
        }
    }

    /// Spec with every component equal to 1.
    pub fn repeated(weights: Weights) -> Self {
        let components = vec![1; weights.multiplicity()];
        Self {
            weights,
            components,
        }
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    pub fn multiplicity(&self) -> usize {
        self.weights.multiplicity()
    }

    /// Weight combinations outside the twelve scheme families.
    pub fn is_extended(&self) -> bool {
        !self.weights.is_scheme_family()
    }

    pub fn pairwise_distinct(&self) -> bool {
        let c = &self.components;
        (0..c.len()).all(|a| (a + 1..c.len()).all(|b| c[a] != c[b]))
    }
}

impl fmt::Display for IntegralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})[", self.weights)?;
        for (n, c) in self.components.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Weights = "(100)".parse().unwrap();
        assert_eq!(w.as_slice(), &[1, 0, 0]);
        assert_eq!(w.to_string(), "100");
        assert_eq!(w.delta_power(), 5);
        assert!("3".parse::<Weights>().is_err());
        assert!("000000".parse::<Weights>().is_err());
        assert!("".parse::<Weights>().is_err());
    }

    #[test]
    fn families() {
        let fams = Weights::scheme_families();
        assert_eq!(fams.len(), 12);
        assert!(fams.iter().all(Weights::is_scheme_family));
        let extended = IntegralSpec::distinct("11".parse().unwrap());
        assert!(extended.is_extended());
        assert!(!IntegralSpec::distinct("010".parse().unwrap()).is_extended());
    }

    #[test]
    fn spec_validation() {
        let w: Weights = "00".parse().unwrap();
        assert!(IntegralSpec::new(w.clone(), vec![1]).is_err());
        assert!(IntegralSpec::new(w.clone(), vec![0, 1]).is_err());
        let s = IntegralSpec::new(w, vec![2, 2]).unwrap();
        assert!(!s.pairwise_distinct());
        assert_eq!(s.to_string(), "(00)[2,2]");
    }
}
