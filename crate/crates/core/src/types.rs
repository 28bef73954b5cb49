//! Type strings over {*, n, p, t}, branch numbers and chain vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One};

use crate::error::{Error, Result};
use crate::formula::Clause;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// independent
    Star,
    /// one shared variable, opposite polarity
    N,
    /// one shared variable, same polarity
    P,
    /// two shared variables, both opposite
    T,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Star => '*',
            Symbol::N => 'n',
            Symbol::P => 'p',
            Symbol::T => 't',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '*' => Some(Symbol::Star),
            'n' => Some(Symbol::N),
            'p' => Some(Symbol::P),
            't' => Some(Symbol::T),
            _ => None,
        }
    }

    /// Variables a 3-clause introduces after a predecessor joined by this symbol.
    pub fn new_variables(self) -> usize {
        match self {
            Symbol::Star => 3,
            Symbol::N | Symbol::P => 2,
            Symbol::T => 1,
        }
    }
}

/// A string over {*, n, p, t} ending in `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeString(String);

impl TypeString {
    pub(crate) fn from_symbols(symbols: Vec<Symbol>) -> Self {
        TypeString(symbols.into_iter().map(Symbol::as_char).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.0
            .chars()
            .map(|c| Symbol::from_char(c).expect("validated"))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of clauses in a single chain of this type.
    pub fn clause_count(&self) -> usize {
        self.0.len()
    }

    /// True when `*` appears only at the end, i.e. the string types one chain.
    pub fn is_single_chain(&self) -> bool {
        !self.0[..self.0.len() - 1].contains('*')
    }

    /// Reversal of everything but the closing `*`.
    pub fn reversed(&self) -> TypeString {
        let body: String = self.0[..self.0.len() - 1].chars().rev().collect();
        TypeString(body + "*")
    }

    /// Representative of the reversal class: the smaller of the string and
    /// its reversal.
    pub fn canonical(&self) -> TypeString {
        let r = self.reversed();
        if r < *self {
            r
        } else {
            self.clone()
        }
    }

    pub fn has_forbidden_substring(&self) -> bool {
        self.0.contains("tp") || self.0.contains("tt")
    }

    /// Variable count of a 3-clause chain of this type.
    pub fn eta(&self) -> usize {
        let syms = self.symbols();
        3 + syms[..syms.len() - 1]
            .iter()
            .map(|s| s.new_variables())
            .sum::<usize>()
    }

    /// Concatenation of two terminated strings.
    pub fn concat(&self, other: &TypeString) -> TypeString {
        TypeString(format!("{}{}", self.0, other.0))
    }

    /// A concrete all-fresh 3-clause realization of a single-chain type.
    pub fn realize(&self) -> Result<Vec<Clause>> {
        if !self.is_single_chain() {
            return Err(Error::Precondition(format!(
                "{self} types more than one chain"
            )));
        }
        let mut clauses = vec![Clause::from_dimacs(&[1, 2, 3])?];
        let mut free = vec![2, 3];
        let mut next = 4;
        for s in self.symbols().into_iter().take(self.len() - 1) {
            let c = match s {
                Symbol::N | Symbol::P => {
                    let shared = if s == Symbol::N { -free[0] } else { free[0] };
                    free = vec![next, next + 1];
                    vec![shared, next, next + 1]
                }
                Symbol::T => {
                    if free.len() < 2 {
                        return Err(Error::Precondition(format!(
                            "{self} cannot be realized: t after t"
                        )));
                    }
                    let c = vec![-free[0], -free[1], next];
                    free = vec![next];
                    c
                }
                Symbol::Star => unreachable!("single chain"),
            };
            next += if s == Symbol::T { 1 } else { 2 };
            clauses.push(Clause::from_dimacs(&c)?);
        }
        Ok(clauses)
    }
}

impl fmt::Display for TypeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TypeString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if !s.ends_with('*') {
            return Err(Error::Precondition(format!(
                "type string {s:?} must end with *"
            )));
        }
        if let Some(c) = s.chars().find(|&c| Symbol::from_char(c).is_none()) {
            return Err(Error::Precondition(format!(
                "type string {s:?} has symbol {c:?}"
            )));
        }
        Ok(TypeString(s.to_string()))
    }
}

/// 2^{#p} · 3^{#* + #n} · (7/3)^{#t}, doubled for an r2 termination.
pub fn branch_number(zeta: &TypeString, r2: bool) -> BigRational {
    let mut b = BigRational::one();
    for s in zeta.symbols() {
        b *= match s {
            Symbol::P => BigRational::from_integer(2.into()),
            Symbol::Star | Symbol::N => BigRational::from_integer(3.into()),
            Symbol::T => BigRational::new(7.into(), 3.into()),
        };
    }
    if r2 {
        b *= BigRational::from_integer(BigInt::from(2));
    }
    b
}

/// Chain type as tracked by the 3-SAT branching: canonical string plus the
/// number of factor-2 terminations charged to the chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainKind {
    pub zeta: TypeString,
    pub charges: u32,
}

impl ChainKind {
    pub fn branch_number(&self) -> BigRational {
        let mut b = branch_number(&self.zeta, false);
        for _ in 0..self.charges {
            b *= BigRational::from_integer(2.into());
        }
        b
    }

    pub fn log2_branch_number(&self) -> f64 {
        let syms = self.zeta.symbols();
        let count = |s: Symbol| syms.iter().filter(|&&x| x == s).count() as f64;
        count(Symbol::P)
            + (count(Symbol::Star) + count(Symbol::N)) * 3f64.log2()
            + count(Symbol::T) * (7.0f64 / 3.0).log2()
            + self.charges as f64
    }
}

/// Number of chains of each kind in an instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChainVector {
    pub counts: BTreeMap<ChainKind, usize>,
}

impl ChainVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: ChainKind) {
        *self.counts.entry(kind).or_insert(0) += 1;
    }

    pub fn total_chains(&self) -> usize {
        self.counts.values().sum()
    }

    /// Σ ν_i · log2 b_i.
    pub fn log2_weight(&self) -> f64 {
        self.counts
            .iter()
            .map(|(k, &n)| n as f64 * k.log2_branch_number())
            .sum()
    }

    /// Π b_i^{ν_i}, exactly.
    pub fn product(&self) -> BigRational {
        let mut p = BigRational::one();
        for (k, &n) in &self.counts {
            let b = k.branch_number();
            for _ in 0..n {
                p *= &b;
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain, zeta};

    fn ts(s: &str) -> TypeString {
        s.parse().unwrap()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn branch_numbers() {
        assert_eq!(branch_number(&ts("*"), false), rat(3, 1));
        assert_eq!(branch_number(&ts("n*"), false), rat(9, 1));
        assert_eq!(branch_number(&ts("pp*"), true), rat(24, 1));
        assert_eq!(branch_number(&ts("t*"), false), rat(7, 1));
    }

    #[test]
    fn branch_number_multiplicative() {
        let all = ["*", "n*", "p*", "t*", "tn*", "npt*", "pnnt*"];
        for a in all {
            for b in all {
                let (a, b) = (ts(a), ts(b));
                assert_eq!(
                    branch_number(&a.concat(&b), false),
                    branch_number(&a, false) * branch_number(&b, false)
                );
            }
        }
    }

    #[test]
    fn eta_values() {
        assert_eq!(ts("*").eta(), 3);
        assert_eq!(ts("p*").eta(), 5);
        assert_eq!(ts("t*").eta(), 4);
        assert_eq!(ts("nnnn*").eta(), 11);
        assert_eq!(ts("tnnnp*").eta(), 12);
    }

    #[test]
    fn realization_round_trips() {
        for s in ["*", "n*", "p*", "t*", "tnt*", "ntnp*", "tnnnp*", "tnpt*"] {
            let cl = ts(s).realize().unwrap();
            assert_eq!(zeta(&cl).unwrap(), ts(s));
            let chain = build_chain(cl, 3).unwrap();
            assert_eq!(chain.variables().len(), ts(s).eta());
        }
        assert!(ts("tt*").realize().is_err());
        assert!(ts("n**").realize().is_err());
    }

    #[test]
    fn canonical_form() {
        assert_eq!(ts("tnnn*").canonical(), ts("nnnt*"));
        assert_eq!(ts("nnnt*").canonical(), ts("nnnt*"));
        assert_eq!(ts("*").reversed(), ts("*"));
        assert!(ts("ntp*").has_forbidden_substring());
        assert!(!ts("tnp*").has_forbidden_substring());
    }

    #[test]
    fn rejects_bad_strings() {
        assert!("n".parse::<TypeString>().is_err());
        assert!("x*".parse::<TypeString>().is_err());
    }

    #[test]
    fn chain_vector_weight() {
        let mut v = ChainVector::new();
        v.add(ChainKind {
            zeta: ts("*"),
            charges: 0,
        });
        v.add(ChainKind {
            zeta: ts("t*"),
            charges: 1,
        });
        assert_eq!(v.product(), rat(42, 1));
        assert!((v.log2_weight() - 42f64.log2()).abs() < 1e-12);
    }
}
