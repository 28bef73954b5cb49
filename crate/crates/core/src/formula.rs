//! CNF formulas, partial assignments and bit words.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A propositional variable, indexed from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable(u32);

impl Variable {
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variables are indexed from 1");
        Variable(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, for indexing assignment vectors.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn positive(self) -> Literal {
        Literal(self.0 as i32)
    }

    pub fn negative(self) -> Literal {
        Literal(-(self.0 as i32))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable or its negation, stored DIMACS-style as a nonzero integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal(i32);

impl Literal {
    pub fn new(var: Variable, positive: bool) -> Self {
        if positive {
            var.positive()
        } else {
            var.negative()
        }
    }

    pub fn from_dimacs(code: i32) -> Option<Self> {
        (code != 0 && code != i32::MIN).then_some(Literal(code))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Variable {
        Variable(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Neg for Literal {
    type Output = Literal;

    fn neg(self) -> Literal {
        Literal(-self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.0)
        } else {
            write!(f, "¬x{}", -self.0)
        }
    }
}

/// A disjunction of literals. The empty clause is ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, dropping repeated literals and rejecting tautologies.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            if out.contains(&lit) {
                continue;
            }
            if out.contains(&-lit) {
                return Err(Error::Precondition(format!(
                    "clause contains both {} and {}",
                    lit.var(),
                    -lit.var().positive()
                )));
            }
            out.push(lit);
        }
        Ok(Clause { literals: out })
    }

    /// Convenience constructor from DIMACS integers.
    pub fn from_dimacs(codes: &[i32]) -> Result<Self> {
        let lits = codes
            .iter()
            .map(|&c| {
                Literal::from_dimacs(c).ok_or_else(|| Error::Precondition("literal 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Clause::new(lits)
    }

    pub fn bottom() -> Self {
        Clause {
            literals: Vec::new(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.contains(&lit)
    }

    pub fn variables(&self) -> impl Iterator<Item = Variable> + '_ {
        self.literals.iter().map(|l| l.var())
    }

    pub fn mentions(&self, var: Variable) -> bool {
        self.literals.iter().any(|l| l.var() == var)
    }

    /// Polarity of `var` in this clause, if it occurs.
    pub fn polarity_of(&self, var: Variable) -> Option<bool> {
        self.literals
            .iter()
            .find(|l| l.var() == var)
            .map(|l| l.is_positive())
    }

    pub fn is_satisfied_by(&self, word: &Word) -> bool {
        self.literals
            .iter()
            .any(|l| l.eval(word.get(l.var().slot())))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "⊥");
        }
        write!(f, "(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, "∨")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A CNF formula over variables `1..=num_vars`.
///
/// Every clause remembers the index of the input clause it descends from,
/// so restrictions can be traced back to their original form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    origins: Vec<usize>,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c
                .literals
                .iter()
                .find(|l| l.var().index() as usize > num_vars)
            {
                return Err(Error::Precondition(format!(
                    "clause {i} mentions {} but the formula has {num_vars} variables",
                    l.var()
                )));
            }
        }
        let origins = (0..clauses.len()).collect();
        Ok(Formula {
            num_vars,
            clauses,
            origins,
        })
    }

    /// Builds a formula from DIMACS-style integer clauses.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i32]]) -> Result<Self> {
        let cs = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>>>()?;
        Formula::new(num_vars, cs)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Index of the input clause that clause `i` descends from.
    pub fn origin(&self, i: usize) -> usize {
        self.origins[i]
    }

    pub fn origins(&self) -> &[usize] {
        &self.origins
    }

    /// Position of the clause descending from input clause `origin`.
    pub fn position_of_origin(&self, origin: usize) -> Option<usize> {
        self.origins
            .binary_search(&origin)
            .ok()
            .or_else(|| self.origins.iter().position(|&o| o == origin))
    }

    pub fn width(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn has_bottom(&self) -> bool {
        self.clauses.iter().any(Clause::is_bottom)
    }

    /// Variables that occur in some clause, in index order.
    pub fn occurring_variables(&self) -> Vec<Variable> {
        let mut seen = vec![false; self.num_vars];
        for c in &self.clauses {
            for v in c.variables() {
                seen[v.slot()] = true;
            }
        }
        (1..=self.num_vars as u32)
            .filter(|&i| seen[i as usize - 1])
            .map(Variable)
            .collect()
    }

    /// Applies a partial assignment: satisfied clauses disappear, false
    /// literals are removed, and fully falsified clauses become ⊥.
    pub fn restrict(&self, alpha: &PartialAssignment) -> Formula {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        let mut origins = Vec::with_capacity(self.clauses.len());
        'clauses: for (c, &o) in self.clauses.iter().zip(&self.origins) {
            let mut kept = Vec::with_capacity(c.len());
            for &l in &c.literals {
                match alpha.get(l.var()) {
                    Some(v) if l.eval(v) => continue 'clauses,
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            clauses.push(Clause { literals: kept });
            origins.push(o);
        }
        Formula {
            num_vars: self.num_vars,
            clauses,
            origins,
        }
    }

    /// Restriction by a single literal set to true.
    pub fn assign(&self, lit: Literal) -> Formula {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        let mut origins = Vec::with_capacity(self.clauses.len());
        for (c, &o) in self.clauses.iter().zip(&self.origins) {
            if c.contains(lit) {
                continue;
            }
            let mut c = c.clone();
            c.literals.retain(|&l| l != -lit);
            clauses.push(c);
            origins.push(o);
        }
        Formula {
            num_vars: self.num_vars,
            clauses,
            origins,
        }
    }

    /// Replaces the clause descending from `origin` by `clause`.
    pub(crate) fn replace_origin(&mut self, origin: usize, clause: Clause) {
        if let Some(i) = self.position_of_origin(origin) {
            self.clauses[i] = clause;
        }
    }

    pub fn is_satisfied_by(&self, word: &Word) -> bool {
        word.len() >= self.num_vars && self.clauses.iter().all(|c| c.is_satisfied_by(word))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Result of unit propagation together with the literals it forced.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub formula: Formula,
    pub trail: Vec<Literal>,
}

/// Repeatedly satisfies the first unit clause until none remains or ⊥ appears.
pub fn propagate(f: &Formula) -> Propagation {
    let mut formula = f.clone();
    let mut trail = Vec::new();
    while !formula.has_bottom() {
        let Some(unit) = formula.clauses.iter().find(|c| c.len() == 1) else {
            break;
        };
        let lit = unit.literals[0];
        trail.push(lit);
        formula = formula.assign(lit);
    }
    Propagation { formula, trail }
}

pub fn unit_propagate(f: &Formula) -> Formula {
    propagate(f).formula
}

/// Variable bindings; unbound variables are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    values: Vec<Option<bool>>,
}

impl PartialAssignment {
    pub fn new(num_vars: usize) -> Self {
        PartialAssignment {
            values: vec![None; num_vars],
        }
    }

    pub fn from_literals(num_vars: usize, lits: &[Literal]) -> Self {
        let mut a = Self::new(num_vars);
        for &l in lits {
            a.set(l.var(), l.is_positive());
        }
        a
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn set(&mut self, var: Variable, value: bool) {
        self.values[var.slot()] = Some(value);
    }

    pub fn get(&self, var: Variable) -> Option<bool> {
        self.values.get(var.slot()).copied().flatten()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Total word, with unbound variables set to 0.
    pub fn to_word(&self) -> Word {
        Word::from_bits(self.values.iter().map(|v| v.unwrap_or(false)).collect())
    }
}

/// A fixed-length bit string. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    bits: Vec<bool>,
}

impl Word {
    pub fn zeros(len: usize) -> Self {
        Word {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Word { bits }
    }

    /// The `len` low bits of `value`, most significant bit first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Word {
            bits: (0..len).map(|i| value >> (len - 1 - i) & 1 == 1).collect(),
        }
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.bits.len() <= 64);
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Hamming distance. Panics on length mismatch.
    pub fn distance(&self, other: &Word) -> usize {
        assert_eq!(self.len(), other.len(), "words of different lengths");
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn concat(parts: &[&Word]) -> Word {
        Word {
            bits: parts.iter().flat_map(|w| w.bits.iter().copied()).collect(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Precondition(format!("bad bit {c:?} in word"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::from_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_sat;
    use crate::random::random_kcnf;
    use proptest::prelude::*;

    fn f(n: usize, cs: &[&[i32]]) -> Formula {
        Formula::from_dimacs_clauses(n, cs).unwrap()
    }

    #[test]
    fn restrict_removes_satisfied_clause() {
        let g = f(3, &[&[1, 2, 3]]);
        let a = PartialAssignment::from_literals(3, &[Variable::new(1).positive()]);
        assert!(g.restrict(&a).is_empty());
    }

    #[test]
    fn restrict_falsifies_to_bottom() {
        let g = f(2, &[&[1, 2]]);
        let a = PartialAssignment::from_literals(
            2,
            &[Variable::new(1).negative(), Variable::new(2).negative()],
        );
        let r = g.restrict(&a);
        assert_eq!(r.len(), 1);
        assert!(r.clauses()[0].is_bottom());
    }

    #[test]
    fn restrict_keeps_origin() {
        let g = f(3, &[&[1, 2, 3]]);
        let a = PartialAssignment::from_literals(3, &[Variable::new(1).negative()]);
        let r = g.restrict(&a);
        assert_eq!(r.clauses()[0], Clause::from_dimacs(&[2, 3]).unwrap());
        assert_eq!(
            g.clauses()[r.origin(0)],
            Clause::from_dimacs(&[1, 2, 3]).unwrap()
        );
    }

    #[test]
    fn unit_propagation_chains() {
        let g = f(4, &[&[1], &[-1, 2], &[-2, 3, 4]]);
        let r = unit_propagate(&g);
        assert_eq!(r.clauses(), &[Clause::from_dimacs(&[3, 4]).unwrap()]);
    }

    #[test]
    fn unit_propagation_conflict() {
        assert!(unit_propagate(&f(1, &[&[1], &[-1]])).has_bottom());
    }

    #[test]
    fn unit_propagation_fixpoint() {
        let g = f(3, &[&[1, 2, 3]]);
        assert_eq!(unit_propagate(&g), g);
    }

    #[test]
    fn tautology_rejected_and_duplicates_dropped() {
        assert!(Clause::from_dimacs(&[1, -1]).is_err());
        assert_eq!(Clause::from_dimacs(&[1, 1, 2]).unwrap().len(), 2);
    }

    #[test]
    fn word_parse_display() {
        let w: Word = "0110".parse().unwrap();
        assert_eq!(w.to_string(), "0110");
        assert_eq!(w.to_u64(), 6);
        assert_eq!(Word::from_u64(6, 4), w);
    }

    fn arb_word(len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(any::<bool>(), len).prop_map(Word::from_bits)
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric((a, b, c) in (0usize..40).prop_flat_map(|n| (arb_word(n), arb_word(n), arb_word(n)))) {
            prop_assert_eq!(a.distance(&b) == 0, a == b);
            prop_assert_eq!(a.distance(&b), b.distance(&a));
            prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c));
        }

        #[test]
        fn restriction_preserves_satisfiability_direction(seed in any::<u64>(), n in 3usize..=12, bits in any::<u32>()) {
            let g = random_kcnf(3, n, 4 * n, seed).unwrap();
            let mut a = PartialAssignment::new(n);
            for i in 0..n.min(4) {
                a.set(Variable::new(i as u32 + 1), bits >> i & 1 == 1);
            }
            let r = g.restrict(&a);
            if brute_force_sat(&r).unwrap().is_some() {
                prop_assert!(brute_force_sat(&g).unwrap().is_some());
            }
        }

        #[test]
        fn propagation_is_equisatisfiable(seed in any::<u64>(), n in 3usize..=12, m in 1usize..60) {
            let mut g = random_kcnf(3, n, m, seed).unwrap();
            // add a couple of units so propagation has work to do
            let mut cs = g.clauses().to_vec();
            cs.push(Clause::from_dimacs(&[(seed % n as u64) as i32 + 1]).unwrap());
            cs.push(Clause::from_dimacs(&[-(((seed >> 8) % n as u64) as i32 + 1)]).unwrap_or_else(|_| Clause::bottom()));
            g = Formula::new(n, cs).unwrap();
            let before = brute_force_sat(&g).unwrap().is_some();
            let after = brute_force_sat(&unit_propagate(&g)).unwrap().is_some();
            prop_assert_eq!(before, after);
        }
    }
}
