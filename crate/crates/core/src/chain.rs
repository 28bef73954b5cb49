//! Chains, instances and their solution spaces.

use crate::error::{Error, Result};
use crate::formula::{Clause, Literal, Variable, Word};
use crate::types::{Symbol, TypeString};

/// Largest chain (in variables) whose solution space is enumerated.
pub const MAX_CHAIN_VARS: usize = 24;

/// A sequence of k-clauses where clause i and clause j share a variable
/// exactly when they are neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    clauses: Vec<Clause>,
    k: usize,
}

impl Chain {
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<Variable> {
        first_occurrence_order(&self.clauses)
    }

    pub fn zeta(&self) -> Result<TypeString> {
        zeta(&self.clauses)
    }

    /// The same chain with every variable's polarity flipped so that its
    /// first occurrence is positive.
    pub fn normalized(&self) -> Chain {
        let mut first: Vec<(Variable, bool)> = Vec::new();
        for c in &self.clauses {
            for l in c.literals() {
                if !first.iter().any(|(v, _)| *v == l.var()) {
                    first.push((l.var(), l.is_positive()));
                }
            }
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let lits = c.literals().iter().map(|&l| {
                    let pos = first.iter().find(|(v, _)| *v == l.var()).unwrap().1;
                    if pos {
                        l
                    } else {
                        -l
                    }
                });
                Clause::new(lits).expect("normalization keeps clauses valid")
            })
            .collect();
        Chain { clauses, k: self.k }
    }
}

fn first_occurrence_order(clauses: &[Clause]) -> Vec<Variable> {
    let mut out: Vec<Variable> = Vec::new();
    for c in clauses {
        for v in c.variables() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

fn shares_variable(a: &Clause, b: &Clause) -> bool {
    a.variables().any(|v| b.mentions(v))
}

/// Validates the chain overlap pattern.
pub fn build_chain(clauses: Vec<Clause>, k: usize) -> Result<Chain> {
    if clauses.is_empty() {
        return Err(Error::Chain {
            i: 0,
            j: 0,
            reason: "empty chain".into(),
        });
    }
    for (i, c) in clauses.iter().enumerate() {
        if c.len() != k {
            return Err(Error::Chain {
                i,
                j: i,
                reason: format!("clause has {} literals, expected {k}", c.len()),
            });
        }
    }
    for i in 0..clauses.len() {
        for j in i + 1..clauses.len() {
            let overlap = shares_variable(&clauses[i], &clauses[j]);
            if j == i + 1 && !overlap {
                return Err(Error::Chain {
                    i,
                    j,
                    reason: "adjacent clauses are independent".into(),
                });
            }
            if j > i + 1 && overlap {
                return Err(Error::Chain {
                    i,
                    j,
                    reason: "non-adjacent clauses share a variable".into(),
                });
            }
        }
    }
    Ok(Chain { clauses, k })
}

/// Variable-disjoint chains.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    chains: Vec<Chain>,
}

impl Instance {
    pub fn new(chains: Vec<Chain>) -> Result<Self> {
        let mut seen: Vec<Variable> = Vec::new();
        for (i, ch) in chains.iter().enumerate() {
            let vars = ch.variables();
            if let Some(v) = vars.iter().find(|v| seen.contains(v)) {
                return Err(Error::Instance(format!("chain {i} reuses {v}")));
            }
            seen.extend(vars);
        }
        Ok(Instance { chains })
    }

    pub fn empty() -> Self {
        Instance::default()
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn variables(&self) -> Vec<Variable> {
        self.chains.iter().flat_map(Chain::variables).collect()
    }
}

/// Satisfying words of a chain, bit i giving the value of `vars[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionSpace {
    vars: Vec<Variable>,
    words: Vec<Word>,
}

impl SolutionSpace {
    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    /// Sorted lexicographically.
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn width(&self) -> usize {
        self.vars.len()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.binary_search(w).is_ok()
    }

    /// A space given directly by its words, over anonymous coordinates.
    pub fn from_words(width: usize, mut words: Vec<Word>) -> Result<Self> {
        if words.iter().any(|w| w.len() != width) {
            return Err(Error::Precondition(
                "word length differs from space width".into(),
            ));
        }
        words.sort();
        words.dedup();
        let vars = (1..=width as u32).map(Variable::new).collect();
        Ok(SolutionSpace { vars, words })
    }
}

pub fn solution_space(chain: &Chain) -> Result<SolutionSpace> {
    let vars = chain.variables();
    let w = vars.len();
    if w > MAX_CHAIN_VARS {
        return Err(Error::Guard {
            what: "chain variables",
            actual: w as u128,
            limit: MAX_CHAIN_VARS as u128,
        });
    }
    let masks: Vec<(u32, u32)> = chain
        .clauses
        .iter()
        .map(|c| {
            c.literals().iter().fold((0, 0), |(pos, neg), l| {
                let i = vars.iter().position(|&v| v == l.var()).unwrap();
                let bit = 1u32 << (w - 1 - i);
                if l.is_positive() {
                    (pos | bit, neg)
                } else {
                    (pos, neg | bit)
                }
            })
        })
        .collect();
    let words = (0..1u32 << w)
        .filter(|&m| {
            masks
                .iter()
                .all(|&(pos, neg)| m & pos != 0 || !m & neg != 0)
        })
        .map(|m| Word::from_u64(m as u64, w))
        .collect();
    Ok(SolutionSpace { vars, words })
}

/// Overlap symbol of two consecutive clauses.
pub fn classify(a: &Clause, b: &Clause) -> std::result::Result<Symbol, String> {
    let shared: Vec<(bool, bool)> = a
        .literals()
        .iter()
        .filter_map(|l| b.polarity_of(l.var()).map(|pb| (l.is_positive(), pb)))
        .collect();
    match shared.as_slice() {
        [] => Ok(Symbol::Star),
        [(x, y)] if x != y => Ok(Symbol::N),
        [(_, _)] => Ok(Symbol::P),
        [(x1, y1), (x2, y2)] if x1 != y1 && x2 != y2 => Ok(Symbol::T),
        s => Err(format!(
            "{} shared variables, {} with equal polarity",
            s.len(),
            s.iter().filter(|(x, y)| x == y).count()
        )),
    }
}

/// Type string of a clause sequence: one overlap symbol per adjacent pair,
/// then a closing `*`.
pub fn zeta(clauses: &[Clause]) -> Result<TypeString> {
    if clauses.is_empty() {
        return Err(Error::Precondition(
            "type string of an empty clause sequence".into(),
        ));
    }
    let mut syms = Vec::with_capacity(clauses.len());
    for i in 0..clauses.len() - 1 {
        let s = classify(&clauses[i], &clauses[i + 1]).map_err(|reason| Error::Classification {
            i,
            j: i + 1,
            reason,
        })?;
        syms.push(s);
    }
    syms.push(Symbol::Star);
    Ok(TypeString::from_symbols(syms))
}

/// Splits a clause sequence after every `*` into chains.
pub fn transform(clauses: &[Clause]) -> Result<Instance> {
    if clauses.is_empty() {
        return Ok(Instance::empty());
    }
    let z = zeta(clauses)?;
    let mut chains = Vec::new();
    let mut start = 0;
    for (i, s) in z.symbols().iter().enumerate() {
        if *s == Symbol::Star {
            let piece = clauses[start..=i].to_vec();
            let k = piece[0].len();
            chains.push(build_chain(piece, k).map_err(|e| Error::Instance(e.to_string()))?);
            start = i + 1;
        }
    }
    Instance::new(chains)
}

/// The literal where `var` appears in `clause`.
pub(crate) fn literal_of(clause: &Clause, var: Variable) -> Option<Literal> {
    clause.literals().iter().copied().find(|l| l.var() == var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(codes: &[i32]) -> Clause {
        Clause::from_dimacs(codes).unwrap()
    }

    #[test]
    fn build_chain_cases() {
        assert!(build_chain(vec![c(&[1, 2, 3])], 3).is_ok());
        assert!(build_chain(vec![c(&[1, 2, 3]), c(&[-3, 4, 5])], 3).is_ok());
        let e = build_chain(vec![c(&[1, 2, 3]), c(&[4, 5, 6])], 3).unwrap_err();
        assert_eq!(
            e,
            Error::Chain {
                i: 0,
                j: 1,
                reason: "adjacent clauses are independent".into()
            }
        );
        let e = build_chain(vec![c(&[1, 2, 3]), c(&[-3, 4, 5]), c(&[-5, 6, 1])], 3).unwrap_err();
        assert!(matches!(e, Error::Chain { i: 0, j: 2, .. }));
        assert!(build_chain(vec![c(&[1, 2])], 3).is_err());
    }

    // Every ordered list of up to three distinct clauses from a small pool
    // is accepted exactly when the definition holds.
    #[test]
    fn build_chain_exhaustive_small() {
        let pool = [
            c(&[1, 2, 3]),
            c(&[-3, 4, 5]),
            c(&[5, 6, 7]),
            c(&[-1, -2, 8]),
            c(&[4, 6, 8]),
            c(&[9, 10, 11]),
        ];
        let p = pool.len();
        let mut lists: Vec<Vec<usize>> = Vec::new();
        for a in 0..p {
            lists.push(vec![a]);
            for b in (0..p).filter(|&b| b != a) {
                lists.push(vec![a, b]);
                for d in (0..p).filter(|&d| d != a && d != b) {
                    lists.push(vec![a, b, d]);
                }
            }
        }
        for l in lists {
            let cl: Vec<Clause> = l.iter().map(|&i| pool[i].clone()).collect();
            let mut ok = true;
            for i in 0..cl.len() {
                for j in i + 1..cl.len() {
                    ok &= shares_variable(&cl[i], &cl[j]) == (j == i + 1);
                }
            }
            assert_eq!(build_chain(cl, 3).is_ok(), ok, "{l:?}");
        }
    }

    #[test]
    fn solution_space_sizes() {
        let one = build_chain(vec![c(&[1, 2, 3])], 3).unwrap();
        let a = solution_space(&one).unwrap();
        assert_eq!(a.len(), 7);
        assert!(!a.contains(&"000".parse().unwrap()));
        let neg = build_chain(vec![c(&[1, 2, 3]), c(&[-2, 4, 5])], 3).unwrap();
        assert_eq!(solution_space(&neg).unwrap().len(), 24);
        let two = build_chain(vec![c(&[1, 2, 3]), c(&[-2, -3, 4])], 3).unwrap();
        // both falsifying sets have two words and they are disjoint
        assert_eq!(solution_space(&two).unwrap().len(), 12);
    }

    #[test]
    fn solution_space_size_invariant_under_polarity_flip() {
        let base = vec![c(&[1, 2, 3]), c(&[-3, 4, 5]), c(&[-5, -4, 6])];
        let size = solution_space(&build_chain(base.clone(), 3).unwrap())
            .unwrap()
            .len();
        for v in 1..=6 {
            let flipped: Vec<Clause> = base
                .iter()
                .map(|cl| {
                    Clause::new(
                        cl.literals()
                            .iter()
                            .map(|&l| if l.var().index() == v { -l } else { l }),
                    )
                    .unwrap()
                })
                .collect();
            assert_eq!(
                solution_space(&build_chain(flipped, 3).unwrap())
                    .unwrap()
                    .len(),
                size
            );
        }
    }

    #[test]
    fn zeta_cases() {
        let z = zeta(&[c(&[1, 2, 3]), c(&[-3, 4, 5]), c(&[6, 7, 8])]).unwrap();
        assert_eq!(z.as_str(), "n**");
        assert_eq!(
            zeta(&[c(&[1, 2, 3]), c(&[3, 4, 5])]).unwrap().as_str(),
            "p*"
        );
        assert_eq!(
            zeta(&[c(&[1, 2, 3]), c(&[-2, -3, 4])]).unwrap().as_str(),
            "t*"
        );
        assert!(matches!(
            zeta(&[c(&[1, 2, 3]), c(&[2, 3, 4])]),
            Err(Error::Classification { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn transform_partitions() {
        let seq = [c(&[1, 2, 3]), c(&[-3, 4, 5]), c(&[6, 7, 8])];
        let inst = transform(&seq).unwrap();
        assert_eq!(
            inst.chains().iter().map(Chain::len).collect::<Vec<_>>(),
            vec![2, 1]
        );
        assert_eq!(transform(&seq[2..]).unwrap().len(), 1);
        let seq = [
            c(&[1, 2, 3]),
            c(&[-2, -3, 4]),
            c(&[-4, 5, 6]),
            c(&[7, 8, 9]),
        ];
        assert_eq!(zeta(&seq).unwrap().as_str(), "tn**");
        let inst = transform(&seq).unwrap();
        assert_eq!(
            inst.chains().iter().map(Chain::len).collect::<Vec<_>>(),
            vec![3, 1]
        );
    }

    #[test]
    fn transform_rejects_shared_variables_across_chains() {
        let seq = [c(&[1, 2, 3]), c(&[4, 5, 6]), c(&[-1, 7, 8])];
        assert!(matches!(transform(&seq), Err(Error::Instance(_))));
    }
}
