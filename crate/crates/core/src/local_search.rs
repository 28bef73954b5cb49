//! Derandomized local search: cover the Hamming space of a formula and an
//! instance, then search every ball of the family.

use std::collections::BTreeMap;

use num::BigRational;

use crate::chain::{literal_of, solution_space, Instance, SolutionSpace};
use crate::characteristic::characteristic_value;
use crate::covering::{build_generalized_code, Coordinate, Factor, StructuredSpace, POWER_BLOCK};
use crate::error::{Error, Result};
use crate::formula::{Formula, Variable, Word};

struct ClauseIndex {
    clauses: Vec<Vec<(usize, bool)>>,
    occurs: Vec<Vec<usize>>,
}

impl ClauseIndex {
    fn new(f: &Formula) -> Self {
        let mut occurs = vec![Vec::new(); f.num_vars()];
        let clauses = f
            .clauses()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.literals()
                    .iter()
                    .map(|l| {
                        occurs[l.var().slot()].push(i);
                        (l.var().slot(), l.is_positive())
                    })
                    .collect()
            })
            .collect();
        ClauseIndex { clauses, occurs }
    }
}

struct Ball<'a> {
    index: &'a ClauseIndex,
    values: Vec<bool>,
    true_count: Vec<usize>,
    frozen: Vec<bool>,
}

impl Ball<'_> {
    fn flip(&mut self, v: usize) {
        self.values[v] = !self.values[v];
        for &c in &self.index.occurs[v] {
            let pos = self.index.clauses[c]
                .iter()
                .find(|(s, _)| *s == v)
                .unwrap()
                .1;
            if pos == self.values[v] {
                self.true_count[c] += 1;
            } else {
                self.true_count[c] -= 1;
            }
        }
    }

    fn search(&mut self, r: usize) -> bool {
        let Some(c) = self.true_count.iter().position(|&t| t == 0) else {
            return true;
        };
        if r == 0 {
            return false;
        }
        // a variable already moved toward a solution never needs moving back
        for i in 0..self.index.clauses[c].len() {
            let v = self.index.clauses[c][i].0;
            if self.frozen[v] {
                continue;
            }
            self.frozen[v] = true;
            self.flip(v);
            if self.search(r - 1) {
                return true;
            }
            self.flip(v);
            self.frozen[v] = false;
        }
        false
    }
}

/// A satisfying assignment within distance `r` of `alpha`, if one exists.
///
/// Branches on the literals of the first unsatisfied clause, in clause order.
pub fn searchball(f: &Formula, alpha: &Word, r: usize) -> Option<Word> {
    if f.has_bottom() {
        return None;
    }
    let index = ClauseIndex::new(f);
    ball_search(&index, f.num_vars(), alpha, r)
}

fn ball_search(index: &ClauseIndex, n: usize, alpha: &Word, r: usize) -> Option<Word> {
    assert_eq!(alpha.len(), n, "center length differs from variable count");
    let values = alpha.bits().to_vec();
    let true_count = index
        .clauses
        .iter()
        .map(|c| c.iter().filter(|&&(v, p)| values[v] == p).count())
        .collect();
    let mut ball = Ball {
        index,
        values,
        true_count,
        frozen: vec![false; n],
    };
    ball.search(r).then(|| Word::from_bits(ball.values))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DlsStats {
    pub space: String,
    pub balls_searched: u64,
    /// (radius, centers) per nonempty radius of the family.
    pub code_sizes: Vec<(usize, usize)>,
}

/// The Hamming space of `f` and `inst` with the λ of each power factor.
///
/// Chains are grouped by their polarity-normalized solution space; each
/// group becomes power factors of at most [`POWER_BLOCK`] words. Variables
/// of `f` outside the instance form the cube factor.
pub fn hamming_space(f: &Formula, inst: &Instance) -> Result<(StructuredSpace, Vec<BigRational>)> {
    for ch in inst.chains() {
        for c in ch.clauses() {
            if !f.clauses().contains(c) {
                return Err(Error::Precondition(format!(
                    "instance clause {c:?} is not a clause of the formula"
                )));
            }
        }
    }
    let in_instance = inst.variables();
    let cube: Vec<Variable> = f
        .occurring_variables()
        .into_iter()
        .filter(|v| !in_instance.contains(v))
        .collect();

    // group key: normalized space; members: (variable, negated) per coordinate
    let mut groups: BTreeMap<Vec<Word>, (SolutionSpace, usize, Vec<Vec<(Variable, bool)>>)> =
        BTreeMap::new();
    for ch in inst.chains() {
        let space = solution_space(&ch.normalized())?;
        let coords = ch
            .variables()
            .into_iter()
            .map(|v| {
                let first = ch
                    .clauses()
                    .iter()
                    .find_map(|c| literal_of(c, v))
                    .expect("chain variable occurs");
                (v, !first.is_positive())
            })
            .collect();
        let entry = groups
            .entry(space.words().to_vec())
            .or_insert_with(|| (space, ch.k(), Vec::new()));
        entry.2.push(coords);
    }

    let mut factors = vec![Factor::Cube(cube.len())];
    let mut coordinates: Vec<Coordinate> = cube
        .iter()
        .map(|&v| Coordinate {
            factor: 0,
            variable: Some(v),
            negated: false,
        })
        .collect();
    let mut lambdas = Vec::new();
    for (space, k, members) in groups.into_values() {
        let lambda = characteristic_value(&space, k)?;
        let mut per = 1;
        while (space.len() as u128).pow(per as u32 + 1) <= POWER_BLOCK as u128 {
            per += 1;
        }
        for block in members.chunks(per) {
            let fi = factors.len();
            factors.push(Factor::Power {
                space: space.clone(),
                nu: block.len(),
            });
            for chain in block {
                coordinates.extend(chain.iter().map(|&(v, neg)| Coordinate {
                    factor: fi,
                    variable: Some(v),
                    negated: neg,
                }));
            }
            lambdas.push(lambda.clone());
        }
    }
    Ok((
        StructuredSpace::with_coordinates(factors, coordinates)?,
        lambdas,
    ))
}

fn assignment_of(space: &StructuredSpace, center: &Word, n: usize) -> Word {
    let mut w = Word::zeros(n);
    for (coord, &bit) in space.coordinates().iter().zip(center.bits()) {
        if let Some(v) = coord.variable {
            w.set(v.slot(), bit != coord.negated);
        }
    }
    w
}

/// Covering-code search over H(F, ℐ) with ρ = 1/k.
pub fn dls(f: &Formula, inst: &Instance) -> Result<(Option<Word>, DlsStats)> {
    if f.has_bottom() {
        return Ok((None, DlsStats::default()));
    }
    let k = f.width().max(3);
    let (space, lambdas) = hamming_space(f, inst)?;
    let family = build_generalized_code(&space, (1, k as u64), &lambdas, k)?;
    let index = ClauseIndex::new(f);
    let mut stats = DlsStats {
        space: space.describe(),
        balls_searched: 0,
        code_sizes: family.sizes(),
    };
    for (r, center) in family.iter() {
        stats.balls_searched += 1;
        let alpha = assignment_of(&space, center, f.num_vars());
        if let Some(w) = ball_search(&index, f.num_vars(), &alpha, r) {
            return Ok((Some(w), stats));
        }
    }
    Ok((None, stats))
}
