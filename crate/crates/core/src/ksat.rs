//! The combined solver: branching until the instance is large enough, then
//! local search. Width 3 uses the chain branching of [`crate::threesat`];
//! wider formulas branch on a maximal set of disjoint clauses and recurse
//! one width down.

use serde::Serialize;

use crate::bounds::{ck_table, nu_for};
use crate::chain::{build_chain, Instance};
use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, Literal, Variable, Word};
use crate::local_search::dls;
use crate::threesat::{br_3, Br3Config, BrOutcome, PhiConfig, TraceEvent};
use crate::twosat::solve_2sat;
use crate::types::ChainVector;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KSatConfig {
    /// Termination condition for width-3 branching.
    pub phi: PhiConfig,
    /// Replaces the computed threshold fraction for every width ≥ 4.
    pub nu_override: Option<f64>,
    pub trace: bool,
}

impl KSatConfig {
    /// Branching-only configuration: never hands off to local search.
    pub fn branching_only() -> Self {
        KSatConfig {
            phi: PhiConfig::disabled(),
            nu_override: Some(f64::INFINITY),
            trace: false,
        }
    }

    /// Threshold fraction ν for width k, from the base of width k − 1.
    pub fn nu(&self, k: usize) -> f64 {
        if let Some(nu) = self.nu_override {
            return nu;
        }
        let prev = ck_table(k - 1).last().expect("k >= 4").ck;
        nu_for(k, prev)
    }
}

/// Scans the k-clauses in order, keeping each one that shares no variable
/// with those already kept.
pub fn greedy_maximal_1chains(f: &Formula) -> Instance {
    let k = f.width();
    let mut used = vec![false; f.num_vars()];
    let mut chains = Vec::new();
    for c in f.clauses().iter().filter(|c| c.len() == k && k > 0) {
        if c.variables().all(|v| !used[v.slot()]) {
            for v in c.variables() {
                used[v.slot()] = true;
            }
            chains.push(build_chain(vec![c.clone()], k).expect("a single clause is a chain"));
        }
    }
    Instance::new(chains).expect("chains are disjoint by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolvePath {
    #[serde(rename = "BR-solved")]
    BrSolved,
    #[serde(rename = "DLS")]
    Dls,
    #[serde(rename = "2SAT")]
    TwoSat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ChainCount {
    pub zeta: String,
    pub charges: u32,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub leaves: u64,
    pub branchings: u64,
    /// Clause patterns tried by wide-clause branching.
    pub patterns: u64,
    pub balls_searched: u64,
    /// (radius, centers) of the last covering family searched.
    pub code_sizes: Vec<(usize, usize)>,
    pub space: Option<String>,
    /// Chains handed to the last local search.
    pub chain_vector: Vec<ChainCount>,
}

impl SolveStats {
    fn set_chains(&mut self, v: &ChainVector) {
        self.chain_vector = v
            .counts
            .iter()
            .map(|(k, &count)| ChainCount {
                zeta: k.zeta.to_string(),
                charges: k.charges,
                count,
            })
            .collect();
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub assignment: Option<Word>,
    pub path: SolvePath,
    pub stats: SolveStats,
    pub trace: Vec<TraceEvent>,
}

impl Solution {
    pub fn is_sat(&self) -> bool {
        self.assignment.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BrKOutcome {
    Solved(Word),
    Unsat,
    Instance(Instance),
}

fn pattern_literals(clauses: &[&Clause], mut index: usize, k: usize) -> Vec<Literal> {
    // last clause varies fastest; within a clause the first literal is the high bit
    let radix = (1usize << k) - 1;
    let mut out = vec![Literal::new(Variable::new(1), true); clauses.len() * k];
    for (ci, c) in clauses.iter().enumerate().rev() {
        let bits = index % radix + 1;
        index /= radix;
        for (j, &l) in c.literals().iter().enumerate() {
            let truth = bits >> (k - 1 - j) & 1 == 1;
            out[ci * k + j] = if truth { l } else { -l };
        }
    }
    out
}

/// Branches over all satisfying patterns of a maximal disjoint clause set
/// when it is small, recursing one width down; otherwise returns the set.
pub fn br_k(f: &Formula, cfg: &KSatConfig, stats: &mut SolveStats) -> Result<BrKOutcome> {
    let k = f.width();
    if k < 4 {
        return Err(Error::Precondition(format!(
            "wide-clause branching needs width >= 4, got {k}"
        )));
    }
    let inst = greedy_maximal_1chains(f);
    let n = f.occurring_variables().len();
    if inst.len() as f64 >= cfg.nu(k) * n as f64 {
        return Ok(BrKOutcome::Instance(inst));
    }
    stats.branchings += 1;
    let clauses: Vec<&Clause> = inst.chains().iter().map(|ch| &ch.clauses()[0]).collect();
    let total = ((1usize << k) - 1)
        .checked_pow(clauses.len() as u32)
        .ok_or(Error::Guard {
            what: "branching patterns",
            actual: u128::MAX,
            limit: usize::MAX as u128,
        })?;
    for index in 0..total {
        stats.patterns += 1;
        let lits = pattern_literals(&clauses, index, k);
        let g = lits.iter().fold(f.clone(), |g, &l| g.assign(l));
        debug_assert!(g.width() < k, "maximality leaves no k-clause");
        if let Some(w) = solve_inner(&g, cfg, stats, &mut Vec::new())?.0 {
            let mut w = w;
            for l in lits {
                w.set(l.var().slot(), l.is_positive());
            }
            return Ok(BrKOutcome::Solved(w));
        }
    }
    Ok(BrKOutcome::Unsat)
}

fn solve_inner(
    f: &Formula,
    cfg: &KSatConfig,
    stats: &mut SolveStats,
    trace: &mut Vec<TraceEvent>,
) -> Result<(Option<Word>, SolvePath)> {
    if f.has_bottom() {
        return Ok((None, SolvePath::BrSolved));
    }
    let k = f.width();
    if k <= 2 {
        return Ok((solve_2sat(f)?, SolvePath::TwoSat));
    }
    let inst = if k == 3 {
        let br = Br3Config {
            phi: cfg.phi,
            trace: cfg.trace,
            ..Br3Config::default()
        };
        let run = br_3(f, &br)?;
        stats.nodes += run.stats.nodes;
        stats.leaves += run.stats.leaves;
        stats.branchings += run.stats.branchings;
        trace.extend(run.trace);
        match run.outcome {
            BrOutcome::Solved(w) => return Ok((Some(w), SolvePath::BrSolved)),
            BrOutcome::Unsat => return Ok((None, SolvePath::BrSolved)),
            BrOutcome::Instance(inst) => {
                if let Some(v) = &run.stats.chain_vector {
                    stats.set_chains(v);
                }
                inst
            }
        }
    } else {
        match br_k(f, cfg, stats)? {
            BrKOutcome::Solved(w) => return Ok((Some(w), SolvePath::BrSolved)),
            BrKOutcome::Unsat => return Ok((None, SolvePath::BrSolved)),
            BrKOutcome::Instance(inst) => {
                let mut v = ChainVector::new();
                for ch in inst.chains() {
                    v.add(crate::types::ChainKind {
                        zeta: ch.zeta()?,
                        charges: 0,
                    });
                }
                stats.set_chains(&v);
                inst
            }
        }
    };
    let (w, d) = dls(f, &inst)?;
    stats.balls_searched += d.balls_searched;
    stats.code_sizes = d.code_sizes;
    stats.space = Some(d.space);
    Ok((w, SolvePath::Dls))
}

/// Solves `f` with the default configuration.
pub fn solve_ksat(f: &Formula) -> Result<Solution> {
    solve_ksat_with(f, &KSatConfig::default())
}

pub fn solve_ksat_with(f: &Formula, cfg: &KSatConfig) -> Result<Solution> {
    let mut stats = SolveStats::default();
    let mut trace = Vec::new();
    let (assignment, path) = solve_inner(f, cfg, &mut stats, &mut trace)?;
    if let Some(w) = &assignment {
        if !f.is_satisfied_by(w) {
            return Err(Error::Instance(format!(
                "solver returned a non-satisfying assignment {w}"
            )));
        }
    }
    Ok(Solution {
        assignment,
        path,
        stats,
        trace,
    })
}
