//! Branching for 3-SAT.
//!
//! Every node simplifies its formula (unit propagation, autarks, clause
//! replacement), then branches on a 2-clause chosen from the clauses that
//! became 2-clauses when the parent's branching literal was set. The
//! original forms of the branching clauses form a sequence whose type string
//! determines the branching cost. Once that cost exceeds c^n the search
//! stops and hands the sequence, cut into chains, to local search.

use num::{BigInt, BigRational};

use crate::bounds::c3;
use crate::chain::{classify, transform, zeta, Instance};
use crate::characteristic::f_one;
use crate::error::{Error, Result};
use crate::formula::{propagate, Clause, Formula, Literal, PartialAssignment, Word};
use crate::generator::rule2_holds;
use crate::twosat::solve_2sat;
use crate::types::{ChainKind, ChainVector, Symbol, TypeString};

/// Clauses that become 2-clauses when `l` is set to 1 and propagated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbSet {
    /// (origin, clause) in clause order.
    pub clauses: Vec<(usize, Clause)>,
    /// Propagation produced ⊥; `clauses` is then empty.
    pub conflict: bool,
}

impl TbSet {
    fn is_autark(&self) -> bool {
        !self.conflict && self.clauses.is_empty()
    }
}

/// 2-clauses of UP(F | l = 1) whose clause of the same origin in F has three literals.
pub fn tb_set(f: &Formula, l: Literal) -> TbSet {
    let g = propagate(&f.assign(l)).formula;
    if g.has_bottom() {
        return TbSet {
            clauses: Vec::new(),
            conflict: true,
        };
    }
    let clauses = g
        .clauses()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() == 2)
        .filter_map(|(i, c)| {
            let o = g.origin(i);
            let p = f.position_of_origin(o)?;
            (f.clauses()[p].len() == 3).then(|| (o, c.clone()))
        })
        .collect();
    TbSet {
        clauses,
        conflict: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Step {
    /// Literals fixed: the autark literal then its propagation trail.
    Autark(Vec<Literal>, Formula),
    Replace {
        origin: usize,
        clause: Clause,
    },
}

/// One simplification step on the first 2-clause that admits one.
fn p_step(f: &Formula) -> Option<Step> {
    for c in f.clauses().iter().filter(|c| c.len() == 2) {
        let (l1, l2) = (c.literals()[0], c.literals()[1]);
        let (t1, t2) = (tb_set(f, l1), tb_set(f, l2));
        for (l, t) in [(l1, &t1), (l2, &t2)] {
            if t.is_autark() {
                let p = propagate(&f.assign(l));
                let mut lits = vec![l];
                lits.extend(p.trail);
                return Some(Step::Autark(lits, p.formula));
            }
        }
        for (other, t) in [(l2, &t1), (l1, &t2)] {
            if let Some((origin, clause)) = t.clauses.iter().find(|(_, d)| d.contains(other)) {
                return Some(Step::Replace {
                    origin: *origin,
                    clause: clause.clone(),
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct Simplified {
    pub formula: Formula,
    /// Literals fixed by propagation and autarks, in order.
    pub trail: Vec<Literal>,
    pub autarks: usize,
    pub replacements: usize,
}

/// Unit propagation followed by autark and replacement steps to a fixpoint.
pub fn simplify(f: &Formula) -> Simplified {
    let p = propagate(f);
    let mut out = Simplified {
        formula: p.formula,
        trail: p.trail,
        autarks: 0,
        replacements: 0,
    };
    while !out.formula.has_bottom() {
        match p_step(&out.formula) {
            None => break,
            Some(Step::Autark(lits, g)) => {
                out.trail.extend(lits);
                out.formula = g;
                out.autarks += 1;
            }
            Some(Step::Replace { origin, clause }) => {
                out.formula.replace_origin(origin, clause);
                out.replacements += 1;
            }
        }
    }
    out
}

/// The simplified formula; ⊥ may be present.
pub fn procedure_p(f: &Formula) -> Formula {
    simplify(f).formula
}

/// For every 2-clause (l1 ∨ l2), no clause of TB(F, l1) contains l2 and
/// no clause of TB(F, l2) contains l1.
pub fn is_reduced(f: &Formula) -> bool {
    f.clauses().iter().filter(|c| c.len() == 2).all(|c| {
        let (l1, l2) = (c.literals()[0], c.literals()[1]);
        tb_set(f, l1).clauses.iter().all(|(_, d)| !d.contains(l2))
            && tb_set(f, l2).clauses.iter().all(|(_, d)| !d.contains(l1))
    })
}

/// Where the next branching clause comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds {
    /// Formula of the parent node.
    pub source: Formula,
    /// Parent literals set to 1, in clause order.
    pub literals: Vec<Literal>,
    /// Original form of the parent's branching clause.
    pub previous: Option<Clause>,
    /// Overlap symbols the next clause may have with `previous`.
    pub allowed: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseChoice {
    Branch {
        origin: usize,
        clause: Clause,
        symbol: Option<Symbol>,
    },
    NeedFreshLiteral,
}

/// First clause of TB(source, seed), over seeds in order, that is still the
/// same 2-clause in `f` and overlaps the previous clause in an allowed way.
pub fn rule_upsilon(f: &Formula, original: &Formula, seeds: Option<&Seeds>) -> ClauseChoice {
    let Some(s) = seeds else {
        return ClauseChoice::NeedFreshLiteral;
    };
    for &l in &s.literals {
        for (origin, clause) in tb_set(&s.source, l).clauses {
            match f.position_of_origin(origin) {
                Some(p) if f.clauses()[p] == clause => {}
                _ => continue,
            }
            let symbol = match &s.previous {
                None => None,
                Some(prev) => match classify(prev, &original.clauses()[origin]) {
                    Ok(sym) if s.allowed.contains(&sym) => Some(sym),
                    _ => continue,
                },
            };
            return ClauseChoice::Branch {
                origin,
                clause,
                symbol,
            };
        }
    }
    ClauseChoice::NeedFreshLiteral
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiConfig {
    /// Target base; infinite disables the condition.
    pub c: f64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { c: c3() }
    }
}

impl PhiConfig {
    pub fn new(c: f64) -> Result<Self> {
        if c.is_nan() || c <= 1.0 {
            return Err(Error::Precondition(format!(
                "target base must exceed 1, got {c}"
            )));
        }
        Ok(PhiConfig { c })
    }

    pub fn disabled() -> Self {
        PhiConfig { c: f64::INFINITY }
    }

    pub fn is_disabled(&self) -> bool {
        self.c.is_infinite()
    }
}

/// Σ ν_i log b_i / log c > n.
pub fn condition_phi(v: &ChainVector, n: usize, cfg: &PhiConfig) -> bool {
    !cfg.is_disabled() && v.log2_weight() / cfg.c.log2() > n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Br3Config {
    pub phi: PhiConfig,
    /// Close a chain early whenever the doubled branch number keeps f ≤ f₁.
    pub rule2: bool,
    pub trace: bool,
    /// Record per-leaf multiplicities and bounds.
    pub instrument: bool,
}

impl Default for Br3Config {
    fn default() -> Self {
        Br3Config {
            phi: PhiConfig::default(),
            rule2: true,
            trace: false,
            instrument: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BrOutcome {
    Solved(Word),
    Unsat,
    Instance(Instance),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Br3Stats {
    pub nodes: u64,
    pub leaves: u64,
    pub branchings: u64,
    pub autarks: u64,
    pub replacements: u64,
    pub fresh_branches: u64,
    pub bundles: u64,
    pub max_depth: usize,
    /// Sequences whose type string contained `tp` or `tt`.
    pub forbidden_substrings: u64,
    /// Chain vector of the sequence handed to local search.
    pub chain_vector: Option<ChainVector>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TraceEvent {
    pub depth: usize,
    pub clause: String,
    pub symbol: Option<char>,
    pub zeta: String,
    /// Σ ν_i log2 b_i of the sequence including this clause.
    pub phi_numerator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafRecord {
    /// Product of the branching factors along the path.
    pub multiplicity: BigInt,
    /// Π b_i^{ν_i} from the path's clause sequence.
    pub bound: BigRational,
    pub zeta: String,
    /// Factor-2 branches taken before any clause entered the sequence.
    pub root_factor: u32,
}

impl LeafRecord {
    pub fn within_bound(&self) -> bool {
        let slack = BigRational::from_integer(BigInt::from(1u64) << self.root_factor);
        BigRational::from_integer(self.multiplicity.clone()) <= &self.bound * slack
    }
}

#[derive(Debug, Clone)]
pub struct Br3Run {
    pub outcome: BrOutcome,
    pub stats: Br3Stats,
    pub trace: Vec<TraceEvent>,
    pub leaves: Vec<LeafRecord>,
}

#[derive(Debug, Clone)]
struct Entry {
    clause: Clause,
    charges: u32,
}

/// Chain kinds of a clause sequence, charges summed per chain.
fn chain_vector(seq: &[Entry]) -> Result<ChainVector> {
    let mut v = ChainVector::new();
    if seq.is_empty() {
        return Ok(v);
    }
    let clauses: Vec<Clause> = seq.iter().map(|e| e.clause.clone()).collect();
    let syms = zeta(&clauses)?.symbols();
    let mut start = 0;
    for (i, s) in syms.iter().enumerate() {
        if *s == Symbol::Star {
            let z = TypeString::from_symbols(syms[start..=i].to_vec()).canonical();
            let charges = seq[start..=i].iter().map(|e| e.charges).sum();
            v.add(ChainKind { zeta: z, charges });
            start = i + 1;
        }
    }
    Ok(v)
}

/// Clauses of the last chain of the sequence.
fn open_chain(seq: &[Entry]) -> Result<&[Entry]> {
    let clauses: Vec<Clause> = seq.iter().map(|e| e.clause.clone()).collect();
    let syms = zeta(&clauses)?.symbols();
    let start = syms[..syms.len() - 1]
        .iter()
        .rposition(|&s| s == Symbol::Star)
        .map_or(0, |i| i + 1);
    Ok(&seq[start..])
}

#[derive(Debug, Clone)]
struct Path {
    assignment: PartialAssignment,
    seq: Vec<Entry>,
    pending: u32,
    multiplicity: BigInt,
    depth: usize,
}

impl Path {
    /// Sets `lits` in order, then propagates; None on a clash or ⊥.
    fn apply(&self, f: &Formula, lits: &[Literal]) -> Option<(Formula, Path)> {
        let mut path = self.clone();
        let mut g = f.clone();
        for &l in lits {
            match path.assignment.get(l.var()) {
                Some(v) if v != l.is_positive() => return None,
                Some(_) => {}
                None => {
                    path.assignment.set(l.var(), l.is_positive());
                    g = g.assign(l);
                }
            }
        }
        let p = propagate(&g);
        if p.formula.has_bottom() {
            return None;
        }
        for l in p.trail {
            path.assignment.set(l.var(), l.is_positive());
        }
        Some((p.formula, path))
    }

    fn charge(&mut self) {
        match self.seq.last_mut() {
            Some(e) => e.charges += 1,
            None => self.pending += 1,
        }
    }
}

enum Next {
    Seeds(Seeds),
    Fresh { charged: bool },
}

enum Found {
    Sat(Word),
    Unsat,
    Stop(Vec<Entry>),
}

struct Search<'a> {
    original: &'a Formula,
    cfg: &'a Br3Config,
    active: usize,
    threshold: f64,
    stats: Br3Stats,
    trace: Vec<TraceEvent>,
    leaves: Vec<LeafRecord>,
}

impl Search<'_> {
    fn leaf(&mut self, path: &Path) -> Result<()> {
        self.stats.leaves += 1;
        if self.cfg.instrument {
            let v = chain_vector(&path.seq)?;
            let clauses: Vec<Clause> = path.seq.iter().map(|e| e.clause.clone()).collect();
            let z = if clauses.is_empty() {
                String::new()
            } else {
                zeta(&clauses)?.to_string()
            };
            self.leaves.push(LeafRecord {
                multiplicity: path.multiplicity.clone(),
                bound: v.product(),
                zeta: z,
                root_factor: path.pending,
            });
        }
        Ok(())
    }

    fn push(&mut self, path: &mut Path, origin: usize) -> Result<()> {
        let clause = self.original.clauses()[origin].clone();
        let charges = std::mem::take(&mut path.pending);
        path.seq.push(Entry { clause, charges });
        let clauses: Vec<Clause> = path.seq.iter().map(|e| e.clause.clone()).collect();
        if zeta(&clauses)?.has_forbidden_substring() {
            self.stats.forbidden_substrings += 1;
        }
        Ok(())
    }

    fn record(&mut self, path: &Path, clause: &Clause, symbol: Option<Symbol>) -> Result<()> {
        self.stats.branchings += 1;
        self.stats.max_depth = self.stats.max_depth.max(path.depth);
        if self.cfg.trace {
            let clauses: Vec<Clause> = path.seq.iter().map(|e| e.clause.clone()).collect();
            self.trace.push(TraceEvent {
                depth: path.depth,
                clause: clause.to_string(),
                symbol: symbol.map(Symbol::as_char),
                zeta: zeta(&clauses)?.to_string(),
                phi_numerator: chain_vector(&path.seq)?.log2_weight(),
            });
        }
        Ok(())
    }

    fn node(&mut self, f: Formula, mut path: Path, next: Next) -> Result<Found> {
        self.stats.nodes += 1;
        let s = simplify(&f);
        self.stats.autarks += s.autarks as u64;
        self.stats.replacements += s.replacements as u64;
        for l in &s.trail {
            path.assignment.set(l.var(), l.is_positive());
        }
        let g = s.formula;
        if g.has_bottom() {
            self.leaf(&path)?;
            return Ok(Found::Unsat);
        }
        if !path.seq.is_empty()
            && condition_phi(&chain_vector(&path.seq)?, self.active, &self.cfg.phi)
        {
            return Ok(Found::Stop(path.seq));
        }
        if g.width() <= 2 {
            self.leaf(&path)?;
            return Ok(match solve_2sat(&g)? {
                Some(w) => Found::Sat(merge(&path.assignment, &w)),
                None => Found::Unsat,
            });
        }
        let choice = match &next {
            Next::Seeds(seeds) => {
                if self.cfg.rule2 && self.rule2_now(&path.seq)? {
                    ClauseChoice::NeedFreshLiteral
                } else {
                    rule_upsilon(&g, self.original, Some(seeds))
                }
            }
            Next::Fresh { .. } => ClauseChoice::NeedFreshLiteral,
        };
        match choice {
            ClauseChoice::Branch {
                origin,
                clause,
                symbol,
            } => self.branch(g, path, origin, clause, symbol),
            ClauseChoice::NeedFreshLiteral => {
                let charged = !matches!(next, Next::Fresh { charged: false });
                self.fresh(g, path, charged)
            }
        }
    }

    fn rule2_now(&self, seq: &[Entry]) -> Result<bool> {
        if seq.is_empty() {
            return Ok(false);
        }
        let open: Vec<Clause> = open_chain(seq)?.iter().map(|e| e.clause.clone()).collect();
        rule2_holds(&zeta(&open)?, self.threshold)
    }

    fn fresh(&mut self, g: Formula, mut path: Path, charged: bool) -> Result<Found> {
        let x = g
            .clauses()
            .iter()
            .find(|c| c.len() == 3)
            .expect("width 3")
            .literals()[0];
        if tb_set(&g, x).is_autark() {
            self.stats.autarks += 1;
            let (h, p) = path.apply(&g, &[x]).expect("autarks do not conflict");
            return self.node(h, p, Next::Fresh { charged });
        }
        let children: Vec<(Literal, Formula, Path)> = [x, -x]
            .into_iter()
            .filter_map(|l| path.apply(&g, &[l]).map(|(h, p)| (l, h, p)))
            .collect();
        if children.is_empty() {
            self.leaf(&path)?;
            return Ok(Found::Unsat);
        }
        self.stats.fresh_branches += 1;
        if charged && children.len() == 2 {
            path.charge();
            path.multiplicity *= 2;
        }
        let previous = path.seq.last().map(|e| e.clause.clone());
        for (l, h, mut p) in children {
            p.seq = path.seq.clone();
            p.pending = path.pending;
            p.multiplicity = path.multiplicity.clone();
            let seeds = Seeds {
                source: g.clone(),
                literals: vec![l],
                previous: previous.clone(),
                allowed: vec![Symbol::Star],
            };
            match self.node(h, p, Next::Seeds(seeds))? {
                Found::Unsat => {}
                found => return Ok(found),
            }
        }
        Ok(Found::Unsat)
    }

    fn branch(
        &mut self,
        g: Formula,
        mut path: Path,
        origin: usize,
        clause: Clause,
        symbol: Option<Symbol>,
    ) -> Result<Found> {
        self.push(&mut path, origin)?;
        path.depth += 1;
        let c0 = self.original.clauses()[origin].clone();
        let (l1, l2) = (clause.literals()[0], clause.literals()[1]);
        let t1 = tb_set(&g, l1);
        let first = match t1.clauses.first() {
            Some(c) => Some(c.clone()),
            None => tb_set(&g, l2).clauses.first().cloned(),
        };
        if let Some((o1, _)) = first {
            if classify(&c0, &self.original.clauses()[o1]) == Ok(Symbol::T) {
                self.record(&path, &c0, symbol)?;
                return self.bundle(g, path, l1, l2, o1);
            }
        }
        self.record(&path, &c0, symbol)?;
        let patterns = [(false, true), (true, false), (true, true)];
        let children: Vec<(Vec<Literal>, Formula, Path)> = patterns
            .iter()
            .filter_map(|&(a, b)| {
                let lits = [if a { l1 } else { -l1 }, if b { l2 } else { -l2 }];
                let seeds = lits
                    .iter()
                    .copied()
                    .filter(|l| *l == l1 || *l == l2)
                    .collect();
                path.apply(&g, &lits).map(|(h, p)| (seeds, h, p))
            })
            .collect();
        if children.is_empty() {
            self.leaf(&path)?;
            return Ok(Found::Unsat);
        }
        let allowed = if children.len() == 3 {
            vec![Symbol::Star, Symbol::N]
        } else {
            vec![Symbol::Star, Symbol::N, Symbol::P]
        };
        let factor = children.len() as u32;
        for (seeds, h, mut p) in children {
            p.multiplicity *= factor;
            let next = Seeds {
                source: g.clone(),
                literals: seeds,
                previous: Some(c0.clone()),
                allowed: allowed.clone(),
            };
            match self.node(h, p, Next::Seeds(next))? {
                Found::Unsat => {}
                found => return Ok(found),
            }
        }
        Ok(Found::Unsat)
    }

    /// The five satisfying patterns of C0 ∧ C1 over (l1, l2, l3), counted as
    /// seven branches: the two with l3 = 0 continue with a fresh literal.
    fn bundle(
        &mut self,
        g: Formula,
        mut path: Path,
        l1: Literal,
        l2: Literal,
        o1: usize,
    ) -> Result<Found> {
        self.stats.bundles += 1;
        self.push(&mut path, o1)?;
        let c1 = self.original.clauses()[o1].clone();
        let l3 = *c1
            .literals()
            .iter()
            .find(|l| l.var() != l1.var() && l.var() != l2.var())
            .expect("three variables");
        path.multiplicity *= 7;
        let patterns = [
            (false, true, false),
            (false, true, true),
            (true, false, false),
            (true, false, true),
            (true, true, true),
        ];
        let mut any = false;
        for (a, b, c) in patterns {
            let pair = [if a { l1 } else { -l1 }, if b { l2 } else { -l2 }];
            let Some((mid, p)) = path.apply(&g, &pair) else {
                continue;
            };
            let lit3 = if c { l3 } else { -l3 };
            let Some((h, p)) = p.apply(&mid, &[lit3]) else {
                continue;
            };
            any = true;
            let next = if c {
                Next::Seeds(Seeds {
                    source: mid,
                    literals: vec![l3],
                    previous: Some(c1.clone()),
                    allowed: vec![Symbol::Star, Symbol::N],
                })
            } else {
                Next::Fresh { charged: false }
            };
            match self.node(h, p, next)? {
                Found::Unsat => {}
                found => return Ok(found),
            }
        }
        if !any {
            self.leaf(&path)?;
        }
        Ok(Found::Unsat)
    }
}

fn merge(assignment: &PartialAssignment, w: &Word) -> Word {
    Word::from_bits(
        (0..w.len())
            .map(|i| {
                assignment
                    .get(crate::formula::Variable::new(i as u32 + 1))
                    .unwrap_or(w.get(i))
            })
            .collect(),
    )
}

/// Depth-first branching on a 3-CNF; stops with an instance once the
/// termination condition holds.
pub fn br_3(f: &Formula, cfg: &Br3Config) -> Result<Br3Run> {
    if f.width() > 3 {
        return Err(Error::Precondition(format!(
            "branching expects a 3-CNF, got width {}",
            f.width()
        )));
    }
    let mut search = Search {
        original: f,
        cfg,
        active: f.occurring_variables().len(),
        threshold: f_one(),
        stats: Br3Stats::default(),
        trace: Vec::new(),
        leaves: Vec::new(),
    };
    let path = Path {
        assignment: PartialAssignment::new(f.num_vars()),
        seq: Vec::new(),
        pending: 0,
        multiplicity: BigInt::from(1),
        depth: 0,
    };
    let found = search.node(f.clone(), path, Next::Fresh { charged: true })?;
    let outcome = match found {
        Found::Sat(w) => {
            if !f.is_satisfied_by(&w) {
                return Err(Error::Instance(format!(
                    "branching produced a non-satisfying assignment {w}"
                )));
            }
            BrOutcome::Solved(w)
        }
        Found::Unsat => BrOutcome::Unsat,
        Found::Stop(seq) => {
            search.stats.chain_vector = Some(chain_vector(&seq)?);
            let clauses: Vec<Clause> = seq.into_iter().map(|e| e.clause).collect();
            BrOutcome::Instance(transform(&clauses)?)
        }
    };
    Ok(Br3Run {
        outcome,
        stats: search.stats,
        trace: search.trace,
        leaves: search.leaves,
    })
}
