//! Characteristic value λ and distribution π of a solution space, and the
//! 38-row chain type table.
//!
//! For a solution space A the distribution π satisfies, for every a* ∈ A,
//! Σ_a π(a)·(k−1)^{−d(a,a*)} = λ with Σ π = 1. Writing y = π/λ and scaling
//! by (k−1)^η turns this into an integer system, solved exactly by
//! [`crate::linsolve`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num::{BigInt, BigRational, One, Signed, ToPrimitive};

use crate::chain::{build_chain, solution_space, SolutionSpace};
use crate::error::{Error, Result};
use crate::formula::Word;
use crate::linsolve::solve_integer_system;
use crate::types::{branch_number, TypeString};

/// Largest solution space handed to the exact solver.
pub const MAX_SPACE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Characteristic {
    pub lambda: BigRational,
    pub pi: BTreeMap<Word, BigRational>,
}

impl Characteristic {
    /// Exact check of Σπ = 1, π ≥ 0, 0 < λ < 1 and the λ-constraint at every a*.
    pub fn verify(&self, k: usize) -> bool {
        let one = BigRational::one();
        let total: BigRational = self.pi.values().sum();
        if total != one || self.pi.values().any(|p| p.is_negative()) {
            return false;
        }
        if !(self.lambda.is_positive() && self.lambda < one) {
            return false;
        }
        let base = BigRational::from_integer(BigInt::from(k as u64 - 1));
        self.pi.keys().all(|star| {
            let s: BigRational = self
                .pi
                .iter()
                .map(|(a, p)| p / num::pow(base.clone(), a.distance(star)))
                .sum();
            s == self.lambda
        })
    }
}

fn words_as_u64(a: &SolutionSpace) -> Vec<u64> {
    a.words().iter().map(Word::to_u64).collect()
}

pub fn solve_characteristic(a: &SolutionSpace, k: usize) -> Result<Characteristic> {
    if k < 3 {
        return Err(Error::Precondition(format!(
            "characteristic needs k >= 3, got {k}"
        )));
    }
    if a.len() > MAX_SPACE {
        return Err(Error::Guard {
            what: "solution space size",
            actual: a.len() as u128,
            limit: MAX_SPACE as u128,
        });
    }
    if a.is_empty() {
        return Err(Error::Precondition("empty solution space".into()));
    }
    let eta = a.width() as u32;
    let base = (k - 1) as i64;
    let powers: Vec<i64> = (0..=eta)
        .map(|e| {
            base.checked_pow(e).ok_or(Error::Guard {
                what: "(k-1)^eta",
                actual: u128::MAX,
                limit: i64::MAX as u128,
            })
        })
        .collect::<Result<_>>()?;
    let words = words_as_u64(a);
    let n = words.len();
    let mut m = vec![0i64; n * n];
    for (i, &u) in words.iter().enumerate() {
        for (j, &v) in words.iter().enumerate() {
            m[i * n + j] = powers[(eta - (u ^ v).count_ones()) as usize];
        }
    }
    let rhs = vec![powers[eta as usize]; n];
    let sol = solve_integer_system(&m, &rhs)?;
    let sum: BigInt = sol.numerators.iter().sum();
    if !sum.is_positive() {
        return Err(Error::Infeasible(format!("Σy = {sum}/{}", sol.denominator)));
    }
    let lambda = BigRational::new(sol.denominator.clone(), sum.clone());
    let pi: BTreeMap<Word, BigRational> = a
        .words()
        .iter()
        .zip(&sol.numerators)
        .map(|(w, y)| (w.clone(), BigRational::new(y.clone(), sum.clone())))
        .collect();
    if let Some((w, p)) = pi.iter().find(|(_, p)| p.is_negative()) {
        return Err(Error::Infeasible(format!("π({w}) = {p}")));
    }
    if !(lambda < BigRational::one()) {
        return Err(Error::Infeasible(format!("λ = {lambda} is not below 1")));
    }
    Ok(Characteristic { lambda, pi })
}

/// λ = k^k / ((2k−2)^k − (k−2)^k) and
/// π(a) = (k−1)^k / ((2k−2)^k − (k−2)^k) · (1 − (−1/(k−1))^{d(a,0^k)}).
pub fn closed_form_1chain(k: usize) -> Characteristic {
    assert!(k >= 3, "closed form needs k >= 3");
    let kk = BigInt::from(k as u64);
    let denom =
        num::pow(BigInt::from(2 * k as u64 - 2), k) - num::pow(BigInt::from(k as u64 - 2), k);
    let lambda = BigRational::new(num::pow(kk, k), denom.clone());
    let scale = BigRational::new(num::pow(BigInt::from(k as u64 - 1), k), denom);
    let ratio = BigRational::new(BigInt::from(-1), BigInt::from(k as u64 - 1));
    let pi = (1u64..1 << k)
        .map(|m| {
            let w = Word::from_u64(m, k);
            let d = w.weight();
            (
                w,
                &scale * (BigRational::one() - num::pow(ratio.clone(), d)),
            )
        })
        .collect();
    Characteristic { lambda, pi }
}

fn space_cache() -> &'static Mutex<HashMap<(usize, usize, Vec<u64>), BigRational>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, Vec<u64>), BigRational>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// λ of a solution space, memoized on its word set.
pub fn characteristic_value(a: &SolutionSpace, k: usize) -> Result<BigRational> {
    let key = (k, a.width(), words_as_u64(a));
    if let Some(l) = space_cache().lock().unwrap().get(&key) {
        return Ok(l.clone());
    }
    let l = solve_characteristic(a, k)?.lambda;
    space_cache().lock().unwrap().insert(key, l.clone());
    Ok(l)
}

fn type_cache() -> &'static Mutex<HashMap<TypeString, BigRational>> {
    static CACHE: OnceLock<Mutex<HashMap<TypeString, BigRational>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// λ of the 3-clause chain type ζ, memoized by canonical form.
pub fn type_lambda(zeta: &TypeString) -> Result<BigRational> {
    let key = zeta.canonical();
    if let Some(l) = type_cache().lock().unwrap().get(&key) {
        return Ok(l.clone());
    }
    let chain = build_chain(key.realize()?, 3)?;
    let l = solve_characteristic(&solution_space(&chain)?, 3)?.lambda;
    type_cache().lock().unwrap().insert(key, l.clone());
    Ok(l)
}

fn log2_rational(r: &BigRational) -> f64 {
    // numerator and denominator separately so huge values do not overflow
    let bits = |v: &BigInt| {
        let b = v.bits();
        if b > 1000 {
            let shifted: BigInt = v >> (b - 60);
            shifted.to_f64().unwrap().log2() + (b - 60) as f64
        } else {
            v.to_f64().unwrap().log2()
        }
    };
    bits(r.numer()) - bits(r.denom())
}

/// f = log b / (log b + η·log(4/3) + log λ), in f64 (53-bit mantissa).
pub fn f_value(b: &BigRational, eta: usize, lambda: &BigRational) -> f64 {
    let lb = log2_rational(b);
    lb / (lb + eta as f64 * (4.0f64 / 3.0).log2() + log2_rational(lambda))
}

/// f-value of the single 3-clause chain, the reference threshold.
pub fn f_one() -> f64 {
    f_value(
        &BigRational::from_integer(3.into()),
        3,
        &BigRational::new(3.into(), 7.into()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTypeRecord {
    pub type_id: usize,
    pub zeta: TypeString,
    pub r2: bool,
    pub b: BigRational,
    pub eta: usize,
    pub lambda: BigRational,
    pub f: f64,
}

impl ChainTypeRecord {
    pub fn compute(type_id: usize, zeta: TypeString, r2: bool) -> Result<Self> {
        let b = branch_number(&zeta, r2);
        let eta = zeta.eta();
        let lambda = type_lambda(&zeta)?;
        let f = f_value(&b, eta, &lambda);
        Ok(ChainTypeRecord {
            type_id,
            zeta,
            r2,
            b,
            eta,
            lambda,
            f,
        })
    }

    /// TSV line: id, ζ, r2, b, η, λ, f.
    pub fn tsv(&self, exact: bool) -> String {
        let lambda = if exact {
            format!("{}/{}", self.lambda.numer(), self.lambda.denom())
        } else {
            format!("{:.6}", self.lambda.to_f64().unwrap_or(f64::NAN))
        };
        format!(
            "{}\t{}\t{}\t{}/{}\t{}\t{}\t{:.6}",
            self.type_id,
            self.zeta,
            if self.r2 { "r2" } else { "-" },
            self.b.numer(),
            self.b.denom(),
            self.eta,
            lambda,
            self.f
        )
    }
}

/// One transcribed row of the published chain type table.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub id: usize,
    pub zeta: &'static str,
    pub r2: bool,
    pub lambda: (u64, u64),
    /// Printed leading digits of f.
    pub f_prefix: &'static str,
}

const fn row(
    id: usize,
    zeta: &'static str,
    r2: bool,
    num: u64,
    den: u64,
    f_prefix: &'static str,
) -> TableRow {
    TableRow {
        id,
        zeta,
        r2,
        lambda: (num, den),
        f_prefix,
    }
}

pub const CHAIN_TABLE: [TableRow; 38] = [
    row(1, "*", false, 3, 7, "0.98586"),
    row(2, "n*", false, 27, 110, "0.984"),
    row(3, "p*", false, 81, 331, "0.983"),
    row(4, "t*", false, 15, 46, "0.984"),
    row(5, "nn*", false, 9, 64, "0.984"),
    row(6, "np*", false, 81, 578, "0.983"),
    row(7, "nt*", false, 45, 241, "0.984"),
    row(8, "pp*", true, 243, 1739, "0.98580"),
    row(9, "pt*", false, 27, 145, "0.983"),
    row(10, "nnn*", false, 243, 3016, "0.984"),
    row(11, "nnp*", false, 729, 9080, "0.983"),
    row(12, "nnt*", false, 135, 1262, "0.984"),
    row(13, "npn*", false, 243, 3028, "0.983"),
    row(14, "npp*", true, 729, 9110, "0.9853"),
    row(15, "npt*", false, 45, 422, "0.983"),
    row(16, "ntn*", false, 405, 3788, "0.984"),
    row(17, "pnp*", true, 2187, 27334, "0.9853"),
    row(18, "pnt*", false, 405, 3799, "0.983"),
    row(19, "tnt*", false, 25, 176, "0.984"),
    row(20, "nnnn*", true, 243, 5264, "0.98583"),
    row(21, "nnnp*", true, 729, 15848, "0.9854"),
    row(22, "nnnt*", false, 405, 6608, "0.984"),
    row(23, "nnpn*", true, 729, 15856, "0.9855"),
    row(24, "nnpp*", true, 2187, 47704, "0.984"),
    row(25, "nnpt*", true, 1215, 19888, "0.9854"),
    row(26, "npnp*", true, 2187, 47732, "0.9850"),
    row(27, "npnt*", true, 405, 6634, "0.9856"),
    row(28, "ntnn*", false, 135, 2204, "0.984"),
    row(29, "ntnp*", true, 1215, 19904, "0.9856"),
    row(30, "ntnt*", false, 675, 8299, "0.984"),
    row(31, "pnnp*", true, 729, 15904, "0.9850"),
    row(32, "pnnt*", true, 1215, 19894, "0.9855"),
    row(33, "tnnt*", false, 45, 553, "0.984"),
    row(34, "tnpp*", true, 405, 6653, "0.9850"),
    row(35, "tnpt*", true, 675, 8321, "0.9855"),
    row(36, "tnnnn*", true, 243, 6920, "0.9855"),
    row(37, "tnnnp*", true, 3645, 104168, "0.9852"),
    row(38, "tnnnt*", true, 225, 4826, "0.9856"),
];

/// Computed rows plus every disagreement with the transcribed table.
#[derive(Debug, Clone)]
pub struct TableReport {
    pub records: Vec<ChainTypeRecord>,
    pub mismatches: Vec<String>,
}

impl TableReport {
    pub fn argmax(&self) -> usize {
        self.records
            .iter()
            .max_by(|a, b| a.f.partial_cmp(&b.f).unwrap())
            .map(|r| r.type_id)
            .unwrap_or(0)
    }
}

/// Recomputes λ and f for all 38 tabulated types and compares.
pub fn compare_chain_table() -> Result<TableReport> {
    compare_rows(&CHAIN_TABLE)
}

pub(crate) fn compare_rows(rows: &[TableRow]) -> Result<TableReport> {
    let mut records = Vec::with_capacity(rows.len());
    let mut mismatches = Vec::new();
    for r in rows {
        let rec = ChainTypeRecord::compute(r.id, r.zeta.parse()?, r.r2)?;
        let want = BigRational::new(r.lambda.0.into(), r.lambda.1.into());
        if rec.lambda != want {
            mismatches.push(format!(
                "type {} {}: λ = {} expected {}",
                r.id, r.zeta, rec.lambda, want
            ));
        }
        let printed = format!("{:.12}", rec.f);
        if !printed.starts_with(r.f_prefix) {
            mismatches.push(format!(
                "type {} {}: f = {printed} expected prefix {}",
                r.id, r.zeta, r.f_prefix
            ));
        }
        records.push(rec);
    }
    let report = TableReport {
        records,
        mismatches,
    };
    if !rows.is_empty() && rows[0].id == 1 && report.argmax() != 1 {
        let mut report = report;
        let arg = report.argmax();
        report
            .mismatches
            .push(format!("argmax f is type {arg}, expected 1"));
        return Ok(report);
    }
    Ok(report)
}

/// The 38 records; any disagreement is an error listing every difference.
pub fn reproduce_chain_table() -> Result<Vec<ChainTypeRecord>> {
    let report = compare_chain_table()?;
    if report.mismatches.is_empty() {
        Ok(report.records)
    } else {
        Err(Error::TableMismatch(report.mismatches))
    }
}
