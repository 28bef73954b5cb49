//! Covering codes for hypercubes, powers of solution spaces, and products
//! of both.
//!
//! Codes are built by greedy set cover and then checked directly. Words are
//! handled internally as integers with coordinate 0 as the most significant
//! bit, so integer order is lexicographic word order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigRational, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::SolutionSpace;
use crate::error::{Error, Result};
use crate::formula::{Variable, Word};

/// Cubes wider than this are covered blockwise.
pub const CUBE_BLOCK: usize = 16;
/// Largest power space covered by a single greedy run.
pub const POWER_BLOCK: usize = 4096;
/// Largest power space accepted by [`ell_cover_power`].
pub const MAX_POWER_SPACE: u128 = 1 << 22;
/// Spaces up to this many words are verified exhaustively.
pub const EXHAUSTIVE_WORDS: u128 = 1 << 22;
pub const SAMPLES: usize = 100_000;
/// Largest product family materialized.
pub const MAX_CENTERS: u128 = 1 << 24;
/// Widest space handled (words are packed into u128).
pub const MAX_WIDTH: usize = 128;

fn pack(w: &Word) -> u128 {
    w.bits().iter().fold(0u128, |acc, &b| acc << 1 | b as u128)
}

fn unpack(v: u128, width: usize) -> Word {
    Word::from_bits((0..width).map(|i| v >> (width - 1 - i) & 1 == 1).collect())
}

/// One factor of a structured Hamming space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Cube(usize),
    Power { space: SolutionSpace, nu: usize },
}

impl Factor {
    pub fn width(&self) -> usize {
        match self {
            Factor::Cube(w) => *w,
            Factor::Power { space, nu } => space.width() * nu,
        }
    }

    /// Number of words, saturating.
    pub fn size(&self) -> u128 {
        match self {
            Factor::Cube(w) => 1u128.checked_shl(*w as u32).unwrap_or(u128::MAX),
            Factor::Power { space, nu } => {
                (0..*nu).fold(1u128, |acc, _| acc.saturating_mul(space.len() as u128))
            }
        }
    }
}

/// Where a coordinate of the space comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coordinate {
    pub factor: usize,
    pub variable: Option<Variable>,
    /// The variable takes the complement of the coordinate bit.
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredSpace {
    factors: Vec<Factor>,
    coordinates: Vec<Coordinate>,
}

impl StructuredSpace {
    /// A space whose coordinates are not tied to formula variables.
    pub fn new(factors: Vec<Factor>) -> Self {
        let coordinates = factors
            .iter()
            .enumerate()
            .flat_map(|(i, f)| {
                (0..f.width()).map(move |_| Coordinate {
                    factor: i,
                    variable: None,
                    negated: false,
                })
            })
            .collect();
        StructuredSpace {
            factors,
            coordinates,
        }
    }

    pub fn with_coordinates(factors: Vec<Factor>, coordinates: Vec<Coordinate>) -> Result<Self> {
        let width: usize = factors.iter().map(Factor::width).sum();
        if coordinates.len() != width {
            return Err(Error::Precondition(format!(
                "{} coordinates for a space of width {width}",
                coordinates.len()
            )));
        }
        Ok(StructuredSpace {
            factors,
            coordinates,
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coordinates
    }

    pub fn width(&self) -> usize {
        self.coordinates.len()
    }

    pub fn size(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, f| acc.saturating_mul(f.size()))
    }

    pub fn contains(&self, w: &Word) -> bool {
        if w.len() != self.width() {
            return false;
        }
        let mut at = 0;
        for f in &self.factors {
            if let Factor::Power { space, nu } = f {
                for _ in 0..*nu {
                    let part = Word::from_bits(w.bits()[at..at + space.width()].to_vec());
                    if !space.contains(&part) {
                        return false;
                    }
                    at += space.width();
                }
            } else {
                at += f.width();
            }
        }
        true
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Cube(w) => format!("cube({w})"),
                Factor::Power { space, nu } => {
                    format!("A[{} words of {} bits]^{nu}", space.len(), space.width())
                }
            })
            .collect();
        if parts.is_empty() {
            "empty".into()
        } else {
            parts.join(" x ")
        }
    }

    /// Enumeration units: one per cube bit and one per copy of a solution space.
    fn units(&self) -> Vec<Unit> {
        let mut out = Vec::new();
        for f in &self.factors {
            match f {
                Factor::Cube(w) => out.extend((0..*w).map(|_| Unit::Bit)),
                Factor::Power { space, nu } => {
                    let words: Vec<u128> = space.words().iter().map(pack).collect();
                    out.extend((0..*nu).map(|_| Unit::Space {
                        width: space.width(),
                        words: words.clone(),
                    }));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Unit {
    Bit,
    Space { width: usize, words: Vec<u128> },
}

impl Unit {
    fn width(&self) -> usize {
        match self {
            Unit::Bit => 1,
            Unit::Space { width, .. } => *width,
        }
    }

    fn count(&self) -> usize {
        match self {
            Unit::Bit => 2,
            Unit::Space { words, .. } => words.len(),
        }
    }

    fn value(&self, i: usize) -> u128 {
        match self {
            Unit::Bit => i as u128,
            Unit::Space { words, .. } => words[i],
        }
    }
}

/// Radius-indexed center sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeFamily {
    width: usize,
    entries: BTreeMap<usize, Vec<Word>>,
    radius_set: Vec<usize>,
}

impl CodeFamily {
    pub fn single(width: usize, radius: usize, centers: Vec<Word>) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(radius, centers);
        CodeFamily {
            width,
            entries,
            radius_set: vec![radius],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Radii the family is declared over (some may hold no centers).
    pub fn radius_set(&self) -> &[usize] {
        &self.radius_set
    }

    pub fn centers(&self, r: usize) -> &[Word] {
        self.entries.get(&r).map(Vec::as_slice).unwrap_or(&[])
    }

    /// (radius, number of centers) for every nonempty radius.
    pub fn sizes(&self) -> Vec<(usize, usize)> {
        self.entries
            .iter()
            .filter(|(_, c)| !c.is_empty())
            .map(|(&r, c)| (r, c.len()))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Centers by ascending radius, then construction order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Word)> {
        self.entries
            .iter()
            .flat_map(|(&r, cs)| cs.iter().map(move |c| (r, c)))
    }

    /// One line per center, `r <radius> <bits>`, after a header naming the space.
    pub fn dump(&self, space_description: &str) -> String {
        let mut out = format!("# space {space_description}\n");
        for (r, c) in self.iter() {
            let _ = writeln!(out, "r {r} {c}");
        }
        out
    }
}

fn ball_masks(width: usize, radius: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut frontier = vec![0u64];
    for _ in 0..radius.min(width) {
        let mut next = Vec::new();
        for &m in &frontier {
            // extend with bits above the highest set bit to avoid repeats
            let start = if m == 0 {
                0
            } else {
                64 - m.leading_zeros() as usize
            };
            for b in start..width {
                next.push(m | 1 << b);
            }
        }
        out.extend(&next);
        frontier = next;
    }
    out
}

/// Greedy cover of {0,1}^width by radius balls; picks the word covering
/// most uncovered words, smallest word first on ties.
fn cube_greedy(width: usize, radius: usize) -> Vec<u64> {
    let size = 1usize << width;
    let masks = ball_masks(width, radius);
    let mut covered = vec![false; size];
    let mut remaining = size;
    let mut heap: BinaryHeap<(usize, Reverse<u64>)> = (0..size as u64)
        .map(|c| (masks.len(), Reverse(c)))
        .collect();
    let mut centers = Vec::new();
    while remaining > 0 {
        let (gain, Reverse(c)) = heap.pop().expect("uncovered words remain coverable");
        let actual = masks
            .iter()
            .filter(|&&m| !covered[(c ^ m) as usize])
            .count();
        if actual == 0 {
            continue;
        }
        if actual < gain {
            heap.push((actual, Reverse(c)));
            continue;
        }
        for &m in &masks {
            let w = (c ^ m) as usize;
            if !covered[w] {
                covered[w] = true;
                remaining -= 1;
            }
        }
        centers.push(c);
    }
    centers
}

fn cube_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<CodeFamily>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<CodeFamily>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Covering code of {0,1}^width at the given radius.
pub fn cover_cube(width: usize, radius: usize) -> CodeFamily {
    if let Some(f) = cube_cache().lock().unwrap().get(&(width, radius)) {
        return (**f).clone();
    }
    let family = if radius >= width {
        CodeFamily::single(width, radius, vec![Word::zeros(width)])
    } else if width <= CUBE_BLOCK {
        let centers = cube_greedy(width, radius)
            .into_iter()
            .map(|c| Word::from_u64(c, width))
            .collect();
        CodeFamily::single(width, radius, centers)
    } else {
        // near-equal blocks, radius shared in proportion to block width
        let blocks = width.div_ceil(CUBE_BLOCK);
        let widths: Vec<usize> = (0..blocks)
            .map(|i| width / blocks + usize::from(i < width % blocks))
            .collect();
        let mut radii: Vec<usize> = widths.iter().map(|w| radius * w / width).collect();
        let mut spare = radius - radii.iter().sum::<usize>();
        for r in radii.iter_mut() {
            if spare == 0 {
                break;
            }
            *r += 1;
            spare -= 1;
        }
        let parts: Vec<CodeFamily> = widths
            .iter()
            .zip(&radii)
            .map(|(&w, &r)| cover_cube(w, r))
            .collect();
        product_code(&parts)
    };
    cube_cache()
        .lock()
        .unwrap()
        .insert((width, radius), Arc::new(family.clone()));
    family
}

/// Product of single-radius codes: every concatenation, radius Σ r_i.
pub fn product_code(codes: &[CodeFamily]) -> CodeFamily {
    let mut out = product_families(codes);
    let r = out.entries.keys().copied().max().unwrap_or(0);
    out.radius_set = vec![r];
    out
}

/// Product of families over every combination of radii. Combinations with
/// the same total are taken in lexicographic order of their radius tuples.
pub fn product_families(families: &[CodeFamily]) -> CodeFamily {
    let mut acc: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
    acc.insert(0, vec![Word::zeros(0)]);
    let mut radius_set = vec![0usize];
    let mut width = 0;
    for f in families {
        let mut next: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        for (&r1, cs1) in &acc {
            for (&r2, cs2) in &f.entries {
                let slot = next.entry(r1 + r2).or_default();
                for a in cs1 {
                    for b in cs2 {
                        slot.push(Word::concat(&[a, b]));
                    }
                }
            }
        }
        for cs in next.values_mut() {
            let mut seen = HashSet::new();
            cs.retain(|c| seen.insert(c.clone()));
        }
        acc = next;
        let mut rs: Vec<usize> = radius_set
            .iter()
            .flat_map(|a| f.radius_set.iter().map(move |b| a + b))
            .collect();
        rs.sort();
        rs.dedup();
        radius_set = rs;
        width += f.width;
    }
    CodeFamily {
        width,
        entries: acc,
        radius_set,
    }
}

/// ℓ = ⌊−ν·log_{k−1} λ + 2⌋.
pub fn ell_for(nu: usize, k: usize, lambda: &BigRational) -> usize {
    let l = lambda.to_f64().expect("finite λ");
    let v = -(nu as f64) * l.ln() / ((k - 1) as f64).ln() + 2.0;
    v.floor().max(0.0) as usize
}

fn power_words(space: &SolutionSpace, nu: usize) -> Vec<u128> {
    let base: Vec<u128> = space.words().iter().map(pack).collect();
    let w = space.width();
    let mut out = vec![0u128];
    for _ in 0..nu {
        out = out
            .iter()
            .flat_map(|&p| base.iter().map(move |&a| p << w | a))
            .collect();
    }
    out
}

/// Weighted greedy over (center, radius) pairs with cost (k−1)^r: picks the
/// pair maximizing newly covered words per cost; ties go to the smaller
/// radius, then the smaller center.
fn power_greedy(words: &[u128], max_radius: usize, k: usize) -> BTreeMap<usize, Vec<u128>> {
    let n = words.len();
    let mut dist = vec![0u8; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (words[i] ^ words[j]).count_ones() as u8;
        }
    }
    let base = (k - 1) as u128;
    let weight: Vec<u128> = (0..=max_radius)
        .map(|r| base.saturating_pow((max_radius - r) as u32))
        .collect();
    let mut heap = BinaryHeap::new();
    for c in 0..n {
        let mut hist = vec![0usize; 129];
        for &d in &dist[c * n..(c + 1) * n] {
            hist[d as usize] += 1;
        }
        let mut gain = 0;
        for r in 0..=max_radius {
            gain += hist[r.min(128)];
            heap.push((gain as u128 * weight[r], Reverse(r), Reverse(c)));
        }
    }
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut out: BTreeMap<usize, Vec<u128>> = BTreeMap::new();
    while remaining > 0 {
        let (key, Reverse(r), Reverse(c)) = heap.pop().expect("radius 0 always covers");
        let row = &dist[c * n..(c + 1) * n];
        let gain = row
            .iter()
            .zip(&covered)
            .filter(|(&d, &cv)| !cv && d as usize <= r)
            .count();
        if gain == 0 {
            continue;
        }
        let actual = gain as u128 * weight[r];
        if actual < key {
            heap.push((actual, Reverse(r), Reverse(c)));
            continue;
        }
        for (j, &d) in row.iter().enumerate() {
            if d as usize <= r && !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
        out.entry(r).or_default().push(words[c]);
    }
    out
}

fn family_from(width: usize, max_radius: usize, raw: BTreeMap<usize, Vec<u128>>) -> CodeFamily {
    let entries = raw
        .into_iter()
        .map(|(r, cs)| (r, cs.into_iter().map(|c| unpack(c, width)).collect()))
        .collect();
    CodeFamily {
        width,
        entries,
        radius_set: (0..=max_radius).collect(),
    }
}

/// ℓ-covering family of A^ν with radii in [ℓ]*.
pub fn ell_cover_power(
    space: &SolutionSpace,
    nu: usize,
    k: usize,
    lambda: &BigRational,
) -> Result<CodeFamily> {
    if k < 3 {
        return Err(Error::Precondition(format!(
            "ℓ-covering needs k >= 3, got {k}"
        )));
    }
    let factor = Factor::Power {
        space: space.clone(),
        nu,
    };
    let size = factor.size();
    if size > MAX_POWER_SPACE {
        return Err(Error::Guard {
            what: "power space size",
            actual: size,
            limit: MAX_POWER_SPACE,
        });
    }
    if factor.width() > MAX_WIDTH {
        return Err(Error::Guard {
            what: "power space width",
            actual: factor.width() as u128,
            limit: MAX_WIDTH as u128,
        });
    }
    let ell = ell_for(nu, k, lambda);
    let family = power_family(space, nu, k, ell);
    let report = verify_coverage(&StructuredSpace::new(vec![factor]), &family)?;
    if report.missed > 0 {
        return Err(Error::Coverage {
            missed: report.missed as u64,
            total: report.checked as u64,
        });
    }
    Ok(family)
}

type PowerKey = (Vec<Word>, usize, usize, usize);

fn power_cache() -> &'static Mutex<HashMap<PowerKey, Arc<CodeFamily>>> {
    static CACHE: OnceLock<Mutex<HashMap<PowerKey, Arc<CodeFamily>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn power_family(space: &SolutionSpace, nu: usize, k: usize, ell: usize) -> CodeFamily {
    let key = (space.words().to_vec(), nu, k, ell);
    if let Some(f) = power_cache().lock().unwrap().get(&key) {
        return (**f).clone();
    }
    let family = build_power_family(space, nu, k, ell);
    power_cache()
        .lock()
        .unwrap()
        .insert(key, Arc::new(family.clone()));
    family
}

fn build_power_family(space: &SolutionSpace, nu: usize, k: usize, ell: usize) -> CodeFamily {
    let a = space.len().max(1);
    let mut per_block = 1;
    while per_block < nu && a.pow(per_block as u32 + 1) <= POWER_BLOCK {
        per_block += 1;
    }
    if nu <= per_block {
        let words = power_words(space, nu);
        return family_from(space.width() * nu, ell, power_greedy(&words, ell, k));
    }
    // blocks share the radius budget evenly so every product radius stays ≤ ℓ
    let blocks = nu.div_ceil(per_block);
    let cap = ell / blocks;
    let sizes: Vec<usize> = (0..blocks)
        .map(|i| nu / blocks + usize::from(i < nu % blocks))
        .collect();
    let parts: Vec<CodeFamily> = sizes
        .iter()
        .map(|&s| {
            let words = power_words(space, s);
            family_from(space.width() * s, cap, power_greedy(&words, cap, k))
        })
        .collect();
    let mut out = product_families(&parts);
    out.radius_set = (0..=ell).collect();
    out
}

/// Covering family for a structured space: the cube factor at radius
/// ⌈ρ·width⌉, each power factor by its ℓ-covering family, all combined.
/// `lambdas` lists λ for the power factors in order.
pub fn build_generalized_code(
    space: &StructuredSpace,
    rho: (u64, u64),
    lambdas: &[BigRational],
    k: usize,
) -> Result<CodeFamily> {
    let (p, q) = rho;
    if p == 0 || q == 0 || 2 * p >= q {
        return Err(Error::Precondition(format!(
            "ρ = {p}/{q} must lie in (0, 1/2)"
        )));
    }
    if space.width() > MAX_WIDTH {
        return Err(Error::Guard {
            what: "space width",
            actual: space.width() as u128,
            limit: MAX_WIDTH as u128,
        });
    }
    let powers = space
        .factors()
        .iter()
        .filter(|f| matches!(f, Factor::Power { .. }))
        .count();
    if lambdas.len() != powers {
        return Err(Error::Precondition(format!(
            "{} λ values for {powers} power factors",
            lambdas.len()
        )));
    }
    let mut lam = lambdas.iter();
    let mut parts = Vec::with_capacity(space.factors().len());
    for f in space.factors() {
        parts.push(match f {
            Factor::Cube(w) => cover_cube(*w, (*w as u64 * p).div_ceil(q) as usize),
            Factor::Power { space: a, nu } => {
                let l = lam.next().expect("counted above");
                let size = f.size();
                if size > MAX_POWER_SPACE {
                    return Err(Error::Guard {
                        what: "power space size",
                        actual: size,
                        limit: MAX_POWER_SPACE,
                    });
                }
                power_family(a, *nu, k, ell_for(*nu, k, l))
            }
        });
    }
    let total = parts
        .iter()
        .fold(1u128, |acc, p| acc.saturating_mul(p.total() as u128));
    if total > MAX_CENTERS {
        return Err(Error::Guard {
            what: "covering family size",
            actual: total,
            limit: MAX_CENTERS,
        });
    }
    Ok(product_families(&parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageReport {
    pub checked: u128,
    pub missed: u128,
    pub sampled: bool,
    pub centers_outside: usize,
}

impl CoverageReport {
    pub fn complete(&self) -> bool {
        self.missed == 0 && self.centers_outside == 0
    }
}

fn split_center(units: &[Unit], center: u128, width: usize) -> Option<Vec<u128>> {
    let mut at = width;
    let mut out = Vec::with_capacity(units.len());
    for u in units {
        at -= u.width();
        let part = center >> at & ((1u128 << u.width()) - 1);
        if let Unit::Space { words, .. } = u {
            words.binary_search(&part).ok()?;
        }
        out.push(part);
    }
    Some(out)
}

/// Checks that every word of the space lies within r of some center of
/// entry r. Exhaustive up to [`EXHAUSTIVE_WORDS`] words, otherwise
/// [`SAMPLES`] uniform samples.
pub fn verify_coverage(space: &StructuredSpace, family: &CodeFamily) -> Result<CoverageReport> {
    let width = space.width();
    if width > MAX_WIDTH {
        return Err(Error::Guard {
            what: "space width",
            actual: width as u128,
            limit: MAX_WIDTH as u128,
        });
    }
    let units = space.units();
    let mut centers = Vec::new();
    let mut outside = 0;
    for (r, c) in family.iter() {
        if c.len() != width {
            outside += 1;
            continue;
        }
        match split_center(&units, pack(c), width) {
            Some(parts) => centers.push((r, pack(c), parts)),
            None => outside += 1,
        }
    }
    let size = space.size();
    if size <= EXHAUSTIVE_WORDS {
        let mut strides = vec![1u128; units.len()];
        for i in (0..units.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * units[i + 1].count() as u128;
        }
        // per unit: option indices ordered by distance from each center part
        let mut covered = vec![false; size as usize];
        let mut remaining = size;
        for (r, _, parts) in &centers {
            let options: Vec<Vec<(usize, usize)>> = units
                .iter()
                .zip(parts)
                .map(|(u, &p)| {
                    let mut v: Vec<(usize, usize)> = (0..u.count())
                        .map(|i| ((u.value(i) ^ p).count_ones() as usize, i))
                        .collect();
                    v.sort();
                    v
                })
                .collect();
            mark_ball(&options, &strides, 0, *r, 0, &mut covered, &mut remaining);
            if remaining == 0 {
                break;
            }
        }
        return Ok(CoverageReport {
            checked: size,
            missed: remaining,
            sampled: false,
            centers_outside: outside,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut missed = 0;
    for _ in 0..SAMPLES {
        let w = units.iter().fold(0u128, |acc, u| {
            acc << u.width() | u.value(rng.gen_range(0..u.count()))
        });
        if !centers
            .iter()
            .any(|(r, c, _)| (c ^ w).count_ones() as usize <= *r)
        {
            missed += 1;
        }
    }
    Ok(CoverageReport {
        checked: SAMPLES as u128,
        missed,
        sampled: true,
        centers_outside: outside,
    })
}

fn mark_ball(
    options: &[Vec<(usize, usize)>],
    strides: &[u128],
    unit: usize,
    budget: usize,
    index: u128,
    covered: &mut [bool],
    remaining: &mut u128,
) {
    if unit == options.len() {
        let i = index as usize;
        if !covered[i] {
            covered[i] = true;
            *remaining -= 1;
        }
        return;
    }
    for &(d, i) in &options[unit] {
        if d > budget {
            break;
        }
        mark_ball(
            options,
            strides,
            unit + 1,
            budget - d,
            index + i as u128 * strides[unit],
            covered,
            remaining,
        );
    }
}
