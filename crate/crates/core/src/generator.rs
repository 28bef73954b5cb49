//! Closure of 3-clause chain types under the extension and termination rules.
//!
//! Starting from the empty prefix, every prefix is closed with `*`. A prefix
//! whose closed form, with doubled branch number, has f at most the threshold
//! is closed that way (an r2 termination) and not extended. Otherwise it is
//! extended by `n`, `p`, `t*` and `tn`; a `t` is never followed by `p` or `t`.
//! Strings whose reversal (closing `*` kept in place) was already emitted are
//! merged into it.

use std::collections::BTreeSet;

use crate::characteristic::{f_one, f_value, type_lambda, ChainTypeRecord, CHAIN_TABLE};
use crate::error::{Error, Result};
use crate::types::{branch_number, TypeString};

pub const MAX_GENERATOR_LEN: usize = 8;

#[derive(Debug, Clone)]
pub struct GeneratedTypes {
    pub records: Vec<ChainTypeRecord>,
    /// Prefixes still open when the length cap was reached.
    pub incomplete: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableComparison {
    /// Tabulated strings the generator did not produce.
    pub missing: Vec<String>,
    /// Generated strings absent from the table.
    pub extra: Vec<String>,
}

/// True when closing `zeta` as an r2 termination keeps f at or below `threshold`.
pub fn rule2_holds(zeta: &TypeString, threshold: f64) -> Result<bool> {
    let b = branch_number(zeta, true);
    Ok(f_value(&b, zeta.eta(), &type_lambda(zeta)?) <= threshold)
}

pub fn generate_chain_types(f_threshold: Option<f64>, max_len: usize) -> Result<GeneratedTypes> {
    if max_len > MAX_GENERATOR_LEN {
        return Err(Error::Guard {
            what: "generator length",
            actual: max_len as u128,
            limit: MAX_GENERATOR_LEN as u128,
        });
    }
    let threshold = f_threshold.unwrap_or_else(f_one);
    let mut seen: BTreeSet<TypeString> = BTreeSet::new();
    let mut records = Vec::new();
    let mut incomplete = Vec::new();

    let mut emit = |s: String, records: &mut Vec<ChainTypeRecord>| -> Result<bool> {
        let z: TypeString = s.parse()?;
        let r2 = rule2_holds(&z, threshold)?;
        if seen.insert(z.canonical()) {
            records.push(ChainTypeRecord::compute(records.len() + 1, z, r2)?);
        }
        Ok(r2)
    };

    let mut states = vec![String::new()];
    while !states.is_empty() {
        let mut next = Vec::new();
        for s in states {
            if s.len() + 1 > max_len {
                incomplete.push(s);
                continue;
            }
            if emit(format!("{s}*"), &mut records)? {
                continue;
            }
            if s.len() + 2 > max_len {
                incomplete.push(s);
                continue;
            }
            let after_t = s.ends_with('t');
            next.push(format!("{s}n"));
            if !after_t {
                next.push(format!("{s}p"));
                emit(format!("{s}t*"), &mut records)?;
                next.push(format!("{s}tn"));
            }
        }
        states = next;
    }
    Ok(GeneratedTypes {
        records,
        incomplete,
    })
}

/// Compares generated strings with the transcribed table, up to reversal.
pub fn compare_with_table(generated: &GeneratedTypes) -> TableComparison {
    let canon = |s: &str| {
        s.parse::<TypeString>()
            .expect("table strings are valid")
            .canonical()
    };
    let table: BTreeSet<TypeString> = CHAIN_TABLE.iter().map(|r| canon(r.zeta)).collect();
    let produced: BTreeSet<TypeString> = generated
        .records
        .iter()
        .map(|r| r.zeta.canonical())
        .collect();
    TableComparison {
        missing: table.difference(&produced).map(|z| z.to_string()).collect(),
        extra: generated
            .records
            .iter()
            .filter(|r| !table.contains(&r.zeta.canonical()))
            .map(|r| r.zeta.to_string())
            .collect(),
    }
}
