//! Exhaustive satisfiability check used as a test oracle.

use crate::error::{Error, Result};
use crate::formula::{Formula, Word};

pub const ORACLE_MAX_VARS: usize = 30;

/// Enumerates assignments in lexicographic order (x1 most significant) and
/// returns the first satisfying one.
pub fn brute_force_sat(f: &Formula) -> Result<Option<Word>> {
    let n = f.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(Error::Guard {
            what: "oracle variable count",
            actual: n as u128,
            limit: ORACLE_MAX_VARS as u128,
        });
    }
    if f.has_bottom() {
        return Ok(None);
    }
    // bit (n - i) of the counter holds variable i
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u32, 0u32), |(pos, neg), l| {
                let bit = 1u32 << (n - l.var().index() as usize);
                if l.is_positive() {
                    (pos | bit, neg)
                } else {
                    (pos, neg | bit)
                }
            })
        })
        .collect();
    let all = if n == 0 { 1u64 } else { 1u64 << n };
    for m in 0..all {
        let m = m as u32;
        if masks
            .iter()
            .all(|&(pos, neg)| m & pos != 0 || !m & neg != 0)
        {
            return Ok(Some(Word::from_u64(m as u64, n)));
        }
    }
    Ok(None)
}
