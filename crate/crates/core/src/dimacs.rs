//! DIMACS CNF reading and writing.

use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, Literal};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses DIMACS CNF text. Lines starting with `c` are comments.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line_no, "second header line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(parse_err(
                    line_no,
                    "malformed header, expected `p cnf <n> <m>`",
                ));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| parse_err(line_no, "bad variable count"))?;
            let m = parts[3]
                .parse()
                .map_err(|_| parse_err(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(parse_err(line_no, "clause before header"));
        };
        for tok in line.split_whitespace() {
            let code: i64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad literal {tok:?}")))?;
            if current.is_empty() {
                clause_start = line_no;
            }
            if code == 0 {
                let clause = Clause::new(current.drain(..))
                    .map_err(|_| parse_err(line_no, "tautological clause"))?;
                clauses.push(clause);
                continue;
            }
            if code.unsigned_abs() > n as u64 {
                return Err(parse_err(
                    line_no,
                    format!("variable {} exceeds declared {n}", code.abs()),
                ));
            }
            current.push(Literal::from_dimacs(code as i32).expect("nonzero"));
        }
    }

    let Some((n, m)) = header else {
        return Err(parse_err(last_line.max(1), "missing header"));
    };
    if !current.is_empty() {
        return Err(parse_err(clause_start, "unterminated clause"));
    }
    if clauses.len() != m {
        return Err(parse_err(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    Formula::new(n, clauses)
}

/// Writes `p cnf n m` followed by one zero-terminated clause per line.
pub fn to_dimacs(f: &Formula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.len());
    for c in f.clauses() {
        for l in c.literals() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_kcnf;
    use proptest::prelude::*;

    #[test]
    fn minimal() {
        let f = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), &[Clause::from_dimacs(&[1, 2, 3]).unwrap()]);
    }

    #[test]
    fn duplicate_literal_dropped() {
        let f = parse_dimacs("p cnf 2 1\n1 1 2 0").unwrap();
        assert_eq!(f.clauses(), &[Clause::from_dimacs(&[1, 2]).unwrap()]);
    }

    #[test]
    fn tautology_names_line() {
        let err = parse_dimacs("p cnf 2 1\n1 -1 0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_dimacs("p cnf x 1\n1 0"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("c hi\np cnf 2 1\n1 3 0"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_dimacs("p cnf 2 2\n1 2 0").is_err());
    }

    #[test]
    fn comments_and_multiline_clauses() {
        let f = parse_dimacs("c a comment\np cnf 4 2\n1 -2\n 3 0 -4 0\n").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.clauses()[0].len(), 3);
    }

    #[test]
    fn empty_clause_is_bottom() {
        let f = parse_dimacs("p cnf 1 1\n0\n").unwrap();
        assert!(f.has_bottom());
        assert_eq!(parse_dimacs(&to_dimacs(&f)).unwrap(), f);
    }

    proptest! {
        #[test]
        fn round_trip(k in 1usize..5, n in 5usize..30, m in 0usize..60, seed in any::<u64>()) {
            let f = random_kcnf(k, n, m, seed).unwrap();
            prop_assert_eq!(parse_dimacs(&to_dimacs(&f)).unwrap(), f);
        }
    }
}
