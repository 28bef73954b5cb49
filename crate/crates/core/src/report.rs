//! Machine-readable run report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::ksat::{Solution, SolvePath, SolveStats};
use crate::threesat::TraceEvent;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub mode: String,
    pub verdict: Verdict,
    /// Bit string, variable 1 first.
    pub assignment: Option<String>,
    /// The same assignment as signed DIMACS literals.
    pub model: Option<Vec<i32>>,
    pub path: SolvePath,
    pub stats: SolveStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

impl RunReport {
    /// Builds the report, checking a SAT assignment against `f` clause by clause.
    pub fn new(f: &Formula, solution: &Solution, mode: &str) -> Result<Self> {
        let (verdict, assignment, model) = match &solution.assignment {
            Some(w) => {
                if !f.is_satisfied_by(w) {
                    return Err(Error::Instance(format!(
                        "assignment {w} does not satisfy the formula"
                    )));
                }
                let model = (0..f.num_vars())
                    .map(|i| {
                        if w.get(i) {
                            i as i32 + 1
                        } else {
                            -(i as i32 + 1)
                        }
                    })
                    .collect();
                (Verdict::Sat, Some(w.to_string()), Some(model))
            }
            None => (Verdict::Unsat, None, None),
        };
        Ok(RunReport {
            schema: SCHEMA,
            mode: mode.to_string(),
            verdict,
            assignment,
            model,
            path: solution.path,
            stats: solution.stats.clone(),
            trace: solution.trace.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Word;
    use crate::ksat::solve_ksat;

    #[test]
    fn sat_report() {
        let f = Formula::from_dimacs_clauses(3, &[&[1, 2, 3], &[-1, -2]]).unwrap();
        let s = solve_ksat(&f).unwrap();
        let r = RunReport::new(&f, &s, "full").unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.schema, 1);
        assert_eq!(r.model.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn rejects_bad_assignment() {
        let f = Formula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let mut s = solve_ksat(&f).unwrap();
        s.assignment = Some(Word::zeros(2));
        assert!(RunReport::new(&f, &s, "full").is_err());
    }
}
