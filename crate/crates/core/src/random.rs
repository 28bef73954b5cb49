//! Seeded random k-CNF generation.
//!
//! The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`. Each
//! clause draws k variables uniformly with replacement and redraws the whole
//! clause when a variable repeats, then draws each polarity with a fair coin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, Literal, Variable};

pub fn random_kcnf(k: usize, n: usize, m: usize, seed: u64) -> Result<Formula> {
    if k > n {
        return Err(Error::Precondition(format!(
            "clause width {k} exceeds variable count {n}"
        )));
    }
    if k == 0 && m > 0 {
        return Err(Error::Precondition("clause width must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = loop {
            let vars: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=n as u32)).collect();
            let distinct = vars.iter().enumerate().all(|(i, v)| !vars[..i].contains(v));
            if distinct {
                break vars;
            }
        };
        let lits = vars
            .into_iter()
            .map(|v| Literal::new(Variable::new(v), rng.gen_bool(0.5)));
        clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    Formula::new(n, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimacs::to_dimacs;

    #[test]
    fn deterministic() {
        let a = to_dimacs(&random_kcnf(3, 20, 85, 42).unwrap());
        let b = to_dimacs(&random_kcnf(3, 20, 85, 42).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, to_dimacs(&random_kcnf(3, 20, 85, 43).unwrap()));
    }

    #[test]
    fn shape() {
        let f = random_kcnf(4, 9, 30, 1).unwrap();
        assert_eq!(f.len(), 30);
        assert!(f.clauses().iter().all(|c| c.len() == 4));
        assert_eq!(random_kcnf(3, 5, 0, 1).unwrap().len(), 0);
        assert!(random_kcnf(4, 3, 1, 1).is_err());
    }
}
