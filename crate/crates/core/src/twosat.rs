//! 2-SAT by strongly connected components of the implication graph.

use crate::error::{Error, Result};
use crate::formula::{Formula, Literal, Word};

fn node(l: Literal) -> usize {
    2 * l.var().slot() + usize::from(!l.is_positive())
}

/// Decides a formula of width at most 2. Unit clauses are read as (l ∨ l).
/// Variables that occur nowhere are set to 0.
pub fn solve_2sat(f: &Formula) -> Result<Option<Word>> {
    if f.width() > 2 {
        return Err(Error::Precondition(format!(
            "2-SAT given a formula of width {}",
            f.width()
        )));
    }
    if f.has_bottom() {
        return Ok(None);
    }
    let n = f.num_vars();
    let nodes = 2 * n;
    let mut adj = vec![Vec::new(); nodes];
    let mut radj = vec![Vec::new(); nodes];
    let mut edge = |a: usize, b: usize| {
        adj[a].push(b);
        radj[b].push(a);
    };
    for c in f.clauses() {
        let ls = c.literals();
        let (a, b) = (ls[0], *ls.last().unwrap());
        edge(node(-a), node(b));
        edge(node(-b), node(a));
    }

    // first pass: finishing order on the graph
    let mut visited = vec![false; nodes];
    let mut order = Vec::with_capacity(nodes);
    for s in 0..nodes {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, i)) = stack.last_mut() {
            if let Some(&w) = adj[*v].get(*i) {
                *i += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(*v);
                stack.pop();
            }
        }
    }

    // second pass on the transpose; components come out in topological order
    let mut comp = vec![usize::MAX; nodes];
    let mut count = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }

    let mut occurs = vec![false; n];
    for c in f.clauses() {
        for v in c.variables() {
            occurs[v.slot()] = true;
        }
    }
    let mut bits = vec![false; n];
    for v in 0..n {
        let (pos, neg) = (comp[2 * v], comp[2 * v + 1]);
        if pos == neg {
            return Ok(None);
        }
        bits[v] = occurs[v] && pos > neg;
    }
    Ok(Some(Word::from_bits(bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Clause;
    use crate::oracle::brute_force_sat;
    use crate::random::random_kcnf;

    #[test]
    fn classic_contradiction() {
        let f = Formula::from_dimacs_clauses(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]).unwrap();
        assert_eq!(solve_2sat(&f).unwrap(), None);
    }

    #[test]
    fn unit_clause() {
        let f = Formula::from_dimacs_clauses(1, &[&[1, 1]]).unwrap();
        assert_eq!(solve_2sat(&f).unwrap().unwrap().to_string(), "1");
    }

    #[test]
    fn empty_formula_all_zero() {
        let f = Formula::new(3, vec![]).unwrap();
        assert_eq!(solve_2sat(&f).unwrap().unwrap().to_string(), "000");
    }

    #[test]
    fn rejects_width_three() {
        let f = Formula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap();
        assert!(solve_2sat(&f).is_err());
    }

    #[test]
    fn agrees_with_oracle() {
        let mut cases = 0;
        for seed in 0..1200u64 {
            let n = 2 + (seed % 9) as usize;
            let m = (seed % 23) as usize;
            let mut f = random_kcnf(2, n, m, seed).unwrap();
            if seed % 3 == 0 {
                let mut cs = f.clauses().to_vec();
                cs.push(Clause::from_dimacs(&[-(1 + (seed % n as u64) as i32)]).unwrap());
                f = Formula::new(n, cs).unwrap();
            }
            let got = solve_2sat(&f).unwrap();
            let want = brute_force_sat(&f).unwrap();
            assert_eq!(got.is_some(), want.is_some(), "seed {seed}: {f}");
            if let Some(w) = got {
                assert!(f.is_satisfied_by(&w));
            }
            cases += 1;
        }
        assert!(cases >= 1000);
    }
}
