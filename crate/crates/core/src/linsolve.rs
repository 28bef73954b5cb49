//! Exact solution of nonsingular integer linear systems by p-adic lifting.
//!
//! The matrix is factored once modulo a word-sized prime. Each lifting step
//! solves for the next p-adic digit of the solution and divides the residual
//! by p, so all per-step arithmetic stays in machine integers. Rational
//! reconstruction recovers the fractions, and the result is checked exactly
//! before it is returned.

use num::bigint::Sign;
use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest supported dimension; keeps lazily reduced sums below 2^64.
pub const MAX_DIM: usize = 4096;

const PRIME_BITS: u32 = 25;
const PRIME_ATTEMPTS: usize = 4;

/// Exact solution `numerators / denominator` of `m · y = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSolution {
    pub numerators: Vec<BigInt>,
    pub denominator: BigInt,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn primes_below(bound: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = bound - 1;
    while out.len() < count {
        if is_prime(c) {
            out.push(c);
        }
        c -= 1;
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// LU factorization modulo p with row pivoting.
struct ModLu {
    n: usize,
    p: u64,
    /// L below the diagonal (unit diagonal implied), U on and above.
    lu: Vec<u64>,
    perm: Vec<usize>,
    inv_diag: Vec<u64>,
}

impl ModLu {
    fn factor(m: &[i64], n: usize, p: u64) -> Option<ModLu> {
        let pi = p as i64;
        let mut a: Vec<u64> = m.iter().map(|&x| x.rem_euclid(pi) as u64).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut inv_diag = vec![0u64; n];
        let mut pivot_row = vec![0u32; n];
        for i in 0..n {
            for r in i..n {
                a[r * n + i] %= p;
            }
            let piv = (i..n).find(|&r| a[r * n + i] != 0)?;
            if piv != i {
                for c in 0..n {
                    a.swap(i * n + c, piv * n + c);
                }
                perm.swap(i, piv);
            }
            for c in i..n {
                a[i * n + c] %= p;
                pivot_row[c] = a[i * n + c] as u32;
            }
            let inv = inv_mod(a[i * n + i], p);
            inv_diag[i] = inv;
            let (head, tail) = a.split_at_mut((i + 1) * n);
            let _ = head;
            for row in tail.chunks_exact_mut(n) {
                let l = row[i] * inv % p;
                row[i] = l;
                if l == 0 {
                    continue;
                }
                let f = p - l;
                for (x, &u) in row[i + 1..].iter_mut().zip(&pivot_row[i + 1..]) {
                    *x += f * u as u64;
                }
            }
        }
        for x in a.iter_mut() {
            *x %= p;
        }
        Some(ModLu {
            n,
            p,
            lu: a,
            perm,
            inv_diag,
        })
    }

    /// Solves A x ≡ b (mod p); `b` entries already reduced.
    fn solve(&self, b: &[u64]) -> Vec<u64> {
        let (n, p) = (self.n, self.p);
        let mut y: Vec<u64> = self.perm.iter().map(|&r| b[r]).collect();
        for r in 0..n {
            let row = &self.lu[r * n..r * n + r];
            let s = row.iter().zip(&y[..r]).fold(0u64, |acc, (&l, &v)| {
                let t = acc + l * v;
                if t >= 1 << 62 {
                    t % p
                } else {
                    t
                }
            }) % p;
            y[r] = (y[r] + p - s) % p;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n + r + 1..(r + 1) * n];
            let s = row.iter().zip(&y[r + 1..]).fold(0u64, |acc, (&u, &v)| {
                let t = acc + u * v;
                if t >= 1 << 62 {
                    t % p
                } else {
                    t
                }
            }) % p;
            y[r] = (y[r] + p - s) % p * self.inv_diag[r] % p;
        }
        y
    }
}

/// Finds a/b ≡ u (mod m) with |a|, b ≤ bound.
fn reconstruct(u: &BigInt, m: &BigInt, bound: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), u.clone());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.is_zero() || t1.abs() > *bound {
        return None;
    }
    let (a, b) = if t1.is_negative() {
        (-r1, -t1)
    } else {
        (r1, t1)
    };
    if !a.gcd(&b).is_one() {
        return None;
    }
    Some((a, b))
}

fn try_reconstruct(x: &[BigInt], modulus: &BigInt) -> Option<RationalSolution> {
    let bound: BigInt = (modulus >> 1u32).sqrt();
    let mut den = BigInt::one();
    let mut parts = Vec::with_capacity(x.len());
    for xj in x {
        let u = (xj * &den).mod_floor(modulus);
        let (a, b) = reconstruct(&u, modulus, &bound)?;
        // x_j = a / (b · den)
        den *= b;
        parts.push((a, den.clone()));
        if den > bound {
            return None;
        }
    }
    let numerators = parts.into_iter().map(|(a, d)| a * (&den / d)).collect();
    Some(RationalSolution {
        numerators,
        denominator: den,
    })
}

fn verify(m: &[i64], n: usize, rhs: &[i64], sol: &RationalSolution) -> bool {
    (0..n).all(|r| {
        let row = &m[r * n..(r + 1) * n];
        let mut s = BigInt::zero();
        for (a, y) in row.iter().zip(&sol.numerators) {
            if *a != 0 && !y.is_zero() {
                s += y * *a;
            }
        }
        s == &sol.denominator * rhs[r]
    })
}

/// log2 of Hadamard's bound on every minor, used to cap the lifting depth.
fn hadamard_log2(m: &[i64], n: usize, rhs: &[i64]) -> f64 {
    let mut total = 0.0;
    for r in 0..n {
        let row = &m[r * n..(r + 1) * n];
        let norm2: f64 =
            row.iter().map(|&x| (x as f64).powi(2)).sum::<f64>() + (rhs[r] as f64).powi(2);
        total += 0.5 * norm2.max(1.0).log2();
    }
    total
}

/// Solves `m · y = rhs` exactly, `m` an n×n row-major integer matrix.
pub fn solve_integer_system(m: &[i64], rhs: &[i64]) -> Result<RationalSolution> {
    let n = rhs.len();
    if m.len() != n * n {
        return Err(Error::Precondition(
            "matrix is not square with the right-hand side".into(),
        ));
    }
    if n > MAX_DIM {
        return Err(Error::Guard {
            what: "linear system dimension",
            actual: n as u128,
            limit: MAX_DIM as u128,
        });
    }
    if n == 0 {
        return Ok(RationalSolution {
            numerators: vec![],
            denominator: BigInt::one(),
        });
    }
    let max_abs = m
        .iter()
        .chain(rhs)
        .map(|x| x.unsigned_abs())
        .max()
        .unwrap_or(0);
    let wide = (max_abs as u128) * (n as u128) >= 1u128 << (62 - PRIME_BITS);

    for p in primes_below(1 << PRIME_BITS, PRIME_ATTEMPTS) {
        let Some(lu) = ModLu::factor(m, n, p) else {
            continue;
        };
        let pi = p as i64;
        let max_steps =
            ((2.0 * hadamard_log2(m, n, rhs) + 4.0) / (p as f64).log2()).ceil() as usize + 2;
        let mut residual: Vec<i128> = rhs.iter().map(|&x| x as i128).collect();
        let mut x = vec![BigInt::zero(); n];
        let mut modulus = BigInt::one();
        let mut next_try = 1usize;
        for step in 1..=max_steps {
            let b: Vec<u64> = residual
                .iter()
                .map(|&r| r.rem_euclid(pi as i128) as u64)
                .collect();
            let digit = lu.solve(&b);
            for (xj, &d) in x.iter_mut().zip(&digit) {
                if d != 0 {
                    *xj += &modulus * d;
                }
            }
            for (r, res) in residual.iter_mut().enumerate() {
                let row = &m[r * n..(r + 1) * n];
                let s: i128 = if wide {
                    row.iter()
                        .zip(&digit)
                        .map(|(&a, &d)| a as i128 * d as i128)
                        .sum()
                } else {
                    row.iter()
                        .zip(&digit)
                        .map(|(&a, &d)| a * d as i64)
                        .sum::<i64>() as i128
                };
                let diff = *res - s;
                debug_assert_eq!(diff % p as i128, 0);
                *res = diff / p as i128;
            }
            modulus *= p;
            if step == next_try || step == max_steps {
                next_try = step + step.div_ceil(3).max(1);
                if let Some(sol) = try_reconstruct(&x, &modulus) {
                    if verify(m, n, rhs, &sol) {
                        return Ok(normalize(sol));
                    }
                }
            }
            if residual.iter().all(|r| *r == 0) {
                // the solution is an exact p-adic integer: x itself
                let sol = RationalSolution {
                    numerators: x.clone(),
                    denominator: BigInt::one(),
                };
                if verify(m, n, rhs, &sol) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(Error::Singular)
}

fn normalize(mut sol: RationalSolution) -> RationalSolution {
    if sol.denominator.sign() == Sign::Minus {
        sol.denominator = -sol.denominator;
        for v in &mut sol.numerators {
            *v = -v.clone();
        }
    }
    let mut g = sol.denominator.clone();
    for v in &sol.numerators {
        g = g.gcd(v);
        if g.is_one() {
            return sol;
        }
    }
    if !g.is_one() && !g.is_zero() {
        sol.denominator /= &g;
        for v in &mut sol.numerators {
            *v /= &g;
        }
    }
    sol
}

/// Convenience: solution entries as f64, for diagnostics.
pub fn approximate(sol: &RationalSolution) -> Vec<f64> {
    let d = sol.denominator.to_f64().unwrap_or(f64::NAN);
    sol.numerators
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN) / d)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    // Plain fraction-based Gaussian elimination as an independent route.
    fn gauss(m: &[i64], rhs: &[i64]) -> Option<Vec<BigRational>> {
        let n = rhs.len();
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = m[r * n..(r + 1) * n]
                    .iter()
                    .map(|&x| BigRational::from_integer(x.into()))
                    .collect();
                row.push(BigRational::from_integer(rhs[r].into()));
                row
            })
            .collect();
        for i in 0..n {
            let piv = (i..n).find(|&r| !a[r][i].is_zero())?;
            a.swap(i, piv);
            for r in 0..n {
                if r != i && !a[r][i].is_zero() {
                    let f = &a[r][i] / &a[i][i];
                    for c in i..=n {
                        let t = &f * &a[i][c];
                        a[r][c] -= t;
                    }
                }
            }
        }
        Some((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
    }

    fn as_rationals(s: &RationalSolution) -> Vec<BigRational> {
        s.numerators
            .iter()
            .map(|v| BigRational::new(v.clone(), s.denominator.clone()))
            .collect()
    }

    #[test]
    fn small_system() {
        let m = [2, 1, 1, 3];
        let rhs = [1, 2];
        let s = solve_integer_system(&m, &rhs).unwrap();
        assert_eq!(as_rationals(&s), gauss(&m, &rhs).unwrap());
        assert_eq!(s.denominator, BigInt::from(5));
    }

    #[test]
    fn singular_detected() {
        assert_eq!(
            solve_integer_system(&[1, 2, 2, 4], &[1, 1]),
            Err(Error::Singular)
        );
    }

    #[test]
    fn integral_solution() {
        let s = solve_integer_system(&[1, 0, 0, 1], &[7, -3]).unwrap();
        assert_eq!(s.denominator, BigInt::one());
        assert_eq!(s.numerators, vec![BigInt::from(7), BigInt::from(-3)]);
    }

    #[test]
    fn random_systems_match_fraction_elimination() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.gen_range(1..9);
            let m: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-50..50)).collect();
            let rhs: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..50)).collect();
            match gauss(&m, &rhs) {
                Some(want) => {
                    assert_eq!(as_rationals(&solve_integer_system(&m, &rhs).unwrap()), want)
                }
                None => assert_eq!(solve_integer_system(&m, &rhs), Err(Error::Singular)),
            }
        }
    }
}
