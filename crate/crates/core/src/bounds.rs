//! Worst-case bases: the 3-SAT base, the k-SAT recurrence, balance and
//! degeneration checks. All logarithms are base 2, evaluated in f64.

use crate::error::{Error, Result};

pub const MAX_BOUND_K: usize = 12;

/// Exponent log(4/3) / log(64/21).
pub fn c3_exponent() -> f64 {
    (4.0f64 / 3.0).log2() / (64.0f64 / 21.0).log2()
}

/// 3^{log(4/3)/log(64/21)}.
pub fn c3() -> f64 {
    3f64.powf(c3_exponent())
}

/// Rounds up at the fifth decimal, the convention of the published table.
pub fn round_up_5(x: f64) -> f64 {
    (x * 1e5 - 1e-9).ceil() / 1e5
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub ck: f64,
    /// Threshold fraction ν; for k = 3 the balancing chain fraction log c₃ / log 3.
    pub nu: f64,
}

/// λ of a single k-clause: k^k / ((2k−2)^k − (k−2)^k).
pub fn one_chain_lambda(k: usize) -> f64 {
    let k = k as f64;
    k.powf(k) / ((2.0 * k - 2.0).powf(k) - (k - 2.0).powf(k))
}

/// ν for width k given the base of width k − 1.
pub fn nu_for(k: usize, c_prev: f64) -> f64 {
    let kf = k as f64;
    let num = (2.0 * kf - 2.0).log2() - kf.log2() - c_prev.log2();
    let den = (2f64.powi(k as i32) - 1.0).log2()
        - (1.0 - ((kf - 2.0) / (2.0 * kf - 2.0)).powf(kf)).log2()
        - kf * c_prev.log2();
    num / den
}

/// c_k = (2^k − 1)^ν · c_{k−1}^{1−kν}.
pub fn ck_from(k: usize, c_prev: f64, nu: f64) -> f64 {
    let kf = k as f64;
    2f64.powf(nu * (2f64.powi(k as i32) - 1.0).log2() + (1.0 - kf * nu) * c_prev.log2())
}

/// Rows for k = 3..=kmax.
pub fn ck_recurrence(kmax: usize) -> Result<Vec<BoundRow>> {
    if kmax > MAX_BOUND_K {
        return Err(Error::Guard {
            what: "kmax",
            actual: kmax as u128,
            limit: MAX_BOUND_K as u128,
        });
    }
    Ok(ck_table(kmax))
}

/// Same recurrence without the display guard; used to configure the solver.
pub(crate) fn ck_table(kmax: usize) -> Vec<BoundRow> {
    let mut rows = Vec::new();
    if kmax < 3 {
        return rows;
    }
    let c = c3();
    rows.push(BoundRow {
        k: 3,
        ck: c,
        nu: c3_exponent(),
    });
    let mut prev = c;
    for k in 4..=kmax {
        let nu = nu_for(k, prev);
        let ck = ck_from(k, prev, nu);
        rows.push(BoundRow { k, ck, nu });
        prev = ck;
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    pub k: usize,
    pub nu: f64,
    /// log2 of the branching side.
    pub lhs_log2: f64,
    /// log2 of the local search side.
    pub rhs_log2: f64,
    pub relative_residual: f64,
}

impl BalanceReport {
    pub fn ok(&self, tol: f64) -> bool {
        self.relative_residual <= tol
    }
}

/// Compares branching cost with local search cost at the balancing ν.
///
/// For k ≥ 4 the sides are (2^k−1)^ν·c_{k−1}^{1−kν} and
/// (2(k−1)/k)^{1−kν}·λ^{−ν}. For k = 3 only single-clause chains are
/// substituted: 3^ν against (4/3)^{1−3ν}·(3/7)^{−ν}.
pub fn balance_check(k: usize) -> Result<BalanceReport> {
    if !(3..=MAX_BOUND_K).contains(&k) {
        return Err(Error::Precondition(format!(
            "balance check needs 3 <= k <= {MAX_BOUND_K}"
        )));
    }
    let kf = k as f64;
    let lambda_log2 = one_chain_lambda(k).log2();
    let (nu, lhs) = if k == 3 {
        let nu = c3_exponent();
        (nu, nu * 3f64.log2())
    } else {
        let prev = ck_table(k - 1).last().unwrap().ck;
        let nu = nu_for(k, prev);
        (
            nu,
            nu * (2f64.powi(k as i32) - 1.0).log2() + (1.0 - kf * nu) * prev.log2(),
        )
    };
    let rhs = (1.0 - kf * nu) * (2.0 * (kf - 1.0) / kf).log2() - nu * lambda_log2;
    let (a, b) = (2f64.powf(lhs), 2f64.powf(rhs));
    Ok(BalanceReport {
        k,
        nu,
        lhs_log2: lhs,
        rhs_log2: rhs,
        relative_residual: ((a - b) / b).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerationReport {
    pub positive_base: f64,
    pub two_negative_base: f64,
    pub c3: f64,
}

impl DegenerationReport {
    pub fn ok(&self) -> bool {
        self.positive_base >= 1.328
            && self.two_negative_base >= 1.328
            && self.positive_base > self.c3
            && self.two_negative_base > self.c3
    }
}

/// Base when every 2-chain of one kind is charged branch number 9:
/// 9^x = (4/3)^{1−ηx}·λ^{−x}, solved for x, base 9^x.
pub fn degenerate_base(eta: usize, lambda: f64) -> f64 {
    let x =
        (4.0f64 / 3.0).log2() / (9f64.log2() + eta as f64 * (4.0f64 / 3.0).log2() + lambda.log2());
    9f64.powf(x)
}

/// Bases without the positive-overlap and two-negative optimizations.
pub fn degeneration_check() -> DegenerationReport {
    DegenerationReport {
        positive_base: degenerate_base(5, 81.0 / 331.0),
        two_negative_base: degenerate_base(4, 15.0 / 46.0),
        c3: c3(),
    }
}
