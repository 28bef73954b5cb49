use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chainsat::bounds::{ck_recurrence, round_up_5};
use chainsat::chain::{build_chain, solution_space, Instance};
use chainsat::characteristic::{characteristic_value, compare_chain_table};
use chainsat::covering::{
    build_generalized_code, ell_cover_power, ell_for, verify_coverage, CodeFamily, CoverageReport,
    Factor, StructuredSpace,
};
use chainsat::dimacs::{parse_dimacs, to_dimacs};
use chainsat::formula::Formula;
use chainsat::ksat::{solve_ksat_with, KSatConfig, Solution, SolvePath, SolveStats};
use chainsat::local_search::dls;
use chainsat::oracle::brute_force_sat;
use chainsat::random::random_kcnf;
use chainsat::report::RunReport;
use chainsat::threesat::PhiConfig;
use chainsat::types::TypeString;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_ERROR: u8 = 1;
const EXIT_MISMATCH: u8 = 2;

#[derive(Parser)]
#[command(
    name = "chainsat",
    version,
    about = "Deterministic k-SAT by chain branching and covering-code local search"
)]
struct Cli {
    /// Worker threads for the batch commands.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Br,
    Dls,
    Oracle,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Br => "br",
            Mode::Dls => "dls",
            Mode::Oracle => "oracle",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF file; prints a JSON report, exits 10 (SAT) or 20 (UNSAT).
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        /// Base c of the width-3 termination condition (default c3).
        #[arg(long)]
        c: Option<f64>,
        /// Include the branching trace in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Write a seeded random k-CNF in DIMACS format.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Upper bound bases c_k with threshold fractions, as TSV.
    Bounds {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
    /// The 38 chain types with λ and f, as TSV; exits 2 on any mismatch.
    ChainTable {
        /// Print λ as an exact fraction.
        #[arg(long)]
        exact: bool,
    },
    /// Build a covering family and verify it.
    Cover {
        /// Cover the plain cube of this width.
        #[arg(long, conflicts_with_all = ["zeta", "nu"], requires = "rho")]
        cube: Option<usize>,
        /// Relative radius p/q with 0 < p/q < 1/2.
        #[arg(long)]
        rho: Option<String>,
        /// Chain type string whose solution space is raised to the power nu.
        #[arg(long, requires = "nu")]
        zeta: Option<String>,
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Also print every center.
        #[arg(long)]
        dump: bool,
    },
    /// Compare a solver mode against the brute-force oracle on seeded instances.
    Check {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(EXIT_ERROR);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Solve {
            file,
            mode,
            c,
            trace,
        } => solve(&file, mode, c, trace),
        Command::Gen { k, n, m, seed, out } => {
            let text = to_dimacs(&random_kcnf(k, n, m, seed).map_err(err)?);
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Bounds { kmax } => {
            println!("k\tc\tnu");
            for row in ck_recurrence(kmax).map_err(err)? {
                println!("{}\t{:.5}\t{:.6}", row.k, round_up_5(row.ck), row.nu);
            }
            Ok(0)
        }
        Command::ChainTable { exact } => {
            let report = compare_chain_table().map_err(err)?;
            println!("type\tzeta\trule2\tb\teta\tlambda\tf");
            for r in &report.records {
                println!("{}", r.tsv(exact));
            }
            if report.mismatches.is_empty() {
                return Ok(0);
            }
            for m in &report.mismatches {
                eprintln!("mismatch: {m}");
            }
            Ok(EXIT_MISMATCH)
        }
        Command::Cover {
            cube,
            rho,
            zeta,
            nu,
            k,
            dump,
        } => cover(cube, rho, zeta, nu, k, dump),
        Command::Check {
            k,
            n,
            m,
            seeds,
            first_seed,
            mode,
        } => check(cli.threads, k, n, m, first_seed..first_seed + seeds, mode),
    }
}

fn err(e: chainsat::Error) -> String {
    e.to_string()
}

fn read_formula(path: &PathBuf) -> Result<Formula, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_dimacs(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_mode(f: &Formula, mode: Mode, c: Option<f64>, trace: bool) -> chainsat::Result<Solution> {
    let phi = match c {
        Some(c) => PhiConfig::new(c)?,
        None => PhiConfig::default(),
    };
    match mode {
        Mode::Full => solve_ksat_with(
            f,
            &KSatConfig {
                phi,
                trace,
                ..KSatConfig::default()
            },
        ),
        Mode::Br => solve_ksat_with(
            f,
            &KSatConfig {
                trace,
                ..KSatConfig::branching_only()
            },
        ),
        Mode::Dls => {
            let (assignment, d) = dls(f, &Instance::empty())?;
            let stats = SolveStats {
                balls_searched: d.balls_searched,
                code_sizes: d.code_sizes,
                space: Some(d.space),
                ..SolveStats::default()
            };
            Ok(Solution {
                assignment,
                path: SolvePath::Dls,
                stats,
                trace: Vec::new(),
            })
        }
        Mode::Oracle => {
            let assignment = brute_force_sat(f)?;
            Ok(Solution {
                assignment,
                path: SolvePath::BrSolved,
                stats: SolveStats::default(),
                trace: Vec::new(),
            })
        }
    }
}

fn solve(file: &PathBuf, mode: Mode, c: Option<f64>, trace: bool) -> Result<u8, String> {
    let f = read_formula(file)?;
    let solution = run_mode(&f, mode, c, trace).map_err(err)?;
    let report = RunReport::new(&f, &solution, mode.name()).map_err(err)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
    );
    Ok(if solution.is_sat() {
        EXIT_SAT
    } else {
        EXIT_UNSAT
    })
}

fn parse_rho(s: &str) -> Result<(u64, u64), String> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| format!("radius {s:?} is not of the form p/q"))?;
    let p = p
        .trim()
        .parse()
        .map_err(|_| format!("bad numerator in {s:?}"))?;
    let q = q
        .trim()
        .parse()
        .map_err(|_| format!("bad denominator in {s:?}"))?;
    Ok((p, q))
}

fn print_family(space: &StructuredSpace, family: &CodeFamily, report: &CoverageReport, dump: bool) {
    println!("space\t{}", space.describe());
    println!("words\t{}", space.size());
    for (r, size) in family.sizes() {
        println!("radius {r}\t{size}");
    }
    println!("centers\t{}", family.total());
    let how = if report.sampled {
        "sampled"
    } else {
        "exhaustive"
    };
    println!(
        "coverage\t{how}\t{} checked\t{} missed",
        report.checked, report.missed
    );
    if dump {
        print!("{}", family.dump(&space.describe()));
    }
}

fn cover(
    cube: Option<usize>,
    rho: Option<String>,
    zeta: Option<String>,
    nu: Option<usize>,
    k: usize,
    dump: bool,
) -> Result<u8, String> {
    let (space, family) = if let Some(width) = cube {
        let rho = parse_rho(rho.as_deref().expect("clap enforces --rho"))?;
        let space = StructuredSpace::new(vec![Factor::Cube(width)]);
        let family = build_generalized_code(&space, rho, &[], 3).map_err(err)?;
        (space, family)
    } else if let (Some(zeta), Some(nu)) = (zeta, nu) {
        let zeta: TypeString = zeta.parse().map_err(err)?;
        let chain = build_chain(zeta.realize().map_err(err)?, k).map_err(err)?;
        let a = solution_space(&chain).map_err(err)?;
        let lambda = characteristic_value(&a, k).map_err(err)?;
        println!("lambda\t{lambda}");
        println!("ell\t{}", ell_for(nu, k, &lambda));
        let family = ell_cover_power(&a, nu, k, &lambda).map_err(err)?;
        (
            StructuredSpace::new(vec![Factor::Power { space: a, nu }]),
            family,
        )
    } else {
        return Err("give either --cube with --rho, or --zeta with --nu".into());
    };
    let report = verify_coverage(&space, &family).map_err(err)?;
    print_family(&space, &family, &report, dump);
    Ok(if report.complete() { 0 } else { EXIT_MISMATCH })
}

fn check(
    threads: usize,
    k: usize,
    n: usize,
    m: usize,
    seeds: std::ops::Range<u64>,
    mode: Mode,
) -> Result<u8, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let results: Vec<Result<(u64, bool, bool), String>> = pool.install(|| {
        seeds
            .into_par_iter()
            .map(|seed| {
                let f = random_kcnf(k, n, m, seed).map_err(err)?;
                let want = brute_force_sat(&f).map_err(err)?.is_some();
                let got = run_mode(&f, mode, None, false).map_err(err)?;
                Ok((seed, want, got.is_sat()))
            })
            .collect()
    });
    let (mut agree, mut sat, mut total) = (0, 0, 0);
    for r in results {
        let (seed, want, got) = r?;
        total += 1;
        sat += usize::from(want);
        if want == got {
            agree += 1;
        } else {
            eprintln!(
                "disagreement: seed {seed}: oracle {want}, {} {got}",
                mode.name()
            );
        }
    }
    println!("agree\t{agree}/{total}\tsat\t{sat}");
    Ok(if agree == total { 0 } else { EXIT_MISMATCH })
}
