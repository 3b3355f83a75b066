use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use compmodels::equiv::{equiv_grid_with, EquivOptions, Grid};
use compmodels::formats::*;
use compmodels::lambda::*;
use compmodels::lambda_to_tm::*;
use compmodels::prf::stdlib as lib;
use compmodels::prf::*;
use compmodels::prf_to_lambda::*;
use compmodels::prf_to_tm::compile_prf_to_tm;
use compmodels::tm::*;
use compmodels::tm_to_prf::compile_tm_to_prf;
use compmodels::tm_transform::*;

const STEP_LIMIT_ONON: u64 = 1_000;
const COPIER_MAX_LEN: usize = 6;
const COPIER_BUDGET: Duration = Duration::from_secs(5);
const ND_DEPTH: usize = 12;
const ND_MAX_LEN: usize = 5;
const STDLIB_RANGE: u64 = 8;
const PURE_FUEL: u64 = 2_000_000;
const ACK_X: u64 = 5;
const ACK_N: u64 = 3;
const CONFLUENCE_SIZE: usize = 11;
const CONFLUENCE_FUEL: u64 = 1_000;
const FIXED_POINT_SAMPLES: usize = 20;
const EQUIV_BUDGET: Duration = Duration::from_secs(60);
const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(120);
const ROUNDTRIP_FUEL: u64 = 100_000_000;
const SUITE_CORPUS: usize = 50;
const SUITE_SIZE: usize = 6;
const SUITE_FUEL: u64 = 1_000;
const DIVERGE_FUEL: u64 = 20_000;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn words(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut level = vec![String::new()];
    for _ in 0..max_len {
        level = level.iter().flat_map(|w| [format!("{w}0"), format!("{w}1")]).collect();
        out.extend(level.iter().cloned());
    }
    out
}

fn onon() -> Result<String, String> {
    let m = zeros_ones_machine();
    let mut worst = 0;
    let cases = [("", true), ("01", true), ("0011", true), ("000111", true)]
        .into_iter()
        .chain(["0", "1", "10", "0101", "001", "011"].map(|w| (w, false)));
    for (w, accept) in cases {
        let o = run(&m, w, STEP_LIMIT_ONON - 1, false).map_err(|e| e.to_string())?;
        let want = if accept { Verdict::Accept } else { Verdict::Reject };
        ensure(o.verdict == want, || format!("{w:?}: {} instead of {want}", o.verdict))?;
        worst = worst.max(o.final_config.steps);
    }
    Ok(format!("10 inputs, at most {worst} steps"))
}

fn copier() -> Result<String, String> {
    let start = Instant::now();
    let m = copier_machine();
    let s = to_single_tape(&m).map_err(|e| e.to_string())?;
    let inputs = words(COPIER_MAX_LEN);
    for w in &inputs {
        let a = run(&m, w, 100_000, false).unwrap();
        let b = run(&s, w, 10_000_000, false).unwrap();
        ensure(a.verdict == b.verdict, || format!("{w:?}: {} vs {}", a.verdict, b.verdict))?;
        let tapes: Vec<String> = (0..m.tapes()).map(|i| a.final_config.tape_string(&m, i)).collect();
        let got = decode_layout(&s, &b.final_config);
        ensure(got == tapes, || format!("{w:?}: tapes {got:?} vs {tapes:?}"))?;
    }
    let t = start.elapsed();
    ensure(t < COPIER_BUDGET, || format!("took {t:?}"))?;
    Ok(format!("{} inputs in {:.2}s", inputs.len(), t.as_secs_f64()))
}

/// Shortest, then lexicographically least, accepting branch sequence.
fn brute_force(m: &Machine, c: &Configuration, path: &mut Vec<u32>, depth: usize, best: &mut Option<Vec<u32>>) {
    if m.is_accept(c.state) {
        let better = match best {
            None => true,
            Some(b) => (path.len(), &*path) < (b.len(), &*b),
        };
        if better {
            *best = Some(path.clone());
        }
        return;
    }
    if path.len() == depth {
        return;
    }
    let ts = m.targets(c.state, &c.scanned()).to_vec();
    for (i, t) in ts.iter().enumerate() {
        let mut next = c.clone();
        if apply_target(m, &mut next, t) {
            path.push(i as u32 + 1);
            brute_force(m, &next, path, depth, best);
            path.pop();
        }
    }
}

fn nd_guesser() -> Result<String, String> {
    let m = contains_11_machine();
    let inputs = words(ND_MAX_LEN);
    let mut accepted = 0;
    for w in &inputs {
        let syms: Vec<Sym> = w.chars().map(|ch| m.sym(ch).unwrap()).collect();
        let init = Configuration::initial(&m, &[syms]);
        let mut best = None;
        brute_force(&m, &init, &mut Vec::new(), ND_DEPTH, &mut best);
        let got = nd_run(&m, w, ND_DEPTH, u64::MAX).map_err(|e| e.to_string())?;
        let want = match best {
            Some(p) => {
                accepted += 1;
                NdVerdict::Accept(AddressString(p))
            }
            None => NdVerdict::NotFound,
        };
        ensure(got == want, || format!("{w:?}: {got:?} vs brute force {want:?}"))?;
        ensure(matches!(got, NdVerdict::Accept(_)) == w.contains("11"), || format!("{w:?}: wrong language"))?;
    }
    Ok(format!("{} inputs, {accepted} accepted, addresses identical", inputs.len()))
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).all(|d| n % d != 0)
}

/// Evaluates without shortcuts when that fits in `PURE_FUEL`, otherwise with them.
fn eval_checked(e: &PrfExpr, args: &[u64], pure_count: &mut usize) -> Result<BigUint, String> {
    let a: Vec<BigUint> = args.iter().map(|&x| big(x)).collect();
    match eval_with(e, &a, EvalOptions::pure(PURE_FUEL)) {
        Ok(v) => {
            *pure_count += 1;
            Ok(v)
        }
        Err(EvalError::FuelExhausted) => eval(e, &a, u64::MAX).map_err(|e| e.to_string()),
        Err(e) => Err(e.to_string()),
    }
}

fn stdlib_and_ackermann() -> Result<String, String> {
    type Bin = fn(u64, u64) -> u64;
    let binary: [(&str, PrfExpr, Bin); 8] = [
        ("add", lib::add(), |x, y| x + y),
        ("mul", lib::mul(), |x, y| x * y),
        ("exp", lib::exp(), |x, y| x.pow(y as u32)),
        ("monus", lib::monus(), |x, y| x.saturating_sub(y)),
        ("absdiff", lib::absdiff(), |x, y| x.abs_diff(y)),
        ("eq", lib::eq(), |x, y| (x == y) as u64),
        ("lt", lib::lt(), |x, y| (x < y) as u64),
        ("divides", lib::divides(), |x, y| if x == 0 { (y == 0) as u64 } else { (y % x == 0) as u64 }),
    ];
    let unary: [(&str, PrfExpr, fn(u64) -> u64); 3] = [
        ("pred", lib::pred(), |x| x.saturating_sub(1)),
        ("sg", lib::sg(), |x| (x > 0) as u64),
        ("prime", lib::prime(), |x| is_prime(x) as u64),
    ];
    let (mut points, mut pure) = (0, 0);
    for (name, e, f) in &binary {
        for x in 0..=STDLIB_RANGE {
            for y in 0..=STDLIB_RANGE {
                let got = eval_checked(e, &[x, y], &mut pure)?;
                ensure(got == big(f(x, y)), || format!("{name}({x},{y}) = {got}"))?;
                points += 1;
            }
        }
    }
    for (name, e, f) in &unary {
        for x in 0..=STDLIB_RANGE {
            let got = eval_checked(e, &[x], &mut pure)?;
            ensure(got == big(f(x)), || format!("{name}({x}) = {got}"))?;
            points += 1;
        }
    }

    let relations: [(&str, PrfExpr); 3] = [
        (
            "y*y >= x",
            PrfExpr::compose(
                lib::lt(),
                vec![
                    PrfExpr::proj(2, 1),
                    PrfExpr::compose(
                        PrfExpr::succ(),
                        vec![PrfExpr::compose(lib::mul(), vec![PrfExpr::proj(2, 2), PrfExpr::proj(2, 2)])],
                    ),
                ],
            ),
        ),
        ("y = x", lib::eq()),
        (
            "y > 1 and y | x",
            lib::and(
                PrfExpr::compose(lib::lt(), vec![lib::const_k(1, 2), PrfExpr::proj(2, 2)]),
                PrfExpr::compose(lib::divides(), vec![PrfExpr::proj(2, 2), PrfExpr::proj(2, 1)]),
            ),
        ),
    ];
    let mut mu_points = 0;
    for (name, r) in &relations {
        let bm = lib::bounded_mu(r.clone()).map_err(|e| e.to_string())?;
        for x in 0..=STDLIB_RANGE {
            for n in 0..=STDLIB_RANGE {
                let scan = (0..=n)
                    .find(|&y| eval_u64(r, &[x, y], u64::MAX).unwrap() != big(0))
                    .unwrap_or(0);
                let got = eval_u64(&bm, &[x, n], u64::MAX).map_err(|e| e.to_string())?;
                ensure(got == big(scan), || format!("bounded_mu[{name}]({x},{n}) = {got}, scan {scan}"))?;
                mu_points += 1;
            }
        }
    }

    let a = |x: u64, n: u64| ackermann(x, n).map_err(|e| e.to_string());
    let mut triples = 0;
    for x in 0..=ACK_X {
        for n in 0..=ACK_N {
            ensure(a(x, n)? < a(x + 1, n)?, || format!("A({x},{n}) < A({},{n})", x + 1))?;
            triples += 1;
            if n < ACK_N || ackermann(x, n + 1).is_ok() {
                let up = a(x, n + 1)?;
                ensure(a(x, n)? < up, || format!("A({x},{n}) < A({x},{})", n + 1))?;
                ensure(a(x + 1, n)? <= up, || format!("A({},{n}) <= A({x},{})", x + 1, n + 1))?;
                triples += 2;
            }
        }
    }
    for x in 0..=3 {
        for n in 0..=2 {
            ensure(a(x, n)? == big(ackermann_by_equations(x, n)), || format!("A({x},{n}) differs from the equations"))?;
        }
    }
    ensure(a(2, 2)? == big(7), || "A(2,2) != 7".into())?;
    Ok(format!(
        "{points} stdlib points ({pure} without shortcuts), {mu_points} bounded_mu points, {triples} Ackermann inequalities, A(2,2) = 7"
    ))
}

fn random_term(rng: &mut StdRng, depth: u32) -> Term {
    const NAMES: [&str; 3] = ["x", "y", "z"];
    let name = NAMES[rng.gen_range(0..NAMES.len())];
    if depth == 0 {
        return Term::var(name);
    }
    match rng.gen_range(0..3) {
        0 => Term::var(name),
        1 => Term::lam(name, random_term(rng, depth - 1)),
        _ => Term::app(random_term(rng, depth - 1), random_term(rng, depth - 1)),
    }
}

fn lambda_core() -> Result<String, String> {
    let terms = closed_terms(CONFLUENCE_SIZE, &["x", "y"]);
    let (mut pairs, mut skipped) = (0, 0);
    for t in &terms {
        let paths = redex_paths(t);
        let nfs: Vec<Option<Term>> = paths
            .iter()
            .map(|p| normalize(&contract_at(t, p).unwrap(), CONFLUENCE_FUEL).normal_form().cloned())
            .collect();
        for i in 0..nfs.len() {
            for j in i + 1..nfs.len() {
                match (&nfs[i], &nfs[j]) {
                    (Some(a), Some(b)) => {
                        ensure(alpha_eq(a, b), || format!("{t:?}: redexes {:?} and {:?} diverge", paths[i], paths[j]))?;
                        pairs += 1;
                    }
                    _ => skipped += 1,
                }
            }
        }
    }

    for g in [Gadget::D, Gadget::Q, Gadget::R, Gadget::T, Gadget::P] {
        let r = recursion_gadget_check(g);
        ensure(r.all_equal(), || format!("{g:?}: {:?}", r.checks))?;
    }

    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..FIXED_POINT_SAMPLES {
        let f = random_term(&mut rng, 4);
        let x = fixed_point(&f);
        let stepped = beta_step(&x).ok_or("fixed point is normal")?;
        ensure(alpha_eq(&stepped, &Term::app(f.clone(), x.clone())), || format!("F = {f:?}"))?;
    }
    Ok(format!(
        "{} terms, {pairs} redex pairs joined ({skipped} over fuel), 5 gadgets Equal, {FIXED_POINT_SAMPLES} fixed points",
        terms.len()
    ))
}

fn four_way() -> Result<String, String> {
    let start = Instant::now();
    let opts = EquivOptions { roundtrip: false, ..EquivOptions::default() };
    let mut points = 0;
    for f in [PrfExpr::succ(), lib::add(), lib::mul(), lib::pred(), lib::monus()] {
        let tm = compile_prf_to_tm(&f).map_err(|e| e.to_string())?.machine;
        let lam = compile_prf_to_lambda(&f).map_err(|e| e.to_string())?;
        let grid = Grid::new(0, 3, f.arity());
        let r = equiv_grid_with(&f, &tm, &lam, &grid, opts.clone()).map_err(|e| e.to_string())?;
        ensure(r.summary.agree == r.points.len(), || r.serialize())?;
        points += r.points.len();
    }
    let t = start.elapsed();
    ensure(t < EQUIV_BUDGET, || format!("took {t:?}"))?;
    Ok(format!("5 functions, {points} points agree in {:.1}s", t.as_secs_f64()))
}

fn round_trip() -> Result<String, String> {
    let start = Instant::now();
    let tm = compile_prf_to_tm(&PrfExpr::succ()).map_err(|e| e.to_string())?.machine;
    let single = to_single_tape_numeric(&tm).map_err(|e| e.to_string())?;
    let binary = recode_binary(&single).map_err(|e| e.to_string())?;
    let back = compile_tm_to_prf(&binary).map_err(|e| e.to_string())?;
    for n in 0..=3 {
        let v = eval_u64(&back, &[n], ROUNDTRIP_FUEL).map_err(|e| format!("n = {n}: {e}"))?;
        ensure(v == big(n + 1), || format!("n = {n}: got {v}"))?;
    }
    let t = start.elapsed();
    ensure(t < ROUNDTRIP_BUDGET, || format!("took {t:?}"))?;
    Ok(format!("n = 0..3 map to n+1 in {:.1}s", t.as_secs_f64()))
}

fn machine_suite() -> Result<String, String> {
    let candidates: Vec<Term> = closed_terms(SUITE_SIZE, &["x", "y"])
        .into_iter()
        .filter(|t| !is_normal(t) && normalize(t, SUITE_FUEL).normal_form().is_some())
        .collect();
    ensure(candidates.len() >= SUITE_CORPUS, || format!("only {} candidates", candidates.len()))?;
    let stride = candidates.len() / SUITE_CORPUS;
    let corpus: Vec<&Term> = candidates.iter().step_by(stride).take(SUITE_CORPUS).collect();
    for t in &corpus {
        let host = normalize(t, SUITE_FUEL);
        let nf = host.normal_form().unwrap();
        let on_tm = reduce_on_tm(t, SUITE_FUEL).map_err(|e| format!("{t:?}: {e}"))?;
        ensure(alpha_eq(&on_tm, nf), || format!("{t:?}: {on_tm:?} vs {nf:?}"))?;

        let fresh = freshen(t);
        let (wire, mut table) = render_with(&fresh);
        let verdict = run_suite(SuiteMachine::NF, &[&wire], 1_000_000).map_err(|e| e.to_string())?;
        ensure((verdict == "1") == is_normal(&fresh), || format!("NF on {wire}"))?;
        let vars = variables_on_tm(&fresh).map_err(|e| e.to_string())?;
        ensure(vars == table, || format!("V on {wire}: {vars:?} vs {table:?}"))?;
        let stepped = run_suite(SuiteMachine::BR1, &[&wire], 10_000_000).map_err(|e| e.to_string())?;
        let want = render_using(&beta_step(&fresh).unwrap(), &mut table);
        ensure(stepped == want, || format!("BR1 on {wire}: {stepped} vs {want}"))?;
    }
    Ok(format!("{} terms: reduce_on_tm matches, NF/V/BR1 exact", corpus.len()))
}

fn divergence() -> Result<String, String> {
    let f = PrfExpr::mu(lib::const_k(1, 2));
    let tm = compile_prf_to_tm(&f).map_err(|e| e.to_string())?.machine;
    let lam = compile_prf_to_lambda(&f).map_err(|e| e.to_string())?;
    for n in 0..=2 {
        let p = eval_u64(&f, &[n], DIVERGE_FUEL);
        ensure(matches!(p, Err(EvalError::FuelExhausted)), || format!("prf at {n}: {p:?}"))?;
        let t = run_numeric(&tm, &[n], DIVERGE_FUEL);
        ensure(matches!(t, Err(NumericError::FuelExhausted)), || format!("tm at {n}: {t:?}"))?;
        let l = church_decode(&apply_numerals(&lam, &[n]), DIVERGE_FUEL);
        ensure(l == Err(DecodeError::FuelExhausted), || format!("lam at {n}: {l:?}"))?;
    }
    Ok(format!("FuelExhausted in all three models on n = 0..2 at fuel {DIVERGE_FUEL}"))
}

fn corpus(dir: &str) -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(dir);
    let mut v: Vec<PathBuf> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn formats() -> Result<String, String> {
    let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let mut machines = 0;
    for p in corpus("tm") {
        let parsed = parse_tm(&read(&p)?).map_err(|e| format!("{}: {e}", p.display()))?;
        let printed = print_tm(&parsed);
        ensure(parse_tm(&printed).as_ref() == Ok(&parsed), || format!("{}", p.display()))?;
        if matches!(parsed, TmFile::Machine(_)) {
            machines += 1;
        }
    }
    let mut defs = 0;
    for p in corpus("prf") {
        let parsed = parse_prf(&read(&p)?).map_err(|e| format!("{}: {e}", p.display()))?;
        let again = parse_prf(&print_prf(&parsed)).map_err(|e| format!("{}: {e}", p.display()))?;
        ensure(again == parsed, || format!("{}", p.display()))?;
        defs += parsed.defs.len();
    }
    let mut terms = 0;
    for p in corpus("lam") {
        let parsed = parse_lam(&read(&p)?).map_err(|e| format!("{}: {e}", p.display()))?;
        let printed = print_lam(&parsed);
        let again = parse_lam(&printed).map_err(|e| format!("{}: {e}", p.display()))?;
        ensure(print_lam(&again) == printed, || format!("{}", p.display()))?;
        let pairs = parsed.defs.iter().map(|d| &d.1).chain(&parsed.main).zip(again.defs.iter().map(|d| &d.1).chain(&again.main));
        for (a, b) in pairs {
            ensure(alpha_eq(a, b), || format!("{}", p.display()))?;
            terms += 1;
        }
    }
    ensure(machines >= 10 && defs >= 10 && terms >= 15, || format!("{machines} machines, {defs} defs, {terms} terms"))?;
    Ok(format!("{machines} machines, {defs} prf defs, {terms} λ-terms"))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("0^n1^n machine", onon),
        ("multitape fidelity", copier),
        ("nondeterministic simulation", nd_guesser),
        ("prf stdlib and Ackermann", stdlib_and_ackermann),
        ("lambda core", lambda_core),
        ("four-way equivalence", four_way),
        ("round trip", round_trip),
        ("lambda machine suite", machine_suite),
        ("divergence fidelity", divergence),
        ("format round trips", formats),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let worker = std::thread::Builder::new().stack_size(1 << 30).spawn(move || {
        let mut failed = 0;
        for (i, (name, check)) in checks.iter().enumerate() {
            if !only.is_empty() && !only.contains(&(i + 1)) {
                continue;
            }
            let start = Instant::now();
            let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
            let secs = start.elapsed().as_secs_f64();
            match result {
                Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
                Err(why) => {
                    failed += 1;
                    println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
                }
            }
        }
        failed
    });
    let failed = worker.unwrap().join().unwrap_or(1);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
