//! `compmodels`: run, translate and cross-check machines, recursive functions
//! and λ-terms.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use compmodels::equiv::{equiv_grid_with, point_text, EquivOptions, Grid, DEFAULT_FUEL};
use compmodels::formats::{
    parse_lam, parse_lam_in, parse_prf, parse_tm, print_lam, print_machine, print_machine_with, print_prf,
    print_term, print_tm, FormatError, Kind, LamFile, PrfFile, TmFile,
};
use compmodels::lambda::{beta_step, normalize, numeral_value, Normalized, Term};
use compmodels::lambda_to_tm::{build_machine, render_term, SuiteMachine};
use compmodels::prf::{arity_check, EvalError, EvalOptions, Evaluator, Nat, PrfExpr};
use compmodels::prf_to_lambda::compile_prf_to_lambda;
use compmodels::prf_to_tm::{compile_prf_to_tm, layout_report};
use compmodels::tm::{decode_unary, run_tapes, unary, validate_machine, Machine, Verdict};
use compmodels::tm_to_prf::compile_tm_to_prf;
use compmodels::tm_transform::{
    dfa_accepts, nd_run, nfa_accepts, recode_binary, to_single_tape, to_single_tape_numeric, NdVerdict,
};
use compmodels::ValidationError;

const OK: u8 = 0;
const NO: u8 = 1;
const FUEL: u8 = 2;
const INVALID: u8 = 3;

/// Large translated expressions nest deeply.
const MAIN_STACK: usize = 1 << 30;

#[derive(Parser)]
#[command(name = "compmodels", version, about = "Turing machines, recursive functions and λ-terms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Tm,
    Prf,
    Lam,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Tm,
    Prf,
    Lam,
    TmSuite,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a machine, function or term.
    Run {
        model: Model,
        file: PathBuf,
        /// Input word, once per leading tape.
        #[arg(long)]
        input: Vec<String>,
        /// Numeric arguments.
        #[arg(long, num_args = 1..)]
        args: Vec<u64>,
        /// Arguments applied to the term, in `.lam` syntax.
        #[arg(long)]
        apply: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long)]
        trace: bool,
    },
    /// Translate between models.
    Compile {
        #[arg(long)]
        from: Model,
        #[arg(long)]
        to: Target,
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        out: PathBuf,
    },
    /// Machine transformations.
    Transform {
        #[arg(long, required_unless_present = "nd_run", conflicts_with = "nd_run")]
        single_tape: bool,
        #[arg(long)]
        nd_run: bool,
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Largest number of tree nodes the search visits.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        node_fuel: u64,
        #[arg(short = 'o', long = "output")]
        out: Option<PathBuf>,
    },
    /// Compare one function across all three models on a grid.
    Equiv {
        #[arg(long)]
        prf: PathBuf,
        #[arg(long)]
        tm: PathBuf,
        #[arg(long)]
        lam: PathBuf,
        /// Argument range `A..B`, inclusive.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Fuel for the round-trip column; defaults to a multiple of `--fuel`.
        #[arg(long)]
        roundtrip_fuel: Option<u64>,
        /// Skip the round-trip column.
        #[arg(long)]
        no_roundtrip: bool,
    },
    /// Parse and validate a file.
    Check { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let worker = std::thread::Builder::new().stack_size(MAIN_STACK).spawn(move || dispatch(cli.cmd));
    let result = match worker {
        Ok(h) => h.join().unwrap_or_else(|_| Err(anyhow!("internal error"))),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Run { model: Model::Tm, file, input, args, fuel, trace, .. } => run_tm(&file, &input, &args, fuel, trace),
        Cmd::Run { model: Model::Prf, file, args, fuel, trace, .. } => run_prf(&file, &args, fuel, trace),
        Cmd::Run { model: Model::Lam, file, apply, fuel, trace, .. } => run_lam(&file, apply.as_deref(), fuel, trace),
        Cmd::Compile { from, to, file, out } => compile(from, to, &file, &out),
        Cmd::Transform { nd_run: true, file, input, depth, node_fuel, .. } => transform_nd(&file, &input, depth, node_fuel),
        Cmd::Transform { file, out, .. } => transform_single(&file, out.as_deref()),
        Cmd::Equiv { prf, tm, lam, grid, fuel, roundtrip_fuel, no_roundtrip } => {
            let mut opts = EquivOptions::new(fuel);
            if let Some(f) = roundtrip_fuel {
                opts.roundtrip_fuel = f;
            }
            opts.roundtrip = !no_roundtrip;
            equiv(&prf, &tm, &lam, &grid, opts)
        }
        Cmd::Check { file } => check(&file),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: FormatError) -> anyhow::Error {
    match e {
        FormatError::Parse(p) => anyhow!("{}:{}:{}: {}", path.display(), p.line, p.column, p.message),
        FormatError::Validation(v) => anyhow!("{}: {v}", path.display()),
    }
}

fn load_tm(path: &Path) -> Result<TmFile> {
    let text = read(path)?;
    let f = parse_tm(&text).map_err(|e| located(path, e.into()))?;
    match &f {
        TmFile::Machine(_) => {}
        TmFile::Dfa(d) => d.validate().map_err(|e| located(path, e.into()))?,
        TmFile::Nfa(n) => n.validate().map_err(|e| located(path, e.into()))?,
    }
    Ok(f)
}

fn load_machine(path: &Path) -> Result<Machine> {
    match load_tm(path)? {
        TmFile::Machine(spec) => validate_machine(spec).map_err(|e| located(path, e.into())),
        _ => bail!("{}: expected a Turing machine, found an automaton", path.display()),
    }
}

fn load_prf(path: &Path) -> Result<(String, PrfExpr)> {
    let f = parse_prf(&read(path)?).map_err(|e| located(path, e))?;
    let name = match (&f.main, f.defs.last()) {
        (None, Some((n, _))) => n.clone(),
        _ => stem(path),
    };
    let e = f.entry().ok_or_else(|| anyhow!("{}: no function defined", path.display()))?;
    Ok((name, e))
}

fn load_lam(path: &Path) -> Result<(LamFile, Term)> {
    let f = parse_lam(&read(path)?).map_err(|e| located(path, e.into()))?;
    let t = f.entry().ok_or_else(|| anyhow!("{}: no term defined", path.display()))?;
    Ok((f, t))
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("main").to_string()
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Accept => OK,
        Verdict::Reject => NO,
        Verdict::FuelExhausted => FUEL,
    }
}

fn run_tm(path: &Path, input: &[String], args: &[u64], fuel: u64, trace: bool) -> Result<u8> {
    let m = match load_tm(path)? {
        TmFile::Machine(spec) => validate_machine(spec).map_err(|e| located(path, e.into()))?,
        automaton => {
            if input.len() > 1 || !args.is_empty() {
                bail!("an automaton takes a single --input word");
            }
            let w = input.first().map(String::as_str).unwrap_or("");
            let yes = match &automaton {
                TmFile::Dfa(d) => dfa_accepts(d, w)?,
                TmFile::Nfa(n) => nfa_accepts(n, w)?,
                TmFile::Machine(_) => unreachable!(),
            };
            println!("{}", if yes { "Accept" } else { "Reject" });
            return Ok(if yes { OK } else { NO });
        }
    };
    if !input.is_empty() && !args.is_empty() {
        bail!("give either --input or --args, not both");
    }
    let numeric = !args.is_empty();
    let words: Vec<String> = if numeric { args.iter().map(|&a| unary(a)).collect() } else { input.to_vec() };
    if !m.is_deterministic() {
        if words.len() > 1 || m.tapes() > 1 {
            bail!("nondeterministic runs take one tape");
        }
        let w = words.first().map(String::as_str).unwrap_or("");
        return Ok(match nd_run(&m, w, usize::try_from(fuel).unwrap_or(usize::MAX), fuel)? {
            NdVerdict::Accept(a) => {
                let digits: Vec<String> = a.0.iter().map(|d| d.to_string()).collect();
                println!("Accept");
                println!("branch: {}", digits.join("."));
                OK
            }
            NdVerdict::NotFound => {
                println!("NotFound");
                NO
            }
        });
    }
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let out = run_tapes(&m, &refs, fuel, trace)?;
    if let Some(t) = &out.trace {
        for (i, c) in t.iter().enumerate() {
            eprintln!("{i}: {}", c.render(&m));
        }
    }
    let tape = out.final_config.tape_string(&m, m.output_tape());
    println!("{}", out.verdict);
    if out.verdict == Verdict::Accept && numeric {
        match decode_unary(&tape) {
            Some(n) => println!("{n}"),
            None => {
                println!("output tape holds {tape:?}, not a unary numeral");
                return Ok(NO);
            }
        }
    } else {
        println!("tape: {tape}");
    }
    Ok(verdict_code(out.verdict))
}

fn run_prf(path: &Path, args: &[u64], fuel: u64, trace: bool) -> Result<u8> {
    let (name, e) = load_prf(path)?;
    let k = arity_check(&e)?;
    if args.len() != k {
        bail!("{name} takes {k} arguments, got {}", args.len());
    }
    let nats: Vec<Nat> = args.iter().map(|&a| Nat::from_u64(a)).collect();
    let mut ev = Evaluator::new(EvalOptions::new(fuel));
    let result = ev.eval(&e, &nats).and_then(|v| v.to_big());
    if trace {
        eprintln!("fuel used: {}", ev.fuel_used());
    }
    match result {
        Ok(v) => {
            println!("{v}");
            Ok(OK)
        }
        Err(EvalError::FuelExhausted) => {
            println!("FuelExhausted");
            Ok(FUEL)
        }
        Err(e) => Err(e.into()),
    }
}

fn show_term(t: &Term) -> String {
    match numeral_value(t) {
        Some(n) => format!("#{n}"),
        None => print_term(t),
    }
}

fn run_lam(path: &Path, apply: Option<&str>, fuel: u64, trace: bool) -> Result<u8> {
    let (file, mut t) = load_lam(path)?;
    if let Some(a) = apply {
        const ENTRY: &str = "entry'";
        let mut scope = file.defs.clone();
        scope.push((ENTRY.to_string(), t));
        let parsed = parse_lam_in(&format!("{ENTRY} {a}"), &scope).map_err(|e| anyhow!("--apply: {e}"))?;
        t = parsed.main.ok_or_else(|| anyhow!("--apply: expected a term"))?;
    }
    if trace {
        let mut cur = t;
        for i in 0..=fuel {
            eprintln!("{i}: {}", print_term(&cur));
            match beta_step(&cur) {
                None => {
                    println!("{}", show_term(&cur));
                    return Ok(OK);
                }
                Some(next) if i < fuel => cur = next,
                Some(_) => break,
            }
        }
        println!("FuelExhausted");
        return Ok(FUEL);
    }
    match normalize(&t, fuel) {
        Normalized::NormalForm { term, .. } => {
            println!("{}", show_term(&term));
            Ok(OK)
        }
        Normalized::FuelExhausted(_) => {
            println!("FuelExhausted");
            Ok(FUEL)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// A single-tape machine over `{_, 0, 1}` computing the same numeric function.
fn binary_single_tape(m: &Machine) -> Result<Machine, ValidationError> {
    let single = if m.tapes() > 1 { to_single_tape_numeric(m)? } else { m.clone() };
    if single.glyphs().iter().all(|c| "_01".contains(*c)) {
        Ok(single)
    } else {
        recode_binary(&single)
    }
}

fn compile(from: Model, to: Target, path: &Path, out: &Path) -> Result<u8> {
    match (from, to) {
        (Model::Prf, Target::Tm) => {
            let (_, e) = load_prf(path)?;
            let c = compile_prf_to_tm(&e)?;
            let notes: Vec<String> = layout_report(&c).lines().map(String::from).collect();
            write(out, &print_machine_with(&c.spec, &notes))?;
        }
        (Model::Prf, Target::Lam) => {
            let (name, e) = load_prf(path)?;
            let t = compile_prf_to_lambda(&e)?;
            write(out, &print_lam(&LamFile { defs: vec![(name, t)], main: None }))?;
        }
        (Model::Prf, Target::Prf) => {
            let (name, e) = load_prf(path)?;
            write(out, &print_prf(&PrfFile::from_expr(&name, &e)))?;
        }
        (Model::Tm, Target::Tm) => write(out, &print_tm(&load_tm(path)?))?,
        (Model::Tm, Target::Prf) => {
            let m = load_machine(path)?;
            let e = compile_tm_to_prf(&binary_single_tape(&m)?)?;
            write(out, &print_prf(&PrfFile::from_expr(&stem(path), &e)))?;
        }
        (Model::Lam, Target::Lam) => {
            let (file, _) = load_lam(path)?;
            write(out, &print_lam(&file))?;
        }
        (Model::Lam, Target::TmSuite) => {
            let (_, t) = load_lam(path)?;
            fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
            write(&out.join("term.wire"), &format!("{}\n", render_term(&t)))?;
            for which in SuiteMachine::ALL {
                let spec = build_machine(which);
                let notes = vec![format!("{which}: inputs {}", which.inputs())];
                write(&out.join(format!("{}.tm", which.name().to_lowercase())), &print_machine_with(&spec, &notes))?;
            }
        }
        (Model::Lam, Target::Tm) => bail!("a λ-term compiles to a suite of reduction machines; use --to tm-suite"),
        (Model::Lam, Target::Prf) => bail!("no direct translation from λ-terms to recursive functions"),
        (Model::Tm, Target::Lam) => bail!("no direct translation from machines to λ-terms; compile to prf first"),
        (_, Target::TmSuite) => bail!("--to tm-suite takes a λ-term"),
    }
    Ok(OK)
}

fn transform_single(path: &Path, out: Option<&Path>) -> Result<u8> {
    let m = load_machine(path)?;
    let text = print_machine(to_single_tape(&m)?.spec());
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(OK)
}

fn transform_nd(path: &Path, input: &str, depth: usize, node_fuel: u64) -> Result<u8> {
    let m = load_machine(path)?;
    Ok(match nd_run(&m, input, depth, node_fuel)? {
        NdVerdict::Accept(a) => {
            let digits: Vec<String> = a.0.iter().map(|d| d.to_string()).collect();
            println!("Accept");
            println!("branch: {}", digits.join("."));
            OK
        }
        NdVerdict::NotFound => {
            println!("NotFound");
            NO
        }
    })
}

fn parse_grid(s: &str) -> Result<(u64, u64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("grid must look like A..B, got {s:?}"))?;
    let lo = a.trim().parse().with_context(|| format!("bad grid bound {a:?}"))?;
    let hi = b.trim().parse().with_context(|| format!("bad grid bound {b:?}"))?;
    if lo > hi {
        bail!("empty grid {s}");
    }
    Ok((lo, hi))
}

fn equiv(prf: &Path, tm: &Path, lam: &Path, grid: &str, opts: EquivOptions) -> Result<u8> {
    let (name, e) = load_prf(prf)?;
    let m = load_machine(tm)?;
    let (_, t) = load_lam(lam)?;
    let (lo, hi) = parse_grid(grid)?;
    let k = arity_check(&e)?;
    let mut report = equiv_grid_with(&e, &m, &t, &Grid::new(lo, hi, k), opts)?;
    report.function = name;
    print!("{}", report.serialize());
    if let Some(c) = report.counterexample() {
        let parts: Vec<String> = c.results.iter().map(|(m, o)| format!("{}={o}", m.name())).collect();
        eprintln!("counterexample {}: {}", point_text(&c.point), parts.join(", "));
        return Ok(NO);
    }
    Ok(if report.all_agree() { OK } else { FUEL })
}

fn check(path: &Path) -> Result<u8> {
    let kind = Kind::from_path(path).ok_or_else(|| anyhow!("{}: unknown extension", path.display()))?;
    match kind {
        Kind::Tm => match load_tm(path)? {
            TmFile::Machine(spec) => {
                let m = validate_machine(spec).map_err(|e| located(path, e.into()))?;
                let det = if m.is_deterministic() { "deterministic" } else { "nondeterministic" };
                println!("ok: {det} machine, {} tapes, {} states", m.tapes(), m.state_count());
            }
            TmFile::Dfa(d) => println!("ok: dfa, {} states", d.states.len()),
            TmFile::Nfa(n) => println!("ok: nfa, {} states", n.states.len()),
        },
        Kind::Prf => {
            let f = parse_prf(&read(path)?).map_err(|e| located(path, e))?;
            let entry = f.entry().ok_or_else(|| anyhow!("{}: no function defined", path.display()))?;
            println!("ok: {} definitions, entry of arity {}", f.defs.len(), arity_check(&entry)?);
        }
        Kind::Lam => {
            let (f, t) = load_lam(path)?;
            let closed = if t.is_closed() { "closed" } else { "open" };
            println!("ok: {} definitions, {closed} entry of size {}", f.defs.len(), t.size());
        }
    }
    Ok(OK)
}
