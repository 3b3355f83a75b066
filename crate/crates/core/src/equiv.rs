//! Cross-checking one function in every model over a grid of arguments.

use std::fmt;

use num_bigint::BigUint;

use crate::error::ValidationError;
use crate::lambda::{church_decode, DecodeError, Term};
use crate::prf::{arity_check, EvalError, EvalOptions, Evaluator, Nat, PrfExpr, PrfNode};
use crate::prf_to_lambda::apply_numerals;
use crate::tm::{run_numeric, Machine, NumericError};
use crate::tm_to_prf::compile_tm_to_prf;
use crate::tm_transform::{recode_binary, to_single_tape_numeric};

/// Fuel used by each model when none is given.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// The round-trip column evaluates a far larger expression, so its budget is
/// the base fuel times this factor.
pub const ROUNDTRIP_FUEL_FACTOR: u64 = 100;

/// Long-running terms and expressions nest deeply.
const WORKER_STACK: usize = 1 << 30;

/// Every point of `[lo..hi]^arity`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub lo: u64,
    pub hi: u64,
    pub arity: usize,
}

impl Grid {
    pub fn new(lo: u64, hi: u64, arity: usize) -> Grid {
        Grid { lo, hi, arity }
    }

    pub fn points(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.arity {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (self.lo..=self.hi).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        if self.lo > self.hi {
            out.clear();
        }
        out
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]^{}", self.lo, self.hi, self.arity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Model {
    Prf,
    Tm,
    Lam,
    Roundtrip,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Prf => "prf",
            Model::Tm => "tm",
            Model::Lam => "lam",
            Model::Roundtrip => "roundtrip",
        }
    }
}

/// What one model produced at one point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(BigUint),
    FuelExhausted,
    Error(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(v) => write!(f, "{v}"),
            Outcome::FuelExhausted => write!(f, "fuel"),
            Outcome::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointVerdict {
    Agree,
    Disagree,
    /// No two values differ, but some model ran out of fuel.
    Inconclusive(u64),
}

impl fmt::Display for PointVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointVerdict::Agree => write!(f, "agree"),
            PointVerdict::Disagree => write!(f, "disagree"),
            PointVerdict::Inconclusive(n) => write!(f, "inconclusive({n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointResult {
    pub point: Vec<u64>,
    pub results: Vec<(Model, Outcome)>,
    pub verdict: PointVerdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub agree: usize,
    pub disagree: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivReport {
    pub function: String,
    pub grid: Grid,
    pub models: Vec<Model>,
    pub points: Vec<PointResult>,
    pub summary: Summary,
}

impl EquivReport {
    /// The disagreeing point with the smallest coordinate sum.
    pub fn counterexample(&self) -> Option<&PointResult> {
        self.points
            .iter()
            .filter(|p| p.verdict == PointVerdict::Disagree)
            .min_by_key(|p| (p.point.iter().sum::<u64>(), p.point.clone()))
    }

    pub fn all_agree(&self) -> bool {
        self.summary.disagree == 0 && self.summary.inconclusive == 0
    }

    /// Plain table, summary, then one `point;model;value` line per result.
    pub fn serialize(&self) -> String {
        let mut header = vec!["point".to_string()];
        header.extend(self.models.iter().map(|m| m.name().to_string()));
        header.push("verdict".to_string());
        let mut rows = vec![header];
        for p in &self.points {
            let mut row = vec![point_text(&p.point)];
            row.extend(p.results.iter().map(|(_, o)| o.to_string()));
            row.push(p.verdict.to_string());
            rows.push(row);
        }
        let widths: Vec<usize> =
            (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
        let mut s = format!("function: {}\ngrid: {}\n", self.function, self.grid);
        for r in &rows {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s.push_str(&format!(
            "summary: {} agree, {} disagree, {} inconclusive\n",
            self.summary.agree, self.summary.disagree, self.summary.inconclusive
        ));
        if let Some(c) = self.counterexample() {
            s.push_str(&format!("counterexample: {}\n", point_text(&c.point)));
        }
        for p in &self.points {
            for (m, o) in &p.results {
                s.push_str(&format!("{};{};{}\n", point_text(&p.point), m.name(), o));
            }
        }
        s
    }
}

/// A grid point as `(a,b,…)`.
pub fn point_text(p: &[u64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Per-model fuel budgets.
#[derive(Clone, Copy, Debug)]
pub struct EquivOptions {
    pub prf_fuel: u64,
    pub tm_fuel: u64,
    pub lam_fuel: u64,
    pub roundtrip_fuel: u64,
    /// Whether to run the round-trip column for unary functions.
    pub roundtrip: bool,
}

impl EquivOptions {
    pub fn new(fuel: u64) -> EquivOptions {
        EquivOptions {
            prf_fuel: fuel,
            tm_fuel: fuel,
            lam_fuel: fuel,
            roundtrip_fuel: fuel.saturating_mul(ROUNDTRIP_FUEL_FACTOR),
            roundtrip: true,
        }
    }
}

impl Default for EquivOptions {
    fn default() -> EquivOptions {
        EquivOptions::new(DEFAULT_FUEL)
    }
}

fn eval_prf(e: &PrfExpr, args: &[u64], fuel: u64) -> Outcome {
    let nats: Vec<Nat> = args.iter().map(|&a| Nat::from_u64(a)).collect();
    match Evaluator::new(EvalOptions::new(fuel)).eval(e, &nats).and_then(|v| v.to_big()) {
        Ok(v) => Outcome::Value(v),
        Err(EvalError::FuelExhausted) => Outcome::FuelExhausted,
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Runs `prf`, `tm` and `lam` on every point of `grid` and compares them.
pub fn equiv_grid(prf: &PrfExpr, tm: &Machine, lam: &Term, grid: &Grid, fuel: u64) -> Result<EquivReport, ValidationError> {
    equiv_grid_with(prf, tm, lam, grid, EquivOptions::new(fuel))
}

pub fn equiv_grid_with(
    prf: &PrfExpr,
    tm: &Machine,
    lam: &Term,
    grid: &Grid,
    opts: EquivOptions,
) -> Result<EquivReport, ValidationError> {
    let k = arity_check(prf)?;
    if k != grid.arity {
        return Err(ValidationError::new(format!("function has arity {k}, grid has {}", grid.arity)));
    }
    if tm.tapes() <= k {
        return Err(ValidationError::new(format!("a machine for {k} arguments needs more than {} tapes", tm.tapes())));
    }
    let mut models = vec![Model::Prf, Model::Tm, Model::Lam];
    let roundtrip = if k == 1 && opts.roundtrip {
        models.push(Model::Roundtrip);
        Some(to_single_tape_numeric(tm).and_then(|s| recode_binary(&s)).and_then(|b| compile_tm_to_prf(&b)))
    } else {
        None
    };
    let roundtrip = roundtrip.as_ref().map(|r| r.as_ref());
    let all = grid.points();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(all.len().max(1));
    let chunk = all.len().div_ceil(workers).max(1);
    let points: Vec<PointResult> = std::thread::scope(|s| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|ps| {
                std::thread::Builder::new()
                    .stack_size(WORKER_STACK)
                    .spawn_scoped(s, move || {
                        ps.iter().map(|p| check_point(prf, tm, lam, roundtrip, p, &opts)).collect::<Vec<_>>()
                    })
                    .expect("cannot spawn grid worker")
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("grid worker panicked")).collect()
    });
    let mut summary = Summary::default();
    for p in &points {
        match p.verdict {
            PointVerdict::Agree => summary.agree += 1,
            PointVerdict::Disagree => summary.disagree += 1,
            PointVerdict::Inconclusive(_) => summary.inconclusive += 1,
        }
    }
    Ok(EquivReport { function: function_name(prf), grid: grid.clone(), models, points, summary })
}

fn check_point(
    prf: &PrfExpr,
    tm: &Machine,
    lam: &Term,
    roundtrip: Option<Result<&PrfExpr, &ValidationError>>,
    point: &[u64],
    opts: &EquivOptions,
) -> PointResult {
    let mut results = vec![(Model::Prf, eval_prf(prf, point, opts.prf_fuel))];
    let tm_out = match run_numeric(tm, point, opts.tm_fuel) {
        Ok(v) => Outcome::Value(v.into()),
        Err(NumericError::FuelExhausted) => Outcome::FuelExhausted,
        Err(e) => Outcome::Error(e.to_string()),
    };
    results.push((Model::Tm, tm_out));
    let lam_out = match church_decode(&apply_numerals(lam, point), opts.lam_fuel) {
        Ok(v) => Outcome::Value(v.into()),
        Err(DecodeError::FuelExhausted) => Outcome::FuelExhausted,
        Err(e) => Outcome::Error(e.to_string()),
    };
    results.push((Model::Lam, lam_out));
    match roundtrip {
        Some(Ok(rt)) => results.push((Model::Roundtrip, eval_prf(rt, point, opts.roundtrip_fuel))),
        Some(Err(e)) => results.push((Model::Roundtrip, Outcome::Error(e.0.clone()))),
        None => {}
    }
    let values: Vec<&Outcome> = results.iter().map(|(_, o)| o).filter(|o| matches!(o, Outcome::Value(_))).collect();
    let verdict = if values.windows(2).any(|w| w[0] != w[1]) {
        PointVerdict::Disagree
    } else if values.len() < results.len() {
        let fuel = results
            .iter()
            .filter(|(_, o)| !matches!(o, Outcome::Value(_)))
            .map(|(m, _)| match m {
                Model::Prf => opts.prf_fuel,
                Model::Tm => opts.tm_fuel,
                Model::Lam => opts.lam_fuel,
                Model::Roundtrip => opts.roundtrip_fuel,
            })
            .min()
            .unwrap_or(0);
        PointVerdict::Inconclusive(fuel)
    } else {
        PointVerdict::Agree
    };
    PointResult { point: point.to_vec(), results, verdict }
}

/// The name of a named function, or its text.
pub fn function_name(e: &PrfExpr) -> String {
    match e.node() {
        PrfNode::Named(n) => n.name.to_string(),
        _ => e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::stdlib;
    use crate::prf_to_lambda::compile_prf_to_lambda;
    use crate::prf_to_tm::compile_prf_to_tm;

    fn report(e: &PrfExpr, grid: Grid, opts: EquivOptions) -> EquivReport {
        let tm = compile_prf_to_tm(e).unwrap().machine;
        let lam = compile_prf_to_lambda(e).unwrap();
        equiv_grid_with(e, &tm, &lam, &grid, opts).unwrap()
    }

    #[test]
    fn add_agrees() {
        let r = report(&stdlib::add(), Grid::new(0, 4, 2), EquivOptions::default());
        assert_eq!(r.summary, Summary { agree: 25, disagree: 0, inconclusive: 0 });
        assert_eq!(r.function, "add");
        let s = r.serialize();
        assert!(s.contains("(2,3);lam;5\n"));
        assert_eq!(s, r.serialize());
    }

    #[test]
    fn divergence_is_inconclusive() {
        let e = PrfExpr::mu(stdlib::const_k(1, 2));
        let mut opts = EquivOptions::new(20_000);
        opts.roundtrip = false;
        let r = report(&e, Grid::new(0, 0, 1), opts);
        assert_eq!(r.summary.inconclusive, 1);
        assert!(r.points[0].results.iter().all(|(_, o)| *o == Outcome::FuelExhausted));
    }

    #[test]
    fn wrong_machine_disagrees() {
        let add = stdlib::add();
        let tm = compile_prf_to_tm(&stdlib::mul()).unwrap().machine;
        let lam = compile_prf_to_lambda(&add).unwrap();
        let r = equiv_grid(&add, &tm, &lam, &Grid::new(0, 2, 2), 100_000).unwrap();
        assert!(r.summary.disagree > 0);
        assert_eq!(r.counterexample().unwrap().point, vec![0, 1]);
        assert!(r.serialize().contains("counterexample: (0,1)"));
    }

    #[test]
    fn model_failures_are_inconclusive() {
        let pred = stdlib::pred();
        let mut spec = crate::tm::MachineSpec::new(2, "01", "01_");
        spec.state("q").initial = "q".into();
        let tm = crate::tm::validate_machine(spec).unwrap();
        let lam = compile_prf_to_lambda(&pred).unwrap();
        let opts = EquivOptions { roundtrip: false, ..EquivOptions::default() };
        let r = equiv_grid_with(&pred, &tm, &lam, &Grid::new(1, 1, 1), opts).unwrap();
        assert!(matches!(r.points[0].results[1].1, Outcome::Error(_)));
        assert_eq!(r.summary.inconclusive, 1);
    }
}
