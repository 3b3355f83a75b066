//! Compiles partial recursive functions to multitape machines.
//!
//! Arguments arrive in unary on tapes `0..k`, the result is left on tape
//! `k` with its head on cell 1. Every other tape is scratch. After a short
//! start-up phase every tape holds a numeral starting at cell 1, and every
//! idle tape is parked just past its numeral.

use std::fmt::Write as _;

use crate::asm::{hover, Asm, Sid};
use crate::error::ValidationError;
use crate::prf::{arity_check, PrfExpr, PrfNode};
use crate::tm::{validate_machine, Machine, MachineSpec, Move, Rule, BLANK, MAX_TAPES};

use Move::R;

/// Tape roles of a compiled machine. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericLayout {
    pub arity: usize,
    pub args: Vec<usize>,
    pub output: usize,
    pub scratch: Vec<usize>,
}

impl NumericLayout {
    pub fn tapes(&self) -> usize {
        self.arity + 1 + self.scratch.len()
    }
}

/// A compiled function.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub spec: MachineSpec,
    pub machine: Machine,
    pub layout: NumericLayout,
    /// `(construct, entry state)` for each compiled sub-expression.
    pub regions: Vec<(String, String)>,
}

const ALPHABET: [char; 3] = [BLANK, '0', '1'];

struct Cx {
    asm: Asm,
    next_tape: usize,
    max_tape: usize,
    regions: Vec<(String, Sid)>,
}

fn nb(c: char) -> bool {
    c != BLANK
}

impl Cx {
    fn alloc(&mut self) -> Result<usize, ValidationError> {
        let t = self.next_tape;
        self.next_tape += 1;
        self.max_tape = self.max_tape.max(self.next_tape);
        if self.max_tape > MAX_TAPES {
            return Err(ValidationError::new(format!("expression needs more than {MAX_TAPES} tapes")));
        }
        Ok(t)
    }

    fn st(&mut self, label: &str) -> Sid {
        self.asm.state(label)
    }

    /// Moves every tape of `set` right until all read blank, then once more.
    /// Tapes flagged in `erase` are blanked on the way.
    fn park(&mut self, from: Sid, set: &[usize], erase: &[bool], to: Sid) {
        let erase = erase.to_vec();
        self.asm.def(from, set, move |_, r| {
            let all_blank = r.iter().all(|&c| c == BLANK);
            let w = r.iter().zip(&erase).map(|(&c, &e)| if e { BLANK } else { c }).collect();
            Some((if all_blank { to } else { from }, w, vec![R; r.len()]))
        });
    }

    /// Brings parked tape `t` to cell 1 while the tapes in `held` wait on cell 1.
    fn rewind(&mut self, from: Sid, t: usize, held: &[usize], to: Sid) {
        let mid = self.st("rwb");
        let mut active = vec![t];
        active.extend_from_slice(held);
        let n = active.len();
        let step = move |tau: u8, r: &[char], head: Move| {
            let mut moves = vec![hover(tau); n];
            moves[0] = head;
            (r.to_vec(), moves)
        };
        self.asm.def(from, &active, move |tau, r| {
            let next = if nb(r[0]) { mid } else { from };
            let (w, m) = step(tau, r, Move::L);
            Some((next, w, m))
        });
        self.asm.def(mid, &active, move |tau, r| {
            if nb(r[0]) {
                let (w, m) = step(tau, r, Move::L);
                Some((mid, w, m))
            } else if tau == 1 {
                let (w, m) = step(tau, r, Move::R);
                Some((to, w, m))
            } else {
                None
            }
        });
    }

    fn rewind_all(&mut self, from: Sid, tapes: &[usize], to: Sid) {
        let mut cur = from;
        for (i, &t) in tapes.iter().enumerate() {
            let next = if i + 1 == tapes.len() { to } else { self.st("rw") };
            self.rewind(cur, t, &tapes[..i], next);
            cur = next;
        }
    }

    /// With `src` and `dst` on cell 1, overwrites `dst` with `src` (plus one if `succ`).
    fn copy(&mut self, from: Sid, src: usize, dst: usize, succ: bool, to: Sid) {
        let lp = self.st("cpy");
        let tail = self.st("cpyt");
        self.asm.def(from, &[src, dst], move |_, r| match r[0] {
            '0' if succ => Some((tail, vec!['0', '1'], vec![R, R])),
            c if nb(c) => Some((lp, vec![c, c], vec![R, R])),
            _ => None,
        });
        self.asm.def(lp, &[src, dst], move |_, r| {
            if nb(r[0]) {
                Some((lp, vec![r[0], r[0]], vec![R, R]))
            } else {
                Some((tail, vec![BLANK, if succ { '1' } else { BLANK }], vec![R, R]))
            }
        });
        self.park(tail, &[src, dst], &[false, true], to);
    }

    /// With both on cell 1, compares two numerals and parks both.
    fn compare(&mut self, from: Sid, a: usize, b: usize, eq: Sid, ne: Sid) {
        let tail = self.st("cmpt");
        self.park(tail, &[a, b], &[false, false], ne);
        self.asm.def(from, &[a, b], move |_, r| {
            let next = if r[0] == r[1] {
                if nb(r[0]) {
                    from
                } else {
                    eq
                }
            } else {
                tail
            };
            Some((next, r.to_vec(), vec![R, R]))
        });
    }

    fn is_zero(&mut self, from: Sid, t: usize, zero: Sid, nonzero: Sid) {
        let (pz, pn) = (self.st("zt"), self.st("nzt"));
        self.park(pz, &[t], &[false], zero);
        self.park(pn, &[t], &[false], nonzero);
        self.asm.def(from, &[t], move |_, r| match r[0] {
            '0' => Some((pz, vec!['0'], vec![R])),
            '1' => Some((pn, vec!['1'], vec![R])),
            _ => None,
        });
    }

    fn increment(&mut self, from: Sid, t: usize, to: Sid) {
        let (lp, tail) = (self.st("inc"), self.st("inct"));
        self.park(tail, &[t], &[false], to);
        self.asm.def(from, &[t], move |_, r| match r[0] {
            '0' => Some((tail, vec!['1'], vec![R])),
            '1' => Some((lp, vec!['1'], vec![R])),
            _ => None,
        });
        self.asm.def(lp, &[t], move |_, r| match r[0] {
            '1' => Some((lp, vec!['1'], vec![R])),
            _ => Some((tail, vec!['1'], vec![R])),
        });
    }

    /// With `t` on cell 1, overwrites its numeral with `0`.
    fn write_zero(&mut self, from: Sid, t: usize, to: Sid) {
        let tail = self.st("zerot");
        self.park(tail, &[t], &[true], to);
        self.asm.def(from, &[t], move |_, r| nb(r[0]).then(|| (tail, vec!['0'], vec![R])));
    }

    /// Writes `0` on a tape that has been idle and blank since the start.
    fn init_zero(&mut self, from: Sid, t: usize, to: Sid) {
        let tail = self.st("initt");
        self.park(tail, &[t], &[false], to);
        self.asm.def(from, &[t], move |tau, r| {
            if r[0] != BLANK {
                None
            } else if tau == 0 {
                Some((tail, vec!['0'], vec![R]))
            } else {
                Some((from, vec![BLANK], vec![Move::L]))
            }
        });
    }

    /// Emits code computing `e(args)` into `out`, from state `from` to `to`.
    fn compile(&mut self, e: &PrfExpr, args: &[usize], out: usize, from: Sid, to: Sid) -> Result<(), ValidationError> {
        match e.node() {
            PrfNode::Zero(_) => {
                self.regions.push(("zero".into(), from));
                let s = self.st("z");
                self.rewind(from, out, &[], s);
                self.write_zero(s, out, to);
            }
            PrfNode::Succ | PrfNode::Proj(..) => {
                let (src, succ) = match e.node() {
                    PrfNode::Succ => (args[0], true),
                    PrfNode::Proj(_, i) => (args[i - 1], false),
                    _ => unreachable!(),
                };
                self.regions.push((if succ { "succ".into() } else { "proj".into() }, from));
                let s = self.st("cp");
                self.rewind_all(from, &[src, out], s);
                self.copy(s, src, out, succ, to);
            }
            PrfNode::Compose(g, hs) => {
                self.regions.push(("compose".into(), from));
                let mark = self.next_tape;
                let mut stage = Vec::new();
                let mut cur = from;
                for h in hs {
                    let t = self.alloc()?;
                    let next = self.st("cmp");
                    self.compile(h, args, t, cur, next)?;
                    stage.push(t);
                    cur = next;
                }
                self.compile(g, &stage, out, cur, to)?;
                self.next_tape = mark;
            }
            PrfNode::PrimRec(g, h) => {
                self.regions.push(("primrec".into(), from));
                let k = args.len() - 1;
                let (xs, y) = (&args[..k], args[k]);
                let mark = self.next_tape;
                let (c, tmp) = (self.alloc()?, self.alloc()?);
                let s1 = self.st("prg");
                self.compile(g, xs, out, from, s1)?;
                let (s2, lp, lp2, body) = (self.st("prc"), self.st("prl"), self.st("prl"), self.st("prb"));
                self.rewind(s1, c, &[], s2);
                self.write_zero(s2, c, lp);
                self.rewind_all(lp, &[c, y], lp2);
                self.compare(lp2, c, y, to, body);
                let mut hargs = xs.to_vec();
                hargs.extend([c, out]);
                let (b1, b2, b3, b4) = (self.st("prh"), self.st("prh"), self.st("pri"), self.st("pri"));
                self.compile(h, &hargs, tmp, body, b1)?;
                self.rewind_all(b1, &[tmp, out], b2);
                self.copy(b2, tmp, out, false, b3);
                self.rewind(b3, c, &[], b4);
                self.increment(b4, c, lp);
                self.next_tape = mark;
            }
            PrfNode::Mu(g) => {
                self.regions.push(("mu".into(), from));
                let mark = self.next_tape;
                let tmp = self.alloc()?;
                let (s1, lp, t1, t2, n1, n2) =
                    (self.st("mu"), self.st("mul"), self.st("mut"), self.st("mut"), self.st("mun"), self.st("mun"));
                self.rewind(from, out, &[], s1);
                self.write_zero(s1, out, lp);
                let mut gargs = args.to_vec();
                gargs.push(out);
                self.compile(g, &gargs, tmp, lp, t1)?;
                self.rewind(t1, tmp, &[], t2);
                self.is_zero(t2, tmp, to, n1);
                self.rewind(n1, out, &[], n2);
                self.increment(n2, out, lp);
                self.next_tape = mark;
            }
            PrfNode::Named(n) => {
                let def = n.def().clone();
                self.compile(&def, args, out, from, to)?;
            }
        }
        Ok(())
    }
}

/// Compiles `e` into a deterministic machine computing it on unary numerals.
pub fn compile_prf_to_tm(e: &PrfExpr) -> Result<Compiled, ValidationError> {
    let k = arity_check(e)?;
    if is_zero_fn(e) {
        return finish(zero_machine(k), k, Vec::new(), Vec::new());
    }
    let mut cx = Cx { asm: Asm::new(&ALPHABET), next_tape: k + 1, max_tape: k + 1, regions: Vec::new() };
    let start = cx.st("start");
    let body = cx.st("body");
    let done = cx.st("done");
    let acc = cx.asm.accept_state("halt");
    let args: Vec<usize> = (0..k).collect();
    cx.compile(e, &args, k, body, done)?;
    cx.rewind(done, k, &[], acc);
    let tapes = cx.max_tape;
    // start-up: park the arguments, then put 0 on every other tape
    let mut cur = start;
    if k > 0 {
        let next = cx.st("init");
        cx.park(cur, &args, &vec![false; k], next);
        cur = next;
    }
    for t in k..tapes {
        let next = if t + 1 == tapes { body } else { cx.st("init") };
        cx.init_zero(cur, t, next);
        cur = next;
    }
    let spec = cx.asm.build(tapes, start, &['0', '1'], k);
    let regions = cx
        .regions
        .iter()
        .filter_map(|(c, s)| {
            [0, 1].into_iter().map(|tau| cx.asm.name(*s, tau)).find(|n| spec.states.contains(n)).map(|n| (c.clone(), n))
        })
        .collect();
    finish(spec, k, (k + 1..tapes).collect(), regions)
}

fn finish(
    spec: MachineSpec,
    k: usize,
    scratch: Vec<usize>,
    regions: Vec<(String, String)>,
) -> Result<Compiled, ValidationError> {
    let machine = validate_machine(spec.clone())?;
    let layout = NumericLayout { arity: k, args: (0..k).collect(), output: k, scratch };
    Ok(Compiled { spec, machine, layout, regions })
}

fn is_zero_fn(e: &PrfExpr) -> bool {
    match e.node() {
        PrfNode::Zero(_) => true,
        PrfNode::Named(n) => is_zero_fn(n.def()),
        _ => false,
    }
}

/// Writes `0` on the output tape and steps back, without scratch tapes.
fn zero_machine(k: usize) -> MachineSpec {
    let mut spec = MachineSpec::new(k + 1, "01", "_01");
    spec.output = k;
    spec.states = vec!["write".into(), "back".into(), "halt".into()];
    spec.initial = "write".into();
    spec.accept = vec!["halt".into()];
    let combos = 3usize.pow(k as u32);
    for mut i in 0..combos {
        let mut read = Vec::with_capacity(k + 1);
        for _ in 0..k {
            read.push(ALPHABET[i % 3]);
            i /= 3;
        }
        let mut first = read.clone();
        first.push(BLANK);
        let mut write = read.clone();
        write.push('0');
        if read.iter().all(|&c| c != BLANK) {
            spec.delta.push(Rule { from: "write".into(), read: first, to: "back".into(), write, moves: vec![R; k + 1] });
        }
        let mut second = read.clone();
        second.push(BLANK);
        spec.delta.push(Rule {
            from: "back".into(),
            read: second.clone(),
            to: "halt".into(),
            write: second,
            moves: vec![Move::L; k + 1],
        });
    }
    spec
}

/// Summarizes tape roles, state counts and sub-machine entry points.
pub fn layout_report(c: &Compiled) -> String {
    let l = &c.layout;
    let mut s = String::new();
    let _ = writeln!(s, "tapes: {}", l.tapes());
    let _ = writeln!(s, "arguments: {} ({} tapes)", fmt_tapes(&l.args), l.args.len());
    let _ = writeln!(s, "output: {}", l.output + 1);
    let _ = writeln!(s, "scratch: {} ({} tapes)", fmt_tapes(&l.scratch), l.scratch.len());
    let _ = writeln!(s, "states: {}", c.spec.states.len());
    let _ = writeln!(s, "transitions: {}", c.spec.delta.len());
    for (what, entry) in &c.regions {
        let _ = writeln!(s, "region {what} enters at {entry}");
    }
    s
}

fn fmt_tapes(ts: &[usize]) -> String {
    if ts.is_empty() {
        "none".into()
    } else {
        ts.iter().map(|t| (t + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::{eval_u64, stdlib};
    use crate::tm::{run_numeric, NumericError};
    use num_traits::ToPrimitive;

    fn agree(e: &PrfExpr, max: u64) {
        let c = compile_prf_to_tm(e).unwrap();
        let k = c.layout.arity;
        let points = (max + 1).pow(k as u32);
        for mut i in 0..points {
            let mut args = Vec::new();
            for _ in 0..k {
                args.push(i % (max + 1));
                i /= max + 1;
            }
            let want = eval_u64(e, &args, 1_000_000).unwrap().to_u64().unwrap();
            assert_eq!(run_numeric(&c.machine, &args, 1_000_000), Ok(want), "{e} on {args:?}");
        }
    }

    #[test]
    fn successor() {
        let c = compile_prf_to_tm(&PrfExpr::succ()).unwrap();
        assert_eq!(run_numeric(&c.machine, &[0], 1000), Ok(1));
        assert_eq!(run_numeric(&c.machine, &[3], 1000), Ok(4));
        assert_eq!(c.layout.tapes(), 2);
        assert!(c.machine.is_deterministic());
    }

    #[test]
    fn base_and_derived() {
        agree(&PrfExpr::zero(2), 3);
        agree(&PrfExpr::proj(3, 2), 2);
        agree(&stdlib::add(), 4);
        agree(&stdlib::mul(), 3);
        agree(&stdlib::pred(), 4);
        agree(&stdlib::monus(), 4);
        agree(&stdlib::const_k(2, 0), 0);
    }

    #[test]
    fn minimalization() {
        let g = PrfExpr::compose(stdlib::monus(), vec![PrfExpr::proj(2, 1), PrfExpr::proj(2, 2)]);
        let c = compile_prf_to_tm(&PrfExpr::mu(g)).unwrap();
        assert_eq!(run_numeric(&c.machine, &[3], 100_000), Ok(3));
        let never = compile_prf_to_tm(&PrfExpr::mu(stdlib::const_k(1, 2))).unwrap();
        assert_eq!(run_numeric(&never.machine, &[1], 100_000), Err(NumericError::FuelExhausted));
    }

    #[test]
    fn report_lists_roles() {
        let c = compile_prf_to_tm(&stdlib::add()).unwrap();
        assert!(c.layout.tapes() >= 4);
        let r = layout_report(&c);
        assert!(r.contains("arguments: 1,2"));
        let z = compile_prf_to_tm(&PrfExpr::zero(2)).unwrap();
        assert!(z.spec.states.len() <= 8, "{}", z.spec.states.len());
    }
}
