//! λ-terms on tapes. Terms travel as fully parenthesized wire strings, a
//! suite of multitape machines manipulates them, and [`reduce_on_tm`]
//! normalizes a term by running the contraction machine until the
//! normal-form machine says stop.
//!
//! Wire syntax: a variable is `v` followed by its index in unary (`v||`),
//! an abstraction is `(Lv|.M)` and an application is `(MN)`. Holes are `■`.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::asm::{Asm, Sid};
use crate::lambda::{freshen, Name, Node, Term};
use crate::tm::{run_tapes, validate_machine, Machine, MachineSpec, Move, Verdict, BLANK};

pub const HOLE: char = '■';
const MARK: char = '^';
const WIRE: [char; 8] = ['v', '|', 'L', '.', '(', ')', '#', HOLE];
const ALPHABET: [char; 12] = [BLANK, 'v', '|', 'L', '.', '(', ')', '#', HOLE, MARK, '0', '1'];

// ---------------------------------------------------------------- wire form

/// A malformed wire string, with the character offset of the failure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed wire at offset {position}: {message}")]
pub struct WireParseError {
    pub position: usize,
    pub message: String,
}

/// Renders `t`, numbering variables by first occurrence from the left.
pub fn render_term(t: &Term) -> String {
    render_with(t).0
}

/// Renders `t` and returns the variable table: index `k` names `table[k - 1]`.
pub fn render_with(t: &Term) -> (String, Vec<Name>) {
    let mut table = Vec::new();
    let mut out = String::new();
    render_into(t, &mut table, &mut out);
    (out, table)
}

/// Renders `t` with a fixed table, extending it with unseen names.
pub fn render_using(t: &Term, table: &mut Vec<Name>) -> String {
    let mut out = String::new();
    render_into(t, table, &mut out);
    out
}

fn token(table: &mut Vec<Name>, x: &Name, out: &mut String) {
    let k = match table.iter().position(|y| y == x) {
        Some(i) => i + 1,
        None => {
            table.push(x.clone());
            table.len()
        }
    };
    out.push('v');
    out.extend(std::iter::repeat('|').take(k));
}

fn render_into(t: &Term, table: &mut Vec<Name>, out: &mut String) {
    match t.node() {
        Node::Var(x) => token(table, x, out),
        Node::Hole => out.push(HOLE),
        Node::Abs(x, b) => {
            out.push_str("(L");
            token(table, x, out);
            out.push('.');
            render_into(b, table, out);
            out.push(')');
        }
        Node::App(f, a) => {
            out.push('(');
            render_into(f, table, out);
            render_into(a, table, out);
            out.push(')');
        }
    }
}

/// Parses a wire string; index `k` becomes the variable `vk`.
pub fn parse_wire(s: &str) -> Result<Term, WireParseError> {
    parse_wire_with(s, &[])
}

/// Parses a wire string, naming index `k` by `table[k - 1]` when present.
pub fn parse_wire_with(s: &str, table: &[Name]) -> Result<Term, WireParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut p = WireParser { chars: &chars, pos: 0, table };
    let t = p.term()?;
    if p.pos != chars.len() {
        return Err(p.fail("trailing characters"));
    }
    Ok(t)
}

struct WireParser<'a> {
    chars: &'a [char],
    pos: usize,
    table: &'a [Name],
}

impl WireParser<'_> {
    fn fail(&self, msg: &str) -> WireParseError {
        WireParseError { position: self.pos, message: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), WireParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<Name, WireParseError> {
        self.expect('v')?;
        let mut k = 0;
        while self.peek() == Some('|') {
            self.pos += 1;
            k += 1;
        }
        if k == 0 {
            return Err(self.fail("variable without index"));
        }
        Ok(match self.table.get(k - 1) {
            Some(n) => n.clone(),
            None => Name::new(&format!("v{k}")),
        })
    }

    fn term(&mut self) -> Result<Term, WireParseError> {
        match self.peek() {
            Some('v') => Ok(Term::var_n(self.name()?)),
            Some(HOLE) => {
                self.pos += 1;
                Ok(Term::hole())
            }
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some('L') {
                    self.pos += 1;
                    let x = self.name()?;
                    self.expect('.')?;
                    let b = self.term()?;
                    self.expect(')')?;
                    Ok(Term::abs(x, b))
                } else {
                    let f = self.term()?;
                    let a = self.term()?;
                    self.expect(')')?;
                    Ok(Term::app(f, a))
                }
            }
            Some(_) => Err(self.fail("unexpected character")),
            None => Err(self.fail("unexpected end of input")),
        }
    }
}

// ------------------------------------------------------------ macro layer

/// Logical head moves on the double-spaced work tapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mv {
    L,
    R,
    S,
}
use Mv::{L, R, S};

type Act = (Sid, Vec<char>, Vec<Mv>);

/// Builds machines whose work tapes hold logical cell `j` at physical cell
/// `2j + 1`, with `^` at logical cell 0. A logical step is two physical
/// steps, so a head can stay by moving right onto a blank pad and back.
/// Physical tapes `0..io` hold the contiguous inputs and the output.
struct Prog {
    asm: Asm,
    io: usize,
    mids: HashMap<(Sid, Vec<usize>), Sid>,
}

fn full() -> Vec<char> {
    ALPHABET.to_vec()
}

fn wire_or_blank() -> Vec<char> {
    let mut v = WIRE.to_vec();
    v.push(BLANK);
    v
}

impl Prog {
    fn st(&mut self, label: &str) -> Sid {
        self.asm.state(label)
    }

    fn def(&mut self, s: Sid, tapes: &[usize], f: impl FnMut(&[char]) -> Option<Act>) {
        let sets = vec![full(); tapes.len()];
        self.def_sets(s, tapes, sets, f);
    }

    fn def_sets(&mut self, s: Sid, tapes: &[usize], sets: Vec<Vec<char>>, mut f: impl FnMut(&[char]) -> Option<Act>) {
        let phys: Vec<usize> = tapes.iter().map(|&t| self.io + t).collect();
        let mut table: HashMap<Vec<char>, (Sid, Vec<char>, Vec<Move>)> = HashMap::new();
        let total: usize = sets.iter().map(|v| v.len()).product();
        let mut read = vec![BLANK; tapes.len()];
        for mut idx in 0..total {
            for (r, set) in read.iter_mut().zip(&sets) {
                *r = set[idx % set.len()];
                idx /= set.len();
            }
            if let Some((to, write, moves)) = f(&read) {
                let first = moves.iter().map(|&m| if m == L { Move::L } else { Move::R }).collect();
                let rights: Vec<usize> = phys.iter().zip(&moves).filter(|(_, &m)| m == R).map(|(&p, _)| p).collect();
                let mid = self.mid(to, rights);
                table.insert(read.clone(), (mid, write, first));
            }
        }
        self.asm.def_sets(s, &phys, &sets, |tau, r| if tau == 0 { table.get(r).cloned() } else { None });
    }

    /// The pad-crossing half step into `to`; tapes in `rights` continue right.
    fn mid(&mut self, to: Sid, rights: Vec<usize>) -> Sid {
        if let Some(&m) = self.mids.get(&(to, rights.clone())) {
            return m;
        }
        let m = self.asm.state("pad");
        let n = rights.len();
        self.asm.def_sets(m, &rights, &vec![vec![BLANK]; n], |tau, _| {
            (tau == 1).then(|| (to, vec![BLANK; n], vec![Move::R; n]))
        });
        self.mids.insert((to, rights), m);
        m
    }

    /// Moves `t` in `dir` until `stop` holds, then makes the move `last`.
    /// Tapes in `held` stay put.
    fn seek(&mut self, s: Sid, t: usize, held: &[usize], dir: Mv, stop: impl Fn(char) -> bool, last: Mv, exit: Sid) {
        let tapes: Vec<usize> = std::iter::once(t).chain(held.iter().copied()).collect();
        let n = tapes.len();
        self.def(s, &tapes, |r| {
            let mut moves = vec![S; n];
            if stop(r[0]) {
                moves[0] = last;
                Some((exit, r.to_vec(), moves))
            } else {
                moves[0] = dir;
                Some((s, r.to_vec(), moves))
            }
        });
    }

    fn rewind(&mut self, s: Sid, t: usize, held: &[usize], exit: Sid) {
        self.seek(s, t, held, L, |c| c == MARK, R, exit);
    }

    fn to_end(&mut self, s: Sid, t: usize, held: &[usize], exit: Sid) {
        self.seek(s, t, held, R, |c| c == BLANK, S, exit);
    }

    /// Moves `t` just past the next `#`.
    fn skip_entry(&mut self, s: Sid, t: usize, held: &[usize], exit: Sid) {
        self.seek(s, t, held, R, |c| c == '#', R, exit);
    }

    /// Writes `c` at the head of `t` and moves right.
    fn emit(&mut self, s: Sid, t: usize, held: &[usize], c: char, exit: Sid) {
        let tapes: Vec<usize> = std::iter::once(t).chain(held.iter().copied()).collect();
        let n = tapes.len();
        self.def(s, &tapes, |r| {
            let mut w = r.to_vec();
            w[0] = c;
            let mut moves = vec![S; n];
            moves[0] = R;
            Some((exit, w, moves))
        });
    }

    /// Copies `src` onto `dst` until `src` reads a symbol in `stop`.
    fn copy_until(&mut self, s: Sid, src: usize, dst: usize, held: &[usize], stop: &[char], exit: Sid) {
        let tapes: Vec<usize> = [src, dst].into_iter().chain(held.iter().copied()).collect();
        let n = tapes.len();
        let stop = stop.to_vec();
        self.def(s, &tapes, |r| {
            let mut moves = vec![S; n];
            let mut w = r.to_vec();
            if stop.contains(&r[0]) {
                return Some((exit, w, moves));
            }
            w[1] = r[0];
            moves[0] = R;
            moves[1] = R;
            Some((s, w, moves))
        });
    }

    /// Copies the variable token under `src` onto `dst`; `src` ends just after it.
    fn copy_token(&mut self, s: Sid, src: usize, dst: usize, held: &[usize], exit: Sid) {
        let bars = self.st("ctok");
        let tapes: Vec<usize> = [src, dst].into_iter().chain(held.iter().copied()).collect();
        let n = tapes.len();
        self.def(s, &tapes, |r| {
            let mut w = r.to_vec();
            w[1] = 'v';
            let mut moves = vec![S; n];
            moves[0] = R;
            moves[1] = R;
            (r[0] == 'v').then(|| (bars, w, moves))
        });
        self.copy_until(bars, src, dst, held, &non_bars(), exit);
    }

    /// Compares the token under `src` with the single token on `key`.
    /// `key` ends parked at its end; `src` ends after the token on a match
    /// and back on its `v` otherwise.
    fn match_token(&mut self, s: Sid, src: usize, key: usize, held: &[usize], on_match: Sid, on_mismatch: Sid) {
        let (c0, c1, park, back, find) = (self.st("mt"), self.st("mt"), self.st("mtpark"), self.st("mtback"), self.st("mtfind"));
        let mut with_src = vec![src];
        with_src.extend_from_slice(held);
        self.rewind(s, key, &with_src, c0);
        let tapes: Vec<usize> = [src, key].into_iter().chain(held.iter().copied()).collect();
        let n = tapes.len();
        let stay = vec![S; n];
        let mut both = stay.clone();
        both[0] = R;
        both[1] = R;
        self.def(c0, &tapes, |r| (r[0] == 'v' && r[1] == 'v').then(|| (c1, r.to_vec(), both.clone())));
        self.def(c1, &tapes, |r| match (r[0], r[1]) {
            ('|', '|') => Some((c1, r.to_vec(), both.clone())),
            (a, BLANK) if a != '|' => Some((on_match, r.to_vec(), stay.clone())),
            _ => Some((park, r.to_vec(), stay.clone())),
        });
        let mut key_held = vec![src];
        key_held.extend_from_slice(held);
        self.to_end(park, key, &key_held, back);
        // the mismatch is seen strictly right of the token's `v`
        self.seek(back, src, held, L, |_| true, L, find);
        self.seek(find, src, held, L, |c| c == 'v', S, on_mismatch);
    }

    /// Appends every distinct variable token of `src` to `list`, each
    /// followed by `#`.
    fn collect_vars(&mut self, s: Sid, src: usize, list: usize, exit: Sid) {
        let [scan, start, c0, c1, found, skip, back, find, append, close] =
            ["vscan", "vstart", "vc", "vc", "vfound", "vskip", "vback", "vfind", "vappend", "vclose"].map(|l| self.st(l));
        self.rewind(s, src, &[], scan);
        self.def(scan, &[src], |r| match r[0] {
            BLANK => Some((exit, vec![BLANK], vec![S])),
            'v' => Some((start, vec!['v'], vec![S])),
            c => Some((scan, vec![c], vec![R])),
        });
        self.rewind(start, list, &[src], c0);
        self.def(c0, &[src, list], |r| match (r[0], r[1]) {
            ('v', 'v') => Some((c1, r.to_vec(), vec![R, R])),
            ('v', BLANK) => Some((append, r.to_vec(), vec![S, S])),
            _ => None,
        });
        self.def(c1, &[src, list], |r| match (r[0], r[1]) {
            ('|', '|') => Some((c1, r.to_vec(), vec![R, R])),
            (a, '#') if a != '|' => Some((found, r.to_vec(), vec![S, S])),
            _ => Some((skip, r.to_vec(), vec![S, S])),
        });
        self.to_end(found, list, &[src], scan);
        self.skip_entry(skip, list, &[src], back);
        self.seek(back, src, &[list], L, |_| true, L, find);
        self.seek(find, src, &[list], L, |c| c == 'v', S, c0);
        self.copy_token(append, src, list, &[], close);
        self.emit(close, list, &[src], '#', scan);
    }

    /// Copies `ctx` onto `out`, replacing every hole by a copy of `filler`.
    fn fill(&mut self, s: Sid, ctx: usize, filler: usize, out: usize, held: &[usize], exit: Sid) {
        let (walk, hole, copy) = (self.st("fwalk"), self.st("fhole"), self.st("fcopy"));
        self.rewind(s, ctx, held, walk);
        let tapes: Vec<usize> = [ctx, out].into_iter().chain(held.iter().copied()).collect();
        let n = tapes.len();
        self.def(walk, &tapes, |r| {
            let mut w = r.to_vec();
            let mut moves = vec![S; n];
            match r[0] {
                BLANK => return Some((exit, w, moves)),
                HOLE => return Some((hole, w, moves)),
                c => {
                    w[1] = c;
                    moves[0] = R;
                    moves[1] = R;
                }
            }
            Some((walk, w, moves))
        });
        let mut h = vec![ctx];
        h.extend_from_slice(held);
        self.rewind(hole, filler, &h, copy);
        let tapes: Vec<usize> = [filler, out, ctx].into_iter().chain(held.iter().copied()).collect();
        let n = tapes.len();
        let mut sets = vec![full(), vec![BLANK], vec![HOLE]];
        sets.extend(held.iter().map(|_| full()));
        self.def_sets(copy, &tapes, sets, |r| {
            let mut w = r.to_vec();
            let mut moves = vec![S; n];
            if r[0] == BLANK {
                moves[2] = R;
                return Some((walk, w, moves));
            }
            w[1] = r[0];
            moves[0] = R;
            moves[1] = R;
            Some((copy, w, moves))
        });
    }
}

fn non_bars() -> Vec<char> {
    ALPHABET.iter().copied().filter(|&c| c != '|').collect()
}

/// Physical scaffolding around a logical program: input spreading,
/// rewinding of scratch tapes and output compression.
fn assemble(inputs: usize, work: usize, out: usize, program: impl FnOnce(&mut Prog, Sid, Sid)) -> MachineSpec {
    let io = inputs + 1;
    let tapes = io + work;
    let mut p = Prog { asm: Asm::new(&ALPHABET), io, mids: HashMap::new() };
    let w = |t: usize| io + t;

    // move every input head past its word while work tapes get their marker
    let init = p.st("init");
    let scan = p.st("scan");
    let settle = p.st("settle");
    let mut active: Vec<usize> = (0..inputs).collect();
    active.extend((0..work).map(w));
    let mut sets = vec![wire_or_blank(); inputs];
    sets.extend((0..work).map(|_| vec![BLANK]));
    let n = active.len();
    p.asm.def_sets(init, &active, &sets, |tau, r| {
        (tau == 0).then(|| {
            let mut wr = r.to_vec();
            for c in wr.iter_mut().skip(inputs) {
                *c = MARK;
            }
            (scan, wr, vec![Move::R; n])
        })
    });
    p.asm.def_sets(scan, &active, &sets, |tau, r| {
        let done = tau == 0 && r[..inputs].iter().all(|&c| c == BLANK);
        Some((if done { settle } else { scan }, r.to_vec(), vec![Move::R; n]))
    });
    let mut next = p.st("ready");
    p.asm.def(settle, &[], |tau, _| (tau == 1).then(|| (next, vec![], vec![])));

    // spread each input onto its work tape, two cells per symbol
    for i in 0..inputs {
        let wt = w(i);
        let [back, lift, s1, s2, s4, park] = ["back", "lift", "sp", "sp", "sp", "park"].map(|l| p.st(l));
        let s3: HashMap<char, Sid> = wire_or_blank().into_iter().map(|c| (c, p.st("sp"))).collect();
        let pair = [i, wt];
        let mark_or_blank = vec![BLANK, MARK];
        let io_set = wire_or_blank();
        p.asm.def_sets(next, &pair, &[io_set.clone(), mark_or_blank.clone()], |tau, r| {
            (tau == 0).then(|| (back, r.to_vec(), vec![Move::L, Move::L]))
        });
        p.asm.def_sets(back, &pair, &[io_set.clone(), mark_or_blank.clone()], |_, r| {
            if r[1] == MARK {
                Some((lift, r.to_vec(), vec![Move::R, Move::R]))
            } else {
                Some((back, r.to_vec(), vec![Move::L, Move::L]))
            }
        });
        p.asm.def_sets(lift, &pair, &[io_set.clone(), vec![BLANK]], |tau, r| {
            (tau == 1).then(|| (s1, r.to_vec(), vec![Move::L, Move::R]))
        });
        p.asm.def_sets(s1, &pair, &[io_set.clone(), vec![BLANK]], |tau, r| {
            (tau == 0).then(|| {
                if r[0] == BLANK {
                    (park, r.to_vec(), vec![Move::R, Move::R])
                } else {
                    (s2, vec![r[0], r[0]], vec![Move::R, Move::R])
                }
            })
        });
        let s3c = s3.clone();
        p.asm.def_sets(s2, &pair, &[io_set.clone(), vec![BLANK]], |tau, r| {
            (tau == 1).then(|| (s3c[&r[0]], r.to_vec(), vec![Move::R, Move::R]))
        });
        for (&b, &st) in &s3 {
            p.asm.def_sets(st, &pair, &[io_set.clone(), vec![BLANK]], |tau, r| {
                (tau == 0).then(|| {
                    if b == BLANK {
                        (park, r.to_vec(), vec![Move::R, Move::R])
                    } else {
                        (s4, vec![r[0], b], vec![Move::L, Move::R])
                    }
                })
            });
        }
        p.asm.def_sets(s4, &pair, &[io_set.clone(), vec![BLANK]], |tau, r| {
            (tau == 1).then(|| (s1, r.to_vec(), vec![Move::R, Move::R]))
        });
        let after = p.st("ready");
        p.asm.def(park, &[], |tau, _| (tau == 1).then(|| (after, vec![], vec![])));
        next = after;
    }

    // bring the remaining work tapes to logical cell 1
    for t in inputs..work {
        let after = p.st("ready");
        p.rewind(next, t, &[], after);
        next = after;
    }

    let exit = p.st("done");
    program(&mut p, next, exit);

    // write the output work tape contiguously onto the output tape
    let [c1, c2] = ["out", "out"].map(|l| p.st(l));
    let c3 = p.st("out");
    let halt = p.asm.accept_state("halt");
    p.rewind(exit, out, &[], c1);
    let pair = [inputs, w(out)];
    let c4s: HashMap<char, Sid> = WIRE.iter().chain(&['0', '1']).map(|&c| (c, p.st("out"))).collect();
    let mut printable = WIRE.to_vec();
    printable.extend(['0', '1']);
    let mut src_set = printable.clone();
    src_set.push(BLANK);
    p.asm.def_sets(c1, &pair, &[vec![BLANK], src_set.clone()], |tau, r| {
        (tau == 0).then(|| {
            if r[1] == BLANK {
                (halt, r.to_vec(), vec![Move::R, Move::R])
            } else {
                (c2, vec![r[1], r[1]], vec![Move::R, Move::R])
            }
        })
    });
    p.asm.def_sets(c2, &pair, &[vec![BLANK], vec![BLANK]], |tau, r| {
        (tau == 1).then(|| (c3, r.to_vec(), vec![Move::L, Move::R]))
    });
    let c4c = c4s.clone();
    p.asm.def_sets(c3, &pair, &[printable.clone(), src_set], |tau, r| {
        (tau == 0).then(|| {
            if r[1] == BLANK {
                (halt, r.to_vec(), vec![Move::R, Move::R])
            } else {
                (c4c[&r[1]], r.to_vec(), vec![Move::R, Move::R])
            }
        })
    });
    for (&b, &st) in &c4s {
        p.asm.def_sets(st, &pair, &[vec![BLANK], vec![BLANK]], |tau, _| {
            (tau == 1).then(|| (c1, vec![b, BLANK], vec![Move::R, Move::R]))
        });
    }

    let wire: Vec<char> = WIRE.to_vec();
    p.asm.build(tapes, init, &wire, inputs)
}

// ---------------------------------------------------------------- programs

/// The machines of the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuiteMachine {
    /// Variable extraction: term on tape 1, `#`-terminated distinct tokens on tape 2.
    V,
    /// Context filling: context on tape 1, filler on tape 2, result on tape 3.
    CF,
    /// Change of bound variable: `x`, `y`, context `C`, body `N` on tapes 1 to 4;
    /// tape 5 receives `C` filled into `(Ly.■)` filled with `N[x:=y]`.
    CBV,
    /// α-congruence: terms on tapes 1 and 2, verdict `1`/`0` on tape 3.
    AE,
    /// Normal-form test: term on tape 1, verdict `1`/`0` on tape 2.
    NF,
    /// One leftmost contraction: term on tape 1, contractum on tape 2.
    BR1,
}

impl SuiteMachine {
    pub const ALL: [SuiteMachine; 6] =
        [SuiteMachine::V, SuiteMachine::CF, SuiteMachine::CBV, SuiteMachine::AE, SuiteMachine::NF, SuiteMachine::BR1];

    pub fn name(self) -> &'static str {
        match self {
            SuiteMachine::V => "V",
            SuiteMachine::CF => "CF",
            SuiteMachine::CBV => "CBV",
            SuiteMachine::AE => "AE",
            SuiteMachine::NF => "NF",
            SuiteMachine::BR1 => "BR1",
        }
    }

    pub fn from_name(s: &str) -> Option<SuiteMachine> {
        SuiteMachine::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }

    /// Number of input tapes.
    pub fn inputs(self) -> usize {
        match self {
            SuiteMachine::V | SuiteMachine::NF | SuiteMachine::BR1 => 1,
            SuiteMachine::CF | SuiteMachine::AE => 2,
            SuiteMachine::CBV => 4,
        }
    }
}

impl fmt::Display for SuiteMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn program_v(p: &mut Prog, entry: Sid, exit: Sid) {
    p.collect_vars(entry, 0, 1, exit);
}

fn program_nf(p: &mut Prog, entry: Sid, exit: Sid) {
    let (input, out) = (0, 1);
    let [n0, n1, n2, found, yes, no] = ["nf", "nf", "nf", "nffound", "nfyes", "nfno"].map(|l| p.st(l));
    p.rewind(entry, input, &[], n0);
    for (s, seen) in [(n0, 0), (n1, 1), (n2, 2)] {
        p.def(s, &[input], |r| match (r[0], seen) {
            (BLANK, _) => Some((yes, vec![BLANK], vec![S])),
            ('(', 0) => Some((n1, r.to_vec(), vec![R])),
            ('(', _) => Some((n2, r.to_vec(), vec![R])),
            ('L', 2) => Some((found, r.to_vec(), vec![S])),
            _ => Some((n0, r.to_vec(), vec![R])),
        });
    }
    p.to_end(found, input, &[], no);
    p.emit(yes, out, &[], '1', exit);
    p.emit(no, out, &[], '0', exit);
}

fn program_cf(p: &mut Prog, entry: Sid, exit: Sid) {
    p.fill(entry, 0, 1, 2, &[], exit);
}

fn program_cbv(p: &mut Prog, entry: Sid, exit: Sid) {
    let (x, y, c, n, out, np, cp) = (0, 1, 2, 3, 4, 5, 6);
    let [walk, cmp, sub, sub_copy, lit] = ["cwalk", "ccmp", "csub", "csub", "clit"].map(|l| p.st(l));
    p.rewind(entry, n, &[], walk);
    let body = p.st("cbody");
    p.def(walk, &[n, np], |r| match r[0] {
        BLANK => Some((body, r.to_vec(), vec![S, S])),
        'v' => Some((cmp, r.to_vec(), vec![S, S])),
        ch => Some((walk, vec![ch, ch], vec![R, R])),
    });
    p.match_token(cmp, n, x, &[], sub, lit);
    p.rewind(sub, y, &[n], sub_copy);
    p.def(sub_copy, &[y, np, n], |r| match r[0] {
        BLANK => Some((walk, r.to_vec(), vec![S, S, S])),
        ch => Some((sub_copy, vec![ch, ch, r[2]], vec![R, R, S])),
    });
    p.copy_token(lit, n, np, &[], walk);
    // cp := "(L" y "." c ")"
    let [b1, b2, b3, b4, b5, b6, b7, b8] = ["cctx"; 8].map(|l| p.st(l));
    p.emit(body, cp, &[], '(', b1);
    p.emit(b1, cp, &[], 'L', b2);
    p.rewind(b2, y, &[], b3);
    p.copy_until(b3, y, cp, &[], &[BLANK], b4);
    p.emit(b4, cp, &[], '.', b5);
    p.rewind(b5, c, &[], b6);
    p.copy_until(b6, c, cp, &[], &[BLANK], b7);
    p.emit(b7, cp, &[], ')', b8);
    p.fill(b8, cp, np, out, &[], exit);
}

fn program_br1(p: &mut Prog, entry: Sid, exit: Sid) {
    let (input, out, x, mt, nt, d) = (0, 1, 2, 3, 4, 5);
    let [p0, p1, p2, cut1, cut2, binder, dot] = ["pre", "pre", "pre", "cut", "cut", "bind", "dot"].map(|l| p.st(l));
    p.rewind(entry, input, &[], p0);
    for (s, seen) in [(p0, 0), (p1, 1), (p2, 2)] {
        p.def(s, &[input, out], |r| match (r[0], seen) {
            (BLANK, _) => Some((exit, r.to_vec(), vec![S, S])),
            ('(', 0) => Some((p1, vec!['(', '('], vec![R, R])),
            ('(', _) => Some((p2, vec!['(', '('], vec![R, R])),
            ('L', 2) => Some((cut1, r.to_vec(), vec![R, L])),
            (c, _) => Some((p0, vec![c, c], vec![R, R])),
        });
    }
    // drop the "((" already copied
    p.def(cut1, &[out, input], |r| (r[0] == '(').then(|| (cut2, vec![BLANK, r[1]], vec![L, S])));
    p.def(cut2, &[out, input], |r| (r[0] == '(').then(|| (binder, vec![BLANK, r[1]], vec![S, S])));
    p.copy_token(binder, input, x, &[], dot);

    // body: copy to mt with the bound variable replaced by holes
    let [body, push, close, pop1, pop2, cmp, hole, tok, end_body] =
        ["body", "push", "close", "pop", "pop", "bcmp", "bhole", "btok", "bend"].map(|l| p.st(l));
    p.def(dot, &[input], |r| (r[0] == '.').then(|| (body, r.to_vec(), vec![R])));
    p.def(body, &[input, mt], |r| match r[0] {
        '(' => Some((push, vec!['(', '('], vec![R, R])),
        ')' => Some((pop1, r.to_vec(), vec![S, S])),
        'v' => Some((cmp, r.to_vec(), vec![S, S])),
        BLANK | MARK | '0' | '1' => None,
        c => Some((body, vec![c, c], vec![R, R])),
    });
    p.emit(push, d, &[input], '|', body);
    p.def(pop1, &[d, input], |r| Some((pop2, r.to_vec(), vec![L, S])));
    p.def(pop2, &[d, input], |r| match r[0] {
        MARK => Some((end_body, r.to_vec(), vec![R, S])),
        '|' => Some((close, vec![BLANK, r[1]], vec![S, S])),
        _ => None,
    });
    p.def(close, &[input, mt], |_| Some((body, vec![')', ')'], vec![R, R])));
    p.match_token(cmp, input, x, &[], hole, tok);
    p.emit(hole, mt, &[input], HOLE, body);
    p.copy_token(tok, input, mt, &[], body);

    // argument: copy to nt
    let [arg, arg_tok, arg_walk, arg_push, arg_pop1, arg_pop2, arg_close, arg_check1, arg_check2, after] =
        ["arg", "atok", "awalk", "apush", "apop", "apop", "aclose", "acheck", "acheck", "after"].map(|l| p.st(l));
    p.def(end_body, &[input], |r| (r[0] == ')').then(|| (arg, r.to_vec(), vec![R])));
    p.def(arg, &[input, nt], |r| match r[0] {
        'v' => Some((arg_tok, r.to_vec(), vec![S, S])),
        '(' => Some((arg_push, vec!['(', '('], vec![R, R])),
        _ => None,
    });
    p.copy_token(arg_tok, input, nt, &[], after);
    p.emit(arg_push, d, &[input], '|', arg_walk);
    p.def(arg_walk, &[input, nt], |r| match r[0] {
        '(' => Some((arg_push, vec!['(', '('], vec![R, R])),
        ')' => Some((arg_pop1, r.to_vec(), vec![S, S])),
        BLANK | MARK | '0' | '1' => None,
        c => Some((arg_walk, vec![c, c], vec![R, R])),
    });
    p.def(arg_pop1, &[d, input], |r| Some((arg_pop2, r.to_vec(), vec![L, S])));
    p.def(arg_pop2, &[d, input], |r| (r[0] == '|').then(|| (arg_close, vec![BLANK, r[1]], vec![S, S])));
    p.def(arg_close, &[input, nt], |_| Some((arg_check1, vec![')', ')'], vec![R, R])));
    p.def(arg_check1, &[d, input], |r| Some((arg_check2, r.to_vec(), vec![L, S])));
    p.def(arg_check2, &[d, input], |r| match r[0] {
        MARK => Some((after, r.to_vec(), vec![R, S])),
        '|' => Some((arg_walk, r.to_vec(), vec![R, S])),
        _ => None,
    });

    // contractum, then the rest of the term
    let [fill_start, suffix] = ["fill", "suffix"].map(|l| p.st(l));
    p.def(after, &[input], |r| (r[0] == ')').then(|| (fill_start, r.to_vec(), vec![R])));
    p.fill(fill_start, mt, nt, out, &[input], suffix);
    p.copy_until(suffix, input, out, &[], &[BLANK], exit);
}

fn program_ae(p: &mut Prog, entry: Sid, exit: Sid) {
    let (m, n, out, vl, ba, rm) = (0, 1, 2, 3, 4, 5);
    // vl := distinct variables of n
    let binders = p.st("binders");
    p.collect_vars(entry, n, vl, binders);

    // ba := binder tokens of m, each followed by a one-hot choice from vl
    let [g0, g1, g2, g3, g4, g5, gend] = ["ab", "ab", "ab", "ab", "ab", "ab", "abend"].map(|l| p.st(l));
    let rename = p.st("rename");
    p.rewind(binders, m, &[], g0);
    p.def(g0, &[m], |r| match r[0] {
        BLANK => Some((rename, r.to_vec(), vec![S])),
        '(' => Some((g1, r.to_vec(), vec![R])),
        c => Some((g0, vec![c], vec![R])),
    });
    p.def(g1, &[m], |r| match r[0] {
        BLANK => Some((rename, r.to_vec(), vec![S])),
        'L' => Some((g2, r.to_vec(), vec![R])),
        '(' => Some((g1, r.to_vec(), vec![R])),
        c => Some((g0, vec![c], vec![R])),
    });
    p.copy_token(g2, m, ba, &[], g3);
    p.rewind(g3, vl, &[m], g4);
    p.def(g4, &[vl, ba, m], |r| (r[0] == 'v').then(|| (g5, vec!['v', '1', r[2]], vec![R, R, S])));
    p.def(g5, &[vl, ba, m], |r| match r[0] {
        'v' => Some((g5, vec!['v', '0', r[2]], vec![R, R, S])),
        BLANK => Some((gend, vec![BLANK, '#', r[2]], vec![S, R, S])),
        c => Some((g5, vec![c, r[1], r[2]], vec![R, S, S])),
    });
    p.def(gend, &[m], |r| Some((g0, r.to_vec(), vec![S])));

    // rm := m under the current choice
    let [r0, r1, look, l0, l1, lskip, lback, lfind, lit, hit, h0, hskip, hcopy, hpark, hdone, compare] = [
        "r", "r", "look", "look", "look", "lskip", "lback", "lfind", "lit", "hit", "h", "hskip", "hcopy", "hpark", "hdone",
        "cmp",
    ]
    .map(|l| p.st(l));
    p.def(rename, &[rm], |r| match r[0] {
        MARK => Some((r0, r.to_vec(), vec![R])),
        _ => Some((rename, vec![BLANK], vec![L])),
    });
    p.rewind(r0, m, &[], r1);
    p.def(r1, &[m, rm], |r| match r[0] {
        BLANK => Some((compare, r.to_vec(), vec![S, S])),
        'v' => Some((look, r.to_vec(), vec![S, S])),
        c => Some((r1, vec![c, c], vec![R, R])),
    });
    p.rewind(look, ba, &[m], l0);
    p.def(l0, &[m, ba], |r| match (r[0], r[1]) {
        ('v', BLANK) => Some((lit, r.to_vec(), vec![S, S])),
        ('v', 'v') => Some((l1, r.to_vec(), vec![R, R])),
        _ => None,
    });
    p.def(l1, &[m, ba], |r| match (r[0], r[1]) {
        ('|', '|') => Some((l1, r.to_vec(), vec![R, R])),
        (a, '0' | '1') if a != '|' => Some((hit, r.to_vec(), vec![S, S])),
        _ => Some((lskip, r.to_vec(), vec![S, S])),
    });
    p.skip_entry(lskip, ba, &[m], lback);
    p.seek(lback, m, &[ba], L, |_| true, L, lfind);
    p.seek(lfind, m, &[ba], L, |c| c == 'v', S, l0);
    p.copy_token(lit, m, rm, &[], r1);
    p.rewind(hit, vl, &[m, ba], h0);
    p.def(h0, &[ba, vl, m], |r| match r[0] {
        '0' => Some((hskip, r.to_vec(), vec![R, S, S])),
        '1' => Some((hcopy, r.to_vec(), vec![S, S, S])),
        _ => None,
    });
    p.skip_entry(hskip, vl, &[m, ba], h0);
    p.copy_until(hcopy, vl, rm, &[m, ba], &['#'], hpark);
    p.to_end(hpark, vl, &[m, ba], hdone);
    p.to_end(hdone, ba, &[m], r1);

    // compare rm with n
    let [cm1, cm2, yes, no1, no2, inc] = ["cmp", "cmp", "yes", "no", "no", "inc"].map(|l| p.st(l));
    p.rewind(compare, rm, &[], cm1);
    p.rewind(cm1, n, &[rm], cm2);
    p.def(cm2, &[rm, n], |r| match (r[0], r[1]) {
        (BLANK, BLANK) => Some((yes, r.to_vec(), vec![S, S])),
        (a, b) if a == b => Some((cm2, r.to_vec(), vec![R, R])),
        _ => Some((no1, r.to_vec(), vec![S, S])),
    });
    p.to_end(no1, rm, &[n], no2);
    p.to_end(no2, n, &[], inc);
    p.emit(yes, out, &[], '1', exit);

    // advance the odometer of choices
    let [i0, i1, i2, wrap, wrap2, carry, over, bump] = ["inc", "inc", "inc", "wrap", "wrap", "carry", "over", "bump"].map(|l| p.st(l));
    p.rewind(inc, ba, &[], i0);
    p.def(i0, &[ba], |r| match r[0] {
        BLANK => Some((over, r.to_vec(), vec![S])),
        'v' | '|' => Some((i0, r.to_vec(), vec![R])),
        '0' | '1' => Some((i1, r.to_vec(), vec![S])),
        _ => None,
    });
    p.def(i1, &[ba], |r| match r[0] {
        '0' => Some((i1, r.to_vec(), vec![R])),
        '1' => Some((i2, vec!['0'], vec![R])),
        _ => None,
    });
    p.def(i2, &[ba], |r| match r[0] {
        '0' => Some((bump, vec!['1'], vec![S])),
        '#' => Some((wrap, r.to_vec(), vec![L])),
        _ => None,
    });
    p.to_end(bump, ba, &[], rename);
    p.def(wrap, &[ba], |r| match r[0] {
        '0' | '1' => Some((wrap, r.to_vec(), vec![L])),
        'v' | '|' => Some((wrap2, r.to_vec(), vec![R])),
        _ => None,
    });
    p.def(wrap2, &[ba], |_| Some((carry, vec!['1'], vec![S])));
    p.skip_entry(carry, ba, &[], i0);
    p.emit(over, out, &[], '0', exit);
}

/// The validated machine, built once per process.
pub fn suite_machine(which: SuiteMachine) -> &'static Machine {
    static CACHE: [OnceLock<Machine>; 6] = [const { OnceLock::new() }; 6];
    let i = SuiteMachine::ALL.iter().position(|&m| m == which).unwrap();
    CACHE[i].get_or_init(|| validate_machine(build_machine(which)).expect("suite machines are valid"))
}

/// The transition table of a suite machine.
pub fn build_machine(which: SuiteMachine) -> MachineSpec {
    match which {
        SuiteMachine::V => assemble(1, 2, 1, program_v),
        SuiteMachine::NF => assemble(1, 2, 1, program_nf),
        SuiteMachine::CF => assemble(2, 3, 2, program_cf),
        SuiteMachine::CBV => assemble(4, 7, 4, program_cbv),
        SuiteMachine::AE => assemble(2, 6, 2, program_ae),
        SuiteMachine::BR1 => assemble(1, 6, 1, program_br1),
    }
}

/// Why a suite run produced no output.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("machine ran out of fuel")]
    FuelExhausted,
    #[error("machine stopped without accepting")]
    Stuck,
    #[error("{0}")]
    Input(String),
}

/// Runs a suite machine on wire inputs and returns its output tape.
pub fn run_suite(which: SuiteMachine, inputs: &[&str], fuel: u64) -> Result<String, SuiteError> {
    if inputs.len() != which.inputs() {
        return Err(SuiteError::Input(format!("{which} takes {} inputs", which.inputs())));
    }
    let m = suite_machine(which);
    let o = run_tapes(m, inputs, fuel, false).map_err(|e| SuiteError::Input(e.to_string()))?;
    match o.verdict {
        Verdict::Accept => Ok(o.final_config.tape_string(m, m.output_tape())),
        Verdict::Reject => Err(SuiteError::Stuck),
        Verdict::FuelExhausted => Err(SuiteError::FuelExhausted),
    }
}

/// Step budget for a single machine run inside [`reduce_on_tm`].
pub const MACHINE_FUEL: u64 = 50_000_000;

/// Failure modes of [`reduce_on_tm`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TmReduceError {
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error(transparent)]
    Wire(#[from] WireParseError),
    #[error("machine failure: {0}")]
    Machine(SuiteError),
}

impl From<SuiteError> for TmReduceError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::FuelExhausted => TmReduceError::FuelExhausted,
            e => TmReduceError::Machine(e),
        }
    }
}

/// Normalizes `t` by alternating the normal-form machine and the contraction
/// machine, freshening bound variables on the host before every contraction.
/// `fuel` bounds the number of contractions.
pub fn reduce_on_tm(t: &Term, fuel: u64) -> Result<Term, TmReduceError> {
    let mut cur = t.clone();
    let mut used = 0;
    loop {
        let fresh = freshen(&cur);
        let (wire, table) = render_with(&fresh);
        if run_suite(SuiteMachine::NF, &[&wire], MACHINE_FUEL)? == "1" {
            return Ok(fresh);
        }
        if used == fuel {
            return Err(TmReduceError::FuelExhausted);
        }
        let next = run_suite(SuiteMachine::BR1, &[&wire], MACHINE_FUEL)?;
        cur = parse_wire_with(&next, &table)?;
        used += 1;
    }
}

/// The variable list V computes for `t`, as rendered tokens.
pub fn variables_on_tm(t: &Term) -> Result<Vec<Name>, TmReduceError> {
    let (wire, table) = render_with(t);
    let out = run_suite(SuiteMachine::V, &[&wire], MACHINE_FUEL)?;
    let mut names = Vec::new();
    for tok in out.split('#').filter(|s| !s.is_empty()) {
        let k = tok.len() - 1;
        names.push(table[k - 1].clone());
    }
    Ok(names)
}

/// Most variables and binders the α-congruence machine is asked to search.
pub const AE_CAP: usize = 3;

/// Decides α-congruence with the AE machine. Both terms are freshened first;
/// `None` when either exceeds [`AE_CAP`].
pub fn alpha_eq_on_tm(a: &Term, b: &Term) -> Result<Option<bool>, TmReduceError> {
    let (a, b) = (freshen(a), freshen(b));
    let mut table = Vec::new();
    let wb = render_using(&b, &mut table);
    let vars_b = table.len();
    let wa = render_using(&a, &mut table);
    let binders = wa.matches("(L").count();
    if vars_b > AE_CAP || binders > AE_CAP {
        return Ok(None);
    }
    Ok(Some(run_suite(SuiteMachine::AE, &[&wa, &wb], MACHINE_FUEL)? == "1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{alpha_eq, beta_step, combinators as cb, is_normal, normalize, Normalized};

    fn lam(s: &[&str], b: Term) -> Term {
        Term::lams(s, b)
    }
    fn v(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn wire_examples() {
        assert_eq!(render_term(&lam(&["x"], v("x"))), "(Lv|.v|)");
        assert_eq!(render_term(&Term::app(v("x"), v("y"))), "(v|v||)");
        assert!(parse_wire("(Lv|.v|").is_err());
        assert!(parse_wire("(Lv.v|)").is_err());
        let t = parse_wire("(Lv|.(v|v||))").unwrap();
        assert_eq!(render_term(&t), "(Lv|.(v|v||))");
    }

    #[test]
    fn nf_machine() {
        assert_eq!(run_suite(SuiteMachine::NF, &["(Lv|.v|)"], 100_000).unwrap(), "1");
        assert_eq!(run_suite(SuiteMachine::NF, &["((Lv|.v|)v||)"], 100_000).unwrap(), "0");
    }

    #[test]
    fn v_machine() {
        assert_eq!(run_suite(SuiteMachine::V, &["(Lv|.(v|v||))"], 100_000).unwrap(), "v|#v||#");
        assert_eq!(run_suite(SuiteMachine::V, &["((v||v|)(v|||v||))"], 100_000).unwrap(), "v||#v|#v|||#");
    }

    #[test]
    fn cf_machine() {
        assert_eq!(run_suite(SuiteMachine::CF, &["(Lv|.(■■))", "v||"], 100_000).unwrap(), "(Lv|.(v||v||))");
        assert_eq!(run_suite(SuiteMachine::CF, &["v|", "(v|v|)"], 100_000).unwrap(), "v|");
    }

    #[test]
    fn cbv_machine() {
        let out = run_suite(SuiteMachine::CBV, &["v|", "v|||", "(■v||)", "(v|v||)"], 1_000_000).unwrap();
        assert_eq!(out, "(Lv|||.((v|||v||)v||))");
    }

    #[test]
    fn br1_machine() {
        let (w, _) = render_with(&Term::app(lam(&["x"], v("x")), v("y")));
        assert_eq!(run_suite(SuiteMachine::BR1, &[&w], 100_000).unwrap(), "v||");
        let w = "((Lv|.(v|v|))(Lv||.v||))";
        assert_eq!(run_suite(SuiteMachine::BR1, &[w], 100_000).unwrap(), "((Lv||.v||)(Lv||.v||))");
        assert_eq!(run_suite(SuiteMachine::BR1, &["(Lv|.v|)"], 100_000).unwrap(), "(Lv|.v|)");
    }

    #[test]
    fn ae_machine() {
        let id1 = lam(&["x"], v("x"));
        let id2 = lam(&["y"], v("y"));
        assert_eq!(alpha_eq_on_tm(&id1, &id2).unwrap(), Some(true));
        assert_eq!(alpha_eq_on_tm(&cb::k(), &lam(&["a", "b"], v("b"))).unwrap(), Some(false));
        assert_eq!(alpha_eq_on_tm(&cb::k(), &lam(&["p", "q"], v("p"))).unwrap(), Some(true));
        assert_eq!(alpha_eq_on_tm(&Term::app(id1.clone(), v("z")), &Term::app(id2, v("z"))).unwrap(), Some(true));
        assert_eq!(alpha_eq_on_tm(&Term::app(id1, v("z")), &Term::app(v("z"), v("z"))).unwrap(), Some(false));
    }

    #[test]
    fn reduces_like_the_host() {
        let z = v("z");
        let ex = Term::app(lam(&["x", "y"], Term::app(v("y"), v("x"))), z.clone());
        let got = reduce_on_tm(&ex, 100).unwrap();
        assert!(alpha_eq(&got, &lam(&["y"], Term::app(v("y"), z))));
        let kab = Term::apps(cb::k(), [v("a"), v("b")]);
        assert!(alpha_eq(&reduce_on_tm(&kab, 100).unwrap(), &v("a")));
        let w = lam(&["x"], Term::app(v("x"), v("x")));
        let omega = Term::app(w.clone(), w);
        assert_eq!(reduce_on_tm(&omega, 20), Err(TmReduceError::FuelExhausted));
        let two = Term::apps(cb::succ(), [crate::lambda::church(1)]);
        let Normalized::NormalForm { term, .. } = normalize(&two, 1000) else { panic!() };
        assert!(alpha_eq(&reduce_on_tm(&two, 100).unwrap(), &term));
    }

    #[test]
    fn single_steps_match() {
        let t = freshen(&Term::apps(cb::succ(), [crate::lambda::church(1)]));
        let (w, table) = render_with(&t);
        let out = run_suite(SuiteMachine::BR1, &[&w], 1_000_000).unwrap();
        assert!(alpha_eq(&parse_wire_with(&out, &table).unwrap(), &beta_step(&t).unwrap()));
        assert_eq!(run_suite(SuiteMachine::NF, &[&w], 100_000).unwrap() == "1", is_normal(&t));
    }
}
