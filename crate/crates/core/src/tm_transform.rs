//! Machine-level transformations and decision procedures.
//!
//! * [`to_single_tape`] compiles a deterministic multitape machine into an
//!   explicit single-tape table over `Γ ∪ Γ̇ ∪ {#}`.
//! * [`to_single_tape_numeric`] adds a cleanup phase so the result follows
//!   the unary numeric convention on its only tape.
//! * [`recode_binary`] re-encodes a single-tape numeric machine over the
//!   alphabet `{_, 0, 1}`.
//! * [`nd_run`] simulates a nondeterministic machine by breadth-first replay
//!   of shortlex address strings.
//! * Verdict-level combinators and finite-automaton membership/emptiness.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::ValidationError;
use crate::gen::{explore, Edge, Node};
use crate::tm::{
    apply_target, validate_machine, Configuration, Machine, MachineSpec, Move, StateId,
    Sym, TapeMode, Target, Verdict, BLANK,
};

const DOT_POOL: &[char] = &['Ȧ', 'Ḃ', 'Ċ', 'Ḋ', 'Ė', 'Ḟ', 'Ġ', 'Ḣ'];

/// Largest tape count accepted by [`to_single_tape`].
pub const SINGLE_TAPE_MAX_TAPES: usize = 4;
/// Largest tape alphabet accepted by [`to_single_tape`].
pub const SINGLE_TAPE_MAX_SYMBOLS: usize = 6;

/// Glyph bookkeeping for the compiled single-tape layout.
struct Layout {
    gamma: Vec<char>,
    dotted: Vec<char>,
    sep: char,
}

impl Layout {
    fn new(m: &Machine) -> Result<Layout, ValidationError> {
        let gamma = m.glyphs().to_vec();
        let dotted: Vec<char> = DOT_POOL
            .iter()
            .copied()
            .filter(|c| !gamma.contains(c))
            .take(gamma.len())
            .collect();
        if dotted.len() < gamma.len() {
            return Err(ValidationError::new("not enough dotted glyphs for this alphabet"));
        }
        let sep = if gamma.contains(&'#') { '§' } else { '#' };
        if gamma.contains(&sep) {
            return Err(ValidationError::new("no free separator glyph"));
        }
        Ok(Layout { gamma, dotted, sep })
    }
    fn dot(&self, s: Sym) -> char {
        self.dotted[s as usize]
    }
    fn blank_ix(&self) -> Sym {
        self.gamma.iter().position(|&c| c == BLANK).unwrap() as Sym
    }
    fn alphabet(&self) -> Vec<char> {
        let mut v = self.gamma.clone();
        v.extend(&self.dotted);
        v.push(self.sep);
        v
    }
    /// Classifies a layout glyph.
    fn classify(&self, c: char) -> Cell {
        if c == self.sep {
            Cell::Sep
        } else if let Some(i) = self.dotted.iter().position(|&d| d == c) {
            Cell::Dotted(i as Sym)
        } else {
            Cell::Plain(self.gamma.iter().position(|&g| g == c).unwrap() as Sym)
        }
    }
}

enum Cell {
    Sep,
    Dotted(Sym),
    Plain(Sym),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum St {
    InitStart,
    Init(Vec<char>),
    Drain(Vec<char>),
    Back(usize),
    Scan { q: StateId, seg: usize, part: Vec<Sym> },
    Seek { t: usize, i: usize },
    DotL { t: usize, i: usize },
    DotR { t: usize, i: usize },
    Shift { t: usize, i: usize, carry: char, n: usize },
    Return { t: usize, i: usize, count: usize },
    ToSep { t: usize, i: usize },
    Accept,
    Erase { seg: usize, pos0: bool },
    EraseTail,
    RewindSep(usize),
    CPeek,
    ZRead { fin: bool },
    ZWrite { fin: bool, c: char },
    ZSkip { fin: bool },
    ZLast { fin: bool },
    ZEnd,
    RewindA,
    RewindB { digits: bool },
    Done,
}

fn label(s: &St) -> String {
    match s {
        St::InitStart => "init".into(),
        St::Init(_) => "init_shift".into(),
        St::Drain(_) => "init_drain".into(),
        St::Back(c) => format!("init_back{c}"),
        St::Scan { q, seg, .. } => format!("scan_q{q}_s{seg}"),
        St::Seek { t, i } => format!("seek_t{t}_k{i}"),
        St::DotL { t, i } => format!("dotl_t{t}_k{i}"),
        St::DotR { t, i } => format!("dotr_t{t}_k{i}"),
        St::Shift { t, i, .. } => format!("shift_t{t}_k{i}"),
        St::Return { t, i, count } => format!("ret_t{t}_k{i}_c{count}"),
        St::ToSep { t, i } => format!("tosep_t{t}_k{i}"),
        St::Accept => "accept".into(),
        St::Erase { seg, pos0 } => format!("erase_s{seg}_{}", *pos0 as u8),
        St::EraseTail => "erase_tail".into(),
        St::RewindSep(c) => format!("rewind_sep{c}"),
        St::CPeek => "compact_peek".into(),
        St::ZRead { fin } => format!("zread_{}", *fin as u8),
        St::ZWrite { fin, .. } => format!("zwrite_{}", *fin as u8),
        St::ZSkip { fin } => format!("zskip_{}", *fin as u8),
        St::ZLast { fin } => format!("zlast_{}", *fin as u8),
        St::ZEnd => "zend".into(),
        St::RewindA => "rewind_a".into(),
        St::RewindB { digits } => format!("rewind_b{}", *digits as u8),
        St::Done => "done".into(),
    }
}

struct SingleTape<'a> {
    m: &'a Machine,
    lay: Layout,
    k: usize,
    targets: Vec<Target>,
    target_ix: HashMap<(StateId, Vec<Sym>), usize>,
    tail: Vec<char>,
    numeric_out: Option<usize>,
}

impl<'a> SingleTape<'a> {
    fn entry(&self, q: StateId) -> St {
        if self.m.is_accept(q) {
            match self.numeric_out {
                Some(_) => St::Erase { seg: 0, pos0: true },
                None => St::Accept,
            }
        } else {
            St::Scan { q, seg: 0, part: Vec::new() }
        }
    }

    fn all(&self) -> Vec<char> {
        self.lay.alphabet()
    }

    fn expand(&self, s: &St) -> Node<St> {
        use Move::{L, R};
        let lay = &self.lay;
        let sep = lay.sep;
        let bl = BLANK;
        let mut e = Vec::new();
        match s {
            St::InitStart => {
                for &c in &lay.gamma {
                    let sym = self.m.sym(c).unwrap();
                    if c == bl {
                        let mut rest = vec![bl, lay.dot(sym)];
                        rest.extend(&self.tail);
                        e.push(Edge::one(c, St::Drain(rest), sep, R));
                    } else if self.m.is_input(sym) {
                        e.push(Edge::one(c, St::Init(vec![bl, lay.dot(sym)]), sep, R));
                    }
                }
            }
            St::Init(queue) => {
                for &c in &lay.gamma {
                    let sym = self.m.sym(c).unwrap();
                    let mut rest: Vec<char> = queue[1..].to_vec();
                    if c == bl {
                        rest.extend(&self.tail);
                        e.push(Edge::one(c, St::Drain(rest), queue[0], R));
                    } else if self.m.is_input(sym) {
                        rest.push(c);
                        e.push(Edge::one(c, St::Init(rest), queue[0], R));
                    }
                }
            }
            St::Drain(rest) => {
                let next = if rest.len() == 1 { St::Back(0) } else { St::Drain(rest[1..].to_vec()) };
                e.push(Edge::one(bl, next, rest[0], R));
            }
            St::Back(c) => {
                for g in self.all() {
                    if g == sep {
                        if c + 1 == self.k + 1 {
                            e.push(Edge::one(g, self.entry(self.m.initial()), g, R));
                        } else {
                            e.push(Edge::one(g, St::Back(c + 1), g, L));
                        }
                    } else {
                        e.push(Edge::one(g, St::Back(*c), g, L));
                    }
                }
            }
            St::Scan { q, seg, part } => {
                for g in self.all() {
                    match lay.classify(g) {
                        Cell::Sep => {
                            if seg + 1 == self.k {
                                if let Some(&t) = self.target_ix.get(&(*q, part.clone())) {
                                    e.push(Edge::one(g, St::Seek { t, i: self.k - 1 }, g, L));
                                }
                            } else {
                                let next = St::Scan { q: *q, seg: seg + 1, part: part.clone() };
                                e.push(Edge::one(g, next, g, R));
                            }
                        }
                        Cell::Dotted(x) => {
                            if part.len() == *seg {
                                let mut p = part.clone();
                                p.push(x);
                                e.push(Edge::one(g, St::Scan { q: *q, seg: *seg, part: p }, g, R));
                            }
                        }
                        Cell::Plain(_) => e.push(Edge::one(g, s.clone(), g, R)),
                    }
                }
            }
            St::Seek { t, i } => {
                let tg = &self.targets[*t];
                for g in self.all() {
                    match lay.classify(g) {
                        Cell::Dotted(_) => {
                            let w = lay.gamma[tg.write[*i] as usize];
                            let (next, mv) = match tg.moves[*i] {
                                L => (St::DotL { t: *t, i: *i }, L),
                                R => (St::DotR { t: *t, i: *i }, R),
                            };
                            e.push(Edge::one(g, next, w, mv));
                        }
                        Cell::Plain(_) => e.push(Edge::one(g, s.clone(), g, L)),
                        Cell::Sep => {}
                    }
                }
            }
            St::DotL { t, i } => {
                for g in self.all() {
                    if let Cell::Plain(x) = lay.classify(g) {
                        e.push(Edge::one(g, St::ToSep { t: *t, i: *i }, lay.dot(x), L));
                    }
                }
            }
            St::DotR { t, i } => {
                for g in self.all() {
                    match lay.classify(g) {
                        Cell::Plain(x) => e.push(Edge::one(g, St::ToSep { t: *t, i: *i }, lay.dot(x), L)),
                        Cell::Sep => e.push(Edge::one(
                            g,
                            St::Shift { t: *t, i: *i, carry: sep, n: 0 },
                            lay.dot(lay.blank_ix()),
                            R,
                        )),
                        Cell::Dotted(_) => {}
                    }
                }
            }
            St::Shift { t, i, carry, n } => {
                let n2 = if *carry == sep { n + 1 } else { *n };
                for g in self.all() {
                    if n2 == self.k - i {
                        if g == bl {
                            let next = if *i + 1 == self.k {
                                St::ToSep { t: *t, i: *i }
                            } else {
                                St::Return { t: *t, i: *i, count: 0 }
                            };
                            e.push(Edge::one(g, next, *carry, L));
                        }
                    } else {
                        e.push(Edge::one(g, St::Shift { t: *t, i: *i, carry: g, n: n2 }, *carry, R));
                    }
                }
            }
            St::Return { t, i, count } => {
                for g in self.all() {
                    if g == sep {
                        if count + 1 == self.k - 1 - i {
                            e.push(Edge::one(g, St::ToSep { t: *t, i: *i }, g, L));
                        } else {
                            e.push(Edge::one(g, St::Return { t: *t, i: *i, count: count + 1 }, g, L));
                        }
                    } else {
                        e.push(Edge::one(g, s.clone(), g, L));
                    }
                }
            }
            St::ToSep { t, i } => {
                for g in self.all() {
                    if g == sep {
                        if *i == 0 {
                            e.push(Edge::one(g, self.entry(self.targets[*t].state), g, R));
                        } else {
                            e.push(Edge::one(g, St::Seek { t: *t, i: i - 1 }, g, L));
                        }
                    } else {
                        e.push(Edge::one(g, s.clone(), g, L));
                    }
                }
            }
            St::Accept | St::Done => return Node::accept(),
            St::Erase { seg, pos0 } => {
                let o = self.numeric_out.unwrap();
                for g in self.all() {
                    match lay.classify(g) {
                        Cell::Sep => {
                            if *seg == o {
                                e.push(Edge::one(g, St::EraseTail, sep, R));
                            } else {
                                e.push(Edge::one(g, St::Erase { seg: seg + 1, pos0: true }, bl, R));
                            }
                        }
                        Cell::Dotted(x) | Cell::Plain(x) => {
                            let w = if *seg == o && !*pos0 { lay.gamma[x as usize] } else { bl };
                            e.push(Edge::one(g, St::Erase { seg: *seg, pos0: false }, w, R));
                        }
                    }
                }
            }
            St::EraseTail => {
                for g in self.all() {
                    if g == bl {
                        e.push(Edge::one(g, St::RewindSep(0), bl, L));
                    } else {
                        e.push(Edge::one(g, St::EraseTail, bl, R));
                    }
                }
            }
            St::RewindSep(c) => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    if g == sep {
                        if *c == 1 {
                            e.push(Edge::one(g, St::CPeek, g, R));
                        } else {
                            e.push(Edge::one(g, St::RewindSep(c + 1), g, L));
                        }
                    } else {
                        e.push(Edge::one(g, s.clone(), g, L));
                    }
                }
            }
            St::CPeek => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    if g == sep {
                        e.push(Edge::one(g, St::ZEnd, bl, L));
                    } else if g == bl {
                        e.push(Edge::one(g, St::ZRead { fin: false }, bl, R));
                    } else {
                        e.push(Edge::one(g, St::ZWrite { fin: true, c: g }, g, L));
                    }
                }
            }
            St::ZRead { fin } => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    if g == sep {
                        e.push(Edge::one(g, St::ZLast { fin: *fin }, bl, L));
                    } else {
                        e.push(Edge::one(g, St::ZWrite { fin: *fin, c: g }, g, L));
                    }
                }
            }
            St::ZWrite { fin, c } => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    e.push(Edge::one(g, St::ZSkip { fin: *fin }, *c, R));
                }
            }
            St::ZLast { fin } => {
                let (next, w) = if *fin { (St::RewindB { digits: false }, bl) } else { (St::RewindA, sep) };
                for g in lay.gamma.iter().copied().chain([sep]) {
                    e.push(Edge::one(g, next.clone(), w, L));
                }
            }
            St::ZSkip { fin } => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    e.push(Edge::one(g, St::ZRead { fin: *fin }, g, R));
                }
            }
            St::ZEnd => {
                e.push(Edge::one(sep, St::RewindB { digits: true }, bl, L));
            }
            St::RewindA => {
                for g in lay.gamma.iter().copied().chain([sep]) {
                    if g == sep {
                        e.push(Edge::one(g, St::CPeek, g, R));
                    } else {
                        e.push(Edge::one(g, St::RewindA, g, L));
                    }
                }
            }
            St::RewindB { digits } => {
                for &g in &lay.gamma {
                    if g == bl {
                        if *digits {
                            e.push(Edge::one(g, St::Done, bl, R));
                        } else {
                            e.push(Edge::one(g, s.clone(), bl, L));
                        }
                    } else {
                        e.push(Edge::one(g, St::RewindB { digits: true }, g, L));
                    }
                }
            }
        }
        Node::edges(e)
    }
}

fn single_tape_build(m: &Machine, numeric_out: Option<usize>) -> Result<Machine, ValidationError> {
    if !m.is_deterministic() {
        return Err(ValidationError::new("to_single_tape requires a deterministic machine"));
    }
    if m.mode() != TapeMode::SemiInfinite {
        return Err(ValidationError::new("to_single_tape requires semi-infinite tapes"));
    }
    let k = m.tapes();
    if k > SINGLE_TAPE_MAX_TAPES {
        return Err(ValidationError::new(format!(
            "to_single_tape supports at most {SINGLE_TAPE_MAX_TAPES} tapes, got {k}"
        )));
    }
    if m.glyphs().len() > SINGLE_TAPE_MAX_SYMBOLS {
        return Err(ValidationError::new(format!(
            "to_single_tape supports at most {SINGLE_TAPE_MAX_SYMBOLS} tape symbols, got {}",
            m.glyphs().len()
        )));
    }
    let lay = Layout::new(m)?;
    let mut targets: Vec<Target> = Vec::new();
    let mut tix: HashMap<Target, usize> = HashMap::new();
    let mut target_ix = HashMap::new();
    for (q, read) in m.entries() {
        let t = m.targets(*q, read)[0].clone();
        let n = *tix.entry(t.clone()).or_insert_with(|| {
            targets.push(t);
            targets.len() - 1
        });
        target_ix.insert((*q, read.clone()), n);
    }
    let blank = lay.blank_ix();
    let mut tail = vec![lay.sep];
    for _ in 1..k {
        tail.extend([BLANK, lay.dot(blank), lay.sep]);
    }
    let st = SingleTape { m, k, targets, target_ix, tail, numeric_out, lay };
    let mut spec = MachineSpec::new(1, "", "");
    spec.input_alphabet = m.spec().input_alphabet.clone();
    spec.tape_alphabet = st.lay.alphabet();
    explore(&mut spec, St::InitStart, |s| st.expand(s), label);
    validate_machine(spec)
}

/// Compiles a deterministic multitape machine into an equivalent single-tape
/// machine. One-tape machines are returned unchanged.
pub fn to_single_tape(m: &Machine) -> Result<Machine, ValidationError> {
    if m.tapes() == 1 {
        if !m.is_deterministic() {
            return Err(ValidationError::new("to_single_tape requires a deterministic machine"));
        }
        return Ok(m.clone());
    }
    single_tape_build(m, None)
}

/// Like [`to_single_tape`], but on acceptance erases every simulated tape
/// except the source's output tape and leaves that tape's content starting
/// at cell 1 with the head there.
pub fn to_single_tape_numeric(m: &Machine) -> Result<Machine, ValidationError> {
    if m.tapes() == 1 {
        return to_single_tape(m);
    }
    single_tape_build(m, Some(m.output_tape()))
}

/// Splits a compiled single-tape configuration back into the simulated
/// tapes' trimmed contents (cell 0 dropped, dots removed).
pub fn decode_layout(single: &Machine, c: &Configuration) -> Vec<String> {
    let tp = &c.tapes[0];
    let (start, body) = tp.content();
    let glyphs: Vec<char> = (start..start + body.len() as i64)
        .map(|p| single.glyph(tp.at(p)))
        .collect();
    let s: String = glyphs.iter().collect();
    let g = single.glyphs();
    let n = (g.len() - 1) / 2;
    let sep = g[g.len() - 1];
    let mut parts: Vec<&str> = s.split(sep).collect();
    if parts.first() == Some(&"") {
        parts.remove(0);
    }
    if parts.last() == Some(&"") {
        parts.pop();
    }
    parts
        .iter()
        .map(|seg| {
            let undotted: String = seg
                .chars()
                .skip(1)
                .map(|ch| match g[n..2 * n].iter().position(|&d| d == ch) {
                    Some(i) => g[i],
                    None => ch,
                })
                .collect();
            undotted.trim_matches(BLANK).to_string()
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Bin {
    Start,
    ToEnd,
    AtRaw,
    Peek(char),
    Ins { queue: Vec<char>, drop: u8, fin: bool },
    Flush { rest: Vec<char>, fin: bool },
    Ret { fin: bool },
    Rd { q: StateId, part: Vec<char> },
    Wr { q: StateId, code: Vec<char>, mv: Move },
    RSkip { q: StateId, n: usize },
    LChk { q: StateId },
    LSkip { q: StateId, n: usize },
    CDec { first: bool, part: Vec<char> },
    CErase,
    CRew { digits: bool },
    CToEnd { c: char, s: usize },
    CShift { c: char, queue: Vec<char> },
    CPlace { c: char },
    CGap,
    Done,
}

fn bin_label(b: &Bin) -> String {
    match b {
        Bin::Start => "start".into(),
        Bin::ToEnd => "expand_end".into(),
        Bin::AtRaw => "expand_raw".into(),
        Bin::Peek(_) => "expand_peek".into(),
        Bin::Ins { fin, .. } => format!("expand_ins{}", *fin as u8),
        Bin::Flush { fin, .. } => format!("expand_flush{}", *fin as u8),
        Bin::Ret { fin } => format!("expand_ret{}", *fin as u8),
        Bin::Rd { q, part } => format!("read_q{q}_{}", part.len()),
        Bin::Wr { q, code, .. } => format!("write_q{q}_{}", code.len()),
        Bin::RSkip { q, n } => format!("right_q{q}_{n}"),
        Bin::LChk { q } => format!("leftchk_q{q}"),
        Bin::LSkip { q, n } => format!("left_q{q}_{n}"),
        Bin::CDec { first, part } => format!("cdec{}_{}", *first as u8, part.len()),
        Bin::CErase => "cerase".into(),
        Bin::CRew { digits } => format!("crewind{}", *digits as u8),
        Bin::CToEnd { .. } => "ctoend".into(),
        Bin::CShift { .. } => "cshift".into(),
        Bin::CPlace { .. } => "cplace".into(),
        Bin::CGap => "cgap".into(),
        Bin::Done => "done".into(),
    }
}

/// Width of a block code for an alphabet of `n` symbols.
pub fn block_width(n: usize) -> usize {
    let mut w = 1;
    while (1usize << w) < n {
        w += 1;
    }
    w.max(2)
}

struct Binary<'a> {
    m: &'a Machine,
    w: usize,
    codes: Vec<Vec<char>>,
    decode: HashMap<Vec<char>, Sym>,
}

const BIN: [char; 3] = ['_', '0', '1'];

impl<'a> Binary<'a> {
    fn entry(&self, q: StateId) -> Bin {
        if self.m.is_accept(q) {
            Bin::CDec { first: true, part: Vec::new() }
        } else {
            Bin::Rd { q, part: Vec::new() }
        }
    }

    fn code_of(&self, c: char) -> Vec<char> {
        self.codes[self.m.sym(c).unwrap() as usize].clone()
    }

    fn expand(&self, b: &Bin) -> Node<Bin> {
        use Move::{L, R};
        let w = self.w;
        let mut e = Vec::new();
        match b {
            Bin::Start => {
                for c in ['0', '1'] {
                    if self.m.sym(c).map(|s| self.m.is_input(s)).unwrap_or(false) {
                        e.push(Edge::one(c, Bin::ToEnd, c, R));
                    }
                }
                let first = self.entry(self.m.initial());
                let node = self.expand(&first);
                if node.accept {
                    return node;
                }
                e.extend(node.edges.into_iter().filter(|x| x.read[0] == '_'));
            }
            Bin::ToEnd => {
                e.push(Edge::one('0', Bin::ToEnd, '0', R));
                e.push(Edge::one('1', Bin::ToEnd, '1', R));
                e.push(Edge::one('_', Bin::AtRaw, '_', L));
            }
            Bin::AtRaw => {
                for c in ['0', '1'] {
                    e.push(Edge::one(c, Bin::Peek(c), c, L));
                }
            }
            Bin::Peek(x) => {
                let code = self.code_of(*x);
                e.push(Edge::one('_', Bin::Ins { queue: code.clone(), drop: 2, fin: true }, '_', R));
                let mut q = vec!['_'];
                q.extend(code);
                for c in ['0', '1'] {
                    e.push(Edge::one(c, Bin::Ins { queue: q.clone(), drop: 2, fin: false }, c, R));
                }
            }
            Bin::Ins { queue, drop, fin } => {
                for z in BIN {
                    if queue.is_empty() {
                        if z == '_' {
                            e.push(Edge::one(z, Bin::Ret { fin: *fin }, z, L));
                        } else {
                            e.push(Edge::one(z, b.clone(), z, R));
                        }
                        continue;
                    }
                    let mut rest = queue[1..].to_vec();
                    if *drop > 0 {
                        e.push(Edge::one(z, Bin::Ins { queue: rest, drop: drop - 1, fin: *fin }, queue[0], R));
                    } else if z == '_' {
                        e.push(Edge::one(z, Bin::Flush { rest, fin: *fin }, queue[0], R));
                    } else {
                        rest.push(z);
                        e.push(Edge::one(z, Bin::Ins { queue: rest, drop: 0, fin: *fin }, queue[0], R));
                    }
                }
            }
            Bin::Flush { rest, fin } => {
                if rest.is_empty() {
                    e.push(Edge::one('_', Bin::Ret { fin: *fin }, '_', L));
                } else {
                    e.push(Edge::one('_', Bin::Flush { rest: rest[1..].to_vec(), fin: *fin }, rest[0], R));
                }
            }
            Bin::Ret { fin } => {
                e.push(Edge::one('0', b.clone(), '0', L));
                e.push(Edge::one('1', b.clone(), '1', L));
                if *fin {
                    e.push(Edge::one('_', self.entry(self.m.initial()), '_', R));
                } else {
                    e.push(Edge::one('_', Bin::AtRaw, '_', L));
                }
            }
            Bin::Rd { q, part } => {
                for z in BIN {
                    let mut p = part.clone();
                    p.push(z);
                    if p.len() < w {
                        e.push(Edge::one(z, Bin::Rd { q: *q, part: p }, z, R));
                        continue;
                    }
                    let sym = if p.iter().all(|&c| c == '_') {
                        Some(self.m.blank())
                    } else {
                        self.decode.get(&p).copied()
                    };
                    let Some(sym) = sym else { continue };
                    let Some(t) = self.m.targets(*q, &[sym]).first() else { continue };
                    let code = self.codes[t.write[0] as usize].clone();
                    let last = code[w - 1];
                    let rest = code[..w - 1].to_vec();
                    e.push(Edge::one(z, Bin::Wr { q: t.state, code: rest, mv: t.moves[0] }, last, L));
                }
            }
            Bin::Wr { q, code, mv } => {
                let c = *code.last().unwrap();
                let rest = code[..code.len() - 1].to_vec();
                for z in BIN {
                    if !rest.is_empty() {
                        e.push(Edge::one(z, Bin::Wr { q: *q, code: rest.clone(), mv: *mv }, c, L));
                    } else if *mv == R {
                        e.push(Edge::one(z, Bin::RSkip { q: *q, n: w - 1 }, c, R));
                    } else {
                        e.push(Edge::one(z, Bin::LChk { q: *q }, c, L));
                    }
                }
            }
            Bin::RSkip { q, n } => {
                let next = if *n == 1 { self.entry(*q) } else { Bin::RSkip { q: *q, n: n - 1 } };
                for z in BIN {
                    e.push(Edge::one(z, next.clone(), z, R));
                }
            }
            Bin::LChk { q } => {
                let next = if w == 2 { self.entry(*q) } else { Bin::LSkip { q: *q, n: w - 2 } };
                for z in ['0', '1'] {
                    e.push(Edge::one(z, next.clone(), z, L));
                }
                if self.m.is_accept(*q) {
                    e.push(Edge::one('_', self.entry(*q), '_', R));
                } else if let Some(t) = self.m.targets(*q, &[self.m.blank()]).first() {
                    if t.moves[0] == R && t.write[0] == self.m.blank() {
                        e.push(Edge::one('_', self.entry(t.state), '_', R));
                    }
                }
            }
            Bin::LSkip { q, n } => {
                let next = if *n == 1 { self.entry(*q) } else { Bin::LSkip { q: *q, n: n - 1 } };
                for z in BIN {
                    e.push(Edge::one(z, next.clone(), z, L));
                }
            }
            Bin::CDec { first, part } => {
                for z in BIN {
                    let mut p = part.clone();
                    p.push(z);
                    if p.len() < w {
                        e.push(Edge::one(z, Bin::CDec { first: *first, part: p }, '_', R));
                        continue;
                    }
                    let sym = if p.iter().all(|&c| c == '_') {
                        Some(self.m.blank())
                    } else {
                        self.decode.get(&p).copied()
                    };
                    let Some(sym) = sym else { continue };
                    let c = self.m.glyph(sym);
                    if sym == self.m.blank() {
                        e.push(Edge::one(z, Bin::CErase, '_', R));
                    } else if c == '0' || c == '1' {
                        let s = if *first { w - 2 } else { w - 1 };
                        e.push(Edge::one(z, Bin::CToEnd { c, s }, '_', R));
                    }
                }
            }
            Bin::CErase => {
                e.push(Edge::one('0', Bin::CErase, '_', R));
                e.push(Edge::one('1', Bin::CErase, '_', R));
                e.push(Edge::one('_', Bin::CRew { digits: false }, '_', L));
            }
            Bin::CRew { digits } => {
                e.push(Edge::one('0', Bin::CRew { digits: true }, '0', L));
                e.push(Edge::one('1', Bin::CRew { digits: true }, '1', L));
                if *digits {
                    e.push(Edge::one('_', Bin::Done, '_', R));
                } else {
                    e.push(Edge::one('_', b.clone(), '_', L));
                }
            }
            Bin::CToEnd { c, s } => {
                e.push(Edge::one('0', b.clone(), '0', R));
                e.push(Edge::one('1', b.clone(), '1', R));
                e.push(Edge::one('_', Bin::CShift { c: *c, queue: vec!['_'; *s] }, '_', L));
            }
            Bin::CShift { c, queue } => {
                for z in BIN {
                    if z == '_' {
                        if queue.is_empty() {
                            e.push(Edge::one(z, Bin::CPlace { c: *c }, '_', L));
                        } else {
                            let next = Bin::CShift { c: *c, queue: queue[1..].to_vec() };
                            e.push(Edge::one(z, next, queue[0], L));
                        }
                    } else if queue.is_empty() {
                        e.push(Edge::one(z, b.clone(), z, L));
                    } else {
                        let mut q = queue[1..].to_vec();
                        q.push(z);
                        e.push(Edge::one(z, Bin::CShift { c: *c, queue: q }, queue[0], L));
                    }
                }
            }
            Bin::CPlace { c } => {
                e.push(Edge::one('_', Bin::CGap, *c, R));
            }
            Bin::CGap => {
                e.push(Edge::one('_', Bin::CDec { first: false, part: Vec::new() }, '_', R));
            }
            Bin::Done => return Node::accept(),
        }
        Node::edges(e)
    }
}

/// Re-encodes a single-tape numeric machine over `{_, 0, 1}`.
///
/// Each source cell becomes a block of [`block_width`] binary cells; a block
/// of blanks reads as the source blank. The generated machine first expands
/// its raw input into blocks, then simulates the source, and on acceptance
/// decodes the tape back into a raw numeral at cell 1. The source must accept
/// with its head on cell 1.
pub fn recode_binary(m: &Machine) -> Result<Machine, ValidationError> {
    if m.tapes() != 1 || !m.is_deterministic() || m.mode() != TapeMode::SemiInfinite {
        return Err(ValidationError::new(
            "recode_binary requires a deterministic single-tape semi-infinite machine",
        ));
    }
    if m.spec().input_alphabet.iter().any(|&c| c != '0' && c != '1') {
        return Err(ValidationError::new("recode_binary requires input alphabet within {0,1}"));
    }
    let n = m.glyphs().len();
    let w = block_width(n);
    let mut codes = Vec::with_capacity(n);
    let mut decode = HashMap::new();
    for i in 0..n {
        let code: Vec<char> = (0..w)
            .map(|b| if (i >> (w - 1 - b)) & 1 == 1 { '1' } else { '0' })
            .collect();
        decode.insert(code.clone(), i as Sym);
        codes.push(code);
    }
    let bin = Binary { m, w, codes, decode };
    let mut spec = MachineSpec::new(1, "", "_01");
    spec.input_alphabet = m.spec().input_alphabet.clone();
    explore(&mut spec, Bin::Start, |b| bin.expand(b), bin_label);
    validate_machine(spec)
}

/// A node address in the computation tree: digits in `1..=b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AddressString(pub Vec<u32>);

impl AddressString {
    pub fn root() -> AddressString {
        AddressString(Vec::new())
    }
    pub fn parse(s: &str) -> Option<AddressString> {
        s.chars().map(|c| c.to_digit(10).filter(|&d| d >= 1)).collect::<Option<Vec<_>>>().map(AddressString)
    }
}

impl std::fmt::Display for AddressString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Shortlex successor over the digit alphabet `1..=b`.
pub fn next_address(a: &AddressString, b: u32) -> AddressString {
    assert!(b >= 1, "branching bound must be positive");
    let mut d = a.0.clone();
    match d.iter().rposition(|&x| x < b) {
        Some(i) => {
            d[i] += 1;
            for x in d.iter_mut().skip(i + 1) {
                *x = 1;
            }
            AddressString(d)
        }
        None => AddressString(vec![1; d.len() + 1]),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NdVerdict {
    /// An accepting node, identified by its address.
    Accept(AddressString),
    NotFound,
}

/// Replays the branch choices in `addr` from the initial configuration.
/// Returns `Some(true)` if an accepting state is met along the way,
/// `Some(false)` if the path is valid but not accepting, `None` if the
/// address names no node.
fn replay(m: &Machine, init: &Configuration, addr: &AddressString) -> Option<bool> {
    let mut c = init.clone();
    if m.is_accept(c.state) {
        return Some(true);
    }
    for &d in &addr.0 {
        let read = c.scanned();
        let ts = m.targets(c.state, &read);
        let t = ts.get(d as usize - 1)?;
        if !apply_target(m, &mut c, t) {
            return None;
        }
        if m.is_accept(c.state) {
            return Some(true);
        }
    }
    Some(false)
}

/// Breadth-first simulation of a nondeterministic machine. Addresses are
/// visited in shortlex order up to length `max_depth`, each replayed from the
/// root. `node_fuel` caps the number of addresses visited.
pub fn nd_run(m: &Machine, input: &str, max_depth: usize, node_fuel: u64) -> Result<NdVerdict, ValidationError> {
    let words: Vec<Sym> = input
        .chars()
        .map(|c| {
            m.sym(c)
                .filter(|&s| m.is_input(s))
                .ok_or_else(|| ValidationError::new(format!("input symbol '{c}' not in input alphabet")))
        })
        .collect::<Result<_, _>>()?;
    let init = Configuration::initial(m, &[words]);
    let b = m.branching().max(1) as u32;
    let mut addr = AddressString::root();
    let mut visited = 0u64;
    while addr.0.len() <= max_depth && visited < node_fuel {
        visited += 1;
        if replay(m, &init, &addr) == Some(true) {
            return Ok(NdVerdict::Accept(addr));
        }
        addr = next_address(&addr, b);
    }
    Ok(NdVerdict::NotFound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Diff,
    SymDiff,
    Complement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CombineError {
    #[error("machine did not halt within fuel; it is not a decider")]
    NotADecider,
    #[error("{0} requires a second decider")]
    MissingOperand(&'static str),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn decide(m: &Machine, w: &str, fuel: u64) -> Result<bool, CombineError> {
    match crate::tm::run(m, w, fuel, false)?.verdict {
        Verdict::Accept => Ok(true),
        Verdict::Reject => Ok(false),
        Verdict::FuelExhausted => Err(CombineError::NotADecider),
    }
}

/// Boolean combination of decider verdicts on `w`.
pub fn decide_combine(
    op: SetOp,
    d1: &Machine,
    d2: Option<&Machine>,
    w: &str,
    fuel: u64,
) -> Result<Decision, CombineError> {
    let a = decide(d1, w, fuel)?;
    let r = if op == SetOp::Complement {
        !a
    } else {
        let d2 = d2.ok_or(CombineError::MissingOperand(match op {
            SetOp::Union => "union",
            SetOp::Intersect => "intersect",
            SetOp::Diff => "diff",
            _ => "symdiff",
        }))?;
        let b = decide(d2, w, fuel)?;
        match op {
            SetOp::Union => a || b,
            SetOp::Intersect => a && b,
            SetOp::Diff => a && !b,
            SetOp::SymDiff => a != b,
            SetOp::Complement => unreachable!(),
        }
    };
    Ok(if r { Decision::Accept } else { Decision::Reject })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DovetailVerdict {
    Accept,
    Reject,
    FuelExhausted,
    /// Both recognizers halted without accepting.
    NoVerdict,
}

/// Interleaves single steps of two recognizers: `m1` accepting first means
/// Accept, `m2` accepting first means Reject. Each machine gets `fuel` steps.
pub fn dovetail_decide(m1: &Machine, m2: &Machine, w: &str, fuel: u64) -> Result<DovetailVerdict, ValidationError> {
    let mk = |m: &Machine| -> Result<Configuration, ValidationError> {
        let syms = w
            .chars()
            .map(|c| m.sym(c).filter(|&s| m.is_input(s)).ok_or_else(|| ValidationError::new(format!("input symbol '{c}' not in input alphabet"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Configuration::initial(m, &[syms]))
    };
    let mut c = [mk(m1)?, mk(m2)?];
    let ms = [m1, m2];
    let mut alive = [true, true];
    for _ in 0..=fuel {
        for i in 0..2 {
            if !alive[i] {
                continue;
            }
            if ms[i].is_accept(c[i].state) {
                return Ok(if i == 0 { DovetailVerdict::Accept } else { DovetailVerdict::Reject });
            }
            if !crate::tm::step_in_place(ms[i], &mut c[i]) {
                alive[i] = false;
            }
        }
        if !alive[0] && !alive[1] {
            return Ok(DovetailVerdict::NoVerdict);
        }
    }
    Ok(DovetailVerdict::FuelExhausted)
}

/// Deterministic finite automaton with a total transition map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub initial: usize,
    pub accept: Vec<bool>,
    pub alphabet: Vec<char>,
    /// `delta[q][a]` is the successor of `q` on `alphabet[a]`.
    pub delta: Vec<Vec<usize>>,
}

/// Nondeterministic finite automaton without ε-moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub states: Vec<String>,
    pub initial: usize,
    pub accept: Vec<bool>,
    pub alphabet: Vec<char>,
    pub delta: Vec<Vec<Vec<usize>>>,
}

impl Dfa {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.states.len();
        if self.initial >= n || self.accept.len() != n || self.delta.len() != n {
            return Err(ValidationError::new("dfa state tables inconsistent"));
        }
        for (q, row) in self.delta.iter().enumerate() {
            if row.len() != self.alphabet.len() {
                return Err(ValidationError::new(format!(
                    "dfa transition map not total at state '{}'",
                    self.states[q]
                )));
            }
            if row.iter().any(|&p| p >= n) {
                return Err(ValidationError::new("dfa transition to unknown state"));
            }
        }
        Ok(())
    }
}

impl Nfa {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let n = self.states.len();
        if self.initial >= n || self.accept.len() != n || self.delta.len() != n {
            return Err(ValidationError::new("nfa state tables inconsistent"));
        }
        for row in &self.delta {
            if row.len() != self.alphabet.len() || row.iter().flatten().any(|&p| p >= n) {
                return Err(ValidationError::new("nfa transition table malformed"));
            }
        }
        Ok(())
    }
}

fn letter(alpha: &[char], c: char) -> Result<usize, ValidationError> {
    alpha
        .iter()
        .position(|&a| a == c)
        .ok_or_else(|| ValidationError::new(format!("symbol '{c}' outside the automaton alphabet")))
}

pub fn dfa_accepts(d: &Dfa, w: &str) -> Result<bool, ValidationError> {
    let mut q = d.initial;
    for c in w.chars() {
        q = d.delta[q][letter(&d.alphabet, c)?];
    }
    Ok(d.accept[q])
}

/// True iff no accepting state is reachable from the initial state.
pub fn dfa_is_empty(d: &Dfa) -> bool {
    let mut seen = vec![false; d.states.len()];
    let mut queue = VecDeque::from([d.initial]);
    seen[d.initial] = true;
    while let Some(q) = queue.pop_front() {
        if d.accept[q] {
            return false;
        }
        for &p in &d.delta[q] {
            if !seen[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    true
}

/// Membership by on-the-fly subset simulation.
pub fn nfa_accepts(n: &Nfa, w: &str) -> Result<bool, ValidationError> {
    let mut cur: BTreeSet<usize> = BTreeSet::from([n.initial]);
    for c in w.chars() {
        let a = letter(&n.alphabet, c)?;
        cur = cur.iter().flat_map(|&q| n.delta[q][a].iter().copied()).collect();
    }
    Ok(cur.iter().any(|&q| n.accept[q]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::{copier_machine, contains_11_machine, run, run_numeric, zeros_ones_machine};

    #[test]
    fn addresses_roll_over() {
        let a = |s: &str| AddressString::parse(s).unwrap();
        assert_eq!(next_address(&AddressString::root(), 2), a("1"));
        assert_eq!(next_address(&a("12"), 2), a("21"));
        assert_eq!(next_address(&a("22"), 2), a("111"));
    }

    #[test]
    fn copier_single_tape_agrees() {
        let m = copier_machine();
        let s = to_single_tape(&m).unwrap();
        for w in ["", "0", "01", "110"] {
            let a = run(&m, w, 10_000, false).unwrap();
            let b = run(&s, w, 100_000, false).unwrap();
            assert_eq!(a.verdict, b.verdict, "input {w:?}");
            let tapes: Vec<String> = (0..2).map(|i| a.final_config.tape_string(&m, i)).collect();
            assert_eq!(decode_layout(&s, &b.final_config), tapes);
        }
    }

    #[test]
    fn single_tape_identity_for_one_tape() {
        let m = zeros_ones_machine();
        let s = to_single_tape(&m).unwrap();
        assert_eq!(s.spec(), m.spec());
    }

    #[test]
    fn numeric_cleanup_and_binary() {
        let m = copier_machine();
        let s = to_single_tape_numeric(&m).unwrap();
        for n in 0..4 {
            assert_eq!(run_numeric(&s, &[n], 100_000).unwrap(), n);
        }
        let b = recode_binary(&s).unwrap();
        assert_eq!(b.glyphs().len(), 3);
        for n in 0..4 {
            assert_eq!(run_numeric(&b, &[n], 1_000_000).unwrap(), n);
        }
    }

    #[test]
    fn nd_guesser() {
        let m = contains_11_machine();
        assert!(matches!(nd_run(&m, "011", 10, u64::MAX).unwrap(), NdVerdict::Accept(_)));
        assert_eq!(nd_run(&m, "000", 10, u64::MAX).unwrap(), NdVerdict::NotFound);
        let d = zeros_ones_machine();
        assert!(matches!(nd_run(&d, "01", 10, u64::MAX).unwrap(), NdVerdict::Accept(_)));
    }

    #[test]
    fn dfa_even_ones() {
        let d = Dfa {
            states: vec!["e".into(), "o".into()],
            initial: 0,
            accept: vec![true, false],
            alphabet: vec!['0', '1'],
            delta: vec![vec![0, 1], vec![1, 0]],
        };
        d.validate().unwrap();
        assert!(dfa_accepts(&d, "11").unwrap());
        assert!(!dfa_accepts(&d, "1").unwrap());
        assert!(dfa_accepts(&d, "2").is_err());
        assert!(!dfa_is_empty(&d));
    }

    #[test]
    fn nfa_last_symbol() {
        let n = Nfa {
            states: vec!["a".into(), "b".into()],
            initial: 0,
            accept: vec![false, true],
            alphabet: vec!['0', '1'],
            delta: vec![vec![vec![0], vec![0, 1]], vec![vec![], vec![]]],
        };
        assert!(!nfa_accepts(&n, "10").unwrap());
        assert!(nfa_accepts(&n, "01").unwrap());
    }
}
