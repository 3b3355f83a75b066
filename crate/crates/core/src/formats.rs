//! Text formats for machines (`.tm`), partial recursive functions (`.prf`)
//! and λ-terms (`.lam`), with canonical printers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::error::ValidationError;
use crate::lambda::{church, Name, Node, Term};
use crate::prf::{arity_check, stdlib, PrfExpr, PrfNode};
use crate::tm::{MachineSpec, Move, Rule, TapeMode, BLANK};
use crate::tm_transform::{Dfa, Nfa};

/// A syntax error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Anything that can go wrong reading a source file.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Tm,
    Prf,
    Lam,
}

impl Kind {
    pub fn from_path(p: &Path) -> Option<Kind> {
        match p.extension()?.to_str()? {
            "tm" => Some(Kind::Tm),
            "prf" => Some(Kind::Prf),
            "lam" => Some(Kind::Lam),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Kind::Tm => "tm",
            Kind::Prf => "prf",
            Kind::Lam => "lam",
        }
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

// ---------------------------------------------------------------------- .tm

/// The contents of a `.tm` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmFile {
    Machine(MachineSpec),
    Dfa(Dfa),
    Nfa(Nfa),
}

/// Fields of `s` with their starting columns, split at whitespace and
/// optionally at commas.
fn split_fields(s: &str, col0: usize, commas: bool) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        let sep = c.is_whitespace() || (commas && c == ',');
        match (sep, start) {
            (true, Some(b)) => {
                out.push((b, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out.into_iter().map(|(b, f)| (col0 + s[..b].chars().count(), f)).collect()
}

fn fields(s: &str, col0: usize) -> Vec<(usize, &str)> {
    split_fields(s, col0, true)
}

fn glyph(line: usize, col: usize, f: &str) -> Result<char, ParseError> {
    let mut it = f.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(err(line, col, format!("expected a single glyph, found `{f}`"))),
    }
}

struct Header<'a> {
    line: usize,
    col: usize,
    value: &'a str,
}

/// Parses a `.tm` file. Lines whose first non-blank character is `#` are comments.
pub fn parse_tm(text: &str) -> Result<TmFile, ParseError> {
    let mut headers: HashMap<&str, Header> = HashMap::new();
    let mut delta: Vec<(usize, &str)> = Vec::new();
    let mut in_delta = false;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if in_delta {
            delta.push((line, raw));
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let Some(colon) = trimmed.find(':') else {
            return Err(err(line, indent + 1, "expected `key: value`"));
        };
        let key = trimmed[..colon].trim();
        let value = &trimmed[colon + 1..];
        let col = indent + 1 + trimmed[..colon + 1].chars().count();
        if key == "delta" {
            if !value.trim().is_empty() {
                return Err(err(line, col, "`delta:` stands alone on its line"));
            }
            in_delta = true;
            continue;
        }
        if !matches!(
            key,
            "kind" | "tapes" | "mode" | "states" | "initial" | "accept" | "input_alphabet" | "tape_alphabet" | "alphabet" | "output"
        ) {
            return Err(err(line, indent + 1, format!("unknown header `{key}`")));
        }
        if headers.insert(key, Header { line, col, value }).is_some() {
            return Err(err(line, indent + 1, format!("duplicate header `{key}`")));
        }
    }
    let kind = headers.get("kind").map(|h| h.value.trim()).unwrap_or("tm");
    match kind {
        "tm" => parse_machine(&headers, &delta).map(TmFile::Machine),
        "dfa" | "nfa" => parse_automaton(kind == "dfa", &headers, &delta),
        other => {
            let h = &headers["kind"];
            Err(err(h.line, h.col + 1, format!("unknown kind `{other}`")))
        }
    }
}

fn need<'a>(headers: &'a HashMap<&str, Header>, key: &str) -> Result<&'a Header<'a>, ParseError> {
    headers.get(key).ok_or_else(|| err(1, 1, format!("missing header `{key}`")))
}

fn list(h: &Header) -> Vec<(usize, String)> {
    fields(h.value, h.col).into_iter().map(|(c, f)| (c, f.to_string())).collect()
}

fn one(h: &Header) -> Result<(usize, String), ParseError> {
    let mut l = list(h);
    if l.len() != 1 {
        return Err(err(h.line, h.col, "expected exactly one value"));
    }
    Ok(l.remove(0))
}

fn number(h: &Header) -> Result<usize, ParseError> {
    let (c, v) = one(h)?;
    v.parse().map_err(|_| err(h.line, c, format!("expected a number, found `{v}`")))
}

fn glyphs(h: &Header) -> Result<Vec<char>, ParseError> {
    list(h).into_iter().map(|(c, f)| glyph(h.line, c, &f)).collect()
}

/// Splits a delta line `q a.. -> p b.. M..` into its parts.
fn rule_parts(line: usize, raw: &str) -> Result<(Vec<(usize, String)>, Vec<(usize, String)>), ParseError> {
    let Some(arrow) = raw.find("->") else {
        let c = raw.len() - raw.trim_start().len() + 1;
        return Err(err(line, c, "expected `->`"));
    };
    let lhs = split_fields(&raw[..arrow], 1, false).into_iter().map(|(c, f)| (c, f.to_string())).collect();
    let rcol = raw[..arrow + 2].chars().count() + 1;
    let rhs = split_fields(&raw[arrow + 2..], rcol, false).into_iter().map(|(c, f)| (c, f.to_string())).collect();
    Ok((lhs, rhs))
}

fn parse_machine(headers: &HashMap<&str, Header>, delta: &[(usize, &str)]) -> Result<MachineSpec, ParseError> {
    let tapes = match headers.get("tapes") {
        Some(h) => number(h)?,
        None => 1,
    };
    let mode = match headers.get("mode") {
        None => TapeMode::SemiInfinite,
        Some(h) => match one(h)?.1.as_str() {
            "semi" => TapeMode::SemiInfinite,
            "two_way" => TapeMode::TwoWay,
            v => return Err(err(h.line, h.col + 1, format!("unknown mode `{v}`"))),
        },
    };
    let states: Vec<String> = list(need(headers, "states")?).into_iter().map(|(_, s)| s).collect();
    let initial = one(need(headers, "initial")?)?.1;
    let accept = headers.get("accept").map(|h| list(h).into_iter().map(|(_, s)| s).collect()).unwrap_or_default();
    let input_alphabet = glyphs(need(headers, "input_alphabet")?)?;
    let th = need(headers, "tape_alphabet")?;
    let tape_alphabet = glyphs(th)?;
    if !tape_alphabet.contains(&BLANK) {
        return Err(err(th.line, th.col, format!("tape alphabet must contain the blank `{BLANK}`")));
    }
    let output = match headers.get("output") {
        None => 0,
        Some(h) => {
            let n = number(h)?;
            if n == 0 {
                return Err(err(h.line, h.col, "tapes are numbered from 1"));
            }
            n - 1
        }
    };
    let mut rules = Vec::new();
    for &(line, raw) in delta {
        let (lhs, rhs) = rule_parts(line, raw)?;
        if lhs.len() != 2 || rhs.len() != 3 {
            let c = raw.len() - raw.trim_start().len() + 1;
            return Err(err(line, c, "expected `state reads -> state writes moves`"));
        }
        let syms = |(c, f): &(usize, String)| -> Result<Vec<char>, ParseError> {
            split_multi(line, *c, f)?.into_iter().map(|(c, g)| glyph(line, c, g)).collect()
        };
        let moves = split_multi(line, rhs[2].0, &rhs[2].1)?
            .into_iter()
            .map(|(c, m)| match m {
                "L" => Ok(Move::L),
                "R" => Ok(Move::R),
                _ => Err(err(line, c, format!("move must be L or R, found `{m}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rules.push(Rule { from: lhs[0].1.clone(), read: syms(&lhs[1])?, to: rhs[0].1.clone(), write: syms(&rhs[1])?, moves });
    }
    Ok(MachineSpec { tapes, mode, states, initial, accept, input_alphabet, tape_alphabet, delta: rules, output })
}

/// Multi-tape cells are written `a,b,c` in a rule.
fn split_multi<'a>(_line: usize, col: usize, f: &'a str) -> Result<Vec<(usize, &'a str)>, ParseError> {
    let mut out = Vec::new();
    let mut c = col;
    for part in f.split(',') {
        out.push((c, part));
        c += part.chars().count() + 1;
    }
    Ok(out)
}

fn parse_automaton(det: bool, headers: &HashMap<&str, Header>, delta: &[(usize, &str)]) -> Result<TmFile, ParseError> {
    let states: Vec<String> = list(need(headers, "states")?).into_iter().map(|(_, s)| s).collect();
    let idx = |line: usize, c: usize, s: &str| {
        states.iter().position(|q| q == s).ok_or_else(|| err(line, c, format!("unknown state `{s}`")))
    };
    let ih = need(headers, "initial")?;
    let (ic, iv) = one(ih)?;
    let initial = idx(ih.line, ic, &iv)?;
    let mut accept = vec![false; states.len()];
    if let Some(h) = headers.get("accept") {
        for (c, s) in list(h) {
            accept[idx(h.line, c, &s)?] = true;
        }
    }
    let alphabet = glyphs(need(headers, "alphabet")?)?;
    let mut table: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); alphabet.len()]; states.len()];
    for &(line, raw) in delta {
        let (lhs, rhs) = rule_parts(line, raw)?;
        if lhs.len() != 2 || rhs.len() != 1 {
            let c = raw.len() - raw.trim_start().len() + 1;
            return Err(err(line, c, "expected `state letter -> state`"));
        }
        let q = idx(line, lhs[0].0, &lhs[0].1)?;
        let a = glyph(line, lhs[1].0, &lhs[1].1)?;
        let ai = alphabet
            .iter()
            .position(|&x| x == a)
            .ok_or_else(|| err(line, lhs[1].0, format!("letter `{a}` not in the alphabet")))?;
        let p = idx(line, rhs[0].0, &rhs[0].1)?;
        if det && !table[q][ai].is_empty() {
            return Err(err(line, lhs[0].0, "a dfa has one transition per state and letter"));
        }
        table[q][ai].push(p);
    }
    if det {
        let mut rows = Vec::new();
        for (q, row) in table.iter().enumerate() {
            let mut r = Vec::new();
            for (a, t) in row.iter().enumerate() {
                match t.first() {
                    Some(&p) => r.push(p),
                    None => {
                        return Err(err(1, 1, format!("dfa has no transition from `{}` on `{}`", states[q], alphabet[a])))
                    }
                }
            }
            rows.push(r);
        }
        Ok(TmFile::Dfa(Dfa { states, initial, accept, alphabet, delta: rows }))
    } else {
        Ok(TmFile::Nfa(Nfa { states, initial, accept, alphabet, delta: table }))
    }
}

fn join_glyphs(g: &[char]) -> String {
    g.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

fn join_cells(g: &[char]) -> String {
    g.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Canonical text of a machine.
pub fn print_machine(m: &MachineSpec) -> String {
    print_machine_with(m, &[])
}

/// Canonical text of a machine preceded by comment lines.
pub fn print_machine_with(m: &MachineSpec, comments: &[String]) -> String {
    use fmt::Write;
    let mut s = String::new();
    for c in comments {
        writeln!(s, "# {c}").unwrap();
    }
    writeln!(s, "tapes: {}", m.tapes).unwrap();
    writeln!(s, "mode: {}", if m.mode == TapeMode::TwoWay { "two_way" } else { "semi" }).unwrap();
    writeln!(s, "states: {}", m.states.join(", ")).unwrap();
    writeln!(s, "initial: {}", m.initial).unwrap();
    writeln!(s, "accept: {}", m.accept.join(", ")).unwrap();
    writeln!(s, "input_alphabet: {}", join_glyphs(&m.input_alphabet)).unwrap();
    writeln!(s, "tape_alphabet: {}", join_glyphs(&m.tape_alphabet)).unwrap();
    writeln!(s, "output: {}", m.output + 1).unwrap();
    writeln!(s, "delta:").unwrap();
    for r in &m.delta {
        let moves: Vec<String> = r.moves.iter().map(|m| m.glyph().to_string()).collect();
        writeln!(s, "{} {} -> {} {} {}", r.from, join_cells(&r.read), r.to, join_cells(&r.write), moves.join(",")).unwrap();
    }
    s
}

/// Canonical text of a `.tm` file.
pub fn print_tm(f: &TmFile) -> String {
    use fmt::Write;
    let (det, states, initial, accept, alphabet) = match f {
        TmFile::Machine(m) => return print_machine(m),
        TmFile::Dfa(d) => (true, &d.states, d.initial, &d.accept, &d.alphabet),
        TmFile::Nfa(n) => (false, &n.states, n.initial, &n.accept, &n.alphabet),
    };
    let mut s = String::new();
    writeln!(s, "kind: {}", if det { "dfa" } else { "nfa" }).unwrap();
    writeln!(s, "states: {}", states.join(", ")).unwrap();
    writeln!(s, "initial: {}", states[initial]).unwrap();
    let acc: Vec<&str> = states.iter().zip(accept).filter(|(_, &a)| a).map(|(q, _)| q.as_str()).collect();
    writeln!(s, "accept: {}", acc.join(", ")).unwrap();
    writeln!(s, "alphabet: {}", join_glyphs(alphabet)).unwrap();
    writeln!(s, "delta:").unwrap();
    for (q, name) in states.iter().enumerate() {
        for (a, c) in alphabet.iter().enumerate() {
            let targets: Vec<usize> = match f {
                TmFile::Dfa(d) => vec![d.delta[q][a]],
                TmFile::Nfa(n) => n.delta[q][a].clone(),
                TmFile::Machine(_) => unreachable!(),
            };
            for p in targets {
                writeln!(s, "{name} {c} -> {}", states[p]).unwrap();
            }
        }
    }
    s
}

// ------------------------------------------------------------- tokenizer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    Numeral(u64),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits source text into tokens. `#` followed by a digit is a numeral
/// literal when `numerals` is set; otherwise `#` and `;` start comments.
fn tokenize(text: &str, numerals: bool) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, l) in text.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<char> = l.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == ';' {
                break;
            } else if c == '#' {
                if numerals && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = chars[i + 1..j].iter().collect();
                    let n = s.parse().map_err(|_| err(line, col, "numeral too large"))?;
                    out.push(Token { tok: Tok::Numeral(n), line, col });
                    i = j;
                } else {
                    break;
                }
            } else if c.is_ascii_digit() {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let n = s.parse().map_err(|_| err(line, col, "number too large"))?;
                out.push(Token { tok: Tok::Num(n), line, col });
                i = j;
            } else if ident_char(c) {
                let mut j = i;
                while j < chars.len() && ident_char(chars[j]) {
                    j += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[i..j].iter().collect()), line, col });
                i = j;
            } else if "()=,.\\λ".contains(c) {
                out.push(Token { tok: Tok::Sym(if c == 'λ' { '\\' } else { c }), line, col });
                i += 1;
            } else {
                return Err(err(line, col, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    fn new(toks: Vec<Token>, text: &str) -> Cursor {
        let lines = text.lines().count().max(1);
        let last = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
        Cursor { toks, pos: 0, end: (lines, last + 1) }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn fail(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        err(l, c, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(format!("expected `{c}`")))
        }
    }

    fn num(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.fail("expected a number")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.fail("expected a name")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.fail("unexpected token")),
        }
    }

    fn at_def(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == "def")
    }
}

// --------------------------------------------------------------------- .prf

/// The contents of a `.prf` file: named definitions and an optional main term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrfFile {
    pub defs: Vec<(String, PrfExpr)>,
    pub main: Option<PrfExpr>,
}

impl PrfFile {
    /// The main term, or else the last definition.
    pub fn entry(&self) -> Option<PrfExpr> {
        self.main.clone().or_else(|| self.defs.last().map(|(n, e)| PrfExpr::named(n, e.clone()).unwrap()))
    }

    /// A file defining every helper `e` mentions outside the library, then
    /// `e` itself, under `name` unless it is a named function.
    pub fn from_expr(name: &str, e: &PrfExpr) -> PrfFile {
        let mut defs = Vec::new();
        let mut seen = HashSet::new();
        match e.node() {
            PrfNode::Named(n) => {
                seen.insert(n.name.to_string());
                collect_named(n.def(), &mut seen, &mut defs);
                defs.push((n.name.to_string(), n.def().clone()));
            }
            _ => {
                collect_named(e, &mut seen, &mut defs);
                defs.push((name.to_string(), e.clone()));
            }
        }
        PrfFile { defs, main: None }
    }
}

fn collect_named(e: &PrfExpr, seen: &mut HashSet<String>, out: &mut Vec<(String, PrfExpr)>) {
    let mut visited = HashSet::new();
    collect_from(e, seen, &mut visited, out);
}

fn collect_from(e: &PrfExpr, seen: &mut HashSet<String>, visited: &mut HashSet<usize>, out: &mut Vec<(String, PrfExpr)>) {
    if !visited.insert(e.node() as *const PrfNode as usize) {
        return;
    }
    match e.node() {
        PrfNode::Zero(_) | PrfNode::Succ | PrfNode::Proj(..) => {}
        PrfNode::Compose(g, hs) => {
            collect_from(g, seen, visited, out);
            for h in hs {
                collect_from(h, seen, visited, out);
            }
        }
        PrfNode::PrimRec(g, h) => {
            collect_from(g, seen, visited, out);
            collect_from(h, seen, visited, out);
        }
        PrfNode::Mu(g) => collect_from(g, seen, visited, out),
        PrfNode::Named(n) => {
            let name = n.name.to_string();
            if !seen.insert(name.clone()) || stdlib::by_name(&name).is_some_and(|lib| &lib == e) {
                return;
            }
            collect_from(n.def(), seen, visited, out);
            out.push((name, n.def().clone()));
        }
    }
}

/// Parses a `.prf` file. Names refer to earlier definitions, then to the library.
pub fn parse_prf(text: &str) -> Result<PrfFile, FormatError> {
    let mut c = Cursor::new(tokenize(text, false)?, text);
    let mut env: HashMap<String, PrfExpr> = HashMap::new();
    let mut defs = Vec::new();
    let mut main = None;
    while c.peek().is_some() {
        if c.at_def() {
            c.pos += 1;
            let (l, col) = c.here();
            let name = c.ident()?;
            if is_prf_keyword(&name) {
                return Err(err(l, col, format!("`{name}` is reserved")).into());
            }
            c.sym('=')?;
            let body = prf_term(&mut c, &env)?;
            arity_check(&body).map_err(|e| ValidationError::new(format!("in `{name}`: {}", e.0)))?;
            env.insert(name.clone(), PrfExpr::named(&name, body.clone())?);
            defs.push((name, body));
        } else {
            if main.is_some() {
                return Err(c.fail("only one main term is allowed").into());
            }
            let t = prf_term(&mut c, &env)?;
            arity_check(&t)?;
            main = Some(t);
        }
    }
    Ok(PrfFile { defs, main })
}

/// Parses a single `.prf` term.
pub fn parse_prf_term(text: &str) -> Result<PrfExpr, FormatError> {
    let f = parse_prf(text)?;
    f.main.ok_or_else(|| err(1, 1, "expected a term").into())
}

fn is_prf_keyword(s: &str) -> bool {
    matches!(s, "Z" | "S" | "P" | "C" | "R" | "Mu" | "def")
}

fn prf_term(c: &mut Cursor, env: &HashMap<String, PrfExpr>) -> Result<PrfExpr, ParseError> {
    let (l, col) = c.here();
    match c.next() {
        Some(Tok::Ident(s)) => match s.as_str() {
            "Z" => Ok(PrfExpr::zero(c.num()? as usize)),
            "S" => Ok(PrfExpr::succ()),
            "P" => {
                let k = c.num()? as usize;
                let (l2, c2) = c.here();
                let i = c.num()? as usize;
                if i == 0 || i > k {
                    return Err(err(l2, c2, format!("projection index {i} out of range 1..{k}")));
                }
                Ok(PrfExpr::proj(k, i))
            }
            "C" => {
                let g = prf_term(c, env)?;
                c.sym('(')?;
                let mut hs = vec![prf_term(c, env)?];
                while c.peek() == Some(&Tok::Sym(',')) {
                    c.pos += 1;
                    hs.push(prf_term(c, env)?);
                }
                c.sym(')')?;
                Ok(PrfExpr::compose(g, hs))
            }
            "R" => {
                c.sym('(')?;
                let g = prf_term(c, env)?;
                c.sym(',')?;
                let h = prf_term(c, env)?;
                c.sym(')')?;
                Ok(PrfExpr::prim_rec(g, h))
            }
            "Mu" => Ok(PrfExpr::mu(prf_term(c, env)?)),
            "def" => Err(err(l, col, "unexpected `def`")),
            name => env
                .get(name)
                .cloned()
                .or_else(|| stdlib::by_name(name))
                .ok_or_else(|| err(l, col, format!("unknown function `{name}`"))),
        },
        Some(Tok::Sym('(')) => {
            let t = prf_term(c, env)?;
            c.sym(')')?;
            Ok(t)
        }
        Some(_) => Err(err(l, col, "expected a term")),
        None => Err(err(l, col, "unexpected end of input")),
    }
}

/// Canonical text of a `.prf` file.
pub fn print_prf(f: &PrfFile) -> String {
    let mut s = String::new();
    for (n, e) in &f.defs {
        s.push_str(&format!("def {n} = {e}\n"));
    }
    if let Some(m) = &f.main {
        s.push_str(&format!("{m}\n"));
    }
    s
}

// --------------------------------------------------------------------- .lam

/// The contents of a `.lam` file. Definitions are expanded at their uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LamFile {
    pub defs: Vec<(String, Term)>,
    pub main: Option<Term>,
}

impl LamFile {
    /// The main term, or else the last definition.
    pub fn entry(&self) -> Option<Term> {
        self.main.clone().or_else(|| self.defs.last().map(|(_, t)| t.clone()))
    }
}

/// Parses a `.lam` file. Each definition or term ends at a line break
/// outside parentheses.
pub fn parse_lam(text: &str) -> Result<LamFile, ParseError> {
    parse_lam_in(text, &[])
}

/// Parses a `.lam` file with `scope` already defined.
pub fn parse_lam_in(text: &str, scope: &[(String, Term)]) -> Result<LamFile, ParseError> {
    let mut items: Vec<Vec<Token>> = Vec::new();
    let mut depth = 0i64;
    let mut last_line = 0;
    for t in tokenize(text, true)? {
        if depth <= 0 && t.line != last_line {
            items.push(Vec::new());
            depth = 0;
        }
        match t.tok {
            Tok::Sym('(') => depth += 1,
            Tok::Sym(')') => depth -= 1,
            _ => {}
        }
        last_line = t.line;
        items.last_mut().unwrap().push(t);
    }
    let mut env: HashMap<String, Term> = scope.iter().cloned().collect();
    let mut defs = Vec::new();
    let mut main = None;
    for item in items {
        let mut c = Cursor::new(item, text);
        if let Some(t) = c.toks.last() {
            c.end = (t.line, t.col + 1);
        }
        if c.at_def() {
            c.pos += 1;
            let name = c.ident()?;
            c.sym('=')?;
            let t = lam_term(&mut c, &env, &mut Vec::new())?;
            c.finish()?;
            env.insert(name.clone(), t.clone());
            defs.push((name, t));
        } else {
            if main.is_some() {
                return Err(c.fail("only one main term is allowed"));
            }
            let t = lam_term(&mut c, &env, &mut Vec::new())?;
            c.finish()?;
            main = Some(t);
        }
    }
    Ok(LamFile { defs, main })
}

/// Parses a single λ-term.
pub fn parse_lam_term(text: &str) -> Result<Term, ParseError> {
    parse_lam(text)?.main.ok_or_else(|| err(1, 1, "expected a term"))
}

fn lam_term(c: &mut Cursor, env: &HashMap<String, Term>, bound: &mut Vec<String>) -> Result<Term, ParseError> {
    if c.peek() == Some(&Tok::Sym('\\')) {
        c.pos += 1;
        let mut xs = vec![c.ident()?];
        while let Some(Tok::Ident(_)) = c.peek() {
            xs.push(c.ident()?);
        }
        c.sym('.')?;
        let n = bound.len();
        bound.extend(xs.iter().cloned());
        let body = lam_term(c, env, bound)?;
        bound.truncate(n);
        return Ok(xs.iter().rev().fold(body, |b, x| Term::abs(Name::new(x), b)));
    }
    let mut t = lam_atom(c, env, bound)?;
    loop {
        match c.peek() {
            Some(Tok::Ident(s)) if s != "def" => {}
            Some(Tok::Numeral(_)) | Some(Tok::Sym('(')) => {}
            Some(Tok::Sym('\\')) => {
                let arg = lam_term(c, env, bound)?;
                return Ok(Term::app(t, arg));
            }
            _ => return Ok(t),
        }
        t = Term::app(t, lam_atom(c, env, bound)?);
    }
}

fn lam_atom(c: &mut Cursor, env: &HashMap<String, Term>, bound: &mut Vec<String>) -> Result<Term, ParseError> {
    let (l, col) = c.here();
    match c.next() {
        Some(Tok::Ident(s)) if s != "def" => {
            if !bound.contains(&s) {
                if let Some(t) = env.get(&s) {
                    return Ok(t.clone());
                }
            }
            Ok(Term::var(&s))
        }
        Some(Tok::Numeral(n)) => Ok(church(n)),
        Some(Tok::Sym('(')) => {
            let t = lam_term(c, env, bound)?;
            c.sym(')')?;
            Ok(t)
        }
        Some(Tok::Num(_)) => Err(err(l, col, "numerals are written `#n`")),
        Some(_) => Err(err(l, col, "expected a term")),
        None => Err(err(l, col, "unexpected end of input")),
    }
}

/// Renames binders to `x1, x2, …` in order of appearance, avoiding free names.
pub fn canonical_names(t: &Term) -> Term {
    let taken: HashSet<String> = t.free_vars().iter().map(|n| n.to_string()).collect();
    let mut next = 0;
    fn go(t: &Term, env: &mut Vec<(Name, Name)>, next: &mut usize, taken: &HashSet<String>) -> Term {
        match t.node() {
            Node::Var(x) => match env.iter().rev().find(|(a, _)| a == x) {
                Some((_, b)) => Term::var_n(b.clone()),
                None => t.clone(),
            },
            Node::Hole => t.clone(),
            Node::Abs(x, b) => {
                let y = loop {
                    *next += 1;
                    let cand = format!("x{next}");
                    if !taken.contains(&cand) {
                        break Name::new(&cand);
                    }
                };
                env.push((x.clone(), y.clone()));
                let b2 = go(b, env, next, taken);
                env.pop();
                Term::abs(y, b2)
            }
            Node::App(f, a) => Term::app(go(f, env, next, taken), go(a, env, next, taken)),
        }
    }
    go(t, &mut Vec::new(), &mut next, &taken)
}

/// Canonical text of a term.
pub fn print_term(t: &Term) -> String {
    canonical_names(t).to_string()
}

/// Canonical text of a `.lam` file.
pub fn print_lam(f: &LamFile) -> String {
    let mut s = String::new();
    for (n, t) in &f.defs {
        s.push_str(&format!("def {n} = {}\n", print_term(t)));
    }
    if let Some(m) = &f.main {
        s.push_str(&format!("{}\n", print_term(m)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{alpha_eq, normalize, Normalized};
    use crate::prf::eval_u64;
    use crate::tm::{run, validate_machine, zeros_ones_machine, Verdict};

    #[test]
    fn machine_round_trip() {
        let spec = zeros_ones_machine().spec().clone();
        let text = print_machine(&spec);
        let back = parse_tm(&text).unwrap();
        assert_eq!(back, TmFile::Machine(spec));
        assert_eq!(print_tm(&back), text);
        let m = validate_machine(match back {
            TmFile::Machine(s) => s,
            _ => unreachable!(),
        })
        .unwrap();
        assert_eq!(run(&m, "0011", 500, false).unwrap().verdict, Verdict::Accept);
    }

    #[test]
    fn machine_errors_have_positions() {
        let bad = "tapes: 1\nstates: a\ninitial: a\ninput_alphabet: 0\ntape_alphabet: 0, _\ndelta:\na 0 -> a 0 X\n";
        let e = parse_tm(bad).unwrap_err();
        assert_eq!((e.line, e.column), (7, 12));
        let e = parse_tm("tapes: 1\nstates: a\ninitial: a\ninput_alphabet: 0\ntape_alphabet: 0, 1\n").unwrap_err();
        assert_eq!(e.line, 5);
    }

    #[test]
    fn multitape_cells() {
        let text = "tapes: 2\nstates: c, done\ninitial: c\naccept: done\ninput_alphabet: 0, 1\ntape_alphabet: 0, 1, _\ndelta:\nc 0,_ -> c 0,0 R,R\nc _,_ -> done _,_ R,R\n";
        let TmFile::Machine(m) = parse_tm(text).unwrap() else { panic!() };
        assert_eq!(m.delta[0].read, vec!['0', '_']);
        assert_eq!(m.output, 0);
        assert_eq!(parse_tm(&print_machine(&m)).unwrap(), TmFile::Machine(m));
    }

    #[test]
    fn automata() {
        let text = "kind: dfa\nstates: e, o\ninitial: e\naccept: e\nalphabet: 0, 1\ndelta:\ne 0 -> e\ne 1 -> o\no 0 -> o\no 1 -> e\n";
        let f = parse_tm(text).unwrap();
        assert!(matches!(f, TmFile::Dfa(_)));
        assert_eq!(print_tm(&f), text);
        let nfa = "kind: nfa\nstates: a, b\ninitial: a\naccept: b\nalphabet: 1\ndelta:\na 1 -> a\na 1 -> b\n";
        let f = parse_tm(nfa).unwrap();
        assert_eq!(print_tm(&f), nfa);
        assert!(parse_tm("kind: dfa\nstates: a\ninitial: a\nalphabet: 1\ndelta:\n").is_err());
    }

    #[test]
    fn prf_files() {
        let f = parse_prf("# addition\ndef add = R (P 1 1, C S (P 3 3))\n").unwrap();
        let add = f.entry().unwrap();
        assert_eq!(add.arity(), 2);
        assert_eq!(eval_u64(&add, &[2, 3], 1000).unwrap(), 5u32.into());
        let text = print_prf(&f);
        assert_eq!(parse_prf(&text).unwrap(), f);
        let g = parse_prf("def two = C S (C S (Z 1))\nC two (P 2 1)\n").unwrap();
        assert_eq!(print_prf(&parse_prf(&print_prf(&g)).unwrap()), print_prf(&g));
        let e = parse_prf("def f = C S (P 2 3)").unwrap_err();
        assert!(matches!(e, FormatError::Parse(ParseError { line: 1, column: 18, .. })));
        assert!(matches!(parse_prf("R (Z 1, S)"), Err(FormatError::Validation(_))));
        let lib = parse_prf_term("C mul (P 2 1, add)").unwrap();
        assert_eq!(eval_u64(&lib, &[3, 4], 1000).unwrap(), 21u32.into());
    }

    #[test]
    fn lam_files() {
        let t = parse_lam_term("(\\x y. y x) z").unwrap();
        let Normalized::NormalForm { term, .. } = normalize(&t, 100) else { panic!() };
        assert_eq!(print_term(&term), "\\x1. x1 z");
        let f = parse_lam("; combinators\ndef K = \\x y. x\ndef two = #2\nK two\n").unwrap();
        assert_eq!(print_lam(&parse_lam(&print_lam(&f)).unwrap()), print_lam(&f));
        assert!(alpha_eq(f.main.as_ref().unwrap(), &Term::app(crate::lambda::combinators::k(), church(2))));
        let e = parse_lam("\\x. (x").unwrap_err();
        assert_eq!((e.line, e.column), (1, 7));
        assert!(parse_lam("\\x y x").is_err());
        let shadow = parse_lam_term("\\x1. \\x. x1 x").unwrap();
        assert!(alpha_eq(&parse_lam_term(&print_term(&shadow)).unwrap(), &shadow));
    }
}
