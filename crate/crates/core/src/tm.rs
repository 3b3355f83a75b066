//! Deterministic and nondeterministic multitape Turing machines.
//!
//! A [`MachineSpec`] is the raw, human-facing description (state names and
//! glyphs). [`validate_machine`] checks it and produces a [`Machine`], an
//! indexed form that the interpreters run.
//!
//! Semi-infinite tapes keep a protected blank at cell 0: input is written from
//! cell 1 and every head starts on cell 1. A left move from cell 0 is a stuck
//! halt. In two-way mode input starts at cell 0 and the tape is unbounded in
//! both directions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::ValidationError;

/// The canonical blank glyph.
pub const BLANK: char = '_';

/// Most tapes a machine may declare.
pub const MAX_TAPES: usize = 16;

/// Index of a glyph in the tape alphabet.
pub type Sym = u8;

/// Index of a state.
pub type StateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    L,
    R,
}

impl Move {
    pub fn glyph(self) -> char {
        match self {
            Move::L => 'L',
            Move::R => 'R',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum TapeMode {
    #[default]
    SemiInfinite,
    TwoWay,
}

/// One transition line: in state `from` reading `read`, go to `to`,
/// writing `write` and moving heads by `moves`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub from: String,
    pub read: Vec<char>,
    pub to: String,
    pub write: Vec<char>,
    pub moves: Vec<Move>,
}

impl Rule {
    pub fn new(from: &str, read: &str, to: &str, write: &str, moves: &str) -> Rule {
        Rule {
            from: from.to_string(),
            read: read.chars().collect(),
            to: to.to_string(),
            write: write.chars().collect(),
            moves: moves
                .chars()
                .map(|c| if c == 'L' { Move::L } else { Move::R })
                .collect(),
        }
    }
}

/// Raw machine description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSpec {
    pub tapes: usize,
    pub mode: TapeMode,
    pub states: Vec<String>,
    pub initial: String,
    pub accept: Vec<String>,
    pub input_alphabet: Vec<char>,
    pub tape_alphabet: Vec<char>,
    pub delta: Vec<Rule>,
    /// Tape read by [`run_numeric`], zero based.
    pub output: usize,
}

impl MachineSpec {
    /// A one-tape semi-infinite skeleton with the given alphabets.
    pub fn new(tapes: usize, input: &str, tape: &str) -> MachineSpec {
        MachineSpec {
            tapes,
            mode: TapeMode::SemiInfinite,
            states: Vec::new(),
            initial: String::new(),
            accept: Vec::new(),
            input_alphabet: input.chars().collect(),
            tape_alphabet: tape.chars().collect(),
            delta: Vec::new(),
            output: 0,
        }
    }

    /// Adds a state name if not yet declared.
    pub fn state(&mut self, name: &str) -> &mut Self {
        if !self.states.iter().any(|s| s == name) {
            self.states.push(name.to_string());
        }
        self
    }

    /// Adds a rule, declaring both endpoint states.
    pub fn rule(&mut self, from: &str, read: &str, to: &str, write: &str, moves: &str) -> &mut Self {
        self.state(from);
        self.state(to);
        self.delta.push(Rule::new(from, read, to, write, moves));
        self
    }
}

/// A transition target in indexed form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Target {
    pub state: StateId,
    pub write: Vec<Sym>,
    pub moves: Vec<Move>,
}

/// A validated machine.
#[derive(Clone, Debug)]
pub struct Machine {
    spec: MachineSpec,
    glyphs: Vec<char>,
    blank: Sym,
    input: Vec<bool>,
    accept: Vec<bool>,
    initial: StateId,
    deterministic: bool,
    table: HashMap<(StateId, u128), Vec<Target>>,
    entries: Vec<(StateId, Vec<Sym>)>,
}

fn pack_key(syms: &[Sym]) -> u128 {
    syms.iter()
        .enumerate()
        .fold(0u128, |acc, (i, &s)| acc | ((s as u128) << (8 * i)))
}

/// Checks every machine invariant and builds the indexed form.
pub fn validate_machine(spec: MachineSpec) -> Result<Machine, ValidationError> {
    let k = spec.tapes;
    if k == 0 {
        return Err(ValidationError::new("machine must have at least one tape"));
    }
    if k > MAX_TAPES {
        return Err(ValidationError::new(format!(
            "machine has {k} tapes, at most {MAX_TAPES} are supported"
        )));
    }
    if spec.output >= k {
        return Err(ValidationError::new(format!(
            "output tape {} out of range for {k} tapes",
            spec.output + 1
        )));
    }
    let glyphs = spec.tape_alphabet.clone();
    if glyphs.len() > 255 {
        return Err(ValidationError::new("tape alphabet exceeds 255 symbols"));
    }
    let mut seen = BTreeSet::new();
    for &g in &glyphs {
        if !seen.insert(g) {
            return Err(ValidationError::new(format!("duplicate tape symbol '{g}'")));
        }
    }
    let blank = glyphs
        .iter()
        .position(|&g| g == BLANK)
        .ok_or_else(|| ValidationError::new("blank '_' missing from tape alphabet"))? as Sym;
    let mut input = vec![false; glyphs.len()];
    for &c in &spec.input_alphabet {
        if c == BLANK {
            return Err(ValidationError::new("blank '_' must not be an input symbol"));
        }
        match glyphs.iter().position(|&g| g == c) {
            Some(i) => input[i] = true,
            None => {
                return Err(ValidationError::new(format!(
                    "input symbol '{c}' not in tape alphabet"
                )))
            }
        }
    }
    let mut state_ix = HashMap::new();
    for (i, s) in spec.states.iter().enumerate() {
        if state_ix.insert(s.as_str(), i).is_some() {
            return Err(ValidationError::new(format!("duplicate state '{s}'")));
        }
    }
    let lookup_state = |s: &str| {
        state_ix
            .get(s)
            .copied()
            .ok_or_else(|| ValidationError::new(format!("unknown state '{s}'")))
    };
    let lookup_sym = |c: char| {
        glyphs
            .iter()
            .position(|&g| g == c)
            .map(|i| i as Sym)
            .ok_or_else(|| ValidationError::new(format!("symbol '{c}' not in tape alphabet")))
    };
    let initial = lookup_state(&spec.initial)?;
    let mut accept = vec![false; spec.states.len()];
    for a in &spec.accept {
        accept[lookup_state(a)?] = true;
    }
    let mut table: HashMap<(StateId, u128), Vec<Target>> = HashMap::new();
    let mut entries = Vec::new();
    for (n, r) in spec.delta.iter().enumerate() {
        if r.read.len() != k || r.write.len() != k || r.moves.len() != k {
            return Err(ValidationError::new(format!(
                "rule {} has vector length mismatch for {k} tapes",
                n + 1
            )));
        }
        let from = lookup_state(&r.from)?;
        let to = lookup_state(&r.to)?;
        let read = r.read.iter().map(|&c| lookup_sym(c)).collect::<Result<Vec<_>, _>>()?;
        let write = r.write.iter().map(|&c| lookup_sym(c)).collect::<Result<Vec<_>, _>>()?;
        let target = Target { state: to, write, moves: r.moves.clone() };
        let slot = table.entry((from, pack_key(&read))).or_default();
        if slot.is_empty() {
            entries.push((from, read));
        }
        if !slot.contains(&target) {
            slot.push(target);
        }
    }
    let deterministic = table.values().all(|v| v.len() <= 1);
    Ok(Machine {
        spec,
        glyphs,
        blank,
        input,
        accept,
        initial,
        deterministic,
        table,
        entries,
    })
}

impl Machine {
    pub fn spec(&self) -> &MachineSpec {
        &self.spec
    }
    pub fn tapes(&self) -> usize {
        self.spec.tapes
    }
    pub fn mode(&self) -> TapeMode {
        self.spec.mode
    }
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }
    pub fn blank(&self) -> Sym {
        self.blank
    }
    pub fn glyphs(&self) -> &[char] {
        &self.glyphs
    }
    pub fn glyph(&self, s: Sym) -> char {
        self.glyphs[s as usize]
    }
    pub fn sym(&self, c: char) -> Option<Sym> {
        self.glyphs.iter().position(|&g| g == c).map(|i| i as Sym)
    }
    pub fn initial(&self) -> StateId {
        self.initial
    }
    pub fn state_count(&self) -> usize {
        self.spec.states.len()
    }
    pub fn state_name(&self, q: StateId) -> &str {
        &self.spec.states[q]
    }
    pub fn is_accept(&self, q: StateId) -> bool {
        self.accept[q]
    }
    pub fn is_input(&self, s: Sym) -> bool {
        self.input[s as usize]
    }
    pub fn output_tape(&self) -> usize {
        self.spec.output
    }
    /// All targets for `(q, read)`, in declaration order.
    pub fn targets(&self, q: StateId, read: &[Sym]) -> &[Target] {
        self.table
            .get(&(q, pack_key(read)))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }
    /// Defined `(state, read vector)` pairs in declaration order.
    pub fn entries(&self) -> &[(StateId, Vec<Sym>)] {
        &self.entries
    }
    /// Largest number of targets over all entries.
    pub fn branching(&self) -> usize {
        self.table.values().map(|v| v.len()).max().unwrap_or(0)
    }

    fn word_syms(&self, w: &str) -> Result<Vec<Sym>, ValidationError> {
        w.chars()
            .map(|c| match self.sym(c) {
                Some(s) if self.is_input(s) => Ok(s),
                _ => Err(ValidationError::new(format!("input symbol '{c}' not in input alphabet"))),
            })
            .collect()
    }
}

/// One tape: an explicit window of cells, blanks beyond it.
#[derive(Clone, Debug)]
pub struct Tape {
    cells: Vec<Sym>,
    offset: i64,
    head: i64,
    blank: Sym,
}

impl Tape {
    fn new(blank: Sym, content: &[Sym], start: i64) -> Tape {
        let mut cells = Vec::with_capacity(content.len() + 2);
        if start > 0 {
            cells.extend(std::iter::repeat(blank).take(start as usize));
        }
        cells.extend_from_slice(content);
        Tape { cells, offset: start.min(0), head: start, blank }
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn read(&self) -> Sym {
        let i = self.head - self.offset;
        if i >= 0 && (i as usize) < self.cells.len() {
            self.cells[i as usize]
        } else {
            self.blank
        }
    }

    /// Symbol at an absolute cell position.
    pub fn at(&self, pos: i64) -> Sym {
        let i = pos - self.offset;
        if i >= 0 && (i as usize) < self.cells.len() {
            self.cells[i as usize]
        } else {
            self.blank
        }
    }

    fn write(&mut self, s: Sym) {
        let mut i = self.head - self.offset;
        if i < 0 {
            let grow = (-i) as usize + 8;
            let mut v = vec![self.blank; grow];
            v.extend_from_slice(&self.cells);
            self.cells = v;
            self.offset -= grow as i64;
            i = self.head - self.offset;
        }
        let i = i as usize;
        if i >= self.cells.len() {
            if s == self.blank {
                return;
            }
            self.cells.resize(i + 1, self.blank);
        }
        self.cells[i] = s;
    }

    /// Non-blank window as `(first position, symbols)`; empty tapes give `(0, [])`.
    pub fn content(&self) -> (i64, &[Sym]) {
        let first = self.cells.iter().position(|&c| c != self.blank);
        match first {
            None => (0, &[]),
            Some(a) => {
                let b = self.cells.iter().rposition(|&c| c != self.blank).unwrap();
                (self.offset + a as i64, &self.cells[a..=b])
            }
        }
    }
}

impl PartialEq for Tape {
    fn eq(&self, other: &Tape) -> bool {
        self.head == other.head && self.content() == other.content()
    }
}
impl Eq for Tape {}

/// A snapshot of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub tapes: Vec<Tape>,
    pub state: StateId,
    pub steps: u64,
}

impl Configuration {
    /// Initial configuration with `inputs[i]` on tape `i` (missing tapes blank).
    pub fn initial(m: &Machine, inputs: &[Vec<Sym>]) -> Configuration {
        let start = match m.mode() {
            TapeMode::SemiInfinite => 1,
            TapeMode::TwoWay => 0,
        };
        let tapes = (0..m.tapes())
            .map(|i| {
                let w = inputs.get(i).map(|v| v.as_slice()).unwrap_or(&[]);
                Tape::new(m.blank(), w, start)
            })
            .collect();
        Configuration { tapes, state: m.initial(), steps: 0 }
    }

    pub fn scanned(&self) -> Vec<Sym> {
        self.tapes.iter().map(|t| t.read()).collect()
    }

    /// Trimmed contents of tape `i` as glyphs.
    pub fn tape_string(&self, m: &Machine, i: usize) -> String {
        self.tapes[i].content().1.iter().map(|&s| m.glyph(s)).collect()
    }

    fn apply(&mut self, m: &Machine, t: &Target) -> bool {
        if m.mode() == TapeMode::SemiInfinite
            && self.tapes.iter().zip(&t.moves).any(|(tp, &mv)| mv == Move::L && tp.head == 0)
        {
            return false;
        }
        for ((tp, &w), &mv) in self.tapes.iter_mut().zip(&t.write).zip(&t.moves) {
            tp.write(w);
            tp.head += if mv == Move::L { -1 } else { 1 };
        }
        self.state = t.state;
        self.steps += 1;
        true
    }

    /// Renders the configuration as `u1 [q] u2` lines, one per tape.
    pub fn render(&self, m: &Machine) -> String {
        let mut out = String::new();
        for (i, tp) in self.tapes.iter().enumerate() {
            let (start, body) = tp.content();
            let lo = start.min(tp.head).min(if m.mode() == TapeMode::SemiInfinite { 0 } else { start });
            let hi = (start + body.len() as i64 - 1).max(tp.head);
            let mut line = String::new();
            for p in lo..=hi {
                if p == tp.head {
                    line.push('[');
                    line.push(m.glyph(tp.at(p)));
                    line.push(']');
                } else {
                    line.push(m.glyph(tp.at(p)));
                }
            }
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("{}: {}", i + 1, line));
        }
        format!("{} @{}\n{}", m.state_name(self.state), self.steps, out)
    }
}

/// Result of a single step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Next(Configuration),
    Halted,
}

/// One deterministic step.
pub fn step(m: &Machine, c: &Configuration) -> StepResult {
    let mut next = c.clone();
    if step_in_place(m, &mut next) {
        StepResult::Next(next)
    } else {
        StepResult::Halted
    }
}

/// Applies the first applicable target in place; `false` means halted.
pub fn step_in_place(m: &Machine, c: &mut Configuration) -> bool {
    let read = c.scanned();
    match m.targets(c.state, &read).first() {
        Some(t) => {
            let t = t.clone();
            c.apply(m, &t)
        }
        None => false,
    }
}

/// Applies a specific target in place; `false` means stuck at cell 0.
pub fn apply_target(m: &Machine, c: &mut Configuration, t: &Target) -> bool {
    c.apply(m, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    FuelExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "Accept",
            Verdict::Reject => "Reject",
            Verdict::FuelExhausted => "FuelExhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub final_config: Configuration,
    pub trace: Option<Vec<Configuration>>,
}

/// Runs from a prepared configuration.
pub fn run_from(m: &Machine, mut c: Configuration, fuel: u64, want_trace: bool) -> Outcome {
    let mut trace = want_trace.then(|| vec![c.clone()]);
    let mut used = 0u64;
    let verdict = loop {
        if m.is_accept(c.state) {
            break Verdict::Accept;
        }
        if used == fuel {
            break Verdict::FuelExhausted;
        }
        if !step_in_place(m, &mut c) {
            break Verdict::Reject;
        }
        used += 1;
        if let Some(t) = trace.as_mut() {
            t.push(c.clone());
        }
    };
    Outcome { verdict, final_config: c, trace }
}

/// Runs with `input` on tape 1.
pub fn run(m: &Machine, input: &str, fuel: u64, want_trace: bool) -> Result<Outcome, ValidationError> {
    run_tapes(m, &[input], fuel, want_trace)
}

/// Runs with one input word per leading tape.
pub fn run_tapes(
    m: &Machine,
    inputs: &[&str],
    fuel: u64,
    want_trace: bool,
) -> Result<Outcome, ValidationError> {
    if !m.is_deterministic() {
        return Err(ValidationError::new("run requires a deterministic machine"));
    }
    if inputs.len() > m.tapes() {
        return Err(ValidationError::new("more input words than tapes"));
    }
    let words = inputs.iter().map(|w| m.word_syms(w)).collect::<Result<Vec<_>, _>>()?;
    Ok(run_from(m, Configuration::initial(m, &words), fuel, want_trace))
}

/// Failure modes of [`run_numeric`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("machine rejected")]
    Reject,
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("output tape holds {0:?}, not a unary numeral")]
    NonEncodable(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// The unary numeral for `n`: "0" for zero, `n` ones otherwise.
pub fn unary(n: u64) -> String {
    if n == 0 {
        "0".to_string()
    } else {
        "1".repeat(n as usize)
    }
}

/// Inverse of [`unary`].
pub fn decode_unary(s: &str) -> Option<u64> {
    if s == "0" {
        Some(0)
    } else if !s.is_empty() && s.chars().all(|c| c == '1') {
        Some(s.len() as u64)
    } else {
        None
    }
}

/// Runs a numeric machine: argument `i` in unary on tape `i`, result read
/// from the output tape.
pub fn run_numeric(m: &Machine, args: &[u64], fuel: u64) -> Result<u64, NumericError> {
    let words: Vec<String> = args.iter().map(|&a| unary(a)).collect();
    let refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
    let out = run_tapes(m, &refs, fuel, false)?;
    match out.verdict {
        Verdict::Reject => Err(NumericError::Reject),
        Verdict::FuelExhausted => Err(NumericError::FuelExhausted),
        Verdict::Accept => {
            let s = out.final_config.tape_string(m, m.output_tape());
            decode_unary(&s).ok_or(NumericError::NonEncodable(s))
        }
    }
}

/// The machine accepting exactly `{0ⁿ1ⁿ}` with markers X and Y.
pub fn zeros_ones_machine() -> Machine {
    let mut s = MachineSpec::new(1, "01", "01XY_");
    s.state("q0").state("q1").state("q2").state("q4").state("q5");
    s.rule("q0", "0", "q1", "X", "R")
        .rule("q0", "Y", "q4", "Y", "R")
        .rule("q0", "_", "q5", "_", "R")
        .rule("q1", "0", "q1", "0", "R")
        .rule("q1", "Y", "q1", "Y", "R")
        .rule("q1", "1", "q2", "Y", "L")
        .rule("q2", "0", "q2", "0", "L")
        .rule("q2", "Y", "q2", "Y", "L")
        .rule("q2", "X", "q0", "X", "R")
        .rule("q4", "Y", "q4", "Y", "R")
        .rule("q4", "_", "q5", "_", "R");
    s.initial = "q0".into();
    s.accept = vec!["q5".into()];
    validate_machine(s).expect("built-in machine is valid")
}

/// Two-tape copier: copies tape 1 onto tape 2 and accepts.
pub fn copier_machine() -> Machine {
    let mut s = MachineSpec::new(2, "01", "01_");
    s.rule("c", "0_", "c", "00", "RR")
        .rule("c", "1_", "c", "11", "RR")
        .rule("c", "__", "done", "__", "RR");
    s.initial = "c".into();
    s.accept = vec!["done".into()];
    s.output = 1;
    validate_machine(s).expect("built-in machine is valid")
}

/// Nondeterministic guesser for words containing "11": at each `1` it may
/// either keep scanning or commit to checking that the next cell is `1`.
pub fn contains_11_machine() -> Machine {
    let mut s = MachineSpec::new(1, "01", "01_");
    s.rule("scan", "0", "scan", "0", "R")
        .rule("scan", "1", "scan", "1", "R")
        .rule("scan", "1", "check", "1", "R")
        .rule("check", "1", "yes", "1", "R");
    s.initial = "scan".into();
    s.accept = vec!["yes".into()];
    validate_machine(s).expect("built-in machine is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_ones_examples() {
        let m = zeros_ones_machine();
        assert!(m.is_deterministic());
        assert_eq!(run(&m, "0011", 500, false).unwrap().verdict, Verdict::Accept);
        assert_eq!(run(&m, "0101", 500, false).unwrap().verdict, Verdict::Reject);
    }

    #[test]
    fn write_outside_gamma_is_rejected() {
        let mut s = MachineSpec::new(1, "0", "0_");
        s.rule("a", "0", "a", "Z", "R");
        s.initial = "a".into();
        assert!(validate_machine(s).is_err());
    }

    #[test]
    fn blank_in_input_rejected() {
        let mut s = MachineSpec::new(1, "0_", "0_");
        s.state("a");
        s.initial = "a".into();
        assert!(validate_machine(s).is_err());
    }

    #[test]
    fn two_targets_is_nondeterministic() {
        assert!(!contains_11_machine().is_deterministic());
    }

    #[test]
    fn self_loop_exhausts_fuel() {
        let mut s = MachineSpec::new(1, "0", "0_");
        s.rule("a", "_", "b", "_", "R").rule("b", "_", "a", "_", "L");
        s.initial = "a".into();
        let m = validate_machine(s).unwrap();
        assert_eq!(run(&m, "", 10, false).unwrap().verdict, Verdict::FuelExhausted);
    }

    #[test]
    fn left_at_cell_zero_is_stuck() {
        let mut s = MachineSpec::new(1, "0", "0_");
        s.rule("a", "0", "a", "0", "L").rule("a", "_", "b", "_", "L");
        s.initial = "a".into();
        s.accept = vec!["b".into()];
        let m = validate_machine(s).unwrap();
        let o = run(&m, "0", 10, false).unwrap();
        assert_eq!(o.verdict, Verdict::Reject);
        assert_eq!(o.final_config.tapes[0].head(), 0);
    }

    #[test]
    fn step_moves_left_and_switches() {
        let mut s = MachineSpec::new(1, "ab", "ab_");
        s.rule("q", "b", "p", "a", "L");
        s.initial = "q".into();
        let m = validate_machine(s).unwrap();
        let w = vec![m.sym('a').unwrap(), m.sym('b').unwrap()];
        let mut c = Configuration::initial(&m, &[w]);
        c.tapes[0].head = 2;
        match step(&m, &c) {
            StepResult::Next(n) => {
                assert_eq!(n.state, m.spec().states.iter().position(|x| x == "p").unwrap());
                assert_eq!(n.tapes[0].head(), 1);
                assert_eq!(n.tape_string(&m, 0), "aa");
            }
            StepResult::Halted => panic!("expected a step"),
        }
        let c0 = Configuration::initial(&m, &[vec![m.sym('a').unwrap()]]);
        assert_eq!(step(&m, &c0), StepResult::Halted);
    }

    #[test]
    fn numeric_rejects_non_numeral() {
        let mut s = MachineSpec::new(1, "01", "01_");
        s.rule("a", "_", "b", "1", "R").rule("b", "_", "c", "0", "L");
        s.initial = "a".into();
        s.accept = vec!["c".into()];
        let m = validate_machine(s).unwrap();
        let r = run_numeric(&m, &[], 10);
        assert_eq!(r, Err(NumericError::NonEncodable("10".into())));
    }

    #[test]
    fn trace_is_coherent() {
        let m = zeros_ones_machine();
        let o = run(&m, "000111", 1000, true).unwrap();
        let t = o.trace.unwrap();
        for w in t.windows(2) {
            assert_eq!(step(&m, &w[0]), StepResult::Next(w[1].clone()));
        }
        assert_eq!(t.last().unwrap(), &o.final_config);
    }
}
