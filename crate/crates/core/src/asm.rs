//! Builder for multitape machines whose heads must move on every step.
//!
//! Since every head moves each step, all heads share the parity of their
//! position, and that parity is the step count mod 2. The builder keeps
//! this bit `τ` in the physical state. A logical state only describes its
//! active tapes. Idle tapes are parked on blank cells and hover between a
//! park cell `P` (odd, at `τ = 0`) and `P + 1` (at `τ = 1`).

use std::collections::{HashMap, VecDeque};

use crate::tm::{MachineSpec, Move, Rule, TapeMode, BLANK};

pub(crate) type Sid = usize;

/// One row of a logical state's table.
struct Row {
    tau: u8,
    read: Vec<char>,
    to: Sid,
    write: Vec<char>,
    moves: Vec<Move>,
}

struct Def {
    active: Vec<usize>,
    rows: Vec<Row>,
}

pub(crate) struct Asm {
    alphabet: Vec<char>,
    labels: Vec<String>,
    defs: Vec<Option<Def>>,
    accept: Vec<bool>,
}

/// What a row does: next state, writes and moves of the active tapes.
pub(crate) type Action = (Sid, Vec<char>, Vec<Move>);

impl Asm {
    /// `alphabet` must contain the blank.
    pub fn new(alphabet: &[char]) -> Asm {
        Asm { alphabet: alphabet.to_vec(), labels: Vec::new(), defs: Vec::new(), accept: Vec::new() }
    }

    pub fn state(&mut self, label: &str) -> Sid {
        self.labels.push(label.chars().filter(|c| c.is_ascii_alphabetic()).collect());
        self.defs.push(None);
        self.accept.push(false);
        self.labels.len() - 1
    }

    pub fn accept_state(&mut self, label: &str) -> Sid {
        let s = self.state(label);
        self.accept[s] = true;
        s
    }

    /// The emitted name of physical state `(s, τ)`.
    pub fn name(&self, s: Sid, tau: u8) -> String {
        format!("{}{}t{}", self.labels[s], s, tau)
    }

    /// Defines state `s` by enumerating `τ` and every reading of `active`.
    /// `None` leaves that combination without a transition.
    pub fn def(&mut self, s: Sid, active: &[usize], f: impl FnMut(u8, &[char]) -> Option<Action>) {
        let sets = vec![self.alphabet.clone(); active.len()];
        self.def_sets(s, active, &sets, f);
    }

    /// Like [`Asm::def`] with the readings of each active tape drawn from `sets`.
    pub fn def_sets(
        &mut self,
        s: Sid,
        active: &[usize],
        sets: &[Vec<char>],
        mut f: impl FnMut(u8, &[char]) -> Option<Action>,
    ) {
        assert!(self.defs[s].is_none(), "state {} defined twice", self.labels[s]);
        assert!(!self.accept[s], "accept states have no transitions");
        let mut rows = Vec::new();
        let n = active.len();
        let total: usize = sets.iter().map(|v| v.len()).product();
        let mut read = vec![BLANK; n];
        for tau in 0..2u8 {
            for mut idx in 0..total {
                for (r, set) in read.iter_mut().zip(sets) {
                    *r = set[idx % set.len()];
                    idx /= set.len();
                }
                if let Some((to, write, moves)) = f(tau, &read) {
                    debug_assert_eq!(write.len(), n);
                    debug_assert_eq!(moves.len(), n);
                    rows.push(Row { tau, read: read.clone(), to, write, moves });
                }
            }
        }
        self.defs[s] = Some(Def { active: active.to_vec(), rows });
    }

    /// Emits the reachable part of the machine, starting at `initial` with `τ = 0`.
    pub fn build(&self, tapes: usize, initial: Sid, input: &[char], output: usize) -> MachineSpec {
        let input: String = input.iter().collect();
        let tape: String = self.alphabet.iter().collect();
        let mut spec = MachineSpec::new(tapes, &input, &tape);
        spec.mode = TapeMode::SemiInfinite;
        spec.output = output;
        let name = |s: Sid, tau: u8| self.name(s, tau);
        let mut seen: HashMap<(Sid, u8), ()> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert((initial, 0), ());
        queue.push_back((initial, 0u8));
        spec.initial = name(initial, 0);
        while let Some((s, tau)) = queue.pop_front() {
            spec.states.push(name(s, tau));
            if self.accept[s] {
                spec.accept.push(name(s, tau));
                continue;
            }
            let Some(def) = &self.defs[s] else { continue };
            let idle = if tau == 0 { Move::R } else { Move::L };
            for row in def.rows.iter().filter(|r| r.tau == tau) {
                let mut read = vec![BLANK; tapes];
                let mut write = vec![BLANK; tapes];
                let mut moves = vec![idle; tapes];
                for (j, &t) in def.active.iter().enumerate() {
                    read[t] = row.read[j];
                    write[t] = row.write[j];
                    moves[t] = row.moves[j];
                }
                let next = (row.to, 1 - tau);
                if seen.insert(next, ()).is_none() {
                    queue.push_back(next);
                }
                spec.delta.push(Rule { from: name(s, tau), read, to: name(next.0, next.1), write, moves });
            }
        }
        spec
    }
}

/// The hover move of a tape parked at cell 1 or held at cell 1/2.
pub(crate) fn hover(tau: u8) -> Move {
    if tau == 0 {
        Move::R
    } else {
        Move::L
    }
}
