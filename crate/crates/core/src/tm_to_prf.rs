//! Compiles a single-tape numeric machine over `{_, 0, 1}` into a partial
//! recursive function by Gödel numbering its configurations.
//!
//! A tape is the base-3 number whose digit `i` codes cell `i + 1`
//! (`_ ↦ 0`, `0 ↦ 1`, `1 ↦ 2`); the protected cell 0 is not represented.
//! A configuration `(w, q, p)` is packed as `2^w · 3^q · 5^p`, and the sink
//! state `r = |Q|` marks a halted machine.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::ValidationError;
use crate::prf::stdlib::{self, and, const_k, not};
use crate::prf::{PrfExpr, Shortcut, TableDefault};
use crate::tm::{Configuration, Machine, Move, TapeMode, BLANK};

fn digit(c: char) -> Option<u32> {
    match c {
        BLANK => Some(0),
        '0' => Some(1),
        '1' => Some(2),
        _ => None,
    }
}

/// Base-3 code of a tape word; `None` if the word uses other symbols.
pub fn encode_word(s: &str) -> Option<BigUint> {
    let mut n = BigUint::zero();
    for c in s.chars().rev() {
        n = n * 3u32 + digit(c)?;
    }
    Some(n)
}

/// Base-3 code of a word over `{0, 1}`.
pub fn encode_tape(s: &str) -> BigUint {
    encode_word(s).expect("tape words are over {0, 1, _}")
}

/// Inverse of [`encode_word`], without trailing blanks.
pub fn decode_tape(n: &BigUint) -> String {
    let mut n = n.clone();
    let mut out = String::new();
    let three = BigUint::from(3u32);
    while !n.is_zero() {
        let d = (&n % &three).to_u32().unwrap();
        out.push(['_', '0', '1'][d as usize]);
        n /= &three;
    }
    out
}

fn p(k: usize, i: usize) -> PrfExpr {
    PrfExpr::proj(k, i)
}

fn c(g: PrfExpr, hs: Vec<PrfExpr>) -> PrfExpr {
    PrfExpr::compose(g, hs)
}

/// `Enc(n) = 1` iff `n = 1` or `n = 3^j − 1` for some `1 ≤ j ≤ n`.
pub fn enc_predicate() -> PrfExpr {
    PrfExpr::named_lazy("enc", 1, Some(Shortcut::Enc), || {
        stdlib::or(c(stdlib::eq(), vec![p(1, 1), const_k(1, 1)]), c(stdlib::exists_le(power_minus_one()), vec![p(1, 1), p(1, 1)]))
    })
}

/// `R(n, j)`: `j ≥ 1` and `n = 3^j ∸ 1`.
fn power_minus_one() -> PrfExpr {
    let three_j = c(stdlib::exp(), vec![const_k(3, 2), p(2, 2)]);
    and(c(stdlib::sg(), vec![p(2, 2)]), c(stdlib::eq(), vec![p(2, 1), c(stdlib::monus(), vec![three_j, const_k(1, 2)])]))
}

/// Maps a unary tape code back to its number: `1 ↦ 0`, `3^j − 1 ↦ j`.
pub fn unary_decode() -> PrfExpr {
    PrfExpr::named_lazy("unary_decode", 1, Some(Shortcut::UnaryDecode), || {
        let is_one = c(stdlib::eq(), vec![p(1, 1), const_k(1, 1)]);
        let j = c(stdlib::bounded_mu(power_minus_one()).unwrap(), vec![p(1, 1), p(1, 1)]);
        stdlib::cases(vec![PrfExpr::zero(1), j], vec![is_one.clone(), not(is_one)]).unwrap()
    })
}

/// The code of the number `n` on a tape: `1` for zero, `3^n − 1` otherwise.
pub fn input_code() -> PrfExpr {
    PrfExpr::named_lazy("input_code", 1, None, || {
        let pow = c(stdlib::monus(), vec![c(stdlib::exp(), vec![const_k(3, 1), p(1, 1)]), const_k(1, 1)]);
        c(stdlib::add(), vec![pow, c(stdlib::nsg(), vec![p(1, 1)])])
    })
}

/// Finite functions of `(q, s)` read off the transition table.
#[derive(Clone, Debug)]
pub struct MachineTables {
    /// `0` for a left move, `1` for a right move, `2` when halted.
    pub action: PrfExpr,
    pub next_symbol: PrfExpr,
    pub next_state: PrfExpr,
    /// The sink state `r = |Q|`.
    pub sink: u64,
}

fn table(name: &str, map: HashMap<(u64, u64), u64>, default: TableDefault) -> PrfExpr {
    let map = Arc::new(map);
    let sc = Shortcut::Table(map.clone(), default.clone());
    PrfExpr::named_lazy(name, 2, Some(sc), move || {
        let mut entries: Vec<_> = map.iter().map(|(&k, &v)| (k, v)).collect();
        entries.sort();
        let hit = |q: u64, s: u64| {
            and(c(stdlib::eq(), vec![p(2, 1), const_k(q, 2)]), c(stdlib::eq(), vec![p(2, 2), const_k(s, 2)]))
        };
        let hits: Vec<PrfExpr> = entries.iter().map(|&((q, s), _)| hit(q, s)).collect();
        let fallback = match default {
            TableDefault::Const(v) => const_k(v, 2),
            TableDefault::SecondArg => p(2, 2),
        };
        let mut fs: Vec<PrfExpr> = entries.iter().map(|&(_, v)| const_k(v, 2)).collect();
        let mut rs = hits.clone();
        let miss = if hits.is_empty() {
            const_k(1, 2)
        } else {
            let any = hits.into_iter().reduce(stdlib::or).unwrap();
            not(any)
        };
        fs.push(fallback);
        rs.push(miss);
        stdlib::cases(fs, rs).unwrap()
    })
}

fn check_convention(m: &Machine) -> Result<(), ValidationError> {
    if m.tapes() != 1 {
        return Err(ValidationError::new("machine must have exactly one tape"));
    }
    if m.mode() != TapeMode::SemiInfinite {
        return Err(ValidationError::new("machine must use a semi-infinite tape"));
    }
    if !m.is_deterministic() {
        return Err(ValidationError::new("machine must be deterministic"));
    }
    if let Some(g) = m.glyphs().iter().find(|&&g| digit(g).is_none()) {
        return Err(ValidationError::new(format!("tape symbol `{g}` is outside {{_, 0, 1}}")));
    }
    Ok(())
}

/// Reads the three table functions off `m`. Accepting states and missing
/// instructions both count as halted.
pub fn machine_tables(m: &Machine) -> Result<MachineTables, ValidationError> {
    check_convention(m)?;
    let sink = m.state_count() as u64;
    let (mut action, mut symbol, mut state) = (HashMap::new(), HashMap::new(), HashMap::new());
    for (q, read) in m.entries() {
        let q = *q;
        if m.is_accept(q) {
            continue;
        }
        let t = &m.targets(q, read)[0];
        let s = digit(m.glyph(read[0])).unwrap() as u64;
        action.insert((q as u64, s), if t.moves[0] == Move::L { 0 } else { 1 });
        symbol.insert((q as u64, s), digit(m.glyph(t.write[0])).unwrap() as u64);
        state.insert((q as u64, s), t.state as u64);
    }
    Ok(MachineTables {
        action: table("action", action, TableDefault::Const(2)),
        next_symbol: table("next_symbol", symbol, TableDefault::SecondArg),
        next_state: table("next_state", state, TableDefault::Const(sink)),
        sink,
    })
}

/// The pieces of a compiled machine, exposed for inspection.
#[derive(Clone, Debug)]
pub struct TmPrf {
    pub tables: MachineTables,
    /// `current_symbol(w, p)`: the digit of cell `p`, blank for `p = 0`.
    pub current_symbol: PrfExpr,
    /// `next_configuration(w, q, p)`, packed.
    pub next_configuration: PrfExpr,
    /// `execute(w, t)`: the packed configuration after `t` steps from tape `w`.
    pub execute: PrfExpr,
    /// `num_steps(w)`: steps until the head is on cell 1 over a numeral and
    /// the machine has halted.
    pub num_steps: PrfExpr,
    /// The function computed by the machine.
    pub function: PrfExpr,
}

/// Builds every stage of the construction for `m`.
pub fn compile_tm_to_prf_parts(m: &Machine) -> Result<TmPrf, ValidationError> {
    let tables = machine_tables(m)?;
    let r = tables.sink;
    // digits: (w, p) ↦ sg(p) · ((w / 3^(p∸1)) mod 3)
    let place = c(stdlib::exp(), vec![const_k(3, 2), c(stdlib::pred(), vec![p(2, 2)])]);
    let cur = PrfExpr::named_lazy("current_symbol", 2, None, {
        let place = place.clone();
        move || {
            let d = c(stdlib::modulo(), vec![c(stdlib::div(), vec![p(2, 1), place.clone()]), const_k(3, 2)]);
            c(stdlib::mul(), vec![c(stdlib::sg(), vec![p(2, 2)]), d])
        }
    });
    // arguments of the step functions: (w, q, p)
    let (w, q, pos) = (p(3, 1), p(3, 2), p(3, 3));
    let s = c(cur.clone(), vec![w.clone(), pos.clone()]);
    let act = c(tables.action.clone(), vec![q.clone(), s.clone()]);
    let is_act = |v: u64| c(stdlib::eq(), vec![act.clone(), const_k(v, 3)]);
    let next_square = c(
        stdlib::add(),
        vec![c(stdlib::monus(), vec![pos.clone(), is_act(0)]), is_act(1)],
    );
    let place3 = c(stdlib::mul(), vec![c(stdlib::sg(), vec![pos.clone()]), c(place.clone(), vec![w.clone(), pos.clone()])]);
    let ns = c(tables.next_symbol.clone(), vec![q.clone(), s.clone()]);
    let next_tape = c(
        stdlib::add(),
        vec![
            c(stdlib::monus(), vec![w.clone(), c(stdlib::mul(), vec![s.clone(), place3.clone()])]),
            c(stdlib::mul(), vec![ns, place3]),
        ],
    );
    let nq = c(tables.next_state.clone(), vec![q.clone(), s.clone()]);
    let stuck = and(c(stdlib::nsg(), vec![pos.clone()]), is_act(0));
    let next_state = c(
        stdlib::add(),
        vec![nq.clone(), c(stdlib::mul(), vec![stuck, c(stdlib::monus(), vec![const_k(r, 3), nq])])],
    );
    let next_configuration = PrfExpr::named("next_configuration", c(stdlib::pack(), vec![next_tape, next_state, next_square]))?;
    let unpack = |i: u64, k: usize, j: usize| c(stdlib::expo(i), vec![p(k, j)]);
    let execute = PrfExpr::named(
        "execute",
        PrfExpr::prim_rec(
            c(stdlib::pack(), vec![p(1, 1), PrfExpr::zero(1), const_k(1, 1)]),
            c(next_configuration.clone(), vec![unpack(2, 3, 3), unpack(3, 3, 3), unpack(5, 3, 3)]),
        ),
    )?;
    // condition on (w, t) with E = execute(w, t)
    let e = c(execute.clone(), vec![p(2, 1), p(2, 2)]);
    let part = |i: u64| c(stdlib::expo(i), vec![e.clone()]);
    let at_start = c(stdlib::eq(), vec![part(5), const_k(1, 2)]);
    let numeral = c(enc_predicate(), vec![part(2)]);
    let halted = c(
        stdlib::eq(),
        vec![c(tables.next_state.clone(), vec![part(3), c(cur.clone(), vec![part(2), part(5)])]), const_k(r, 2)],
    );
    let cond = and(and(at_start, numeral), halted);
    let num_steps = PrfExpr::named("num_steps", PrfExpr::mu(not(cond)))?;
    let n = c(input_code(), vec![p(1, 1)]);
    let final_tape = c(stdlib::expo(2), vec![c(execute.clone(), vec![n.clone(), c(num_steps.clone(), vec![n])])]);
    let function = PrfExpr::named("machine", c(unary_decode(), vec![final_tape]))?;
    Ok(TmPrf { tables, current_symbol: cur, next_configuration, execute, num_steps, function })
}

/// The unary function computed by `m`, as a partial recursive function.
pub fn compile_tm_to_prf(m: &Machine) -> Result<PrfExpr, ValidationError> {
    Ok(compile_tm_to_prf_parts(m)?.function)
}

/// `(w, q, p)` of a configuration of a single-tape machine over `{_, 0, 1}`.
pub fn configuration_code(m: &Machine, cfg: &Configuration) -> (BigUint, u64, u64) {
    let tape = &cfg.tapes[0];
    let (start, syms) = tape.content();
    let word: String = (1..start + syms.len() as i64).map(|i| m.glyph(tape.at(i))).collect();
    let w = encode_word(&word).unwrap_or_default();
    (w, cfg.state as u64, cfg.tapes[0].head().max(0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::{eval_u64, Nat};
    use crate::prf_to_tm::compile_prf_to_tm;
    use crate::tm::{run_numeric, step, validate_machine, MachineSpec, StepResult};
    use num_traits::One;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    /// Appends `1` to a unary numeral, or turns `0` into `1`.
    fn successor_machine() -> Machine {
        let mut s = MachineSpec::new(1, "01", "_01");
        s.rule("a", "1", "b", "1", "R")
            .rule("a", "0", "back", "1", "L")
            .rule("b", "1", "b", "1", "R")
            .rule("b", "_", "c", "1", "L")
            .rule("c", "1", "c", "1", "L")
            .rule("c", "_", "done", "_", "R")
            .rule("back", "_", "done", "_", "R");
        s.state("done");
        s.initial = "a".into();
        s.accept = vec!["done".into()];
        validate_machine(s).unwrap()
    }

    #[test]
    fn tape_codes() {
        assert_eq!(encode_tape("1101"), b(71));
        assert_eq!(encode_tape("0"), b(1));
        for n in 1..6u32 {
            assert_eq!(encode_tape(&"1".repeat(n as usize)), b(3).pow(n) - 1u32);
        }
        assert_eq!(decode_tape(&b(0)), "");
        assert_eq!(decode_tape(&b(71)), "1101");
    }

    #[test]
    fn enc_values() {
        let e = enc_predicate();
        for (n, want) in [(1, 1), (8, 1), (5, 0), (2, 1), (26, 1), (0, 0), (3, 0)] {
            assert_eq!(eval_u64(&e, &[n], 1_000_000).unwrap(), b(want), "Enc({n})");
        }
        let pure = e.expand();
        for n in 0..9 {
            assert_eq!(eval_u64(&pure, &[n], 10_000_000).unwrap(), eval_u64(&e, &[n], 1000).unwrap());
        }
    }

    #[test]
    fn tables_follow_the_machine() {
        let m = successor_machine();
        let t = machine_tables(&m).unwrap();
        let a = m.spec().states.iter().position(|s| s == "a").unwrap() as u64;
        assert_eq!(eval_u64(&t.action, &[a, 2], 100).unwrap(), b(1));
        let done = m.spec().states.iter().position(|s| s == "done").unwrap() as u64;
        assert_eq!(eval_u64(&t.next_state, &[done, 2], 100).unwrap(), b(t.sink));
        assert_eq!(eval_u64(&t.next_symbol, &[done, 1], 100).unwrap(), b(1));
        assert_eq!(eval_u64(&t.action, &[done, 0], 100).unwrap(), b(2));
        for (q, s) in [(a, 2), (a, 1), (done, 0), (a, 0)] {
            for f in [&t.action, &t.next_symbol, &t.next_state] {
                let pure = f.expand();
                assert_eq!(eval_u64(&pure, &[q, s], 10_000_000).unwrap(), eval_u64(f, &[q, s], 100).unwrap());
            }
        }
    }

    #[test]
    fn successor_end_to_end() {
        let m = successor_machine();
        let f = compile_tm_to_prf(&m).unwrap();
        for n in 0..4 {
            assert_eq!(eval_u64(&f, &[n], 1_000_000).unwrap(), b(run_numeric(&m, &[n], 1000).unwrap()));
        }
    }

    #[test]
    fn steps_agree_with_the_machine() {
        let m = successor_machine();
        let parts = compile_tm_to_prf_parts(&m).unwrap();
        for n in 0..4 {
            let word = crate::tm::unary(n);
            let mut cfg = Configuration::initial(&m, &[word.chars().map(|ch| m.sym(ch).unwrap()).collect()]);
            loop {
                let (w, q, pos) = configuration_code(&m, &cfg);
                let got = eval(&parts.next_configuration, &[w, b(q), b(pos)]);
                match step(&m, &cfg) {
                    StepResult::Next(next) if !m.is_accept(cfg.state) => {
                        let (w2, q2, p2) = configuration_code(&m, &next);
                        assert_eq!(got, Nat::pack(w2, b(q2), b(p2)));
                        cfg = next;
                    }
                    _ => {
                        let (w, _, pos) = configuration_code(&m, &cfg);
                        assert_eq!(got, Nat::pack(w, b(parts.tables.sink), b(pos)));
                        break;
                    }
                }
            }
        }
    }

    fn eval(e: &PrfExpr, args: &[BigUint]) -> Nat {
        let a: Vec<Nat> = args.iter().cloned().map(Nat::Big).collect();
        crate::prf::Evaluator::new(crate::prf::EvalOptions::new(1_000_000)).eval(e, &a).unwrap()
    }

    #[test]
    fn execution_stabilizes() {
        let m = successor_machine();
        let parts = compile_tm_to_prf_parts(&m).unwrap();
        let w = encode_tape("11");
        let th = eval(&parts.num_steps, &[w.clone()]);
        let Nat::Big(th) = th else { panic!() };
        let at = |t: &BigUint| eval(&parts.execute, &[w.clone(), t.clone()]);
        let halted = at(&th);
        let base = at(&(&th + 1u32));
        for e in [2, 5] {
            assert_eq!(halted.exponent(&b(e)).unwrap(), base.exponent(&b(e)).unwrap());
        }
        for k in 2..=4u32 {
            assert_eq!(at(&(&th + k)), base);
        }
        assert_eq!(base.exponent(&b(3)).unwrap(), b(parts.tables.sink));
        assert!(base.exponent(&b(5)).unwrap().is_one());
    }

    #[test]
    fn rejects_rich_alphabets() {
        let c = compile_prf_to_tm(&stdlib::add()).unwrap();
        assert!(compile_tm_to_prf(&c.machine).is_err());
        assert!(compile_tm_to_prf(&crate::tm::zeros_ones_machine()).is_err());
    }
}
