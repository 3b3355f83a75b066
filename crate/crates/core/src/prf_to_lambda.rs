//! Compiles partial recursive functions to λ-terms over Church numerals.

use std::collections::HashMap;

use crate::error::ValidationError;
use crate::lambda::combinators as cb;
use crate::lambda::{beta_eq, church, freshen, BetaEq, Name, Term};
use crate::prf::{arity_check, permute_args, PrfExpr, PrfNode};

/// Compiles `e` into a closed term `F` with `F x̄₁ … x̄ₖ =β f(x₁,…,xₖ)` on
/// the domain of `f`. Every binder of the result is distinct.
pub fn compile_prf_to_lambda(e: &PrfExpr) -> Result<Term, ValidationError> {
    arity_check(e)?;
    let mut memo = HashMap::new();
    Ok(freshen(&compile(e, &mut memo)?))
}

fn vars(k: usize) -> Vec<Name> {
    (1..=k).map(|i| Name::new(&format!("x{i}"))).collect()
}

fn abstract_over(xs: &[Name], body: Term) -> Term {
    xs.iter().rev().fold(body, |b, x| Term::abs(x.clone(), b))
}

fn apply_vars(f: Term, xs: &[Name]) -> Term {
    Term::apps(f, xs.iter().map(|x| Term::var_n(x.clone())))
}

fn compile(e: &PrfExpr, memo: &mut HashMap<*const PrfNode, Term>) -> Result<Term, ValidationError> {
    let key = e.node() as *const PrfNode;
    if let Some(t) = memo.get(&key) {
        return Ok(t.clone());
    }
    let t = match e.node() {
        PrfNode::Zero(k) => abstract_over(&vars(*k), church(0)),
        PrfNode::Succ => cb::succ(),
        PrfNode::Proj(k, i) => {
            let xs = vars(*k);
            abstract_over(&xs, Term::var_n(xs[i - 1].clone()))
        }
        PrfNode::Compose(g, hs) => {
            let k = arity_check(&hs[0])?;
            let xs = vars(k);
            let mut body = compile(g, memo)?;
            for h in hs {
                body = Term::app(body, apply_vars(compile(h, memo)?, &xs));
            }
            abstract_over(&xs, body)
        }
        PrfNode::PrimRec(g, h) => {
            let k = arity_check(g)?;
            // h'(m, a, x⃗) = h(x⃗, m, a), then F'(u, x⃗) recurses on its first argument
            let mut pi: Vec<usize> = (3..=k + 2).collect();
            pi.extend([1, 2]);
            let h1 = compile(&permute_args(h, &pi)?, memo)?;
            let gt = compile(g, memo)?;
            let xs = vars(k);
            let (u, w) = (Name::new("u"), Name::new("v"));
            let step = Term::abs(
                u.clone(),
                Term::abs(w.clone(), apply_vars(Term::apps(h1, [Term::var_n(u.clone()), Term::var_n(w)]), &xs)),
            );
            let body = Term::apps(cb::r(), [apply_vars(gt, &xs), step, Term::var_n(u.clone())]);
            let f1 = Term::abs(u, abstract_over(&xs, body));
            // f(x⃗, u) = F'(u, x⃗)
            let ys = vars(k + 1);
            let mut call = Term::app(f1, Term::var_n(ys[k].clone()));
            call = apply_vars(call, &ys[..k]);
            abstract_over(&ys, call)
        }
        PrfNode::Mu(g) => {
            let k = arity_check(g)? - 1;
            let gt = compile(g, memo)?;
            let xs = vars(k);
            let h = abstract_over(&xs, Term::app(cb::p(), apply_vars(gt.clone(), &xs)));
            let j = abstract_over(&xs, Term::app(apply_vars(h, &xs), church(0)));
            let body = Term::apps(
                cb::p(),
                [apply_vars(gt, &xs), church(0), cb::i(), apply_vars(j, &xs)],
            );
            abstract_over(&xs, body)
        }
        PrfNode::Named(n) => compile(n.def(), memo)?,
    };
    memo.insert(key, t.clone());
    Ok(t)
}

/// Applies a compiled term to Church numerals.
pub fn apply_numerals(f: &Term, args: &[u64]) -> Term {
    Term::apps(f.clone(), args.iter().map(|&n| church(n)))
}

/// The combinators whose defining equations [`recursion_gadget_check`] replays.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gadget {
    D,
    Q,
    R,
    T,
    P,
}

#[derive(Clone, Debug)]
pub struct GadgetReport {
    pub gadget: Gadget,
    /// One entry per checked equation.
    pub checks: Vec<(String, BetaEq)>,
}

impl GadgetReport {
    pub fn all_equal(&self) -> bool {
        self.checks.iter().all(|(_, v)| *v == BetaEq::Equal)
    }
}

const GADGET_FUEL: u64 = 100_000;

/// Checks a gadget's equations on fresh variables and small numerals.
pub fn recursion_gadget_check(which: Gadget) -> GadgetReport {
    let (x, y) = (Term::var("X"), Term::var("Y"));
    let mut checks = Vec::new();
    let mut check = |label: String, a: Term, b: Term| {
        checks.push((label, beta_eq(&a, &b, GADGET_FUEL)));
    };
    let s = |t: Term| Term::app(cb::succ(), t);
    match which {
        Gadget::D => {
            check("D X Y 0 = X".into(), Term::apps(cb::d(), [x.clone(), y.clone(), church(0)]), x.clone());
            for m in 0..4 {
                check(
                    format!("D X Y {} = Y", m + 1),
                    Term::apps(cb::d(), [x.clone(), y.clone(), church(m + 1)]),
                    y.clone(),
                );
            }
        }
        Gadget::Q => {
            for m in 0..4 {
                check(
                    format!("Q Y (D {m} X) = D {} (Y {m} X)", m + 1),
                    Term::apps(cb::q(), [y.clone(), Term::apps(cb::d(), [church(m), x.clone()])]),
                    Term::apps(cb::d(), [church(m + 1), Term::apps(y.clone(), [church(m), x.clone()])]),
                );
                let mut chain = Term::apps(cb::d(), [church(0), x.clone()]);
                for _ in 0..m {
                    chain = Term::app(cb::q_of(y.clone()), chain);
                }
                check(format!("(Q Y)^{m} (D 0 X) 0 = {m}"), Term::app(chain, church(0)), church(m));
            }
        }
        Gadget::R => {
            check("R X Y 0 = X".into(), Term::apps(cb::r(), [x.clone(), y.clone(), church(0)]), x.clone());
            for m in 0..4 {
                check(
                    format!("R X Y {} = Y {m} (R X Y {m})", m + 1),
                    Term::apps(cb::r(), [x.clone(), y.clone(), church(m + 1)]),
                    Term::apps(y.clone(), [church(m), Term::apps(cb::r(), [x.clone(), y.clone(), church(m)])]),
                );
            }
        }
        Gadget::T => {
            check("T X 0 = 0".into(), Term::apps(cb::t_of(x.clone()), [church(0)]), church(0));
            let (u, v) = (Term::var("u"), Term::var("v"));
            let w = Term::lams(
                &["u", "v"],
                Term::apps(u.clone(), [Term::app(x.clone(), s(v.clone())), u, s(v)]),
            );
            for m in 0..3 {
                check(format!("T X {} = λuv. u(X(S v)) u (S v)", m + 1), Term::app(cb::t_of(x.clone()), church(m + 1)), w.clone());
            }
        }
        Gadget::P => {
            let k0 = Term::app(cb::k(), church(0));
            check("P (K 0) Y = Y".into(), Term::apps(cb::p(), [k0, y.clone()]), y.clone());
            // X n = 1 for n = 0 and 0 otherwise, so X 0 = 1 and X (S 0) = 0
            let is_zero = Term::lam(
                "n",
                Term::apps(Term::var("n"), [Term::app(cb::k(), church(0)), church(1)]),
            );
            check(
                "P X 0 = P X (S 0) when X 0 = 1".into(),
                Term::apps(cb::p(), [is_zero.clone(), church(0)]),
                Term::apps(cb::p(), [is_zero.clone(), s(church(0))]),
            );
            check("P X 0 = 1".into(), Term::apps(cb::p(), [is_zero, church(0)]), church(1));
        }
    }
    GadgetReport { gadget: which, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{church_decode, normalize, Normalized};
    use crate::prf::stdlib;

    fn run(e: &PrfExpr, args: &[u64]) -> u64 {
        let f = compile_prf_to_lambda(e).unwrap();
        church_decode(&apply_numerals(&f, args), 1_000_000).unwrap()
    }

    #[test]
    fn base_functions() {
        assert_eq!(run(&PrfExpr::zero(1), &[5]), 0);
        assert_eq!(run(&PrfExpr::succ(), &[4]), 5);
        assert_eq!(run(&PrfExpr::proj(3, 2), &[1, 7, 3]), 7);
        assert_eq!(run(&PrfExpr::zero(0), &[]), 0);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(run(&stdlib::add(), &[2, 3]), 5);
        assert_eq!(run(&stdlib::mul(), &[2, 3]), 6);
        assert_eq!(run(&stdlib::pred(), &[0]), 0);
        assert_eq!(run(&stdlib::pred(), &[3]), 2);
        assert_eq!(run(&stdlib::monus(), &[3, 1]), 2);
    }

    #[test]
    fn minimalization() {
        let g = PrfExpr::compose(stdlib::monus(), vec![PrfExpr::proj(2, 1), PrfExpr::proj(2, 2)]);
        assert_eq!(run(&PrfExpr::mu(g), &[3]), 3);
        let never = PrfExpr::mu(stdlib::const_k(1, 2));
        let f = compile_prf_to_lambda(&never).unwrap();
        assert!(matches!(normalize(&apply_numerals(&f, &[1]), 10_000), Normalized::FuelExhausted(_)));
    }

    #[test]
    fn compiled_terms_are_closed() {
        for e in [stdlib::add(), stdlib::mul(), PrfExpr::mu(stdlib::monus())] {
            assert!(compile_prf_to_lambda(&e).unwrap().is_closed());
        }
    }

    #[test]
    fn gadgets_hold() {
        for g in [Gadget::D, Gadget::Q, Gadget::R, Gadget::T, Gadget::P] {
            let r = recursion_gadget_check(g);
            assert!(r.all_equal(), "{:?}", r);
        }
    }
}
