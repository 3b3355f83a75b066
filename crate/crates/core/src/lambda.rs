//! Untyped λ-calculus with named variables.
//!
//! Reduction is leftmost-outermost. Fresh variables get a process-wide
//! counter suffix, so names produced by substitution never collide with
//! names supplied by the caller.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

static FRESH: AtomicU32 = AtomicU32::new(1);

/// A variable name: a base identifier plus a freshness index (`0` for
/// user-supplied names).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    pub base: Arc<str>,
    pub index: u32,
}

impl Name {
    pub fn new(base: &str) -> Name {
        Name { base: base.into(), index: 0 }
    }

    /// A name distinct from every name created so far.
    pub fn fresh(base: &str) -> Name {
        Name { base: base.into(), index: FRESH.fetch_add(1, Ordering::Relaxed) }
    }

    /// A fresh name with the same base.
    pub fn refresh(&self) -> Name {
        Name::fresh(&self.base)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}_{}", self.base, self.index)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(Name),
    Abs(Name, Term),
    App(Term, Term),
    /// A context hole.
    Hole,
}

struct Inner {
    node: Node,
    fv: OnceLock<Arc<HashSet<Name>>>,
}

/// An immutable shared λ-term (or context, when it contains holes).
#[derive(Clone)]
pub struct Term(Arc<Inner>);

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.same(other) || self.0.node == other.0.node
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.node.fmt(f)
    }
}

impl Term {
    fn new(node: Node) -> Term {
        Term(Arc::new(Inner { node, fv: OnceLock::new() }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }
    pub fn var(name: &str) -> Term {
        Term::new(Node::Var(Name::new(name)))
    }
    pub fn var_n(name: Name) -> Term {
        Term::new(Node::Var(name))
    }
    pub fn abs(x: Name, body: Term) -> Term {
        Term::new(Node::Abs(x, body))
    }
    /// `λx.body` with a plain name.
    pub fn lam(x: &str, body: Term) -> Term {
        Term::abs(Name::new(x), body)
    }
    /// `λx₁…xₙ.body`.
    pub fn lams(xs: &[&str], body: Term) -> Term {
        xs.iter().rev().fold(body, |b, x| Term::lam(x, b))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::new(Node::App(f, a))
    }
    /// Left-associated application `f a₁ … aₙ`.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }
    pub fn hole() -> Term {
        Term::new(Node::Hole)
    }

    fn same(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Var(_) | Node::Hole => 1,
            Node::Abs(_, b) => 1 + b.size(),
            Node::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    pub fn has_hole(&self) -> bool {
        match self.node() {
            Node::Hole => true,
            Node::Var(_) => false,
            Node::Abs(_, b) => b.has_hole(),
            Node::App(f, a) => f.has_hole() || a.has_hole(),
        }
    }

    pub fn free_vars(&self) -> HashSet<Name> {
        self.fv().as_ref().clone()
    }

    /// The free variables, computed once per node.
    fn fv(&self) -> &Arc<HashSet<Name>> {
        self.0.fv.get_or_init(|| match self.node() {
            Node::Var(x) => Arc::new(HashSet::from([x.clone()])),
            Node::Hole => Arc::new(HashSet::new()),
            Node::Abs(x, b) => {
                let inner = b.fv();
                if inner.contains(x) {
                    let mut s = inner.as_ref().clone();
                    s.remove(x);
                    Arc::new(s)
                } else {
                    inner.clone()
                }
            }
            Node::App(f, a) => {
                let (ff, fa) = (f.fv(), a.fv());
                if fa.is_subset(ff) {
                    ff.clone()
                } else if ff.is_subset(fa) {
                    fa.clone()
                } else {
                    Arc::new(ff.union(fa).cloned().collect())
                }
            }
        })
    }

    pub fn is_closed(&self) -> bool {
        self.fv().is_empty()
    }

    fn free_in(&self, x: &Name) -> bool {
        self.fv().contains(x)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Term, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
            // ctx: 0 top, 1 function position, 2 argument position
            match t.node() {
                Node::Var(x) => write!(f, "{x}"),
                Node::Hole => write!(f, "[]"),
                Node::Abs(..) => {
                    if ctx > 0 {
                        write!(f, "(")?;
                    }
                    write!(f, "\\")?;
                    let mut cur = t;
                    let mut first = true;
                    while let Node::Abs(x, b) = cur.node() {
                        if !first {
                            write!(f, " ")?;
                        }
                        write!(f, "{x}")?;
                        first = false;
                        cur = b;
                    }
                    write!(f, ". ")?;
                    go(cur, f, 0)?;
                    if ctx > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Node::App(a, b) => {
                    if ctx == 2 {
                        write!(f, "(")?;
                    }
                    go(a, f, 1)?;
                    write!(f, " ")?;
                    go(b, f, 2)?;
                    if ctx == 2 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

/// Bound variables, free variables and sub-terms of a term.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub fv: BTreeSet<Name>,
    pub bv: BTreeSet<Name>,
    pub sub: HashSet<Term>,
}

pub fn analyze(t: &Term) -> Analysis {
    fn bv(t: &Term, out: &mut BTreeSet<Name>) {
        match t.node() {
            Node::Var(_) | Node::Hole => {}
            Node::Abs(x, b) => {
                out.insert(x.clone());
                bv(b, out);
            }
            Node::App(f, a) => {
                bv(f, out);
                bv(a, out);
            }
        }
    }
    fn sub(t: &Term, out: &mut HashSet<Term>) {
        out.insert(t.clone());
        match t.node() {
            Node::Var(_) | Node::Hole => {}
            Node::Abs(_, b) => sub(b, out),
            Node::App(f, a) => {
                sub(f, out);
                sub(a, out);
            }
        }
    }
    let mut b = BTreeSet::new();
    bv(t, &mut b);
    let mut s = HashSet::new();
    sub(t, &mut s);
    Analysis { fv: t.free_vars().into_iter().collect(), bv: b, sub: s }
}

/// Replaces every hole by `m`, verbatim. Capture is allowed.
pub fn fill_context(c: &Term, m: &Term) -> Term {
    match c.node() {
        Node::Hole => m.clone(),
        Node::Var(_) => c.clone(),
        Node::Abs(x, b) => Term::abs(x.clone(), fill_context(b, m)),
        Node::App(f, a) => Term::app(fill_context(f, m), fill_context(a, m)),
    }
}

/// α-congruence.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go<'a>(a: &'a Term, b: &'a Term, env: &mut Vec<(&'a Name, &'a Name)>) -> bool {
        match (a.node(), b.node()) {
            (Node::Var(x), Node::Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if *l == x || *r == y {
                        return *l == x && *r == y;
                    }
                }
                x == y
            }
            (Node::Hole, Node::Hole) => true,
            (Node::Abs(x, p), Node::Abs(y, q)) => {
                env.push((x, y));
                let r = go(p, q, env);
                env.pop();
                r
            }
            (Node::App(f, p), Node::App(g, q)) => go(f, g, env) && go(p, q, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Capture-avoiding `m[x := n]`.
pub fn substitute(m: &Term, x: &Name, n: &Term) -> Term {
    if !m.free_in(x) {
        return m.clone();
    }
    subst_rec(m, x, n, n.fv()).unwrap_or_else(|| m.clone())
}

fn subst_rec(m: &Term, x: &Name, n: &Term, fv_n: &HashSet<Name>) -> Option<Term> {
    match m.node() {
        _ if !m.free_in(x) => None,
        Node::Var(_) => Some(n.clone()),
        Node::Hole => None,
        Node::App(f, a) => {
            let f2 = subst_rec(f, x, n, fv_n);
            let a2 = subst_rec(a, x, n, fv_n);
            if f2.is_none() && a2.is_none() {
                return None;
            }
            Some(Term::app(f2.unwrap_or_else(|| f.clone()), a2.unwrap_or_else(|| a.clone())))
        }
        Node::Abs(y, b) => {
            if y == x {
                return None;
            }
            if fv_n.contains(y) {
                if !b.free_in(x) {
                    return None;
                }
                let y2 = y.refresh();
                let b2 = rename(b, y, &y2);
                let b3 = subst_rec(&b2, x, n, fv_n).unwrap_or(b2);
                return Some(Term::abs(y2, b3));
            }
            subst_rec(b, x, n, fv_n).map(|b2| Term::abs(y.clone(), b2))
        }
    }
}

/// Renames free occurrences of `y` to the fresh name `y2`.
fn rename(t: &Term, y: &Name, y2: &Name) -> Term {
    let mut fv = HashSet::new();
    fv.insert(y2.clone());
    subst_rec(t, y, &Term::var_n(y2.clone()), &fv).unwrap_or_else(|| t.clone())
}

/// Contracts the leftmost-outermost redex; `None` when `t` is in β-nf.
pub fn beta_step(t: &Term) -> Option<Term> {
    match t.node() {
        Node::Var(_) | Node::Hole => None,
        Node::Abs(x, b) => beta_step(b).map(|b2| Term::abs(x.clone(), b2)),
        Node::App(f, a) => {
            if let Node::Abs(x, body) = f.node() {
                return Some(substitute(body, x, a));
            }
            if let Some(f2) = beta_step(f) {
                return Some(Term::app(f2, a.clone()));
            }
            beta_step(a).map(|a2| Term::app(f.clone(), a2))
        }
    }
}

pub fn is_normal(t: &Term) -> bool {
    match t.node() {
        Node::Var(_) | Node::Hole => true,
        Node::Abs(_, b) => is_normal(b),
        Node::App(f, a) => !matches!(f.node(), Node::Abs(..)) && is_normal(f) && is_normal(a),
    }
}

/// A path to a sub-term: `0` selects a function or body, `1` an argument.
pub type Path = Vec<u8>;

/// Paths of all redexes, in leftmost-outermost order.
pub fn redex_paths(t: &Term) -> Vec<Path> {
    fn go(t: &Term, here: &mut Path, out: &mut Vec<Path>) {
        match t.node() {
            Node::Var(_) | Node::Hole => {}
            Node::Abs(_, b) => {
                here.push(0);
                go(b, here, out);
                here.pop();
            }
            Node::App(f, a) => {
                if matches!(f.node(), Node::Abs(..)) {
                    out.push(here.clone());
                }
                here.push(0);
                go(f, here, out);
                here.pop();
                here.push(1);
                go(a, here, out);
                here.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Contracts the redex at `path`, if there is one.
pub fn contract_at(t: &Term, path: &[u8]) -> Option<Term> {
    match (t.node(), path.split_first()) {
        (Node::App(f, a), None) => match f.node() {
            Node::Abs(x, body) => Some(substitute(body, x, a)),
            _ => None,
        },
        (Node::Abs(x, b), Some((0, rest))) => contract_at(b, rest).map(|b2| Term::abs(x.clone(), b2)),
        (Node::App(f, a), Some((0, rest))) => contract_at(f, rest).map(|f2| Term::app(f2, a.clone())),
        (Node::App(f, a), Some((1, rest))) => contract_at(a, rest).map(|a2| Term::app(f.clone(), a2)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    NormalForm { term: Term, steps: u64 },
    /// Fuel ran out; the term reached so far.
    FuelExhausted(Term),
}

impl Normalized {
    pub fn normal_form(&self) -> Option<&Term> {
        match self {
            Normalized::NormalForm { term, .. } => Some(term),
            Normalized::FuelExhausted(_) => None,
        }
    }
}

/// Normal-order normalization with at most `fuel` contractions.
///
/// Performs exactly the contractions of iterated [`beta_step`], without
/// re-scanning the term from the root after each one.
pub fn normalize(t: &Term, fuel: u64) -> Normalized {
    let mut left = fuel;
    let (term, done) = nf(t, &mut left);
    if done {
        Normalized::NormalForm { term, steps: fuel - left }
    } else {
        Normalized::FuelExhausted(term)
    }
}

fn rebuild(head: Term, args: Vec<Term>) -> Term {
    // args are stored last-first
    args.into_iter().rev().fold(head, Term::app)
}

fn nf(t: &Term, fuel: &mut u64) -> (Term, bool) {
    match t.node() {
        Node::Var(_) | Node::Hole => (t.clone(), true),
        Node::Abs(x, b) => {
            let (b2, ok) = nf(b, fuel);
            if b2.same(b) {
                (t.clone(), ok)
            } else {
                (Term::abs(x.clone(), b2), ok)
            }
        }
        Node::App(..) => {
            let mut head = t.clone();
            let mut args: Vec<Term> = Vec::new();
            loop {
                let next = match head.node() {
                    Node::App(f, a) => {
                        args.push(a.clone());
                        f.clone()
                    }
                    Node::Abs(x, body) if !args.is_empty() => {
                        if *fuel == 0 {
                            return (rebuild(head, args), false);
                        }
                        *fuel -= 1;
                        let a = args.pop().unwrap();
                        substitute(body, x, &a)
                    }
                    _ => break,
                };
                head = next;
            }
            let (head, ok) = nf(&head, fuel);
            if !ok {
                return (rebuild(head, args), false);
            }
            let mut done = Vec::with_capacity(args.len());
            let mut ok = true;
            while let Some(a) = args.pop() {
                if ok {
                    let (a2, k) = nf(&a, fuel);
                    ok = k;
                    done.push(a2);
                } else {
                    done.push(a);
                }
            }
            (done.into_iter().fold(head, Term::app), ok)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaEq {
    Equal,
    Distinct,
    Unknown,
}

/// Decides `a =β b` when both normalize within `fuel`; otherwise `Unknown`.
pub fn beta_eq(a: &Term, b: &Term, fuel: u64) -> BetaEq {
    match (normalize(a, fuel), normalize(b, fuel)) {
        (Normalized::NormalForm { term: x, .. }, Normalized::NormalForm { term: y, .. }) => {
            if alpha_eq(&x, &y) {
                BetaEq::Equal
            } else {
                BetaEq::Distinct
            }
        }
        _ => BetaEq::Unknown,
    }
}

/// A Church numeral with its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Numeral {
    pub value: u64,
    pub term: Term,
}

/// `n̄ = λx.λy. x(…(x y)…)`.
pub fn church(n: u64) -> Term {
    let x = Term::var("x");
    let mut body = Term::var("y");
    for _ in 0..n {
        body = Term::app(x.clone(), body);
    }
    Term::lams(&["x", "y"], body)
}

pub fn church_encode(n: u64) -> Numeral {
    Numeral { value: n, term: church(n) }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("term is not a Church numeral")]
    NotANumeral,
    #[error("fuel exhausted")]
    FuelExhausted,
}

/// Matches a normal form `λa.λb. aᵐ b` and returns `m`.
pub fn numeral_value(t: &Term) -> Option<u64> {
    let Node::Abs(a, inner) = t.node() else { return None };
    let Node::Abs(b, body) = inner.node() else { return None };
    if a == b {
        return None;
    }
    let mut cur = body;
    let mut m = 0;
    loop {
        match cur.node() {
            Node::Var(v) if v == b => return Some(m),
            Node::App(f, rest) if matches!(f.node(), Node::Var(v) if v == a) => {
                m += 1;
                cur = rest;
            }
            _ => return None,
        }
    }
}

pub fn church_decode(t: &Term, fuel: u64) -> Result<u64, DecodeError> {
    match normalize(t, fuel) {
        Normalized::NormalForm { term, .. } => numeral_value(&term).ok_or(DecodeError::NotANumeral),
        Normalized::FuelExhausted(_) => Err(DecodeError::FuelExhausted),
    }
}

/// `X = W W` with `W = λx.f(x x)`, so that `X →β f X`.
pub fn fixed_point(f: &Term) -> Term {
    let x = Name::fresh("x");
    let xv = Term::var_n(x.clone());
    let w = Term::abs(x, Term::app(f.clone(), Term::app(xv.clone(), xv)));
    Term::app(w.clone(), w)
}

/// The combinators used by the translations.
pub mod combinators {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn ap(f: Term, args: Vec<Term>) -> Term {
        Term::apps(f, args)
    }

    /// `K ≡ λxy.x`.
    pub fn k() -> Term {
        Term::lams(&["x", "y"], v("x"))
    }

    /// `I ≡ λx.x`.
    pub fn i() -> Term {
        Term::lam("x", v("x"))
    }

    /// Successor `λuxy. x(u x y)`.
    pub fn succ() -> Term {
        Term::lams(&["u", "x", "y"], Term::app(v("x"), ap(v("u"), vec![v("x"), v("y")])))
    }

    /// Pairing `D ≡ λxyz. z(K y) x`.
    pub fn d() -> Term {
        Term::lams(&["x", "y", "z"], ap(v("z"), vec![Term::app(k(), v("y")), v("x")]))
    }

    /// `Q ≡ λyv. D(S(v 0̄))(y(v 0̄)(v 1̄))`.
    pub fn q() -> Term {
        let v0 = Term::app(v("v"), church(0));
        let v1 = Term::app(v("v"), church(1));
        Term::lams(
            &["y", "v"],
            ap(d(), vec![Term::app(succ(), v0.clone()), ap(v("y"), vec![v0, v1])]),
        )
    }

    /// Bernays' `R ≡ λxyu. u(Q y)(D 0̄ x) 1̄`.
    pub fn r() -> Term {
        Term::lams(
            &["x", "y", "u"],
            ap(v("u"), vec![Term::app(q(), v("y")), ap(d(), vec![church(0), v("x")]), church(1)]),
        )
    }

    /// `T ≡ λx. D 0̄ (λuv. u(x(S v)) u (S v))`.
    pub fn t() -> Term {
        let sv = Term::app(succ(), v("v"));
        let inner = Term::lams(&["u", "v"], ap(v("u"), vec![Term::app(v("x"), sv.clone()), v("u"), sv]));
        Term::lam("x", ap(d(), vec![church(0), inner]))
    }

    /// `P ≡ λxy. T x (x y) (T x) y`.
    pub fn p() -> Term {
        let tx = Term::app(t(), v("x"));
        Term::lams(&["x", "y"], ap(tx.clone(), vec![Term::app(v("x"), v("y")), tx, v("y")]))
    }

    /// `Q Y`.
    pub fn q_of(y: Term) -> Term {
        Term::app(q(), y)
    }

    /// `T X`.
    pub fn t_of(x: Term) -> Term {
        Term::app(t(), x)
    }

    /// Looks up a combinator by its usual letter.
    pub fn by_name(name: &str) -> Option<Term> {
        Some(match name {
            "K" => k(),
            "I" => i(),
            "S" => succ(),
            "D" => d(),
            "Q" => q(),
            "R" => r(),
            "T" => t(),
            "P" => p(),
            _ => return None,
        })
    }
}

/// All closed terms with at most `max_size` nodes whose variables are drawn
/// from `names`, including non-closed sub-terms only as intermediates.
pub fn closed_terms(max_size: usize, names: &[&str]) -> Vec<Term> {
    let names: Vec<Name> = names.iter().map(|n| Name::new(n)).collect();
    // by_size[s][scope mask] = terms of exactly size s whose free variables lie in the scope
    let scopes = 1usize << names.len();
    let mut by_size: Vec<Vec<Vec<Term>>> = vec![vec![Vec::new(); scopes]];
    for s in 1..=max_size {
        let mut level = vec![Vec::new(); scopes];
        for (mask, bucket) in level.iter_mut().enumerate() {
            if s == 1 {
                for (i, n) in names.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        bucket.push(Term::var_n(n.clone()));
                    }
                }
                continue;
            }
            for (i, n) in names.iter().enumerate() {
                let inner: &Vec<Term> = &by_size[s - 1][mask | (1 << i)];
                for b in inner {
                    bucket.push(Term::abs(n.clone(), b.clone()));
                }
            }
            for ls in 1..s - 1 {
                let rs = s - 1 - ls;
                for f in &by_size[ls][mask] {
                    for a in &by_size[rs][mask] {
                        bucket.push(Term::app(f.clone(), a.clone()));
                    }
                }
            }
        }
        by_size.push(level);
    }
    let mut out = Vec::new();
    for level in by_size.iter().skip(1) {
        for t in &level[0] {
            out.push(t.clone());
        }
    }
    out
}

/// Renames every binder to a fresh name, making bound variables pairwise
/// distinct and disjoint from free variables.
pub fn freshen(t: &Term) -> Term {
    fn go(t: &Term, env: &mut HashMap<Name, Name>) -> Term {
        match t.node() {
            Node::Var(x) => match env.get(x) {
                Some(y) => Term::var_n(y.clone()),
                None => t.clone(),
            },
            Node::Hole => t.clone(),
            Node::Abs(x, b) => {
                let y = x.refresh();
                let old = env.insert(x.clone(), y.clone());
                let b2 = go(b, env);
                match old {
                    Some(o) => env.insert(x.clone(), o),
                    None => env.remove(x),
                };
                Term::abs(y, b2)
            }
            Node::App(f, a) => Term::app(go(f, env), go(a, env)),
        }
    }
    go(t, &mut HashMap::new())
}
