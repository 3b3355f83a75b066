//! Partial recursive functions: AST, fuel-bounded evaluator and a library of
//! derived functions built only from the basic constructors.
//!
//! Primitive recursion recurses on the last argument:
//! `f(x⃗, 0) = g(x⃗)` and `f(x⃗, m+1) = h(x⃗, m, f(x⃗, m))`.
//!
//! Library functions are [`PrfNode::Named`] nodes. They carry a lazily built
//! pure definition and, optionally, a native [`Shortcut`] the evaluator may
//! use instead of unfolding the definition.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::ValidationError;

/// Values below this many bits are always kept materialized.
const PACK_BITS: f64 = 256.0;
/// Refuse to materialize values beyond this many bits.
const MATERIALIZE_BITS: f64 = 16_777_216.0;

/// A natural number, possibly held symbolically as `2^a·3^b·5^c`.
#[derive(Clone, Debug)]
pub enum Nat {
    Big(BigUint),
    Packed(Box<[BigUint; 3]>),
}

fn est_bits(e: &[BigUint; 3]) -> f64 {
    let f = |x: &BigUint| x.to_f64().unwrap_or(f64::INFINITY);
    f(&e[0]) + 1.584_962_5 * f(&e[1]) + 2.321_928_1 * f(&e[2])
}

impl Nat {
    pub fn from_u64(n: u64) -> Nat {
        Nat::Big(BigUint::from(n))
    }

    /// `2^a · 3^b · 5^c`.
    pub fn pack(a: BigUint, b: BigUint, c: BigUint) -> Nat {
        let e = [a, b, c];
        if est_bits(&e) < PACK_BITS {
            let p = |base: u32, x: &BigUint| BigUint::from(base).pow(x.to_u32().unwrap());
            Nat::Big(p(2, &e[0]) * p(3, &e[1]) * p(5, &e[2]))
        } else {
            Nat::Packed(Box::new(e))
        }
    }

    /// The value as a big integer, if it is small enough to materialize.
    pub fn to_big(&self) -> Result<BigUint, EvalError> {
        match self {
            Nat::Big(b) => Ok(b.clone()),
            Nat::Packed(e) => {
                if est_bits(e) > MATERIALIZE_BITS {
                    return Err(EvalError::TooLarge);
                }
                let p = |base: u32, x: &BigUint| BigUint::from(base).pow(x.to_u32().unwrap());
                Ok(p(2, &e[0]) * p(3, &e[1]) * p(5, &e[2]))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Big(b) if b.is_zero())
    }

    /// Largest `e` such that `p^e` divides the value; zero for a zero value.
    pub fn exponent(&self, p: &BigUint) -> Result<BigUint, EvalError> {
        if p <= &BigUint::one() {
            return Ok(BigUint::zero());
        }
        match self {
            Nat::Big(m) => {
                if m.is_zero() {
                    return Ok(BigUint::zero());
                }
                if p == &b(2) {
                    return Ok(BigUint::from(m.trailing_zeros().unwrap_or(0)));
                }
                let mut m = m.clone();
                let mut e = 0u64;
                loop {
                    let (q, r) = m.div_rem(p);
                    if !r.is_zero() {
                        break;
                    }
                    m = q;
                    e += 1;
                }
                Ok(BigUint::from(e))
            }
            Nat::Packed(ex) => {
                let mut rest = p.clone();
                let mut best: Option<BigUint> = None;
                for (i, base) in [2u32, 3, 5].into_iter().enumerate() {
                    let b = BigUint::from(base);
                    let mut k = 0u32;
                    while (&rest % &b).is_zero() {
                        rest /= &b;
                        k += 1;
                    }
                    if k > 0 {
                        let cand = &ex[i] / BigUint::from(k);
                        best = Some(match best {
                            Some(x) if x < cand => x,
                            _ => cand,
                        });
                    }
                }
                if !rest.is_one() {
                    return Ok(BigUint::zero());
                }
                Ok(best.unwrap_or_default())
            }
        }
    }

    fn smooth_factor(m: &BigUint) -> Option<[BigUint; 3]> {
        let mut m = m.clone();
        let mut e: [BigUint; 3] = Default::default();
        for (i, base) in [2u32, 3, 5].into_iter().enumerate() {
            let b = BigUint::from(base);
            let mut k = 0u64;
            while !m.is_zero() && (&m % &b).is_zero() {
                m /= &b;
                k += 1;
            }
            e[i] = BigUint::from(k);
        }
        m.is_one().then_some(e)
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Nat) -> bool {
        match (self, other) {
            (Nat::Big(a), Nat::Big(b)) => a == b,
            (Nat::Packed(a), Nat::Packed(b)) => a == b,
            (Nat::Big(a), Nat::Packed(e)) | (Nat::Packed(e), Nat::Big(a)) => {
                Nat::smooth_factor(a).as_ref() == Some(e.as_ref())
            }
        }
    }
}
impl Eq for Nat {}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Nat {
        Nat::Big(b)
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Big(b) => write!(f, "{b}"),
            Nat::Packed(e) => write!(f, "2^{}·3^{}·5^{}", e[0], e[1], e[2]),
        }
    }
}

/// Default value of a finite table outside its listed pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableDefault {
    Const(u64),
    SecondArg,
}

/// Native implementations the evaluator may substitute for a definition.
#[derive(Clone, Debug)]
pub enum Shortcut {
    Id,
    Const(u64),
    Add,
    Mul,
    Exp,
    Pred,
    Monus,
    AbsDiff,
    Sg,
    Nsg,
    Eq,
    Lt,
    Divides,
    Prime,
    Div,
    Mod,
    /// `[m]_p`, the exponent of the prime `p` in `m`.
    Expo(u64),
    /// `2^a · 3^b · 5^c`.
    Pack,
    /// `1` iff the argument is a unary tape code: `1` or `3^j − 1`, `j ≥ 1`.
    Enc,
    /// Inverse of the unary tape code: `1 ↦ 0`, `3^j − 1 ↦ j`, else `0`.
    UnaryDecode,
    Table(Arc<HashMap<(u64, u64), u64>>, TableDefault),
}

type Builder = Arc<dyn Fn() -> PrfExpr + Send + Sync>;

/// A named function with its pure definition.
#[derive(Clone)]
pub struct Named {
    pub name: Arc<str>,
    pub arity: usize,
    def: Arc<OnceLock<PrfExpr>>,
    builder: Option<Builder>,
    pub shortcut: Option<Shortcut>,
}

impl Named {
    pub fn def(&self) -> &PrfExpr {
        self.def.get_or_init(|| (self.builder.as_ref().expect("named node without definition"))())
    }
}

impl fmt::Debug for Named {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Named({}/{})", self.name, self.arity)
    }
}

#[derive(Clone, Debug)]
pub enum PrfNode {
    Zero(usize),
    Succ,
    Proj(usize, usize),
    Compose(PrfExpr, Vec<PrfExpr>),
    PrimRec(PrfExpr, PrfExpr),
    Mu(PrfExpr),
    Named(Named),
}

/// A shared, immutable expression.
#[derive(Clone, Debug)]
pub struct PrfExpr(Arc<PrfNode>);

impl PrfExpr {
    pub fn node(&self) -> &PrfNode {
        &self.0
    }
    fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }
    pub fn zero(k: usize) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Zero(k)))
    }
    pub fn succ() -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Succ))
    }
    pub fn proj(k: usize, i: usize) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Proj(k, i)))
    }
    pub fn compose(g: PrfExpr, hs: Vec<PrfExpr>) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Compose(g, hs)))
    }
    pub fn prim_rec(g: PrfExpr, h: PrfExpr) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::PrimRec(g, h)))
    }
    pub fn mu(g: PrfExpr) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Mu(g)))
    }
    /// A named node with a fixed definition and no shortcut.
    pub fn named(name: &str, def: PrfExpr) -> Result<PrfExpr, ValidationError> {
        let arity = arity_check(&def)?;
        let cell = OnceLock::new();
        let _ = cell.set(def);
        Ok(PrfExpr(Arc::new(PrfNode::Named(Named {
            name: name.into(),
            arity,
            def: Arc::new(cell),
            builder: None,
            shortcut: None,
        }))))
    }
    /// A named node whose definition is built on first use.
    pub fn named_lazy(
        name: &str,
        arity: usize,
        shortcut: Option<Shortcut>,
        builder: impl Fn() -> PrfExpr + Send + Sync + 'static,
    ) -> PrfExpr {
        PrfExpr(Arc::new(PrfNode::Named(Named {
            name: name.into(),
            arity,
            def: Arc::new(OnceLock::new()),
            builder: Some(Arc::new(builder)),
            shortcut,
        })))
    }

    /// Arity, assuming the expression is well formed.
    pub fn arity(&self) -> usize {
        arity_check(self).expect("ill-formed expression")
    }

    /// Replaces every named node by its definition, recursively.
    pub fn expand(&self) -> PrfExpr {
        let mut cache = HashMap::new();
        expand_rec(self, &mut cache)
    }

    /// True if no named node occurs in the expression.
    pub fn is_pure(&self) -> bool {
        match self.node() {
            PrfNode::Zero(_) | PrfNode::Succ | PrfNode::Proj(..) => true,
            PrfNode::Compose(g, hs) => g.is_pure() && hs.iter().all(|h| h.is_pure()),
            PrfNode::PrimRec(g, h) => g.is_pure() && h.is_pure(),
            PrfNode::Mu(g) => g.is_pure(),
            PrfNode::Named(_) => false,
        }
    }

    /// Number of nodes, counting each named definition once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            PrfNode::Zero(_) | PrfNode::Succ | PrfNode::Proj(..) | PrfNode::Named(_) => 1,
            PrfNode::Compose(g, hs) => 1 + g.size() + hs.iter().map(|h| h.size()).sum::<usize>(),
            PrfNode::PrimRec(g, h) => 1 + g.size() + h.size(),
            PrfNode::Mu(g) => 1 + g.size(),
        }
    }

    /// True if argument `i` (1-based) is ever read.
    pub fn uses_arg(&self, i: usize) -> bool {
        match self.node() {
            PrfNode::Zero(_) => false,
            PrfNode::Succ => i == 1,
            PrfNode::Proj(_, j) => *j == i,
            PrfNode::Compose(g, hs) => hs.iter().enumerate().any(|(j, h)| g.uses_arg(j + 1) && h.uses_arg(i)),
            PrfNode::PrimRec(..) | PrfNode::Mu(_) => true,
            PrfNode::Named(n) => n.def().uses_arg(i),
        }
    }
}

fn expand_rec(e: &PrfExpr, cache: &mut HashMap<usize, PrfExpr>) -> PrfExpr {
    if let Some(x) = cache.get(&e.ptr()) {
        return x.clone();
    }
    let out = match e.node() {
        PrfNode::Zero(_) | PrfNode::Succ | PrfNode::Proj(..) => e.clone(),
        PrfNode::Compose(g, hs) => {
            PrfExpr::compose(expand_rec(g, cache), hs.iter().map(|h| expand_rec(h, cache)).collect())
        }
        PrfNode::PrimRec(g, h) => PrfExpr::prim_rec(expand_rec(g, cache), expand_rec(h, cache)),
        PrfNode::Mu(g) => PrfExpr::mu(expand_rec(g, cache)),
        PrfNode::Named(n) => expand_rec(n.def(), cache),
    };
    cache.insert(e.ptr(), out.clone());
    out
}

impl PartialEq for PrfExpr {
    fn eq(&self, other: &PrfExpr) -> bool {
        structural_eq(self, other, &mut HashSet::new())
    }
}

/// Structural equality; `same` records pairs already found equal, so shared
/// subterms are compared once.
fn structural_eq(a: &PrfExpr, b: &PrfExpr, same: &mut HashSet<(usize, usize)>) -> bool {
    if Arc::ptr_eq(&a.0, &b.0) || same.contains(&(a.ptr(), b.ptr())) {
        return true;
    }
    let eq = match (a.node(), b.node()) {
        (PrfNode::Zero(x), PrfNode::Zero(y)) => x == y,
        (PrfNode::Succ, PrfNode::Succ) => true,
        (PrfNode::Proj(x, y), PrfNode::Proj(z, w)) => x == z && y == w,
        (PrfNode::Compose(g, hs), PrfNode::Compose(g2, hs2)) => {
            hs.len() == hs2.len()
                && structural_eq(g, g2, same)
                && hs.iter().zip(hs2).all(|(h, h2)| structural_eq(h, h2, same))
        }
        (PrfNode::PrimRec(g, h), PrfNode::PrimRec(g2, h2)) => structural_eq(g, g2, same) && structural_eq(h, h2, same),
        (PrfNode::Mu(g), PrfNode::Mu(g2)) => structural_eq(g, g2, same),
        (PrfNode::Named(x), PrfNode::Named(y)) => {
            x.name == y.name
                && x.arity == y.arity
                && (Arc::ptr_eq(&x.def, &y.def) || structural_eq(x.def(), y.def(), same))
        }
        _ => false,
    };
    if eq {
        same.insert((a.ptr(), b.ptr()));
    }
    eq
}
impl Eq for PrfExpr {}

impl fmt::Display for PrfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            PrfNode::Zero(k) => write!(f, "Z {k}"),
            PrfNode::Succ => write!(f, "S"),
            PrfNode::Proj(k, i) => write!(f, "P {k} {i}"),
            PrfNode::Compose(g, hs) => {
                write!(f, "C {g} (")?;
                for (i, h) in hs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{h}")?;
                }
                write!(f, ")")
            }
            PrfNode::PrimRec(g, h) => write!(f, "R ({g}, {h})"),
            PrfNode::Mu(g) => write!(f, "Mu {g}"),
            PrfNode::Named(n) => write!(f, "{}", n.name),
        }
    }
}

/// Computes the arity, checking every constructor constraint.
pub fn arity_check(e: &PrfExpr) -> Result<usize, ValidationError> {
    let mut cache = HashMap::new();
    arity_rec(e, &mut cache)
}

fn arity_rec(e: &PrfExpr, cache: &mut HashMap<usize, usize>) -> Result<usize, ValidationError> {
    if let Some(&a) = cache.get(&e.ptr()) {
        return Ok(a);
    }
    let bad = |msg: String| Err(ValidationError::new(format!("{msg} in `{e}`")));
    let a = match e.node() {
        PrfNode::Zero(k) => *k,
        PrfNode::Succ => 1,
        PrfNode::Proj(k, i) => {
            if *i < 1 || i > k {
                return bad(format!("projection index {i} outside 1..{k}"));
            }
            *k
        }
        PrfNode::Compose(g, hs) => {
            let ga = arity_rec(g, cache)?;
            if ga != hs.len() {
                return bad(format!("outer function has arity {ga} but {} inner functions", hs.len()));
            }
            if hs.is_empty() {
                return bad("composition needs at least one inner function".into());
            }
            let a0 = arity_rec(&hs[0], cache)?;
            for h in &hs[1..] {
                let a = arity_rec(h, cache)?;
                if a != a0 {
                    return bad(format!("inner functions have arities {a0} and {a}"));
                }
            }
            a0
        }
        PrfNode::PrimRec(g, h) => {
            let ga = arity_rec(g, cache)?;
            let ha = arity_rec(h, cache)?;
            if ha != ga + 2 {
                return bad(format!("step function has arity {ha}, expected {}", ga + 2));
            }
            ga + 1
        }
        PrfNode::Mu(g) => {
            let ga = arity_rec(g, cache)?;
            if ga == 0 {
                return bad("minimalization needs arity at least 1".into());
            }
            ga - 1
        }
        PrfNode::Named(n) => n.arity,
    };
    cache.insert(e.ptr(), a);
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("value too large to materialize")]
    TooLarge,
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Evaluation settings.
#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub fuel: u64,
    /// Use native shortcuts on named nodes.
    pub shortcuts: bool,
    /// Resume primitive recursions from previously computed prefixes.
    pub memo: bool,
}

impl EvalOptions {
    pub fn new(fuel: u64) -> EvalOptions {
        EvalOptions { fuel, shortcuts: true, memo: true }
    }
    pub fn pure(fuel: u64) -> EvalOptions {
        EvalOptions { fuel, shortcuts: false, memo: false }
    }
}

const MEMO_CAP: usize = 1 << 20;

/// A single evaluation's mutable state.
pub struct Evaluator {
    opts: EvalOptions,
    used: u64,
    memo: HashMap<(usize, Vec<BigUint>), (u64, Nat)>,
}

impl Evaluator {
    pub fn new(opts: EvalOptions) -> Evaluator {
        Evaluator { opts, used: 0, memo: HashMap::new() }
    }

    pub fn fuel_used(&self) -> u64 {
        self.used
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        if self.used >= self.opts.fuel {
            return Err(EvalError::FuelExhausted);
        }
        self.used += 1;
        Ok(())
    }

    pub fn eval(&mut self, e: &PrfExpr, args: &[Nat]) -> Result<Nat, EvalError> {
        self.tick()?;
        match e.node() {
            PrfNode::Zero(_) => Ok(Nat::from_u64(0)),
            PrfNode::Succ => Ok(Nat::Big(args[0].to_big()? + 1u32)),
            PrfNode::Proj(_, i) => Ok(args[i - 1].clone()),
            PrfNode::Compose(g, hs) => {
                let mut inner = Vec::with_capacity(hs.len());
                for h in hs {
                    inner.push(self.eval(h, args)?);
                }
                self.eval(g, &inner)
            }
            PrfNode::PrimRec(g, h) => self.prim_rec(e, g, h, args),
            PrfNode::Mu(g) => {
                let mut y = 0u64;
                let mut a = args.to_vec();
                a.push(Nat::from_u64(0));
                loop {
                    self.tick()?;
                    *a.last_mut().unwrap() = Nat::from_u64(y);
                    if self.eval(g, &a)?.is_zero() {
                        return Ok(Nat::from_u64(y));
                    }
                    y += 1;
                }
            }
            PrfNode::Named(n) => {
                if self.opts.shortcuts {
                    if let Some(s) = &n.shortcut {
                        return native(s, args);
                    }
                }
                self.eval(n.def(), args)
            }
        }
    }

    fn prim_rec(&mut self, e: &PrfExpr, g: &PrfExpr, h: &PrfExpr, args: &[Nat]) -> Result<Nat, EvalError> {
        let (prefix, last) = args.split_at(args.len() - 1);
        let m = last[0].to_big()?.to_u64().ok_or(EvalError::FuelExhausted)?;
        let key = if self.opts.memo && prefix.iter().all(|x| matches!(x, Nat::Big(_))) {
            let k: Vec<BigUint> = prefix
                .iter()
                .map(|x| match x {
                    Nat::Big(b) => b.clone(),
                    Nat::Packed(_) => unreachable!(),
                })
                .collect();
            Some((e.ptr(), k))
        } else {
            None
        };
        let (mut i, mut acc) = match key.as_ref().and_then(|k| self.memo.get(k)) {
            Some((j, v)) if *j <= m => (*j, v.clone()),
            _ => (0, self.eval(g, prefix)?),
        };
        let mut a = prefix.to_vec();
        a.push(Nat::from_u64(0));
        a.push(Nat::from_u64(0));
        let n = a.len();
        while i < m {
            a[n - 2] = Nat::from_u64(i);
            a[n - 1] = acc;
            acc = self.eval(h, &a)?;
            i += 1;
        }
        if let Some(k) = key {
            if self.memo.len() >= MEMO_CAP {
                self.memo.clear();
            }
            self.memo.insert(k, (m, acc.clone()));
        }
        Ok(acc)
    }
}

fn big(n: &Nat) -> Result<BigUint, EvalError> {
    n.to_big()
}

fn b(n: u64) -> BigUint {
    BigUint::from(n)
}

fn chi(p: bool) -> Nat {
    Nat::from_u64(p as u64)
}

fn is_prime(n: &BigUint) -> bool {
    if n < &b(2) {
        return false;
    }
    let mut d = b(2);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return false;
        }
        d += 1u32;
    }
    true
}

fn pow_checked(x: &BigUint, y: &BigUint) -> Result<BigUint, EvalError> {
    if x.is_zero() || x.is_one() {
        return Ok(if y.is_zero() { BigUint::one() } else { x.clone() });
    }
    let y = y.to_u32().ok_or(EvalError::TooLarge)?;
    if (x.bits() as f64) * (y as f64) > MATERIALIZE_BITS {
        return Err(EvalError::TooLarge);
    }
    Ok(x.pow(y))
}

/// Inverse of the unary tape code, shared by the shortcut and the tests.
pub fn unary_decode_native(n: &BigUint) -> BigUint {
    if n.is_one() {
        return BigUint::zero();
    }
    let mut p = b(3);
    let mut j = 1u64;
    let target = n + 1u32;
    while p < target {
        p *= 3u32;
        j += 1;
    }
    if p == target && j as f64 <= n.to_f64().unwrap_or(f64::INFINITY) {
        b(j)
    } else {
        BigUint::zero()
    }
}

fn native(s: &Shortcut, a: &[Nat]) -> Result<Nat, EvalError> {
    Ok(match s {
        Shortcut::Id => a[0].clone(),
        Shortcut::Const(n) => Nat::from_u64(*n),
        Shortcut::Add => Nat::Big(big(&a[0])? + big(&a[1])?),
        Shortcut::Mul => Nat::Big(big(&a[0])? * big(&a[1])?),
        Shortcut::Exp => Nat::Big(pow_checked(&big(&a[0])?, &big(&a[1])?)?),
        Shortcut::Pred => {
            let x = big(&a[0])?;
            Nat::Big(if x.is_zero() { x } else { x - 1u32 })
        }
        Shortcut::Monus => {
            let (x, y) = (big(&a[0])?, big(&a[1])?);
            Nat::Big(if x > y { x - y } else { BigUint::zero() })
        }
        Shortcut::AbsDiff => {
            let (x, y) = (big(&a[0])?, big(&a[1])?);
            Nat::Big(if x > y { x - y } else { y - x })
        }
        Shortcut::Sg => chi(!a[0].is_zero()),
        Shortcut::Nsg => chi(a[0].is_zero()),
        Shortcut::Eq => chi(a[0] == a[1]),
        Shortcut::Lt => chi(big(&a[0])? < big(&a[1])?),
        Shortcut::Divides => {
            let (x, y) = (big(&a[0])?, big(&a[1])?);
            chi(if x.is_zero() { y.is_zero() } else { (y % x).is_zero() })
        }
        Shortcut::Prime => chi(is_prime(&big(&a[0])?)),
        Shortcut::Div => {
            let (x, y) = (big(&a[0])?, big(&a[1])?);
            Nat::Big(if y.is_zero() { y } else { x / y })
        }
        Shortcut::Mod => {
            let (x, y) = (big(&a[0])?, big(&a[1])?);
            Nat::Big(if y.is_zero() { x } else { x % y })
        }
        Shortcut::Expo(p) => Nat::Big(a[0].exponent(&b(*p))?),
        Shortcut::Pack => Nat::pack(big(&a[0])?, big(&a[1])?, big(&a[2])?),
        Shortcut::Enc => {
            let n = big(&a[0])?;
            chi(n.is_one() || (n >= b(2) && !unary_decode_native(&n).is_zero()))
        }
        Shortcut::UnaryDecode => Nat::Big(unary_decode_native(&big(&a[0])?)),
        Shortcut::Table(t, d) => {
            let key = (big(&a[0])?.to_u64(), big(&a[1])?.to_u64());
            let hit = match key {
                (Some(x), Some(y)) => t.get(&(x, y)).copied(),
                _ => None,
            };
            match (hit, d) {
                (Some(v), _) => Nat::from_u64(v),
                (None, TableDefault::Const(c)) => Nat::from_u64(*c),
                (None, TableDefault::SecondArg) => a[1].clone(),
            }
        }
    })
}

/// Evaluates with shortcuts and memoization enabled.
pub fn eval(e: &PrfExpr, args: &[BigUint], fuel: u64) -> Result<BigUint, EvalError> {
    eval_with(e, args, EvalOptions::new(fuel))
}

/// Evaluates with explicit options.
pub fn eval_with(e: &PrfExpr, args: &[BigUint], opts: EvalOptions) -> Result<BigUint, EvalError> {
    let k = arity_check(e)?;
    if k != args.len() {
        return Err(EvalError::Validation(ValidationError::new(format!(
            "function has arity {k} but {} arguments were given",
            args.len()
        ))));
    }
    let a: Vec<Nat> = args.iter().cloned().map(Nat::Big).collect();
    Evaluator::new(opts).eval(e, &a)?.to_big()
}

/// Convenience wrapper over `u64` arguments.
pub fn eval_u64(e: &PrfExpr, args: &[u64], fuel: u64) -> Result<BigUint, EvalError> {
    let a: Vec<BigUint> = args.iter().map(|&x| b(x)).collect();
    eval(e, &a, fuel)
}

/// `Compose(e, [Proj(k, π(1)), …, Proj(k, π(k))])`, with `pi` 1-based.
pub fn permute_args(e: &PrfExpr, pi: &[usize]) -> Result<PrfExpr, ValidationError> {
    let k = arity_check(e)?;
    if pi.len() != k {
        return Err(ValidationError::new(format!("permutation has length {} but arity is {k}", pi.len())));
    }
    let mut seen = vec![false; k + 1];
    for &p in pi {
        if p < 1 || p > k || seen[p] {
            return Err(ValidationError::new("argument list is not a permutation"));
        }
        seen[p] = true;
    }
    Ok(PrfExpr::compose(e.clone(), pi.iter().map(|&p| PrfExpr::proj(k, p)).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("A({m}, {n}) is outside the evaluation guard")]
pub struct GuardExceeded {
    pub m: u64,
    pub n: u64,
}

/// Ackermann's function with the nesting level as the second argument:
/// `A(m,0) = m+1`, `A(0,n+1) = A(1,n)`, `A(m+1,n+1) = A(A(m,n+1),n)`.
///
/// Evaluates `A(m, n+1)` as `(m+1)`-fold iteration of `A(·, n)` from `1`,
/// which unrolls the last two equations. Guard: `n ≤ 3`, or `n = 4` with
/// `m ≤ 1`.
pub fn ackermann(m: u64, n: u64) -> Result<BigUint, GuardExceeded> {
    if !(n <= 3 || (n == 4 && m <= 1)) {
        return Err(GuardExceeded { m, n });
    }
    Ok(ack_level(&b(m), n))
}

fn ack_level(m: &BigUint, n: u64) -> BigUint {
    match n {
        0 => m + 1u32,
        1 => m + 2u32,
        2 => m * 2u32 + 3u32,
        _ => {
            let mut x = BigUint::one();
            let mut i = BigUint::zero();
            while &i <= m {
                x = ack_level(&x, n - 1);
                i += 1u32;
            }
            x
        }
    }
}

/// Ackermann's function by direct use of the three equations, for
/// cross-checking [`ackermann`] on tiny inputs.
pub fn ackermann_by_equations(m: u64, n: u64) -> u64 {
    let mut stack = vec![n];
    let mut m = m;
    while let Some(n) = stack.pop() {
        if n == 0 {
            m += 1;
        } else if m == 0 {
            m = 1;
            stack.push(n - 1);
        } else {
            m -= 1;
            stack.push(n - 1);
            stack.push(n);
        }
    }
    m
}

/// The derived function library.
pub mod stdlib {
    use super::*;

    fn lib(name: &str, arity: usize, sc: Shortcut, def: impl Fn() -> PrfExpr + Send + Sync + 'static) -> PrfExpr {
        PrfExpr::named_lazy(name, arity, Some(sc), def)
    }

    fn p(k: usize, i: usize) -> PrfExpr {
        PrfExpr::proj(k, i)
    }

    fn c(g: PrfExpr, hs: Vec<PrfExpr>) -> PrfExpr {
        PrfExpr::compose(g, hs)
    }

    /// `id(x) = P¹₁(x)`.
    pub fn id() -> PrfExpr {
        lib("id", 1, Shortcut::Id, || p(1, 1))
    }

    /// The constant `n` of arity `k`: `S(…S(Z_k)…)` for small `n`, and by
    /// binary doubling with `add` above that.
    pub fn const_k(n: u64, k: usize) -> PrfExpr {
        if n == 0 {
            return PrfExpr::zero(k);
        }
        lib(&format!("const{n}_{k}"), k, Shortcut::Const(n), move || {
            if n <= 16 {
                c(PrfExpr::succ(), vec![const_k(n - 1, k)])
            } else {
                let half = const_k(n / 2, k);
                let twice = c(add(), vec![half.clone(), half]);
                if n % 2 == 0 {
                    twice
                } else {
                    c(PrfExpr::succ(), vec![twice])
                }
            }
        })
    }

    /// The unary constant `n`.
    pub fn constant(n: u64) -> PrfExpr {
        const_k(n, 1)
    }

    pub fn add() -> PrfExpr {
        lib("add", 2, Shortcut::Add, || PrfExpr::prim_rec(p(1, 1), c(PrfExpr::succ(), vec![p(3, 3)])))
    }

    pub fn mul() -> PrfExpr {
        lib("mul", 2, Shortcut::Mul, || PrfExpr::prim_rec(PrfExpr::zero(1), c(add(), vec![p(3, 3), p(3, 1)])))
    }

    /// `exp(x, y) = x^y`.
    pub fn exp() -> PrfExpr {
        lib("exp", 2, Shortcut::Exp, || PrfExpr::prim_rec(const_k(1, 1), c(mul(), vec![p(3, 3), p(3, 1)])))
    }

    pub fn pred() -> PrfExpr {
        lib("pred", 1, Shortcut::Pred, || PrfExpr::prim_rec(PrfExpr::zero(0), p(2, 1)))
    }

    pub fn sg() -> PrfExpr {
        lib("sg", 1, Shortcut::Sg, || PrfExpr::prim_rec(PrfExpr::zero(0), const_k(1, 2)))
    }

    /// `1 ∸ x`.
    pub fn nsg() -> PrfExpr {
        lib("nsg", 1, Shortcut::Nsg, || PrfExpr::prim_rec(const_k(1, 0), PrfExpr::zero(2)))
    }

    /// Truncated subtraction `x ∸ y`.
    pub fn monus() -> PrfExpr {
        lib("monus", 2, Shortcut::Monus, || PrfExpr::prim_rec(p(1, 1), c(pred(), vec![p(3, 3)])))
    }

    /// `|x − y| = (x ∸ y) + (y ∸ x)`.
    pub fn absdiff() -> PrfExpr {
        lib("absdiff", 2, Shortcut::AbsDiff, || {
            c(add(), vec![c(monus(), vec![p(2, 1), p(2, 2)]), c(monus(), vec![p(2, 2), p(2, 1)])])
        })
    }

    pub fn eq() -> PrfExpr {
        lib("eq", 2, Shortcut::Eq, || c(nsg(), vec![absdiff()]))
    }

    /// `x < y`.
    pub fn lt() -> PrfExpr {
        lib("lt", 2, Shortcut::Lt, || c(sg(), vec![c(monus(), vec![p(2, 2), p(2, 1)])]))
    }

    /// `x | y`, i.e. `∃z ≤ y. x·z = y`.
    pub fn divides() -> PrfExpr {
        lib("divides", 2, Shortcut::Divides, || {
            let r = c(eq(), vec![c(mul(), vec![p(3, 1), p(3, 3)]), p(3, 2)]);
            c(exists_le(r), vec![p(2, 1), p(2, 2), p(2, 2)])
        })
    }

    /// `n ≥ 2` and every `z ≤ n` dividing `n` is `1` or `n`.
    pub fn prime() -> PrfExpr {
        lib("prime", 1, Shortcut::Prime, || {
            let only_trivial = or(
                or(c(not(divides()), vec![p(2, 2), p(2, 1)]), c(eq(), vec![p(2, 2), const_k(1, 2)])),
                c(eq(), vec![p(2, 2), p(2, 1)]),
            );
            and(c(lt(), vec![const_k(1, 1), p(1, 1)]), c(forall_le(only_trivial), vec![p(1, 1), p(1, 1)]))
        })
    }

    /// `¬P`, as `1 ∸ χ_P`.
    pub fn not(pr: PrfExpr) -> PrfExpr {
        c(nsg(), vec![pr])
    }

    /// `P ∧ Q`, as `χ_P · χ_Q`.
    pub fn and(a: PrfExpr, b: PrfExpr) -> PrfExpr {
        c(mul(), vec![a, b])
    }

    /// `P ∨ Q`, as `sg(χ_P + χ_Q)`.
    pub fn or(a: PrfExpr, b: PrfExpr) -> PrfExpr {
        c(sg(), vec![c(add(), vec![a, b])])
    }

    fn sum_tree(mut terms: Vec<PrfExpr>) -> PrfExpr {
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(c(add(), vec![a, b])),
                    None => next.push(a),
                }
            }
            terms = next;
        }
        terms.pop().unwrap()
    }

    /// Definition by cases: `Σ fᵢ · χ_{Rᵢ}`. The `Rᵢ` must partition the domain.
    pub fn cases(fs: Vec<PrfExpr>, rs: Vec<PrfExpr>) -> Result<PrfExpr, ValidationError> {
        if fs.len() != rs.len() || fs.is_empty() {
            return Err(ValidationError::new("cases needs equally many functions and relations"));
        }
        let k = arity_check(&fs[0])?;
        for e in fs.iter().chain(&rs) {
            let a = arity_check(e)?;
            if a != k {
                return Err(ValidationError::new(format!("cases operand `{e}` has arity {a}, expected {k}")));
            }
        }
        Ok(sum_tree(fs.into_iter().zip(rs).map(|(f, r)| c(mul(), vec![f, r])).collect()))
    }

    fn shift_last(g: &PrfExpr, k: usize) -> PrfExpr {
        // g(x⃗, m+1) as a function of (x⃗, m, acc)
        let mut args: Vec<PrfExpr> = (1..=k).map(|i| p(k + 2, i)).collect();
        args.push(c(PrfExpr::succ(), vec![p(k + 2, k + 1)]));
        c(g.clone(), args)
    }

    fn bounded(g: PrfExpr, product: bool) -> Result<PrfExpr, ValidationError> {
        let a = arity_check(&g)?;
        if a == 0 {
            return Err(ValidationError::new("bounded operator needs arity at least 1"));
        }
        let k = a - 1;
        let (base, op) = if product { (const_k(1, k), mul()) } else { (PrfExpr::zero(k), add()) };
        Ok(PrfExpr::prim_rec(base, c(op, vec![p(k + 2, k + 2), shift_last(&g, k)])))
    }

    /// `f(x⃗, n) = Σ_{i=1}^{n} g(x⃗, i)`.
    pub fn bounded_sum(g: PrfExpr) -> Result<PrfExpr, ValidationError> {
        bounded(g, false)
    }

    /// `f(x⃗, n) = Π_{i=1}^{n} g(x⃗, i)`.
    pub fn bounded_prod(g: PrfExpr) -> Result<PrfExpr, ValidationError> {
        bounded(g, true)
    }

    fn at_zero(r: &PrfExpr, k: usize) -> PrfExpr {
        // R(x⃗, 0) as a function of (x⃗, n)
        let mut args: Vec<PrfExpr> = (1..=k).map(|i| p(k + 1, i)).collect();
        args.push(PrfExpr::zero(k + 1));
        c(r.clone(), args)
    }

    /// `∀y ≤ n. R(x⃗, y)` as `R(x⃗, 0) · Π_{i=1}^{n} R(x⃗, i)`.
    pub fn forall_le(r: PrfExpr) -> PrfExpr {
        let k = r.arity() - 1;
        c(mul(), vec![at_zero(&r, k), bounded_prod(r).unwrap()])
    }

    /// `∃y ≤ n. R(x⃗, y)` as `1 ∸ ((1 ∸ R(x⃗, 0)) · Π_{i=1}^{n} (1 ∸ R(x⃗, i)))`.
    pub fn exists_le(r: PrfExpr) -> PrfExpr {
        let k = r.arity() - 1;
        let nr = not(r.clone());
        not(c(mul(), vec![at_zero(&nr, k), bounded_prod(nr).unwrap()]))
    }

    /// `μy ≤ n. R(x⃗, y)`, zero when no witness exists.
    pub fn bounded_mu(r: PrfExpr) -> Result<PrfExpr, ValidationError> {
        let a = arity_check(&r)?;
        if a == 0 {
            return Err(ValidationError::new("bounded minimalization needs arity at least 1"));
        }
        let k = a - 1;
        // step arguments: (x⃗, y, f)
        let w = k + 2;
        let xs: Vec<PrfExpr> = (1..=k).map(|i| p(w, i)).collect();
        let y = p(w, k + 1);
        let mut ex_args = xs.clone();
        ex_args.push(y.clone());
        let found = c(exists_le(r.clone()), ex_args.clone());
        let mut r_args = xs;
        r_args.push(c(PrfExpr::succ(), vec![y.clone()]));
        let fresh = and(c(r, r_args), not(found.clone()));
        let other = not(or(found.clone(), fresh.clone()));
        let h = cases(
            vec![p(w, w), c(PrfExpr::succ(), vec![y]), PrfExpr::zero(w)],
            vec![found, fresh, other],
        )?;
        Ok(PrfExpr::prim_rec(PrfExpr::zero(k), h))
    }

    /// `div(x, y) = μz ≤ x. (z+1)·y > x`, with `div(x, 0) = 0`.
    pub fn div() -> PrfExpr {
        lib("div", 2, Shortcut::Div, || {
            let r = c(lt(), vec![p(3, 1), c(mul(), vec![c(PrfExpr::succ(), vec![p(3, 3)]), p(3, 2)])]);
            c(bounded_mu(r).unwrap(), vec![p(2, 1), p(2, 2), p(2, 1)])
        })
    }

    /// `mod(x, y) = x ∸ y·div(x, y)`, with `mod(x, 0) = x`.
    pub fn modulo() -> PrfExpr {
        lib("mod", 2, Shortcut::Mod, || c(monus(), vec![p(2, 1), c(mul(), vec![p(2, 2), div()])]))
    }

    /// `[m]_p`: the largest `e` with `p^e | m`, as `μe ≤ m. ¬(p^{e+1} | m)`.
    pub fn expo(prime: u64) -> PrfExpr {
        lib(&format!("expo{prime}"), 1, Shortcut::Expo(prime), move || {
            let pe1 = c(exp(), vec![const_k(prime, 2), c(PrfExpr::succ(), vec![p(2, 2)])]);
            let r = not(c(divides(), vec![pe1, p(2, 1)]));
            c(bounded_mu(r).unwrap(), vec![p(1, 1), p(1, 1)])
        })
    }

    /// `pack(a, b, c) = 2^a · 3^b · 5^c`.
    pub fn pack() -> PrfExpr {
        lib("pack", 3, Shortcut::Pack, || {
            let pw = |base: u64, i: usize| c(exp(), vec![const_k(base, 3), p(3, i)]);
            c(mul(), vec![c(mul(), vec![pw(2, 1), pw(3, 2)]), pw(5, 3)])
        })
    }

    /// Looks up a library function by name; `const<n>` gives unary constants.
    pub fn by_name(name: &str) -> Option<PrfExpr> {
        Some(match name {
            "id" => id(),
            "add" => add(),
            "mul" => mul(),
            "exp" => exp(),
            "pred" => pred(),
            "sg" => sg(),
            "nsg" => nsg(),
            "monus" => monus(),
            "absdiff" => absdiff(),
            "eq" => eq(),
            "lt" => lt(),
            "divides" => divides(),
            "prime" => prime(),
            "div" => div(),
            "mod" => modulo(),
            "pack" => pack(),
            _ => {
                let rest = name.strip_prefix("const")?;
                let (n, k) = match rest.split_once('_') {
                    Some((n, k)) => (n.parse().ok()?, k.parse().ok()?),
                    None => (rest.parse().ok()?, 1),
                };
                const_k(n, k)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::stdlib::*;
    use super::*;

    fn ev(e: &PrfExpr, a: &[u64]) -> u64 {
        eval_u64(e, a, 1_000_000).unwrap().to_u64().unwrap()
    }

    fn ev_pure(e: &PrfExpr, a: &[u64]) -> u64 {
        let a: Vec<BigUint> = a.iter().map(|&x| b(x)).collect();
        eval_with(e, &a, EvalOptions::pure(10_000_000)).unwrap().to_u64().unwrap()
    }

    #[test]
    fn arity_examples() {
        assert_eq!(arity_check(&PrfExpr::proj(3, 2)).unwrap(), 3);
        assert_eq!(arity_check(&PrfExpr::compose(PrfExpr::succ(), vec![PrfExpr::proj(2, 1)])).unwrap(), 2);
        let bad = PrfExpr::compose(PrfExpr::succ(), vec![PrfExpr::proj(2, 1), PrfExpr::proj(2, 2)]);
        assert!(arity_check(&bad).is_err());
    }

    #[test]
    fn basic_values() {
        let add_raw = PrfExpr::prim_rec(PrfExpr::proj(1, 1), PrfExpr::compose(PrfExpr::succ(), vec![PrfExpr::proj(3, 3)]));
        assert_eq!(ev(&add_raw, &[2, 3]), 5);
        assert_eq!(ev(&pred(), &[0]), 0);
        assert_eq!(ev(&monus(), &[2, 5]), 0);
        assert_eq!(ev(&sg(), &[0]), 0);
        assert_eq!(ev(&sg(), &[7]), 1);
    }

    #[test]
    fn mu_square_root_of_nine() {
        let sq = PrfExpr::compose(mul(), vec![PrfExpr::proj(1, 1), PrfExpr::proj(1, 1)]);
        let g = PrfExpr::compose(absdiff(), vec![sq, const_k(9, 1)]);
        assert_eq!(ev(&PrfExpr::mu(g), &[]), 3);
    }

    #[test]
    fn bounded_mu_square_at_least_ten() {
        let r = PrfExpr::compose(lt(), vec![const_k(9, 1), PrfExpr::compose(mul(), vec![PrfExpr::proj(1, 1), PrfExpr::proj(1, 1)])]);
        let f = bounded_mu(r).unwrap();
        assert_eq!(ev(&f, &[5]), 4);
        assert_eq!(ev(&f, &[2]), 0);
    }

    #[test]
    fn shortcuts_match_definitions() {
        for f in [add(), mul(), monus(), absdiff(), eq(), lt(), divides(), div(), modulo()] {
            for x in 0..4 {
                for y in 0..4 {
                    assert_eq!(ev(&f, &[x, y]), ev_pure(&f, &[x, y]), "{f} {x} {y}");
                }
            }
        }
        for f in [pred(), sg(), nsg(), prime()] {
            for x in 0..8 {
                assert_eq!(ev(&f, &[x]), ev_pure(&f, &[x]), "{f} {x}");
            }
        }
        for f in [expo(2), expo(3)] {
            for x in 0..5 {
                assert_eq!(ev(&f, &[x]), ev_pure(&f, &[x]), "{f} {x}");
            }
        }
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(ev(&exp(), &[x, y]), ev_pure(&exp(), &[x, y]));
            }
        }
        assert_eq!(ev(&pack(), &[1, 1, 0]), ev_pure(&pack(), &[1, 1, 0]));
    }

    #[test]
    fn ackermann_examples() {
        assert_eq!(ackermann(0, 0).unwrap(), b(1));
        assert_eq!(ackermann(1, 1).unwrap(), b(3));
        assert_eq!(ackermann(2, 2).unwrap(), b(7));
        assert!(ackermann(2, 4).is_err());
        for m in 0..6 {
            for n in 0..4 {
                assert_eq!(ackermann(m, n).unwrap(), b(ackermann_by_equations(m, n)));
            }
        }
        assert_eq!(ackermann(1, 4).unwrap(), b(65533));
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(ev(&permute_args(&monus(), &[2, 1]).unwrap(), &[2, 5]), 3);
        let rot = permute_args(&PrfExpr::proj(3, 1), &[2, 3, 1]).unwrap();
        assert_eq!(ev(&rot, &[10, 20, 30]), 20);
        assert!(permute_args(&monus(), &[1, 1]).is_err());
    }

    #[test]
    fn mu_without_witness_exhausts_fuel() {
        let f = PrfExpr::mu(const_k(1, 1));
        assert_eq!(eval_u64(&f, &[], 10_000), Err(EvalError::FuelExhausted));
    }

    #[test]
    fn packed_values_round_trip() {
        let big_w = b(3).pow(40);
        let v = Nat::pack(big_w.clone(), b(7), b(2));
        assert!(matches!(v, Nat::Packed(_)));
        assert_eq!(v.exponent(&b(2)).unwrap(), big_w);
        assert_eq!(v.exponent(&b(3)).unwrap(), b(7));
        assert_eq!(v.exponent(&b(5)).unwrap(), b(2));
        let small = Nat::pack(b(3), b(1), b(1));
        assert_eq!(small, Nat::from_u64(120));
    }
}
