//! Lower and upper bounds on triangular Ramsey numbers.
//!
//! Lower bounds come from the first-moment argument: if a fair random
//! colouring of `Mines_m(p, q, k)` has fewer than one monochromatic winning
//! set in expectation, some colouring is a draw and `R1(p, q, k) > m`.
//! Upper bounds are symbolic expressions over classical (hypergraph) Ramsey
//! numbers, evaluated to intervals against a small table of known values.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::tri::{bracket, ExactBracketColumns, LogBracketColumns};

/// Finite lower ends are capped here; larger values only weaken the bound.
pub const LO_CAP_BITS: u64 = 1024;
/// Upper ends beyond this many bits are reported as unbounded.
pub const HI_CAP_BITS: u64 = 4096;
/// Width of the zone around the threshold where the log-domain sweep
/// falls back to exact arithmetic.
pub const LOG_GUARD: f64 = 1e-6;
/// Largest threshold exponent `[q k]` handled with exact integers.
pub const EXACT_EXPONENT_LIMIT: u64 = 256;
/// Largest iteration count unrolled when evaluating `R^t(n, k)`.
pub const MAX_UNROLL: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed expression: {0}")]
    MalformedExpr(String),
    #[error("no threshold crossing below m = {0}")]
    LimitReached(u64),
}

fn lo_cap() -> BigUint {
    BigUint::one() << LO_CAP_BITS
}

/// A closed range `[lo, hi]` of naturals, `hi = None` meaning unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "decimal")]
    pub lo: BigUint,
    #[serde(with = "decimal_opt")]
    pub hi: Option<BigUint>,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod decimal_opt {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl Interval {
    pub fn exact(v: impl Into<BigUint>) -> Self {
        let v = v.into();
        Self {
            lo: v.clone(),
            hi: Some(v),
        }
    }

    pub fn new(lo: impl Into<BigUint>, hi: Option<BigUint>) -> Self {
        let mut lo = lo.into();
        if lo > lo_cap() {
            lo = lo_cap();
        }
        let hi = hi.filter(|h| h.bits() <= HI_CAP_BITS);
        debug_assert!(hi.as_ref().is_none_or(|h| &lo <= h));
        Self { lo, hi }
    }

    pub fn is_exact(&self) -> bool {
        self.hi.as_ref() == Some(&self.lo)
    }

    pub fn contains(&self, v: &BigUint) -> bool {
        &self.lo <= v && self.hi.as_ref().is_none_or(|h| v <= h)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.hi {
            Some(h) => write!(f, "[{}, {}]", short(&self.lo), short(h)),
            None => write!(f, "[{}, inf)", short(&self.lo)),
        }
    }
}

/// Decimal for small values, `d.dde+N` past 15 digits.
pub fn short(v: &BigUint) -> String {
    let s = v.to_string();
    if s.len() <= 15 {
        return s;
    }
    format!("{}.{}e{}", &s[..1], &s[1..3], s.len() - 1)
}

/// Known values and fallbacks for the two-colour Ramsey numbers `R(n, k)`
/// (`k`-uniform, monochromatic `n`-set).
#[derive(Debug, Clone)]
pub struct ClassicalRamseyTable {
    entries: HashMap<(u64, u64), Interval>,
}

impl Default for ClassicalRamseyTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl ClassicalRamseyTable {
    pub fn empty() -> Self {
        Self {
            entries: HashMap::new(),
        }
    }

    /// Graph Ramsey numbers `R(3) .. R(7)`.
    pub fn standard() -> Self {
        let mut t = Self::empty();
        let b = |v: u64| Some(BigUint::from(v));
        t.insert(3, 2, Interval::exact(6u64));
        t.insert(4, 2, Interval::exact(18u64));
        t.insert(5, 2, Interval::new(43u64, b(49)));
        t.insert(6, 2, Interval::new(102u64, b(165)));
        t.insert(7, 2, Interval::new(205u64, b(540)));
        t
    }

    pub fn insert(&mut self, n: u64, k: u64, v: Interval) {
        self.entries.insert((n, k), v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u64, u64), &Interval)> {
        self.entries.iter()
    }

    /// `R(n, k)` for a single `n`.
    pub fn lookup(&self, n: &BigUint, k: u64) -> Interval {
        if let Some(v) = n.to_u64().and_then(|n| self.entries.get(&(n, k))) {
            return v.clone();
        }
        if *n <= BigUint::from(k) {
            return Interval::exact(n.clone());
        }
        if k == 2 {
            // 2^(n/2) <= R(n) <= 4^(n-1)
            let half = n >> 1u32;
            let lo = match half.to_u64() {
                Some(h) if h <= LO_CAP_BITS => BigUint::one() << h,
                _ => lo_cap(),
            };
            let hi = (n - 1u32)
                .to_u64()
                .filter(|&e| 2 * e <= HI_CAP_BITS)
                .map(|e| BigUint::one() << (2 * e));
            return Interval::new(lo, hi);
        }
        Interval::new(n.clone(), None)
    }

    /// `R` over a range of arguments, using monotonicity in `n`.
    pub fn lookup_interval(&self, n: &Interval, k: u64) -> Interval {
        let lo = self.lookup(&n.lo, k).lo;
        let hi = n.hi.as_ref().and_then(|h| self.lookup(h, k).hi);
        Interval::new(lo, hi)
    }
}

/// Symbolic bound built from Ramsey numbers and brackets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum BoundExpr {
    Const {
        #[serde(with = "decimal")]
        value: BigUint,
    },
    /// `R(arg, k)`.
    ClassicalR { arg: Box<BoundExpr>, k: u64 },
    /// `R^times(base, k)`: `R(., k)` applied `times` times to `base`.
    IteratedR {
        times: Box<BoundExpr>,
        base: Box<BoundExpr>,
        k: u64,
    },
    /// `[arg k]`.
    Bracket { arg: Box<BoundExpr>, k: u64 },
    /// The triangular Ramsey number `R1(arg, arg, k)`.
    TriR1 { arg: Box<BoundExpr>, k: u64 },
    /// `2 arg - 1`, the exact value of `R1(arg, 1)`.
    TwiceMinusOne { arg: Box<BoundExpr> },
    /// `M_{n,k}` shown by name, evaluated through its expansion.
    MSeq {
        n: u64,
        k: u64,
        expansion: Box<BoundExpr>,
    },
}

impl BoundExpr {
    pub fn constant(v: u64) -> Self {
        BoundExpr::Const { value: v.into() }
    }

    pub fn as_const(&self) -> Option<&BigUint> {
        match self {
            BoundExpr::Const { value } => Some(value),
            _ => None,
        }
    }

    pub fn classical(arg: BoundExpr, k: u64) -> Self {
        BoundExpr::ClassicalR {
            arg: Box::new(arg),
            k,
        }
    }

    pub fn iterated(times: BoundExpr, base: BoundExpr, k: u64) -> Self {
        BoundExpr::IteratedR {
            times: Box::new(times),
            base: Box::new(base),
            k,
        }
    }

    /// `[arg k]`, folded to a constant when `arg` is a small constant.
    pub fn bracket(arg: BoundExpr, k: u64) -> Self {
        if let Some(n) = arg.as_const().and_then(|v| v.to_u64()) {
            if n <= 10_000 && n >= k {
                return BoundExpr::Const {
                    value: bracket(n, k).unwrap(),
                };
            }
        }
        BoundExpr::Bracket {
            arg: Box::new(arg),
            k,
        }
    }

    /// `R1(arg, k)`, closed form when `k = 1`.
    pub fn tri_r1(arg: BoundExpr, k: u64) -> Self {
        if k == 1 {
            return BoundExpr::twice_minus_one(arg);
        }
        BoundExpr::TriR1 {
            arg: Box::new(arg),
            k,
        }
    }

    pub fn twice_minus_one(arg: BoundExpr) -> Self {
        if let Some(v) = arg.as_const() {
            if !v.is_zero() {
                return BoundExpr::Const {
                    value: v * 2u32 - 1u32,
                };
            }
        }
        BoundExpr::TwiceMinusOne { arg: Box::new(arg) }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let bad_k = |k: u64| {
            if k == 0 {
                Err(BoundsError::MalformedExpr("k must be at least 1".into()))
            } else {
                Ok(())
            }
        };
        match self {
            BoundExpr::Const { .. } => Ok(()),
            BoundExpr::ClassicalR { arg, k }
            | BoundExpr::Bracket { arg, k }
            | BoundExpr::TriR1 { arg, k } => {
                bad_k(*k)?;
                arg.validate()
            }
            BoundExpr::IteratedR { times, base, k } => {
                bad_k(*k)?;
                times.validate()?;
                base.validate()
            }
            BoundExpr::TwiceMinusOne { arg } => arg.validate(),
            BoundExpr::MSeq { n, k, expansion } => {
                bad_k(*k)?;
                if n < k {
                    return Err(BoundsError::MalformedExpr(format!(
                        "M_{{{n},{k}}} needs n >= k"
                    )));
                }
                expansion.validate()
            }
        }
    }

    /// Number of nodes, counting named sequences as one.
    pub fn size(&self) -> usize {
        match self {
            BoundExpr::Const { .. } | BoundExpr::MSeq { .. } => 1,
            BoundExpr::ClassicalR { arg, .. }
            | BoundExpr::Bracket { arg, .. }
            | BoundExpr::TriR1 { arg, .. }
            | BoundExpr::TwiceMinusOne { arg } => 1 + arg.size(),
            BoundExpr::IteratedR { times, base, .. } => 1 + times.size() + base.size(),
        }
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Const { value } => write!(f, "{}", short(value)),
            BoundExpr::ClassicalR { arg, k } => write!(f, "R({arg},{k})"),
            BoundExpr::IteratedR { times, base, k } => write!(f, "R^{{{times}}}({base},{k})"),
            BoundExpr::Bracket { arg, k } => write!(f, "{{{arg} \\brack {k}}}"),
            BoundExpr::TriR1 { arg, k } => write!(f, "R1({arg},{k})"),
            BoundExpr::TwiceMinusOne { arg } => write!(f, "(2*{arg}-1)"),
            BoundExpr::MSeq { n, k, .. } => write!(f, "M_{{{n},{k}}}"),
        }
    }
}

/// The sequence `M_{n,k}`: `n` when `k = 1` or `n = k`, and otherwise
/// `M_{n,k} = R^{[R1(M_{n-1,k}, k-1) k-1]}(n, k)`.
pub fn m_sequence_expr(n: u64, k: u64) -> Result<BoundExpr, BoundsError> {
    if k == 0 || n < k {
        return Err(BoundsError::InvalidParams(format!(
            "M_{{n,k}} needs n >= k >= 1 (n={n} k={k})"
        )));
    }
    let mut m = BoundExpr::constant(k);
    if k == 1 {
        return Ok(BoundExpr::constant(n));
    }
    for step in k + 1..=n {
        let times = BoundExpr::bracket(BoundExpr::tri_r1(m, k - 1), k - 1);
        m = BoundExpr::iterated(times, BoundExpr::constant(step), k);
    }
    Ok(m)
}

/// `M_{n,k}` as a named node.
pub fn m_sequence_named(n: u64, k: u64) -> Result<BoundExpr, BoundsError> {
    let expansion = m_sequence_expr(n, k)?;
    if expansion.as_const().is_some() {
        return Ok(expansion);
    }
    Ok(BoundExpr::MSeq {
        n,
        k,
        expansion: Box::new(expansion),
    })
}

/// An upper bound on `R1(p, q, k)`, taken from the diagonal case `n = q`.
///
/// When `q = k + 1` the shorter form `R^{[R1(q, k-1) k-1]}(q, k)` is used,
/// with `R1(q, k-1)` replaced by `2q - 1` for `k = 2` and by `M_{2q-1,k-1}`
/// otherwise. Every other case is `M_{2q-1,k}`.
pub fn upper_bound_expr(p: u64, q: u64, k: u64) -> Result<BoundExpr, BoundsError> {
    let (p, q) = (p.min(q), p.max(q));
    if k == 0 || k > p {
        return Err(BoundsError::InvalidParams(format!(
            "need 1 <= k <= p <= q (p={p} q={q} k={k})"
        )));
    }
    if k == 1 {
        return Ok(BoundExpr::constant(p + q - 1));
    }
    if q == k + 1 {
        let inner = if k == 2 {
            BoundExpr::twice_minus_one(BoundExpr::constant(q))
        } else {
            m_sequence_named(2 * q - 1, k - 1)?
        };
        let times = BoundExpr::bracket(inner, k - 1);
        return Ok(BoundExpr::iterated(times, BoundExpr::constant(q), k));
    }
    m_sequence_named(2 * q - 1, k)
}

/// `[n k]` for an arbitrary-size `n`, through the Newton form of the
/// polynomial of degree `T_k + k` that `[n k]` is in `n`.
pub fn bracket_big(n: &BigUint, k: u64) -> BigUint {
    if let Some(small) = n.to_u64() {
        if small <= 20_000 {
            return if small < k {
                BigUint::zero()
            } else {
                bracket(small, k).unwrap()
            };
        }
    }
    let degree = crate::tri::triangular_number(k) + k;
    let x0 = k;
    let mut diffs: Vec<BigInt> = (0..=degree)
        .map(|i| BigInt::from(bracket(x0 + i, k).unwrap()))
        .collect();
    // diffs[j] <- j-th forward difference at x0
    for j in 1..diffs.len() {
        for i in (j..diffs.len()).rev() {
            diffs[i] = &diffs[i] - &diffs[i - 1];
        }
    }
    let t = n - BigUint::from(x0);
    let mut acc = BigInt::zero();
    let mut choose = BigUint::one();
    for (j, d) in diffs.iter().enumerate() {
        if j > 0 {
            let jm1 = BigUint::from(j as u64 - 1);
            if t < jm1 {
                break;
            }
            choose = choose * (&t - jm1) / BigUint::from(j as u64);
        }
        acc += d * BigInt::from(choose.clone());
    }
    assert!(!acc.is_negative());
    acc.to_biguint().unwrap()
}

fn apply_bracket(x: &Interval, k: u64) -> Interval {
    let lo = if x.lo.bits() > LO_CAP_BITS {
        lo_cap()
    } else {
        bracket_big(&x.lo, k)
    };
    let hi =
        x.hi.as_ref()
            .filter(|h| h.bits() * (crate::tri::triangular_number(k) + k) <= HI_CAP_BITS)
            .map(|h| bracket_big(h, k));
    Interval::new(lo, hi)
}

/// Evaluates an expression to an interval, bottom-up.
pub fn eval_bound_expr(
    e: &BoundExpr,
    table: &ClassicalRamseyTable,
) -> Result<Interval, BoundsError> {
    e.validate()?;
    Ok(eval(e, table))
}

fn eval(e: &BoundExpr, table: &ClassicalRamseyTable) -> Interval {
    match e {
        BoundExpr::Const { value } => Interval::exact(value.clone()),
        BoundExpr::ClassicalR { arg, k } => table.lookup_interval(&eval(arg, table), *k),
        BoundExpr::IteratedR { times, base, k } => {
            let t = eval(times, table);
            let mut x = eval(base, table);
            let steps_lo = t.lo.to_u64().unwrap_or(u64::MAX).min(MAX_UNROLL);
            let exact_small = t.is_exact() && t.lo <= BigUint::from(MAX_UNROLL);
            for _ in 0..steps_lo {
                let next = table.lookup_interval(&x, *k);
                let stalled = next == x;
                x = next;
                if stalled || (x.lo == lo_cap() && x.hi.is_none()) {
                    break;
                }
            }
            if exact_small {
                x
            } else {
                Interval::new(x.lo, None)
            }
        }
        BoundExpr::Bracket { arg, k } => apply_bracket(&eval(arg, table), *k),
        BoundExpr::TriR1 { arg, k } => {
            let x = eval(arg, table);
            // a board needs at least n levels; R1(k, k) = k
            let hi = if x.is_exact() && x.lo == BigUint::from(*k) {
                Some(x.lo.clone())
            } else {
                None
            };
            Interval::new(x.lo, hi)
        }
        BoundExpr::TwiceMinusOne { arg } => {
            let x = eval(arg, table);
            let f = |v: &BigUint| {
                if v.is_zero() {
                    v.clone()
                } else {
                    v * 2u32 - 1u32
                }
            };
            Interval::new(f(&x.lo), x.hi.as_ref().map(f))
        }
        BoundExpr::MSeq { expansion, .. } => eval(expansion, table),
    }
}

/// Which power of two the expected count is scaled by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Exponent {
    /// `[m p] 2^{-[p k]} + [m q] 2^{-[q k]} < 1`.
    #[default]
    Plain,
    /// The same sum with each term doubled.
    Doubled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Arithmetic {
    /// Exact integers when `[q k] <= EXACT_EXPONENT_LIMIT`, else log-domain.
    #[default]
    Auto,
    Exact,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbOptions {
    pub exponent: Exponent,
    pub arithmetic: Arithmetic,
    /// The sweep gives up past this board size.
    pub m_limit: u64,
}

impl Default for ProbOptions {
    fn default() -> Self {
        Self {
            exponent: Exponent::Plain,
            arithmetic: Arithmetic::Auto,
            m_limit: 1_000_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbBound {
    /// Largest `m` satisfying the inequality.
    pub m_star: u64,
    /// The implied lower bound `R1 >= m_star + 1`.
    pub bound: u64,
    pub arithmetic: Arithmetic,
    /// Boards near the threshold that were re-decided exactly.
    pub exact_rechecks: u64,
}

pub fn prob_lower_bound(p: u64, q: u64, k: u64) -> Result<ProbBound, BoundsError> {
    prob_lower_bound_with(p, q, k, ProbOptions::default())
}

/// Largest `m` with `[m p] 2^{-[p k]} + [m q] 2^{-[q k]} < 1`, found by
/// sweeping `m` upward until the inequality first fails.
pub fn prob_lower_bound_with(
    p: u64,
    q: u64,
    k: u64,
    opts: ProbOptions,
) -> Result<ProbBound, BoundsError> {
    let (p, q) = (p.min(q), p.max(q));
    if k == 0 || k > p {
        return Err(BoundsError::InvalidParams(format!(
            "need 1 <= k <= p <= q (p={p} q={q} k={k})"
        )));
    }
    let bp = bracket(p, k).unwrap();
    let bq = bracket(q, k).unwrap();
    let doubled = opts.exponent == Exponent::Doubled;
    let arithmetic = match opts.arithmetic {
        Arithmetic::Auto if bq <= BigUint::from(EXACT_EXPONENT_LIMIT) => Arithmetic::Exact,
        Arithmetic::Auto => Arithmetic::Log,
        a => a,
    };
    let ep = bp
        .to_u64()
        .ok_or_else(|| BoundsError::InvalidParams("exponent too large".into()))?;
    let eq = bq
        .to_u64()
        .ok_or_else(|| BoundsError::InvalidParams("exponent too large".into()))?;
    // [m p] 2^{eq} + [m q] 2^{ep} < 2^{ep + eq}, halved on the right if doubled
    let holds_exact = |mp: &BigUint, mq: &BigUint| {
        let lhs = (mp << eq) + (mq << ep);
        let rhs_bits = ep + eq - u64::from(doubled);
        lhs < (BigUint::one() << rhs_bits)
    };
    let mut rechecks = 0;
    let m_star = match arithmetic {
        Arithmetic::Exact => {
            let mut cols = ExactBracketColumns::new(q);
            loop {
                if cols.m() > opts.m_limit {
                    return Err(BoundsError::LimitReached(opts.m_limit));
                }
                cols.advance();
                if !holds_exact(cols.get(p), cols.get(q)) {
                    break cols.m() - 1;
                }
            }
        }
        _ => {
            let (fp, fq) = (ep as f64, eq as f64);
            let shift = if doubled { 1.0 } else { 0.0 };
            let mut cols = LogBracketColumns::new(q);
            loop {
                if cols.m() > opts.m_limit {
                    return Err(BoundsError::LimitReached(opts.m_limit));
                }
                cols.advance();
                let lhs = crate::tri::log2_add(cols.get(p) - fp, cols.get(q) - fq) + shift;
                let holds = if lhs.abs() < LOG_GUARD {
                    rechecks += 1;
                    let m = BigUint::from(cols.m());
                    holds_exact(&bracket_big(&m, p), &bracket_big(&m, q))
                } else {
                    lhs < 0.0
                };
                if !holds {
                    break cols.m() - 1;
                }
            }
        }
    };
    Ok(ProbBound {
        m_star,
        bound: m_star + 1,
        arithmetic,
        exact_rechecks: rechecks,
    })
}

/// A positive real kept as its base-10 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LargeReal {
    pub log10: f64,
}

impl LargeReal {
    pub fn value(&self) -> f64 {
        10f64.powf(self.log10)
    }

    pub fn mantissa_exponent(&self) -> (f64, i64) {
        let e = self.log10.floor();
        (10f64.powf(self.log10 - e), e as i64)
    }
}

impl fmt::Display for LargeReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log10 < 6.0 {
            write!(f, "{:.1}", self.value())
        } else {
            let (m, e) = self.mantissa_exponent();
            write!(f, "{m:.2}e{e}")
        }
    }
}

/// The closed-form lower bound on `R1(n, n, k)` from Stirling's estimate:
/// `(2 pi T)^{1/(4T)} sqrt(2T/e) 2^{(n^k - k^k)/(2 k^k T)} - 1`, `T = T_n`.
pub fn asymptotic_lower_bound(n: u64, k: u64) -> Result<LargeReal, BoundsError> {
    if k == 0 || k > n {
        return Err(BoundsError::InvalidParams(format!(
            "need 1 <= k <= n (n={n} k={k})"
        )));
    }
    let t = crate::tri::triangular_number(n) as f64;
    let ratio = ((n as f64).ln() - (k as f64).ln()) * k as f64;
    let power = (ratio.exp() - 1.0) / (2.0 * t);
    let ln = (2.0 * std::f64::consts::PI * t).ln() / (4.0 * t)
        + 0.5 * ((2.0 * t).ln() - 1.0)
        + power * std::f64::consts::LN_2;
    let log10 = if ln < 40.0 {
        (ln.exp() - 1.0).log10()
    } else {
        ln / std::f64::consts::LN_10
    };
    Ok(LargeReal { log10 })
}

/// A lower bound as either an integer or a large real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LowerValue {
    Integer(u64),
    Real(LargeReal),
}

impl fmt::Display for LowerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerValue::Integer(v) if *v >= 10_000_000 => {
                write!(
                    f,
                    "{}",
                    LargeReal {
                        log10: (*v as f64).log10()
                    }
                )
            }
            LowerValue::Integer(v) => write!(f, "{v}"),
            LowerValue::Real(r) => write!(f, "{r}"),
        }
    }
}

/// One row of the summary table for small parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableRow {
    pub p: u64,
    pub q: u64,
    pub k: u64,
    pub lower: Option<LowerValue>,
    pub exact: Option<u64>,
    pub upper_expr: Option<String>,
    pub upper_interval: Option<Interval>,
    pub source: String,
}

/// The parameter triples of the summary table, in display order.
pub const TABLE_PARAMS: [(u64, u64, u64); 20] = [
    (1, 2, 1),
    (2, 2, 1),
    (2, 3, 1),
    (3, 3, 1),
    (2, 2, 2),
    (2, 3, 2),
    (3, 3, 2),
    (3, 4, 2),
    (4, 4, 2),
    (3, 3, 3),
    (3, 4, 3),
    (4, 4, 3),
    (4, 5, 3),
    (5, 5, 3),
    (4, 4, 4),
    (4, 5, 4),
    (5, 5, 4),
    (30, 30, 20),
    (35, 35, 20),
    (40, 40, 20),
];

/// Builds one table row. Exact values come from a draw search (cheap for
/// these parameters), lower bounds from the probabilistic sweep or, for
/// large `n`, the closed form.
pub fn table_row(
    p: u64,
    q: u64,
    k: u64,
    table: &ClassicalRamseyTable,
) -> Result<TableRow, BoundsError> {
    table_row_with(p, q, k, table, ProbOptions::default())
}

/// [`table_row`] with explicit options for the first-moment sweep.
pub fn table_row_with(
    p: u64,
    q: u64,
    k: u64,
    table: &ClassicalRamseyTable,
    opts: ProbOptions,
) -> Result<TableRow, BoundsError> {
    let (p, q) = (p.min(q), p.max(q));
    let mut row = TableRow {
        p,
        q,
        k,
        lower: None,
        exact: None,
        upper_expr: None,
        upper_interval: None,
        source: String::new(),
    };
    // p = k makes every cell a winning set for player one, and k = 1 is
    // settled by exhaustive search.
    if k == 1 || p == k {
        let r = crate::search::compute_r1(p, q, k, p + q, crate::search::DEFAULT_BUDGET)
            .map_err(|e| BoundsError::InvalidParams(e.to_string()))?;
        row.exact = r.exact();
        row.source = if k == 1 {
            "exhaustive draw search"
        } else {
            "single-cell winning sets"
        }
        .into();
        return Ok(row);
    }
    if q >= 20 {
        row.lower = Some(LowerValue::Real(asymptotic_lower_bound(q, k)?));
        row.source = "closed-form asymptotic bound".into();
    } else {
        let b = prob_lower_bound_with(p, q, k, opts)?;
        row.lower = Some(LowerValue::Integer(b.bound));
        row.source = match b.arithmetic {
            Arithmetic::Log => "first-moment bound (log-domain sweep)",
            _ => "first-moment bound (exact)",
        }
        .into();
    }
    let expr = upper_bound_expr(p, q, k)?;
    row.upper_interval = Some(eval_bound_expr(&expr, table)?);
    row.upper_expr = Some(expr.to_string());
    Ok(row)
}

pub fn reference_table(table: &ClassicalRamseyTable) -> Result<Vec<TableRow>, BoundsError> {
    TABLE_PARAMS
        .iter()
        .map(|&(p, q, k)| table_row(p, q, k, table))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tri::binomial;
    use num_rational::BigRational;

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    // Oracle: the inequality decided with exact rationals at a single m.
    fn holds_rational(m: u64, p: u64, q: u64, k: u64) -> bool {
        let term = |n: u64| {
            let count = if m < n {
                BigUint::zero()
            } else {
                bracket(m, n).unwrap()
            };
            let e = bracket(n, k).unwrap().to_usize().unwrap();
            BigRational::new(count.into(), (BigUint::one() << e).into())
        };
        term(p) + term(q) < BigRational::one()
    }

    #[test]
    fn exact_sweep_matches_rational_oracle() {
        for (p, q, k) in [
            (3u64, 3u64, 2u64),
            (3, 4, 2),
            (4, 4, 2),
            (2, 2, 1),
            (3, 3, 1),
            (4, 4, 3),
        ] {
            let r = prob_lower_bound(p, q, k).unwrap();
            assert!(holds_rational(r.m_star, p, q, k), "{p} {q} {k}");
            assert!(!holds_rational(r.m_star + 1, p, q, k), "{p} {q} {k}");
        }
    }

    #[test]
    fn small_lower_bounds() {
        assert_eq!(prob_lower_bound(3, 3, 2).unwrap().m_star, 5);
        assert_eq!(prob_lower_bound(3, 4, 2).unwrap().bound, 6);
        assert_eq!(prob_lower_bound(4, 4, 2).unwrap().bound, 25);
        assert_eq!(prob_lower_bound(4, 4, 3).unwrap().bound, 20);
        // argument order does not matter
        assert_eq!(prob_lower_bound(4, 3, 2), prob_lower_bound(3, 4, 2));
    }

    #[test]
    fn exact_and_log_agree() {
        for k in 1..=3u64 {
            for p in k..=6 {
                for q in p..=6 {
                    if bracket(q, k).unwrap() > b(60) {
                        continue;
                    }
                    let run = |a| {
                        prob_lower_bound_with(
                            p,
                            q,
                            k,
                            ProbOptions {
                                arithmetic: a,
                                ..Default::default()
                            },
                        )
                        .unwrap()
                        .m_star
                    };
                    assert_eq!(run(Arithmetic::Exact), run(Arithmetic::Log), "{p} {q} {k}");
                }
            }
        }
    }

    #[test]
    fn doubled_exponent_is_weaker() {
        for (p, q, k) in [(3u64, 3u64, 2u64), (4, 4, 2), (4, 4, 3), (5, 5, 4)] {
            let plain = prob_lower_bound(p, q, k).unwrap().m_star;
            let doubled = prob_lower_bound_with(
                p,
                q,
                k,
                ProbOptions {
                    exponent: Exponent::Doubled,
                    ..Default::default()
                },
            )
            .unwrap()
            .m_star;
            assert!(doubled <= plain);
        }
    }

    #[test]
    fn bracket_polynomial_matches_recursion() {
        for k in 0..=5u64 {
            for n in k..=80 {
                let x0 = k;
                let degree = crate::tri::triangular_number(k) + k;
                // force the polynomial path by evaluating through a shifted copy
                let direct = bracket(n, k).unwrap();
                let via = {
                    let mut diffs: Vec<BigInt> = (0..=degree)
                        .map(|i| BigInt::from(bracket(x0 + i, k).unwrap()))
                        .collect();
                    for j in 1..diffs.len() {
                        for i in (j..diffs.len()).rev() {
                            diffs[i] = &diffs[i] - &diffs[i - 1];
                        }
                    }
                    let t = n - x0;
                    let mut acc = BigInt::zero();
                    for (j, d) in diffs.iter().enumerate() {
                        acc += d * BigInt::from(binomial(t, j as u64));
                    }
                    acc.to_biguint().unwrap()
                };
                assert_eq!(direct, via, "n={n} k={k}");
            }
        }
        // the large-n path against the recursion just above its cut-off
        assert_eq!(bracket_big(&b(20_001), 2), bracket(20_001, 2).unwrap());
        assert_eq!(bracket_big(&b(20_003), 3), bracket(20_003, 3).unwrap());
    }

    #[test]
    fn asymptotic_values() {
        let v = asymptotic_lower_bound(30, 20).unwrap().value();
        assert!((v - 220.3).abs() < 0.5, "{v}");
        // weaker than the sweep wherever both are computed
        for (n, k) in [(3u64, 2u64), (4, 2), (4, 3), (5, 4), (6, 2)] {
            let a = asymptotic_lower_bound(n, k).unwrap().value();
            let m = prob_lower_bound(n, n, k).unwrap().m_star as f64;
            assert!(a <= m, "n={n} k={k}: {a} > {m}");
        }
    }

    #[test]
    fn m_sequence_shapes() {
        for n in 1..=12 {
            assert_eq!(m_sequence_expr(n, 1).unwrap(), BoundExpr::constant(n));
        }
        for k in 1..=6 {
            assert_eq!(m_sequence_expr(k, k).unwrap(), BoundExpr::constant(k));
        }
        let m32 = m_sequence_expr(3, 2).unwrap();
        assert_eq!(
            m32,
            BoundExpr::iterated(BoundExpr::constant(6), BoundExpr::constant(3), 2)
        );
        assert_eq!(m32.to_string(), "R^{6}(3,2)");
        assert!(m_sequence_expr(2, 3).is_err());
        let m72 = m_sequence_named(7, 2).unwrap();
        assert_eq!(m72.to_string(), "M_{7,2}");
    }

    #[test]
    fn upper_bound_shapes() {
        assert_eq!(
            upper_bound_expr(3, 3, 2).unwrap().to_string(),
            "R^{15}(3,2)"
        );
        assert_eq!(upper_bound_expr(4, 4, 2).unwrap().to_string(), "M_{7,2}");
        assert_eq!(upper_bound_expr(3, 4, 2).unwrap().to_string(), "M_{7,2}");
        assert_eq!(
            upper_bound_expr(4, 4, 3).unwrap().to_string(),
            "R^{{M_{7,2} \\brack 2}}(4,3)"
        );
        assert_eq!(upper_bound_expr(4, 5, 3).unwrap().to_string(), "M_{9,3}");
        assert_eq!(
            upper_bound_expr(5, 5, 4).unwrap().to_string(),
            "R^{{M_{9,3} \\brack 3}}(5,4)"
        );
        assert_eq!(
            upper_bound_expr(30, 30, 20).unwrap().to_string(),
            "M_{59,20}"
        );
    }

    #[test]
    fn interval_evaluation() {
        let t = ClassicalRamseyTable::standard();
        let r = |n: u64| BoundExpr::classical(BoundExpr::constant(n), 2);
        assert_eq!(eval_bound_expr(&r(3), &t).unwrap(), Interval::exact(6u64));
        assert_eq!(
            eval_bound_expr(&r(6), &t).unwrap(),
            Interval::new(102u64, Some(b(165)))
        );
        let twice = BoundExpr::iterated(BoundExpr::constant(2), BoundExpr::constant(3), 2);
        assert_eq!(
            eval_bound_expr(&twice, &t).unwrap(),
            Interval::new(102u64, Some(b(165)))
        );
        assert_eq!(
            eval_bound_expr(&BoundExpr::constant(5), &t).unwrap(),
            Interval::exact(5u64)
        );
        // fallback 2^{n/2} <= R(n) <= 4^{n-1}
        assert_eq!(
            eval_bound_expr(&r(10), &t).unwrap(),
            Interval::new(32u64, Some(b(1) << 18))
        );
        let bad = BoundExpr::classical(BoundExpr::constant(3), 0);
        assert!(matches!(
            eval_bound_expr(&bad, &t),
            Err(BoundsError::MalformedExpr(_))
        ));
        // a long iteration keeps a finite lower end and loses the upper one
        let r15 = upper_bound_expr(3, 3, 2).unwrap();
        let v = eval_bound_expr(&r15, &t).unwrap();
        assert!(v.hi.is_none());
        assert!(v.lo >= b(6));
        for (p, q, k) in [(4u64, 4u64, 2u64), (5, 5, 4), (4, 4, 3)] {
            let e = upper_bound_expr(p, q, k).unwrap();
            let v = eval_bound_expr(&e, &t).unwrap();
            let lower = prob_lower_bound(p, q, k).unwrap().bound;
            assert!(v.hi.as_ref().is_none_or(|h| h >= &b(lower)));
        }
    }

    #[test]
    fn expressions_round_trip_as_json() {
        let e = upper_bound_expr(5, 5, 4).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: BoundExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        let i = Interval::new(102u64, Some(b(165)));
        let v = serde_json::to_value(&i).unwrap();
        assert_eq!(v, serde_json::json!({"lo": "102", "hi": "165"}));
    }
}
