//! Triangular numbers, triangular sets, the sub-triangle order and the
//! bracket coefficient.
//!
//! A triangular set with `n` levels holds `T_n = n(n+1)/2` naturals. Listed
//! in increasing order, level `i` is the slice of `i` elements starting at
//! index `T_{i-1}`. A set `x` sits below `y` (`x <= y`) when `x` is a subset
//! of `y` and every level of `x` lies inside its own level of `y`.
//!
//! The bracket `[n k]` counts the `k`-level sets below a fixed `n`-level set.
//! It obeys `[n k] = [n-1 k] + C(n, k) [n-1 k-1]` with `[n 0] = [n n] = 1`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TriError {
    #[error("a set of {0} elements is not triangular")]
    NotTriangularCardinality(usize),
    #[error("k = {k} is larger than n = {n}")]
    KTooLarge { n: u64, k: u64 },
}

/// `T_n = 1 + 2 + ... + n`.
pub const fn triangular_number(n: u64) -> u64 {
    n * (n + 1) / 2
}

/// The `n` with `T_n == size`, if `size` is triangular.
pub fn triangular_root(size: u64) -> Option<u64> {
    let n = ((8 * size + 1).isqrt() - 1) / 2;
    (triangular_number(n) == size).then_some(n)
}

/// Index range of level `i` (1-based) inside the sorted element list.
#[inline]
pub fn level_range(i: u64) -> std::ops::Range<usize> {
    triangular_number(i - 1) as usize..triangular_number(i) as usize
}

/// Level (1-based) of the element at sorted position `idx`.
#[inline]
pub fn level_of_index(idx: usize) -> u64 {
    triangular_root_floor(idx as u64 + 1)
}

// smallest n with T_n >= x
fn triangular_root_floor(x: u64) -> u64 {
    let n = ((8 * x + 1).isqrt() - 1) / 2;
    if triangular_number(n) >= x {
        n
    } else {
        n + 1
    }
}

/// A finite set of naturals whose size is triangular, viewed level by level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct TriangularSet {
    elements: Vec<u64>,
    levels: u64,
}

impl TriangularSet {
    pub fn new(items: impl IntoIterator<Item = u64>) -> Result<Self, TriError> {
        let mut elements: Vec<u64> = items.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        let levels = triangular_root(elements.len() as u64)
            .ok_or(TriError::NotTriangularCardinality(elements.len()))?;
        Ok(Self { elements, levels })
    }

    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
            levels: 0,
        }
    }

    /// `{1, 2, ..., T_n}`, the standard board of size `n`.
    pub fn full(n: u64) -> Self {
        Self {
            elements: (1..=triangular_number(n)).collect(),
            levels: n,
        }
    }

    pub fn level_count(&self) -> u64 {
        self.levels
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Level `i`, counted from 1 at the top.
    pub fn level(&self, i: u64) -> &[u64] {
        assert!(i >= 1 && i <= self.levels, "level {i} out of range");
        &self.elements[level_range(i)]
    }

    pub fn levels(&self) -> impl Iterator<Item = &[u64]> + '_ {
        (1..=self.levels).map(move |i| self.level(i))
    }

    /// The level holding `x`, if `x` is an element.
    pub fn level_of(&self, x: u64) -> Option<u64> {
        self.elements.binary_search(&x).ok().map(level_of_index)
    }

    /// `self <= other` in the sub-triangle order.
    pub fn leq(&self, other: &TriangularSet) -> bool {
        let mut used = Vec::with_capacity(self.levels as usize);
        for level in self.levels() {
            let Some(target) = other.level_of(level[0]) else {
                return false;
            };
            if level[1..]
                .iter()
                .any(|&x| other.level_of(x) != Some(target))
            {
                return false;
            }
            if used.contains(&target) {
                return false;
            }
            used.push(target);
        }
        true
    }

    /// Every `k`-level set below `self`, in lexicographic order of elements.
    pub fn subtriangles(&self, k: u64) -> Result<Vec<TriangularSet>, TriError> {
        if k > self.levels {
            return Err(TriError::KTooLarge { n: self.levels, k });
        }
        let mut out = Vec::new();
        for_each_subtriangle(self.levels, k, |idx| {
            out.push(TriangularSet {
                elements: idx.iter().map(|&i| self.elements[i]).collect(),
                levels: k,
            });
        });
        Ok(out)
    }
}

impl TryFrom<Vec<u64>> for TriangularSet {
    type Error = TriError;

    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        TriangularSet::new(v)
    }
}

impl From<TriangularSet> for Vec<u64> {
    fn from(t: TriangularSet) -> Self {
        t.elements
    }
}

impl fmt::Display for TriangularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

pub fn parse_triangular_set(s: impl IntoIterator<Item = u64>) -> Result<TriangularSet, TriError> {
    TriangularSet::new(s)
}

pub fn leq(x: &TriangularSet, y: &TriangularSet) -> bool {
    x.leq(y)
}

pub fn enumerate_subtriangles(y: &TriangularSet, k: u64) -> Result<Vec<TriangularSet>, TriError> {
    y.subtriangles(k)
}

/// Calls `f` with the sorted element indices of every `k`-level sub-triangle
/// of an `n`-level set, in lexicographic order. Panics if `k > n`.
pub fn for_each_subtriangle(n: u64, k: u64, mut f: impl FnMut(&[usize])) {
    assert!(k <= n);
    let mut buf = Vec::with_capacity(triangular_number(k) as usize);
    subtriangle_rec(n, k, 1, 1, &mut buf, &mut f);
}

fn subtriangle_rec(
    n: u64,
    k: u64,
    level: u64,
    min_row: u64,
    buf: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if level > k {
        f(buf);
        return;
    }
    // leave room for the remaining k - level levels
    for row in min_row..=n - (k - level) {
        if row < level {
            continue;
        }
        let base = triangular_number(row - 1) as usize;
        let width = level as usize;
        let mut comb: Vec<usize> = (0..width).collect();
        loop {
            let mark = buf.len();
            buf.extend(comb.iter().map(|c| base + c));
            subtriangle_rec(n, k, level + 1, row + 1, buf, f);
            buf.truncate(mark);
            if !next_combination(&mut comb, row as usize) {
                break;
            }
        }
    }
}

/// Advances `comb` to the next `comb.len()`-subset of `0..n` in lex order.
pub(crate) fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let r = comb.len();
    if r == 0 {
        return false;
    }
    let mut i = r;
    while i > 0 {
        i -= 1;
        if comb[i] < n - r + i {
            comb[i] += 1;
            for j in i + 1..r {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log2 C(n, k)` in floating point.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2())
        .sum()
}

/// `log2(2^a + 2^b)` without overflow.
#[inline]
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (-(hi - lo) * std::f64::consts::LN_2).exp().ln_1p() / std::f64::consts::LN_2
}

/// Memoised exact and log-domain bracket values.
///
/// Reads run concurrently; a miss computes outside the lock and then takes
/// the write lock once to publish the new row segment.
#[derive(Debug, Default)]
pub struct BracketTable {
    exact: RwLock<HashMap<(u64, u64), BigUint>>,
    log_domain: RwLock<HashMap<(u64, u64), f64>>,
}

impl BracketTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: u64, k: u64) -> Result<BigUint, TriError> {
        if k > n {
            return Err(TriError::KTooLarge { n, k });
        }
        if k == 0 || k == n {
            return Ok(BigUint::one());
        }
        if let Some(v) = self.exact.read().unwrap().get(&(n, k)) {
            return Ok(v.clone());
        }
        // rows 0..=n, columns 0..=k
        let mut row: Vec<BigUint> = vec![BigUint::zero(); k as usize + 1];
        row[0] = BigUint::one();
        let mut fresh = Vec::new();
        for i in 1..=n {
            let top = i.min(k);
            for j in (1..=top).rev() {
                let j_us = j as usize;
                row[j_us] = if j == i {
                    BigUint::one()
                } else {
                    let carry = binomial(i, j) * &row[j_us - 1];
                    &row[j_us] + carry
                };
                if j < i {
                    fresh.push(((i, j), row[j_us].clone()));
                }
            }
        }
        let value = row[k as usize].clone();
        let mut w = self.exact.write().unwrap();
        for (key, v) in fresh {
            w.entry(key).or_insert(v);
        }
        Ok(value)
    }

    pub fn log2(&self, n: u64, k: u64) -> Result<f64, TriError> {
        if let Some(v) = self.log_domain.read().unwrap().get(&(n, k)) {
            return Ok(*v);
        }
        let v = bracket_log2_stream(n, k)?;
        self.log_domain.write().unwrap().insert((n, k), v);
        Ok(v)
    }

    /// All exact entries, sorted by `(n, k)`.
    pub fn entries(&self) -> Vec<(u64, u64, BigUint)> {
        let mut v: Vec<_> = self
            .exact
            .read()
            .unwrap()
            .iter()
            .map(|(&(n, k), x)| (n, k, x.clone()))
            .collect();
        v.sort_by_key(|e| (e.0, e.1));
        v
    }

    /// Seeds an entry after checking it against the recursion.
    pub fn insert_checked(&self, n: u64, k: u64, value: BigUint) -> Result<bool, TriError> {
        let expected = self.get(n, k)?;
        Ok(expected == value)
    }

    pub fn len(&self) -> usize {
        self.exact.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

static GLOBAL_TABLE: LazyLock<BracketTable> = LazyLock::new(BracketTable::new);

/// The process-wide bracket memo.
pub fn global_brackets() -> &'static BracketTable {
    &GLOBAL_TABLE
}

/// `[n k]`, exact.
pub fn bracket(n: u64, k: u64) -> Result<BigUint, TriError> {
    GLOBAL_TABLE.get(n, k)
}

/// `[n k]` as a machine integer when it fits.
pub fn bracket_u64(n: u64, k: u64) -> Option<u64> {
    bracket(n, k).ok()?.to_u64()
}

/// `[n k]` straight from the sum over `0 < i_1 < ... < i_k <= n` of
/// `prod_j C(i_j, j)`.
pub fn bracket_sum(n: u64, k: u64) -> Result<BigUint, TriError> {
    if k > n {
        return Err(TriError::KTooLarge { n, k });
    }
    if k == 0 || k == n {
        return Ok(BigUint::one());
    }
    fn rec(j: u64, prev: u64, n: u64, k: u64) -> BigUint {
        if j > k {
            return BigUint::one();
        }
        let mut acc = BigUint::zero();
        for i in prev + 1..=n - (k - j) {
            acc += binomial(i, j) * rec(j + 1, i, n, k);
        }
        acc
    }
    Ok(rec(1, 0, n, k))
}

/// `log2 [n k]` by a streaming pass over `n` that keeps `k + 1` columns.
pub fn bracket_log2(n: u64, k: u64) -> Result<f64, TriError> {
    GLOBAL_TABLE.log2(n, k)
}

fn bracket_log2_stream(n: u64, k: u64) -> Result<f64, TriError> {
    if k > n {
        return Err(TriError::KTooLarge { n, k });
    }
    let mut cols = LogBracketColumns::new(k);
    for _ in 0..n {
        cols.advance();
    }
    Ok(cols.get(k))
}

/// `log2 [m j]` for `j = 0..=k` as `m` steps upward from 0.
#[derive(Debug, Clone)]
pub struct LogBracketColumns {
    m: u64,
    cols: Vec<f64>,
}

impl LogBracketColumns {
    pub fn new(k: u64) -> Self {
        let mut cols = vec![f64::NEG_INFINITY; k as usize + 1];
        cols[0] = 0.0;
        Self { m: 0, cols }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn get(&self, j: u64) -> f64 {
        self.cols[j as usize]
    }

    pub fn advance(&mut self) {
        self.m += 1;
        let i = self.m;
        let top = (self.cols.len() as u64 - 1).min(i);
        for j in (1..=top).rev() {
            let ju = j as usize;
            self.cols[ju] = if j == i {
                0.0
            } else {
                log2_add(self.cols[ju], log2_binomial(i, j) + self.cols[ju - 1])
            };
        }
    }
}

/// Exact `[m j]` for `j = 0..=k` as `m` steps upward from 0.
#[derive(Debug, Clone)]
pub struct ExactBracketColumns {
    m: u64,
    cols: Vec<BigUint>,
}

impl ExactBracketColumns {
    pub fn new(k: u64) -> Self {
        let mut cols = vec![BigUint::zero(); k as usize + 1];
        cols[0] = BigUint::one();
        Self { m: 0, cols }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn get(&self, j: u64) -> &BigUint {
        &self.cols[j as usize]
    }

    pub fn advance(&mut self) {
        self.m += 1;
        let i = self.m;
        let top = (self.cols.len() as u64 - 1).min(i);
        for j in (1..=top).rev() {
            let ju = j as usize;
            self.cols[ju] = if j == i {
                BigUint::one()
            } else {
                let carry = binomial(i, j) * &self.cols[ju - 1];
                &self.cols[ju] + carry
            };
        }
    }
}
