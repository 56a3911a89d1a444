//! The real exterior algebra `Λ_L` on `L ≤ 64` anticommuting generators.
//!
//! A monomial `σ^I` is addressed by an [`IndexSet`], a bitmask whose bit
//! `i-1` marks generator `σ_i`. Elements are sparse sorted maps from index
//! sets to scalars, so iteration order (and therefore every sum) is
//! reproducible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

/// Largest supported generator budget.
pub const MAX_LEVEL: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("generator index {index} is outside 1..={level}")]
    IndexOutOfRange { index: u32, level: u32 },
    #[error("index list is not strictly increasing: {0:?}")]
    NotIncreasing(Vec<u32>),
    #[error("level {0} exceeds the maximum of 64 generators")]
    LevelTooLarge(u32),
    #[error("element has zero body and cannot be inverted")]
    ZeroBody,
    #[error("element is not even")]
    NotEven,
    #[error("body is not a nonzero constant; use quadrature mode")]
    NonConstantBody,
    #[error("cannot parse Grassmann element: {0}")]
    Parse(String),
}

/// Sorted set of generator labels in `1..=64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(index: u32) -> Self {
        assert!(
            (1..=MAX_LEVEL).contains(&index),
            "generator index {index} out of range"
        );
        IndexSet(1u64 << (index - 1))
    }

    /// Builds a set from a strictly increasing list of labels.
    pub fn from_indices(indices: &[u32]) -> Result<Self, AlgebraError> {
        let mut bits = 0u64;
        let mut last = 0u32;
        for &i in indices {
            if i == 0 || i > MAX_LEVEL {
                return Err(AlgebraError::IndexOutOfRange {
                    index: i,
                    level: MAX_LEVEL,
                });
            }
            if i <= last {
                return Err(AlgebraError::NotIncreasing(indices.to_vec()));
            }
            last = i;
            bits |= 1u64 << (i - 1);
        }
        Ok(IndexSet(bits))
    }

    /// Contiguous run `{start+1, …, start+len}`.
    pub fn range(start: u32, len: u32) -> Self {
        if len == 0 {
            return IndexSet::EMPTY;
        }
        let ones = if len >= 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        IndexSet(ones << start)
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: u32) -> bool {
        (1..=MAX_LEVEL).contains(&index) && self.0 & (1u64 << (index - 1)) != 0
    }

    /// Largest label, or 0 for the empty set.
    pub fn max_index(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn insert(self, index: u32) -> IndexSet {
        self.union(IndexSet::singleton(index))
    }

    pub fn remove(self, index: u32) -> IndexSet {
        self.difference(IndexSet::singleton(index))
    }

    /// Shifts every label up by `offset`.
    pub fn shifted(self, offset: u32) -> IndexSet {
        if self.0 == 0 {
            return self;
        }
        assert!(
            self.max_index() + offset <= MAX_LEVEL,
            "shift past generator budget"
        );
        IndexSet(self.0 << offset)
    }

    /// Shifts every label down by `offset`; labels must all exceed it.
    pub fn unshifted(self, offset: u32) -> IndexSet {
        IndexSet(self.0 >> offset)
    }

    /// Number of members strictly below `index`.
    pub fn count_below(self, index: u32) -> u32 {
        if index <= 1 {
            return 0;
        }
        let mask = if index > 64 {
            u64::MAX
        } else {
            (1u64 << (index - 1)) - 1
        };
        (self.0 & mask).count_ones()
    }

    /// Sign of `σ^self · σ^other = ±σ^{self ∪ other}` for disjoint sets.
    pub fn merge_sign(self, other: IndexSet) -> i32 {
        let mut inversions = 0u32;
        let mut rest = other.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            let above = if j >= 63 {
                0
            } else {
                self.0 & (u64::MAX << (j + 1))
            };
            inversions += above.count_ones();
            rest &= rest - 1;
        }
        if inversions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let j = rest.trailing_zeros();
                rest &= rest - 1;
                Some(j + 1)
            }
        })
    }

    pub fn to_vec(self) -> Vec<u32> {
        self.iter().collect()
    }

    /// All subsets of `{1..=n}`, in term order.
    pub fn all_subsets(n: u32) -> Vec<IndexSet> {
        assert!(n <= 20, "subset enumeration limited to n <= 20");
        let mut out: Vec<IndexSet> = (0..(1u64 << n)).map(IndexSet).collect();
        out.sort();
        out
    }
}

impl Ord for IndexSet {
    /// Cardinality first, then lexicographic on the ascending label lists.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.len().cmp(&other.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let low = diff & diff.wrapping_neg();
        if self.0 & low != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "]")
    }
}

/// Grading of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn of_degree(degree: u32) -> Parity {
        if degree.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of a product of homogeneous factors.
    pub fn product(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    /// Parity of a sum; `None` stands for the zero element.
    pub(crate) fn join(acc: Option<Parity>, next: Parity) -> Option<Parity> {
        match acc {
            None => Some(next),
            Some(p) if p == next => Some(p),
            Some(_) => Some(Parity::Mixed),
        }
    }

    /// 0 for even, 1 for odd.
    pub fn bit(self) -> Option<u32> {
        match self {
            Parity::Even => Some(0),
            Parity::Odd => Some(1),
            Parity::Mixed => None,
        }
    }
}

/// Element of `Λ_L`: a sparse sum of scalars times monomials `σ^I`.
#[derive(Clone, PartialEq)]
pub struct Grassmann<S> {
    level: u32,
    terms: BTreeMap<IndexSet, S>,
}

impl<S: Scalar> Grassmann<S> {
    pub fn zero(level: u32) -> Self {
        assert!(level <= MAX_LEVEL, "level {level} exceeds 64");
        Grassmann {
            level,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(level: u32) -> Self {
        Self::scalar(S::one(), level)
    }

    pub fn scalar(c: S, level: u32) -> Self {
        Self::monomial(IndexSet::EMPTY, c, level)
    }

    pub fn from_i64(c: i64, level: u32) -> Self {
        Self::scalar(S::from_i64(c), level)
    }

    /// The generator `σ_index`.
    pub fn generator(index: u32, level: u32) -> Result<Self, AlgebraError> {
        if index == 0 || index > level {
            return Err(AlgebraError::IndexOutOfRange { index, level });
        }
        Ok(Self::monomial(IndexSet::singleton(index), S::one(), level))
    }

    /// `c·σ^set`; panics if `set` uses generators above `level`.
    pub fn monomial(set: IndexSet, c: S, level: u32) -> Self {
        assert!(level <= MAX_LEVEL, "level {level} exceeds 64");
        assert!(
            set.max_index() <= level,
            "index set {set} exceeds level {level}"
        );
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(set, c);
        }
        Grassmann { level, terms }
    }

    /// Builds an element from `(index list, coefficient)` pairs.
    pub fn from_terms<I>(pairs: I, level: u32) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Vec<u32>, S)>,
    {
        if level > MAX_LEVEL {
            return Err(AlgebraError::LevelTooLarge(level));
        }
        let mut out = Self::zero(level);
        for (idx, c) in pairs {
            let set = IndexSet::from_indices(&idx)?;
            if set.max_index() > level {
                return Err(AlgebraError::IndexOutOfRange {
                    index: set.max_index(),
                    level,
                });
            }
            out.add_term(set, c);
        }
        Ok(out)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> impl Iterator<Item = (IndexSet, &S)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, set: IndexSet) -> S {
        self.terms.get(&set).cloned().unwrap_or_else(S::zero)
    }

    /// Accumulates `c·σ^set`, dropping the term if it cancels.
    pub fn add_term(&mut self, set: IndexSet, c: S) {
        if c.is_zero() {
            return;
        }
        assert!(
            set.max_index() <= self.level,
            "index set {set} exceeds level {}",
            self.level
        );
        match self.terms.get_mut(&set) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&set);
                }
            }
            None => {
                self.terms.insert(set, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn body(&self) -> S {
        self.coeff(IndexSet::EMPTY)
    }

    pub fn soul(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&IndexSet::EMPTY);
        out
    }

    /// `true` when only the empty index set carries a coefficient.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|k| k.is_empty())
    }

    pub fn parity(&self) -> Parity {
        let mut acc = None;
        for k in self.terms.keys() {
            acc = Parity::join(acc, Parity::of_degree(k.len()));
        }
        acc.unwrap_or(Parity::Even)
    }

    /// Highest generator label actually used.
    pub fn max_index(&self) -> u32 {
        self.terms.keys().map(|k| k.max_index()).max().unwrap_or(0)
    }

    /// Re-homes the element at another level.
    pub fn with_level(&self, level: u32) -> Result<Self, AlgebraError> {
        if level > MAX_LEVEL {
            return Err(AlgebraError::LevelTooLarge(level));
        }
        let used = self.max_index();
        if used > level {
            return Err(AlgebraError::IndexOutOfRange { index: used, level });
        }
        Ok(Grassmann {
            level,
            terms: self.terms.clone(),
        })
    }

    /// Lifts to `level`, panicking if the element does not fit.
    pub fn lift(&self, level: u32) -> Self {
        self.with_level(level)
            .expect("element does not fit the requested level")
    }

    fn check_level(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.level != other.level {
            Err(AlgebraError::LevelMismatch(self.level, other.level))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_level(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, v.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_level(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, -v.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_level(other)?;
        let mut acc: BTreeMap<IndexSet, S> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                if !i.is_disjoint(*j) {
                    continue;
                }
                let prod = a.clone() * b.clone();
                let prod = if i.merge_sign(*j) < 0 { -prod } else { prod };
                let key = i.union(*j);
                match acc.get_mut(&key) {
                    Some(v) => *v = v.clone() + prod,
                    None => {
                        acc.insert(key, prod);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(Grassmann {
            level: self.level,
            terms: acc,
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.level);
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (*k, v.clone() * c.clone()))
            .collect();
        Grassmann {
            level: self.level,
            terms,
        }
    }

    /// `x^k` by repeated multiplication.
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.level);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse of an even element with nonzero body, by the finite Neumann sum.
    pub fn even_inverse(&self) -> Result<Self, AlgebraError> {
        if self.parity() != Parity::Even {
            return Err(AlgebraError::NotEven);
        }
        let b = self.body();
        if b.is_zero() {
            return Err(AlgebraError::ZeroBody);
        }
        let inv_b = S::one() / b;
        let step = self.soul().scale(&(-inv_b.clone()));
        let mut term = Self::one(self.level);
        let mut sum = Self::one(self.level);
        loop {
            term = &term * &step;
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum.scale(&inv_b))
    }

    /// Grade involution: odd terms change sign.
    pub fn involution(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| {
                (
                    *k,
                    if k.len() % 2 == 1 {
                        -v.clone()
                    } else {
                        v.clone()
                    },
                )
            })
            .collect();
        Grassmann {
            level: self.level,
            terms,
        }
    }

    /// Left derivative by generator `g`: `σ^T ↦ (−1)^{#{t∈T: t<g}} σ^{T∖g}`.
    pub fn left_derivative(&self, g: u32) -> Self {
        let mut out = Self::zero(self.level);
        for (k, v) in &self.terms {
            if k.contains(g) {
                let c = if k.count_below(g) % 2 == 1 {
                    -v.clone()
                } else {
                    v.clone()
                };
                out.add_term(k.remove(g), c);
            }
        }
        out
    }

    /// Sets every generator in `block` to zero.
    pub fn drop_generators(&self, block: IndexSet) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k.is_disjoint(block))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Grassmann {
            level: self.level,
            terms,
        }
    }

    /// Splits off the block `{offset+1..offset+n}` in right-coefficient form:
    /// `x = Σ_A θ^A c_A` with `θ_k = σ_{offset+k}`. Keys are block-local index
    /// sets; coefficients live at level `offset`.
    pub fn split_block(
        &self,
        offset: u32,
        n: u32,
    ) -> Result<BTreeMap<IndexSet, Self>, AlgebraError> {
        let block = IndexSet::range(offset, n);
        let mut parts: BTreeMap<IndexSet, Self> = BTreeMap::new();
        for (k, v) in &self.terms {
            let a = k.intersection(block);
            let rest = k.difference(block);
            if rest.max_index() > offset {
                return Err(AlgebraError::IndexOutOfRange {
                    index: rest.max_index(),
                    level: offset,
                });
            }
            let c = if a.merge_sign(rest) < 0 {
                -v.clone()
            } else {
                v.clone()
            };
            parts
                .entry(a.unshifted(offset))
                .or_insert_with(|| Self::zero(offset))
                .add_term(rest, c);
        }
        parts.retain(|_, v| !v.is_zero());
        Ok(parts)
    }

    /// Inverse of [`Grassmann::split_block`].
    pub fn join_block(
        parts: &BTreeMap<IndexSet, Self>,
        offset: u32,
        n: u32,
        level: u32,
    ) -> Result<Self, AlgebraError> {
        if offset + n > level {
            return Err(AlgebraError::IndexOutOfRange {
                index: offset + n,
                level,
            });
        }
        let mut out = Self::zero(level);
        for (a, c) in parts {
            if a.max_index() > n {
                return Err(AlgebraError::IndexOutOfRange {
                    index: a.max_index(),
                    level: n,
                });
            }
            let shifted = a.shifted(offset);
            for (rest, v) in c.terms() {
                if rest.max_index() > offset {
                    return Err(AlgebraError::IndexOutOfRange {
                        index: rest.max_index(),
                        level: offset,
                    });
                }
                let s = if shifted.merge_sign(rest) < 0 {
                    -v.clone()
                } else {
                    v.clone()
                };
                out.add_term(shifted.union(rest), s);
            }
        }
        Ok(out)
    }

    /// Largest coefficient magnitude (0 for the zero element).
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|v| v.magnitude())
            .fold(0.0, f64::max)
    }

    /// Converts coefficients to another scalar type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Grassmann<T> {
        let mut out = Grassmann::zero(self.level);
        for (k, v) in &self.terms {
            out.add_term(*k, f(v));
        }
        out
    }

    pub fn to_f64(&self) -> Grassmann<f64> {
        self.map_scalar(|v| v.to_f64())
    }

    /// `(index list, coefficient)` pairs in term order.
    pub fn to_pairs(&self) -> Vec<(Vec<u32>, S)> {
        self.terms
            .iter()
            .map(|(k, v)| (k.to_vec(), v.clone()))
            .collect()
    }

    /// Parses the canonical text form, e.g. `1/2 - 3*s[1,2] + s[4]`.
    pub fn parse(text: &str, level: u32) -> Result<Self, AlgebraError> {
        let err = |m: &str| AlgebraError::Parse(format!("{m} in {text:?}"));
        let mut out = Self::zero(level);
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(err("empty input"));
        }
        let mut pos = 0;
        let mut first = true;
        while pos < chars.len() {
            let mut negative = false;
            if chars[pos] == '+' || chars[pos] == '-' {
                negative = chars[pos] == '-';
                pos += 1;
            } else if !first {
                return Err(err("expected '+' or '-'"));
            }
            first = false;
            let start = pos;
            while pos < chars.len() && chars[pos] != '+' && chars[pos] != '-' {
                if chars[pos] == '[' {
                    while pos < chars.len() && chars[pos] != ']' {
                        pos += 1;
                    }
                }
                pos += 1;
            }
            let token: String = chars[start..pos.min(chars.len())].iter().collect();
            if token.is_empty() {
                return Err(err("missing term"));
            }
            let (coeff_text, set) = match token.find("s[") {
                Some(at) => {
                    let coeff_part = token[..at].trim_end_matches('*');
                    let inner = token[at + 2..]
                        .strip_suffix(']')
                        .ok_or_else(|| err("unterminated index list"))?;
                    let idx: Vec<u32> = if inner.is_empty() {
                        Vec::new()
                    } else {
                        inner
                            .split(',')
                            .map(|s| s.parse::<u32>().map_err(|_| err("bad generator index")))
                            .collect::<Result<_, _>>()?
                    };
                    let set = IndexSet::from_indices(&idx)?;
                    if set.max_index() > level {
                        return Err(AlgebraError::IndexOutOfRange {
                            index: set.max_index(),
                            level,
                        });
                    }
                    (coeff_part.to_string(), set)
                }
                None => (token.clone(), IndexSet::EMPTY),
            };
            let c = if coeff_text.is_empty() {
                S::one()
            } else {
                S::parse_scalar(&coeff_text).ok_or_else(|| err("bad coefficient"))?
            };
            out.add_term(set, if negative { -c } else { c });
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for Grassmann<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, v)) in self.terms.iter().enumerate() {
            let negative = *v < S::zero();
            let mag = if negative { -v.clone() } else { v.clone() };
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if k.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == S::one() {
                write!(f, "s{k}")?;
            } else {
                write!(f, "{mag}*s{k}")?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for Grassmann<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grassmann(L={}; {})", self.level, self)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl<S: Scalar> $tr<&Grassmann<S>> for &Grassmann<S> {
            type Output = Grassmann<S>;
            fn $method(self, rhs: &Grassmann<S>) -> Grassmann<S> {
                self.$try(rhs).expect("Grassmann level mismatch")
            }
        }
        impl<S: Scalar> $tr<Grassmann<S>> for Grassmann<S> {
            type Output = Grassmann<S>;
            fn $method(self, rhs: Grassmann<S>) -> Grassmann<S> {
                self.$try(&rhs).expect("Grassmann level mismatch")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl<S: Scalar> Neg for &Grassmann<S> {
    type Output = Grassmann<S>;
    fn neg(self) -> Grassmann<S> {
        let terms = self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect();
        Grassmann {
            level: self.level,
            terms,
        }
    }
}

impl<S: Scalar> Neg for Grassmann<S> {
    type Output = Grassmann<S>;
    fn neg(self) -> Grassmann<S> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn g(text: &str) -> Grassmann<Q> {
        Grassmann::parse(text, 4).unwrap()
    }

    #[test]
    fn anticommutation() {
        let s1 = g("s[1]");
        let s2 = g("s[2]");
        assert_eq!(&s1 * &s2, g("s[1,2]"));
        assert_eq!(&s2 * &s1, g("-s[1,2]"));
        assert!((&s1 * &s1).is_zero());
    }

    #[test]
    fn nilpotent_pair() {
        assert_eq!(g("1 + s[1,2]") * g("1 - s[1,2]"), g("1"));
    }

    #[test]
    fn body_soul_parity() {
        let x = g("3 + 2*s[1,2]");
        assert_eq!(x.body(), Q::from_integer(3.into()));
        assert_eq!(x.soul(), g("2*s[1,2]"));
        assert_eq!(x.parity(), Parity::Even);
        assert_eq!(g("s[1] + s[1,2,3]").parity(), Parity::Odd);
        assert_eq!(g("1 + s[1]").parity(), Parity::Mixed);
        assert_eq!(Grassmann::<Q>::zero(3).parity(), Parity::Even);
    }

    #[test]
    fn inverse_examples() {
        let x = g("2 + s[1,2]");
        let inv = x.even_inverse().unwrap();
        assert_eq!(inv, g("1/2 - 1/4*s[1,2]"));
        assert_eq!(&x * &inv, g("1"));
        assert_eq!(g("s[1,2]").even_inverse(), Err(AlgebraError::ZeroBody));
        assert_eq!(g("1 + s[1]").even_inverse(), Err(AlgebraError::NotEven));
    }

    #[test]
    fn merge_sign_counts_inversions() {
        let a = IndexSet::from_indices(&[2, 4]).unwrap();
        let b = IndexSet::from_indices(&[1, 3]).unwrap();
        // 2>1, 4>1, 4>3
        assert_eq!(a.merge_sign(b), -1);
        // 3>2 only
        assert_eq!(b.merge_sign(a), -1);
        assert_eq!(b.merge_sign(IndexSet::from_indices(&[5]).unwrap()), 1);
    }

    #[test]
    fn term_order_is_graded_lex() {
        let sets = IndexSet::all_subsets(3);
        let shown: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            shown,
            ["[]", "[1]", "[2]", "[3]", "[1,2]", "[1,3]", "[2,3]", "[1,2,3]"]
        );
    }

    #[test]
    fn text_round_trip() {
        let x = g("1/2 - 3*s[1,3] + s[2]");
        assert_eq!(x.to_string(), "1/2 + s[2] - 3*s[1,3]");
        assert_eq!(Grassmann::parse(&x.to_string(), 4).unwrap(), x);
        assert!(Grassmann::<Q>::parse("s[5]", 4).is_err());
        assert!(Grassmann::<Q>::parse("s[2,1]", 4).is_err());
    }

    #[test]
    fn split_and_join() {
        let x = Grassmann::<Q>::parse("1 + 2*s[1,3] - s[2,3,4] + 5*s[1,2,3,4]", 4).unwrap();
        let parts = x.split_block(2, 2).unwrap();
        // σ1σ3 = −θ1σ1
        assert_eq!(
            parts[&IndexSet::from_indices(&[1]).unwrap()],
            Grassmann::parse("-2*s[1]", 2).unwrap()
        );
        assert_eq!(Grassmann::join_block(&parts, 2, 2, 4).unwrap(), x);
    }

    #[test]
    fn left_derivative_sign() {
        let x = g("s[1,2]");
        assert_eq!(x.left_derivative(1), g("s[2]"));
        assert_eq!(x.left_derivative(2), g("-s[1]"));
        assert!(x.left_derivative(2).left_derivative(2).is_zero());
    }
}
