//! Subsets as bitmasks, set functions, and the common-utility (Möbius) and
//! zeta transforms between them.
//!
//! Target `i` (1-based) is bit `i - 1`. Every subset of the ground set is an
//! integer in `[0, 2^n)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::BigRational;

use crate::error::{NasgError, Result};
use crate::scalar::Scalar;

/// Largest ground set representable as a bitmask.
pub const MAX_TARGETS: usize = 30;
/// Largest ground set for which full `2^n` tables are materialized.
pub const MAX_DENSE_TARGETS: usize = 24;
/// Largest truncated lattice (subsets of size `<= cap`) handled by the
/// capped transforms.
pub const MAX_LATTICE: u128 = 1 << MAX_DENSE_TARGETS;

/// Relative cutoff under which transformed values are treated as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// Builds a subset from 1-based target indices.
    pub fn from_targets(targets: &[usize]) -> Result<Subset> {
        let mut bits = 0u32;
        for &t in targets {
            if t == 0 || t > MAX_TARGETS {
                return Err(NasgError::InvalidInput(format!("target index {t} out of range")));
            }
            bits |= 1 << (t - 1);
        }
        Ok(Subset(bits))
    }

    /// `{i}` for a 1-based target.
    pub fn singleton(i: usize) -> Subset {
        debug_assert!((1..=MAX_TARGETS).contains(&i));
        Subset(1 << (i - 1))
    }

    /// `[n]`.
    pub fn full(n: usize) -> Subset {
        if n >= 32 {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << n) - 1)
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        (1..=MAX_TARGETS).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    #[inline]
    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    /// `self \ other`.
    #[inline]
    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    /// `[n] \ self`.
    #[inline]
    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Subset::full(n).0)
    }

    /// 1-based targets in ascending order.
    pub fn targets(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut bits = self.0;
        while bits != 0 {
            out.push(bits.trailing_zeros() as usize + 1);
            bits &= bits - 1;
        }
        out
    }

    /// Every subset of `self`, including `∅` and `self`, in descending
    /// bitmask order.
    pub fn submasks(self) -> Submasks {
        Submasks { full: self.0, next: Some(self.0) }
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.targets().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

pub struct Submasks {
    full: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == 0 { None } else { Some((cur - 1) & self.full) };
        Some(Subset(cur))
    }
}

/// The target set `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<GroundSet> {
        if n == 0 {
            return Err(NasgError::InvalidInput("ground set must be nonempty".into()));
        }
        if n > MAX_TARGETS {
            return Err(NasgError::Capacity(format!("ground set size {n} exceeds {MAX_TARGETS}")));
        }
        Ok(GroundSet { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.n)
    }

    pub fn contains(&self, s: Subset) -> bool {
        s.is_subset_of(self.full())
    }

    pub fn singletons(&self) -> impl Iterator<Item = Subset> {
        (1..=self.n).map(Subset::singleton)
    }

    /// Number of subsets with at most `cap` elements.
    pub fn count_up_to(&self, cap: usize) -> u128 {
        count_subsets_up_to(self.n, cap)
    }

    /// All subsets with at most `cap` elements, ascending by bitmask.
    pub fn subsets_up_to(&self, cap: usize) -> Vec<Subset> {
        let n = self.n;
        if cap >= n {
            return (0..1u64 << n).map(|b| Subset(b as u32)).collect();
        }
        let mut out = Vec::with_capacity(self.count_up_to(cap) as usize);
        self.for_each_up_to(cap, |s| out.push(s));
        out.sort_unstable();
        out
    }

    /// Visits every subset with at most `cap` elements without allocating.
    /// Order is ascending within each size, sizes ascending.
    pub fn for_each_up_to(&self, cap: usize, mut f: impl FnMut(Subset)) {
        let n = self.n;
        if cap >= n {
            for b in 0..1u64 << n {
                f(Subset(b as u32));
            }
            return;
        }
        f(Subset::EMPTY);
        for size in 1..=cap {
            // Gosper's hack over all `size`-element masks below 2^n.
            let mut v: u64 = (1 << size) - 1;
            while v < 1 << n {
                f(Subset(v as u32));
                let t = v | (v - 1);
                v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
            }
        }
    }

    fn require_dense(&self) -> Result<()> {
        if self.n > MAX_DENSE_TARGETS {
            return Err(NasgError::Capacity(format!(
                "dense transform needs n <= {MAX_DENSE_TARGETS}, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

pub fn count_subsets_up_to(n: usize, cap: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 0..=cap.min(n) {
        total += binom;
        binom = binom * (n - i) as u128 / (i + 1) as u128;
    }
    total
}

/// A real-valued function on subsets of the ground set. Subsets without a
/// stored entry evaluate to `default`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction<T = f64> {
    ground: GroundSet,
    entries: BTreeMap<Subset, T>,
    default: T,
}

impl<T: Scalar> SetFunction<T> {
    pub fn new(ground: GroundSet) -> Self {
        Self::with_default(ground, T::zero())
    }

    pub fn with_default(ground: GroundSet, default: T) -> Self {
        SetFunction { ground, entries: BTreeMap::new(), default }
    }

    /// Builds from a full table indexed by bitmask (length `2^n`).
    pub fn from_dense(ground: GroundSet, values: Vec<T>) -> Result<Self> {
        ground.require_dense()?;
        if values.len() != 1 << ground.n() {
            return Err(NasgError::DimensionMismatch { expected: 1 << ground.n(), got: values.len() });
        }
        let entries = values.into_iter().enumerate().map(|(b, v)| (Subset(b as u32), v)).collect();
        Ok(SetFunction { ground, entries, default: T::zero() })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn default_value(&self) -> &T {
        &self.default
    }

    pub fn set(&mut self, s: Subset, value: T) -> Result<()> {
        if !self.ground.contains(s) {
            return Err(NasgError::InvalidInput(format!("subset {s} outside ground set [{}]", self.ground.n())));
        }
        if !value.to_f64().is_finite() {
            return Err(NasgError::InvalidInput(format!("non-finite value at {s}")));
        }
        self.entries.insert(s, value);
        Ok(())
    }

    pub fn get(&self, s: Subset) -> T {
        self.entries.get(&s).cloned().unwrap_or_else(|| self.default.clone())
    }

    /// Explicitly stored entries, ascending by bitmask.
    pub fn entries(&self) -> impl Iterator<Item = (Subset, &T)> {
        self.entries.iter().map(|(s, v)| (*s, v))
    }

    pub fn stored_len(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Result<Vec<T>> {
        self.ground.require_dense()?;
        Ok((0..1u32 << self.ground.n()).map(|b| self.get(Subset(b))).collect())
    }

    fn validate_finite(&self) -> Result<()> {
        if !self.default.to_f64().is_finite() {
            return Err(NasgError::InvalidInput("non-finite default value".into()));
        }
        match self.entries.iter().find(|(_, v)| !v.to_f64().is_finite()) {
            Some((s, _)) => Err(NasgError::InvalidInput(format!("non-finite value at {s}"))),
            None => Ok(()),
        }
    }

    /// Largest absolute value over stored entries and the default.
    fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.to_f64().abs()).fold(self.default.to_f64().abs(), f64::max)
    }
}

impl SetFunction<f64> {
    /// The same function over exact rationals.
    pub fn to_exact(&self) -> SetFunction<BigRational> {
        let conv = |v: f64| <BigRational as Scalar>::from_f64(v).expect("finite values");
        SetFunction {
            ground: self.ground,
            entries: self.entries.iter().map(|(s, v)| (*s, conv(*v))).collect(),
            default: conv(self.default),
        }
    }
}

/// Sparse common utility `f^c`; absent subsets are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonUtility<T = f64> {
    ground: GroundSet,
    entries: BTreeMap<Subset, T>,
}

impl<T: Scalar> CommonUtility<T> {
    pub fn new(ground: GroundSet) -> Self {
        CommonUtility { ground, entries: BTreeMap::new() }
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn set(&mut self, s: Subset, value: T) -> Result<()> {
        if !self.ground.contains(s) {
            return Err(NasgError::InvalidInput(format!("subset {s} outside ground set [{}]", self.ground.n())));
        }
        if value.is_zero() {
            self.entries.remove(&s);
        } else {
            self.entries.insert(s, value);
        }
        Ok(())
    }

    pub fn get(&self, s: Subset) -> T {
        self.entries.get(&s).cloned().unwrap_or_else(T::zero)
    }

    /// Nonzero entries, ascending by bitmask.
    pub fn entries(&self) -> impl Iterator<Item = (Subset, &T)> {
        self.entries.iter().map(|(s, v)| (*s, v))
    }

    pub fn support(&self) -> impl Iterator<Item = Subset> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Zeroes every entry with `|value| <= eps`. Returns the number of
    /// nonzero entries removed.
    pub fn truncate_below(&mut self, eps: &T) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, v| v.abs_val() > *eps);
        before - self.entries.len()
    }

    fn from_table(ground: GroundSet, family: &[Subset], values: Vec<T>, cutoff: f64) -> Self {
        let cutoff = T::tolerance(cutoff);
        let entries = family
            .iter()
            .zip(values)
            .filter(|(_, v)| !v.is_zero() && v.abs_val() >= cutoff)
            .map(|(s, v)| (*s, v))
            .collect();
        CommonUtility { ground, entries }
    }
}

/// In-place Möbius transform of a full `2^n` table.
pub fn moebius_in_place<T: Scalar>(values: &mut [T]) {
    let size = values.len();
    debug_assert!(size.is_power_of_two());
    let mut bit = 1;
    while bit < size {
        for mask in 0..size {
            if mask & bit != 0 {
                let lower = values[mask ^ bit].clone();
                values[mask] -= lower;
            }
        }
        bit <<= 1;
    }
}

/// In-place zeta (subset-sum) transform of a full `2^n` table.
pub fn zeta_in_place<T: Scalar>(values: &mut [T]) {
    let size = values.len();
    debug_assert!(size.is_power_of_two());
    let mut bit = 1;
    while bit < size {
        for mask in 0..size {
            if mask & bit != 0 {
                let lower = values[mask ^ bit].clone();
                values[mask] += lower;
            }
        }
        bit <<= 1;
    }
}

/// Same scan on a downward-closed family (ascending bitmask order).
fn lattice_scan<T: Scalar>(values: &mut [T], family: &[Subset], n: usize, subtract: bool) {
    let index: HashMap<u32, usize> = family.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
    for b in 0..n {
        let bit = 1u32 << b;
        for (pos, s) in family.iter().enumerate() {
            if s.0 & bit != 0 {
                let lower = values[index[&(s.0 ^ bit)]].clone();
                if subtract {
                    values[pos] -= lower;
                } else {
                    values[pos] += lower;
                }
            }
        }
    }
}

/// Common utility over the full lattice: `f^c(U) = Σ_{V⊆U} (-1)^{|U\V|} f(V)`.
pub fn moebius<T: Scalar>(f: &SetFunction<T>) -> Result<CommonUtility<T>> {
    moebius_with(f, DEFAULT_ZERO_THRESHOLD)
}

/// [`moebius`] with an explicit relative zero threshold.
pub fn moebius_with<T: Scalar>(f: &SetFunction<T>, zero_threshold: f64) -> Result<CommonUtility<T>> {
    f.validate_finite()?;
    let mut table = f.to_dense()?;
    let cutoff = zero_threshold * f.max_abs();
    moebius_in_place(&mut table);
    let family: Vec<Subset> = (0..table.len() as u32).map(Subset).collect();
    Ok(CommonUtility::from_table(f.ground, &family, table, cutoff))
}

/// Common utility restricted to subsets of size `<= cap`. Those values only
/// depend on `f` over the same subsets, so the full lattice is never built.
pub fn moebius_capped<T: Scalar>(f: &SetFunction<T>, cap: usize, zero_threshold: f64) -> Result<CommonUtility<T>> {
    let ground = f.ground;
    if cap >= ground.n() {
        return moebius_with(f, zero_threshold);
    }
    f.validate_finite()?;
    check_lattice(ground, cap)?;
    let family = ground.subsets_up_to(cap);
    let mut table: Vec<T> = family.iter().map(|s| f.get(*s)).collect();
    let cutoff = zero_threshold * table.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    lattice_scan(&mut table, &family, ground.n(), true);
    Ok(CommonUtility::from_table(ground, &family, table, cutoff))
}

/// Inverse of [`moebius`]: `f(U) = Σ_{V⊆U} f^c(V)` on the full lattice.
pub fn zeta<T: Scalar>(fc: &CommonUtility<T>) -> Result<SetFunction<T>> {
    let ground = fc.ground;
    ground.require_dense()?;
    let mut table = vec![T::zero(); 1 << ground.n()];
    for (s, v) in fc.entries() {
        table[s.0 as usize] = v.clone();
    }
    zeta_in_place(&mut table);
    SetFunction::from_dense(ground, table)
}

/// Zeta transform evaluated only on subsets of size `<= cap`; the result
/// stores exactly those subsets.
pub fn zeta_capped<T: Scalar>(fc: &CommonUtility<T>, cap: usize) -> Result<SetFunction<T>> {
    let ground = fc.ground;
    if cap >= ground.n() {
        return zeta(fc);
    }
    check_lattice(ground, cap)?;
    let family = ground.subsets_up_to(cap);
    let mut table: Vec<T> = family.iter().map(|s| fc.get(*s)).collect();
    lattice_scan(&mut table, &family, ground.n(), false);
    let mut out = SetFunction::new(ground);
    out.entries = family.into_iter().zip(table).collect();
    Ok(out)
}

fn check_lattice(ground: GroundSet, cap: usize) -> Result<()> {
    let count = ground.count_up_to(cap);
    if count > MAX_LATTICE {
        return Err(NasgError::Capacity(format!(
            "{count} subsets of size <= {cap} over {} targets exceeds {MAX_LATTICE}",
            ground.n()
        )));
    }
    Ok(())
}

/// Drops stored entries on subsets larger than `cap`. The default is
/// cleared to zero when `cap < n`, so dropped subsets read as zero.
pub fn restrict_cardinality<T: Scalar>(f: &SetFunction<T>, cap: usize) -> SetFunction<T> {
    if cap >= f.ground.n() {
        return f.clone();
    }
    let entries = f.entries.iter().filter(|(s, _)| s.len() <= cap).map(|(s, v)| (*s, v.clone())).collect();
    let mut out = SetFunction { ground: f.ground, entries, default: T::zero() };
    // Subsets of size <= cap that relied on the default keep their value.
    if !f.default.is_zero() {
        for s in f.ground.subsets_up_to(cap) {
            out.entries.entry(s).or_insert_with(|| f.default.clone());
        }
    }
    out
}

/// Common utility of the reflected function `W ↦ f(W^c)` given `f^c`.
///
/// Uses `ĝ^c(T) = (-1)^{|T|} Σ_{V⊇T} f^c(V)`, so the result is supported on
/// the down-closure of `supp(f^c)` and never touches the full lattice.
pub fn reflect<T: Scalar>(fc: &CommonUtility<T>, zero_threshold: f64) -> CommonUtility<T> {
    let mut acc: BTreeMap<Subset, T> = BTreeMap::new();
    let mut scale = 0.0f64;
    for (v, value) in fc.entries() {
        scale = scale.max(value.to_f64().abs());
        for t in v.submasks() {
            let term = if t.len() % 2 == 0 { value.clone() } else { -value.clone() };
            *acc.entry(t).or_insert_with(T::zero) += term;
        }
    }
    let cutoff = T::tolerance(zero_threshold * scale);
    acc.retain(|_, v| !v.is_zero() && v.abs_val() >= cutoff);
    CommonUtility { ground: fc.ground, entries: acc }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(t: &[usize]) -> Subset {
        Subset::from_targets(t).unwrap()
    }

    fn n2_example() -> SetFunction {
        let g = GroundSet::new(2).unwrap();
        SetFunction::from_dense(g, vec![0.0, 1.0, 2.0, 5.0]).unwrap()
    }

    /// Direct summation of the alternating-sign definition.
    fn moebius_naive(f: &SetFunction) -> Vec<f64> {
        let n = f.ground().n();
        (0..1u32 << n)
            .map(|u| {
                Subset(u)
                    .submasks()
                    .map(|v| {
                        let sign = if (u & !v.0).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        sign * f.get(v)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn subset_basics() {
        let a = s(&[1, 3]);
        assert_eq!(a.bits(), 0b101);
        assert_eq!(a.targets(), vec![1, 3]);
        assert_eq!(a.complement(3), s(&[2]));
        assert_eq!(a.to_string(), "{1,3}");
        assert_eq!(a.submasks().count(), 4);
        assert!(Subset::from_targets(&[0]).is_err());
    }

    #[test]
    fn subsets_up_to_is_sorted_and_counted() {
        let g = GroundSet::new(6).unwrap();
        for cap in 0..=6 {
            let all = g.subsets_up_to(cap);
            assert_eq!(all.len() as u128, g.count_up_to(cap));
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            assert!(all.iter().all(|x| x.len() <= cap));
        }
    }

    #[test]
    fn moebius_n2_example() {
        let fc = moebius(&n2_example()).unwrap();
        assert_eq!(fc.get(Subset::EMPTY), 0.0);
        assert_eq!(fc.get(s(&[1])), 1.0);
        assert_eq!(fc.get(s(&[2])), 2.0);
        assert_eq!(fc.get(s(&[1, 2])), 2.0);
        assert_eq!(fc.len(), 3);
    }

    #[test]
    fn moebius_of_additive_is_singletons() {
        let g = GroundSet::new(4).unwrap();
        let r = [1.5, -2.0, 0.0, 3.0];
        let table = (0..16u32).map(|b| Subset(b).targets().iter().map(|t| r[t - 1]).sum::<f64>()).collect();
        let fc = moebius(&SetFunction::from_dense(g, table).unwrap()).unwrap();
        let support: Vec<_> = fc.support().collect();
        assert_eq!(support, vec![s(&[1]), s(&[2]), s(&[4])]);
        assert_eq!(fc.get(s(&[2])), -2.0);
    }

    #[test]
    fn moebius_of_constant() {
        let g = GroundSet::new(3).unwrap();
        let fc = moebius(&SetFunction::with_default(g, 7.0)).unwrap();
        assert_eq!(fc.support().collect::<Vec<_>>(), vec![Subset::EMPTY]);
        assert_eq!(fc.get(Subset::EMPTY), 7.0);
    }

    #[test]
    fn zeta_examples() {
        let fc = moebius(&n2_example()).unwrap();
        assert_eq!(zeta(&fc).unwrap(), n2_example());

        let g = GroundSet::new(2).unwrap();
        let zero = zeta(&CommonUtility::<f64>::new(g)).unwrap();
        assert!(zero.to_dense().unwrap().iter().all(|v| *v == 0.0));

        let mut fc = CommonUtility::new(g);
        fc.set(s(&[1]), 1.0).unwrap();
        fc.set(s(&[1, 2]), -2.0).unwrap();
        assert_eq!(zeta(&fc).unwrap().get(s(&[1, 2])), -1.0);
    }

    #[test]
    fn restrict_cardinality_examples() {
        let f = n2_example();
        assert_eq!(restrict_cardinality(&f, 2), f);
        let r1 = restrict_cardinality(&f, 1);
        assert_eq!(r1.entries().map(|(s, _)| s).collect::<Vec<_>>(), vec![Subset(0), Subset(1), Subset(2)]);
        assert_eq!(r1.get(s(&[1, 2])), 0.0);
        let r0 = restrict_cardinality(&f, 0);
        assert_eq!(r0.stored_len(), 1);
    }

    #[test]
    fn errors() {
        let g = GroundSet::new(25).unwrap();
        assert!(matches!(moebius(&SetFunction::<f64>::new(g)), Err(NasgError::Capacity(_))));
        let mut f = SetFunction::new(GroundSet::new(2).unwrap());
        assert!(f.set(Subset(1), f64::NAN).is_err());
        let bad = SetFunction::with_default(GroundSet::new(2).unwrap(), f64::INFINITY);
        assert!(matches!(moebius(&bad), Err(NasgError::InvalidInput(_))));
        assert!(GroundSet::new(31).is_err());
    }

    #[test]
    fn capped_transform_matches_dense_on_small_sets() {
        let g = GroundSet::new(6).unwrap();
        let table: Vec<f64> = (0..64).map(|b| ((b * 37 + 11) % 17) as f64 - 8.0).collect();
        let f = SetFunction::from_dense(g, table).unwrap();
        let full = moebius(&f).unwrap();
        for cap in 0..6 {
            let capped = moebius_capped(&f, cap, DEFAULT_ZERO_THRESHOLD).unwrap();
            for u in g.subsets_up_to(cap) {
                assert_eq!(capped.get(u), full.get(u));
            }
            assert!(capped.support().all(|u| u.len() <= cap));
            let back = zeta_capped(&capped, cap).unwrap();
            for u in g.subsets_up_to(cap) {
                assert!((back.get(u) - f.get(u)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflect_matches_dense_transform() {
        let g = GroundSet::new(5).unwrap();
        let table: Vec<f64> = (0..32).map(|b| ((b * 13 + 5) % 11) as f64 * 0.5).collect();
        let f = SetFunction::from_dense(g, table).unwrap();
        let reflected_table = (0..32u32).map(|w| f.get(Subset(w).complement(5))).collect();
        let direct = moebius(&SetFunction::from_dense(g, reflected_table).unwrap()).unwrap();
        let via = reflect(&moebius(&f).unwrap(), DEFAULT_ZERO_THRESHOLD);
        for u in 0..32u32 {
            assert!((direct.get(Subset(u)) - via.get(Subset(u))).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_mode_roundtrip() {
        let g = GroundSet::new(4).unwrap();
        let table: Vec<f64> = (0..16).map(|b| 0.1 * b as f64 + 1.0 / 3.0).collect();
        let f = SetFunction::from_dense(g, table).unwrap().to_exact();
        let back = zeta(&moebius(&f).unwrap()).unwrap();
        assert_eq!(back.to_dense().unwrap(), f.to_dense().unwrap());
    }

    proptest! {
        #[test]
        fn matches_naive_definition(n in 1usize..7, seed in proptest::collection::vec(-5.0f64..5.0, 64)) {
            let g = GroundSet::new(n).unwrap();
            let f = SetFunction::from_dense(g, seed[..1 << n].to_vec()).unwrap();
            let fc = moebius_with(&f, 0.0).unwrap();
            for (u, expected) in moebius_naive(&f).into_iter().enumerate() {
                prop_assert!((fc.get(Subset(u as u32)) - expected).abs() < 1e-9);
            }
        }

        #[test]
        fn roundtrip_and_linearity(
            n in 1usize..9,
            a in proptest::collection::vec(-10.0f64..10.0, 256),
            b in proptest::collection::vec(-10.0f64..10.0, 256),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let g = GroundSet::new(n).unwrap();
            let size = 1 << n;
            let f = SetFunction::from_dense(g, a[..size].to_vec()).unwrap();
            let h = SetFunction::from_dense(g, b[..size].to_vec()).unwrap();
            let back = zeta(&moebius(&f).unwrap()).unwrap();
            for u in 0..size as u32 {
                prop_assert!((back.get(Subset(u)) - f.get(Subset(u))).abs() < 1e-9);
            }
            let combo: Vec<f64> = (0..size).map(|i| alpha * a[i] + beta * b[i]).collect();
            let lhs = moebius_with(&SetFunction::from_dense(g, combo).unwrap(), 0.0).unwrap();
            let fc = moebius_with(&f, 0.0).unwrap();
            let hc = moebius_with(&h, 0.0).unwrap();
            for u in 0..size as u32 {
                let u = Subset(u);
                prop_assert!((lhs.get(u) - (alpha * fc.get(u) + beta * hc.get(u))).abs() < 1e-8);
            }
        }
    }
}
