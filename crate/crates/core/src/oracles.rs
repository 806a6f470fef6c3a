//! Best-response oracles over the compact polytopes.
//!
//! The defender oracle maximizes `Σ_U w_U·[U ∩ D = ∅]` over `|D| <= k`; with
//! `x_i = 1` meaning target `i` is left undefended this is the pseudo-boolean
//! program `max Σ_V w_V Π_{i∈V} x_i` subject to `Σ x_i >= n - k`. The attacker
//! oracle maximizes `Σ_U w_U·[U ⊆ A]` over `|A| <= c`.
//!
//! Every method breaks exact ties toward the smallest bitmask.

use std::fmt;
use std::str::FromStr;

use crate::error::{NasgError, Result};
use crate::geometry::{embed_attacker, embed_defender, CompactVertex, SupportSet};
use crate::setfn::{GroundSet, Subset};

/// Largest strategy space enumerated exhaustively by an oracle.
pub const MAX_ENUMERATION: u128 = 1 << 25;
/// Largest component handled by [`solve_separable`].
pub const MAX_COMPONENT: usize = 25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OracleMethod {
    #[default]
    Auto,
    Bruteforce,
    Separable,
    Additive,
}

impl FromStr for OracleMethod {
    type Err = NasgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(OracleMethod::Auto),
            "bruteforce" => Ok(OracleMethod::Bruteforce),
            "separable" => Ok(OracleMethod::Separable),
            "additive" => Ok(OracleMethod::Additive),
            other => Err(NasgError::InvalidInput(format!("unknown oracle method {other:?}"))),
        }
    }
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OracleMethod::Auto => "auto",
            OracleMethod::Bruteforce => "bruteforce",
            OracleMethod::Separable => "separable",
            OracleMethod::Additive => "additive",
        };
        f.write_str(s)
    }
}

/// Linear objective over a compact polytope plus the cardinality cap of the
/// player being optimized.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleQuery {
    pub weights: Vec<f64>,
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub set: Subset,
    pub value: f64,
    pub vertex: CompactVertex,
}

fn check_query(q: &OracleQuery, support: &SupportSet) -> Result<()> {
    if q.weights.len() != support.len() {
        return Err(NasgError::DimensionMismatch { expected: support.len(), got: q.weights.len() });
    }
    if q.weights.iter().any(|w| !w.is_finite()) {
        return Err(NasgError::InvalidInput("non-finite oracle weight".into()));
    }
    if q.cap > support.ground().n() {
        return Err(NasgError::InvalidInput(format!("cap {} exceeds n={}", q.cap, support.ground().n())));
    }
    Ok(())
}

fn tie_tolerance(weights: &[f64]) -> f64 {
    1e-12 * (1.0 + weights.iter().map(|w| w.abs()).sum::<f64>())
}

/// Running argmax with smallest-bitmask tie-breaking.
struct Best {
    set: Subset,
    value: f64,
    tol: f64,
}

impl Best {
    fn new(tol: f64) -> Self {
        Best { set: Subset(u32::MAX), value: f64::NEG_INFINITY, tol }
    }

    fn offer(&mut self, set: Subset, value: f64) {
        if value > self.value + self.tol || ((value - self.value).abs() <= self.tol && set < self.set) {
            self.set = set;
            self.value = value;
        }
    }
}

/// `Σ_U w_U·[U ∩ d = ∅]`.
pub fn defender_objective(weights: &[f64], support: &SupportSet, d: Subset) -> f64 {
    support.members().iter().zip(weights).filter(|(u, _)| u.is_disjoint(d)).map(|(_, w)| w).sum()
}

/// `Σ_U w_U·[U ⊆ a]`.
pub fn attacker_objective(weights: &[f64], support: &SupportSet, a: Subset) -> f64 {
    support.members().iter().zip(weights).filter(|(u, _)| u.is_subset_of(a)).map(|(_, w)| w).sum()
}

fn check_enumeration(ground: GroundSet, cap: usize) -> Result<()> {
    let count = ground.count_up_to(cap);
    if count > MAX_ENUMERATION {
        return Err(NasgError::Capacity(format!("{count} strategies exceed enumeration limit {MAX_ENUMERATION}")));
    }
    Ok(())
}

pub fn defender_oracle(q: &OracleQuery, support: &SupportSet, method: OracleMethod) -> Result<OracleResult> {
    check_query(q, support)?;
    let set = match method {
        OracleMethod::Bruteforce => defender_bruteforce(q, support)?,
        OracleMethod::Additive => defender_additive(q, support)?,
        OracleMethod::Separable => separable_defense(q, support)?,
        OracleMethod::Auto => {
            if additive_applies(q, support) {
                defender_additive(q, support)?
            } else {
                match separable_defense(q, support) {
                    Ok(set) => set,
                    Err(NasgError::OracleMismatch(_)) | Err(NasgError::Capacity(_)) => defender_bruteforce(q, support)?,
                    Err(e) => return Err(e),
                }
            }
        }
    };
    Ok(OracleResult { set, value: defender_objective(&q.weights, support, set), vertex: embed_defender(set, support)? })
}

fn defender_bruteforce(q: &OracleQuery, support: &SupportSet) -> Result<Subset> {
    let ground = support.ground();
    check_enumeration(ground, q.cap)?;
    let mut best = Best::new(tie_tolerance(&q.weights));
    ground.for_each_up_to(q.cap, |d| best.offer(d, defender_objective(&q.weights, support, d)));
    Ok(best.set)
}

fn additive_applies(q: &OracleQuery, support: &SupportSet) -> bool {
    support.members().iter().zip(&q.weights).all(|(u, w)| u.len() <= 1 || *w == 0.0)
}

/// Defends the (at most `k`) most negative singleton weights.
fn defender_additive(q: &OracleQuery, support: &SupportSet) -> Result<Subset> {
    if !additive_applies(q, support) {
        return Err(NasgError::OracleMismatch("additive oracle needs a singleton-only support".into()));
    }
    let n = support.ground().n();
    let mut negative: Vec<(f64, usize)> = (1..=n)
        .map(|i| (q.weights[support.singleton_position(i)], i))
        .filter(|(w, _)| *w < 0.0)
        .collect();
    negative.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut d = Subset::EMPTY;
    for (_, i) in negative.into_iter().take(q.cap) {
        d = d.union(Subset::singleton(i));
    }
    Ok(d)
}

fn separable_defense(q: &OracleQuery, support: &SupportSet) -> Result<Subset> {
    let problem = to_pseudo_boolean(q, support);
    let active: Vec<Subset> = problem.terms.iter().filter(|(_, w)| *w != 0.0).map(|(v, _)| *v).collect();
    let components = disjoint_components(&active);
    Ok(solve_separable(&problem, &components)?.ones.complement(problem.n))
}

/// Attacker best response by enumeration of every `|A| <= cap`.
pub fn attacker_oracle(q: &OracleQuery, support: &SupportSet) -> Result<OracleResult> {
    check_query(q, support)?;
    let ground = support.ground();
    check_enumeration(ground, q.cap)?;
    let mut best = Best::new(tie_tolerance(&q.weights));
    ground.for_each_up_to(q.cap, |a| best.offer(a, attacker_objective(&q.weights, support, a)));
    let set = best.set;
    Ok(OracleResult { set, value: attacker_objective(&q.weights, support, set), vertex: embed_attacker(set, support)? })
}

/// `max Σ_V w_V Π_{i∈V} x_i` over `x ∈ {0,1}^n` with at least `min_ones`
/// ones; `x_i = 1` means target `i` is undefended.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoBooleanProblem {
    pub terms: Vec<(Subset, f64)>,
    pub n: usize,
    pub min_ones: usize,
}

/// Assignment given by its set of ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbSolution {
    pub ones: Subset,
    pub value: f64,
}

impl PbSolution {
    /// `x` as a 0/1 vector indexed by target `1..=n`.
    pub fn x(&self, n: usize) -> Vec<u8> {
        (1..=n).map(|i| u8::from(self.ones.contains(i))).collect()
    }
}

impl PseudoBooleanProblem {
    pub fn evaluate(&self, ones: Subset) -> f64 {
        self.terms.iter().filter(|(v, _)| v.is_subset_of(ones)).map(|(_, w)| w).sum()
    }

    /// Largest term size with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|(_, w)| *w != 0.0).map(|(v, _)| v.len()).max().unwrap_or(0)
    }

    /// Exhaustive maximization with the shared tie-break on the zero set.
    pub fn maximize_bruteforce(&self) -> Result<PbSolution> {
        let ground = GroundSet::new(self.n)?;
        let k = self.n - self.min_ones;
        check_enumeration(ground, k)?;
        let weights: Vec<f64> = self.terms.iter().map(|(_, w)| *w).collect();
        let mut best = Best::new(tie_tolerance(&weights));
        ground.for_each_up_to(k, |zeros| best.offer(zeros, self.evaluate(zeros.complement(self.n))));
        let ones = best.set.complement(self.n);
        Ok(PbSolution { ones, value: self.evaluate(ones) })
    }
}

pub fn to_pseudo_boolean(q: &OracleQuery, support: &SupportSet) -> PseudoBooleanProblem {
    let n = support.ground().n();
    PseudoBooleanProblem {
        terms: support.members().iter().copied().zip(q.weights.iter().copied()).collect(),
        n,
        min_ones: n - q.cap.min(n),
    }
}

/// A block of a separable support: its members and the union of their
/// targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub targets: Subset,
    pub members: Vec<Subset>,
}

/// Groups the nonempty `members` into classes whose target unions are
/// pairwise disjoint (union-find over shared targets). Components are
/// ordered by their smallest target.
pub fn disjoint_components(members: &[Subset]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..32).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let mut used = 0u32;
    for m in members.iter().filter(|m| !m.is_empty()) {
        used |= m.0;
        let first = m.0.trailing_zeros() as usize;
        let mut bits = m.0 & (m.0 - 1);
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            let (ra, rb) = (find(&mut parent, first), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
            bits &= bits - 1;
        }
    }
    let mut by_root: Vec<Option<Component>> = vec![None; 32];
    for b in 0..32 {
        if used & (1 << b) != 0 {
            let r = find(&mut parent, b);
            let c = by_root[r].get_or_insert_with(|| Component { targets: Subset::EMPTY, members: Vec::new() });
            c.targets = c.targets.union(Subset(1 << b));
        }
    }
    for m in members.iter().filter(|m| !m.is_empty()) {
        let r = find(&mut parent, m.0.trailing_zeros() as usize);
        if let Some(c) = by_root[r].as_mut() {
            if !c.members.contains(m) {
                c.members.push(*m);
            }
        }
    }
    let mut out: Vec<Component> = by_root.into_iter().flatten().collect();
    out.sort_by_key(|c| c.targets.0.trailing_zeros());
    out
}

/// Maximizes a pseudo-boolean program whose terms split over disjoint
/// components by enumerating each component independently.
///
/// Fails with a partition error when the components overlap or miss a
/// nonzero term, and with an oracle mismatch when the per-component optima
/// together zero out more than `n - min_ones` variables.
pub fn solve_separable(p: &PseudoBooleanProblem, components: &[Component]) -> Result<PbSolution> {
    let mut seen = Subset::EMPTY;
    for c in components {
        if !c.targets.is_disjoint(seen) {
            return Err(NasgError::Partition(format!("component {} overlaps another", c.targets)));
        }
        if c.members.iter().any(|m| !m.is_subset_of(c.targets)) {
            return Err(NasgError::Partition(format!("component {} has a member outside it", c.targets)));
        }
        if c.targets.len() > MAX_COMPONENT {
            return Err(NasgError::Capacity(format!(
                "component of {} targets exceeds {MAX_COMPONENT}",
                c.targets.len()
            )));
        }
        seen = seen.union(c.targets);
    }
    let mut blocks: Vec<Vec<(Subset, f64)>> = vec![Vec::new(); components.len()];
    for &(v, w) in &p.terms {
        if v.is_empty() || w == 0.0 {
            continue;
        }
        match components.iter().position(|c| v.is_subset_of(c.targets)) {
            Some(i) => blocks[i].push((v, w)),
            None => return Err(NasgError::Partition(format!("term {v} not covered by any component"))),
        }
    }
    let weights: Vec<f64> = p.terms.iter().map(|(_, w)| *w).collect();
    let tol = tie_tolerance(&weights);
    let mut zeros = Subset::EMPTY;
    for (c, terms) in components.iter().zip(&blocks) {
        let mut best = Best::new(tol);
        for d in c.targets.submasks() {
            let v: f64 = terms.iter().filter(|(u, _)| u.is_disjoint(d)).map(|(_, w)| w).sum();
            best.offer(d, v);
        }
        zeros = zeros.union(best.set);
    }
    if zeros.len() > p.n - p.min_ones {
        return Err(NasgError::OracleMismatch(format!(
            "cardinality bound couples components ({} zeros, at most {} allowed)",
            zeros.len(),
            p.n - p.min_ones
        )));
    }
    let ones = zeros.complement(p.n);
    Ok(PbSolution { ones, value: p.evaluate(ones) })
}
