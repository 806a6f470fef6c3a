//! Compact coordinates.
//!
//! A pure attack `A` embeds as the 0/1 vector `[U ⊆ A]` over the support set
//! and a pure defense `D` as `[U ∩ D = ∅]`. Mixtures embed as expectations of
//! those vectors, and the zero-sum payoff is bilinear in the two embeddings:
//!
//! ```text
//! value(pa, qd) = Σ_U B^c(U)·pa[U]·qd[U] - Σ_U C_a^c(U)·pa[U] + Σ_U Ĉ_d^c(U)·qd[U]
//! ```
//!
//! where `Ĉ_d(W) = C_d([n] \ W)` is the reflected defender cost.

use std::collections::HashMap;

use crate::error::{NasgError, Result};
use crate::lp::{feasibility_lp, Constraint, LinearProgram, LpOutcome, Relation, Tolerances};
use crate::model::{GameSpec, MixedStrategy};
use crate::setfn::{self, CommonUtility, GroundSet, Subset, DEFAULT_ZERO_THRESHOLD};

/// Tolerance for 0/1 coordinates of a vertex.
pub const VERTEX_TOLERANCE: f64 = 1e-9;
/// Reconstruction tolerance of [`caratheodory_decompose`].
pub const HULL_TOLERANCE: f64 = 1e-7;

/// Ordered support set. Always contains `∅` and every singleton.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    ground: GroundSet,
    members: Vec<Subset>,
    index: HashMap<Subset, usize>,
    singleton_pos: Vec<usize>,
}

impl SupportSet {
    /// `extra ∪ {∅} ∪ {{1}, ..., {n}}`, ascending by bitmask.
    pub fn new(ground: GroundSet, extra: impl IntoIterator<Item = Subset>) -> Result<Self> {
        let mut members: Vec<Subset> = extra.into_iter().collect();
        if let Some(bad) = members.iter().find(|s| !ground.contains(**s)) {
            return Err(NasgError::InvalidInput(format!("support member {bad} outside [{}]", ground.n())));
        }
        members.push(Subset::EMPTY);
        members.extend(ground.singletons());
        members.sort_unstable();
        members.dedup();
        let index: HashMap<Subset, usize> = members.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let singleton_pos = ground.singletons().map(|s| index[&s]).collect();
        Ok(SupportSet { ground, members, index, singleton_pos })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, s: Subset) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Position of `{i}` for a 1-based target.
    pub fn singleton_position(&self, i: usize) -> usize {
        self.singleton_pos[i - 1]
    }

    /// True when every member is `∅` or a singleton.
    pub fn is_additive(&self) -> bool {
        self.members.iter().all(|s| s.len() <= 1)
    }
}

/// Embedding of a pure strategy; `origin` is the strategy itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactVertex {
    pub coords: Vec<f64>,
    pub origin: Subset,
}

impl CompactVertex {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.coords.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

/// `coords[U] = [U ⊆ a]`.
pub fn embed_attacker(a: Subset, support: &SupportSet) -> Result<CompactVertex> {
    if !support.ground.contains(a) {
        return Err(NasgError::InvalidStrategy(format!("attack {a} outside [{}]", support.ground.n())));
    }
    let coords = support.members.iter().map(|u| if u.is_subset_of(a) { 1.0 } else { 0.0 }).collect();
    Ok(CompactVertex { coords, origin: a })
}

/// `coords[U] = [U ∩ d = ∅]`.
pub fn embed_defender(d: Subset, support: &SupportSet) -> Result<CompactVertex> {
    if !support.ground.contains(d) {
        return Err(NasgError::InvalidStrategy(format!("defense {d} outside [{}]", support.ground.n())));
    }
    let coords = support.members.iter().map(|u| if u.is_disjoint(d) { 1.0 } else { 0.0 }).collect();
    Ok(CompactVertex { coords, origin: d })
}

/// Recovers the defense behind a defender vertex from its singleton
/// coordinates alone: targets whose coordinate is zero are defended.
pub fn vertex_to_strategy(coords: &[f64], support: &SupportSet) -> Result<Subset> {
    if coords.len() != support.len() {
        return Err(NasgError::DimensionMismatch { expected: support.len(), got: coords.len() });
    }
    let mut defended = 0u32;
    for (b, &pos) in support.singleton_pos.iter().enumerate() {
        let x = coords[pos];
        if x.abs() <= VERTEX_TOLERANCE {
            defended |= 1 << b;
        } else if (x - 1.0).abs() > VERTEX_TOLERANCE {
            return Err(NasgError::InvalidVertex(format!("coordinate {x} at {{{}}} is not 0/1", b + 1)));
        }
    }
    Ok(Subset(defended))
}

/// The three common-utility vectors that define the bilinear payoff.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactGame {
    pub support: SupportSet,
    pub bc: Vec<f64>,
    pub cac: Vec<f64>,
    /// Common utility of the reflected defender cost.
    pub cdc: Vec<f64>,
    pub attacker_cap: usize,
    pub defender_cap: usize,
}

impl CompactGame {
    pub fn from_spec(spec: &GameSpec) -> Result<Self> {
        Self::from_spec_with(spec, DEFAULT_ZERO_THRESHOLD)
    }

    pub fn from_spec_with(spec: &GameSpec, zero_threshold: f64) -> Result<Self> {
        let (bc, cac, cdc) = common_utilities(spec, zero_threshold)?;
        let members = bc.support().chain(cac.support()).chain(cdc.support()).collect::<Vec<_>>();
        let support = SupportSet::new(spec.ground(), members)?;
        let project = |f: &CommonUtility| support.members.iter().map(|u| f.get(*u)).collect::<Vec<_>>();
        Ok(CompactGame {
            bc: project(&bc),
            cac: project(&cac),
            cdc: project(&cdc),
            support,
            attacker_cap: spec.attacker_cap(),
            defender_cap: spec.defender_cap(),
        })
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn embed_attacker(&self, a: Subset) -> Result<CompactVertex> {
        if a.len() > self.attacker_cap {
            return Err(NasgError::InvalidStrategy(format!("attack {a} exceeds cap {}", self.attacker_cap)));
        }
        embed_attacker(a, &self.support)
    }

    pub fn embed_defender(&self, d: Subset) -> Result<CompactVertex> {
        if d.len() > self.defender_cap {
            return Err(NasgError::InvalidStrategy(format!("defense {d} exceeds cap {}", self.defender_cap)));
        }
        embed_defender(d, &self.support)
    }

    /// Compact payoff of a pure pair without materializing vertices.
    pub fn pure_value(&self, a: Subset, d: Subset) -> f64 {
        let mut v = 0.0;
        for (i, u) in self.support.members.iter().enumerate() {
            let hit = u.is_subset_of(a);
            let open = u.is_disjoint(d);
            if hit && open {
                v += self.bc[i];
            }
            if hit {
                v -= self.cac[i];
            }
            if open {
                v += self.cdc[i];
            }
        }
        v
    }

    /// `pa[U] = Pr[U ⊆ A]` under the attacker mixture.
    pub fn attacker_marginals(&self, p: &MixedStrategy) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (a, w) in p.atoms() {
            for (i, u) in self.support.members.iter().enumerate() {
                if u.is_subset_of(*a) {
                    out[i] += w;
                }
            }
        }
        out
    }

    /// `qd[U] = Pr[U ∩ D = ∅]` under the defender mixture.
    pub fn defender_marginals(&self, q: &MixedStrategy) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (d, w) in q.atoms() {
            for (i, u) in self.support.members.iter().enumerate() {
                if u.is_disjoint(*d) {
                    out[i] += w;
                }
            }
        }
        out
    }
}

/// `(B^c, C_a^c, Ĉ_d^c)`. Benefit and attacker cost are transformed on
/// subsets of size `<= c`, the defender cost on subsets of size `<= k` and
/// then reflected.
pub fn common_utilities(spec: &GameSpec, zero_threshold: f64) -> Result<(CommonUtility, CommonUtility, CommonUtility)> {
    let c = spec.attacker_cap();
    let bc = setfn::moebius_capped(spec.benefit(), c, zero_threshold)?;
    let cac = setfn::moebius_capped(spec.cost_attacker(), c, zero_threshold)?;
    let cdc = setfn::moebius_capped(spec.cost_defender(), spec.defender_cap(), zero_threshold)?;
    Ok((bc, cac, setfn::reflect(&cdc, zero_threshold)))
}

pub fn build_support(spec: &GameSpec) -> Result<SupportSet> {
    Ok(CompactGame::from_spec(spec)?.support)
}

/// Bilinear compact payoff; the three sums are the diagonal benefit term,
/// the attacker-cost term and the defender-cost term.
pub fn compact_value(g: &CompactGame, pa: &[f64], qd: &[f64]) -> Result<f64> {
    let dim = g.dim();
    for len in [pa.len(), qd.len()] {
        if len != dim {
            return Err(NasgError::DimensionMismatch { expected: dim, got: len });
        }
    }
    let mut v = 0.0;
    for i in 0..dim {
        v += g.bc[i] * pa[i] * qd[i] - g.cac[i] * pa[i] + g.cdc[i] * qd[i];
    }
    Ok(v)
}

/// Writes `x` as a convex combination of `vertices` using a basic feasible
/// solution of `Σ λ_j v_j = x, Σ λ_j = 1, λ >= 0`, so at most `dim + 1`
/// weights are positive.
pub fn caratheodory_decompose(x: &[f64], vertices: &[CompactVertex]) -> Result<Vec<(f64, CompactVertex)>> {
    let dim = x.len();
    if vertices.is_empty() {
        return Err(NasgError::InvalidInput("no vertices to decompose over".into()));
    }
    if let Some(v) = vertices.iter().find(|v| v.coords.len() != dim) {
        return Err(NasgError::DimensionMismatch { expected: dim, got: v.coords.len() });
    }
    let mut constraints: Vec<Constraint> = (0..dim)
        .map(|u| Constraint::new(vertices.iter().map(|v| v.coords[u]).collect(), Relation::Eq, x[u]))
        .collect();
    constraints.push(Constraint::new(vec![1.0; vertices.len()], Relation::Eq, 1.0));
    let lp = LinearProgram { objective: vec![0.0; vertices.len()], constraints };
    let tol = Tolerances { phase_one: HULL_TOLERANCE, ..Tolerances::default() };
    match feasibility_lp(&lp, &tol)? {
        LpOutcome::Optimal { x: lambda, .. } => {
            let total: f64 = lambda.iter().sum();
            let parts: Vec<(f64, CompactVertex)> = lambda
                .iter()
                .zip(vertices)
                .filter(|(w, _)| **w > 1e-12)
                .map(|(w, v)| (w / total, v.clone()))
                .collect();
            let worst = (0..dim)
                .map(|u| (parts.iter().map(|(w, v)| w * v.coords[u]).sum::<f64>() - x[u]).abs())
                .fold(0.0, f64::max);
            if worst > HULL_TOLERANCE {
                return Err(NasgError::Solver(format!("decomposition residual {worst:.3e}")));
            }
            Ok(parts)
        }
        LpOutcome::Infeasible { certificate, infeasibility } => Err(NasgError::NotInHull { infeasibility, certificate }),
        LpOutcome::Unbounded => Err(NasgError::Solver("hull LP unbounded".into())),
    }
}
