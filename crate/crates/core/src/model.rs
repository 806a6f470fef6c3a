//! Game specification, pure payoffs under the tie-breaking rule, the
//! normal-form expansion, and the Nash check on the original bimatrix game.

use std::collections::BTreeMap;

use crate::error::{NasgError, Result};
use crate::lp::MatrixGame;
use crate::setfn::{GroundSet, SetFunction, Subset};

/// Largest `|attacker strategies| * |defender strategies|` expanded densely.
pub const MAX_NORMAL_FORM_ENTRIES: u128 = 10_000_000;

/// A security game with set-function utilities. `attacker_cap = defender_cap = n` is the
/// complete power-set game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    ground: GroundSet,
    benefit: SetFunction,
    cost_attacker: SetFunction,
    cost_defender: SetFunction,
    attacker_cap: usize,
    defender_cap: usize,
}

impl GameSpec {
    pub fn new(
        benefit: SetFunction,
        cost_attacker: SetFunction,
        cost_defender: SetFunction,
        attacker_cap: usize,
        defender_cap: usize,
    ) -> Result<Self> {
        let ground = benefit.ground();
        if cost_attacker.ground() != ground || cost_defender.ground() != ground {
            return Err(NasgError::InvalidInput("set functions over different ground sets".into()));
        }
        let n = ground.n();
        if attacker_cap > n || defender_cap > n {
            return Err(NasgError::InvalidInput(format!(
                "caps c={attacker_cap}, k={defender_cap} must not exceed n={n}"
            )));
        }
        for (name, f) in [("benefit", &benefit), ("attacker cost", &cost_attacker), ("defender cost", &cost_defender)] {
            let empty = f.get(Subset::EMPTY);
            if empty != 0.0 {
                log::warn!("{name} of the empty set is {empty}, expected 0");
            }
        }
        Ok(GameSpec { ground, benefit, cost_attacker, cost_defender, attacker_cap, defender_cap })
    }

    /// Game with zero costs.
    pub fn with_benefit(benefit: SetFunction, attacker_cap: usize, defender_cap: usize) -> Result<Self> {
        let g = benefit.ground();
        Self::new(benefit, SetFunction::new(g), SetFunction::new(g), attacker_cap, defender_cap)
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.n()
    }

    pub fn benefit(&self) -> &SetFunction {
        &self.benefit
    }

    pub fn cost_attacker(&self) -> &SetFunction {
        &self.cost_attacker
    }

    pub fn cost_defender(&self) -> &SetFunction {
        &self.cost_defender
    }

    pub fn attacker_cap(&self) -> usize {
        self.attacker_cap
    }

    pub fn defender_cap(&self) -> usize {
        self.defender_cap
    }

    /// Capped attacker strategy space, ascending by bitmask.
    pub fn attacker_strategies(&self) -> Vec<Subset> {
        self.ground.subsets_up_to(self.attacker_cap)
    }

    pub fn defender_strategies(&self) -> Vec<Subset> {
        self.ground.subsets_up_to(self.defender_cap)
    }

    pub fn check_attack(&self, a: Subset) -> Result<()> {
        if !self.ground.contains(a) || a.len() > self.attacker_cap {
            return Err(NasgError::InvalidStrategy(format!(
                "attack {a} violates cap {} over [{}]",
                self.attacker_cap,
                self.n()
            )));
        }
        Ok(())
    }

    pub fn check_defense(&self, d: Subset) -> Result<()> {
        if !self.ground.contains(d) || d.len() > self.defender_cap {
            return Err(NasgError::InvalidStrategy(format!(
                "defense {d} violates cap {} over [{}]",
                self.defender_cap,
                self.n()
            )));
        }
        Ok(())
    }

    /// Entry of the equivalent zero-sum matrix: `B(A\D) - C_a(A) + C_d(D)`.
    pub fn zero_sum_payoff(&self, a: Subset, d: Subset) -> f64 {
        self.benefit.get(a.difference(d)) - self.cost_attacker.get(a) + self.cost_defender.get(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurePayoff {
    pub attacker: f64,
    pub defender: f64,
}

/// Payoffs when the attacker plays `a` and the defender `d`: targets in
/// `a \ d` are successfully attacked.
pub fn pure_payoff(spec: &GameSpec, a: Subset, d: Subset) -> Result<PurePayoff> {
    spec.check_attack(a)?;
    spec.check_defense(d)?;
    let hit = spec.benefit.get(a.difference(d));
    Ok(PurePayoff { attacker: hit - spec.cost_attacker.get(a), defender: -hit - spec.cost_defender.get(d) })
}

/// Dense zero-sum payoff matrix; rows are attacks, columns defenses, both in
/// ascending bitmask order.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub attacker_strategies: Vec<Subset>,
    pub defender_strategies: Vec<Subset>,
    pub matrix: MatrixGame,
}

pub fn normal_form_size(spec: &GameSpec) -> u128 {
    spec.ground.count_up_to(spec.attacker_cap) * spec.ground.count_up_to(spec.defender_cap)
}

pub fn expand_normal_form(spec: &GameSpec) -> Result<NormalForm> {
    let size = normal_form_size(spec);
    if size > MAX_NORMAL_FORM_ENTRIES {
        return Err(NasgError::Capacity(format!(
            "normal form has {size} entries, limit {MAX_NORMAL_FORM_ENTRIES}"
        )));
    }
    let attacks = spec.attacker_strategies();
    let defenses = spec.defender_strategies();
    let mut data = Vec::with_capacity(attacks.len() * defenses.len());
    for &a in &attacks {
        for &d in &defenses {
            data.push(spec.zero_sum_payoff(a, d));
        }
    }
    let matrix = MatrixGame::new(attacks.len(), defenses.len(), data)?;
    Ok(NormalForm { attacker_strategies: attacks, defender_strategies: defenses, matrix })
}

/// A probability distribution over pure strategies, kept sorted by subset.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedStrategy {
    atoms: Vec<(Subset, f64)>,
}

impl MixedStrategy {
    /// Merges duplicate subsets, drops atoms with probability `<= 1e-12` and
    /// renormalizes. Fails on negative mass or a total off by more than 1e-6.
    pub fn new(atoms: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Subset, f64> = BTreeMap::new();
        for (s, p) in atoms {
            if !p.is_finite() || p < -1e-9 {
                return Err(NasgError::InvalidStrategy(format!("probability {p} on {s}")));
            }
            *merged.entry(s).or_insert(0.0) += p.max(0.0);
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(NasgError::InvalidStrategy(format!("probabilities sum to {total}")));
        }
        merged.retain(|_, p| *p > 1e-12);
        let kept: f64 = merged.values().sum();
        let atoms = merged.into_iter().map(|(s, p)| (s, p / kept)).collect();
        Ok(MixedStrategy { atoms })
    }

    pub fn pure(s: Subset) -> Self {
        MixedStrategy { atoms: vec![(s, 1.0)] }
    }

    pub fn atoms(&self) -> &[(Subset, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn probability(&self, s: Subset) -> f64 {
        self.atoms.binary_search_by_key(&s, |(a, _)| *a).map_or(0.0, |i| self.atoms[i].1)
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }
}

/// True iff `(p, q)` is an `eps`-Nash equilibrium of the original
/// non-zero-sum game: no pure deviation gains either player more than `eps`.
pub fn verify_ne_equivalence(spec: &GameSpec, p: &MixedStrategy, q: &MixedStrategy, eps: f64) -> bool {
    if p.atoms.iter().any(|(a, _)| spec.check_attack(*a).is_err())
        || q.atoms.iter().any(|(d, _)| spec.check_defense(*d).is_err())
        || (p.total() - 1.0).abs() > 1e-6
        || (q.total() - 1.0).abs() > 1e-6
    {
        return false;
    }
    let attacker_vs_q = |a: Subset| -> f64 {
        let ca = spec.cost_attacker.get(a);
        q.atoms.iter().map(|(d, w)| w * (spec.benefit.get(a.difference(*d)) - ca)).sum()
    };
    let defender_vs_p = |d: Subset| -> f64 {
        let cd = spec.cost_defender.get(d);
        p.atoms.iter().map(|(a, w)| w * (-spec.benefit.get(a.difference(d)) - cd)).sum()
    };
    let attacker_now: f64 = p.atoms.iter().map(|(a, w)| w * attacker_vs_q(*a)).sum();
    let defender_now: f64 = q.atoms.iter().map(|(d, w)| w * defender_vs_p(*d)).sum();
    let attacker_ok = spec.attacker_strategies().into_iter().all(|a| attacker_vs_q(a) <= attacker_now + eps);
    attacker_ok && spec.defender_strategies().into_iter().all(|d| defender_vs_p(d) <= defender_now + eps)
}
