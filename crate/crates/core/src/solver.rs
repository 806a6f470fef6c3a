//! Equilibrium computation.
//!
//! [`solve_compact`] runs a double oracle over compact coordinates: the
//! restricted game holds explicit attacker and defender vertices, each round
//! solves it as a matrix game and asks both best-response oracles for
//! improving vertices. [`solve_bruteforce`] solves the expanded normal form
//! directly and serves as the reference.

use serde::Serialize;

use crate::error::{NasgError, Result};
use crate::geometry::{caratheodory_decompose, vertex_to_strategy, CompactGame, CompactVertex};
use crate::lp::{self, MatrixGame, Tolerances};
use crate::model::{expand_normal_form, GameSpec};
use crate::oracles::{attacker_oracle, defender_oracle, OracleMethod, OracleQuery};
use crate::setfn::{Subset, DEFAULT_ZERO_THRESHOLD};

pub use crate::model::MixedStrategy;

/// Largest effective support handled by [`solve_compact`].
pub const MAX_SUPPORT: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// A vertex is added only if it improves its player by more than this.
    pub eps_gap: f64,
    pub oracle: OracleMethod,
    /// Round limit; `None` means `10·|S| + 100`.
    pub max_iterations: Option<usize>,
    /// Vertices harvested per player per round, including the best response.
    pub harvest: usize,
    /// Solve restricted games in rational arithmetic.
    pub exact: bool,
    pub tolerances: Tolerances,
    /// Common utilities at most this large in magnitude are treated as zero.
    pub zero_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_gap: 1e-7,
            oracle: OracleMethod::Auto,
            max_iterations: None,
            harvest: 4,
            exact: false,
            tolerances: Tolerances::default(),
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
        }
    }
}

/// One double-oracle round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub restricted_value: f64,
    pub attacker_gap: f64,
    pub defender_gap: f64,
    pub attacker_added: usize,
    pub defender_added: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    /// Zero-sum value from the attacker's point of view.
    pub value: f64,
    pub defender: MixedStrategy,
    pub attacker: MixedStrategy,
    pub iterations: usize,
    pub support_size: usize,
    pub oracle_calls: usize,
    pub converged: bool,
    /// Best proven `(lower, upper)` bounds on the game value.
    pub bounds: (f64, f64),
    pub trace: Vec<TraceRecord>,
}

fn solve_restricted(game: &MatrixGame, config: &SolverConfig) -> Result<lp::GameSolution> {
    if config.exact {
        lp::solve_matrix_game_with::<num::BigRational>(game, &config.tolerances)
    } else {
        lp::solve_matrix_game_with::<f64>(game, &config.tolerances)
    }
}

fn mixture(strategies: &[Subset], weights: &[f64]) -> Result<MixedStrategy> {
    MixedStrategy::new(strategies.iter().copied().zip(weights.iter().copied()))
}

/// Exact equilibrium of the expanded zero-sum game.
pub fn solve_bruteforce(spec: &GameSpec) -> Result<EquilibriumReport> {
    solve_bruteforce_with(spec, &SolverConfig::default())
}

pub fn solve_bruteforce_with(spec: &GameSpec, config: &SolverConfig) -> Result<EquilibriumReport> {
    let nf = expand_normal_form(spec)?;
    let sol = solve_restricted(&nf.matrix, config)?;
    let support_size = CompactGame::from_spec_with(spec, config.zero_threshold)?.dim();
    Ok(EquilibriumReport {
        value: sol.value,
        attacker: mixture(&nf.attacker_strategies, &sol.row_strategy)?,
        defender: mixture(&nf.defender_strategies, &sol.col_strategy)?,
        iterations: 1,
        support_size,
        oracle_calls: 0,
        converged: true,
        bounds: (sol.value, sol.value),
        trace: Vec::new(),
    })
}

/// Restricted game state: pure strategies, their vertices and the payoff
/// matrix between them.
struct Restricted {
    attacks: Vec<Subset>,
    defenses: Vec<Subset>,
    attack_vertices: Vec<CompactVertex>,
    defense_vertices: Vec<CompactVertex>,
    payoff: Vec<Vec<f64>>,
}

impl Restricted {
    fn new(g: &CompactGame) -> Result<Self> {
        Ok(Restricted {
            attacks: vec![Subset::EMPTY],
            defenses: vec![Subset::EMPTY],
            attack_vertices: vec![g.embed_attacker(Subset::EMPTY)?],
            defense_vertices: vec![g.embed_defender(Subset::EMPTY)?],
            payoff: vec![vec![g.pure_value(Subset::EMPTY, Subset::EMPTY)]],
        })
    }

    fn add_attack(&mut self, g: &CompactGame, a: Subset, v: CompactVertex) {
        self.payoff.push(self.defenses.iter().map(|&d| g.pure_value(a, d)).collect());
        self.attacks.push(a);
        self.attack_vertices.push(v);
    }

    fn add_defense(&mut self, g: &CompactGame, d: Subset, v: CompactVertex) {
        for (row, &a) in self.payoff.iter_mut().zip(&self.attacks) {
            row.push(g.pure_value(a, d));
        }
        self.defenses.push(d);
        self.defense_vertices.push(v);
    }

    fn matrix(&self) -> Result<MatrixGame> {
        MatrixGame::from_rows(&self.payoff)
    }
}

fn combine(vertices: &[CompactVertex], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (v, w) in vertices.iter().zip(weights) {
        if *w > 0.0 {
            for (o, c) in out.iter_mut().zip(&v.coords) {
                *o += w * c;
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn attacker_weights(g: &CompactGame, qd: &[f64]) -> Vec<f64> {
    (0..g.dim()).map(|i| g.bc[i] * qd[i] - g.cac[i]).collect()
}

fn defender_weights(g: &CompactGame, pa: &[f64]) -> Vec<f64> {
    (0..g.dim()).map(|i| -(g.bc[i] * pa[i] + g.cdc[i])).collect()
}

/// Attacker best response to `qd`: `(A, payoff)`.
fn attacker_best(g: &CompactGame, qd: &[f64]) -> Result<(Subset, CompactVertex, f64)> {
    let q = OracleQuery { weights: attacker_weights(g, qd), cap: g.attacker_cap };
    let r = attacker_oracle(&q, &g.support)?;
    Ok((r.set, r.vertex, r.value + dot(&g.cdc, qd)))
}

/// Defender best response to `pa`: `(D, payoff)` with the payoff still
/// measured for the attacker.
fn defender_best(g: &CompactGame, pa: &[f64], method: OracleMethod) -> Result<(Subset, CompactVertex, f64)> {
    let q = OracleQuery { weights: defender_weights(g, pa), cap: g.defender_cap };
    let r = defender_oracle(&q, &g.support, method)?;
    Ok((r.set, r.vertex, -r.value - dot(&g.cac, pa)))
}

/// Up to `count` atoms with the largest weight, ties by position.
fn top_atoms(weights: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 1e-12).collect();
    idx.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// Reduces a restricted mixture to at most `dim + 1` vertices with the same
/// compact point. Falls back to the mixture itself if the decomposition
/// fails numerically.
fn reduce(point: &[f64], vertices: &[CompactVertex], weights: &[f64]) -> Vec<(f64, CompactVertex)> {
    let used: Vec<CompactVertex> =
        vertices.iter().zip(weights).filter(|(_, w)| **w > 1e-12).map(|(v, _)| v.clone()).collect();
    match caratheodory_decompose(point, &used) {
        Ok(parts) => parts,
        Err(e) => {
            log::warn!("Caratheodory reduction failed ({e}); keeping the restricted mixture");
            vertices.iter().zip(weights).filter(|(_, w)| **w > 1e-12).map(|(v, w)| (*w, v.clone())).collect()
        }
    }
}

/// Double oracle over compact coordinates.
///
/// Hitting the round limit is not an error: the report then has
/// `converged = false` and carries the best bounds found.
pub fn solve_compact(spec: &GameSpec, config: &SolverConfig) -> Result<EquilibriumReport> {
    if config.eps_gap.is_nan() || config.eps_gap < 0.0 {
        return Err(NasgError::InvalidInput(format!("eps_gap {} must be nonnegative", config.eps_gap)));
    }
    let g = CompactGame::from_spec_with(spec, config.zero_threshold)?;
    let dim = g.dim();
    if dim > MAX_SUPPORT {
        return Err(NasgError::Capacity(format!("support of size {dim} exceeds {MAX_SUPPORT}")));
    }
    let max_iterations = config.max_iterations.unwrap_or(10 * dim + 100);
    let harvest = config.harvest.max(1);

    let mut r = Restricted::new(&g)?;
    let mut trace = Vec::new();
    let mut oracle_calls = 0;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let (sol, pa, qd) = loop {
        iterations += 1;
        let sol = solve_restricted(&r.matrix()?, config)?;
        let v = sol.value;
        let pa = combine(&r.attack_vertices, &sol.row_strategy, dim);
        let qd = combine(&r.defense_vertices, &sol.col_strategy, dim);

        let (a_best, a_vertex, br_a) = attacker_best(&g, &qd)?;
        let (d_best, d_vertex, br_d) = defender_best(&g, &pa, config.oracle)?;
        oracle_calls += 2;
        upper = upper.min(br_a);
        lower = lower.max(br_d);
        let gap_a = br_a - v;
        let gap_d = v - br_d;

        let mut new_attacks: Vec<(Subset, CompactVertex)> = Vec::new();
        let mut new_defenses: Vec<(Subset, CompactVertex)> = Vec::new();
        if gap_a > config.eps_gap && !r.attacks.contains(&a_best) {
            new_attacks.push((a_best, a_vertex));
        }
        if gap_d > config.eps_gap && !r.defenses.contains(&d_best) {
            new_defenses.push((d_best, d_vertex));
        }
        if harvest > 1 && (gap_a > config.eps_gap || gap_d > config.eps_gap) {
            for j in top_atoms(&sol.col_strategy, harvest - 1) {
                if gap_a <= config.eps_gap || new_attacks.len() >= harvest {
                    break;
                }
                let (a, vert, _) = attacker_best(&g, &r.defense_vertices[j].coords)?;
                oracle_calls += 1;
                let gain = dot(&attacker_weights(&g, &qd), &vert.coords) + dot(&g.cdc, &qd) - v;
                if gain > config.eps_gap && !r.attacks.contains(&a) && new_attacks.iter().all(|(x, _)| *x != a) {
                    new_attacks.push((a, vert));
                }
            }
            for i in top_atoms(&sol.row_strategy, harvest - 1) {
                if gap_d <= config.eps_gap || new_defenses.len() >= harvest {
                    break;
                }
                let (d, vert, _) = defender_best(&g, &r.attack_vertices[i].coords, config.oracle)?;
                oracle_calls += 1;
                let gain = v - (-dot(&defender_weights(&g, &pa), &vert.coords) - dot(&g.cac, &pa));
                if gain > config.eps_gap && !r.defenses.contains(&d) && new_defenses.iter().all(|(x, _)| *x != d) {
                    new_defenses.push((d, vert));
                }
            }
        }

        trace.push(TraceRecord {
            iteration: iterations,
            restricted_value: v,
            attacker_gap: gap_a,
            defender_gap: gap_d,
            attacker_added: new_attacks.len(),
            defender_added: new_defenses.len(),
            lower_bound: lower,
            upper_bound: upper,
        });
        log::debug!("round {iterations}: value {v:.9} gaps ({gap_a:.3e}, {gap_d:.3e})");

        if gap_a <= config.eps_gap && gap_d <= config.eps_gap {
            converged = true;
            break (sol, pa, qd);
        }
        if new_attacks.is_empty() && new_defenses.is_empty() {
            log::warn!("double oracle stalled at gaps ({gap_a:.3e}, {gap_d:.3e})");
            break (sol, pa, qd);
        }
        if iterations >= max_iterations {
            log::warn!("double oracle hit the round limit {max_iterations}");
            break (sol, pa, qd);
        }
        for (a, vert) in new_attacks {
            r.add_attack(&g, a, vert);
        }
        for (d, vert) in new_defenses {
            r.add_defense(&g, d, vert);
        }
    };

    let mut defender_atoms = Vec::new();
    for (w, vert) in reduce(&qd, &r.defense_vertices, &sol.col_strategy) {
        defender_atoms.push((vertex_to_strategy(&vert.coords, &g.support)?, w));
    }
    let attacker_atoms: Vec<(Subset, f64)> =
        reduce(&pa, &r.attack_vertices, &sol.row_strategy).into_iter().map(|(w, v)| (v.origin, w)).collect();

    Ok(EquilibriumReport {
        value: sol.value,
        defender: MixedStrategy::new(defender_atoms)?,
        attacker: MixedStrategy::new(attacker_atoms)?,
        iterations,
        support_size: dim,
        oracle_calls,
        converged,
        bounds: (lower, upper),
        trace,
    })
}

/// Largest improvement a pure deviation offers `(attacker, defender)`
/// against the report's mixtures, computed with the oracles.
pub fn best_response_gap(spec: &GameSpec, report: &EquilibriumReport) -> Result<(f64, f64)> {
    let g = CompactGame::from_spec(spec)?;
    for (a, _) in report.attacker.atoms() {
        spec.check_attack(*a)?;
    }
    for (d, _) in report.defender.atoms() {
        spec.check_defense(*d)?;
    }
    let pa = g.attacker_marginals(&report.attacker);
    let qd = g.defender_marginals(&report.defender);
    let current = crate::geometry::compact_value(&g, &pa, &qd)?;
    let (_, _, br_a) = attacker_best(&g, &qd)?;
    let (_, _, br_d) = defender_best(&g, &pa, OracleMethod::Auto)?;
    Ok((br_a - current, current - br_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_ne_equivalence;
    use crate::setfn::{GroundSet, SetFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(t: &[usize]) -> Subset {
        Subset::from_targets(t).unwrap()
    }

    fn pennies() -> GameSpec {
        let g = GroundSet::new(2).unwrap();
        GameSpec::with_benefit(SetFunction::from_dense(g, vec![0.0, 1.0, 1.0, 2.0]).unwrap(), 1, 1).unwrap()
    }

    fn random_spec(rng: &mut ChaCha8Rng, n: usize, c: usize, k: usize) -> GameSpec {
        let g = GroundSet::new(n).unwrap();
        let mut dense = |scale: f64| {
            let mut v: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.0..scale)).collect();
            v[0] = 0.0;
            SetFunction::from_dense(g, v).unwrap()
        };
        let b = dense(4.0);
        let ca = dense(1.0);
        let cd = dense(1.0);
        GameSpec::new(b, ca, cd, c, k).unwrap()
    }

    #[test]
    fn bruteforce_examples() {
        let r = solve_bruteforce(&pennies()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!((r.defender.probability(s(&[1])) - 0.5).abs() < 1e-9);
        assert!((r.attacker.probability(s(&[2])) - 0.5).abs() < 1e-9);

        let g = GroundSet::new(3).unwrap();
        let zero = GameSpec::with_benefit(SetFunction::new(g), 2, 2).unwrap();
        assert_eq!(solve_bruteforce(&zero).unwrap().value, 0.0);

        let g1 = GroundSet::new(1).unwrap();
        let b = SetFunction::from_dense(g1, vec![0.0, 1.0]).unwrap();
        let ca = SetFunction::from_dense(g1, vec![0.0, 2.0]).unwrap();
        let spec = GameSpec::new(b, ca, SetFunction::new(g1), 1, 1).unwrap();
        let r = solve_bruteforce(&spec).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.attacker.atoms(), &[(Subset::EMPTY, 1.0)]);
    }

    #[test]
    fn compact_matching_pennies() {
        let r = solve_compact(&pennies(), &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!((r.defender.probability(s(&[1])) - 0.5).abs() < 1e-9);
        assert!((r.defender.probability(s(&[2])) - 0.5).abs() < 1e-9);
        let (ga, gd) = best_response_gap(&pennies(), &r).unwrap();
        assert!(ga <= 1e-8 && gd <= 1e-8);
        assert!(r.bounds.0 <= r.value + 1e-9 && r.value <= r.bounds.1 + 1e-9);
    }

    #[test]
    fn truncated_run_leaves_gap() {
        let cfg = SolverConfig { max_iterations: Some(1), ..SolverConfig::default() };
        let r = solve_compact(&pennies(), &cfg).unwrap();
        assert!(!r.converged);
        let (ga, gd) = best_response_gap(&pennies(), &r).unwrap();
        assert!(ga.max(gd) >= 0.49);
    }

    #[test]
    fn exact_restricted_games() {
        let cfg = SolverConfig { exact: true, ..SolverConfig::default() };
        let r = solve_compact(&pennies(), &cfg).unwrap();
        assert_eq!(r.value, 0.5);
    }

    #[test]
    fn compact_matches_bruteforce_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = rng.gen_range(1..=5);
            let caps = [1, 2, n];
            let c = caps[rng.gen_range(0..3)].min(n);
            let k = caps[rng.gen_range(0..3)].min(n);
            let spec = random_spec(&mut rng, n, c, k);
            let exact = solve_bruteforce(&spec).unwrap();
            let compact = solve_compact(&spec, &SolverConfig::default()).unwrap();
            assert!(compact.converged, "trial {trial}");
            assert!((exact.value - compact.value).abs() <= 1e-6, "trial {trial}: {} vs {}", exact.value, compact.value);
            assert!(verify_ne_equivalence(&spec, &compact.attacker, &compact.defender, 1e-5), "trial {trial}");
            assert!(verify_ne_equivalence(&spec, &exact.attacker, &exact.defender, 1e-5), "trial {trial}");
            assert!(compact.defender.len() <= compact.support_size + 1);
            assert!(compact.defender.atoms().iter().all(|(d, _)| d.len() <= k));
            let (ga, gd) = best_response_gap(&spec, &compact).unwrap();
            assert!(ga <= 1e-6 && gd <= 1e-6, "trial {trial}: gaps {ga} {gd}");
        }
    }

    #[test]
    fn bounds_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = random_spec(&mut rng, 5, 2, 2);
        let cfg = SolverConfig { harvest: 1, ..SolverConfig::default() };
        let r = solve_compact(&spec, &cfg).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].upper_bound <= w[0].upper_bound);
            assert!(w[1].lower_bound >= w[0].lower_bound);
        }
        assert!(r.bounds.0 <= r.value + 1e-7 && r.value <= r.bounds.1 + 1e-7);
    }

    #[test]
    fn invalid_config() {
        let cfg = SolverConfig { eps_gap: f64::NAN, ..SolverConfig::default() };
        assert!(matches!(solve_compact(&pennies(), &cfg), Err(NasgError::InvalidInput(_))));
    }
}
