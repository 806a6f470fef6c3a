//! Network security games.
//!
//! Nodes are targets. Attacking `U` removes those nodes, a failure operator
//! propagates the damage, and the benefit is the drop in network value:
//! `B(U) = T(G) - T(F(G \ U))`. [`separable_approximation`] zeroes small
//! common utilities so the defender oracle splits into independent
//! components.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NasgError, Result};
use crate::geometry::CompactGame;
use crate::model::GameSpec;
use crate::oracles::{disjoint_components, Component};
use crate::setfn::{self, CommonUtility, GroundSet, SetFunction, Subset, MAX_TARGETS};
use crate::solver::{solve_compact, EquilibriumReport, SolverConfig};

/// Largest number of attacks evaluated by [`induce_benefit`].
pub const MAX_BENEFIT_EVALUATIONS: u128 = 1_000_000;

/// Simple undirected graph on nodes `1..=node_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    node_values: Vec<f64>,
    /// Neighbor bitmask per node, indexed by `node - 1`.
    adjacency: Vec<u32>,
}

/// JSON graph document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Network {
    /// Normalizes every edge to `(min, max)` and removes duplicates.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::with_values(node_count, edges, None)
    }

    pub fn with_values(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        node_values: Option<Vec<f64>>,
    ) -> Result<Self> {
        if node_count == 0 || node_count > MAX_TARGETS {
            return Err(NasgError::InvalidInput(format!("node count {node_count} outside 1..={MAX_TARGETS}")));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x == 0 || x > node_count {
                    return Err(NasgError::InvalidInput(format!("node {x} outside 1..={node_count}")));
                }
            }
            if u == v {
                return Err(NasgError::InvalidInput(format!("self-loop on node {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        let node_values = match node_values {
            Some(v) if v.len() != node_count => {
                return Err(NasgError::DimensionMismatch { expected: node_count, got: v.len() })
            }
            Some(v) if v.iter().any(|x| !x.is_finite() || *x < 0.0) => {
                return Err(NasgError::InvalidInput("node values must be finite and nonnegative".into()))
            }
            Some(v) => v,
            None => vec![1.0; node_count],
        };
        let mut adjacency = vec![0u32; node_count];
        for &(u, v) in &list {
            adjacency[u - 1] |= 1 << (v - 1);
            adjacency[v - 1] |= 1 << (u - 1);
        }
        Ok(Network { node_count, edges: list, node_values, adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node - 1].count_ones() as usize
    }

    /// Parses `nodes N` followed by one `u v` pair per line. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut node_count = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| NasgError::Parse(format!("line {}: {msg}: {raw:?}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (node_count, fields.as_slice()) {
                (None, ["nodes", n]) => node_count = Some(n.parse::<usize>().map_err(|_| err("bad node count"))?),
                (None, _) => return Err(err("expected `nodes N`")),
                (Some(_), [u, v]) => {
                    let u = u.parse::<usize>().map_err(|_| err("bad node index"))?;
                    let v = v.parse::<usize>().map_err(|_| err("bad node index"))?;
                    edges.push((u, v));
                }
                (Some(_), _) => return Err(err("expected `u v`")),
            }
        }
        let n = node_count.ok_or_else(|| NasgError::Parse("missing `nodes N` header".into()))?;
        Self::new(n, edges).map_err(|e| match e {
            NasgError::InvalidInput(m) => NasgError::Parse(m),
            other => other,
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_file(doc: &NetworkFile) -> Result<Self> {
        Self::with_values(doc.nodes, doc.edges.iter().map(|e| (e[0], e[1])), doc.values.clone())
    }

    pub fn to_file(&self) -> NetworkFile {
        let values = self.node_values.iter().any(|v| *v != 1.0).then(|| self.node_values.clone());
        NetworkFile { nodes: self.node_count, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(), values }
    }

    /// Accepts either the JSON document or the edge-list text.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let doc: NetworkFile = serde_json::from_str(text)
                .map_err(|e| NasgError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
            Self::from_file(&doc)
        } else {
            Self::parse_edge_list(text)
        }
    }

    fn all_nodes(&self) -> u32 {
        Subset::full(self.node_count).0
    }

    /// Connected components of the subgraph induced by `alive`.
    pub fn components(&self, alive: u32) -> Vec<u32> {
        let mut left = alive;
        let mut out = Vec::new();
        while left != 0 {
            let mut comp = left & left.wrapping_neg();
            let mut frontier = comp;
            while frontier != 0 {
                let b = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.adjacency[b] & alive & !comp;
                comp |= fresh;
                frontier |= fresh;
            }
            left &= !comp;
            out.push(comp);
        }
        out
    }

    fn mass(&self, nodes: u32) -> (f64, f64) {
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut bits = nodes;
        while bits != 0 {
            let v = self.node_values[bits.trailing_zeros() as usize];
            sum += v;
            sq += v * v;
            bits &= bits - 1;
        }
        (sum, sq)
    }
}

/// Network value `T` of an induced subgraph, computed from its components
/// and the node values (all 1 unless supplied).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ValueFunction {
    /// `Σ_{i<j connected} v_i v_j`; with unit values, the number of
    /// connected unordered pairs.
    #[default]
    ConnectedPairs,
    /// Value of the heaviest component.
    LargestComponent,
    /// `Σ_components (Σ v)^exponent` with `exponent > 0`.
    WeightedComponentSum(f64),
}

impl ValueFunction {
    pub fn from_name(name: &str, exponent: f64) -> Result<Self> {
        match name {
            "connected_pairs" => Ok(ValueFunction::ConnectedPairs),
            "largest_component" => Ok(ValueFunction::LargestComponent),
            "weighted_component_sum" => {
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return Err(NasgError::InvalidInput(format!("exponent {exponent} must be positive")));
                }
                Ok(ValueFunction::WeightedComponentSum(exponent))
            }
            other => Err(NasgError::InvalidInput(format!("unknown value function {other:?}"))),
        }
    }

    pub fn evaluate(&self, net: &Network, alive: u32) -> f64 {
        let comps = net.components(alive);
        match *self {
            ValueFunction::ConnectedPairs => comps
                .iter()
                .map(|&c| {
                    let (s, q) = net.mass(c);
                    (s * s - q) / 2.0
                })
                .sum(),
            ValueFunction::LargestComponent => comps.iter().map(|&c| net.mass(c).0).fold(0.0, f64::max),
            ValueFunction::WeightedComponentSum(e) => comps.iter().map(|&c| net.mass(c).0.powf(e)).sum(),
        }
    }
}

impl fmt::Display for ValueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFunction::ConnectedPairs => f.write_str("connected_pairs"),
            ValueFunction::LargestComponent => f.write_str("largest_component"),
            ValueFunction::WeightedComponentSum(e) => write!(f, "weighted_component_sum({e})"),
        }
    }
}

/// How the network degrades after the attacked nodes are removed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum FailureOperator {
    #[default]
    NodeRemoval,
    /// Repeatedly removes every node that keeps less than a `θ` fraction of
    /// its original neighbors. Isolated nodes never fail.
    ThresholdCascade(f64),
}

impl FailureOperator {
    pub fn from_name(name: &str, theta: f64) -> Result<Self> {
        match name {
            "node_removal" => Ok(FailureOperator::NodeRemoval),
            "threshold_cascade" => {
                if !(theta > 0.0 && theta <= 1.0) {
                    return Err(NasgError::InvalidInput(format!("cascade threshold {theta} outside (0,1]")));
                }
                Ok(FailureOperator::ThresholdCascade(theta))
            }
            other => Err(NasgError::InvalidInput(format!("unknown failure operator {other:?}"))),
        }
    }

    /// Surviving node set.
    pub fn apply(&self, net: &Network, alive: u32) -> u32 {
        match *self {
            FailureOperator::NodeRemoval => alive,
            FailureOperator::ThresholdCascade(theta) => {
                let mut alive = alive;
                loop {
                    let mut failed = 0u32;
                    let mut bits = alive;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let degree = net.adjacency[b].count_ones();
                        if degree > 0 {
                            let kept = (net.adjacency[b] & alive).count_ones();
                            if (kept as f64) < theta * degree as f64 {
                                failed |= 1 << b;
                            }
                        }
                    }
                    if failed == 0 {
                        return alive;
                    }
                    alive &= !failed;
                }
            }
        }
    }
}

impl fmt::Display for FailureOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureOperator::NodeRemoval => f.write_str("node_removal"),
            FailureOperator::ThresholdCascade(t) => write!(f, "threshold_cascade({t})"),
        }
    }
}

impl FromStr for FailureOperator {
    type Err = NasgError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s, 0.5)
    }
}

/// `B(U) = T(G) - T(F(G \ U))` on every `|U| <= c`.
pub fn induce_benefit(net: &Network, t: ValueFunction, f: FailureOperator, c: usize) -> Result<SetFunction> {
    let ground = GroundSet::new(net.node_count)?;
    if c > ground.n() {
        return Err(NasgError::InvalidInput(format!("attack cap {c} exceeds {} nodes", ground.n())));
    }
    let count = ground.count_up_to(c);
    if count > MAX_BENEFIT_EVALUATIONS {
        return Err(NasgError::Capacity(format!("{count} attacks exceed {MAX_BENEFIT_EVALUATIONS}")));
    }
    let full = net.all_nodes();
    let base = t.evaluate(net, full);
    let mut b = SetFunction::new(ground);
    let mut failure = None;
    ground.for_each_up_to(c, |u| {
        let value = base - t.evaluate(net, f.apply(net, full & !u.0));
        if failure.is_none() {
            if let Err(e) = b.set(u, value) {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(b),
    }
}

/// Count of `|B^c(U)|` values, `U ≠ ∅`, in `[lower, upper)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Decade histogram of nonzero magnitudes, from `10^floor(log10 min)` up.
pub fn magnitude_histogram(fc: &CommonUtility) -> Vec<HistogramBin> {
    let mags: Vec<f64> = fc.entries().filter(|(u, _)| !u.is_empty()).map(|(_, v)| v.abs()).collect();
    let Some(lo) = mags.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let hi = mags.iter().copied().fold(lo, f64::max);
    let first = lo.log10().floor() as i32;
    let last = hi.log10().floor() as i32;
    (first..=last)
        .map(|e| {
            let (lower, upper) = (10f64.powi(e), 10f64.powi(e + 1));
            let count = mags.iter().filter(|m| **m >= lower && **m < upper).count();
            HistogramBin { lower, upper, count }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxResult {
    /// Game with the truncated benefit, `k = n`.
    pub spec: GameSpec,
    pub components: Vec<Component>,
    pub eps_c: f64,
    /// `2^(c+1)·eps_c`.
    pub error_bound: f64,
    /// Nonzero benefit common utilities that were zeroed.
    pub dropped_terms: usize,
    pub histogram: Vec<HistogramBin>,
}

/// Zeroes every `|B^c(U)| <= eps_c`, rebuilds the benefit and splits the
/// resulting support into components with disjoint target sets.
pub fn separable_approximation(
    b: &SetFunction,
    ca: &SetFunction,
    cd: &SetFunction,
    eps_c: f64,
    c: usize,
) -> Result<ApproxResult> {
    if !(eps_c >= 0.0 && eps_c.is_finite()) {
        return Err(NasgError::InvalidInput(format!("eps_c {eps_c} must be finite and nonnegative")));
    }
    let n = b.ground().n();
    let mut bc = setfn::moebius_capped(b, c, 0.0)?;
    let histogram = magnitude_histogram(&bc);
    let dropped_terms = bc.truncate_below(&eps_c);
    let approx_b = setfn::zeta_capped(&bc, c)?;
    let spec = GameSpec::new(approx_b, ca.clone(), cd.clone(), c, n)?;
    let support = CompactGame::from_spec(&spec)?.support;
    let components = disjoint_components(support.members());
    Ok(ApproxResult { spec, components, eps_c, error_bound: 2f64.powi(c as i32 + 1) * eps_c, dropped_terms, histogram })
}

/// Equilibrium of the approximated network game with zero costs, `k = n`.
/// The default `auto` oracle takes the separable path whenever the
/// components allow it.
pub fn solve_network_game(
    net: &Network,
    t: ValueFunction,
    f: FailureOperator,
    c: usize,
    eps_c: f64,
    config: &SolverConfig,
) -> Result<(EquilibriumReport, ApproxResult)> {
    let b = induce_benefit(net, t, f, c)?;
    let g = b.ground();
    let approx = separable_approximation(&b, &SetFunction::new(g), &SetFunction::new(g), eps_c, c)?;
    let report = solve_compact(&approx.spec, config)?;
    Ok((report, approx))
}

/// Preferential-attachment graph: each new node links to `m` distinct
/// earlier nodes chosen with probability proportional to degree + 1.
pub fn preferential_attachment<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Network> {
    if n == 0 || n > MAX_TARGETS {
        return Err(NasgError::InvalidInput(format!("node count {n} outside 1..={MAX_TARGETS}")));
    }
    let mut degree = vec![0usize; n + 1];
    let mut edges = Vec::new();
    for v in 2..=n {
        let mut chosen: Vec<usize> = Vec::new();
        while chosen.len() < m.min(v - 1) {
            let total: usize = (1..v).filter(|u| !chosen.contains(u)).map(|u| degree[u] + 1).sum();
            let mut pick = rng.gen_range(0..total);
            for u in (1..v).filter(|u| !chosen.contains(u)) {
                if pick < degree[u] + 1 {
                    chosen.push(u);
                    break;
                }
                pick -= degree[u] + 1;
            }
        }
        for u in chosen {
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v));
        }
    }
    Network::new(n, edges)
}
