//! Command-line surface: file formats and the `nasg` subcommands.
//!
//! Game files are JSON:
//!
//! ```json
//! {"n": 2, "c": 1, "k": 1,
//!  "benefit": [{"set": [1], "value": 1.0}, {"set": [2], "value": 1.0}],
//!  "cost_attacker": [], "cost_defender": []}
//! ```
//!
//! Sets are ascending lists of 1-based targets; unlisted sets are 0. Reports
//! are JSON as well and contain no timestamps, so identical inputs give
//! byte-identical reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num::BigRational;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{NasgError, Result};
use crate::geometry::CompactGame;
use crate::model::{normal_form_size, GameSpec, MAX_NORMAL_FORM_ENTRIES};
use crate::netsec::{solve_network_game, ApproxResult, FailureOperator, Network, ValueFunction};
use crate::oracles::OracleMethod;
use crate::setfn::{self, GroundSet, SetFunction, Subset, DEFAULT_ZERO_THRESHOLD};
use crate::solver::{best_response_gap, solve_bruteforce, solve_compact, EquilibriumReport, MixedStrategy, SolverConfig};

/// Strictly ascending, 1-based target list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TargetList(pub Vec<usize>);

impl<'de> Deserialize<'de> for TargetList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.contains(&0) {
            return Err(serde::de::Error::custom("target indices are 1-based; found 0"));
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom(format!("set {v:?} is not strictly ascending")));
        }
        Ok(TargetList(v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetEntry {
    pub set: TargetList,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub n: usize,
    pub c: usize,
    pub k: usize,
    #[serde(default)]
    pub benefit: Vec<SetEntry>,
    #[serde(default)]
    pub cost_attacker: Vec<SetEntry>,
    #[serde(default)]
    pub cost_defender: Vec<SetEntry>,
}

fn json_error(e: serde_json::Error) -> NasgError {
    NasgError::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn set_function(ground: GroundSet, name: &str, entries: &[SetEntry]) -> Result<SetFunction> {
    let mut f = SetFunction::new(ground);
    let mut seen = std::collections::BTreeSet::new();
    for (i, e) in entries.iter().enumerate() {
        let s = Subset::from_targets(&e.set.0)
            .ok()
            .filter(|s| ground.contains(*s))
            .ok_or_else(|| NasgError::Parse(format!("{name}[{i}]: set {:?} outside 1..={}", e.set.0, ground.n())))?;
        if !seen.insert(s) {
            return Err(NasgError::Parse(format!("{name}[{i}]: duplicate set {s}")));
        }
        f.set(s, e.value).map_err(|err| NasgError::Parse(format!("{name}[{i}]: {err}")))?;
    }
    Ok(f)
}

fn entries(f: &SetFunction) -> Vec<SetEntry> {
    f.entries().filter(|(_, v)| **v != 0.0).map(|(s, v)| SetEntry { set: TargetList(s.targets()), value: *v }).collect()
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn to_spec(&self) -> Result<GameSpec> {
        let ground = GroundSet::new(self.n).map_err(|e| NasgError::Parse(format!("n: {e}")))?;
        if self.c > self.n || self.k > self.n {
            return Err(NasgError::Parse(format!("caps c={}, k={} must not exceed n={}", self.c, self.k, self.n)));
        }
        GameSpec::new(
            set_function(ground, "benefit", &self.benefit)?,
            set_function(ground, "cost_attacker", &self.cost_attacker)?,
            set_function(ground, "cost_defender", &self.cost_defender)?,
            self.c,
            self.k,
        )
    }

    /// Nonzero entries in ascending bitmask order.
    pub fn from_spec(spec: &GameSpec) -> Self {
        GameFile {
            n: spec.n(),
            c: spec.attacker_cap(),
            k: spec.defender_cap(),
            benefit: entries(spec.benefit()),
            cost_attacker: entries(spec.cost_attacker()),
            cost_defender: entries(spec.cost_defender()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game file serializes")
    }
}

pub fn load_game(path: &Path) -> Result<GameSpec> {
    GameFile::parse(&std::fs::read_to_string(path)?)?.to_spec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    pub set: TargetList,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub value: f64,
    pub defender: Vec<StrategyEntry>,
    pub attacker: Vec<StrategyEntry>,
    pub support_size: usize,
    pub iterations: usize,
    /// `[attacker_gap, defender_gap]`.
    pub gaps: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
}

fn strategy_entries(m: &MixedStrategy) -> Vec<StrategyEntry> {
    m.atoms().iter().map(|(s, p)| StrategyEntry { set: TargetList(s.targets()), prob: *p }).collect()
}

impl ReportFile {
    pub fn new(report: &EquilibriumReport, gaps: (f64, f64), error_bound: Option<f64>) -> Self {
        ReportFile {
            value: report.value,
            defender: strategy_entries(&report.defender),
            attacker: strategy_entries(&report.attacker),
            support_size: report.support_size,
            iterations: report.iterations,
            gaps: [gaps.0, gaps.1],
            error_bound,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let r: ReportFile = serde_json::from_str(text).map_err(json_error)?;
        r.validate()?;
        Ok(r)
    }

    /// Probabilities are positive and sum to 1 within 1e-9 per side.
    pub fn validate(&self) -> Result<()> {
        for (name, side) in [("defender", &self.defender), ("attacker", &self.attacker)] {
            if side.iter().any(|e| e.prob.is_nan() || e.prob <= 0.0) {
                return Err(NasgError::InvalidStrategy(format!("{name} has a nonpositive probability")));
            }
            let total: f64 = side.iter().map(|e| e.prob).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(NasgError::InvalidStrategy(format!("{name} probabilities sum to {total}")));
            }
        }
        if !self.value.is_finite() {
            return Err(NasgError::InvalidInput("report value is not finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Common-utility table: one row per support member in bitmask order with
/// `B^c`, `C_a^c` and the reflected `Ĉ_d^c`.
pub fn cmd_transform(spec: &GameSpec, exact: bool) -> Result<String> {
    let support = CompactGame::from_spec(spec)?.support;
    let mut out = String::new();
    writeln!(out, "support size: {}", support.len()).unwrap();
    writeln!(out, "{:<16} {:>20} {:>20} {:>20}", "set", "B^c", "C_a^c", "Cd_hat^c").unwrap();
    if exact {
        let c = spec.attacker_cap();
        let bc = setfn::moebius_capped(&spec.benefit().to_exact(), c, 0.0)?;
        let cac = setfn::moebius_capped(&spec.cost_attacker().to_exact(), c, 0.0)?;
        let cdc = setfn::reflect(&setfn::moebius_capped(&spec.cost_defender().to_exact(), spec.defender_cap(), 0.0)?, 0.0);
        let show = |v: BigRational| v.to_string();
        for &u in support.members() {
            writeln!(out, "{:<16} {:>20} {:>20} {:>20}", u.to_string(), show(bc.get(u)), show(cac.get(u)), show(cdc.get(u)))
                .unwrap();
        }
    } else {
        let (bc, cac, cdc) = crate::geometry::common_utilities(spec, DEFAULT_ZERO_THRESHOLD)?;
        for &u in support.members() {
            writeln!(out, "{:<16} {:>20} {:>20} {:>20}", u.to_string(), bc.get(u), cac.get(u), cdc.get(u)).unwrap();
        }
    }
    Ok(out)
}

pub struct SolveOutput {
    pub report: EquilibriumReport,
    pub file: ReportFile,
}

pub fn cmd_solve(spec: &GameSpec, config: &SolverConfig) -> Result<SolveOutput> {
    let report = solve_compact(spec, config)?;
    if !report.converged {
        return Err(NasgError::Solver(format!(
            "no convergence after {} rounds; value bounds [{}, {}]",
            report.iterations, report.bounds.0, report.bounds.1
        )));
    }
    let gaps = best_response_gap(spec, &report)?;
    let file = ReportFile::new(&report, gaps, None);
    Ok(SolveOutput { report, file })
}

pub struct NetOutput {
    pub report: EquilibriumReport,
    pub approx: ApproxResult,
    pub file: ReportFile,
}

pub fn cmd_net(
    net: &Network,
    t: ValueFunction,
    f: FailureOperator,
    c: usize,
    eps_c: f64,
    config: &SolverConfig,
) -> Result<NetOutput> {
    let (report, approx) = solve_network_game(net, t, f, c, eps_c, config)?;
    if !report.converged {
        return Err(NasgError::Solver(format!("no convergence after {} rounds", report.iterations)));
    }
    let gaps = best_response_gap(&approx.spec, &report)?;
    let file = ReportFile::new(&report, gaps, Some(approx.error_bound));
    Ok(NetOutput { report, approx, file })
}

pub fn approximation_summary(approx: &ApproxResult) -> String {
    let mut out = String::new();
    writeln!(out, "dropped terms: {}", approx.dropped_terms).unwrap();
    let comps: Vec<String> = approx.components.iter().map(|c| c.targets.to_string()).collect();
    writeln!(out, "components: {} {}", comps.len(), comps.join(" ")).unwrap();
    writeln!(out, "error bound: {}", approx.error_bound).unwrap();
    writeln!(out, "|B^c| histogram:").unwrap();
    for bin in &approx.histogram {
        writeln!(out, "  [{:e}, {:e}) {}", bin.lower, bin.upper, bin.count).unwrap();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyOutcome {
    Consistent { discrepancy: f64 },
    Discrepancy { discrepancy: f64 },
    Unverifiable { entries: u128 },
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyOutcome::Consistent { .. } => 0,
            VerifyOutcome::Unverifiable { .. } => 2,
            VerifyOutcome::Discrepancy { .. } => 3,
        }
    }
}

/// Compares both solvers and checks the compact payoff identity on every
/// pure pair. Tolerance 1e-6.
pub fn cmd_verify(spec: &GameSpec) -> Result<VerifyOutcome> {
    let entries = normal_form_size(spec);
    if entries > MAX_NORMAL_FORM_ENTRIES {
        return Ok(VerifyOutcome::Unverifiable { entries });
    }
    let g = CompactGame::from_spec(spec)?;
    let mut worst = 0.0f64;
    for a in spec.attacker_strategies() {
        for d in spec.defender_strategies() {
            worst = worst.max((g.pure_value(a, d) - spec.zero_sum_payoff(a, d)).abs());
        }
    }
    let exact = solve_bruteforce(spec)?;
    let compact = solve_compact(spec, &SolverConfig::default())?;
    worst = worst.max((exact.value - compact.value).abs());
    let (ga, gd) = best_response_gap(spec, &compact)?;
    worst = worst.max(ga).max(gd);
    Ok(if worst <= 1e-6 && compact.converged {
        VerifyOutcome::Consistent { discrepancy: worst }
    } else {
        VerifyOutcome::Discrepancy { discrepancy: worst }
    })
}

#[derive(Debug, Parser)]
#[command(name = "nasg", version, about = "Solve attacker-defender games with set-valued payoffs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SolveFlags {
    /// Best-response gap below which the double oracle stops.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Defender oracle: auto, bruteforce, separable or additive.
    #[arg(long, default_value = "auto")]
    pub oracle: OracleMethod,
    /// Write one JSON record per double-oracle round to stderr.
    #[arg(long)]
    pub trace: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the common utilities and the support set of a game.
    Transform {
        game: PathBuf,
        /// Use rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Solve a game with the compact double oracle.
    Solve {
        game: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        /// Solve restricted games in rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Build and solve a network game from a graph file.
    Net {
        graph: PathBuf,
        /// connected_pairs, largest_component or weighted_component_sum.
        #[arg(long, default_value = "connected_pairs")]
        value_fn: String,
        /// Exponent of weighted_component_sum.
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        /// node_removal or threshold_cascade.
        #[arg(long, default_value = "node_removal")]
        failure: String,
        /// Threshold of threshold_cascade.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Attacker cap.
        #[arg(long, default_value_t = 2)]
        c: usize,
        /// Common utilities with magnitude at most this are dropped.
        #[arg(long, default_value_t = 0.0)]
        eps_c: f64,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Cross-check the compact solver against the normal-form solver.
    Verify { game: PathBuf },
}

fn solver_config(flags: &SolveFlags, exact: bool) -> Result<SolverConfig> {
    if !(flags.tol >= 0.0 && flags.tol.is_finite()) {
        return Err(NasgError::InvalidInput(format!("--tol {} must be finite and nonnegative", flags.tol)));
    }
    Ok(SolverConfig { eps_gap: flags.tol, oracle: flags.oracle, exact, ..SolverConfig::default() })
}

fn report_summary(file: &ReportFile, report: &EquilibriumReport) -> String {
    let mut out = String::new();
    writeln!(out, "value: {}", file.value).unwrap();
    writeln!(out, "iterations: {}  support size: {}  oracle calls: {}", file.iterations, file.support_size, report.oracle_calls)
        .unwrap();
    writeln!(out, "gaps: attacker {:e}  defender {:e}", file.gaps[0], file.gaps[1]).unwrap();
    for (name, side) in [("defender", &file.defender), ("attacker", &file.attacker)] {
        writeln!(out, "{name}:").unwrap();
        for e in side {
            writeln!(out, "  {:<16} {}", Subset::from_targets(&e.set.0).map(|s| s.to_string()).unwrap_or_default(), e.prob)
                .unwrap();
        }
    }
    out
}

fn emit(flags: &SolveFlags, file: &ReportFile, report: &EquilibriumReport, extra: &str) -> Result<()> {
    if flags.trace {
        for r in &report.trace {
            eprintln!("{}", serde_json::to_string(r).expect("trace serializes"));
        }
    }
    if let Some(path) = &flags.out {
        std::fs::write(path, file.to_json())?;
    }
    if flags.json {
        print!("{}", file.to_json());
    } else {
        print!("{}{}", report_summary(file, report), extra);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Transform { game, exact } => {
            print!("{}", cmd_transform(&load_game(&game)?, exact)?);
            Ok(0)
        }
        Command::Solve { game, flags, exact } => {
            let spec = load_game(&game)?;
            let out = cmd_solve(&spec, &solver_config(&flags, exact)?)?;
            emit(&flags, &out.file, &out.report, "")?;
            Ok(0)
        }
        Command::Net { graph, value_fn, exponent, failure, theta, c, eps_c, flags } => {
            let net = Network::parse(&std::fs::read_to_string(&graph)?)?;
            let t = ValueFunction::from_name(&value_fn, exponent)?;
            let f = FailureOperator::from_name(&failure, theta)?;
            let out = cmd_net(&net, t, f, c, eps_c, &solver_config(&flags, false)?)?;
            emit(&flags, &out.file, &out.report, &approximation_summary(&out.approx))?;
            Ok(0)
        }
        Command::Verify { game } => {
            let outcome = cmd_verify(&load_game(&game)?)?;
            match &outcome {
                VerifyOutcome::Consistent { discrepancy } => println!("ok: max discrepancy {discrepancy:e}"),
                VerifyOutcome::Discrepancy { discrepancy } => println!("discrepancy: {discrepancy:e}"),
                VerifyOutcome::Unverifiable { entries } => {
                    println!("unverifiable at this size: normal form has {entries} entries")
                }
            }
            Ok(outcome.exit_code())
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PENNIES: &str = r#"{"n": 2, "c": 1, "k": 1,
        "benefit": [{"set": [1], "value": 1}, {"set": [2], "value": 1}, {"set": [1, 2], "value": 2}]}"#;

    #[test]
    fn game_file_roundtrip() {
        let file = GameFile::parse(PENNIES).unwrap();
        let spec = file.to_spec().unwrap();
        assert_eq!(GameFile::parse(&file.to_json()).unwrap(), file);
        let again = GameFile::from_spec(&spec);
        assert_eq!(again.to_spec().unwrap(), spec);
        assert_eq!(again, file);
    }

    #[test]
    fn game_file_validation() {
        let zero = r#"{"n": 2, "c": 1, "k": 1,
  "benefit": [{"set": [0], "value": 1}]}"#;
        let err = GameFile::parse(zero).unwrap_err();
        assert!(matches!(err, NasgError::Parse(_)));
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(GameFile::parse(r#"{"n":2,"c":1,"k":1,"benefit":[{"set":[2,1],"value":1}]}"#).is_err());
        let dup = GameFile::parse(r#"{"n":2,"c":1,"k":1,"benefit":[{"set":[1],"value":1},{"set":[1],"value":2}]}"#).unwrap();
        assert!(dup.to_spec().unwrap_err().to_string().contains("duplicate"));
        let out = GameFile::parse(r#"{"n":2,"c":1,"k":1,"benefit":[{"set":[3],"value":1}]}"#).unwrap();
        assert!(matches!(out.to_spec(), Err(NasgError::Parse(_))));
        let caps = GameFile::parse(r#"{"n":2,"c":3,"k":1}"#).unwrap();
        assert!(caps.to_spec().is_err());
    }

    #[test]
    fn transform_rows() {
        let n2 = r#"{"n":2,"c":2,"k":2,"benefit":[{"set":[1],"value":1},{"set":[2],"value":2},{"set":[1,2],"value":5}]}"#;
        let spec = GameFile::parse(n2).unwrap().to_spec().unwrap();
        let text = cmd_transform(&spec, false).unwrap();
        assert_eq!(text.lines().count(), 2 + 4);
        let row = text.lines().find(|l| l.starts_with("{1,2}")).unwrap();
        assert_eq!(row.split_whitespace().nth(1), Some("2"));
        let exact = cmd_transform(&spec, true).unwrap();
        assert!(exact.lines().any(|l| l.starts_with("{1,2}") && l.split_whitespace().nth(1) == Some("2")));

        let empty = GameFile::parse(r#"{"n":3,"c":3,"k":3}"#).unwrap().to_spec().unwrap();
        let text = cmd_transform(&empty, false).unwrap();
        assert!(text.starts_with("support size: 4\n"));
    }

    #[test]
    fn solve_report() {
        let spec = GameFile::parse(PENNIES).unwrap().to_spec().unwrap();
        let out = cmd_solve(&spec, &SolverConfig::default()).unwrap();
        assert!((out.file.value - 0.5).abs() < 1e-9);
        out.file.validate().unwrap();
        let json = out.file.to_json();
        assert_eq!(ReportFile::parse(&json).unwrap(), out.file);
        let again = cmd_solve(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(again.file.to_json(), json);
    }

    #[test]
    fn report_validation() {
        let bad = r#"{"value":0,"defender":[{"set":[],"prob":0.5}],"attacker":[{"set":[],"prob":1}],
            "support_size":1,"iterations":1,"gaps":[0,0]}"#;
        assert!(ReportFile::parse(bad).is_err());
    }

    #[test]
    fn verify_outcomes() {
        let spec = GameFile::parse(PENNIES).unwrap().to_spec().unwrap();
        assert!(matches!(cmd_verify(&spec).unwrap(), VerifyOutcome::Consistent { .. }));
        let zero = GameFile::parse(r#"{"n":3,"c":3,"k":3}"#).unwrap().to_spec().unwrap();
        assert_eq!(cmd_verify(&zero).unwrap(), VerifyOutcome::Consistent { discrepancy: 0.0 });
        let big = GameFile::parse(r#"{"n":24,"c":24,"k":24}"#).unwrap().to_spec().unwrap();
        assert_eq!(cmd_verify(&big).unwrap().exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["nasg", "frobnicate"]), 1);
        assert_eq!(run(["nasg", "solve", "/nonexistent/game.json"]), 1);
        assert_eq!(run(["nasg", "--help"]), 0);
    }
}
