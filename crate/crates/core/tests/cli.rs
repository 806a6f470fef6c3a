use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nasg::cli::{GameFile, ReportFile};
use nasg::{GameSpec, GroundSet, SetFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const PENNIES: &str = r#"{"n": 2, "c": 1, "k": 1,
  "benefit": [{"set": [1], "value": 1}, {"set": [2], "value": 1}, {"set": [1, 2], "value": 2}],
  "cost_attacker": [], "cost_defender": []}"#;

fn nasg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nasg")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(path: &Path) -> ReportFile {
    ReportFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_matching_pennies() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    let out = dir.path().join("report.json");
    let o = nasg(&["solve", s(&game), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!((r.value - 0.5).abs() < 1e-9);
    assert_eq!(r.defender.len(), 2);
    assert!(r.gaps.iter().all(|g| *g <= 1e-8));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("value: 0.5"));
}

#[test]
fn json_stdout_matches_file_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    let out = dir.path().join("r.json");
    let a = nasg(&["solve", s(&game), "--json", "--out", s(&out)]);
    let b = nasg(&["solve", s(&game), "--json"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, std::fs::read(&out).unwrap());
}

#[test]
fn trace_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    let o = nasg(&["solve", s(&game), "--trace", "--json"]);
    let records: Vec<serde_json::Value> = String::from_utf8_lossy(&o.stderr)
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let r: ReportFile = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(records.len(), r.iterations);
    assert!(records[0].get("restricted_value").is_some());
}

fn random_game(rng: &mut ChaCha8Rng) -> GameSpec {
    let n = rng.gen_range(2..=5);
    let g = GroundSet::new(n).unwrap();
    let mut f = |scale: f64| {
        let mut v: Vec<f64> = (0..1usize << n).map(|_| (rng.gen_range(0.0..scale) * 8.0f64).round() / 8.0).collect();
        v[0] = 0.0;
        SetFunction::from_dense(g, v).unwrap()
    };
    let (b, ca, cd) = (f(4.0), f(1.0), f(1.0));
    let c = rng.gen_range(1..=n);
    let k = rng.gen_range(1..=n);
    GameSpec::new(b, ca, cd, c, k).unwrap()
}

#[test]
fn oracle_flags_agree() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..6 {
        let spec = random_game(&mut rng);
        let game = write(&dir, &format!("g{i}.json"), &GameFile::from_spec(&spec).to_json());
        let (ra, rb) = (dir.path().join(format!("a{i}.json")), dir.path().join(format!("b{i}.json")));
        assert!(nasg(&["solve", s(&game), "--oracle", "auto", "--out", s(&ra)]).status.success());
        assert!(nasg(&["solve", s(&game), "--oracle", "bruteforce", "--out", s(&rb)]).status.success());
        assert!((report(&ra).value - report(&rb).value).abs() <= 1e-6);
        assert_eq!(nasg(&["verify", s(&game)]).status.code(), Some(0));
    }
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n": 2, "c": 1, "k": 1, "benefit": [{"set": [0], "value": 1}]}"#);
    let o = nasg(&["solve", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(nasg(&["solve", s(&bad), "--oracle", "simplex"]).status.code(), Some(1));
    assert_eq!(nasg(&["transform"]).status.code(), Some(1));
    let game = write(&dir, "pennies.json", PENNIES);
    // A pairwise support rules out the additive oracle.
    let pair = write(&dir, "pair.json", r#"{"n": 2, "c": 2, "k": 2, "benefit": [{"set": [1, 2], "value": 1}]}"#);
    assert_eq!(nasg(&["solve", s(&pair), "--oracle", "additive"]).status.code(), Some(3));
    assert_eq!(nasg(&["solve", s(&game), "--oracle", "additive"]).status.code(), Some(0));
}

#[test]
fn verify_statuses() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "zero.json", r#"{"n": 3, "c": 3, "k": 3}"#);
    let o = nasg(&["verify", s(&zero)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("discrepancy 0e0"));
    let big = write(&dir, "big.json", r#"{"n": 20, "c": 20, "k": 20}"#);
    let o = nasg(&["verify", s(&big)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("unverifiable at this size"));
}

#[test]
fn transform_output() {
    let dir = TempDir::new().unwrap();
    let game = write(
        &dir,
        "n2.json",
        r#"{"n": 2, "c": 2, "k": 2, "benefit": [{"set": [1], "value": 1}, {"set": [2], "value": 2}, {"set": [1, 2], "value": 5}]}"#,
    );
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["transform", s(&game)];
        args.extend_from_slice(extra);
        let o = nasg(&args);
        let text = String::from_utf8(o.stdout).unwrap();
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3].split_whitespace().take(2).collect::<Vec<_>>(), vec!["{1,2}", "2"]);
    }
    let additive = write(&dir, "add.json", r#"{"n": 2, "c": 2, "k": 2, "benefit": [{"set": [1], "value": 1}, {"set": [1, 2], "value": 3}, {"set": [2], "value": 2}]}"#);
    let text = String::from_utf8(nasg(&["transform", s(&additive)]).stdout).unwrap();
    assert!(text.starts_with("support size: 3\n"), "{text}");
}

#[test]
fn net_path_examples() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "path.txt", "nodes 3\n1 2\n2 3\n");
    let o = nasg(&["net", s(&graph), "--c", "2", "--eps-c", "1.5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("dropped terms: 1\n"), "{text}");
    assert!(text.contains("components: 1 {1,2,3}"));

    let o = nasg(&["net", s(&graph), "--c", "2", "--eps-c", "1e9"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("components: 3 {1} {2} {3}"), "{text}");

    let out = dir.path().join("exact.json");
    assert!(nasg(&["net", s(&graph), "--c", "2", "--eps-c", "0", "--out", s(&out)]).status.success());
    let r = report(&out);
    assert_eq!(r.error_bound, Some(0.0));
    // k = n and zero costs: the defender covers every target.
    assert!(r.value.abs() < 1e-9);

    let json = write(&dir, "path.json", r#"{"nodes": 3, "edges": [[1, 2], [2, 3]]}"#);
    let o = nasg(&["net", s(&json), "--c", "1", "--failure", "threshold_cascade", "--theta", "0.6"]);
    assert!(o.status.success());
    assert_eq!(nasg(&["net", s(&json), "--value-fn", "diameter"]).status.code(), Some(1));
}
