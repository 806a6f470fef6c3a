use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use nasg_ffi::*;

fn last_error() -> String {
    let p = nasg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn pennies() -> *mut NasgGame {
    let mut game = ptr::null_mut();
    assert_eq!(nasg_game_new(2, 1, 1, &mut game), NasgStatus::Ok);
    for (mask, v) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
        assert_eq!(nasg_game_set(game, NasgFunction::Benefit, mask, v), NasgStatus::Ok);
    }
    game
}

#[test]
fn solve_through_handles() {
    unsafe {
        let game = pennies();
        let mut report = ptr::null_mut();
        assert_eq!(nasg_solve(game, -1.0, NasgOracle::Auto, &mut report), NasgStatus::Ok);
        let mut value = 0.0;
        assert_eq!(nasg_report_value(report, &mut value), NasgStatus::Ok);
        assert!((value - 0.5).abs() < 1e-9);
        let mut converged = false;
        assert_eq!(nasg_report_converged(report, &mut converged), NasgStatus::Ok);
        assert!(converged);
        let (mut ga, mut gd) = (1.0, 1.0);
        assert_eq!(nasg_report_gaps(report, &mut ga, &mut gd), NasgStatus::Ok);
        assert!(ga <= 1e-8 && gd <= 1e-8);

        let mut count = 0;
        assert_eq!(nasg_report_atom_count(report, NasgSide::Defender, &mut count), NasgStatus::Ok);
        assert_eq!(count, 2);
        let (mut mask, mut prob) = (0u32, 0.0);
        assert_eq!(nasg_report_atom(report, NasgSide::Defender, 0, &mut mask, &mut prob), NasgStatus::Ok);
        assert_eq!(mask, 1);
        assert!((prob - 0.5).abs() < 1e-9);
        assert_eq!(nasg_report_atom(report, NasgSide::Defender, 5, &mut mask, &mut prob), NasgStatus::OutOfRange);
        assert!(last_error().contains("atom 5"));

        let mut json = ptr::null_mut();
        assert_eq!(nasg_report_to_json(report, &mut json), NasgStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        nasg_string_free(json);
        assert!(nasg::cli::ReportFile::parse(&text).is_ok());

        let mut brute = ptr::null_mut();
        assert_eq!(nasg_solve_bruteforce(game, &mut brute), NasgStatus::Ok);
        let mut bv = 0.0;
        nasg_report_value(brute, &mut bv);
        assert!((bv - value).abs() < 1e-9);

        nasg_report_free(brute);
        nasg_report_free(report);
        nasg_game_free(game);
    }
}

#[test]
fn json_roundtrip() {
    unsafe {
        let game = pennies();
        let mut json = ptr::null_mut();
        assert_eq!(nasg_game_to_json(game, &mut json), NasgStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(nasg_game_from_json(json, &mut again), NasgStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(nasg_game_to_json(again, &mut json2), NasgStatus::Ok);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(json2));
        nasg_string_free(json);
        nasg_string_free(json2);
        nasg_game_free(again);
        nasg_game_free(game);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut game = ptr::null_mut();
        assert_eq!(nasg_game_new(0, 0, 0, &mut game), NasgStatus::InvalidInput);
        assert!(game.is_null());
        assert_eq!(nasg_game_new(3, 4, 1, &mut game), NasgStatus::InvalidInput);
        assert_eq!(nasg_game_new(2, 1, 1, ptr::null_mut()), NasgStatus::NullPointer);
        assert!(last_error().contains("out is null"));

        let bad = CString::new(r#"{"n": 2, "c": 1, "k": 1, "benefit": [{"set": [0], "value": 1}]}"#).unwrap();
        assert_eq!(nasg_game_from_json(bad.as_ptr(), &mut game), NasgStatus::Parse);
        assert!(last_error().contains("line 1"));

        let game = pennies();
        assert_eq!(nasg_game_set(game, NasgFunction::CostDefender, 1 << 5, 1.0), NasgStatus::InvalidInput);
        assert_eq!(nasg_game_set(game, NasgFunction::Benefit, 1, f64::NAN), NasgStatus::InvalidInput);
        let mut report = ptr::null_mut();
        assert_eq!(nasg_solve(ptr::null(), 1e-7, NasgOracle::Auto, &mut report), NasgStatus::NullPointer);
        nasg_game_free(game);

        let mut pair = ptr::null_mut();
        nasg_game_new(2, 2, 2, &mut pair);
        nasg_game_set(pair, NasgFunction::Benefit, 3, 1.0);
        assert_eq!(nasg_solve(pair, 1e-7, NasgOracle::Additive, &mut report), NasgStatus::Solver);
        nasg_game_free(pair);
        nasg_game_free(ptr::null_mut());
        nasg_report_free(ptr::null_mut());
        nasg_string_free(ptr::null_mut());
    }
}

#[test]
fn dense_transforms() {
    let f = [0.0, 1.0, 2.0, 5.0];
    let mut fc = [0.0; 4];
    unsafe {
        assert_eq!(nasg_moebius(2, f.as_ptr(), fc.as_mut_ptr()), NasgStatus::Ok);
        assert_eq!(fc, [0.0, 1.0, 2.0, 2.0]);
        let mut back = [0.0; 4];
        assert_eq!(nasg_zeta(2, fc.as_ptr(), back.as_mut_ptr()), NasgStatus::Ok);
        assert_eq!(back, f);
        assert_eq!(nasg_moebius(40, f.as_ptr(), fc.as_mut_ptr()), NasgStatus::Capacity);
        assert_eq!(nasg_moebius(2, ptr::null(), fc.as_mut_ptr()), NasgStatus::NullPointer);
    }
}

#[test]
fn network_game() {
    let graph = CString::new("nodes 3\n1 2\n2 3\n").unwrap();
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(
            nasg_net_solve(graph.as_ptr(), NasgValueFunction::ConnectedPairs, 0.0, 0.0, 2, 2.5, &mut report),
            NasgStatus::Ok
        );
        let mut json = ptr::null_mut();
        nasg_report_to_json(report, &mut json);
        let r = nasg::cli::ReportFile::parse(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(r.error_bound, Some(20.0));
        nasg_string_free(json);
        nasg_report_free(report);

        let bad = CString::new("nodes 3\n1 9\n").unwrap();
        let status = nasg_net_solve(bad.as_ptr(), NasgValueFunction::ConnectedPairs, 0.0, 0.0, 1, 0.0, &mut report);
        assert_eq!(status, NasgStatus::Parse);
    }
}

fn newest_static_lib(profile_dir: &Path) -> PathBuf {
    let deps = std::fs::read_dir(profile_dir.join("deps")).unwrap().filter_map(|e| e.ok()).map(|e| e.path());
    std::iter::once(profile_dir.join("libnasg_ffi.a"))
        .chain(deps.filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.starts_with("libnasg_ffi") && name.ends_with(".a")
        }))
        .filter_map(|p| Some((std::fs::metadata(&p).ok()?.modified().ok()?, p)))
        .max()
        .map(|(_, p)| p)
        .expect("static library built")
}

/// Compiles a C program against the generated header and the static
/// library and runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = newest_static_lib(profile_dir);
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "nasg.h"

int main(void) {
    NasgGame *game = NULL;
    if (nasg_game_new(2, 1, 1, &game) != NASG_STATUS_OK) return 10;
    nasg_game_set(game, NASG_FUNCTION_BENEFIT, 1u, 1.0);
    nasg_game_set(game, NASG_FUNCTION_BENEFIT, 2u, 1.0);
    NasgReport *report = NULL;
    if (nasg_solve(game, -1.0, NASG_ORACLE_AUTO, &report) != NASG_STATUS_OK) return 11;
    double value = 0.0;
    nasg_report_value(report, &value);
    printf("%.6f\n", value);
    if (nasg_game_new(0, 0, 0, &game) == NASG_STATUS_OK) return 12;
    printf("%s\n", nasg_last_error());
    nasg_report_free(report);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0.500000\n"), "{text}");
    assert!(text.contains("invalid input"), "{text}");
}
