//! The three commands, driven through their library entry points and the
//! installed binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use mapplan::bt_xml::{emit_xml, parse_xml};
use mapplan::cli::*;
use mapplan::config::RunConfig;
use mapplan::json::StnReport;
use mapplan_core::parser::parse_kb;
use tempfile::TempDir;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

fn config(pairs: &[(&str, &str)], out: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.set("out", &out.to_string_lossy()).unwrap();
    cfg.set("fixtures", &fx("kms/replay")).unwrap();
    for (k, v) in pairs {
        cfg.set(k, v).unwrap();
    }
    cfg
}

struct Outcome {
    exit: Exit,
    stdout: String,
    stderr: String,
}

fn call(f: fn(&RunConfig, &mut dyn std::io::Write, &mut dyn std::io::Write) -> Exit, cfg: &RunConfig) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let exit = f(cfg, &mut out, &mut err);
    Outcome { exit, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn artifact(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn blocks_args() -> Vec<(&'static str, String)> {
    vec![("hl", fx("blocks/hl.pl")), ("ll", fx("blocks/ll.pl"))]
}

fn plan_in(dir: &Path, kb: &[(&str, String)]) -> Outcome {
    let pairs: Vec<(&str, &str)> = kb.iter().map(|(k, v)| (*k, v.as_str())).collect();
    call(cmd_plan, &config(&pairs, dir))
}

#[test]
fn plan_writes_golden_listings() {
    let dir = TempDir::new().unwrap();
    let o = plan_in(dir.path(), &blocks_args());
    assert_eq!(o.exit, Exit::Success, "{}", o.stderr);
    assert_eq!(artifact(dir.path(), HL_PLAN_FILE), std::fs::read_to_string(fx("blocks/hl_plan.txt")).unwrap());
    assert_eq!(artifact(dir.path(), PLAN_FILE), std::fs::read_to_string(fx("blocks/plan.txt")).unwrap());
    assert_eq!(artifact(dir.path(), ENABLERS_FILE), std::fs::read_to_string(fx("blocks/enablers.txt")).unwrap());
    assert!(o.stdout.contains("makespan"), "{}", o.stdout);
    for f in [RESOURCES_FILE, SCHEDULE_FILE, STN_FILE, BT_FILE] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

fn makespan(dir: &Path) -> i64 {
    let v: serde_json::Value = serde_json::from_str(&artifact(dir, SCHEDULE_FILE)).unwrap();
    v["makespan"].as_i64().unwrap()
}

#[test]
fn second_agent_shortens_the_schedule() {
    let (one, two) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (dir, n) in [(&one, 1), (&two, 2)] {
        let kb = [("hl", fx(&format!("two_moves/hl_{n}.pl"))), ("ll", fx(&format!("two_moves/ll_{n}.pl")))];
        assert_eq!(plan_in(dir.path(), &kb).exit, Exit::Success);
    }
    assert!(makespan(two.path()) < makespan(one.path()));
    let resources = artifact(two.path(), RESOURCES_FILE);
    assert!(resources.contains("[0] agent-[agent(a1),agent(a2)]"), "{resources}");
}

#[test]
fn unsolvable_goal_exits_with_its_code() {
    let dir = TempDir::new().unwrap();
    let kb = [("hl", fx("unsolvable/hl.pl")), ("ll", fx("unsolvable/ll.pl"))];
    let o = plan_in(dir.path(), &kb);
    assert_eq!(o.exit, Exit::Unsolvable, "{}", o.stderr);
    assert_eq!(o.exit.code(), 4);
}

#[test]
fn tiny_depth_limit_is_reported() {
    let dir = TempDir::new().unwrap();
    let mut kb = blocks_args();
    kb.push(("max_depth", "2".into()));
    assert_eq!(plan_in(dir.path(), &kb).exit, Exit::LimitExceeded);
}

#[test]
fn missing_kb_file_is_a_failure() {
    let dir = TempDir::new().unwrap();
    let kb = [("hl", fx("blocks/nope.pl")), ("ll", fx("blocks/ll.pl"))];
    assert_eq!(plan_in(dir.path(), &kb).exit, Exit::Failure);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for n in [1, 2] {
        let kb = [("hl", fx(&format!("two_moves/hl_{n}.pl"))), ("ll", fx(&format!("two_moves/ll_{n}.pl")))];
        plan_in(a.path(), &kb);
        plan_in(b.path(), &kb);
        for f in [PLAN_FILE, HL_PLAN_FILE, ENABLERS_FILE, RESOURCES_FILE, SCHEDULE_FILE, STN_FILE, BT_FILE] {
            assert_eq!(artifact(a.path(), f), artifact(b.path(), f), "{f}");
        }
    }
}

#[test]
fn emitted_trees_and_networks_round_trip() {
    for n in [1, 2] {
        let dir = TempDir::new().unwrap();
        let kb = [("hl", fx(&format!("two_moves/hl_{n}.pl"))), ("ll", fx(&format!("two_moves/ll_{n}.pl")))];
        assert_eq!(plan_in(dir.path(), &kb).exit, Exit::Success);
        let xml = artifact(dir.path(), BT_FILE);
        assert_eq!(emit_xml(&parse_xml(&xml).unwrap()), xml);
        let stn: StnReport = serde_json::from_str(&artifact(dir.path(), STN_FILE)).unwrap();
        let back = StnReport::new(&stn.to_stn().unwrap());
        assert_eq!(mapplan::json::to_pretty(&back), artifact(dir.path(), STN_FILE));
    }
}

#[test]
fn emit_subset_is_honoured() {
    let dir = TempDir::new().unwrap();
    let mut kb = blocks_args();
    kb.push(("emit", "plan,bt".into()));
    assert_eq!(plan_in(dir.path(), &kb).exit, Exit::Success);
    assert!(dir.path().join(PLAN_FILE).is_file());
    assert!(dir.path().join(BT_FILE).is_file());
    assert!(!dir.path().join(SCHEDULE_FILE).exists());
    assert!(!dir.path().join(STN_FILE).exists());
}

#[test]
fn validate_accepts_the_fixture_kb() {
    let dir = TempDir::new().unwrap();
    let o = call(cmd_validate, &config(&[("hl", &fx("blocks/hl.pl")), ("ll", &fx("blocks/ll.pl"))], dir.path()));
    assert_eq!(o.exit, Exit::Success, "{}", o.stderr);
}

#[test]
fn validate_flags_a_missing_mapping_target() {
    let dir = TempDir::new().unwrap();
    let ll = std::fs::read_to_string(fx("blocks/ll.pl")).unwrap().replacen("grip_start(Agent)", "grasp_start(Agent)", 1);
    let path = dir.path().join("ll.pl");
    std::fs::write(&path, ll).unwrap();
    let o = call(cmd_validate, &config(&[("hl", &fx("blocks/hl.pl")), ("ll", &path.to_string_lossy())], dir.path()));
    assert_eq!(o.exit, Exit::InvalidKb);
    assert!(o.stderr.contains("grasp_start"), "{}", o.stderr);
}

#[test]
fn validate_reports_rejected_queries() {
    let dir = TempDir::new().unwrap();
    let q = [("hl_query", fx("kms/blocks/hl_query_no_stacking.txt")), ("ll_query", fx("kms/blocks/ll_query.txt"))];
    let pairs: Vec<(&str, &str)> = q.iter().map(|(k, v)| (*k, v.as_str())).collect();
    let o = call(cmd_validate, &config(&pairs, dir.path()));
    assert_eq!(o.exit, Exit::Rejected);
    assert!(o.stderr.contains("stacking"), "{}", o.stderr);
}

fn kbgen(mode: &str, dir: &Path, fixtures_dir: Option<&Path>) -> Outcome {
    let (hq, lq) = (fx("kms/blocks/hl_query.txt"), fx("kms/blocks/ll_query.txt"));
    let mut cfg = config(&[("hl_query", &hq), ("ll_query", &lq), ("kms_mode", mode)], dir);
    if let Some(f) = fixtures_dir {
        cfg.set("fixtures", &f.to_string_lossy()).unwrap();
    }
    call(cmd_kbgen, &cfg)
}

#[test]
fn kbgen_writes_parsable_kbs_in_both_modes() {
    let mut texts = Vec::new();
    for mode in ["stepwise", "whole"] {
        let dir = TempDir::new().unwrap();
        let o = kbgen(mode, dir.path(), None);
        assert_eq!(o.exit, Exit::Success, "{}", o.stderr);
        let hl = artifact(dir.path(), KBGEN_HL_FILE);
        let ll = artifact(dir.path(), KBGEN_LL_FILE);
        assert!(artifact(dir.path(), KBGEN_REPORT_FILE).starts_with(&format!("mode: {mode}\n")));
        let merged = parse_kb(&hl).unwrap().merge(parse_kb(&ll).unwrap());
        texts.push(merged);
        // The generated files plan like the hand-written ones.
        let plan_dir = TempDir::new().unwrap();
        let kb = [
            ("hl", dir.path().join(KBGEN_HL_FILE).to_string_lossy().into_owned()),
            ("ll", dir.path().join(KBGEN_LL_FILE).to_string_lossy().into_owned()),
        ];
        assert_eq!(plan_in(plan_dir.path(), &kb).exit, Exit::Success);
        assert_eq!(artifact(plan_dir.path(), PLAN_FILE), std::fs::read_to_string(fx("blocks/plan.txt")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn kbgen_without_a_fixture_is_a_transport_error() {
    let (dir, empty) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let o = kbgen("stepwise", dir.path(), Some(empty.path()));
    assert_eq!(o.exit, Exit::Transport);
    assert_eq!(o.exit.code(), 9);
    assert!(!dir.path().join(KBGEN_HL_FILE).exists());
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mapplan")).args(args).output().unwrap()
}

#[test]
fn binary_maps_outcomes_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let (hl, ll) = (fx("blocks/hl.pl"), fx("blocks/ll.pl"));
    let ok = bin(&["plan", "--hl", &hl, "--ll", &ll, "--out", &out]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join(BT_FILE).is_file());
    let (uhl, ull) = (fx("unsolvable/hl.pl"), fx("unsolvable/ll.pl"));
    assert_eq!(bin(&["plan", "--hl", &uhl, "--ll", &ull, "--out", &out]).status.code(), Some(4));
    assert_eq!(bin(&["plan", "--bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["validate", "--hl", &hl, "--ll", &ll]).status.code(), Some(0));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let body = format!("# blocks\nhl = {}\nll = {}\nmax_depth = 2\nout = artifacts\n", fx("blocks/hl.pl"), fx("blocks/ll.pl"));
    std::fs::write(&cfg_path, body).unwrap();
    let c = cfg_path.to_string_lossy().into_owned();
    assert_eq!(bin(&["plan", "--config", &c]).status.code(), Some(6));
    assert_eq!(bin(&["plan", "--config", &c, "--max-depth", "10"]).status.code(), Some(0));
    assert!(dir.path().join("artifacts").join(PLAN_FILE).is_file());
}
