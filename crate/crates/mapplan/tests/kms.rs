//! Offline KB generation and query validation against replay fixtures.

use std::path::PathBuf;

use mapplan::kms::{
    digest, generate_kb, validate_queries, GenerationSession, KmsError, Mode, Queries, RecordingTransport,
    ReplayTransport, ScriptedTransport, Transport, TransportError, Verdict,
};
use mapplan_core::parser::{parse_kb, parse_term};
use mapplan_core::Level;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn text(rel: &str) -> String {
    std::fs::read_to_string(root().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn reply(name: &str) -> String {
    text(&format!("kms/blocks/replies/{name}.md"))
}

fn queries() -> Queries {
    Queries { hl: text("kms/blocks/hl_query.txt"), ll: text("kms/blocks/ll_query.txt") }
}

fn replay() -> ReplayTransport {
    ReplayTransport::new(root().join("kms/replay"))
}

const STEPWISE: &[&str] =
    &["hl_general", "hl_init_goal", "hl_actions", "ll_general", "ll_init_goal", "ll_actions", "ll_mappings"];
const WHOLE: &[&str] = &["hl_whole", "ll_whole"];

/// Rewrites `fixtures/kms/replay` from the canned replies. Run after
/// changing a prompt: `cargo test -p mapplan --test kms -- --ignored`.
#[test]
#[ignore]
fn record_replay_fixtures() {
    let dir = root().join("kms/replay");
    let _ = std::fs::remove_dir_all(&dir);
    let q = queries();
    let rec = |names: &[&str]| RecordingTransport::new(ScriptedTransport::new(names.iter().map(|n| reply(n))), &dir);
    validate_queries(&q.hl, &q.ll, &rec(&["validate_accept"])).unwrap();
    validate_queries(&text("kms/blocks/hl_query_no_stacking.txt"), &q.ll, &rec(&["validate_reject"])).unwrap();
    for (mode, names) in [(Mode::Stepwise, STEPWISE), (Mode::Whole, WHOLE)] {
        let mut s = GenerationSession::new(mode);
        generate_kb(&mut s, &q, &rec(names)).unwrap();
    }
}

#[test]
fn canonical_queries_are_accepted() {
    let q = queries();
    assert_eq!(validate_queries(&q.hl, &q.ll, &replay()).unwrap(), Verdict::Accepted);
}

#[test]
fn query_without_stacking_is_rejected_with_reason() {
    let q = queries();
    let v = validate_queries(&text("kms/blocks/hl_query_no_stacking.txt"), &q.ll, &replay()).unwrap();
    let Verdict::Rejected(why) = v else { panic!("accepted") };
    assert_eq!(why, reply("validate_reject").trim());
    assert!(why.contains("Putting one block on top of another is not among the things the agent can do"));
}

#[test]
fn unknown_prompt_has_no_fixture() {
    let err = validate_queries("something else", "entirely", &replay()).unwrap_err();
    assert!(matches!(err, KmsError::Transport(TransportError::MissingFixture { .. })));
}

fn generated(mode: Mode) -> GenerationSession {
    let mut s = GenerationSession::new(mode);
    generate_kb(&mut s, &queries(), &replay()).unwrap();
    s
}

#[test]
fn stepwise_fragments_parse_and_rebuild_the_blocks_kb() {
    let s = generated(Mode::Stepwise);
    assert_eq!(s.fragments.len(), 7);
    assert!(s.fragments.iter().all(|f| f.accepted()), "{}", s.report());
    assert!(s.is_clean(), "{}", s.report());
    let hl = parse_kb(&s.kb_text(Level::High)).unwrap();
    let ll = parse_kb(&s.kb_text(Level::Low)).unwrap();
    assert_eq!(hl, parse_kb(&text("blocks/hl.pl")).unwrap());
    assert_eq!(ll, parse_kb(&text("blocks/ll.pl")).unwrap());
    let arm = parse_term("ll_arm(a1)").unwrap();
    assert!(ll.general_kb.contains(&arm));
}

#[test]
fn whole_mode_gives_the_same_kbs() {
    let whole = generated(Mode::Whole);
    let step = generated(Mode::Stepwise);
    assert_eq!(whole.fragments.len(), 2);
    assert!(whole.is_clean());
    for level in [Level::High, Level::Low] {
        assert_eq!(parse_kb(&whole.kb_text(level)).unwrap(), parse_kb(&step.kb_text(level)).unwrap());
    }
}

#[test]
fn sessions_are_reproducible() {
    for mode in [Mode::Stepwise, Mode::Whole] {
        let (a, b) = (generated(mode), generated(mode));
        assert_eq!(a, b);
        assert_eq!(a.report(), b.report());
    }
}

#[test]
fn broken_fragment_is_reported_not_repaired() {
    let mut replies: Vec<String> = STEPWISE.iter().map(|n| reply(n)).collect();
    replies[2] = "```prolog\naction(oops(X), [], [], [], [add(done(X))]\n```\n".into();
    let t = ScriptedTransport::new(replies);
    let mut s = GenerationSession::new(Mode::Stepwise);
    generate_kb(&mut s, &queries(), &t).unwrap();
    assert!(!s.fragments[2].accepted());
    assert!(s.fragments[2].text.contains("oops"));
    assert!(!s.is_clean());
    assert!(s.report().contains("high/actions: 1 lines, rejected"));
}

#[test]
fn replay_keys_are_message_digests() {
    let dir = root().join("kms/replay");
    let names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    // validate x2, stepwise 7, whole 2
    assert_eq!(names.len(), 11, "{names:?}");
    for n in names {
        let stem = n.strip_suffix(".txt").expect("txt fixture");
        assert_eq!(stem.len(), 64);
        assert!(stem.bytes().all(|b| b.is_ascii_hexdigit()));
    }
    assert_eq!(digest(&[]).len(), 64);
}

#[test]
fn transport_is_object_safe() {
    let t: Box<dyn Transport> = Box::new(replay());
    let q = queries();
    assert_eq!(validate_queries(&q.hl, &q.ll, t.as_ref()).unwrap(), Verdict::Accepted);
}
