mod common;

use std::time::{Duration, Instant};

use common::*;
use mapplan_core::bt::BtNode;
use mapplan_core::planner::{plan_hl, PlanError, SearchLimits};
use mapplan_core::schedule::{check_schedule, check_stn, StnVerdict};
use mapplan_core::Level;

#[test]
fn blocks_plans_match_golden_listings() {
    let t = Instant::now();
    let r = run(&blocks());
    assert_eq!(r.hl.listing(), read("blocks/hl_plan.txt"));
    assert_eq!(r.full.listing(), read("blocks/plan.txt"));
    assert_eq!(r.full.len(), 20);
    assert!(t.elapsed() < Duration::from_secs(5), "took {:?}", t.elapsed());
}

#[test]
fn blocks_enablers_match_golden_listing() {
    let r = run(&blocks());
    assert_eq!(r.enablers.listing(), read("blocks/enablers.txt"));
    assert_eq!(r.enablers.size(), 22);
}

#[test]
fn two_agent_resource_list() {
    let r = run(&two_moves(2));
    let listing = r.catalog.listing();
    assert!(listing.contains("Resources list:\n[0] agent-[agent(a1),agent(a2)]\n"), "{listing}");
    assert!(listing.starts_with("Resources:\n[0] agent-2\n"), "{listing}");
}

#[test]
fn two_agent_model_has_ten_durative_actions() {
    let r = run(&two_moves(2));
    let m = &r.model;
    assert_eq!(m.actions.len(), 10);
    assert_eq!(m.actions.iter().filter(|a| a.level == Level::High).count(), 2);
    // The agent of every low-level action is tied to its parent's slot.
    for a in m.actions.iter().filter(|a| a.level == Level::Low) {
        let parent = &m.actions[a.parent.expect("mapped")];
        assert_eq!(a.slots.len(), 1);
        assert_eq!(a.slots[0].group, parent.slots[0].group);
    }
    assert_eq!(m.groups.len(), 2);
}

#[test]
fn second_agent_runs_moves_in_parallel() {
    let one = run(&two_moves(1));
    let two = run(&two_moves(2));
    assert_eq!(one.schedule.makespan, 8);
    assert_eq!(two.schedule.makespan, 4);
    assert!(two.schedule.makespan < one.schedule.makespan);
    assert!(one.schedule.optimal && two.schedule.optimal);
    // Each move keeps one agent throughout, and the moves use different ones.
    assert_ne!(two.schedule.assignment[0], two.schedule.assignment[1]);
    assert_eq!(one.schedule.assignment, vec![0, 0]);
}

#[test]
fn schedules_pass_the_checker() {
    for (name, p) in solvable() {
        let r = run(&p);
        let v = check_schedule(&r.full, &p, &r.model, &r.schedule);
        assert!(v.is_empty(), "{name}: {}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "));
    }
}

#[test]
fn fixture_networks_are_consistent_and_tight() {
    for (name, p) in solvable() {
        let r = run(&p);
        assert_eq!(check_stn(&r.stn), StnVerdict::Consistent, "{name}");
        assert_eq!(r.stn.longest_path(), Some(r.schedule.makespan), "{name}");
    }
}

fn leaf_count(n: &BtNode) -> usize {
    match n {
        BtNode::Sequence(c) | BtNode::Parallel(c) => c.iter().map(leaf_count).sum(),
        BtNode::Action(_) => 1,
        BtNode::WaitFor(_) => 0,
    }
}

fn is_flat_sequence(n: &BtNode) -> bool {
    matches!(n, BtNode::Sequence(c) if c.iter().all(|x| matches!(x, BtNode::Action(_))))
}

#[test]
fn single_agent_tree_is_one_sequence() {
    for p in [blocks(), two_moves(1)] {
        let r = run(&p);
        assert!(is_flat_sequence(&r.bt), "{}", r.bt.outline());
        assert_eq!(leaf_count(&r.bt), 8);
    }
}

#[test]
fn two_agent_tree_is_parallel_of_sequences() {
    let r = run(&two_moves(2));
    let BtNode::Parallel(branches) = &r.bt else { panic!("{}", r.bt.outline()) };
    assert_eq!(branches.len(), 2);
    for b in branches {
        assert!(is_flat_sequence(b), "{}", r.bt.outline());
        assert_eq!(leaf_count(b), 4);
    }
}

#[test]
fn unsolvable_goal_is_reported() {
    let p = load("unsolvable/hl.pl", "unsolvable/ll.pl");
    assert_eq!(plan_hl(&p, SearchLimits::default()), Err(PlanError::Unsolvable));
}

#[test]
fn tight_limits_are_reported() {
    let limits = SearchLimits { max_depth: 2, ..SearchLimits::default() };
    assert!(matches!(plan_hl(&blocks(), limits), Err(PlanError::LimitExceeded { .. })));
}

#[test]
fn smoke_instance_end_to_end() {
    let p = smoke();
    assert_eq!(p.general_kb.family(&"pos".into(), 2).count(), 14);
    assert_eq!(p.general_kb.family(&"block".into(), 1).count(), 10);
    let t = Instant::now();
    let r = run_guided(&p, 8);
    assert!(t.elapsed() < Duration::from_secs(120));
    assert_eq!(r.hl.len(), 6);
    assert!(check_schedule(&r.full, &p, &r.model, &r.schedule).is_empty());
    assert_eq!(check_stn(&r.stn), StnVerdict::Consistent);
}
