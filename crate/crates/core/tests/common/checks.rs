//! Structural assertions shared by the network and tree tests.

use std::collections::BTreeMap;

use mapplan_core::bt::{leaf_id, simulate, BtNode, TickEvent};
use mapplan_core::schedule::{ScheduleModel, Stn};
use mapplan_core::Level;

/// The cycle is made of network arcs and its weight is negative.
pub fn assert_witness(stn: &Stn, cycle: &[usize]) {
    assert!(!cycle.is_empty());
    let arcs = stn.distance_edges();
    let mut total = 0;
    for k in 0..cycle.len() {
        let (u, v) = (cycle[k], cycle[(k + 1) % cycle.len()]);
        let w = arcs.iter().filter(|a| a.0 == u && a.1 == v).map(|a| a.2).min();
        total += w.unwrap_or_else(|| panic!("no arc {u} -> {v}"));
    }
    assert!(total < 0, "cycle weight {total}");
}

/// Leaves biject with the low-level actions, and the simulated execution
/// never starts an action before everything the network orders before it
/// has finished.
pub fn assert_tree_respects_network(stn: &Stn, m: &ScheduleModel, bt: &BtNode) {
    let mut ids: Vec<String> = bt.leaves().iter().map(|l| l.id.clone()).collect();
    ids.sort();
    let mut expected: Vec<String> =
        (0..m.actions.len()).filter(|&i| m.actions[i].level == Level::Low).map(leaf_id).collect();
    expected.sort();
    assert_eq!(ids, expected);
    for leaf in bt.leaves() {
        let i: usize = leaf.id[1..].parse().unwrap();
        assert_eq!(leaf.name, m.actions[i].name.as_str());
    }

    let trace = simulate(bt).expect("no deadlock");
    let at = |id: &str, ev: TickEvent| trace.iter().position(|t| t.id == id && t.event == ev).unwrap();
    let n = stn.nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for e in &stn.edges {
        reach[e.from][e.to] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let low: Vec<usize> = (0..m.actions.len()).filter(|&i| m.actions[i].level == Level::Low).collect();
    for &a in &low {
        for &b in &low {
            let (ea, sb) = (Stn::node_of_event(m.actions[a].end), Stn::node_of_event(m.actions[b].start));
            if a != b && reach[ea][sb] {
                assert!(
                    at(&leaf_id(a), TickEvent::Finished) < at(&leaf_id(b), TickEvent::Started),
                    "{a} must finish before {b} starts"
                );
            }
        }
    }
    let finished: BTreeMap<_, _> =
        trace.iter().filter(|t| t.event == TickEvent::Finished).map(|t| (t.id.clone(), t.tick)).collect();
    assert_eq!(finished.len(), low.len());
}
