#![allow(dead_code)]

pub mod checks;
pub mod fuzz;
pub mod oracle;

use std::path::PathBuf;

use mapplan_core::bt::{stn_to_bt, BtNode};
use mapplan_core::enablers::{extract_resources, find_enablers, EnablerMatrix, ResourceCatalog};
use mapplan_core::parser::parse_kb;
use mapplan_core::planner::{expand_mappings, plan_hl, Planner, ProjectedGoalOrder, SearchLimits, Strategy};
use mapplan_core::schedule::{build_model, solve, to_stn, Schedule, ScheduleModel, Stn};
use mapplan_core::enablers::ResourceType;
use mapplan_core::parser::parse_term;
use mapplan_core::schedule::{ActionInstance, Event, Slot, SlotGroup};
use mapplan_core::{DurationBounds, Level, Problem, TOPlan, Term};
use rand::rngs::StdRng;
use rand::Rng;

pub const KB_FILES: &[&str] = &[
    "blocks/hl.pl",
    "blocks/ll.pl",
    "two_moves/hl_1.pl",
    "two_moves/ll_1.pl",
    "two_moves/hl_2.pl",
    "two_moves/ll_2.pl",
    "smoke/hl.pl",
    "smoke/ll.pl",
    "unsolvable/hl.pl",
    "unsolvable/ll.pl",
];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load(hl: &str, ll: &str) -> Problem {
    let h = parse_kb(&read(hl)).expect("hl parses");
    let l = parse_kb(&read(ll)).expect("ll parses");
    h.merge(l)
}

pub fn blocks() -> Problem {
    load("blocks/hl.pl", "blocks/ll.pl")
}

pub fn two_moves(agents: usize) -> Problem {
    load(&format!("two_moves/hl_{agents}.pl"), &format!("two_moves/ll_{agents}.pl"))
}

pub fn smoke() -> Problem {
    load("smoke/hl.pl", "smoke/ll.pl")
}

pub struct Run {
    pub hl: TOPlan,
    pub full: TOPlan,
    pub catalog: ResourceCatalog,
    pub enablers: EnablerMatrix,
    pub model: ScheduleModel,
    pub schedule: Schedule,
    pub stn: Stn,
    pub bt: BtNode,
}

pub fn run_with(p: &Problem, hl: TOPlan) -> Run {
    let full = expand_mappings(&hl, p).unwrap();
    let catalog = extract_resources(p, &full);
    let enablers = find_enablers(&full, p, &catalog).unwrap();
    let model = build_model(&full, &enablers, &catalog, p).unwrap();
    let schedule = solve(&model).unwrap();
    let stn = to_stn(&schedule, &model);
    let bt = stn_to_bt(&stn, &schedule, &model).unwrap();
    Run { hl, full, catalog, enablers, model, schedule, stn, bt }
}

pub fn run(p: &Problem) -> Run {
    run_with(p, plan_hl(p, SearchLimits::default()).unwrap())
}

/// The goal-directed depth-first configuration used for larger instances.
pub fn run_guided(p: &Problem, max_depth: usize) -> Run {
    let limits = SearchLimits { strategy: Strategy::DepthFirst, max_depth, ..SearchLimits::default() };
    let hl = Planner::new(p).with_limits(limits).with_order(&ProjectedGoalOrder).plan().unwrap();
    run_with(p, hl)
}

/// Every fixture that is expected to plan and schedule.
pub fn solvable() -> Vec<(&'static str, Problem)> {
    vec![("blocks", blocks()), ("two_moves_1", two_moves(1)), ("two_moves_2", two_moves(2))]
}

fn agents(n: usize) -> ResourceType {
    ResourceType {
        name: "agent".into(),
        pattern: parse_term("agent(_)").unwrap(),
        instances: (0..n).map(|i| parse_term(&format!("agent(r{i})")).unwrap()).collect(),
    }
}

/// Flat model: action `i` owns events `2i` and `2i + 1`.
pub fn flat_model(
    durations: &[u64],
    slot: &[Option<usize>],
    groups: Vec<Vec<usize>>,
    instances: usize,
    dag: &[(usize, usize)],
) -> ScheduleModel {
    let mut m = ScheduleModel { resources: vec![agents(instances)], ..Default::default() };
    for (i, &d) in durations.iter().enumerate() {
        let head = Term::compound(format!("job{i}"), vec![Term::var("R")]);
        m.events.push(Event { head: head.clone(), step: 2 * i });
        m.events.push(Event { head: head.clone(), step: 2 * i + 1 });
        m.actions.push(ActionInstance {
            name: format!("job{i}").into(),
            head,
            param_names: vec!["R".into()],
            level: Level::Low,
            start: 2 * i,
            end: 2 * i + 1,
            bounds: DurationBounds::fixed(d),
            occupies: true,
            parent: None,
            slots: slot[i].map(|group| Slot { param: 0, group }).into_iter().collect(),
        });
    }
    m.groups = groups
        .into_iter()
        .map(|candidates| SlotGroup { resource_type: 0, candidates, original: None })
        .collect();
    m.precedence = dag.iter().map(|&(a, b)| (2 * a + 1, 2 * b)).collect();
    m
}

pub fn random_model(rng: &mut StdRng, max_actions: usize) -> ScheduleModel {
    let n = rng.gen_range(1..=max_actions);
    let instances = rng.gen_range(1..=3);
    let group_count = rng.gen_range(1..=4);
    let groups: Vec<Vec<usize>> = (0..group_count)
        .map(|_| {
            let mut c: Vec<usize> = (0..instances).filter(|_| rng.gen_bool(0.7)).collect();
            if c.is_empty() {
                c.push(rng.gen_range(0..instances));
            }
            c
        })
        .collect();
    let durations: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let slot: Vec<Option<usize>> =
        (0..n).map(|_| rng.gen_bool(0.85).then(|| rng.gen_range(0..group_count))).collect();
    let mut dag = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.2) {
                dag.push((a, b));
            }
        }
    }
    flat_model(&durations, &slot, groups, instances, &dag)
}
