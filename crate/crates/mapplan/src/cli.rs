//! The `validate`, `plan` and `kbgen` commands.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use mapplan_core::bt::stn_to_bt;
use mapplan_core::enablers::{extract_resources, find_enablers};
use mapplan_core::parser::{parse_kb, validate_kb};
use mapplan_core::planner::{
    expand_mappings, DeclarationOrder, GoalCountOrder, PlanError, Planner, ProjectedGoalOrder, SearchLimits,
    Strategy, SuccessorOrder,
};
use mapplan_core::schedule::{
    build_model, check_schedule, check_stn, solve_with, to_stn, ScheduleError, SolveOptions, StnVerdict,
};
use mapplan_core::{Level, Problem};

use crate::bt_xml::emit_xml;
use crate::config::{OrderKind, RunConfig, SearchKind, TransportKind};
use crate::json::{to_pretty, ScheduleReport, StnReport};
use crate::kms::{
    generate_kb, validate_queries_with, GenerationSession, HttpTransport, KmsError, Queries, ReplayTransport,
    Transport, Verdict,
};

/// Process exit codes. Every failure mode maps to exactly one code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// I/O failure or bad configuration.
    Failure = 1,
    /// Command-line usage error (reported by the argument parser).
    Usage = 2,
    /// The KB does not parse or has error-level diagnostics.
    InvalidKb = 3,
    /// The goal is unreachable.
    Unsolvable = 4,
    /// No total order up to the retry bound could be scheduled.
    Infeasible = 5,
    /// Search or solver budget exhausted.
    LimitExceeded = 6,
    /// The schedule checker or the temporal network rejected the result.
    CheckFailed = 7,
    /// The model judged the task descriptions inconsistent.
    Rejected = 8,
    Transport = 9,
    /// A model answer had no usable content.
    Extraction = 10,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

pub const PLAN_FILE: &str = "plan.txt";
pub const HL_PLAN_FILE: &str = "hl_plan.txt";
pub const ENABLERS_FILE: &str = "enablers.txt";
pub const RESOURCES_FILE: &str = "resources.txt";
pub const SCHEDULE_FILE: &str = "schedule.json";
pub const STN_FILE: &str = "stn.json";
pub const BT_FILE: &str = "bt.xml";

fn read(path: &Path, err: &mut dyn Write) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "{}: {e}", path.display());
        Exit::Failure
    })
}

fn parse_file(path: &Path, err: &mut dyn Write) -> Result<Problem, Exit> {
    let text = read(path, err)?;
    parse_kb(&text).map_err(|diags| {
        for d in diags {
            let _ = writeln!(err, "{}:{d}", path.display());
        }
        Exit::InvalidKb
    })
}

/// Parses the configured KB files and runs static validation.
pub fn load_problem(cfg: &RunConfig, err: &mut dyn Write) -> Result<Problem, Exit> {
    let p = match (&cfg.kb, &cfg.hl, &cfg.ll) {
        (Some(kb), None, None) => parse_file(kb, err)?,
        (None, Some(hl), Some(ll)) => {
            let h = parse_file(hl, err);
            let l = parse_file(ll, err);
            h?.merge(l?)
        }
        _ => {
            let _ = writeln!(err, "give either a merged KB or both the high- and low-level KB files");
            return Err(Exit::Failure);
        }
    };
    let diags = validate_kb(&p);
    for d in &diags {
        let _ = writeln!(err, "kb:{d}");
    }
    if diags.iter().any(|d| d.is_error()) {
        return Err(Exit::InvalidKb);
    }
    Ok(p)
}

fn write_artifact(cfg: &RunConfig, name: &str, body: &str, err: &mut dyn Write) -> Result<(), Exit> {
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, body).map_err(|e| {
        let _ = writeln!(err, "{}: {e}", path.display());
        Exit::Failure
    })
}

/// Plans, schedules and emits the configured artifacts.
pub fn cmd_plan(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    match plan(cfg, out, err) {
        Ok(()) => Exit::Success,
        Err(e) => e,
    }
}

fn plan(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    if let Err(e) = cfg.check().and_then(|_| cfg.prepare_out_dir()) {
        let _ = writeln!(err, "{e}");
        return Err(Exit::Failure);
    }
    let p = load_problem(cfg, err)?;
    let limits = SearchLimits {
        max_depth: cfg.max_depth,
        max_expansions: cfg.max_expansions,
        strategy: match cfg.search {
            SearchKind::IterativeDeepening => Strategy::IterativeDeepening,
            SearchKind::DepthFirst => Strategy::DepthFirst,
        },
        ..SearchLimits::default()
    };
    let order: &dyn SuccessorOrder = match cfg.order {
        OrderKind::Declaration => &DeclarationOrder,
        OrderKind::GoalCount => &GoalCountOrder,
        OrderKind::Projected => &ProjectedGoalOrder,
    };
    let mut planner = Planner::new(&p).with_limits(limits).with_order(order);

    for attempt in 0..=cfg.retries {
        let hl = match planner.plan() {
            Ok(hl) => hl,
            Err(PlanError::Unsolvable) if attempt == 0 => {
                let _ = writeln!(err, "unsolvable: no plan reaches the goal");
                return Err(Exit::Unsolvable);
            }
            Err(PlanError::Unsolvable) => {
                let _ = writeln!(err, "infeasible: no further total order exists");
                return Err(Exit::Infeasible);
            }
            Err(e @ PlanError::LimitExceeded { .. }) => {
                let _ = writeln!(err, "{e}");
                return Err(Exit::LimitExceeded);
            }
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return Err(Exit::InvalidKb);
            }
        };
        let retry = |why: &dyn std::fmt::Display, err: &mut dyn Write| {
            let _ = writeln!(err, "total order {attempt} rejected: {why}");
        };
        let full = match expand_mappings(&hl, &p) {
            Ok(f) => f,
            Err(e) => {
                retry(&e, err);
                planner.reject(hl.heads());
                continue;
            }
        };
        let catalog = extract_resources(&p, &full);
        let enablers = match find_enablers(&full, &p, &catalog) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return Err(Exit::CheckFailed);
            }
        };
        let model = match build_model(&full, &enablers, &catalog, &p) {
            Ok(m) => m,
            Err(e @ ScheduleError::UnsatisfiableSlot { .. }) => {
                retry(&e, err);
                planner.reject(hl.heads());
                continue;
            }
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return Err(Exit::CheckFailed);
            }
        };
        let started = Instant::now();
        let deadline = cfg.solve_timeout;
        let stop = move || started.elapsed() > deadline;
        let schedule = match solve_with(&model, &SolveOptions { max_nodes: None, stop: Some(&stop) }) {
            Ok(s) => s,
            Err(ScheduleError::Infeasible) => {
                retry(&ScheduleError::Infeasible, err);
                planner.reject(hl.heads());
                continue;
            }
            Err(ScheduleError::LimitExceeded) => {
                let _ = writeln!(err, "{}", ScheduleError::LimitExceeded);
                return Err(Exit::LimitExceeded);
            }
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return Err(Exit::CheckFailed);
            }
        };
        if !schedule.optimal {
            let _ = writeln!(err, "warning: solve timeout reached; the schedule may not be optimal");
        }

        let violations = check_schedule(&full, &p, &model, &schedule);
        for v in &violations {
            let _ = writeln!(err, "schedule check: {v}");
        }
        let stn = to_stn(&schedule, &model);
        let verdict = check_stn(&stn);
        if let StnVerdict::NegativeCycle(c) = &verdict {
            let _ = writeln!(err, "temporal network has a negative cycle through nodes {c:?}");
        }
        if !violations.is_empty() || verdict != StnVerdict::Consistent {
            return Err(Exit::CheckFailed);
        }
        let bt = stn_to_bt(&stn, &schedule, &model).map_err(|e| {
            let _ = writeln!(err, "{e}");
            Exit::CheckFailed
        })?;

        if cfg.emit.plan {
            write_artifact(cfg, HL_PLAN_FILE, &hl.listing(), err)?;
            write_artifact(cfg, PLAN_FILE, &full.listing(), err)?;
        }
        if cfg.emit.enablers {
            write_artifact(cfg, ENABLERS_FILE, &enablers.listing(), err)?;
            write_artifact(cfg, RESOURCES_FILE, &catalog.listing(), err)?;
        }
        if cfg.emit.schedule {
            write_artifact(cfg, SCHEDULE_FILE, &to_pretty(&ScheduleReport::new(&model, &schedule)), err)?;
        }
        if cfg.emit.stn {
            write_artifact(cfg, STN_FILE, &to_pretty(&StnReport::new(&stn)), err)?;
        }
        if cfg.emit.bt {
            write_artifact(cfg, BT_FILE, &emit_xml(&bt), err)?;
        }
        let _ = writeln!(
            out,
            "plan: {} high-level steps, {} steps expanded; makespan {}{}",
            hl.len(),
            full.len(),
            schedule.makespan,
            if schedule.optimal { "" } else { " (not proven optimal)" }
        );
        return Ok(());
    }
    let _ = writeln!(err, "infeasible: {} alternative total orders tried", cfg.retries);
    Err(Exit::Infeasible)
}

fn transport(cfg: &RunConfig) -> Box<dyn Transport> {
    match cfg.kms.transport {
        TransportKind::Replay => Box::new(ReplayTransport::new(&cfg.kms.fixtures)),
        TransportKind::Http => Box::new(HttpTransport::new(
            &cfg.kms.endpoint,
            &cfg.kms.model,
            &cfg.kms.api_key_env,
            cfg.kms.request_timeout,
        )),
    }
}

fn kms_exit(e: &KmsError) -> Exit {
    match e {
        KmsError::EmptyQuery(_) => Exit::Failure,
        KmsError::Transport(_) => Exit::Transport,
        KmsError::MalformedCompletion(_) | KmsError::Extraction(_) => Exit::Extraction,
    }
}

fn queries(cfg: &RunConfig, err: &mut dyn Write) -> Result<Option<Queries>, Exit> {
    match (&cfg.kms.hl_query, &cfg.kms.ll_query) {
        (Some(h), Some(l)) => Ok(Some(Queries { hl: read(h, err)?, ll: read(l, err)? })),
        (None, None) => Ok(None),
        _ => {
            let _ = writeln!(err, "give both the high- and low-level query files");
            Err(Exit::Failure)
        }
    }
}

fn check_queries(cfg: &RunConfig, q: &Queries, t: &dyn Transport, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    match validate_queries_with(&q.hl, &q.ll, t, &cfg.kms.accept_marker) {
        Ok(Verdict::Accepted) => {
            let _ = writeln!(out, "queries: consistent");
            Ok(())
        }
        Ok(Verdict::Rejected(why)) => {
            let _ = writeln!(err, "queries rejected:\n{why}");
            Err(Exit::Rejected)
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            Err(kms_exit(&e))
        }
    }
}

/// Static KB validation, plus the query consistency check when query
/// files are configured. A KB is optional if queries are given.
pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let run = |out: &mut dyn Write, err: &mut dyn Write| -> Result<(), Exit> {
        let q = queries(cfg, err)?;
        let has_kb = cfg.kb.is_some() || cfg.hl.is_some() || cfg.ll.is_some();
        if has_kb || q.is_none() {
            load_problem(cfg, err)?;
            let _ = writeln!(out, "kb: valid");
        }
        if let Some(q) = q {
            check_queries(cfg, &q, transport(cfg).as_ref(), out, err)?;
        }
        Ok(())
    };
    match run(out, err) {
        Ok(()) => Exit::Success,
        Err(e) => e,
    }
}

pub const KBGEN_HL_FILE: &str = "hl.pl";
pub const KBGEN_LL_FILE: &str = "ll.pl";
pub const KBGEN_REPORT_FILE: &str = "kbgen_report.txt";

/// Checks the queries, generates both KB levels and writes them with a
/// diagnostics report. Fails with `InvalidKb` if any fragment or the
/// assembled KB has errors; the files are written regardless.
pub fn cmd_kbgen(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    let run = |out: &mut dyn Write, err: &mut dyn Write| -> Result<(), Exit> {
        if let Err(e) = cfg.prepare_out_dir() {
            let _ = writeln!(err, "{e}");
            return Err(Exit::Failure);
        }
        let Some(q) = queries(cfg, err)? else {
            let _ = writeln!(err, "kbgen needs the high- and low-level query files");
            return Err(Exit::Failure);
        };
        let t = transport(cfg);
        check_queries(cfg, &q, t.as_ref(), out, err)?;
        let mut session = GenerationSession::new(cfg.kms.mode);
        if let Err(e) = generate_kb(&mut session, &q, t.as_ref()) {
            let _ = writeln!(err, "{e}");
            return Err(kms_exit(&e));
        }
        write_artifact(cfg, KBGEN_HL_FILE, &session.kb_text(Level::High), err)?;
        write_artifact(cfg, KBGEN_LL_FILE, &session.kb_text(Level::Low), err)?;
        write_artifact(cfg, KBGEN_REPORT_FILE, &session.report(), err)?;
        let _ = writeln!(out, "kbgen: {} fragments", session.fragments.len());
        if session.is_clean() {
            Ok(())
        } else {
            let _ = write!(err, "{}", session.report());
            Err(Exit::InvalidKb)
        }
    };
    match run(out, err) {
        Ok(()) => Exit::Success,
        Err(e) => e,
    }
}
