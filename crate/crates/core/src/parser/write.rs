use alloc::string::String;
use core::fmt::Write;

use crate::model::{GroundingItem, Level, Problem, SnapAction};
use crate::term::Term;

/// Renders a problem in the KB text format. The output re-parses to an
/// equal [`Problem`].
pub fn serialize_kb(p: &Problem) -> String {
    let mut out = String::new();
    let block = |out: &mut String, body: String| {
        if !body.is_empty() {
            out.push_str(&body);
            out.push('\n');
        }
    };

    let mut facts = String::new();
    for f in p.general_kb.facts() {
        let _ = writeln!(facts, "{f}.");
    }
    block(&mut out, facts);

    let mut res = String::new();
    for r in &p.resources {
        let _ = writeln!(res, "resources({}).", r.pattern);
    }
    block(&mut out, res);

    let mut durs = String::new();
    for (name, d) in &p.durations {
        match d.max {
            Some(max) => {
                let _ = writeln!(durs, "duration({name}, {}, {max}).", d.min);
            }
            None => {
                let _ = writeln!(durs, "duration({name}, {}, inf).", d.min);
            }
        }
    }
    block(&mut out, durs);

    let mut states = String::new();
    write_state(&mut states, "init_state", p.init.iter());
    write_state(&mut states, "goal_state", p.goal.iter());
    block(&mut out, states);

    for a in p.hl_actions.iter().chain(&p.ll_actions) {
        let mut s = String::new();
        write_action(&mut s, a);
        block(&mut out, s);
    }

    for m in &p.mappings {
        let mut s = String::new();
        let _ = writeln!(s, "mapping({},", m.hl_start_head);
        write_list(&mut s, m.expansion.iter().map(|t| alloc::format!("{t}")), "\n");
        s.push_str(").\n");
        block(&mut out, s);
    }

    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn write_state<'a>(out: &mut String, name: &str, fluents: impl Iterator<Item = &'a Term>) {
    let items: alloc::vec::Vec<_> = fluents.collect();
    if items.is_empty() {
        let _ = writeln!(out, "{name}([]).");
        return;
    }
    let _ = writeln!(out, "{name}([");
    for (i, f) in items.iter().enumerate() {
        let sep = if i + 1 < items.len() { "," } else { "" };
        let _ = writeln!(out, "  {f}{sep}");
    }
    out.push_str("]).\n");
}

/// `  [a, b],` style list line with trailing separator.
fn write_list(out: &mut String, items: impl Iterator<Item = String>, trailer: &str) {
    out.push_str("  [");
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&item);
    }
    out.push(']');
    out.push_str(trailer);
}

fn write_action(out: &mut String, a: &SnapAction) {
    let clause = match a.level {
        Level::High => "action",
        Level::Low => "ll_action",
    };
    let _ = writeln!(out, "{clause}({},", a.head);
    write_list(out, a.pos_pre.iter().map(|t| alloc::format!("{t}")), ",\n");
    write_list(out, a.neg_pre.iter().map(|t| alloc::format!("{t}")), ",\n");
    if a.end_condition_slot {
        out.push_str("  [],\n");
    }
    write_list(
        out,
        a.grounding.iter().map(|g| match g {
            GroundingItem::Pattern(t) => alloc::format!("{t}"),
            GroundingItem::Distinct(x, y) => alloc::format!("{x} \\= {y}"),
        }),
        ",\n",
    );
    write_list(out, a.effects.iter().map(|e| alloc::format!("{e}")), "\n");
    out.push_str(").\n");
}
