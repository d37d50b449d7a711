//! Prompt texts. Changing any of them changes the replay digests, so the
//! fixtures under `fixtures/kms/replay` must be re-recorded afterwards.

pub const GENERATE_SYSTEM: &str = "\
You write knowledge bases for a two-level task planner in a Prolog-like clause language.

Clause forms:
- Ground facts such as `pos(1,2).` or `agent(a1).` form the general knowledge base. They never change.
- `resources(agent(_)).` declares a family of facts whose instances are allocated to actions.
- `init_state([...]).` lists the ground fluents that hold initially.
- `goal_state([...]).` lists the fluents that must hold at the end; `_` matches anything.
- `action(Head, Pos, Neg, Grounding, Effects).` is a high-level snap action and
  `ll_action(Head, Pos, Neg, Grounding, Effects).` a low-level one. Pos fluents must hold,
  Neg fluents must not hold, Grounding lists general facts and `X \\= Y` tests that bind the
  variables, and Effects is a list of `add(F)` and `del(F)`.
- Durative actions are written as a pair of snap actions named `<name>_start` and `<name>_end`
  with the same parameters.
- `mapping(HighLevelStartHead, [LowLevelSnapHeads...]).` refines a high-level action into the
  ordered low-level snap actions that carry it out.

Answer with the requested clauses inside a single fenced code block. Do not invent facts the
description does not support.";

pub const VALIDATE_SYSTEM: &str = "\
You review two descriptions of the same robotic task before any knowledge base is written.
The first describes the task abstractly, the second describes the low-level capabilities of
the robots. Check that both describe the same objects and the same goal, and that the
abstract capabilities are enough to reach the goal from the initial situation.
Reason step by step. If everything is consistent, finish with a line containing only
the marker {MARKER}. Otherwise explain what is wrong and do not print the marker.";

/// A worked example of the clause language, fed before the actual query.
pub const EXAMPLE_QUERY: &str = "\
A room has two lamps, l1 and l2, both off. One robot r1 can switch a lamp on; switching takes
some time and the robot can only switch one lamp at a time. At the end both lamps must be on.";

pub const EXAMPLE_ANSWER: &str = "\
```prolog
lamp(l1).
lamp(l2).
robot(r1).

resources(robot(_)).

init_state([off(l1), off(l2), idle(r1)]).
goal_state([on(l1), on(l2)]).

action(switch_on_start(Robot, Lamp),
  [off(Lamp), idle(Robot)],
  [switching(_, Lamp)],
  [robot(Robot), lamp(Lamp)],
  [del(idle(Robot)), del(off(Lamp)), add(switching(Robot, Lamp))]
).

action(switch_on_end(Robot, Lamp),
  [switching(Robot, Lamp)],
  [],
  [robot(Robot), lamp(Lamp)],
  [del(switching(Robot, Lamp)), add(on(Lamp)), add(idle(Robot))]
).
```";

pub const VALIDATE_EXAMPLE_QUERY: &str = "\
Abstract description:
Two lamps l1 and l2 are off. Robot r1 can switch lamps on. Both lamps must end up on.

Low-level description:
Robot r1 has a single arm that can press the switch of a lamp.";

pub const VALIDATE_EXAMPLE_ANSWER: &str = "\
Objects: lamps l1 and l2 and robot r1 appear in both descriptions.
Goal: both lamps on, stated only abstractly; the low level adds no conflicting goal.
Capabilities: switching a lamp on is available and pressing a switch realises it.
{MARKER}";

pub fn part_request(part: &str) -> String {
    format!("Write only the {part}. Answer with one fenced code block.")
}
