"""Plan grammar: motion functions, sub-tasks, and the line-oriented plan DSL.

Backends emit plans as UTF-8 text, one directive per line:

    subtask: <description>
    mf: <kind>(<arg>)

Lines starting with '#' and blank lines are ignored. A lone
``question: <text>`` line represents a clarification request instead of a
plan. Parsing is strict; anything else is an executability failure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

MOTION_KINDS = (
    "move_to_position",
    "gripper_control",
    "base_cycle_move",
    "close_move",
    "rotate_waist",
    "dmp_publish",
)

GRIPPER_MODES = {"open": 1.0, "close": 0.0, "close_low": 0.35}

# suffix offsets for placement symbols
ABOVE_OFFSET = 0.010   # '_above': 10 mm over the target
INSIDE_DROP = 0.020    # '_inside': 20 mm below the container center, clamped to its floor

_MF_LINE = re.compile(r"^mf:\s*(?P<kind>[a-z_]+)\((?P<arg>[^()]+)\)\s*$")
_SUBTASK_LINE = re.compile(r"^subtask:\s*(?P<desc>.+?)\s*$")
_QUESTION_LINE = re.compile(r"^question:\s*(?P<text>.+?)\s*$")


class PlanError(Exception):
    pass


class PlanParseError(PlanError):
    """Backend text that does not parse; carries the raw text for the record."""

    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class ClarificationNeeded(PlanError):
    def __init__(self, question: str, subject: str = ""):
        super().__init__(question)
        self.question = question
        self.subject = subject


@dataclass(frozen=True)
class MotionFunction:
    kind: str
    arg: str

    def __post_init__(self):
        if self.kind not in MOTION_KINDS:
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if not self.arg:
            raise ValueError("motion argument must be nonempty")

    def __str__(self) -> str:
        return f"{self.kind}({self.arg})"

    @classmethod
    def parse(cls, text: str) -> "MotionFunction":
        m = re.fullmatch(r"(?P<kind>[a-z_]+)\((?P<arg>[^()]+)\)", text.strip())
        if not m:
            raise ValueError(f"not a motion function: {text!r}")
        return cls(kind=m.group("kind"), arg=m.group("arg").strip())


@dataclass
class SubTask:
    description: str
    motions: tuple[MotionFunction, ...]
    skill_name: str | None = None

    def __post_init__(self):
        self.motions = tuple(self.motions)
        uses_dmp = any(m.kind == "dmp_publish" for m in self.motions)
        if uses_dmp and not self.skill_name:
            raise ValueError(f"subtask {self.description!r} replays a skill but names none")
        if self.skill_name and not uses_dmp:
            raise ValueError(f"subtask {self.description!r} names a skill but has no dmp_publish")


@dataclass
class Plan:
    task_text: str
    horizon: str  # "short" | "long"
    subtasks: list[SubTask]
    bound_symbols: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon not in ("short", "long"):
            raise ValueError("horizon must be 'short' or 'long'")
        if self.horizon == "short" and len(self.subtasks) != 1:
            raise ValueError("short-horizon plans have exactly one sub-task")

    def motions(self):
        for st in self.subtasks:
            yield from st.motions

    def to_text(self) -> str:
        lines = []
        for st in self.subtasks:
            lines.append(f"subtask: {st.description}")
            lines.extend(f"mf: {m}" for m in st.motions)
        return "\n".join(lines) + "\n"


def _positional_symbols(motion: MotionFunction):
    if motion.kind in ("move_to_position", "close_move"):
        yield motion.arg


def unbound_symbols(plan: Plan, constants: frozenset[str] = frozenset()) -> list[str]:
    """Positional arguments that neither bind nor name a library constant.

    Non-positional arguments validate structurally instead: gripper modes,
    the door-radius token, numeric waist angles, skill names.
    """
    missing = []
    for motion in plan.motions():
        if motion.kind in ("move_to_position", "close_move"):
            sym = motion.arg
            if sym not in plan.bound_symbols and sym not in constants:
                missing.append(sym)
        elif motion.kind == "gripper_control":
            if motion.arg not in GRIPPER_MODES:
                missing.append(motion.arg)
        elif motion.kind == "base_cycle_move":
            if motion.arg != "radius_door2axis" and not _is_number(motion.arg):
                missing.append(motion.arg)
        elif motion.kind == "rotate_waist":
            if not _is_number(motion.arg):
                missing.append(motion.arg)
    return missing


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def parse_plan_text(task_text: str, text: str) -> Plan:
    """Strict parse of backend output into an unbound Plan.

    Raises ClarificationNeeded for a question line and PlanParseError for
    anything that is not exactly the DSL.
    """
    subtasks: list[tuple[str, list[MotionFunction]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if q := _QUESTION_LINE.match(line):
            if subtasks:
                raise PlanParseError(f"line {lineno}: question amid subtasks", text)
            raise ClarificationNeeded(q.group("text"))
        if m := _SUBTASK_LINE.match(line):
            subtasks.append((m.group("desc"), []))
            continue
        if m := _MF_LINE.match(line):
            if not subtasks:
                raise PlanParseError(f"line {lineno}: motion before any subtask", text)
            try:
                subtasks[-1][1].append(
                    MotionFunction(kind=m.group("kind"), arg=m.group("arg").strip())
                )
            except ValueError as err:
                raise PlanParseError(f"line {lineno}: {err}", text) from None
            continue
        raise PlanParseError(f"line {lineno}: unrecognized directive {line!r}", text)
    if not subtasks:
        raise PlanParseError("no subtasks in plan text", text)
    built = []
    for desc, motions in subtasks:
        if not motions:
            raise PlanParseError(f"subtask {desc!r} has no motion functions", text)
        skill = next((m.arg for m in motions if m.kind == "dmp_publish"), None)
        built.append(SubTask(description=desc, motions=tuple(motions), skill_name=skill))
    horizon = "long" if len(built) >= 2 else "short"
    return Plan(task_text=task_text, horizon=horizon, subtasks=built)
