"""Task planning: classify, decompose, compile to motion functions, bind symbols.

Two interchangeable backends produce plan DSL text. The rule backend is a
deterministic template table covering the task families the robot knows
(put/stack, open/close, power on, pick, warm up, roast, clean table) and is
the offline default; the remote backend prompts a chat-completion endpoint at
temperature 0 and must emit the same DSL or the plan counts as an
executability failure.

Symbol binding resolves motion arguments against the labeled scene: bare
class names when unique, explicit labels (cup2), ordinals ("first bottle"),
handle symbols from articulation geometry, and the placement suffixes
_above / _inside. Ambiguous references surface the clarification question
instead of guessing.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .library import SkillLibrary
from .perception import LabeledObject, PerceivedScene, identify_obstacles
from .plan import (
    ABOVE_OFFSET,
    INSIDE_DROP,
    ClarificationNeeded,
    MotionFunction,
    Plan,
    PlanError,
    SubTask,
    parse_plan_text,
    unbound_symbols,
)

CLARIFICATION_QUESTION = "There are multiple objects share the same name, which one do you prefer?"

POWER_ON_DEGREES = 90

ORDINAL_WORDS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}
ORDINAL_NAMES = {v: k for k, v in ORDINAL_WORDS.items()}


class PlannerError(PlanError):
    pass


class UnknownTaskError(PlannerError):
    """No rule matches the task text; counts against executability."""


class UnresolvedSymbolError(PlannerError):
    def __init__(self, symbol: str):
        super().__init__(f"cannot resolve object symbol {symbol!r} in the scene")
        self.symbol = symbol


class NamingError(PlannerError):
    pass


class PlanningFailure(PlannerError):
    pass


class TransportError(PlannerError):
    pass


def load_prompt(name: str) -> str:
    return resources.files("hrcbot.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8").strip()


def prompt_version() -> str:
    return resources.files("hrcbot.prompts").joinpath("VERSION").read_text(encoding="utf-8").strip()


@dataclass
class PromptContext:
    role_text: str
    library_text: str
    example_text: str
    ambiguity_text: str
    scene_inventory: list[tuple[str, int]] = field(default_factory=list)
    skill_names: tuple[str, ...] = ()
    clarification: str | None = None

    @classmethod
    def build(
        cls,
        perceived: PerceivedScene | None = None,
        library: SkillLibrary | None = None,
        clarification: str | None = None,
    ) -> "PromptContext":
        inventory = []
        if perceived is not None:
            inventory = sorted(perceived.inventory.items())
        return cls(
            role_text=load_prompt("role"),
            library_text=load_prompt("library"),
            example_text=load_prompt("example"),
            ambiguity_text=load_prompt("ambiguity"),
            scene_inventory=inventory,
            skill_names=tuple(library.names()) if library is not None else (),
            clarification=clarification,
        )


@dataclass
class PlannerConfig:
    clearance_zone: tuple[float, float, float] = (-0.10, -1.00, 0.80)
    clearance_blocked_radius: float = 0.08


# ---------------------------------------------------------------------------
# Reference resolution helpers

_ARTICLES = ("the", "a", "an", "my")


def _strip_articles(phrase: str) -> str:
    words = [w for w in phrase.split() if w not in _ARTICLES]
    return " ".join(words)


def _phrase_to_symbol(phrase: str, inventory: dict[str, int],
                      clarification: str | None = None) -> str:
    """Turn an object noun phrase into a scene symbol.

    Handles ordinals ("first bottle" -> bottle1), positional adjectives
    (left/middle/right), explicit labels (cup2), and bare names. A bare name
    with several instances raises the clarification question unless an
    answer naming one of them was provided.
    """
    words = _strip_articles(phrase.lower()).split()
    if not words:
        raise UnresolvedSymbolError(phrase)
    index = None
    if words[0] in ORDINAL_WORDS:
        index = ORDINAL_WORDS[words[0]]
        words = words[1:]
    elif words[0] in ("left", "leftmost"):
        index = 1
        words = words[1:]
    elif words[0] in ("right", "rightmost"):
        index = -1
        words = words[1:]
    elif words[0] in ("middle", "center", "centre"):
        index = 0
        words = words[1:]
    name = "_".join(words)
    if not name:
        raise UnresolvedSymbolError(phrase)
    if re.fullmatch(r"[a-z_]+\d+", name):
        return name  # already an explicit label like cup2
    count = inventory.get(name, 0)
    if index is not None:
        if count == 0:
            raise UnresolvedSymbolError(name)
        if index == -1:
            index = count
        elif index == 0:
            if count % 2 == 0:
                raise ClarificationNeeded(CLARIFICATION_QUESTION, subject=name)
            index = (count + 1) // 2
        if index > count:
            raise UnresolvedSymbolError(f"{name}{index}")
        return f"{name}{index}"
    if count > 1:
        if clarification:
            answer = clarification.strip().lower().replace(" ", "_")
            if re.fullmatch(rf"{re.escape(name)}\d+", answer):
                return answer
            try:
                return _phrase_to_symbol(clarification, inventory)
            except PlannerError:
                pass
        raise ClarificationNeeded(CLARIFICATION_QUESTION, subject=name)
    return name  # unique instance or a fixture known to the scene


# ---------------------------------------------------------------------------
# Rule backend: the deterministic template table

def _grasp_symbol_for_open(obj_symbol: str, perceived: PerceivedScene | None) -> str:
    """Hinged doors are grasped by their handle; press-pull fronts by the body."""
    if perceived is not None:
        for candidate in perceived.scene.by_name(_base_name(obj_symbol)):
            if candidate.articulation is not None and candidate.articulation.kind == "press_pull":
                return obj_symbol
    return f"{obj_symbol}_handle"


def _base_name(symbol: str) -> str:
    return re.sub(r"\d+$", "", symbol)


class RuleBackend:
    """Template planner mirroring the prompt examples; bit-identical output
    for identical (task, context, scene, library) inputs."""

    name = "rule"

    def __init__(self, perceived: PerceivedScene | None = None,
                 library: SkillLibrary | None = None):
        self.perceived = perceived
        self.library = library

    def _symbol(self, phrase: str, context: PromptContext) -> str:
        inventory = dict(context.scene_inventory)
        return _phrase_to_symbol(phrase, inventory, context.clarification)

    def _skill_sequence(self, skill: str) -> list[str] | None:
        if self.library is not None and self.library.has(skill):
            return [f"mf: {m}" for m in self.library.sequence(skill)]
        return None

    def plan_text(self, context: PromptContext, task_text: str) -> str:
        task = _normalize(task_text)
        if not task:
            raise UnknownTaskError("empty task text")
        lines = self._decomposition(task, context)
        if lines is None:
            lines = self._subtask_block(task, context)
            if lines is None:
                raise UnknownTaskError(f"no rule matches task {task_text!r}")
        return "\n".join(lines) + "\n"

    def _decomposition(self, task: str, context: PromptContext) -> list[str] | None:
        if m := re.fullmatch(r"(?:warm up|heat|heat up) (?P<obj>[\w ]+)", task):
            obj = _strip_articles(m.group("obj"))
            subs = [
                "open the microwave",
                f"put the {obj} into the microwave",
                "close the microwave",
                "power on the microwave",
            ]
        elif m := re.fullmatch(r"roast (?P<obj>[\w ]+)", task):
            obj = _strip_articles(m.group("obj"))
            subs = [
                "open the oven",
                f"put the {obj} into oven",
                "close the oven",
                "power on the oven",
            ]
        elif re.fullmatch(r"(?:clean|clear|tidy)(?: up)? (?:the )?table", task):
            subs = []
            for name, count in context.scene_inventory:
                if count == 1:
                    subs.append(f"put the {name} in the storage")
                else:
                    for k in range(1, count + 1):
                        ordinal = ORDINAL_NAMES.get(k, f"{k}th")
                        subs.append(f"put the {ordinal} {name} in the storage")
        else:
            return None
        lines = []
        for sub in subs:
            block = self._subtask_block(_normalize(sub), context)
            if block is None:
                raise UnknownTaskError(f"no rule matches sub-task {sub!r}")
            lines.extend(block)
        return lines

    def _subtask_block(self, task: str, context: PromptContext) -> list[str] | None:
        sym = lambda phrase: self._symbol(phrase, context)

        if m := re.fullmatch(r"put (?P<obj>[\w ]+?) on (?P<tgt>[\w ]+)", task):
            obj, tgt = sym(m.group("obj")), sym(m.group("tgt"))
            return [
                f"subtask: {task}",
                "mf: move_to_position(init)",
                f"mf: move_to_position({obj})",
                "mf: gripper_control(close_low)",
                "mf: move_to_position(init)",
                f"mf: move_to_position({tgt})",
                "mf: gripper_control(open)",
                "mf: move_to_position(init)",
            ]
        if m := re.fullmatch(r"put (?P<obj>[\w ]+?) (?:in|into|inside) (?P<tgt>[\w ]+)", task):
            obj, tgt = sym(m.group("obj")), sym(m.group("tgt"))
            return [
                f"subtask: {task}",
                f"mf: move_to_position({obj})",
                "mf: gripper_control(close)",
                f"mf: move_to_position({tgt}_inside)",
                "mf: gripper_control(open)",
            ]
        if m := re.fullmatch(r"stack (?P<obj>[\w ]+?) on(?:to)? (?P<tgt>[\w ]+)", task):
            obj, tgt = sym(m.group("obj")), sym(m.group("tgt"))
            return [
                f"subtask: {task}",
                f"mf: move_to_position({obj})",
                "mf: gripper_control(close)",
                f"mf: move_to_position({tgt}_above)",
                "mf: gripper_control(open)",
            ]
        if m := re.fullmatch(r"open (?:up )?(?P<obj>[\w ]+)", task):
            obj = sym(m.group("obj"))
            grasp = _grasp_symbol_for_open(obj, self.perceived)
            if stored := self._skill_sequence(f"open_{grasp}"):
                return [f"subtask: {task}", *stored]
            return [
                f"subtask: {task}",
                f"mf: move_to_position({grasp})",
                "mf: gripper_control(close)",
                "mf: base_cycle_move(radius_door2axis)",
                "mf: gripper_control(open)",
            ]
        if m := re.fullmatch(r"(?:close|shut) (?P<obj>[\w ]+)", task):
            obj = sym(m.group("obj"))
            if stored := self._skill_sequence(f"close_{obj}"):
                return [f"subtask: {task}", *stored]
            return [f"subtask: {task}", f"mf: close_move({obj})"]
        if m := re.fullmatch(r"(?:power on|turn on|switch on) (?P<obj>[\w ]+)", task):
            obj = sym(m.group("obj"))
            return [
                f"subtask: {task}",
                f"mf: move_to_position({obj}_knob)",
                f"mf: rotate_waist({POWER_ON_DEGREES})",
            ]
        if m := re.fullmatch(r"(?:pick up|pick|grab|take) (?P<obj>[\w ]+)", task):
            obj = sym(m.group("obj"))
            return [
                f"subtask: {task}",
                f"mf: move_to_position({obj})",
                "mf: gripper_control(close_low)",
                "mf: move_to_position(init)",
                "mf: gripper_control(open)",
            ]
        if m := re.fullmatch(r"move (?P<obj>[\w ]+?) to (?:the )?clearance(?: zone)?", task):
            obj = sym(m.group("obj"))
            return [
                f"subtask: {task}",
                f"mf: move_to_position({obj})",
                "mf: gripper_control(close)",
                "mf: move_to_position(clearance)",
                "mf: gripper_control(open)",
            ]
        return None


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower()).rstrip(".!?")


# ---------------------------------------------------------------------------
# Remote backend: chat-completion endpoint, temperature 0

API_KEY_ENV = "HRC_LLM_API_KEY"


@dataclass
class RemoteBackendConfig:
    endpoint: str
    model: str
    max_retries: int = 2
    timeout: float = 30.0


class RemoteBackend:
    """Plans via a chat-completion endpoint. The transport is injectable for
    tests; the default POSTs OpenAI-style JSON with the key from HRC_LLM_API_KEY."""

    name = "remote"

    def __init__(self, config: RemoteBackendConfig, transport=None):
        self.config = config
        self._transport = transport or self._http_transport
        self._cache: dict[str, str] = {}

    def _http_transport(self, system_prompt: str, user_prompt: str) -> str:
        import httpx

        key = os.environ.get(API_KEY_ENV, "")
        response = httpx.post(
            self.config.endpoint,
            headers={"Authorization": f"Bearer {key}"},
            json={
                "model": self.config.model,
                "temperature": 0,
                "messages": [
                    {"role": "system", "content": system_prompt},
                    {"role": "user", "content": user_prompt},
                ],
            },
            timeout=self.config.timeout,
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]

    def system_prompt(self, context: PromptContext) -> str:
        inventory = ", ".join(f"{name} x{count}" for name, count in context.scene_inventory) or "empty"
        skills = ", ".join(context.skill_names) or "empty"
        parts = [
            context.role_text,
            context.library_text,
            context.example_text,
            context.ambiguity_text,
            load_prompt("classify"),
            f"Objects currently detected: {inventory}.",
            f"DMP library contents: {skills}.",
            load_prompt("format"),
        ]
        return "\n\n".join(parts)

    def plan_text(self, context: PromptContext, task_text: str) -> str:
        key = f"{task_text}\x00{context.clarification}\x00{context.skill_names}\x00{tuple(context.scene_inventory)}"
        if key in self._cache:
            return self._cache[key]
        user = task_text
        if context.clarification:
            user = f"{task_text}\n(the user clarified: {context.clarification})"
        last_error: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            try:
                text = self._transport(self.system_prompt(context), user)
                self._cache[key] = text
                return text
            except Exception as err:  # noqa: BLE001 - any transport failure retries
                last_error = err
        raise TransportError(f"backend unavailable after {self.config.max_retries + 1} attempts: {last_error}")


# ---------------------------------------------------------------------------
# Planner operations

def classify_task(task_text: str, backend, context: PromptContext) -> str:
    """"short" when the backend maps the task to one sub-task, else "long"."""
    if not task_text.strip():
        raise UnknownTaskError("empty task text")
    plan = parse_plan_text(task_text, backend.plan_text(context, task_text))
    return plan.horizon


def decompose(task_text: str, scene_inventory, backend, context: PromptContext) -> list[str]:
    """Ordered sub-task descriptions for a long-horizon task."""
    context = PromptContext(
        role_text=context.role_text,
        library_text=context.library_text,
        example_text=context.example_text,
        ambiguity_text=context.ambiguity_text,
        scene_inventory=list(
            scene_inventory.items() if isinstance(scene_inventory, dict) else scene_inventory
        ),
        skill_names=context.skill_names,
        clarification=context.clarification,
    )
    plan = parse_plan_text(task_text, backend.plan_text(context, task_text))
    return [st.description for st in plan.subtasks]


def compile_subtask(
    description: str,
    perceived: PerceivedScene,
    library: SkillLibrary | None,
    backend,
    context: PromptContext,
    config: PlannerConfig | None = None,
) -> SubTask:
    """One sub-task compiled to motions with all positional symbols bound."""
    if isinstance(backend, RuleBackend):
        backend.perceived = perceived
        if library is not None:
            backend.library = library
    plan = parse_plan_text(description, backend.plan_text(context, description))
    if len(plan.subtasks) != 1:
        raise PlannerError(f"sub-task {description!r} decomposed again")
    bind_plan(plan, perceived, config or PlannerConfig())
    return plan.subtasks[0]


def plan_task(
    task_text: str,
    perceived: PerceivedScene,
    library: SkillLibrary | None = None,
    backend=None,
    config: PlannerConfig | None = None,
    clarification: str | None = None,
    check_obstacles: bool = False,
) -> Plan:
    """Full pipeline: emit DSL, parse, bind symbols, optionally inject
    obstacle removal (off by default; enable for cluttered pick scenes)."""
    config = config or PlannerConfig()
    if backend is None:
        backend = RuleBackend(perceived, library)
    context = PromptContext.build(perceived, library, clarification)
    if isinstance(backend, RuleBackend):
        backend.perceived = perceived
        backend.library = library
    inventory = perceived.inventory
    if re.fullmatch(r"(?:clean|clear|tidy)(?: up)? (?:the )?table", _normalize(task_text)):
        inventory = table_inventory(perceived)
        context.scene_inventory = sorted(inventory.items())
    text = backend.plan_text(context, task_text)
    plan = parse_plan_text(task_text, text)
    bind_plan(plan, perceived, config)
    if check_obstacles:
        plan = inject_obstacle_removal(plan, perceived, config=config)
    return plan


def table_inventory(perceived: PerceivedScene) -> dict[str, int]:
    """Objects standing on the table, counted per class; these define what
    'clean the table' must move."""
    tables = perceived.scene.by_name("table")
    counts: dict[str, int] = {}
    for obj in perceived.labeled:
        if obj.name == "storage":
            continue
        on_table = not tables or any(
            t.footprint_contains(obj.position_world) for t in tables
        )
        if on_table:
            counts[obj.name] = counts.get(obj.name, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# Symbol binding

def resolve_symbol(symbol: str, perceived: PerceivedScene, config: PlannerConfig) -> np.ndarray:
    scene = perceived.scene
    if symbol == "init":
        return np.asarray(scene.robot.ee, dtype=float)
    if symbol == "clearance":
        return np.asarray(config.clearance_zone, dtype=float)
    if symbol.endswith("_above"):
        base = resolve_symbol(symbol[: -len("_above")], perceived, config)
        return base + np.array([0.0, 0.0, ABOVE_OFFSET])
    if symbol.endswith("_inside"):
        container = _scene_object(symbol[: -len("_inside")], perceived)
        if container is None:
            raise UnresolvedSymbolError(symbol)
        target = container.position.copy()
        floor = container.cavity_bounds()[0][2]
        target[2] = max(target[2] - INSIDE_DROP, floor)
        return target
    if symbol.endswith("_handle"):
        obj = _scene_object(symbol[: -len("_handle")], perceived)
        if obj is None or obj.articulation is None:
            raise UnresolvedSymbolError(symbol)
        return obj.handle_position()
    labeled = perceived.find(symbol)
    if labeled is not None:
        return labeled.position_world.copy()
    if not re.search(r"\d+$", symbol):
        matches = [o for o in perceived.labeled if o.name == symbol]
        if len(matches) == 1:
            return matches[0].position_world.copy()
        if len(matches) > 1:
            raise ClarificationNeeded(CLARIFICATION_QUESTION, subject=symbol)
    fixture = _scene_object(symbol, perceived)
    if fixture is not None and not fixture.movable:
        # fixtures (appliances, furniture) ground from scene geometry; movable
        # objects must come from the labeled view, so a detector miss shows.
        # An articulated fixture is reached at its door, not its center (the
        # center sits inside the cavity).
        if fixture.articulation is not None:
            return fixture.handle_position()
        return fixture.position.copy()
    raise UnresolvedSymbolError(symbol)


def _scene_object(symbol: str, perceived: PerceivedScene):
    scene = perceived.scene
    try:
        return scene.by_id(symbol)
    except KeyError:
        pass
    matches = scene.by_name(symbol)
    if len(matches) == 1:
        return matches[0]
    if len(matches) > 1:
        raise ClarificationNeeded(CLARIFICATION_QUESTION, subject=symbol)
    return None


def bind_plan(plan: Plan, perceived: PerceivedScene, config: PlannerConfig) -> Plan:
    """Resolve every positional symbol to world coordinates, in place."""
    for motion in plan.motions():
        if motion.kind in ("move_to_position", "close_move"):
            if motion.arg not in plan.bound_symbols:
                plan.bound_symbols[motion.arg] = resolve_symbol(motion.arg, perceived, config)
    leftovers = unbound_symbols(plan)
    if leftovers:
        raise UnresolvedSymbolError(leftovers[0])
    return plan


# ---------------------------------------------------------------------------
# Obstacle removal injection

def inject_obstacle_removal(
    plan: Plan,
    perceived: PerceivedScene,
    robot_base: np.ndarray | None = None,
    config: PlannerConfig | None = None,
) -> Plan:
    """Prepend pick-and-clear sub-tasks for objects inside a sub-task's
    approach triangle; removal targets are themselves re-checked.

    Only objects the plan never touches are eligible for removal: anything
    the plan references keeps its binding, and removal would invalidate it.
    Each cleared object takes its own slot in the clearance zone; a slot
    already occupied by a foreign object is a planning failure. Moved
    obstacles are tracked at their slot virtually so chained checks see the
    updated workspace.
    """
    config = config or PlannerConfig()
    if robot_base is None:
        robot_base = np.asarray(perceived.scene.robot.base[:2], dtype=float)
    clearance = np.asarray(config.clearance_zone, dtype=float)
    slot_step = np.array([0.0, 2.5 * config.clearance_blocked_radius, 0.0])

    # exclude whole classes the plan touches: removal would invalidate their
    # bindings, and same-named neighbours are candidates for the referent
    referenced = {
        _base_name(re.sub(r"_(above|inside|handle)$", "", m.arg))
        for m in plan.motions()
        if m.kind in ("move_to_position", "close_move") and m.arg not in ("init", "clearance")
    }
    virtual: dict[str, np.ndarray] = {
        o.label: o.position_world.copy() for o in perceived.labeled
    }
    moved: list[str] = []
    removals: dict[int, list[SubTask]] = {}
    bound = dict(plan.bound_symbols)

    def workspace():
        return [
            LabeledObject(label=lbl, name=_base_name(lbl), position_world=pos, index_in_class=1)
            for lbl, pos in virtual.items()
        ]

    def next_slot() -> np.ndarray:
        slot = clearance + len(moved) * slot_step
        for lbl, pos in virtual.items():
            if lbl not in moved and np.linalg.norm(pos[:2] - slot[:2]) <= config.clearance_blocked_radius:
                raise PlanningFailure(f"clearance zone is blocked by {lbl}")
        return slot

    def clear_path_to(target_pos, target_label, subtask_idx, depth=0):
        if depth > len(virtual) + 1:
            raise PlanningFailure("obstacle removal does not terminate")
        report = identify_obstacles(target_pos, robot_base, workspace(), target_label)
        for obstacle in report.obstacles:
            label = obstacle.label
            if label in moved or _base_name(label) in referenced:
                continue
            # the approach to the obstacle must itself be clear first
            clear_path_to(virtual[label], label, subtask_idx, depth + 1)
            slot = next_slot()
            slot_symbol = "clearance" if not moved else f"clearance_{len(moved) + 1}"
            motions = (
                MotionFunction("move_to_position", label),
                MotionFunction("gripper_control", "close"),
                MotionFunction("move_to_position", slot_symbol),
                MotionFunction("gripper_control", "open"),
            )
            sub = SubTask(
                description=f"move the {label} to the clearance zone", motions=motions,
            )
            bound.setdefault(label, virtual[label].copy())
            bound[slot_symbol] = slot.copy()
            removals.setdefault(subtask_idx, []).append(sub)
            moved.append(label)
            virtual[label] = slot.copy()

    for idx, subtask in enumerate(plan.subtasks):
        target_sym = next(
            (m.arg for m in subtask.motions
             if m.kind == "move_to_position" and m.arg not in ("init",) and not m.arg.startswith("clearance")),
            None,
        )
        if target_sym is not None and target_sym in bound:
            target_label = target_sym if perceived.find(target_sym) else None
            clear_path_to(bound[target_sym], target_label, idx)

    if not removals:
        return plan
    new_subtasks: list[SubTask] = []
    for idx, subtask in enumerate(plan.subtasks):
        new_subtasks.extend(removals.get(idx, []))
        new_subtasks.append(subtask)
    horizon = "long" if len(new_subtasks) >= 2 else "short"
    return Plan(task_text=plan.task_text, horizon=horizon,
                subtasks=new_subtasks, bound_symbols=bound)


# ---------------------------------------------------------------------------
# Skill naming

_ACTION_VERBS = (
    "open", "close", "shut", "pick", "put", "stack", "move", "push", "pull",
    "press", "rotate", "turn", "grab", "take", "place", "power", "warm",
    "roast", "clean", "lift", "slide",
)


def skill_name(description: str, grasp_symbol: str | None = None) -> str:
    """Compose the library key <action>_<target> from a sub-task description.

    The grasped symbol, when known from the compiled motions, wins over the
    noun phrase so a door skill is named after its handle.
    """
    words = _normalize(description).split()
    if not words or words[0] not in _ACTION_VERBS:
        raise NamingError(f"no action verb recognized in {description!r}")
    action = words[0]
    if grasp_symbol:
        target = _base_name(grasp_symbol)
    else:
        rest = [w for w in words[1:] if w not in _ARTICLES]
        if not rest:
            raise NamingError(f"no target noun phrase in {description!r}")
        target = "_".join(rest)
    return f"{action}_{target}"
