"""Deterministic kinematic execution of motion plans against the 2.5D kitchen.

The robot is a planar base plus a 3D end effector. Straight-line and arc
motions are resolved analytically (their outcome does not depend on the
intermediate samples); DMP replays and live demonstrations step at the fixed
dt because doors respond to end-effector contact along the way.

Door physics: a door moves only while its handle is grasped or in contact
(within the handle-track tolerance) with the end effector, or while a
close_move pushes it. A press-pull latch must accumulate enough inward push
from contact before its hinge unlocks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dmp import IntegrationDivergenceError, rollout
from .library import SkillLibrary
from .plan import GRIPPER_MODES, MotionFunction, Plan
from .planner import _normalize, table_inventory
from .perception import ground_truth_view
from .scene import Scene, WorldObject

PLACEMENT_MARGIN = 0.0115      # lateral success margin for put/stack/pick
OPEN_SUCCESS_FRACTION = 0.9    # door counts open at this fraction of open_angle
CLOSE_SUCCESS_ANGLE = 0.05     # rad
HANDLE_TRACK_TOLERANCE = 0.02  # ee-to-handle contact distance for door follow


class SimulatorError(Exception):
    pass


class UnknownPredicateError(SimulatorError):
    pass


@dataclass
class SimConfig:
    dt: float = 0.002
    ee_speed: float = 0.25
    base_speed: float = 0.3
    waist_speed_deg: float = 45.0
    approach_standoff: float = 0.6
    power_threshold_deg: float = 60.0
    handle_track_tolerance: float = HANDLE_TRACK_TOLERANCE
    interior_open_fraction: float = OPEN_SUCCESS_FRACTION
    perturb_skill_keys: bool = False  # reproduces the wrong-skill-retrieval failure


@dataclass
class RobotState:
    base: np.ndarray                 # x, y, heading
    ee: np.ndarray                   # 3D end-effector position
    aperture: float = 1.0
    held_object: str | None = None   # object id, or "door:<object id>"
    waist_angle: float = 0.0

    def snapshot(self) -> dict:
        return {
            "base": [round(float(v), 9) for v in self.base],
            "ee": [round(float(v), 9) for v in self.ee],
            "aperture": self.aperture,
            "held": self.held_object,
            "waist": round(float(self.waist_angle), 9),
        }


@dataclass
class MotionResult:
    motion: MotionFunction
    ok: bool
    reason: str | None = None


@dataclass
class ExecutionOutcome:
    executed: bool
    per_motion_results: list[MotionResult]
    task_success: bool
    failure_reason: str | None = None

    def __post_init__(self):
        if self.task_success and not self.executed:
            raise ValueError("task_success requires the plan to have executed")


def perturb_skill_key(name: str) -> str:
    """The token-variability fault: toggles a '_handle' infix on the key."""
    stem, ex = (name[:-3], "_ex") if name.endswith("_ex") else (name, "")
    if stem.endswith("_handle"):
        return stem[: -len("_handle")] + ex
    return stem + "_handle" + ex


class Simulator:
    """Single-writer execution engine over one scene instance."""

    def __init__(
        self,
        scene: Scene,
        library: SkillLibrary | None = None,
        config: SimConfig | None = None,
    ):
        self.scene = scene
        self.library = library
        self.config = config or SimConfig()
        self.state = RobotState(
            base=np.asarray(scene.robot.base, dtype=float),
            ee=np.asarray(scene.robot.ee, dtype=float),
        )
        self.home_ee = np.asarray(scene.robot.ee, dtype=float)
        self.t = 0.0
        self.event_log: list[dict] = []
        self._press_travel: dict[str, float] = {}
        self._last_ee = self.state.ee.copy()
        # broad-phase shells: the ee can only touch a door when it is within
        # this ring around the hinge, whatever the door angle
        margin = 2 * self.config.handle_track_tolerance + 0.02
        self._door_shells = [
            (
                obj,
                (float(a.axis_position[0]), float(a.axis_position[1]), float(a.axis_position[2])),
                max(0.0, a.radius_door2axis - margin - a.latch_travel),
                a.radius_door2axis + margin,
            )
            for obj in scene.objects
            if (a := obj.articulation) is not None
        ]

    # -- geometry helpers ---------------------------------------------------

    def clamp_to_envelope(self, point: np.ndarray) -> tuple[np.ndarray, bool]:
        """Clamp a target into the lift range; the planar base follows the ee
        instead of constraining it, the platform being mobile."""
        p = np.asarray(point, dtype=float).copy()
        clamped = False
        lo, hi = self.scene.robot.lift_range
        if p[2] < lo or p[2] > hi:
            p[2] = min(max(p[2], lo), hi)
            clamped = True
        offset = p[:2] - self.state.base[:2]
        dist = float(np.linalg.norm(offset))
        reach = self.scene.robot.reach_radius
        if dist > reach:
            self.state.base[:2] = self.state.base[:2] + offset * ((dist - reach) / dist)
        return p, clamped

    def _advance_time(self, distance: float, speed: float) -> None:
        if distance <= 0:
            return
        steps = max(1, math.ceil(distance / speed / self.config.dt))
        self.t += steps * self.config.dt

    def _approach_base(self, target: np.ndarray) -> None:
        offset = np.asarray(target[:2], dtype=float) - self.state.base[:2]
        dist = float(np.linalg.norm(offset))
        reach = self.scene.robot.reach_radius
        if dist <= reach:
            return
        standoff = min(self.config.approach_standoff, 0.8 * reach)
        direction = offset / dist
        new_xy = np.asarray(target[:2], dtype=float) - direction * standoff
        travel = float(np.linalg.norm(new_xy - self.state.base[:2]))
        heading = math.atan2(direction[1], direction[0])
        self.state.base = np.array([new_xy[0], new_xy[1], heading])
        self._advance_time(travel, self.config.base_speed)

    def _blocked_interior(self, target: np.ndarray) -> WorldObject | None:
        for obj in self.scene.objects:
            if obj.articulation is None:
                continue
            threshold = self.config.interior_open_fraction * obj.articulation.open_angle
            if obj.contains_point(target) and obj.state.door_angle < threshold:
                return obj
        return None

    def _held_payload(self) -> WorldObject | None:
        held = self.state.held_object
        if held and not held.startswith("door:"):
            return self.scene.by_id(held)
        return None

    def _held_door(self) -> WorldObject | None:
        held = self.state.held_object
        if held and held.startswith("door:"):
            return self.scene.by_id(held.split(":", 1)[1])
        return None

    # -- contact-driven stepping (DMP replay and demonstrations) -------------

    def drive_ee(self, target: np.ndarray) -> tuple[np.ndarray, bool]:
        """One contact step: move the ee to target (clamped), dragging the
        held payload and any door whose handle it touches."""
        point, clamped = self.clamp_to_envelope(target)
        step_vec = point - self._last_ee
        payload = self._held_payload()
        if payload is not None:
            payload.position = payload.position + (point - self.state.ee)
        self.state.ee = point
        self._react_doors(point, step_vec)
        self._last_ee = point.copy()
        return point, clamped

    def _react_doors(self, ee: np.ndarray, step_vec: np.ndarray) -> None:
        held = self.state.held_object
        ex, ey, ez = float(ee[0]), float(ee[1]), float(ee[2])
        for obj, axis, inner, outer in self._door_shells:
            grasped = held is not None and held == f"door:{obj.id}"
            if not grasped:
                gap = math.sqrt(
                    (ex - axis[0]) ** 2 + (ey - axis[1]) ** 2 + (ez - axis[2]) ** 2
                )
                if gap < inner or gap > outer:
                    continue
            art = obj.articulation
            handle_now = art.handle_at(obj.state.door_angle)
            contact = float(np.linalg.norm(ee - handle_now)) <= self.config.handle_track_tolerance
            if not (grasped or contact):
                continue
            if art.kind == "press_pull" and obj.state.latched:
                inward = -art.outward_normal()
                gain = float(np.dot(step_vec, inward))
                if gain > 0:
                    total = self._press_travel.get(obj.id, 0.0) + gain
                    self._press_travel[obj.id] = total
                    if total >= art.latch_travel:
                        obj.state.latched = False
                continue
            angle, deviation = art.project_angle(ee)
            if deviation <= self.config.handle_track_tolerance:
                obj.state.door_angle = angle

    # -- motion semantics ----------------------------------------------------

    def execute_motion(self, motion: MotionFunction, bound: dict[str, np.ndarray]) -> MotionResult:
        before = self._object_snapshot()
        handler = {
            "move_to_position": self._do_move,
            "gripper_control": self._do_gripper,
            "base_cycle_move": self._do_base_cycle,
            "close_move": self._do_close_move,
            "rotate_waist": self._do_rotate_waist,
            "dmp_publish": self._do_dmp_publish,
        }[motion.kind]
        result = handler(motion, bound)
        self._log_motion(motion, before)
        return result

    def _do_move(self, motion: MotionFunction, bound: dict) -> MotionResult:
        if motion.arg not in bound:
            return MotionResult(motion, False, f"unbound symbol {motion.arg!r}")
        target = np.asarray(bound[motion.arg], dtype=float)
        if motion.arg.endswith("_handle"):
            # handle positions are live state: the door may have moved since
            # the plan bound the symbol
            door = self._find_articulated(motion.arg[: -len("_handle")])
            if door is not None:
                target = door.handle_position()
        lo, hi = self.scene.robot.lift_range
        if target[2] < lo - 1e-9 or target[2] > hi + 1e-9:
            return MotionResult(motion, False, f"unreachable: z outside lift range")
        self._approach_base(target)
        blocker = self._blocked_interior(target)
        if blocker is not None:
            return MotionResult(motion, False, f"unreachable-interior: {blocker.id} is closed")
        distance = float(np.linalg.norm(target - self.state.ee))
        if self._held_door() is not None:
            return self._move_with_door(motion, target)
        payload = self._held_payload()
        if payload is not None:
            payload.position = payload.position + (target - self.state.ee)
        self.state.ee = target.copy()
        self._last_ee = target.copy()
        self._advance_time(distance, self.config.ee_speed)
        return MotionResult(motion, True)

    def _move_with_door(self, motion: MotionFunction, target: np.ndarray) -> MotionResult:
        # stepping keeps the grasped door on its track; leaving the track fails
        start = self.state.ee.copy()
        distance = float(np.linalg.norm(target - start))
        steps = max(1, math.ceil(distance / self.config.ee_speed / self.config.dt))
        door = self._held_door()
        for k in range(1, steps + 1):
            point = start + (target - start) * (k / steps)
            _, deviation = door.articulation.project_angle(point)
            if deviation > self.config.handle_track_tolerance:
                self.t += k * self.config.dt
                return MotionResult(motion, False, f"handle-track deviation at {door.id}")
            self.drive_ee(point)
        self.t += steps * self.config.dt
        return MotionResult(motion, True)

    def _do_gripper(self, motion: MotionFunction, bound: dict) -> MotionResult:
        mode = motion.arg
        if mode not in GRIPPER_MODES:
            return MotionResult(motion, False, f"unknown gripper mode {mode!r}")
        self.state.aperture = GRIPPER_MODES[mode]
        self.t += self.config.dt
        if mode == "open":
            self.state.held_object = None
            return MotionResult(motion, True)
        grasp_radius = self.scene.robot.grasp_radius
        best: tuple[float, str] | None = None
        for obj in self.scene.objects:
            if obj.movable:
                dist = float(np.linalg.norm(obj.position - self.state.ee))
                if dist <= grasp_radius and (best is None or dist < best[0]):
                    best = (dist, obj.id)
            elif obj.articulation is not None:
                dist = float(np.linalg.norm(obj.handle_position() - self.state.ee))
                if dist <= grasp_radius and (best is None or dist < best[0]):
                    best = (dist, f"door:{obj.id}")
        self.state.held_object = best[1] if best else None
        return MotionResult(motion, True)

    def _do_base_cycle(self, motion: MotionFunction, bound: dict) -> MotionResult:
        door = self._held_door()
        if door is None:
            return MotionResult(motion, False, "no grasped door for the base arc")
        art = door.articulation
        if art.kind == "horizontal_hinge":
            # the base sweeps a ground-plane circle; a drop-down handle leaves it
            self._advance_time(art.radius_door2axis * art.open_angle, self.config.base_speed)
            return MotionResult(motion, False, f"wrong-articulation: {door.id} hinge is horizontal")
        if art.kind == "press_pull" and door.state.latched:
            self._advance_time(art.radius_door2axis * art.open_angle, self.config.base_speed)
            return MotionResult(motion, False, f"press-pull latch engaged on {door.id}")
        sweep = art.open_angle - door.state.door_angle
        door.state.door_angle = art.open_angle
        new_handle = art.handle_at(art.open_angle)
        delta = new_handle - self.state.ee
        self.state.ee = new_handle.copy()
        self._last_ee = new_handle.copy()
        self.state.base[:2] = self.state.base[:2] + delta[:2]
        self._advance_time(abs(sweep) * art.radius_door2axis, self.config.base_speed)
        return MotionResult(motion, True)

    def _do_close_move(self, motion: MotionFunction, bound: dict) -> MotionResult:
        if motion.arg not in bound:
            return MotionResult(motion, False, f"unbound symbol {motion.arg!r}")
        door = self._find_articulated(motion.arg)
        if door is None:
            return MotionResult(motion, False, f"{motion.arg!r} has no door to close")
        art = door.articulation
        if art.kind == "horizontal_hinge":
            self.t += self.config.dt
            return MotionResult(motion, False, f"wrong-articulation: {door.id} hinge is horizontal")
        open_handle = art.handle_at(door.state.door_angle)
        self._approach_base(open_handle)
        sweep = door.state.door_angle
        # push span follows the door size: the ee sweeps the whole arc shut
        self._advance_time(
            float(np.linalg.norm(open_handle - self.state.ee)) + sweep * art.radius_door2axis,
            self.config.ee_speed,
        )
        door.state.door_angle = 0.0
        if art.kind == "press_pull":
            door.state.latched = True
            self._press_travel.pop(door.id, None)
        closed_handle = art.handle_at(0.0)
        self.state.ee = closed_handle.copy()
        self._last_ee = closed_handle.copy()
        return MotionResult(motion, True)

    def _do_rotate_waist(self, motion: MotionFunction, bound: dict) -> MotionResult:
        try:
            degrees = float(motion.arg)
        except ValueError:
            return MotionResult(motion, False, f"waist angle {motion.arg!r} is not a number")
        knob = self._nearest_knob()
        self.state.waist_angle += math.radians(degrees)
        self._advance_time(abs(degrees), self.config.waist_speed_deg)
        if knob is not None and abs(degrees) >= self.config.power_threshold_deg:
            appliance = self._knob_appliance(knob)
            if appliance is not None:
                appliance.state.powered = not appliance.state.powered
        return MotionResult(motion, True)

    def _do_dmp_publish(self, motion: MotionFunction, bound: dict) -> MotionResult:
        key = motion.arg
        if self.config.perturb_skill_keys:
            key = perturb_skill_key(key)
        if self.library is None or not self.library.has_model(key):
            return MotionResult(motion, False, f"skill-miss: no DMP named {key!r}")
        model = self.library.model(key)
        y0 = self.state.ee[: model.dims].copy()
        duration = max(model.config.tau, 10 * self.config.dt)
        try:
            replay = rollout(model, y0, model.g_demo, duration, self.config.dt)
        except IntegrationDivergenceError as err:
            return MotionResult(motion, False, f"skill replay diverged: {err}")
        for sample in replay.positions[1:]:
            point = self.state.ee.copy()
            point[: model.dims] = sample
            self.drive_ee(point)
            self.t += self.config.dt
        return MotionResult(motion, True)

    def _find_articulated(self, symbol: str) -> WorldObject | None:
        name = symbol.rstrip("0123456789")
        for obj in self.scene.objects:
            if obj.articulation is not None and (obj.id == symbol or obj.name == name):
                return obj
        return None

    def _nearest_knob(self) -> WorldObject | None:
        best = None
        for obj in self.scene.objects:
            if obj.name.endswith("_knob"):
                dist = float(np.linalg.norm(obj.position - self.state.ee))
                if dist <= self.scene.robot.grasp_radius and (best is None or dist < best[0]):
                    best = (dist, obj)
        return best[1] if best else None

    def _knob_appliance(self, knob: WorldObject) -> WorldObject | None:
        stem = knob.name[: -len("_knob")]
        matches = self.scene.by_name(stem)
        return matches[0] if matches else None

    # -- event log ------------------------------------------------------------

    def _object_snapshot(self) -> dict:
        snap = {}
        for obj in self.scene.objects:
            snap[obj.id] = (
                tuple(round(float(v), 9) for v in obj.position),
                round(float(obj.state.door_angle), 9),
                obj.state.latched,
                obj.state.powered,
            )
        return snap

    def _log_motion(self, motion: MotionFunction, before: dict) -> None:
        changed = []
        for obj in self.scene.objects:
            now = (
                tuple(round(float(v), 9) for v in obj.position),
                round(float(obj.state.door_angle), 9),
                obj.state.latched,
                obj.state.powered,
            )
            if now != before[obj.id]:
                changed.append({
                    "id": obj.id,
                    "position": list(now[0]),
                    "state": {"door_angle": now[1], "latched": now[2], "powered": now[3]},
                })
        self.event_log.append({
            "t": round(self.t, 9),
            "motion": str(motion),
            "robot": self.state.snapshot(),
            "changed_objects": changed,
        })

    def event_log_text(self) -> str:
        return "\n".join(json.dumps(entry, sort_keys=True) for entry in self.event_log) + (
            "\n" if self.event_log else ""
        )

    # -- plan execution --------------------------------------------------------

    def release(self) -> None:
        self.state.aperture = 1.0
        self.state.held_object = None

    def run_plan(self, plan: Plan) -> ExecutionOutcome:
        """Execute sub-tasks in order, halting at the first failed motion."""
        scene_before = self.scene.clone()
        results: list[MotionResult] = []
        failure: str | None = None
        for subtask in plan.subtasks:
            for motion in subtask.motions:
                result = self.execute_motion(motion, plan.bound_symbols)
                results.append(result)
                if not result.ok:
                    failure = f"{subtask.description}: {result.reason}"
                    break
            if failure:
                break
        self.release()
        executed = failure is None
        success = False
        if executed:
            success = check_success(
                resolved_task_text(plan), scene_before, self.scene, self.home_ee
            )
        return ExecutionOutcome(
            executed=executed,
            per_motion_results=results,
            task_success=success,
            failure_reason=failure,
        )


# ---------------------------------------------------------------------------
# Success predicates

def _single(scene: Scene, phrase: str) -> WorldObject | None:
    from .planner import _phrase_to_symbol

    names = {o.name for o in scene.objects}
    counts = {name: len(scene.by_name(name)) for name in names}
    try:
        symbol = _phrase_to_symbol(phrase, counts)
    except Exception:
        return None
    name = symbol.rstrip("0123456789")
    matches = scene.by_name(name)
    if not matches:
        return None
    if symbol == name or len(matches) == 1:
        return matches[0]
    index = int(symbol[len(name):])
    ranked = sorted(matches, key=lambda o: scene.lateral_coordinate(o.position))
    return ranked[index - 1] if index <= len(ranked) else None


def _within_margin(position: np.ndarray, target: np.ndarray, margin: float = PLACEMENT_MARGIN) -> bool:
    return bool(np.all(np.abs(position[:2] - target[:2]) <= margin))


def resolved_task_text(plan: Plan) -> str:
    """Task text with bare object words replaced by the labels the plan bound,
    so a clarified referent ("the bottle" -> bottle2) survives into the
    success predicate."""
    import re

    text = plan.task_text
    for symbol in plan.bound_symbols:
        m = re.fullmatch(r"([a-z_]+?)(\d+)", symbol)
        if not m:
            continue
        bare = m.group(1)
        if bare in plan.bound_symbols:
            continue
        pattern = rf"\b{re.escape(bare)}\b(?!\d)"
        if re.search(pattern, text):
            text = re.sub(pattern, symbol, text, count=1)
    return text


def check_success(task_text: str, scene_before: Scene, scene_after: Scene,
                  home_ee: np.ndarray | None = None) -> bool:
    """Evaluate the task's goal predicate on ground truth before/after states."""
    import re

    task = _normalize(task_text)

    if m := re.fullmatch(r"put (?P<obj>[\w ]+?) on (?P<tgt>[\w ]+)", task):
        return _check_put(scene_before, scene_after, m.group("obj"), m.group("tgt"), mode="on")
    if m := re.fullmatch(r"put (?P<obj>[\w ]+?) (?:in|into|inside) (?P<tgt>[\w ]+)", task):
        return _check_put(scene_before, scene_after, m.group("obj"), m.group("tgt"), mode="inside")
    if m := re.fullmatch(r"stack (?P<obj>[\w ]+?) on(?:to)? (?P<tgt>[\w ]+)", task):
        return _check_put(scene_before, scene_after, m.group("obj"), m.group("tgt"), mode="above")
    if m := re.fullmatch(r"open (?:up )?(?P<obj>[\w ]+)", task):
        door = _single(scene_after, m.group("obj"))
        if door is None or door.articulation is None:
            raise UnknownPredicateError(task_text)
        return door.state.door_angle >= OPEN_SUCCESS_FRACTION * door.articulation.open_angle
    if m := re.fullmatch(r"(?:close|shut) (?P<obj>[\w ]+)", task):
        door = _single(scene_after, m.group("obj"))
        if door is None or door.articulation is None:
            raise UnknownPredicateError(task_text)
        return door.state.door_angle <= CLOSE_SUCCESS_ANGLE
    if m := re.fullmatch(r"(?:power on|turn on|switch on) (?P<obj>[\w ]+)", task):
        appliance = _single(scene_after, m.group("obj"))
        if appliance is None:
            raise UnknownPredicateError(task_text)
        return appliance.state.powered
    if m := re.fullmatch(r"(?:pick up|pick|grab|take) (?P<obj>[\w ]+)", task):
        if home_ee is None:
            raise UnknownPredicateError(task_text)
        before = _single(scene_before, m.group("obj"))
        if before is None:
            raise UnknownPredicateError(task_text)
        after = scene_after.by_id(before.id)  # labels rank pre-motion positions
        return _within_margin(after.position, np.asarray(home_ee))
    if m := re.fullmatch(r"(?:warm up|heat|heat up) (?P<obj>[\w ]+)", task):
        return _check_cook(scene_before, scene_after, m.group("obj"), "microwave")
    if m := re.fullmatch(r"roast (?P<obj>[\w ]+)", task):
        return _check_cook(scene_before, scene_after, m.group("obj"), "oven")
    if re.fullmatch(r"(?:clean|clear|tidy)(?: up)? (?:the )?table", task):
        return _check_clean(scene_before, scene_after)
    if m := re.fullmatch(r"move (?P<obj>[\w ]+?) to (?:the )?clearance(?: zone)?", task):
        before = _single(scene_before, m.group("obj"))
        if before is None:
            raise UnknownPredicateError(task_text)
        after = scene_after.by_id(before.id)
        return bool(np.linalg.norm(after.position[:2] - before.position[:2]) > 0.05)
    raise UnknownPredicateError(task_text)


def _check_put(scene_before: Scene, scene_after: Scene, obj_phrase: str,
               tgt_phrase: str, mode: str) -> bool:
    moved_before = _single(scene_before, obj_phrase)
    target_before = _single(scene_before, tgt_phrase)
    moved_after = _single(scene_after, obj_phrase) if moved_before is None else (
        scene_after.by_id(moved_before.id)
    )
    if moved_before is None or target_before is None or moved_after is None:
        raise UnknownPredicateError(f"put {obj_phrase} / {tgt_phrase}")
    intended = target_before.position
    ok = _within_margin(moved_after.position, intended)
    if mode == "inside":
        container_after = scene_after.by_id(target_before.id)
        ok = ok and container_after.contains_point(moved_after.position)
    return ok


def _check_cook(scene_before: Scene, scene_after: Scene, obj_phrase: str, appliance_name: str) -> bool:
    appliance = scene_after.by_name(appliance_name)
    if not appliance:
        raise UnknownPredicateError(f"no {appliance_name} in scene")
    appliance = appliance[0]
    food = _single(scene_before, obj_phrase)
    if food is None:
        raise UnknownPredicateError(obj_phrase)
    food_after = scene_after.by_id(food.id)
    return (
        appliance.contains_point(food_after.position)
        and _within_margin(food_after.position, appliance.position)
        and appliance.state.door_angle <= CLOSE_SUCCESS_ANGLE
        and appliance.state.powered
    )


def _check_clean(scene_before: Scene, scene_after: Scene) -> bool:
    storage = scene_after.by_name("storage")
    if not storage:
        raise UnknownPredicateError("no storage in scene")
    storage = storage[0]
    view = ground_truth_view(scene_before)
    inventory = table_inventory(view)
    for obj in scene_before.objects:
        if obj.movable and obj.name in inventory:
            after = scene_after.by_id(obj.id)
            if not storage.footprint_contains(after.position):
                return False
    return True
