"""Interactive session: one robot, one world, one operator.

The session owns the simulator and advances it one motion per tick, so a
pause always lands on a motion boundary. The teach loop is:

    executing --pause--> paused --demo_start--> demonstrating
    demonstrating --demo_end--> paused --commit_skill--> fitting
    fitting --resume--> executing   (current sub-task recompiled first,
                                     so the fresh skill substitutes in)

Every phase change is appended to `transitions`, and `DECLARED_TRANSITIONS`
is the complete legal set; the tests enumerate command sequences and check
closure against it. Commands in the wrong phase raise SessionRejection and
change nothing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .library import DuplicateSkillError, SkillLibrary
from .perception import DetectorConfig, PerceivedScene, ground_truth_view, perceive
from .plan import ClarificationNeeded, Plan, PlanError, SubTask
from .planner import PlannerConfig, UnknownTaskError, plan_task, skill_name
from .scene import Scene
from .simulator import (
    MotionResult,
    SimConfig,
    Simulator,
    UnknownPredicateError,
    check_success,
    resolved_task_text,
)
from .teaching import DemoSample, TeachingError, build_skill

PHASES = (
    "idle", "planning", "executing", "paused",
    "demonstrating", "fitting", "awaiting_clarification",
)

DECLARED_TRANSITIONS = frozenset({
    ("idle", "submit", "planning"),
    ("planning", "plan_ok", "executing"),
    ("planning", "plan_ambiguous", "awaiting_clarification"),
    ("planning", "plan_failed", "idle"),
    ("executing", "pause", "paused"),
    ("executing", "motion_ok", "executing"),
    ("executing", "task_done", "idle"),
    ("executing", "task_failed", "idle"),
    ("executing", "recompile_ambiguous", "awaiting_clarification"),
    ("awaiting_clarification", "clarify", "planning"),
    ("paused", "resume", "executing"),
    ("paused", "demo_start", "demonstrating"),
    ("paused", "commit", "fitting"),
    ("demonstrating", "demo_end", "paused"),
    ("demonstrating", "demo_abort", "paused"),
    ("fitting", "fit_ok", "fitting"),
    ("fitting", "fit_failed", "paused"),
    ("fitting", "resume", "executing"),
})

DEMO_GAP_LIMIT_S = 2.0
DEMO_MAX_DURATION_S = 120.0


class SessionError(Exception):
    pass


class SessionRejection(SessionError):
    """Command not legal in the current phase; the session is unchanged."""

    def __init__(self, command: str, phase: str):
        super().__init__(f"{command} rejected in phase {phase!r}")
        self.command = command
        self.phase = phase


@dataclass
class DemonstrationRecording:
    recording_id: str
    subject_subtask: str
    samples: list[DemoSample]
    proposed_skill_name: str
    clamped: bool = False

    @property
    def duration(self) -> float:
        return self.samples[-1].t - self.samples[0].t if self.samples else 0.0


@dataclass
class TaskRecord:
    task_text: str
    executable: bool
    success: bool
    failure_reason: str | None = None


class Session:
    def __init__(
        self,
        scene: Scene,
        library: SkillLibrary,
        backend=None,
        planner_config: PlannerConfig | None = None,
        sim_config: SimConfig | None = None,
        detector: DetectorConfig | None = None,
        rng: np.random.Generator | None = None,
        check_obstacles: bool = False,
    ):
        self.scene = scene
        self.library = library
        self.backend = backend
        self.planner_config = planner_config or PlannerConfig()
        self.sim_config = sim_config or SimConfig()
        self.detector = detector
        self.rng = rng
        self.check_obstacles = check_obstacles

        self.sim = Simulator(scene, library=library, config=self.sim_config)
        self.phase = "idle"
        self.plan: Plan | None = None
        self.cursor: tuple[int, int] = (0, 0)
        self.pending_question: str | None = None
        self.pending_task: str | None = None
        self.pending_recording: DemonstrationRecording | None = None
        self.last_outcome: TaskRecord | None = None
        self.transitions: list[tuple[str, str, str]] = []
        self._demo_samples: list[DemoSample] = []
        self._demo_clamped = False
        self._subtask_start: Scene | None = None
        self._task_start: Scene | None = None
        self._recording_counter = itertools.count(1)

    # -- bookkeeping --------------------------------------------------------

    def _transition(self, event: str, to_phase: str) -> None:
        self.transitions.append((self.phase, event, to_phase))
        self.phase = to_phase

    def _reject(self, command: str):
        raise SessionRejection(command, self.phase)

    def perceived(self) -> PerceivedScene:
        if self.detector is not None and self.rng is not None:
            return perceive(self.scene, self.rng, self.detector)
        return ground_truth_view(self.scene)

    # -- task lifecycle -------------------------------------------------------

    def submit_task(self, text: str, clarification: str | None = None) -> TaskRecord | None:
        """Plan and start executing; returns the failure record if planning
        fails, None when execution began (or a question is pending)."""
        if self.phase != "idle":
            self._reject("submit_task")
        self._transition("submit", "planning")
        return self._plan_current(text, clarification)

    def _plan_current(self, text: str, clarification: str | None) -> TaskRecord | None:
        try:
            plan = plan_task(
                text,
                self.perceived(),
                library=self.library,
                backend=self.backend,
                config=self.planner_config,
                clarification=clarification,
                check_obstacles=self.check_obstacles,
            )
        except ClarificationNeeded as err:
            self.pending_question = err.question
            self.pending_task = text
            self._transition("plan_ambiguous", "awaiting_clarification")
            return None
        except PlanError as err:
            executable = not isinstance(err, (UnknownTaskError,)) and not _is_parse_error(err)
            self.last_outcome = TaskRecord(
                task_text=text, executable=executable, success=False,
                failure_reason=str(err),
            )
            self._transition("plan_failed", "idle")
            return self.last_outcome
        self.plan = plan
        self.cursor = (0, 0)
        self.pending_question = None
        self.pending_task = None
        self._task_start = self.scene.clone()
        self._subtask_start = self.scene.clone()
        self._transition("plan_ok", "executing")
        return None

    def clarify(self, answer: str) -> TaskRecord | None:
        if self.phase != "awaiting_clarification":
            self._reject("clarify")
        task = self.pending_task or ""
        self._transition("clarify", "planning")
        return self._plan_current(task, answer)

    def tick(self) -> MotionResult | None:
        """Execute the next motion; advances to idle when the plan ends."""
        if self.phase != "executing":
            self._reject("tick")
        sub_idx, mot_idx = self.cursor
        if self.plan is None or sub_idx >= len(self.plan.subtasks):
            self._finish_task()
            return None
        subtask = self.plan.subtasks[sub_idx]
        if mot_idx == 0:
            self._subtask_start = self.scene.clone()
        result = self.sim.execute_motion(subtask.motions[mot_idx], self.plan.bound_symbols)
        if not result.ok:
            self.sim.release()
            self.last_outcome = TaskRecord(
                task_text=self.plan.task_text, executable=True, success=False,
                failure_reason=f"{subtask.description}: {result.reason}",
            )
            self._transition("task_failed", "idle")
            return result
        mot_idx += 1
        if mot_idx >= len(subtask.motions):
            self.cursor = (sub_idx + 1, 0)
            if sub_idx + 1 >= len(self.plan.subtasks):
                self._finish_task()
                return result
        else:
            self.cursor = (sub_idx, mot_idx)
        self._transition("motion_ok", "executing")
        return result

    def run_to_completion(self, max_ticks: int = 1000) -> TaskRecord:
        while self.phase == "executing" and max_ticks:
            self.tick()
            max_ticks -= 1
        if self.last_outcome is None:
            raise SessionError("plan did not terminate")
        return self.last_outcome

    def _finish_task(self) -> None:
        self.sim.release()
        success = False
        failure = None
        try:
            success = check_success(
                resolved_task_text(self.plan), self._task_start, self.scene, self.sim.home_ee
            )
        except UnknownPredicateError as err:
            failure = str(err)
        self.last_outcome = TaskRecord(
            task_text=self.plan.task_text, executable=True, success=success,
            failure_reason=failure,
        )
        self._transition("task_done", "idle")

    # -- pause / resume ---------------------------------------------------------

    def pause(self) -> None:
        if self.phase != "executing":
            self._reject("pause")
        self._transition("pause", "paused")

    def resume(self) -> TaskRecord | None:
        """Recompile the current sub-task (a fresh skill substitutes in),
        skip it if the demonstration already achieved its goal, and continue."""
        if self.phase not in ("paused", "fitting"):
            self._reject("resume")
        self._transition("resume", "executing")
        sub_idx, _ = self.cursor
        if self.plan is not None and sub_idx < len(self.plan.subtasks):
            subtask = self.plan.subtasks[sub_idx]
            try:
                fresh = plan_task(
                    subtask.description,
                    self.perceived(),
                    library=self.library,
                    backend=self.backend,
                    config=self.planner_config,
                    check_obstacles=False,
                )
            except ClarificationNeeded as err:
                self.pending_question = err.question
                self.pending_task = self.plan.task_text
                self._transition("recompile_ambiguous", "awaiting_clarification")
                return None
            except PlanError as err:
                self.last_outcome = TaskRecord(
                    task_text=self.plan.task_text, executable=True, success=False,
                    failure_reason=f"recompile failed: {err}",
                )
                self._transition("task_failed", "idle")
                return self.last_outcome
            old = self.plan.subtasks[sub_idx]
            changed = [str(m) for m in old.motions] != [str(m) for m in fresh.subtasks[0].motions]
            self.plan.bound_symbols.update(fresh.bound_symbols)
            if changed:
                # the library substituted in; restart the sub-task with the
                # new sequence, or skip it if the demonstration already did it
                self.plan.subtasks[sub_idx] = fresh.subtasks[0]
                self.cursor = (sub_idx, 0)
                if self._goal_already_met(fresh.subtasks[0]):
                    self.cursor = (sub_idx + 1, 0)
                    if sub_idx + 1 >= len(self.plan.subtasks):
                        self._finish_task()
        return None

    def _goal_already_met(self, subtask: SubTask) -> bool:
        base = self._subtask_start or self._task_start or self.scene
        try:
            return check_success(subtask.description, base, self.scene, self.sim.home_ee)
        except UnknownPredicateError:
            return False

    # -- demonstration ------------------------------------------------------------

    def demo_start(self) -> None:
        if self.phase != "paused":
            self._reject("demo_start")
        self._demo_samples = []
        self._demo_clamped = False
        self._transition("demo_start", "demonstrating")

    def feed_demo_sample(self, t: float, position, aperture: float = 1.0) -> dict:
        """Mirror one operator sample into the simulator; returns the applied
        (possibly clamped) state. A stream gap over 2 s aborts the recording."""
        if self.phase != "demonstrating":
            self._reject("feed_demo_sample")
        if self._demo_samples:
            gap = t - self._demo_samples[-1].t
            total = t - self._demo_samples[0].t
            if gap > DEMO_GAP_LIMIT_S or total > DEMO_MAX_DURATION_S:
                self._demo_samples = []
                self._transition("demo_abort", "paused")
                return {"aborted": True}
        applied, clamped = self.sim.drive_ee(np.asarray(position, dtype=float))
        self._set_demo_aperture(aperture)
        self._demo_clamped = self._demo_clamped or clamped
        self._demo_samples.append(DemoSample(t=t, position=applied, aperture=aperture))
        return {
            "aborted": False,
            "position": [float(v) for v in applied],
            "clamped": clamped,
        }

    def _set_demo_aperture(self, aperture: float) -> None:
        closing = aperture < 0.5 <= self.sim.state.aperture
        opening = aperture >= 0.5 > self.sim.state.aperture
        self.sim.state.aperture = aperture
        if closing:
            from .plan import MotionFunction
            self.sim._do_gripper(MotionFunction("gripper_control", "close"), {})
            self.sim.state.aperture = aperture
        elif opening:
            self.sim.state.held_object = None

    def demo_end(self) -> DemonstrationRecording | None:
        if self.phase != "demonstrating":
            self._reject("demo_end")
        samples = self._demo_samples
        self._demo_samples = []
        if len(samples) < 3:
            self._transition("demo_abort", "paused")
            return None
        sub_idx, _ = self.cursor
        subject = (
            self.plan.subtasks[sub_idx].description
            if self.plan is not None and sub_idx < len(self.plan.subtasks)
            else "demonstration"
        )
        proposal = self._proposed_name(subject)
        self.pending_recording = DemonstrationRecording(
            recording_id=f"rec-{next(self._recording_counter):04d}",
            subject_subtask=subject,
            samples=samples,
            proposed_skill_name=proposal,
            clamped=self._demo_clamped,
        )
        self._transition("demo_end", "paused")
        return self.pending_recording

    def _subtask_context(self, description: str):
        """Template family and grasp data for the demonstrated sub-task."""
        import re

        from .planner import _phrase_to_symbol

        perceived = self.perceived()
        task = description.strip().lower().rstrip(".!?")
        inventory = perceived.inventory
        if m := re.fullmatch(r"open (?:up )?(?:the )?(?P<obj>[\w ]+)", task):
            symbol = _phrase_to_symbol(m.group("obj"), inventory)
            objs = self.scene.by_name(symbol.rstrip("0123456789"))
            if objs and objs[0].articulation is not None:
                art = objs[0].articulation
                if art.kind == "press_pull":
                    return ("open_press", symbol, art.handle_at(0.0), -art.outward_normal())
                return ("open_hinged", f"{symbol}_handle", art.handle_at(0.0), None)
        if m := re.fullmatch(r"(?:close|shut) (?:the )?(?P<obj>[\w ]+)", task):
            symbol = _phrase_to_symbol(m.group("obj"), inventory)
            objs = self.scene.by_name(symbol.rstrip("0123456789"))
            if objs and objs[0].articulation is not None:
                return ("close", f"{symbol}_handle",
                        objs[0].articulation.handle_at(objs[0].state.door_angle), None)
        return ("single", None, None, None)

    def _proposed_name(self, description: str) -> str:
        family, grasp, _, _ = self._subtask_context(description)
        try:
            if family == "close" and grasp is not None:
                # close skills are named for the door, not its handle
                return skill_name(description)
            return skill_name(description, grasp_symbol=grasp)
        except PlanError:
            return "skill"

    def commit_skill(self, name_override: str | None = None,
                     confirm_replace: bool = False):
        """Fit the pending recording and persist it; refusals return to paused."""
        if self.phase != "paused":
            self._reject("commit_skill")
        if self.pending_recording is None:
            self._reject("commit_skill (no recording)")
        self._transition("commit", "fitting")
        recording = self.pending_recording
        name = name_override or recording.proposed_skill_name
        family, grasp, contact, inward = self._subtask_context(recording.subject_subtask)
        sub_idx, _ = self.cursor
        replaced = ()
        if self.plan is not None and sub_idx < len(self.plan.subtasks):
            replaced = tuple(self.plan.subtasks[sub_idx].motions)
        try:
            record = build_skill(
                self.library,
                name,
                recording.samples,
                family=family,
                grasp_symbol=grasp,
                contact_point=contact,
                inward=inward,
                replaced_motions=replaced,
                created_from=recording.recording_id,
                replace=confirm_replace,
            )
        except (TeachingError, DuplicateSkillError) as err:
            self._transition("fit_failed", "paused")
            raise SessionError(f"commit refused: {err}") from err
        self.pending_recording = None
        self._transition("fit_ok", "fitting")
        return record

    def discard_recording(self) -> None:
        self.pending_recording = None

    # -- views --------------------------------------------------------------------

    def state_view(self) -> dict:
        return {
            "phase": self.phase,
            "cursor": list(self.cursor),
            "pending_question": self.pending_question,
            "recording_id": self.pending_recording.recording_id if self.pending_recording else None,
            "proposed_skill_name": (
                self.pending_recording.proposed_skill_name if self.pending_recording else None
            ),
            "last_outcome": (
                {
                    "task_text": self.last_outcome.task_text,
                    "executable": self.last_outcome.executable,
                    "success": self.last_outcome.success,
                    "failure_reason": self.last_outcome.failure_reason,
                }
                if self.last_outcome
                else None
            ),
        }

    def plan_view(self) -> dict:
        if self.plan is None:
            return {"task_text": None, "horizon": None, "subtasks": [], "dsl": ""}
        return {
            "task_text": self.plan.task_text,
            "horizon": self.plan.horizon,
            "subtasks": [
                {
                    "description": st.description,
                    "motions": [str(m) for m in st.motions],
                    "skill_name": st.skill_name,
                }
                for st in self.plan.subtasks
            ],
            "dsl": self.plan.to_text(),
        }

    def scene_view(self) -> dict:
        return {
            "lateral_axis": self.scene.lateral_axis,
            "robot": self.sim.state.snapshot(),
            "objects": [
                {
                    "id": o.id,
                    "name": o.name,
                    "position": [float(v) for v in o.position],
                    "size": [float(v) for v in o.size],
                    "fixed": o.fixed,
                    "articulated": o.articulation is not None,
                    "door_angle": o.state.door_angle,
                    "open_angle": o.articulation.open_angle if o.articulation else None,
                    "handle": (
                        [float(v) for v in o.handle_position()]
                        if o.articulation else None
                    ),
                    "axis_position": (
                        [float(v) for v in o.articulation.axis_position]
                        if o.articulation else None
                    ),
                    "latched": o.state.latched,
                    "powered": o.state.powered,
                }
                for o in self.scene.objects
            ],
        }

    def library_view(self) -> dict:
        entries = []
        for entry in self.library._index():
            entries.append(dict(entry))
        return {"skills": entries}


def _is_parse_error(err: PlanError) -> bool:
    from .plan import PlanParseError

    return isinstance(err, PlanParseError)
