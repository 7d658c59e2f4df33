"""Batch trial runner: executability / feasibility / success over seeded trials.

Each trial plans against a noisy synthetic scan and executes on the true
world. The three metrics separate the failure stages:

  executability  the backend's plan text parses into the DSL
  feasibility    the same plan structure, re-grounded without noise or
                 detector misses, completes on a fresh world
  success        the noisy-grounded plan completes on a fresh world

Noise only ever hurts, so per task success <= feasibility, with equality at
zero noise. Reports are deterministic for a fixed seed, byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .library import SkillLibrary
from .perception import (
    DetectorConfig,
    backproject,
    detect_scene,
    ground_truth_view,
    perceive,
    scene_camera,
    to_world,
)
from .plan import ClarificationNeeded, PlanParseError, parse_plan_text
from .planner import (
    PlannerConfig,
    PlannerError,
    PromptContext,
    RuleBackend,
    UnknownTaskError,
    bind_plan,
    inject_obstacle_removal,
    table_inventory,
)
from .scene import Scene, resolve_scene
from .simulator import SimConfig, Simulator

STUDY_RATE_HZ = 10.0


class HarnessError(Exception):
    pass


@dataclass
class TrialSpec:
    task_text: str
    scene: str = "kitchen"
    label: str = ""
    noise_half_width: float = 0.011
    miss_probability: float = 0.02
    dmp_library: str | None = None
    check_obstacles: bool = False
    fault_injection: dict = field(default_factory=dict)

    def display(self) -> str:
        return self.label or self.task_text


@dataclass
class TrialRecord:
    executable: bool
    feasible: bool
    success: bool
    failure_reason: str | None = None

    def __post_init__(self):
        if self.success and not self.executable:
            raise ValueError("success implies executability")


@dataclass
class TaskMetrics:
    label: str
    trials: int
    executability: float
    feasibility: float
    success_rate: float


@dataclass
class MetricsReport:
    rows: list[TaskMetrics]

    @property
    def total(self) -> TaskMetrics:
        n = sum(r.trials for r in self.rows)
        if n == 0:
            raise HarnessError("empty report")
        weight = lambda metric: sum(getattr(r, metric) * r.trials for r in self.rows) / n
        return TaskMetrics(
            label="Total", trials=n,
            executability=weight("executability"),
            feasibility=weight("feasibility"),
            success_rate=weight("success_rate"),
        )


def _plan_text_for(task_text: str, perceived, library, clarification=None) -> str:
    backend = RuleBackend(perceived, library)
    context = PromptContext.build(perceived, library, clarification)
    import re

    from .planner import _normalize

    if re.fullmatch(r"(?:clean|clear|tidy)(?: up)? (?:the )?table", _normalize(task_text)):
        context.scene_inventory = sorted(table_inventory(perceived).items())
    return backend.plan_text(context, task_text)


def run_trial(spec: TrialSpec, seed: int) -> TrialRecord:
    """One noisy trial plus its noiseless twin."""
    rng = np.random.default_rng(seed)
    detector = DetectorConfig(
        noise_half_width=spec.noise_half_width,
        miss_probability=spec.miss_probability,
    )
    library = SkillLibrary(spec.dmp_library) if spec.dmp_library else None
    sim_config = SimConfig(
        perturb_skill_keys=bool(spec.fault_injection.get("perturb_skill_keys", False)),
    )
    planner_config = PlannerConfig()

    noisy_scene = resolve_scene(spec.scene)
    noisy_view = perceive(noisy_scene, rng, detector)

    try:
        text = _plan_text_for(spec.task_text, noisy_view, library)
        parse_plan_text(spec.task_text, text)
    except (UnknownTaskError, PlanParseError) as err:
        return TrialRecord(False, False, False, failure_reason=f"not executable: {err}")
    except ClarificationNeeded as err:
        return TrialRecord(True, False, False, failure_reason=f"needs clarification: {err}")

    def grounded_run(scene: Scene, view, reason_tag: str) -> tuple[bool, str | None]:
        try:
            plan = parse_plan_text(spec.task_text, text)
            bind_plan(plan, view, planner_config)
            if spec.check_obstacles:
                plan = inject_obstacle_removal(plan, view, config=planner_config)
        except (PlannerError, ClarificationNeeded) as err:
            return False, f"{reason_tag}: {err}"
        sim = Simulator(scene, library=library, config=sim_config)
        outcome = sim.run_plan(plan)
        if outcome.task_success:
            return True, None
        return False, f"{reason_tag}: {outcome.failure_reason or 'goal predicate failed'}"

    success, success_reason = grounded_run(noisy_scene, noisy_view, "noisy run")

    twin_scene = resolve_scene(spec.scene)
    twin_view = ground_truth_view(twin_scene)
    feasible, twin_reason = grounded_run(twin_scene, twin_view, "noiseless twin")

    return TrialRecord(
        executable=True,
        feasible=feasible,
        success=success,
        failure_reason=success_reason or twin_reason,
    )


def trial_seed(base_seed: int, task_index: int, trial_index: int) -> int:
    seq = np.random.SeedSequence([base_seed, task_index, trial_index])
    return int(seq.generate_state(1)[0])


def run_experiment(specs: list[TrialSpec], n_trials: int, base_seed: int = 7) -> MetricsReport:
    if n_trials < 1:
        raise HarnessError("need at least one trial")
    rows = []
    for task_index, spec in enumerate(specs):
        records = [
            run_trial(spec, trial_seed(base_seed, task_index, k))
            for k in range(n_trials)
        ]
        rows.append(TaskMetrics(
            label=spec.display(),
            trials=n_trials,
            executability=sum(r.executable for r in records) / n_trials,
            feasibility=sum(r.feasible for r in records) / n_trials,
            success_rate=sum(r.success for r in records) / n_trials,
        ))
    return MetricsReport(rows=rows)


# ---------------------------------------------------------------------------
# Report emission

REPORT_COLUMNS = ("task", "trials", "executability", "feasibility", "success_rate")


def emit_report(report: MetricsReport, fmt: str) -> str:
    if not report.rows:
        raise HarnessError("empty report")
    rows = report.rows + [report.total]
    if fmt == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for r in rows:
            lines.append(
                f"{r.label},{r.trials},{r.executability * 100:.1f},"
                f"{r.feasibility * 100:.1f},{r.success_rate * 100:.1f}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "text":
        width = max(len(r.label) for r in rows) + 2
        header = (
            f"{'Tasks':<{width}}{'Num of trials':>14}{'Executability':>15}"
            f"{'Feasibility':>13}{'Success rate':>14}"
        )
        lines = [header, "-" * len(header)]
        for r in rows:
            lines.append(
                f"{r.label:<{width}}{r.trials:>14}{r.executability * 100:>14.1f}%"
                f"{r.feasibility * 100:>12.1f}%{r.success_rate * 100:>13.1f}%"
            )
        return "\n".join(lines) + "\n"
    raise HarnessError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Task suites

def default_suite(scene: str = "kitchen", dmp_library: str | None = None,
                  noise: float = 0.011, miss: float = 0.02) -> list[TrialSpec]:
    """The seven-task kitchen benchmark; HRC rows need a taught library."""
    base = dict(scene=scene, noise_half_width=noise, miss_probability=miss)
    hrc = dict(base, dmp_library=dmp_library)
    return [
        TrialSpec(task_text="put the apple on the plate", label="Put&Stack", **base),
        TrialSpec(task_text="Open the microwave", label="Open microwave", **base),
        TrialSpec(task_text="Open the oven", label="Open oven (HRC)", **hrc),
        TrialSpec(task_text="Open the cabinet", label="Open cabinet (HRC)", **hrc),
        TrialSpec(task_text="Clean the table", label="Clean table", **base),
        TrialSpec(task_text="Warm up the apple", label="Warm up apple", **base),
        TrialSpec(task_text="Roast the apple", label="Roast apple (HRC)", **hrc),
    ]


def load_suite(path: Path | str) -> list[TrialSpec]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    defaults = data.get("defaults", {})
    specs = []
    for entry in data["tasks"]:
        merged = {**defaults, **entry}
        specs.append(TrialSpec(
            task_text=merged["task_text"],
            scene=merged.get("scene", "kitchen"),
            label=merged.get("label", ""),
            noise_half_width=merged.get("noise", merged.get("noise_half_width", 0.011)),
            miss_probability=merged.get("miss_probability", 0.02),
            dmp_library=merged.get("dmp_library"),
            check_obstacles=merged.get("check_obstacles", False),
            fault_injection=merged.get("fault_injection", {}),
        ))
    return specs


def save_suite(specs: list[TrialSpec], path: Path | str) -> None:
    data = {"tasks": [
        {
            "task_text": s.task_text,
            "scene": s.scene,
            "label": s.label,
            "noise": s.noise_half_width,
            "miss_probability": s.miss_probability,
            "dmp_library": s.dmp_library,
            "check_obstacles": s.check_obstacles,
            "fault_injection": s.fault_injection,
        }
        for s in specs
    ]}
    Path(path).write_text(json.dumps(data, indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# Perception discrepancy study

@dataclass
class DiscrepancyStats:
    n_detections: int
    minimum: float
    median: float
    maximum: float
    samples: np.ndarray


def perception_discrepancy_study(
    scene: Scene | str,
    n_seconds: float = 5.0,
    seed: int = 0,
    detector: DetectorConfig | None = None,
) -> DiscrepancyStats:
    """Planar gap between detections and ground truth over a timed window,
    scanned at 10 Hz as the detector would stream."""
    if isinstance(scene, str):
        scene = resolve_scene(scene)
    detector = detector or DetectorConfig()
    rng = np.random.default_rng(seed)
    intr, t_c_w = scene_camera(scene)
    truth = {o.id: o.position for o in scene.movable_objects()}
    gaps = []
    for _ in range(int(round(n_seconds * STUDY_RATE_HZ))):
        for det in detect_scene(scene, rng, detector):
            world = to_world(backproject(det, intr), t_c_w)
            nearest = min(
                (p for oid, p in truth.items() if oid.rstrip("0123456789") == det.name),
                key=lambda p: float(np.linalg.norm(p[:2] - world[:2])),
            )
            gaps.append(float(np.linalg.norm(world[:2] - nearest[:2])))
    if not gaps:
        raise HarnessError("no detections in the study window")
    arr = np.array(gaps)
    return DiscrepancyStats(
        n_detections=len(arr),
        minimum=float(arr.min()),
        median=float(np.median(arr)),
        maximum=float(arr.max()),
        samples=arr,
    )


# ---------------------------------------------------------------------------
# Chain-degradation consistency

def binomial_pvalue(successes: int, n: int, p: float) -> float:
    """Exact two-sided binomial test by summing outcomes no more likely than
    the observed one."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    probs = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    observed = probs[successes]
    return float(min(1.0, sum(q for q in probs if q <= observed * (1 + 1e-12))))


def chain_consistency(
    chain_spec: TrialSpec,
    subtask_specs: list[TrialSpec],
    n_trials: int,
    base_seed: int = 7,
) -> dict:
    """Whether a long-horizon task's success rate is consistent with the
    product of its sub-tasks' independent rates (binomial test)."""
    marginals = []
    for idx, spec in enumerate(subtask_specs):
        records = [
            run_trial(spec, trial_seed(base_seed, 100 + idx, k)) for k in range(n_trials)
        ]
        marginals.append(sum(r.success for r in records) / n_trials)
    chain_records = [
        run_trial(chain_spec, trial_seed(base_seed, 999, k)) for k in range(n_trials)
    ]
    chain_successes = sum(r.success for r in chain_records)
    expected = float(np.prod(marginals))
    return {
        "marginals": marginals,
        "expected_chain_rate": expected,
        "observed_chain_rate": chain_successes / n_trials,
        "p_value": binomial_pvalue(chain_successes, n_trials, expected),
    }
