"""Scripted demonstration streams and the demo-to-skill pipeline.

A demonstration is a timed stream of end-effector samples (plus gripper
aperture). Committing one fits DMP models over its segments and stores the
motion sequence that will replace the sub-task's basic compilation. The
segmentation keeps each model's replay start identical to its demo start,
which is what makes N = 15 basis functions enough:

  open (hinged door)   split at first handle contact ->
                       [dmp_publish(name), dmp_publish(name_ex)]
  open (press-pull)    approach stays a basic motion; the skill starts at
                       the door and splits at maximum latch penetration ->
                       [move_to_position(obj), dmp_publish(name),
                        dmp_publish(name_ex)]
  close (and other     approach to the open handle stays a basic motion ->
  single-segment)      [move_to_position(obj_handle), dmp_publish(name)]

The generators below produce the streams a human would draw for the kitchen
appliances: reach the handle, then trace the door's arc, pressing the latch
in first for the cabinet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dmp import DmpConfig, Trajectory, fit_dmp
from .library import SkillLibrary, SkillRecord
from .plan import MotionFunction
from .scene import Scene, WorldObject

CONTACT_SPLIT_TOLERANCE = 0.02
DEMO_RATE_HZ = 30.0

SKILL_FAMILIES = ("open_hinged", "open_press", "close", "single")


class TeachingError(Exception):
    pass


@dataclass(frozen=True)
class DemoSample:
    t: float
    position: np.ndarray
    aperture: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


def _min_jerk_blend(s: np.ndarray) -> np.ndarray:
    return 10 * s**3 - 15 * s**4 + 6 * s**5


def _timed_path(points: np.ndarray, duration: float, t0: float, rate: float) -> list[DemoSample]:
    """Resample a waypoint polyline with a smooth time profile."""
    n = max(3, int(round(duration * rate)))
    s = _min_jerk_blend(np.linspace(0.0, 1.0, n))
    seg = np.linspace(0.0, 1.0, len(points))
    samples = []
    for k, blend in enumerate(s):
        pos = np.array([np.interp(blend, seg, points[:, d]) for d in range(3)])
        samples.append(DemoSample(t=t0 + k * duration / (n - 1), position=pos))
    return samples


def _arc_points(obj: WorldObject, start_angle: float, end_angle: float, n: int = 60) -> np.ndarray:
    art = obj.articulation
    angles = np.linspace(start_angle, end_angle, n)
    return np.stack([art.handle_at(a) for a in angles])


def open_door_demo(scene: Scene, object_name: str, start_ee: np.ndarray,
                   approach_s: float = 2.0, sweep_s: float = 3.0) -> list[DemoSample]:
    """Reach the closed handle, then drag it along the full opening arc.

    For a press-pull door the stream pushes the latch in past its travel and
    pulls the door out from the pressed position.
    """
    obj = scene.by_name(object_name)[0]
    art = obj.articulation
    if art is None:
        raise TeachingError(f"{object_name} is not articulated")
    handle0 = art.handle_at(0.0)
    samples = _timed_path(np.stack([np.asarray(start_ee, dtype=float), handle0]),
                          approach_s, 0.0, DEMO_RATE_HZ)
    t = samples[-1].t
    arc = _arc_points(obj, 0.0, art.open_angle)
    if art.kind == "press_pull":
        inward = -art.outward_normal()
        depth = min(art.latch_travel + 0.006, CONTACT_SPLIT_TOLERANCE - 0.002)
        pressed = handle0 + inward * depth
        press_samples = _timed_path(np.stack([handle0, pressed]), 2.0, t, DEMO_RATE_HZ)
        samples.extend(press_samples[1:])
        t = samples[-1].t
        arc[0] = pressed  # the pull starts from the pressed latch
    arc_samples = _timed_path(arc, sweep_s, t, DEMO_RATE_HZ)
    samples.extend(arc_samples[1:])
    return samples


def close_door_demo(scene: Scene, object_name: str, start_ee: np.ndarray,
                    approach_s: float = 2.0, sweep_s: float = 3.0) -> list[DemoSample]:
    """Reach the open handle, then drag the door shut along its arc."""
    obj = scene.by_name(object_name)[0]
    art = obj.articulation
    if art is None:
        raise TeachingError(f"{object_name} is not articulated")
    start_angle = obj.state.door_angle if obj.state.door_angle > 0 else art.open_angle
    handle_open = art.handle_at(start_angle)
    samples = _timed_path(np.stack([np.asarray(start_ee, dtype=float), handle_open]),
                          approach_s, 0.0, DEMO_RATE_HZ)
    arc = _arc_points(obj, start_angle, 0.0)
    arc_samples = _timed_path(arc, sweep_s, samples[-1].t, DEMO_RATE_HZ)
    samples.extend(arc_samples[1:])
    return samples


# ---------------------------------------------------------------------------
# Demo -> skill

def split_at_contact(samples: list[DemoSample], contact_point: np.ndarray,
                     tolerance: float = CONTACT_SPLIT_TOLERANCE) -> int:
    """Index of the sample nearest the contact point, or len(samples) when the
    demo never comes within tolerance of it.

    Splitting at the closest approach rather than first entry keeps the
    manipulation segment free of the approach's incoming direction, which
    N = 15 basis functions cannot absorb without bending the replayed arc.
    """
    target = np.asarray(contact_point, dtype=float)
    distances = np.array([float(np.linalg.norm(s.position - target)) for s in samples])
    nearest = float(distances.min())
    if nearest > tolerance:
        return len(samples)
    # a demo that dwells at the contact (or starts there) has a plateau of
    # nearest samples; cut at its end so the dwell stays out of the arc model
    plateau = np.flatnonzero(distances <= nearest + 1e-9)
    return int(plateau[-1])


def _max_penetration_index(samples: list[DemoSample], contact_point: np.ndarray,
                           inward: np.ndarray) -> int:
    depths = [float(np.dot(s.position - contact_point, inward)) for s in samples]
    return int(np.argmax(depths))


def _fit_segment(samples: list[DemoSample], config: DmpConfig | None = None):
    if len(samples) < 3:
        raise TeachingError("demonstration segment needs at least 3 samples")
    times = np.array([s.t for s in samples])
    positions = np.stack([s.position for s in samples])
    model = fit_dmp(Trajectory(times=times - times[0], positions=positions), config)
    return model


def _attractor_stub(y0: np.ndarray, goal: np.ndarray, tau: float = 2.0,
                    config: DmpConfig | None = None):
    """Zero-weight model: a plain critically damped reach to the goal.

    Used as the approach segment when the demonstration began at the handle
    (nothing to imitate, but the replay must still carry the arm there from
    wherever it starts)."""
    from .dmp import DmpModel, basis_layout

    config = config or DmpConfig()
    centers, widths = basis_layout(config.n_basis, config.alpha_x)
    cfg = DmpConfig(alpha=config.alpha, beta=config.beta, alpha_x=config.alpha_x,
                    n_basis=config.n_basis, tau=tau, forcing_scale=config.forcing_scale)
    y0 = np.asarray(y0, dtype=float)
    goal = np.asarray(goal, dtype=float)
    return DmpModel(
        config=cfg,
        weights=np.zeros((len(y0), config.n_basis)),
        y0_demo=y0,
        g_demo=goal,
        basis_centers=centers,
        basis_widths=widths,
        degenerate_dims=tuple(range(len(y0))),
    )


def build_skill(
    library: SkillLibrary,
    name: str,
    samples: list[DemoSample],
    family: str = "single",
    grasp_symbol: str | None = None,
    contact_point: np.ndarray | None = None,
    inward: np.ndarray | None = None,
    replaced_motions: tuple[MotionFunction, ...] = (),
    created_from: str = "",
    replace: bool = False,
    config: DmpConfig | None = None,
) -> SkillRecord:
    """Segment, fit, and persist a demonstrated skill per its family.

    contact_point is the grasp location the demo reaches first (the closed
    handle for opens, the open handle for closes); inward is the latch press
    direction for press-pull doors. Refuses demonstrations that are
    stationary in every dimension.
    """
    if family not in SKILL_FAMILIES:
        raise TeachingError(f"unknown skill family {family!r}")
    if len(samples) < 3:
        raise TeachingError("demonstration needs at least 3 samples")
    positions = np.stack([s.position for s in samples])
    if float(np.max(positions.max(axis=0) - positions.min(axis=0))) < 1e-3:
        raise TeachingError("demonstration is stationary in every dimension")

    segments: dict[str, list[DemoSample]] = {}
    stub_models: dict[str, object] = {}
    sequence: list[MotionFunction] = []

    def contact_split() -> int:
        if contact_point is None:
            return 0
        cut = split_at_contact(samples, contact_point)
        return cut if cut <= len(samples) - 3 else 0

    if family == "open_hinged":
        cut = contact_split()
        if cut >= 3:
            segments[name] = samples[: cut + 1]
        else:
            # the demo began at the handle: the approach is a plain reach
            stub_models[name] = _attractor_stub(
                samples[0].position,
                contact_point if contact_point is not None else samples[0].position,
                config=config,
            )
        segments[f"{name}_ex"] = samples[cut:]
        sequence = [MotionFunction("dmp_publish", name),
                    MotionFunction("dmp_publish", f"{name}_ex")]
    elif family == "open_press":
        if contact_point is None or inward is None or grasp_symbol is None:
            raise TeachingError("press-pull skills need contact_point, inward, grasp_symbol")
        cut = contact_split()
        manipulation = samples[cut:]
        deep = _max_penetration_index(manipulation, contact_point, np.asarray(inward))
        if deep < 2 or deep > len(manipulation) - 3:
            raise TeachingError("press-pull demonstration never presses the latch in")
        segments[name] = manipulation[: deep + 1]
        segments[f"{name}_ex"] = manipulation[deep:]
        sequence = [
            MotionFunction("move_to_position", grasp_symbol),
            MotionFunction("dmp_publish", name),
            MotionFunction("dmp_publish", f"{name}_ex"),
        ]
    elif family == "close":
        if grasp_symbol is None:
            raise TeachingError("close skills need the handle symbol to approach")
        cut = contact_split()
        segments[name] = samples[cut:] if cut >= 1 else samples
        sequence = [
            MotionFunction("move_to_position", grasp_symbol),
            MotionFunction("dmp_publish", name),
        ]
    else:
        segments[name] = samples
        sequence = [MotionFunction("dmp_publish", name)]

    models = dict(stub_models)
    for model_name, segment in segments.items():
        models[model_name] = _fit_segment(segment, config)

    return library.commit(
        name,
        models=models,
        sequence=tuple(sequence),
        replaced_motions=replaced_motions,
        created_from=created_from,
        replace=replace,
    )


def teach_kitchen_skills(scene: Scene, library: SkillLibrary, replace: bool = False) -> list[str]:
    """Populate the library with the three appliance skills the basic motions
    cannot perform: open_oven_handle, close_oven, open_cabinet."""
    start = np.asarray(scene.robot.ee, dtype=float)
    taught = []

    oven = scene.by_name("oven")[0]
    build_skill(
        library, "open_oven_handle",
        open_door_demo(scene, "oven", start),
        family="open_hinged",
        contact_point=oven.articulation.handle_at(0.0),
        replaced_motions=(
            MotionFunction("move_to_position", "oven_handle"),
            MotionFunction("gripper_control", "close"),
            MotionFunction("base_cycle_move", "radius_door2axis"),
            MotionFunction("gripper_control", "open"),
        ),
        created_from="scripted:open_oven",
        replace=replace,
    )
    taught.append("open_oven_handle")

    opened = scene.clone()
    oven_open = opened.by_name("oven")[0]
    oven_open.state.door_angle = oven_open.articulation.open_angle
    handle_open = oven_open.handle_position()
    build_skill(
        library, "close_oven",
        close_door_demo(opened, "oven", handle_open + np.array([-0.10, 0.0, 0.05])),
        family="close",
        grasp_symbol="oven_handle",
        contact_point=handle_open,
        replaced_motions=(MotionFunction("close_move", "oven"),),
        created_from="scripted:close_oven",
        replace=replace,
    )
    taught.append("close_oven")

    cabinet = scene.by_name("cabinet")[0]
    build_skill(
        library, "open_cabinet",
        open_door_demo(scene, "cabinet", start),
        family="open_press",
        grasp_symbol="cabinet",
        contact_point=cabinet.articulation.handle_at(0.0),
        inward=-cabinet.articulation.outward_normal(),
        replaced_motions=(
            MotionFunction("move_to_position", "cabinet"),
            MotionFunction("gripper_control", "close"),
            MotionFunction("base_cycle_move", "radius_door2axis"),
            MotionFunction("gripper_control", "open"),
        ),
        created_from="scripted:open_cabinet",
        replace=replace,
    )
    taught.append("open_cabinet")
    return taught
