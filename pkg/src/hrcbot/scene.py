"""Kitchen world model: objects, articulated doors, camera rig, JSON round trip.

The world is 2.5D: every object is an axis-aligned box (footprint plus height
interval). Articulated objects carry a hinge description from which the
handle's world position follows for any door angle; a press-pull latch blocks
the hinge until it has been pushed inward past its travel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ARTICULATION_KINDS = ("vertical_hinge", "horizontal_hinge", "press_pull")
WALL_THICKNESS = 0.02  # interior cavity inset for containers


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("zero-length direction vector")
    return v / n


def rotate_about_axis(vec: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation of vec about a unit axis."""
    c, s = np.cos(angle), np.sin(angle)
    return vec * c + np.cross(axis, vec) * s + axis * np.dot(axis, vec) * (1 - c)


@dataclass
class Articulation:
    """Hinged-door model.

    axis_position anchors the hinge; handle_direction points from the axis to
    the handle at door_angle 0 and radius_door2axis is that distance. swing
    (+1/-1) sets the opening sense about axis_direction (right-hand rule).
    press_pull doors additionally need an inward push of latch_travel meters
    before the hinge unlocks.
    """

    kind: str
    axis_position: np.ndarray
    radius_door2axis: float
    open_angle: float
    handle_direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    axis_direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    swing: float = 1.0
    latch_travel: float = 0.0

    def __post_init__(self):
        if self.kind not in ARTICULATION_KINDS:
            raise ValueError(f"unknown articulation kind {self.kind!r}")
        self.axis_position = np.asarray(self.axis_position, dtype=float)
        self.handle_direction = _unit(self.handle_direction)
        self.axis_direction = _unit(self.axis_direction)
        if self.radius_door2axis <= 0:
            raise ValueError("radius_door2axis must be positive")
        if not 0 < self.open_angle <= np.pi:
            raise ValueError("open_angle must lie in (0, pi]")
        if self.kind == "press_pull" and self.latch_travel <= 0:
            raise ValueError("press_pull articulation needs latch_travel > 0")
        # Rodrigues terms for the handle arm, fixed per hinge (handle_at and
        # project_angle run every contact step)
        arm = self.handle_direction * self.radius_door2axis
        self._arm = arm
        self._arm_cross = np.cross(self.axis_direction, arm)
        self._arm_axial = self.axis_direction * float(np.dot(self.axis_direction, arm))
        self._e2 = self.swing * np.cross(self.axis_direction, self.handle_direction)

    def handle_at(self, angle: float) -> np.ndarray:
        c = math.cos(self.swing * angle)
        s = math.sin(self.swing * angle)
        return self.axis_position + self._arm * c + self._arm_cross * s + self._arm_axial * (1.0 - c)

    def outward_normal(self) -> np.ndarray:
        """Direction the handle moves when the door starts opening."""
        return _unit(self._e2)

    def project_angle(self, point: np.ndarray) -> tuple[float, float]:
        """Door angle whose handle is nearest to `point`, and that distance.

        The angle is clamped to [0, open_angle]; the distance includes any
        offset out of the hinge plane.
        """
        v = np.asarray(point, dtype=float) - self.axis_position
        raw = math.atan2(float(np.dot(v, self._e2)), float(np.dot(v, self.handle_direction)))
        angle = min(max(raw, 0.0), self.open_angle)
        return angle, float(np.linalg.norm(point - self.handle_at(angle)))


@dataclass
class ObjectState:
    door_angle: float = 0.0
    latched: bool = False
    powered: bool = False


@dataclass
class WorldObject:
    id: str
    name: str
    position: np.ndarray
    size: np.ndarray
    articulation: Articulation | None = None
    state: ObjectState = field(default_factory=ObjectState)
    fixed: bool = False

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.size = np.asarray(self.size, dtype=float)
        if not np.all(self.size > 0):
            raise ValueError(f"object {self.id}: size must be positive")
        if self.articulation is not None:
            if not 0 <= self.state.door_angle <= self.articulation.open_angle:
                raise ValueError(f"object {self.id}: door_angle outside articulation limits")

    @property
    def movable(self) -> bool:
        return not self.fixed and self.articulation is None

    def footprint_contains(self, point, margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        half = self.size[:2] / 2 + margin
        return bool(np.all(np.abs(p[:2] - self.position[:2]) <= half))

    def cavity_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Interior AABB of a container (walls inset, open at the access face)."""
        half = self.size / 2 - WALL_THICKNESS
        half = np.maximum(half, 0.005)
        return self.position - half, self.position + half

    def contains_point(self, point) -> bool:
        lo, hi = self.cavity_bounds()
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= lo - 1e-9) and np.all(p <= hi + 1e-9))

    def handle_position(self) -> np.ndarray:
        if self.articulation is None:
            raise ValueError(f"object {self.id} has no articulation")
        return self.articulation.handle_at(self.state.door_angle)


@dataclass
class RobotSpec:
    base: tuple[float, float, float] = (-0.85, 0.0, 0.0)  # x, y, heading
    ee: tuple[float, float, float] = (-0.55, 0.0, 0.95)
    reach_radius: float = 0.9
    lift_range: tuple[float, float] = (0.05, 1.5)
    grasp_radius: float = 0.03


@dataclass
class CameraRig:
    intrinsics: dict          # fx, fy, cx, cy
    rotation: np.ndarray      # camera-to-world rotation
    translation: np.ndarray   # camera origin in world

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float)


@dataclass
class Scene:
    lateral_axis: str
    camera: CameraRig
    objects: list[WorldObject]
    robot: RobotSpec = field(default_factory=RobotSpec)

    def __post_init__(self):
        if self.lateral_axis not in ("+x", "-x", "+y", "-y"):
            raise ValueError("lateral_axis must be one of +x, -x, +y, -y")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")

    def by_id(self, object_id: str) -> WorldObject:
        index = getattr(self, "_id_index", None)
        if index is None or len(index) != len(self.objects):
            index = {o.id: o for o in self.objects}
            object.__setattr__(self, "_id_index", index)
        try:
            return index[object_id]
        except KeyError:
            raise KeyError(object_id) from None

    def by_name(self, name: str) -> list[WorldObject]:
        return [o for o in self.objects if o.name == name]

    def movable_objects(self) -> list[WorldObject]:
        return [o for o in self.objects if o.movable]

    def lateral_coordinate(self, point) -> float:
        p = np.asarray(point, dtype=float)
        axis = {"x": 0, "y": 1}[self.lateral_axis[1]]
        sign = -1.0 if self.lateral_axis[0] == "-" else 1.0
        return float(sign * p[axis])

    def clone(self) -> "Scene":
        return scene_from_dict(scene_to_dict(self))


# ---------------------------------------------------------------------------
# JSON round trip

def _articulation_to_dict(a: Articulation) -> dict:
    d = {
        "kind": a.kind,
        "axis_position": a.axis_position.tolist(),
        "radius_door2axis": a.radius_door2axis,
        "open_angle": a.open_angle,
        "handle_direction": a.handle_direction.tolist(),
        "axis_direction": a.axis_direction.tolist(),
        "swing": a.swing,
    }
    if a.kind == "press_pull":
        d["latch_travel"] = a.latch_travel
    return d


def scene_to_dict(scene: Scene) -> dict:
    objects = []
    for o in scene.objects:
        entry: dict = {
            "name": o.name,
            "position": o.position.tolist(),
            "size": o.size.tolist(),
        }
        if o.fixed:
            entry["fixed"] = True
        if o.articulation is not None:
            entry["articulation"] = _articulation_to_dict(o.articulation)
        if o.articulation is not None or o.state != ObjectState():
            entry["state"] = {
                "door_angle": o.state.door_angle,
                "latched": o.state.latched,
                "powered": o.state.powered,
            }
        objects.append(entry)
    return {
        "lateral_axis": scene.lateral_axis,
        "camera": {
            "intrinsics": dict(scene.camera.intrinsics),
            "extrinsics_T_c_w": {
                "rotation": scene.camera.rotation.tolist(),
                "translation": scene.camera.translation.tolist(),
            },
        },
        "objects": objects,
        "robot": {
            "base": list(scene.robot.base),
            "ee": list(scene.robot.ee),
            "reach_radius": scene.robot.reach_radius,
            "lift_range": list(scene.robot.lift_range),
            "grasp_radius": scene.robot.grasp_radius,
        },
    }


def scene_from_dict(data: dict) -> Scene:
    cam = data["camera"]
    rig = CameraRig(
        intrinsics=dict(cam["intrinsics"]),
        rotation=cam["extrinsics_T_c_w"]["rotation"],
        translation=cam["extrinsics_T_c_w"]["translation"],
    )
    counters: dict[str, int] = {}
    objects = []
    for entry in data["objects"]:
        name = entry["name"]
        counters[name] = counters.get(name, 0) + 1
        art = None
        if "articulation" in entry and entry["articulation"] is not None:
            a = entry["articulation"]
            art = Articulation(
                kind=a["kind"],
                axis_position=a["axis_position"],
                radius_door2axis=a["radius_door2axis"],
                open_angle=a["open_angle"],
                handle_direction=a.get("handle_direction", [0.0, 1.0, 0.0]),
                axis_direction=a.get("axis_direction", [0.0, 0.0, 1.0]),
                swing=a.get("swing", 1.0),
                latch_travel=a.get("latch_travel", 0.0),
            )
        st = entry.get("state", {})
        state = ObjectState(
            door_angle=st.get("door_angle", 0.0),
            latched=st.get("latched", art is not None and art.kind == "press_pull"),
            powered=st.get("powered", False),
        )
        objects.append(WorldObject(
            id=f"{name}{counters[name]}",
            name=name,
            position=entry["position"],
            size=entry["size"],
            articulation=art,
            state=state,
            fixed=entry.get("fixed", False),
        ))
    robot = RobotSpec()
    if "robot" in data:
        r = data["robot"]
        robot = RobotSpec(
            base=tuple(r.get("base", robot.base)),
            ee=tuple(r.get("ee", robot.ee)),
            reach_radius=r.get("reach_radius", robot.reach_radius),
            lift_range=tuple(r.get("lift_range", robot.lift_range)),
            grasp_radius=r.get("grasp_radius", robot.grasp_radius),
        )
    return Scene(
        lateral_axis=data.get("lateral_axis", "+y"),
        camera=rig,
        objects=objects,
        robot=robot,
    )


def load_scene(path: Path | str) -> Scene:
    return scene_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_scene(scene: Scene, path: Path | str) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# Built-in kitchen

def build_kitchen_scene() -> Scene:
    """The default benchtop kitchen: table-top objects, three appliances, storage.

    Lateral axis is +y (the robot at -x looks along +x, so +y runs left to
    right in its view). The camera hangs 2.2 m up looking straight down.
    """
    top = 0.74  # table surface height
    rig = CameraRig(
        intrinsics={"fx": 525.0, "fy": 525.0, "cx": 319.5, "cy": 239.5},
        rotation=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]),
        translation=np.array([0.0, 0.0, 2.2]),
    )

    def box(name, pos, size, **kw):
        return {"name": name, "position": list(pos), "size": list(size), **kw}

    objects = [
        box("table", (0.25, 0.0, top / 2), (0.9, 2.4, top), fixed=True),
        box("apple", (0.10, -0.35, top + 0.0315), (0.07, 0.07, 0.063)),
        box("plate", (0.10, 0.10, top + 0.01), (0.22, 0.22, 0.02)),
        box("cup", (0.10, 0.45, top + 0.05), (0.08, 0.08, 0.10)),
        box("bottle", (0.20, 0.30, top + 0.11), (0.07, 0.07, 0.22)),
        box("bottle", (0.20, 0.62, top + 0.11), (0.07, 0.07, 0.22)),
        box("storage", (0.55, 0.95, top + 0.09), (0.35, 0.35, 0.18), fixed=True),
        box(
            "microwave", (0.55, -0.55, top + 0.16), (0.50, 0.42, 0.32), fixed=True,
            articulation={
                "kind": "vertical_hinge",
                "axis_position": [0.30, -0.76, top + 0.16],
                "radius_door2axis": 0.38,
                "open_angle": float(np.pi / 2),
                "handle_direction": [0.0, 1.0, 0.0],
                "axis_direction": [0.0, 0.0, 1.0],
                "swing": 1.0,
            },
        ),
        box("microwave_knob", (0.30, -0.36, top + 0.06), (0.03, 0.03, 0.03), fixed=True),
        box(
            "oven", (0.55, 0.55, top + 0.16), (0.50, 0.42, 0.32), fixed=True,
            articulation={
                "kind": "horizontal_hinge",
                "axis_position": [0.30, 0.595, top + 0.02],
                "radius_door2axis": 0.26,
                "open_angle": float(np.pi / 2),
                "handle_direction": [0.0, 0.0, 1.0],
                "axis_direction": [0.0, 1.0, 0.0],
                "swing": -1.0,
            },
        ),
        box("oven_knob", (0.30, 0.385, top + 0.06), (0.03, 0.03, 0.03), fixed=True),
        box(
            "cabinet", (0.55, 0.0, 1.25), (0.40, 0.45, 0.50), fixed=True,
            articulation={
                "kind": "press_pull",
                "axis_position": [0.35, -0.225, 1.25],
                "radius_door2axis": 0.41,
                "open_angle": float(np.pi / 2),
                "handle_direction": [0.0, 1.0, 0.0],
                "axis_direction": [0.0, 0.0, 1.0],
                "swing": 1.0,
                "latch_travel": 0.012,
            },
        ),
    ]
    return scene_from_dict({
        "lateral_axis": "+y",
        "camera": {
            "intrinsics": rig.intrinsics,
            "extrinsics_T_c_w": {
                "rotation": rig.rotation.tolist(),
                "translation": rig.translation.tolist(),
            },
        },
        "objects": objects,
        "robot": {
            "base": [-0.85, 0.0, 0.0],
            "ee": [-0.55, 0.0, 0.95],
            "reach_radius": 0.9,
            "lift_range": [0.05, 1.5],
            "grasp_radius": 0.03,
        },
    })


_BUILTIN_SCENES = {"kitchen": build_kitchen_scene}


def resolve_scene(spec: str | Path) -> Scene:
    """Load a scene from a path, or by built-in name (e.g. "kitchen")."""
    if isinstance(spec, str) and spec in _BUILTIN_SCENES:
        return _BUILTIN_SCENES[spec]()
    return load_scene(spec)
