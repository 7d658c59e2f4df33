"""Synthetic perception: pixel detections to labeled, obstacle-annotated world records.

Detections are back-projected through the depth camera (P_c = d * K^-1 * [u v 1]^T),
carried into the world frame by the camera extrinsics, grouped per class and
labeled name1..nameK left to right along the scene's lateral axis. An
equilateral-triangle test between the robot and a target flags the objects
standing in the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scene import Scene

EDGE_TOLERANCE = 1e-9  # points this close to a triangle edge count as inside
DEGENERATE_SPAN = 1e-6


class PerceptionError(Exception):
    pass


class DegenerateGeometryError(PerceptionError):
    """Robot base and target coincide; the detection triangle is undefined."""


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])


@dataclass(frozen=True)
class PixelDetection:
    name: str
    u: float
    v: float
    depth: float
    bbox: tuple[float, float, float, float]  # u_min, v_min, u_max, v_max
    confidence: float

    def __post_init__(self):
        if self.depth <= 0:
            raise ValueError("depth must be positive")
        u_min, v_min, u_max, v_max = self.bbox
        if not (u_min <= self.u <= u_max and v_min <= self.v <= v_max):
            raise ValueError("bbox must contain the detection point")
        if abs((u_min + u_max) / 2 - self.u) > 1e-6 or abs((v_min + v_max) / 2 - self.v) > 1e-6:
            raise ValueError("(u, v) must be the bbox center")
        if not 0 <= self.confidence <= 1:
            raise ValueError("confidence must lie in [0, 1]")

    def to_record(self) -> dict:
        return {
            "name": self.name, "u": self.u, "v": self.v, "depth": self.depth,
            "bbox": list(self.bbox), "confidence": self.confidence,
        }


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        r = self.rotation
        if r.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must be proper (det +1)")

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, point: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


@dataclass(frozen=True)
class LabeledObject:
    label: str
    name: str
    position_world: np.ndarray
    index_in_class: int

    def __post_init__(self):
        object.__setattr__(self, "position_world", np.asarray(self.position_world, dtype=float))


def backproject(det: PixelDetection, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Camera-frame point d * K^-1 * [u v 1]^T; the z component is the depth exactly."""
    return np.array([
        det.depth * (det.u - intrinsics.cx) / intrinsics.fx,
        det.depth * (det.v - intrinsics.cy) / intrinsics.fy,
        det.depth,
    ])


def project(point_camera: np.ndarray, intrinsics: CameraIntrinsics) -> tuple[float, float, float]:
    """Inverse of backproject: camera-frame point to (u, v, depth)."""
    p = np.asarray(point_camera, dtype=float)
    if p[2] <= 0:
        raise ValueError("point must lie in front of the camera")
    return (
        float(intrinsics.fx * p[0] / p[2] + intrinsics.cx),
        float(intrinsics.fy * p[1] / p[2] + intrinsics.cy),
        float(p[2]),
    )


def to_world(point_camera: np.ndarray, transform: RigidTransform) -> np.ndarray:
    return transform.apply(point_camera)


def sort_and_label(
    detections: list[tuple[str, np.ndarray]],
    lateral: "callable | None" = None,
) -> list[LabeledObject]:
    """Group per class, sort left to right, label name1..nameK.

    `lateral` maps a world position to its left-to-right coordinate; by default
    the world y axis. Classes are emitted in first-appearance order; within a
    class the label index follows the lateral coordinate. Sorting is stable, so
    coincident coordinates keep their input order.
    """
    if lateral is None:
        lateral = lambda p: float(np.asarray(p)[1])
    order: list[str] = []
    groups: dict[str, list[np.ndarray]] = {}
    for name, pos in detections:
        if name not in groups:
            groups[name] = []
            order.append(name)
        groups[name].append(np.asarray(pos, dtype=float))
    labeled = []
    for name in order:
        ranked = sorted(groups[name], key=lateral)
        for k, pos in enumerate(ranked, start=1):
            labeled.append(LabeledObject(
                label=f"{name}{k}", name=name, position_world=pos, index_in_class=k,
            ))
    return labeled


# ---------------------------------------------------------------------------
# Obstacle triangle

def detection_triangle(robot_base: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Equilateral triangle in the ground plane: apex at the robot, opposite
    side centered on the target, side length 2h/sqrt(3) for apex height h."""
    apex = np.asarray(robot_base, dtype=float)[:2]
    mid = np.asarray(target, dtype=float)[:2]
    axis = mid - apex
    h = np.linalg.norm(axis)
    if h <= DEGENERATE_SPAN:
        raise DegenerateGeometryError("target coincides with the robot base")
    u = axis / h
    n = np.array([-u[1], u[0]])
    half_side = h / np.sqrt(3.0)
    return np.array([apex, mid + half_side * n, mid - half_side * n])


def _cross2(a, b) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def points_in_triangle(points: np.ndarray, triangle: np.ndarray,
                       edge_tolerance: float = EDGE_TOLERANCE) -> np.ndarray:
    """Vectorized membership; points within edge_tolerance of an edge count inside."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))[:, :2]
    a, b, c = triangle
    # orient counter-clockwise so all inner signed distances are positive
    if _cross2(b - a, c - a) < 0:
        b, c = c, b
    inside = np.ones(len(pts), dtype=bool)
    for p0, p1 in ((a, b), (b, c), (c, a)):
        edge = p1 - p0
        signed = _cross2(edge, pts - p0) / np.linalg.norm(edge)
        inside &= signed >= -edge_tolerance
    return inside


@dataclass(frozen=True)
class ObstacleReport:
    no_objects: bool
    obstacles: tuple[LabeledObject, ...]
    triangle: np.ndarray | None = None

    def __bool__(self) -> bool:
        return bool(self.obstacles)


def identify_obstacles(
    target: np.ndarray,
    robot_base: np.ndarray,
    workspace: list[LabeledObject],
    target_label: str | None = None,
) -> ObstacleReport:
    """Objects inside the robot-to-target detection triangle, nearest first.

    Returns the no-objects marker when the workspace is empty. The target's
    own record (matched by label, or by coincident position) is never
    reported. Ordering is nearest-to-robot so removal clears the approach
    path progressively.
    """
    if not workspace:
        return ObstacleReport(no_objects=True, obstacles=())
    tri = detection_triangle(robot_base, target)
    base_xy = np.asarray(robot_base, dtype=float)[:2]
    target_xy = np.asarray(target, dtype=float)[:2]
    candidates = []
    for obj in workspace:
        if target_label is not None and obj.label == target_label:
            continue
        xy = obj.position_world[:2]
        if np.linalg.norm(xy - target_xy) <= EDGE_TOLERANCE:
            continue
        if points_in_triangle(xy[None, :], tri)[0]:
            candidates.append((float(np.linalg.norm(xy - base_xy)), obj))
    candidates.sort(key=lambda pair: pair[0])
    return ObstacleReport(
        no_objects=False,
        obstacles=tuple(obj for _, obj in candidates),
        triangle=tri,
    )


# ---------------------------------------------------------------------------
# Synthetic detector

@dataclass
class DetectorConfig:
    """Noise model for the synthetic detector.

    Detected positions are displaced in the ground plane by a vector with a
    uniformly random direction and a magnitude drawn uniformly from
    noise_half_width * [1 - ring_spread, 1 + ring_spread]; each object is
    independently dropped with its class's miss probability per scan. The
    defaults land the median planar discrepancy on the half-width itself,
    within a roughly +-13% band.
    """

    noise_half_width: float = 0.011
    ring_spread: float = 0.13
    miss_probability: float = 0.02
    class_miss_probability: dict[str, float] = field(default_factory=dict)

    def miss_for(self, name: str) -> float:
        return self.class_miss_probability.get(name, self.miss_probability)


def scene_camera(scene: Scene) -> tuple[CameraIntrinsics, RigidTransform]:
    k = scene.camera.intrinsics
    intr = CameraIntrinsics(fx=k["fx"], fy=k["fy"], cx=k["cx"], cy=k["cy"])
    return intr, RigidTransform(scene.camera.rotation, scene.camera.translation)


def detect_scene(
    scene: Scene,
    rng: np.random.Generator,
    config: DetectorConfig | None = None,
) -> list[PixelDetection]:
    """One synthetic scan over the movable objects of the scene.

    Ground-truth centers are displaced per the noise model, then projected
    through the scene camera into pixel detections. Fixed furniture and
    appliances are not reported; their geometry is scene data.
    """
    config = config or DetectorConfig()
    intr, t_c_w = scene_camera(scene)
    w_from_c = t_c_w.inverse()
    detections = []
    for obj in scene.movable_objects():
        if rng.random() < config.miss_for(obj.name):
            continue
        noisy = obj.position.copy()
        if config.noise_half_width > 0:
            theta = rng.uniform(0.0, 2.0 * np.pi)
            lo = config.noise_half_width * (1.0 - config.ring_spread)
            hi = config.noise_half_width * (1.0 + config.ring_spread)
            magnitude = rng.uniform(lo, hi)
            noisy[0] += magnitude * np.cos(theta)
            noisy[1] += magnitude * np.sin(theta)
        p_cam = w_from_c.apply(noisy)
        u, v, depth = project(p_cam, intr)
        half_u = intr.fx * (max(obj.size[0], obj.size[1]) / 2) / depth
        half_v = intr.fy * (obj.size[2] / 2) / depth
        detections.append(PixelDetection(
            name=obj.name,
            u=u, v=v, depth=depth,
            bbox=(u - half_u, v - half_v, u + half_u, v + half_v),
            confidence=float(rng.uniform(0.75, 1.0)),
        ))
    return detections


@dataclass
class PerceivedScene:
    """Labeled, noisy view of the world the planner binds symbols against."""

    scene: Scene
    labeled: list[LabeledObject]

    @property
    def inventory(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for obj in self.labeled:
            counts[obj.name] = max(counts.get(obj.name, 0), obj.index_in_class)
        return counts

    def find(self, label: str) -> LabeledObject | None:
        for obj in self.labeled:
            if obj.label == label:
                return obj
        return None


def perceive(
    scene: Scene,
    rng: np.random.Generator | None = None,
    config: DetectorConfig | None = None,
) -> PerceivedScene:
    """Full pipeline: scan, back-project, transform, sort and label."""
    if rng is None:
        rng = np.random.default_rng(0)
        config = config or DetectorConfig(noise_half_width=0.0, miss_probability=0.0)
    intr, t_c_w = scene_camera(scene)
    named_points = []
    for det in detect_scene(scene, rng, config):
        p_world = to_world(backproject(det, intr), t_c_w)
        named_points.append((det.name, p_world))
    labeled = sort_and_label(named_points, lateral=scene.lateral_coordinate)
    return PerceivedScene(scene=scene, labeled=labeled)


def ground_truth_view(scene: Scene) -> PerceivedScene:
    """Noise-free, miss-free labeling straight from scene geometry."""
    named = [(o.name, o.position.copy()) for o in scene.movable_objects()]
    return PerceivedScene(scene=scene, labeled=sort_and_label(named, lateral=scene.lateral_coordinate))
