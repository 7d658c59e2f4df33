"""Dynamic movement primitives: learn a demonstrated trajectory, replay it to new endpoints.

A skill is a second-order attractor pulled toward a goal, modulated by a
phase-dependent forcing term built from Gaussian basis functions:

    y_dd = alpha * (beta * (g - y) - y_d) + f(x) * (g - y)
    f(x) = sum_i(psi_i(x) * w_i * x) / sum_i(psi_i(x))

The phase x decays from 1 toward 0 under x_d = -(alpha_x / tau) * x, so the
forcing fades out and the attractor guarantees convergence to the goal.
Each dimension of a demonstration gets its own weight vector; all dimensions
share one phase so they stay synchronized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

EPSILON_GOAL = 1e-6       # below this start-to-goal span a dimension is degenerate
EPSILON_REGRESSION = 1e-4  # samples closer than this to the goal are dropped from the fit
EPSILON_PSI = 1e-12       # forcing denominator guard; below it f(x) is defined as 0
# |f_target| is clipped at this multiple of alpha*beta. The inversion divides by
# (g - y), which vanishes as a demo settles; unclipped, the resulting weights make
# the effective stiffness hugely negative near the goal and the replay misses its
# endpoint tolerance.
F_TARGET_LIMIT = 2.0

FORCING_SCALES = ("g_minus_y", "g_minus_y0")


class DmpError(Exception):
    """Base error for fitting and rollout failures."""


class IntegrationDivergenceError(DmpError):
    def __init__(self, step: int, dim: int):
        super().__init__(f"rollout diverged to a non-finite state at step {step}, dim {dim}")
        self.step = step
        self.dim = dim


@dataclass(frozen=True)
class Trajectory:
    """Timestamped positions, one row per sample.

    times must be strictly increasing with at least 3 samples; positions is
    (n_samples, n_dims) with 1..7 dimensions.
    """

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "positions", positions)
        if times.ndim != 1 or len(times) < 3:
            raise ValueError("trajectory needs at least 3 timestamped samples")
        if positions.shape[0] != len(times):
            raise ValueError("times and positions disagree on sample count")
        if not 1 <= positions.shape[1] <= 7:
            raise ValueError("trajectory dimension must be in 1..7")
        if not np.all(np.diff(times) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(positions))):
            raise ValueError("trajectory contains non-finite values")

    @property
    def dims(self) -> int:
        return self.positions.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class DmpConfig:
    """Gains and discretization for one skill.

    alpha/beta are the attractor gains (beta = alpha/4 is critically damped),
    alpha_x the phase decay rate, n_basis the Gaussian count, tau the nominal
    duration in seconds. forcing_scale selects what multiplies f(x) in the
    acceleration: the instantaneous goal offset ("g_minus_y") or the fixed
    start-to-goal span ("g_minus_y0").
    """

    alpha: float = 25.0
    beta: float = 6.25
    alpha_x: float = 4.6
    n_basis: int = 15
    tau: float = 1.0
    forcing_scale: str = "g_minus_y"

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.alpha_x <= 0:
            raise ValueError("gains alpha, beta, alpha_x must be positive")
        if self.n_basis < 2:
            raise ValueError("need at least 2 basis functions")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.forcing_scale not in FORCING_SCALES:
            raise ValueError(f"forcing_scale must be one of {FORCING_SCALES}")


@dataclass(frozen=True)
class DmpModel:
    config: DmpConfig
    weights: np.ndarray        # (dims, n_basis)
    y0_demo: np.ndarray        # (dims,)
    g_demo: np.ndarray         # (dims,)
    basis_centers: np.ndarray  # (n_basis,) strictly decreasing in phase
    basis_widths: np.ndarray   # (n_basis,) positive
    degenerate_dims: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("weights", "y0_demo", "g_demo", "basis_centers", "basis_widths"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("model weights must be finite")
        if not np.all(np.diff(self.basis_centers) < 0):
            raise ValueError("basis centers must strictly decrease in phase")
        if not np.all(self.basis_widths > 0):
            raise ValueError("basis widths must be positive")

    @property
    def dims(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class DmpState:
    y: np.ndarray
    yd: np.ndarray
    x: float

    def __post_init__(self):
        if not 0 < self.x <= 1:
            raise ValueError("phase must lie in (0, 1]")


def basis_layout(n_basis: int, alpha_x: float) -> tuple[np.ndarray, np.ndarray]:
    """Centers at the phase values of equally spaced times, widths ~ n^1.5 / c^2.

    This places the Gaussians densely where the phase moves slowly (late in the
    motion) and keeps neighbouring activations overlapping.
    """
    idx = np.arange(n_basis)
    centers = np.exp(-alpha_x * idx / (n_basis - 1))
    widths = n_basis ** 1.5 / centers ** 2
    return centers, widths


def phase_at(t, tau: float, alpha_x: float):
    """Phase x(t) = exp(-alpha_x * t / tau), the exact solution of the decay."""
    return np.exp(-alpha_x * np.asarray(t, dtype=float) / tau)


def basis_activation(x: float, model: DmpModel) -> np.ndarray:
    """Gaussian activations psi_i(x) = exp(-h_i (x - c_i)^2).

    Each lies in (0, 1] and equals 1 exactly at its own center; the narrowest
    Gaussians underflow to 0.0 in float64 far from their center.
    """
    if not 0 < x <= 1:
        raise ValueError("phase must lie in (0, 1]")
    return np.exp(-model.basis_widths * (x - model.basis_centers) ** 2)


def forcing_term(x: float, model: DmpModel, dim: int) -> float:
    """Normalized weighted basis sum times x for one dimension.

    Returns 0 when the activation mass falls below EPSILON_PSI (phases beyond
    the last center), so replay degrades to the plain attractor there.
    """
    psi = basis_activation(x, model)
    denom = psi.sum()
    if denom < EPSILON_PSI:
        return 0.0
    return float((psi * model.weights[dim]).sum() / denom * x)


def _forcing_all_dims(x: float, model: DmpModel) -> np.ndarray:
    psi = np.exp(-model.basis_widths * (x - model.basis_centers) ** 2)
    denom = psi.sum()
    if denom < EPSILON_PSI:
        return np.zeros(model.dims)
    return model.weights @ psi / denom * x


def fit_dmp(demo: Trajectory, config: DmpConfig | None = None) -> DmpModel:
    """Learn per-dimension weights from a demonstration by weighted least squares.

    Inverts the attractor equation for the forcing each sample implies, then
    solves w_i = sum(psi_i x f_t) / sum(psi_i x^2) per basis. Samples within
    EPSILON_REGRESSION of the goal are dropped (the inversion divides by g - y)
    and dimensions whose total span is below EPSILON_GOAL get zero weights and
    a degenerate flag. The returned config carries tau = demo duration.
    """
    config = config or DmpConfig()
    config = DmpConfig(
        alpha=config.alpha, beta=config.beta, alpha_x=config.alpha_x,
        n_basis=config.n_basis, tau=demo.duration, forcing_scale=config.forcing_scale,
    )
    centers, widths = basis_layout(config.n_basis, config.alpha_x)
    t = demo.times - demo.times[0]
    x = phase_at(t, config.tau, config.alpha_x)
    psi_all = np.exp(-widths[None, :] * (x[:, None] - centers[None, :]) ** 2)

    y = demo.positions
    y0 = y[0].copy()
    g = y[-1].copy()
    yd = np.gradient(y, demo.times, axis=0)
    ydd = np.gradient(yd, demo.times, axis=0)

    weights = np.zeros((demo.dims, config.n_basis))
    degenerate: list[int] = []
    clip = F_TARGET_LIMIT * config.alpha * config.beta
    for d in range(demo.dims):
        if abs(g[d] - y0[d]) < EPSILON_GOAL:
            degenerate.append(d)
            continue
        residual = ydd[:, d] - config.alpha * (config.beta * (g[d] - y[:, d]) - yd[:, d])
        if config.forcing_scale == "g_minus_y":
            divisor = g[d] - y[:, d]
            keep = np.abs(divisor) >= EPSILON_REGRESSION
        else:
            divisor = np.full(len(t), g[d] - y0[d])
            keep = np.ones(len(t), dtype=bool)
        f_target = np.clip(residual[keep] / divisor[keep], -clip, clip)
        xk = x[keep]
        psi = psi_all[keep]
        num = psi.T @ (xk * f_target)
        den = psi.T @ (xk ** 2)
        valid = den > EPSILON_PSI
        weights[d, valid] = num[valid] / den[valid]

    return DmpModel(
        config=config,
        weights=weights,
        y0_demo=y0,
        g_demo=g,
        basis_centers=centers,
        basis_widths=widths,
        degenerate_dims=tuple(degenerate),
    )


def rollout(
    model: DmpModel,
    y0: np.ndarray,
    g: np.ndarray,
    duration: float,
    dt: float,
) -> Trajectory:
    """Integrate the attractor from y0 toward g over `duration` seconds.

    Semi-implicit Euler on (y, y_d) with the phase evaluated in closed form at
    each step time; tau is taken as the rollout duration so the learned shape
    stretches with it. Convergence to within max(1% of span, 1 mm) needs the
    attractor time alpha*duration/2 >> 1; with default gains that means
    durations of roughly 0.4 s and up.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if duration < dt:
        raise ValueError("duration must be at least one step")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if y0.shape != (model.dims,) or g.shape != (model.dims,):
        raise ValueError(f"y0 and g must have {model.dims} dimensions")

    cfg = model.config
    n_steps = int(round(duration / dt))
    times = np.arange(n_steps + 1) * dt
    out = np.empty((n_steps + 1, model.dims))
    out[0] = y0
    y = y0.copy()
    yd = np.zeros(model.dims)
    span = g - y0
    with np.errstate(over="ignore", invalid="ignore"):  # divergence caught below
        for k in range(n_steps):
            x = float(np.exp(-cfg.alpha_x * (k * dt) / duration))
            f = _forcing_all_dims(x, model)
            scale = (g - y) if cfg.forcing_scale == "g_minus_y" else span
            ydd = cfg.alpha * (cfg.beta * (g - y) - yd) + f * scale
            yd = yd + dt * ydd
            y = y + dt * yd
            if not np.all(np.isfinite(y)):
                bad = int(np.flatnonzero(~np.isfinite(y))[0])
                raise IntegrationDivergenceError(step=k + 1, dim=bad)
            out[k + 1] = y
    return Trajectory(times=times, positions=out)


# ---------------------------------------------------------------------------
# Persistence: one UTF-8 JSON document per skill, <name>.dmp.json

def model_to_document(name: str, model: DmpModel, created_at: str | None = None) -> dict:
    return {
        "name": name,
        "created_at": created_at or datetime.now(timezone.utc).isoformat(),
        "config": {
            "alpha": model.config.alpha,
            "beta": model.config.beta,
            "alpha_x": model.config.alpha_x,
            "n_basis": model.config.n_basis,
            "tau": model.config.tau,
        },
        "dims": model.dims,
        "weights": model.weights.tolist(),
        "y0_demo": model.y0_demo.tolist(),
        "g_demo": model.g_demo.tolist(),
        "basis_centers": model.basis_centers.tolist(),
        "basis_widths": model.basis_widths.tolist(),
        "degenerate_dims": list(model.degenerate_dims),
    }


def model_from_document(doc: dict) -> DmpModel:
    cfg = DmpConfig(
        alpha=doc["config"]["alpha"],
        beta=doc["config"]["beta"],
        alpha_x=doc["config"]["alpha_x"],
        n_basis=doc["config"]["n_basis"],
        tau=doc["config"]["tau"],
    )
    return DmpModel(
        config=cfg,
        weights=np.asarray(doc["weights"], dtype=float),
        y0_demo=np.asarray(doc["y0_demo"], dtype=float),
        g_demo=np.asarray(doc["g_demo"], dtype=float),
        basis_centers=np.asarray(doc["basis_centers"], dtype=float),
        basis_widths=np.asarray(doc["basis_widths"], dtype=float),
        degenerate_dims=tuple(doc.get("degenerate_dims", [])),
    )


def save_model(name: str, model: DmpModel, directory: Path | str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.dmp.json"
    path.write_text(json.dumps(model_to_document(name, model), indent=2), encoding="utf-8")
    return path


def load_model(path: Path | str) -> tuple[str, DmpModel]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return doc["name"], model_from_document(doc)
