"""Fixed-step time integration of the swarm ODE."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .coupling import CouplingMatrix
from .dynamics import SwarmState, pairwise_terms, positions_of
from .errors import DivergenceError, InvalidInputError
from .kernel import EPS_POS, JIT_GAUSSIAN

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12
METHODS = ("rk4", "euler")


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 1e-3
    t_end: float = 30.0
    record_stride: int = 10
    method: str = "rk4"

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end >= self.dt:
            raise InvalidInputError(f"t_end must be at least dt, got {self.t_end!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidInputError(f"record_stride must be a positive integer, got {self.record_stride!r}")
        n = round(self.t_end / self.dt)
        if abs(n * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise InvalidInputError(f"t_end = {self.t_end!r} is not a whole number of steps of {self.dt!r}")
        if self.method not in METHODS:
            raise InvalidInputError(f"method must be one of {METHODS}, got {self.method!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def record_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.record_stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps


@dataclass(eq=False)
class Trajectory:
    """Recorded samples ``positions[k]`` at ``times[k]`` plus derived series."""

    times: np.ndarray
    positions: np.ndarray
    n_clamped: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[0] != self.times.shape[0]:
            raise InvalidInputError("positions must be (samples, N, n) and match times")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("sample times must be strictly increasing")
        self.center = self.positions.mean(axis=1)
        e = self.positions - self.center[:, None, :]
        self.dispersion = np.einsum("kij,kij->k", e, e)
        self.V = 0.5 * self.dispersion

    def __len__(self):
        return self.times.shape[0]

    @property
    def n_agents(self):
        return self.positions.shape[1]

    @property
    def dim(self):
        return self.positions.shape[2]

    @property
    def t_end(self):
        return float(self.times[-1])

    def state(self, k) -> SwarmState:
        return SwarmState(self.positions[k], float(self.times[k]))

    @property
    def final(self) -> SwarmState:
        return self.state(-1)


def rk4_step(f, y, t, h):
    """One classical Runge-Kutta step for ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f, y, t, h):
    return y + h * f(t, y)


@njit(cache=True)
def _velocities(x, w, kind, p0, p1, p2, eps, out):
    n_agents, dim = x.shape
    clamped = 0
    for i in range(n_agents):
        for k in range(dim):
            out[i, k] = 0.0
        for j in range(n_agents):
            wij = w[i, j]
            if wij == 0.0:
                continue
            r2 = 0.0
            for k in range(dim):
                d = x[i, k] - x[j, k]
                r2 += d * d
            if kind == JIT_GAUSSIAN:
                g = p0 - p1 * math.exp(-r2 / p2)
            else:
                r = math.sqrt(r2)
                if r < eps:
                    r = eps
                    clamped += 1
                g = p0 - p1 / r
            for k in range(dim):
                out[i, k] -= wij * g * (x[i, k] - x[j, k])
    return clamped


@njit(cache=True)
def _run(x0, w, kind, p0, p1, p2, eps, dt, n_steps, stride, use_euler, limit, records):
    x = x0.copy()
    k1 = np.empty_like(x)
    k2 = np.empty_like(x)
    k3 = np.empty_like(x)
    k4 = np.empty_like(x)
    tmp = np.empty_like(x)
    clamped = 0
    records[0] = x
    rec = 1
    for s in range(1, n_steps + 1):
        clamped += _velocities(x, w, kind, p0, p1, p2, eps, k1)
        if use_euler:
            x += dt * k1
        else:
            tmp[:] = x + 0.5 * dt * k1
            clamped += _velocities(tmp, w, kind, p0, p1, p2, eps, k2)
            tmp[:] = x + 0.5 * dt * k2
            clamped += _velocities(tmp, w, kind, p0, p1, p2, eps, k3)
            tmp[:] = x + dt * k3
            clamped += _velocities(tmp, w, kind, p0, p1, p2, eps, k4)
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for i in range(x.shape[0]):
            for k in range(x.shape[1]):
                if not (abs(x[i, k]) <= limit):
                    return rec, s, clamped
        if s % stride == 0 or s == n_steps:
            records[rec] = x
            rec += 1
    return rec, -1, clamped


def _integrate_numpy(x0, w, kernel, config, steps_to_record):
    step = rk4_step if config.method == "rk4" else euler_step
    clamped = [0]

    def f(t, y):
        K, n_close = pairwise_terms(y, w, kernel)
        clamped[0] += n_close
        return K @ y - K.sum(axis=1)[:, None] * y

    records = np.empty((len(steps_to_record),) + x0.shape)
    records[0] = x0
    rec = 1
    x = x0.copy()
    recorded = set(steps_to_record.tolist())
    for s in range(1, config.n_steps + 1):
        x = step(f, x, (s - 1) * config.dt, config.dt)
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            return records, rec, s, clamped[0]
        if s in recorded:
            records[rec] = x
            rec += 1
    return records, rec, -1, clamped[0]


def integrate(initial, W, kernel, config: IntegrationConfig = IntegrationConfig(), backend="auto") -> Trajectory:
    """Integrate from ``initial`` over ``[t0, t0 + t_end]`` with a fixed step.

    ``backend`` is ``"jit"``, ``"numpy"`` or ``"auto"``; the compiled loop is
    used when the kernel has a closed form it understands.  Raises
    :class:`DivergenceError` if a coordinate becomes non-finite or exceeds
    1e12 in magnitude.
    """
    x0 = np.ascontiguousarray(positions_of(initial), dtype=float)
    t0 = initial.time if isinstance(initial, SwarmState) else 0.0
    if not np.all(np.isfinite(x0)):
        raise InvalidInputError("initial positions contain non-finite values")
    w = np.ascontiguousarray(W.weights if isinstance(W, CouplingMatrix) else np.asarray(W, dtype=float))
    if w.shape != (x0.shape[0], x0.shape[0]):
        raise InvalidInputError(f"coupling matrix shape {w.shape} does not match {x0.shape[0]} agents")
    if x0.shape[0] > 1 and SwarmState(x0).coincident_pairs():
        log.warning("initial state has coincident agents")

    steps = config.record_steps()
    jit_spec = getattr(kernel, "jit_spec", None)
    if backend == "jit" and jit_spec is None:
        raise InvalidInputError(f"kernel {kernel!r} has no compiled form")
    if backend not in ("auto", "jit", "numpy"):
        raise InvalidInputError(f"unknown backend {backend!r}")

    if jit_spec is not None and backend != "numpy":
        kind, (p0, p1, p2) = jit_spec
        records = np.empty((len(steps),) + x0.shape)
        rec, fail, clamped = _run(
            x0, w, kind, p0, p1, p2, EPS_POS, config.dt, config.n_steps,
            int(config.record_stride), config.method == "euler", DIVERGENCE_LIMIT, records,
        )
    else:
        records, rec, fail, clamped = _integrate_numpy(x0, w, kernel, config, steps)

    if fail >= 0:
        t_fail = t0 + fail * config.dt
        raise DivergenceError(f"state diverged at t = {t_fail:.6g}", time=t_fail)
    return Trajectory(times=t0 + steps * config.dt, positions=records[:rec], n_clamped=int(clamped))


def observed_order(solve, dts) -> float:
    """Self-convergence order from three step sizes with a common ratio.

    ``solve(dt)`` returns the numerical solution at a fixed final time.
    """
    h1, h2, h3 = dts[-3:]
    y1, y2, y3 = (np.asarray(solve(h)) for h in (h1, h2, h3))
    return math.log(np.linalg.norm(y1 - y2) / np.linalg.norm(y2 - y3)) / math.log(h1 / h2)


def convergence_order_check(problem, dt_list=(1e-2, 5e-3, 2.5e-3)) -> float:
    return observed_order(problem, list(dt_list))


def two_agent_problem(kernel, separation, t_end=1.0, weight=1.0, method="rk4", backend="auto"):
    """Return ``solve(dt)`` giving the final positions of a symmetric agent pair."""
    W = CouplingMatrix([[0.0, weight], [weight, 0.0]])
    x0 = np.array([[0.0, 0.0], [separation, 0.0]])

    def solve(dt):
        cfg = IntegrationConfig(dt=dt, t_end=t_end, record_stride=max(1, int(round(t_end / dt))), method=method)
        return integrate(x0, W, kernel, cfg, backend=backend).positions[-1]

    return solve
