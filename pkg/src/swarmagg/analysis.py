"""Cohesion bounds and containment checks on recorded trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .coupling import laplacian, lambda2, total_weight
from .errors import PreconditionError
from .kernel import GaussianKernel, GeneralKernel, validate_assumptions

# Slack on rho^2 for floating-point accumulation in the dispersion series.
CONTAINMENT_RTOL = 1e-9


class CohesionBound(NamedTuple):
    rho: float
    threshold_V: float
    lambda2: float
    M: float


def _spectral_inputs(W):
    return lambda2(laplacian(W)), total_weight(W)


def rho_theorem1(kernel: GaussianKernel, W) -> CohesionBound:
    """Ultimate dispersion radius for the Gaussian kernel.

    rho = 2 b M sqrt(2c) e^{-1/2} / (a lambda2); V decreases whenever it
    exceeds threshold_V = (2 b M sqrt(c) e^{-1/2} / (a lambda2))^2 = rho^2 / 2.
    """
    if not isinstance(kernel, GaussianKernel):
        raise PreconditionError("rho_theorem1 needs a GaussianKernel")
    lam2, M = _spectral_inputs(W)
    a, b, c = kernel.a, kernel.b, kernel.c
    rho = 2.0 * b * M * math.sqrt(2.0 * c) * math.exp(-0.5) / (a * lam2)
    threshold = (2.0 * b * M * math.sqrt(c) * math.exp(-0.5) / (a * lam2)) ** 2
    return CohesionBound(rho, threshold, lam2, M)


def rho_theorem2(kernel: GeneralKernel, W) -> CohesionBound:
    """Ultimate dispersion radius 4 b M / (a lambda2) for bounded-repulsion kernels."""
    if isinstance(kernel, GaussianKernel):
        kernel = kernel.as_general()
    ok, worst = validate_assumptions(kernel)
    if not ok:
        raise PreconditionError(
            f"kernel {kernel.name!r} violates constant attraction / r*fr(r) <= b (max r*fr = {worst!r}, b = {kernel.b!r})"
        )
    lam2, M = _spectral_inputs(W)
    rho = 4.0 * kernel.b * M / (kernel.a * lam2)
    return CohesionBound(rho, 0.5 * rho * rho, lam2, M)


def cohesion_bound(kernel, W) -> CohesionBound:
    if isinstance(kernel, GaussianKernel):
        return rho_theorem1(kernel, W)
    return rho_theorem2(kernel, W)


@dataclass(frozen=True)
class BoundReport:
    rho: float
    rho_sq: float
    t_hold: float
    entry_time: Optional[float]
    contained: bool
    max_dispersion_after_entry: Optional[float]
    lambda2: Optional[float] = None
    M: Optional[float] = None
    threshold_V: Optional[float] = None

    @property
    def max_dispersion_ratio(self) -> Optional[float]:
        if self.max_dispersion_after_entry is None:
            return None
        return self.max_dispersion_after_entry / self.rho_sq

    def as_dict(self):
        d = asdict(self)
        d["max_dispersion_ratio"] = self.max_dispersion_ratio
        return d

    def to_text(self) -> str:
        return "".join(f"{k}: {_fmt(v)}\n" for k, v in self.as_dict().items())


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return "none" if value is None else str(value)


def containment_check(traj, bound, t_hold: float = 10.0) -> BoundReport:
    """Find when the dispersion enters ``rho^2`` for good and how long it stays.

    ``bound`` is a :class:`CohesionBound` or a bare radius.  The entry time is
    the earliest sample after which every recorded dispersion is within
    ``rho^2 (1 + 1e-9)``; the run counts as contained when at least ``t_hold``
    seconds of the record follow it.
    """
    if isinstance(bound, CohesionBound):
        rho, extras = bound.rho, dict(lambda2=bound.lambda2, M=bound.M, threshold_V=bound.threshold_V)
    else:
        rho, extras = float(bound), {}
    times = traj.times
    if times[-1] - times[0] < t_hold:
        raise ValueError(f"trajectory spans {times[-1] - times[0]:g} s, shorter than t_hold = {t_hold:g} s")
    rho_sq = rho * rho
    outside = np.nonzero(traj.dispersion > rho_sq * (1.0 + CONTAINMENT_RTOL))[0]
    entry = 0 if outside.size == 0 else int(outside[-1]) + 1
    if entry >= len(times):
        return BoundReport(rho, rho_sq, t_hold, None, False, None, **extras)
    entry_time = float(times[entry])
    return BoundReport(
        rho=rho,
        rho_sq=rho_sq,
        t_hold=t_hold,
        entry_time=entry_time,
        contained=bool(times[-1] - entry_time >= t_hold),
        max_dispersion_after_entry=float(traj.dispersion[entry:].max()),
        **extras,
    )


@dataclass(frozen=True, eq=False)
class CenterDrift:
    net_displacement: float
    path_length: float
    speed: np.ndarray
    turning_angle: float

    @property
    def turns(self):
        """Net signed revolutions of the center heading (2-D paths only)."""
        return self.turning_angle / (2.0 * math.pi)


def center_drift_summary(traj) -> CenterDrift:
    """Descriptive statistics of the swarm-center path.

    ``turning_angle`` accumulates the signed change of heading between
    successive center steps; it is ``nan`` outside the plane.  A sustained
    growth of it together with growing step length is what a spiral looks
    like, but no pass/fail criterion is attached.
    """
    c = traj.center
    steps = np.diff(c, axis=0)
    lengths = np.linalg.norm(steps, axis=1)
    dt = np.diff(traj.times)
    turning = math.nan
    if c.shape[1] == 2 and len(steps) > 1:
        moving = steps[lengths > 1e-14]
        heading = np.unwrap(np.arctan2(moving[:, 1], moving[:, 0]))
        turning = float(heading[-1] - heading[0]) if heading.size else 0.0
    return CenterDrift(
        net_displacement=float(np.linalg.norm(c[-1] - c[0])),
        path_length=float(lengths.sum()),
        speed=lengths / dt,
        turning_angle=turning,
    )
