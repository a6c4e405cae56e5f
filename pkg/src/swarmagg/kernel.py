"""Attraction/repulsion interaction laws.

Every kernel acts on a relative position ``y = x_i - x_j`` as

    f(y) = -y * gain(|y|)

where ``gain(r) = attraction(r) - repulsion(r)``.  A positive gain pulls the
pair together, a negative gain pushes it apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, NoEquilibriumError, SingularityError

# Distances below this are clamped before evaluating a repulsion term that may
# be singular at the origin.
EPS_POS = 1e-9

# Integer tags understood by the compiled integration loop.
JIT_GAUSSIAN = 0
JIT_INVERSE = 1


@dataclass(frozen=True)
class GaussianKernel:
    """Linear attraction with Gaussian-weighted repulsion.

    f(y) = -y (a - b exp(-|y|^2 / c)), with a, b, c > 0 and b > a.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.b <= self.a:
            raise NoEquilibriumError(f"need b > a for a balance distance, got a={self.a}, b={self.b}")

    def gain(self, r):
        r = np.asarray(r, dtype=float)
        return self.a - self.b * np.exp(-(r * r) / self.c)

    def attraction(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.a)

    def repulsion(self, r):
        r = np.asarray(r, dtype=float)
        return self.b * np.exp(-(r * r) / self.c)

    @property
    def jit_spec(self):
        return JIT_GAUSSIAN, (self.a, self.b, self.c)

    def as_general(self) -> "GeneralKernel":
        """View this kernel as a member of the bounded-repulsion class.

        The declared repulsion bound is the peak of ``r * b exp(-r^2/c)``.
        """
        _, peak = repulsion_peak(self)
        return GeneralKernel(
            fa=_constant(self.a),
            fr=self.repulsion,
            a=self.a,
            b=self.b * peak,
            name="gaussian",
            jit=(JIT_GAUSSIAN, (self.a, self.b, self.c)),
        )


@dataclass(frozen=True)
class GeneralKernel:
    """Kernel built from attraction and repulsion magnitude maps.

    ``fa`` and ``fr`` take an array of nonnegative distances and return arrays
    of the same shape.  ``a`` is the declared constant attraction and ``b`` the
    declared bound on ``r * fr(r)``; check them with
    :func:`validate_assumptions`.
    """

    fa: Callable
    fr: Callable
    a: float
    b: float
    name: str = "custom"
    jit: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        for label in ("a", "b"):
            value = getattr(self, label)
            if not math.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{label} must be positive and finite, got {value!r}")

    def attraction(self, r):
        return np.asarray(self.fa(np.asarray(r, dtype=float)), dtype=float)

    def repulsion(self, r):
        r = np.maximum(np.asarray(r, dtype=float), EPS_POS)
        return np.asarray(self.fr(r), dtype=float)

    def gain(self, r):
        return self.attraction(r) - self.repulsion(r)

    @property
    def jit_spec(self):
        return self.jit


def _constant(value):
    def fa(r):
        return np.full_like(np.asarray(r, dtype=float), value)

    return fa


def linear_attraction_bounded_repulsion(a: float, b: float) -> GeneralKernel:
    """fa(r) = a, fr(r) = b / r: constant-magnitude repulsion."""

    def fr(r):
        return b / np.asarray(r, dtype=float)

    return GeneralKernel(
        fa=_constant(a), fr=fr, a=float(a), b=float(b),
        name="linear-attraction-bounded-repulsion", jit=(JIT_INVERSE, (float(a), float(b), 0.0)),
    )


def linear_attraction_gaussian_repulsion(a: float, b: float, c: float) -> GeneralKernel:
    return GaussianKernel(a, b, c).as_general()


KERNEL_REGISTRY = {
    "linear-attraction-bounded-repulsion": linear_attraction_bounded_repulsion,
    "linear-attraction-gaussian-repulsion": linear_attraction_gaussian_repulsion,
}


def make_general_kernel(name: str, **params) -> GeneralKernel:
    try:
        factory = KERNEL_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(KERNEL_REGISTRY))
        raise InvalidInputError(f"unknown kernel {name!r}; known kernels: {known}") from None
    return factory(**params)


def eval_kernel(kernel, y):
    """Evaluate the pairwise force ``f(y)`` for a single relative position."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError(f"non-finite relative position {y!r}")
    r = float(np.sqrt(np.dot(y, y)))
    g = float(kernel.gain(r))
    if not math.isfinite(g):
        raise SingularityError(f"kernel gain is not finite at distance {r!r}")
    return -y * g


def equilibrium_distance(kernel: GaussianKernel) -> float:
    """Distance at which attraction and repulsion cancel: sqrt(c ln(b/a))."""
    if kernel.b <= kernel.a:
        raise NoEquilibriumError("b <= a: repulsion never balances attraction")
    return math.sqrt(kernel.c * math.log(kernel.b / kernel.a))


def repulsion_peak(kernel: GaussianKernel):
    """Argmax and max of ``r exp(-r^2/c)`` over r >= 0."""
    r_star = math.sqrt(kernel.c / 2.0)
    return r_star, r_star * math.exp(-0.5)


def validate_assumptions(kernel: GeneralKernel, r_min=1e-6, r_max=1e3, n=2001, atol=1e-12):
    """Check constant attraction and bounded ``r * fr(r)`` on a log grid.

    Returns ``(ok, worst)`` where ``worst`` is the largest ``r * fr(r)`` seen.
    """
    r = np.logspace(math.log10(r_min), math.log10(r_max), n)
    fa = kernel.attraction(r)
    fr = kernel.repulsion(r)
    if not (np.all(np.isfinite(fa)) and np.all(np.isfinite(fr))):
        return False, math.inf
    worst = float(np.max(r * fr))
    ok = bool(np.all(fa == kernel.a) and np.all(fr >= 0) and worst <= kernel.b + atol)
    return ok, worst
