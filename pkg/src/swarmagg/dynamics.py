"""Right-hand side of the swarm ODE and quantities derived from a state.

Positions are ``(N, n)`` arrays: one row per agent in n-dimensional space.
Functions accept either a :class:`SwarmState` or a bare position array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import BALANCE_TOL, CouplingMatrix, validate_coupling
from .errors import InvalidInputError, PreconditionError
from .kernel import EPS_POS, GaussianKernel


@dataclass(frozen=True, eq=False)
class SwarmState:
    positions: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        x = np.array(self.positions, dtype=float)
        if x.ndim != 2:
            raise InvalidInputError(f"positions must be (N, n), got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("positions contain non-finite values")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def n_agents(self):
        return self.positions.shape[0]

    @property
    def dim(self):
        return self.positions.shape[1]

    def coincident_pairs(self, tol=0.0):
        """Index pairs (i < j) whose separation is ``<= tol``."""
        d = np.linalg.norm(self.positions[:, None, :] - self.positions[None, :, :], axis=-1)
        i, j = np.nonzero(np.triu(d <= tol, k=1))
        return list(zip(i.tolist(), j.tolist()))


@dataclass(frozen=True, eq=False)
class CenterState:
    center: np.ndarray
    error_vectors: np.ndarray
    dispersion: float


def positions_of(state) -> np.ndarray:
    if isinstance(state, SwarmState):
        return state.positions
    x = np.asarray(state, dtype=float)
    if x.ndim != 2:
        raise InvalidInputError(f"positions must be (N, n), got shape {x.shape}")
    return x


def _weights(W, n_agents):
    w = W.weights if isinstance(W, CouplingMatrix) else np.asarray(W, dtype=float)
    if w.shape != (n_agents, n_agents):
        raise InvalidInputError(f"coupling matrix shape {w.shape} does not match {n_agents} agents")
    return w


def pairwise_terms(x, w, kernel):
    """Per-pair coefficients ``K[i, j] = w_ij * gain(|x_i - x_j|)``.

    Also returns how many weighted pairs sat closer than the clamp distance.
    """
    diff = x[:, None, :] - x[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    active = w != 0
    n_close = int(np.count_nonzero(active & (r < EPS_POS)))
    g = np.zeros_like(r)
    g[active] = kernel.gain(r[active])
    return w * g, n_close


def rhs(state, W, kernel) -> np.ndarray:
    """Velocities ``dx_i/dt = sum_j w_ij f(x_i - x_j)`` for every agent."""
    x = positions_of(state)
    w = _weights(W, x.shape[0])
    K, _ = pairwise_terms(x, w, kernel)
    # sum_j K_ij (x_j - x_i) == -sum_j K_ij (x_i - x_j)
    return K @ x - K.sum(axis=1)[:, None] * x


def center_state(state) -> CenterState:
    x = positions_of(state)
    center = x.mean(axis=0)
    e = x - center
    return CenterState(center=center, error_vectors=e, dispersion=float(np.sum(e * e)))


def center_velocity_full(state, W, kernel) -> np.ndarray:
    return rhs(state, W, kernel).mean(axis=0)


def center_velocity_repulsion(state, W, kernel: GaussianKernel, tol=BALANCE_TOL) -> np.ndarray:
    """Center velocity from the repulsion terms alone.

    Valid only for balanced W, where the linear attraction sums to zero:
    (b/N) sum_ij w_ij (x_i - x_j) exp(-|x_i - x_j|^2 / c).
    """
    if not isinstance(kernel, GaussianKernel):
        raise PreconditionError("repulsion-only center velocity needs the Gaussian kernel")
    x = positions_of(state)
    w = _weights(W, x.shape[0])
    report = validate_coupling(w, tol=tol)
    if not report.balanced:
        raise PreconditionError(f"coupling is not balanced (residual {report.max_balance_residual:.3g})")
    diff = x[:, None, :] - x[None, :, :]
    beta = np.exp(-np.einsum("ijk,ijk->ij", diff, diff) / kernel.c)
    return kernel.b / x.shape[0] * np.einsum("ij,ijk->k", w * beta, diff)


def lyapunov(state):
    """``(V, dispersion)`` with V = 1/2 sum_i |x_i - center|^2 and dispersion = 2V."""
    disp = center_state(state).dispersion
    return 0.5 * disp, disp


def lyapunov_rate(state, W, kernel) -> float:
    """Exact dV/dt along the flow: sum_i e_i . (dx_i/dt - d(center)/dt)."""
    x = positions_of(state)
    v = rhs(x, W, kernel)
    e = x - x.mean(axis=0)
    return float(np.sum(e * (v - v.mean(axis=0))))


def laplacian_quadratic_form(Lsym, e) -> float:
    """``e^T (Lsym kron I) e`` evaluated as sum_ij Lsym_ij (e_i . e_j)."""
    e = np.asarray(e, dtype=float)
    return float(np.einsum("ij,ik,jk->", Lsym, e, e))


def lyapunov_rate_bound(state, kernel: GaussianKernel, Lsym, M) -> float:
    """Upper bound on dV/dt: -a/2 e^T(Lsym kron I)e + 2 b M sqrt(c) e^{-1/2} sqrt(V)."""
    x = positions_of(state)
    e = x - x.mean(axis=0)
    V, _ = lyapunov(x)
    q = laplacian_quadratic_form(Lsym, e)
    return -0.5 * kernel.a * q + 2.0 * kernel.b * M * np.sqrt(kernel.c) * np.exp(-0.5) * np.sqrt(V)
