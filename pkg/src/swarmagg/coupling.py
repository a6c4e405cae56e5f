"""Coupling matrices, their Laplacians and the spectral gap of L + L^T."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateSpectrumError,
    GenerationError,
    InvalidInputError,
    PreconditionError,
)

BALANCE_TOL = 1e-12
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Square nonnegative weight matrix ``W``; ``W[i, j]`` is how strongly i reacts to j.

    Balance and irreducibility are not enforced here, see :func:`validate_coupling`.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidInputError(f"coupling matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("coupling matrix has non-finite entries")
        if np.any(w < 0):
            raise InvalidInputError("coupling weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_agents(self) -> int:
        return self.weights.shape[0]

    def __len__(self):
        return self.n_agents

    def scaled(self, factor: float) -> "CouplingMatrix":
        return CouplingMatrix(self.weights * factor)

    def symmetrized(self) -> "CouplingMatrix":
        return CouplingMatrix(0.5 * (self.weights + self.weights.T))


@dataclass(frozen=True)
class ValidationReport:
    zero_diagonal: bool
    balanced: bool
    irreducible: bool
    max_balance_residual: float

    @property
    def ok(self) -> bool:
        return self.zero_diagonal and self.balanced and self.irreducible

    def lines(self):
        return [
            f"zero_diagonal: {self.zero_diagonal}",
            f"balanced: {self.balanced}",
            f"irreducible: {self.irreducible}",
            f"max_balance_residual: {self.max_balance_residual!r}",
            f"valid: {self.ok}",
        ]


def _as_coupling(W) -> CouplingMatrix:
    return W if isinstance(W, CouplingMatrix) else CouplingMatrix(W)


def is_irreducible(W) -> bool:
    """True when the undirected support graph of W + W^T is connected."""
    w = _as_coupling(W).weights
    if w.shape[0] <= 1:
        return True
    support = (w + w.T) > 0
    n_comp, _ = connected_components(support, directed=False)
    return n_comp == 1


def validate_coupling(W, tol: float = BALANCE_TOL) -> ValidationReport:
    W = _as_coupling(W)
    w = W.weights
    residual = np.abs(w.sum(axis=1) - w.sum(axis=0))
    max_res = float(residual.max()) if residual.size else 0.0
    return ValidationReport(
        zero_diagonal=bool(np.all(np.diag(w) == 0)),
        balanced=max_res <= tol,
        irreducible=is_irreducible(W),
        max_balance_residual=max_res,
    )


def generate_balanced(n_agents: int, density: float = 0.5, weight_scale: float = 1.0,
                      seed=None, max_attempts: int = 8) -> CouplingMatrix:
    """Random balanced, irreducible coupling matrix.

    W is a sum of weighted directed simple cycles, so every agent's in-weight
    equals its out-weight.  A random Hamiltonian cycle makes the graph
    strongly connected; further cycles are added, each closing through a
    not-yet-used edge, until the fraction of nonzero off-diagonal entries
    reaches ``density``.  Weights are ``weight_scale * U(0.1, 1)`` per cycle.
    """
    if n_agents < 2:
        raise InvalidInputError("need at least two agents")
    if not 0.0 < density <= 1.0:
        raise GenerationError(f"density must lie in (0, 1], got {density!r}")
    if not weight_scale > 0:
        raise GenerationError(f"weight_scale must be positive, got {weight_scale!r}")

    rng = np.random.default_rng(seed)
    n = n_agents
    target = int(np.ceil(density * n * (n - 1)))
    for _ in range(max_attempts):
        w = np.zeros((n, n))

        def add_cycle(nodes):
            wt = weight_scale * rng.uniform(0.1, 1.0)
            for u, v in zip(nodes, np.roll(nodes, -1)):
                w[u, v] += wt

        add_cycle(rng.permutation(n))
        while np.count_nonzero(w) < target:
            unused = np.argwhere((w == 0) & ~np.eye(n, dtype=bool))
            u, v = unused[rng.integers(len(unused))]
            # close u -> v with a random path v -> ... -> u through other agents
            others = np.setdiff1d(np.arange(n), [u, v])
            k = rng.integers(0, len(others) + 1)
            path = rng.permutation(others)[:k]
            add_cycle(np.concatenate(([u, v], path)).astype(int))

        W = CouplingMatrix(w)
        if validate_coupling(W).ok:
            return W
    raise GenerationError(f"could not generate a valid coupling matrix in {max_attempts} attempts")


@dataclass(frozen=True, eq=False)
class LaplacianPair:
    L: np.ndarray
    Lsym: np.ndarray
    eigenvalues_sym: np.ndarray


def laplacian(W, check: bool = True) -> LaplacianPair:
    """Directed Laplacian ``L = diag(row sums) - W`` and its symmetric part ``L + L^T``."""
    W = _as_coupling(W)
    if check:
        report = validate_coupling(W)
        if not report.ok:
            raise PreconditionError("coupling matrix failed validation: " + "; ".join(report.lines()))
    w = W.weights
    L = -w.copy()
    np.fill_diagonal(L, w.sum(axis=1) - np.diag(w))
    Lsym = L + L.T
    eig = np.sort(np.linalg.eigvalsh(Lsym))
    return LaplacianPair(L=L, Lsym=Lsym, eigenvalues_sym=eig)


def lambda2(pair: LaplacianPair) -> float:
    """Second-smallest eigenvalue of ``L + L^T`` (algebraic connectivity)."""
    eig = pair.eigenvalues_sym
    if eig.size < 2:
        raise DegenerateSpectrumError("spectral gap undefined for fewer than two agents")
    scale = float(np.max(np.abs(eig)))
    value = float(eig[1])
    if value <= SPECTRAL_TOL * scale:
        raise DegenerateSpectrumError(f"lambda2 = {value!r} is numerically zero; graph is disconnected")
    return value


def total_weight(W) -> float:
    return float(_as_coupling(W).weights.sum())


def load_matrix(path) -> CouplingMatrix:
    """Read a whitespace-separated matrix file; ``#`` starts a comment."""
    try:
        w = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    return CouplingMatrix(w)


def save_matrix(W, path):
    np.savetxt(path, _as_coupling(W).weights, fmt="%.17g")
