"""Scenario files.

A scenario is an INI file read with :mod:`configparser`::

    [scenario]
    name = paper-fig-n10          ; defaults to the file stem
    assert_contained = true

    [kernel]
    type = gaussian               ; or: general
    a = 1
    b = 20
    c = 0.2
    ; general kernels: name = linear-attraction-bounded-repulsion, plus a, b

    [coupling]
    n_agents = 10
    density = 0.5
    weight_scale = 1
    seed = 101
    symmetric = false             ; replace W by (W + W^T) / 2
    ; or: file = W.txt (whitespace-separated rows, relative to this file)

    [initial]
    dimension = 2
    low = -5
    high = 5
    seed = 7
    ; or: file = x0.txt (one agent per row)

    [integration]
    dt = 0.001
    t_end = 30
    record_stride = 10
    method = rk4

    [analysis]
    t_hold = 10

Unknown sections or keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coupling import CouplingMatrix, generate_balanced, load_matrix
from .errors import ConfigError, SwarmError
from .integrator import IntegrationConfig
from .kernel import GaussianKernel, make_general_kernel

ALLOWED = {
    "scenario": {"name", "assert_contained", "description"},
    "kernel": {"type", "name", "a", "b", "c"},
    "coupling": {"n_agents", "density", "weight_scale", "seed", "symmetric", "file"},
    "initial": {"dimension", "low", "high", "seed", "file"},
    "integration": {"dt", "t_end", "record_stride", "method"},
    "analysis": {"t_hold"},
}
REQUIRED_SECTIONS = ("kernel", "coupling", "initial", "integration")


@dataclass
class Scenario:
    name: str
    path: Path
    kernel: object
    coupling: CouplingMatrix
    initial: np.ndarray
    integration: IntegrationConfig
    t_hold: float
    assert_contained: bool
    coupling_seed: object
    resolved: list

    @property
    def n_agents(self):
        return self.coupling.n_agents


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] missing required key {key!r}")
        return default
    raw = section[key]
    try:
        if conv is bool:
            return section.getboolean(key)
        return conv(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a valid {conv.__name__}") from None


def _seed(section):
    return _get(section, "seed", int, default=0)


def load_scenario(path) -> Scenario:
    """Parse and resolve a scenario: builds the kernel, W and initial positions.

    Every failure surfaces as :class:`ConfigError`, except coupling generation
    failures which keep their own type.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from None

    for name in parser.sections():
        if name not in ALLOWED:
            raise ConfigError(f"{path}: unknown section [{name}]")
        extra = set(parser[name]) - ALLOWED[name]
        if extra:
            raise ConfigError(f"{path}: unknown keys in [{name}]: {', '.join(sorted(extra))}")
    for name in REQUIRED_SECTIONS:
        if not parser.has_section(name):
            raise ConfigError(f"{path}: missing section [{name}]")
    base = path.parent
    resolved = []

    def note(key, value):
        resolved.append((key, value))
        return value

    meta = parser["scenario"] if parser.has_section("scenario") else {}
    name = note("scenario.name", meta.get("name", path.stem) if meta else path.stem)
    assert_contained = note(
        "scenario.assert_contained",
        _get(meta, "assert_contained", bool, default=False) if meta else False,
    )

    ks = parser["kernel"]
    ktype = note("kernel.type", ks.get("type", "gaussian"))
    try:
        if ktype == "gaussian":
            kernel = GaussianKernel(*(note(f"kernel.{k}", _get(ks, k, float, required=True)) for k in "abc"))
        elif ktype == "general":
            kname = note("kernel.name", _get(ks, "name", str, required=True))
            params = {k: note(f"kernel.{k}", _get(ks, k, float)) for k in "abc" if k in ks}
            kernel = make_general_kernel(kname, **params)
        else:
            raise ConfigError(f"[kernel] type must be gaussian or general, got {ktype!r}")
    except TypeError as exc:
        raise ConfigError(f"[kernel] {exc}") from None
    except SwarmError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[kernel] {exc}") from None

    cs = parser["coupling"]
    coupling_seed = None
    if "file" in cs:
        cfile = base / cs["file"]
        note("coupling.file", str(cfile))
        if not cfile.exists():
            raise ConfigError(f"[coupling] file {cfile} does not exist")
        try:
            W = load_matrix(cfile)
        except SwarmError as exc:
            raise ConfigError(f"[coupling] {exc}") from None
        n = _get(cs, "n_agents", int, default=W.n_agents)
        if n != W.n_agents:
            raise ConfigError(f"[coupling] n_agents = {n} but {cfile} is {W.n_agents}x{W.n_agents}")
    else:
        n = note("coupling.n_agents", _get(cs, "n_agents", int, required=True))
        density = note("coupling.density", _get(cs, "density", float, default=0.5))
        scale = note("coupling.weight_scale", _get(cs, "weight_scale", float, default=1.0))
        coupling_seed = note("coupling.seed", _seed(cs))
        if n < 2:
            raise ConfigError("[coupling] n_agents must be at least 2 for a generated matrix")
        W = generate_balanced(n, density, scale, seed=coupling_seed)
    if note("coupling.symmetric", _get(cs, "symmetric", bool, default=False)):
        W = W.symmetrized()

    ins = parser["initial"]
    if "file" in ins:
        xfile = base / ins["file"]
        note("initial.file", str(xfile))
        try:
            x0 = np.loadtxt(xfile, dtype=float, comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"[initial] {exc}") from None
        if x0.shape[0] != W.n_agents:
            raise ConfigError(f"[initial] {xfile} has {x0.shape[0]} agents, coupling has {W.n_agents}")
    else:
        dim = note("initial.dimension", _get(ins, "dimension", int, default=2))
        low = note("initial.low", _get(ins, "low", float, default=-5.0))
        high = note("initial.high", _get(ins, "high", float, default=5.0))
        seed = note("initial.seed", _seed(ins))
        if dim < 1 or not high > low:
            raise ConfigError("[initial] need dimension >= 1 and high > low")
        x0 = np.random.default_rng(seed).uniform(low, high, size=(W.n_agents, dim))

    its = parser["integration"]
    try:
        integration = IntegrationConfig(
            dt=note("integration.dt", _get(its, "dt", float, default=1e-3)),
            t_end=note("integration.t_end", _get(its, "t_end", float, required=True)),
            record_stride=note("integration.record_stride", _get(its, "record_stride", int, default=10)),
            method=note("integration.method", its.get("method", "rk4")),
        )
    except SwarmError as exc:
        raise ConfigError(f"[integration] {exc}") from None

    an = parser["analysis"] if parser.has_section("analysis") else {}
    t_hold = note("analysis.t_hold", _get(an, "t_hold", float, default=10.0) if an else 10.0)
    if t_hold > integration.t_end:
        raise ConfigError(f"[analysis] t_hold = {t_hold} exceeds t_end = {integration.t_end}")

    return Scenario(
        name=name, path=path, kernel=kernel, coupling=W, initial=x0, integration=integration,
        t_hold=t_hold, assert_contained=assert_contained, coupling_seed=coupling_seed, resolved=resolved,
    )
