import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmagg.errors import InvalidInputError, NoEquilibriumError, SingularityError
from swarmagg.kernel import (
    GaussianKernel,
    GeneralKernel,
    equilibrium_distance,
    eval_kernel,
    linear_attraction_bounded_repulsion,
    make_general_kernel,
    repulsion_peak,
    validate_assumptions,
)

vectors = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=4).map(np.array)


def bisect_root(g, lo, hi, tol=1e-10):
    assert g(lo) < 0 < g(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_max(h, lo, hi, tol=1e-9):
    grid = np.linspace(lo, hi, 1001)
    k = int(np.argmax(h(grid)))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, 1000)]
    ratio = (math.sqrt(5) - 1) / 2
    while b - a > tol:
        c, d = b - ratio * (b - a), a + ratio * (b - a)
        if h(c) > h(d):
            b = d
        else:
            a = c
    return 0.5 * (a + b)


def test_gaussian_at_origin_is_zero(paper_kernel):
    assert np.array_equal(eval_kernel(paper_kernel, [0.0, 0.0]), [0.0, 0.0])


def test_gaussian_unit_vector(paper_kernel):
    # 40-digit value of -(1 - 20 e^-5)
    np.testing.assert_allclose(eval_kernel(paper_kernel, [1.0, 0.0]), [-0.8652410600182907, 0.0], rtol=1e-14)


def test_vanishes_at_balance_distance(paper_kernel):
    d = equilibrium_distance(paper_kernel)
    u = np.array([0.6, 0.8])
    assert np.linalg.norm(eval_kernel(paper_kernel, d * u)) < 1e-14


def test_equilibrium_distance_against_bisection(paper_kernel):
    root = bisect_root(lambda r: 1.0 - 20.0 * math.exp(-r * r / 0.2), 1e-9, 10.0)
    assert equilibrium_distance(paper_kernel) == pytest.approx(root, abs=1e-9)
    assert equilibrium_distance(paper_kernel) == pytest.approx(0.774046, abs=1e-6)


def test_equilibrium_distance_unit():
    assert equilibrium_distance(GaussianKernel(1.0, math.e, 1.0)) == pytest.approx(1.0, rel=1e-15)


def test_no_equilibrium_when_b_not_above_a():
    with pytest.raises(NoEquilibriumError):
        GaussianKernel(1.0, 1.0, 0.2)


@pytest.mark.parametrize("bad", [dict(a=0, b=2, c=1), dict(a=1, b=2, c=-1), dict(a=1, b=math.inf, c=1)])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidInputError):
        GaussianKernel(**bad)


def test_non_finite_input(paper_kernel):
    with pytest.raises(InvalidInputError):
        eval_kernel(paper_kernel, [math.nan, 0.0])


def test_repulsion_peak_against_golden_section():
    r_star, peak = repulsion_peak(GaussianKernel(1.0, 20.0, 0.2))
    r_num = golden_max(lambda r: r * np.exp(-r * r / 0.2), 0.0, 3.0)
    assert r_star == pytest.approx(r_num, abs=1e-8)
    assert r_star == pytest.approx(0.3162278, abs=1e-7)
    # mpmath, 40 digits: sqrt(0.1) * exp(-1/2)
    assert peak == pytest.approx(0.19180183554164499, rel=1e-14)


@pytest.mark.parametrize("c, r_star, peak", [(2.0, 1.0, math.exp(-0.5)), (0.5, 0.5, 0.5 * math.exp(-0.5))])
def test_repulsion_peak_closed_forms(c, r_star, peak):
    assert repulsion_peak(GaussianKernel(1.0, 20.0, c)) == pytest.approx((r_star, peak), rel=1e-15)


@given(vectors)
def test_antisymmetry_gaussian(y):
    k = GaussianKernel(1.0, 20.0, 0.2)
    assert np.array_equal(eval_kernel(k, -y), -eval_kernel(k, y))


@given(vectors)
def test_antisymmetry_bounded_repulsion(y):
    k = linear_attraction_bounded_repulsion(1.0, 20.0)
    np.testing.assert_allclose(eval_kernel(k, -y), -eval_kernel(k, y), atol=1e-14)


@settings(max_examples=200)
@given(st.floats(0.0, 2 * math.pi), st.floats(1e-4, 5.0))
def test_sign_structure(theta, r):
    k = GaussianKernel(1.0, 20.0, 0.2)
    d = equilibrium_distance(k)
    if abs(r - d) < 1e-9:
        return
    u = np.array([math.cos(theta), math.sin(theta)])
    radial = float(u @ eval_kernel(k, r * u))
    assert (radial > 0) if r < d else (radial < 0)


def test_bounded_repulsion_satisfies_assumptions():
    ok, worst = validate_assumptions(linear_attraction_bounded_repulsion(1.0, 20.0))
    assert ok
    assert worst == pytest.approx(20.0, rel=1e-14)


def test_gaussian_repulsion_bounded_by_peak():
    k = GaussianKernel(1.0, 20.0, 0.2)
    r = np.logspace(-6, 3, 5001)
    assert np.max(r * k.repulsion(r)) <= 20.0 * repulsion_peak(k)[1] + 1e-12
    ok, _ = validate_assumptions(k.as_general())
    assert ok


def test_assumption_violation_detected():
    k = GeneralKernel(fa=lambda r: np.ones_like(r), fr=lambda r: 3.0 / np.sqrt(r), a=1.0, b=20.0)
    assert not validate_assumptions(k)[0]
    varying = GeneralKernel(fa=lambda r: 1.0 + r, fr=lambda r: 1.0 / r, a=1.0, b=1.0)
    assert not validate_assumptions(varying)[0]


def test_general_kernel_clamps_at_origin():
    k = linear_attraction_bounded_repulsion(1.0, 20.0)
    assert np.array_equal(eval_kernel(k, [0.0, 0.0]), [0.0, 0.0])
    assert np.isfinite(k.gain(0.0))


def test_singular_repulsion_raises():
    k = GeneralKernel(fa=lambda r: np.ones_like(r), fr=lambda r: np.where(r < 1, np.inf, 0.0), a=1.0, b=1.0)
    with pytest.raises(SingularityError):
        eval_kernel(k, [0.5, 0.0])


def test_gaussian_matches_its_general_view(rng):
    k = GaussianKernel(1.0, 20.0, 0.2)
    g = k.as_general()
    for y in rng.normal(size=(20, 3)):
        np.testing.assert_allclose(eval_kernel(g, y), eval_kernel(k, y), rtol=1e-14, atol=1e-15)


def test_registry():
    k = make_general_kernel("linear-attraction-bounded-repulsion", a=1.0, b=20.0)
    assert k.name == "linear-attraction-bounded-repulsion"
    with pytest.raises(InvalidInputError):
        make_general_kernel("nope", a=1.0)
