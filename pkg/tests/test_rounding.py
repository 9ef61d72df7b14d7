import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calreg.grid import PADDED, build_grid
from calreg.rounding import (
    TwoPointDistribution,
    actual_overhead,
    baseline_linear,
    baseline_nearest,
    expected_overhead,
    overhead_bound,
    rounding_distribution,
    rounding_masses,
)

G2 = build_grid(2, PADDED)


def test_rounding_distribution_at_p03():
    d = rounding_distribution(G2, 0.3)
    assert (d.lower_index, d.upper_index) == (0, 1)
    assert d.lower_mass == pytest.approx(0.3943942526898033, abs=1e-12)
    assert d.upper_mass == pytest.approx(0.6056057473101967, abs=1e-12)


def test_rounding_distribution_exact_hits():
    d = rounding_distribution(G2, float(G2.points[0]))
    assert d.lower_index == 0 and d.lower_mass == pytest.approx(1.0, abs=1e-15)
    # p = 0.5 brackets as (1, 2) and the zero numerator on the upper side
    # pushes all mass to index 1, which is 0.5 itself
    d = rounding_distribution(G2, 0.5)
    assert d.lower_index == 1
    assert d.lower_mass == pytest.approx(1.0, abs=1e-15)
    assert d.upper_mass == pytest.approx(0.0, abs=1e-15)
    # top endpoint goes deterministically to the last index
    d = rounding_distribution(G2, float(G2.points[-1]))
    assert d.upper_index == 2 and d.upper_mass == pytest.approx(1.0, abs=1e-15)


def test_rounding_clamps_out_of_range():
    low = rounding_distribution(G2, 0.01)
    assert low.lower_index == 0 and low.lower_mass == pytest.approx(1.0, abs=1e-15)
    high = rounding_distribution(G2, 0.99)
    assert high.upper_index == 2 and high.upper_mass == pytest.approx(1.0, abs=1e-15)


def test_two_point_distribution_validation():
    with pytest.raises(ValueError):
        TwoPointDistribution(0, 2, 0.5, 0.5)
    with pytest.raises(ValueError):
        TwoPointDistribution(0, 1, 0.7, 0.7)
    with pytest.raises(ValueError):
        TwoPointDistribution(0, 1, -0.1, 1.1)


def test_overhead_bound_value():
    assert overhead_bound(G2, 0.3) == pytest.approx(0.17129117225943474, abs=1e-12)
    for z in G2.points:
        assert overhead_bound(G2, float(z)) == pytest.approx(0.0, abs=1e-13)
    with pytest.raises(ValueError):
        overhead_bound(G2, 0.01)


def test_overhead_bound_matches_brute_force():
    # E[p/q] - 1 and E[(1-p)/(1-q)] - 1 both collapse to the same closed form
    ps = np.linspace(G2.points[0], G2.points[-1], 1001)
    lo, lm, um = rounding_masses(G2, ps)
    zl, zu = G2.points[lo], G2.points[lo + 1]
    brute_win = ps * (lm / zl + um / zu) - 1.0
    brute_lose = (1.0 - ps) * (lm / (1.0 - zl) + um / (1.0 - zu)) - 1.0
    bounds = np.array([overhead_bound(G2, float(p)) for p in ps])
    assert np.max(np.abs(bounds - brute_win)) <= 1e-12
    assert np.max(np.abs(bounds - brute_lose)) <= 1e-12


def test_overhead_bound_interior_maximum_per_bracket():
    z0, z1 = G2.points[0], G2.points[1]
    ps = np.linspace(z0, z1, 101)
    vals = [overhead_bound(G2, float(p)) for p in ps]
    peak = int(np.argmax(vals))
    assert 0 < peak < len(ps) - 1
    assert vals[peak] > vals[0] and vals[peak] > vals[-1]


def test_actual_overhead_values():
    assert actual_overhead(G2, 0.3, 0) == pytest.approx(0.12555019156860076, abs=1e-13)
    assert actual_overhead(G2, 0.3, 1) == pytest.approx(
        -0.026530314432394952, abs=1e-13
    )
    for z in G2.points:
        for y in (0, 1):
            assert actual_overhead(G2, float(z), y) == pytest.approx(0.0, abs=1e-12)


def test_actual_overhead_below_bound():
    ps = np.linspace(G2.points[0], G2.points[-1], 501)
    for p in ps:
        b = overhead_bound(G2, float(p))
        for y in (0, 1):
            assert actual_overhead(G2, float(p), y) <= b + 1e-12


def test_k2_scaled_max_overhead_non_increasing():
    prev = None
    for K in (8, 16, 32, 64, 128):
        g = build_grid(K, PADDED)
        ps = np.linspace(g.points[0], g.points[-1], 4001)
        lo, lm, um = rounding_masses(g, ps)
        zl, zu = g.points[lo], g.points[lo + 1]
        worst = float(np.max(ps * (lm / zl + um / zu) - 1.0))
        scaled = K * K * worst
        assert scaled <= 2.5323
        if prev is not None:
            assert scaled <= prev + 1e-9
        prev = scaled


def test_baseline_nearest():
    d = baseline_nearest(G2, float(G2.points[0]))
    assert d.lower_index == 0 and d.lower_mass == 1.0
    d = baseline_nearest(G2, float(G2.points[-1]))
    assert d.upper_index == 2 and d.upper_mass == 1.0
    d = baseline_nearest(G2, 0.2)
    assert d.lower_index == 0 and d.lower_mass == 1.0


def test_baseline_linear():
    d = baseline_linear(G2, 0.3)
    assert d.lower_mass == pytest.approx(0.5656854249492381, abs=1e-12)
    assert d.upper_mass == pytest.approx(1.0 - 0.5656854249492381, abs=1e-12)
    d = baseline_linear(G2, float(G2.points[1]))
    assert d.lower_mass == pytest.approx(1.0, abs=1e-15) or d.upper_mass == pytest.approx(
        1.0, abs=1e-15
    )


def test_failing_rounders_have_constant_overhead():
    # the bracket midpoint of (z_0, z_1) with label 1: nearest rounding
    # costs ln(3/2 + cos(pi/2K)) and linear rounding costs
    # ln((1 + 4cos^2(pi/4K)) / (4cos(pi/4K))).  The true midpoint is not a
    # representable double and can round to the upper side (K = 8 does), so
    # evaluate at the nearest double strictly below it.
    for K in (8, 16, 32, 64, 128):
        g = build_grid(K, PADDED)
        mid = (g.points[0] + g.points[1]) / 2.0
        p = float(mid * (1.0 - 1e-14))
        near = expected_overhead(g, baseline_nearest(g, p), p, 1)
        lin = expected_overhead(g, baseline_linear(g, p), p, 1)
        assert near == pytest.approx(
            math.log(1.5 + math.cos(math.pi / (2 * K))), abs=1e-9
        )
        assert lin == pytest.approx(
            math.log(
                (1.0 + 4.0 * math.cos(math.pi / (4 * K)) ** 2)
                / (4.0 * math.cos(math.pi / (4 * K)))
            ),
            abs=1e-9,
        )
        assert near > 0.15 and lin > 0.15
        assert overhead_bound(g, p) <= math.pi**2 / K**2


@given(
    K=st.integers(min_value=2, max_value=64),
    p=st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=200, deadline=None)
def test_rounding_distribution_properties(K, p):
    g = build_grid(K, PADDED)
    d = rounding_distribution(g, p)
    assert d.upper_index == d.lower_index + 1
    assert 0 <= d.lower_index <= len(g) - 2
    assert d.lower_mass >= 0.0 and d.upper_mass >= 0.0
    assert abs(d.lower_mass + d.upper_mass - 1.0) <= 1e-12
    clamped = min(max(p, float(g.points[0])), float(g.points[-1]))
    # support brackets the clamped input
    assert g.points[d.lower_index] <= clamped + 1e-15
    assert clamped <= g.points[d.upper_index] + 1e-15


@given(
    K=st.integers(min_value=2, max_value=32),
    frac=st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=150, deadline=None)
def test_actual_overhead_never_exceeds_bound(K, frac):
    g = build_grid(K, PADDED)
    p = float(g.points[0] + frac * (g.points[-1] - g.points[0]))
    b = overhead_bound(g, p)
    assert b >= -1e-15
    for y in (0, 1):
        assert actual_overhead(g, p, y) <= b + 1e-11
