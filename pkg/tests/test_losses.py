import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calreg.losses import (
    bregman,
    bregman_characterization,
    catalog,
    get_loss,
    kl_bernoulli,
    log_loss,
    loss_from_univariate,
    loss_value,
    spherical_loss,
    squared_loss,
    tsallis_loss,
    univariate_second_derivative,
    univariate_value,
)

SQ = squared_loss()
LOG = log_loss()
SPH = spherical_loss()
TS2 = tsallis_loss(2.0)
TS15 = tsallis_loss(1.5)

INTERIOR = np.linspace(0.0, 1.0, 103)[1:-1]


def test_loss_value_squared():
    assert loss_value(SQ, 0.25, 1) == pytest.approx(0.5625, abs=1e-15)
    assert loss_value(SQ, 0.25, 0) == pytest.approx(0.0625, abs=1e-15)


def test_loss_value_log():
    assert loss_value(LOG, 0.5, 0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert loss_value(LOG, 0.5, 1) == pytest.approx(math.log(2.0), abs=1e-15)


def test_loss_value_spherical():
    assert loss_value(SPH, 0.6, 1) == pytest.approx(-0.8320502943378437, abs=1e-15)


def test_log_endpoint_losing_outcome_is_domain_error():
    with pytest.raises(ValueError):
        loss_value(LOG, 0.0, 1)
    with pytest.raises(ValueError):
        loss_value(LOG, 1.0, 0)
    # winning outcome at the endpoint is the exact limit, zero
    assert loss_value(LOG, 0.0, 0) == 0.0
    assert loss_value(LOG, 1.0, 1) == 0.0


def test_loss_value_rejects_bad_args():
    with pytest.raises(ValueError):
        loss_value(SQ, 0.5, 2)
    with pytest.raises(ValueError):
        loss_value(SQ, 1.5, 1)


def test_univariate_values():
    assert univariate_value(SQ, 0.3) == pytest.approx(0.21, abs=1e-15)
    assert univariate_value(LOG, 0.5) == pytest.approx(math.log(2.0), abs=1e-15)
    assert univariate_value(LOG, 0.0) == 0.0
    assert univariate_value(LOG, 1.0) == 0.0
    ts2_c1 = tsallis_loss(2.0, c=1.0)
    assert univariate_value(ts2_c1, 0.4) == pytest.approx(-0.16, abs=1e-15)


def test_univariate_matches_expectation_decomposition():
    for loss in (SQ, SPH, TS2, TS15):
        for p in INTERIOR[::10]:
            expect = p * loss_value(loss, p, 1) + (1 - p) * loss_value(loss, p, 0)
            assert univariate_value(loss, p) == pytest.approx(expect, abs=1e-12)


def test_second_derivatives():
    assert univariate_second_derivative(SQ, 0.123) == -2.0
    assert univariate_second_derivative(LOG, 0.25) == pytest.approx(-16.0 / 3.0, abs=1e-12)
    assert univariate_second_derivative(SPH, 0.5) == pytest.approx(
        -2.0 * math.sqrt(2.0), abs=1e-12
    )


def test_second_derivative_finite_difference_path():
    wrapped = loss_from_univariate(
        lambda p: -p * math.log(p) - (1 - p) * math.log(1 - p) if 0 < p < 1 else 0.0,
        lambda p: math.log(1 - p) - math.log(p),
    )
    for p in (0.2, 0.5, 0.77):
        got = univariate_second_derivative(wrapped, p)
        want = -1.0 / (p * (1.0 - p))
        assert got == pytest.approx(want, rel=1e-4)


def test_bregman_values():
    assert bregman(SQ, 0.5, 0.25) == pytest.approx(0.0625, abs=1e-15)
    assert bregman(LOG, 0.5, 0.5) == 0.0
    assert bregman(LOG, 0.5, 0.25) == pytest.approx(0.14384103622589042, abs=1e-14)


def test_bregman_log_endpoint_second_argument_raises():
    with pytest.raises(ValueError):
        bregman(LOG, 0.5, 0.0)
    with pytest.raises(ValueError):
        bregman(LOG, 0.5, 1.0)


def test_kl_bernoulli_values():
    assert kl_bernoulli(0.3, 0.3) == 0.0
    assert kl_bernoulli(1.0, 0.75) == pytest.approx(math.log(4.0 / 3.0), abs=1e-15)
    assert kl_bernoulli(0.0, 0.75) == pytest.approx(math.log(4.0), abs=1e-15)
    assert kl_bernoulli(0.5, 0.25) == pytest.approx(0.14384103622589042, abs=1e-14)
    with pytest.raises(ValueError):
        kl_bernoulli(0.5, 0.0)
    with pytest.raises(ValueError):
        kl_bernoulli(0.5, 1.0)
    with pytest.raises(ValueError):
        kl_bernoulli(-0.1, 0.5)


def test_loss_from_univariate_reconstructs_squared():
    wrapped = loss_from_univariate(lambda p: p - p * p, lambda p: 1.0 - 2.0 * p)
    for p in np.linspace(0.0, 1.0, 101):
        for y in (0, 1):
            assert loss_value(wrapped, p, y) == pytest.approx(
                loss_value(SQ, p, y), abs=1e-12
            )


def test_loss_from_univariate_reconstructs_log():
    wrapped = loss_from_univariate(
        lambda p: -p * math.log(p) - (1 - p) * math.log(1 - p) if 0 < p < 1 else 0.0,
        lambda p: math.log(1 - p) - math.log(p),
    )
    for p in INTERIOR[::5]:
        for y in (0, 1):
            assert loss_value(wrapped, p, y) == pytest.approx(
                loss_value(LOG, p, y), abs=1e-12
            )


def test_loss_from_univariate_rejects_convex():
    with pytest.raises(ValueError):
        loss_from_univariate(lambda p: p * p, lambda p: 2.0 * p)


def test_bregman_nonneg_and_zero_on_diagonal():
    sweep = np.linspace(0.0, 1.0, 103)[1:-1]
    for loss in (SQ, LOG, SPH, TS2, TS15):
        for p_hat in sweep[::4]:
            for p in sweep[::4]:
                v = bregman(loss, p_hat, p)
                assert v >= -1e-15
        for p in sweep[::4]:
            assert abs(bregman(loss, p, p)) <= 1e-15


def test_closed_forms_match_characterization():
    # squared and log carry closed-form divergences; the generic formula is
    # the oracle for both
    for p_hat in INTERIOR[::7]:
        for p in INTERIOR[::7]:
            for loss in (SQ, LOG):
                assert bregman(loss, p_hat, p) == pytest.approx(
                    bregman_characterization(loss, p_hat, p), abs=1e-12
                )


def test_log_bregman_is_bernoulli_kl():
    for p_hat in INTERIOR[::3]:
        for p in INTERIOR[::3]:
            assert abs(bregman(LOG, p_hat, p) - kl_bernoulli(p_hat, p)) <= 1e-12


def test_squared_bregman_is_squared_distance():
    for p_hat in INTERIOR[::3]:
        for p in INTERIOR[::3]:
            assert bregman(SQ, p_hat, p) == (p_hat - p) ** 2


def test_smooth_losses_dominated_by_squared_distance():
    # G-smooth univariate forms give BREG <= (G/2)(p_hat - p)^2
    for loss in (SQ, SPH, TS2):
        G = loss.smoothness_bound_G
        assert G is not None
        for p_hat in INTERIOR[::3]:
            for p in INTERIOR[::3]:
                assert bregman(loss, p_hat, p) <= 0.5 * G * (p_hat - p) ** 2 + 1e-12


# sweep maxima of bregman/kl over the interior; both suprema are attained in
# the diagonal limit so finer sweeps stay below them
KL_RATIO_SPHERICAL = 1.0 / math.sqrt(2.0)
KL_RATIO_TSALLIS15 = math.sqrt(3.0) / 6.0


def test_kl_domination_recorded_constants():
    fine = np.linspace(0.0, 1.0, 203)[1:-1]
    for loss, c_ell in ((SPH, KL_RATIO_SPHERICAL), (TS15, KL_RATIO_TSALLIS15)):
        for p_hat in fine:
            for p in fine[::2]:
                if p_hat == p:
                    continue
                ratio = bregman(loss, p_hat, p) / kl_bernoulli(p_hat, p)
                assert ratio <= c_ell * (1.0 + 1e-9)


def test_pinsker():
    qs = np.linspace(0.0, 1.0, 101)
    for q in qs:
        for p in INTERIOR[::3]:
            assert kl_bernoulli(q, p) >= (q - p) ** 2 - 1e-15


def test_bounded_catalog_losses_stay_in_unit_band():
    for name, loss in catalog().items():
        if not loss.bounded:
            continue
        for p in np.linspace(0.0, 1.0, 101):
            for y in (0, 1):
                assert abs(loss_value(loss, p, y)) <= 1.0 + 1e-12, (name, p, y)


def test_properness_on_sweep():
    ps = INTERIOR[::5]
    for loss in (SQ, LOG, SPH, TS2, TS15):
        for p in ps:
            truthful = p * loss_value(loss, p, 1) + (1 - p) * loss_value(loss, p, 0)
            for p_alt in ps:
                other = p * loss_value(loss, p_alt, 1) + (1 - p) * loss_value(
                    loss, p_alt, 0
                )
                assert truthful <= other + 1e-12


def test_tsallis_default_c():
    assert tsallis_loss(2.0).name == "tsallis2"
    # default c = 1/max(1, alpha-1): sweep max of |loss| sits at p = 1
    for alpha, want in ((1.5, 1.0), (2.0, 1.0), (3.0, 0.5), (4.0, 1.0 / 3.0)):
        loss = tsallis_loss(alpha)
        assert loss_value(loss, 1.0, 0) == pytest.approx(
            want * (alpha - 1.0), rel=1e-9
        )
    with pytest.raises(ValueError):
        tsallis_loss(1.0)
    with pytest.raises(ValueError):
        tsallis_loss(2.0, c=-1.0)


def test_tsallis_smoothness_bound_only_at_alpha_ge_2():
    assert tsallis_loss(2.0).smoothness_bound_G == pytest.approx(2.0)
    assert tsallis_loss(1.5).smoothness_bound_G is None


def test_catalog_lookup():
    assert set(catalog()) == {"squared", "log", "spherical", "tsallis2", "tsallis1.5"}
    assert get_loss("squared").name == "squared"
    with pytest.raises(ValueError):
        get_loss("hinge")


@given(
    p_hat=st.floats(min_value=0.001, max_value=0.999),
    p=st.floats(min_value=0.001, max_value=0.999),
)
@settings(max_examples=200, deadline=None)
def test_bregman_nonneg_property(p_hat, p):
    for loss in (SQ, LOG, SPH, TS2, TS15):
        assert bregman(loss, p_hat, p) >= -1e-13


@given(
    q=st.floats(min_value=0.0, max_value=1.0),
    p=st.floats(min_value=0.001, max_value=0.999),
)
@settings(max_examples=200, deadline=None)
def test_kl_nonneg_and_pinsker_property(q, p):
    v = kl_bernoulli(q, p)
    assert v >= (q - p) ** 2 - 1e-12
