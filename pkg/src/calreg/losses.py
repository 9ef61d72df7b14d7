"""Proper losses for binary outcomes.

Every proper loss here is described by its concave univariate form f and the
characterization ``loss(p, y) = f(p) + f'(p) * (y - p)``.  The catalog covers
the squared, log, spherical and Tsallis families; arbitrary concave univariate
forms can be wrapped via :func:`loss_from_univariate`.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

Univariate = Callable[[float], float]


@dataclass(frozen=True)
class LossSpec:
    """A proper loss plus the analytic extras needed by the metrics layer.

    Attributes:
        name: stable identifier used in reports and CLI flags.
        f: concave univariate form, f(p) = E_{y~p} loss(p, y).
        f_prime: derivative of f.
        f_second: analytic second derivative when known, else None.
        smoothness_bound_G: sup |f''| over (0,1) when finite, else None.
        bounded: True when loss(p, y) stays within [-1, 1].
        endpoint_domain_error: True when a boundary p with the losing label
            is a domain error (the log loss).
    """

    name: str
    f: Univariate
    f_prime: Univariate
    f_second: Univariate | None = None
    smoothness_bound_G: float | None = None
    bounded: bool = True
    endpoint_domain_error: bool = False
    # Closed-form Bregman divergence when one is known; the generic
    # characterization formula is used otherwise and serves as the
    # cross-check oracle either way.
    bregman_closed_form: Callable[[float, float], float] | None = field(
        default=None, repr=False
    )


def loss_value(loss: LossSpec, p: float, y: int) -> float:
    """Pointwise loss of predicting probability p against outcome y."""
    if y not in (0, 1):
        raise ValueError(f"binary outcome expected, got {y!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability expected, got {p!r}")
    if loss.endpoint_domain_error and p in (0.0, 1.0):
        if (p == 0.0 and y == 1) or (p == 1.0 and y == 0):
            raise ValueError(
                f"{loss.name}: p={p} with losing outcome y={y} has infinite loss"
            )
        return 0.0  # winning-outcome endpoint, exact limit of the loss
    return loss.f(p) + loss.f_prime(p) * (y - p)


def univariate_value(loss: LossSpec, p: float) -> float:
    """f(p) = p*loss(p,1) + (1-p)*loss(p,0)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability expected, got {p!r}")
    return loss.f(p)


def univariate_second_derivative(loss: LossSpec, p: float) -> float:
    """Analytic f'' for catalog losses, central difference otherwise.

    The finite-difference step is h = 1e-5; callers comparing against an
    analytic value should allow a relative tolerance of about 1e-4.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"interior probability expected, got {p!r}")
    if loss.f_second is not None:
        return loss.f_second(p)
    h = 1e-5
    lo = max(p - h, 0.0)
    hi = min(p + h, 1.0)
    # symmetric step shrunk near the boundary so evaluations stay in [0,1]
    step = min(p - lo, hi - p)
    return (loss.f(p + step) - 2.0 * loss.f(p) + loss.f(p - step)) / step**2


def bregman(loss: LossSpec, p_hat: float, p: float) -> float:
    """Bregman divergence of -f between p_hat and p.

    BREG(p_hat, p) = -f(p_hat) + f(p) + f'(p) * (p_hat - p).  For the log
    loss this is the Bernoulli KL divergence and for the squared loss it is
    (p_hat - p)^2; those closed forms are used directly when available.
    """
    if loss.endpoint_domain_error and not 0.0 < p < 1.0:
        raise ValueError(f"{loss.name}: second argument must be interior, got {p!r}")
    if loss.bregman_closed_form is not None:
        return loss.bregman_closed_form(p_hat, p)
    return bregman_characterization(loss, p_hat, p)


def bregman_characterization(loss: LossSpec, p_hat: float, p: float) -> float:
    """The generic formula -f(p_hat) + f(p) + f'(p)(p_hat - p).

    Kept separate so closed-form divergences can be cross-checked against it.
    """
    return -loss.f(p_hat) + loss.f(p) + loss.f_prime(p) * (p_hat - p)


def kl_bernoulli(q: float, p: float) -> float:
    """KL divergence between Bernoulli(q) and Bernoulli(p), natural log.

    Conventions: 0*ln 0 = 0, so KL(0, p) = -ln(1-p) and KL(1, p) = -ln p.
    The second argument must be interior.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"kl_bernoulli: p must be in (0,1), got {p!r}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"kl_bernoulli: q must be in [0,1], got {q!r}")
    out = 0.0
    if q > 0.0:
        out += q * (math.log(q) - math.log(p))
    if q < 1.0:
        out += (1.0 - q) * (math.log(1.0 - q) - math.log(1.0 - p))
    return out


_CONCAVITY_SWEEP = 1001
_CONCAVITY_SLACK = 1e-12


def loss_from_univariate(f: Univariate, f_prime: Univariate, name: str = "custom") -> LossSpec:
    """Wrap a caller-supplied concave univariate form as a LossSpec.

    Concavity is checked numerically by a midpoint sweep over 1001 points;
    a convex or wiggly f is rejected.  The derivative is taken on trust (no
    symbolic differentiation), which keeps the characterization honest.
    """
    xs = [i / (_CONCAVITY_SWEEP - 1) for i in range(_CONCAVITY_SWEEP)]
    vals = [f(x) for x in xs]
    scale = max(1.0, max(abs(v) for v in vals))
    for i in range(1, len(xs) - 1):
        if vals[i] < 0.5 * (vals[i - 1] + vals[i + 1]) - _CONCAVITY_SLACK * scale:
            raise ValueError(
                "loss_from_univariate: f fails the midpoint concavity sweep "
                f"near p={xs[i]:.4f}"
            )
    return LossSpec(name=name, f=f, f_prime=f_prime)


# ---------------------------------------------------------------------------
# catalog


def _entropy(p: float) -> float:
    out = 0.0
    if p > 0.0:
        out -= p * math.log(p)
    if p < 1.0:
        out -= (1.0 - p) * math.log(1.0 - p)
    return out


def squared_loss() -> LossSpec:
    """loss(p, y) = (p - y)^2, univariate form f(p) = p - p^2."""
    return LossSpec(
        name="squared",
        f=lambda p: p - p * p,
        f_prime=lambda p: 1.0 - 2.0 * p,
        f_second=lambda p: -2.0,
        smoothness_bound_G=2.0,
        bregman_closed_form=lambda p_hat, p: (p_hat - p) ** 2,
    )


def log_loss() -> LossSpec:
    """loss(p, y) = -y ln p - (1-y) ln(1-p); univariate form is the entropy.

    The univariate value at p in {0, 1} is 0 by continuity; the pointwise
    loss at a boundary with the losing label is a domain error.
    """
    return LossSpec(
        name="log",
        f=_entropy,
        f_prime=lambda p: math.log(1.0 - p) - math.log(p),
        f_second=lambda p: -1.0 / (p * (1.0 - p)),
        smoothness_bound_G=None,
        bounded=False,
        endpoint_domain_error=True,
        bregman_closed_form=kl_bernoulli,
    )


def spherical_loss() -> LossSpec:
    """loss(p, y) = -(p*y + (1-p)(1-y)) / sqrt(p^2 + (1-p)^2)."""
    norm = lambda p: math.sqrt(p * p + (1.0 - p) * (1.0 - p))
    return LossSpec(
        name="spherical",
        f=lambda p: -norm(p),
        f_prime=lambda p: -(2.0 * p - 1.0) / norm(p),
        f_second=lambda p: -norm(p) ** -3,
        smoothness_bound_G=2.0 * math.sqrt(2.0),  # sup |f''| at p = 1/2
    )


_TSALLIS_C_SWEEP = 1001


def _tsallis_default_c(alpha: float) -> float:
    """Largest c keeping |loss(p, y)| <= 1, found by the same sweep the
    boundedness invariant tests use.  The sweep max sits at p = 1, so the
    sweep value is exact."""
    worst = 0.0
    for i in range(_TSALLIS_C_SWEEP):
        p = i / (_TSALLIS_C_SWEEP - 1)
        for y in (0.0, 1.0):
            val = abs((alpha - 1.0) * p**alpha - alpha * p ** (alpha - 1.0) * y)
            worst = max(worst, val)
    return 1.0 / worst


def tsallis_loss(alpha: float, c: float | None = None) -> LossSpec:
    """Tsallis family: loss(p, y) = c(alpha-1) p^alpha - alpha c p^(alpha-1) y.

    Requires alpha > 1.  When c is omitted it defaults to the largest value
    keeping the loss within [-1, 1], which is 1/max(1, alpha-1).
    """
    if alpha <= 1.0:
        raise ValueError(f"tsallis_loss: alpha must exceed 1, got {alpha!r}")
    if c is None:
        c = _tsallis_default_c(alpha)
    elif c <= 0.0:
        raise ValueError(f"tsallis_loss: c must be positive, got {c!r}")
    G = c * alpha * (alpha - 1.0) if alpha >= 2.0 else None  # sup|f''| at p=1
    return LossSpec(
        name=f"tsallis{alpha:g}",
        f=lambda p: -c * p**alpha,
        f_prime=lambda p: -c * alpha * p ** (alpha - 1.0),
        f_second=lambda p: -c * alpha * (alpha - 1.0) * p ** (alpha - 2.0)
        if p > 0.0
        else float("-inf"),
        smoothness_bound_G=G,
        bounded=c * max(1.0, alpha - 1.0) <= 1.0 + 1e-12,
    )


def catalog() -> dict[str, LossSpec]:
    """Losses addressable by name from configs and the CLI."""
    return {
        "squared": squared_loss(),
        "log": log_loss(),
        "spherical": spherical_loss(),
        "tsallis2": tsallis_loss(2.0),
        "tsallis1.5": tsallis_loss(1.5),
    }


def get_loss(name: str) -> LossSpec:
    losses = catalog()
    if name not in losses:
        raise ValueError(
            f"unknown loss {name!r}; available: {', '.join(sorted(losses))}"
        )
    return losses[name]
