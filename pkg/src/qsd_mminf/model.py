"""Queue parameters, generator entries and the unit-service-rate time change."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class ModelParams:
    """Arrival rate ``a`` and per-customer service rate ``q`` of the absorbed M/M/inf queue.

    Instances are validated on construction and immutable afterwards.
    """

    a: float
    q: float

    def __post_init__(self):
        for name in ("a", "q"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParameterError(name, f"expected a real number, got {value!r}") from None
            if not math.isfinite(value) or value <= 0.0:
                raise ParameterError(name, f"must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def ratio(self) -> float:
        """a / q, the only combination the characteristic equations depend on."""
        return self.a / self.q


@dataclass(frozen=True)
class GeneratorEntry:
    from_state: int
    to_state: int
    rate: float


def validate(a, q) -> ModelParams:
    return ModelParams(a, q)


def rate_out_of(params: ModelParams, i: int) -> float:
    """Total exit rate a + i*q of state ``i``; zero for the absorbing state."""
    if i < 0:
        raise ValueError(f"state index must be >= 0, got {i}")
    if i == 0:
        return 0.0
    return params.a + i * params.q


def generator_entry(params: ModelParams, i: int, j: int) -> GeneratorEntry:
    """Entry Q[i, j] of the rate matrix, with the diagonal stored as a negative rate."""
    if i < 0 or j < 0:
        raise ValueError("state indices must be >= 0")
    if i == 0:
        rate = 0.0
    elif j == i + 1:
        rate = params.a
    elif j == i - 1:
        rate = i * params.q
    elif j == i:
        rate = -rate_out_of(params, i)
    else:
        rate = 0.0
    return GeneratorEntry(i, j, rate)


def normalize(params: ModelParams) -> tuple[ModelParams, float]:
    """Rescale time so that the service rate is one.

    Returns the normalized parameters ``(a/q, 1)`` and the scale factor ``q``.
    An absorption time T of the original chain maps to ``q*T`` in the
    normalized one, and a rate theta of the normalized chain maps back to
    ``theta*q``.
    """
    return ModelParams(params.a / params.q, 1.0), params.q
