"""Radial profiles as evaluator bundles."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DerivativeRequired

Evaluator = Callable[[np.ndarray], np.ndarray]

# Relative finite-difference step used when no analytic derivative exists.
FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class RadialFunction:
    """A function of ``r = |x|`` on ``(0, inf)``.

    ``decay_hint`` is the power ``s`` with ``u ~ r^s`` as ``r -> inf`` and
    ``origin_hint`` the power ``sigma`` with ``u'(r) ~ r^(sigma-1)`` as
    ``r -> 0``.  ``p_laplacian_at`` optionally evaluates
    ``-r^(1-N) (r^(N-1+alpha) |u'|^(p-2) u')'`` in closed form for the
    parameters the profile was built for.  ``nodes`` marks tabulated data.
    ``breakpoints`` lists radii where ``u'`` vanishes or ``u`` is not smooth;
    default grids place nodes there.
    """

    value_at: Evaluator
    derivative_at: Optional[Evaluator] = None
    second_derivative_at: Optional[Evaluator] = None
    decay_hint: Optional[float] = None
    origin_hint: Optional[float] = None
    p_laplacian_at: Optional[Evaluator] = None
    nodes: Optional[np.ndarray] = None
    label: str = ""
    breakpoints: Optional[Tuple[float, ...]] = None

    def value(self, r) -> np.ndarray:
        return np.asarray(self.value_at(np.asarray(r, dtype=float)), dtype=float)

    def derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.derivative_at is not None:
            return np.asarray(self.derivative_at(r), dtype=float)
        h = FD_REL_STEP * r
        return (self.value_at(r + h) - self.value_at(r - h)) / (2.0 * h)

    def second_derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.second_derivative_at is not None:
            return np.asarray(self.second_derivative_at(r), dtype=float)
        if self.derivative_at is None:
            raise DerivativeRequired("an analytic first derivative is required")
        h = FD_REL_STEP * r
        return (self.derivative_at(r + h) - self.derivative_at(r - h)) / (2.0 * h)

    @property
    def has_derivative(self) -> bool:
        return self.derivative_at is not None

    @property
    def tabulated(self) -> bool:
        return self.nodes is not None

    def scaled(self, c: float) -> "RadialFunction":
        c = float(c)
        d1, d2 = self.derivative_at, self.second_derivative_at
        return replace(
            self,
            value_at=lambda r: c * self.value_at(r),
            derivative_at=None if d1 is None else (lambda r: c * d1(r)),
            second_derivative_at=None if d2 is None else (lambda r: c * d2(r)),
            p_laplacian_at=None,
            label=f"{c:g}*{self.label}",
        )

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return combine([(1.0, self), (-1.0, other)])


def _slowest(values):
    if any(v is None for v in values):
        return None
    return max(values)


def combine(terms) -> RadialFunction:
    """Linear combination ``sum c_i f_i`` of radial functions."""
    terms = [(float(c), f) for c, f in terms]

    def val(r):
        return sum(c * f.value_at(r) for c, f in terms)

    d1 = None
    if all(f.derivative_at is not None for _, f in terms):
        def d1(r):
            return sum(c * f.derivative_at(r) for c, f in terms)

    d2 = None
    if all(f.second_derivative_at is not None for _, f in terms):
        def d2(r):
            return sum(c * f.second_derivative_at(r) for c, f in terms)

    nodes = next((f.nodes for _, f in terms if f.nodes is not None), None)
    origin = [f.origin_hint for _, f in terms]
    # zeros of the combined derivative are unknown; keep the parts' own
    bps = tuple(sorted({b for _, f in terms for b in (f.breakpoints or ())})) or None
    return RadialFunction(
        value_at=val,
        derivative_at=d1,
        second_derivative_at=d2,
        decay_hint=_slowest([f.decay_hint for _, f in terms]),
        origin_hint=None if any(o is None for o in origin) else min(origin),
        nodes=nodes,
        label="+".join(f"{c:g}*{f.label}" for c, f in terms),
        breakpoints=bps,
    )


def dilate(u: RadialFunction, lam: float, weight: float = 1.0) -> RadialFunction:
    """``r -> lam^weight * u(lam r)``."""
    lam = float(lam)
    s = lam**weight
    d1, d2 = u.derivative_at, u.second_derivative_at
    return RadialFunction(
        value_at=lambda r: s * u.value_at(lam * r),
        derivative_at=None if d1 is None else (lambda r: s * lam * d1(lam * r)),
        second_derivative_at=None if d2 is None else (lambda r: s * lam**2 * d2(lam * r)),
        decay_hint=u.decay_hint,
        origin_hint=u.origin_hint,
        nodes=None if u.nodes is None else u.nodes / lam,
        label=f"dilate({u.label},{lam:g})",
        breakpoints=None if u.breakpoints is None else tuple(b / lam for b in u.breakpoints),
    )
