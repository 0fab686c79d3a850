"""Risk lower-bound distributions for PAC-learnable hypothesis classes.

Two families of cumulative distribution functions over generalization loss
are provided, one for a finite hypothesis space of size ``|H|`` and one for
a class of finite VC dimension ``d``, both at a fixed i.i.d. sample size
``m``.  Each CDF is piecewise: zero below a cutoff, an exponential ramp
``1 - W * exp(-m * eps)`` on ``[cutoff, 1)``, and one at ``eps >= 1``.  The
envelope weight ``W`` is ``|H|`` in the finite case and ``(e*m/d)**d`` in
the VC case, so the cutoff (where the ramp leaves zero) is ``ln(W)/m``.

The jump at ``eps = 1`` is a genuine probability atom.  It is never folded
into the density; :func:`finite_h_point_mass` / :func:`vc_point_mass`
report it separately and the density functions refuse ``eps == 1``, so
every returned number stays finite.

All weight-bearing arithmetic runs in log space (``ln W`` is stored, never
``W``): finite hypothesis spaces of size ``3**n`` overflow floats long
before ``n`` reaches interesting values, while ``exp(ln W - m*eps)`` is
stable everywhere we evaluate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "BoundKind",
    "BoundSpec",
    "DiscreteDistribution",
    "bound_cdf",
    "bound_density",
    "bound_point_mass",
    "cutoff",
    "discretize_bound",
    "finite_h_cdf",
    "finite_h_density",
    "finite_h_point_mass",
    "sample_complexity_finite",
    "sample_complexity_vc",
    "vc_cdf",
    "vc_density",
    "vc_point_mass",
]


class BoundKind(Enum):
    """Which hypothesis-class capacity measure a bound is built from."""

    FINITE_H = "finite_h"
    FINITE_VC = "finite_vc"


@dataclass(frozen=True)
class BoundSpec:
    """Parameters of one theoretical bound: capacity plus sample size.

    ``log_h_size`` is ``ln|H|`` (finite case only); ``vc_dim`` is ``d``
    (VC case only).  Build instances through :meth:`finite_h` or
    :meth:`finite_vc` rather than the raw constructor.
    """

    kind: BoundKind
    m: int
    log_h_size: float = 0.0
    vc_dim: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"sample size m must be a positive integer, got {self.m!r}")
        if self.kind is BoundKind.FINITE_H:
            if not math.isfinite(self.log_h_size) or self.log_h_size < 0.0:
                raise ValueError("finite-H bound needs ln|H| >= 0 (|H| >= 1)")
        elif self.kind is BoundKind.FINITE_VC:
            if not isinstance(self.vc_dim, int) or self.vc_dim < 1:
                raise ValueError(f"VC dimension must be a positive integer, got {self.vc_dim!r}")
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown bound kind {self.kind!r}")

    @classmethod
    def finite_h(cls, m: int, h_size: float | None = None, *, log_h_size: float | None = None) -> BoundSpec:
        """Finite-|H| bound; pass the cardinality or its natural log."""
        if (h_size is None) == (log_h_size is None):
            raise ValueError("provide exactly one of h_size or log_h_size")
        if log_h_size is None:
            if h_size < 1:
                raise ValueError(f"|H| must be >= 1, got {h_size!r}")
            log_h_size = math.log(h_size)
        return cls(kind=BoundKind.FINITE_H, m=m, log_h_size=float(log_h_size))

    @classmethod
    def finite_vc(cls, m: int, vc_dim: int) -> BoundSpec:
        """Finite-VC-dimension bound."""
        return cls(kind=BoundKind.FINITE_VC, m=m, vc_dim=vc_dim)

    def log_weight(self) -> float:
        """ln of the envelope weight: ln|H|, or d*ln(e*m/d) for the VC case."""
        if self.kind is BoundKind.FINITE_H:
            return self.log_h_size
        d = self.vc_dim
        return d * (1.0 + math.log(self.m) - math.log(d))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability masses on equal-width loss slots partitioning [0, 1].

    Slot ``i`` covers ``[i/l, (i+1)/l)`` except the last slot, which is
    closed at 1.0 so that a loss of exactly one has a home.
    """

    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.masses) < 2:
            raise ValueError("need at least 2 slots")
        if any(mass < 0.0 for mass in self.masses):
            raise ValueError("slot masses must be non-negative")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"slot masses must sum to 1 (got {total!r})")

    @property
    def num_slots(self) -> int:
        return len(self.masses)

    def slot_bounds(self, i: int) -> tuple[float, float]:
        """(lower, upper) edge of slot ``i``."""
        ell = self.num_slots
        if not 0 <= i < ell:
            raise IndexError(i)
        return i / ell, (i + 1) / ell

    def slot_midpoint(self, i: int) -> float:
        return (i + 0.5) / self.num_slots


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _piecewise_cdf(log_weight: float, m: int, eps: float) -> float:
    if eps >= 1.0:
        return 1.0
    if eps < log_weight / m:
        return 0.0
    return _clamp01(1.0 - math.exp(log_weight - m * eps))


def _piecewise_density(log_weight: float, m: int, eps: float) -> float:
    if eps == 1.0:
        raise ValueError("density undefined at eps=1: the atom there is reported by the point-mass accessor")
    if eps < log_weight / m or eps > 1.0:
        return 0.0
    return math.exp(log_weight + math.log(m) - m * eps)


def _atom_weight(log_weight: float, m: int) -> float:
    return _clamp01(math.exp(min(log_weight - m, 0.0)))


def _require_kind(spec: BoundSpec, kind: BoundKind) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} bound, got {spec.kind.value}")


def cutoff(spec: BoundSpec) -> float:
    """Loss value where the CDF leaves zero: ln(W)/m."""
    return spec.log_weight() / spec.m


def finite_h_cdf(spec: BoundSpec, eps: float) -> float:
    """P(loss <= eps) lower bound for a finite hypothesis space.

    Zero below ``ln|H|/m``, then ``1 - |H|*exp(-m*eps)`` up to 1, then 1.
    The ramp is evaluated as ``1 - exp(ln|H| - m*eps)`` and clamped to
    [0, 1].
    """
    _require_kind(spec, BoundKind.FINITE_H)
    return _piecewise_cdf(spec.log_h_size, spec.m, eps)


def finite_h_point_mass(spec: BoundSpec) -> float:
    """Probability atom at loss 1: ``|H|*exp(-m)`` clamped to [0, 1]."""
    _require_kind(spec, BoundKind.FINITE_H)
    return _atom_weight(spec.log_h_size, spec.m)


def finite_h_density(spec: BoundSpec, eps: float) -> float:
    """Continuous density ``|H|*m*exp(-m*eps)`` on [cutoff, 1), else 0.

    Raises ValueError at ``eps == 1`` exactly; the atom there is not a
    density and must be read from :func:`finite_h_point_mass`.
    """
    _require_kind(spec, BoundKind.FINITE_H)
    return _piecewise_density(spec.log_h_size, spec.m, eps)


def vc_cdf(spec: BoundSpec, eps: float) -> float:
    """P(loss <= eps) lower bound for a class of VC dimension d.

    Same shape as the finite case with weight ``(e*m/d)**d``: zero below
    ``(d/m)*ln(e*m/d)``, then ``1 - (e*m/d)**d * exp(-m*eps)``, then 1.
    """
    _require_kind(spec, BoundKind.FINITE_VC)
    return _piecewise_cdf(spec.log_weight(), spec.m, eps)


def vc_point_mass(spec: BoundSpec) -> float:
    """Probability atom at loss 1: ``(e*m/d)**d * exp(-m)`` clamped to [0, 1]."""
    _require_kind(spec, BoundKind.FINITE_VC)
    return _atom_weight(spec.log_weight(), spec.m)


def vc_density(spec: BoundSpec, eps: float) -> float:
    """Continuous density ``(e*m/d)**d * m * exp(-m*eps)`` on [cutoff, 1)."""
    _require_kind(spec, BoundKind.FINITE_VC)
    return _piecewise_density(spec.log_weight(), spec.m, eps)


def bound_cdf(spec: BoundSpec, eps: float) -> float:
    """Kind-dispatching CDF."""
    return _piecewise_cdf(spec.log_weight(), spec.m, eps)


def bound_density(spec: BoundSpec, eps: float) -> float:
    """Kind-dispatching continuous density (refuses eps=1)."""
    return _piecewise_density(spec.log_weight(), spec.m, eps)


def bound_point_mass(spec: BoundSpec) -> float:
    """Kind-dispatching atom weight at loss 1."""
    return _atom_weight(spec.log_weight(), spec.m)


def sample_complexity_finite(h_size: float, eps: float, delta: float) -> int:
    """Samples sufficient for a finite class: ``ceil(ln(|H|/delta)/eps)``."""
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("eps and delta must lie in (0, 1)")
    if h_size < 1:
        raise ValueError(f"|H| must be >= 1, got {h_size!r}")
    return math.ceil((math.log(h_size) - math.log(delta)) / eps)


def sample_complexity_vc(vc_dim: int, eps: float, delta: float, max_iterations: int = 10_000) -> int:
    """Samples sufficient for a VC-d class, from the self-referential bound.

    The target ``m = ceil(ln((e*m/d)**d / delta) / eps)`` mentions m on
    both sides, so we iterate ``m <- ceil((d*ln(e*m/d) + ln(1/delta))/eps)``
    from ``m = d``.  The map is non-decreasing in m with logarithmic
    growth, so the iteration converges monotonically to a fixed point;
    the cap exists as a hard failure signal, not a tuning knob.
    """
    if not 0.0 < eps < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("eps and delta must lie in (0, 1)")
    if vc_dim < 1:
        raise ValueError(f"VC dimension must be >= 1, got {vc_dim!r}")
    d = vc_dim
    m = d
    for _ in range(max_iterations):
        m_next = math.ceil((d * (1.0 + math.log(m) - math.log(d)) - math.log(delta)) / eps)
        m_next = max(m_next, 1)
        if m_next == m:
            return m
        m = m_next
    raise RuntimeError(f"sample-complexity iteration did not stabilize within {max_iterations} steps")


def discretize_bound(spec: BoundSpec, num_slots: int) -> DiscreteDistribution:
    """Slice a bound CDF into ``num_slots`` equal-width loss slots.

    Slot i receives ``CDF((i+1)/l) - CDF(i/l)``; because ``CDF(1) = 1``
    includes the atom at loss 1, the final (upper-closed) slot picks up
    the point mass on top of its continuous share.  Monotonicity of the
    CDF makes every mass non-negative, and the telescoping sum is 1.
    """
    if num_slots < 2:
        raise ValueError("need at least 2 slots")
    log_w = spec.log_weight()
    edges = [_piecewise_cdf(log_w, spec.m, i / num_slots) for i in range(num_slots + 1)]
    masses = tuple(edges[i + 1] - edges[i] for i in range(num_slots))
    return DiscreteDistribution(masses)
