"""Solution counts of ``b_{i_1}+...+b_{i_d} = b_{i_{d+1}}+...+b_{i_{2d}}``.

Three independent routes to the same exact integer:

* ``weights``: the sum of squared ordered multiplicities of the sumset;
* ``bruteforce``: equality tests over every ordered 2d-tuple (oracle only);
* ``dirichlet``: the mean of ``|f_N|**(2d)`` over one period, with
  ``f_N(t) = sum_j exp(2 pi i b_j t)``, obtained from the coefficients of
  ``(sum_j z**b_j)**d`` by exact big-integer multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import gmpy2
import numpy as np

from .errors import (
    BRUTEFORCE_LIMIT,
    DEFAULT_DEGREE_BUDGET,
    DomainError,
    ResourceError,
    budget,
)
from .sequences import ConvexSequence
from .sumset import WeightedSumset

_CHUNK = 2**22


@dataclass(frozen=True)
class EnergyReport:
    n: int
    d: int
    energy: int
    backend: str
    sequence_meta: dict = field(default_factory=dict, compare=False)
    # floating value before rounding, quadrature backend only
    raw: float | None = field(default=None, compare=False)


def _square_sum(weights: np.ndarray) -> int:
    if len(weights) == 0:
        return 0
    top = int(weights.max())
    if top * top * len(weights) < 2**63:
        return int(np.dot(weights.astype(np.int64), weights.astype(np.int64)))
    return sum(int(w) * int(w) for w in weights)


def energy_from_weights(ws: WeightedSumset) -> EnergyReport:
    return EnergyReport(ws.n, ws.d, _square_sum(ws.weights), "weights", dict(ws.source_meta))


def _tuple_sums(seq: ConvexSequence, d: int) -> np.ndarray:
    """Sum of every ordered d-tuple, in lexicographic index order."""
    arr = seq.array()
    if arr.dtype == object:
        return np.array([sum(t) for t in product(seq.values, repeat=d)], dtype=object)
    sums = np.zeros(1, dtype=np.int64)
    for _ in range(d):
        sums = (sums[:, None] + arr[None, :]).ravel()
    return sums


def energy_bruteforce(seq: ConvexSequence, d: int) -> EnergyReport:
    """Count the 2d-tuples satisfying the equation by testing each one.

    Deliberately naive: left and right d-sums are compared pairwise, no
    hashing or sorting.  Refuses ``N**(2d) > 10**8``.
    """
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    n = seq.n
    if n ** (2 * d) > BRUTEFORCE_LIMIT:
        raise ResourceError(
            f"brute force needs N^(2d) = {n ** (2 * d)} tuple tests (N={n}, d={d}), "
            f"over the hard limit {BRUTEFORCE_LIMIT}"
        )
    sums = _tuple_sums(seq, d)
    rows = max(1, _CHUNK // len(sums))
    count = 0
    for start in range(0, len(sums), rows):
        block = sums[start : start + rows]
        count += int(np.count_nonzero(block[:, None] == sums[None, :]))
    return EnergyReport(n, d, count, "bruteforce", dict(seq.meta))


def _require_integer(seq: ConvexSequence):
    if seq.scale != 1:
        raise DomainError(
            f"Dirichlet backend needs integer frequencies; sequence has scale {seq.scale}"
        )


def dirichlet_coefficients(seq: ConvexSequence, d: int, degree_budget: int | None = None):
    """Coefficients ``r(m)`` of ``(sum_j z**(b_j - b_1))**d``.

    Returns ``(offset, r)`` where ``r[m]`` counts ordered d-tuples with sum
    ``offset + m`` and ``offset = d * b_1``.  The polynomial is packed into a
    single integer (Kronecker substitution) and raised to the d-th power.
    """
    _require_integer(seq)
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    limit = budget(DEFAULT_DEGREE_BUDGET) if degree_budget is None else degree_budget
    lo = seq.values[0]
    shifts = [v - lo for v in seq.values]
    length = d * shifts[-1] + 1
    if length > limit:
        raise ResourceError(
            f"polynomial of degree {length - 1} (N={seq.n}, d={d}) exceeds the "
            f"degree budget {limit}; raise it with CE_BUDGET"
        )
    top = seq.n**d
    width = next((w for w in (1, 2, 4, 8) if top < 2 ** (8 * w)), None)
    if width is None:
        raise ResourceError(f"coefficients up to {top} do not fit 64 bits")
    packed = gmpy2.xmpz(0)
    for s in shifts:
        packed[8 * width * s] = 1
    power = gmpy2.mpz(packed) ** d
    raw = int(power).to_bytes(length * width, "little")
    return d * lo, np.frombuffer(raw, dtype=f"<u{width}").astype(np.int64)


def energy_dirichlet(seq: ConvexSequence, d: int, method: str = "exact") -> EnergyReport:
    """``int_0^1 |f_N(t)|**(2d) dt`` for an integer sequence.

    ``method="exact"`` sums the squared coefficients of the d-th power.
    ``method="quadrature"`` averages ``|f_N|**(2d)`` over ``2d*(b_N-b_1)+1``
    equispaced nodes with an FFT and rounds; the node count makes the
    quadrature exact for this trigonometric polynomial up to float error.
    """
    if method == "exact":
        _, coeffs = dirichlet_coefficients(seq, d)
        return EnergyReport(seq.n, d, _square_sum(coeffs), "dirichlet", dict(seq.meta))
    if method != "quadrature":
        raise DomainError(f"unknown Dirichlet method {method!r}")
    _require_integer(seq)
    lo = seq.values[0]
    nodes = 2 * d * (seq.values[-1] - lo) + 1
    if nodes > budget(DEFAULT_DEGREE_BUDGET):
        raise ResourceError(f"quadrature grid of {nodes} nodes exceeds the degree budget")
    spikes = np.zeros(nodes, dtype=np.float64)
    spikes[[v - lo for v in seq.values]] = 1.0
    magnitude = np.abs(np.fft.fft(spikes)) ** 2
    raw = float(np.mean(magnitude**d))
    return EnergyReport(seq.n, d, int(round(raw)), "dirichlet-quadrature", dict(seq.meta), raw)


@dataclass(frozen=True)
class ExponentFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    max_residual: float

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "points": [list(p) for p in self.points],
        }


def fit_exponent(points) -> ExponentFit:
    """Least-squares line through ``(log10 N, log10 value)``."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DomainError(f"an exponent fit needs at least 3 points, got {len(pts)}")
    xs = [p[0] for p in pts]
    if len(set(xs)) != len(xs):
        raise DomainError("fit points must have distinct N")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise DomainError("fit points must be positive")
    lx = np.log10(np.array(xs))
    ly = np.log10(np.array([p[1] for p in pts]))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    if not math.isfinite(slope):
        raise DomainError("fit slope is not finite")
    return ExponentFit(tuple(pts), float(slope), float(intercept), float(np.max(np.abs(resid))))
