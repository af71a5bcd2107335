"""d-fold sumsets with ordered-tuple multiplicities.

``C_{j+1} = C_j + B`` is built one fold at a time, so memory tracks the
size of the partial sumset rather than ``N**d``.  Multiplicities are
ordered counts: ``sum(weights) == N**d`` exactly.  Dividing by ``d!``
(the symmetric normalisation) is available for display only.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DEFAULT_WORK_BUDGET, DomainError, ResourceError, budget
from .sequences import ConvexSequence

_INT64_SAFE = 2**62
# Dense accumulation is used when the key span is at most this long and not
# much sparser than the number of pairs being merged.
_DENSE_MAX_SPAN = 2**26
_DENSE_SPARSITY = 64
_SORT_CHUNK = 2**23


@dataclass(frozen=True, eq=False)
class WeightedSumset:
    """The sumset ``C_d`` of a sequence with ordered multiplicities.

    ``values`` is strictly ascending (int64, or object dtype for big
    integers) and ``weights[i]`` is the number of ordered index tuples whose
    sum is ``values[i]``.  Values carry the source sequence's ``scale``.
    """

    d: int
    n: int
    values: np.ndarray
    weights: np.ndarray
    scale: int = 1
    source_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self):
        return len(self.values)

    @property
    def cardinality(self) -> int:
        return len(self.values)

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @property
    def max_weight(self) -> int:
        return int(self.weights.max())

    @property
    def entries(self) -> dict[int, int]:
        return {int(v): int(w) for v, w in zip(self.values, self.weights)}

    def weight(self, value) -> int:
        i = int(np.searchsorted(self.values, value))
        if i < len(self.values) and self.values[i] == value:
            return int(self.weights[i])
        return 0

    def symmetric_weights(self) -> list[Fraction]:
        """Weights divided by ``d!``; non-integral where tuples repeat an index."""
        f = math.factorial(self.d)
        return [Fraction(int(w), f) for w in self.weights]

    def to_csv(self, symmetric=False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "multiplicity"])
        if symmetric:
            for v, w in zip(self.values, self.symmetric_weights()):
                writer.writerow([int(v), str(w)])
        else:
            for v, w in zip(self.values, self.weights):
                writer.writerow([int(v), int(w)])
        return buf.getvalue()


def _fits_int64(lo, hi) -> bool:
    return -_INT64_SAFE < lo and hi < _INT64_SAFE


def _fold_int64(values, weights, base, wdtype):
    pairs = len(values) * len(base)
    lo = int(values[0]) + int(base[0])
    span = int(values[-1]) + int(base[-1]) - lo + 1
    if span <= _DENSE_MAX_SPAN and span <= _DENSE_SPARSITY * pairs + 1024:
        acc = np.zeros(span, dtype=wdtype)
        offsets = values - values[0]
        for b in base - base[0]:
            # offsets are distinct, so buffered fancy-index addition is exact
            acc[offsets + b] += weights
        keys = np.flatnonzero(acc)
        return keys.astype(np.int64) + lo, acc[keys].astype(np.int64)

    out_v = out_w = None
    step = max(1, _SORT_CHUNK // len(values))
    for start in range(0, len(base), step):
        chunk = base[start : start + step]
        sums = (values[:, None] + chunk[None, :]).ravel()
        reps = np.repeat(weights, len(chunk))
        if out_v is not None:
            sums = np.concatenate([out_v, sums])
            reps = np.concatenate([out_w, reps])
        order = np.argsort(sums, kind="stable")
        sums = sums[order]
        reps = reps[order]
        starts = np.flatnonzero(np.r_[True, sums[1:] != sums[:-1]])
        out_v = sums[starts]
        out_w = np.add.reduceat(reps, starts)
    return out_v, out_w


def _fold_object(values, weights, base):
    acc: Counter = Counter()
    base = [int(b) for b in base]
    for v, w in zip(values, weights):
        v = int(v)
        w = int(w)
        for b in base:
            acc[v + b] += w
    keys = sorted(acc)
    return np.array(keys, dtype=object), np.array([acc[k] for k in keys], dtype=np.int64)


def build_weighted_sumset(seq: ConvexSequence, d: int, work_budget: int | None = None) -> WeightedSumset:
    """Fold ``d`` copies of the sequence, merging equal sums exactly.

    Each pass merges ``|C_j| * N`` (partial sum, element) pairs; a pass above
    the work budget (default ``10**9``, ``CE_BUDGET`` overrides) raises
    :class:`ResourceError` before doing the work.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    limit = budget(DEFAULT_WORK_BUDGET) if work_budget is None else work_budget
    n = seq.n
    total = n**d
    wdtype = np.int32 if total < 2**31 else np.int64

    use_int64 = _fits_int64(d * seq.values[0], d * seq.values[-1])
    base = np.array(seq.values, dtype=np.int64 if use_int64 else object)
    values = base.copy()
    weights = np.ones(n, dtype=np.int64)

    for fold in range(2, d + 1):
        work = len(values) * n
        if work > limit:
            raise ResourceError(
                f"sumset pass {fold}/{d} needs {work} merges (N={n}, d={d}), "
                f"over the work budget {limit}; raise it with CE_BUDGET"
            )
        if use_int64:
            values, weights = _fold_int64(values, weights, base, wdtype)
        else:
            values, weights = _fold_object(values, weights, base)

    meta = dict(seq.meta)
    meta.setdefault("kind", seq.kind)
    return WeightedSumset(d, n, values, np.asarray(weights, dtype=np.int64), seq.scale, meta)


def sumset_by_enumeration(seq: ConvexSequence, d: int) -> dict[int, int]:
    """Map built from all ``N**d`` ordered tuples; reference for small inputs."""
    from itertools import product

    acc: Counter = Counter()
    for tup in product(seq.values, repeat=d):
        acc[sum(tup)] += 1
    return dict(acc)


@dataclass(frozen=True, eq=False)
class WeightProfile:
    ordered_weights: np.ndarray
    ordered_values: np.ndarray
    cardinality: int
    max_weight: int
    value_order: str = "ascending-value"


def weight_profile(ws: WeightedSumset) -> WeightProfile:
    """Weights sorted non-increasing; equal weights keep ascending value order."""
    order = np.argsort(-ws.weights, kind="stable")
    return WeightProfile(
        ordered_weights=ws.weights[order],
        ordered_values=ws.values[order],
        cardinality=ws.cardinality,
        max_weight=ws.max_weight,
    )


def threshold_set(ws: WeightedSumset, s) -> np.ndarray:
    """Values whose multiplicity is at least ``s``; ``len`` of the result is ``|C_{d,s}|``."""
    if not s > 0:
        raise DomainError(f"threshold must be positive, got {s!r}")
    return ws.values[ws.weights >= s]


def andrews_ratio(ws: WeightedSumset) -> float:
    """Maximum multiplicity over ``N**(d(d-1)/(d+1))``."""
    if ws.d < 2:
        raise DomainError("andrews_ratio needs d >= 2")
    exponent = ws.d * (ws.d - 1) / (ws.d + 1)
    return ws.max_weight / ws.n**exponent


def majorant_ratio(ws: WeightedSumset, beta: float) -> float:
    """``max_t nu(c_t) * t**(1/3) / N**beta`` over the weight profile (t from 1)."""
    ordered = weight_profile(ws).ordered_weights.astype(np.float64)
    t = np.arange(1, len(ordered) + 1, dtype=np.float64)
    return float(np.max(ordered * np.cbrt(t))) / ws.n ** float(beta)
