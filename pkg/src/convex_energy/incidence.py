"""Weighted point-curve arrangements built from translates of a convex graph.

A curve ``(j, u, mu)`` is the translate ``{(i + j, f(i) + u) : i = 1..N}``
of the graph of ``f(i) = b_i``, carrying weight ``mu``.  A point
``(k, c, nu)`` lies on it iff ``1 <= k - j <= N`` and ``c - u = f(k - j)``;
all comparisons are exact.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass

from .errors import DEFAULT_WORK_BUDGET, DomainError, ResourceError, budget
from .sequences import ConvexSequence
from .sumset import build_weighted_sumset


@dataclass(frozen=True)
class Arrangement:
    generator: tuple[int, ...]
    curves: tuple[tuple[int, int, int], ...]
    points: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "generator", tuple(int(v) for v in self.generator))
        object.__setattr__(self, "curves", tuple(tuple(c) for c in self.curves))
        object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))
        if len({(j, u) for j, u, _ in self.curves}) != len(self.curves):
            raise DomainError("arrangement has repeated curves")
        if len({(k, c) for k, c, _ in self.points}) != len(self.points):
            raise DomainError("arrangement has repeated points")
        if any(w <= 0 for *_, w in self.curves + self.points):
            raise DomainError("arrangement weights must be positive")

    @property
    def index_window(self) -> int:
        return len(self.generator)

    @property
    def m(self):
        return sum(w for *_, w in self.curves)

    @property
    def n(self):
        return sum(w for *_, w in self.points)

    @property
    def mu(self):
        return max((w for *_, w in self.curves), default=0)

    @property
    def nu(self):
        return max((w for *_, w in self.points), default=0)

    def curve_points(self, j, u):
        return [(i + 1 + j, f + u) for i, f in enumerate(self.generator)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "generator": list(self.generator),
                "curves": [list(c) for c in self.curves],
                "points": [list(p) for p in self.points],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Arrangement":
        data = json.loads(text)
        return cls(
            tuple(data["generator"]),
            tuple(tuple(c) for c in data["curves"]),
            tuple(tuple(p) for p in data["points"]),
        )


def build_arrangement(seq: ConvexSequence, d: int) -> Arrangement:
    """Curves: translates by ``{2..2N} x C_d`` weighted by multiplicity.

    Points: every ``(k, c)`` with ``k`` in ``{2..2N} + {1..N}`` and ``c`` in
    ``C_{d+1}`` lying on some curve, each with weight 1.  Every curve then
    carries exactly ``N`` points.
    """
    ws = build_weighted_sumset(seq, d)
    n = seq.n
    shifts = range(2, 2 * n + 1)
    size = len(shifts) * ws.cardinality * n
    limit = budget(DEFAULT_WORK_BUDGET)
    if size > limit:
        raise ResourceError(
            f"arrangement needs {size} curve-point pairs (N={n}, d={d}), over the budget {limit}"
        )
    pairs = [(int(u), int(w)) for u, w in zip(ws.values, ws.weights)]
    curves = tuple((j, u, w) for j in shifts for u, w in pairs)
    f = seq.values
    image = set()
    for j in shifts:
        for u, _ in pairs:
            for i in range(n):
                image.add((i + 1 + j, f[i] + u))
    points = tuple((k, c, 1) for k, c in sorted(image))
    return Arrangement(f, curves, points)


@dataclass(frozen=True)
class IncidenceCount:
    total: int
    per_point: dict | None = None


def count_incidences(arr: Arrangement, per_point: bool = False) -> IncidenceCount:
    """Weighted incidences: sum of ``mu(l) * nu(p)`` over incident pairs.

    ``per_point`` maps each point ``(k, c)`` to ``w_p``, the total weight of
    the curves through it.
    """
    weights = {(k, c): w for k, c, w in arr.points}
    f = arr.generator
    total = 0
    through = defaultdict(int) if per_point else None
    for j, u, mu in arr.curves:
        for i, fi in enumerate(f):
            p = (i + 1 + j, fi + u)
            nu = weights.get(p)
            if nu is not None:
                total += mu * nu
                if through is not None:
                    through[p] += mu
    if through is not None:
        through = {(k, c): through.get((k, c), 0) for k, c, _ in arr.points}
    return IncidenceCount(total, through)


@dataclass(frozen=True)
class Counterexample:
    """Two curves sharing two points (equivalently two points on two curves)."""

    curves: tuple[tuple[int, int], tuple[int, int]]
    points: tuple[tuple[int, int], tuple[int, int]]


def verify_simple_intersection(arr: Arrangement) -> Counterexample | None:
    """Return ``None`` if no two curves share two points of the arrangement.

    Two curves share two points exactly when two points lie on two common
    curves, so one search settles both halves of the condition.  Curves
    ``(j, u)`` and ``(j - t, u - s)`` meet at index ``i`` of the first iff
    ``f(i + t) - f(i) = s``; a violation needs some difference value ``s``
    to repeat for a fixed offset ``t``, which strict convexity rules out.
    Only repeated ``(t, s)`` classes are then matched against the curves.
    """
    f = arr.generator
    n = len(f)
    curve_set = {(j, u) for j, u, _ in arr.curves}
    point_set = {(k, c) for k, c, _ in arr.points}
    for t in range(1, n):
        groups = defaultdict(list)
        for i in range(n - t):
            groups[f[i + t] - f[i]].append(i)
        repeated = [(s, idx) for s, idx in groups.items() if len(idx) > 1]
        if not repeated:
            continue
        for j, u, _ in arr.curves:
            for s, idx in repeated:
                other = (j - t, u - s)
                if other not in curve_set:
                    continue
                shared = [(i + 1 + j, f[i] + u) for i in idx]
                shared = [p for p in shared if p in point_set]
                if len(shared) >= 2:
                    return Counterexample(((j, u), other), (shared[0], shared[1]))
    return None


def st_bound(m, n, mu, nu):
    """``(mu nu)^(1/3) (m n)^(2/3) + nu m + mu n``, constants omitted."""
    if min(m, n, mu, nu) <= 0:
        raise DomainError("st_bound arguments must be positive")
    return (mu * nu) ** (1 / 3) * (m * n) ** (2 / 3) + nu * m + mu * n


def _uniformize(weights: dict, incident: dict, target: int, label: str, start_total: int, trace: list):
    """Move unit weights between elements until every weight equals ``target``.

    ``weights`` maps element -> integer weight and is updated in place;
    ``incident`` maps element -> total weight of incident counterparts, so
    one unit on element ``e`` contributes ``incident[e]`` incidences.
    """
    total = start_total
    order = {e: i for i, e in enumerate(weights)}

    def step(op, a, b, delta):
        nonlocal total
        before = total
        total += delta
        trace.append(
            {"set": label, "op": op, "from": list(a), "to": list(b), "before": before, "after": total}
        )

    # Overweight elements only occur when the caller asks for a target below
    # the current maximum; shed one unit at a time to the best receiver.
    while True:
        heavy = [e for e, w in weights.items() if w > target]
        if not heavy:
            break
        light = [e for e, w in weights.items() if w < target]
        if not light:
            raise DomainError(f"{label}: cannot reach uniform weight {target}")
        donor = min(heavy, key=lambda e: (incident[e], order[e]))
        recv = max(light, key=lambda e: (incident[e], -order[e]))
        weights[donor] -= 1
        weights[recv] += 1
        step("level", donor, recv, incident[recv] - incident[donor])

    while True:
        open_ = sorted((e for e, w in weights.items() if w < target), key=order.__getitem__)
        if len(open_) < 2:
            break
        best = None
        for a in open_:
            for b in open_:
                if a == b or weights[a] > weights[b]:
                    continue
                gain = incident[b] - incident[a]
                if best is None or gain > best[0]:
                    best = (gain, a, b)
        _, a, b = best
        # b receives a unit from a; first put the larger weight on the
        # element with more incidences
        hi, lo = (b, a) if incident[b] >= incident[a] else (a, b)
        if weights[hi] < weights[lo]:
            weights[hi], weights[lo] = weights[lo], weights[hi]
            step("swap", lo, hi, (weights[hi] - weights[lo]) * (incident[hi] - incident[lo]))
        weights[hi] += 1
        weights[lo] -= 1
        step("shift", lo, hi, incident[hi] - incident[lo])
        if weights[lo] == 0:
            del weights[lo]
    if any(w != target for w in weights.values()):
        raise DomainError(f"{label}: net weight is not a multiple of {target}")
    return total


def rearrange_uniform(arr: Arrangement, mu: int | None = None, nu: int | None = None):
    """Greedy rearrangement to uniform weights, points first then curves.

    Each shift moves one unit of weight from an element with fewer incident
    counterparts to one with at least as many, so the weighted incidence
    count never drops.  Targets default to the maximum weights; the net
    weights must be multiples of them.  Returns ``(arrangement, trace)``
    where the trace lists every swap and shift with before/after totals.
    """
    mu = arr.mu if mu is None else mu
    nu = arr.nu if nu is None else nu
    for label, items in (("curve", arr.curves), ("point", arr.points)):
        for *_, w in items:
            if int(w) != w:
                raise DomainError(f"{label} weights must be integers")
    if not arr.curves or not arr.points:
        return arr, []
    if arr.m % mu or arr.n % nu:
        raise DomainError(
            f"net weights (m={arr.m}, n={arr.n}) must be multiples of the targets "
            f"(mu={mu}, nu={nu}); normalise the weights before rearranging"
        )

    f = arr.generator
    start = count_incidences(arr).total
    trace: list = []

    point_w = {(k, c): w for k, c, w in arr.points}
    via_points = count_incidences(arr, per_point=True).per_point
    total = _uniformize(point_w, via_points, nu, "points", start, trace)

    curve_w = {(j, u): w for j, u, w in arr.curves}
    via_curves = {
        (j, u): sum(point_w.get((i + 1 + j, fi + u), 0) for i, fi in enumerate(f))
        for j, u in curve_w
    }
    total = _uniformize(curve_w, via_curves, mu, "curves", total, trace)

    out = Arrangement(
        f,
        tuple((j, u, w) for (j, u), w in curve_w.items()),
        tuple((k, c, w) for (k, c), w in point_w.items()),
    )
    return out, trace


def trace_to_jsonl(trace) -> str:
    return "".join(json.dumps(step) + "\n" for step in trace)
