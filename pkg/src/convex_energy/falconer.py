"""Finite lattice snapshots of the convex-distance construction.

A :class:`LatticeSet` at denominator ``q`` keeps every lattice point of
``{0..q}^d``; point ``p`` stands for the cube of half-side ``q**(-d/s)``
around ``p / q``.  Distances use the separable convex gauge
``rho_f(x) = f(x_1) + ... + f(x_d)``, evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .energy import ExponentFit, fit_exponent
from .errors import DEFAULT_DEGREE_BUDGET, DomainError, ResourceError, budget
from .sequences import ConvexSequence, SequenceKind, gen_sequence
from .sumset import build_weighted_sumset


@dataclass(frozen=True, eq=False)
class LatticeSet:
    q: int
    s: float
    d: int
    cells: np.ndarray

    @property
    def resolution(self) -> float:
        return self.q ** (-self.d / self.s)

    def __len__(self):
        return len(self.cells)

    def is_full_box(self) -> bool:
        lo = self.cells.min(axis=0)
        hi = self.cells.max(axis=0)
        return len(self.cells) == int(np.prod(hi - lo + 1)) and len(
            np.unique(self.cells, axis=0)
        ) == len(self.cells)

    def shifted(self, offset) -> "LatticeSet":
        return LatticeSet(self.q, self.s, self.d, self.cells + np.asarray(offset, dtype=np.int64))

    def subset(self, mask) -> "LatticeSet":
        return LatticeSet(self.q, self.s, self.d, self.cells[np.asarray(mask)])


def q_schedule(count: int) -> list[int]:
    """``q_1 = 2`` and ``q_{j+1} = q_j**j``."""
    qs = [2]
    for j in range(1, count):
        qs.append(qs[-1] ** j)
    return qs[:count]


def build_lattice_set(q: int, s: float, d: int) -> LatticeSet:
    if q < 1 or d < 1:
        raise DomainError(f"need q >= 1 and d >= 1, got q={q}, d={d}")
    if not 0 < s < d:
        raise DomainError(f"s must lie in (0, {d}), got {s}")
    size = (q + 1) ** d
    if size > budget(DEFAULT_DEGREE_BUDGET):
        raise ResourceError(f"lattice set of {size} cells (q={q}, d={d}) exceeds the budget")
    axes = [np.arange(q + 1, dtype=np.int64)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return LatticeSet(q, s, d, grid)


@dataclass(frozen=True)
class ConvexFunction:
    """A convex function of one variable, closed form or table.

    ``power(k)`` evaluates ``|x|**k``; ``table(values)`` looks integers up
    in a mapping, with ``f(-x) = f(x)``.
    """

    name: str
    k: int | None = None
    values: Mapping[int, int] | None = None

    @classmethod
    def power(cls, k: int) -> "ConvexFunction":
        if k < 1:
            raise DomainError(f"power function needs k >= 1, got {k}")
        return cls(f"x^{k}", k=int(k))

    @classmethod
    def table(cls, values: Mapping[int, int], name="table") -> "ConvexFunction":
        return cls(name, values=dict(values))

    @classmethod
    def from_sequence(cls, seq: ConvexSequence, zero=None) -> "ConvexFunction":
        """``f(i) = b_i`` for ``i = 1..N``; ``f(0) = zero`` when given."""
        table = {i + 1: v for i, v in enumerate(seq.values)}
        if zero is not None:
            table[0] = zero
        return cls(f"seq:{seq.kind}", values=table)

    def __call__(self, x):
        if self.k is not None:
            if isinstance(x, float):
                raise DomainError("rho_f takes exact scalars, not floats")
            return abs(x) ** self.k
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise DomainError(f"table function is only defined on integers, got {x}")
            x = x.numerator
        key = abs(int(x))
        if key not in self.values:
            raise DomainError(f"{self.name} is undefined at {x}")
        return self.values[key]


def parse_function(text: str) -> ConvexFunction:
    tag, _, arg = text.partition(":")
    if tag == "power":
        try:
            return ConvexFunction.power(int(arg))
        except ValueError:
            pass
    raise DomainError(f"unrecognised function {text!r}; expected power:K")


def rho_f(x, f: ConvexFunction | Callable):
    return sum(f(xi) for xi in x)


def _difference_vectors(E: LatticeSet) -> np.ndarray:
    if E.is_full_box():
        span = E.cells.max(axis=0) - E.cells.min(axis=0)
        axes = [np.arange(-w, w + 1, dtype=np.int64) for w in span]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, E.d)
    pairs = len(E.cells) ** 2
    if pairs > budget(DEFAULT_DEGREE_BUDGET):
        raise ResourceError(f"difference set of {len(E.cells)} cells needs {pairs} pairs")
    diffs = (E.cells[:, None, :] - E.cells[None, :, :]).reshape(-1, E.d)
    return np.unique(diffs, axis=0)


def distance_values(E: LatticeSet, f: ConvexFunction) -> list:
    """Sorted distinct exact values of the gauge over the difference set.

    Power functions are evaluated at ``(z - w) / q``; table functions, which
    only exist on integers, at ``z - w``.
    """
    diffs = _difference_vectors(E)
    if f.k is not None:
        numerators = {sum(abs(int(c)) ** f.k for c in v) for v in diffs}
        denom = E.q**f.k
        return sorted(Fraction(v, denom) for v in numerators)
    return sorted({rho_f(tuple(int(c) for c in v), f) for v in diffs})


def distance_value_count(E: LatticeSet, f: ConvexFunction) -> int:
    diffs = _difference_vectors(E)
    if f.k is not None:
        # the common factor q**-k does not change which values coincide
        exact = (E.q + 1) ** f.k * E.d < 2**62
        if exact:
            vals = (np.abs(diffs) ** f.k).sum(axis=1)
            return int(len(np.unique(vals)))
    return len(distance_values(E, f))


def distance_count_naive(E: LatticeSet, f: ConvexFunction) -> int:
    """All ordered cell pairs, exact rational evaluation; reference only."""
    q = E.q
    cells = [tuple(int(c) for c in p) for p in E.cells]
    if f.k is not None:
        return len({rho_f([Fraction(a - b, q) for a, b in zip(z, w)], f) for z in cells for w in cells})
    return len({rho_f([a - b for a, b in zip(z, w)], f) for z in cells for w in cells})


def separated_count(values, delta, scale: int = 1) -> int:
    """Greedy left-to-right count of a maximal ``delta``-separated subset.

    ``values`` are sorted exact scalars stored at ``scale`` (true value is
    ``v / scale``); a value is kept when it is at least ``delta`` above the
    last kept one.  A float ``delta`` is read as its shortest decimal repr.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if len(values) == 0:
        return 0
    gap = (Fraction(repr(delta)) if isinstance(delta, float) else Fraction(delta)) * scale
    arr = np.asarray(values)
    if arr.dtype.kind in "iu":
        need = math.ceil(gap)
        diffs = np.diff(arr)
        if len(diffs) and diffs.min() < 0:
            raise DomainError("values must be sorted ascending")
        if len(diffs) == 0 or diffs.min() >= need:
            return len(arr)
        count, i = 1, 0
        while True:
            i = int(np.searchsorted(arr, arr[i] + need, side="left"))
            if i >= len(arr):
                return count
            count += 1
    items = list(values)
    if any(b < a for a, b in zip(items, items[1:])):
        raise DomainError("values must be sorted ascending")
    count = 1
    last = items[0]
    for v in items[1:]:
        if v - last >= gap:
            count += 1
            last = v
    return count


def separation_scale(n: int, d: int) -> float:
    """``N**(-(d-1)/(d+1))``."""
    return n ** (-(d - 1) / (d + 1))


def predicted_separated_exponent(d: int) -> float:
    """Lower-bound exponent ``2 - 2/(d+2)`` for the separated count."""
    return 2 - 2 / (d + 2)


def separated_table(kind: SequenceKind | str, d: int, n_grid) -> tuple[list[tuple[int, float, int]], ExponentFit | None]:
    """Rows ``(N, delta, separated_count)`` for the sumset values and their fit.

    Sumset values are taken in the sequence's own units (stored value over
    its scale) and ``delta = N**(-(d-1)/(d+1))``.
    """
    rows = []
    for n in n_grid:
        seq = gen_sequence(kind, n)
        ws = build_weighted_sumset(seq, d)
        delta = separation_scale(n, d)
        rows.append((n, delta, separated_count(ws.values, delta, seq.scale)))
    fit = fit_exponent([(r[0], r[2]) for r in rows]) if len(rows) >= 3 else None
    return rows, fit


def lattice_rows(q_grid, s: float, d: int, f: ConvexFunction):
    """Rows ``(q, s, d, f, distinct_values, resolution)``."""
    rows = []
    for q in q_grid:
        E = build_lattice_set(q, s, d)
        rows.append((q, s, d, f.name, distance_value_count(E, f), E.resolution))
    return rows


__all__ = [
    "ConvexFunction",
    "LatticeSet",
    "build_lattice_set",
    "distance_count_naive",
    "distance_value_count",
    "distance_values",
    "lattice_rows",
    "parse_function",
    "predicted_separated_exponent",
    "q_schedule",
    "rho_f",
    "separated_count",
    "separated_table",
    "separation_scale",
]
