"""Strictly convex sequences with exact integer storage.

Every sequence is stored as a tuple of Python integers together with a
``scale``; the true value of entry ``i`` is ``values[i] / scale``.  Integer
generators use ``scale == 1``.  Square roots are quantized to
``round(10**p * sqrt(k))`` and rationals are brought to a common
denominator, so sums can be hashed and compared exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

_INT64_SAFE = 2**62

DEFAULT_PRECISION = 30
# random_convex draws from numpy's PCG64 bit generator; the algorithm is
# pinned so that a seed reproduces the same sequence on every platform.
RANDOM_BIT_GENERATOR = "PCG64"


@dataclass(frozen=True)
class SequenceKind:
    """Generator tag plus its parameters.

    Use the constructors :func:`power`, :func:`sqrt_squarefree`,
    :func:`random_convex` and :func:`custom`, or :func:`parse_kind` for the
    ``tag:param`` strings accepted by the CLI.
    """

    tag: str
    k: int | None = None
    precision: int | None = None
    seed: int | None = None
    spread: int | None = None
    path: str | None = None

    def label(self) -> str:
        if self.tag == "power":
            return f"power:{self.k}"
        if self.tag == "sqrt_squarefree":
            return f"sqrt:{self.precision}"
        if self.tag == "random_convex":
            if self.spread == 1:
                return f"random:{self.seed}"
            return f"random:{self.seed}:{self.spread}"
        return f"custom:{self.path}"


def power(k: int) -> SequenceKind:
    if int(k) != k or k < 1:
        raise DomainError(f"power exponent must be a positive integer, got {k!r}")
    return SequenceKind("power", k=int(k))


def sqrt_squarefree(p: int = DEFAULT_PRECISION) -> SequenceKind:
    if int(p) != p or p < 0:
        raise DomainError(f"precision must be a non-negative integer, got {p!r}")
    return SequenceKind("sqrt_squarefree", precision=int(p))


def random_convex(seed: int, spread: int = 1) -> SequenceKind:
    if spread < 0:
        raise DomainError(f"gap spread must be >= 0, got {spread}")
    return SequenceKind("random_convex", seed=int(seed), spread=int(spread))


def custom(path: str | Path) -> SequenceKind:
    return SequenceKind("custom", path=str(path))


def parse_kind(text: str) -> SequenceKind:
    """Parse ``power:K``, ``sqrt[:P]``, ``random:SEED[:SPREAD]`` or ``custom:PATH``."""
    tag, _, rest = text.partition(":")
    try:
        if tag == "power":
            return power(int(rest))
        if tag in ("sqrt", "sqrt_squarefree"):
            return sqrt_squarefree(int(rest) if rest else DEFAULT_PRECISION)
        if tag in ("random", "random_convex"):
            seed, _, spread = rest.partition(":")
            return random_convex(int(seed), int(spread) if spread else 1)
        if tag == "custom" and rest:
            return custom(rest)
    except DomainError:
        raise
    except ValueError:
        pass
    raise ValidationError(
        f"unrecognised sequence {text!r}; expected power:K, sqrt[:P], "
        "random:SEED[:SPREAD] or custom:PATH"
    )


@dataclass(frozen=True)
class ConvexSequence:
    """A finite increasing sequence ``b_1 < ... < b_N`` in exact arithmetic.

    Construction enforces strict monotonicity only; strict convexity is a
    property of the generator and is reported by
    :func:`check_strict_convexity`.
    """

    values: tuple[int, ...]
    kind: str = "custom"
    scale: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise ValidationError("a sequence needs at least one value")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValidationError(
                    f"value at index {i} is {type(v).__name__}; only exact integers are stored"
                )
        vals = tuple(int(v) for v in vals)
        for i in range(1, len(vals)):
            if vals[i] <= vals[i - 1]:
                raise ValidationError(
                    f"sequence is not strictly increasing at index {i}: "
                    f"{vals[i]} <= {vals[i - 1]}"
                )
        if int(self.scale) != self.scale or self.scale < 1:
            raise ValidationError(f"scale must be a positive integer, got {self.scale!r}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "scale", int(self.scale))

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)

    def array(self) -> np.ndarray:
        """Values as an int64 array when they fit comfortably, else object dtype."""
        if max(abs(self.values[0]), abs(self.values[-1])) < _INT64_SAFE:
            return np.array(self.values, dtype=np.int64)
        return np.array(self.values, dtype=object)

    def true_values(self) -> list[Fraction]:
        return [Fraction(v, self.scale) for v in self.values]

    def prefix(self, n: int) -> "ConvexSequence":
        return ConvexSequence(self.values[:n], self.kind, self.scale, dict(self.meta, n=n))

    def affine(self, a: int, c: int) -> "ConvexSequence":
        """The sequence ``a*b_i + c`` (``a > 0``), same scale."""
        if a <= 0:
            raise DomainError("affine map needs a > 0")
        return ConvexSequence(
            tuple(a * v + c for v in self.values), self.kind, self.scale, dict(self.meta)
        )


@dataclass(frozen=True)
class ConvexityCheck:
    ok: bool
    index: int | None = None

    def __bool__(self):
        return self.ok


def check_strict_convexity(seq: ConvexSequence | Sequence[int]) -> ConvexityCheck:
    """Check that all second differences are positive.

    On failure ``index`` is the 0-based position of the middle element of the
    first offending triple.
    """
    vals = seq.values if isinstance(seq, ConvexSequence) else tuple(seq)
    for i in range(1, len(vals) - 1):
        if vals[i + 1] - 2 * vals[i] + vals[i - 1] <= 0:
            return ConvexityCheck(False, i)
    return ConvexityCheck(True)


def squarefree_numbers(n: int, start: int = 2) -> list[int]:
    """The first ``n`` squarefree integers ``>= start``."""
    out: list[int] = []
    limit = max(16, 2 * (n + start))
    while True:
        flags = np.ones(limit + 1, dtype=bool)
        for p in range(2, math.isqrt(limit) + 1):
            flags[p * p :: p * p] = False
        out = [int(k) for k in np.flatnonzero(flags) if k >= start][:n]
        if len(out) == n:
            return out
        limit *= 2


def quantized_sqrt(k: int, precision: int) -> int:
    """``round(10**precision * sqrt(k))``, computed exactly."""
    x = k * 10 ** (2 * precision)
    r = math.isqrt(x)
    # (r + 1/2)^2 = r^2 + r + 1/4; x is an integer so there are no ties.
    return r + 1 if x - r * r > r else r


def gen_random_convex(seed: int, n: int, spread: int = 1) -> ConvexSequence:
    """Random integer sequence with strictly increasing positive gaps.

    ``b_1 = 1`` and ``g_i = g_{i-1} + 1 + u_i`` with ``u_i`` uniform on
    ``{0, ..., spread}`` drawn from PCG64(seed), ``g_0 = 0``.  The gaps then
    grow like ``(1 + spread/2) i`` and the sequence like ``i**2``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    bumps = rng.integers(0, spread, size=n - 1, endpoint=True, dtype=np.int64)
    gaps = np.cumsum(1 + bumps)
    values = [1] + [1 + int(g) for g in np.cumsum(gaps)]
    meta = {"seed": int(seed), "spread": int(spread), "prng": RANDOM_BIT_GENERATOR, "n": n}
    return ConvexSequence(tuple(values), "random_convex", 1, meta)


def gen_sequence(kind: SequenceKind | str, n: int) -> ConvexSequence:
    if isinstance(kind, str):
        kind = parse_kind(kind)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if kind.tag == "power":
        k = kind.k
        return ConvexSequence(
            tuple(i**k for i in range(1, n + 1)), "power", 1, {"k": k, "n": n}
        )
    if kind.tag == "sqrt_squarefree":
        p = kind.precision
        ks = squarefree_numbers(n)
        values = tuple(quantized_sqrt(k, p) for k in ks)
        meta = {"precision": p, "n": n, "radicands_max": ks[-1]}
        return ConvexSequence(values, "sqrt_squarefree", 10**p, meta)
    if kind.tag == "random_convex":
        return gen_random_convex(kind.seed, n, kind.spread)
    if kind.tag == "custom":
        seq = load_custom(kind.path)
        if n > seq.n:
            raise ValidationError(f"{kind.path} holds {seq.n} values, {n} requested")
        return seq.prefix(n)
    raise ValidationError(f"unknown sequence kind {kind.tag!r}")


def _parse_lines(lines: Iterable[str], source: str) -> ConvexSequence:
    scale_exp = None
    raw: list[tuple[int, Fraction]] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            head = text[1:].strip()
            if head.startswith("scale"):
                spec = head[len("scale") :].strip()
                if not spec.startswith("10^"):
                    raise ValidationError(f"{source}:{lineno}: expected '#scale 10^p'")
                try:
                    scale_exp = int(spec[3:])
                except ValueError:
                    raise ValidationError(f"{source}:{lineno}: bad scale {spec!r}") from None
            continue
        try:
            raw.append((lineno, Fraction(text)))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{source}:{lineno}: not a decimal value: {text!r}") from None
    if not raw:
        raise ValidationError(f"{source}: no values")
    for i in range(1, len(raw)):
        if raw[i][1] <= raw[i - 1][1]:
            raise ValidationError(
                f"{source}: value index {i} (line {raw[i][0]}) is not greater than its predecessor"
            )
    if scale_exp is not None:
        for lineno, v in raw:
            if v.denominator != 1:
                raise ValidationError(
                    f"{source}:{lineno}: scaled-integer file holds non-integer {v}"
                )
        values = tuple(int(v) for _, v in raw)
        return ConvexSequence(values, "custom", 10**scale_exp, {"path": source, "precision": scale_exp})
    scale = 1
    for _, v in raw:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    values = tuple(int(v * scale) for _, v in raw)
    return ConvexSequence(values, "custom", scale, {"path": source})


def load_custom(path: str | Path) -> ConvexSequence:
    """Read one decimal value per line (UTF-8); ``#scale 10^p`` marks scaled integers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot read sequence file {path}: {exc}") from None
    return _parse_lines(text.splitlines(), str(path))
