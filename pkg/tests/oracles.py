"""Slow, obviously-correct references used by the tests.

Nothing here imports the package's algorithms; only plain Python over
integer tuples.
"""

from collections import Counter
from fractions import Fraction
from itertools import combinations, product


def sumset_counts(values, d):
    """Ordered d-tuple sums and their multiplicities."""
    return Counter(sum(t) for t in product(values, repeat=d))


def energy_by_tuples(values, d):
    """Number of 2d-tuples with equal half sums, by testing every one."""
    vals = list(values)
    count = 0
    for left in product(vals, repeat=d):
        s = sum(left)
        for right in product(vals, repeat=d):
            if sum(right) == s:
                count += 1
    return count


def energy_linear_closed_form(n):
    """Solutions of a+b=c+d over {1..n}: (2n^3 + n)/3."""
    return (2 * n**3 + n) // 3


def dirichlet_coefficients(values, d):
    """Polynomial power by repeated schoolbook convolution."""
    poly = {0: 1}
    for _ in range(d):
        nxt = Counter()
        for e, c in poly.items():
            for v in values:
                nxt[e + v] += c
        poly = nxt
    return dict(poly)


def curve_points(generator, j, u):
    return {(i + 1 + j, f + u) for i, f in enumerate(generator)}


def incidences(generator, curves, points):
    weight = {(k, c): w for k, c, w in points}
    total = 0
    for j, u, mu in curves:
        for p in curve_points(generator, j, u):
            if p in weight:
                total += mu * weight[p]
    return total


def shared_point_pairs(generator, curves, points):
    """All pairs of curves meeting in two or more marked points."""
    marked = {(k, c) for k, c, _ in points}
    bad = []
    for (j1, u1, _), (j2, u2, _) in combinations(curves, 2):
        common = curve_points(generator, j1, u1) & curve_points(generator, j2, u2) & marked
        if len(common) >= 2:
            bad.append(((j1, u1), (j2, u2), sorted(common)))
    return bad


def is_strictly_convex(values):
    return all(values[i - 1] + values[i + 1] > 2 * values[i] for i in range(1, len(values) - 1))


def distance_values(q, d, k):
    """Distinct sum_i |x_i - y_i|^k / q^k over all ordered pairs of {0..q}^d."""
    cells = list(product(range(q + 1), repeat=d))
    return {sum(Fraction(abs(a - b), q) ** k for a, b in zip(z, w)) for z in cells for w in cells}


def max_separated(values, delta):
    """Largest subset with pairwise gaps >= delta, by exhaustive search."""
    vals = sorted(values)
    for size in range(len(vals), 0, -1):
        for sub in combinations(vals, size):
            if all(b - a >= delta for a, b in zip(sub, sub[1:])):
                return size
    return 0


def is_squarefree(k):
    p = 2
    while p * p <= k:
        if k % (p * p) == 0:
            return False
        p += 1
    return True
