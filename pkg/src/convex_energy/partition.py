"""Dyadic weight-class partition of a sumset.

The heavy part of ``C_d`` is peeled off in classes ``C_0, C_1, ...`` with
caps ``mu_i = mu_bar * N**delta_i``, where ``mu_bar = N**(d - alpha_d)`` is
the average-weight bound and ``delta_i = (3 eps + delta_{i-1}) / 4``.
Class ``i`` takes the heaviest remaining elements: every element above the
next cap (so that the cap of class ``i+1`` holds exactly) and, beyond
those, heavy elements until the class reaches its target net weight
``m_i = N**(-(3 eps + delta_i)/2) * m``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .sumset import WeightedSumset

# classes stop once the cap falls to this multiple of mu_bar
LIGHT_FACTOR = 2


@dataclass(frozen=True)
class GrowthExponents:
    d: int
    alpha: Fraction
    beta: Fraction
    energy_exponent: Fraction


def growth_exponents(d: int) -> GrowthExponents:
    """``alpha = 2(1 - 2^-d)``, ``beta = d - (4/3)(1 - 2^-d)``, energy ``2d - alpha``."""
    if int(d) != d or d < 2:
        raise DomainError(f"exponents are defined for integer d >= 2, got {d!r}")
    tail = 1 - Fraction(1, 2**d)
    alpha = 2 * tail
    beta = d - Fraction(4, 3) * tail
    return GrowthExponents(int(d), alpha, beta, 2 * d - alpha)


def average_weight_bound(d: int, n: int) -> float:
    """``N**(d - alpha_d)``."""
    if n < 1:
        raise DomainError(f"N must be >= 1, got {n}")
    return float(n ** float(d - growth_exponents(d).alpha))


@dataclass(frozen=True, eq=False)
class WeightClass:
    threshold: float
    cap: float
    values: np.ndarray
    net_weight: int
    target_weight: float
    max_weight: int
    I_tilde: float
    within_budget: bool | None

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class PartitionReport:
    classes: list[WeightClass]
    epsilon: Fraction
    M: int
    mu_bar: float
    I_tilde: float
    I_bar: float
    delta_sequence: list[Fraction]
    schedule_stop: str
    stop_reason: str
    start: str
    M_cap: int
    n: int
    d: int

    @property
    def thresholds(self) -> list[float]:
        return [c.threshold for c in self.classes]

    def to_dict(self) -> dict:
        return {
            "epsilon": float(self.epsilon),
            "M": self.M,
            "M_cap": self.M_cap,
            "stop_reason": self.stop_reason,
            "schedule_stop": self.schedule_stop,
            "start": self.start,
            "N": self.n,
            "d": self.d,
            "delta": [float(x) for x in self.delta_sequence],
            "classes": [
                {
                    "mu_i": c.threshold,
                    "cap": c.cap,
                    "m_i": c.net_weight,
                    "target_m_i": c.target_weight,
                    "size": c.size,
                    "max_weight": c.max_weight,
                    "I_tilde_i": c.I_tilde,
                    "within_budget": c.within_budget,
                }
                for c in self.classes
            ],
            "I_tilde": self.I_tilde,
            "I_bar": self.I_bar,
            "mu_bar": self.mu_bar,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def delta_schedule(delta0, epsilon, n: int, mu_bar: float, cap: int):
    """``delta_0, delta_1, ...`` until the cap ``mu_bar N**delta`` reaches
    ``2 mu_bar`` or ``cap`` steps have been taken.  Returns ``(deltas, reason)``."""
    deltas = [Fraction(delta0)]
    while True:
        if len(deltas) > 1 and n ** float(deltas[-1]) <= LIGHT_FACTOR:
            return deltas, "threshold"
        if len(deltas) - 1 >= cap:
            return deltas, "cap"
        deltas.append((3 * epsilon + deltas[-1]) / 4)


def build_partition(ws: WeightedSumset, epsilon=None, start: str = "net") -> PartitionReport:
    """Partition ``C_d`` into weight classes with shrinking caps.

    ``start="net"`` uses ``mu_0 = N**d``; ``start="andrews"`` uses
    ``N**(d(d-1)/(d+1))`` instead.  ``epsilon`` defaults to ``delta_0 / 9``.

    The cap schedule runs until a cap is at most ``2 mu_bar`` or
    ``ceil(N**eps) + 1`` steps are taken.  Heavy classes are peeled along
    it; only elements above ``2 mu_bar`` are pulled beyond the mandatory
    ones, so once every remaining weight is below that level the rest
    becomes the final class and is charged at ``2 mu_bar`` instead of its
    schedule cap.
    """
    n, d = ws.n, ws.d
    if d < 2 or n < 2:
        raise DomainError(f"partition needs N >= 2 and d >= 2, got N={n}, d={d}")
    alpha = growth_exponents(d).alpha
    mu_bar = average_weight_bound(d, n)
    if start == "net":
        delta0 = alpha
    elif start == "andrews":
        delta0 = Fraction(d * (d - 1), d + 1) - (d - alpha)
    else:
        raise DomainError(f"unknown start {start!r}")
    eps = delta0 / 9 if epsilon is None else Fraction(epsilon)
    if not 0 < eps < delta0:
        raise DomainError(f"epsilon must lie in (0, delta_0={float(delta0):.6g}), got {epsilon!r}")

    m = ws.total_weight
    cap = math.ceil(n ** float(eps)) + 1
    log_n = math.log(n)
    deltas, schedule_stop = delta_schedule(delta0, eps, n, mu_bar, cap)
    mus = [mu_bar * math.exp(float(x) * log_n) for x in deltas]
    targets = [m * math.exp(-float(3 * eps + x) / 2 * log_n) for x in deltas]

    order = np.argsort(-ws.weights, kind="stable")
    w_sorted = ws.weights[order]
    v_sorted = ws.values[order]
    light = LIGHT_FACTOR * mu_bar
    I_bar = mu_bar ** (1 / 3) * m ** (2 / 3)
    budget_line = math.exp(-float(eps) * log_n) * I_bar

    classes: list[WeightClass] = []
    pos = 0
    stop = schedule_stop
    for i, (mu_i, target) in enumerate(zip(mus, targets)):
        last = i == len(mus) - 1
        rest = w_sorted[pos:]
        if not last and len(rest) and rest[0] <= light:
            stop, last = "light", True
        if last:
            take = len(w_sorted)
        else:
            # everything above the next cap must leave now
            forced = int(np.searchsorted(-rest, -mus[i + 1], side="left"))
            heavy = int(np.count_nonzero(rest > light))
            cum = np.cumsum(rest[:heavy])
            extra = min(int(np.searchsorted(cum, target, side="left")) + 1, heavy)
            take = pos + max(forced, extra)
        chunk_w = w_sorted[pos:take]
        net = int(chunk_w.sum())
        top = int(chunk_w.max()) if len(chunk_w) else 0
        charged = min(mu_i, light) if stop == "light" and last else mu_i
        ti = charged ** (1 / 3) * net ** (2 / 3)
        classes.append(
            WeightClass(
                threshold=mu_i,
                cap=charged,
                values=np.sort(v_sorted[pos:take]),
                net_weight=net,
                target_weight=target,
                max_weight=top,
                I_tilde=ti,
                within_budget=None if last else ti <= budget_line,
            )
        )
        pos = take
        if last:
            break
        if pos >= len(w_sorted):
            stop = "exhausted"
            break

    return PartitionReport(
        classes=classes,
        epsilon=eps,
        M=len(classes) - 1,
        mu_bar=mu_bar,
        I_tilde=sum(c.I_tilde for c in classes),
        I_bar=I_bar,
        delta_sequence=deltas,
        schedule_stop=schedule_stop,
        stop_reason=stop,
        start=start,
        M_cap=cap,
        n=n,
        d=d,
    )
