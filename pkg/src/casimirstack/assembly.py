"""Generating functions Delta_N built from the interaction series.

Delta_N is the sum, over all compositions (ordered integer partitions) of
N, of products of interaction terms I_k. Three evaluation paths are kept:

* the convolution recurrence ``Delta_N = sum_k I_k Delta_{N-k}`` (production),
* unordered partitions weighted by their number of distinct orderings,
* brute-force enumeration of compositions (cross-check only).
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

from .coeffs import InteractionSeries

__all__ = [
    "PartitionTerm",
    "DeltaValue",
    "MAX_PARTITION_N",
    "integer_partitions",
    "compositions",
    "partitions_with_multiplicity",
    "delta_recurrence",
    "delta_by_partitions",
    "delta_by_compositions",
    "delta_dielectric",
    "delta_plasma",
    "plasma_cells",
    "expand_delta",
    "format_expansion",
    "parse_expansion",
]

MAX_PARTITION_N = 64


@dataclass(frozen=True)
class PartitionTerm:
    parts: tuple  # non-increasing
    multiplicity: int

    @property
    def exponents(self) -> dict:
        return dict(Counter(self.parts))


@dataclass(frozen=True)
class DeltaValue:
    value: float
    log_value: float

    @classmethod
    def from_excess(cls, excess: float) -> "DeltaValue":
        """Build from Delta - 1, keeping log accurate when Delta is near 1."""
        value = 1.0 + excess
        log_value = math.log1p(excess) if excess > -1.0 else math.nan
        return cls(value, log_value)


def integer_partitions(n: int, largest: int | None = None) -> Iterator[tuple]:
    """Partitions of ``n`` as non-increasing tuples, largest first."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in integer_partitions(n - first, first):
            yield (first,) + rest


def compositions(n: int) -> Iterator[tuple]:
    """All 2**(n-1) ordered tuples of positive integers summing to ``n``."""
    for cuts in itertools.product((False, True), repeat=n - 1):
        parts, run = [], 1
        for cut in cuts:
            if cut:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        yield tuple(parts)


def _multiplicity(parts: Sequence[int]) -> int:
    q = math.factorial(len(parts))
    for count in Counter(parts).values():
        q //= math.factorial(count)
    return q


def partitions_with_multiplicity(n: int) -> list:
    if not 1 <= n <= MAX_PARTITION_N:
        raise ValueError(f"N must be in [1, {MAX_PARTITION_N}]")
    return [PartitionTerm(p, _multiplicity(p)) for p in integer_partitions(n)]


def _terms(series) -> Sequence[float]:
    return series.terms if isinstance(series, InteractionSeries) else series


def delta_recurrence(terms: Sequence[float], n: int) -> list:
    """[Delta_0, ..., Delta_n] from I_1..I_n (``terms[k-1] == I_k``)."""
    if len(terms) < n:
        raise ValueError(f"need {n} interaction terms, got {len(terms)}")
    delta = [1.0]
    for m in range(1, n + 1):
        delta.append(sum(terms[k - 1] * delta[m - k] for k in range(1, m + 1)))
    return delta


def _excess_recurrence(terms: Sequence[float], first_excess: float, n: int) -> list:
    # D_m = Delta_m - 1 without forming 1 + small - 1
    excess = [0.0]
    for m in range(1, n + 1):
        acc = excess[m - 1] + first_excess * (1.0 + excess[m - 1])
        for k in range(2, m + 1):
            acc += terms[k - 1] * (1.0 + excess[m - k])
        excess.append(acc)
    return excess


def delta_by_partitions(terms: Sequence[float], n: int) -> float:
    total = 0.0
    for term in partitions_with_multiplicity(n):
        prod = float(term.multiplicity)
        for k in term.parts:
            prod *= terms[k - 1]
        total += prod
    return total


def delta_by_compositions(terms: Sequence[float], n: int) -> float:
    if n > 24:
        raise ValueError("composition enumeration is limited to N <= 24")
    total = 0.0
    for comp in compositions(n):
        prod = 1.0
        for k in comp:
            prod *= terms[k - 1]
        total += prod
    return total


def delta_dielectric(series, n: int) -> DeltaValue:
    terms = _terms(series)
    if n < 1:
        raise ValueError("N must be >= 1")
    if len(terms) < n:
        raise ValueError(f"series has {len(terms)} terms, need {n}")
    first_excess = getattr(series, "first_excess", terms[0] - 1.0)
    return DeltaValue.from_excess(_excess_recurrence(terms, first_excess, n)[n])


def plasma_cells(n_ps: int) -> int:
    """Number of interaction terms needed for ``n_ps`` plasma-sheet cavities."""
    if n_ps < 1:
        raise ValueError("n_ps must be >= 1")
    return (n_ps + 1) // 2 if n_ps % 2 else n_ps // 2 + 1


def delta_plasma(series: InteractionSeries, n_ps: int) -> DeltaValue:
    """Delta for ``n_ps`` plasma-sheet cavities (``n_ps + 1`` sheets).

    Odd counts reuse the two-interface cell ``(n_ps + 1) / 2`` times. Even
    counts send the outermost sheet of ``(n_ps + 2) / 2`` cells to infinity:
    only the last factor of every composition takes its primed form.
    """
    need = plasma_cells(n_ps)
    if len(series.terms) < need:
        raise ValueError(f"series has {len(series.terms)} terms, need {need}")
    if n_ps % 2:
        return delta_dielectric(series, (n_ps + 1) // 2)
    m = n_ps // 2
    excess = _excess_recurrence(series.terms, series.first_excess, m)
    acc = excess[m]
    for k in range(2, m + 2):
        acc += series.primed_terms[k - 1] * (1.0 + excess[m + 1 - k])
    return DeltaValue.from_excess(acc)


# --- symbolic expansion -------------------------------------------------

def expand_delta(n: int) -> dict:
    """Delta_n as {exponent tuple (e_1..e_n): integer coefficient}."""
    out = {}
    for term in partitions_with_multiplicity(n):
        exps = [0] * n
        for k in term.parts:
            exps[k - 1] += 1
        out[tuple(exps)] = term.multiplicity
    return out


def _order_key(exps):
    return tuple(reversed(exps))


def format_expansion(poly: dict) -> str:
    """Render as ``I1^10 + 9 I1^8 I2 + ...`` (coefficient 1 omitted)."""
    pieces = []
    for exps in sorted(poly, key=_order_key):
        coef = poly[exps]
        factors = [f"I{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(exps) if e]
        mono = " ".join(factors)
        pieces.append(mono if coef == 1 else f"{coef} {mono}")
    return " + ".join(pieces)


def parse_expansion(text: str) -> dict:
    """Inverse of :func:`format_expansion`; also accepts ``I_{1}^{10}``,
    ``(I_1)^3`` and ``*`` separators. Repeated monomials are summed."""
    import re

    cleaned = re.sub(r"[{}()*\\]", " ", text.replace("\n", " "))
    cleaned = re.sub(r"I\s*_\s*", "I", cleaned)
    cleaned = re.sub(r"\s*\^\s*", "^", cleaned)
    token = re.compile(r"\s*(?:I(\d+)(?:\^(\d+))?|(\d+))")
    poly: dict = {}
    for chunk in cleaned.split("+"):
        if not chunk.strip():
            continue
        coef = 1
        powers: Counter = Counter()
        pos = 0
        chunk = chunk.rstrip()
        while pos < len(chunk):
            m = token.match(chunk, pos)
            if not m:
                raise ValueError(f"cannot parse monomial {chunk.strip()!r}")
            if m.group(3):
                coef *= int(m.group(3))
            else:
                powers[int(m.group(1))] += int(m.group(2) or 1)
            pos = m.end()
        size = max(powers) if powers else 0
        key = tuple(powers.get(k, 0) for k in range(1, size + 1))
        poly[key] = poly.get(key, 0) + coef
    n = max((sum((i + 1) * e for i, e in enumerate(k)) for k in poly), default=0)
    return {k + (0,) * (n - len(k)): v for k, v in poly.items()}
