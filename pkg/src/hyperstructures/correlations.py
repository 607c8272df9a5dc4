"""Brunnian correlation patterns.

Three variables form a Brunnian triple when every pair is uncorrelated but
the three together are not independent.  The triple statistic used here is
the standardized third cross-moment ``mean(x~ * y~ * z~)`` with
``x~ = (x - mean(x)) / std(x)`` (population normalization).  It vanishes
whenever one variable is independent of the other two and equals 1 on the
parity construction ``Z = X * Y`` with ``X, Y`` uniform on ``{-1, +1}``.

The second-order test applies the same pattern one level up: each triple
``(Xj, Yj, Zj)`` is reduced to its group signal ``Xj~ * Yj~ * Zj~`` and the
three group signals are tested as a triple.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import FormatError, LengthMismatch, ZeroVariance

DEFAULT_EPSILON = 0.05
DEFAULT_TAU = 0.5
MIN_LENGTH = 3


def _arrays(*series) -> list:
    arrays = [np.asarray(s, dtype=float) for s in series]
    n = len(arrays[0])
    for a in arrays:
        if a.ndim != 1:
            raise LengthMismatch("series must be one-dimensional")
        if len(a) != n:
            raise LengthMismatch(f"series lengths differ: {[len(b) for b in arrays]}")
        if not np.all(np.isfinite(a)):
            raise FormatError("series must be finite")
    if n < MIN_LENGTH:
        raise LengthMismatch(f"series need at least {MIN_LENGTH} samples, got {n}")
    return arrays


def standardize(x) -> np.ndarray:
    (x,) = _arrays(x)
    if np.ptp(x) == 0:
        raise ZeroVariance("series is constant")
    centered = x - x.mean()
    return centered / np.sqrt(np.mean(centered**2))


def pearson(x, y) -> float:
    x, y = _arrays(x, y)
    r = float(np.mean(standardize(x) * standardize(y)))
    return min(1.0, max(-1.0, r))


def triple_corr(x, y, z) -> float:
    x, y, z = _arrays(x, y, z)
    return float(np.mean(standardize(x) * standardize(y) * standardize(z)))


def group_signal(x, y, z) -> np.ndarray:
    x, y, z = _arrays(x, y, z)
    return standardize(x) * standardize(y) * standardize(z)


@dataclass
class CorrelationReport:
    pairwise: dict
    triple: float
    verdict: str
    epsilon: float
    tau: float

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(pairs: Sequence[float], triple: float, epsilon: float, tau: float) -> str:
    if any(abs(r) >= epsilon for r in pairs):
        return "pairwise-correlated"
    if abs(triple) > tau:
        return "brunnian"
    return "null"


def brunnian_test(
    x, y, z, epsilon: float = DEFAULT_EPSILON, tau: float = DEFAULT_TAU, names=("X", "Y", "Z")
) -> CorrelationReport:
    series = dict(zip(names, _arrays(x, y, z)))
    pairwise = {
        f"{a},{b}": pearson(series[a], series[b]) for a, b in itertools.combinations(names, 2)
    }
    triple = triple_corr(*series.values())
    return CorrelationReport(pairwise, triple, _verdict(pairwise.values(), triple, epsilon, tau), epsilon, tau)


@dataclass
class SecondOrderReport:
    within_group: list
    signal_pairwise: dict
    signal_triple: float
    verdict: str
    epsilon: float
    tau: float

    def to_dict(self) -> dict:
        return asdict(self)


def _or_none(stat, *series):
    # a constant group signal leaves the statistic undefined
    try:
        return stat(*series)
    except ZeroVariance:
        return None


def second_order_test(
    groups: Sequence[Sequence], epsilon: float = DEFAULT_EPSILON, tau: float = DEFAULT_TAU
) -> SecondOrderReport:
    """Correlation of correlations over three triples of series.

    The verdict is ``"second-order-brunnian"`` only when every within-group
    triple statistic is below ``epsilon`` in magnitude, the group signals
    are pairwise uncorrelated, and the triple statistic of the group
    signals exceeds ``tau``.  Statistics of a constant group signal are
    undefined and reported as ``None``.
    """
    if len(groups) != 3 or any(len(g) != 3 for g in groups):
        raise LengthMismatch("second-order test needs three groups of three series")
    _arrays(*(s for g in groups for s in g))
    within = [triple_corr(*g) for g in groups]
    signals = [group_signal(*g) for g in groups]
    pairwise = {
        f"g{i + 1},g{j + 1}": _or_none(pearson, signals[i], signals[j])
        for i, j in itertools.combinations(range(3), 2)
    }
    triple = _or_none(triple_corr, *signals)
    if any(abs(t) >= epsilon for t in within):
        verdict = "first-order-present"
    elif any(r is None or abs(r) >= epsilon for r in pairwise.values()):
        verdict = "pairwise-correlated"
    elif triple is not None and abs(triple) > tau:
        verdict = "second-order-brunnian"
    else:
        verdict = "null"
    return SecondOrderReport(within, pairwise, triple, verdict, epsilon, tau)


FIRST_ORDER = "first-order"
SECOND_ORDER = "second-order"


def _parity_columns(kind: str, signs: np.ndarray) -> dict:
    """Build the construction from independent sign columns.

    First order uses two columns ``(X, Y)``; second order uses eight,
    ``(X1, Y1, X2, Y2, X3, Y3, S1, S2)`` with ``S3 = S1 * S2``.
    """
    if kind == FIRST_ORDER:
        x, y = signs
        return {"X": x, "Y": y, "Z": x * y}
    if kind == SECOND_ORDER:
        x1, y1, x2, y2, x3, y3, s1, s2 = signs
        s3 = s1 * s2
        out = {}
        for j, (x, y, s) in enumerate(((x1, y1, s1), (x2, y2, s2), (x3, y3, s3)), start=1):
            out[f"X{j}"], out[f"Y{j}"], out[f"Z{j}"] = x, y, x * y * s
        return out
    raise ValueError(f"unknown construction {kind!r}")


def _free_columns(kind: str) -> int:
    return {FIRST_ORDER: 2, SECOND_ORDER: 8}[kind]


def make_parity_data(kind: str, n: int, seed: int = 0) -> dict:
    """Sampled +-1 series realizing the first- or second-order construction."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1.0, 1.0]), size=(_free_columns(kind), n))
    return _parity_columns(kind, signs)


def enumerate_parity(kind: str) -> dict:
    """The whole population: one sample per assignment of the free signs."""
    k = _free_columns(kind)
    rows = np.array(list(itertools.product((-1.0, 1.0), repeat=k))).T
    return _parity_columns(kind, rows)


def read_csv(path) -> dict:
    """Read series from a CSV file whose header row names the columns."""
    try:
        with open(Path(path), newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    header, body = rows[0], [r for r in rows[1:] if r]
    if len(set(header)) != len(header):
        raise FormatError("duplicate column names")
    try:
        columns = np.array(body, dtype=float).reshape(len(body), len(header)).T
    except ValueError as exc:
        raise FormatError(f"non-numeric or ragged CSV: {exc}") from exc
    return {name: columns[i] for i, name in enumerate(header)}


def write_csv(path, series: Mapping[str, np.ndarray]) -> None:
    names = list(series)
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*(series[k] for k in names)):
            w.writerow([repr(float(v)) for v in row])
