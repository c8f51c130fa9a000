"""Ground-truth preference matrices, dataset builders and asymptotic regret constants.

Arms are 1-indexed on every public surface; the underlying array is 0-indexed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import bernoulli_kl

TOLERANCE = 1e-12


class MatrixError(ValueError):
    """Base class for malformed preference matrices."""


class MatrixParseError(MatrixError):
    pass


class MatrixShapeError(MatrixError):
    pass


class MatrixValidationError(MatrixError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class NoCondorcetWinnerError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # "range", "diagonal" or "complement"
    i: int
    j: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} violation at ({self.i},{self.j}): {self.detail}"


class PreferenceMatrix:
    """K x K matrix of win probabilities; mu(i, j) is P(arm i beats arm j)."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise MatrixShapeError(f"preference matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise MatrixShapeError("preference matrix needs K >= 2 arms")
        arr.setflags(write=False)
        self._values = arr

    @property
    def k(self) -> int:
        return self._values.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Read-only 0-indexed array of win probabilities."""
        return self._values

    def mu(self, i: int, j: int) -> float:
        return float(self._values[i - 1, j - 1])

    def gap(self, i: int, j: int) -> float:
        """mu(i, j) - 1/2."""
        return self.mu(i, j) - 0.5

    def arms(self) -> range:
        return range(1, self.k + 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PreferenceMatrix):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"PreferenceMatrix(k={self.k})"


def validate(m: PreferenceMatrix) -> list[Violation]:
    """Return every violated invariant; an empty list means the matrix is valid."""
    v = m.values
    out = []
    for i in range(m.k):
        for j in range(m.k):
            x = v[i, j]
            if not (0.0 <= x <= 1.0):
                out.append(Violation("range", i + 1, j + 1, f"mu={x!r} outside [0, 1]"))
    for i in range(m.k):
        if v[i, i] != 0.5:
            out.append(Violation("diagonal", i + 1, i + 1, f"mu={v[i, i]!r}, expected 0.5"))
        for j in range(i + 1, m.k):
            s = v[i, j] + v[j, i]
            if not abs(s - 1.0) <= TOLERANCE:
                out.append(
                    Violation("complement", i + 1, j + 1, f"mu(i,j)+mu(j,i)={s!r}, expected 1")
                )
    return out


def condorcet_winner(m: PreferenceMatrix) -> int | None:
    for i in m.arms():
        if all(m.mu(i, j) > 0.5 for j in m.arms() if j != i):
            return i
    return None


def superiors(m: PreferenceMatrix, i: int) -> set[int]:
    """Arms that beat arm i on average (strictly)."""
    return {j for j in m.arms() if m.mu(i, j) < 0.5}


def _require_winner(m: PreferenceMatrix) -> int:
    w = condorcet_winner(m)
    if w is None:
        raise NoCondorcetWinnerError("preference matrix has no Condorcet winner")
    return w


def _elimination_cost(m: PreferenceMatrix, w: int, i: int, j: int) -> float:
    # regret per log-round of eliminating i by comparisons with j, without the factor 1/2
    return (m.gap(w, i) + m.gap(w, j)) / bernoulli_kl(m.mu(i, j), 0.5)


def best_opponent(m: PreferenceMatrix, i: int) -> int:
    """Cheapest superior to eliminate arm i with; ties go to the lowest index."""
    w = _require_winner(m)
    if i == w:
        raise ValueError(f"arm {i} is the Condorcet winner and has no superiors")
    best, best_cost = None, math.inf
    for j in sorted(superiors(m, i)):
        cost = _elimination_cost(m, w, i, j)
        if cost < best_cost:
            best, best_cost = j, cost
    return best


@dataclass(frozen=True)
class BoundReport:
    winner: int
    minimizers: dict[int, int]
    terms: dict[int, float]
    true_lb: float
    lb1: float


def rmed1_lb_coefficient(m: PreferenceMatrix) -> float:
    """Leading log T constant of RMED1's regret upper bound."""
    w = _require_winner(m)
    return math.fsum(
        m.gap(w, i) / (2.0 * bernoulli_kl(m.mu(i, w), 0.5)) for i in m.arms() if i != w
    )


def true_lb_coefficient(m: PreferenceMatrix) -> BoundReport:
    """Asymptotic lower-bound constant on E[R(T)] / log T, with per-arm breakdown."""
    w = _require_winner(m)
    minimizers, terms = {}, {}
    for i in m.arms():
        if i == w:
            continue
        b = best_opponent(m, i)
        minimizers[i] = b
        terms[i] = _elimination_cost(m, w, i, b) / 2.0
    return BoundReport(
        winner=w,
        minimizers=minimizers,
        terms=terms,
        true_lb=math.fsum(terms.values()),
        lb1=rmed1_lb_coefficient(m),
    )


# ---------------------------------------------------------------- datasets


def _from_upper(k: int, upper: dict[tuple[int, int], float]) -> PreferenceMatrix:
    v = np.full((k, k), 0.5)
    for (i, j), x in upper.items():
        v[i - 1, j - 1] = x
        v[j - 1, i - 1] = 1.0 - x
    return PreferenceMatrix(v)


def example1(q: float) -> PreferenceMatrix:
    """Three arms; arm 1 wins, and q = mu(2, 3) controls who best eliminates arm 3."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    return _from_upper(3, {(1, 2): 0.7, (1, 3): 0.7, (2, 3): q})


_SIX_RANKERS = [
    [0.50, 0.55, 0.55, 0.54, 0.61, 0.61],
    [0.45, 0.50, 0.55, 0.55, 0.58, 0.60],
    [0.45, 0.45, 0.50, 0.54, 0.51, 0.56],
    [0.46, 0.45, 0.46, 0.50, 0.54, 0.50],
    [0.39, 0.42, 0.49, 0.46, 0.50, 0.51],
    [0.39, 0.40, 0.44, 0.50, 0.49, 0.50],
]

_CYCLIC = [
    [0.5, 0.6, 0.6, 0.6],
    [0.4, 0.5, 0.9, 0.1],
    [0.4, 0.1, 0.5, 0.9],
    [0.4, 0.9, 0.1, 0.5],
]


def six_rankers() -> PreferenceMatrix:
    """Six retrieval functions of the ArXiv.org search engine (symmetrised)."""
    return PreferenceMatrix(_SIX_RANKERS)


def cyclic() -> PreferenceMatrix:
    """Arms 2, 3, 4 beat each other cyclically; arm 1 beats all of them by 0.1."""
    return PreferenceMatrix(_CYCLIC)


def arithmetic(k: int = 8) -> PreferenceMatrix:
    """Total order with mu(i, j) = 0.5 + 0.05 (j - i); arm 1 is the winner."""
    if not 2 <= k <= 11:
        raise ValueError(f"arithmetic needs 2 <= k <= 11, got {k}")
    return _from_upper(
        k, {(i, j): 0.5 + 0.05 * (j - i) for i in range(1, k + 1) for j in range(i + 1, k + 1)}
    )


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    builder: object
    params: dict  # parameter name -> default, or None when required


DATASETS = {
    "six_rankers": DatasetInfo("six_rankers", six_rankers, {}),
    "cyclic": DatasetInfo("cyclic", cyclic, {}),
    "arithmetic": DatasetInfo("arithmetic", arithmetic, {"k": 8}),
    "example1": DatasetInfo("example1", example1, {"q": None}),
}


def build(name: str, **params) -> PreferenceMatrix:
    """Build a named dataset; missing required parameters raise TypeError."""
    try:
        info = DATASETS[name]
    except KeyError:
        raise KeyError(f"unknown dataset {name!r}; choose from {sorted(DATASETS)}") from None
    kwargs = {}
    for key, default in info.params.items():
        value = params.pop(key, default)
        if value is None:
            raise TypeError(f"dataset {name!r} requires parameter {key!r}")
        kwargs[key] = value
    if params:
        raise TypeError(f"dataset {name!r} got unexpected parameters {sorted(params)}")
    return info.builder(**kwargs)


# ---------------------------------------------------------------- CSV


def from_csv(text: str) -> PreferenceMatrix:
    """Parse K lines of K comma-separated decimals and validate the result."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        row = []
        for col, field in enumerate(line.split(","), start=1):
            try:
                row.append(float(field))
            except ValueError:
                raise MatrixParseError(
                    f"line {lineno}, field {col}: cannot parse {field.strip()!r} as a number"
                ) from None
        rows.append((lineno, row))
    if not rows:
        raise MatrixShapeError("empty matrix")
    k = len(rows)
    for lineno, row in rows:
        if len(row) != k:
            raise MatrixShapeError(f"line {lineno}: expected {k} fields, got {len(row)}")
    m = PreferenceMatrix([row for _, row in rows])
    violations = validate(m)
    if violations:
        raise MatrixValidationError(violations)
    return m


def to_csv(m: PreferenceMatrix) -> str:
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in m.values)
