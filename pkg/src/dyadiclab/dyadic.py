"""Dyadic tree combinatorics and the Haar system on the unit interval.

Conventions fixed project-wide:

* A Haar function is NEGATIVE on the left child and POSITIVE on the right
  child: ``h_I = |I|^{-1/2} (1_{right} - 1_{left})``.
* Functions are step functions resolved on the dyadic grid of some depth
  ``d`` (2^d samples, one per atom of generation d).
* Points are classified with exact dyadic-rational arithmetic so that
  membership at child borders is never decided by floating-point noise.
* The dense coefficient layout used by the operator/optimizer layers puts
  the mean in slot 0 and interval (k, m) in slot ``2^k + m`` (level-major).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np


class DyadicInterval(NamedTuple):
    """Node (level k, index m) of the dyadic tree: [m 2^-k, (m+1) 2^-k)."""

    level: int
    index: int

    @property
    def length(self) -> float:
        return 2.0 ** (-self.level)

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise ValueError("the root interval has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    def left_child(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.index)

    def right_child(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    def is_left_child(self) -> bool:
        if self.level == 0:
            return False
        return self.index % 2 == 0

    def is_right_child(self) -> bool:
        if self.level == 0:
            return False
        return self.index % 2 == 1

    def sibling(self) -> "DyadicInterval":
        if self.level == 0:
            raise ValueError("the root interval has no sibling")
        return DyadicInterval(self.level, self.index ^ 1)

    def endpoints(self) -> tuple[Fraction, Fraction]:
        d = Fraction(1, 2**self.level)
        return self.index * d, (self.index + 1) * d

    def contains(self, x) -> bool:
        lo, hi = self.endpoints()
        fx = Fraction(x)
        return lo <= fx < hi


def _check_interval(interval: DyadicInterval) -> None:
    k, m = interval
    if k < 0 or not 0 <= m < 2**k:
        raise ValueError(f"invalid interval of the unit tree: {interval}")


ROOT = DyadicInterval(0, 0)


def atom_index(x, level: int) -> int:
    """Index m of the generation-``level`` atom containing x, exactly."""
    fx = Fraction(x)
    if not 0 <= fx < 1:
        raise ValueError(f"point {x!r} lies outside [0, 1)")
    return math.floor(fx * 2**level)


def haar_eval(interval: DyadicInterval, x) -> float:
    """Value of h_I at x: -|I|^{-1/2} on the left child, +|I|^{-1/2} on the
    right child, 0 outside I."""
    _check_interval(interval)
    k, m = interval
    try:
        child = atom_index(x, k + 1)
    except ValueError:
        return 0.0
    if child == 2 * m:
        return -math.sqrt(2.0**k)
    if child == 2 * m + 1:
        return math.sqrt(2.0**k)
    return 0.0


def toss(k: int, x) -> int:
    """Sign toss of generation k: +1 iff x lies in a right child at level k+1."""
    if k < 0:
        raise ValueError("generation must be non-negative")
    return 1 if atom_index(x, k + 1) % 2 == 1 else -1


def toss_signed(k: int, sign: int, x) -> int:
    """Left (sign=-1) or right (sign=+1) toss of generation k >= 1.

    Equals toss(k, x) when the level-k interval containing x is a child of
    the given signature, i.e. when toss(k-1, x) == sign, and 0 otherwise.
    """
    if k < 1:
        raise ValueError("generation 0 has no left or right toss")
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    if toss(k - 1, x) != sign:
        return 0
    return toss(k, x)


@dataclass
class HaarExpansion:
    """Finite-depth Haar coefficient table: mean over [0,1) plus a sparse
    map interval -> (f, h_I) for intervals of level < depth."""

    mean: float = 0.0
    coeffs: dict[DyadicInterval, float] = field(default_factory=dict)
    depth: int = 0

    def __post_init__(self) -> None:
        clean: dict[DyadicInterval, float] = {}
        for key, value in self.coeffs.items():
            interval = DyadicInterval(*key)
            _check_interval(interval)
            if interval.level >= self.depth:
                raise ValueError(
                    f"coefficient at level {interval.level} is too deep for depth {self.depth}"
                )
            clean[interval] = float(value)
        self.coeffs = clean

    def coefficient(self, interval: DyadicInterval) -> float:
        return self.coeffs.get(DyadicInterval(*interval), 0.0)

    def l2_norm(self) -> float:
        return math.sqrt(self.mean**2 + sum(c * c for c in self.coeffs.values()))

    def lp_norm(self, p: float, depth: int | None = None) -> float:
        d = self.depth if depth is None else depth
        values = synthesize_grid(self, d)
        return float((np.mean(np.abs(values) ** p)) ** (1.0 / p))

    def scaled(self, factor: float) -> "HaarExpansion":
        return HaarExpansion(
            mean=self.mean * factor,
            coeffs={key: value * factor for key, value in self.coeffs.items()},
            depth=self.depth,
        )

    def to_json(self) -> str:
        payload = {
            "mean": self.mean,
            "depth": self.depth,
            "coeffs": [[k, m, v] for (k, m), v in sorted(self.coeffs.items())],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HaarExpansion":
        payload = json.loads(text)
        coeffs = {DyadicInterval(int(k), int(m)): float(v) for k, m, v in payload["coeffs"]}
        return cls(mean=float(payload["mean"]), coeffs=coeffs, depth=int(payload["depth"]))


def unit_haar(interval: DyadicInterval, depth: int | None = None) -> HaarExpansion:
    """Expansion of a single Haar function h_I."""
    interval = DyadicInterval(*interval)
    _check_interval(interval)
    d = interval.level + 1 if depth is None else depth
    return HaarExpansion(mean=0.0, coeffs={interval: 1.0}, depth=d)


def analyze(samples) -> HaarExpansion:
    """Haar analysis of a step function given by its 2^d atom values."""
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1:
        raise ValueError("expected a flat array of atom values")
    n = values.size
    if n == 0 or n & (n - 1) != 0:
        raise ValueError(f"length {n} is not a power of two")
    depth = n.bit_length() - 1
    vec = analyze_values(values)
    return expansion_from_vector(vec, depth)


def synthesize(expansion: HaarExpansion, x) -> float:
    """Evaluate mean + sum of coeff(I) h_I(x) by walking the ancestor chain."""
    try:
        atom_index(x, 0)
    except ValueError:
        return 0.0
    total = expansion.mean
    for k in range(expansion.depth):
        m = atom_index(x, k)
        c = expansion.coeffs.get(DyadicInterval(k, m))
        if c is not None:
            # sign by which child of (k, m) contains x
            sign = 1.0 if atom_index(x, k + 1) % 2 == 1 else -1.0
            total += c * sign * math.sqrt(2.0**k)
    return total


def synthesize_grid(expansion: HaarExpansion, depth: int | None = None) -> np.ndarray:
    """Step-function values of the expansion on the depth-d grid."""
    d = expansion.depth if depth is None else depth
    if d < expansion.depth:
        raise ValueError("grid depth is coarser than the expansion depth")
    vec = np.zeros(2**max(d, expansion.depth), dtype=float)
    vec[0] = expansion.mean
    for (k, m), value in expansion.coeffs.items():
        vec[2**k + m] = value
    if d == 0:
        return vec[:1].copy()
    return synthesize_values(vec[: 2**d])


def mean_over(expansion: HaarExpansion, interval: DyadicInterval) -> float:
    """Average of the synthesized function over a dyadic interval (MRA walk)."""
    interval = DyadicInterval(*interval)
    _check_interval(interval)
    total = expansion.mean
    k, m = interval
    for j in range(k):
        ancestor = DyadicInterval(j, m >> (k - j))
        c = expansion.coeffs.get(ancestor)
        if c is not None:
            child = m >> (k - j - 1)
            sign = 1.0 if child % 2 == 1 else -1.0
            total += c * sign * math.sqrt(2.0**j)
    return total


def martingale_difference(expansion: HaarExpansion, interval: DyadicInterval) -> float:
    """d_I f = (⟨f⟩_{right} - ⟨f⟩_{left}) / 2 = ⟨f⟩_{right} - ⟨f⟩_I."""
    interval = DyadicInterval(*interval)
    if interval.level >= expansion.depth:
        raise ValueError("interval level must be smaller than the expansion depth")
    right = mean_over(expansion, interval.right_child())
    left = mean_over(expansion, interval.left_child())
    return 0.5 * (right - left)


# ---------------------------------------------------------------------------
# Dense coefficient-vector layer.
#
# Slot 0 holds the mean and slot 2^k + m the coefficient of interval (k, m);
# a depth-d space occupies 2^d slots (levels 0 .. d-1).  The transforms of
# this layer are the O(2^d d) workhorses behind the operator matrices and
# the norm optimizer; arrays may carry extra trailing axes (batches).
# ---------------------------------------------------------------------------


def vector_size(depth: int) -> int:
    return 2**depth


def slot_of(interval: DyadicInterval) -> int:
    k, m = interval
    return 2**k + m


def interval_of_slot(slot: int) -> DyadicInterval:
    if slot <= 0:
        raise ValueError("slot 0 is the mean, not an interval")
    k = slot.bit_length() - 1
    return DyadicInterval(k, slot - 2**k)


def coeff_vector(expansion: HaarExpansion, depth: int | None = None) -> np.ndarray:
    d = expansion.depth if depth is None else depth
    if d < expansion.depth:
        raise ValueError("vector depth is smaller than the expansion depth")
    vec = np.zeros(vector_size(d), dtype=float)
    vec[0] = expansion.mean
    for interval, value in expansion.coeffs.items():
        vec[slot_of(interval)] = value
    return vec


def expansion_from_vector(vec: np.ndarray, depth: int, tol: float = 0.0) -> HaarExpansion:
    vec = np.asarray(vec, dtype=float)
    if vec.size != vector_size(depth):
        raise ValueError("vector length does not match depth")
    coeffs = {}
    for slot in range(1, vec.size):
        if abs(vec[slot]) > tol:
            coeffs[interval_of_slot(slot)] = float(vec[slot])
    return HaarExpansion(mean=float(vec[0]), coeffs=coeffs, depth=depth)


def synthesize_values(vec: np.ndarray) -> np.ndarray:
    """Inverse transform: coefficient vector -> 2^d atom values (axis 0)."""
    vec = np.asarray(vec, dtype=float)
    n = vec.shape[0]
    if n & (n - 1) != 0:
        raise ValueError("coefficient vector length must be a power of two")
    depth = n.bit_length() - 1
    averages = vec[:1].copy()
    for k in range(depth):
        block = vec[2**k : 2**(k + 1)]
        diff = block * math.sqrt(2.0**k)
        out = np.empty((2 ** (k + 1),) + vec.shape[1:], dtype=float)
        out[0::2] = averages - diff
        out[1::2] = averages + diff
        averages = out
    return averages


def analyze_values(values: np.ndarray) -> np.ndarray:
    """Forward transform: 2^d atom values -> coefficient vector (axis 0)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n & (n - 1) != 0:
        raise ValueError("value array length must be a power of two")
    depth = n.bit_length() - 1
    vec = np.empty_like(values)
    averages = values
    for k in range(depth - 1, -1, -1):
        left = averages[0::2]
        right = averages[1::2]
        vec[2**k : 2**(k + 1)] = 0.5 * (right - left) / math.sqrt(2.0**k)
        averages = 0.5 * (left + right)
    vec[0] = averages[0]
    return vec


def grid_points(depth: int) -> np.ndarray:
    """Atom midpoints of the depth-d grid (safe evaluation points)."""
    n = 2**depth
    return (np.arange(n) + 0.5) / n


def steps_to_csv(values: Iterable[float]) -> str:
    return ",".join(format(float(v), ".17g") for v in values)


def steps_from_csv(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.strip().split(",") if tok], dtype=float)
