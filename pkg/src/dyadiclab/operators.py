"""Dyadic shift operators on truncated Haar coefficient spaces.

The coefficient swap of the sibling shift sends the right-child coefficient
to the left child with sign + and the left-child coefficient to the right
child with sign -, so the operator squares to -identity on the span of all
child-level Haar functions and is antisymmetric.  The classical shift fans
each coefficient out to its two children with weights -1/sqrt(2), +1/sqrt(2)
and drops whatever is pushed below the truncation depth.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import (
    DyadicInterval,
    HaarExpansion,
    analyze_values,
    coeff_vector,
    expansion_from_vector,
    grid_points,
    interval_of_slot,
    mean_over,
    synthesize_grid,
    synthesize_values,
    unit_haar,
    vector_size,
)

SQRT2 = math.sqrt(2.0)

_KINDS = ("s0", "s0_line", "s_classical", "t_alpha")


@dataclass(frozen=True)
class ShiftKind:
    """Tag for a matrix realization.

    ``s0_line`` shares the coefficient action of ``s0``: on the truncated
    tree of the unit interval the two operators differ only through the
    embedding bookkeeping measured by line_vs_interval_report.  T_alpha
    signs default to +1 on unlisted intervals.
    """

    kind: str = "s0"
    signs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    def label(self) -> str:
        return self.kind


def apply_s0(expansion: HaarExpansion) -> HaarExpansion:
    """Sibling swap with a sign twist; kills the mean and root coefficient."""
    out: dict[DyadicInterval, float] = {}
    for interval, value in expansion.coeffs.items():
        if interval.level == 0:
            continue
        if interval.is_right_child():
            out[interval.sibling()] = value
        else:
            out[interval.sibling()] = -value
    return HaarExpansion(mean=0.0, coeffs=out, depth=expansion.depth)


def apply_t_alpha(expansion: HaarExpansion, signs) -> HaarExpansion:
    """Coefficient-wise multiplication by signs in {-1, +1}; mean unchanged."""
    table = {DyadicInterval(*k): int(v) for k, v in dict(signs).items()}
    for value in table.values():
        if value not in (-1, 1):
            raise ValueError("multiplier signs must be -1 or +1")
    out = {
        interval: value * table.get(interval, 1)
        for interval, value in expansion.coeffs.items()
    }
    return HaarExpansion(mean=expansion.mean, coeffs=out, depth=expansion.depth)


def apply_s_classical(expansion: HaarExpansion, return_dropped: bool = False):
    """Classical shift h_I -> (h_right - h_left)/sqrt(2) at fixed depth.

    Coefficients at level depth-1 would land at level depth and are dropped;
    with ``return_dropped`` the squared l2 mass of the dropped part is
    reported alongside.  The mean slot is annihilated.
    """
    out: dict[DyadicInterval, float] = {}
    dropped = 0.0
    for interval, value in expansion.coeffs.items():
        if interval.level + 1 >= expansion.depth:
            dropped += value * value
            continue
        w = value / SQRT2
        left = interval.left_child()
        right = interval.right_child()
        out[left] = out.get(left, 0.0) - w
        out[right] = out.get(right, 0.0) + w
    result = HaarExpansion(mean=0.0, coeffs=out, depth=expansion.depth)
    if return_dropped:
        return result, dropped
    return result


# Vector forms of the same actions (slot 0 = mean, slot 2^k + m = (k, m)).


def apply_s0_vector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    out = np.zeros_like(vec)
    n = vec.shape[0]
    depth = n.bit_length() - 1
    for k in range(1, depth):
        block = vec[2**k : 2**(k + 1)]
        target = out[2**k : 2**(k + 1)]
        target[0::2] = block[1::2]
        target[1::2] = -block[0::2]
    return out


def apply_s0_vector_transpose(vec: np.ndarray) -> np.ndarray:
    return -apply_s0_vector(vec)


def apply_t_alpha_vector(vec: np.ndarray, signs) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    diag = np.ones(vec.shape[0])
    for key, value in dict(signs).items():
        interval = DyadicInterval(*key)
        slot = 2**interval.level + interval.index
        if slot < vec.shape[0]:
            diag[slot] = float(value)
    return vec * diag.reshape((-1,) + (1,) * (vec.ndim - 1))


def apply_s_classical_vector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    out = np.zeros_like(vec)
    n = vec.shape[0]
    depth = n.bit_length() - 1
    for k in range(depth - 1):
        block = vec[2**k : 2**(k + 1)]
        target = out[2**(k + 1) : 2**(k + 2)]
        target[0::2] -= block / SQRT2
        target[1::2] += block / SQRT2
    return out


def apply_s_classical_vector_transpose(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    out = np.zeros_like(vec)
    n = vec.shape[0]
    depth = n.bit_length() - 1
    for k in range(depth - 1):
        block = vec[2**(k + 1) : 2**(k + 2)]
        out[2**k : 2**(k + 1)] = (block[1::2] - block[0::2]) / SQRT2
    return out


def apply_kind_vector(kind: ShiftKind, vec: np.ndarray, transpose: bool = False) -> np.ndarray:
    if kind.kind in ("s0", "s0_line"):
        return apply_s0_vector_transpose(vec) if transpose else apply_s0_vector(vec)
    if kind.kind == "s_classical":
        if transpose:
            return apply_s_classical_vector_transpose(vec)
        return apply_s_classical_vector(vec)
    return apply_t_alpha_vector(vec, kind.signs)


@dataclass
class OperatorMatrix:
    """Dense realization on the ordered coefficient basis.

    Basis order is pinned for reproducibility: slot 0 the mean, slot 1 the
    root, then intervals (k, m) level-major, 2^depth slots in total.
    """

    kind: ShiftKind
    depth: int
    entries: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# kind={self.kind.label()} depth={self.depth}\n")
        for row in self.entries:
            buf.write(",".join(format(v, ".17g") for v in row))
            buf.write("\n")
        return buf.getvalue()


MAX_MATRIX_DIM = 2**15


def as_matrix(kind: ShiftKind, depth: int) -> OperatorMatrix:
    """Matrix whose columns are the coefficient images of basis expansions."""
    dim = vector_size(depth)
    if depth > 14 or dim > MAX_MATRIX_DIM:
        raise ValueError(f"depth {depth} exceeds the matrix dimension bound")
    entries = np.zeros((dim, dim))
    for col in range(dim):
        basis = np.zeros(dim)
        basis[col] = 1.0
        entries[:, col] = apply_kind_vector(kind, basis)
    return OperatorMatrix(kind=kind, depth=depth, entries=entries)


@dataclass
class FourArcProjection:
    """Step function taking the four quarter-arc averages on the torus.

    Arc i is [i pi/2, (i+1) pi/2) for i in (-2, -1, 0, 1).
    """

    averages: np.ndarray  # ordered (A_-2, A_-1, A_0, A_1)

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
        arc = np.clip(np.floor(wrapped / (np.pi / 2.0)).astype(int) + 2, 0, 3)
        return self.averages[arc]


def project_four_arcs(f) -> FourArcProjection:
    """Average over the four quarter arcs.

    ``f`` is either an array of samples on a uniform midpoint grid of the
    torus [-pi, pi) with length divisible by 4, or a FourierSeries (exact
    arc integrals of each mode).
    """
    from .hilbert import FourierSeries

    if isinstance(f, FourierSeries):
        averages = np.zeros(4)
        bounds = [(-np.pi + i * np.pi / 2.0, -np.pi + (i + 1) * np.pi / 2.0) for i in range(4)]
        for i, (a, b) in enumerate(bounds):
            total = 0.0 + 0.0j
            for n, c in f.items():
                if n == 0:
                    total += c * (b - a)
                else:
                    total += c * (np.exp(1j * n * b) - np.exp(1j * n * a)) / (1j * n)
            averages[i] = (total / (np.pi / 2.0)).real
        return FourArcProjection(averages=averages)
    values = np.asarray(f, dtype=float)
    if values.ndim != 1 or values.size % 4 != 0:
        raise ValueError("sampled input must be a flat array with length divisible by 4")
    averages = values.reshape(4, -1).mean(axis=1)
    return FourArcProjection(averages=averages)


@dataclass
class LineComparisonReport:
    """Outcome of embedding a unit-interval function ``levels_above`` scales
    up and applying the ancestor-tree shift there.

    ``correction_sup`` is the reported discrepancy: the sup norm of the two
    components (mean and top Haar coefficient of the big interval) that must
    be removed before the embedded operator acts, bounded by
    2 ||f||_L1 / |J|.  ``restriction_max_error`` witnesses that inside the
    unit interval both operators agree exactly.
    """

    p: float
    levels_above: int
    correction_sup: float
    restriction_max_error: float
    norm_interval: float
    norm_embedded: float
    f_l1: float

    def to_json(self) -> str:
        import json

        return json.dumps(self.__dict__, sort_keys=True)


def line_vs_interval_report(
    expansion: HaarExpansion, levels_above: int, p: float = 2.0
) -> LineComparisonReport:
    """Compare the shift on the unit interval with its embedding into the
    dyadic ancestor J = [0, 2^levels_above)."""
    if levels_above < 1:
        raise ValueError("levels_above must be at least 1")
    h = levels_above
    depth = max(expansion.depth, 1)

    # Embed: J-tree values at depth h + depth; f occupies the first 2^depth
    # atoms, the rest vanish.  The J-tree is the unit tree rescaled, so the
    # standard transforms apply verbatim up to measure factors.
    values = np.zeros(2 ** (h + depth))
    values[: 2**depth] = synthesize_grid(expansion, depth)
    big_vec = analyze_values(values)

    # Removed components in true units: f sits inside one child of every
    # ancestor, so both the mean of J and its top Haar term are determined
    # by the integral of f alone; their sup norms are |mean(f)| / |J| each,
    # together bounded by 2 ||f||_L1 / |J|.  Computed exactly (scaling by a
    # power of two) so that mean-free inputs report exactly zero.
    size_j = 2.0**h
    correction_sup = 2.0 * abs(expansion.mean) / size_j

    shifted = apply_s0_vector(big_vec)
    inside = synthesize_values(shifted)[: 2**depth]
    direct = synthesize_grid(apply_s0(expansion), depth)
    restriction_max_error = float(np.max(np.abs(inside - direct))) if inside.size else 0.0

    # L^p norms: embedded one over J with true measure (atom length 2^h/2^(h+depth)),
    # interval one over [0, 1).
    atoms = synthesize_values(shifted)
    norm_embedded = float((np.mean(np.abs(atoms) ** p) * size_j) ** (1.0 / p))
    norm_interval = float(np.mean(np.abs(direct) ** p) ** (1.0 / p))
    f_l1 = float(np.mean(np.abs(values[: 2**depth])))

    return LineComparisonReport(
        p=p,
        levels_above=h,
        correction_sup=float(correction_sup),
        restriction_max_error=restriction_max_error,
        norm_interval=norm_interval,
        norm_embedded=norm_embedded,
        f_l1=f_l1,
    )
