"""Kernel of the sibling shift over translated and dilated grids, and its
translation/dilation averages.

For a fixed grid, at most one scale contributes to the kernel at (t, x):
the unique interval whose two children separate the points.  Two points on
opposite sides of the grid anchor alpha never share an interval, and the
kernel vanishes there.  The translation average is computed scale by scale
in closed form: the per-scale term is periodic in alpha with period equal
to the interval length, and its one-period mean is a piecewise-constant
integral with at most three pieces.  The dilation average uses u = log2 r
so that the dr/r weight becomes a uniform quadrature on [0, 1].
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

_PARTS = ("full", "minus", "plus", "even")


@dataclass(frozen=True)
class GridParams:
    """Translated/dilated grid: intervals alpha + r [m 2^-k, (m+1) 2^-k).

    The dilation factor r lives in [1, 2), one full octave; its logarithmic
    average makes the family scale-invariant."""

    r: float = 1.0
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not 1.0 <= self.r < 2.0:
            raise ValueError("dilation factor r must lie in [1, 2)")


def _separating_scale(
    t: float,
    x: float,
    params: GridParams,
    max_length: float | None = None,
    max_doublings: int = 80,
):
    """(k, L, u_t, u_x): scale index and length of the interval whose
    children separate t and x, plus offsets of both points inside it.
    Returns None when the points straddle the grid anchor, or when the
    separating interval is longer than ``max_length`` (scale truncation
    used by the windowed translation average)."""
    s_t = t - params.alpha
    s_x = x - params.alpha
    if (s_t < 0.0) != (s_x < 0.0):
        return None
    d = abs(s_x - s_t)
    if d == 0.0:
        raise ValueError("kernel is undefined on the diagonal t = x")
    # coarsest scale: both offsets inside one atom
    reach = max(abs(s_t), abs(s_x))
    k = int(math.floor(math.log2(params.r) - math.log2(max(reach, d)))) - 2
    for _ in range(max_doublings):
        L = params.r * 2.0**-k
        if math.floor(s_t / L) == math.floor(s_x / L):
            break
        k -= 1
    else:
        return None
    # descend until the atoms split; the previous scale separates
    while True:
        L = params.r * 2.0**-k
        m_t = math.floor(s_t / (L / 2.0))
        m_x = math.floor(s_x / (L / 2.0))
        if m_t != m_x:
            if max_length is not None and L > max_length:
                return None
            u_t = s_t - L * math.floor(s_t / L)
            u_x = s_x - L * math.floor(s_x / L)
            return k, L, u_t, u_x
        k += 1


def kernel_value(
    t: float, x: float, params: GridParams, part: str = "full",
    max_length: float | None = None,
) -> float:
    """Kernel of the shift on the given grid at (t, x).

    part selects the full kernel, the two partial kernels supported on one
    side of the diagonal, or their even combination."""
    if part not in _PARTS:
        raise ValueError(f"part must be one of {_PARTS}")
    found = _separating_scale(t, x, params, max_length)
    if found is None:
        return 0.0
    _, L, u_t, u_x = found
    half = L / 2.0
    quarter = L / 4.0
    t_left = u_t < half
    # sign of the Haar function of the child at each point
    pos_t = u_t if t_left else u_t - half
    pos_x = u_x if u_x < half else u_x - half
    sigma_t = -1.0 if pos_t < quarter else 1.0
    sigma_x = -1.0 if pos_x < quarter else 1.0
    magnitude = sigma_t * sigma_x * (2.0 / L)
    if t_left:
        # t in the left child, x in the right: only -h_left(t) h_right(x) fires
        plus_term = -magnitude
        minus_term = 0.0
    else:
        plus_term = 0.0
        minus_term = magnitude
    if part == "full":
        return plus_term + minus_term
    if part == "plus":
        return plus_term
    if part == "minus":
        return minus_term
    return minus_term - plus_term


def _scale_mean(d: float, L: float, part: str) -> float:
    """Exact one-period alpha average of the scale-L term at separation
    d > 0.  The contributing offsets u of the left point form an interval
    of length min(d, L - d); the integrand is +-2/L with sign changes where
    either point crosses the middle of its child."""
    if d <= 0 or d >= L:
        return 0.0
    half = L / 2.0
    quarter = L / 4.0
    u_lo = max(0.0, half - d)
    u_hi = min(half, L - d)
    if u_hi <= u_lo:
        return 0.0
    # sign flips: sigma_t at u = quarter, sigma_x at u = 3L/4 - d
    cuts = sorted({u_lo, u_hi, quarter, 3.0 * quarter - d})
    cuts = [c for c in cuts if u_lo <= c <= u_hi]
    if cuts[0] != u_lo:
        cuts.insert(0, u_lo)
    if cuts[-1] != u_hi:
        cuts.append(u_hi)
    acc = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        sigma_t = -1.0 if mid < quarter else 1.0
        w = mid + d - half  # offset of the right point inside its child
        sigma_x = -1.0 if w < quarter else 1.0
        acc += sigma_t * sigma_x * (b - a)
    base = acc * (2.0 / L) / L
    # for d > 0 only the over-diagonal partial kernel fires, with value
    # -sigma_t sigma_x (2/L); the even combination flips its sign back
    if part == "full" or part == "plus":
        return -base
    if part == "minus":
        return 0.0
    return base  # even


def average_translations(
    t: float,
    x: float,
    r: float,
    window: float | None = None,
    alpha_points: int | None = None,
    part: str = "full",
    tail: float = 1e-14,
) -> float:
    """Translation average of the kernel at dilation exponent r.

    Exact mode (default): sums the closed-form one-period means over all
    scales whose relative contribution exceeds ``tail``; by periodicity
    this equals the infinite-window limit.  Sampling mode (alpha_points
    given): uniform midpoint quadrature over a window rounded up to an
    exact multiple of the coarsest contributing period."""
    if part not in _PARTS:
        raise ValueError(f"part must be one of {_PARTS}")
    d = x - t
    if d == 0.0:
        raise ValueError("translation average is undefined on the diagonal")

    if alpha_points is not None:
        # window rounds up to an exact grid period; scales coarser than the
        # window are truncated so every contributing scale completes full
        # periods and enlarging the window cannot change the average
        want = window if window is not None else 64.0 * abs(d)
        k = int(math.floor(math.log2(r) - math.log2(want)))
        period = r * 2.0**-k
        offsets = (np.arange(alpha_points) + 0.5) * (period / alpha_points)
        total = 0.0
        for a in offsets:
            total += kernel_value(
                t, x, GridParams(r=r, alpha=float(a)), part, max_length=period
            )
        return total / alpha_points

    if d < 0:
        if part == "full":
            return -average_translations(x, t, r, part="full", tail=tail)
        if part == "even":
            return average_translations(x, t, r, part="even", tail=tail)
        swapped = "plus" if part == "minus" else "minus"
        return -average_translations(x, t, r, part=swapped, tail=tail)

    # scales with L > d contribute; finer ones cannot separate the points
    total = 0.0
    scale_cap = 2.0 / d  # magnitude of the single-grid kernel
    k = int(math.floor(math.log2(r) - math.log2(d))) + 1
    while True:
        L = r * 2.0**-k
        if L > d:
            break
        k -= 1
    for kk in range(k, k - 200, -1):
        L = r * 2.0**-kk
        term = _scale_mean(d, L, part)
        total += term
        # geometric tail bound for the remaining coarser scales
        if 4.0 * d / (L * L) < tail * scale_cap:
            break
    return total


def average_full(
    t: float,
    x: float,
    r_points: int = 256,
    alpha_points: int | None = None,
    part: str = "full",
) -> float:
    """Dilation-and-translation average.

    The dr/r weight over the factor octave [1, 2) becomes a uniform
    quadrature after the substitution u = log2 r; sampled at midpoints the
    scale family is exactly uniform in log-scale."""
    u = (np.arange(r_points) + 0.5) / r_points
    values = [
        average_translations(t, x, float(2.0**ui), alpha_points=alpha_points, part=part)
        for ui in u
    ]
    return float(np.mean(values))


@dataclass
class HomogeneityReport:
    separation: float
    r: float
    value_s: float
    value_2s: float
    ratio: float
    antisymmetry_error: float


def homogeneity_check(separation: float, r: float = 1.0, t0: float = 0.05) -> HomogeneityReport:
    """Translation-only averages at separations s and 2s scale by 1/2, and
    the average is antisymmetric under swapping the points."""
    s = separation
    v1 = average_translations(t0, t0 + s, r)
    v2 = average_translations(t0, t0 + 2 * s, r)
    anti = abs(average_translations(t0 + s, t0, r) + v1)
    return HomogeneityReport(
        separation=s,
        r=r,
        value_s=v1,
        value_2s=v2,
        ratio=v1 / v2 if v2 != 0 else math.inf,
        antisymmetry_error=anti,
    )


def averages_csv(pairs, r_points: int, alpha_points: int | None = None) -> str:
    """CSV table of full averages against the single-grid kernel scale."""
    buf = io.StringIO()
    buf.write("t,x,r_points,alpha_points,average,single_grid_scale,ratio\n")
    for t, x in pairs:
        avg = average_full(t, x, r_points=r_points, alpha_points=alpha_points)
        scale = 1.0 / abs(x - t)
        buf.write(
            ",".join(
                format(v, ".17g") if isinstance(v, float) else str(v)
                for v in (t, x, r_points, alpha_points or 0, avg, scale, avg / scale)
            )
            + "\n"
        )
    return buf.getvalue()
