"""Projection identity linking the sibling shift to the Hilbert transform,
the constant 8G/pi^2, and the high-frequency modulation ladder.

The four-arc average of the transformed square wave reproduces the other
square wave scaled by c0 = 8G/pi^2; the constant is computed by two
independent routes (accelerated alternating series for G, and quadrature of
the closed-form transform) that must agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .hilbert import hilbert_pv_grid, phi_generator, torus_grid
from .operators import project_four_arcs

PI = math.pi


def alternating_sum(term, terms: int) -> float:
    """Sum of (-1)^k term(k) by Chebyshev-based acceleration; the error
    decays like (3 + sqrt(8))^{-terms}."""
    if terms < 1:
        raise ValueError("need at least one term")
    d = (3.0 + math.sqrt(8.0)) ** terms
    d = 0.5 * (d + 1.0 / d)
    b = -1.0
    c = -d
    total = 0.0
    for k in range(terms):
        c = b - c
        total += c * term(k)
        b *= (k + terms) * (k - terms) / ((k + 0.5) * (k + 1.0))
    return total / d


def catalan_terms_for(precision: float) -> int:
    if not 0 < precision < 1:
        raise ValueError("precision target must lie in (0, 1)")
    return max(4, math.ceil(-math.log(precision) / math.log(3.0 + math.sqrt(8.0))) + 2)


def catalan_constant(precision: float = 1e-15) -> float:
    """G = sum (-1)^k / (2k+1)^2, accelerated to the requested precision."""
    terms = catalan_terms_for(precision)
    return alternating_sum(lambda k: 1.0 / (2 * k + 1) ** 2, terms)


def catalan_partial_sums(count: int) -> np.ndarray:
    """Raw Leibniz partial sums; they bracket the limit alternately."""
    k = np.arange(count)
    return np.cumsum((-1.0) ** k / (2 * k + 1) ** 2)


def c0_constant() -> float:
    """8 G / pi^2, about 0.742454."""
    return 8.0 * catalan_constant() / PI**2


def c0_via_quadrature(resolution: int) -> float:
    """Independent route: minus the mean of (2/pi) log tan(x/2) over
    (0, pi/2).

    The log singularity at 0 is integrated in closed form; the midpoint
    rule handles the smooth remainder log(tan(x/2) / (x/2))."""
    if resolution < 2**10:
        raise ValueError("resolution must be at least 2^10")
    a = PI / 2.0
    x = (np.arange(resolution) + 0.5) * (a / resolution)
    smooth = np.log(np.tan(0.5 * x) / (0.5 * x))
    integral_smooth = float(np.sum(smooth)) * (a / resolution)
    integral_singular = a * (math.log(a / 2.0) - 1.0)
    mean = (2.0 / PI) * (integral_smooth + integral_singular) / a
    return -mean


def s0_on_generator(sign: int) -> tuple[int, int]:
    """Action of the shift on the square waves: returns (factor, other sign)
    with shift(phi^sign) = factor * phi^other."""
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    return sign, -sign


def _arc_pattern(sign: int) -> np.ndarray:
    """Values of phi^sign on the arcs (A_-2, A_-1, A_0, A_1)."""
    if sign == -1:  # sign(sin)
        return np.array([-1.0, -1.0, 1.0, 1.0])
    return np.array([-1.0, 1.0, 1.0, -1.0])  # sign(cos)


@dataclass
class ProjectionLemmaReport:
    sign: int
    resolution: int
    arc_averages: np.ndarray
    expected: np.ndarray
    max_arc_error: float
    c0: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "quantity": f"four-arc averages of the transformed square wave (sign {self.sign:+d})",
                "computed": list(self.arc_averages),
                "reference": list(self.expected),
                "abs_error": self.max_arc_error,
                "resolution": self.resolution,
            },
            sort_keys=True,
        )


def projection_lemma_check(sign: int, resolution: int = 1 << 16) -> ProjectionLemmaReport:
    """Arc averages of the PV transform of phi^sign against c0 shift(phi^sign)."""
    grid = torus_grid(resolution)
    phi = phi_generator(sign, grid).astype(float)
    transformed = hilbert_pv_grid(phi)
    averages = project_four_arcs(transformed).averages
    factor, other = s0_on_generator(sign)
    c0 = c0_constant()
    expected = c0 * factor * _arc_pattern(other)
    return ProjectionLemmaReport(
        sign=sign,
        resolution=resolution,
        arc_averages=averages,
        expected=expected,
        max_arc_error=float(np.max(np.abs(averages - expected))),
        c0=c0,
    )


@dataclass
class OrthogonalityReport:
    resolution: int
    same_sign_means: dict
    cross_identities: dict
    max_error: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "quantity": "dualized single-variable means of transformed square waves",
                "computed": {**{str(k): v for k, v in self.same_sign_means.items()},
                             **{str(k): v for k, v in self.cross_identities.items()}},
                "reference": "0 for equal signs, +-c0 for opposite signs",
                "abs_error": self.max_error,
                "resolution": self.resolution,
            },
            sort_keys=True,
        )


def dualized_orthogonality_check(resolution: int = 1 << 16) -> OrthogonalityReport:
    """Means entering the dualized pairing: the transform of either square
    wave is mean-orthogonal to the same wave, and pairs with the other wave
    exactly as c0 times the shifted wave does."""
    grid = torus_grid(resolution)
    phi = {s: phi_generator(s, grid).astype(float) for s in (-1, 1)}
    transformed = {s: hilbert_pv_grid(phi[s]) for s in (-1, 1)}
    c0 = c0_constant()

    same = {}
    cross = {}
    worst = 0.0
    for s in (-1, 1):
        m_same = float(np.mean(transformed[s] * phi[s]))
        same[s] = m_same
        worst = max(worst, abs(m_same))
        factor, other = s0_on_generator(s)
        lhs = float(np.mean(transformed[s] * phi[other]))
        rhs = c0 * factor * float(np.mean(phi[other] * phi[other]))
        cross[s] = (lhs, rhs)
        worst = max(worst, abs(lhs - rhs))
    return OrthogonalityReport(
        resolution=resolution,
        same_sign_means=same,
        cross_identities=cross,
        max_error=worst,
    )


MAX_FREQUENCY = 2**62


@dataclass
class ModulationPlan:
    """Frequency ladder n_0..n_K for spectral bounds N_0..N_{K-1}.

    build_modulation enforces the doubling recursion; hand-built plans are
    allowed so the domination checker can be exercised on defective ones.
    """

    spectral_bounds: tuple
    frequencies: tuple

    def levels(self) -> int:
        return len(self.spectral_bounds)


def build_modulation(spectral_bounds) -> ModulationPlan:
    """n_0 = 1 and n_k = 2 N_{k-1} n_{k-1}; rejects nonpositive bounds and
    ladders leaving the checked integer range."""
    bounds = tuple(int(b) for b in spectral_bounds)
    if not bounds:
        raise ValueError("need at least one spectral bound")
    if any(b < 1 for b in bounds):
        raise ValueError("spectral bounds must be positive")
    freqs = [1]
    for b in bounds:
        nxt = 2 * b * freqs[-1]
        if nxt > MAX_FREQUENCY:
            raise OverflowError("frequency ladder exceeds the checked integer range")
        freqs.append(nxt)
    return ModulationPlan(spectral_bounds=bounds, frequencies=tuple(freqs))


def _l1_tuples(dim: int, radius: int, cap: int):
    if (2 * radius + 1) ** dim > cap:
        raise ValueError("enumeration size is infeasible")
    for tup in product(range(-radius, radius + 1), repeat=dim):
        if sum(abs(v) for v in tup) <= radius:
            yield tup


def verify_sign_domination(plan: ModulationPlan, k: int, cap: int = 4_000_000) -> bool:
    """Exhaustively check that the newest frequency dictates the sign:
    sign(l . n_{k-1} + l_k n_k) = sign(l_k n_k) for every integer tuple l
    with l1 norm at most N_{k-1} and every l_k != 0.

    Magnitudes |l_k| in {1, 2} are enumerated; larger ones only increase
    the dominating term."""
    if not 1 <= k <= plan.levels():
        raise ValueError(f"level k must lie in [1, {plan.levels()}]")
    radius = int(plan.spectral_bounds[k - 1])
    n_head = plan.frequencies[:k]
    n_k = plan.frequencies[k]
    for tup in _l1_tuples(k, radius, cap):
        head = sum(l * n for l, n in zip(tup, n_head))
        for lk in (-2, -1, 1, 2):
            combined = head + lk * n_k
            want = 1 if lk * n_k > 0 else -1
            got = (combined > 0) - (combined < 0)
            if got != want:
                return False
    return True
