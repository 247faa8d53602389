"""The planar memory random walk, its coarse sampling and stopping time.

The walk direction at fine step l is decided by the PREVIOUS toss (+1 ->
horizontal, -1 -> vertical) and the step sign by the current toss, both in
units of sqrt(2 delta) with delta = T / N^5.  Coarse samples X_n = B_{nN}
are inspected every N fine steps and the walk stops when |X_n| >= 1 - 1/N.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .dyadic import DyadicInterval, HaarExpansion
from .operators import apply_s0


@dataclass(frozen=True)
class SimConfig:
    """Scheme parameters.  delta is derived from (N, T), never the reverse.

    The sufficient condition N sqrt(2 delta) <= epsilon guaranteeing that
    the stopped walk stays inside the unit disc holds iff N >= 2T; smaller
    resolutions are admitted (the convergence experiment sweeps them) with
    ``inside_disc_guaranteed`` False, and rejected when strict=True.
    """

    N: int
    T: float
    strict: bool = False

    def __post_init__(self) -> None:
        if self.N < 2 or int(self.N) != self.N:
            raise ValueError("N must be an integer >= 2")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.strict and not self.inside_disc_guaranteed:
            raise ValueError(
                f"coarse step bound violated: N sqrt(2 delta) = {self.coarse_step_bound:.4g} "
                f"> epsilon = {self.epsilon:.4g}"
            )

    @property
    def delta(self) -> float:
        return self.T / float(self.N**5)

    @property
    def theta(self) -> float:
        return self.N * self.delta

    @property
    def epsilon(self) -> float:
        return 1.0 / self.N

    @property
    def fine_steps(self) -> int:
        return self.N**5

    @property
    def coarse_steps(self) -> int:
        return self.N**4

    @property
    def step(self) -> float:
        return math.sqrt(2.0 * self.delta)

    @property
    def coarse_step_bound(self) -> float:
        return self.N * self.step

    @property
    def inside_disc_guaranteed(self) -> bool:
        return self.coarse_step_bound <= self.epsilon + 1e-15


@dataclass
class WalkPath:
    """Explicit small-scale path: tosses eps_0..eps_{K-1}, integer positions
    (units of sqrt(2 delta)), optional coarse stop index, seed token."""

    tosses: np.ndarray
    positions_int: np.ndarray  # shape (K, 2); positions_int[l] = B_l / step
    config: SimConfig
    stop_index: int | None = None
    seed: int = 0

    def positions(self) -> np.ndarray:
        return self.positions_int * self.config.step

    def increments_int(self) -> np.ndarray:
        return np.diff(self.positions_int, axis=0)


def step_increments(tosses, delta: float) -> np.ndarray:
    """Planar increments of the memory walk from tosses eps_0..eps_{K-1}.

    Increment l (l = 1..K-1) is sqrt(2 delta) eps_l along the horizontal
    axis when eps_{l-1} = +1 and along the vertical axis when
    eps_{l-1} = -1; eps_0 only provides the initial memory."""
    eps = np.asarray(tosses, dtype=np.int64)
    if eps.ndim != 1 or eps.size < 1:
        raise ValueError("need at least the memory toss eps_0")
    if not np.all(np.abs(eps) == 1):
        raise ValueError("tosses must be +1 or -1")
    step = math.sqrt(2.0 * delta)
    horizontal = eps[:-1] == 1
    out = np.zeros((eps.size - 1, 2))
    out[horizontal, 0] = eps[1:][horizontal] * step
    out[~horizontal, 1] = eps[1:][~horizontal] * step
    return out


def path_from_tosses(tosses, config: SimConfig, seed: int = 0) -> WalkPath:
    eps = np.asarray(tosses, dtype=np.int64)
    horizontal = eps[:-1] == 1
    incs = np.zeros((eps.size - 1, 2), dtype=np.int64)
    incs[horizontal, 0] = eps[1:][horizontal]
    incs[~horizontal, 1] = eps[1:][~horizontal]
    positions = np.vstack([np.zeros((1, 2), dtype=np.int64), np.cumsum(incs, axis=0)])
    path = WalkPath(tosses=eps, positions_int=positions, config=config, seed=seed)
    coarse = sample_coarse_int(path)
    stop = stop_at_annulus_int(coarse, config)
    if stop is not None:
        # all increments after the stopping time are zero
        k_stop = stop * config.N
        positions[k_stop + 1 :] = positions[k_stop]
    path.stop_index = stop
    return path


def sample_coarse_int(path: WalkPath) -> np.ndarray:
    n_coarse = (path.positions_int.shape[0] - 1) // path.config.N
    return path.positions_int[:: path.config.N][: n_coarse + 1]


def sample_coarse(path: WalkPath, config: SimConfig | None = None) -> np.ndarray:
    """Coarse subsequence X_n = B_{nN} in true length units."""
    cfg = path.config if config is None else config
    if path.positions_int.shape[0] - 1 < cfg.N:
        raise ValueError("path too short to produce a coarse sample")
    return sample_coarse_int(path) * cfg.step


def stop_at_annulus_int(coarse_int: np.ndarray, config: SimConfig) -> int | None:
    threshold = (1.0 - config.epsilon) ** 2 / (2.0 * config.delta)
    radii = (coarse_int[:, 0].astype(float)) ** 2 + (coarse_int[:, 1].astype(float)) ** 2
    hits = np.nonzero(radii[1:] >= threshold)[0]
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


def stop_at_annulus(coarse_positions: np.ndarray, config: SimConfig) -> int | None:
    """First coarse index with |X_n| >= 1 - epsilon, or None if the walk
    stays strictly inside through the horizon."""
    pos = np.asarray(coarse_positions, dtype=float)
    radii = np.hypot(pos[:, 0], pos[:, 1])
    hits = np.nonzero(radii[1:] >= 1.0 - config.epsilon - 1e-15)[0]
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


def increment_expansion(l: int, component: int, config: SimConfig) -> HaarExpansion:
    """Haar expansion of the increment dB^i_l as a function on [0, 1).

    dB^1_l charges the right children of generation l, dB^2_l the left
    children, with coefficient sqrt(2 delta) |I|^{1/2} each."""
    if l < 1:
        raise ValueError("increments start at fine index 1")
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    parity = 1 if component == 1 else 0
    weight = config.step * math.sqrt(2.0**-l)
    coeffs = {
        DyadicInterval(l, m): weight for m in range(2**l) if m % 2 == parity
    }
    return HaarExpansion(mean=0.0, coeffs=coeffs, depth=l + 1)


@dataclass
class RotationCheck:
    depth: int
    max_error_first: float
    max_error_second: float
    exact: bool


def s0_rotation_check(config: SimConfig, depth: int) -> RotationCheck:
    """Verify the shift rotates increments clockwise: applying the sibling
    shift to dB^1_l gives +dB^2_l and to dB^2_l gives -dB^1_l, coefficient
    by coefficient, for every l <= depth."""
    if depth > 14:
        raise ValueError("depth must not exceed 14")
    worst1 = 0.0
    worst2 = 0.0
    for l in range(1, depth + 1):
        db1 = increment_expansion(l, 1, config)
        db2 = increment_expansion(l, 2, config)
        image1 = apply_s0(db1)
        image2 = apply_s0(db2)
        keys = set(image1.coeffs) | set(db2.coeffs)
        worst1 = max(
            worst1,
            max(abs(image1.coefficient(k) - db2.coefficient(k)) for k in keys),
        )
        keys = set(image2.coeffs) | set(db1.coeffs)
        worst2 = max(
            worst2,
            max(abs(image2.coefficient(k) + db1.coefficient(k)) for k in keys),
        )
    return RotationCheck(
        depth=depth,
        max_error_first=worst1,
        max_error_second=worst2,
        exact=(worst1 == 0.0 and worst2 == 0.0),
    )


@dataclass
class MomentTable:
    """Exact conditional moments of one coarse increment, enumerated over
    all 2^N toss continuations.  Means are in units of sqrt(2 delta),
    second moments in units of delta, fourth moments in units of delta^2;
    all entries are exact Fractions."""

    N: int
    prior: int
    mean_x: Fraction
    mean_y: Fraction
    var_x: Fraction
    var_y: Fraction
    cross: Fraction
    fourth_x: Fraction

    def var_x_expected(self) -> Fraction:
        return Fraction(2 if self.prior == 1 else 0) + (self.N - 1)

    def var_y_expected(self) -> Fraction:
        return Fraction(2 if self.prior == -1 else 0) + (self.N - 1)


def conditional_moments_exact(N: int, prior_toss: int, max_N: int = 12) -> MomentTable:
    """Exhaustive first/second/fourth moments of dX = sum of N fine
    increments given the memory toss, exact in rational arithmetic."""
    if N > max_N:
        raise ValueError(f"N = {N} too large for exhaustive enumeration")
    if prior_toss not in (-1, 1):
        raise ValueError("prior toss must be -1 or +1")
    total = 1 << N
    # Tosses eps_1..eps_N from the bits of each continuation index.
    codes = np.arange(total, dtype=np.uint64)
    bits = ((codes[:, None] >> np.arange(N, dtype=np.uint64)[None, :]) & 1).astype(np.int64)
    eps = 2 * bits - 1
    prev = np.empty_like(eps)
    prev[:, 0] = prior_toss
    prev[:, 1:] = eps[:, :-1]
    horiz = prev == 1
    # dX in units of sqrt(2 delta): integers
    sx = np.where(horiz, eps, 0).sum(axis=1)
    sy = np.where(~horiz, eps, 0).sum(axis=1)
    # (dX^1)^2 = 2 delta sx^2; expectations are integer sums / 2^N
    return MomentTable(
        N=N,
        prior=prior_toss,
        mean_x=Fraction(int(sx.sum()), total),
        mean_y=Fraction(int(sy.sum()), total),
        var_x=Fraction(2 * int((sx * sx).sum()), total),
        var_y=Fraction(2 * int((sy * sy).sum()), total),
        cross=Fraction(2 * int((sx * sy).sum()), total),
        fourth_x=Fraction(4 * int((sx**4).sum()), total),
    )


def simulate_paths(config: SimConfig, num_paths: int, seed: int, start: int = 0):
    """Walk-only ensemble via the reference kernel utilities: returns the
    pooled conditional increment statistics dictionary."""
    return _kernels.coarse_increment_stats(config.N, config.T, num_paths, seed, start)


def ensemble_trace_csv(config: SimConfig, seeds_or_count, seed: int = 0) -> str:
    """CSV trace: one line per path with seed token, stop index and the
    coarse positions up to the stopping time (fine positions are
    reconstructible from the toss stream)."""
    if isinstance(seeds_or_count, int):
        indices = range(seeds_or_count)
    else:
        indices = list(seeds_or_count)
    buf = io.StringIO()
    buf.write(f"# walk trace N={config.N} T={config.T!r} seed={seed}\n")
    buf.write("path,key,stop_index,positions\n")
    for idx in indices:
        positions, stop, key = _kernels.coarse_trace(config.N, config.T, seed, idx)
        flat = ";".join(
            f"{format(x, '.17g')}:{format(y, '.17g')}" for x, y in positions
        )
        buf.write(f"{idx},{key},{stop if stop is not None else -1},{flat}\n")
    return buf.getvalue()
