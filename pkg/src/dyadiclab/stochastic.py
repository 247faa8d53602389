"""Discrete martingales along memory walks and the Monte-Carlo convergence
experiment for their L^p norms.

The martingale of boundary data f accumulates grad f (evaluated at the
PRE-increment position, via the analytic completion) against the walk
increments; its transform accumulates the same multipliers against the
clockwise-rotated increments.  Estimators are deterministic for a fixed
(seed, path count) and invariant under the worker count: per-path values
are stored in a path-indexed array filled slice-wise and reduced once.
"""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hilbert import FourierSeries, poisson_extend
from .walk import SimConfig, WalkPath, step_increments


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DYADICLAB_WORKERS", "1")))
    except ValueError:
        return 1


def _analytic_data(f: FourierSeries):
    """(f(0,0), derivative coefficients of the analytic completion)."""
    a = f.analytic_coefficients()
    f00 = float(a[0].real)
    deriv = np.array([n * a[n] for n in range(1, len(a))], dtype=complex)
    return f00, deriv.real.copy(), deriv.imag.copy()


def _run_slice(args):
    f00, dr, di, N, T, count, seed, start, force_general = args
    if len(dr) <= 1 and not force_general:
        gx = float(dr[0]) if len(dr) else 0.0
        gy = float(-di[0]) if len(di) else 0.0
        return _kernels.linear_ensemble(f00, gx, gy, N, T, count, seed, start)
    return _kernels.general_ensemble(f00, dr, di, N, T, count, seed, start)


@dataclass
class EnsembleRun:
    """Raw per-path output of one seeded ensemble."""

    mf: np.ndarray
    mg: np.ndarray
    identity_error: float  # max |Mg(rotated gradient) - Mg(rotated increment)|
    stop_index: np.ndarray
    config: SimConfig
    seed: int

    @property
    def unstopped_fraction(self) -> float:
        return float(np.mean(self.stop_index < 0))


def run_ensemble(
    f: FourierSeries,
    config: SimConfig,
    num_paths: int,
    seed: int,
    workers: int | None = None,
    force_general: bool = False,
) -> EnsembleRun:
    """Simulate num_paths martingale pairs; worker-count invariant."""
    if num_paths < 1:
        raise ValueError("need at least one path")
    f00, dr, di = _analytic_data(f)
    workers = default_workers() if workers is None else max(1, int(workers))
    workers = min(workers, num_paths)

    mf = np.empty(num_paths)
    mga = np.empty(num_paths)
    mgb = np.empty(num_paths)
    stop = np.empty(num_paths, dtype=np.int64)

    bounds = np.linspace(0, num_paths, workers + 1).astype(int)
    tasks = [
        (f00, dr, di, config.N, config.T, int(hi - lo), seed, int(lo), force_general)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if workers == 1:
        results = [_run_slice(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_slice, tasks))
    for (largs, res) in zip(tasks, results):
        lo = largs[7]
        hi = lo + largs[5]
        mf[lo:hi], mga[lo:hi], mgb[lo:hi], stop[lo:hi] = res
    identity_error = float(np.max(np.abs(mga - mgb))) if num_paths else 0.0
    return EnsembleRun(
        mf=mf,
        mg=mga,
        identity_error=identity_error,
        stop_index=stop,
        config=config,
        seed=seed,
    )


@dataclass
class MCEstimate:
    """(E |M_T|^p)^{1/p} estimate with a delta-method standard error."""

    p: float
    value: float
    paths: int
    standard_error: float
    config: SimConfig
    seed: int
    unstopped_fraction: float = 0.0
    identity_error: float = 0.0


def estimate_from_samples(samples: np.ndarray, p: float, config, seed,
                          unstopped=0.0, identity_error=0.0) -> MCEstimate:
    powers = np.abs(samples) ** p
    mean = float(np.mean(powers))
    n = samples.size
    var = float(np.var(powers, ddof=1)) if n > 1 else 0.0
    se_mean = math.sqrt(var / n) if n > 1 else 0.0
    value = mean ** (1.0 / p) if mean > 0 else 0.0
    # delta method: d/dm m^{1/p} = m^{1/p - 1} / p
    se = se_mean * value ** (1.0 - p) / p if value > 0 else se_mean
    return MCEstimate(
        p=p,
        value=value,
        paths=n,
        standard_error=se,
        config=config,
        seed=seed,
        unstopped_fraction=unstopped,
        identity_error=identity_error,
    )


def mc_lp_norm(
    f: FourierSeries,
    p: float,
    config: SimConfig,
    num_paths: int,
    seed: int,
    workers: int | None = None,
    which: str = "mf",
    force_general: bool = False,
) -> MCEstimate:
    """Monte-Carlo estimate of ||M_T||_p for the martingale (which='mf') or
    its transform (which='mg')."""
    if p < 1:
        raise ValueError("p must be at least 1")
    run = run_ensemble(f, config, num_paths, seed, workers, force_general)
    samples = run.mf if which == "mf" else run.mg
    return estimate_from_samples(
        samples, p, config, seed,
        unstopped=run.unstopped_fraction, identity_error=run.identity_error,
    )


def reference_boundary_norm(f: FourierSeries, p: float, resolution: int = 1 << 16) -> float:
    """((1/2pi) int |f|^p)^{1/p} by midpoint quadrature on the torus."""
    theta = (np.arange(resolution) + 0.5) * (2.0 * math.pi / resolution)
    values = np.abs(f.evaluate(theta)) ** p
    return float(np.mean(values) ** (1.0 / p))


@dataclass
class MartingalePair:
    """Explicit per-path martingale pair for small-scale inspection."""

    path: WalkPath
    mf: np.ndarray
    mg: np.ndarray
    mg_increment_route: np.ndarray
    config: SimConfig


def run_pair(f: FourierSeries, path: WalkPath, config: SimConfig) -> MartingalePair:
    """Martingale pair along an explicit path, gradients evaluated through
    poisson_extend at every pre-increment position.

    Raises when the walk leaves the closed unit disc (config violation)."""
    positions = path.positions()
    radii = np.hypot(positions[:, 0], positions[:, 1])
    if np.any(radii > 1.0 + 1e-12):
        raise ValueError("walk position outside the closed unit disc")
    increments = np.diff(positions, axis=0)
    stop = path.stop_index
    k_stop = None if stop is None else stop * config.N

    f00 = float(f.coefficient(0).real)
    mf = [f00]
    mg_a = [0.0]
    mg_b = [0.0]
    for l in range(1, positions.shape[0]):
        if k_stop is not None and l > k_stop:
            mf.append(mf[-1])
            mg_a.append(mg_a[-1])
            mg_b.append(mg_b[-1])
            continue
        z = positions[l - 1]
        radius = math.hypot(z[0], z[1])
        if radius >= 1.0:
            # boundary points: polynomial gradients extend continuously
            point = poisson_extend(f, complex(z[0], z[1]) * (1.0 - 1e-15) / radius)
        else:
            point = poisson_extend(f, complex(z[0], z[1]))
        gx, gy = point.gradient
        dbx, dby = increments[l - 1]
        mf.append(mf[-1] + (gx * dbx + gy * dby))
        mg_a.append(mg_a[-1] + ((-gy) * dbx + gx * dby))
        mg_b.append(mg_b[-1] + (gx * dby + gy * (-dbx)))
    return MartingalePair(
        path=path,
        mf=np.array(mf),
        mg=np.array(mg_a),
        mg_increment_route=np.array(mg_b),
        config=config,
    )


@dataclass
class ConvergenceRow:
    N: int
    T: float
    paths: int
    estimate: float
    reference: float
    bias: float
    stderr: float
    unstopped_fraction: float
    identity_error: float


@dataclass
class ConvergenceStudy:
    rows: list
    p: float
    seed: int
    tolerance_factor: float = 0.03

    def passed(self) -> bool:
        """Pass rule: bias non-increasing within error bars along the rows
        and final bias <= max(3 SE, tolerance_factor * reference)."""
        ok = True
        for earlier, later in zip(self.rows[:-1], self.rows[1:]):
            slack = 3.0 * (earlier.stderr + later.stderr)
            ok = ok and later.bias <= earlier.bias + slack
        last = self.rows[-1]
        ok = ok and last.bias <= max(3.0 * last.stderr, self.tolerance_factor * last.reference)
        return ok

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# convergence p={self.p!r} seed={self.seed}\n")
        buf.write("N,T,paths,estimate,reference,bias,stderr,unstopped_fraction\n")
        for r in self.rows:
            buf.write(
                ",".join(
                    format(v, ".17g") if isinstance(v, float) else str(v)
                    for v in (
                        r.N, r.T, r.paths, r.estimate, r.reference, r.bias,
                        r.stderr, r.unstopped_fraction,
                    )
                )
                + "\n"
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "seed": self.seed,
                "passed": self.passed(),
                "rows": [r.__dict__ for r in self.rows],
            },
            sort_keys=True,
        )


def convergence_study(
    f: FourierSeries,
    p: float,
    N_list,
    T: float,
    num_paths: int,
    seed: int,
    workers: int | None = None,
) -> ConvergenceStudy:
    """Sweep the resolution and compare against the boundary norm."""
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list[:-1], N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    reference = reference_boundary_norm(f, p)
    rows = []
    for N in N_list:
        config = SimConfig(N=N, T=T)
        est = mc_lp_norm(f, p, config, num_paths, seed, workers)
        rows.append(
            ConvergenceRow(
                N=N,
                T=T,
                paths=num_paths,
                estimate=est.value,
                reference=reference,
                bias=abs(est.value - reference),
                stderr=est.standard_error,
                unstopped_fraction=est.unstopped_fraction,
                identity_error=est.identity_error,
            )
        )
    return ConvergenceStudy(rows=rows, p=p, seed=seed)


@dataclass
class InequalityReport:
    p: float
    bound: float
    mg_value: float
    mf_value: float
    mg_stderr: float
    mf_stderr: float
    identity_error: float
    holds: bool

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def shift_norm_inequality_check(
    f: FourierSeries,
    p: float,
    config: SimConfig,
    num_paths: int,
    bound: float,
    seed: int,
    workers: int | None = None,
) -> InequalityReport:
    """Check ||M^g||_p <= bound ||M^f||_p + 3 SE on a seeded ensemble.

    Both estimates come from the same paths; the combined standard error is
    sqrt(SE_g^2 + bound^2 SE_f^2)."""
    run = run_ensemble(f, config, num_paths, seed, workers)
    est_f = estimate_from_samples(run.mf, p, config, seed)
    est_g = estimate_from_samples(run.mg, p, config, seed)
    combined = math.sqrt(est_g.standard_error**2 + (bound * est_f.standard_error) ** 2)
    holds = est_g.value <= bound * est_f.value + 3.0 * combined
    return InequalityReport(
        p=p,
        bound=bound,
        mg_value=est_g.value,
        mf_value=est_f.value,
        mg_stderr=est_g.standard_error,
        mf_stderr=est_f.standard_error,
        identity_error=run.identity_error,
        holds=holds,
    )
