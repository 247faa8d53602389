import math

import numpy as np
import pytest

from dyadiclab._kernels import get_backend, _base
from dyadiclab.hilbert import FourierSeries, hp_constant
from dyadiclab.lowerbound import c0_constant
from dyadiclab.stochastic import (
    EnsembleRun,
    convergence_study,
    estimate_from_samples,
    mc_lp_norm,
    reference_boundary_norm,
    run_ensemble,
    run_pair,
    shift_norm_inequality_check,
)
from dyadiclab.walk import SimConfig, path_from_tosses

COS = FourierSeries.from_cos({1: 1.0})
MIX = FourierSeries.from_cos({1: 1.0, 3: 0.5})


def toss_stream(seed, path_index, N, blocks):
    keys = _base.path_keys(seed, path_index, 1)
    wpb = (N + 63) // 64
    eps = [1 if int(_base.words(keys, 0)[0]) & 1 else -1]
    for n in range(1, blocks + 1):
        for c in range(wpb):
            bits = min(64, N - 64 * c)
            w = int(_base.words(keys, (n - 1) * wpb + 1 + c)[0])
            for i in range(bits):
                eps.append(1 if (w >> i) & 1 else -1)
    return np.array(eps, dtype=np.int64)


class TestReferenceNorm:
    def test_constant(self):
        assert reference_boundary_norm(FourierSeries.from_cos({0: 1.0}), 3.5) == pytest.approx(1.0)

    def test_cos_p2(self):
        assert reference_boundary_norm(COS, 2) == pytest.approx(1 / math.sqrt(2), rel=1e-10)

    def test_cos_p4(self):
        # oracle: mean of cos^4 = 3/8
        assert reference_boundary_norm(COS, 4) == pytest.approx((3.0 / 8.0) ** 0.25, rel=1e-10)


class TestRunPair:
    def test_constant_boundary_data(self):
        config = SimConfig(N=2, T=0.5)
        path = path_from_tosses(np.array([1, -1, 1, 1, -1]), config)
        pair = run_pair(FourierSeries.from_cos({0: 1.5}), path, config)
        assert np.all(pair.mf == 1.5)
        assert np.all(pair.mg == 0.0)

    def test_linear_boundary_data_tracks_walk(self):
        # f = cos theta: gradient (1, 0) everywhere, so Mf = B^1, Mg = B^2
        config = SimConfig(N=2, T=0.5)
        rng = np.random.default_rng(0)
        tosses = rng.choice([-1, 1], size=17)
        path = path_from_tosses(tosses, config)
        pair = run_pair(COS, path, config)
        stop_fine = None if path.stop_index is None else path.stop_index * config.N
        positions = path.positions()
        for l in range(positions.shape[0]):
            eff = l if stop_fine is None else min(l, stop_fine)
            assert pair.mf[l] == pytest.approx(positions[eff, 0], abs=1e-14)
            assert pair.mg[l] == pytest.approx(positions[eff, 1], abs=1e-14)

    def test_two_transform_routes_agree(self):
        config = SimConfig(N=2, T=0.5)
        rng = np.random.default_rng(1)
        for seed in range(20):
            tosses = rng.choice([-1, 1], size=33)
            path = path_from_tosses(tosses, config)
            pair = run_pair(MIX, path, config)
            assert np.max(np.abs(pair.mg - pair.mg_increment_route)) <= 1e-12

    def test_constant_after_stop(self):
        config = SimConfig(N=2, T=0.5)
        tosses = np.ones(33, dtype=int)  # marches right, stops early
        path = path_from_tosses(tosses, config)
        assert path.stop_index is not None
        pair = run_pair(MIX, path, config)
        k = path.stop_index * config.N
        assert np.all(pair.mf[k:] == pair.mf[k])
        assert np.all(pair.mg[k:] == pair.mg[k])

    def test_matches_kernel_per_path(self):
        # the explicit per-path computation and the compiled ensemble agree
        N, T = 2, 0.5
        config = SimConfig(N=N, T=T)
        kernels = get_backend("python")
        f00 = 0.0
        a = MIX.analytic_coefficients()
        deriv = np.array([n * a[n] for n in range(1, len(a))])
        mf, mga, mgb, stop = kernels.general_ensemble(
            f00, deriv.real.copy(), deriv.imag.copy(), N, T, 6, 17, 0
        )
        for idx in range(6):
            tosses = toss_stream(17, idx, N, N**4)
            path = path_from_tosses(tosses, config)
            pair = run_pair(MIX, path, config)
            assert pair.mf[-1] == pytest.approx(mf[idx], abs=1e-12)
            assert pair.mg[-1] == pytest.approx(mga[idx], abs=1e-12)
            expected_stop = -1 if path.stop_index is None else path.stop_index
            assert stop[idx] == expected_stop

    def test_rejects_walk_outside_disc(self):
        config = SimConfig(N=2, T=8.0)  # giant steps
        tosses = np.ones(9, dtype=int)
        path = path_from_tosses(tosses, config)
        with pytest.raises(ValueError):
            run_pair(COS, path, config)


class TestMCEstimates:
    def test_constant_data_zero_variance(self):
        est = mc_lp_norm(FourierSeries.from_cos({0: -2.0}), 3.0, SimConfig(N=4, T=2.0), 500, seed=0)
        assert est.value == pytest.approx(2.0, abs=1e-12)
        assert est.standard_error == pytest.approx(0.0, abs=1e-12)

    def test_cos_estimate_near_reference(self):
        config = SimConfig(N=16, T=8.0)
        est = mc_lp_norm(COS, 2.0, config, 4000, seed=4)
        ref = reference_boundary_norm(COS, 2)
        # discretization bias is ~epsilon; stay within 10%
        assert abs(est.value - ref) < 0.1 * ref
        assert est.identity_error <= 1e-12

    def test_mg_matches_mf_for_rotation(self):
        # Mg of cos estimates the same boundary norm as Mf (both integrals
        # equal 1/2); agreement within combined error bars plus bias slack
        config = SimConfig(N=16, T=8.0)
        est_f = mc_lp_norm(COS, 2.0, config, 6000, seed=5, which="mf")
        est_g = mc_lp_norm(COS, 2.0, config, 6000, seed=5, which="mg")
        combined = math.hypot(est_f.standard_error, est_g.standard_error)
        assert abs(est_f.value - est_g.value) <= 4 * combined

    def test_deterministic_given_seed(self):
        config = SimConfig(N=8, T=4.0)
        a = mc_lp_norm(COS, 2.0, config, 1200, seed=9)
        b = mc_lp_norm(COS, 2.0, config, 1200, seed=9)
        assert a.value == b.value and a.standard_error == b.standard_error

    def test_worker_invariance_exact(self):
        config = SimConfig(N=8, T=4.0)
        one = run_ensemble(COS, config, 900, seed=3, workers=1)
        two = run_ensemble(COS, config, 900, seed=3, workers=2)
        assert np.array_equal(one.mf, two.mf)
        assert np.array_equal(one.mg, two.mg)
        assert np.array_equal(one.stop_index, two.stop_index)

    def test_general_kernel_selected_for_wide_band(self):
        config = SimConfig(N=4, T=2.0)
        est = mc_lp_norm(MIX, 2.0, config, 400, seed=6)
        forced = mc_lp_norm(MIX, 2.0, config, 400, seed=6, force_general=True)
        assert est.value == forced.value  # wide band already uses the fine kernel


class TestConvergenceStudy:
    def test_bias_decreases_for_cos(self):
        study = convergence_study(COS, 2.0, [8, 16], 8.0, 4000, seed=7)
        assert len(study.rows) == 2
        first, second = study.rows
        assert second.bias <= first.bias + 3 * (first.stderr + second.stderr)
        assert first.reference == pytest.approx(1 / math.sqrt(2), rel=1e-9)

    def test_high_mode_qualitative_decrease(self):
        f8 = FourierSeries.from_cos({8: 1.0})
        study = convergence_study(f8, 2.0, [8, 16], 8.0, 4000, seed=8)
        first, second = study.rows
        assert second.bias <= first.bias + 3 * (first.stderr + second.stderr)

    def test_unstopped_fraction_decreases_with_horizon(self):
        config_short = SimConfig(N=8, T=0.5)
        config_long = SimConfig(N=8, T=2.0)
        short = mc_lp_norm(COS, 2.0, config_short, 3000, seed=10)
        long_ = mc_lp_norm(COS, 2.0, config_long, 3000, seed=10)
        assert short.unstopped_fraction > long_.unstopped_fraction

    def test_rejects_non_increasing_N(self):
        with pytest.raises(ValueError):
            convergence_study(COS, 2.0, [8, 8], 4.0, 100, seed=0)

    def test_csv_deterministic(self):
        a = convergence_study(COS, 2.0, [4, 8], 2.0, 300, seed=1).to_csv()
        b = convergence_study(COS, 2.0, [4, 8], 2.0, 300, seed=1).to_csv()
        assert a == b
        assert a.splitlines()[1].startswith("N,T,paths,estimate")


class TestInequality:
    def test_cos_p2_near_equality(self):
        report = shift_norm_inequality_check(
            COS, 2.0, SimConfig(N=16, T=8.0), 5000, bound=1.0, seed=11
        )
        assert report.holds
        assert report.mg_value == pytest.approx(report.mf_value, rel=0.05)

    def test_mix_p4_with_slack(self):
        bound = hp_constant(4.0) / c0_constant()
        report = shift_norm_inequality_check(
            MIX, 4.0, SimConfig(N=8, T=8.0), 3000, bound=bound, seed=12
        )
        assert report.holds
        assert report.mg_value < bound * report.mf_value  # real slack, not 3SE rescue

    def test_constant_trivial(self):
        report = shift_norm_inequality_check(
            FourierSeries.from_cos({0: 2.0}), 2.0, SimConfig(N=4, T=2.0), 200,
            bound=1.0, seed=13,
        )
        assert report.holds
        assert report.mg_value == pytest.approx(0.0, abs=1e-12)
