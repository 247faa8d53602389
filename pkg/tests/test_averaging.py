import math

import numpy as np
import pytest

from dyadiclab.averaging import (
    GridParams,
    average_full,
    average_translations,
    averages_csv,
    homogeneity_check,
    kernel_value,
)


class TestKernelValue:
    def test_standard_grid_basic_pair(self):
        # dilation exponent 1 reproduces the standard grid (doubling leaves
        # the bi-infinite grid invariant); 0.2 and 0.8 separate at [0, 1)
        value = kernel_value(0.2, 0.8, GridParams(r=1.0, alpha=0.0))
        # oracle: -h_left(0.2) h_right(0.8) = -(-sqrt2)(+sqrt2) = 2
        assert value == pytest.approx(2.0)

    def test_same_side_of_anchor_zero(self):
        # points straddling the grid anchor never share an interval
        assert kernel_value(-0.3, 0.4, GridParams(r=1.0, alpha=0.0)) == 0.0
        assert kernel_value(0.9, 1.2, GridParams(r=1.5, alpha=1.0)) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            t, x = rng.uniform(0.01, 3.0, 2)
            if t == x:
                continue
            params = GridParams(r=float(rng.uniform(1, 2)), alpha=float(rng.uniform(-1, 1)))
            assert kernel_value(t, x, params) == pytest.approx(
                -kernel_value(x, t, params), abs=1e-12
            )

    def test_rejects_diagonal(self):
        with pytest.raises(ValueError):
            kernel_value(0.4, 0.4, GridParams())

    def test_partial_kernels_split_by_diagonal(self):
        params = GridParams(r=1.0, alpha=-0.123)
        t, x = 0.3, 0.55  # t < x: only the plus kernel may fire
        assert kernel_value(t, x, params, "minus") == 0.0
        assert kernel_value(t, x, params, "plus") == kernel_value(t, x, params, "full")
        assert kernel_value(x, t, params, "plus") == 0.0
        assert kernel_value(x, t, params, "minus") == kernel_value(x, t, params, "full")

    def test_even_combination_symmetric(self):
        params = GridParams(r=1.3, alpha=0.37)
        assert kernel_value(0.2, 0.9, params, "even") == pytest.approx(
            kernel_value(0.9, 0.2, params, "even")
        )

    def test_single_scale_support(self):
        # scan all scales: exactly one contributes for points sharing a tree
        t, x = 0.21, 0.68
        params = GridParams(r=1.2, alpha=0.05)
        contributions = 0
        for k in range(-40, 40):
            L = 2.0 ** (params.r - k)
            s_t, s_x = t - params.alpha, x - params.alpha
            same_parent = math.floor(s_t / L) == math.floor(s_x / L)
            split_children = math.floor(s_t / (L / 2)) != math.floor(s_x / (L / 2))
            if same_parent and split_children:
                contributions += 1
        assert contributions == 1

    def test_magnitude_is_two_over_scale(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            t, x = sorted(rng.uniform(0.01, 2.0, 2))
            if x - t < 1e-6:
                continue
            params = GridParams(r=float(rng.uniform(1, 2)), alpha=0.0)
            value = kernel_value(t, x, params)
            if value == 0.0:
                continue
            # |K| = 2/L for the separating scale L = r 2^-k
            L = 2.0 / abs(value)
            k = math.log2(params.r) - math.log2(L)
            assert k == pytest.approx(round(k), abs=1e-9)


class TestTranslationAverage:
    def test_exact_matches_sampled_oracle(self):
        # the closed-form per-scale means against literal alpha quadrature
        for t, x, r in [(0.1, 0.35, 1.0), (0.2, 0.9, 1.5), (0.05, 0.1, 1.9)]:
            exact = average_translations(t, x, r)
            sampled = average_translations(t, x, r, window=256 * (x - t), alpha_points=20000)
            assert sampled == pytest.approx(exact, abs=2e-2 / (x - t))

    def test_depends_only_on_separation(self):
        a = average_translations(0.1, 0.4, 1.5)
        b = average_translations(0.3, 0.6, 1.5)
        assert abs(a - b) <= 1e-10

    def test_antisymmetric_in_separation(self):
        a = average_translations(0.2, 0.5, 1.25)
        b = average_translations(0.5, 0.2, 1.25)
        assert a == pytest.approx(-b, abs=1e-12)

    def test_window_doubling_neutral(self):
        # the default mode averages each scale over exactly one period, so
        # it already equals the infinite-window limit and the window has no
        # effect at all
        base = average_translations(0.15, 0.4, 1.0, window=8.0)
        doubled = average_translations(0.15, 0.4, 1.0, window=16.0)
        assert doubled == pytest.approx(base, abs=1e-12)

    def test_partial_kernels_average_to_common_magnitude(self):
        # for separated points only one partial kernel fires pointwise; its
        # translation average carries the full kernel's value
        full = average_translations(0.1, 0.45, 1.2)
        plus = average_translations(0.1, 0.45, 1.2, part="plus")
        minus = average_translations(0.1, 0.45, 1.2, part="minus")
        assert minus == 0.0
        assert plus == pytest.approx(full, abs=1e-14)


class TestFullAverage:
    @pytest.mark.parametrize(
        "pair",
        [(0.2, 0.7), (0.1, 0.25), (-0.3, 0.45), (0.05, 0.8), (1.1, 1.35), (-0.6, -0.15)],
    )
    def test_vanishes_at_six_pairs(self, pair):
        t, x = pair
        value = average_full(t, x, r_points=256)
        assert abs(value) <= 1e-3 / abs(x - t)

    def test_magnitude_decreases_with_resolution(self):
        t, x = 0.2, 0.7
        coarse = abs(average_full(t, x, r_points=16))
        fine = abs(average_full(t, x, r_points=256))
        assert fine <= coarse + 1e-12

    def test_even_combination_also_vanishes(self):
        value = average_full(0.2, 0.7, r_points=256, part="even")
        assert abs(value) <= 1e-3 / 0.5

    def test_csv_table(self):
        text = averages_csv([(0.2, 0.7)], r_points=32)
        lines = text.strip().split("\n")
        assert lines[0].startswith("t,x,r_points")
        assert len(lines) == 2


class TestHomogeneity:
    def test_half_ratio(self):
        report = homogeneity_check(0.1, r=1.0)
        assert report.ratio == pytest.approx(2.0, rel=0.05)
        assert report.antisymmetry_error <= 1e-12

    def test_half_ratio_other_dilation(self):
        report = homogeneity_check(0.07, r=1.7)
        assert report.ratio == pytest.approx(2.0, rel=0.05)
