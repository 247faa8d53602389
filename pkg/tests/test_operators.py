import math

import numpy as np
import pytest

from dyadiclab.dyadic import (
    DyadicInterval,
    HaarExpansion,
    analyze,
    coeff_vector,
    expansion_from_vector,
    grid_points,
    synthesize_grid,
    unit_haar,
    vector_size,
)
from dyadiclab.hilbert import FourierSeries, phi_generator, torus_grid
from dyadiclab.operators import (
    ShiftKind,
    apply_s0,
    apply_s0_vector,
    apply_s_classical,
    apply_s_classical_vector,
    apply_s_classical_vector_transpose,
    apply_t_alpha,
    as_matrix,
    line_vs_interval_report,
    project_four_arcs,
)


def random_expansion(depth, seed, zero_mean_root=False):
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(vector_size(depth))
    if zero_mean_root:
        vec[0] = 0.0
        vec[1] = 0.0
    return expansion_from_vector(vec, depth)


def inner(e1, e2, depth):
    return float(np.mean(synthesize_grid(e1, depth) * synthesize_grid(e2, depth)))


class TestSiblingShift:
    def test_right_child_moves_left_with_plus(self):
        out = apply_s0(unit_haar(DyadicInterval(1, 1), depth=2))
        assert out.coeffs == {DyadicInterval(1, 0): 1.0}
        assert out.mean == 0.0

    def test_left_child_moves_right_with_minus(self):
        out = apply_s0(unit_haar(DyadicInterval(1, 0), depth=2))
        assert out.coeffs == {DyadicInterval(1, 1): -1.0}

    def test_kills_mean_and_root(self):
        e = HaarExpansion(mean=2.0, coeffs={DyadicInterval(0, 0): 3.0}, depth=2)
        out = apply_s0(e)
        assert out.mean == 0.0
        assert out.coeffs == {}

    def test_antiinvolution_exact(self):
        for interval in [DyadicInterval(1, 0), DyadicInterval(3, 5), DyadicInterval(5, 20)]:
            e = unit_haar(interval)
            twice = apply_s0(apply_s0(e))
            assert twice.coeffs == {interval: -1.0}
        e = random_expansion(8, 1, zero_mean_root=True)
        twice = apply_s0(apply_s0(e))
        assert twice.coeffs.keys() == e.coeffs.keys()
        for key, value in e.coeffs.items():
            assert twice.coeffs[key] == -value  # sign flips are exact

    def test_antisymmetry_pairing(self):
        depth = 8
        f = random_expansion(depth, 2)
        g = random_expansion(depth, 3)
        lhs = inner(apply_s0(f), g, depth)
        rhs = -inner(f, apply_s0(g), depth)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_isometry_off_kernel(self):
        e = random_expansion(7, 4, zero_mean_root=True)
        out = apply_s0(e)
        assert sorted(abs(v) for v in out.coeffs.values()) == sorted(
            abs(v) for v in e.coeffs.values()
        )

    def test_vector_path_agrees(self):
        e = random_expansion(6, 5)
        vec_out = apply_s0_vector(coeff_vector(e))
        assert np.max(np.abs(vec_out - coeff_vector(apply_s0(e), 6))) == 0.0


class TestClassicalShift:
    def test_root_fans_out(self):
        out = apply_s_classical(unit_haar(DyadicInterval(0, 0), depth=2))
        r = 1.0 / math.sqrt(2.0)
        assert out.coefficient(DyadicInterval(1, 1)) == pytest.approx(r)
        assert out.coefficient(DyadicInterval(1, 0)) == pytest.approx(-r)

    def test_zero_stays_zero(self):
        out = apply_s_classical(HaarExpansion(depth=3))
        assert out.mean == 0.0 and out.coeffs == {}

    def test_isometry_above_truncation(self):
        # f supported above the deepest level and mean-free is mapped isometrically
        depth = 6
        rng = np.random.default_rng(6)
        vec = np.zeros(vector_size(depth))
        vec[1 : 2 ** (depth - 1)] = rng.standard_normal(2 ** (depth - 1) - 1)
        e = expansion_from_vector(vec, depth)
        out, dropped = apply_s_classical(e, return_dropped=True)
        assert dropped == 0.0
        # oracle: Parseval on the image
        assert out.l2_norm() == pytest.approx(e.l2_norm(), rel=1e-12)

    def test_dropped_mass_reported(self):
        e = unit_haar(DyadicInterval(2, 1), depth=3)
        out, dropped = apply_s_classical(e, return_dropped=True)
        assert out.coeffs == {}
        assert dropped == 1.0

    def test_transpose_is_adjoint(self):
        rng = np.random.default_rng(7)
        u = rng.standard_normal(vector_size(5))
        v = rng.standard_normal(vector_size(5))
        lhs = float(apply_s_classical_vector(u) @ v)
        rhs = float(u @ apply_s_classical_vector_transpose(v))
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestMultiplier:
    def test_all_plus_is_identity(self):
        e = random_expansion(5, 8)
        out = apply_t_alpha(e, {})
        assert out.mean == e.mean and out.coeffs == e.coeffs

    def test_involution(self):
        e = random_expansion(5, 9)
        signs = {k: -1 for k in e.coeffs}
        back = apply_t_alpha(apply_t_alpha(e, signs), signs)
        assert back.coeffs == e.coeffs

    def test_isometry_random_signs(self):
        depth = 8
        rng = np.random.default_rng(10)
        e = random_expansion(depth, 11)
        signs = {k: int(s) for k, s in zip(e.coeffs, rng.choice([-1, 1], len(e.coeffs)))}
        out = apply_t_alpha(e, signs)
        assert out.l2_norm() == pytest.approx(e.l2_norm(), rel=1e-14)

    def test_rejects_bad_signs(self):
        with pytest.raises(ValueError):
            apply_t_alpha(HaarExpansion(depth=2), {DyadicInterval(0, 0): 2})


class TestMatrices:
    def test_columns_match_functional_operator(self):
        depth = 4
        m = as_matrix(ShiftKind("s0"), depth)
        for col in range(vector_size(depth)):
            basis = np.zeros(vector_size(depth))
            basis[col] = 1.0
            e = expansion_from_vector(basis, depth)
            expected = coeff_vector(apply_s0(e), depth)
            assert np.array_equal(m.entries[:, col], expected)

    def test_s0_antisymmetric_every_depth(self):
        for depth in range(1, 11):
            m = as_matrix(ShiftKind("s0"), depth).entries
            assert np.max(np.abs(m + m.T)) == 0.0

    def test_singular_values_zero_or_one(self):
        for depth in range(1, 11):
            sv = np.linalg.svd(as_matrix(ShiftKind("s0"), depth).entries, compute_uv=False)
            defect = np.max(np.minimum(np.abs(sv), np.abs(sv - 1.0)))
            assert defect < 1e-10

    def test_t_alpha_matrix_diagonal(self):
        signs = {DyadicInterval(1, 0): -1}
        m = as_matrix(ShiftKind("t_alpha", signs), 3).entries
        assert np.array_equal(m, np.diag(np.diag(m)))
        assert set(np.diag(m)) == {-1.0, 1.0}

    def test_matrix_application_random(self):
        depth = 6
        m = as_matrix(ShiftKind("s_classical"), depth).entries
        rng = np.random.default_rng(12)
        vec = rng.standard_normal(vector_size(depth))
        assert np.max(np.abs(m @ vec - apply_s_classical_vector(vec))) < 1e-12

    def test_depth_cap(self):
        with pytest.raises(ValueError):
            as_matrix(ShiftKind("s0"), 15)

    def test_csv_header(self):
        text = as_matrix(ShiftKind("s0"), 2).to_csv()
        assert text.startswith("# kind=s0 depth=2\n")
        assert len(text.strip().split("\n")) == 1 + vector_size(2)


class TestFourArcProjection:
    def test_constant_fixed(self):
        pr = project_four_arcs(np.ones(32))
        assert np.array_equal(pr.averages, np.ones(4))

    def test_sign_sin_is_fixed_point(self):
        grid = torus_grid(4096)
        values = phi_generator(-1, grid).astype(float)
        pr = project_four_arcs(values)
        assert np.array_equal(pr.averages, np.array([-1.0, -1.0, 1.0, 1.0]))
        # oracle: quadrature of sign(sin) over each arc
        for i, (a, b) in enumerate(
            [(-np.pi + j * np.pi / 2, -np.pi + (j + 1) * np.pi / 2) for j in range(4)]
        ):
            sel = (grid >= a) & (grid < b)
            assert pr.averages[i] == pytest.approx(values[sel].mean())

    def test_idempotent(self):
        grid = torus_grid(256)
        rng = np.random.default_rng(13)
        values = rng.standard_normal(256)
        once = project_four_arcs(values)
        twice = project_four_arcs(once.evaluate(grid))
        assert np.max(np.abs(once.averages - twice.averages)) < 1e-12

    def test_self_adjoint(self):
        grid = torus_grid(1024)
        f = FourierSeries.from_cos({1: 1.0, 2: 0.5}).evaluate(grid)
        g = FourierSeries.from_sin({1: 0.3, 3: 1.0}).evaluate(grid)
        pf = project_four_arcs(f).evaluate(grid)
        pg = project_four_arcs(g).evaluate(grid)
        assert np.mean(pf * g) == pytest.approx(np.mean(f * pg), abs=1e-12)
        assert np.mean(pf * g) == pytest.approx(np.mean(pf * pg), abs=1e-12)

    def test_exact_arc_averages_from_series(self):
        f = FourierSeries.from_cos({1: 1.0})
        pr = project_four_arcs(f)
        grid = torus_grid(1 << 14)
        sampled = project_four_arcs(f.evaluate(grid))
        assert np.max(np.abs(pr.averages - sampled.averages)) < 1e-8


class TestLineEmbedding:
    def test_zero_mean_and_root_no_correction(self):
        vec = np.zeros(vector_size(3))
        vec[2] = 1.0  # interval (1, 0)
        vec[5] = -0.5
        e = expansion_from_vector(vec, 3)
        report = line_vs_interval_report(e, levels_above=4)
        assert report.correction_sup == 0.0
        assert report.restriction_max_error < 1e-14

    def test_indicator_decays_like_one_over_size(self):
        e = analyze(np.ones(4))
        sups = []
        for h in (2, 4, 8):
            report = line_vs_interval_report(e, levels_above=h)
            assert report.correction_sup <= 2.0 * report.f_l1 * 2.0**-h + 1e-15
            sups.append(report.correction_sup)
        assert sups[0] > sups[1] > sups[2]
        # doubling the height at least halves the reported discrepancy
        assert sups[1] <= sups[0] / 2 + 1e-15
        assert sups[2] <= sups[1] / 2 + 1e-15

    def test_restriction_identity_random(self):
        e = random_expansion(4, 14)
        for h in (1, 3):
            report = line_vs_interval_report(e, levels_above=h)
            assert report.restriction_max_error < 1e-12

    def test_random_halving(self):
        rng = np.random.default_rng(15)
        e = analyze(rng.standard_normal(16))
        r4 = line_vs_interval_report(e, levels_above=4)
        r8 = line_vs_interval_report(e, levels_above=8)
        assert r8.correction_sup <= r4.correction_sup / 2 + 1e-15
