import math

import numpy as np
import pytest

from dyadiclab.dyadic import DyadicInterval, coeff_vector, vector_size
from dyadiclab.hilbert import hp_constant
from dyadiclab.lowerbound import c0_constant
from dyadiclab.normlab import (
    duality_pair,
    lp_quotient,
    norm_lp_lower_bound,
    norm_p2_exact,
    sandwich_report,
    transfer_witness,
)
from dyadiclab.operators import ShiftKind, as_matrix

S0 = ShiftKind("s0")
IDENTITY = ShiftKind("t_alpha")  # empty signs: every multiplier +1


class TestExactP2:
    @pytest.mark.parametrize("depth", [2, 4, 8])
    def test_shift_norm_is_one(self, depth):
        assert norm_p2_exact(S0, depth) == pytest.approx(1.0, abs=1e-12)

    def test_multiplier_norm_is_one(self):
        rng = np.random.default_rng(0)
        signs = {
            DyadicInterval(k, m): int(s)
            for (k, m), s in zip(
                [(1, 0), (2, 3), (3, 5)], rng.choice([-1, 1], 3)
            )
        }
        assert norm_p2_exact(ShiftKind("t_alpha", signs), 5) == pytest.approx(1.0)

    def test_classical_shift_on_retained_subspace(self):
        # oracle: explicit singular value decomposition at depth 4
        sv = np.linalg.svd(as_matrix(ShiftKind("s_classical"), 4).entries, compute_uv=False)
        assert sv[0] == pytest.approx(1.0, abs=1e-12)
        defect = np.max(np.minimum(np.abs(sv), np.abs(sv - 1.0)))
        assert defect < 1e-12
        assert norm_p2_exact(ShiftKind("s_classical"), 4) == pytest.approx(1.0)

    def test_depth_cap(self):
        with pytest.raises(ValueError):
            norm_p2_exact(S0, 13)


class TestLowerBound:
    def test_p2_matches_exact(self):
        est = norm_lp_lower_bound(S0, 2.0, 8, restarts=4, seed=0)
        assert est.value == pytest.approx(1.0, abs=1e-8)

    def test_identity_operator_any_p(self):
        for p in (1.5, 2.0, 3.0):
            est = norm_lp_lower_bound(IDENTITY, p, 4, restarts=2, seed=1)
            assert est.value == pytest.approx(1.0, abs=1e-9)

    def test_p4_within_theorem_ceiling(self):
        ceiling = hp_constant(4.0) / c0_constant()
        est = norm_lp_lower_bound(S0, 4.0, 8, restarts=8, seed=2)
        assert 1.0 < est.value <= ceiling + 1e-9

    def test_witness_certifies_value(self):
        est = norm_lp_lower_bound(S0, 4.0, 6, restarts=4, seed=3)
        assert est.recompute() == pytest.approx(est.value, rel=1e-10)
        # the witness really avoids the kernel slots
        vec = coeff_vector(est.witness, est.depth)
        assert vec[0] == 0.0 and vec[1] == 0.0

    def test_trace_non_decreasing(self):
        est = norm_lp_lower_bound(S0, 3.0, 6, restarts=8, seed=4)
        assert all(b >= a for a, b in zip(est.trace[:-1], est.trace[1:]))

    def test_monotone_in_depth_with_warm_start(self):
        shallow = norm_lp_lower_bound(S0, 4.0, 5, restarts=8, seed=5)
        deep = norm_lp_lower_bound(
            S0, 4.0, 6, restarts=8, seed=5,
            warm_starts=(coeff_vector(shallow.witness, 6),),
        )
        assert deep.value >= shallow.value - 1e-12

    def test_deterministic_given_seed(self):
        a = norm_lp_lower_bound(S0, 4.0, 5, restarts=4, seed=6)
        b = norm_lp_lower_bound(S0, 4.0, 5, restarts=4, seed=6)
        assert a.value == b.value

    def test_rejects_p_one(self):
        with pytest.raises(ValueError):
            norm_lp_lower_bound(S0, 1.0, 4)


class TestDuality:
    def test_transfer_preserves_value(self):
        est = norm_lp_lower_bound(S0, 4.0, 6, restarts=8, seed=7)
        dual_vec = transfer_witness(S0, est)
        q = 4.0 / 3.0
        assert lp_quotient(S0, dual_vec, q) >= est.value - 1e-9

    def test_pair_within_two_percent(self):
        est_p, est_q = duality_pair(S0, 4.0, 8, restarts=12, seed=8)
        gap = abs(est_p.value - est_q.value) / max(est_p.value, est_q.value)
        assert gap <= 0.02


class TestSandwich:
    def test_p2_row_tight_at_lower_end(self):
        report = sandwich_report([2.0], 6, restarts=4, seed=9)
        row = report.rows[0]
        assert row.h_p == pytest.approx(1.0)
        assert row.lower_bound == pytest.approx(1.0, abs=1e-8)
        assert row.ceiling == pytest.approx(1.34689, abs=1e-5)
        assert row.consistent

    def test_dual_triple_consistent(self):
        report = sandwich_report([4.0 / 3.0, 2.0, 4.0], 8, restarts=8, seed=10)
        assert report.passed()
        by_p = {round(r.p, 6): r for r in report.rows}
        assert by_p[round(4 / 3, 6)].h_p == pytest.approx(1 + math.sqrt(2))
        assert by_p[4.0].h_p == pytest.approx(1 + math.sqrt(2))
        assert by_p[4.0].ceiling == pytest.approx(3.2518, abs=1e-3)
        # duality symmetry of the reported bounds
        lb_a = by_p[round(4 / 3, 6)].lower_bound
        lb_b = by_p[4.0].lower_bound
        assert abs(lb_a - lb_b) / max(lb_a, lb_b) <= 0.02

    def test_csv_columns(self):
        text = sandwich_report([2.0], 4, restarts=2, seed=11).to_csv()
        assert text.splitlines()[0] == "p,depth,h_p,lb_s_p,ceiling,gap,restarts,iterations"
