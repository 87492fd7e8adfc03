
import numpy as np
import pytest

from strgreedy import (FunctionObjective, InvalidCurvature, NoPositiveIncrement,
                       TableObjective, Verdict, ZeroDenominator, bound_beta1,
                       bound_beta2, bound_constants, bound_stepwise, certify,
                       check_A1, check_A2, check_A3, check_assumptions,
                       check_string_submodular, compute_bounds, greedy_curvature,
                       greedy_solve, brute_force_optimum,
                       uniform_no_repeat_constraint)
from strgreedy.problems import (SuccessMatrix, TABLE1, rectangular_grid,
                                coverage_constraint, coverage_objective,
                                scheduling_constraint, scheduling_objective)

from conftest import schedule_value


def table1_candidate_ratios():
    """(k, agent) -> f(agent) / increment, straight from the table."""
    p = TABLE1
    greedy = (0, 1, 2)
    out = {}
    for k in (2, 3):
        prefix = greedy[:k - 1]
        base = schedule_value(p, prefix)
        for s in range(5):
            if s in prefix:
                continue
            inc = schedule_value(p, prefix + (s,)) - base
            out[(k, s)] = p[s][0] / inc
    return out


@pytest.fixture
def t1_trace(table1):
    return greedy_solve(*table1)


class TestCurvature:
    def test_table1_step2(self, t1_trace):
        c = greedy_curvature(t1_trace)
        assert c.alpha(2) == pytest.approx(1.5, abs=1e-12)
        assert c.alpha_k_at[0] == (2, 4)
        # f(M5) = 0.12, increment 0.8 * 0.10 = 0.08
        assert 0.12 / 0.08 == pytest.approx(c.alpha(2))

    def test_table1_alpha_G_exhaustive(self, t1_trace):
        ratios = table1_candidate_ratios()
        c = greedy_curvature(t1_trace)
        assert c.alpha_G == pytest.approx(max(ratios.values()), abs=1e-12)
        assert c.alpha_G_at == max(ratios, key=ratios.get) == (3, 4)
        assert c.alpha_G == max(c.alpha_k)
        assert c.excluded_candidates == 0

    def test_single_candidate(self):
        # K=2 where only g2 is feasible at step 2
        from strgreedy import ExplicitConstraint
        f = TableObjective({(0,): 0.6, (1,): 0.3, (0, 1): 0.8}, 2, 2, default=0.0)
        t = greedy_solve(f, ExplicitConstraint([(0, 1), (1,)], 2))
        c = greedy_curvature(t)
        assert c.alpha_G == pytest.approx(0.3 / 0.2)
        assert bound_stepwise(t, c) == pytest.approx(0.8 / (0.6 + 0.3))

    def test_excludes_nonpositive(self):
        f = TableObjective({(0,): 0.5, (1,): 0.4, (2,): 0.1, (0, 1): 0.7,
                            (0, 2): 0.5}, 3, 2, default=0.0)
        t = greedy_solve(f, uniform_no_repeat_constraint(3, 2))
        c = greedy_curvature(t)
        assert c.excluded_candidates == 1
        assert c.alpha_G == pytest.approx(0.4 / 0.2)

    def test_no_positive_increment(self):
        f = TableObjective({(0,): 0.5, (1,): 0.4, (0, 1): 0.5}, 2, 2, default=0.0)
        t = greedy_solve(f, uniform_no_repeat_constraint(2, 2))
        with pytest.raises(NoPositiveIncrement) as exc:
            greedy_curvature(t)
        assert exc.value.k == 2

    def test_requires_two_steps(self, table1):
        m = SuccessMatrix(np.asarray(TABLE1)[:, :1])
        t = greedy_solve(scheduling_objective(m), scheduling_constraint(m))
        with pytest.raises(ValueError):
            greedy_curvature(t)


class TestFormulas:
    @pytest.mark.parametrize("K", [1, 2, 3, 7])
    def test_beta1_at_unit_curvature(self, K):
        assert bound_beta1(1.0, K) == pytest.approx(1.0)

    def test_beta1_arithmetic(self):
        assert bound_beta1(2.0, 3) == pytest.approx(2 / 3)

    def test_beta1_decreasing(self):
        vals = [bound_beta1(a, 4) for a in (1.0, 1.5, 2.0, 10.0)]
        assert vals == sorted(vals, reverse=True)

    def test_beta1_invalid(self):
        with pytest.raises(InvalidCurvature):
            bound_beta1(0.9, 3)
        assert bound_beta1(0.9, 3, strict=False) > 1.0

    def test_beta1_table1(self, t1_trace):
        # printed figure is 0.5893; exhaustive curvature gives 0.632 (see README)
        alpha = max(table1_candidate_ratios().values())
        assert bound_beta1(greedy_curvature(t1_trace).alpha_G, 3) == \
            pytest.approx(1 / 3 + (2 / 3) / alpha, abs=1e-12)
        assert 1 / 3 + (2 / 3) / alpha == pytest.approx(0.632, abs=1e-12)

    def test_beta2_table1(self, t1_trace):
        den = TABLE1[0][0] + TABLE1[1][0] + TABLE1[2][0]
        assert bound_beta2(t1_trace) == pytest.approx(0.42208 / den, abs=1e-12)
        assert bound_beta2(t1_trace) == pytest.approx(0.7816, abs=5e-5)

    def test_beta2_k1(self):
        m = SuccessMatrix(np.asarray(TABLE1)[:, :1])
        t = greedy_solve(scheduling_objective(m), scheduling_constraint(m))
        assert bound_beta2(t) == 1.0

    def test_beta2_zero(self):
        f = FunctionObjective(lambda s: 0.0, 2, 1)
        t = greedy_solve(f, uniform_no_repeat_constraint(2, 1))
        with pytest.raises(ZeroDenominator):
            bound_beta2(t)

    def test_stepwise_equal_alphas(self, t1_trace):
        c = greedy_curvature(t1_trace)
        from dataclasses import replace
        flat = replace(c, alpha_k=(c.alpha_G,) * len(c.alpha_k))
        fG, fg1 = t1_trace.greedy_value, t1_trace.values[1]
        assert bound_stepwise(t1_trace, flat) == \
            pytest.approx(fG / (fg1 + c.alpha_G * (fG - fg1)))

    def test_stepwise_table1(self, t1_trace):
        c = greedy_curvature(t1_trace)
        expected = 0.42208 / (0.2 + 1.5 * 0.128 + (0.12 / (0.672 * 0.08)) * 0.09408)
        assert bound_stepwise(t1_trace, c) == pytest.approx(expected, abs=1e-12)
        assert bound_stepwise(t1_trace, c) >= bound_beta1(c.alpha_G, 3)

    def test_constants(self):
        b0, bn = bound_constants(3)
        assert b0 == pytest.approx(0.6321, abs=5e-5)
        assert bn == pytest.approx(1 - (2 / 3) ** 3)
        assert bound_constants(1)[1] == 1.0
        nem = [bound_constants(K)[1] for K in (1, 2, 5, 50, 5000)]
        assert all(v >= b0 for v in nem) and nem == sorted(nem, reverse=True)
        assert nem[-1] == pytest.approx(b0, abs=1e-4)

    def test_compute_bounds_table1(self, t1_trace):
        b = compute_bounds(t1_trace)
        assert b.beta2_denominator == pytest.approx(0.54)
        assert b.beta1 <= b.beta2
        assert b.warnings == ()

    def test_compute_bounds_k1(self):
        m = SuccessMatrix(np.asarray(TABLE1)[:, :1])
        b = compute_bounds(greedy_solve(scheduling_objective(m), scheduling_constraint(m)))
        assert b.alpha_G is None and b.beta1 == 1.0 and b.beta2 == 1.0


SUPERMOD = {(0,): 0.1, (1,): 0.1, (0, 1): 0.5, (1, 0): 0.5}


class TestAssumptions:
    def test_A1_table1(self, table1, t1_trace):
        o = brute_force_optimum(*table1)
        assert check_A1(t1_trace, o.best_string, table1[1]).verdict is Verdict.HOLDS

    def test_A1_greedy_is_optimal(self, table1, t1_trace):
        assert check_A1(t1_trace, t1_trace.chosen, table1[1]).holds

    def test_A1_repeat_fails(self, table1, t1_trace):
        chk = check_A1(t1_trace, (1, 0, 3), table1[1])
        assert chk.verdict is Verdict.FAILS
        assert chk.witness == {"k": 2, "symbol": 0}

    def test_A1_short_optimum(self, table1, t1_trace):
        assert check_A1(t1_trace, (0, 1), table1[1]).verdict is Verdict.NOT_CHECKABLE

    def test_A2(self, table1):
        f, _ = table1
        assert check_A2(f, (0, 1, 2)).holds
        assert check_A2(f, (3,)).holds

    def test_A2_supermodular_fails(self):
        f = TableObjective(SUPERMOD, 2, 2)
        chk = check_A2(f, (0, 1))
        assert chk.verdict is Verdict.FAILS and chk.witness["k"] == 2
        # witness reproduces
        assert f((0, 1)) - f((0,)) > f((1,))

    def test_A3(self, t1_trace):
        assert check_A3(t1_trace).holds

    def test_A3_zero_probability(self):
        # agent 0 goes first; agent 1's stage-2 entry is zero
        p = [[0.5, 0.3], [0.4, 0.0], [0.3, 0.2]]
        m = SuccessMatrix(p)
        t = greedy_solve(scheduling_objective(m), scheduling_constraint(m))
        chk = check_A3(t)
        assert chk.verdict is Verdict.FAILS
        assert chk.witness["k"] == 2 and chk.witness["symbol"] == 1

    def test_A3_k1(self):
        m = SuccessMatrix([[0.5], [0.0]])
        t = greedy_solve(scheduling_objective(m), scheduling_constraint(m))
        assert check_A3(t).witness == {"k": 1, "symbol": 1, "increment": 0.0}

    def test_report_without_oracle(self, table1, t1_trace):
        r = check_assumptions(t1_trace, *table1)
        assert r.verdicts == (Verdict.NOT_CHECKABLE, Verdict.NOT_CHECKABLE, Verdict.HOLDS)

    def test_all_optima_scope(self):
        f = FunctionObjective(lambda s: float(len(set(s))), 3, 2)
        c = uniform_no_repeat_constraint(3, 2)
        t = greedy_solve(f, c)
        o = brute_force_optimum(f, c)
        r = check_assumptions(t, f, c, o, all_optima=True)
        # optima containing symbol 0 in second place fail A1
        assert r.optima_scope["A1"] == "some"
        assert r.optima_scope["A2"] == "all"


class TestSubmodularity:
    def test_table1(self, table1):
        assert check_string_submodular(*table1)

    def test_coverage_small_grid(self):
        g = rectangular_grid(4, 3, 1.0, "uniform")
        assert check_string_submodular(coverage_objective(g, 2), coverage_constraint(g, 2))

    def test_supermodular_witness(self):
        f = TableObjective(SUPERMOD, 2, 2)
        v = check_string_submodular(f, uniform_no_repeat_constraint(2, 2))
        assert not v
        assert v.condition == "diminishing"
        assert v.witness == ((), (0,), 1)

    def test_monotonicity_violation(self):
        f = TableObjective({(0,): 0.5, (1,): 0.4, (0, 1): 0.3, (1, 0): 0.6}, 2, 2)
        v = check_string_submodular(f, uniform_no_repeat_constraint(2, 2))
        assert v.condition == "monotone" and v.A == (0,) and v.B == (0, 1)

    def test_stage_increasing_schedule_not_submodular(self):
        m = SuccessMatrix([[0.01, 0.9], [0.01, 0.9]])
        v = check_string_submodular(scheduling_objective(m), scheduling_constraint(m))
        assert not v and v.condition == "diminishing"


class TestCertify:
    def test_table1(self, table1, t1_trace):
        o = brute_force_optimum(*table1)
        b = compute_bounds(t1_trace)
        a = check_assumptions(t1_trace, *table1, o)
        cert = certify(t1_trace, o, b, a)
        assert cert.ratio == pytest.approx(1.0)
        assert cert.ok
        assert cert.get("beta2").certified and cert.get("beta1").certified
        assert cert.get("beta2").margin == pytest.approx(1.0 - b.beta2)
        assert cert.get("beta0").certified is None

    def test_a1_failure_uncertified(self):
        # greedy takes agent 0 first; the optimum wants it at stage 2
        m = SuccessMatrix([[0.5, 0.9], [0.45, 0.1], [0.1, 0.1]])
        f, c = scheduling_objective(m), scheduling_constraint(m)
        t = greedy_solve(f, c)
        o = brute_force_optimum(f, c)
        a = check_assumptions(t, f, c, o)
        assert a.a1.verdict is Verdict.FAILS
        cert = certify(t, o, compute_bounds(t), a)
        assert cert.ok
        assert cert.get("beta1").certified is None and cert.get("beta2").certified is None
        assert cert.ratio <= 1.0


def test_zero_curvature_is_reported_not_raised():
    # agent 1 is worthless alone at stage 1 but perfect at stage 2
    m = SuccessMatrix([[0.0, 0.0], [0.0, 1.0]])
    t = greedy_solve(scheduling_objective(m), scheduling_constraint(m))
    b = compute_bounds(t)
    assert b.alpha_G == 0.0 and b.beta1 is None
    assert any("alpha_G = 0" in w for w in b.warnings)
    with pytest.raises(InvalidCurvature):
        bound_beta1(0.0, 2, strict=False)
