"""Empirical extreme-value estimators: maxima rates, cluster indexes, the
anti-clustering statistic, and the extremal-independence scan."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subgauss import chaos, evt, gausslin, m4
from subgauss.gausslin import SeriesMatrix, SpecError
from subgauss.m4 import IidPareto, M4Spec


def iid_fn(n, d=1):
    def fn(seed):
        rng = np.random.Generator(np.random.Philox(key=seed))
        return SeriesMatrix(values=rng.pareto(1.0, size=(n, d)) + 1.0, meta={})

    return fn


def equal_spec(nlags=4):
    return M4Spec(
        d=1,
        alpha=1.0,
        lags=(0, nlags - 1),
        a=np.ones((nlags, 1, 1)),
        innovation=IidPareto(alpha=1.0),
    )


def _m4_path(spec, n, seed):
    span = spec.r_hi - spec.r_lo
    return m4.build(m4.innovations(spec, n + span, seed), spec)


class TestEmpiricalNonexceed:
    def test_iid_closed_form(self):
        n, tau = 2000, 1.0
        u = m4.thresholds(
            M4Spec(
                d=1,
                alpha=1.0,
                lags=(0, 0),
                a=np.ones((1, 1, 1)),
                innovation=IidPareto(1.0),
            ),
            n,
            (tau,),
        )
        p, ci = evt.empirical_nonexceed(iid_fn(n), u, reps=2000, base_seed=7)
        want = (1 - 1 / n) ** n
        assert abs(p - want) < 2 * ci

    def test_too_few_reps_rejected(self):
        u = m4.thresholds(equal_spec(), 100, (1.0,))
        with pytest.raises(SpecError):
            evt.empirical_nonexceed(iid_fn(100), u, reps=10, base_seed=0)

    def test_generator_failure_reports_replication(self):
        def bad(seed):
            if seed == 5 ^ 3:
                raise ValueError("boom")
            return iid_fn(100)(seed)

        u = m4.thresholds(equal_spec(), 100, (1.0,))
        with pytest.raises(RuntimeError, match="replication 3"):
            evt.empirical_nonexceed(bad, u, reps=100, base_seed=5)


class TestRunsAndBlocks:
    def test_theta0_is_one_by_convention(self):
        Y = _m4_path(equal_spec(), 50_000, 1)
        u = m4.thresholds(equal_spec(), 50_000, (200.0,))
        rep = evt.runs_theta(Y, u, 0)
        assert rep.estimate == 1.0

    def test_iid_theta_close_to_one(self):
        n = 100_000
        Y = iid_fn(n)(3)
        u = m4.thresholds(
            M4Spec(
                d=1,
                alpha=1.0,
                lags=(0, 0),
                a=np.ones((1, 1, 1)),
                innovation=IidPareto(1.0),
            ),
            n,
            (100.0,),
        )
        assert evt.runs_theta(Y, u, 5).estimate > 0.9
        # blocks estimator biases low as per-block occupancy saturates,
        # so keep the expected count per block well under one
        assert evt.blocks_theta(Y, u, 100).estimate > 0.85

    def test_moving_maxima_quarter(self):
        spec = equal_spec()
        n = 200_000
        Y = _m4_path(spec, n, 11)
        u = m4.thresholds(spec, n, (800.0,))
        rep = evt.runs_theta(Y, u, 3)
        assert abs(rep.estimate - 0.25) < 0.03
        brep = evt.blocks_theta(Y, u, 200)
        assert abs(brep.estimate - 0.25) < 0.06

    def test_insufficient_exceedances(self):
        spec = equal_spec()
        Y = _m4_path(spec, 1000, 1)
        u = m4.thresholds(spec, 1000, (1.0,))
        with pytest.raises(evt.InsufficientExceedances):
            evt.runs_theta(Y, u, 3)

    def test_blocks_needs_enough_blocks(self):
        spec = equal_spec()
        Y = _m4_path(spec, 1000, 1)
        u = m4.thresholds(spec, 1000, (100.0,))
        with pytest.raises(SpecError):
            evt.blocks_theta(Y, u, 500)

    def test_csv_row_contract(self):
        Y = iid_fn(50_000)(3)
        spec = M4Spec(
            d=1,
            alpha=1.0,
            lags=(0, 0),
            a=np.ones((1, 1, 1)),
            innovation=IidPareto(1.0),
        )
        u = m4.thresholds(spec, 50_000, (300.0,))
        rep = evt.runs_theta(Y, u, 2)
        assert evt.EstimatorReport.CSV_HEADER == (
            "method,m_or_b,estimate,stderr,exceed_count"
        )
        row = rep.to_csv_row()
        assert row.startswith("runs,2,")
        assert len(row.split(",")) == 5


class TestDPrime:
    def test_iid_matches_tau_sq_over_k(self):
        n, tau = 20_000, 5.0
        u = n / tau
        rep = evt.dprime_stat(
            iid_fn(n), n, u, [2, 4, 8, 16], reps=200, base_seed=12
        )
        for k in (2, 4, 8, 16):
            want = tau**2 / k
            assert abs(rep.stats[k] - want) <= 3 * rep.stderr[k] + 1e-12

    def test_nonincreasing_in_k(self):
        n = 20_000
        rep = evt.dprime_stat(
            iid_fn(n), n, n / 5.0, [2, 4, 8, 16], reps=100, base_seed=4
        )
        vals = [rep.stats[k] for k in (2, 4, 8, 16)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_wide_ci_flag(self):
        n = 2000
        rep = evt.dprime_stat(
            iid_fn(n), n, n * 50.0, [2], reps=50, base_seed=4
        )
        assert rep.joint_events < 10
        assert rep.wide_ci


class TestScan:
    def test_bound_column_uses_hyper_bound(self):
        rng = np.random.default_rng(6)
        rho = 0.5
        z1 = rng.normal(size=400_000)
        z2 = rho * z1 + np.sqrt(1 - rho**2) * rng.normal(size=400_000)
        rows = evt.extremal_independence_scan(z1, z2, [1.0, 2.0], rho)
        for r in rows:
            np.testing.assert_allclose(
                r.bound, chaos.joint_tail_bound(r.Fbar, rho)
            )
            # at these mild levels the bound holds with room to spare
            assert r.joint_exceed <= r.bound + 4 * r.joint_stderr

    def test_exact_marginal_tail_override(self):
        rows = evt.extremal_independence_scan(
            np.array([1.0, 2.0, 3.0]),
            np.array([3.0, 2.0, 1.0]),
            [2.5],
            0.0,
            marginal_tail=lambda x: x**-1.0,
        )
        np.testing.assert_allclose(rows[0].Fbar, 0.4)

    def test_length_mismatch(self):
        with pytest.raises(SpecError):
            evt.extremal_independence_scan(
                np.zeros(3), np.zeros(4), [1.0], 0.0
            )


@given(
    u_shift=st.floats(0.0, 2.0),
    m=st.integers(0, 6),
    seed=st.integers(0, 2**16),
)
@settings(max_examples=20, deadline=None)
def test_runs_estimate_in_unit_interval(u_shift, m, seed):
    Y = iid_fn(5000)(seed)
    u = m4.ThresholdVector(
        n=5000, tau=(1.0,), u=np.array([5.0 + u_shift]), mode="analytic_pareto"
    )
    try:
        rep = evt.runs_theta(Y, u, m)
    except evt.InsufficientExceedances:
        return
    assert 0.0 <= rep.estimate <= 1.0
