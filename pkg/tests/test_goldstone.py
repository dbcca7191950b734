import cmath
import csv
import io
import json
import math

import mpmath
import numpy as np
import pytest

from susyphase.errors import DivergenceError
from susyphase.hilbert import Basis, Operator, apply_on_factor, commutator
from susyphase.oscillators import OscillatorSystem, hamiltonian, supercharge, susy_basis
from susyphase.phase import exponential_phase_op
from susyphase.thermal import ThermalParams, canonical_average, thermal_vacuum
from susyphase.goldstone import (CONSISTENT, DISCREPANT, REPORT_COLUMNS, commutator_diagonals,
                                 discrepancy_report, goldstone_closed_form, goldstone_expectation,
                                 polylog_neg_half, polylog_neg_half_with_bound, report_to_csv, report_to_json,
                                 supercharge_norms_closed_form, supercharge_vacuum_action)

QUARTER = ThermalParams(1.0, math.log(4))
BETAS = np.linspace(0.5, 6.0, 10)


def mp_polylog(x):
    mpmath.mp.dps = 40
    return float(mpmath.polylog(-0.5, x))


class TestPolylog:
    def test_zero(self):
        assert polylog_neg_half(0.0) == 0

    def test_quarter_against_partial_sums(self):
        brute = math.fsum(math.sqrt(k) * 0.25 ** k for k in range(1, 200))
        assert polylog_neg_half(0.25) == pytest.approx(brute, abs=1e-15)
        assert polylog_neg_half(0.25) == pytest.approx(0.376265993448477, abs=1e-15)

    @pytest.mark.parametrize("x", [1e-8, 0.01, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999])
    def test_certified_bound(self, x):
        val, bound = polylog_neg_half_with_bound(x)
        assert abs(val - mp_polylog(x)) <= bound
        if x <= 0.9:
            assert bound <= 1e-12

    def test_monotone(self):
        vals = [polylog_neg_half(x) for x in np.linspace(0, 0.95, 20)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("x", [1.0, 1.5])
    def test_divergent(self, x):
        with pytest.raises(DivergenceError):
            polylog_neg_half(x)


class TestSuperchargeNorms:
    def test_zero_temperature(self):
        assert supercharge_vacuum_action(ThermalParams(1.0, math.inf), cutoff=5) == (0.0, 0.0)

    def test_quarter(self):
        q, qb = supercharge_vacuum_action(QUARTER, cutoff=40)
        want = (2 / math.sqrt(3)) * (1 / math.sqrt(5))
        assert q == pytest.approx(want, abs=1e-10)
        assert qb == pytest.approx(want, abs=1e-10)
        assert supercharge_norms_closed_form(QUARTER)[0] == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("beta", BETAS)
    def test_broken_at_finite_temperature(self, beta):
        tp = ThermalParams(1.0, beta)
        q, qb = supercharge_vacuum_action(tp)
        cq, cqb = supercharge_norms_closed_form(tp)
        assert q > 0 and qb > 0
        assert q == pytest.approx(cq, abs=1e-10)
        assert qb == pytest.approx(cqb, abs=1e-10)

    def test_decreasing_in_beta(self):
        norms = [supercharge_vacuum_action(ThermalParams(1.0, b))[0] for b in BETAS]
        assert all(a > b for a, b in zip(norms, norms[1:]))


class TestGoldstone:
    def test_quarter_restricted_value(self):
        p = goldstone_expectation(QUARTER, 0.0)
        want = 0.6 * mp_polylog(0.25)
        assert p.closed_form.real == pytest.approx(want, abs=1e-13)
        assert p.restricted_sum.real == pytest.approx(want, abs=1e-10)
        assert abs(p.restricted_sum - p.closed_form) <= p.tail_bound + 1e-14

    @pytest.mark.parametrize("beta", BETAS)
    @pytest.mark.parametrize("theta", [0.0, 1.0, 3.5])
    def test_reproduction_and_cancellation(self, beta, theta):
        p = goldstone_expectation(ThermalParams(1.0, beta), theta)
        assert abs(p.restricted_sum - p.closed_form) <= 1e-10
        assert abs(p.numeric_full) <= 1e-10
        assert abs(p.restricted_sum_bar + p.restricted_sum) <= 1e-12
        assert p.closed_form_bar == -p.closed_form

    def test_full_trace_by_direct_matrix_product(self):
        # oracle independent of the diagonal bookkeeping: tr(ρ [Q, E])
        s = susy_basis(30)
        q, _ = supercharge(s)
        e = exponential_phase_op(s, "susy", 0.7)
        direct = canonical_average(commutator(q, e), QUARTER)
        assert abs(direct) <= 1e-12
        assert abs(goldstone_expectation(QUARTER, 0.7, cutoff=30).numeric_full - direct) <= 1e-12

    def test_trace_cyclicity_random_operators(self, rng):
        s = susy_basis(12)
        q, _ = supercharge(s)
        h = hamiltonian(OscillatorSystem(s, 1.0))
        rho = np.diag(np.exp(-1.0 * np.diag(h.matrix).real))
        assert commutator(q, h).norm() == 0
        for _ in range(20):
            a = Operator(s, rng.normal(size=(s.dim, s.dim)) + 1j * rng.normal(size=(s.dim, s.dim)))
            val = np.trace(rho @ commutator(q, a).matrix)
            assert abs(val) <= 1e-10 * a.norm(2)

    @pytest.mark.parametrize("cutoff", [1, 3, 12])
    @pytest.mark.parametrize("theta", [0.0, 2.2])
    def test_diagonals_match_dense_commutators(self, cutoff, theta):
        tp = ThermalParams(1.0, 0.7)
        s = susy_basis(cutoff)
        q, qbar = supercharge(s)
        e = exponential_phase_op(s, "susy", theta)
        w = np.exp(-0.7 * s.occupations.sum(axis=1))
        dq, dqbar = np.diag(commutator(q, e).matrix), np.diag(commutator(qbar, e).matrix)
        nf0 = s.occupations[:, 1] == 0
        d = commutator_diagonals(tp, theta, cutoff)
        assert abs(d["nf0"] - np.dot(w[nf0], dq[nf0])) <= 1e-14
        assert abs(d["nf1"] - np.dot(w[~nf0], dq[~nf0])) <= 1e-14
        assert abs(d["trace_qbar"] - np.dot(w, dqbar)) <= 1e-14
        assert d["z"] == pytest.approx(w.sum(), rel=1e-15)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 3.0])
    def test_norms_match_dense_action(self, beta):
        tp = ThermalParams(1.0, beta)
        s = susy_basis(15)
        vac = thermal_vacuum(Basis(s.modes, True), tp)
        q, qbar = supercharge(s)
        got = supercharge_vacuum_action(tp, cutoff=15)
        assert got[0] == pytest.approx(apply_on_factor(q, vac).norm(), abs=1e-14)
        assert got[1] == pytest.approx(apply_on_factor(qbar, vac).norm(), abs=1e-14)

    def test_families_cancel(self):
        d = commutator_diagonals(QUARTER, 0.3, 30)
        assert abs(d["nf0"] + d["nf1"]) <= 1e-14
        assert abs(d["trace_qbar"]) <= 1e-14

    def test_theta_covariance(self):
        p0 = goldstone_expectation(QUARTER, 0.4)
        p1 = goldstone_expectation(QUARTER, 1.9)
        assert abs(p1.restricted_sum - p0.restricted_sum * cmath.exp(1.5j)) <= 1e-14

    def test_zero_temperature_limit(self):
        p = goldstone_expectation(ThermalParams(1.0, math.inf), 0.0)
        assert p.restricted_sum == 0 and p.closed_form == 0 and p.numeric_full == 0
        assert p.flag == CONSISTENT

    def test_growth_toward_infinite_temperature(self):
        xs = [0.5, 0.9, 0.99, 0.999]
        vals = [abs(goldstone_closed_form(x, 0.0)) for x in xs]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        restricted = []
        for x in xs:
            p = goldstone_expectation(ThermalParams(1.0, -math.log(x)), 0.0)
            restricted.append(abs(p.restricted_sum))
            assert abs(p.restricted_sum - p.closed_form) <= p.tail_bound + 1e-12 * abs(p.closed_form)
            assert abs(p.numeric_full) <= 1e-10 * max(1.0, abs(p.closed_form))
        assert all(a < b for a, b in zip(restricted, restricted[1:]))

    def test_infinite_temperature_rejected(self):
        with pytest.raises(DivergenceError):
            goldstone_expectation(ThermalParams(1.0, 0.0), 0.0)


class TestReport:
    def test_flags(self):
        pts = discrepancy_report([math.log(4), 2.0, math.inf], 0.0)
        assert [p.flag for p in pts] == [DISCREPANT, DISCREPANT, CONSISTENT]
        for p in pts:
            assert abs(p.restricted_sum - p.closed_form) <= p.tail_bound + 1e-14

    def test_large_beta_consistent(self):
        p = discrepancy_report([40.0], 0.0)[0]
        assert p.flag == CONSISTENT

    def test_json(self):
        rec = json.loads(report_to_json(discrepancy_report([1.0], 0.5)))[0]
        assert set(rec) >= {"beta", "theta", "numeric_full", "restricted_sum", "closed_form",
                            "q_vacuum_norm", "qbar_vacuum_norm", "flag"}
        assert len(rec["closed_form"]) == 2

    def test_csv(self):
        pts = discrepancy_report([1.0, 2.0], 0.5)
        rows = list(csv.DictReader(io.StringIO(report_to_csv(pts))))
        assert tuple(rows[0]) == REPORT_COLUMNS
        assert float(rows[1]["closed_form_re"]) == pts[1].closed_form.real
