"""Trial-state energies, the closed-form bound, and the gap collapse."""

import itertools
from math import exp, log, pi, sqrt

import numpy as np
import pytest

from pvbsgap import (
    ModelParams,
    angle_theta,
    assemble_sector,
    apply_operator,
    c_of,
    closed_form_upper_bound,
    explicit_region,
    finite_size_upper_bound,
    theta_sweep,
    trial_state_energy,
)
from pvbsgap.errors import AllZero, HypothesisViolated, UndefinedAngle
from pvbsgap.variational import facet_limit, rotated_normal, slab_points
from pvbsgap.weights import log_geometric_sum, log_weight, logsumexp_iter


def oracle_quotient(params, L):
    """<v, H_1 v>/<v, v> on the dilated bounding box intersected with D."""
    pts, p = slab_points(params, L)
    d = p.d
    los = [min(x[k] for x in pts) - 1 for k in range(d)]
    his = [max(x[k] for x in pts) + 1 for k in range(d)]
    big = [x for x in itertools.product(*[range(lo, hi + 1)
                                          for lo, hi in zip(los, his)])
           if sum(mj * xj for mj, xj in zip(p.m, x)) >= -1e-9]
    region = explicit_region(big)
    idx = {pt: i for i, pt in enumerate(region.points)}
    v = np.zeros(region.size)
    anchor = max(log_weight(x, p) for x in pts)
    for x in pts:
        v[idx[x]] = exp(log_weight(x, p) - anchor)
    op = assemble_sector(region, p, 1)
    return float(v @ apply_operator(op, v) / (v @ v))


class TestSmallHelpers:
    def test_c_of(self):
        assert c_of((1, 0)) == 1
        assert c_of((0.5, -0.25, 0)) == 0.25
        assert abs(c_of((2.0, 1 / 3)) - 1 / 3) < 1e-15
        with pytest.raises(AllZero):
            c_of((0, 0))

    def test_angle_aligned(self):
        lam = (0.5, 0.8)
        norm = sqrt(log(0.5) ** 2 + log(0.8) ** 2)
        m = (-log(0.5) / norm, -log(0.8) / norm)
        assert angle_theta(ModelParams.make(lam, m)) < 3e-8

    def test_angle_anti_aligned(self):
        lam = (2.0, 1.25)
        norm = sqrt(log(2.0) ** 2 + log(1.25) ** 2)
        m = (log(2.0) / norm, log(1.25) / norm)
        assert abs(angle_theta(ModelParams.make(lam, m)) - pi) < 3e-8

    def test_angle_quarter_turn(self):
        p = ModelParams.make((0.5, 0.5), (1, 0))
        assert abs(angle_theta(p) - pi / 4) < 1e-12

    def test_angle_undefined(self):
        with pytest.raises(UndefinedAngle):
            angle_theta(ModelParams.make((1.0, 1.0), (1, 0)))


class TestClosedFormBound:
    def test_reference_value(self):
        p = ModelParams.make((0.5, 0.5), (1, 0))
        assert abs(closed_form_upper_bound(p) - 8 * log(2.0)) < 1e-12

    def test_exact_zero_when_aligned(self):
        p = ModelParams.make((exp(-1.0), exp(-1.0)), (1, 1))
        assert closed_form_upper_bound(p) == 0.0

    def test_linear_in_dimension(self):
        lam2, m2 = (0.5, 0.5), (1, 0)
        b2 = closed_form_upper_bound(ModelParams.make(lam2, m2))
        # same c(m), c(lambda), ||log lambda||, theta, one more dimension
        p3 = ModelParams.make((0.5, 0.5, 1.0), (1, 0, 0))
        b3 = closed_form_upper_bound(p3)
        assert abs(b3 - 2.0 * b2) < 1e-12

    def test_hypothesis_gate(self):
        with pytest.raises(HypothesisViolated):
            closed_form_upper_bound(ModelParams.make((2.0, 1.0), (1, 0)))


class TestTrialStateEnergy:
    def test_matches_sector_oracle(self):
        cases = [
            ModelParams.make((0.5, 0.75), (1, 1)),   # irrational unit normal
            ModelParams.make((0.5, 1.3), (1, 0)),
            ModelParams.make((2.0, 1.0), (0, 1)),    # hypothesis violated
        ]
        for p in cases:
            for L in (3, 5):
                res = trial_state_energy(p, L)
                orc = oracle_quotient(p, L)
                assert abs(res.rayleigh_quotient - orc) < 1e-10 * max(1.0, orc)

    def test_norm_equals_slab_normalization(self):
        from pvbsgap.weights import log_normalization_or_zero

        p = ModelParams.make((0.5, 0.75), (1, 1))
        res = trial_state_energy(p, 4)
        pts, pn = slab_points(p, 4)
        assert abs(res.log_norm - log_normalization_or_zero(pts, pn)) < 1e-10

    def test_gap_collapse_aligned(self):
        p = ModelParams.make((exp(-1.0), exp(-1.0)), (1, 1))
        quotients = [trial_state_energy(p, L).rayleigh_quotient
                     for L in (4, 8, 16, 32, 64)]
        assert all(a > b for a, b in zip(quotients, quotients[1:]))
        assert quotients[-1] < 0.5 / 64

    def test_finite_size_bound_dominates(self):
        for lam, m in [((0.5, 0.5), (1, 0)), ((0.5, 0.75), (1, 1)),
                       ((exp(-1.0), exp(-1.0)), (1, 1)), ((0.4, 1.0), (1, 0))]:
            p = ModelParams.make(lam, m)
            for L in (4, 8, 16, 32):
                q = trial_state_energy(p, L).rayleigh_quotient
                assert q <= finite_size_upper_bound(p, L) + 1e-12

    def test_facet_terms_reach_their_limit(self):
        # closed-form facet ratio at L = 1000 sits within 1e-6 of the limit
        p = ModelParams.make((0.5, 0.8), (1, 1))
        pn, _, _ = __import__("pvbsgap.variational",
                              fromlist=["_slab_frame"])._slab_frame(p)
        L = 1000
        s_list, _ = __import__("pvbsgap.variational",
                               fromlist=["_ratios"])._ratios(pn)
        tl = pn.lam[1] * pn.lam[0] ** (-float(s_list[0]))
        t = 2.0 * log(tl)
        log_top = logsumexp_iter([L * t, -L * t])
        log_bot = -L * t + log_geometric_sum(t, 2 * L + 1)
        ratio = exp(log_top - log_bot)
        assert abs(ratio - facet_limit(p, 1)) < 1e-6

    def test_quotient_bounded_by_closed_form_plus_margin(self):
        p = ModelParams.make((0.5, 0.75), (1, 1))
        for L in (4, 8, 16, 32):
            res = trial_state_energy(p, L)
            assert res.rayleigh_quotient <= finite_size_upper_bound(p, L) + 1e-12
        # the finite-size bound converges onto the limit sum as L grows
        big = finite_size_upper_bound(p, 4)
        small = finite_size_upper_bound(p, 64)
        assert small <= big


class TestThetaSweep:
    def test_rows_against_formula(self):
        lam = (0.5, 0.5)
        thetas = [i * pi / 16 for i in range(0, 9)]
        rows = theta_sweep(lam, thetas, L=8)
        norm = sqrt(2.0) * log(2.0)
        for theta, bound, quotient, _ in rows:
            m = rotated_normal(lam, theta)
            p = ModelParams.make(lam, m)
            dot = sum(mj * lj for mj, lj in zip(p.m, p.log_lam))
            if theta == 0.0:
                assert bound == 0.0
            elif dot >= 0.0:  # hypothesis m.log(lambda) < 0 fails at pi/2
                assert bound is None
            else:
                expect = 2.0 / (c_of(p.m) * 0.25) * norm * abs(np.sin(theta))
                assert bound == pytest.approx(expect, rel=1e-9)
            assert quotient >= 0.0

    def test_bound_column_tracks_sin(self):
        lam = (0.5, 0.5)
        thetas = [i * pi / 16 for i in range(0, 9)]
        rows = theta_sweep(lam, thetas, L=4)
        sines = [abs(np.sin(t)) for t, *_ in rows]
        assert sines == sorted(sines)
