"""Ground-state weights lambda^x and normalization coefficients C(Lambda).

C(Lambda) = sum_{x in Lambda} lambda^{2x} is the squared norm of the
unnormalized one-particle ground state.  All arithmetic is done on the
log scale with max-anchored summation: the raw weights overflow doubles
already for |x| of a few hundred at lambda = 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, exp, expm1, fsum, inf, log, log1p

import numpy as np

from .errors import CaseMismatch, EmptyRegion
from .geometry import (
    PARALLELOGRAM,
    PARALLELOTOPE,
    TRAPEZOID,
    ModelParams,
    Region,
    UNITY_TOL,
)

LOG_ZERO = -inf


def log_weight(x, params):
    """log(lambda^x) = sum_j x_j log(lambda_j)."""
    if len(x) != params.d:
        raise ValueError("point and params disagree on dimension")
    return fsum(xj * lj for xj, lj in zip(x, params.log_lam))


def logsumexp_iter(values):
    vals = [v for v in values if v != LOG_ZERO]
    if not vals:
        return LOG_ZERO
    anchor = max(vals)
    return anchor + log(fsum(exp(v - anchor) for v in vals))


def log_diff_exp(a, b):
    """log(e^a - e^b) for a > b; LOG_ZERO when they coincide."""
    if b == LOG_ZERO:
        return a
    if b > a:
        raise ValueError("log_diff_exp needs a >= b")
    if a == b:
        return LOG_ZERO
    return a + log1p(-exp(b - a))


def log_geometric_sum(t, count):
    """log( sum_{k=0}^{count-1} e^{t k} ), with the count branch at t ~ 0."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return LOG_ZERO
    if abs(t) < 2e-12:
        return log(count)
    kt = t * count
    if t > 0:
        # (e^{kt} - 1) / (e^t - 1), written to survive large kt
        if kt > 100.0:
            num = kt + log1p(-exp(-kt))
        else:
            num = log(expm1(kt))
        den = log(expm1(t)) if t < 100.0 else t
        return num - den
    return log(-expm1(kt)) - log(-expm1(t))


def _points_of(region_or_points):
    pts = region_or_points.points if isinstance(region_or_points, Region) else tuple(region_or_points)
    return pts


def log_normalization(region, params):
    """log C(Lambda), exact to relative 1e-12 at desk scale."""
    pts = _points_of(region)
    if not pts:
        raise EmptyRegion("C(Lambda) of the empty region is 0; use log_normalization_or_zero")
    return logsumexp_iter(2.0 * log_weight(x, params) for x in pts)


def log_normalization_or_zero(points, params):
    """Same, but returns LOG_ZERO for the empty set (the C(empty)=0 convention)."""
    pts = _points_of(points)
    if not pts:
        return LOG_ZERO
    return logsumexp_iter(2.0 * log_weight(x, params) for x in pts)


@dataclass(frozen=True)
class GroundStateVector:
    """Zero- or one-particle ground state on a region, unit-normalized."""

    region: Region
    particle_count: int
    amplitudes: np.ndarray
    norm_log: float


def one_particle_ground_state(region, params):
    """Amplitude lambda^x / sqrt(C) at site x, in the region's site order."""
    pts = _points_of(region)
    if not pts:
        raise EmptyRegion("no ground state on the empty region")
    logw = np.array([log_weight(x, params) for x in pts])
    logc = log_normalization(region, params)
    amps = np.exp(logw - 0.5 * logc)
    return GroundStateVector(region, 1, amps, logc)


def zero_particle_ground_state(region, params):
    pts = _points_of(region)
    if not pts:
        raise EmptyRegion("no ground state on the empty region")
    return GroundStateVector(region, 0, np.ones(1), 0.0)


# ---------------------------------------------------------------------------
# closed forms

def _remainder(value):
    """r = ceil(value) - value in [0, 1); exact for Fractions."""
    if isinstance(value, float):
        r = ceil(value) - value
        return r if r < 1.0 else 0.0
    return Fraction(ceil(value)) - value


def _log_pow(lam, expo):
    return float(expo) * log(lam)


def normalization_closed_form(spec, params):
    """Closed-form (log lower, log upper) bracket for C(Lambda).

    Axis boxes evaluate exactly in any dimension (lower == upper), as do
    integer-slant parallelograms.  Parallelograms bounded by m/m_1 carry the
    remainder factors lambda_1^{2 r(x_2)} and are bracketed by min/max(1,
    lambda_1^2).  Trapezoids use the C_min/C_max bracket, which needs
    lambda_1 > 1 and, for the slanted-wall variant, the on-case relation
    between lambda_2 and lambda_1.
    """
    d = spec.dim
    lam = params.lam
    if spec.kind == PARALLELOTOPE and spec.slant is None and spec.normal_frac is None:
        # plain box: product of geometric sums
        total = fsum(2.0 * float(b) * log(l) for b, l in zip(spec.base, lam))
        total += fsum(log_geometric_sum(2.0 * log(l), L) for l, L in zip(lam, spec.lengths))
        return total, total

    if spec.kind in (PARALLELOGRAM, PARALLELOTOPE) and d == 2:
        L1, L2 = spec.lengths
        b = spec.base
        log_l1, log_l2 = log(lam[0]), log(lam[1])
        base_term = 2.0 * (float(b[0]) * log_l1 + float(b[1]) * log_l2)
        inner = log_geometric_sum(2.0 * log_l1, L1)
        if spec.normal_frac is not None:
            s = spec.normal_frac[1]
            tilde = 2.0 * (log_l2 - float(s) * log_l1)
            value = base_term + log_geometric_sum(tilde, L2) + inner
            # lambda_1^{2 r(x_2)} with r in [0, 1) brackets between 1 and lambda_1^2
            return value + min(0.0, 2.0 * log_l1), value + max(0.0, 2.0 * log_l1)
        if spec.slant is not None:
            w = spec.slant
            if any(x != int(x) for x in w) or any(x != int(x) for x in b):
                raise CaseMismatch("slant parallelogram closed form needs integer data")
            tilde = 2.0 * (log_l2 - float(w[1]) * log_l1)
            value = base_term + log_geometric_sum(tilde, L2) + inner
            return value, value
        value = base_term + log_geometric_sum(2.0 * log_l2, L2) + inner
        return value, value

    if spec.kind == TRAPEZOID and d == 2:
        L1, L2 = spec.lengths
        b = spec.base
        l1, l2 = lam
        if l1 <= 1.0 + 1e-12:
            raise CaseMismatch("trapezoid bracket needs lambda_1 > 1")
        log_cmax = -log(l1 * l1 - 1.0)
        log_cmin = log1p(-1.0 / (l1 * l1)) + log_cmax
        base_term = 2.0 * (float(b[0]) * log(l1) + float(b[1]) * log(l2))
        if spec.slant is None:
            # wall at x1 = b1 + L1, slanted floor along m/m1
            s = spec.normal_frac[1]
            if abs(log(l2) - float(s) * log(l1)) > 1e-9:
                raise CaseMismatch("trapezoid bracket needs lambda_2 = lambda_1^(m2/m1)")
            r_b2 = _remainder(b[0])
            core = (base_term + 2.0 * (L1 + float(r_b2)) * log(l1)
                    + log_geometric_sum(2.0 * log(l2), L2))
            return core + log_cmin, core + log_cmax
        # slanted wall with v = (1, -1); needs lambda_2 = 1
        if abs(log(l2)) > UNITY_TOL:
            raise CaseMismatch("slanted-wall trapezoid bracket needs lambda_2 = 1")
        core = base_term + 2.0 * L1 * log(l1) + log_geometric_sum(2.0 * log(l1), L2)
        return core + log_cmin, core + log_cmax

    raise CaseMismatch(f"no closed form for kind {spec.kind!r} in d={d}")
