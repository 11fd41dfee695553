"""Finite-volume gap lower bounds by the martingale method.

The three-condition criterion reduces gamma(Lambda_L) to gaps of small
volumes: with d_ell = ell it yields

    gamma(Lambda_L) >= min_{V in family} gamma(V)
                       * prod_j (1 - eps_j sqrt(ell_j))^2 / ell_j,

where eps_ell is the norm of the product of a strip ground-state projector
with the ground-state-difference projector E_n.  For PVBS volumes that norm
is exactly a ratio of normalization coefficients,

    eps^2 = C(L_{n+1-l}) C(L_{n+1} \\ L_n) / ( C(L_n) C(L_{n+1} \\ L_{n+1-l}) ),

and each geometry case carries a closed-form upper bound for it.  A
brute-force projector construction on the 0/1/2-particle subspace serves as
the independent oracle for the exact formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, exp, expm1, inf, log, log1p, sqrt

import numpy as np

from .errors import (
    DimensionMismatch,
    DisconnectedVolume,
    GaplessBulk,
    NoFeasibleEll,
    RegionTooLarge,
    StageOutOfRange,
    TildeLambdaUnity,
)
from .geometry import (
    EXPLICIT,
    PARALLELOGRAM,
    PARALLELOTOPE,
    TRAPEZOID,
    UNITY_TOL,
    CaseInfo,
    ModelParams,
    Region,
    RegionSpec,
    build_filtration,
    build_region,
    classify_case,
    int_geq,
    is_connected,
    normal_frac,
    spec_to_json,
)
from .operator import assemble_on_states, lattice_edges, occupation_states
from .spectra import spectral_gap
from .weights import log_normalization_or_zero

ELL_MAX = 10_000
BRUTE_FORCE_CAP = 14

SOURCE_EXACT = "ExactLemma"
_SOURCES = {"1a": "Case1a", "1b": "Case1b", "2a": "Case2a", "2b": "Case2b",
            "3a": "Case3a", "3b": "Case3b", "4": "Case4"}


@dataclass(frozen=True)
class EpsilonRecord:
    ell: int
    epsilon: float
    formula_source: str
    satisfies_condition: bool

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        expected = self.epsilon * self.epsilon < 1.0 / self.ell
        if self.satisfies_condition != expected:
            raise ValueError("satisfies_condition must equal eps^2 < 1/ell")


def _record(ell, epsilon, source):
    return EpsilonRecord(ell, epsilon, source, epsilon * epsilon < 1.0 / ell)


# ---------------------------------------------------------------------------
# exact overlap norm and its brute-force oracle

def _stage_points(filtration, k):
    if k <= 0:
        return ()
    return filtration.stages[k].points


def epsilon_exact(filtration, n, ell, params):
    """The overlap norm from the normalization-coefficient ratio, log-domain."""
    if ell < 2:
        raise ValueError("the martingale method needs ell >= 2")
    if n < 1 or n + 1 >= filtration.n_stages:
        raise StageOutOfRange(f"stage {n + 1} not present in the filtration")
    cur = set(_stage_points(filtration, n))
    nxt = set(_stage_points(filtration, n + 1))
    prev = set(_stage_points(filtration, n + 1 - ell))
    top = tuple(sorted(nxt - cur))
    strip = tuple(sorted(nxt - prev))
    if not is_connected(cur) or not is_connected(nxt) or not is_connected(strip):
        raise DisconnectedVolume(
            "the overlap formula needs connected stages and strips")
    if not prev or not top:
        return 0.0
    log_sq = (log_normalization_or_zero(sorted(prev), params)
              + log_normalization_or_zero(top, params)
              - log_normalization_or_zero(sorted(cur), params)
              - log_normalization_or_zero(strip, params))
    return exp(0.5 * log_sq)


def _edges_within(points, subset):
    sub = set(subset)
    return [(a, b, j) for (a, b, j) in lattice_edges(points)
            if points[a] in sub and points[b] in sub]


def _kernel_projector(states, points, subset, params):
    edges = _edges_within(points, subset)
    h = assemble_on_states(states, edges, params.lam).toarray()
    vals, vecs = np.linalg.eigh(h)
    cols = vecs[:, vals < 1e-9]
    return cols @ cols.T


def epsilon_bruteforce(filtration, n, ell, params, cap=BRUTE_FORCE_CAP,
                       full_space=False):
    """Largest singular value of G_strip E_n built explicitly.

    Projectors are taken as numerical null spaces of the assembled
    Hamiltonians on the 0/1/2-particle subspace of Lambda_{n+1} (the ranges
    of both operators lie there); ``full_space=True`` uses all sectors as a
    secondary check on small volumes.
    """
    if ell < 2:
        raise ValueError("the martingale method needs ell >= 2")
    if n < 1 or n + 1 >= filtration.n_stages:
        raise StageOutOfRange(f"stage {n + 1} not present in the filtration")
    points = _stage_points(filtration, n + 1)
    n_sites = len(points)
    if n_sites > (10 if full_space else cap):
        raise RegionTooLarge(f"{n_sites} sites is beyond the projector oracle cap")
    cur = set(_stage_points(filtration, n))
    prev = set(_stage_points(filtration, n + 1 - ell))
    strip = set(points) - prev
    if not is_connected(cur) or not is_connected(points) or not is_connected(strip):
        raise DisconnectedVolume(
            "the overlap formula needs connected stages and strips")
    sectors = range(n_sites + 1) if full_space else (0, 1, 2)
    states = np.sort(np.concatenate(
        [occupation_states(n_sites, k) for k in sectors]))
    g_cur = _kernel_projector(states, points, cur, params)
    g_nxt = _kernel_projector(states, points, set(points), params)
    g_strip = _kernel_projector(states, points, strip, params)
    prod_op = g_strip @ (g_cur - g_nxt)
    return float(np.linalg.norm(prod_op, 2))


def strip_multiplicity(filtration, ell):
    """Max number of strips Lambda_n \\ Lambda_{n-ell} containing one edge."""
    counts = {}
    for n in range(ell, filtration.n_stages):
        pts = _stage_points(filtration, n)
        strip = set(pts) - set(_stage_points(filtration, n - ell))
        ordered = tuple(sorted(strip))
        for a, b, _ in _edges_within(ordered, strip):
            key = tuple(sorted((ordered[a], ordered[b])))
            counts[key] = counts.get(key, 0) + 1
    return max(counts.values(), default=0)


# ---------------------------------------------------------------------------
# the decay profile f(n, ell) and the common closed form

def _log_abs_one_minus_exp(a):
    """log |1 - e^a|, stable on both sides of 0."""
    if a == 0.0:
        return -inf
    if a < 0:
        return log(-expm1(a))
    if a > 36:
        return a + log1p(-exp(-a))
    return log(expm1(a))


def f_decay(n, ell, lam):
    """f(n, ell) governing the overlap decay along a sweep; increasing in n."""
    if not n >= ell >= 2:
        raise ValueError("need n >= ell >= 2")
    if lam <= 0 or abs(lam - 1.0) < 1e-12:
        raise ValueError("f is defined for lambda > 0, lambda != 1")
    t = log(lam)
    h = _log_abs_one_minus_exp
    return exp(2 * (ell - 1) * t + h(2 * (n + 1 - ell) * t) + h(2 * t)
               - h(2 * ell * t) - h(2 * n * t))


def f_envelope(ell, lam):
    """The n -> infinity envelope min(1, lam^{2(ell-1)}) (1-lam^2)/(1-lam^{2 ell})."""
    t = log(lam)
    h = _log_abs_one_minus_exp
    return exp(min(0.0, 2 * (ell - 1) * t) + h(2 * t) - h(2 * ell * t))


def _common_epsilon(factor, tilde, ell):
    """factor * min(1, tilde^(ell-1)) * sqrt((1-tilde^2)/(1-tilde^(2 ell)))."""
    t = log(tilde)
    if abs(t) < UNITY_TOL:
        raise TildeLambdaUnity("effective lambda = 1 degenerates the decay")
    h = _log_abs_one_minus_exp
    return factor * exp(min(0.0, (ell - 1) * t) + 0.5 * (h(2 * t) - h(2 * ell * t)))


def _ratio_epsilon(log_prefactor_sq, tilde, ell):
    """sqrt( e^{log_prefactor_sq} * (1-tilde^2)/(1-tilde^(2 ell)) )."""
    t = log(tilde)
    if abs(t) < UNITY_TOL:
        raise TildeLambdaUnity("effective lambda = 1 degenerates the decay")
    h = _log_abs_one_minus_exp
    return exp(0.5 * (log_prefactor_sq + h(2 * t) - h(2 * ell * t)))


# ---------------------------------------------------------------------------
# per-case plans: sweep directions, closed-form eps, volume families

@dataclass(frozen=True)
class DirectionPlan:
    direction: int          # 1-based position in the certificate product
    label: str
    ell_min: int
    source: str
    eps: object             # ell -> float

    def epsilon_record(self, ell):
        return _record(ell, self.eps(ell), self.source)


def _lcm(a, b):
    from math import gcd

    return a * b // gcd(a, b)


def _frac_grid(values, fallback=24, cap=64):
    """Offsets t/q covering the distinct fractional classes of the ratios."""
    values = list(values)
    if all(isinstance(v, (int, Fraction)) for v in values):
        q = 1
        for v in values:
            q = _lcm(q, Fraction(v).denominator)
        if q <= cap:
            return [Fraction(t, q) for t in range(q)]
        return [Fraction(t, cap) for t in range(cap)]
    return [Fraction(t, fallback) for t in range(fallback)]


def _dedupe_regions(regions):
    seen = {}
    for reg in regions:
        if not reg.points:
            continue
        mins = [min(p[k] for p in reg.points) for k in range(reg.dim)]
        key = frozenset(tuple(c - m for c, m in zip(p, mins)) for p in reg.points)
        seen.setdefault(key, reg)
    return list(seen.values())


def _cmax_over_cmin_log(lam1):
    # C_max/C_min = 1/(1 - lambda_1^{-2}) for lambda_1 > 1
    return -log1p(-1.0 / (lam1 * lam1))


class _CasePlan:
    """Everything certify needs for one normalized case."""

    def __init__(self, info):
        self.info = info
        self.params = info.params
        self.label = info.label
        p = self.params
        d = p.d
        lam = p.lam
        src = _SOURCES[self.label]
        if self.label in ("1a", "2a", "3a", "4"):
            self.u = normal_frac(p)
        else:
            self.u = None

        if self.label == "1a":
            s = self.u[1]
            tilde2 = lam[1] * lam[0] ** (-float(s))
            factor = max(lam[0] ** 2, lam[0] ** -2)
            self.directions = (
                DirectionPlan(1, "u", max(2, int_geq(s + 1)), src,
                              lambda l: _common_epsilon(1.0, lam[0], l)),
                DirectionPlan(2, "x2", 2, src,
                              lambda l: _common_epsilon(factor, tilde2, l)),
            )
            self.v = None
        elif self.label == "1b":
            self.v = (1, 1)
            self.directions = (
                DirectionPlan(1, "v", 2, src,
                              lambda l: _common_epsilon(1.0, lam[0], l)),
                DirectionPlan(2, "x2", 2, src,
                              lambda l: _common_epsilon(1.0, 1.0 / lam[0], l)),
            )
        elif self.label == "2a":
            log_r = _cmax_over_cmin_log(lam[0])
            self.directions = (
                DirectionPlan(1, "x1", 2, src,
                              lambda l: _ratio_epsilon(log_r, lam[0], l)),
                DirectionPlan(2, "x2", 2, src,
                              lambda l: _ratio_epsilon(2.0 * log_r, lam[1], l)),
            )
            self.v = None
        elif self.label == "2b":
            self.v = (1, -1)
            self.directions = (
                DirectionPlan(1, "x1", 2, src,
                              lambda l: _ratio_epsilon(0.0, lam[0], l)),
                DirectionPlan(2, "x2", 2, src,
                              lambda l: exp(0.5 * (4.0 * log(lam[0])
                                                   - log(lam[0] ** 2 - 1.0))
                                            - l * log(lam[0]))),
            )
        elif self.label == "3a":
            s = self.u
            tilde = [lam[0]]
            t2 = lam[1] * lam[0] ** (-float(s[1]))
            tilde.append(t2)
            v = [0, 1]
            for j in range(2, d):
                tj = lam[j] * lam[0] ** (-float(s[j]))
                vj = 0 if abs(log(tj)) >= UNITY_TOL else -1
                v.append(vj)
                tilde.append(tj * t2 ** (-vj))
            self.v = tuple(v)
            factor = max(lam[0] ** 2, lam[0] ** -2)
            ell1_min = max(2, int_geq(max(s[1:]) + 1))
            dirs = [DirectionPlan(1, "u", ell1_min, src,
                                  lambda l: _common_epsilon(factor, tilde[0], l)),
                    DirectionPlan(2, "v", 2, src,
                                  lambda l: _common_epsilon(factor, tilde[1], l))]
            for j in range(2, d):
                dirs.append(DirectionPlan(
                    j + 1, f"x{j + 1}", 2, src,
                    lambda l, t=tilde[j]: _common_epsilon(factor, t, l)))
            self.directions = tuple(dirs)
            self.tilde = tuple(tilde)
        elif self.label == "3b":
            jp = self.info.j_prime
            raw = p.m_raw
            m1 = self._unit_component(0)
            s = [raw[j] / raw[0] for j in range(d)] if p.is_rational_direction() \
                else [p.m[j] / p.m[0] for j in range(d)]
            self.u = tuple(s)
            v = [-1] + [-2] * (jp - 2) + [0] * (d - jp) + [m1]
            self.v = tuple(v)
            lam_d = lam[d - 1]
            factor = max(lam_d ** 2, lam_d ** -2)
            tilde = [lam_d]
            for j in range(1, d - 1):
                if j + 1 <= jp - 1:
                    tilde.append(lam_d ** (2.0 - float(s[j])))
                else:
                    tilde.append(lam[j])
            tilde.append(lam_d)
            self.tilde = tuple(tilde)
            # constraint order: [u, v, x2..x_{d-1}]; v plays the paper's j = d role
            dirs = [DirectionPlan(1, "u", 2, src,
                                  lambda l: _common_epsilon(factor, tilde[0], l)),
                    DirectionPlan(2, "v", 2, src,
                                  lambda l: _common_epsilon(1.0, tilde[-1], l))]
            for j in range(1, d - 1):
                fac = factor if (j + 1) <= jp - 1 else 1.0
                dirs.append(DirectionPlan(
                    j + 2, f"x{j + 1}", 2, src,
                    lambda l, f=fac, t=tilde[j]: _common_epsilon(f, t, l)))
            self.directions = tuple(dirs)
        elif self.label == "4":
            s = self.u
            v = [1] + [(-1 if abs(p.m[j]) < UNITY_TOL else 0) for j in range(1, d)]
            self.v = tuple(v)
            tilde = [lam[0]]
            for j in range(1, d):
                tilde.append(lam[0] ** (float(s[j]) - v[j]))
            self.tilde = tuple(tilde)
            log_r = _cmax_over_cmin_log(lam[0])
            dirs = [DirectionPlan(1, "v", 2, src,
                                  lambda l: max(lam[0], 1.0 / lam[0])
                                  * exp(-(l - 1) * log(lam[0])))]
            for j in range(1, d):
                dirs.append(DirectionPlan(
                    j + 1, f"x{j + 1}", 2, src,
                    lambda l, t=tilde[j]: _ratio_epsilon(log_r, t, l)))
            self.directions = tuple(dirs)
        else:
            raise ValueError(f"unknown case label {self.label!r}")

    def _unit_component(self, j):
        """Unit-normal component m_j, exact when the norm is rational."""
        p = self.params
        if p.is_rational_direction():
            norm2 = sum(v * v for v in p.m_raw)
            root = _isqrt_fraction(norm2)
            if root is not None:
                return p.m_raw[j] / root
        return p.m[j]

    # -- target volumes -----------------------------------------------------

    def lambda_spec(self, L):
        p = self.params
        d = p.d
        if self.label == "1a":
            s = self.u[1]
            return RegionSpec(PARALLELOGRAM, base=(s * L, -L), lengths=(2 * L, 2 * L),
                              normal_frac=self.u)
        if self.label == "1b":
            return RegionSpec(PARALLELOGRAM, base=(-L, 0), lengths=(2 * L, 2 * L),
                              slant=self.v)
        if self.label == "2a":
            s = self.u[1]
            return RegionSpec(TRAPEZOID, base=(s * L, -L), lengths=(2 * L, 2 * L),
                              normal_frac=self.u)
        if self.label == "2b":
            return RegionSpec(TRAPEZOID, base=(0, -L), lengths=(2 * L, 2 * L),
                              slant=self.v)
        if self.label in ("3a", "3b"):
            axes = None if self.label == "3a" else tuple(range(2, d))
            offsets = [0, -L] + [-L] * (d - 2)
            lengths = (L,) + (2 * L,) * (d - 1)
            base = _base_for_offsets(self._constraint_vectors(axes), offsets)
            return RegionSpec(PARALLELOTOPE, base=base, lengths=lengths,
                              normal_frac=self.u, slant=self.v, axes=axes)
        # case 4 trapezoid: lengths[0] works out to exactly L
        s = self.u
        base = [L * sum(s[1:], start=Fraction(0) if isinstance(s[1], Fraction) else 0.0)]
        base += [-L] * (d - 1)
        return RegionSpec(TRAPEZOID, base=tuple(base), lengths=(L,) + (2 * L,) * (d - 1),
                          normal_frac=self.u, slant=self.v)

    def _constraint_vectors(self, axes=None):
        d = self.params.d
        vecs = [self.u, self.v]
        if axes is None:
            axes = tuple(j for j in range(1, d + 1) if j not in (1, 2))
        for j in axes:
            vecs.append(tuple(1 if i == j - 1 else 0 for i in range(d)))
        return vecs

    def min_scale(self):
        thr = max(int_geq(plan.ell_min) for plan in self.directions)
        return max(1, int_geq(Fraction(thr, 2)))

    # -- small-volume families for condition (ii) ---------------------------

    def family(self, ells):
        p = self.params
        d = p.d
        if self.label == "1a":
            grids = _frac_grid([self.u[1]])
            regions = [build_region(RegionSpec(
                PARALLELOGRAM, base=(t, 0), lengths=tuple(ells),
                normal_frac=self.u), p) for t in grids]
            return _dedupe_regions(regions)
        if self.label == "1b":
            return [build_region(RegionSpec(
                PARALLELOGRAM, base=(0, 0), lengths=tuple(ells), slant=self.v), p)]
        if self.label == "2a":
            grids = _frac_grid([self.u[1]])
            regions = [build_region(RegionSpec(
                TRAPEZOID, base=(t, 0), lengths=tuple(ells),
                normal_frac=self.u), p) for t in grids]
            regions.append(build_region(RegionSpec(
                PARALLELOTOPE, base=(0, 0), lengths=tuple(ells)), p))
            return _dedupe_regions(regions)
        if self.label == "2b":
            return [build_region(RegionSpec(
                TRAPEZOID, base=(0, 0), lengths=tuple(ells), slant=self.v), p),
                build_region(RegionSpec(
                    PARALLELOTOPE, base=(0, 0), lengths=tuple(ells)), p)]
        if self.label in ("3a", "3b"):
            axes = None if self.label == "3a" else tuple(range(2, d))
            vecs = self._constraint_vectors(axes)
            u_grid = _frac_grid(list(self.u[1:]))
            v_grid = _frac_grid([x for x in self.v if x != 0])
            regions = []
            for tu in u_grid:
                for tv in v_grid[: max(1, min(len(v_grid), 8))]:
                    offsets = [tu, tv] + [0] * (d - 2)
                    base = _base_for_offsets(vecs, offsets)
                    regions.append(build_region(RegionSpec(
                        PARALLELOTOPE, base=base, lengths=tuple(ells),
                        normal_frac=self.u, slant=self.v, axes=axes), p))
            return _dedupe_regions(regions)
        # case 4: one slab-shaped volume plus the corner trapezoids
        regions = [build_region(RegionSpec(
            PARALLELOTOPE, base=(0,) * d, lengths=tuple(ells), slant=self.v), p)]
        regions.extend(self._case4_corners(ells))
        return _dedupe_regions(regions)

    def _case4_corners(self, ells):
        p = self.params
        d = p.d
        s = self.u
        v = self.v
        q = max((x.denominator for x in s if isinstance(x, Fraction)), default=1)
        window = range(-q, q + 1) if q > 1 else range(0, 1)
        out = []
        for b in product(window, repeat=d - 1):
            limit = ells[0] + sum((s[j] - v[j]) * (-b[j - 1]) for j in range(1, d))
            pts = []
            for y in product(*[range(bb, bb + ells[j])
                               for j, bb in enumerate(b, start=1)]):
                lo = int_geq(-sum(sj * yj for sj, yj in zip(s[1:], y)))
                hi_val = limit - sum(vj * yj for vj, yj in zip(v[1:], y))
                hi = int_geq(hi_val) - 1
                for x1 in range(lo, hi + 1):
                    pts.append((x1,) + y)
            if pts:
                out.append(build_region(RegionSpec(EXPLICIT, points=tuple(pts))))
            if len(out) >= 128:
                break
        return out


def _isqrt_fraction(value):
    """Exact rational square root of a Fraction, or None."""
    value = Fraction(value)
    from math import isqrt

    np_, dp = isqrt(value.numerator), isqrt(value.denominator)
    if np_ * np_ == value.numerator and dp * dp == value.denominator:
        return Fraction(np_, dp)
    return None


def _base_for_offsets(vectors, offsets):
    """Solve vec_i . b = offset_i exactly (Fractions) or in floats."""
    d = len(offsets)
    exact = all(
        all(isinstance(c, (int, Fraction)) for c in vec) for vec in vectors
    ) and all(isinstance(o, (int, Fraction)) for o in offsets)
    if exact:
        a = [[Fraction(c) for c in vec] + [Fraction(o)]
             for vec, o in zip(vectors, offsets)]
        for col in range(d):
            piv = next(r for r in range(col, d) if a[r][col] != 0)
            a[col], a[piv] = a[piv], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(d):
                if r != col and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return tuple(a[r][d] for r in range(d))
    mat = np.array([[float(c) for c in vec] for vec in vectors])
    rhs = np.array([float(o) for o in offsets])
    return tuple(np.linalg.solve(mat, rhs))


def case_plan(case, params=None):
    """Build the sweep plan for a CaseInfo (or a label plus normalized params)."""
    if isinstance(case, CaseInfo):
        return _CasePlan(case)
    label = str(case)
    j_prime = None
    if label == "3b":
        j_prime = sum(1 for v in params.log_lam if abs(v) < UNITY_TOL) + 1
    info = CaseInfo(label, params, tuple(range(params.d)),
                    (1,) * params.d, 0.5, j_prime=j_prime)
    return _CasePlan(info)


def epsilon_closed_form(case, params, ell, direction):
    """The printed eps_ell for the given case and sweep direction (1-based)."""
    plan = case if isinstance(case, _CasePlan) else case_plan(case, params)
    for dp in plan.directions:
        if dp.direction == direction:
            return dp.epsilon_record(ell)
    raise ValueError(f"direction {direction} not defined for case {plan.label}")


def select_ell(case, params=None, direction=1, ell_min=None, ell_max=ELL_MAX):
    """Smallest ell >= ell_min with eps_ell^2 < 1/ell."""
    plan = case if isinstance(case, _CasePlan) else case_plan(case, params)
    dp = next(p for p in plan.directions if p.direction == direction)
    start = max(2, dp.ell_min if ell_min is None else max(ell_min, dp.ell_min))
    for ell in range(start, ell_max + 1):
        rec = dp.epsilon_record(ell)
        if rec.satisfies_condition:
            return rec
    raise NoFeasibleEll(
        f"no ell <= {ell_max} satisfies eps^2 < 1/ell in direction {direction}; "
        "the parameters sit too close to the gapless direction")


# ---------------------------------------------------------------------------
# base gaps and certificates

def base_gap(case, params=None, ells=None, *, sectors=None, exhaustive=False,
             dense_threshold=None, zero_threshold=None):
    """Minimum spectral gap over the case's finite volume family."""
    plan = case if isinstance(case, _CasePlan) else case_plan(case, params)
    members = plan.family(tuple(ells))
    kwargs = {}
    if dense_threshold is not None:
        kwargs["dense_threshold"] = dense_threshold
    if zero_threshold is not None:
        kwargs["zero_threshold"] = zero_threshold
    details = []
    worst = inf
    for reg in members:
        res = spectral_gap(reg, plan.params, sectors, exhaustive=exhaustive, **kwargs)
        details.append({"sites": reg.size, "gap": res.gap,
                        "sectors": list(res.sectors_scanned)})
        worst = min(worst, res.gap)
    return worst, len(members), details


@dataclass(frozen=True)
class DirectionRecord:
    direction: int
    label: str
    ell_min: int
    record: EpsilonRecord

    def to_json_dict(self):
        return {
            "direction": self.direction,
            "label": self.label,
            "ell_min": self.ell_min,
            "ell": self.record.ell,
            "epsilon": self.record.epsilon,
            "formula_source": self.record.formula_source,
            "satisfies_condition": self.record.satisfies_condition,
            "d_ell": self.record.ell,
        }


@dataclass(frozen=True)
class BoundCertificate:
    params: ModelParams
    case: CaseInfo
    scale: int
    min_scale: int
    target: RegionSpec
    per_direction: tuple
    base_gap: float
    family_size: int
    family: tuple
    lower_bound: float
    upper_bound: float | None
    consistent: bool
    domain: str = "half-space"

    def recompute_lower_bound(self):
        value = self.base_gap
        for rec in self.per_direction:
            e, l = rec.record.epsilon, rec.record.ell
            value *= (1.0 - e * sqrt(l)) ** 2 / l
        return value

    def to_json_dict(self):
        return {
            "schema": "pvbs-gap/1",
            "domain": self.domain,
            "params": {
                "dim": self.params.d,
                "lambda": list(self.params.lam),
                "m": list(self.params.m),
            },
            "case": {
                "label": self.case.label,
                "perm": list(self.case.perm),
                "signs": list(self.case.signs),
                "lambda_normalized": list(self.case.params.lam),
                "m_normalized": list(self.case.params.m),
                "theta": self.case.theta,
            },
            "scale": self.scale,
            "min_scale": self.min_scale,
            "target": spec_to_json(self.target),
            "directions": [rec.to_json_dict() for rec in self.per_direction],
            "base_gap": self.base_gap,
            "family_size": self.family_size,
            "family": list(self.family),
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "consistent": self.consistent,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def certify_lower_bound(params, scale=8, *, ell_max=ELL_MAX, sectors=None,
                        exhaustive=False, dense_threshold=None,
                        zero_threshold=None):
    """Run the d-fold martingale pipeline and emit a gap certificate.

    The composed lower bound holds for gamma(Lambda_L) at every admissible
    scale L and hence for the half-space gap gamma(D).
    """
    if params.d < 2:
        raise DimensionMismatch("the bound pipeline needs d >= 2")
    info = classify_case(params)
    plan = _CasePlan(info)
    records = []
    for dp in plan.directions:
        rec = select_ell(plan, direction=dp.direction, ell_max=ell_max)
        records.append(DirectionRecord(dp.direction, dp.label, dp.ell_min, rec))
    ells = [r.record.ell for r in records]
    gap, fam_size, details = base_gap(plan, ells=ells, sectors=sectors,
                                      exhaustive=exhaustive,
                                      dense_threshold=dense_threshold,
                                      zero_threshold=zero_threshold)
    lower = gap
    for rec in records:
        e, l = rec.record.epsilon, rec.record.ell
        lower *= (1.0 - e * sqrt(l)) ** 2 / l
    upper = None
    from .variational import closed_form_upper_bound

    if sum(m * v for m, v in zip(params.m, params.log_lam)) < 0.0:
        upper = closed_form_upper_bound(params)
    consistent = upper is None or lower <= upper + 1e-9
    min_scale = plan.min_scale()
    target = plan.lambda_spec(max(scale, 1))
    return BoundCertificate(params, info, scale, min_scale, target,
                            tuple(records), gap, fam_size, tuple(details),
                            lower, upper, consistent)


def certify_bulk(params, *, scale=8, ell_max=ELL_MAX, sectors=None,
                 member_budget=24, **solver):
    """Positive bulk bound for Z^d whenever some lambda_j != 1.

    Chooses an inward normal m with rational slope so the model falls into
    the slanted-parallelogram case, preferring slopes whose small-volume
    family stays cheap to diagonalize; by translation invariance the
    resulting finite-volume bound applies to the model on all of Z^d.
    """
    if params.d < 2:
        raise DimensionMismatch("the bulk pipeline needs d >= 2")
    loglam = params.log_lam
    if all(abs(v) < UNITY_TOL for v in loglam):
        raise GaplessBulk("lambda = (1,...,1): the bulk model is gapless")
    j_star = max(range(params.d), key=lambda j: abs(loglam[j]))
    j_other = next(j for j in range(params.d) if j != j_star)
    best = None
    for k in range(1, 13):
        raw = [0] * params.d
        raw[j_star] = 1
        raw[j_other] = k
        trial = ModelParams.make(params.lam, raw)
        try:
            info = classify_case(trial)
            if info.label not in ("1a", "3a"):
                continue
            plan = _CasePlan(info)
            ells = [select_ell(plan, direction=dp.direction, ell_max=ell_max).ell
                    for dp in plan.directions]
            size = max(reg.size for reg in plan.family(tuple(ells)))
        except (TildeLambdaUnity, NoFeasibleEll, GaplessBulk):
            continue
        if best is None or size < best[0]:
            best = (size, k, trial)
        if size <= member_budget:
            break
    if best is None:
        raise NoFeasibleEll("no admissible bulk normal found")
    _, _, trial = best
    cert = certify_lower_bound(trial, scale=scale, ell_max=ell_max,
                               sectors=sectors, **solver)
    return BoundCertificate(cert.params, cert.case, cert.scale, cert.min_scale,
                            cert.target, cert.per_direction, cert.base_gap,
                            cert.family_size, cert.family, cert.lower_bound,
                            cert.upper_bound, cert.consistent, domain="bulk")


# ---------------------------------------------------------------------------
# randomized instances for the oracle-equivalence suite

def random_epsilon_instances(seed, count, size_cap=BRUTE_FORCE_CAP):
    """Seeded connected filtration instances for exact-vs-brute-force checks.

    Yields dicts with the filtration, stage index n, ell, params, and a
    ``skipped`` reason for draws whose stages violate the connectivity
    hypothesis (they are not counted toward ``count``).
    """
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < count:
        d = int(rng.integers(1, 3))
        lam = tuple(float(np.exp(rng.uniform(np.log(1.0 / 3.0), np.log(3.0))))
                    for _ in range(d))
        if d == 1:
            n_sites = int(rng.integers(4, 10))
            spec = RegionSpec(PARALLELOTOPE, base=(0,), lengths=(n_sites,))
            params = ModelParams.make(lam, (1,))
            direction = 0
        else:
            style = int(rng.integers(0, 3))
            l1 = int(rng.integers(2, 5))
            l2 = int(rng.integers(2, 5))
            while l1 * l2 > size_cap:
                l2 -= 1
            if style == 0:
                spec = RegionSpec(PARALLELOTOPE, base=(0, 0), lengths=(l1, l2))
                params = ModelParams.make(lam, (1, 0))
            elif style == 1:
                w = int(rng.choice([-1, 1]))
                spec = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(l1, l2),
                                  slant=(1, w))
                params = ModelParams.make(lam, (0, 1))
            else:
                s = Fraction(int(rng.integers(0, 4)), int(rng.choice([1, 2])))
                while float(s) + 1 > l1:
                    l1 += 1
                if l1 * l2 > size_cap:
                    l2 = max(2, size_cap // l1)
                spec = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(l1, l2),
                                  normal_frac=(1, s))
                params = ModelParams.make(lam, (1, s))
            direction = int(rng.integers(0, 2))
        if spec.lengths[direction] < 3:
            direction = int(np.argmax(spec.lengths))
        try:
            filtration = build_filtration(spec, params, direction)
        except Exception as err:  # degenerate draw, retry
            yield {"skipped": f"unusable target: {err}", "params": params}
            continue
        n_max = filtration.n_stages - 2
        if n_max < 1:
            yield {"skipped": "too few stages", "params": params}
            continue
        ell = int(rng.integers(2, 4))
        n = int(rng.integers(1, n_max + 1))
        try:
            cur = _stage_points(filtration, n)
            nxt = _stage_points(filtration, n + 1)
            strip = set(nxt) - set(_stage_points(filtration, n + 1 - ell))
            if not (is_connected(cur) and is_connected(nxt) and is_connected(strip)):
                raise DisconnectedVolume("disconnected stage or strip")
        except DisconnectedVolume as err:
            yield {"skipped": str(err), "params": params}
            continue
        produced += 1
        yield {"filtration": filtration, "n": n, "ell": ell, "params": params,
               "skipped": None}
