"""Lattice geometry for PVBS models on half-spaces of Z^d.

Finite volumes are cut out by pairs of parallel hyperplanes: axis boxes,
slanted parallelograms/parallelotopes, trapezoids with one face on the
boundary of D = {x : m.x >= 0}, and slabs of the half-space itself.
Constraint data is kept as exact rationals whenever the normal direction
was given rationally, so membership tests and remainder bookkeeping are
exact; otherwise floats with a fixed tolerance on the strict inequalities
are used.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product
from math import acos, ceil, floor, fsum, log, pi, sqrt

from .errors import (
    DegenerateNormal,
    DimensionMismatch,
    EmptyRegion,
    GaplessBulk,
    GaplessDirection,
    InvalidDirection,
    TildeLambdaUnity,
    ZeroNormal,
)

PARALLELOTOPE = "Parallelotope"
PARALLELOGRAM = "Parallelogram"
TRAPEZOID = "Trapezoid"
HALF_SPACE_SLAB = "HalfSpaceSlab"
EXPLICIT = "Explicit"

_KINDS = (PARALLELOTOPE, PARALLELOGRAM, TRAPEZOID, HALF_SPACE_SLAB, EXPLICIT)

TOL = 1e-9           # slack on strict inequalities for float-valued constraints
ANGLE_TOL = 1e-9     # angles below this count as exactly aligned
UNITY_TOL = 1e-12    # |log lambda_j| below this counts as lambda_j = 1


def _exact(value):
    """Coerce to Fraction when the input is exact, keep floats as floats."""
    if isinstance(value, bool):
        raise TypeError("boolean is not a coordinate value")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    return float(value)


def _num_tuple(values):
    return tuple(_exact(v) for v in values)


def _snap(v):
    """Round a float sitting within TOL of an integer to that integer."""
    if isinstance(v, float):
        r = round(v)
        if abs(v - r) <= TOL:
            return int(r)
    return v


def int_geq(v):
    """Smallest integer >= v (floats snapped to nearby integers first)."""
    return ceil(_snap(v))


def int_lt(v):
    """Largest integer < v."""
    return ceil(_snap(v)) - 1


def int_leq(v):
    return floor(_snap(v))


def int_gt(v):
    return floor(_snap(v)) + 1


@dataclass(frozen=True)
class ModelParams:
    """Coupling asymmetries lambda_j per axis and the unit inward normal m.

    ``m_raw`` keeps the direction data as given (Fractions for rational
    input), so ratios like m_j/m_1 stay exact downstream.
    """

    lam: tuple
    m: tuple
    m_raw: tuple

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        object.__setattr__(self, "m", tuple(float(v) for v in self.m))
        if len(self.lam) < 1:
            raise DimensionMismatch("need dimension d >= 1")
        if len(self.m) != len(self.lam) or len(self.m_raw) != len(self.lam):
            raise DimensionMismatch("lambda and m disagree on dimension")
        if any(v <= 0.0 for v in self.lam):
            raise ValueError("every lambda_j must be positive")
        norm = sqrt(fsum(v * v for v in self.m))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("m must be a unit vector (use ModelParams.make)")

    @classmethod
    def make(cls, lam, m):
        """Build params from lambda values and an (unnormalized) direction m."""
        raw = _num_tuple(m)
        norm2 = fsum(float(v) * float(v) for v in raw)
        if norm2 == 0.0:
            raise ZeroNormal("m must be nonzero")
        norm = sqrt(norm2)
        unit = tuple(float(v) / norm for v in raw)
        return cls(tuple(float(v) for v in lam), unit, raw)

    @property
    def d(self):
        return len(self.lam)

    @property
    def log_lam(self):
        return tuple(log(v) for v in self.lam)

    def reflected(self, signs):
        """Flip coordinates with sign -1; lambda_j -> 1/lambda_j there."""
        lam = tuple(v if s > 0 else 1.0 / v for v, s in zip(self.lam, signs))
        raw = tuple(v if s > 0 else -v for v, s in zip(self.m_raw, signs))
        m = tuple(v if s > 0 else -v for v, s in zip(self.m, signs))
        return ModelParams(lam, m, raw)

    def permuted(self, perm):
        """New index i takes old index perm[i] (0-based)."""
        return ModelParams(
            tuple(self.lam[p] for p in perm),
            tuple(self.m[p] for p in perm),
            tuple(self.m_raw[p] for p in perm),
        )

    def is_rational_direction(self):
        return all(isinstance(v, Fraction) for v in self.m_raw)


def normal_frac(params):
    """m / m_1, exact when the direction was given rationally."""
    raw = params.m_raw
    if raw[0] == 0:
        raise DegenerateNormal("m_1 = 0, cannot form m/m_1")
    if params.is_rational_direction():
        return tuple(v / raw[0] for v in raw)
    return tuple(float(v) / float(raw[0]) for v in raw)


def _axis_vec(d, j):
    """Unit coordinate vector e_j, 1-based j."""
    return tuple(Fraction(1) if i == j - 1 else Fraction(0) for i in range(d))


@dataclass(frozen=True)
class RegionSpec:
    """Constraint-based description of a finite lattice volume.

    kind semantics (b = base, L = lengths):
      Parallelotope / Parallelogram:
        0 <= u.(x-b) < L1, 0 <= w.(x-b) < L2, 0 <= x_j - b_j < L_i on the
        remaining axes, where u = normal_frac (else the slant, else e1) and
        w = slant when both functionals are present (else e2).
      Trapezoid:
        0 <= u.(x-b) with u = normal_frac (else e1), v.(x-b) < L1 with
        v = slant (else e1), and axis windows 0 <= x_j - b_j < L_i.
      HalfSpaceSlab:
        0 <= m.(x-b) < L1 and -L_i <= x_j - b_j <= L_i on the other axes
        (m taken from the model params at build time).
      Explicit: the given points.

    ``axes`` optionally lists (1-based) which coordinates carry the plain
    windows when the default assignment is not the intended one.
    """

    kind: str
    base: tuple = ()
    lengths: tuple = ()
    slant: tuple | None = None
    normal_frac: tuple | None = None
    axes: tuple | None = None
    points: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == EXPLICIT:
            if not self.points:
                raise EmptyRegion("explicit spec with no points")
            pts = tuple(sorted({tuple(int(c) for c in p) for p in self.points}))
            object.__setattr__(self, "points", pts)
            d = len(pts[0])
            if any(len(p) != d for p in pts):
                raise DimensionMismatch("explicit points of mixed dimension")
            if not self.base:
                object.__setattr__(self, "base", tuple(Fraction(0) for _ in range(d)))
            return
        object.__setattr__(self, "base", _num_tuple(self.base))
        object.__setattr__(self, "lengths", tuple(int(v) for v in self.lengths))
        if self.slant is not None:
            object.__setattr__(self, "slant", _num_tuple(self.slant))
        if self.normal_frac is not None:
            object.__setattr__(self, "normal_frac", _num_tuple(self.normal_frac))
        if self.axes is not None:
            object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))
        d = len(self.base)
        if len(self.lengths) != d:
            raise DimensionMismatch("base and lengths disagree on dimension")
        if any(L < 0 for L in self.lengths):
            raise ValueError("lengths must be nonnegative (0 only for filtration stages)")
        for vec in (self.slant, self.normal_frac):
            if vec is not None and len(vec) != d:
                raise DimensionMismatch("constraint vector of wrong dimension")

    @property
    def dim(self):
        if self.kind == EXPLICIT:
            return len(self.points[0])
        return len(self.base)


def _dot(a, x):
    total = 0
    for ai, xi in zip(a, x):
        if ai != 0:
            total = total + ai * xi
    return total


def spec_constraints(spec, params=None):
    """Absolute constraints [(vec, lo, hi)] meaning lo <= vec.x < hi.

    ``None`` bounds are one-sided; the slab's transverse windows are
    inclusive on both ends and encoded as [-L, L+1).
    """
    d = spec.dim
    b = spec.base
    L = spec.lengths
    if spec.kind == EXPLICIT:
        raise ValueError("explicit specs carry no constraints")
    if spec.kind == HALF_SPACE_SLAB:
        if params is None:
            raise ValueError("slab constraints need model params for m")
        mvec = tuple(params.m)
        off = _dot(mvec, b)
        cons = [(mvec, off, off + L[0])]
        for i, j in enumerate(range(2, d + 1)):
            o = b[j - 1]
            cons.append((_axis_vec(d, j), o - L[i + 1], o + L[i + 1] + 1))
        return cons
    if spec.kind == TRAPEZOID:
        lower = spec.normal_frac if spec.normal_frac is not None else _axis_vec(d, 1)
        upper = spec.slant if spec.slant is not None else _axis_vec(d, 1)
        cons = [(lower, _dot(lower, b), None), (upper, None, _dot(upper, b) + L[0])]
        axes = spec.axes if spec.axes is not None else tuple(range(2, d + 1))
        for i, j in enumerate(axes):
            o = b[j - 1]
            cons.append((_axis_vec(d, j), o, o + L[1 + i]))
        return cons
    # Parallelotope / Parallelogram
    vecs = []
    taken = set()
    if spec.normal_frac is not None:
        vecs.append(spec.normal_frac)
        taken.add(1)
    if spec.slant is not None:
        vecs.append(spec.slant)
        pivot = next(
            (j for j in range(1, d + 1) if spec.slant[j - 1] != 0 and j not in taken),
            None,
        )
        if pivot is None:
            raise InvalidDirection("slant vector has no free pivot coordinate")
        taken.add(pivot)
    axes = spec.axes if spec.axes is not None else tuple(j for j in range(1, d + 1) if j not in taken)
    if len(vecs) + len(axes) != d:
        raise DimensionMismatch("constraint count does not match dimension")
    cons = []
    for i, v in enumerate(vecs):
        off = _dot(v, b)
        cons.append((v, off, off + L[i]))
    for i, j in enumerate(axes):
        o = b[j - 1]
        cons.append((_axis_vec(d, j), o, o + L[len(vecs) + i]))
    return cons


def _term_bounds(a, lo, hi):
    """Range of a*x for integer x in [lo, hi]; None marks an unbounded side."""
    if a > 0:
        tmin = None if lo is None else a * lo
        tmax = None if hi is None else a * hi
    else:
        tmin = None if hi is None else a * hi
        tmax = None if lo is None else a * lo
    return tmin, tmax


def _integer_box(cons, d):
    """Per-coordinate integer bounds enclosing all solutions, by propagation."""
    lo = [None] * d
    hi = [None] * d
    for _ in range(4 * d + 8):
        changed = False
        for a, clo, chi in cons:
            nz = [k for k in range(d) if a[k] != 0]
            for k in nz:
                rest_min = Fraction(0)
                rest_max = Fraction(0)
                ok_min = ok_max = True
                for j in nz:
                    if j == k:
                        continue
                    tmin, tmax = _term_bounds(a[j], lo[j], hi[j])
                    if tmin is None:
                        ok_min = False
                    else:
                        rest_min = rest_min + tmin
                    if tmax is None:
                        ok_max = False
                    else:
                        rest_max = rest_max + tmax
                ak = a[k]
                if clo is not None and ok_max:
                    v = (clo - rest_max) / ak
                    if ak > 0:
                        cand = int_geq(v)
                        if lo[k] is None or cand > lo[k]:
                            lo[k] = cand
                            changed = True
                    else:
                        cand = int_leq(v)
                        if hi[k] is None or cand < hi[k]:
                            hi[k] = cand
                            changed = True
                if chi is not None and ok_min:
                    v = (chi - rest_min) / ak
                    if ak > 0:
                        cand = int_lt(v)
                        if hi[k] is None or cand < hi[k]:
                            hi[k] = cand
                            changed = True
                    else:
                        cand = int_gt(v)
                        if lo[k] is None or cand > lo[k]:
                            lo[k] = cand
                            changed = True
        if not changed:
            break
    if any(v is None for v in lo) or any(v is None for v in hi):
        raise InvalidDirection("region spec does not bound every coordinate")
    return list(zip(lo, hi))


def _member(cons, x):
    for a, lo, hi in cons:
        v = _dot(a, x)
        if isinstance(v, float):
            if lo is not None and v < float(lo) - TOL:
                return False
            if hi is not None and v >= float(hi) - TOL:
                return False
        else:
            if lo is not None and v < lo:
                return False
            if hi is not None and v >= hi:
                return False
    return True


@dataclass(frozen=True)
class Region:
    """A finite set of lattice points in canonical (lexicographic) order."""

    spec: RegionSpec
    points: tuple
    dim: int

    @property
    def size(self):
        return len(self.points)

    def point_set(self):
        return set(self.points)


def build_region(spec, params=None, allow_empty=False):
    """Enumerate all integer points satisfying the spec, sorted lexicographically."""
    if params is not None and spec.dim != params.d:
        raise DimensionMismatch(f"spec is {spec.dim}-dimensional, params are {params.d}-dimensional")
    if spec.kind == EXPLICIT:
        return Region(spec, spec.points, spec.dim)
    d = spec.dim
    if any(L == 0 for L in spec.lengths):
        if allow_empty:
            return Region(spec, (), d)
        raise EmptyRegion("spec has a zero length")
    cons = spec_constraints(spec, params)
    box = _integer_box(cons, d)
    ranges = [range(a, b + 1) for a, b in box]
    pts = tuple(x for x in product(*ranges) if _member(cons, x))
    if not pts and not allow_empty:
        raise EmptyRegion("no lattice point satisfies the constraints")
    return Region(spec, pts, d)


def explicit_region(points, base=()):
    pts = tuple(tuple(int(c) for c in p) for p in points)
    return build_region(RegionSpec(EXPLICIT, base=base, points=pts))


def is_connected(region):
    """Nearest-neighbor (l1-distance-1) graph connectivity, by BFS."""
    pts = region.points if isinstance(region, Region) else tuple(region)
    if not pts:
        raise EmptyRegion("connectivity of the empty region is undefined")
    todo = [pts[0]]
    seen = {pts[0]}
    remaining = set(pts)
    d = len(pts[0])
    while todo:
        x = todo.pop()
        for j in range(d):
            for delta in (1, -1):
                y = x[:j] + (x[j] + delta,) + x[j + 1:]
                if y in remaining and y not in seen:
                    seen.add(y)
                    todo.append(y)
    return len(seen) == len(pts)


def connectivity_threshold(params, kind=PARALLELOGRAM):
    """Sufficient slant-direction length for connected parallelograms.

    max_j(|m_j|/|m_1|) + 1; in d=2 this is m_2/m_1 + 1.  Exact (Fraction)
    for rational directions.
    """
    del kind  # same closed form for every normal_frac-bounded shape
    raw = params.m_raw
    m1 = abs(raw[0])
    if m1 == 0:
        raise DegenerateNormal("m_1 = 0 has no connectivity threshold")
    worst = max((abs(v) / m1 for v in raw[1:]), default=Fraction(0))
    return worst + 1


@dataclass(frozen=True)
class Filtration:
    """Nested volumes, empty first, swept by one constraint's upper bound."""

    stages: tuple
    direction: int
    direction_label: str
    target: RegionSpec

    def __post_init__(self):
        if not self.stages or self.stages[0].points:
            raise InvalidDirection("a filtration must start from the empty volume")

    @property
    def n_stages(self):
        return len(self.stages)


def direction_label(spec, direction):
    n_funcs = int(spec.normal_frac is not None) + int(spec.slant is not None)
    if spec.kind == TRAPEZOID:
        labels = ["v" if spec.slant is not None else "x1"]
        axes = spec.axes if spec.axes is not None else tuple(range(2, spec.dim + 1))
        labels += [f"x{j}" for j in axes]
    elif spec.kind == HALF_SPACE_SLAB:
        labels = ["m"] + [f"x{j}" for j in range(2, spec.dim + 1)]
    else:
        labels = []
        if spec.normal_frac is not None:
            labels.append("u")
        if spec.slant is not None:
            labels.append("v")
        used = len(labels)
        if spec.axes is not None:
            labels += [f"x{j}" for j in spec.axes]
        else:
            taken = {1} if spec.normal_frac is not None else set()
            if spec.slant is not None:
                pivot = next(j for j in range(1, spec.dim + 1)
                             if spec.slant[j - 1] != 0 and j not in taken)
                taken.add(pivot)
            labels += [f"x{j}" for j in range(1, spec.dim + 1) if j not in taken][: spec.dim - used]
    return labels[direction]


def build_filtration(target, params, direction):
    """Stages obtained by sweeping lengths[direction] through 0..L in unit steps."""
    if target.kind == EXPLICIT:
        raise InvalidDirection("cannot sweep an explicit region")
    if not 0 <= direction < len(target.lengths):
        raise InvalidDirection(f"direction {direction} out of range")
    total = target.lengths[direction]
    if total < 1:
        raise InvalidDirection("target has zero extent in the sweep direction")
    stages = []
    prev_pts = frozenset()
    for n in range(total + 1):
        lengths = list(target.lengths)
        lengths[direction] = n
        stage = build_region(replace(target, lengths=tuple(lengths)), params, allow_empty=True)
        pts = frozenset(stage.points)
        if n > 0:
            if not prev_pts < pts:
                raise InvalidDirection(
                    f"sweep step {n} does not strictly grow the volume")
        stages.append(stage)
        prev_pts = pts
    return Filtration(tuple(stages), direction, direction_label(target, direction), target)


def filtration_from_specs(specs, params, label="custom"):
    """Filtration from an explicit list of stage specs (first stage may be empty)."""
    stages = [build_region(s, params, allow_empty=True) for s in specs]
    prev = frozenset()
    for k, stage in enumerate(stages):
        pts = frozenset(stage.points)
        if k > 0 and not prev < pts:
            raise InvalidDirection(f"stage {k} does not strictly grow the volume")
        prev = pts
    return Filtration(tuple(stages), -1, label, specs[-1])


# ---------------------------------------------------------------------------
# case classification

@dataclass(frozen=True)
class CaseInfo:
    """Which geometry the bound pipeline uses, plus the normalization applied.

    ``params`` are the reflected+permuted model data; ``signs`` act on the
    original coordinates first, then ``perm`` relabels them (new index i
    takes old index perm[i], 0-based).
    """

    label: str
    params: ModelParams
    perm: tuple
    signs: tuple
    theta: float
    j_prime: int | None = None

    def apply_to_point(self, x):
        return tuple(self.signs[p] * x[p] for p in self.perm)


def angle_with_direction(params):
    """Angle between -m and log(lambda); raises if lambda = (1,...,1)."""
    loglam = params.log_lam
    norm = sqrt(fsum(v * v for v in loglam))
    if norm < UNITY_TOL:
        raise GaplessBulk("lambda = (1,...,1) has no preferred direction")
    c = -fsum(m * v for m, v in zip(params.m, loglam)) / norm
    return acos(max(-1.0, min(1.0, c)))


def sin_theta(params):
    """|sin| of the angle between m and log(lambda), from the residual.

    acos degrades to sqrt(eps) accuracy near parallel vectors; the norm of
    log(lambda) - (m.log(lambda)) m is linearly stable there.
    """
    loglam = params.log_lam
    norm = sqrt(fsum(v * v for v in loglam))
    if norm < UNITY_TOL:
        raise GaplessBulk("lambda = (1,...,1) has no preferred direction")
    dot = fsum(m * v for m, v in zip(params.m, loglam))
    resid = [v - dot * m for v, m in zip(loglam, params.m)]
    return sqrt(fsum(r * r for r in resid)) / norm, dot


def classify_case(params):
    """Name the bound-pipeline case after the symmetry normalization.

    Returns a CaseInfo with label in {1a,1b,2a,2b} for d=2 and {3a,3b,4}
    for d>=3, together with the reflection/permutation that puts (lambda, m)
    into the case's canonical position.
    """
    d = params.d
    if d < 2:
        raise DimensionMismatch("case classification needs d >= 2")
    if all(abs(v) < UNITY_TOL for v in params.log_lam):
        raise GaplessBulk("lambda = (1,...,1): bulk model is gapless")
    theta = angle_with_direction(params)
    sin_t, dot = sin_theta(params)
    if sin_t < ANGLE_TOL and dot < 0:
        raise GaplessDirection(
            "m is aligned with -log(lambda): the edge gap vanishes")
    parallel_plus = sin_t < ANGLE_TOL

    # make m nonnegative; coordinates with m_j = 0 are a symmetry of the
    # half-space itself, so pin their gauge to lambda_j >= 1
    signs = tuple(
        -1 if (v < -UNITY_TOL or (abs(v) <= UNITY_TOL and ll < 0)) else 1
        for v, ll in zip(params.m, params.log_lam))
    refl = params.reflected(signs)
    loglam = refl.log_lam
    nonunit = [j for j in range(d) if abs(loglam[j]) >= UNITY_TOL]
    support = [j for j in range(d) if refl.m[j] >= UNITY_TOL]
    both = [j for j in nonunit if j in support]

    def strongest(indices):
        # value-based anchor: invariant under relabelings of the input
        return max(indices, key=lambda j: (abs(loglam[j]), refl.m[j]))

    if d == 2:
        if not parallel_plus:
            if both:
                j1 = strongest(both)
                perm = (j1, 1 - j1)
                label = "1a"
            else:
                j1 = strongest(nonunit)
                perm = (j1, 1 - j1)
                label = "1b"
        else:
            if len(support) == 2:
                perm = (0, 1) if refl.m[0] >= refl.m[1] else (1, 0)
                label = "2a"
            else:
                j1 = support[0]
                perm = (j1, 1 - j1)
                label = "2b"
        return CaseInfo(label, refl.permuted(perm), perm, signs, theta)

    if not parallel_plus:
        if both:
            j1 = strongest(both)
            cands = []
            for j in range(d):
                if j == j1:
                    continue
                t = loglam[j] - (refl.m[j] / refl.m[j1]) * loglam[j1]
                cands.append((abs(t), j))
            best, j2 = max(cands, key=lambda p: p[0])
            if best < UNITY_TOL:
                raise TildeLambdaUnity(
                    "log lambda is numerically parallel to m; no slant direction")
            rest = [j for j in range(d) if j not in (j1, j2)]
            perm = (j1, j2, *rest)
            return CaseInfo("3a", refl.permuted(perm), perm, signs, theta)
        ones = sorted((j for j in range(d) if j not in nonunit),
                      key=lambda j: -refl.m[j])
        others = sorted(nonunit, key=lambda j: abs(loglam[j]))
        perm = (*ones, *others)
        return CaseInfo("3b", refl.permuted(perm), perm, signs, theta,
                        j_prime=len(ones) + 1)
    j1 = max(range(d), key=lambda j: refl.m[j])
    rest = [j for j in range(d) if j != j1]
    perm = (j1, *rest)
    return CaseInfo("4", refl.permuted(perm), perm, signs, theta)


# ---------------------------------------------------------------------------
# serialization

def _num_to_json(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return int(v)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v
    return float(v)


def _num_from_json(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def spec_to_json(spec):
    out = {"kind": spec.kind}
    if spec.kind == EXPLICIT:
        out["points"] = [list(p) for p in spec.points]
        return out
    out["base"] = [_num_to_json(v) for v in spec.base]
    out["lengths"] = list(spec.lengths)
    out["slant"] = None if spec.slant is None else [_num_to_json(v) for v in spec.slant]
    out["normal_frac"] = (None if spec.normal_frac is None
                          else [_num_to_json(v) for v in spec.normal_frac])
    if spec.axes is not None:
        out["axes"] = list(spec.axes)
    return out


def spec_from_json(data):
    kind = data["kind"]
    if kind == EXPLICIT:
        return RegionSpec(EXPLICIT, points=tuple(tuple(p) for p in data["points"]))
    return RegionSpec(
        kind,
        base=tuple(_num_from_json(v) for v in data["base"]),
        lengths=tuple(data["lengths"]),
        slant=None if data.get("slant") is None else tuple(_num_from_json(v) for v in data["slant"]),
        normal_frac=(None if data.get("normal_frac") is None
                     else tuple(_num_from_json(v) for v in data["normal_frac"])),
        axes=None if data.get("axes") is None else tuple(data["axes"]),
    )


def points_csv(region):
    """Canonical point dump, one `x1,...,xd` row per point."""
    pts = region.points if isinstance(region, Region) else tuple(sorted(region))
    return "\n".join(",".join(str(c) for c in p) for p in pts) + "\n"
