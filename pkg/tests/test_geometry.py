"""Region construction, connectivity, filtrations, and case classification."""

from fractions import Fraction
from math import pi, sqrt

import numpy as np
import pytest

from pvbsgap import (
    EXPLICIT,
    HALF_SPACE_SLAB,
    PARALLELOGRAM,
    PARALLELOTOPE,
    TRAPEZOID,
    DimensionMismatch,
    EmptyRegion,
    GaplessBulk,
    GaplessDirection,
    ModelParams,
    RegionSpec,
    build_filtration,
    build_region,
    classify_case,
    connectivity_threshold,
    explicit_region,
    is_connected,
    points_csv,
    spec_from_json,
    spec_to_json,
)
from pvbsgap.geometry import spec_constraints, _member


P2 = ModelParams.make((2.0, 1.0), (1, 0))


def box_spec(lengths, base=None):
    d = len(lengths)
    return RegionSpec(PARALLELOTOPE, base=base or (0,) * d, lengths=lengths)


class TestBuildRegion:
    def test_axis_box(self):
        region = build_region(box_spec((2, 2)), P2)
        assert region.points == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_zero_slant_reduces_to_box(self):
        spec = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(3, 2),
                          normal_frac=(1, 0))
        region = build_region(spec, ModelParams.make((2.0, 1.0), (1, 0)))
        assert region.points == tuple((i, j) for i in range(3) for j in range(2))

    def test_diagonal_parallelogram_rows(self):
        # 0 <= x1 + x2 < 3 per row, rows x2 = 0, 1
        params = ModelParams.make((2.0, 3.0), (1, 1))
        spec = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(3, 2),
                          normal_frac=(1, 1))
        region = build_region(spec, params)
        rows = {x2: sorted(p[0] for p in region.points if p[1] == x2)
                for x2 in (0, 1)}
        assert rows[0] == [0, 1, 2]
        assert rows[1] == [-1, 0, 1]

    def test_trapezoid_right_wall(self):
        # 0 <= (x1 + x2/2), x1 < 2, 0 <= x2 < 2
        params = ModelParams.make((2.0, 2.0), (2, 1))
        spec = RegionSpec(TRAPEZOID, base=(0, 0), lengths=(2, 2),
                          normal_frac=(1, Fraction(1, 2)))
        region = build_region(spec, params)
        assert (1, 1) in region.points and (-1, 1) not in region.points
        assert all(p[0] < 2 for p in region.points)

    def test_slanted_wall_trapezoid(self):
        # 0 <= x1, x1 - x2 < 3, rows 0 <= x2 < 2
        params = ModelParams.make((2.0, 1.0), (1, 0))
        spec = RegionSpec(TRAPEZOID, base=(0, 0), lengths=(3, 2), slant=(1, -1))
        region = build_region(spec, params)
        assert sorted(p[0] for p in region.points if p[1] == 0) == [0, 1, 2]
        assert sorted(p[0] for p in region.points if p[1] == 1) == [0, 1, 2, 3]

    def test_half_space_slab(self):
        params = ModelParams.make((0.5, 0.5), (1, 1))
        spec = RegionSpec(HALF_SPACE_SLAB, base=(0, 0), lengths=(2, 2))
        region = build_region(spec, params)
        root2 = sqrt(2.0)
        for x in region.points:
            val = (x[0] + x[1]) / root2
            assert -1e-12 <= val < 2
        assert all(-2 <= x[1] <= 2 for x in region.points)

    def test_empty_region_raises(self):
        params = ModelParams.make((2.0, 1.0), (1, 0))
        spec = RegionSpec(TRAPEZOID, base=(Fraction(1, 2), 0), lengths=(0, 1),
                          slant=(1, -1))
        with pytest.raises(EmptyRegion):
            build_region(spec, params)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_region(box_spec((2, 2, 2)), P2)

    def test_explicit_sorted_dedup(self):
        region = explicit_region([(1, 0), (0, 0), (1, 0)])
        assert region.points == ((0, 0), (1, 0))


class TestConstructorSoundness:
    def test_random_specs_sound_and_complete(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            d = 2
            kind = rng.choice([PARALLELOTOPE, PARALLELOGRAM, TRAPEZOID])
            s = Fraction(int(rng.integers(0, 5)), int(rng.choice([1, 2, 3])))
            lengths = (int(rng.integers(1, 5)), int(rng.integers(1, 4)))
            base = (Fraction(int(rng.integers(-3, 4)), int(rng.choice([1, 2]))),
                    int(rng.integers(-3, 4)))
            params = ModelParams.make((2.0, 1.5), (1, s) if s else (1, 0))
            if kind == PARALLELOTOPE:
                spec = RegionSpec(kind, base=base, lengths=lengths)
            elif kind == PARALLELOGRAM:
                spec = RegionSpec(kind, base=base, lengths=lengths,
                                  normal_frac=(1, s))
            else:
                spec = RegionSpec(kind, base=base, lengths=lengths,
                                  normal_frac=(1, s))
            region = build_region(spec, params, allow_empty=True)
            cons = spec_constraints(spec, params)
            member = set(region.points)
            for p in region.points:
                assert _member(cons, p)
            if region.points:
                los = [min(p[k] for p in region.points) - 1 for k in range(d)]
                his = [max(p[k] for p in region.points) + 1 for k in range(d)]
                for x0 in range(los[0], his[0] + 1):
                    for x1 in range(los[1], his[1] + 1):
                        if _member(cons, (x0, x1)):
                            assert (x0, x1) in member


class TestConnectivity:
    def test_single_edge(self):
        assert is_connected(explicit_region([(0, 0), (1, 0)]))

    def test_gap_of_one_site(self):
        assert not is_connected(explicit_region([(0, 0), (2, 0)]))

    def test_steep_parallelogram(self):
        params = ModelParams.make((2.0, 1.0), (1, 2))
        narrow = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(2, 2),
                            normal_frac=(1, 2))
        wide = RegionSpec(PARALLELOGRAM, base=(0, 0), lengths=(3, 2),
                          normal_frac=(1, 2))
        assert not is_connected(build_region(narrow, params))
        assert is_connected(build_region(wide, params))

    def test_threshold_values(self):
        assert connectivity_threshold(ModelParams.make((2.0, 1.0), (1, 0))) == 1
        assert connectivity_threshold(ModelParams.make((2.0, 1.0), (1, 2))) == 3
        thr = connectivity_threshold(ModelParams.make((2.0, 1.0, 1.0), (2, 1, 1)))
        assert thr == Fraction(3, 2)

    def test_threshold_guarantees_connected(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 100:
            s = Fraction(int(rng.integers(0, 7)), int(rng.choice([1, 2, 3])))
            params = ModelParams.make((2.0, 1.0), (1, s) if s else (1, 0))
            thr = connectivity_threshold(params)
            L1 = int(np.ceil(float(thr))) + int(rng.integers(0, 3))
            L2 = int(rng.integers(1, 4))
            base = (Fraction(int(rng.integers(-4, 5)), int(rng.choice([1, 2, 3]))),
                    int(rng.integers(-4, 5)))
            spec = RegionSpec(PARALLELOGRAM, base=base, lengths=(L1, L2),
                              normal_frac=(1, s))
            assert is_connected(build_region(spec, params))
            checked += 1


class TestFiltration:
    def test_box_sweep(self):
        filt = build_filtration(box_spec((2, 2)), P2, direction=1)
        assert filt.n_stages == 3
        assert filt.stages[0].points == ()
        assert filt.stages[1].points == ((0, 0), (1, 0))
        assert filt.stages[2].points == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_steep_parallelogram_stage_count(self):
        # boundary-aligned parallelogram at scale L = 2, swept along x2
        params = ModelParams.make((2.0, 1.0), (1, 2))
        s = Fraction(2)
        spec = RegionSpec(PARALLELOGRAM, base=(s * 2, -2), lengths=(4, 4),
                          normal_frac=(1, s))
        filt = build_filtration(spec, params, direction=1)
        assert filt.n_stages == 5
        union = set()
        for prev, cur in zip(filt.stages, filt.stages[1:]):
            assert set(prev.points) < set(cur.points)
            union = set(cur.points)
        assert union == set(build_region(spec, params).points)

    def test_antidiagonal_strips(self):
        params = ModelParams.make((2.0, 1.0), (1, 0))
        spec = RegionSpec(TRAPEZOID, base=(0, 0), lengths=(3, 2), slant=(1, -1))
        filt = build_filtration(spec, params, direction=0)
        for n, (prev, cur) in enumerate(zip(filt.stages, filt.stages[1:])):
            diff = set(cur.points) - set(prev.points)
            assert diff, f"stage {n + 1} added nothing"
            values = {p[0] - p[1] for p in diff}
            if n >= 1:  # the first cut absorbs every lower v-level at once
                assert values == {n}

    def test_strictness(self):
        assert build_filtration(box_spec((3,)), ModelParams.make((2.0,), (1,)),
                                direction=0).n_stages == 4


class TestClassifyCase:
    def test_case_2b_axis_normal(self):
        info = classify_case(ModelParams.make((2.0, 1.0), (1, 0)))
        assert info.label == "2b"
        assert info.params.m == (1.0, 0.0)

    def test_case_1a_permutes_loaded_axis(self):
        info = classify_case(ModelParams.make((2.0, 3.0), (0, 1)))
        assert info.label == "1a"
        assert info.params.lam == (3.0, 2.0)
        assert info.params.m == (1.0, 0.0)

    def test_case_2a_diagonal(self):
        from math import e

        info = classify_case(ModelParams.make((e, e), (1, 1)))
        assert info.label == "2a"
        assert abs(info.theta - pi) < 1e-7  # acos itself is sqrt(eps)-accurate here

    def test_case_1b(self):
        info = classify_case(ModelParams.make((2.0, 1.0), (0, 1)))
        assert info.label == "1b"
        assert info.params.lam == (2.0, 1.0)
        assert info.params.m == (0.0, 1.0)

    def test_gapless_bulk(self):
        with pytest.raises(GaplessBulk):
            classify_case(ModelParams.make((1.0, 1.0), (1, 0)))

    def test_gapless_direction(self):
        with pytest.raises(GaplessDirection):
            classify_case(ModelParams.make((0.5, 0.5), (1, 1)))

    def test_d3_cases(self):
        assert classify_case(ModelParams.make((2.0, 1.0, 1.0), (1, 3, 0))).label == "3a"
        assert classify_case(ModelParams.make((1.0, 1.0, 2.0), (4, 3, 0))).label == "3b"
        assert classify_case(ModelParams.make((2.0, 2.0, 2.0), (1, 1, 1))).label == "4"

    def test_symmetry_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            d = int(rng.integers(2, 4))
            lam = tuple(float(np.exp(rng.uniform(-1, 1))) for _ in range(d))
            m = tuple(int(v) for v in rng.integers(-3, 4, size=d))
            if all(v == 0 for v in m):
                m = (1,) + m[1:]
            params = ModelParams.make(lam, m)
            try:
                label = classify_case(params).label
            except (GaplessBulk, GaplessDirection):
                continue
            perm = tuple(rng.permutation(d))
            signs = tuple(int(s) for s in rng.choice([-1, 1], size=d))
            other = params.reflected(signs).permuted(perm)
            assert classify_case(other).label == label


class TestSerialization:
    def test_roundtrip(self):
        spec = RegionSpec(PARALLELOGRAM, base=(Fraction(1, 2), 0), lengths=(3, 2),
                          normal_frac=(1, Fraction(1, 2)))
        again = spec_from_json(spec_to_json(spec))
        assert again == spec

    def test_explicit_roundtrip(self):
        spec = RegionSpec(EXPLICIT, points=((0, 0), (1, 0)))
        assert spec_from_json(spec_to_json(spec)) == spec

    def test_points_csv(self):
        region = explicit_region([(1, 0), (0, 0)])
        assert points_csv(region) == "0,0\n1,0\n"
